#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "barostat/barostat.h"
#include "doctest.h"

TEST_CASE("version and status names") {
  CHECK(std::string(bs_version()).size() > 0);
  CHECK(std::string(bs_status_name(BS_FIT_REFUSED)) == "fit_refused");
  CHECK(bs_exit_code(BS_OK) == 0);
  CHECK(bs_exit_code(BS_CONFIG) == 2);
  CHECK(bs_exit_code(BS_INVALID_ARGUMENT) == 2);
  CHECK(bs_exit_code(BS_IO) == 2);
  CHECK(bs_exit_code(BS_NUMERICAL) == 3);
  CHECK(bs_exit_code(BS_FIT_REFUSED) == 4);
  CHECK(bs_exit_code(BS_INTERNAL) == 1);
}

TEST_CASE("steady state through handles") {
  const int n = 256;
  std::vector<double> F(n);
  for (int i = 0; i < n; ++i) F[i] = (i + 0.5) / n;
  bs_field* f = nullptr;
  REQUIRE(bs_field_create_1d(n, 1.0, F.data(), &f) == BS_OK);
  CHECK(bs_field_size(f) == static_cast<size_t>(n));
  double integral = 0.0;
  REQUIRE(bs_field_integrate(f, &integral) == BS_OK);
  CHECK(integral == doctest::Approx(0.5).epsilon(1e-12));

  double thr = 0.0;
  REQUIRE(bs_mass_threshold(f, 2.0, &thr) == BS_OK);
  CHECK(std::abs(thr - 0.25) <= 1e-10);

  bs_steady* s = nullptr;
  REQUIRE(bs_steady_solve(f, 2.0, 1.0, &s) == BS_OK);
  bs_steady_info info{};
  REQUIRE(bs_steady_get_info(s, &info) == BS_OK);
  CHECK(std::abs(info.k0 + 1.5) <= 1e-10);
  CHECK(info.regime == BS_UNIQUE_POSITIVE);
  CHECK(info.residual <= 1e-10);
  bs_field* rho = nullptr;
  REQUIRE(bs_steady_density(s, &rho) == BS_OK);
  std::vector<double> vals(n);
  REQUIRE(bs_field_values(rho, vals.data(), vals.size()) == BS_OK);
  CHECK(vals[0] == doctest::Approx(info.min_rho_s));
  CHECK(bs_field_values(rho, vals.data(), 3) == BS_INVALID_ARGUMENT);

  bs_steady* vac = nullptr;
  REQUIRE(bs_steady_solve(f, 2.0, 0.125, &vac) == BS_OK);
  REQUIRE(bs_steady_get_info(vac, &info) == BS_OK);
  CHECK(std::abs(info.k0 - (1 - 1 / std::sqrt(2.0))) <= 1e-8);
  CHECK(info.min_rho_s == 0.0);
  CHECK(info.regime != BS_UNIQUE_POSITIVE);

  bs_field_free(rho);
  bs_steady_free(s);
  bs_steady_free(vac);
  bs_field_free(f);
}

TEST_CASE("errors carry status and message") {
  bs_field* f = nullptr;
  CHECK(bs_field_create_1d(2, 1.0, nullptr, &f) == BS_INVALID_ARGUMENT);
  CHECK(f == nullptr);
  CHECK(std::string(bs_last_error()).size() > 0);
  CHECK(std::string(bs_last_error_json()).find("\"invalid_argument\"") != std::string::npos);
  double g = 0.0;
  CHECK(bs_relative_potential(-1.0, 1.0, 2.0, &g) == BS_INVALID_ARGUMENT);
  CHECK(bs_relative_potential(3.0, 1.0, 2.0, &g) == BS_OK);
  CHECK(g == doctest::Approx(4.0));
  CHECK(std::string(bs_last_error()).empty());
  double th = 0.0;
  REQUIRE(bs_theta(2.0, &th) == BS_OK);
  CHECK(th == doctest::Approx(1.0 / 3.0));
  CHECK(bs_field_integrate(nullptr, &g) == BS_INVALID_ARGUMENT);
  CHECK(bs_set_threads(0) == BS_INVALID_ARGUMENT);
  CHECK(bs_run("bogus", nullptr, nullptr, 0, 0, 0, nullptr) == BS_CONFIG);
}

TEST_CASE("series fit") {
  std::vector<double> t, e;
  for (int k = 0; k <= 400; ++k) {
    t.push_back(0.05 * k);
    e.push_back(2.0 * std::exp(-1.3 * t.back()));
  }
  bs_fit fit{};
  REQUIRE(bs_fit_series(t.data(), e.data(), t.size(), &fit) == BS_OK);
  CHECK(std::abs(fit.rate - 1.3) <= 1e-10);
  CHECK(fit.envelope_pass == 1);
  CHECK(bs_fit_series(t.data(), e.data(), 20, &fit) == BS_FIT_REFUSED);
}

TEST_CASE("simulation from a config file") {
  const char* path = "capi_sim.json";
  std::ofstream(path) << R"({"gas": {"gamma": 2.0, "mu": 0.02}, "grid": {"n": [64]},
    "potential": {"name": "cosine", "A": 0.5}, "initial": {"amplitude": 0.05},
    "solver": {"t_end": 8.0, "record_dt": 0.05}, "lyapunov": {"entropy_samples": 2000}})";
  bs_trajectory* tr = nullptr;
  REQUIRE(bs_simulate(path, &tr) == BS_OK);
  REQUIRE(bs_trajectory_rows(tr) == 161);
  double row[9];
  REQUIRE(bs_trajectory_row(tr, 0, row) == BS_OK);
  CHECK(row[0] == 0.0);
  CHECK(std::isnan(row[7]));
  double delta = 0.0;
  int sandwich = 0;
  REQUIRE(bs_trajectory_lyapunov(tr, &delta, &sandwich) == BS_OK);
  CHECK(delta > 0.0);
  CHECK(sandwich == 1);
  REQUIRE(bs_trajectory_row(tr, 10, row) == BS_OK);
  CHECK(row[7] >= 0.25 * row[4]);
  CHECK(row[7] <= 2.0 * row[4]);
  bs_fit fit{};
  REQUIRE(bs_trajectory_fit(tr, &fit) == BS_OK);
  CHECK(fit.rate > 0.0);
  CHECK(bs_trajectory_row(tr, 1000, row) == BS_INVALID_ARGUMENT);
  bs_trajectory_free(tr);

  std::ofstream("capi_bad.json") << "{\"gas\": [1, 2]}";
  CHECK(bs_simulate("capi_bad.json", &tr) == BS_CONFIG);
  CHECK(bs_simulate("does_not_exist.json", &tr) == BS_IO);
}
