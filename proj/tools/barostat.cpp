// Command-line front end; everything goes through the C interface.
#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "barostat/barostat.h"

int main(int argc, char** argv) {
  CLI::App app{"barostat: equilibria, simulation and decay analysis for barotropic compressible flow"};
  app.set_version_flag("--version", std::string(bs_version()));
  app.require_subcommand(1);

  std::string config, out = "out", trajectory;
  int threads = 0;
  std::uint64_t seed = 0;

  struct Cmd {
    const char* name;
    const char* help;
  };
  const Cmd cmds[] = {
      {"steady", "solve and classify the equilibrium"},
      {"simulate", "run the time-dependent solver and analyse the decay"},
      {"verify", "check the inequalities and operators on one instance"},
      {"fit", "fit the decay rate of a trajectory CSV"},
      {"sweep", "rate table over gamma, amplitude and n"},
  };
  std::vector<CLI::Option*> seed_opts;
  for (const Cmd& c : cmds) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    auto* cfg = sub->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    if (std::string(c.name) != "fit") cfg->required();
    sub->add_option("--out", out, "output directory")->capture_default_str();
    sub->add_option("--threads", threads, "worker threads")->envname("BAROSTAT_THREADS")->check(CLI::PositiveNumber);
    seed_opts.push_back(sub->add_option("--seed", seed, "seed for randomized scans (overrides the config)"));
    if (std::string(c.name) == "fit")
      sub->add_option("--trajectory", trajectory, "trajectory CSV")->check(CLI::ExistingFile);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const CLI::App* sub = app.get_subcommands().front();
  bool has_seed = false;
  for (auto* o : seed_opts) has_seed = has_seed || o->count() > 0;
  const bs_status st = bs_run(sub->get_name().c_str(), config.empty() ? nullptr : config.c_str(), out.c_str(),
                              threads, seed, has_seed ? 1 : 0, trajectory.empty() ? nullptr : trajectory.c_str());
  if (st != BS_OK) {
    std::fprintf(stderr, "%s\n", bs_last_error_json());
    return bs_exit_code(st);
  }
  std::printf("%s: outputs in %s\n", sub->get_name().c_str(), out.c_str());
  return 0;
}
