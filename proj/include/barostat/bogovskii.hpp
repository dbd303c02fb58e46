#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "barostat/fields.hpp"

namespace barostat {

/// Solution of div v = f, v = 0 on the boundary, for mean-zero f.
///
/// The primary unknowns live on cell faces (x-faces (nx+1) x ny, y-faces
/// nx x (ny+1), index i * stride + j); the normal faces on the walls are zero
/// exactly. `v` holds face averages at cell centers.
struct BogovskiiSolve {
  VectorField v;
  ScalarField f;
  std::vector<double> face_x;
  std::vector<double> face_y;
  double div_residual = 0.0;  ///< ||D v - f||_2 / ||f||_2 (staggered divergence)
  double h1_ratio = 0.0;      ///< ||v||_{H^1} / ||f||_{L^2}
  int iterations = 0;
};

/// 1D: v(x) = int_0^x f, a cumulative face sum. 2D: minimum-H^1 solution of
/// the staggered div v = f, computed by conjugate gradients on the Schur
/// complement D A^-1 D^T with A the Dirichlet vector Laplacian.
/// Throws InvalidArgument unless |mean f| <= 1e-12 ||f||_2 (plus an absolute
/// 1e-300), Numerical if the solve stalls.
BogovskiiSolve bogovskii(const ScalarField& f);

/// Staggered divergence of face data, the operator inverted by bogovskii.
ScalarField face_divergence(const Grid& g, const std::vector<double>& face_x,
                            const std::vector<double>& face_y);

/// ||v||_p + ||grad v||_p on cell averages, gradient with odd wall ghosts.
double w1p_norm(const VectorField& v, double p);

/// Smooth random mean-zero field: cosine modes up to `modes` per axis with
/// N(0,1) / (1 + k^2 + l^2) amplitudes.
ScalarField random_smooth_field(const Grid& g, std::mt19937_64& rng, int modes = 6);

struct NormScan {
  double w1p_worst = 0.0;  ///< max ||B f||_{W^{1,p}} / ||f||_p
  double div_form_worst = 0.0;  ///< max ||B (div g)||_p / ||g||_p
  int trials = 0;
};

/// Randomized estimate of the operator norms. The same seed gives the same
/// continuous inputs at every resolution. Requires trials >= 10.
NormScan bogovskii_norm_scan(const Grid& g, double p, int trials, std::uint64_t seed = 1);

/// Kernel radius in cells along an axis: offsets k with |k| h < eps.
int mollifier_radius(const Grid& g, int axis, double eps);

/// Zero-extended convolution with the normalized bump (1 - (r/eps)^2)^2.
/// The result lives on the grid enlarged by the kernel radius (origin
/// shifted accordingly). eps below one cell returns f with a warning.
ScalarField mollify_extended(const ScalarField& f, double eps);

/// mollify_extended restricted back to the grid of f.
ScalarField mollify(const ScalarField& f, double eps);

/// Interior set K: cells i with r + 1 <= i <= n - 2 - r per axis, r the
/// kernel radius, so kernel footprints and difference stencils never reach
/// the wall ghosts.
std::vector<char> interior_mask(const Grid& g, double eps);

struct CommutatorField {
  ScalarField r;  ///< div([g]_eps u) - [div(g u)]_eps on K, zero elsewhere
  std::vector<char> mask;
  std::size_t k_cells = 0;
};

/// Commutator of mollification with transport for g = rho^theta.
/// `k_eps` (>= eps) fixes K so several eps share one interior set; by default
/// K is taken from eps itself. Throws if K is empty.
CommutatorField commutator_residual(const ScalarField& rho, const VectorField& u,
                                    double theta, double eps, double k_eps = 0.0);

/// L^q norm of the commutator over K.
double commutator_norm(const CommutatorField& c, double q);

struct CommutatorBound {
  double c_hat = 0.0;        ///< max ||r||_{L^r(K)} / (||g||_p ||u||_{W^{1,q}})
  double worst_excess = 0.0; ///< max residual - c_hat * product (<= 0)
  int trials = 0;
};

/// Random smooth (rho, u) with u = 0 on the wall; 1/r = 1/p + 1/q.
CommutatorBound commutator_bound_scan(const Grid& g, double theta, double eps,
                                      double p, double q, int trials, std::uint64_t seed = 1);

}  // namespace barostat
