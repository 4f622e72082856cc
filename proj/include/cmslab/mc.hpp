#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "cmslab/ode.hpp"
#include "cmslab/sde.hpp"

namespace cmslab {

struct McEstimate {
  std::complex<double> mean;
  double stderr_re = 0.0;  // per-component standard errors
  double stderr_im = 0.0;
  long n_paths = 0;
  std::uint64_t root_seed = 0;
};

/// One Monte Carlo path functional: maps a path index (used to derive the
/// path's random streams) and a step size to the sampled value.
using PathFunctional = std::function<std::complex<double>(std::uint64_t path_index, double dt)>;

/// Mean and standard error over paths [path_offset, path_offset + n_paths).
/// Paths are evaluated in parallel; the reduction is a serial compensated
/// sum over the per-path buffer, so the result is independent of the thread
/// count.  force_serial runs the path loop single-threaded (benchmark
/// reference).
McEstimate mc_expectation(const PathFunctional& fn, long n_paths, std::uint64_t path_offset,
                          double dt, std::uint64_t root_seed, bool force_serial = false);

struct IdentityReport {
  std::string tag;
  std::complex<double> predicted;
  McEstimate estimate;  // dt-extrapolated
  double z_score = 0.0;
  bool pass = false;
  bool reran = false;  // failed once and was rerun at 4x paths
};

/// Evaluates the functional at dt and dt/2 on disjoint path ranges,
/// extrapolates the O(dt) discretization bias away, and z-tests the result
/// against the prediction (componentwise for complex values, pass at z <= 3).
/// A failing identity is rerun once at 4x paths before being reported.
IdentityReport check_identity(const std::string& tag, std::complex<double> predicted,
                              const PathFunctional& fn, long n_paths, double dt,
                              std::uint64_t root_seed);

/// Characteristic-polynomial expectation identity of the family: the product
/// of (companion - particle) factors against its closed-form prediction.
/// The companion is the family's one-dimensional partner process started at
/// y0 (Brownian motion, Bessel, 1D Jacobi, or the exact exponential process
/// for the torus).
IdentityReport char_poly_expectation(const ModelSpec& model, const ParticleState& x0, double y0,
                                     double t, long n_paths, double dt, std::uint64_t root_seed);

/// E[prod(z - X_t^i)] for the unrenormalized Hermite-type diffusion started
/// at the origin: (tk/2)^{N/2} H_N(z / sqrt(2kt)).
double hermite_char_poly_closed_form(int n, double k, double t, double z);

/// E[prod(y - (X_t^i)^2)] for the unrenormalized Laguerre-type diffusion
/// started at the origin: (-1)^N (2 t beta)^N N! L_N^{(nu+1/(2 beta)-1)}(y/(2 t beta)).
double laguerre_char_poly_closed_form(int n, double nu, double beta, double t, double y);

/// E[e_l] of the diffusion at time t against its inverse-temperature-free
/// deterministic prediction, across an inverse-temperature grid (infinity
/// entries are checked deterministically).
std::vector<IdentityReport> symmetric_fn_invariance(const ModelSpec& base, const ParticleState& x0,
                                                    double t, int l,
                                                    std::span<const double> inv_temps,
                                                    long n_paths, double dt,
                                                    std::uint64_t root_seed);

/// Max z-score of the mean increment between adjacent sample times over a
/// common path ensemble (ensemble[path][time]); small iff the sampled series
/// is statistically a martingale.
double martingale_check(const std::vector<std::vector<std::complex<double>>>& ensemble);

struct DecayReport {
  std::vector<double> times;
  std::vector<double> distance;  // Euclidean; tau-coordinates for compact Jacobi
  std::vector<double> bound;
  bool pointwise_ok = false;  // distance <= bound * (1 + 1e-8) everywhere
  double fitted_rate = 0.0;   // least-squares log-slope over the final third
};

/// Integrates the flow from two starts and checks the family's contraction
/// bound pointwise: rate N(N-1)/2 resp. N(N+nu-1) for the confined
/// Hermite/Laguerre flows, the sqrt(...t+1)-prefactor bound for the free
/// Hermite flow (equal sums and norms required), the trigonometric-
/// coordinate rate (p+q+2 min(p,q)+2-2N)/4 for compact Jacobi, and N/2 for
/// the torus (equal sums required).
DecayReport decay_rate_check(const ModelSpec& model, const ParticleState& a,
                             const ParticleState& b, std::span<const double> t_grid,
                             const SolveConfig& config);

}  // namespace cmslab
