#pragma once

#include <complex>
#include <span>
#include <vector>

#include "cmslab/model.hpp"
#include "cmslab/rng.hpp"

namespace cmslab {

enum class BoundaryPolicy { ReflectOrder, RejectResample };

struct SdeConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  BoundaryPolicy boundary_policy = BoundaryPolicy::ReflectOrder;

  void validate() const;
};

struct PathSample {
  double time = 0.0;
  std::vector<double> coords;
};

/// Euler-Maruyama path of the family's diffusion in its renormalized form
/// (Hermite/Laguerre diffusion 1/sqrt(inv_temp); Jacobi sqrt(2/inv_temp)
/// times the local volatility; torus sqrt(2/inv_temp)).  inv_temp = infinity
/// degenerates to the deterministic flow.  Boundary starts are desingularized
/// before noise is applied.  Emits one sample per requested time (snapped to
/// the step grid) in increasing order.
std::vector<PathSample> simulate(const ModelSpec& model, const ParticleState& x0,
                                 const SdeConfig& config, const RngStream& rng,
                                 std::span<const double> sample_times);

enum class CompanionKind { Brownian, OU, Bessel1D, JacobiCompact1D, JacobiNoncompact1D, TorusExp };

struct CompanionSpec {
  CompanionKind kind = CompanionKind::Brownian;
  double lambda = 1.0;  // OU rate
  double alpha = 0.0;   // Bessel index
  double p = 0.0, q = 0.0;
  int n = 1;  // TorusExp drift rate
};

struct CompanionSample {
  double time = 0.0;
  std::complex<double> value;
};

/// One-dimensional companion processes.  TorusExp is sampled exactly as
/// exp(i sqrt(2) (y0 + B_t) + n t); the others are Euler-Maruyama with
/// reflection at their hard walls.
std::vector<CompanionSample> simulate_companion(const CompanionSpec& spec, double y0,
                                                const SdeConfig& config, const RngStream& rng,
                                                std::span<const double> sample_times);

}  // namespace cmslab
