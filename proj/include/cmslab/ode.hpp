#pragma once

#include <span>
#include <utility>
#include <vector>

#include "cmslab/model.hpp"

namespace cmslab {

struct SolveConfig {
  double rel_tol = 1e-11;
  double abs_tol = 1e-13;
  double max_step = 0.1;
  double desing_step = 1e-8;  // analytic start-up step from the boundary
  double t_end = 1.0;

  void validate() const;
};

struct StepStats {
  long accepted = 0;
  long rejected = 0;
};

struct Trajectory {
  ModelSpec model;
  std::vector<ParticleState> samples;  // strictly increasing times
  SolveConfig config;
  StepStats stats;

  const ParticleState& back() const { return samples.back(); }
};

/// Integrates the family's frozen flow from x0 (boundary starts allowed) up
/// to config.t_end with an embedded adaptive Runge-Kutta 5(4) pair.  Samples
/// are emitted at the requested times plus t_end.
Trajectory solve(const ModelSpec& model, const ParticleState& x0, const SolveConfig& config,
                 std::span<const double> sample_times = {});

/// Replaces each degenerate cluster by its local self-similar profile at
/// time delta; interior states are returned unchanged.
ParticleState desingularize_start(const ModelSpec& model, const ParticleState& x0, double delta);

/// The explicit special solution: sqrt(2t) * (Hermite zeros), sqrt(2t) *
/// sqrt(Laguerre zeros), the Jacobi zero vector, or the equally spaced torus
/// configuration with the given conserved mean.
ParticleState self_similar(const ModelSpec& model, double t, double torus_mean = 0.0);

/// Solves the confined Hermite flow directly and via the time-change of the
/// free flow; the two coincide up to solver tolerance.
std::pair<ParticleState, ParticleState> ou_transform_check(const ModelSpec& model, double lambda,
                                                           const ParticleState& x0, double t,
                                                           const SolveConfig& config);

struct AngularPath {
  std::vector<double> times;
  std::vector<std::vector<double>> psi;  // unit vectors
};

/// Time-reparametrized angular part psi(t) = x(T(t)) / ||x(T(t))||, which
/// solves the confined flow at the canonical rate.
AngularPath angular_transform(const ModelSpec& model, const ParticleState& x0,
                              std::span<const double> times, const SolveConfig& config);

}  // namespace cmslab
