#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "cmslab/errors.hpp"

namespace cmslab {

enum class Family { HermiteA, LaguerreB, JacobiCompact, JacobiNoncompact, Torus };

const char* family_name(Family f);

/// Model family plus its parameters.  inv_temp = infinity selects the
/// deterministic (frozen) flow; a set `lambda` selects the confined
/// (asymptotically stationary) Hermite/Laguerre variant.
struct ModelSpec {
  Family family = Family::HermiteA;
  int n = 1;
  double nu = 1.0;          // LaguerreB only
  double p = 0.0, q = 0.0;  // Jacobi families only
  std::optional<double> lambda;
  double inv_temp = std::numeric_limits<double>::infinity();

  bool frozen() const { return std::isinf(inv_temp); }
  void validate() const;  // throws InvalidParams
};

/// Canonical confinement rate: N(N-1)/2 for Hermite, N(N+nu-1) for Laguerre.
double canonical_lambda(const ModelSpec& model);

/// Time-stamped ordered coordinate vector.  Torus coordinates are angles
/// stored unwrapped in the fundamental chamber x_1 <= ... <= x_N <= x_1 + 2pi.
struct ParticleState {
  double time = 0.0;
  std::vector<double> coords;

  ParticleState() = default;
  ParticleState(double t, std::vector<double> x) : time(t), coords(std::move(x)) {}

  /// Complex view w_j = exp(i x_j) for the torus family.
  std::vector<std::complex<double>> torus_view() const;
};

struct IndexRange {
  int begin = 0;
  int end = 0;  // half-open
  bool at_wall = false;
  double wall = 0.0;
};

struct BoundaryFlag {
  bool on_boundary = false;
  std::vector<IndexRange> degenerate_clusters;
};

/// Relative degeneracy tolerance: coordinates i, j coincide when the gap is
/// below 1e-12 * (1 + |x_i| + |x_j|); wall contact is detected analogously.
inline constexpr double kDegeneracyTol = 1e-12;

bool in_chamber(const ModelSpec& model, std::span<const double> x);
bool strictly_interior(const ModelSpec& model, std::span<const double> x);
BoundaryFlag boundary_flag(const ModelSpec& model, const ParticleState& state);

/// Right-hand side of the family's frozen ODE.  Throws DegenerateState when
/// the state touches the chamber boundary.
std::vector<double> drift(const ModelSpec& model, const ParticleState& state);

/// drift plus the linear restoring term -lambda * x.  Uses model.lambda when
/// set, otherwise the canonical rate.  Unsupported for Jacobi/Torus families.
std::vector<double> stationary_drift(const ModelSpec& model, const ParticleState& state);

/// RHS used by the integrator: stationary_drift when model.lambda is set,
/// plain drift otherwise.
std::vector<double> flow_rhs(const ModelSpec& model, const ParticleState& state);

/// Gradient-system form of the compact Jacobi flow in trigonometric
/// coordinates x_i = cos(tau_i), with pi >= tau_1 >= ... >= tau_N >= 0.
std::vector<double> trig_jacobi_drift(const ModelSpec& model, std::span<const double> tau);

/// Torus flow in w-coordinates, w_j = exp(i x_j) on the unit circle.
std::vector<std::complex<double>> torus_w_drift(const ModelSpec& model,
                                                std::span<const std::complex<double>> w);

}  // namespace cmslab
