#pragma once

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <vector>

#include "cmslab/ode.hpp"

namespace cmslab {

/// Monic degree-N polynomial in the convention
///   H(t,z) = sum_l (-1)^{N-l} e_{N-l} z^l,
/// stored as coeffs[0..N] with coeffs[N] = 1.  Coefficients are real for
/// all families except the torus; for Laguerre the variable is s = z^2 and
/// the roots are the squared particle coordinates.
struct PolyRep {
  Family family = Family::HermiteA;
  std::vector<std::complex<double>> coeffs;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

/// Expands the characteristic polynomial of a particle configuration
/// (coordinates in the family's state-space convention).
PolyRep poly_from_roots(const ModelSpec& model, std::span<const double> coords);

/// Recovers ordered state-space coordinates from a monic polynomial via
/// companion-matrix eigenvalues plus Newton polish.  Throws NonRealRoots
/// when a root leaves the real line (resp. the unit circle) beyond
/// 1e-8 * (1 + |Re|) — the flow has left the chamber.
std::vector<double> roots_from_poly(const PolyRep& p);

/// (N+1)x(N+1) matrix A of the family's inverse heat equation acting on
/// coefficient vectors: dc/dt = A c.  Degree preservation (no spill past N)
/// is structural per family.  model.lambda feeds the confined
/// Hermite/Laguerre variants.
Eigen::MatrixXd operator_matrix(const ModelSpec& model);

/// exp(tA) applied to p0 (exact diagonal form for the torus).
PolyRep coefficient_flow(const ModelSpec& model, const PolyRep& p0, double t);

/// Space-time harmonic heat polynomials: Hermite (2t)^{n/2} H_n(z/sqrt(2t))
/// and the Bessel-type prod (z^2 - 2t z_i^{(nu-1)}).
double heat_polynomial(Family family, int n, double t, double z, double nu = 1.0);

/// Coefficients (in z) of the Hermite heat polynomial H_n(t, z).
std::vector<double> hermite_heat_poly_coeffs(int n, double t);

/// Max over sample triplets and a Chebyshev z-grid of the normalized
/// inverse-heat-equation residual |dH/dt - A H| / (1 + max|H|), with dH/dt
/// from central differences on consecutive trajectory samples.
double pde_residual(const Trajectory& traj);

/// Elementary symmetric polynomials e_0..e_N of the given values.
std::vector<double> elementary_symmetric(std::span<const double> x);
std::vector<std::complex<double>> elementary_symmetric(std::span<const std::complex<double>> x);

}  // namespace cmslab
