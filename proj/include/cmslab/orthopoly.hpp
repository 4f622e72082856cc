#pragma once

#include <span>
#include <vector>

#include "cmslab/errors.hpp"

namespace cmslab {

enum class PolyFamily { Hermite, Laguerre, Jacobi };

/// Laguerre uses alpha; Jacobi uses alpha and beta.  Szego conventions
/// throughout (Hermite weight e^{-x^2}, leading coefficient 2^n).
struct PolyParams {
  double alpha = 0.0;
  double beta = 0.0;
};

double eval_classical(PolyFamily family, int degree, PolyParams params, double x);
double eval_classical_derivative(PolyFamily family, int degree, PolyParams params, double x);

/// Ordered zeros of a classical polynomial, certified by the electrostatic
/// residual of the family's Stieltjes system.
struct ZeroSet {
  PolyFamily family;
  int degree;
  PolyParams params;
  std::vector<double> zeros;
  double residual;
};

inline constexpr int kMaxDegree = 64;
inline constexpr double kZeroResidualTol = 1e-10;

/// Golub-Welsch eigenvalues of the symmetric tridiagonal recurrence matrix,
/// polished by Newton steps on the recurrence-evaluated polynomial.
ZeroSet zeros(PolyFamily family, int degree, PolyParams params);

/// Max |Stieltjes electrostatic residual| over the candidate vector;
/// exactly zero at the true zero vector.
double verify_stieltjes(PolyFamily family, PolyParams params, std::span<const double> candidate);

}  // namespace cmslab
