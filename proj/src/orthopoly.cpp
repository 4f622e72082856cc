#include "cmslab/orthopoly.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace cmslab {

namespace {

void check_params(PolyFamily family, int degree, PolyParams params) {
  if (degree < 0) throw InvalidParams("degree must be >= 0");
  if (family == PolyFamily::Laguerre && !(params.alpha > -1.0))
    throw InvalidParams("Laguerre requires alpha > -1");
  if (family == PolyFamily::Jacobi && (!(params.alpha > -1.0) || !(params.beta > -1.0)))
    throw InvalidParams("Jacobi requires alpha, beta > -1");
}

}  // namespace

double eval_classical(PolyFamily family, int degree, PolyParams params, double x) {
  check_params(family, degree, params);
  const double a = params.alpha, b = params.beta;
  if (degree == 0) return 1.0;

  double pm = 1.0;  // value at degree n-1
  double pn;        // value at degree n
  switch (family) {
    case PolyFamily::Hermite:
      pn = 2.0 * x;
      for (int n = 1; n < degree; ++n) {
        double next = 2.0 * x * pn - 2.0 * n * pm;
        pm = pn;
        pn = next;
      }
      return pn;
    case PolyFamily::Laguerre:
      pn = 1.0 + a - x;
      for (int n = 1; n < degree; ++n) {
        double next = ((2.0 * n + 1.0 + a - x) * pn - (n + a) * pm) / (n + 1.0);
        pm = pn;
        pn = next;
      }
      return pn;
    case PolyFamily::Jacobi:
      pn = 0.5 * (a + b + 2.0) * x + 0.5 * (a - b);
      for (int n = 2; n <= degree; ++n) {
        double s = 2.0 * n + a + b;
        double c1 = 2.0 * n * (n + a + b) * (s - 2.0);
        double c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        double c3 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * s;
        double next = (c2 * pn - c3 * pm) / c1;
        pm = pn;
        pn = next;
      }
      return pn;
  }
  return 0.0;
}

double eval_classical_derivative(PolyFamily family, int degree, PolyParams params, double x) {
  check_params(family, degree, params);
  if (degree == 0) return 0.0;
  switch (family) {
    case PolyFamily::Hermite:
      return 2.0 * degree * eval_classical(family, degree - 1, params, x);
    case PolyFamily::Laguerre:
      return -eval_classical(family, degree - 1, {params.alpha + 1.0, 0.0}, x);
    case PolyFamily::Jacobi:
      return 0.5 * (degree + params.alpha + params.beta + 1.0) *
             eval_classical(family, degree - 1, {params.alpha + 1.0, params.beta + 1.0}, x);
  }
  return 0.0;
}

double verify_stieltjes(PolyFamily family, PolyParams params, std::span<const double> candidate) {
  const int n = static_cast<int>(candidate.size());
  for (int i = 0; i + 1 < n; ++i)
    if (!(candidate[i] < candidate[i + 1])) throw DegenerateState("candidate has ties");

  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = candidate[i];
    double interaction = 0.0;
    double r = 0.0;
    switch (family) {
      case PolyFamily::Hermite:
        for (int j = 0; j < n; ++j)
          if (j != i) interaction += 1.0 / (z - candidate[j]);
        r = z - interaction;
        break;
      case PolyFamily::Laguerre:
        for (int j = 0; j < n; ++j)
          if (j != i) interaction += 2.0 * z / (z - candidate[j]);
        r = z - (params.alpha + 1.0) - interaction;
        break;
      case PolyFamily::Jacobi:
        for (int j = 0; j < n; ++j)
          if (j != i) interaction += 1.0 / (z - candidate[j]);
        r = interaction + 0.5 * (params.alpha + 1.0) / (z - 1.0) +
            0.5 * (params.beta + 1.0) / (z + 1.0);
        break;
    }
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

ZeroSet zeros(PolyFamily family, int degree, PolyParams params) {
  check_params(family, degree, params);
  if (degree < 1) throw InvalidParams("zeros: degree must be >= 1");
  if (degree > kMaxDegree) throw InvalidParams("zeros: degrees beyond 64 are not supported");
  const double a = params.alpha, b = params.beta;

  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(degree, degree);
  for (int k = 0; k < degree; ++k) {
    double diag = 0.0, off = 0.0;
    switch (family) {
      case PolyFamily::Hermite:
        diag = 0.0;
        off = std::sqrt(k / 2.0);
        break;
      case PolyFamily::Laguerre:
        diag = 2.0 * k + a + 1.0;
        off = std::sqrt(k * (k + a));
        break;
      case PolyFamily::Jacobi: {
        double s = 2.0 * k + a + b;
        diag = (k == 0) ? (b - a) / (a + b + 2.0)
                        : (b * b - a * a) / (s * (s + 2.0));
        if (k == 1) {
          off = 2.0 / (2.0 + a + b) * std::sqrt((1.0 + a) * (1.0 + b) / (3.0 + a + b));
        } else if (k >= 2) {
          off = 2.0 / s * std::sqrt(k * (k + a) * (k + b) * (k + a + b) /
                                    ((s + 1.0) * (s - 1.0)));
        }
        break;
      }
    }
    jacobi(k, k) = diag;
    if (k >= 1) {
      jacobi(k, k - 1) = off;
      jacobi(k - 1, k) = off;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  if (es.info() != Eigen::Success) throw ConvergenceFailure("tridiagonal eigensolver failed");

  ZeroSet zs{family, degree, params, {}, 0.0};
  zs.zeros.assign(es.eigenvalues().data(), es.eigenvalues().data() + degree);
  std::sort(zs.zeros.begin(), zs.zeros.end());

  for (double& z : zs.zeros) {
    for (int it = 0; it < 2; ++it) {
      double pv = eval_classical(family, degree, params, z);
      double dv = eval_classical_derivative(family, degree, params, z);
      if (dv != 0.0) z -= pv / dv;
    }
  }

  for (int i = 0; i + 1 < degree; ++i)
    if (!(zs.zeros[i] < zs.zeros[i + 1])) throw ConvergenceFailure("zeros not strictly ordered");
  if (family == PolyFamily::Laguerre && !(zs.zeros[0] > 0.0))
    throw ConvergenceFailure("Laguerre zero escaped (0, inf)");
  if (family == PolyFamily::Jacobi && (!(zs.zeros[0] > -1.0) || !(zs.zeros[degree - 1] < 1.0)))
    throw ConvergenceFailure("Jacobi zero escaped (-1, 1)");

  zs.residual = verify_stieltjes(family, params, zs.zeros);
  if (!(zs.residual < kZeroResidualTol))
    throw ConvergenceFailure("electrostatic residual above tolerance");
  return zs;
}

}  // namespace cmslab
