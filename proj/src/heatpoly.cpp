#include "cmslab/heatpoly.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

#include "cmslab/orthopoly.hpp"

namespace cmslab {

namespace {

using cd = std::complex<double>;

constexpr double kRealityTol = 1e-8;

cd horner(const std::vector<cd>& c, cd z) {
  cd v = 0.0;
  for (int m = static_cast<int>(c.size()) - 1; m >= 0; --m) v = v * z + c[m];
  return v;
}

cd horner_deriv(const std::vector<cd>& c, cd z) {
  cd v = 0.0;
  for (int m = static_cast<int>(c.size()) - 1; m >= 1; --m) v = v * z + static_cast<double>(m) * c[m];
  return v;
}

// Roots in the polynomial's own variable (s = z^2 for Laguerre, w = e^{ix}
// for the torus) from the state-space coordinates.
std::vector<cd> poly_variable_roots(const ModelSpec& model, std::span<const double> coords) {
  std::vector<cd> roots(coords.size());
  for (size_t i = 0; i < coords.size(); ++i) {
    switch (model.family) {
      case Family::LaguerreB:
        roots[i] = coords[i] * coords[i];
        break;
      case Family::Torus:
        roots[i] = std::polar(1.0, coords[i]);
        break;
      default:
        roots[i] = coords[i];
    }
  }
  return roots;
}

std::vector<double> chebyshev_grid(double lo, double hi, int nodes) {
  std::vector<double> grid(nodes);
  for (int j = 0; j < nodes; ++j) {
    double c = std::cos(M_PI * (2.0 * j + 1.0) / (2.0 * nodes));
    grid[j] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * c;
  }
  return grid;
}

}  // namespace

std::vector<std::complex<double>> elementary_symmetric(std::span<const cd> x) {
  std::vector<cd> e(x.size() + 1, 0.0);
  e[0] = 1.0;
  for (size_t i = 0; i < x.size(); ++i)
    for (size_t l = i + 1; l >= 1; --l) e[l] += x[i] * e[l - 1];
  return e;
}

std::vector<double> elementary_symmetric(std::span<const double> x) {
  std::vector<double> e(x.size() + 1, 0.0);
  e[0] = 1.0;
  for (size_t i = 0; i < x.size(); ++i)
    for (size_t l = i + 1; l >= 1; --l) e[l] += x[i] * e[l - 1];
  return e;
}

PolyRep poly_from_roots(const ModelSpec& model, std::span<const double> coords) {
  if (static_cast<int>(coords.size()) != model.n)
    throw InvalidParams("poly_from_roots: coordinate count != n");
  const std::vector<cd> roots = poly_variable_roots(model, coords);
  const std::vector<cd> e = elementary_symmetric(std::span<const cd>(roots));
  const int n = model.n;
  PolyRep p;
  p.family = model.family;
  p.coeffs.resize(n + 1);
  for (int l = 0; l <= n; ++l) {
    double sign = ((n - l) % 2 == 0) ? 1.0 : -1.0;
    p.coeffs[l] = sign * e[n - l];
  }
  return p;
}

std::vector<double> roots_from_poly(const PolyRep& p) {
  const int n = p.degree();
  if (n < 1) throw InvalidParams("roots_from_poly: degree must be >= 1");
  if (std::abs(p.coeffs[n] - 1.0) > 1e-12)
    throw InvalidParams("roots_from_poly: polynomial must be monic");

  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) companion(i, n - 1) = -p.coeffs[i];

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion);
  if (es.info() != Eigen::Success) throw ConvergenceFailure("companion eigensolver failed");

  std::vector<cd> roots(n);
  for (int i = 0; i < n; ++i) {
    cd z = es.eigenvalues()(i);
    for (int it = 0; it < 3; ++it) {
      cd pv = horner(p.coeffs, z);
      cd dv = horner_deriv(p.coeffs, z);
      if (std::abs(dv) > 0.0) {
        cd step = pv / dv;
        if (std::abs(step) < 0.5 * (1.0 + std::abs(z))) z -= step;
      }
    }
    roots[i] = z;
  }

  std::vector<double> out(n);
  if (p.family == Family::Torus) {
    for (int i = 0; i < n; ++i) {
      if (std::abs(std::abs(roots[i]) - 1.0) > kRealityTol * (1.0 + std::abs(roots[i])))
        throw NonRealRoots("torus root left the unit circle");
      out[i] = std::arg(roots[i]);
    }
  } else {
    for (int i = 0; i < n; ++i) {
      if (std::abs(roots[i].imag()) > kRealityTol * (1.0 + std::abs(roots[i].real())))
        throw NonRealRoots("root left the real line");
      double r = roots[i].real();
      if (p.family == Family::LaguerreB) {
        // The polynomial variable is s = z^2; recover the coordinate.
        if (r < -kRealityTol) throw NonRealRoots("squared-coordinate root went negative");
        r = std::sqrt(std::max(r, 0.0));
      }
      out[i] = r;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Eigen::MatrixXd operator_matrix(const ModelSpec& model) {
  model.validate();
  const int n = model.n;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n + 1);
  const double lam = model.lambda ? *model.lambda : 0.0;
  switch (model.family) {
    case Family::HermiteA:
      // H_t + (1/2) H_zz = 0, plus lambda (z H_z - N H) for the confined flow.
      for (int m = 0; m + 2 <= n; ++m) a(m, m + 2) = -0.5 * (m + 2.0) * (m + 1.0);
      if (model.lambda)
        for (int m = 0; m <= n; ++m) a(m, m) += lam * (m - n);
      break;
    case Family::LaguerreB:
      // In the variable s = z^2: H_t + 2 s H_ss + 2 nu H_s = 0, plus
      // 2 lambda (s H_s - N H) for the confined flow.
      for (int m = 0; m + 1 <= n; ++m) a(m, m + 1) = -2.0 * (m + 1.0) * (m + model.nu);
      if (model.lambda)
        for (int m = 0; m <= n; ++m) a(m, m) += 2.0 * lam * (m - n);
      break;
    case Family::JacobiCompact:
    case Family::JacobiNoncompact: {
      // Compact: H_t = (z^2-1) H_zz + [(p+q)z - (p-q) - 2(N-1)z] H_z
      //                - N(p+q-N+1) H;  the noncompact flow is its negative.
      const double p = model.p, q = model.q;
      for (int m = 0; m + 2 <= n; ++m) a(m, m + 2) = (m + 2.0) * (m + 1.0);
      for (int m = 0; m + 1 <= n; ++m) a(m, m + 1) = -(p - q) * (m + 1.0);
      for (int m = 0; m <= n; ++m)
        a(m, m) = m * (m - 1.0) + (p + q) * m - 2.0 * (n - 1.0) * m - n * (p + q - n + 1.0);
      if (model.family == Family::JacobiNoncompact) a = -a;
      break;
    }
    case Family::Torus:
      for (int m = 0; m <= n; ++m) a(m, m) = m * (m - n);
      break;
  }
  return a;
}

PolyRep coefficient_flow(const ModelSpec& model, const PolyRep& p0, double t) {
  if (p0.degree() != model.n) throw InvalidParams("coefficient_flow: degree mismatch");
  PolyRep out = p0;
  if (model.family == Family::Torus) {
    for (int m = 0; m <= model.n; ++m) out.coeffs[m] *= std::exp(m * (m - model.n) * t);
    return out;
  }
  const Eigen::MatrixXd e = (t * operator_matrix(model)).exp();
  const int n = model.n;
  Eigen::VectorXd c(n + 1);
  for (int m = 0; m <= n; ++m) c(m) = p0.coeffs[m].real();
  Eigen::VectorXd ct = e * c;
  for (int m = 0; m <= n; ++m) out.coeffs[m] = ct(m);
  return out;
}

std::vector<double> hermite_heat_poly_coeffs(int n, double t) {
  if (n < 0) throw InvalidParams("hermite_heat_poly_coeffs: n must be >= 0");
  // P_{n+1}(t,z) = 2 z P_n(t,z) - 4 n t P_{n-1}(t,z), P_0 = 1, P_1 = 2z;
  // equals (2t)^{n/2} H_n(z / sqrt(2t)) and is polynomial in t as well.
  std::vector<double> pm{1.0};
  if (n == 0) return pm;
  std::vector<double> pn{0.0, 2.0};
  for (int k = 1; k < n; ++k) {
    std::vector<double> next(k + 2, 0.0);
    for (int m = 0; m <= k; ++m) next[m + 1] += 2.0 * pn[m];
    for (int m = 0; m < static_cast<int>(pm.size()); ++m) next[m] -= 4.0 * k * t * pm[m];
    pm = std::move(pn);
    pn = std::move(next);
  }
  return pn;
}

double heat_polynomial(Family family, int n, double t, double z, double nu) {
  if (!(t > 0.0)) throw InvalidParams("heat_polynomial: t must be > 0");
  switch (family) {
    case Family::HermiteA: {
      const std::vector<double> c = hermite_heat_poly_coeffs(n, t);
      double v = 0.0;
      for (int m = n; m >= 0; --m) v = v * z + c[m];
      return v;
    }
    case Family::LaguerreB: {
      // Monic in s = z^2: prod_i (z^2 - 2t z_i^{(nu-1)}) = n! (-2t)^n L_n^{(nu-1)}(z^2/(2t)).
      double fact = 1.0;
      for (int k = 2; k <= n; ++k) fact *= k;
      return fact * std::pow(-2.0 * t, n) *
             eval_classical(PolyFamily::Laguerre, n, {nu - 1.0, 0.0}, z * z / (2.0 * t));
    }
    default:
      throw Unsupported("heat_polynomial: Hermite and Bessel-type families only");
  }
}

double pde_residual(const Trajectory& traj) {
  const int n = traj.model.n;
  const int s = static_cast<int>(traj.samples.size());
  if (s < 3) throw InvalidParams("pde_residual: need at least 3 samples");

  const Eigen::MatrixXd a = operator_matrix(traj.model);
  double worst = 0.0;

  for (int i = 1; i + 1 < s; ++i) {
    const ParticleState& sm = traj.samples[i - 1];
    const ParticleState& s0 = traj.samples[i];
    const ParticleState& sp = traj.samples[i + 1];
    const double hm = s0.time - sm.time;
    const double hp = sp.time - s0.time;

    const PolyRep cm = poly_from_roots(traj.model, sm.coords);
    const PolyRep c0 = poly_from_roots(traj.model, s0.coords);
    const PolyRep cp = poly_from_roots(traj.model, sp.coords);

    // Three-point derivative on a possibly nonuniform stencil, then subtract
    // the operator action; the residual is itself a polynomial in z.
    std::vector<cd> resid(n + 1, 0.0);
    const double denom = hm * hp * (hm + hp);
    for (int m = 0; m <= n; ++m) {
      cd dt = (hm * hm * cp.coeffs[m] - hp * hp * cm.coeffs[m] +
               (hp * hp - hm * hm) * c0.coeffs[m]) /
              denom;
      cd op = 0.0;
      for (int l = 0; l <= n; ++l) op += a(m, l) * c0.coeffs[l];
      resid[m] = dt - op;
    }

    double lo, hi;
    if (traj.model.family == Family::Torus) {
      lo = -2.0;
      hi = 2.0;
    } else {
      std::vector<cd> roots =
          poly_variable_roots(traj.model, std::span<const double>(s0.coords));
      double rlo = roots[0].real(), rhi = roots[0].real();
      for (const cd& r : roots) {
        rlo = std::min(rlo, r.real());
        rhi = std::max(rhi, r.real());
      }
      lo = rlo - 1.0;
      hi = rhi + 1.0;
    }

    const std::vector<double> grid = chebyshev_grid(lo, hi, 4 * n + 1);
    double hmax = 0.0;
    for (double z : grid) hmax = std::max(hmax, std::abs(horner(c0.coeffs, z)));
    for (double z : grid)
      worst = std::max(worst, std::abs(horner(resid, z)) / (1.0 + hmax));
  }
  return worst;
}

}  // namespace cmslab
