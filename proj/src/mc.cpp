#include "cmslab/mc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cmslab/heatpoly.hpp"
#include "cmslab/orthopoly.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cmslab {

namespace {

using cd = std::complex<double>;

// Serial compensated (Kahan) sum; the reduction order never depends on the
// thread count, so estimates are bit-reproducible.
double kahan_sum(const std::vector<double>& v) {
  double s = 0.0, c = 0.0;
  for (double x : v) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

double component_z(double delta, double se) {
  delta = std::abs(delta);
  if (se > 0.0) return delta / se;
  return (delta == 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
}

double max_z(const McEstimate& est, cd predicted) {
  return std::max(component_z(est.mean.real() - predicted.real(), est.stderr_re),
                  component_z(est.mean.imag() - predicted.imag(), est.stderr_im));
}

McEstimate extrapolated_estimate(const PathFunctional& fn, long n_paths, std::uint64_t offset,
                                 double dt, std::uint64_t root_seed) {
  const McEstimate full = mc_expectation(fn, n_paths, offset, dt, root_seed);
  const McEstimate half = mc_expectation(fn, n_paths, offset + n_paths, 0.5 * dt, root_seed);
  McEstimate out;
  out.mean = 2.0 * half.mean - full.mean;
  out.stderr_re = std::sqrt(4.0 * half.stderr_re * half.stderr_re + full.stderr_re * full.stderr_re);
  out.stderr_im = std::sqrt(4.0 * half.stderr_im * half.stderr_im + full.stderr_im * full.stderr_im);
  out.n_paths = 2 * n_paths;
  out.root_seed = root_seed;
  return out;
}

}  // namespace

McEstimate mc_expectation(const PathFunctional& fn, long n_paths, std::uint64_t path_offset,
                          double dt, std::uint64_t root_seed, bool force_serial) {
  if (n_paths < 100) throw InsufficientPaths("mc_expectation: need at least 100 paths");
  std::vector<double> re(n_paths), im(n_paths);
  std::exception_ptr error;

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (!force_serial)
#endif
  for (long i = 0; i < n_paths; ++i) {
    try {
      const cd v = fn(path_offset + static_cast<std::uint64_t>(i), dt);
      re[i] = v.real();
      im[i] = v.imag();
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  McEstimate est;
  est.n_paths = n_paths;
  est.root_seed = root_seed;
  const double mr = kahan_sum(re) / n_paths;
  const double mi = kahan_sum(im) / n_paths;
  est.mean = {mr, mi};

  std::vector<double> dev(n_paths);
  for (long i = 0; i < n_paths; ++i) dev[i] = (re[i] - mr) * (re[i] - mr);
  est.stderr_re = std::sqrt(kahan_sum(dev) / (n_paths - 1.0) / n_paths);
  for (long i = 0; i < n_paths; ++i) dev[i] = (im[i] - mi) * (im[i] - mi);
  est.stderr_im = std::sqrt(kahan_sum(dev) / (n_paths - 1.0) / n_paths);
  return est;
}

IdentityReport check_identity(const std::string& tag, cd predicted, const PathFunctional& fn,
                              long n_paths, double dt, std::uint64_t root_seed) {
  IdentityReport report;
  report.tag = tag;
  report.predicted = predicted;
  report.estimate = extrapolated_estimate(fn, n_paths, 0, dt, root_seed);
  report.z_score = max_z(report.estimate, predicted);
  report.pass = report.z_score <= 3.0;
  if (!report.pass) {
    report.reran = true;
    report.estimate = extrapolated_estimate(fn, 4 * n_paths, 2 * n_paths, dt, root_seed);
    report.z_score = max_z(report.estimate, predicted);
    report.pass = report.z_score <= 3.0;
  }
  return report;
}

double hermite_char_poly_closed_form(int n, double k, double t, double z) {
  if (!(t > 0.0) || !(k > 0.0)) throw InvalidParams("closed form requires t, k > 0");
  return std::pow(t * k / 2.0, n / 2.0) *
         eval_classical(PolyFamily::Hermite, n, {}, z / std::sqrt(2.0 * k * t));
}

double laguerre_char_poly_closed_form(int n, double nu, double beta, double t, double y) {
  if (!(t > 0.0) || !(beta > 0.0) || nu < 0.0)
    throw InvalidParams("closed form requires t, beta > 0 and nu >= 0");
  double fact = 1.0;
  for (int j = 2; j <= n; ++j) fact *= j;
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  return sign * std::pow(2.0 * t * beta, n) * fact *
         eval_classical(PolyFamily::Laguerre, n, {nu + 1.0 / (2.0 * beta) - 1.0, 0.0},
                        y / (2.0 * t * beta));
}

IdentityReport char_poly_expectation(const ModelSpec& model, const ParticleState& x0, double y0,
                                     double t, long n_paths, double dt, std::uint64_t root_seed) {
  model.validate();
  const int n = model.n;
  if (static_cast<int>(x0.coords.size()) != n)
    throw InvalidParams("char_poly_expectation: x0 size != n");

  if ((model.family == Family::JacobiCompact || model.family == Family::JacobiNoncompact) &&
      !model.frozen()) {
    const double slack = n - 1.0 + 1.0 / model.inv_temp;
    if (!(model.p > slack) || !(model.q > slack))
      throw InvalidParams("char_poly_expectation: needs p, q > N - 1 + 1/inv_temp");
  }

  const std::vector<double> times{t};
  cd predicted = 1.0;
  std::string tag;
  CompanionSpec comp;
  switch (model.family) {
    case Family::HermiteA:
      tag = "hermite-brownian-product";
      comp.kind = CompanionKind::Brownian;
      for (double x : x0.coords) predicted *= (y0 - x);
      break;
    case Family::LaguerreB:
      tag = "laguerre-bessel-squared-product";
      comp.kind = CompanionKind::Bessel1D;
      comp.alpha = model.nu + 1.0 / (2.0 * model.inv_temp) - 1.0;
      if (!(comp.alpha > -1.0)) throw InvalidParams("companion Bessel index must exceed -1");
      for (double x : x0.coords) predicted *= (y0 * y0 - x * x);
      break;
    case Family::JacobiCompact:
      tag = "jacobi-compact-product";
      comp.kind = CompanionKind::JacobiCompact1D;
      comp.p = model.p + n - 1.0;
      comp.q = model.q + n - 1.0;
      for (double x : x0.coords) predicted *= (y0 - x);
      predicted *= std::exp(-n * (model.p + model.q - n + 1.0) * t);
      break;
    case Family::JacobiNoncompact:
      tag = "jacobi-noncompact-product";
      comp.kind = CompanionKind::JacobiNoncompact1D;
      comp.p = model.p + n - 1.0;
      comp.q = model.q + n - 1.0;
      for (double x : x0.coords) predicted *= (y0 - x);
      predicted *= std::exp(n * (model.p + model.q - n + 1.0) * t);
      break;
    case Family::Torus:
      tag = "torus-exponential-product";
      comp.kind = CompanionKind::TorusExp;
      comp.n = n;
      for (double x : x0.coords)
        predicted *= (std::exp(cd(0.0, std::sqrt(2.0) * y0)) - std::exp(cd(0.0, x)));
      break;
  }

  const PathFunctional with_seed = [model, x0, y0, t, comp, times, root_seed](
                                       std::uint64_t idx, double step) -> cd {
    SdeConfig cfg{step, t, BoundaryPolicy::ReflectOrder};
    const RngStream model_rng{root_seed, 2 * idx};
    const RngStream comp_rng{root_seed, 2 * idx + 1};
    const auto path = simulate(model, x0, cfg, model_rng, times);
    const std::vector<double>& xt = path.back().coords;
    const auto cpath = simulate_companion(comp, (comp.kind == CompanionKind::Brownian) ? 0.0 : y0,
                                          cfg, comp_rng, times);
    const cd yt = cpath.back().value;
    cd prod = 1.0;
    switch (model.family) {
      case Family::HermiteA:
        for (double x : xt) prod *= (yt + y0 - x);
        break;
      case Family::LaguerreB:
        for (double x : xt) prod *= (yt * yt - x * x);
        break;
      case Family::JacobiCompact:
      case Family::JacobiNoncompact:
        for (double x : xt) prod *= (yt - x);
        break;
      case Family::Torus: {
        const double shrink = model.frozen() ? 0.0 : t / model.inv_temp;
        for (double x : xt) prod *= (yt - std::exp(shrink) * std::exp(cd(0.0, x)));
        break;
      }
    }
    return prod;
  };

  return check_identity(tag, predicted, with_seed, n_paths, dt, root_seed);
}

std::vector<IdentityReport> symmetric_fn_invariance(const ModelSpec& base, const ParticleState& x0,
                                                    double t, int l,
                                                    std::span<const double> inv_temps,
                                                    long n_paths, double dt,
                                                    std::uint64_t root_seed) {
  base.validate();
  const int n = base.n;
  if (l < 0 || l > n) throw InvalidParams("symmetric_fn_invariance: l out of range");
  const std::vector<double> times{t};

  std::vector<IdentityReport> reports;
  for (double k : inv_temps) {
    // Deterministic prediction for this grid point.
    cd predicted;
    if (base.family == Family::Torus) {
      const double rate = l * (n - l + (std::isinf(k) ? 0.0 : 1.0 / k));
      const auto e = elementary_symmetric(std::span<const cd>(x0.torus_view()));
      predicted = std::exp(-rate * t) * e[l];
    } else {
      ModelSpec frozen = base;
      frozen.inv_temp = std::numeric_limits<double>::infinity();
      if (base.family == Family::LaguerreB && !std::isinf(k))
        frozen.nu = base.nu + 1.0 / (2.0 * k);
      SolveConfig cfg;
      cfg.t_end = t;
      const Trajectory traj = solve(frozen, x0, cfg);
      std::vector<double> vals = traj.back().coords;
      if (base.family == Family::LaguerreB)
        for (double& v : vals) v *= v;
      predicted = elementary_symmetric(std::span<const double>(vals))[l];
    }

    ModelSpec model = base;
    model.inv_temp = k;
    const PathFunctional seeded = [model, x0, t, l, times, root_seed](std::uint64_t idx,
                                                                      double step) -> cd {
      SdeConfig cfg{step, t, BoundaryPolicy::ReflectOrder};
      const auto path = simulate(model, x0, cfg, RngStream{root_seed, idx}, times);
      const std::vector<double>& xt = path.back().coords;
      if (model.family == Family::Torus) {
        std::vector<cd> w(xt.size());
        for (size_t i = 0; i < xt.size(); ++i) w[i] = std::exp(cd(0.0, xt[i]));
        return elementary_symmetric(std::span<const cd>(w))[l];
      }
      std::vector<double> vals = xt;
      if (model.family == Family::LaguerreB)
        for (double& v : vals) v *= v;
      return elementary_symmetric(std::span<const double>(vals))[l];
    };

    char tag[96];
    std::snprintf(tag, sizeof(tag), "e_%d invariance inv_temp=%g", l, k);

    if (std::isinf(k)) {
      // Deterministic grid point: single frozen path against the prediction.
      IdentityReport rep;
      rep.tag = tag;
      rep.predicted = predicted;
      rep.estimate.mean = seeded(0, dt);
      rep.estimate.n_paths = 1;
      rep.estimate.root_seed = root_seed;
      const double err = std::abs(rep.estimate.mean - predicted);
      rep.z_score = (err <= 1e-6 * (1.0 + std::abs(predicted)))
                        ? 0.0
                        : std::numeric_limits<double>::infinity();
      rep.pass = rep.z_score == 0.0;
      reports.push_back(std::move(rep));
    } else {
      reports.push_back(check_identity(tag, predicted, seeded, n_paths, dt, root_seed));
    }
  }
  return reports;
}

double martingale_check(const std::vector<std::vector<cd>>& ensemble) {
  const long n_paths = static_cast<long>(ensemble.size());
  if (n_paths < 100) throw InsufficientPaths("martingale_check: need at least 100 paths");
  const size_t n_times = ensemble.front().size();
  if (n_times < 3) throw InsufficientPaths("martingale_check: need at least 3 sample times");
  for (const auto& path : ensemble)
    if (path.size() != n_times) throw InvalidParams("martingale_check: ragged ensemble");

  double worst = 0.0;
  std::vector<double> re(n_paths), im(n_paths), dev(n_paths);
  for (size_t j = 0; j + 1 < n_times; ++j) {
    for (long i = 0; i < n_paths; ++i) {
      const cd d = ensemble[i][j + 1] - ensemble[i][j];
      re[i] = d.real();
      im[i] = d.imag();
    }
    const double mr = kahan_sum(re) / n_paths;
    const double mi = kahan_sum(im) / n_paths;
    for (long i = 0; i < n_paths; ++i) dev[i] = (re[i] - mr) * (re[i] - mr);
    const double se_r = std::sqrt(kahan_sum(dev) / (n_paths - 1.0) / n_paths);
    for (long i = 0; i < n_paths; ++i) dev[i] = (im[i] - mi) * (im[i] - mi);
    const double se_i = std::sqrt(kahan_sum(dev) / (n_paths - 1.0) / n_paths);
    worst = std::max({worst, component_z(mr, se_r), component_z(mi, se_i)});
  }
  return worst;
}

DecayReport decay_rate_check(const ModelSpec& model, const ParticleState& a,
                             const ParticleState& b, std::span<const double> t_grid,
                             const SolveConfig& config) {
  model.validate();
  if (t_grid.empty()) throw InvalidParams("decay_rate_check: empty time grid");
  const int n = model.n;

  const bool tau_coords = model.family == Family::JacobiCompact;
  auto metric_coords = [&](const std::vector<double>& x) {
    std::vector<double> out = x;
    if (tau_coords)
      for (double& v : out) v = std::acos(std::clamp(v, -1.0, 1.0));
    return out;
  };
  auto dist = [&](const std::vector<double>& x, const std::vector<double>& y) {
    const auto u = metric_coords(x), v = metric_coords(y);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += (u[i] - v[i]) * (u[i] - v[i]);
    return std::sqrt(s);
  };

  double sum_a = 0.0, sum_b = 0.0, norm_a = 0.0, norm_b = 0.0;
  for (int i = 0; i < n; ++i) {
    sum_a += a.coords[i];
    sum_b += b.coords[i];
    norm_a += a.coords[i] * a.coords[i];
    norm_b += b.coords[i] * b.coords[i];
  }

  // Bound selection and precondition checks per family.
  std::function<double(double, double)> bound_fn;
  switch (model.family) {
    case Family::HermiteA:
      if (model.lambda) {
        const double rate = *model.lambda;
        bound_fn = [rate](double d0, double t) { return d0 * std::exp(-rate * t); };
      } else {
        if (std::abs(sum_a - sum_b) > 1e-9 || std::abs(std::sqrt(norm_a) - std::sqrt(norm_b)) > 1e-9 ||
            !(norm_a > 0.0))
          throw InvalidParams("free Hermite bound needs equal coordinate sums and equal norms > 0");
        const double nn = n * (n - 1.0);
        bound_fn = [nn, norm_a](double d0, double t) {
          return d0 * std::sqrt(nn * t / norm_a + 1.0) *
                 std::exp(-0.5 * (std::sqrt(2.0 * nn * t + norm_a * norm_a) - norm_a));
        };
      }
      break;
    case Family::LaguerreB: {
      if (!model.lambda) throw Unsupported("free Laguerre flow has no decay bound here");
      const double rate = *model.lambda;
      bound_fn = [rate](double d0, double t) { return d0 * std::exp(-rate * t); };
      break;
    }
    case Family::JacobiCompact: {
      const double c = (model.p + model.q + 2.0 * std::min(model.p, model.q) + 2.0 - 2.0 * n) / 4.0;
      bound_fn = [c](double d0, double t) { return d0 * std::exp(-c * t); };
      break;
    }
    case Family::Torus: {
      if (std::abs(sum_a - sum_b) > 1e-9)
        throw InvalidParams("torus bound needs equal coordinate sums");
      const double rate = 0.5 * n;
      bound_fn = [rate](double d0, double t) { return d0 * std::exp(-rate * t); };
      break;
    }
    case Family::JacobiNoncompact:
      throw Unsupported("no contraction bound for the noncompact Jacobi flow");
  }

  SolveConfig cfg = config;
  cfg.t_end = t_grid.back();
  std::vector<double> positive;
  for (double t : t_grid)
    if (t > 0.0) positive.push_back(t);
  const Trajectory ta = solve(model, a, cfg, positive);
  const Trajectory tb = solve(model, b, cfg, positive);

  DecayReport report;
  const double d0 = dist(a.coords, b.coords);
  // Locate the grid samples in the trajectories (they are emitted in order,
  // possibly interleaved with t_end).
  size_t ia = 0, ib = 0;
  for (double t : t_grid) {
    while (ia < ta.samples.size() && ta.samples[ia].time < t - 1e-12) ++ia;
    while (ib < tb.samples.size() && tb.samples[ib].time < t - 1e-12) ++ib;
    report.times.push_back(t);
    report.distance.push_back(dist(ta.samples[ia].coords, tb.samples[ib].coords));
    report.bound.push_back(bound_fn(d0, t));
  }

  report.pointwise_ok = true;
  for (size_t i = 0; i < report.times.size(); ++i)
    if (report.distance[i] > report.bound[i] * (1.0 + 1e-8)) report.pointwise_ok = false;

  // Least-squares slope of log distance over the final third of the grid.
  const size_t m = report.times.size();
  const size_t start = (2 * m) / 3;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long cnt = 0;
  for (size_t i = start; i < m; ++i) {
    if (!(report.distance[i] > 0.0)) continue;
    const double x = report.times[i], y = std::log(report.distance[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  report.fitted_rate =
      (cnt >= 2) ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) : 0.0;
  return report;
}

}  // namespace cmslab
