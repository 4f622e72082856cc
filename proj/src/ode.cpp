#include "cmslab/ode.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cmslab/orthopoly.hpp"

namespace cmslab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

bool ordered_interior(const ModelSpec& model, const std::vector<double>& x) {
  const int n = model.n;
  for (int i = 0; i + 1 < n; ++i)
    if (!(x[i] < x[i + 1])) return false;
  switch (model.family) {
    case Family::HermiteA: return true;
    case Family::LaguerreB: return x[0] > 0.0;
    case Family::JacobiCompact: return x[0] > -1.0 && x[n - 1] < 1.0;
    case Family::JacobiNoncompact: return x[0] > 1.0;
    case Family::Torus: return n < 2 || x[n - 1] < x[0] + kTwoPi;
  }
  return false;
}

// Minimal distance among particle gaps and hard walls.
double min_gap(const ModelSpec& model, const std::vector<double>& x) {
  const int n = model.n;
  double g = std::numeric_limits<double>::infinity();
  for (int i = 0; i + 1 < n; ++i) g = std::min(g, x[i + 1] - x[i]);
  switch (model.family) {
    case Family::LaguerreB: g = std::min(g, x[0]); break;
    case Family::JacobiCompact: g = std::min({g, x[0] + 1.0, 1.0 - x[n - 1]}); break;
    case Family::JacobiNoncompact: g = std::min(g, x[0] - 1.0); break;
    case Family::Torus:
      if (n >= 2) g = std::min(g, x[0] + kTwoPi - x[n - 1]);
      break;
    default: break;
  }
  return g;
}

std::vector<double> hermite_profile(int m) {
  auto zs = zeros(PolyFamily::Hermite, m, {});
  return zs.zeros;
}

std::vector<double> laguerre_z_profile(int m, double alpha) {
  auto zs = zeros(PolyFamily::Laguerre, m, {alpha, 0.0});
  return zs.zeros;
}

// Places a free cluster of size m at location c: the cluster-local flow is
// the Hermite flow with pair strength `scale`, whose self-similar solution
// spreads like sqrt(2*scale*t).
void place_free_cluster(std::vector<double>& x, int begin, int m, double c, double scale,
                        double delta) {
  auto z = hermite_profile(m);
  for (int i = 0; i < m; ++i) x[begin + i] = c + std::sqrt(2.0 * scale * delta) * z[i];
}

}  // namespace

void SolveConfig::validate() const {
  if (!(rel_tol >= 1e-13)) throw InvalidParams("rel_tol must be >= 1e-13");
  if (!(abs_tol > 0.0) || !(max_step > 0.0) || !(desing_step > 0.0) || !(t_end > 0.0))
    throw InvalidParams("solver config fields must be positive");
}

ParticleState desingularize_start(const ModelSpec& model, const ParticleState& x0, double delta) {
  if (!(delta > 0.0)) throw InvalidParams("desingularization step must be positive");
  model.validate();
  auto flag = boundary_flag(model, x0);
  if (!flag.on_boundary) return x0;

  std::vector<double> x = x0.coords;
  const int n = model.n;

  if (model.family == Family::Torus) {
    // Cut the circle at the largest cyclic gap so no cluster wraps, then
    // apply Hermite profiles (local pair strength 2: cot(s/2) ~ 2/s).
    int r = n - 1;
    double best = x[0] + kTwoPi - x[n - 1];
    for (int i = 0; i + 1 < n; ++i)
      if (x[i + 1] - x[i] > best) {
        best = x[i + 1] - x[i];
        r = i;
      }
    std::vector<double> y(n);
    for (int j = 0; j < n; ++j) {
      int src = (r + 1 + j) % n;
      y[j] = x[src] + (r + 1 + j >= n ? kTwoPi : 0.0);
    }
    int i = 0;
    while (i < n) {
      int j = i;
      while (j + 1 < n && y[j + 1] - y[j] < kDegeneracyTol * (1.0 + std::abs(y[j]) + std::abs(y[j + 1])))
        ++j;
      if (j > i) {
        int m = j - i + 1;
        double c = 0.0;
        for (int l = i; l <= j; ++l) c += y[l];
        c /= m;
        place_free_cluster(y, i, m, c, 2.0, delta);
      }
      i = j + 1;
    }
    for (int j = 0; j < n; ++j) {
      int dst = (r + 1 + j) % n;
      x[dst] = y[j] - (r + 1 + j >= n ? kTwoPi : 0.0);
    }
  } else {
    for (const auto& cl : flag.degenerate_clusters) {
      const int m = cl.end - cl.begin;
      if (!cl.at_wall) {
        double c = 0.0;
        for (int l = cl.begin; l < cl.end; ++l) c += x[l];
        c /= m;
        double scale = 1.0;
        if (model.family == Family::JacobiCompact) scale = 2.0 * (1.0 - c * c);
        if (model.family == Family::JacobiNoncompact) scale = 2.0 * (c * c - 1.0);
        place_free_cluster(x, cl.begin, m, c, scale, delta);
      } else if (model.family == Family::LaguerreB) {
        auto z = laguerre_z_profile(m, model.nu - 1.0);
        for (int i = 0; i < m; ++i) x[cl.begin + i] = std::sqrt(2.0 * delta * z[i]);
      } else if (model.family == Family::JacobiCompact && cl.wall < 0.0) {
        // Wall at -1: u = 1 + x follows a squared-Bessel-type flow whose
        // self-similar profile is 2t times Laguerre zeros with alpha = p - N.
        auto z = laguerre_z_profile(m, model.p - n);
        for (int i = 0; i < m; ++i) x[cl.begin + i] = -1.0 + 2.0 * delta * z[i];
      } else if (model.family == Family::JacobiCompact && cl.wall > 0.0) {
        auto z = laguerre_z_profile(m, model.q - n);
        for (int i = 0; i < m; ++i) x[cl.begin + i] = 1.0 - 2.0 * delta * z[m - 1 - i];
      } else if (model.family == Family::JacobiNoncompact) {
        auto z = laguerre_z_profile(m, model.q - n);
        for (int i = 0; i < m; ++i) x[cl.begin + i] = 1.0 + 2.0 * delta * z[i];
      }
    }
  }

  if (!ordered_interior(model, x))
    throw InvalidParams("desingularization step too large for this configuration");
  return ParticleState{x0.time + delta, std::move(x)};
}

ParticleState self_similar(const ModelSpec& model, double t, double torus_mean) {
  model.validate();
  const int n = model.n;
  std::vector<double> x(n);
  switch (model.family) {
    case Family::HermiteA: {
      if (t < 0.0) throw InvalidParams("t must be >= 0");
      auto z = zeros(PolyFamily::Hermite, n, {}).zeros;
      for (int i = 0; i < n; ++i) x[i] = std::sqrt(2.0 * t) * z[i];
      break;
    }
    case Family::LaguerreB: {
      if (t < 0.0) throw InvalidParams("t must be >= 0");
      auto z = zeros(PolyFamily::Laguerre, n, {model.nu - 1.0, 0.0}).zeros;
      for (int i = 0; i < n; ++i) x[i] = std::sqrt(2.0 * t * z[i]);
      break;
    }
    case Family::JacobiCompact: {
      x = zeros(PolyFamily::Jacobi, n, {model.q - n, model.p - n}).zeros;
      break;
    }
    case Family::JacobiNoncompact:
      // Hyperbolic growth: there is no stationary or self-similar profile.
      throw Unsupported("noncompact Jacobi flow has no attracting configuration");
    case Family::Torus: {
      double x1 = torus_mean - (n - 1) * std::numbers::pi / n;
      for (int j = 0; j < n; ++j) x[j] = x1 + j * kTwoPi / n;
      break;
    }
  }
  return ParticleState{std::max(t, 0.0), std::move(x)};
}

Trajectory solve(const ModelSpec& model, const ParticleState& x0, const SolveConfig& config,
                 std::span<const double> sample_times) {
  model.validate();
  config.validate();
  if (!in_chamber(model, x0.coords)) throw InvalidParams("start outside the chamber");

  Trajectory traj{model, {}, config, {}};
  traj.samples.push_back(x0);

  std::vector<double> targets(sample_times.begin(), sample_times.end());
  if (targets.empty() || targets.back() < config.t_end) targets.push_back(config.t_end);
  for (size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] <= 0.0 || targets[i] > config.t_end || (i > 0 && targets[i] <= targets[i - 1]))
      throw InvalidParams("sample times must be increasing in (0, t_end]");
  }

  double t = 0.0;
  std::vector<double> y = x0.coords;
  if (boundary_flag(model, x0).on_boundary) {
    auto started = desingularize_start(model, x0, config.desing_step);
    t = config.desing_step;
    y = started.coords;
  }

  const int n = model.n;
  auto rhs = [&](const std::vector<double>& v) {
    return flow_rhs(model, ParticleState{0.0, v});
  };

  std::vector<double> k1 = rhs(y);
  auto cap = [&](const std::vector<double>& v, const std::vector<double>& f) {
    double fm = 0.0;
    for (double c : f) fm = std::max(fm, std::abs(c));
    double g = min_gap(model, v);
    return fm > 0.0 ? 0.25 * g / fm : config.max_step;
  };

  double h = std::min({config.max_step, cap(y, k1), config.t_end / 100.0});
  std::vector<double> ytmp(n), y5(n), errv(n);
  std::vector<double> k2, k3, k4, k5, k6, k7;

  for (double target : targets) {
    while (t < target) {
      if (h < 1e-15 * std::max(1.0, t))
        throw StepSizeUnderflow("step size underflow at t=" + std::to_string(t), t);
      double hs = std::min({h, target - t, config.max_step});

      bool ok = true;
      double err = 0.0;
      try {
        auto stage = [&](const std::vector<double>& base) { return rhs(base); };
        for (int i = 0; i < n; ++i) ytmp[i] = y[i] + hs * a21 * k1[i];
        k2 = stage(ytmp);
        for (int i = 0; i < n; ++i) ytmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
        k3 = stage(ytmp);
        for (int i = 0; i < n; ++i) ytmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = stage(ytmp);
        for (int i = 0; i < n; ++i)
          ytmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = stage(ytmp);
        for (int i = 0; i < n; ++i)
          ytmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        k6 = stage(ytmp);
        for (int i = 0; i < n; ++i)
          y5[i] = y[i] + hs * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        k7 = stage(y5);

        if (!ordered_interior(model, y5)) {
          ok = false;
        } else {
          for (int i = 0; i < n; ++i) {
            double e = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                             e7 * k7[i]);
            double sc = config.abs_tol +
                        config.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
            err += (e / sc) * (e / sc);
          }
          err = std::sqrt(err / n);
          ok = err <= 1.0;
        }
      } catch (const DegenerateState&) {
        ok = false;
        err = 4.0;  // forces a decent shrink below
      }

      if (ok) {
        t += hs;
        y = y5;
        k1 = k7;  // FSAL
        ++traj.stats.accepted;
        double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h = hs * std::clamp(fac, 0.2, 5.0);
        h = std::min(h, cap(y, k1));
      } else {
        ++traj.stats.rejected;
        double fac = err > 1.0 ? 0.9 * std::pow(err, -0.2) : 0.5;
        h = hs * std::clamp(fac, 0.1, 0.5);
      }
    }
    traj.samples.push_back(ParticleState{t, y});
  }
  return traj;
}

std::pair<ParticleState, ParticleState> ou_transform_check(const ModelSpec& model, double lambda,
                                                           const ParticleState& x0, double t,
                                                           const SolveConfig& config) {
  if (model.family != Family::HermiteA) throw InvalidParams("OU correspondence is Hermite-only");
  if (!(lambda > 0.0)) throw InvalidParams("lambda must be positive");
  if (t <= 0.0) return {x0, x0};

  ModelSpec confined = model;
  confined.lambda = lambda;
  SolveConfig c1 = config;
  c1.t_end = t;
  ParticleState direct = solve(confined, x0, c1).back();

  ModelSpec free_model = model;
  free_model.lambda.reset();
  double s = (std::exp(2.0 * lambda * t) - 1.0) / (2.0 * lambda);
  SolveConfig c2cfg = config;
  c2cfg.t_end = s;
  ParticleState mapped = solve(free_model, x0, c2cfg).back();
  for (double& v : mapped.coords) v *= std::exp(-lambda * t);
  mapped.time = t;
  return {direct, mapped};
}

AngularPath angular_transform(const ModelSpec& model, const ParticleState& x0,
                              std::span<const double> times, const SolveConfig& config) {
  if (model.family != Family::HermiteA && model.family != Family::LaguerreB)
    throw InvalidParams("angular transform exists for Hermite/Laguerre only");
  double norm0 = 0.0;
  for (double v : x0.coords) norm0 += v * v;
  if (!(norm0 > 0.0)) throw InvalidParams("angular transform requires a nonzero start");

  const double rate = canonical_lambda(model);
  std::vector<double> mapped;
  for (double t : times) {
    if (t <= 0.0) throw InvalidParams("times must be positive");
    mapped.push_back(rate * t * t + norm0 * t);
  }

  SolveConfig cfg = config;
  cfg.t_end = mapped.back();
  auto traj = solve(model, x0, cfg, mapped);

  AngularPath path;
  for (size_t i = 1; i < traj.samples.size() && path.times.size() < times.size(); ++i) {
    const auto& s = traj.samples[i];
    double nrm = 0.0;
    for (double v : s.coords) nrm += v * v;
    nrm = std::sqrt(nrm);
    std::vector<double> psi(s.coords);
    for (double& v : psi) v /= nrm;
    path.times.push_back(times[path.times.size()]);
    path.psi.push_back(std::move(psi));
  }
  return path;
}

}  // namespace cmslab
