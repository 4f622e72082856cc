#include "cmslab/sde.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cmslab/ode.hpp"

namespace cmslab {

namespace {

constexpr double kBoundaryDelta = 1e-8;
constexpr double kEnvelope = 1e8;
constexpr int kMaxHalvings = 20;

double reflect_nonneg(double x) { return std::abs(x); }

double reflect_interval(double x, double a, double b) {
  const double period = 2.0 * (b - a);
  double y = std::fmod(x - a, period);
  if (y < 0.0) y += period;
  return (y <= b - a) ? a + y : b - (y - (b - a));
}

void apply_walls(const ModelSpec& model, std::vector<double>& x) {
  switch (model.family) {
    case Family::LaguerreB:
      for (double& v : x) v = reflect_nonneg(v);
      break;
    case Family::JacobiCompact:
      for (double& v : x) v = reflect_interval(v, -1.0, 1.0);
      break;
    case Family::JacobiNoncompact:
      for (double& v : x) v = 1.0 + std::abs(v - 1.0);
      break;
    default:
      break;
  }
}

// Per-coordinate diffusion coefficient of the renormalized SDE.
void diffusion(const ModelSpec& model, const std::vector<double>& x, std::vector<double>& sigma) {
  const int n = model.n;
  sigma.assign(n, 0.0);
  if (model.frozen()) return;
  const double k = model.inv_temp;
  switch (model.family) {
    case Family::HermiteA:
    case Family::LaguerreB:
      sigma.assign(n, 1.0 / std::sqrt(k));
      break;
    case Family::JacobiCompact:
      for (int i = 0; i < n; ++i)
        sigma[i] = std::sqrt(2.0 * std::max(1.0 - x[i] * x[i], 0.0) / k);
      break;
    case Family::JacobiNoncompact:
      for (int i = 0; i < n; ++i)
        sigma[i] = std::sqrt(2.0 * std::max(x[i] * x[i] - 1.0, 0.0) / k);
      break;
    case Family::Torus:
      sigma.assign(n, std::sqrt(2.0 / k));
      break;
  }
}

// Sorts the proposal in place.  Rejects (returns false) on ties, on a sort
// permutation that moves any index by more than one slot, or on escape from
// the sanity envelope.
bool accept_proposal(const ModelSpec& model, std::vector<double>& prop) {
  const int n = static_cast<int>(prop.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return prop[a] < prop[b]; });
  for (int i = 0; i < n; ++i)
    if (std::abs(order[i] - i) > 1) return false;

  std::vector<double> sorted(n);
  for (int i = 0; i < n; ++i) sorted[i] = prop[order[i]];
  for (int i = 0; i + 1 < n; ++i)
    if (!(sorted[i] < sorted[i + 1])) return false;

  switch (model.family) {
    case Family::LaguerreB:
      if (!(sorted[0] > 0.0)) return false;
      break;
    case Family::JacobiCompact:
      if (!(sorted[0] > -1.0) || !(sorted[n - 1] < 1.0)) return false;
      break;
    case Family::JacobiNoncompact:
      if (!(sorted[0] > 1.0)) return false;
      break;
    case Family::Torus:
      if (!(sorted[n - 1] - sorted[0] < 2.0 * M_PI)) {
        // Re-canonicalize modulo 2*pi instead of rejecting.
        for (double& v : sorted) {
          v = std::fmod(v, 2.0 * M_PI);
          if (v < 0.0) v += 2.0 * M_PI;
        }
        std::sort(sorted.begin(), sorted.end());
        for (int i = 0; i + 1 < n; ++i)
          if (!(sorted[i] < sorted[i + 1])) return false;
      }
      break;
    default:
      break;
  }
  for (double v : sorted)
    if (!(std::abs(v) < kEnvelope)) throw StepExplosion("coordinate escaped the sanity envelope");
  prop = std::move(sorted);
  return true;
}

}  // namespace

void SdeConfig::validate() const {
  if (!(dt > 0.0)) throw InvalidParams("SdeConfig: dt must be positive");
  if (!(t_end > 0.0)) throw InvalidParams("SdeConfig: t_end must be positive");
  if (!(dt <= t_end)) throw InvalidParams("SdeConfig: dt must not exceed t_end");
}

std::vector<PathSample> simulate(const ModelSpec& model, const ParticleState& x0,
                                 const SdeConfig& config, const RngStream& rng,
                                 std::span<const double> sample_times) {
  model.validate();
  config.validate();
  const int n = model.n;
  if (static_cast<int>(x0.coords.size()) != n) throw InvalidParams("simulate: x0 size != n");
  if (!in_chamber(model, x0.coords)) throw InvalidParams("simulate: x0 outside the chamber");

  std::vector<double> targets(sample_times.begin(), sample_times.end());
  std::sort(targets.begin(), targets.end());
  for (double t : targets)
    if (t < 0.0 || t > config.t_end + 1e-12) throw InvalidParams("simulate: sample time out of range");

  ParticleState start = x0;
  double t = x0.time;
  if (boundary_flag(model, start).on_boundary) {
    start = desingularize_start(model, start, kBoundaryDelta);
    t = start.time;
  }
  std::vector<double> x = start.coords;

  std::vector<PathSample> out;
  out.reserve(targets.size());
  size_t next_target = 0;
  while (next_target < targets.size() && targets[next_target] <= t) {
    out.push_back({targets[next_target], x});
    ++next_target;
  }

  std::uint64_t draw = 0;
  double h_cur = config.dt;
  std::vector<double> f, sigma, prop(n);

  while (t < config.t_end - 1e-15 || next_target < targets.size()) {
    double goal = (next_target < targets.size()) ? targets[next_target] : config.t_end;
    if (goal <= t) {
      out.push_back({goal, x});
      ++next_target;
      continue;
    }
    double h = std::min({h_cur, config.dt, goal - t});
    f = flow_rhs(model, ParticleState{t, x});
    diffusion(model, x, sigma);

    bool accepted = false;
    for (int halvings = 0; halvings <= kMaxHalvings; ++halvings) {
      const double sq = std::sqrt(h);
      bool predictor_ok = true;
      if (model.frozen()) {
        // Zero-noise limit: a Heun (trapezoidal predictor-corrector) step
        // keeps the deterministic path at second order so the degeneration
        // to the ODE flow is visible at moderate dt.
        for (int i = 0; i < n; ++i) prop[i] = x[i] + f[i] * h;
        try {
          const std::vector<double> f2 = flow_rhs(model, ParticleState{t + h, prop});
          for (int i = 0; i < n; ++i) prop[i] = x[i] + 0.5 * h * (f[i] + f2[i]);
        } catch (const DegenerateState&) {
          predictor_ok = false;
        }
      } else {
        for (int i = 0; i < n; ++i)
          prop[i] = x[i] + f[i] * h + sigma[i] * sq * rng.normal(draw, i);
      }
      ++draw;
      apply_walls(model, prop);
      if (predictor_ok && accept_proposal(model, prop)) {
        accepted = true;
        break;
      }
      h *= 0.5;
    }
    if (!accepted) throw StepExplosion("step halving limit reached");
    x = prop;
    t += h;
    h_cur = std::min(config.dt, 2.0 * h);

    while (next_target < targets.size() && t >= targets[next_target] - 0.5 * config.dt) {
      out.push_back({targets[next_target], x});
      ++next_target;
    }
    if (t >= config.t_end - 1e-15 && next_target >= targets.size()) break;
  }
  return out;
}

std::vector<CompanionSample> simulate_companion(const CompanionSpec& spec, double y0,
                                                const SdeConfig& config, const RngStream& rng,
                                                std::span<const double> sample_times) {
  config.validate();
  std::vector<double> targets(sample_times.begin(), sample_times.end());
  std::sort(targets.begin(), targets.end());

  std::vector<CompanionSample> out;
  out.reserve(targets.size());

  if (spec.kind == CompanionKind::TorusExp) {
    // Exact sampling: value = exp(i sqrt(2) (y0 + B_t) + n t).
    double bt = 0.0, t = 0.0;
    std::uint64_t draw = 0;
    size_t next = 0;
    while (next < targets.size()) {
      if (targets[next] <= t + 1e-15) {
        const std::complex<double> iarg(spec.n * t, std::sqrt(2.0) * (y0 + bt));
        out.push_back({targets[next], std::exp(iarg)});
        ++next;
        continue;
      }
      const double h = std::min(config.dt, targets[next] - t);
      bt += std::sqrt(h) * rng.normal(draw, 0);
      ++draw;
      t += h;
    }
    return out;
  }

  double y = y0;
  if (spec.kind == CompanionKind::Bessel1D && y == 0.0)
    y = std::sqrt((2.0 * spec.alpha + 1.0) * kBoundaryDelta);

  double t = 0.0;
  std::uint64_t draw = 0;
  size_t next = 0;
  while (next < targets.size()) {
    if (targets[next] <= t + 1e-15) {
      out.push_back({targets[next], y});
      ++next;
      continue;
    }
    double h = std::min(config.dt, targets[next] - t);
    double drift = 0.0, sig = 1.0;
    switch (spec.kind) {
      case CompanionKind::Brownian:
        break;
      case CompanionKind::OU:
        drift = -spec.lambda * y;
        break;
      case CompanionKind::Bessel1D:
        drift = (spec.alpha + 0.5) / y;
        // Cap the singular drift so a near-wall step cannot overshoot.
        h = std::min(h, 0.25 * y / std::max(std::abs(drift), 1e-300));
        h = std::max(h, 1e-12 * config.dt);
        break;
      case CompanionKind::JacobiCompact1D:
        drift = (spec.p - spec.q) - (spec.p + spec.q) * y;
        sig = std::sqrt(2.0 * std::max(1.0 - y * y, 0.0));
        break;
      case CompanionKind::JacobiNoncompact1D:
        drift = (spec.q - spec.p) + (spec.p + spec.q) * y;
        sig = std::sqrt(2.0 * std::max(y * y - 1.0, 0.0));
        break;
      case CompanionKind::TorusExp:
        break;  // handled above
    }
    double prop = y + drift * h + sig * std::sqrt(h) * rng.normal(draw, 0);
    ++draw;
    switch (spec.kind) {
      case CompanionKind::Bessel1D:
        prop = std::abs(prop);
        if (prop == 0.0) prop = std::sqrt((2.0 * spec.alpha + 1.0) * kBoundaryDelta);
        break;
      case CompanionKind::JacobiCompact1D:
        prop = reflect_interval(prop, -1.0, 1.0);
        break;
      case CompanionKind::JacobiNoncompact1D:
        prop = 1.0 + std::abs(prop - 1.0);
        break;
      default:
        break;
    }
    if (!(std::abs(prop) < kEnvelope)) throw StepExplosion("companion escaped the sanity envelope");
    y = prop;
    t += h;
  }
  return out;
}

}  // namespace cmslab
