#include "cmslab/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cmslab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double gap_tol(double a, double b) { return kDegeneracyTol * (1.0 + std::abs(a) + std::abs(b)); }

bool degenerate_pair(double a, double b) { return std::abs(b - a) < gap_tol(a, b); }

bool at_wall(double x, double wall) { return std::abs(x - wall) < kDegeneracyTol * (1.0 + std::abs(x) + std::abs(wall)); }

}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::HermiteA: return "hermite";
    case Family::LaguerreB: return "laguerre";
    case Family::JacobiCompact: return "jacobi";
    case Family::JacobiNoncompact: return "jacobi-noncompact";
    case Family::Torus: return "torus";
  }
  return "?";
}

void ModelSpec::validate() const {
  if (n < 1) throw InvalidParams("n_particles must be >= 1");
  if (!(inv_temp > 0.0)) throw InvalidParams("inv_temp must be positive (or infinity)");
  switch (family) {
    case Family::HermiteA:
      break;
    case Family::LaguerreB:
      if (!(nu > 0.0)) throw InvalidParams("LaguerreB requires nu > 0");
      break;
    case Family::JacobiCompact:
    case Family::JacobiNoncompact:
      if (!(p > n - 1) || !(q > n - 1))
        throw InvalidParams("Jacobi families require p > N-1 and q > N-1");
      break;
    case Family::Torus:
      break;
  }
  if (lambda) {
    if (*lambda < 0.0) throw InvalidParams("lambda must be nonnegative");
    if (family != Family::HermiteA && family != Family::LaguerreB)
      throw Unsupported("confined variant exists only for Hermite/Laguerre");
  }
}

double canonical_lambda(const ModelSpec& model) {
  const double N = model.n;
  switch (model.family) {
    case Family::HermiteA: return N * (N - 1) / 2.0;
    case Family::LaguerreB: return N * (N + model.nu - 1);
    default: throw Unsupported("no canonical confinement for this family");
  }
}

std::vector<std::complex<double>> ParticleState::torus_view() const {
  std::vector<std::complex<double>> w(coords.size());
  for (size_t j = 0; j < coords.size(); ++j)
    w[j] = std::complex<double>(std::cos(coords[j]), std::sin(coords[j]));
  return w;
}

bool in_chamber(const ModelSpec& model, std::span<const double> x) {
  const int n = model.n;
  if (static_cast<int>(x.size()) != n) return false;
  for (int i = 0; i + 1 < n; ++i)
    if (x[i] > x[i + 1]) return false;
  switch (model.family) {
    case Family::HermiteA: return true;
    case Family::LaguerreB: return x[0] >= 0.0;
    case Family::JacobiCompact: return x[0] >= -1.0 && x[n - 1] <= 1.0;
    case Family::JacobiNoncompact: return x[0] >= 1.0;
    case Family::Torus: return x[n - 1] <= x[0] + kTwoPi;
  }
  return false;
}

BoundaryFlag boundary_flag(const ModelSpec& model, const ParticleState& state) {
  const auto& x = state.coords;
  const int n = model.n;
  BoundaryFlag flag;

  // Runs of pairwise coinciding coordinates.
  std::vector<IndexRange> clusters;
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n && degenerate_pair(x[j], x[j + 1])) ++j;
    if (j > i) clusters.push_back({i, j + 1, false, 0.0});
    i = j + 1;
  }

  // Hard-wall contact extends (or creates) the touching cluster.
  auto absorb_wall = [&](int idx, double wall) {
    for (auto& c : clusters) {
      if (idx >= c.begin && idx < c.end) {
        c.at_wall = true;
        c.wall = wall;
        return;
      }
    }
    clusters.push_back({idx, idx + 1, true, wall});
  };
  switch (model.family) {
    case Family::LaguerreB:
      if (at_wall(x[0], 0.0)) absorb_wall(0, 0.0);
      break;
    case Family::JacobiCompact:
      if (at_wall(x[0], -1.0)) absorb_wall(0, -1.0);
      if (at_wall(x[n - 1], 1.0)) absorb_wall(n - 1, 1.0);
      break;
    case Family::JacobiNoncompact:
      if (at_wall(x[0], 1.0)) absorb_wall(0, 1.0);
      break;
    case Family::Torus:
      // Wrap contact x_N ~ x_1 + 2pi: report as a cluster with begin > end,
      // meaning indices begin..N-1 together with 0..end-1.
      if (n >= 2 && std::abs(x[0] + kTwoPi - x[n - 1]) < gap_tol(x[0], x[n - 1])) {
        int last_start = n - 1;
        while (last_start > 0 && degenerate_pair(x[last_start - 1], x[last_start])) --last_start;
        int first_end = 1;
        while (first_end < n && degenerate_pair(x[first_end - 1], x[first_end])) ++first_end;
        std::erase_if(clusters, [&](const IndexRange& c) {
          return c.begin >= last_start || c.end <= first_end;
        });
        clusters.push_back({last_start, first_end, false, 0.0});
      }
      break;
    default:
      break;
  }

  std::sort(clusters.begin(), clusters.end(),
            [](const IndexRange& a, const IndexRange& b) { return a.begin < b.begin; });
  flag.degenerate_clusters = std::move(clusters);
  flag.on_boundary = !flag.degenerate_clusters.empty();
  return flag;
}

bool strictly_interior(const ModelSpec& model, std::span<const double> x) {
  if (!in_chamber(model, x)) return false;
  ParticleState s{0.0, std::vector<double>(x.begin(), x.end())};
  return !boundary_flag(model, s).on_boundary;
}

std::vector<double> drift(const ModelSpec& model, const ParticleState& state) {
  const auto& x = state.coords;
  const int n = model.n;
  if (static_cast<int>(x.size()) != n) throw InvalidParams("state size mismatch");
  if (boundary_flag(model, state).on_boundary)
    throw DegenerateState("state on chamber boundary; use the desingularized path");

  std::vector<double> v(n, 0.0);
  switch (model.family) {
    case Family::HermiteA:
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (j != i) v[i] += 1.0 / (x[i] - x[j]);
      break;
    case Family::LaguerreB:
      for (int i = 0; i < n; ++i) {
        double s = model.nu / x[i];
        for (int j = 0; j < n; ++j)
          if (j != i) s += 1.0 / (x[i] - x[j]) + 1.0 / (x[i] + x[j]);
        v[i] = s;
      }
      break;
    case Family::JacobiCompact:
      for (int i = 0; i < n; ++i) {
        double s = (model.p - model.q) - (model.p + model.q) * x[i];
        for (int j = 0; j < n; ++j)
          if (j != i) s += 2.0 * (1.0 - x[i] * x[j]) / (x[i] - x[j]);
        v[i] = s;
      }
      break;
    case Family::JacobiNoncompact:
      for (int i = 0; i < n; ++i) {
        double s = (model.q - model.p) + (model.q + model.p) * x[i];
        for (int j = 0; j < n; ++j)
          if (j != i) s += 2.0 * (x[i] * x[j] - 1.0) / (x[i] - x[j]);
        v[i] = s;
      }
      break;
    case Family::Torus:
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (j != i) v[i] += 1.0 / std::tan((x[i] - x[j]) / 2.0);
      break;
  }
  return v;
}

std::vector<double> stationary_drift(const ModelSpec& model, const ParticleState& state) {
  if (model.family != Family::HermiteA && model.family != Family::LaguerreB)
    throw Unsupported("stationary_drift: Jacobi/Torus families are intrinsically confined");
  const double lambda = model.lambda.value_or(canonical_lambda(model));
  auto v = drift(model, state);
  for (int i = 0; i < model.n; ++i) v[i] -= lambda * state.coords[i];
  return v;
}

std::vector<double> flow_rhs(const ModelSpec& model, const ParticleState& state) {
  return model.lambda ? stationary_drift(model, state) : drift(model, state);
}

std::vector<double> trig_jacobi_drift(const ModelSpec& model, std::span<const double> tau) {
  if (model.family != Family::JacobiCompact) throw InvalidParams("trig form is for compact Jacobi");
  const int n = model.n;
  if (static_cast<int>(tau.size()) != n) throw InvalidParams("state size mismatch");
  const double pi = std::numbers::pi;
  for (int i = 0; i < n; ++i) {
    if (at_wall(tau[i], 0.0) || at_wall(tau[i], pi))
      throw DegenerateState("trig coordinate at alcove endpoint");
    if (i + 1 < n && degenerate_pair(tau[i + 1], tau[i]))
      throw DegenerateState("coinciding trig coordinates");
    if (i + 1 < n && tau[i] < tau[i + 1]) throw InvalidParams("tau must be decreasing");
  }
  auto cot = [](double y) { return std::cos(y) / std::sin(y); };
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) {
    double s = (model.q - model.p) * cot(tau[i] / 2.0) + 2.0 * (model.p + 1.0 - n) * cot(tau[i]);
    for (int j = 0; j < n; ++j)
      if (j != i) s += cot((tau[i] - tau[j]) / 2.0) + cot((tau[i] + tau[j]) / 2.0);
    v[i] = s;
  }
  return v;
}

std::vector<std::complex<double>> torus_w_drift(const ModelSpec& model,
                                                std::span<const std::complex<double>> w) {
  if (model.family != Family::Torus) throw InvalidParams("w-coordinates are for the torus family");
  const int n = model.n;
  if (static_cast<int>(w.size()) != n) throw InvalidParams("state size mismatch");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(w[i] - w[j]) < 2.0 * kDegeneracyTol)
        throw DegenerateState("coinciding torus points");
  std::vector<std::complex<double>> v(n);
  for (int j = 0; j < n; ++j) {
    std::complex<double> s = -static_cast<double>(n - 1) * w[j];
    for (int l = 0; l < n; ++l)
      if (l != j) s -= 2.0 * w[j] * w[l] / (w[j] - w[l]);
    v[j] = s;
  }
  return v;
}

}  // namespace cmslab
