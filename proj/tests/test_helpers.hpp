#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "cmslab/model.hpp"
#include "cmslab/rng.hpp"

namespace cmslab::testing {

/// Random strictly interior configuration: one coordinate per slot of an
/// equal partition of the family's natural window, jittered by at most 80%
/// of the slot width so ordering and minimal gaps are guaranteed.
inline std::vector<double> random_interior(const ModelSpec& model, const RngStream& rng,
                                           std::uint64_t tag) {
  const int n = model.n;
  std::vector<double> x(n);
  auto slot = [&](double lo, double hi, int i) {
    return lo + (hi - lo) * (i + 0.1 + 0.8 * rng.uniform(tag, i)) / n;
  };
  for (int i = 0; i < n; ++i) {
    switch (model.family) {
      case Family::HermiteA: x[i] = slot(-2.0, 2.0, i); break;
      case Family::LaguerreB: x[i] = slot(0.3, 2.8, i); break;
      case Family::JacobiCompact: x[i] = slot(-0.9, 0.9, i); break;
      case Family::JacobiNoncompact: x[i] = slot(1.05, 2.5, i); break;
      case Family::Torus: x[i] = slot(0.0, 0.9 * 2.0 * std::numbers::pi, i); break;
    }
  }
  return x;
}

inline double sup_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline double norm_sq(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

inline double coord_sum(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

}  // namespace cmslab::testing
