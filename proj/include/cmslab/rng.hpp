#pragma once

#include <cmath>
#include <cstdint>

namespace cmslab {

/// Counter-based Gaussian/uniform source.  Every variate is a pure function
/// of (root_seed, stream_id, step, component), so paths can be generated in
/// any order, on any number of threads, with bit-identical results.
struct RngStream {
  std::uint64_t root_seed = 0;
  std::uint64_t stream_id = 0;

  static std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key(std::uint64_t step, std::uint64_t component) const {
    std::uint64_t h = mix64(root_seed);
    h = mix64(h ^ mix64(stream_id + 0x632be59bd9b4e019ULL));
    h = mix64(h ^ mix64(step + 0x9e3779b97f4a7c15ULL));
    h = mix64(h ^ mix64(component + 0xd1b54a32d192ed03ULL));
    return h;
  }

  /// Uniform in (0, 1), never exactly 0 or 1.
  double uniform(std::uint64_t step, std::uint64_t component) const {
    return (static_cast<double>(key(step, component) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller on two counter slots; `component`
  /// indexes independent coordinates within one time step.
  double normal(std::uint64_t step, std::uint64_t component) const {
    const double u1 = uniform(step, 2 * component);
    const double u2 = uniform(step, 2 * component + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
};

}  // namespace cmslab
