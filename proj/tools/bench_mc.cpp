// Compares the OpenMP path ensemble against the serial reference and checks
// that the deterministic reduction makes the two bit-identical.
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "cmslab/mc.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace cmslab;

int main(int argc, char** argv) {
  const long n_paths = (argc > 1) ? std::atol(argv[1]) : 20000;

  ModelSpec model;
  model.family = Family::HermiteA;
  model.n = 4;
  model.inv_temp = 4.0;
  const ParticleState x0{0.0, {-1.5, -0.5, 0.5, 1.5}};
  const double t = 0.25;
  const std::vector<double> times{t};

  const PathFunctional fn = [&](std::uint64_t idx, double dt) -> std::complex<double> {
    SdeConfig cfg{dt, t, BoundaryPolicy::ReflectOrder};
    const auto path = simulate(model, x0, cfg, RngStream{7, idx}, times);
    double e2 = 0.0;
    const auto& xt = path.back().coords;
    for (size_t i = 0; i < xt.size(); ++i)
      for (size_t j = i + 1; j < xt.size(); ++j) e2 += xt[i] * xt[j];
    return e2;
  };

  using clock = std::chrono::steady_clock;

  auto t0 = clock::now();
  const McEstimate serial = mc_expectation(fn, n_paths, 0, 1e-3, 7, /*force_serial=*/true);
  auto t1 = clock::now();
  const McEstimate parallel = mc_expectation(fn, n_paths, 0, 1e-3, 7, /*force_serial=*/false);
  auto t2 = clock::now();

  const double serial_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  const double parallel_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();

  int threads = 1;
#ifdef _OPENMP
  threads = omp_get_max_threads();
#endif
  std::printf("paths           : %ld\n", n_paths);
  std::printf("threads         : %d\n", threads);
  std::printf("serial          : %.1f ms  (mean %.17g)\n", serial_ms, serial.mean.real());
  std::printf("parallel        : %.1f ms  (mean %.17g)\n", parallel_ms, parallel.mean.real());
  std::printf("speedup         : %.2fx\n", serial_ms / parallel_ms);

  const bool identical = serial.mean == parallel.mean && serial.stderr_re == parallel.stderr_re;
  std::printf("bit-identical   : %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
