// Timing comparison of the OpenMP pairwise kernels against their serial
// references on random point clouds / polygons. Run manually:
//   build/bench/bench_pairwise [num_points] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kcycle/observables.hpp"

using namespace kcycle;

namespace {

std::vector<Vec3> random_points(int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Vec3> v(static_cast<size_t>(n));
  for (auto& p : v) p = Vec3(gauss(rng), gauss(rng), gauss(rng));
  return v;
}

template <class F>
double time_ms(int repeats, double& result, F&& f) {
  auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < repeats; ++r) result = f();
  auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(t1 - t0).count() / repeats;
}

void row(const char* name, int repeats, double serial_ms, double serial_val,
         double parallel_ms, double parallel_val) {
  std::printf("%-10s %4dx   serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   |diff| %.3e\n",
              name, repeats, serial_ms, parallel_ms, serial_ms / parallel_ms,
              std::abs(serial_val - parallel_val));
}

}  // namespace

int main(int argc, char** argv) {
  int n = argc > 1 ? std::atoi(argv[1]) : 3000;
  int repeats = argc > 2 ? std::atoi(argv[2]) : 5;

#ifdef _OPENMP
  std::printf("n = %d, threads = %d\n", n, omp_get_max_threads());
#else
  std::printf("n = %d, single-threaded build\n", n);
#endif

  std::vector<Vec3> pts = random_points(n, 1);
  std::vector<Vec3> dip = random_points(n, 2);
  for (auto& d : dip) d.normalize();

  double vs = 0, vp = 0;
  double ts = time_ms(repeats, vs, [&] { return coulomb_energy_serial(pts, 1.0); });
  double tp = time_ms(repeats, vp, [&] { return coulomb_energy(pts, 1.0); });
  row("coulomb", repeats, ts, vs, tp, vp);

  ts = time_ms(repeats, vs, [&] { return dipole_energy_serial(pts, dip); });
  tp = time_ms(repeats, vp, [&] { return dipole_energy(pts, dip); });
  row("dipole", repeats, ts, vs, tp, vp);

  // writhe is the heaviest kernel; use a smaller polygon
  std::vector<Vec3> poly = random_points(std::min(n, 1200), 3);
  ts = time_ms(repeats, vs, [&] { return writhe_serial(poly); });
  tp = time_ms(repeats, vp, [&] { return writhe(poly); });
  row("writhe", repeats, ts, vs, tp, vp);

  return 0;
}
