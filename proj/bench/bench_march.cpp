// Wallclock of the serial reference march against the OpenMP march on the
// two benchmark problems. Usage: bench_march [repeats]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>

#include <omp.h>

#include "fbsde/backward.hpp"
#include "fbsde/harness.hpp"
#include "fbsde/problems.hpp"

using namespace fbsde;

namespace {

template <class Fn>
double best_of(int repeats, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

void run(const char* label, const FbsdeProblem& p, SchemeConfig cfg, int n, int repeats) {
  const SpaceTimeGrid grid(p.horizon, n, p.default_box, nominal_time_order(p, cfg.forward));
  std::optional<MarchResult> a, b;
  const double serial = best_of(repeats, [&] { a = march_serial(p, grid, cfg); });
  const double parallel = best_of(repeats, [&] { b = march(p, grid, cfg); });
  const bool same = std::ranges::equal(a->solution.y.values(), b->solution.y.values());
  std::printf("%-22s N=%-4d nodes=%-7zu serial %8.3fs  omp %8.3fs  speedup %5.2f  identical %s\n", label, n,
              grid.space()->size(), serial, parallel, serial / parallel, same ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 3;
  configure_threads();
  std::printf("threads: %d\n", omp_get_max_threads());

  SchemeConfig wt2;
  wt2.forward = ForwardScheme::WeakTaylor2;
  run("heston s1/wt2", heston_problem(), wt2, 128, repeats);

  SchemeConfig s1, cn;
  cn.scheme = Scheme::CN;
  run("sine2d s1/euler", sine2d_problem(), s1, 64, repeats);
  run("sine2d cn/euler", sine2d_problem(), cn, 64, repeats);
  return 0;
}
