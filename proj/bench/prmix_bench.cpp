// Serial reference vs OpenMP timings for the parallel kernels.
// Usage: prmix-bench [repeats]
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "prmix/bench.hpp"
#include "prmix/datasets.hpp"
#include "prmix/diagnostics.hpp"
#include "prmix/support_search.hpp"

using namespace prmix;

namespace {

double best_of(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto t = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count());
  }
  return best;
}

void row(const char* name, int repeats, const std::function<void(Execution)>& fn) {
  const double s = best_of(repeats, [&] { fn(Execution::Serial); });
  const double p = best_of(repeats, [&] { fn(Execution::Parallel); });
  std::printf("%-34s %10.4f %10.4f %8.2fx\n", name, s, p, s / p);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 3;
  std::printf("threads: %d, best of %d\n", omp_get_max_threads(), repeats);
  std::printf("%-34s %10s %10s %9s\n", "kernel", "serial s", "openmp s", "speedup");

  const TrueModel pois(Kernel::poisson(), SupportSet({1.0, 5.0}), MixingVector({0.5, 0.5}));
  const auto counts = bench::simulate(pois, 2000, 1);
  const SubsetEvaluator ev(counts, Kernel::poisson(), GridSpec::parse("1:14:1"), WeightSchedule(0.9));
  row("exhaustive_select (14 pts, n=2000)", repeats, [&](Execution e) { exhaustive_select(ev, e); });

  const auto suite = bench::misspecified_scenario_suite();
  const auto& a = bench::find_scenario(suite, "a");
  const ExpectationRule rule(a.truth, a.kernel, a.fitted);
  std::mt19937_64 rng(3);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 10000; ++i) pts.push_back(diagnostics::random_simplex_point(3, rng));
  row("lyapunov_derivative_batch (1e4)", repeats,
      [&](Execution e) { diagnostics::lyapunov_derivative_batch(rule, pts, e); });

  bench::RateExperiment exp{a};
  exp.seeds = 8;
  row("rate_experiment (a, 2 gammas x 8)", repeats, [&](Execution e) { bench::rate_experiment(exp, e); });

  const auto gal = datasets::galaxy_velocities();
  const auto grid = GridSpec::parse("5:40:0.5").support();
  PermutationAveraging avg{64, 1, false};
  row("pr_run_averaged (galaxies, 64)", repeats, [&](Execution e) {
    pr_run_averaged(gal, Kernel::gaussian(1.0), grid, WeightSchedule(0.9), MixingVector::uniform(grid.size()), avg, e);
  });
  return 0;
}
