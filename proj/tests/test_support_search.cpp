#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "generators.hpp"
#include "prmix/bench.hpp"
#include "prmix/errors.hpp"
#include "prmix/quadrature.hpp"
#include "prmix/support_search.hpp"

using namespace prmix;

namespace {

// Plain PR written out with densities, as an oracle for L_n.
double naive_objective(const std::vector<double>& data, const std::vector<double>& pts, double gamma) {
  std::vector<double> f(pts.size(), 1.0 / pts.size());
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const int y = static_cast<int>(data[i]);
    std::vector<double> p(pts.size());
    double m = 0.0;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      p[j] = std::exp(-pts[j] + y * std::log(pts[j]) - std::lgamma(y + 1.0));
      m += f[j] * p[j];
    }
    total -= std::log(m);
    const double w = std::pow(i + 2.0, -gamma);
    double s = 0.0;
    for (std::size_t j = 0; j < pts.size(); ++j) s += (f[j] = (1 - w) * f[j] + w * f[j] * p[j] / m);
    for (auto& v : f) v /= s;
  }
  return total;
}

TrueModel poisson_truth() {
  return TrueModel(Kernel::poisson(), SupportSet({1.0, 5.0}), MixingVector({0.5, 0.5}));
}

SubsetMask mask_of(const GridSpec& g, std::initializer_list<double> pts) {
  SubsetMask m(g.size(), false);
  for (double p : pts) {
    const auto it = std::find(g.points.begin(), g.points.end(), p);
    REQUIRE(it != g.points.end());
    m[it - g.points.begin()] = true;
  }
  return m;
}

double tv_to_truth(const FittedMixture& fit, const TrueModel& truth) {
  double s = 0.0;
  for (int y = 0; y < 80; ++y) s += std::abs(std::exp(fit.log_density(y)) - std::exp(truth.log_density(y)));
  return 0.5 * s;
}

}  // namespace

TEST_CASE("grid parsing") {
  CHECK(GridSpec::parse("1:3:0.5").points == std::vector<double>{1, 1.5, 2, 2.5, 3});
  const auto g = GridSpec::parse("0:30#100");
  CHECK(g.size() == 100);
  CHECK(g.points.front() == 0.0);
  CHECK(g.points.back() == 30.0);
  CHECK(g.lower == 0.0);
  CHECK(g.upper == 30.0);
  CHECK(GridSpec::parse("5,1,3").points == std::vector<double>{1, 3, 5});
  const double inc[] = {0.0, 3.0};
  CHECK(GridSpec::parse("1,3,5", inc).points == std::vector<double>{0, 1, 3, 5});
  // Accumulated step error must not drop the upper end.
  CHECK(GridSpec::parse("0:1:0.1").size() == 11);
  CHECK(GridSpec::parse("5:40:0.5").size() == 71);
  for (const char* bad : {"", "3:1:1", "1:3:0", "1:3:-1", "abc", "1:3#0", "1,,2", "1:2:3:4"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(GridSpec::parse(bad), ConfigError);
  }
}

TEST_CASE("support distance") {
  const std::vector<double> a{1, 5}, b{1, 4, 6}, c{1, 5};
  CHECK(support_distance(a, b) == 3);
  CHECK(support_distance(a, c) == 0);
  CHECK(support_distance(std::vector<double>{1}, std::vector<double>{2}) == 2);
  const auto m1 = mask_from_indices(4, std::vector<std::size_t>{0, 2});
  const auto m2 = mask_from_indices(4, std::vector<std::size_t>{2, 3});
  CHECK(support_distance(m1, m2) == 2);
  CHECK(mask_indices(m1) == std::vector<std::size_t>{0, 2});
}

TEST_CASE("objective matches a hand-written PR pass") {
  const auto data = bench::simulate(poisson_truth(), 300, 4);
  const auto grid = GridSpec::parse("1,2,5,8");
  const SubsetEvaluator ev(data, Kernel::poisson(), grid, WeightSchedule(0.9));
  for (std::size_t bits = 1; bits < 16; ++bits) {
    SubsetMask m(4);
    std::vector<double> pts;
    for (std::size_t j = 0; j < 4; ++j)
      if ((m[j] = (bits >> j) & 1)) pts.push_back(grid.points[j]);
    CHECK(ev.value(m) == doctest::Approx(naive_objective(data, pts, 0.9)).epsilon(1e-11));
  }
}

TEST_CASE("exhaustive ranking covers every nonempty subset") {
  const auto data = bench::simulate(poisson_truth(), 200, 2);
  const SubsetEvaluator ev(data, Kernel::poisson(), GridSpec::parse("1,3,5,7,9"), WeightSchedule(0.9));
  const auto r = exhaustive_select(ev, Execution::Serial);
  CHECK(r.ranking.size() == 31);
  CHECK(r.ranking.front().subset == r.best);
  CHECK(r.best_value == ev.value(r.best));
  for (std::size_t i = 1; i < r.ranking.size(); ++i) CHECK(r.ranking[i - 1].value <= r.ranking[i].value);

  const auto par = exhaustive_select(ev, Execution::Parallel);
  REQUIRE(par.ranking.size() == r.ranking.size());
  for (std::size_t i = 0; i < r.ranking.size(); ++i) {
    CHECK(par.ranking[i].subset == r.ranking[i].subset);
    CHECK(par.ranking[i].value == r.ranking[i].value);
  }

  const SubsetEvaluator one(data, Kernel::poisson(), GridSpec::parse("3"), WeightSchedule(0.9));
  const auto r1 = exhaustive_select(one);
  CHECK(r1.ranking.size() == 1);
  CHECK(r1.best == SubsetMask{true});

  const SubsetEvaluator big(data, Kernel::poisson(), GridSpec::parse("1:21:1"), WeightSchedule(0.9));
  CHECK_THROWS_AS(exhaustive_select(big), ConfigError);
}

TEST_CASE("Poisson zero rate cannot explain positive counts") {
  const std::vector<double> data{0, 0, 3};
  const auto grid = GridSpec::parse("0,2");
  const SubsetEvaluator ev(data, Kernel::poisson(), grid, WeightSchedule(0.9));
  CHECK(std::isinf(ev.value(mask_of(grid, {0.0}))));
  CHECK(std::isfinite(ev.value(mask_of(grid, {0.0, 2.0}))));
  CHECK(exhaustive_select(ev).best == mask_of(grid, {0.0, 2.0}));
}

TEST_CASE("exhaustive search recovers {1,5} for most seeds") {
  const auto grid = GridSpec::parse("1,3,5,7,9");
  const auto want = mask_of(grid, {1.0, 5.0});
  int hits = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto data = bench::simulate(poisson_truth(), 2000, 300 + s);
    const SubsetEvaluator ev(data, Kernel::poisson(), grid, WeightSchedule(0.9));
    hits += exhaustive_select(ev).best == want;
  }
  CHECK(hits > 10);
}

TEST_CASE("annealing is deterministic, memoization is transparent, best-ever is monotone") {
  const auto data = bench::simulate(poisson_truth(), 300, 8);
  const SubsetEvaluator ev(data, Kernel::poisson(), GridSpec::parse("1:10:1"), WeightSchedule(0.9));
  AnnealConfig cfg;
  cfg.seed = 42;
  const auto a = anneal_select(ev, cfg);
  const auto b = anneal_select(ev, cfg);
  cfg.memoize = false;
  const auto c = anneal_select(ev, cfg);
  CHECK(a.best == b.best);
  CHECK(a.trace.size() == b.trace.size());
  CHECK(a.best == c.best);
  REQUIRE(a.trace.size() == c.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].toggled == c.trace[i].toggled);
    CHECK(a.trace[i].accepted == c.trace[i].accepted);
    CHECK(a.trace[i].proposed_value == c.trace[i].proposed_value);
  }
  CHECK(a.evaluations <= c.evaluations);
  for (std::size_t i = 1; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].best_value <= a.trace[i - 1].best_value);
    CHECK(a.trace[i].temperature <= a.trace[i - 1].temperature);
  }
  CHECK(a.best_value == ev.value(a.best));
  CHECK(a.trace.size() <= cfg.iteration_cap);
  CHECK(a.initial_temperature == doctest::Approx(default_initial_temperature(ev, 42)));
}

TEST_CASE("annealing at zero temperature is a greedy descent") {
  gen::for_all(6, 31, [](gen::Gen& g, std::size_t c) {
    CAPTURE(c);
    const auto data = bench::simulate(poisson_truth(), 400, 50 + c);
    const SubsetEvaluator ev(data, Kernel::poisson(), GridSpec::parse("1:8:1"), WeightSchedule(0.9));
    AnnealConfig cfg;
    cfg.initial_temperature = 1e-12;
    cfg.seed = g.engine()();
    const auto r = anneal_select(ev, cfg);
    CHECK_FALSE(r.hit_cap);
    for (const auto& st : r.trace)
      if (st.accepted) CHECK(st.proposed_value <= st.current_value);
    // Local minimum under single toggles.
    for (std::size_t j = 0; j < ev.grid_size(); ++j) {
      auto m = r.best;
      m[j] = !m[j];
      if (std::none_of(m.begin(), m.end(), [](bool x) { return x; })) continue;
      CHECK(ev.value(m) >= r.best_value);
    }
  });
}

TEST_CASE("annealing configuration is validated") {
  AnnealConfig cfg;
  cfg.cooling = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.steps_per_temperature = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.initial_temperature = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.iteration_cap = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("refit reproduces the selection pass") {
  const auto data = bench::simulate(poisson_truth(), 500, 12);
  const auto grid = GridSpec::parse("1,3,5,7");
  const SubsetEvaluator ev(data, Kernel::poisson(), grid, WeightSchedule(0.9));
  const auto sel = exhaustive_select(ev);
  const auto fit = refit(ev, sel.best);
  CHECK(fit.trace.negative_log_predictive() == doctest::Approx(sel.best_value).epsilon(1e-13));
  CHECK(fit.mixture.support.size() == mask_indices(sel.best).size());
  double s = 0.0;
  for (double w : fit.mixture.weights.weights()) s += w;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fitted mixture approaches the truth as n grows") {
  const auto grid = GridSpec::parse("1,3,5,7");
  std::vector<double> med;
  for (std::size_t n : {250u, 4000u}) {
    std::vector<double> tv;
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto data = bench::simulate(poisson_truth(), n, 900 + s);
      const SubsetEvaluator ev(data, Kernel::poisson(), grid, WeightSchedule(0.9));
      tv.push_back(tv_to_truth(refit(ev, exhaustive_select(ev).best).mixture, poisson_truth()));
    }
    med.push_back(bench::median(tv));
  }
  CHECK(med[1] < med[0]);
  CHECK(med[1] < 0.05);
}

TEST_CASE("L_n per observation tracks the KL gap of each support") {
  // (L_n(U) - L_n(true)) / n against K(m, m_{f*_U}) for a misspecified U.
  const auto truth = poisson_truth();
  const ExpectationRule rule(truth, Kernel::poisson(), SupportSet({1.0, 4.0, 6.0}));
  const double kstar = 0.00202199968301977;
  CHECK(std::abs(rule.kl(std::vector<double>{0.475965870625577, 0.299266759090838, 0.224767370283586}) - kstar) <
        1e-10);
  std::vector<double> gap;
  for (std::size_t n : {1000u, 10000u, 100000u}) {
    std::vector<double> g;
    for (std::uint64_t s = 0; s < 5; ++s) {
      const auto data = bench::simulate(truth, n, 40 + s);
      double true_nll = 0.0;
      for (double y : data) true_nll -= truth.log_density(y);
      const auto fit = objective(data, Kernel::poisson(), std::vector<double>{1.0, 4.0, 6.0}, WeightSchedule(0.9));
      g.push_back((fit.value - true_nll) / n);
    }
    gap.push_back(std::abs(bench::median(g) - kstar));
  }
  CHECK(gap[2] < gap[0]);
  CHECK(gap[2] < 1e-3);
}
