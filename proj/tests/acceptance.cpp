// Acceptance run: one line per criterion. Hard failures make the exit code
// nonzero; the two data reanalyses are soft and print a diff instead.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "prmix/bench.hpp"
#include "prmix/commands.hpp"
#include "prmix/config.hpp"
#include "prmix/diagnostics.hpp"
#include "prmix/errors.hpp"
#include "prmix/io.hpp"
#include "prmix/support_search.hpp"

using namespace prmix;
namespace dg = prmix::diagnostics;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
  std::vector<std::string> report;  // extra lines, printed indented
};

struct Criterion {
  int id;
  const char* name;
  bool soft;
  std::function<Outcome()> run;
};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(double x, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << x;
  return s.str();
}

const bench::Scenario& scenario(const char* name) {
  static const auto suite = bench::misspecified_scenario_suite();
  return bench::find_scenario(suite, name);
}

ExpectationRule rule_for(const bench::Scenario& sc) { return ExpectationRule(sc.truth, sc.kernel, sc.fitted); }

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

TrueModel poisson_15() { return TrueModel(Kernel::poisson(), SupportSet({1.0, 5.0}), MixingVector({0.5, 0.5})); }

fs::path scratch_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("prmix_acceptance_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  return p;
}

Outcome equilibrium() {
  const auto t = Clock::now();
  double worst = 0.0;
  std::string d;
  for (const char* name : {"a", "b"}) {
    const auto r = rule_for(scenario(name));
    const auto o = dg::kl_oracle_fstar(r);
    const double res = max_abs(dg::phi_mean_map(r, o.fstar.weights()));
    worst = std::max(worst, res);
    d += std::string(name) + ": " + fmt(res, 3) + "  ";
  }
  const double secs = seconds_since(t);
  return {worst < 1e-8 && secs < 1.0, "max |phi(f*)| " + d + "(" + fmt(secs, 3) + " s)"};
}

Outcome gradient_identity() {
  const auto t = Clock::now();
  const auto p = Kernel::poisson();
  const auto g = Kernel::gaussian(1.0);
  const ExpectationRule pois(TrueModel(p, SupportSet({1.0, 5.0}), MixingVector({0.5, 0.5})), p,
                             SupportSet({1.0, 3.0, 6.0}));
  const ExpectationRule gauss(TrueModel(g, SupportSet({0.0, 2.0, 4.0}), MixingVector({0.2, 0.5, 0.3})), g,
                              SupportSet({0.0, 2.0, 4.0}));
  std::mt19937_64 rng(2024);
  double worst_p = 0.0, worst_g = 0.0;
  for (int i = 0; i < 50; ++i) {
    auto f = dg::random_simplex_point(3, rng);
    // keep the points interior
    for (auto& x : f) x = 0.97 * x + 0.01;
    worst_p = std::max(worst_p, dg::lyapunov_gradient_identity_check(pois, f));
    worst_g = std::max(worst_g, dg::lyapunov_gradient_identity_check(gauss, f));
  }
  const double secs = seconds_since(t);
  return {std::max(worst_p, worst_g) < 1e-6 && secs < 10.0,
          "max residual gaussian " + fmt(worst_g, 3) + ", poisson " + fmt(worst_p, 3) + " (" + fmt(secs, 3) + " s)"};
}

Outcome descent() {
  const auto t = Clock::now();
  const auto r = rule_for(scenario("a"));
  std::mt19937_64 rng(77);
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 10000; ++i) pts.push_back(dg::random_simplex_point(3, rng));
  double worst = -INFINITY;
  for (const auto& v : dg::lyapunov_derivative_batch(r, pts)) worst = std::max(worst, v.inner_product);
  const double secs = seconds_since(t);
  return {worst <= 1e-10 && secs < 30.0, "max ldot over 1e4 points " + fmt(worst, 3) + " (" + fmt(secs, 3) + " s)"};
}

Outcome spectrum() {
  bool ok = true;
  std::string d;
  for (const char* name : {"a", "b"}) {
    const auto r = rule_for(scenario(name));
    const auto o = dg::kl_oracle_fstar(r);
    const auto j = dg::jacobian(r, o.fstar);
    const double top = j.eigenvalues().maxCoeff();
    const double fact = j.factorization_error(dg::lyapunov_hessian_fd(r, o.fstar.weights()));
    ok = ok && o.interior && top < -1e-6 && fact < 1e-7;
    d += std::string(name) + ": max eig " + fmt(top) + ", factorization " + fmt(fact, 3) + "  ";
  }
  return {ok, d};
}

Outcome markov() {
  const auto r = rule_for(scenario("a"));
  const auto o = dg::kl_oracle_fstar(r);
  const auto mc = dg::markov_chain_from_jacobian(dg::jacobian(r, o.fstar));
  return {mc.ok(), "min entry " + fmt(mc.min_entry) + ", row sums " + fmt(mc.row_sum_error, 3) + ", stationarity " +
                       fmt(mc.stationarity_error, 3) + ", balance " + fmt(mc.detailed_balance_error, 3)};
}

const bench::RateReport& rates_a() {
  static const bench::RateReport r = [] {
    bench::RateExperiment cfg{scenario("a")};
    cfg.gammas = {0.6, 0.9};
    cfg.seeds = 20;
    return bench::rate_experiment(cfg);
  }();
  return r;
}

Outcome rate() {
  const auto& r = rates_a();
  const auto& s9 = r.summary(0.9);
  const auto& s6 = r.summary(0.6);
  const bool ok = s9.slope_f.slope <= bench::reference_slope(0.9) + bench::kSlopeTolerance &&
                  s9.slope_f.slope < s6.slope_f.slope;
  Outcome out{ok, "slope(0.9) " + fmt(s9.slope_f.slope) + " +- " + fmt(s9.slope_f.standard_error, 2) +
                      " vs bound " + fmt(bench::reference_slope(0.9) + bench::kSlopeTolerance) + ", slope(0.6) " +
                      fmt(s6.slope_f.slope)};

  // Misspecified scenario, for the record.
  bench::RateExperiment cfg{scenario("b")};
  cfg.gammas = {0.6, 0.75, 0.9};
  const auto b = bench::rate_experiment(cfg);
  for (const auto& s : b.summaries)
    out.report.push_back("scenario b, gamma " + fmt(s.gamma) + ": slope " + fmt(s.slope_f.slope) + ", bound " +
                         fmt(s.reference_f + bench::kSlopeTolerance) +
                         (s.within_reference ? " (within)" : " (outside: slow mode still transient at n = 1e5)"));
  return out;
}

Outcome kl_contrast() {
  const auto& r = rates_a();
  bool ok = true;
  std::string d;
  for (const auto& s : r.summaries) {
    const double gap = std::abs(s.slope_kl.slope - 2 * s.slope_f.slope);
    ok = ok && gap < 0.15;
    d += "gamma " + fmt(s.gamma) + ": kl " + fmt(s.slope_kl.slope) + " vs 2x f " + fmt(2 * s.slope_f.slope) + "  ";
  }
  return {ok, d};
}

Outcome shift_correct() {
  const auto truth = poisson_15();
  const auto grid = GridSpec::parse("1,3,5,7,9");
  const WeightSchedule sched(0.9);
  int agree = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto data = bench::simulate(truth, 1000, 8000 + s);
    const SubsetEvaluator ev(data, Kernel::poisson(), grid, sched);
    const auto ex = exhaustive_select(ev);
    double log_m = 0.0;
    for (double y : data) log_m += truth.log_density(y);
    // K_n with the true m, computed per subset from a direct PR pass.
    std::vector<std::pair<double, std::size_t>> kn;
    for (std::size_t bits = 1; bits < 32; ++bits) {
      std::vector<double> pts;
      for (std::size_t j = 0; j < 5; ++j)
        if ((bits >> j) & 1) pts.push_back(grid.points[j]);
      const auto tr = pr_run(data, Kernel::poisson(), SupportSet(pts), sched, MixingVector::uniform(pts.size()));
      double lp = 0.0;
      for (double v : tr.log_predictive) lp += v;
      kn.emplace_back(log_m - lp, bits);
    }
    const auto best = *std::min_element(kn.begin(), kn.end());
    SubsetMask m(5);
    for (std::size_t j = 0; j < 5; ++j) m[j] = (best.second >> j) & 1;
    agree += m == ex.best;
  }
  return {agree == 10, std::to_string(agree) + "/10 seeds agree over 31 subsets"};
}

Outcome anneal_equivalence() {
  bool ok = true;
  std::string d;
  for (int g : {8, 10, 12}) {
    const auto grid = GridSpec::parse("1:" + std::to_string(g) + ":1");
    int match = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
      const auto data = bench::simulate(poisson_15(), 300, 7000 + s);
      const SubsetEvaluator ev(data, Kernel::poisson(), grid, WeightSchedule(0.9));
      AnnealConfig cfg;
      cfg.seed = 100 + s;
      match += anneal_select(ev, cfg).best == exhaustive_select(ev).best;
    }
    ok = ok && match >= 9;
    d += "|grid| " + std::to_string(g) + ": " + std::to_string(match) + "/10  ";
  }
  return {ok, d};
}

Outcome support_consistency() {
  const auto grid = GridSpec::parse("1:10:1");
  SubsetMask want(10, false);
  want[0] = want[4] = true;
  std::vector<int> hits;
  std::string d;
  for (std::size_t n : {500u, 2000u, 8000u}) {
    int h = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const auto data = bench::simulate(poisson_15(), n, 5000 + s);
      const SubsetEvaluator ev(data, Kernel::poisson(), grid, WeightSchedule(0.9));
      h += exhaustive_select(ev).best == want;
    }
    hits.push_back(h);
    d += "n=" + std::to_string(n) + ": " + std::to_string(h) + "/20  ";
  }
  const bool ok = hits[2] >= 16 && std::is_sorted(hits.begin(), hits.end());
  return {ok, d};
}

struct SelectRun {
  std::vector<double> support;
  std::vector<double> weights;
};

SelectRun run_config(const std::string& config, std::uint64_t seed, const std::string& tag) {
  RunConfig cfg;
  cfg.apply_file(fs::path(PRMIX_CONFIG_DIR) / config);
  cfg.seed = seed;
  cfg.out = scratch_dir(tag + std::to_string(seed)).string();
  std::ostringstream log;
  cli::run(cfg, log);
  const auto est = io::read_estimate(fs::path(cfg.out) / "estimate.csv");
  return {{est.support.points().begin(), est.support.points().end()},
          {est.weights.weights().begin(), est.weights.weights().end()}};
}

std::string describe(const SelectRun& r) {
  std::string s;
  for (std::size_t i = 0; i < r.support.size(); ++i) s += "(" + fmt(r.support[i]) + ", " + fmt(r.weights[i], 3) + ") ";
  return s;
}

Outcome example2() {
  const std::vector<std::pair<double, double>> table{{0, .328}, {.303, .418}, {4.24, .201}, {10.91, .051}, {27.27, .002}};
  Outcome out;
  int matched = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = run_config("example2_defaults.json", seed, "ex2_");
    bool ok = r.support.size() == table.size() && r.support.front() == 0.0;
    std::string diff;
    if (r.support.size() != table.size()) diff = "size " + std::to_string(r.support.size()) + " vs 5";
    for (std::size_t i = 0; ok && i < table.size(); ++i) {
      const bool loc = std::abs(r.support[i] - table[i].first) <= 0.303 + 1e-9;
      const bool wt = std::abs(r.weights[i] - table[i].second) <= 0.05;
      if (!loc || !wt) {
        ok = false;
        diff = "point " + std::to_string(i + 1) + " off";
      }
    }
    matched += ok;
    out.report.push_back("seed " + std::to_string(seed) + ": " + describe(r) + (ok ? "match" : "[" + diff + "]"));
    if (!ok) {
      // Weight collected by each reference point from its nearest selected points.
      std::vector<double> mass(table.size(), 0.0);
      for (std::size_t i = 0; i < r.support.size(); ++i) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < table.size(); ++k)
          if (std::abs(r.support[i] - table[k].first) < std::abs(r.support[i] - table[best].first)) best = k;
        mass[best] += r.weights[i];
      }
      std::string line = "  nearest-point mass vs table:";
      for (std::size_t k = 0; k < table.size(); ++k)
        line += " " + fmt(table[k].first) + ": " + fmt(mass[k], 3) + "/" + fmt(table[k].second, 3);
      out.report.push_back(line);
    }
  }
  out.passed = matched >= 1;
  out.detail = std::to_string(matched) + "/5 SA seeds match the reference estimate";
  return out;
}

Outcome example1() {
  Outcome out;
  int good = 0;
  std::string sizes;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = run_config("example1_galaxies.json", seed, "ex1_");
    good += r.support.size() >= 5 && r.support.size() <= 7;
    sizes += std::to_string(r.support.size()) + " ";
    out.report.push_back("seed " + std::to_string(seed) + ": " + describe(r));
  }
  out.passed = good >= 3;
  out.detail = "support sizes " + sizes + "(" + std::to_string(good) + "/5 in [5, 7])";
  return out;
}

Outcome assumptions() {
  const auto& sc = scenario("a");
  const auto r = rule_for(sc);
  const auto o = dg::kl_oracle_fstar(r);
  const auto j = dg::jacobian(r, o.fstar);
  const std::size_t n = 10000;
  const auto data = bench::simulate(sc.truth, n, 13);
  std::vector<std::size_t> every(n);
  std::iota(every.begin(), every.end(), std::size_t{0});
  bool ok = true;
  Outcome out;
  for (double g : {0.6, 0.75, 0.9}) {
    const WeightSchedule sched(g);
    dg::AssumptionInputs in{&r, sched, j, o.fstar, o.kstar, data,
                            pr_run(data, sc.kernel, sc.fitted, sched, MixingVector::uniform(3), every)};
    const auto rep = dg::chen_assumption_suite(in);
    ok = ok && rep.all_passed();
    std::string line = "gamma " + fmt(g) + ":";
    std::vector<std::string> failed;
    for (const char* id : {"A1", "A2", "A3", "A4"}) {
      int pass = 0, total = 0;
      for (const auto& c : rep.checks)
        if (c.id == id) {
          ++total;
          pass += c.passed;
          if (!c.passed) failed.push_back("  failed " + c.id + " " + c.name + ": " + fmt(c.value) + " vs " + fmt(c.threshold));
        }
      line += " " + std::string(id) + " " + std::to_string(pass) + "/" + std::to_string(total);
    }
    out.report.push_back(line);
    out.report.insert(out.report.end(), failed.begin(), failed.end());
  }
  bool rejected = false;
  try {
    WeightSchedule bad(0.5);
  } catch (const DomainError&) {
    rejected = true;
  }
  out.passed = ok && rejected;
  out.detail = std::string("A1-A4 at gamma 0.6/0.75/0.9 ") + (ok ? "pass" : "fail") + ", gamma 0.5 " +
               (rejected ? "rejected" : "accepted");
  return out;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "equilibrium identity", false, equilibrium},
      {2, "gradient identity", false, gradient_identity},
      {3, "descent property", false, descent},
      {4, "Jacobian spectrum", false, spectrum},
      {5, "Markov-chain observation", false, markov},
      {6, "rate of convergence", false, rate},
      {7, "KL contrast rate", false, kl_contrast},
      {8, "objective shift-correctness", false, shift_correct},
      {9, "annealing matches enumeration", false, anneal_equivalence},
      {10, "support consistency", false, support_consistency},
      {11, "defaults reanalysis", true, example2},
      {12, "galaxy reanalysis", true, example1},
      {13, "assumption suite", false, assumptions},
  };
  int hard_failures = 0;
  for (const auto& c : criteria) {
    const auto t = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const char* tag = o.passed ? "PASS" : (c.soft ? "SOFT-FAIL" : "FAIL");
    std::cout << "[" << tag << "] " << c.id << " " << c.name << ": " << o.detail << " [" << fmt(seconds_since(t), 3)
              << " s]\n";
    for (const auto& line : o.report) std::cout << "    " << line << '\n';
    std::cout.flush();
    if (!o.passed && !c.soft) ++hard_failures;
  }
  fs::remove_all(fs::temp_directory_path() / ("prmix_acceptance_" + std::to_string(::getpid())));
  std::cout << (hard_failures ? "acceptance: " + std::to_string(hard_failures) + " hard failure(s)\n"
                              : std::string("acceptance: all hard criteria pass\n"));
  return hard_failures ? 1 : 0;
}
