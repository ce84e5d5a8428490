#include "prmix/bench.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <stdexcept>

#include "prmix/errors.hpp"

namespace prmix::bench {

std::vector<double> simulate(const TrueModel& model, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("simulate needs n >= 1");
  std::mt19937_64 rng(seed);
  const auto w = model.weights().weights();
  std::discrete_distribution<std::size_t> component(w.begin(), w.end());
  std::vector<double> out(n);
  const Kernel& k = model.kernel();
  for (auto& y : out) {
    const double u = model.support()[component(rng)];
    if (k.family() == KernelFamily::GaussianLocation) {
      y = std::normal_distribution<double>(u, k.scale())(rng);
    } else {
      y = u == 0.0 ? 0.0 : static_cast<double>(std::poisson_distribution<long long>(u)(rng));
    }
  }
  return out;
}

std::vector<Scenario> misspecified_scenario_suite() {
  std::vector<Scenario> suite;
  {
    const Kernel k = Kernel::gaussian(1.0);
    SupportSet support({0.0, 3.0, 6.0});
    TrueModel truth(k, support, MixingVector({0.3, 0.4, 0.3}));
    suite.push_back(Scenario{"a", "well-specified Gaussian (sigma 1) on {0,3,6}, weights (.3,.4,.3)",
                             truth, k, support, true});
  }
  {
    const Kernel k = Kernel::poisson();
    TrueModel truth(k, SupportSet({1.0, 5.0}), MixingVector({0.5, 0.5}));
    suite.push_back(Scenario{"b", "misspecified Poisson: true {1,5} (.5,.5), fitted on {1,4,6}",
                             truth, k, SupportSet({1.0, 4.0, 6.0}), true});
  }
  {
    const Kernel k = Kernel::poisson();
    TrueModel truth(k, SupportSet({1.0, 5.0}), MixingVector({0.5, 0.5}));
    suite.push_back(Scenario{"c", "boundary: true Poisson {1,5} (.5,.5), fitted on {1,3,5}", truth,
                             k, SupportSet({1.0, 3.0, 5.0}), false});
  }
  return suite;
}

const Scenario& find_scenario(const std::vector<Scenario>& suite, const std::string& name) {
  for (const auto& s : suite) {
    if (s.name == name) return s;
  }
  throw ConfigError("unknown scenario '" + name + "' (expected a, b or c)");
}

std::vector<std::size_t> default_checkpoints() {
  std::vector<std::size_t> out;
  for (int k = 4; k <= 10; ++k) {
    out.push_back(static_cast<std::size_t>(std::llround(std::pow(10.0, 0.5 * k))));
  }
  return out;
}

void RateExperiment::validate() const {
  if (checkpoints.size() < 5) throw ConfigError("rate experiments need at least 5 checkpoints");
  for (std::size_t i = 1; i < checkpoints.size(); ++i) {
    if (checkpoints[i] <= checkpoints[i - 1]) {
      throw ConfigError("checkpoints must be strictly increasing");
    }
  }
  if (checkpoints.front() == 0) throw ConfigError("checkpoints must be positive");
  if (seeds == 0) throw ConfigError("rate experiments need at least one seed");
  if (gammas.empty()) throw ConfigError("rate experiments need at least one gamma");
  for (double g : gammas) WeightSchedule{g};
  std::size_t in_window = 0;
  for (auto c : checkpoints) in_window += c >= slope_window_start ? 1 : 0;
  if (in_window < 2) throw ConfigError("slope window holds fewer than two checkpoints");
}

SlopeFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw DomainError("line fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.standard_error = std::sqrt(rss / static_cast<double>(n - 2) / sxx);
  }
  return fit;
}

double median(std::vector<double> values) {
  if (values.empty()) throw DomainError("median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double reference_slope(double gamma) noexcept { return -(1.0 - 1.0 / (2.0 * gamma)); }

const GammaSummary& RateReport::summary(double gamma) const {
  for (const auto& s : summaries) {
    if (s.gamma == gamma) return s;
  }
  throw std::out_of_range("no summary for the requested gamma");
}

RateReport rate_experiment(const RateExperiment& config, Execution execution) {
  config.validate();
  const Scenario& sc = config.scenario;
  const ExpectationRule rule(sc.truth, sc.kernel, sc.fitted);

  RateReport report;
  report.scenario = sc.name;
  report.asserted = sc.assert_rates;
  report.oracle = diagnostics::kl_oracle_fstar(rule);
  const auto fstar = report.oracle.fstar.weights();
  const std::size_t s = sc.fitted.size();
  const std::size_t n_max = config.checkpoints.back();
  const std::size_t per_cell = config.checkpoints.size();
  const std::size_t cell_count = config.gammas.size() * config.seeds;

  std::vector<CellRow> rows(cell_count * per_cell);
  auto run_cell = [&](std::size_t cell) {
    const std::size_t gi = cell / config.seeds;
    const std::size_t si = cell % config.seeds;
    const double gamma = config.gammas[gi];
    const std::uint64_t seed = config.base_seed + si;
    const auto data = simulate(sc.truth, n_max, seed);
    const auto trace = pr_run(data, sc.kernel, sc.fitted, WeightSchedule(gamma),
                              MixingVector::uniform(s), config.checkpoints);
    for (std::size_t c = 0; c < per_cell; ++c) {
      const auto& [n, f] = trace.snapshots[c];
      std::vector<double> diff(s);
      double sq = 0.0;
      for (std::size_t u = 0; u < s; ++u) {
        diff[u] = f[u] - fstar[u];
        sq += diff[u] * diff[u];
      }
      CellRow row;
      row.scenario = sc.name;
      row.gamma = gamma;
      row.seed = seed;
      row.n = n;
      row.err_f = std::sqrt(sq);
      row.err_l1 = rule.l1_distance(f.weights(), fstar);
      row.kl_contrast = diagnostics::lyapunov_difference(rule, fstar, diff);
      rows[cell * per_cell + c] = row;
    }
  };

  const auto total = static_cast<long long>(cell_count);
  if (execution == Execution::Parallel) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (long long cell = 0; cell < total; ++cell) {
      try {
        run_cell(static_cast<std::size_t>(cell));
      } catch (...) {
#pragma omp critical
        failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (long long cell = 0; cell < total; ++cell) run_cell(static_cast<std::size_t>(cell));
  }

  for (std::size_t gi = 0; gi < config.gammas.size(); ++gi) {
    GammaSummary sum;
    sum.gamma = config.gammas[gi];
    sum.checkpoints = config.checkpoints;
    std::vector<double> lx, lf, ll1, lkl;
    for (std::size_t c = 0; c < per_cell; ++c) {
      std::vector<double> ef, el1, ekl;
      for (std::size_t si = 0; si < config.seeds; ++si) {
        const auto& row = rows[(gi * config.seeds + si) * per_cell + c];
        ef.push_back(row.err_f);
        el1.push_back(row.err_l1);
        ekl.push_back(row.kl_contrast);
      }
      sum.median_err_f.push_back(median(ef));
      sum.median_err_l1.push_back(median(el1));
      sum.median_kl.push_back(median(ekl));
      if (config.checkpoints[c] >= config.slope_window_start) {
        lx.push_back(std::log(static_cast<double>(config.checkpoints[c])));
        lf.push_back(std::log(sum.median_err_f.back()));
        ll1.push_back(std::log(sum.median_err_l1.back()));
        lkl.push_back(std::log(sum.median_kl.back()));
      }
    }
    sum.slope_f = fit_line(lx, lf);
    sum.slope_l1 = fit_line(lx, ll1);
    sum.slope_kl = fit_line(lx, lkl);
    sum.reference_f = reference_slope(sum.gamma);
    sum.reference_kl = 2.0 * sum.reference_f;
    sum.within_reference = sum.slope_f.slope <= sum.reference_f + kSlopeTolerance;
    report.summaries.push_back(std::move(sum));
  }
  report.cells = std::move(rows);
  return report;
}

void write_cells_csv(std::ostream& out, const std::vector<CellRow>& cells) {
  out << "scenario,gamma,seed,n,err_f,err_L1,kl_contrast\n";
  char buf[256];
  for (const auto& r : cells) {
    std::snprintf(buf, sizeof buf, "%s,%.17g,%llu,%zu,%.17g,%.17g,%.17g\n", r.scenario.c_str(),
                  r.gamma, static_cast<unsigned long long>(r.seed), r.n, r.err_f, r.err_l1,
                  r.kl_contrast);
    out << buf;
  }
}

void write_summary_csv(std::ostream& out, const std::vector<RateReport>& reports) {
  out << "scenario,gamma,metric,slope,slope_se,reference,asserted,within_reference\n";
  char buf[256];
  for (const auto& rep : reports) {
    for (const auto& s : rep.summaries) {
      struct Item {
        const char* metric;
        const SlopeFit* fit;
        double reference;
      };
      const Item items[] = {{"err_f", &s.slope_f, s.reference_f},
                            {"err_L1", &s.slope_l1, s.reference_f},
                            {"kl_contrast", &s.slope_kl, s.reference_kl}};
      for (const auto& it : items) {
        const bool within = it.fit->slope <= it.reference + kSlopeTolerance;
        std::snprintf(buf, sizeof buf, "%s,%.17g,%s,%.17g,%.17g,%.17g,%d,%d\n", rep.scenario.c_str(),
                      s.gamma, it.metric, it.fit->slope, it.fit->standard_error, it.reference,
                      rep.asserted ? 1 : 0, within ? 1 : 0);
        out << buf;
      }
    }
  }
}

}  // namespace prmix::bench
