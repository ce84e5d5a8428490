#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "prmix/diagnostics.hpp"
#include "prmix/execution.hpp"
#include "prmix/kernel.hpp"
#include "prmix/pr.hpp"
#include "prmix/quadrature.hpp"

namespace prmix::bench {

/// i.i.d. draws from a finite mixture: component index first, then the kernel.
std::vector<double> simulate(const TrueModel& model, std::size_t n, std::uint64_t seed);

/// A true model plus the support PR is run on (possibly misspecified).
struct Scenario {
  std::string name;
  std::string description;
  TrueModel truth;
  Kernel kernel;
  SupportSet fitted;
  /// Interior f* expected: slopes are asserted. Otherwise report-only.
  bool assert_rates = true;
};

/// (a) well-specified Gaussian, interior truth; (b) misspecified Poisson,
/// true {1,5} fitted on {1,4,6}; (c) boundary: fitted grid strictly contains
/// the true support.
std::vector<Scenario> misspecified_scenario_suite();
const Scenario& find_scenario(const std::vector<Scenario>& suite, const std::string& name);

/// Checkpoints 10^2, 10^2.5, ..., 10^5 (rounded).
std::vector<std::size_t> default_checkpoints();

struct RateExperiment {
  Scenario scenario;
  std::vector<double> gammas{0.6, 0.9};
  std::vector<std::size_t> checkpoints = default_checkpoints();
  std::size_t seeds = 20;
  std::uint64_t base_seed = 1000;
  /// Slopes are fitted on checkpoints with n >= this.
  std::size_t slope_window_start = 1000;
  void validate() const;
};

/// One (gamma, seed, n) measurement.
struct CellRow {
  std::string scenario;
  double gamma = 0.0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double err_f = 0.0;
  double err_l1 = 0.0;
  double kl_contrast = 0.0;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double standard_error = 0.0;
};

/// Least squares of y on x.
SlopeFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct GammaSummary {
  double gamma = 0.0;
  std::vector<std::size_t> checkpoints;
  std::vector<double> median_err_f;
  std::vector<double> median_err_l1;
  std::vector<double> median_kl;
  SlopeFit slope_f;
  SlopeFit slope_l1;
  SlopeFit slope_kl;
  /// -(1 - 1/(2 gamma)) for the f-error, twice that for the KL contrast.
  double reference_f = 0.0;
  double reference_kl = 0.0;
  /// slope_f <= reference_f + 0.10 (only meaningful when asserting).
  bool within_reference = false;
};

struct RateReport {
  std::string scenario;
  bool asserted = true;
  diagnostics::OracleResult oracle;
  std::vector<CellRow> cells;
  std::vector<GammaSummary> summaries;

  const GammaSummary& summary(double gamma) const;
};

constexpr double kSlopeTolerance = 0.10;

double reference_slope(double gamma) noexcept;

/// One PR pass per (gamma, seed); errors recorded at the checkpoints against
/// the oracle f*. Cells run under OpenMP or the serial reference loop; the
/// report is identical either way.
RateReport rate_experiment(const RateExperiment& config, Execution execution = Execution::Parallel);

void write_cells_csv(std::ostream& out, const std::vector<CellRow>& cells);
void write_summary_csv(std::ostream& out, const std::vector<RateReport>& reports);

double median(std::vector<double> values);

}  // namespace prmix::bench
