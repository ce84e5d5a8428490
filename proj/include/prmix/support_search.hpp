#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prmix/execution.hpp"
#include "prmix/pr.hpp"

namespace prmix {

/// Compact superset [lower, upper] and the finite candidate grid inside it.
struct GridSpec {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> points;

  /// Parses "lower:upper:step", "lower:upper#count" (count equispaced points,
  /// both ends included) or an explicit comma-separated list. `include`
  /// points are merged in (sorted, deduplicated). Throws ConfigError.
  static GridSpec parse(const std::string& text, std::span<const double> include = {});
  static GridSpec equispaced(double lower, double upper, std::size_t count);
  static GridSpec from_points(std::vector<double> points);

  std::size_t size() const noexcept { return points.size(); }
  SupportSet support() const { return SupportSet(points); }
};

/// Subset of a grid as an inclusion mask.
using SubsetMask = std::vector<bool>;

SubsetMask mask_from_indices(std::size_t grid_size, std::span<const std::size_t> indices);
std::vector<std::size_t> mask_indices(const SubsetMask& mask);
std::vector<double> mask_points(const SubsetMask& mask, std::span<const double> grid);
std::string mask_key(const SubsetMask& mask);

/// |a symmetric-difference b| for two subsets of a common grid.
std::size_t support_distance(const SubsetMask& a, const SubsetMask& b);
/// Same, for sorted point lists.
std::size_t support_distance(std::span<const double> a, std::span<const double> b);

/// L_n(U) = -sum_i log m_{i-1,U}(Y_i); the U-free term sum log m(Y_i) of the
/// KL estimate K_n(U) is dropped, so argmin L_n = argmin K_n.
struct SubsetObjective {
  SubsetMask subset;
  double value = 0.0;
  bool feasible = true;
  /// Present for feasible subsets when requested.
  std::optional<PRTrace> trace;
};

/// Evaluates L_n over subsets of one grid for one fixed data order.
/// Every subset starts PR from the uniform distribution on itself.
class SubsetEvaluator {
 public:
  SubsetEvaluator(std::span<const double> data, const Kernel& kernel, const GridSpec& grid,
                  const WeightSchedule& schedule);

  std::size_t grid_size() const noexcept { return grid_.size(); }
  const GridSpec& grid() const noexcept { return grid_; }
  const Kernel& kernel() const noexcept { return kernel_; }
  const WeightSchedule& schedule() const noexcept { return schedule_; }
  std::size_t observations() const noexcept { return table_.observations(); }
  std::span<const double> data() const noexcept { return data_; }

  /// L_n(U); +inf when the subset cannot explain the data.
  double value(const SubsetMask& subset) const;
  SubsetObjective objective(const SubsetMask& subset, bool keep_trace = false) const;

 private:
  Kernel kernel_;
  GridSpec grid_;
  WeightSchedule schedule_;
  std::vector<double> data_;
  LogLikelihoodTable table_;
};

/// objective(data, k, U, sched) for a single subset given by its points.
SubsetObjective objective(std::span<const double> data, const Kernel& kernel,
                          std::span<const double> subset_points, const WeightSchedule& schedule);

struct RankedSubset {
  SubsetMask subset;
  double value = 0.0;
  std::size_t size = 0;
};

struct ExhaustiveResult {
  SubsetMask best;
  double best_value = 0.0;
  /// All 2^|grid| - 1 nonempty subsets, best first. Ties: smaller |U|, then
  /// lexicographic on the included indices.
  std::vector<RankedSubset> ranking;
};

constexpr std::size_t kExhaustiveMaxGrid = 20;

/// Global minimizer by enumeration. Throws ConfigError for grids above 20 points.
ExhaustiveResult exhaustive_select(const SubsetEvaluator& evaluator,
                                   Execution execution = Execution::Parallel);

/// Strict ordering used for ranking: value, then size, then lexicographic.
bool subset_before(const RankedSubset& a, const RankedSubset& b);

struct AnnealConfig {
  /// Initial temperature; nullopt -> interquartile range of L_n over 20 random subsets.
  std::optional<double> initial_temperature;
  double cooling = 0.95;
  std::size_t steps_per_temperature = 50;
  /// Total proposal budget.
  std::size_t iteration_cap = 5000;
  std::uint64_t seed = 1;
  /// Initial subset; empty -> the full grid.
  SubsetMask initial;
  bool memoize = true;

  void validate() const;
};

struct AnnealStep {
  std::size_t iteration = 0;
  double temperature = 0.0;
  std::size_t toggled = 0;
  double proposed_value = 0.0;
  bool accepted = false;
  double current_value = 0.0;
  double best_value = 0.0;
};

struct AnnealResult {
  SubsetMask best;
  double best_value = 0.0;
  double initial_temperature = 0.0;
  std::vector<AnnealStep> trace;
  /// Distinct subsets whose objective was computed.
  std::size_t evaluations = 0;
  /// The proposal budget ran out before the chain froze.
  bool hit_cap = false;
};

/// Simulated annealing over nonempty subsets with single-point toggles.
/// Deterministic for a given seed; stops when two consecutive temperature
/// stages accept nothing, or at the iteration cap.
AnnealResult anneal_select(const SubsetEvaluator& evaluator, const AnnealConfig& config);

/// T0 default: interquartile range of L_n over `count` random nonempty subsets.
double default_initial_temperature(const SubsetEvaluator& evaluator, std::uint64_t seed,
                                   std::size_t count = 20);

/// m_{f,U}(y) for reporting.
struct FittedMixture {
  Kernel kernel;
  SupportSet support;
  MixingVector weights;

  double log_density(double y) const { return mixture_log_density(weights, support, kernel, y); }
};

struct RefitResult {
  FittedMixture mixture;
  PRTrace trace;
};

/// Final PR pass on the selected support, same data order and schedule as the selection.
RefitResult refit(const SubsetEvaluator& evaluator, const SubsetMask& selected);

}  // namespace prmix
