#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "prmix/execution.hpp"
#include "prmix/kernel.hpp"

namespace prmix {

/// Strictly increasing finite set of candidate component locations.
class SupportSet {
 public:
  SupportSet() = default;
  /// Throws DomainError unless `points` is nonempty, finite and strictly increasing.
  explicit SupportSet(std::vector<double> points);

  std::size_t size() const noexcept { return points_.size(); }
  double operator[](std::size_t i) const { return points_[i]; }
  std::span<const double> points() const noexcept { return points_; }

  void validate_for(const Kernel& kernel) const;

  bool operator==(const SupportSet&) const = default;

 private:
  std::vector<double> points_;
};

/// Probability vector over a SupportSet (indexed by position).
class MixingVector {
 public:
  static constexpr double kSimplexTolerance = 1e-12;

  MixingVector() = default;
  /// Throws DomainError unless entries are >= 0 and sum to 1 within `tolerance`.
  explicit MixingVector(std::vector<double> weights, double tolerance = kSimplexTolerance);

  static MixingVector uniform(std::size_t size);
  static MixingVector point_mass(std::size_t size, std::size_t at);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }
  bool interior(double threshold = 0.0) const noexcept;

  bool operator==(const MixingVector&) const = default;

 private:
  std::vector<double> weights_;
};

/// PR gains w_n = (n+1)^{-gamma} with gamma strictly inside (1/2, 1).
class WeightSchedule {
 public:
  static constexpr double kDefaultGamma = 0.9;

  explicit WeightSchedule(double gamma = kDefaultGamma);

  double gamma() const noexcept { return gamma_; }
  /// Gain used for the i-th observation, i >= 1.
  double weight(std::size_t i) const noexcept;

 private:
  double gamma_;
};

/// Row-major table of log p(y_i | u_j) for a data sequence against a grid.
/// Shared by every PR pass that uses (a subset of) the same grid.
class LogLikelihoodTable {
 public:
  LogLikelihoodTable(const Kernel& kernel, std::span<const double> data,
                     std::span<const double> grid);

  std::size_t observations() const noexcept { return rows_; }
  std::size_t columns() const noexcept { return cols_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * cols_, cols_};
  }
  double observation(std::size_t i) const noexcept { return data_[i]; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
  std::vector<double> data_;
};

/// Record of one PR pass.
struct PRTrace {
  /// log m_{i-1}(Y_i), i = 1..n, recorded before each update.
  std::vector<double> log_predictive;
  /// (k, f_k) for every requested k in [0, n]; k = 0 is f_0.
  std::vector<std::pair<std::size_t, MixingVector>> snapshots;
  MixingVector final;

  std::size_t length() const noexcept { return log_predictive.size(); }
  /// -sum_i log m_{i-1}(Y_i).
  double negative_log_predictive() const noexcept;
};

/// log sum_u p(y|u) f(u) via log-sum-exp; -inf when every term vanishes.
double mixture_log_density(const MixingVector& f, const SupportSet& support, const Kernel& kernel,
                           double y);

/// One PR update f' = (1-w) f + w p(y|.) f / m_f(y), renormalized.
/// Throws NondegeneracyError (step 0) when m_f(y) vanishes.
MixingVector pr_step(const MixingVector& f, const SupportSet& support, const Kernel& kernel,
                     double y, double w);

/// The same update written as f + w Phi(y, f) with Phi(y,f)(u) = f(u){p(y|u)/m_f(y) - 1};
/// not renormalized. Kept as an independent route for cross-checking pr_step.
MixingVector pr_step_increment(const MixingVector& f, const SupportSet& support,
                               const Kernel& kernel, double y, double w);

/// Phi(y, f) itself.
std::vector<double> pr_direction(const MixingVector& f, const SupportSet& support,
                                 const Kernel& kernel, double y);

/// Sequential PR pass over `data` in the given order with gains (i+1)^{-gamma}.
/// `snapshot_indices` selects which f_k are stored in the trace.
PRTrace pr_run(std::span<const double> data, const Kernel& kernel, const SupportSet& support,
               const WeightSchedule& schedule, const MixingVector& f0,
               std::span<const std::size_t> snapshot_indices = {});

/// PR pass over a precomputed table restricted to `columns` (indices into the
/// table's grid). `f0` is indexed like `columns`.
PRTrace pr_run_table(const LogLikelihoodTable& table, std::span<const std::size_t> columns,
                     const WeightSchedule& schedule, const MixingVector& f0,
                     std::span<const std::size_t> snapshot_indices = {});

/// Only the objective -sum log m_{i-1}(Y_i) of a table pass (no trace kept).
/// Returns +inf instead of throwing when the pass degenerates.
double pr_negative_log_predictive(const LogLikelihoodTable& table,
                                  std::span<const std::size_t> columns,
                                  const WeightSchedule& schedule);

struct PermutationAveraging {
  std::size_t permutations = 1;
  std::uint64_t seed = 0;
  /// When set, the first ordering is the data as given rather than a random one,
  /// so a single "permutation" reproduces pr_run.
  bool file_order_first = false;
};

/// Mean of final f_n over several orderings of the data.
MixingVector pr_run_averaged(std::span<const double> data, const Kernel& kernel,
                             const SupportSet& support, const WeightSchedule& schedule,
                             const MixingVector& f0, const PermutationAveraging& averaging,
                             Execution execution = Execution::Parallel);

}  // namespace prmix
