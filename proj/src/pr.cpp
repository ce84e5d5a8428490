#include "prmix/pr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "prmix/errors.hpp"

namespace prmix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// log(1e-300): predictive densities below this are treated as degenerate.
const double kLogPredictiveFloor = std::log(1e-300);

void check_gain(double w) {
  if (!(w > 0.0 && w < 1.0)) throw DomainError("PR gain must lie in (0, 1)");
}

// ratio[u] = p(y|u) / m_f(y) for every u with f(u) > 0 (0 elsewhere), given
// lp(u) = log p(y|u). Returns log m_f(y), or -inf when it vanishes.
// The ratio is formed as exp(lp - lmax) / scaled so that the large common
// offset lmax never passes through a rounding step.
double likelihood_ratios(std::span<const double> f, std::span<const double> lp,
                         std::span<double> ratio) {
  const std::size_t s = f.size();
  double lmax = kNegInf;
  for (std::size_t u = 0; u < s; ++u) {
    if (f[u] > 0.0) lmax = std::max(lmax, lp[u]);
  }
  std::fill(ratio.begin(), ratio.end(), 0.0);
  if (lmax == kNegInf) return kNegInf;

  double scaled = 0.0;
  for (std::size_t u = 0; u < s; ++u) {
    if (f[u] > 0.0) {
      ratio[u] = std::exp(lp[u] - lmax);
      scaled += f[u] * ratio[u];
    }
  }
  if (scaled > 1e-250) {
    for (std::size_t u = 0; u < s; ++u) ratio[u] /= scaled;
    return lmax + std::log(scaled);
  }
  // Mass at the best-fitting point is tiny; shift by log f + lp instead.
  double amax = kNegInf;
  for (std::size_t u = 0; u < s; ++u) {
    if (f[u] > 0.0) amax = std::max(amax, std::log(f[u]) + lp[u]);
  }
  double acc = 0.0;
  for (std::size_t u = 0; u < s; ++u) {
    if (f[u] > 0.0) acc += std::exp(std::log(f[u]) + lp[u] - amax);
  }
  const double log_m = amax + std::log(acc);
  for (std::size_t u = 0; u < s; ++u) {
    if (f[u] > 0.0) ratio[u] = std::exp(lp[u] - log_m);
  }
  return log_m;
}

// One PR update of `f` in place. Returns log m_f(y); leaves `f` untouched
// when the predictive density is zero. `ratio` is scratch space.
double update_in_place(std::span<double> f, std::span<const double> lp, double w,
                       std::span<double> ratio) {
  const double log_m = likelihood_ratios(f, lp, ratio);
  if (log_m == kNegInf) return log_m;
  double total = 0.0;
  for (std::size_t u = 0; u < f.size(); ++u) {
    f[u] = (1.0 - w) * f[u] + w * f[u] * ratio[u];
    total += f[u];
  }
  for (double& v : f) v /= total;
  return log_m;
}

std::vector<double> log_row(const Kernel& kernel, const SupportSet& support, double y) {
  kernel.validate_observation(y);
  std::vector<double> lp(support.size());
  for (std::size_t u = 0; u < support.size(); ++u) {
    lp[u] = kernel.log_density_unchecked(y, support[u]);
  }
  return lp;
}

void check_sizes(const MixingVector& f, const SupportSet& support) {
  if (f.size() != support.size()) {
    throw DomainError("mixing vector size " + std::to_string(f.size()) +
                      " does not match support size " + std::to_string(support.size()));
  }
}

}  // namespace

SupportSet::SupportSet(std::vector<double> points) : points_(std::move(points)) {
  if (points_.empty()) throw DomainError("support set must be nonempty");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) throw DomainError("support points must be finite");
    if (i > 0 && !(points_[i] > points_[i - 1])) {
      throw DomainError("support points must be strictly increasing");
    }
  }
}

void SupportSet::validate_for(const Kernel& kernel) const {
  for (double u : points_) kernel.validate_support_point(u);
}

MixingVector::MixingVector(std::vector<double> weights, double tolerance)
    : weights_(std::move(weights)) {
  if (weights_.empty()) throw DomainError("mixing vector must be nonempty");
  double total = 0.0;
  for (double v : weights_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("mixing weights must be >= 0");
    total += v;
  }
  if (std::abs(total - 1.0) > tolerance) {
    throw DomainError("mixing weights sum to " + std::to_string(total) + ", not 1");
  }
}

MixingVector MixingVector::uniform(std::size_t size) {
  if (size == 0) throw DomainError("mixing vector must be nonempty");
  return MixingVector(std::vector<double>(size, 1.0 / static_cast<double>(size)), 1e-9);
}

MixingVector MixingVector::point_mass(std::size_t size, std::size_t at) {
  if (at >= size) throw DomainError("point mass index out of range");
  std::vector<double> w(size, 0.0);
  w[at] = 1.0;
  return MixingVector(std::move(w));
}

bool MixingVector::interior(double threshold) const noexcept {
  return std::all_of(weights_.begin(), weights_.end(), [&](double v) { return v > threshold; });
}

WeightSchedule::WeightSchedule(double gamma) : gamma_(gamma) {
  if (!(gamma > 0.5 && gamma < 1.0)) {
    throw DomainError("weight exponent gamma must lie strictly inside (0.5, 1), got " +
                      std::to_string(gamma));
  }
}

double WeightSchedule::weight(std::size_t i) const noexcept {
  return std::pow(static_cast<double>(i) + 1.0, -gamma_);
}

LogLikelihoodTable::LogLikelihoodTable(const Kernel& kernel, std::span<const double> data,
                                       std::span<const double> grid)
    : rows_(data.size()), cols_(grid.size()), values_(data.size() * grid.size()),
      data_(data.begin(), data.end()) {
  for (double u : grid) kernel.validate_support_point(u);
  for (std::size_t i = 0; i < rows_; ++i) {
    kernel.validate_observation(data[i]);
    for (std::size_t j = 0; j < cols_; ++j) {
      values_[i * cols_ + j] = kernel.log_density_unchecked(data[i], grid[j]);
    }
  }
}

double PRTrace::negative_log_predictive() const noexcept {
  double acc = 0.0;
  for (double v : log_predictive) acc += v;
  return -acc;
}

double mixture_log_density(const MixingVector& f, const SupportSet& support, const Kernel& kernel,
                           double y) {
  check_sizes(f, support);
  const auto lp = log_row(kernel, support, y);
  double amax = kNegInf;
  for (std::size_t u = 0; u < f.size(); ++u) {
    if (f[u] > 0.0) amax = std::max(amax, std::log(f[u]) + lp[u]);
  }
  if (amax == kNegInf) return kNegInf;
  double acc = 0.0;
  for (std::size_t u = 0; u < f.size(); ++u) {
    if (f[u] > 0.0) acc += std::exp(std::log(f[u]) + lp[u] - amax);
  }
  return amax + std::log(acc);
}

MixingVector pr_step(const MixingVector& f, const SupportSet& support, const Kernel& kernel,
                     double y, double w) {
  check_sizes(f, support);
  check_gain(w);
  const auto lp = log_row(kernel, support, y);
  std::vector<double> next(f.weights().begin(), f.weights().end());
  std::vector<double> ratio(next.size());
  const double log_m = update_in_place(next, lp, w, ratio);
  if (!(log_m >= kLogPredictiveFloor)) throw NondegeneracyError(0, y, log_m);
  return MixingVector(std::move(next));
}

std::vector<double> pr_direction(const MixingVector& f, const SupportSet& support,
                                 const Kernel& kernel, double y) {
  check_sizes(f, support);
  const auto lp = log_row(kernel, support, y);
  std::vector<double> ratio(f.size());
  const double log_m = likelihood_ratios(f.weights(), lp, ratio);
  if (!(log_m >= kLogPredictiveFloor)) throw NondegeneracyError(0, y, log_m);
  std::vector<double> phi(f.size());
  for (std::size_t u = 0; u < f.size(); ++u) phi[u] = f[u] * (ratio[u] - 1.0);
  return phi;
}

MixingVector pr_step_increment(const MixingVector& f, const SupportSet& support,
                               const Kernel& kernel, double y, double w) {
  check_gain(w);
  const auto phi = pr_direction(f, support, kernel, y);
  std::vector<double> next(f.size());
  for (std::size_t u = 0; u < f.size(); ++u) next[u] = f[u] + w * phi[u];
  return MixingVector(std::move(next), 1e-10);
}

PRTrace pr_run_table(const LogLikelihoodTable& table, std::span<const std::size_t> columns,
                     const WeightSchedule& schedule, const MixingVector& f0,
                     std::span<const std::size_t> snapshot_indices) {
  const std::size_t n = table.observations();
  const std::size_t s = columns.size();
  if (n == 0) throw DataError("PR needs at least one observation");
  if (f0.size() != s) throw DomainError("initial mixing vector does not match the support");
  for (std::size_t c : columns) {
    if (c >= table.columns()) throw DomainError("support column out of range");
  }
  std::vector<std::size_t> snaps(snapshot_indices.begin(), snapshot_indices.end());
  std::sort(snaps.begin(), snaps.end());
  snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());
  if (!snaps.empty() && snaps.back() > n) throw DomainError("snapshot index beyond data length");

  PRTrace trace;
  trace.log_predictive.reserve(n);
  trace.snapshots.reserve(snaps.size());
  std::vector<double> f(f0.weights().begin(), f0.weights().end());
  std::vector<double> lp(s), ratio(s);
  auto next_snap = snaps.begin();
  auto take_snapshot = [&](std::size_t k) {
    if (next_snap != snaps.end() && *next_snap == k) {
      trace.snapshots.emplace_back(k, MixingVector(f, 1e-9));
      ++next_snap;
    }
  };
  take_snapshot(0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = table.row(i);
    for (std::size_t u = 0; u < s; ++u) lp[u] = row[columns[u]];
    const double log_m = update_in_place(f, lp, schedule.weight(i + 1), ratio);
    if (!(log_m >= kLogPredictiveFloor)) {
      throw NondegeneracyError(i + 1, table.observation(i), log_m);
    }
    trace.log_predictive.push_back(log_m);
    take_snapshot(i + 1);
  }
  trace.final = MixingVector(std::move(f), 1e-9);
  return trace;
}

double pr_negative_log_predictive(const LogLikelihoodTable& table,
                                  std::span<const std::size_t> columns,
                                  const WeightSchedule& schedule) {
  const std::size_t n = table.observations();
  const std::size_t s = columns.size();
  std::vector<double> f(s, 1.0 / static_cast<double>(s));
  std::vector<double> lp(s), ratio(s);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = table.row(i);
    for (std::size_t u = 0; u < s; ++u) lp[u] = row[columns[u]];
    const double log_m = update_in_place(f, lp, schedule.weight(i + 1), ratio);
    if (!(log_m >= kLogPredictiveFloor)) return std::numeric_limits<double>::infinity();
    acc += log_m;
  }
  return -acc;
}

PRTrace pr_run(std::span<const double> data, const Kernel& kernel, const SupportSet& support,
               const WeightSchedule& schedule, const MixingVector& f0,
               std::span<const std::size_t> snapshot_indices) {
  check_sizes(f0, support);
  const LogLikelihoodTable table(kernel, data, support.points());
  std::vector<std::size_t> columns(support.size());
  std::iota(columns.begin(), columns.end(), std::size_t{0});
  return pr_run_table(table, columns, schedule, f0, snapshot_indices);
}

MixingVector pr_run_averaged(std::span<const double> data, const Kernel& kernel,
                             const SupportSet& support, const WeightSchedule& schedule,
                             const MixingVector& f0, const PermutationAveraging& averaging,
                             Execution execution) {
  if (averaging.permutations == 0) throw DomainError("need at least one permutation");
  check_sizes(f0, support);
  if (data.empty()) throw DataError("PR needs at least one observation");

  // Orderings are drawn up front from one stream so the result does not
  // depend on how runs are scheduled.
  const std::size_t count = averaging.permutations;
  std::vector<std::vector<double>> orders(count, std::vector<double>(data.begin(), data.end()));
  std::mt19937_64 rng(averaging.seed);
  for (std::size_t k = 0; k < count; ++k) {
    if (k == 0 && averaging.file_order_first) continue;
    std::shuffle(orders[k].begin(), orders[k].end(), rng);
  }

  std::vector<MixingVector> finals(count);
  const long long total = static_cast<long long>(count);
  if (execution == Execution::Parallel) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (long long k = 0; k < total; ++k) {
      try {
        finals[k] = pr_run(orders[k], kernel, support, schedule, f0).final;
      } catch (...) {
#pragma omp critical
        failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (long long k = 0; k < total; ++k) {
      finals[k] = pr_run(orders[k], kernel, support, schedule, f0).final;
    }
  }

  std::vector<double> mean(support.size(), 0.0);
  for (const auto& f : finals) {
    for (std::size_t u = 0; u < mean.size(); ++u) mean[u] += f[u];
  }
  for (double& v : mean) v /= static_cast<double>(count);
  return MixingVector(std::move(mean), 1e-9);
}

}  // namespace prmix
