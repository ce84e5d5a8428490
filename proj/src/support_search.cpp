#include "prmix/support_search.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <unordered_map>

#include "prmix/errors.hpp"

namespace prmix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double parse_number(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ConfigError("cannot parse " + what + " '" + text + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

double quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

SubsetMask random_nonempty_subset(std::size_t size, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  SubsetMask mask(size);
  for (;;) {
    bool any = false;
    for (std::size_t i = 0; i < size; ++i) {
      mask[i] = coin(rng);
      any = any || mask[i];
    }
    if (any) return mask;
  }
}

}  // namespace

GridSpec GridSpec::equispaced(double lower, double upper, std::size_t count) {
  if (count < 2 || !(upper > lower)) {
    throw ConfigError("equispaced grid needs lower < upper and at least 2 points");
  }
  GridSpec g;
  g.lower = lower;
  g.upper = upper;
  g.points.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    g.points[k] = lower + (upper - lower) * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  g.points.back() = upper;
  return g;
}

GridSpec GridSpec::from_points(std::vector<double> points) {
  if (points.empty()) throw ConfigError("grid must contain at least one point");
  for (double p : points) {
    if (!std::isfinite(p)) throw ConfigError("grid points must be finite");
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  GridSpec g;
  g.lower = points.front();
  g.upper = points.back();
  g.points = std::move(points);
  return g;
}

GridSpec GridSpec::parse(const std::string& text, std::span<const double> include) {
  GridSpec g;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() == 2 && parts[1].find('#') != std::string::npos) {
      const auto tail = split(parts[1], '#');
      if (tail.size() != 2) throw ConfigError("grid '" + text + "' is not lower:upper#count");
      const double lower = parse_number(parts[0], "grid lower bound");
      const double upper = parse_number(tail[0], "grid upper bound");
      const double count = parse_number(tail[1], "grid point count");
      if (count < 2 || std::floor(count) != count) {
        throw ConfigError("grid point count must be an integer >= 2");
      }
      g = equispaced(lower, upper, static_cast<std::size_t>(count));
    } else if (parts.size() == 3) {
      const double lower = parse_number(parts[0], "grid lower bound");
      const double upper = parse_number(parts[1], "grid upper bound");
      const double step = parse_number(parts[2], "grid step");
      if (!(step > 0.0) || !(upper >= lower)) {
        throw ConfigError("grid '" + text + "' needs lower <= upper and step > 0");
      }
      const auto count = static_cast<std::size_t>(std::floor((upper - lower) / step + 1e-9)) + 1;
      if (count > 1'000'000) throw ConfigError("grid '" + text + "' has too many points");
      g.lower = lower;
      g.upper = upper;
      for (std::size_t k = 0; k < count; ++k) {
        g.points.push_back(lower + step * static_cast<double>(k));
      }
    } else {
      throw ConfigError("grid '" + text + "' is not lower:upper:step or lower:upper#count");
    }
  } else {
    std::vector<double> pts;
    for (const auto& p : split(text, ',')) pts.push_back(parse_number(p, "grid point"));
    g = from_points(std::move(pts));
  }
  if (!include.empty()) {
    std::vector<double> merged = g.points;
    merged.insert(merged.end(), include.begin(), include.end());
    const double lower = std::min(g.lower, *std::min_element(include.begin(), include.end()));
    const double upper = std::max(g.upper, *std::max_element(include.begin(), include.end()));
    g = from_points(std::move(merged));
    g.lower = lower;
    g.upper = upper;
  }
  if (g.points.empty()) throw ConfigError("grid must contain at least one point");
  return g;
}

SubsetMask mask_from_indices(std::size_t grid_size, std::span<const std::size_t> indices) {
  SubsetMask mask(grid_size, false);
  for (std::size_t i : indices) {
    if (i >= grid_size) throw DomainError("subset index outside the grid");
    mask[i] = true;
  }
  return mask;
}

std::vector<std::size_t> mask_indices(const SubsetMask& mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(i);
  }
  return out;
}

std::vector<double> mask_points(const SubsetMask& mask, std::span<const double> grid) {
  std::vector<double> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(grid[i]);
  }
  return out;
}

std::string mask_key(const SubsetMask& mask) {
  std::string key(mask.size(), '0');
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) key[i] = '1';
  }
  return key;
}

std::size_t support_distance(const SubsetMask& a, const SubsetMask& b) {
  if (a.size() != b.size()) throw DomainError("subsets of different grids");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i] ? 1 : 0;
  return d;
}

std::size_t support_distance(std::span<const double> a, std::span<const double> b) {
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  std::vector<double> diff;
  std::set_symmetric_difference(sa.begin(), sa.end(), sb.begin(), sb.end(),
                                std::back_inserter(diff));
  return diff.size();
}

SubsetEvaluator::SubsetEvaluator(std::span<const double> data, const Kernel& kernel,
                                 const GridSpec& grid, const WeightSchedule& schedule)
    : kernel_(kernel), grid_(grid), schedule_(schedule), data_(data.begin(), data.end()),
      table_(kernel, data, grid.points) {
  if (data.empty()) throw DataError("support selection needs at least one observation");
  if (grid.points.empty()) throw ConfigError("grid must contain at least one point");
}

double SubsetEvaluator::value(const SubsetMask& subset) const {
  if (subset.size() != grid_.size()) throw DomainError("subset mask does not match the grid");
  const auto cols = mask_indices(subset);
  if (cols.empty()) throw DomainError("subset must be nonempty");
  return pr_negative_log_predictive(table_, cols, schedule_);
}

SubsetObjective SubsetEvaluator::objective(const SubsetMask& subset, bool keep_trace) const {
  SubsetObjective out;
  out.subset = subset;
  if (!keep_trace) {
    out.value = value(subset);
    out.feasible = std::isfinite(out.value);
    return out;
  }
  const auto cols = mask_indices(subset);
  if (cols.empty()) throw DomainError("subset must be nonempty");
  try {
    auto trace = pr_run_table(table_, cols, schedule_, MixingVector::uniform(cols.size()));
    out.value = trace.negative_log_predictive();
    out.trace = std::move(trace);
  } catch (const NondegeneracyError&) {
    out.value = kInf;
    out.feasible = false;
  }
  return out;
}

SubsetObjective objective(std::span<const double> data, const Kernel& kernel,
                          std::span<const double> subset_points, const WeightSchedule& schedule) {
  const SubsetEvaluator ev(data, kernel,
                           GridSpec::from_points({subset_points.begin(), subset_points.end()}),
                           schedule);
  return ev.objective(SubsetMask(ev.grid_size(), true), true);
}

bool subset_before(const RankedSubset& a, const RankedSubset& b) {
  if (a.value != b.value) return a.value < b.value;
  if (a.size != b.size) return a.size < b.size;
  const auto ia = mask_indices(a.subset);
  const auto ib = mask_indices(b.subset);
  return std::lexicographical_compare(ia.begin(), ia.end(), ib.begin(), ib.end());
}

ExhaustiveResult exhaustive_select(const SubsetEvaluator& evaluator, Execution execution) {
  const std::size_t g = evaluator.grid_size();
  if (g > kExhaustiveMaxGrid) {
    throw ConfigError("exhaustive selection is limited to " + std::to_string(kExhaustiveMaxGrid) +
                      " grid points (got " + std::to_string(g) + "); use annealing instead");
  }
  const std::uint64_t count = (std::uint64_t{1} << g) - 1;
  std::vector<RankedSubset> ranking(count);
  auto fill = [&](std::uint64_t k) {
    const std::uint64_t bits = k + 1;
    RankedSubset r;
    r.subset.assign(g, false);
    for (std::size_t i = 0; i < g; ++i) {
      if ((bits >> i) & 1U) {
        r.subset[i] = true;
        ++r.size;
      }
    }
    r.value = evaluator.value(r.subset);
    ranking[k] = std::move(r);
  };
  const auto total = static_cast<long long>(count);
  if (execution == Execution::Parallel) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
    for (long long k = 0; k < total; ++k) {
      try {
        fill(static_cast<std::uint64_t>(k));
      } catch (...) {
#pragma omp critical
        failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (long long k = 0; k < total; ++k) fill(static_cast<std::uint64_t>(k));
  }
  std::sort(ranking.begin(), ranking.end(), subset_before);
  ExhaustiveResult out;
  out.best = ranking.front().subset;
  out.best_value = ranking.front().value;
  out.ranking = std::move(ranking);
  return out;
}

void AnnealConfig::validate() const {
  if (initial_temperature && !(*initial_temperature > 0.0)) {
    throw ConfigError("annealing initial temperature must be > 0");
  }
  if (!(cooling > 0.0 && cooling < 1.0)) throw ConfigError("annealing cooling ratio must be in (0,1)");
  if (steps_per_temperature == 0) throw ConfigError("annealing needs at least one step per temperature");
  if (iteration_cap == 0) throw ConfigError("annealing iteration cap must be positive");
}

double default_initial_temperature(const SubsetEvaluator& evaluator, std::uint64_t seed,
                                   std::size_t count) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<double> values;
  for (std::size_t i = 0; i < count; ++i) {
    const double v = evaluator.value(random_nonempty_subset(evaluator.grid_size(), rng));
    if (std::isfinite(v)) values.push_back(v);
  }
  if (values.size() < 2) return 1.0;
  const double iqr = quantile(values, 0.75) - quantile(values, 0.25);
  return iqr > 0.0 ? iqr : 1.0;
}

AnnealResult anneal_select(const SubsetEvaluator& evaluator, const AnnealConfig& config) {
  config.validate();
  const std::size_t g = evaluator.grid_size();
  SubsetMask current = config.initial.empty() ? SubsetMask(g, true) : config.initial;
  if (current.size() != g) throw ConfigError("initial subset does not match the grid");
  if (std::none_of(current.begin(), current.end(), [](bool b) { return b; })) {
    throw ConfigError("initial subset must be nonempty");
  }

  AnnealResult out;
  std::unordered_map<std::string, double> cache;
  auto evaluate = [&](const SubsetMask& mask) {
    if (config.memoize) {
      const auto key = mask_key(mask);
      if (auto it = cache.find(key); it != cache.end()) return it->second;
      const double v = evaluator.value(mask);
      cache.emplace(key, v);
      ++out.evaluations;
      return v;
    }
    ++out.evaluations;
    return evaluator.value(mask);
  };

  double temperature = config.initial_temperature
                           ? *config.initial_temperature
                           : default_initial_temperature(evaluator, config.seed);
  out.initial_temperature = temperature;
  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::size_t> pick(0, g - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  double current_value = evaluate(current);
  std::size_t current_size = static_cast<std::size_t>(std::count(current.begin(), current.end(), true));
  RankedSubset best{current, current_value, current_size};

  if (g == 1) {
    out.best = best.subset;
    out.best_value = best.value;
    return out;
  }

  std::size_t iteration = 0;
  std::size_t quiet_stages = 0;
  bool frozen = false;
  while (iteration < config.iteration_cap && !frozen) {
    std::size_t accepted_in_stage = 0;
    for (std::size_t step = 0; step < config.steps_per_temperature && iteration < config.iteration_cap;
         ++step, ++iteration) {
      std::size_t idx = pick(rng);
      while (current_size == 1 && current[idx]) idx = pick(rng);
      SubsetMask proposal = current;
      proposal[idx] = !proposal[idx];
      const double pv = evaluate(proposal);
      const double u = unit(rng);
      bool accept;
      if (!std::isfinite(pv)) {
        accept = false;
      } else if (!std::isfinite(current_value)) {
        accept = true;
      } else {
        const double delta = pv - current_value;
        accept = delta <= 0.0 || u < std::exp(-delta / temperature);
      }
      if (accept) {
        current = std::move(proposal);
        current_value = pv;
        current_size += current[idx] ? 1 : std::size_t(-1);
        ++accepted_in_stage;
        RankedSubset cand{current, current_value, current_size};
        if (subset_before(cand, best)) best = std::move(cand);
      }
      out.trace.push_back(AnnealStep{iteration, temperature, idx, pv, accept, current_value, best.value});
    }
    quiet_stages = accepted_in_stage == 0 ? quiet_stages + 1 : 0;
    frozen = quiet_stages >= 2;
    temperature *= config.cooling;
  }
  out.hit_cap = !frozen;
  out.best = best.subset;
  out.best_value = best.value;
  return out;
}

RefitResult refit(const SubsetEvaluator& evaluator, const SubsetMask& selected) {
  auto obj = evaluator.objective(selected, true);
  if (!obj.feasible || !obj.trace) {
    throw NumericalError("refit: selected support cannot explain the data");
  }
  const auto pts = mask_points(selected, evaluator.grid().points);
  RefitResult out{FittedMixture{evaluator.kernel(), SupportSet(pts), obj.trace->final},
                  std::move(*obj.trace)};
  return out;
}

}  // namespace prmix
