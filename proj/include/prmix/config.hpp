#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "prmix/bench.hpp"
#include "prmix/io.hpp"
#include "prmix/kernel.hpp"
#include "prmix/support_search.hpp"

namespace prmix {

/// Everything a CLI run needs. Filled from flags, then overridden key by key
/// from an optional JSON config file, then validated before any computation.
struct RunConfig {
  std::string command;

  // data
  std::string data;
  std::string format = "csv-values";
  std::string top_bin = "expand";
  /// "shuffled" (seeded) or "file".
  std::string order = "shuffled";

  // model
  std::string kernel = "gaussian";
  double sigma = 1.0;
  std::string grid;
  std::vector<double> include;
  double gamma = WeightSchedule::kDefaultGamma;
  std::uint64_t seed = 1;
  std::size_t permutations = 1;

  // select
  std::string mode = "anneal";
  std::optional<double> t0;
  double rho = 0.95;
  std::size_t steps = 50;
  std::size_t cap = 5000;

  // bench-rate / diagnose
  std::vector<std::string> scenarios{"a", "b", "c"};
  std::vector<double> gammas{0.6, 0.9};
  std::size_t seeds = 20;
  std::vector<std::size_t> checkpoints = bench::default_checkpoints();

  // simulate
  std::vector<double> support;
  std::vector<double> weights;
  std::size_t n = 1000;

  // plot
  std::string input;

  std::string out;

  nlohmann::json to_json() const;
  /// Overrides the fields present in `j`; unknown keys are a ConfigError.
  /// A run manifest is accepted too: its "config" member is used.
  void apply_json(const nlohmann::json& j);
  void apply_file(const std::filesystem::path& path);

  /// Checks the fields the command needs. Throws ConfigError.
  void validate() const;

  Kernel make_kernel() const;
  GridSpec make_grid() const;
  WeightSchedule make_schedule() const;
  AnnealConfig make_anneal() const;
};

/// Reads cfg.data: a file path, or "builtin:galaxies" / "builtin:defaults".
io::Dataset load_dataset(const RunConfig& cfg);

/// Applies cfg.order to a dataset: the file order, or a seeded shuffle.
std::vector<double> ordered_observations(const RunConfig& cfg, const io::Dataset& data);

/// Manifest for an output directory: resolved config, seed, version, wall time
/// and the artifacts written.
nlohmann::json make_manifest(const RunConfig& cfg, double wall_seconds,
                             const std::vector<std::string>& artifacts);

}  // namespace prmix
