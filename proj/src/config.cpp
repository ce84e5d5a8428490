#include "prmix/config.hpp"

#include <algorithm>
#include <set>

#include "prmix/datasets.hpp"
#include "prmix/errors.hpp"

namespace prmix {

using nlohmann::json;

namespace {

const std::set<std::string> kCommands{"fit", "select", "bench-rate", "diagnose", "simulate", "plot"};
constexpr const char* kBuiltinPrefix = "builtin:";

template <class T>
void take(const json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

json RunConfig::to_json() const {
  json j;
  j["command"] = command;
  j["data"] = data;
  j["format"] = format;
  j["top_bin"] = top_bin;
  j["order"] = order;
  j["kernel"] = kernel;
  j["sigma"] = sigma;
  j["grid"] = grid;
  j["include"] = include;
  j["gamma"] = gamma;
  j["seed"] = seed;
  j["permutations"] = permutations;
  j["mode"] = mode;
  j["t0"] = t0 ? json(*t0) : json(nullptr);
  j["rho"] = rho;
  j["steps"] = steps;
  j["cap"] = cap;
  j["scenarios"] = scenarios;
  j["gammas"] = gammas;
  j["seeds"] = seeds;
  j["checkpoints"] = checkpoints;
  j["support"] = support;
  j["weights"] = weights;
  j["n"] = n;
  j["input"] = input;
  j["out"] = out;
  return j;
}

void RunConfig::apply_json(const json& j_in) {
  if (!j_in.is_object()) throw ConfigError("config must be a JSON object");
  const json& j = j_in.contains("config") && j_in.at("config").is_object() ? j_in.at("config") : j_in;
  static const std::set<std::string> known{
      "command", "data",   "format",    "top_bin", "order",    "kernel",      "sigma",
      "grid",    "include", "gamma",    "seed",    "permutations", "mode",    "t0",
      "rho",     "steps",  "cap",       "scenarios", "gammas", "seeds",       "checkpoints",
      "support", "weights", "n",        "input",   "out"};
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  take(j, "command", command);
  take(j, "data", data);
  take(j, "format", format);
  take(j, "top_bin", top_bin);
  take(j, "order", order);
  take(j, "kernel", kernel);
  take(j, "sigma", sigma);
  take(j, "grid", grid);
  take(j, "include", include);
  take(j, "gamma", gamma);
  take(j, "seed", seed);
  take(j, "permutations", permutations);
  take(j, "mode", mode);
  if (j.contains("t0")) {
    if (j.at("t0").is_null()) {
      t0.reset();
    } else {
      double v = 0.0;
      take(j, "t0", v);
      t0 = v;
    }
  }
  take(j, "rho", rho);
  take(j, "steps", steps);
  take(j, "cap", cap);
  take(j, "scenarios", scenarios);
  take(j, "gammas", gammas);
  take(j, "seeds", seeds);
  take(j, "checkpoints", checkpoints);
  take(j, "support", support);
  take(j, "weights", weights);
  take(j, "n", n);
  take(j, "input", input);
  take(j, "out", out);
}

void RunConfig::apply_file(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const DataError&) {
    throw ConfigError("cannot read config file " + path.string());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  apply_json(j);
}

Kernel RunConfig::make_kernel() const {
  try {
    if (kernel == "gaussian") return Kernel::gaussian(sigma);
    if (kernel == "poisson") return Kernel::poisson();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("unknown kernel '" + kernel + "' (expected gaussian or poisson)");
}

GridSpec RunConfig::make_grid() const {
  if (grid.empty()) throw ConfigError("--grid is required");
  auto g = GridSpec::parse(grid, include);
  try {
    g.support().validate_for(make_kernel());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  return g;
}

WeightSchedule RunConfig::make_schedule() const {
  try {
    return WeightSchedule(gamma);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

AnnealConfig RunConfig::make_anneal() const {
  AnnealConfig a;
  a.initial_temperature = t0;
  a.cooling = rho;
  a.steps_per_temperature = steps;
  a.iteration_cap = cap;
  a.seed = seed;
  a.validate();
  return a;
}

void RunConfig::validate() const {
  if (!kCommands.count(command)) throw ConfigError("unknown command '" + command + "'");
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  const bool uses_data = command == "fit" || command == "select";
  if (uses_data) {
    need(!data.empty(), "--data is required");
    io::parse_data_format(format);
    datasets::parse_top_bin(top_bin);
    need(top_bin != "drop" || data == "builtin:defaults", "top_bin 'drop' only applies to builtin:defaults");
    need(order == "shuffled" || order == "file", "order must be 'shuffled' or 'file'");
    make_kernel();
    make_grid();
    make_schedule();
  }
  if (command == "fit") need(permutations >= 1, "--permutations must be at least 1");
  if (command == "select") {
    need(mode == "exhaustive" || mode == "anneal", "--mode must be exhaustive or anneal");
    if (mode == "exhaustive") {
      need(make_grid().size() <= kExhaustiveMaxGrid,
           "grid has more than " + std::to_string(kExhaustiveMaxGrid) +
               " points; exhaustive search is out of reach, use --mode anneal");
    } else {
      make_anneal();
    }
  }
  if (command == "bench-rate" || command == "diagnose") {
    need(!scenarios.empty(), "at least one scenario is required");
    const auto suite = bench::misspecified_scenario_suite();
    for (const auto& s : scenarios) bench::find_scenario(suite, s);
  }
  if (command == "bench-rate") {
    const auto suite = bench::misspecified_scenario_suite();
    bench::RateExperiment probe{bench::find_scenario(suite, scenarios.front()), gammas,
                                checkpoints, seeds, seed};
    try {
      probe.validate();
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  if (command == "diagnose") {
    make_schedule();
    need(seeds >= 1, "--seeds must be at least 1");
  }
  if (command == "simulate") {
    need(!support.empty(), "--support is required");
    need(support.size() == weights.size(), "--support and --weights differ in length");
    need(n >= 1, "--n must be at least 1");
    try {
      const auto k = make_kernel();
      SupportSet s(support);
      s.validate_for(k);
      MixingVector(weights, 1e-9);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  if (command == "plot") need(!input.empty(), "--input is required");
  need(!out.empty(), "--out is required");
}

io::Dataset load_dataset(const RunConfig& cfg) {
  const std::string_view d = cfg.data;
  if (d.starts_with(kBuiltinPrefix)) {
    const auto name = d.substr(std::string_view(kBuiltinPrefix).size());
    io::Dataset ds;
    ds.label = cfg.data;
    if (name == "galaxies") {
      ds.observations = datasets::galaxy_velocities();
    } else if (name == "defaults") {
      ds.observations = datasets::defaults_installments(datasets::parse_top_bin(cfg.top_bin));
    } else {
      throw ConfigError("unknown builtin dataset '" + std::string(name) +
                        "' (expected galaxies or defaults)");
    }
    return ds;
  }
  auto ds = io::ingest(cfg.data, io::parse_data_format(cfg.format));
  if (cfg.top_bin == "drop") {
    throw ConfigError("top_bin 'drop' only applies to builtin:defaults");
  }
  return ds;
}

std::vector<double> ordered_observations(const RunConfig& cfg, const io::Dataset& data) {
  if (cfg.order == "file") return data.observations;
  return io::seeded_order(data.observations, cfg.seed);
}

json make_manifest(const RunConfig& cfg, double wall_seconds,
                   const std::vector<std::string>& artifacts) {
  json m;
  m["tool"] = "prmix";
  m["version"] = io::version();
  m["seed"] = cfg.seed;
  m["wall_seconds"] = wall_seconds;
  m["config"] = cfg.to_json();
  m["artifacts"] = artifacts;
  return m;
}

}  // namespace prmix
