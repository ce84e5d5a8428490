#include "prmix/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "prmix/diagnostics.hpp"
#include "prmix/errors.hpp"
#include "prmix/io.hpp"
#include "prmix/plot.hpp"
#include "prmix/quadrature.hpp"

namespace prmix::cli {

using nlohmann::json;
namespace fs = std::filesystem;

int exit_code_for(const std::exception_ptr& error) noexcept {
  try {
    std::rethrow_exception(error);
  } catch (const ConfigError&) {
    return kConfig;
  } catch (const DomainError&) {
    // Parameters reach the domain types only after validation, so a domain
    // error here comes from a bad flag value.
    return kConfig;
  } catch (const DataError&) {
    return kData;
  } catch (const NumericalError&) {
    return kNumerical;
  } catch (...) {
    return kFailure;
  }
}

namespace {

std::vector<double> checked_observations(const Kernel& k, std::vector<double> data,
                                         const std::string& label) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    try {
      k.validate_observation(data[i]);
    } catch (const DomainError& e) {
      throw DataError(label + ": observation " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return data;
}

std::string points_text(std::span<const double> pts) {
  std::string s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ';';
    s += io::format_double(pts[i]);
  }
  return s;
}

void write_estimate_file(const fs::path& path, const SupportSet& support, const MixingVector& w) {
  std::ostringstream s;
  io::write_estimate(s, support, w);
  io::write_text(path, s.str());
}

std::vector<std::string> run_fit(const RunConfig& cfg, const io::OutputDirectory& out, std::ostream& log) {
  const Kernel k = cfg.make_kernel();
  const GridSpec grid = cfg.make_grid();
  const auto ds = load_dataset(cfg);
  const auto data = checked_observations(k, ds.observations, ds.label);
  const SupportSet support = grid.support();
  PermutationAveraging avg{cfg.permutations, cfg.seed, cfg.order == "file"};
  const MixingVector f = pr_run_averaged(data, k, support, cfg.make_schedule(),
                                         MixingVector::uniform(support.size()), avg);
  write_estimate_file(out.file("estimate.csv"), support, f);
  log << "fit: n = " << data.size() << ", grid = " << support.size() << " points, "
      << cfg.permutations << " ordering(s)\n";
  return {"estimate.csv"};
}

std::vector<std::string> run_select(const RunConfig& cfg, const io::OutputDirectory& out, std::ostream& log) {
  const Kernel k = cfg.make_kernel();
  const GridSpec grid = cfg.make_grid();
  const auto ds = load_dataset(cfg);
  const auto data = checked_observations(k, ordered_observations(cfg, ds), ds.label);
  const SubsetEvaluator ev(data, k, grid, cfg.make_schedule());

  std::vector<std::string> artifacts;
  json summary;
  summary["mode"] = cfg.mode;
  SubsetMask best;
  double best_value = 0.0;

  if (cfg.mode == "exhaustive") {
    const auto res = exhaustive_select(ev);
    best = res.best;
    best_value = res.best_value;
    std::ostringstream s;
    s << "rank,size,objective,points\n";
    for (std::size_t r = 0; r < res.ranking.size(); ++r) {
      const auto& row = res.ranking[r];
      s << r + 1 << ',' << row.size << ',' << io::format_double(row.value) << ','
        << points_text(mask_points(row.subset, grid.points)) << '\n';
    }
    io::write_text(out.file("subsets.csv"), s.str());
    artifacts.push_back("subsets.csv");
    summary["subsets_evaluated"] = res.ranking.size();
  } else {
    const auto res = anneal_select(ev, cfg.make_anneal());
    best = res.best;
    best_value = res.best_value;
    std::ostringstream s;
    s << "iteration,temperature,toggled,proposed,accepted,current,best\n";
    for (const auto& st : res.trace) {
      s << st.iteration << ',' << io::format_double(st.temperature) << ','
        << io::format_double(grid.points[st.toggled]) << ',' << io::format_double(st.proposed_value)
        << ',' << (st.accepted ? 1 : 0) << ',' << io::format_double(st.current_value) << ','
        << io::format_double(st.best_value) << '\n';
    }
    io::write_text(out.file("anneal_trace.csv"), s.str());
    artifacts.push_back("anneal_trace.csv");
    summary["initial_temperature"] = res.initial_temperature;
    summary["evaluations"] = res.evaluations;
    summary["hit_cap"] = res.hit_cap;
    if (res.hit_cap) {
      log << "warning: annealing stopped at the iteration cap (" << cfg.cap
          << ") before freezing; the result is the best subset seen so far\n";
    }
  }
  if (!std::isfinite(best_value)) {
    throw NumericalError("no subset of the grid gives a finite objective on this data");
  }
  const auto fitted = refit(ev, best);
  write_estimate_file(out.file("estimate.csv"), fitted.mixture.support, fitted.mixture.weights);
  artifacts.push_back("estimate.csv");

  const auto pts = mask_points(best, grid.points);
  summary["selected"] = pts;
  summary["size"] = pts.size();
  summary["objective"] = best_value;
  summary["weights"] = std::vector<double>(fitted.mixture.weights.weights().begin(),
                                           fitted.mixture.weights.weights().end());
  io::write_text(out.file("selection.json"), summary.dump(2) + "\n");
  artifacts.push_back("selection.json");
  log << "select (" << cfg.mode << "): " << pts.size() << " support points, L_n = " << best_value << '\n';
  for (std::size_t i = 0; i < pts.size(); ++i) {
    log << "  u = " << pts[i] << "  f = " << fitted.mixture.weights[i] << '\n';
  }
  return artifacts;
}

std::vector<std::string> run_bench(const RunConfig& cfg, const io::OutputDirectory& out, std::ostream& log) {
  const auto suite = bench::misspecified_scenario_suite();
  std::vector<bench::RateReport> reports;
  json skipped = json::array();
  for (const auto& name : cfg.scenarios) {
    bench::RateExperiment exp{bench::find_scenario(suite, name), cfg.gammas, cfg.checkpoints,
                              cfg.seeds, cfg.seed};
    try {
      reports.push_back(bench::rate_experiment(exp));
    } catch (const NumericalError& e) {
      log << "scenario " << name << " skipped: " << e.what() << '\n';
      skipped.push_back({{"scenario", name}, {"reason", e.what()}});
      continue;
    }
    const auto& rep = reports.back();
    log << "scenario " << name << (rep.asserted ? "" : " (report only)") << ", K* = " << rep.oracle.kstar << '\n';
    for (const auto& s : rep.summaries) {
      log << "  gamma " << s.gamma << ": slope f " << s.slope_f.slope << " (ref " << s.reference_f
          << "), L1 " << s.slope_l1.slope << ", KL " << s.slope_kl.slope << " (ref " << s.reference_kl
          << ")" << (rep.asserted ? (s.within_reference ? "  ok" : "  ABOVE REFERENCE") : "") << '\n';
    }
  }
  std::vector<bench::CellRow> cells;
  for (const auto& r : reports) cells.insert(cells.end(), r.cells.begin(), r.cells.end());
  std::ostringstream c, s;
  bench::write_cells_csv(c, cells);
  bench::write_summary_csv(s, reports);
  io::write_text(out.file("rate_cells.csv"), c.str());
  io::write_text(out.file("rate_summary.csv"), s.str());
  if (!skipped.empty()) io::write_text(out.file("skipped.json"), skipped.dump(2) + "\n");
  if (reports.empty()) throw NumericalError("every scenario was skipped");
  std::vector<std::string> artifacts{"rate_cells.csv", "rate_summary.csv"};
  if (!skipped.empty()) artifacts.push_back("skipped.json");
  return artifacts;
}

std::vector<std::string> run_diagnose(const RunConfig& cfg, const io::OutputDirectory& out, std::ostream& log) {
  const auto suite = bench::misspecified_scenario_suite();
  json all = json::array();
  for (const auto& name : cfg.scenarios) {
    auto d = scenario_diagnostics(bench::find_scenario(suite, name), cfg.gamma, cfg.n, cfg.seed);
    log << "scenario " << name << ": K* = " << d["kstar"].get<double>()
        << ", |phi(f*)|_inf = " << d["equilibrium_residual"].get<double>();
    if (d.contains("assumptions")) {
      log << ", assumptions " << (d["assumptions"]["all_passed"].get<bool>() ? "pass" : "FAIL");
    }
    log << '\n';
    all.push_back(std::move(d));
  }
  io::write_text(out.file("diagnostics.json"), all.dump(2) + "\n");
  return {"diagnostics.json"};
}

std::vector<std::string> run_simulate(const RunConfig& cfg, const io::OutputDirectory& out, std::ostream& log) {
  const Kernel k = cfg.make_kernel();
  const TrueModel model(k, SupportSet(cfg.support), MixingVector(cfg.weights, 1e-9));
  const auto draws = bench::simulate(model, cfg.n, cfg.seed);
  std::string text = "# simulated: " + k.name() + " mixture\n";
  for (double y : draws) text += io::format_double(y) + '\n';
  io::write_text(out.file("data.csv"), text);
  log << "simulate: " << draws.size() << " draws\n";
  return {"data.csv"};
}

std::vector<std::string> run_plot(const RunConfig& cfg, const io::OutputDirectory& out, std::ostream& log) {
  const fs::path in = cfg.input;
  if (!fs::is_directory(in)) throw DataError("plot input " + in.string() + " is not a directory");
  std::vector<std::string> artifacts;
  if (fs::exists(in / "rate_cells.csv")) {
    std::ifstream f(in / "rate_cells.csv");
    for (const auto& p : plot::rate_plots(plot::read_cells_csv(f), out.path())) {
      artifacts.push_back(p.filename().string());
    }
  }
  if (fs::exists(in / "estimate.csv")) {
    const auto est = io::read_estimate(in / "estimate.csv");
    io::write_text(out.file("mixing.svg"),
                   plot::stem_svg("mixing distribution estimate", est.support.points(), est.weights.weights()));
    artifacts.push_back("mixing.svg");
    if (fs::exists(in / "manifest.json")) {
      RunConfig src;
      src.apply_file(in / "manifest.json");
      if (!src.data.empty()) {
        const FittedMixture m{src.make_kernel(), est.support, est.weights};
        const auto ds = load_dataset(src);
        io::write_text(out.file("mixture.svg"),
                       plot::mixture_svg("mixture density estimate", m, ds.observations));
        artifacts.push_back("mixture.svg");
      }
    }
  }
  if (artifacts.empty()) {
    throw DataError("nothing to plot in " + in.string() + " (no rate_cells.csv or estimate.csv)");
  }
  log << "plot: " << artifacts.size() << " SVG file(s)\n";
  return artifacts;
}

}  // namespace

json scenario_diagnostics(const bench::Scenario& sc, double gamma, std::size_t n, std::uint64_t seed) {
  namespace dg = diagnostics;
  const ExpectationRule rule(sc.truth, sc.kernel, sc.fitted);
  const auto oracle = dg::kl_oracle_fstar(rule);
  const auto fstar = oracle.fstar.weights();
  json d;
  d["scenario"] = sc.name;
  d["description"] = sc.description;
  d["fitted_support"] = std::vector<double>(sc.fitted.points().begin(), sc.fitted.points().end());
  d["fstar"] = std::vector<double>(fstar.begin(), fstar.end());
  d["kstar"] = oracle.kstar;
  d["interior"] = oracle.interior;
  d["oracle_restart_spread"] = oracle.restart_spread;
  double resid = 0.0;
  for (double v : dg::phi_mean_map(rule, fstar)) resid = std::max(resid, std::abs(v));
  d["equilibrium_residual"] = resid;
  if (!oracle.interior) {
    d["note"] = "f* has zero coordinates: Jacobian, Markov-chain and assumption checks need an interior f*";
    return d;
  }
  d["gradient_identity"] = dg::lyapunov_gradient_identity_check(rule, fstar);
  const auto J = dg::jacobian(rule, oracle.fstar);
  const auto ev = J.eigenvalues();
  d["jacobian_eigenvalues"] = std::vector<double>(ev.data(), ev.data() + ev.size());
  d["factorization_error"] = J.factorization_error(dg::lyapunov_hessian_fd(rule, fstar));
  const auto mc = dg::markov_chain_from_jacobian(J);
  d["markov_chain"] = {{"min_entry", mc.min_entry},
                       {"row_sum_error", mc.row_sum_error},
                       {"stationarity_error", mc.stationarity_error},
                       {"detailed_balance_error", mc.detailed_balance_error},
                       {"ok", mc.ok()}};

  const WeightSchedule sched(gamma);
  const auto data = bench::simulate(sc.truth, n, seed);
  std::vector<std::size_t> every(n);
  std::iota(every.begin(), every.end(), std::size_t{0});
  dg::AssumptionInputs in{&rule, sched, J, oracle.fstar, oracle.kstar, data,
                          pr_run(data, sc.kernel, sc.fitted, sched,
                                 MixingVector::uniform(sc.fitted.size()), every)};
  in.seed = seed;
  const auto rep = dg::chen_assumption_suite(in);
  json checks = json::array();
  for (const auto& c : rep.checks) {
    checks.push_back({{"id", c.id}, {"name", c.name}, {"passed", c.passed}, {"value", c.value},
                      {"threshold", c.threshold}, {"detail", c.detail}});
  }
  d["assumptions"] = {{"gamma", rep.gamma}, {"epsilon", rep.epsilon}, {"delta", rep.delta},
                      {"all_passed", rep.all_passed()}, {"checks", checks}};
  return d;
}

std::vector<std::string> run(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  io::OutputDirectory out(cfg.out);
  std::vector<std::string> artifacts;
  if (cfg.command == "fit") artifacts = run_fit(cfg, out, log);
  else if (cfg.command == "select") artifacts = run_select(cfg, out, log);
  else if (cfg.command == "bench-rate") artifacts = run_bench(cfg, out, log);
  else if (cfg.command == "diagnose") artifacts = run_diagnose(cfg, out, log);
  else if (cfg.command == "simulate") artifacts = run_simulate(cfg, out, log);
  else artifacts = run_plot(cfg, out, log);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  io::write_text(out.file("manifest.json"), make_manifest(cfg, wall, artifacts).dump(2) + "\n");
  artifacts.push_back("manifest.json");
  return artifacts;
}

}  // namespace prmix::cli
