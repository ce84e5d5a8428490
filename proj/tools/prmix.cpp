// prmix: predictive recursion for finite mixtures.
#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "prmix/commands.hpp"
#include "prmix/config.hpp"

namespace {

struct Flags {
  prmix::RunConfig cfg;
  std::string config_file;
  double t0 = 0.0;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_file, "JSON config file; its keys override flags");
  sub->add_option("--out", f.cfg.out, "output directory");
  sub->add_option("--seed", f.cfg.seed, "random seed");
}

void add_model(CLI::App* sub, Flags& f) {
  auto& c = f.cfg;
  sub->add_option("--data", c.data, "data file, or builtin:galaxies / builtin:defaults");
  sub->add_option("--format", c.format, "csv-values or csv-frequency");
  sub->add_option("--top-bin", c.top_bin, "builtin:defaults censored bin: expand or drop");
  sub->add_option("--order", c.order, "data order for PR: shuffled (seeded) or file");
  sub->add_option("--kernel", c.kernel, "gaussian or poisson");
  sub->add_option("--sigma", c.sigma, "Gaussian kernel scale");
  sub->add_option("--grid", c.grid, "lo:hi:step, lo:hi#count or a,b,c");
  sub->add_option("--include", c.include, "points forced into the grid")->delimiter(',');
  sub->add_option("--gamma", c.gamma, "weight decay exponent in (0.5, 1)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive recursion for finite mixtures"};
  app.set_version_flag("--version", std::string(prmix::io::version()));
  app.require_subcommand(1);
  Flags f;
  auto& c = f.cfg;

  auto* fit = app.add_subcommand("fit", "PR estimate of the mixing distribution on a grid");
  add_common(fit, f);
  add_model(fit, f);
  fit->add_option("--permutations", c.permutations, "average over this many data orderings");

  auto* select = app.add_subcommand("select", "choose the support by minimizing the PR objective");
  add_common(select, f);
  add_model(select, f);
  select->add_option("--mode", c.mode, "exhaustive or anneal");
  auto* t0 = select->add_option("--t0", f.t0, "initial annealing temperature");
  select->add_option("--rho", c.rho, "cooling ratio");
  select->add_option("--steps", c.steps, "proposals per temperature");
  select->add_option("--cap", c.cap, "total proposal budget");

  auto* bench = app.add_subcommand("bench-rate", "convergence-rate experiment on the standard scenarios");
  add_common(bench, f);
  bench->add_option("--scenario", c.scenarios, "a, b and/or c")->delimiter(',');
  bench->add_option("--gammas", c.gammas, "gamma values")->delimiter(',');
  bench->add_option("--seeds", c.seeds, "replications per gamma");
  bench->add_option("--checkpoints", c.checkpoints, "sample sizes")->delimiter(',');

  auto* diag = app.add_subcommand("diagnose", "oracle, Jacobian and stability checks on the scenarios");
  add_common(diag, f);
  diag->add_option("--scenario", c.scenarios, "a, b and/or c")->delimiter(',');
  diag->add_option("--gamma", c.gamma, "weight decay exponent in (0.5, 1)");
  diag->add_option("--n", c.n, "length of the simulated PR path for the noise checks");

  auto* sim = app.add_subcommand("simulate", "draw data from a finite mixture");
  add_common(sim, f);
  sim->add_option("--kernel", c.kernel, "gaussian or poisson");
  sim->add_option("--sigma", c.sigma, "Gaussian kernel scale");
  sim->add_option("--support", c.support, "support points")->delimiter(',');
  sim->add_option("--weights", c.weights, "mixing weights")->delimiter(',');
  sim->add_option("--n", c.n, "sample size");

  auto* plot = app.add_subcommand("plot", "SVG plots from a bench-rate, fit or select output directory");
  add_common(plot, f);
  plot->add_option("--input", c.input, "directory written by another subcommand");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : prmix::cli::kConfig;
  }

  try {
    c.command = app.get_subcommands().front()->get_name();
    if (*t0) c.t0 = f.t0;
    if (!f.config_file.empty()) c.apply_file(f.config_file);
    prmix::cli::run(c, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return prmix::cli::exit_code_for(std::current_exception());
  }
  return prmix::cli::kOk;
}
