#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "generators.hpp"
#include "prmix/bench.hpp"
#include "prmix/diagnostics.hpp"
#include "prmix/errors.hpp"
#include "prmix/quadrature.hpp"

using namespace prmix;
namespace dg = prmix::diagnostics;

namespace {

const bench::Scenario& scenario(const char* name) {
  static const auto suite = bench::misspecified_scenario_suite();
  return bench::find_scenario(suite, name);
}

ExpectationRule rule_for(const bench::Scenario& sc) { return ExpectationRule(sc.truth, sc.kernel, sc.fitted); }

ExpectationRule poisson_15() {
  const auto k = Kernel::poisson();
  return ExpectationRule(TrueModel(k, SupportSet({1.0, 5.0}), MixingVector({0.5, 0.5})), k, SupportSet({1.0, 5.0}));
}

ExpectationRule gaussian_3() {
  const auto k = Kernel::gaussian(1.0);
  return ExpectationRule(TrueModel(k, SupportSet({0.0, 2.0, 4.0}), MixingVector({0.2, 0.5, 0.3})), k,
                         SupportSet({0.0, 2.0, 4.0}));
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  const auto gl = gauss_legendre(20);
  for (int d = 0; d <= 39; ++d) {
    double s = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) s += gl.weights[i] * std::pow(gl.nodes[i], d);
    const double exact = d % 2 ? 0.0 : 2.0 / (d + 1);
    CHECK(s == doctest::Approx(exact).epsilon(1e-14).scale(1.0));
  }
}

TEST_CASE("expectation rules carry the whole model mass") {
  for (const char* name : {"a", "b", "c"}) {
    const auto r = rule_for(scenario(name));
    CHECK(std::abs(r.total_mass() - 1.0) < 1e-12);
    for (double m : r.component_mass()) CHECK(std::abs(m - 1.0) < 1e-12);
  }
}

TEST_CASE("KL against an independent Simpson oracle") {
  const auto r = gaussian_3();
  const std::vector<double> f{0.6, 0.1, 0.3};
  auto m = [](double y, const std::vector<double>& w) {
    const double u[] = {0.0, 2.0, 4.0};
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += w[i] * std::exp(-0.5 * (y - u[i]) * (y - u[i])) / std::sqrt(2 * std::numbers::pi);
    return s;
  };
  const std::vector<double> truth{0.2, 0.5, 0.3};
  const int n = 40000;
  const double a = -14.0, b = 18.0, h = (b - a) / n;
  double kl = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double y = a + i * h;
    const double wgt = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double mt = m(y, truth);
    if (mt > 0) kl += wgt * mt * std::log(mt / m(y, f));
  }
  kl *= h / 3.0;
  CHECK(r.kl(f) == doctest::Approx(kl).epsilon(1e-10));
  CHECK(r.kl(truth) == doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
  CHECK(r.l1_distance(f, truth) == doctest::Approx(r.l1_distance(truth, f)).epsilon(1e-14));
  CHECK(r.l1_distance(f, f) == 0.0);
}

TEST_CASE("Lyapunov function values") {
  const auto r = poisson_15();
  // Truncated-sum oracle (30 digits): 0.339031353545127296...
  CHECK(dg::lyapunov(r, std::vector<double>{0.9, 0.1}, 0.0) == doctest::Approx(0.3390313535451273).epsilon(1e-12));
  CHECK(std::abs(dg::lyapunov(r, std::vector<double>{0.5, 0.5}, 0.0)) < 1e-12);
  // Off the simplex the Lagrange term shows up.
  CHECK(dg::lyapunov(r, std::vector<double>{1.0, 1.0}, 0.0) == doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("property: mean map sums to zero and vanishes at vertices and at the truth") {
  for (const char* name : {"a", "b"}) {
    const auto r = rule_for(scenario(name));
    gen::for_all(300, 2, [&](gen::Gen& g, std::size_t c) {
      CAPTURE(c);
      const auto f = g.simplex(r.components());
      const auto phi = dg::phi_mean_map(r, f);
      CHECK(std::abs(std::accumulate(phi.begin(), phi.end(), 0.0)) < 1e-10);
      auto vertex = std::vector<double>(r.components(), 0.0);
      vertex[g.index(r.components())] = 1.0;
      CHECK(max_abs(dg::phi_mean_map(r, vertex)) < 1e-10);
    });
  }
  CHECK(max_abs(dg::phi_mean_map(poisson_15(), std::vector<double>{0.5, 0.5})) < 1e-12);
}

TEST_CASE("property: gradient identity and analytic gradient") {
  const auto p = Kernel::poisson();
  const ExpectationRule pois(TrueModel(p, SupportSet({1.0, 5.0}), MixingVector({0.5, 0.5})), p, SupportSet({1.0, 3.0, 6.0}));
  const auto gauss = gaussian_3();
  for (const ExpectationRule* r : {&pois, &gauss}) {
    gen::for_all(50, 17, [&](gen::Gen& g, std::size_t c) {
      CAPTURE(c);
      const auto f = g.simplex(3, 0.02);
      CHECK(dg::lyapunov_gradient_identity_check(*r, f) < 1e-6);
      const auto ga = dg::lyapunov_gradient(*r, f);
      const auto gf = dg::lyapunov_gradient_fd(*r, f);
      for (std::size_t u = 0; u < 3; ++u) CHECK(std::abs(ga[u] - gf[u]) < 1e-6 * std::max(1.0, std::abs(ga[u])));
    });
  }
}

TEST_CASE("Lyapunov function is nonnegative and decreases along the mean flow") {
  for (const char* name : {"a", "b"}) {
    const auto& sc = scenario(name);
    const auto r = rule_for(sc);
    const auto o = dg::kl_oracle_fstar(r);
    CHECK(std::abs(dg::lyapunov(r, o.fstar.weights(), o.kstar)) < 1e-8);
    std::mt19937_64 rng(99);
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 10000; ++i) pts.push_back(dg::random_simplex_point(r.components(), rng));
    double min_l = INFINITY;
    for (const auto& f : pts) min_l = std::min(min_l, dg::lyapunov(r, f, o.kstar));
    CHECK(min_l >= -1e-12);

    const auto ser = dg::lyapunov_derivative_batch(r, pts, Execution::Serial);
    const auto par = dg::lyapunov_derivative_batch(r, pts, Execution::Parallel);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      CHECK(ser[i].inner_product <= 1e-10);
      CHECK(ser[i].inner_product == par[i].inner_product);
      CHECK(ser[i].inner_product == doctest::Approx(ser[i].closed_form).epsilon(1e-9).scale(1e-12));
    }
    CHECK(std::abs(dg::lyapunov_derivative(r, o.fstar.weights()).inner_product) < 1e-14);
  }
}

TEST_CASE("Jacobian examples") {
  const auto k = Kernel::poisson();
  const ExpectationRule one(TrueModel(k, SupportSet({2.0}), MixingVector({1.0})), k, SupportSet({2.0}));
  const auto j1 = dg::jacobian(one, MixingVector({1.0}));
  CHECK(j1.values(0, 0) == doctest::Approx(-1.0).epsilon(1e-13));
  const auto p1 = dg::markov_chain_from_jacobian(j1);
  CHECK(p1.transition(0, 0) == doctest::Approx(1.0).epsilon(1e-13));

  const auto r = poisson_15();
  const auto j = dg::jacobian(r, MixingVector({0.5, 0.5}));
  const auto ev = j.eigenvalues();
  CHECK(ev.maxCoeff() < 0.0);
  const auto gev = j.general_eigenvalues();
  std::vector<double> re;
  for (Eigen::Index i = 0; i < gev.size(); ++i) {
    CHECK(std::abs(gev[i].imag()) < 1e-12);
    re.push_back(gev[i].real());
  }
  std::sort(re.begin(), re.end());
  for (Eigen::Index i = 0; i < ev.size(); ++i) CHECK(re[i] == doctest::Approx(ev[i]).epsilon(1e-10));

  const auto mc = dg::markov_chain_from_jacobian(j);
  CHECK(mc.ok());
  const Eigen::RowVector2d pi(0.5, 0.5);
  CHECK(((pi * mc.transition) - pi).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(std::abs(mc.transition(0, 1) * 0.5 - mc.transition(1, 0) * 0.5) < 1e-12);
}

TEST_CASE("factorization against the finite-difference Hessian") {
  for (const char* name : {"a", "b"}) {
    const auto r = rule_for(scenario(name));
    const auto o = dg::kl_oracle_fstar(r);
    const auto j = dg::jacobian(r, o.fstar);
    CHECK(j.factorization_error(dg::lyapunov_hessian_fd(r, o.fstar.weights())) < 1e-7);
    CHECK(j.eigenvalues().maxCoeff() < -1e-6);
  }
}

TEST_CASE("KL oracle") {
  SUBCASE("well-specified: recovers the truth") {
    const auto o = dg::kl_oracle_fstar(rule_for(scenario("a")));
    CHECK(std::abs(o.kstar) < 1e-8);
    const double want[] = {0.3, 0.4, 0.3};
    for (int i = 0; i < 3; ++i) CHECK(std::abs(o.fstar[i] - want[i]) < 1e-8);
    CHECK(o.interior);
  }
  SUBCASE("misspecified: pinned values, restarts agree, first-order condition") {
    const auto r = rule_for(scenario("b"));
    const auto o = dg::kl_oracle_fstar(r);
    CHECK(o.kstar == doctest::Approx(0.00202199968301977).epsilon(1e-8));
    CHECK(o.kstar > 0.0);
    CHECK(o.fstar[0] == doctest::Approx(0.475965870625577).epsilon(1e-8));
    CHECK(o.fstar[1] == doctest::Approx(0.299266759090838).epsilon(1e-8));
    CHECK(o.restart_spread < 1e-8);
    CHECK(o.interior);
    CHECK(max_abs(dg::phi_mean_map(r, o.fstar.weights())) < 1e-8);
  }
  SUBCASE("boundary: zero coordinate reported") {
    const auto o = dg::kl_oracle_fstar(rule_for(scenario("c")));
    CHECK_FALSE(o.interior);
    CHECK(o.fstar[1] == 0.0);
    CHECK(std::abs(o.kstar) < 1e-8);
  }
}

TEST_CASE("Markov chain on scenario (a)") {
  const auto r = rule_for(scenario("a"));
  const auto o = dg::kl_oracle_fstar(r);
  const auto mc = dg::markov_chain_from_jacobian(dg::jacobian(r, o.fstar));
  CHECK(mc.nonnegative());
  CHECK(mc.row_stochastic());
  CHECK(mc.stationary());
  CHECK(mc.reversible());
}

namespace {

dg::AssumptionReport suite_for(const bench::Scenario& sc, double gamma, std::size_t n, std::uint64_t seed,
                               const TrueModel* data_model = nullptr) {
  const auto r = rule_for(sc);
  const auto o = dg::kl_oracle_fstar(r);
  const WeightSchedule sched(gamma);
  const auto data = bench::simulate(data_model ? *data_model : sc.truth, n, seed);
  std::vector<std::size_t> every(n);
  std::iota(every.begin(), every.end(), std::size_t{0});
  dg::AssumptionInputs in{&r, sched, dg::jacobian(r, o.fstar), o.fstar, o.kstar, data,
                          pr_run(data, sc.kernel, sc.fitted, sched, MixingVector::uniform(sc.fitted.size()), every)};
  in.seed = seed;
  return dg::chen_assumption_suite(in);
}

}  // namespace

TEST_CASE("assumption suite") {
  CHECK(dg::assumption_epsilon(0.9) == doctest::Approx(1.0 / 0.9 - 1.0 + 0.01));
  CHECK(dg::assumption_delta(0.9) == doctest::Approx((1.0 - dg::assumption_epsilon(0.9)) / 2.0));
  CHECK_THROWS_AS(WeightSchedule(0.5), DomainError);

  const auto rep = suite_for(scenario("a"), 0.9, 4000, 3);
  for (const auto& c : rep.checks) {
    CAPTURE(c.id);
    CHECK(c.passed);
  }
  CHECK(rep.passed("A1"));
  CHECK(rep.passed("A4"));
}

TEST_CASE("assumption suite negative controls") {
  // Data from a different model: Z_n are no longer centred under m.
  const auto& sc = scenario("a");
  const TrueModel shifted(sc.kernel, SupportSet({1.5, 3.0, 6.0}), MixingVector({0.8, 0.1, 0.1}));
  const auto rep = suite_for(sc, 0.9, 4000, 3, &shifted);
  CHECK_FALSE(rep.passed("A3"));

  // A Jacobian with a positive eigenvalue fails A4.
  const auto r = rule_for(sc);
  const auto o = dg::kl_oracle_fstar(r);
  auto j = dg::jacobian(r, o.fstar);
  j.values = -j.values;
  const auto data = bench::simulate(sc.truth, 500, 1);
  std::vector<std::size_t> every(500);
  std::iota(every.begin(), every.end(), std::size_t{0});
  dg::AssumptionInputs in{&r, WeightSchedule(0.9), j, o.fstar, o.kstar, data,
                          pr_run(data, sc.kernel, sc.fitted, WeightSchedule(0.9), MixingVector::uniform(3), every)};
  CHECK_FALSE(dg::chen_assumption_suite(in).passed("A4"));
}
