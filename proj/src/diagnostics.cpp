#include "prmix/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <sstream>

#include "prmix/errors.hpp"

namespace prmix::diagnostics {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Coordinates below this are candidates for the boundary face in the oracle.
constexpr double kFaceThreshold = 1e-4;

double sup_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double euclid(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

void require_size(const ExpectationRule& rule, std::span<const double> f) {
  if (f.size() != rule.components()) {
    throw DomainError("vector does not match the fitted support");
  }
}

AssumptionCheck make_check(std::string id, std::string name, bool passed, double value,
                           double threshold, std::string detail = {}) {
  return AssumptionCheck{std::move(id), std::move(name), passed, value, threshold,
                         std::move(detail)};
}

// 1/w_{n+1} - 1/w_n = (n+1)^g {(1 + 1/(n+1))^g - 1}, without cancellation.
double gain_increment(double gamma, double n) {
  return std::pow(n + 1.0, gamma) * std::expm1(gamma * std::log1p(1.0 / (n + 1.0)));
}

}  // namespace

std::vector<double> random_simplex_point(std::size_t size, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> v(size);
  double total = 0.0;
  for (double& x : v) {
    x = expo(rng);
    total += x;
  }
  for (double& x : v) x /= total;
  return v;
}

std::vector<double> phi_mean_map(const ExpectationRule& rule, std::span<const double> f) {
  require_size(rule, f);
  auto r = rule.ratio_integrals(f);
  for (std::size_t u = 0; u < r.size(); ++u) r[u] = f[u] * (r[u] - 1.0);
  return r;
}

double lyapunov(const ExpectationRule& rule, std::span<const double> f, double kstar) {
  require_size(rule, f);
  const double mass = std::accumulate(f.begin(), f.end(), 0.0);
  return rule.kl(f) - kstar + mass - 1.0;
}

std::vector<double> lyapunov_gradient(const ExpectationRule& rule, std::span<const double> f) {
  require_size(rule, f);
  auto r = rule.ratio_integrals(f);
  for (double& v : r) v = 1.0 - v;
  return r;
}

double lyapunov_difference(const ExpectationRule& rule, std::span<const double> f,
                           std::span<const double> delta) {
  require_size(rule, f);
  require_size(rule, delta);
  const auto log_mf = rule.log_mixture(f);
  const std::size_t s = f.size();
  double acc = 0.0;
  for (std::size_t j = 0; j < rule.nodes(); ++j) {
    const double q = rule.model_weight(j);
    if (q == 0.0) continue;
    double rel = 0.0;
    for (std::size_t u = 0; u < s; ++u) {
      if (delta[u] != 0.0) rel += delta[u] * std::exp(rule.log_kernel(j, u) - log_mf[j]);
    }
    acc -= q * std::log1p(rel);
  }
  return acc + std::accumulate(delta.begin(), delta.end(), 0.0);
}

std::vector<double> lyapunov_gradient_fd(const ExpectationRule& rule, std::span<const double> f,
                                         double step) {
  const std::size_t s = f.size();
  std::vector<double> grad(s);
  std::vector<double> delta(s, 0.0);
  for (std::size_t u = 0; u < s; ++u) {
    delta[u] = step;
    const double up = lyapunov_difference(rule, f, delta);
    delta[u] = -step;
    const double down = lyapunov_difference(rule, f, delta);
    delta[u] = 0.0;
    grad[u] = (up - down) / (2.0 * step);
  }
  return grad;
}

Eigen::MatrixXd lyapunov_hessian_fd(const ExpectationRule& rule, std::span<const double> f,
                                    double step) {
  const std::size_t s = f.size();
  auto nested = [&](double h) {
    Eigen::MatrixXd hess(s, s);
    std::vector<double> delta(s, 0.0);
    auto at = [&](std::size_t u, double a, std::size_t v, double b) {
      std::fill(delta.begin(), delta.end(), 0.0);
      delta[u] += a;
      delta[v] += b;
      return lyapunov_difference(rule, f, delta);
    };
    for (std::size_t u = 0; u < s; ++u) {
      for (std::size_t v = u; v < s; ++v) {
        const double val =
            (at(u, h, v, h) - at(u, h, v, -h) - at(u, -h, v, h) + at(u, -h, v, -h)) / (4.0 * h * h);
        hess(u, v) = val;
        hess(v, u) = val;
      }
    }
    return hess;
  };
  return (4.0 * nested(step) - nested(2.0 * step)) / 3.0;
}

double lyapunov_gradient_identity_check(const ExpectationRule& rule, std::span<const double> f,
                                        double step) {
  if (!std::all_of(f.begin(), f.end(), [](double v) { return v > 0.0; })) {
    throw DomainError("gradient identity check needs a strictly interior point");
  }
  const auto phi = phi_mean_map(rule, f);
  const auto grad = lyapunov_gradient_fd(rule, f, step);
  double worst = 0.0;
  for (std::size_t u = 0; u < f.size(); ++u) {
    worst = std::max(worst, std::abs(phi[u] + f[u] * grad[u]));
  }
  return worst;
}

DescentValue lyapunov_derivative(const ExpectationRule& rule, std::span<const double> f) {
  const auto phi = phi_mean_map(rule, f);
  const auto grad = lyapunov_gradient(rule, f);
  DescentValue out{0.0, 0.0};
  for (std::size_t u = 0; u < f.size(); ++u) {
    out.inner_product += grad[u] * phi[u];
    out.closed_form -= f[u] * grad[u] * grad[u];
  }
  return out;
}

std::vector<DescentValue> lyapunov_derivative_batch(const ExpectationRule& rule,
                                                    const std::vector<std::vector<double>>& points,
                                                    Execution execution) {
  std::vector<DescentValue> out(points.size());
  const auto count = static_cast<long long>(points.size());
  if (execution == Execution::Parallel) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < count; ++i) {
      try {
        out[i] = lyapunov_derivative(rule, points[i]);
      } catch (...) {
#pragma omp critical
        failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (long long i = 0; i < count; ++i) out[i] = lyapunov_derivative(rule, points[i]);
  }
  return out;
}

Eigen::VectorXd JacobianMatrix::eigenvalues() const {
  const auto s = static_cast<Eigen::Index>(fstar.size());
  Eigen::VectorXd root(s);
  for (Eigen::Index i = 0; i < s; ++i) root(i) = std::sqrt(fstar[i]);
  const Eigen::MatrixXd sym = -(root.asDiagonal() * hessian * root.asDiagonal());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

Eigen::VectorXcd JacobianMatrix::general_eigenvalues() const {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(values, false);
  return solver.eigenvalues();
}

double JacobianMatrix::factorization_error(const Eigen::MatrixXd& other_hessian) const {
  const auto s = static_cast<Eigen::Index>(fstar.size());
  Eigen::VectorXd d(s);
  for (Eigen::Index i = 0; i < s; ++i) d(i) = fstar[i];
  return (values + d.asDiagonal() * other_hessian).cwiseAbs().maxCoeff();
}

JacobianMatrix jacobian(const ExpectationRule& rule, const MixingVector& fstar) {
  require_size(rule, fstar.weights());
  const std::size_t s = fstar.size();
  const auto h = rule.second_moment(fstar.weights());
  JacobianMatrix jac;
  jac.fstar.assign(fstar.weights().begin(), fstar.weights().end());
  jac.hessian.resize(s, s);
  jac.values.resize(s, s);
  for (std::size_t u = 0; u < s; ++u) {
    for (std::size_t v = 0; v < s; ++v) {
      jac.hessian(u, v) = h[u * s + v];
      jac.values(u, v) = -fstar[u] * h[u * s + v];
    }
  }
  return jac;
}

MarkovChainReport markov_chain_from_jacobian(const JacobianMatrix& jac, double tolerance) {
  MarkovChainReport rep;
  rep.tolerance = tolerance;
  rep.transition = -jac.values.transpose();
  const auto& p = rep.transition;
  const Eigen::Index s = p.rows();
  rep.min_entry = p.minCoeff();
  rep.row_sum_error = (p.rowwise().sum().array() - 1.0).abs().maxCoeff();
  Eigen::RowVectorXd pi(s);
  for (Eigen::Index i = 0; i < s; ++i) pi(i) = jac.fstar[i];
  rep.stationarity_error = (pi * p - pi).cwiseAbs().maxCoeff();
  double db = 0.0;
  for (Eigen::Index u = 0; u < s; ++u) {
    for (Eigen::Index v = 0; v < s; ++v) {
      db = std::max(db, std::abs(pi(u) * p(u, v) - pi(v) * p(v, u)));
    }
  }
  rep.detailed_balance_error = db;
  return rep;
}

OracleResult kl_oracle_fstar(const ExpectationRule& rule, const OracleOptions& options) {
  const std::size_t s = rule.components();
  std::mt19937_64 rng(options.seed);

  auto solve_from = [&](std::vector<double> f, std::size_t& iterations) {
    for (iterations = 0; iterations < options.max_iterations; ++iterations) {
      const auto r = rule.ratio_integrals(f);
      std::vector<double> step(s);
      for (std::size_t u = 0; u < s; ++u) step[u] = f[u] * (r[u] - 1.0);
      const double size = sup_norm(step);
      if (size < options.tolerance) return f;

      // Close to the fixed point, try a Newton step on F(f) = f (R(f) - 1)
      // restricted to the coordinates still carrying mass; fall back to the
      // multiplicative update whenever it does not help.
      if (size < 1e-4) {
        std::vector<std::size_t> active;
        for (std::size_t u = 0; u < s; ++u) {
          if (f[u] > 0.0) active.push_back(u);
        }
        const auto a = static_cast<Eigen::Index>(active.size());
        const auto h = rule.second_moment(f);
        Eigen::MatrixXd jf(a, a);
        Eigen::VectorXd rhs(a);
        for (Eigen::Index i = 0; i < a; ++i) {
          const std::size_t u = active[i];
          rhs(i) = -step[u];
          for (Eigen::Index k = 0; k < a; ++k) {
            const std::size_t v = active[k];
            jf(i, k) = -f[u] * h[u * s + v] + (u == v ? r[u] - 1.0 : 0.0);
          }
        }
        const Eigen::VectorXd delta = jf.fullPivLu().solve(rhs);
        std::vector<double> cand = f;
        bool valid = delta.allFinite();
        for (Eigen::Index i = 0; i < a && valid; ++i) {
          cand[active[i]] = f[active[i]] + delta(i);
          valid = cand[active[i]] > 0.0;
        }
        if (valid) {
          const double total = std::accumulate(cand.begin(), cand.end(), 0.0);
          for (double& v : cand) v /= total;
          const auto rc = rule.ratio_integrals(cand);
          double cand_size = 0.0;
          for (std::size_t u = 0; u < s; ++u) {
            cand_size = std::max(cand_size, std::abs(cand[u] * (rc[u] - 1.0)));
          }
          if (cand_size < size) {
            f = std::move(cand);
            continue;
          }
        }
      }
      double total = 0.0;
      for (std::size_t u = 0; u < s; ++u) {
        f[u] *= r[u];
        total += f[u];
      }
      for (double& v : f) v /= total;
    }
    throw NumericalError("KL oracle did not converge within " +
                         std::to_string(options.max_iterations) + " iterations");
  };

  OracleResult out;
  std::vector<std::vector<double>> limits;
  double best_kl = std::numeric_limits<double>::infinity();
  std::size_t best = 0;
  const std::size_t starts = std::max<std::size_t>(1, options.restarts);
  for (std::size_t k = 0; k < starts; ++k) {
    std::vector<double> start =
        k == 0 ? std::vector<double>(s, 1.0 / static_cast<double>(s)) : random_simplex_point(s, rng);
    std::size_t iterations = 0;
    auto limit = solve_from(std::move(start), iterations);
    out.max_iterations_used = std::max(out.max_iterations_used, iterations);

    // When the minimizer sits on a face where R(u) = 1 for the vanishing
    // coordinates, the iteration only creeps toward zero. Try the face
    // spanned by the clearly positive coordinates and keep it if it is no
    // worse and satisfies the KKT condition R(u) <= 1 off the face.
    std::vector<double> face = limit;
    bool dropped = false;
    for (double& v : face) {
      if (v > 0.0 && v < kFaceThreshold) {
        v = 0.0;
        dropped = true;
      }
    }
    if (dropped) {
      const double total = std::accumulate(face.begin(), face.end(), 0.0);
      for (double& v : face) v /= total;
      std::size_t face_iterations = 0;
      face = solve_from(std::move(face), face_iterations);
      const auto r = rule.ratio_integrals(face);
      bool kkt = true;
      for (std::size_t u = 0; u < s; ++u) {
        if (face[u] == 0.0) kkt = kkt && r[u] <= 1.0 + 1e-9;
      }
      if (kkt && rule.kl(face) <= rule.kl(limit) + 1e-12) limit = std::move(face);
    }
    const double kl = rule.kl(limit);
    if (kl < best_kl) {
      best_kl = kl;
      best = limits.size();
    }
    limits.push_back(std::move(limit));
  }
  for (const auto& lim : limits) {
    double d = 0.0;
    for (std::size_t u = 0; u < s; ++u) d = std::max(d, std::abs(lim[u] - limits[best][u]));
    out.restart_spread = std::max(out.restart_spread, d);
  }
  out.fstar = MixingVector(limits[best], 1e-9);
  out.kstar = best_kl;
  out.interior = out.fstar.interior(options.interior_threshold);
  return out;
}

double assumption_epsilon(double gamma) noexcept { return 1.0 / gamma - 1.0 + 0.01; }

double assumption_delta(double gamma) noexcept { return 0.5 * (1.0 - assumption_epsilon(gamma)); }

bool AssumptionReport::all_passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

bool AssumptionReport::passed(const std::string& id) const noexcept {
  bool any = false;
  for (const auto& c : checks) {
    if (c.id != id) continue;
    any = true;
    if (!c.passed) return false;
  }
  return any;
}

AssumptionReport chen_assumption_suite(const AssumptionInputs& in) {
  if (in.rule == nullptr) throw DomainError("assumption suite needs an expectation rule");
  const ExpectationRule& rule = *in.rule;
  const double gamma = in.schedule.gamma();
  AssumptionReport rep;
  rep.gamma = gamma;
  rep.epsilon = assumption_epsilon(gamma);
  rep.delta = assumption_delta(gamma);
  const std::size_t s = rule.components();

  // A1: gains.
  {
    bool positive = true;
    bool nonincreasing = true;
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t n = 1; n <= 1'000'000; ++n) {
      const double w = in.schedule.weight(n);
      positive = positive && w > 0.0 && w < 1.0;
      nonincreasing = nonincreasing && w <= prev;
      prev = w;
    }
    rep.checks.push_back(make_check("A1", "gains in (0,1)", positive, prev, 0.0));
    const double far = std::pow(1e12 + 1.0, -gamma);
    rep.checks.push_back(make_check("A1", "gains vanish", nonincreasing && far < 1e-6, far, 1e-6,
                                    "w_n nonincreasing on n <= 1e6; value is w at n = 1e12"));

    // Cauchy condensation: sum w_n diverges iff sum 2^k w_{2^k} does, and
    // sum w_n^{1+eps} converges iff its condensed terms shrink geometrically.
    double min_growth = std::numeric_limits<double>::infinity();
    double max_ratio = 0.0;
    for (int k = 0; k < 60; ++k) {
      const double n0 = std::ldexp(1.0, k);
      const double n1 = std::ldexp(1.0, k + 1);
      const double c0 = n0 * std::pow(n0 + 1.0, -gamma);
      const double c1 = n1 * std::pow(n1 + 1.0, -gamma);
      min_growth = std::min(min_growth, c1 / c0);
      const double d0 = n0 * std::pow(n0 + 1.0, -gamma * (1.0 + rep.epsilon));
      const double d1 = n1 * std::pow(n1 + 1.0, -gamma * (1.0 + rep.epsilon));
      if (k >= 10) max_ratio = std::max(max_ratio, d1 / d0);
    }
    rep.checks.push_back(make_check("A1", "sum of gains diverges", min_growth >= 1.0, min_growth,
                                    1.0, "min ratio of condensed terms 2^k w_{2^k}"));
    rep.checks.push_back(make_check("A1", "sum of w^(1+eps) converges", max_ratio < 1.0, max_ratio,
                                    1.0, "max ratio of condensed terms (k >= 10)"));

    std::vector<double> lx, ly;
    bool decreasing = true;
    double last = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 15; ++k) {
      const double n = std::pow(10.0, k);
      const double d = gain_increment(gamma, n);
      decreasing = decreasing && d < last;
      last = d;
      lx.push_back(std::log(n));
      ly.push_back(std::log(d));
    }
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(lx.size());
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(ly.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    const double slope = sxy / sxx;
    rep.checks.push_back(make_check("A1", "1/w_{n+1} - 1/w_n -> alpha = 0",
                                    decreasing && slope < -1e-3, slope, 0.0,
                                    "log-log slope of the increment over n = 10..1e15"));
  }

  // A2: Lyapunov function properties on sampled points.
  {
    std::mt19937_64 rng(in.seed);
    const auto fstar = in.fstar.weights();
    const double at_star = lyapunov(rule, fstar, in.kstar);
    double min_l = std::numeric_limits<double>::infinity();
    double min_far = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> samples;
    samples.reserve(in.lyapunov_samples);
    for (std::size_t i = 0; i < in.lyapunov_samples; ++i) {
      auto f = random_simplex_point(s, rng);
      const double l = lyapunov(rule, f, in.kstar);
      min_l = std::min(min_l, l);
      double dist = 0.0;
      for (std::size_t u = 0; u < s; ++u) dist = std::max(dist, std::abs(f[u] - fstar[u]));
      if (dist > 0.05) min_far = std::min(min_far, l);
      samples.push_back(std::move(f));
    }
    double grad_gap = 0.0;
    for (std::size_t i = 0; i < 50; ++i) {
      auto dir = random_simplex_point(s, rng);
      std::vector<double> f(s);
      for (std::size_t u = 0; u < s; ++u) f[u] = 0.95 * fstar[u] + 0.05 * dir[u];
      const auto ga = lyapunov_gradient(rule, f);
      const auto gf = lyapunov_gradient_fd(rule, f);
      for (std::size_t u = 0; u < s; ++u) grad_gap = std::max(grad_gap, std::abs(ga[u] - gf[u]));
    }
    rep.checks.push_back(make_check("A2", "(i) differentiable near f*", grad_gap < 1e-6, grad_gap,
                                    1e-6, "max |analytic - finite-difference gradient|"));
    rep.checks.push_back(make_check("A2", "(ii) l(f*) = 0", std::abs(at_star) < 1e-10, at_star,
                                    1e-10));
    rep.checks.push_back(make_check("A2", "(ii) l >= 0 on samples", min_l >= -1e-12, min_l, -1e-12));
    rep.checks.push_back(make_check("A2", "(ii) l > 0 away from f*", min_far > 1e-12, min_far,
                                    1e-12, "min over samples with |f - f*|_inf > 0.05"));
    const auto descent = lyapunov_derivative_batch(rule, samples);
    double max_dot = kNegInf;
    for (const auto& d : descent) max_dot = std::max(max_dot, d.inner_product);
    rep.checks.push_back(make_check("A2", "(iii) dl/dt <= 0", max_dot <= 1e-10, max_dot, 1e-10));
  }

  // A3: realized martingale differences Z_n = Phi(Y_n, f_{n-1}) - phi(f_{n-1}).
  {
    const std::size_t n = std::min(in.data.size(), in.trace.length());
    if (in.trace.snapshots.size() < n) {
      throw DomainError("assumption suite needs a snapshot at every index 0..n-1");
    }
    std::vector<std::vector<double>> z(n, std::vector<double>(s));
    const auto total = static_cast<long long>(n);
    std::exception_ptr failure;
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < total; ++i) {
      try {
        const auto& f = in.trace.snapshots[i].second;
        const auto dir = pr_direction(f, rule.support(), rule.kernel(), in.data[i]);
        const auto mean = phi_mean_map(rule, f.weights());
        for (std::size_t u = 0; u < s; ++u) z[i][u] = dir[u] - mean[u];
      } catch (...) {
#pragma omp critical
        failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);

    double sup_z = 0.0;
    for (const auto& zi : z) sup_z = std::max(sup_z, euclid(zi));
    // f(u) p(y|u) / m_f(y) lies in [0, 1], so |Phi(u)| <= 1 and |Z| <= 2 sqrt(s).
    const double z_bound = 2.0 * std::sqrt(static_cast<double>(s));
    rep.checks.push_back(make_check("A3", "Z_n bounded", sup_z <= z_bound, sup_z, z_bound));

    const std::size_t block = std::max<std::size_t>(50, n / 40);
    double worst_z = 0.0;
    for (std::size_t b0 = 0; b0 + block <= n; b0 += block) {
      std::vector<double> mean(s, 0.0);
      double sq = 0.0;
      for (std::size_t i = b0; i < b0 + block; ++i) {
        for (std::size_t u = 0; u < s; ++u) {
          mean[u] += z[i][u];
          sq += z[i][u] * z[i][u];
        }
      }
      for (double& m : mean) m /= static_cast<double>(block);
      const double rms = std::sqrt(sq / static_cast<double>(block));
      if (rms > 0.0) {
        worst_z = std::max(worst_z, euclid(mean) * std::sqrt(static_cast<double>(block)) / rms);
      }
    }
    rep.checks.push_back(make_check("A3", "block means of Z_n vanish", worst_z <= 5.0, worst_z, 5.0,
                                    "max sqrt(B) |block mean| / block rms"));

    // X_N = sum_{k<=N} w_k^{1-delta} Z_k; Doob's maximal inequality bounds
    // sup_N |X_N| by a multiple of the quadratic variation.
    std::vector<std::vector<double>> x(n + 1, std::vector<double>(s, 0.0));
    std::vector<double> qv(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double c = std::pow(in.schedule.weight(i + 1), 1.0 - rep.delta);
      double zz = 0.0;
      for (std::size_t u = 0; u < s; ++u) {
        x[i + 1][u] = x[i][u] + c * z[i][u];
        zz += z[i][u] * z[i][u];
      }
      qv[i + 1] = qv[i] + c * c * zz;
    }
    double sup_x = 0.0;
    for (const auto& xi : x) sup_x = std::max(sup_x, euclid(xi));
    const double ratio = qv[n] > 0.0 ? sup_x / std::sqrt(qv[n]) : 0.0;
    rep.checks.push_back(make_check("A3", "partial sums bounded", ratio <= 10.0, ratio, 10.0,
                                    "sup_N |X_N| / sqrt(quadratic variation)"));
    const std::size_t half = n / 2;
    double sup_tail = 0.0;
    for (std::size_t i = half; i <= n; ++i) {
      std::vector<double> d(s);
      for (std::size_t u = 0; u < s; ++u) d[u] = x[i][u] - x[half][u];
      sup_tail = std::max(sup_tail, euclid(d));
    }
    const double tail_qv = qv[n] - qv[half];
    const double tail_ratio = tail_qv > 0.0 ? sup_tail / std::sqrt(tail_qv) : 0.0;
    rep.checks.push_back(make_check("A3", "partial-sum tails Cauchy", tail_ratio <= 10.0, tail_ratio,
                                    10.0, "sup_{N>=n/2} |X_N - X_{n/2}| / sqrt(tail variation)"));
  }

  // A4: spectrum of J + alpha delta I with alpha = 0 for gamma < 1.
  {
    const double alpha = 0.0;
    const Eigen::MatrixXd shifted =
        in.jacobian.values +
        alpha * rep.delta * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(s),
                                                      static_cast<Eigen::Index>(s));
    Eigen::EigenSolver<Eigen::MatrixXd> solver(shifted, false);
    const double max_real = solver.eigenvalues().real().maxCoeff();
    std::ostringstream detail;
    detail << "max real part of eig(J + alpha delta I), alpha = " << alpha;
    rep.checks.push_back(
        make_check("A4", "Jacobian spectrum stable", max_real < -1e-6, max_real, -1e-6, detail.str()));
  }
  return rep;
}

}  // namespace prmix::diagnostics
