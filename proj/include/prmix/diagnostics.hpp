#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "prmix/execution.hpp"
#include "prmix/pr.hpp"
#include "prmix/quadrature.hpp"

namespace prmix::diagnostics {

/// phi(f)(u) = f(u) { \int p(y|u)/m_f(y) m(y) dy - 1 }, the mean of the PR
/// direction Phi(Y, f) under the true density.
std::vector<double> phi_mean_map(const ExpectationRule& rule, std::span<const double> f);

/// l(f) = K(m, m_f) - K* + sum_u f(u) - 1, defined on the positive orthant.
double lyapunov(const ExpectationRule& rule, std::span<const double> f, double kstar);

/// Analytic gradient: d l / d f(u) = 1 - \int p(y|u)/m_f(y) m(y) dy.
std::vector<double> lyapunov_gradient(const ExpectationRule& rule, std::span<const double> f);

/// Central finite differences of `lyapunov` (kstar cancels).
std::vector<double> lyapunov_gradient_fd(const ExpectationRule& rule, std::span<const double> f,
                                         double step = 1e-5);

/// l(f + delta) - l(f), evaluated as -\int log1p(<delta, p>/m_f) m dy + sum delta
/// so that small differences keep full relative precision.
double lyapunov_difference(const ExpectationRule& rule, std::span<const double> f,
                           std::span<const double> delta);

/// Nested central differences for the Hessian of `lyapunov`, with one
/// Richardson step (steps h and 2h) to cancel the O(h^2) truncation term.
Eigen::MatrixXd lyapunov_hessian_fd(const ExpectationRule& rule, std::span<const double> f,
                                    double step = 1e-4);

/// max_u |phi(f)(u) + f(u) {grad l(f)}(u)| with the gradient taken by finite
/// differences. Requires f strictly interior.
double lyapunov_gradient_identity_check(const ExpectationRule& rule, std::span<const double> f,
                                        double step = 1e-5);

struct DescentValue {
  /// <grad l(f), phi(f)>
  double inner_product;
  /// -sum_u f(u) {grad l(f)}(u)^2
  double closed_form;
};

/// Time derivative of l along the mean ODE at f.
DescentValue lyapunov_derivative(const ExpectationRule& rule, std::span<const double> f);

/// lyapunov_derivative over many points; OpenMP or serial reference loop.
std::vector<DescentValue> lyapunov_derivative_batch(const ExpectationRule& rule,
                                                    const std::vector<std::vector<double>>& points,
                                                    Execution execution = Execution::Parallel);

/// D phi at an interior f*.
struct JacobianMatrix {
  Eigen::MatrixXd values;
  /// Second derivative of l at f*, \int p_u p_v / m_{f*}^2 m dy.
  Eigen::MatrixXd hessian;
  std::vector<double> fstar;

  /// Spectrum of J from the symmetric similar form -D^{1/2} H D^{1/2}
  /// (D = diag f*), ascending. Real by construction.
  Eigen::VectorXd eigenvalues() const;
  /// Spectrum from a general (nonsymmetric) eigensolve of J itself.
  Eigen::VectorXcd general_eigenvalues() const;
  /// max |J + diag(f*) H_other| against some other Hessian (e.g. finite differences).
  double factorization_error(const Eigen::MatrixXd& other_hessian) const;
};

/// J(u,v) = -f*(u) \int p(y|u) p(y|v) / m_{f*}(y)^2 m(y) dy.
JacobianMatrix jacobian(const ExpectationRule& rule, const MixingVector& fstar);

/// P = -J^T and its Markov-chain checks. Each check is reported separately.
struct MarkovChainReport {
  Eigen::MatrixXd transition;
  double min_entry = 0.0;
  double row_sum_error = 0.0;
  double stationarity_error = 0.0;
  double detailed_balance_error = 0.0;
  double tolerance = 1e-8;

  bool nonnegative() const noexcept { return min_entry >= -tolerance; }
  bool row_stochastic() const noexcept { return row_sum_error <= tolerance; }
  bool stationary() const noexcept { return stationarity_error <= tolerance; }
  bool reversible() const noexcept { return detailed_balance_error <= tolerance; }
  bool ok() const noexcept { return nonnegative() && row_stochastic() && stationary() && reversible(); }
};

MarkovChainReport markov_chain_from_jacobian(const JacobianMatrix& jacobian,
                                             double tolerance = 1e-8);

struct OracleOptions {
  std::size_t restarts = 20;
  double tolerance = 1e-12;
  std::size_t max_iterations = 2'000'000;
  std::uint64_t seed = 20240101;
  /// Coordinates above this count as interior.
  double interior_threshold = 1e-8;
};

struct OracleResult {
  MixingVector fstar;
  double kstar = 0.0;
  bool interior = false;
  /// Largest sup-norm distance between any restart's limit and fstar.
  double restart_spread = 0.0;
  std::size_t max_iterations_used = 0;
};

/// Minimizes K(m, m_f) over the simplex with the population fixed-point
/// iteration f(u) <- f(u) \int p(y|u)/m_f(y) m(y) dy from several random
/// starts. Throws NumericalError when a start fails to converge.
OracleResult kl_oracle_fstar(const ExpectationRule& rule, const OracleOptions& options = {});

/// One named pass/fail entry of the stochastic-approximation assumption suite.
struct AssumptionCheck {
  std::string id;  // "A1".."A4"
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string detail;
};

struct AssumptionReport {
  double gamma = 0.0;
  double epsilon = 0.0;
  double delta = 0.0;
  std::vector<AssumptionCheck> checks;

  bool all_passed() const noexcept;
  bool passed(const std::string& id) const noexcept;
};

/// epsilon = 1/gamma - 1 + 0.01 and delta = (1 - epsilon)/2.
double assumption_epsilon(double gamma) noexcept;
double assumption_delta(double gamma) noexcept;

struct AssumptionInputs {
  const ExpectationRule* rule = nullptr;
  WeightSchedule schedule;
  JacobianMatrix jacobian;
  MixingVector fstar;
  double kstar = 0.0;
  /// Observations in the order PR consumed them.
  std::vector<double> data;
  /// PR trace with a snapshot at every index 0..n-1 (f_{n-1} for each Z_n).
  PRTrace trace;
  std::size_t lyapunov_samples = 2000;
  std::uint64_t seed = 7;
};

/// A1 gains, A2 Lyapunov function, A3 martingale-difference partial sums,
/// A4 Jacobian spectrum.
AssumptionReport chen_assumption_suite(const AssumptionInputs& inputs);

/// Uniform sample from the simplex (Dirichlet(1,...,1)).
std::vector<double> random_simplex_point(std::size_t size, std::mt19937_64& rng);

}  // namespace prmix::diagnostics
