#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "prmix/kernel.hpp"
#include "prmix/pr.hpp"

namespace prmix {

/// A known data-generating density m, represented as a finite mixture over
/// its own (possibly different) grid. Misspecified studies use a true grid
/// that differs from the fitted one.
class TrueModel {
 public:
  TrueModel(Kernel kernel, SupportSet support, MixingVector weights);

  const Kernel& kernel() const noexcept { return kernel_; }
  const SupportSet& support() const noexcept { return support_; }
  const MixingVector& weights() const noexcept { return weights_; }

  double log_density(double y) const;

 private:
  Kernel kernel_;
  SupportSet support_;
  MixingVector weights_;
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussLegendre gauss_legendre(std::size_t order);

/// Discretized expectations against a TrueModel for one fitted (kernel, grid).
///
/// Gaussian: composite 20-point Gauss-Legendre over
///   [min(grid) - 12 sigma, max(grid) + 12 sigma], panels of width sigma/2.
/// Poisson: exact summation over y = 0..Y with Y far beyond the largest
///   rate's tail (Poisson(max u) mass above Y is below 1e-17).
///
/// All functionals below accept any f on the positive orthant (the Lyapunov
/// function is differentiated off the simplex).
class ExpectationRule {
 public:
  ExpectationRule(const TrueModel& model, const Kernel& fitted_kernel,
                  const SupportSet& fitted_support);

  std::size_t nodes() const noexcept { return y_.size(); }
  std::size_t components() const noexcept { return s_; }
  const SupportSet& support() const noexcept { return support_; }
  const Kernel& kernel() const noexcept { return kernel_; }

  double node(std::size_t j) const noexcept { return y_[j]; }
  /// dy weight (1 for counts).
  double measure_weight(std::size_t j) const noexcept { return dy_[j]; }
  /// dy * m(y_j).
  double model_weight(std::size_t j) const noexcept { return q_[j]; }
  double log_model(std::size_t j) const noexcept { return log_m_[j]; }
  double log_kernel(std::size_t j, std::size_t u) const noexcept { return log_p_[j * s_ + u]; }

  /// Sum of model weights; 1 up to truncation/quadrature error.
  double total_mass() const noexcept;
  /// \int p(y|u) dy for each fitted component.
  std::vector<double> component_mass() const;

  /// log m_f(y_j) at every node.
  std::vector<double> log_mixture(std::span<const double> f) const;
  /// R(u) = \int p(y|u) / m_f(y) m(y) dy.
  std::vector<double> ratio_integrals(std::span<const double> f) const;
  /// K(m, m_f) = \int log(m / m_f) m dy. Throws NumericalError if divergent.
  double kl(std::span<const double> f) const;
  /// H(u,v) = \int p(y|u) p(y|v) / m_f(y)^2 m(y) dy, row-major s*s.
  std::vector<double> second_moment(std::span<const double> f) const;
  /// \int |m_f - m_g| dy.
  double l1_distance(std::span<const double> f, std::span<const double> g) const;

 private:
  Kernel kernel_;
  SupportSet support_;
  std::size_t s_;
  std::vector<double> y_;
  std::vector<double> dy_;
  std::vector<double> q_;
  std::vector<double> log_m_;
  std::vector<double> log_p_;
};

}  // namespace prmix
