#include "prmix/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "prmix/errors.hpp"

namespace prmix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kGaussOrder = 20;
constexpr double kTailSigmas = 12.0;

double log_sum_exp(std::span<const double> a) {
  double amax = kNegInf;
  for (double v : a) amax = std::max(amax, v);
  if (amax == kNegInf) return kNegInf;
  double acc = 0.0;
  for (double v : a) acc += std::exp(v - amax);
  return amax + std::log(acc);
}

}  // namespace

TrueModel::TrueModel(Kernel kernel, SupportSet support, MixingVector weights)
    : kernel_(kernel), support_(std::move(support)), weights_(std::move(weights)) {
  support_.validate_for(kernel_);
  if (weights_.size() != support_.size()) {
    throw DomainError("true model weights do not match its support");
  }
}

double TrueModel::log_density(double y) const {
  return mixture_log_density(weights_, support_, kernel_, y);
}

GaussLegendre gauss_legendre(std::size_t order) {
  GaussLegendre gl;
  gl.nodes.resize(order);
  gl.weights.resize(order);
  const double n = static_cast<double>(order);
  for (std::size_t i = 0; i < (order + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= order; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    gl.nodes[i] = -x;
    gl.nodes[order - 1 - i] = x;
    gl.weights[i] = w;
    gl.weights[order - 1 - i] = w;
  }
  return gl;
}

ExpectationRule::ExpectationRule(const TrueModel& model, const Kernel& fitted_kernel,
                                 const SupportSet& fitted_support)
    : kernel_(fitted_kernel), support_(fitted_support), s_(fitted_support.size()) {
  if (model.kernel().observation_space() != fitted_kernel.observation_space()) {
    throw DomainError("true model and fitted kernel live on different observation spaces");
  }
  fitted_support.validate_for(fitted_kernel);

  const auto mp = model.support().points();
  const auto fp = fitted_support.points();
  const double lo = std::min(mp.front(), fp.front());
  const double hi = std::max(mp.back(), fp.back());

  if (fitted_kernel.family() == KernelFamily::GaussianLocation) {
    const double sig_max = std::max(model.kernel().scale(), fitted_kernel.scale());
    const double sig_min = std::min(model.kernel().scale(), fitted_kernel.scale());
    const double a = lo - kTailSigmas * sig_max;
    const double b = hi + kTailSigmas * sig_max;
    const auto panels = static_cast<std::size_t>(std::ceil((b - a) / (0.5 * sig_min)));
    const double h = (b - a) / static_cast<double>(panels);
    const GaussLegendre gl = gauss_legendre(kGaussOrder);
    y_.reserve(panels * kGaussOrder);
    for (std::size_t p = 0; p < panels; ++p) {
      const double mid = a + (static_cast<double>(p) + 0.5) * h;
      for (std::size_t k = 0; k < kGaussOrder; ++k) {
        y_.push_back(mid + 0.5 * h * gl.nodes[k]);
        dy_.push_back(0.5 * h * gl.weights[k]);
      }
    }
  } else {
    const double ymax = std::ceil(hi + 12.0 * std::sqrt(hi) + 30.0);
    for (double y = 0.0; y <= ymax; y += 1.0) {
      y_.push_back(y);
      dy_.push_back(1.0);
    }
  }

  const std::size_t nodes = y_.size();
  q_.resize(nodes);
  log_m_.resize(nodes);
  log_p_.resize(nodes * s_);
  for (std::size_t j = 0; j < nodes; ++j) {
    log_m_[j] = model.log_density(y_[j]);
    q_[j] = dy_[j] * std::exp(log_m_[j]);
    for (std::size_t u = 0; u < s_; ++u) {
      log_p_[j * s_ + u] = fitted_kernel.log_density_unchecked(y_[j], fp[u]);
    }
  }
}

double ExpectationRule::total_mass() const noexcept {
  double acc = 0.0;
  for (double v : q_) acc += v;
  return acc;
}

std::vector<double> ExpectationRule::component_mass() const {
  std::vector<double> mass(s_, 0.0);
  for (std::size_t j = 0; j < y_.size(); ++j) {
    for (std::size_t u = 0; u < s_; ++u) mass[u] += dy_[j] * std::exp(log_kernel(j, u));
  }
  return mass;
}

std::vector<double> ExpectationRule::log_mixture(std::span<const double> f) const {
  if (f.size() != s_) throw DomainError("mixing vector does not match the fitted support");
  std::vector<double> out(y_.size());
  std::vector<double> terms(s_);
  for (std::size_t j = 0; j < y_.size(); ++j) {
    for (std::size_t u = 0; u < s_; ++u) {
      terms[u] = f[u] > 0.0 ? std::log(f[u]) + log_kernel(j, u) : kNegInf;
    }
    out[j] = log_sum_exp(terms);
  }
  return out;
}

std::vector<double> ExpectationRule::ratio_integrals(std::span<const double> f) const {
  const auto log_mf = log_mixture(f);
  std::vector<double> r(s_, 0.0);
  for (std::size_t j = 0; j < y_.size(); ++j) {
    if (q_[j] == 0.0) continue;
    if (log_mf[j] == kNegInf) throw NumericalError("m_f vanishes where the true density does not");
    for (std::size_t u = 0; u < s_; ++u) {
      r[u] += q_[j] * std::exp(log_kernel(j, u) - log_mf[j]);
    }
  }
  return r;
}

double ExpectationRule::kl(std::span<const double> f) const {
  const auto log_mf = log_mixture(f);
  double acc = 0.0;
  for (std::size_t j = 0; j < y_.size(); ++j) {
    if (q_[j] == 0.0) continue;
    if (log_mf[j] == kNegInf) throw NumericalError("KL divergence is infinite: m_f has holes");
    acc += q_[j] * (log_m_[j] - log_mf[j]);
  }
  if (!std::isfinite(acc)) throw NumericalError("KL quadrature did not produce a finite value");
  return acc;
}

std::vector<double> ExpectationRule::second_moment(std::span<const double> f) const {
  const auto log_mf = log_mixture(f);
  std::vector<double> h(s_ * s_, 0.0);
  for (std::size_t j = 0; j < y_.size(); ++j) {
    if (q_[j] == 0.0) continue;
    if (log_mf[j] == kNegInf) throw NumericalError("m_f vanishes where the true density does not");
    for (std::size_t u = 0; u < s_; ++u) {
      const double a = log_kernel(j, u) - log_mf[j];
      for (std::size_t v = u; v < s_; ++v) {
        h[u * s_ + v] += q_[j] * std::exp(a + log_kernel(j, v) - log_mf[j]);
      }
    }
  }
  for (std::size_t u = 0; u < s_; ++u) {
    for (std::size_t v = 0; v < u; ++v) h[u * s_ + v] = h[v * s_ + u];
  }
  return h;
}

double ExpectationRule::l1_distance(std::span<const double> f, std::span<const double> g) const {
  const auto lf = log_mixture(f);
  const auto lg = log_mixture(g);
  double acc = 0.0;
  for (std::size_t j = 0; j < y_.size(); ++j) {
    acc += dy_[j] * std::abs(std::exp(lf[j]) - std::exp(lg[j]));
  }
  return acc;
}

}  // namespace prmix
