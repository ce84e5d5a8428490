#include "prmix/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "prmix/errors.hpp"

namespace prmix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

bool is_count(double y) {
  return std::isfinite(y) && y >= 0.0 && std::floor(y) == y;
}

}  // namespace

Kernel Kernel::gaussian(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw DomainError("gaussian kernel requires a finite scale > 0, got " + std::to_string(sigma));
  }
  return Kernel(KernelFamily::GaussianLocation, sigma);
}

Kernel Kernel::poisson() { return Kernel(KernelFamily::Poisson, 1.0); }

ObservationSpace Kernel::observation_space() const noexcept {
  return family_ == KernelFamily::GaussianLocation ? ObservationSpace::RealLine
                                                   : ObservationSpace::NonnegativeIntegers;
}

std::string Kernel::name() const {
  return family_ == KernelFamily::GaussianLocation ? "gaussian" : "poisson";
}

void Kernel::validate_observation(double y) const {
  if (family_ == KernelFamily::GaussianLocation) {
    if (!std::isfinite(y)) throw DomainError("gaussian observation must be finite");
  } else if (!is_count(y)) {
    throw DomainError("poisson observation must be a nonnegative integer, got " +
                      std::to_string(y));
  }
}

void Kernel::validate_support_point(double u) const {
  if (!std::isfinite(u)) throw DomainError("support point must be finite");
  if (family_ == KernelFamily::Poisson && u < 0.0) {
    throw DomainError("poisson support point must be >= 0, got " + std::to_string(u));
  }
}

double Kernel::log_density_unchecked(double y, double u) const noexcept {
  if (family_ == KernelFamily::GaussianLocation) {
    const double z = (y - u) / scale_;
    return -0.5 * z * z - std::log(scale_) - kHalfLog2Pi;
  }
  if (u == 0.0) return y == 0.0 ? 0.0 : kNegInf;
  return y * std::log(u) - u - std::lgamma(y + 1.0);
}

double Kernel::log_density(double y, double u) const {
  validate_observation(y);
  validate_support_point(u);
  return log_density_unchecked(y, u);
}

double Kernel::density(double y, double u) const { return std::exp(log_density(y, u)); }

bool LrBound::finite() const noexcept { return std::isfinite(log_value); }

double LrBound::value() const noexcept { return std::exp(log_value); }

double poisson_lr_moment_log(double u1, double u2, double u3) {
  if (u2 == 0.0) throw DomainError("ratio p(y|u1)/p(y|0) is undefined for y > 0");
  if (u1 == u2) return 0.0;
  const Kernel k = Kernel::poisson();
  auto term = [&](double y) {
    return 2.0 * k.log_density_unchecked(y, u1) - 2.0 * k.log_density_unchecked(y, u2) +
           k.log_density_unchecked(y, u3);
  };
  // Terms are proportional to a Poisson mass with rate u3 * (u1/u2)^2; sum
  // outwards from its mode until both sides are negligible.
  const double rate = u3 * (u1 / u2) * (u1 / u2);
  const double mode = std::floor(rate);
  const double peak = term(mode);
  if (peak == kNegInf) return kNegInf;
  constexpr double kCut = -40.0;  // e^-40 relative to the peak
  double acc = 1.0;
  for (double y = mode + 1.0;; y += 1.0) {
    const double t = term(y) - peak;
    if (!(t > kCut) && y > rate) break;
    acc += std::exp(t);
  }
  for (double y = mode - 1.0; y >= 0.0; y -= 1.0) {
    const double t = term(y) - peak;
    if (!(t > kCut)) break;
    acc += std::exp(t);
  }
  return peak + std::log(acc);
}

LrBound check_lr_bound(const Kernel& kernel, std::span<const double> grid) {
  if (grid.empty()) throw DomainError("check_lr_bound needs a nonempty grid");
  for (double u : grid) kernel.validate_support_point(u);
  const auto [lo_it, hi_it] = std::minmax_element(grid.begin(), grid.end());
  const double extremes[2] = {*lo_it, *hi_it};

  LrBound out;
  out.log_value = kNegInf;
  for (double u1 : grid) {
    for (double u2 : grid) {
      if (kernel.family() == KernelFamily::Poisson && u2 == 0.0 && u1 != 0.0) {
        ++out.excluded_pairs;
        continue;
      }
      for (double u3 : extremes) {
        double v;
        if (u1 == u2) {
          v = 0.0;
        } else if (kernel.family() == KernelFamily::GaussianLocation) {
          const double d = u1 - u2;
          const double s2 = kernel.scale() * kernel.scale();
          v = d * (2.0 * u3 + u1 - 3.0 * u2) / s2;
        } else {
          v = poisson_lr_moment_log(u1, u2, u3);
        }
        out.log_value = std::max(out.log_value, v);
      }
    }
  }
  return out;
}

}  // namespace prmix
