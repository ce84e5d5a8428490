#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace prmix {

enum class KernelFamily { GaussianLocation, Poisson };

enum class ObservationSpace { RealLine, NonnegativeIntegers };

/// Component density family p(y|u).
///
/// GaussianLocation: N(u, scale^2) on the real line.
/// Poisson: Poisson(u) on {0, 1, 2, ...}; u = 0 is the point mass at y = 0,
/// which is how zero inflation enters a Poisson mixture.
///
/// All evaluation is done in log space. Instances are immutable and safe to
/// share between threads.
class Kernel {
 public:
  static Kernel gaussian(double sigma);
  static Kernel poisson();

  KernelFamily family() const noexcept { return family_; }
  double scale() const noexcept { return scale_; }
  ObservationSpace observation_space() const noexcept;
  std::string name() const;

  /// log p(y|u). Returns -inf only for Poisson with u = 0 and y > 0.
  /// Throws DomainError for an invalid pairing.
  double log_density(double y, double u) const;
  double density(double y, double u) const;

  void validate_observation(double y) const;
  void validate_support_point(double u) const;

  /// No validation; callers guarantee a valid pairing.
  double log_density_unchecked(double y, double u) const noexcept;

  bool operator==(const Kernel&) const = default;

 private:
  Kernel(KernelFamily family, double scale) : family_(family), scale_(scale) {}

  KernelFamily family_;
  double scale_;
};

/// Result of the likelihood-ratio moment bound
///   A = max_{u1,u2,u3} \int {p(y|u1)/p(y|u2)}^2 p(y|u3) dy.
/// Kept on the log scale: for wide Gaussian grids A itself overflows a double
/// even though it is mathematically finite.
struct LrBound {
  double log_value = 0.0;
  /// Poisson pairings with u2 = 0 where the ratio is undefined; excluded from the max.
  std::size_t excluded_pairs = 0;

  bool finite() const noexcept;
  /// exp(log_value); may be +inf through overflow.
  double value() const noexcept;
};

/// Gaussian: closed form. Poisson: truncated summation over y.
/// The integral is log-linear in u3 for both families, so only the extreme
/// grid points are tried for u3.
LrBound check_lr_bound(const Kernel& kernel, std::span<const double> grid);

/// Truncated summation of \int {p(y|u1)/p(y|u2)}^2 p(y|u3) dy on the log scale
/// (Poisson only). Exposed for testing.
double poisson_lr_moment_log(double u1, double u2, double u3);

}  // namespace prmix
