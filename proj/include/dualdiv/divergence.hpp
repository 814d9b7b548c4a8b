#pragma once

#include <string>
#include <string_view>

namespace dualdiv {

/// Power-divergence index. gamma = 0 is the modified Kullback-Leibler
/// divergence (the dual estimator is then the MLE), gamma = 1 is KL,
/// gamma = 2 chi-square, gamma = -1 modified chi-square and gamma = 0.5
/// Hellinger.
class DivergenceSpec {
 public:
  explicit DivergenceSpec(double gamma);

  /// Accepts the aliases "chi2m", "klm", "hellinger", "kl", "chi2" (case
  /// insensitive) or a plain number.
  static DivergenceSpec parse(std::string_view text);

  static DivergenceSpec modified_chi_square() { return DivergenceSpec(-1.0); }
  static DivergenceSpec modified_kl() { return DivergenceSpec(0.0); }
  static DivergenceSpec hellinger() { return DivergenceSpec(0.5); }
  static DivergenceSpec kl() { return DivergenceSpec(1.0); }
  static DivergenceSpec chi_square() { return DivergenceSpec(2.0); }

  double gamma() const noexcept { return gamma_; }

  // The generic formulas have a removable singularity at 0 and 1.
  bool is_modified_kl() const noexcept;
  bool is_kl() const noexcept;

  std::string name() const;

 private:
  double gamma_;
};

inline constexpr double kGammaLimitTolerance = 1e-9;

/// phi_gamma(x). Returns +inf for x < 0 and the right limit at x = 0.
double phi(const DivergenceSpec& spec, double x) noexcept;

/// phi'_gamma(x); throws std::domain_error for x <= 0.
double phi_prime(const DivergenceSpec& spec, double x);

/// x * phi'(x) - phi(x); throws std::domain_error for x <= 0.
double fenchel_term(const DivergenceSpec& spec, double x);

}  // namespace dualdiv
