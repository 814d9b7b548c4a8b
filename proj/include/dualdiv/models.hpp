#pragma once

#include <Eigen/Core>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dualdiv/divergence.hpp"
#include "dualdiv/jet.hpp"
#include "dualdiv/rng.hpp"

namespace dualdiv {

/// Parameter vector of a family: one entry, or (location, scale) for the
/// two-parameter normal.
template <typename Scalar>
using ParamVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, 2, 1>;
using Params = ParamVector<double>;

using Sample = std::vector<double>;

enum class Family {
  normal_known_scale,  // N(theta, sigma^2), sigma fixed
  normal_loc_scale,    // N(mu, sigma^2), both estimated
  log_normal,          // log X ~ N(theta, sigma^2), sigma fixed
  exponential,         // rate theta
  gamma,               // rate theta, shape k fixed
  weibull,             // scale theta, shape k fixed
  pareto,              // theta / x^(theta + 1), x > 1
};

class ModelSpec {
 public:
  static ModelSpec normal(double sigma = 1.0);
  static ModelSpec normal_loc_scale();
  static ModelSpec log_normal(double sigma = 1.0);
  static ModelSpec exponential();
  static ModelSpec gamma(double shape);
  static ModelSpec weibull(double shape);
  static ModelSpec pareto();

  /// "normal", "normal:sigma=2", "normal-loc-scale", "lognormal", "exponential",
  /// "gamma:k=2", "weibull:k=1.5", "pareto".
  static ModelSpec parse(std::string_view text);

  Family family() const noexcept { return family_; }
  /// Known sigma for the normal/log-normal families, known shape k for
  /// Gamma/Weibull, unused otherwise.
  double hyper() const noexcept { return hyper_; }
  int dim() const noexcept { return family_ == Family::normal_loc_scale ? 2 : 1; }
  std::string name() const;

  bool valid(const Params& p) const noexcept;
  /// Validated parameter construction.
  Params params(std::initializer_list<double> values) const;
  /// Throws std::invalid_argument unless valid(p).
  void require_valid(const Params& p) const;

  /// Coordinates constrained to (0, inf).
  bool positive_coordinate(int i) const noexcept;
  bool is_location_family() const noexcept;

  /// Support of the density (where it is positive).
  bool in_support(double x) const noexcept;
  /// Points at which the density ratio is defined (closure of the support).
  bool in_ratio_domain(double x) const noexcept;
  double support_lower() const noexcept;

 private:
  ModelSpec(Family f, double hyper);
  Family family_;
  double hyper_;
};

// ---------------------------------------------------------------------------
// Scalar-templated closed forms. Only the second parameter set (alpha) is
// templated, the escort theta is always a fixed value.

namespace detail {
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;
inline constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace detail

/// log p_theta(x); -inf outside the support.
template <typename Scalar>
Scalar log_density(const ModelSpec& m, const ParamVector<Scalar>& p, double x) {
  using std::log;
  using std::exp;
  if (!m.in_support(x)) return Scalar(-detail::kInf);
  switch (m.family()) {
    case Family::normal_known_scale: {
      const double s = m.hyper();
      const Scalar z = (x - p[0]) / s;
      return -0.5 * z * z - std::log(s) - detail::kLogSqrt2Pi;
    }
    case Family::normal_loc_scale: {
      const Scalar z = (x - p[0]) / p[1];
      return -0.5 * z * z - log(p[1]) - detail::kLogSqrt2Pi;
    }
    case Family::log_normal: {
      const double s = m.hyper();
      const double lx = std::log(x);
      const Scalar z = (lx - p[0]) / s;
      return -0.5 * z * z - std::log(s) - lx - detail::kLogSqrt2Pi;
    }
    case Family::exponential:
      return log(p[0]) - p[0] * x;
    case Family::gamma: {
      const double k = m.hyper();
      return k * log(p[0]) + (k - 1.0) * std::log(x) - p[0] * x - std::lgamma(k);
    }
    case Family::weibull: {
      const double k = m.hyper();
      const Scalar lt = log(p[0]);
      const Scalar lz = std::log(x) - lt;
      return std::log(k) - lt + (k - 1.0) * lz - exp(k * lz);
    }
    case Family::pareto:
      return log(p[0]) - (p[0] + 1.0) * std::log(x);
  }
  return Scalar(-detail::kInf);
}

/// log(dP_theta/dP_alpha)(x), simplified per family so that it stays finite
/// on the closure of the support. Caller guarantees m.in_ratio_domain(x).
template <typename Scalar>
Scalar log_density_ratio(const ModelSpec& m, const Params& theta, const ParamVector<Scalar>& alpha,
                         double x) {
  using std::log;
  using std::exp;
  switch (m.family()) {
    case Family::normal_known_scale: {
      const double s2 = m.hyper() * m.hyper();
      const double dt = x - theta[0];
      const Scalar da = x - alpha[0];
      return (da * da - dt * dt) / (2.0 * s2);
    }
    case Family::normal_loc_scale: {
      const double zt = (x - theta[0]) / theta[1];
      const Scalar za = (x - alpha[0]) / alpha[1];
      return log(alpha[1]) - std::log(theta[1]) + 0.5 * (za * za - zt * zt);
    }
    case Family::log_normal: {
      const double s2 = m.hyper() * m.hyper();
      const double lx = std::log(x);
      const double dt = lx - theta[0];
      const Scalar da = lx - alpha[0];
      return (da * da - dt * dt) / (2.0 * s2);
    }
    case Family::exponential:
      return std::log(theta[0]) - log(alpha[0]) - (theta[0] - alpha[0]) * x;
    case Family::gamma:
      return m.hyper() * (std::log(theta[0]) - log(alpha[0])) - (theta[0] - alpha[0]) * x;
    case Family::weibull: {
      const double k = m.hyper();
      const Scalar la = log(alpha[0]);
      const double lt = std::log(theta[0]);
      if (x == 0.0) return k * (la - lt);
      const double lx = std::log(x);
      return k * (la - lt) - std::exp(k * (lx - lt)) + exp(k * (lx - la));
    }
    case Family::pareto:
      return std::log(theta[0]) - log(alpha[0]) - (theta[0] - alpha[0]) * std::log(x);
  }
  return Scalar(detail::kInf);
}

/// (1/(gamma-1)) * integral of (dP_theta/dP_alpha)^(gamma-1) dP_theta for
/// gamma not in {0, 1}. Returns +inf when the integral diverges.
template <typename Scalar>
Scalar dual_integral(const ModelSpec& m, double gamma, const Params& theta,
                     const ParamVector<Scalar>& alpha) {
  using std::exp;
  using std::log;
  using std::sqrt;
  const double gm1 = gamma - 1.0;
  const Scalar inf(detail::kInf);
  switch (m.family()) {
    case Family::normal_known_scale: {
      const double s2 = m.hyper() * m.hyper();
      const Scalar d = theta[0] - alpha[0];
      return exp(gamma * gm1 * d * d / (2.0 * s2)) / gm1;
    }
    case Family::log_normal: {
      const double s2 = m.hyper() * m.hyper();
      const Scalar d = theta[0] - alpha[0];
      return exp(gamma * gm1 * d * d / (2.0 * s2)) / gm1;
    }
    case Family::normal_loc_scale: {
      const double s1 = theta[1];
      const Scalar& s2 = alpha[1];
      const Scalar denom = gamma * s2 * s2 - gm1 * s1 * s1;
      if (!(value_of(denom) > 0.0)) return inf;
      const Scalar d = theta[0] - alpha[0];
      // s1^-(g-1) s2^g / sqrt(denom) * exp(g (g-1) d^2 / (2 denom)), in log space
      const Scalar log_mag = -gm1 * std::log(s1) + gamma * log(s2) - 0.5 * log(denom) +
                             gamma * gm1 * d * d / (2.0 * denom);
      return exp(log_mag) / gm1;
    }
    case Family::exponential:
    case Family::pareto: {
      const Scalar denom = gamma * theta[0] - gm1 * alpha[0];
      if (!(value_of(denom) > 0.0)) return inf;
      const Scalar log_mag = gm1 * (std::log(theta[0]) - log(alpha[0])) + std::log(theta[0]) -
                             log(denom);
      return exp(log_mag) / gm1;
    }
    case Family::gamma: {
      const double k = m.hyper();
      const Scalar denom = gamma * theta[0] - gm1 * alpha[0];
      if (!(value_of(denom) > 0.0)) return inf;
      const Scalar log_mag =
          k * gm1 * (std::log(theta[0]) - log(alpha[0])) + k * (std::log(theta[0]) - log(denom));
      return exp(log_mag) / gm1;
    }
    case Family::weibull: {
      const double k = m.hyper();
      const Scalar la = log(alpha[0]);
      const double lt = std::log(theta[0]);
      const Scalar denom = gamma - exp(k * (lt - la)) * gm1;
      if (!(value_of(denom) > 0.0)) return inf;
      return exp(k * gm1 * (la - lt) - log(denom)) / gm1;
    }
  }
  return inf;
}

/// Kullback-Leibler integral  integral of log(dP_theta/dP_alpha) dP_theta,
/// the gamma -> 1 limit of dual_integral - 1/(gamma-1).
template <typename Scalar>
Scalar kl_integral(const ModelSpec& m, const Params& theta, const ParamVector<Scalar>& alpha) {
  using std::exp;
  using std::log;
  switch (m.family()) {
    case Family::normal_known_scale:
    case Family::log_normal: {
      const Scalar d = theta[0] - alpha[0];
      return d * d / (2.0 * m.hyper() * m.hyper());
    }
    case Family::normal_loc_scale: {
      const Scalar d = theta[0] - alpha[0];
      const double s1 = theta[1];
      return log(alpha[1]) - std::log(s1) + (s1 * s1 + d * d) / (2.0 * alpha[1] * alpha[1]) - 0.5;
    }
    case Family::exponential:
    case Family::pareto:
      return std::log(theta[0]) - log(alpha[0]) + alpha[0] / theta[0] - 1.0;
    case Family::gamma:
      return m.hyper() * (std::log(theta[0]) - log(alpha[0]) + alpha[0] / theta[0] - 1.0);
    case Family::weibull: {
      const double k = m.hyper();
      const Scalar la = log(alpha[0]);
      const double lt = std::log(theta[0]);
      return k * (la - lt) - 1.0 + exp(k * (lt - la));
    }
  }
  return Scalar(detail::kInf);
}

// ---------------------------------------------------------------------------
// Value-level API.

double density(const ModelSpec& m, const Params& p, double x);

/// dP_theta/dP_alpha at x; throws std::out_of_range outside the ratio domain.
double density_ratio(const ModelSpec& m, const Params& theta, const Params& alpha, double x);

/// Closed-form dual integral for gamma not in {0, 1} (throws
/// std::domain_error there). +inf when the integral diverges.
double dual_integral(const ModelSpec& m, const DivergenceSpec& spec, const Params& theta,
                     const Params& alpha);

double kl_integral(const ModelSpec& m, const Params& theta, const Params& alpha);

/// Maximum likelihood estimate; throws on empty or out-of-support samples.
Params mle(const ModelSpec& m, std::span<const double> sample);
/// Weighted MLE, maximizing sum_i w_i log p(x_i).
Params mle(const ModelSpec& m, std::span<const double> sample, std::span<const double> weights);

Sample draw_sample(const ModelSpec& m, const Params& p, std::size_t n, Rng& rng);

struct DiracAt {
  double location;
};
struct ModelContaminant {
  ModelSpec model;
  Params params;
};
using Contaminant = std::variant<DiracAt, ModelContaminant>;

/// Each observation comes from the contaminant with probability eps, else
/// from (m, p).
Sample draw_contaminated(const ModelSpec& m, const Params& p, double eps,
                         const Contaminant& contaminant, std::size_t n, Rng& rng);

}  // namespace dualdiv
