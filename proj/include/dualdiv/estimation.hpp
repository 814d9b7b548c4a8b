#pragma once

#include <span>
#include <variant>
#include <vector>

#include "dualdiv/divergence.hpp"
#include "dualdiv/models.hpp"
#include "dualdiv/solver.hpp"

namespace dualdiv {

/// Nonnegative weights summing to their length.
class WeightVector {
 public:
  /// Validates nonnegativity and sum == n to rel_tol relative.
  explicit WeightVector(std::vector<double> w, double rel_tol = 1e-9);
  static WeightVector uniform(std::size_t n);

  std::size_t size() const noexcept { return w_.size(); }
  double operator[](std::size_t i) const noexcept { return w_[i]; }
  std::span<const double> values() const noexcept { return w_; }
  bool is_uniform() const noexcept { return uniform_; }

 private:
  std::vector<double> w_;
  bool uniform_ = false;
};

/// Sign of the KL term in the gamma = 1 criterion for the known-scale normal
/// model. `exact` uses +KL(theta, alpha), `printed` uses -(theta-alpha)^2/2.
enum class KlConvention { exact, printed };

struct CriterionOptions {
  KlConvention kl_convention = KlConvention::exact;
};

namespace detail {

// Precomputed per-sample data shared across criterion evaluations.
struct CriterionData {
  const ModelSpec* model;
  double gamma;
  int kind;  // 0: modified KL, 1: KL, 2: generic power
  Params theta;
  std::span<const double> x;
  std::span<const double> w;  // empty means uniform
  double n;
  KlConvention kl;
};

template <typename Scalar>
Scalar criterion_value(const CriterionData& d, const ParamVector<Scalar>& alpha) {
  using std::expm1;
  const double ninv = 1.0 / d.n;
  Scalar integral(0.0);
  if (d.kind == 1) {
    integral = kl_integral<Scalar>(*d.model, d.theta, alpha);
    if (d.kl == KlConvention::printed && d.model->family() == Family::normal_known_scale) {
      integral = -integral;
    }
  } else if (d.kind == 2) {
    integral = dual_integral<Scalar>(*d.model, d.gamma, d.theta, alpha);
    if (!is_finite(integral)) return Scalar(-detail::kInf);
  }
  Scalar acc(0.0);
  const bool weighted = !d.w.empty();
  for (std::size_t i = 0; i < d.x.size(); ++i) {
    if (weighted && d.w[i] == 0.0) continue;
    const Scalar lr = log_density_ratio<Scalar>(*d.model, d.theta, alpha, d.x[i]);
    Scalar term = d.kind == 0 ? lr : (d.kind == 1 ? expm1(lr) : expm1(d.gamma * lr));
    if (weighted) term = term * d.w[i];
    acc += term;
  }
  Scalar value(0.0);
  switch (d.kind) {
    case 0: value = -ninv * acc; break;
    case 1: value = integral - ninv * acc; break;
    default: value = integral - (ninv / d.gamma) * acc - 1.0 / (d.gamma - 1.0); break;
  }
  if (!is_finite(value)) return Scalar(-detail::kInf);
  return value;
}

CriterionData make_criterion_data(const ModelSpec& m, const DivergenceSpec& spec,
                                  const Params& theta, std::span<const double> sample,
                                  std::span<const double> weights, const CriterionOptions& opts);

}  // namespace detail

/// Empirical dual criterion  (1/n) sum_i w_i h(theta, alpha, X_i), with
/// constants chosen so that criterion(theta, theta) = 0. Returns -inf where
/// the dual integral diverges.
double criterion(const ModelSpec& m, const DivergenceSpec& spec, const Params& theta,
                 const Params& alpha, std::span<const double> sample, const WeightVector& weights,
                 const CriterionOptions& opts = {});
/// Unweighted criterion (w = 1).
double criterion(const ModelSpec& m, const DivergenceSpec& spec, const Params& theta,
                 const Params& alpha, std::span<const double> sample,
                 const CriterionOptions& opts = {});

/// Exact gradient in alpha; throws std::domain_error where the criterion is
/// not finite.
Eigen::VectorXd criterion_gradient(const ModelSpec& m, const DivergenceSpec& spec,
                                   const Params& theta, const Params& alpha,
                                   std::span<const double> sample, const WeightVector& weights,
                                   const CriterionOptions& opts = {});

struct EscortMle {};
struct EscortMean {};
struct EscortMedian {};
struct EscortFixed {
  Params theta;
};
using EscortStrategy = std::variant<EscortMle, EscortMean, EscortMedian, EscortFixed>;

/// Escort value theta for the criterion. Mean and Median match the model's
/// mean (moment estimator) or median to the sample; for the two-parameter
/// normal they also estimate the scale, by the standard deviation and by
/// 1.4826 * MAD respectively.
Params escort(const ModelSpec& m, std::span<const double> sample, const EscortStrategy& strategy);

EscortStrategy parse_escort(std::string_view text);
std::string escort_name(const EscortStrategy& strategy);

struct DphideOptions {
  CriterionOptions criterion;
  SolverOptions solver;
};

/// Dual phi-divergence estimate: the local maximizer of the criterion
/// reached from the escort theta.
EstimationResult dphide(const ModelSpec& m, const DivergenceSpec& spec, const Params& theta,
                        std::span<const double> sample, const WeightVector& weights,
                        const DphideOptions& opts = {});
EstimationResult dphide(const ModelSpec& m, const DivergenceSpec& spec, const Params& theta,
                        std::span<const double> sample, const DphideOptions& opts = {});

}  // namespace dualdiv
