#pragma once

#include <span>
#include <vector>

#include "dualdiv/estimation.hpp"

namespace dualdiv {

/// Right-censored sample ordered by observed time, deaths before censorings
/// at equal times. delta = 1 marks an observed death.
class CensoredSample {
 public:
  /// Sorts (time, indicator) pairs. Throws unless the lengths match, the
  /// indicators are 0/1, the times are finite and at least one death is
  /// present.
  CensoredSample(std::vector<double> times, std::vector<int> indicators);

  std::size_t size() const noexcept { return y_.size(); }
  std::span<const double> y() const noexcept { return y_; }
  std::span<const int> delta() const noexcept { return delta_; }
  std::size_t deaths() const noexcept;

 private:
  std::vector<double> y_;
  std::vector<int> delta_;
};

/// Product-limit jump weights attached to the ordered observations; zero at
/// censored positions.
struct KMWeights {
  std::vector<double> w;
  double sum() const noexcept;
};

/// omega_j = delta_j / (n - j + 1) * prod_{i < j} ((n - i) / (n - i + 1))^delta_i.
KMWeights km_weights(const CensoredSample& cs);

/// Jumps of the W-weighted product-limit estimator: hazard W_j / sum_{q >= j} W_q
/// at each death, times the survival factors prod (1 - hazard) of the earlier
/// deaths. Throws std::domain_error when a death has zero risk-set weight.
KMWeights km_bootstrap_weights(const CensoredSample& cs, const WeightVector& W);

/// Dual criterion with the empirical measure replaced by sum_j kw_j delta_{Y_j}.
double censored_criterion(const ModelSpec& m, const DivergenceSpec& spec, const Params& theta,
                          const Params& alpha, const CensoredSample& cs, const KMWeights& kw,
                          const CriterionOptions& opts = {});

EstimationResult censored_dphide(const ModelSpec& m, const DivergenceSpec& spec,
                                 const Params& theta, const CensoredSample& cs,
                                 const KMWeights& kw, const DphideOptions& opts = {});

/// Exponential rate MLE  sum delta / sum Y.
Params exp_mle_censored(const CensoredSample& cs);

/// Approximate MLE of the exponential rate, (n^-1 sum delta) / sum omega_j Y_j.
Params amle(const CensoredSample& cs);

}  // namespace dualdiv
