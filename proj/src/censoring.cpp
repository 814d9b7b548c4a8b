#include "dualdiv/censoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace dualdiv {

CensoredSample::CensoredSample(std::vector<double> times, std::vector<int> indicators) {
  if (times.size() != indicators.size()) {
    throw std::invalid_argument("censored sample: time and indicator lengths differ");
  }
  if (times.empty()) throw std::invalid_argument("censored sample: empty");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i])) throw std::invalid_argument("censored sample: non-finite time");
    if (indicators[i] != 0 && indicators[i] != 1) {
      throw std::invalid_argument("censored sample: indicators must be 0 or 1");
    }
  }
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (times[a] != times[b]) return times[a] < times[b];
    return indicators[a] > indicators[b];
  });
  y_.reserve(order.size());
  delta_.reserve(order.size());
  for (std::size_t i : order) {
    y_.push_back(times[i]);
    delta_.push_back(indicators[i]);
  }
  if (deaths() == 0) throw std::invalid_argument("censored sample: every observation is censored");
}

std::size_t CensoredSample::deaths() const noexcept {
  return static_cast<std::size_t>(std::count(delta_.begin(), delta_.end(), 1));
}

double KMWeights::sum() const noexcept { return std::accumulate(w.begin(), w.end(), 0.0); }

KMWeights km_weights(const CensoredSample& cs) {
  const std::size_t n = cs.size();
  KMWeights out;
  out.w.assign(n, 0.0);
  double surv = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double at_risk = static_cast<double>(n - j);
    if (cs.delta()[j] == 1) {
      out.w[j] = surv / at_risk;
      surv *= (at_risk - 1.0) / at_risk;
    }
  }
  return out;
}

KMWeights km_bootstrap_weights(const CensoredSample& cs, const WeightVector& W) {
  const std::size_t n = cs.size();
  if (W.size() != n) throw std::invalid_argument("km_bootstrap_weights: weight length differs from n");
  // risk[j] = sum_{q >= j} W_q
  std::vector<double> risk(n + 1, 0.0);
  for (std::size_t j = n; j-- > 0;) risk[j] = risk[j + 1] + W[j];
  KMWeights out;
  out.w.assign(n, 0.0);
  double surv = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (cs.delta()[j] != 1) continue;
    if (!(risk[j] > 0.0)) {
      std::ostringstream os;
      os << "zero risk-set weight at death time " << cs.y()[j];
      throw std::domain_error(os.str());
    }
    const double hazard = W[j] / risk[j];
    out.w[j] = surv * hazard;
    surv *= 1.0 - hazard;
  }
  return out;
}

namespace {

detail::CriterionData censored_data(const ModelSpec& m, const DivergenceSpec& spec,
                                    const Params& theta, const CensoredSample& cs,
                                    const KMWeights& kw, const CriterionOptions& opts) {
  if (kw.w.size() != cs.size()) throw std::invalid_argument("censored criterion: weight length differs from n");
  auto d = detail::make_criterion_data(m, spec, theta, cs.y(), kw.w, opts);
  // kw already carries the 1/n normalization
  d.n = 1.0;
  return d;
}

}  // namespace

double censored_criterion(const ModelSpec& m, const DivergenceSpec& spec, const Params& theta,
                          const Params& alpha, const CensoredSample& cs, const KMWeights& kw,
                          const CriterionOptions& opts) {
  m.require_valid(alpha);
  const auto d = censored_data(m, spec, theta, cs, kw, opts);
  return detail::criterion_value<double>(d, alpha);
}

EstimationResult censored_dphide(const ModelSpec& m, const DivergenceSpec& spec,
                                 const Params& theta, const CensoredSample& cs,
                                 const KMWeights& kw, const DphideOptions& opts) {
  const auto d = censored_data(m, spec, theta, cs, kw, opts.criterion);
  const auto obj = make_objective(
      [&d](const auto& alpha) { return detail::criterion_value(d, alpha); });
  return maximize(m, theta, obj, opts.solver);
}

Params exp_mle_censored(const CensoredSample& cs) {
  const double deaths = static_cast<double>(cs.deaths());
  const double total = std::accumulate(cs.y().begin(), cs.y().end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("exp_mle_censored: total time must be positive");
  Params p(1);
  p[0] = deaths / total;
  return p;
}

Params amle(const CensoredSample& cs) {
  const KMWeights kw = km_weights(cs);
  double denom = 0.0;
  for (std::size_t j = 0; j < cs.size(); ++j) denom += kw.w[j] * cs.y()[j];
  if (!(denom > 0.0)) throw std::invalid_argument("amle: weighted mean time must be positive");
  Params p(1);
  p[0] = (static_cast<double>(cs.deaths()) / static_cast<double>(cs.size())) / denom;
  return p;
}

}  // namespace dualdiv
