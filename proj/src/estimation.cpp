#include "dualdiv/estimation.hpp"

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace dualdiv {

WeightVector::WeightVector(std::vector<double> w, double rel_tol) : w_(std::move(w)) {
  if (w_.empty()) throw std::invalid_argument("weight vector must be nonempty");
  double sum = 0.0;
  bool ones = true;
  for (double v : w_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("weights must be finite and nonnegative");
    }
    sum += v;
    ones = ones && v == 1.0;
  }
  const double n = static_cast<double>(w_.size());
  if (std::abs(sum - n) > rel_tol * n) {
    std::ostringstream os;
    os << "weights must sum to n = " << w_.size() << " (got " << sum << ")";
    throw std::invalid_argument(os.str());
  }
  uniform_ = ones;
}

WeightVector WeightVector::uniform(std::size_t n) { return WeightVector(std::vector<double>(n, 1.0)); }

namespace detail {

CriterionData make_criterion_data(const ModelSpec& m, const DivergenceSpec& spec,
                                  const Params& theta, std::span<const double> sample,
                                  std::span<const double> weights, const CriterionOptions& opts) {
  m.require_valid(theta);
  if (sample.empty()) throw std::invalid_argument("criterion: empty sample");
  if (!weights.empty() && weights.size() != sample.size()) {
    throw std::invalid_argument("criterion: sample and weight lengths differ");
  }
  for (double x : sample) {
    if (!m.in_ratio_domain(x)) {
      std::ostringstream os;
      os << "observation " << x << " outside the support of " << m.name();
      throw std::invalid_argument(os.str());
    }
  }
  CriterionData d;
  d.model = &m;
  d.gamma = spec.gamma();
  d.kind = spec.is_modified_kl() ? 0 : (spec.is_kl() ? 1 : 2);
  d.theta = theta;
  d.x = sample;
  d.w = weights;
  d.n = static_cast<double>(sample.size());
  d.kl = opts.kl_convention;
  return d;
}

}  // namespace detail

namespace {

std::span<const double> weight_span(const WeightVector& w) {
  return w.is_uniform() ? std::span<const double>() : w.values();
}

}  // namespace

double criterion(const ModelSpec& m, const DivergenceSpec& spec, const Params& theta,
                 const Params& alpha, std::span<const double> sample, const WeightVector& weights,
                 const CriterionOptions& opts) {
  if (weights.size() != sample.size()) {
    throw std::invalid_argument("criterion: sample and weight lengths differ");
  }
  m.require_valid(alpha);
  const auto d = detail::make_criterion_data(m, spec, theta, sample, weight_span(weights), opts);
  return detail::criterion_value<double>(d, alpha);
}

double criterion(const ModelSpec& m, const DivergenceSpec& spec, const Params& theta,
                 const Params& alpha, std::span<const double> sample,
                 const CriterionOptions& opts) {
  m.require_valid(alpha);
  const auto d = detail::make_criterion_data(m, spec, theta, sample, {}, opts);
  return detail::criterion_value<double>(d, alpha);
}

Eigen::VectorXd criterion_gradient(const ModelSpec& m, const DivergenceSpec& spec,
                                   const Params& theta, const Params& alpha,
                                   std::span<const double> sample, const WeightVector& weights,
                                   const CriterionOptions& opts) {
  if (weights.size() != sample.size()) {
    throw std::invalid_argument("criterion: sample and weight lengths differ");
  }
  m.require_valid(alpha);
  const auto d = detail::make_criterion_data(m, spec, theta, sample, weight_span(weights), opts);
  Eigen::VectorXd g(m.dim());
  if (m.dim() == 1) {
    ParamVector<Jet<1>> a(1);
    a[0] = Jet<1>::variable(alpha[0], 0);
    const Jet<1> j = detail::criterion_value<Jet<1>>(d, a);
    if (!std::isfinite(j.v)) throw std::domain_error("criterion is not finite at alpha");
    g[0] = j.g[0];
  } else {
    ParamVector<Jet<2>> a(2);
    a[0] = Jet<2>::variable(alpha[0], 0);
    a[1] = Jet<2>::variable(alpha[1], 1);
    const Jet<2> j = detail::criterion_value<Jet<2>>(d, a);
    if (!std::isfinite(j.v)) throw std::domain_error("criterion is not finite at alpha");
    g = j.g;
  }
  return g;
}

namespace {

double sample_median(std::span<const double> s) {
  std::vector<double> v(s.begin(), s.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

Params moment_escort(const ModelSpec& m, std::span<const double> s) {
  const double n = static_cast<double>(s.size());
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
  const double k = m.hyper();
  Params p(m.dim());
  switch (m.family()) {
    case Family::normal_known_scale: p[0] = mean; break;
    case Family::normal_loc_scale: {
      double ss = 0.0;
      for (double x : s) ss += (x - mean) * (x - mean);
      p[0] = mean;
      p[1] = std::sqrt(ss / n);
      break;
    }
    case Family::log_normal: p[0] = std::log(mean) - 0.5 * k * k; break;
    case Family::exponential: p[0] = 1.0 / mean; break;
    case Family::gamma: p[0] = k / mean; break;
    case Family::weibull: p[0] = mean / std::tgamma(1.0 + 1.0 / k); break;
    case Family::pareto:
      if (!(mean > 1.0)) throw std::invalid_argument("mean escort: Pareto mean must exceed 1");
      p[0] = mean / (mean - 1.0);
      break;
  }
  return p;
}

Params median_escort(const ModelSpec& m, std::span<const double> s) {
  const double med = sample_median(s);
  const double k = m.hyper();
  constexpr double kLn2 = 0.69314718055994530942;
  Params p(m.dim());
  switch (m.family()) {
    case Family::normal_known_scale: p[0] = med; break;
    case Family::normal_loc_scale: {
      std::vector<double> dev(s.size());
      std::transform(s.begin(), s.end(), dev.begin(), [med](double x) { return std::abs(x - med); });
      p[0] = med;
      p[1] = 1.4826 * sample_median(dev);
      break;
    }
    case Family::log_normal: p[0] = std::log(med); break;
    case Family::exponential: p[0] = kLn2 / med; break;
    case Family::gamma:
      // median of Gamma(k, rate) is q / rate with q the unit-rate median
      p[0] = boost::math::gamma_p_inv(k, 0.5) / med;
      break;
    case Family::weibull: p[0] = med / std::pow(kLn2, 1.0 / k); break;
    case Family::pareto: p[0] = kLn2 / std::log(med); break;
  }
  return p;
}

}  // namespace

Params escort(const ModelSpec& m, std::span<const double> sample, const EscortStrategy& strategy) {
  if (sample.empty()) throw std::invalid_argument("escort: empty sample");
  Params p = std::visit(
      [&](const auto& s) -> Params {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, EscortMle>) return mle(m, sample);
        else if constexpr (std::is_same_v<S, EscortMean>) return moment_escort(m, sample);
        else if constexpr (std::is_same_v<S, EscortMedian>) return median_escort(m, sample);
        else return s.theta;
      },
      strategy);
  if (!m.valid(p)) throw std::invalid_argument("escort: sample does not determine a valid escort");
  return p;
}

EscortStrategy parse_escort(std::string_view text) {
  if (text == "mle") return EscortMle{};
  if (text == "mean") return EscortMean{};
  if (text == "median") return EscortMedian{};
  if (text.substr(0, 6) == "fixed:") {
    std::string_view rest = text.substr(6);
    std::vector<double> vals;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view tok = rest.substr(0, comma);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
        throw std::invalid_argument("escort: bad fixed value '" + std::string(tok) + "'");
      }
      vals.push_back(v);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (vals.empty() || vals.size() > 2) throw std::invalid_argument("escort: fixed needs 1 or 2 values");
    Params p(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) p[static_cast<Eigen::Index>(i)] = vals[i];
    return EscortFixed{p};
  }
  throw std::invalid_argument("unknown escort '" + std::string(text) + "' (mle, mean, median, fixed:<v>)");
}

std::string escort_name(const EscortStrategy& strategy) {
  return std::visit(
      [](const auto& s) -> std::string {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, EscortMle>) return "mle";
        else if constexpr (std::is_same_v<S, EscortMean>) return "mean";
        else if constexpr (std::is_same_v<S, EscortMedian>) return "median";
        else {
          std::ostringstream os;
          os << "fixed:";
          for (int i = 0; i < s.theta.size(); ++i) os << (i ? "," : "") << s.theta[i];
          return os.str();
        }
      },
      strategy);
}

namespace {

EstimationResult run_dphide(const ModelSpec& m, const DivergenceSpec& spec, const Params& theta,
                            std::span<const double> sample, std::span<const double> w,
                            const DphideOptions& opts) {
  const auto d = detail::make_criterion_data(m, spec, theta, sample, w, opts.criterion);
  const auto obj = make_objective(
      [&d](const auto& alpha) { return detail::criterion_value(d, alpha); });
  return maximize(m, theta, obj, opts.solver);
}

}  // namespace

EstimationResult dphide(const ModelSpec& m, const DivergenceSpec& spec, const Params& theta,
                        std::span<const double> sample, const WeightVector& weights,
                        const DphideOptions& opts) {
  if (weights.size() != sample.size()) {
    throw std::invalid_argument("dphide: sample and weight lengths differ");
  }
  return run_dphide(m, spec, theta, sample, weight_span(weights), opts);
}

EstimationResult dphide(const ModelSpec& m, const DivergenceSpec& spec, const Params& theta,
                        std::span<const double> sample, const DphideOptions& opts) {
  return run_dphide(m, spec, theta, sample, {}, opts);
}

}  // namespace dualdiv
