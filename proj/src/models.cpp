#include "dualdiv/models.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace dualdiv {

namespace {

double parse_number(std::string_view s, std::string_view what) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw std::invalid_argument("invalid " + std::string(what) + " '" + std::string(s) + "'");
  }
  return value;
}

void require_positive_hyper(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be a positive finite number");
  }
}

}  // namespace

ModelSpec::ModelSpec(Family f, double hyper) : family_(f), hyper_(hyper) {}

ModelSpec ModelSpec::normal(double sigma) {
  require_positive_hyper(sigma, "normal scale sigma");
  return ModelSpec(Family::normal_known_scale, sigma);
}
ModelSpec ModelSpec::normal_loc_scale() { return ModelSpec(Family::normal_loc_scale, 0.0); }
ModelSpec ModelSpec::log_normal(double sigma) {
  require_positive_hyper(sigma, "log-normal scale sigma");
  return ModelSpec(Family::log_normal, sigma);
}
ModelSpec ModelSpec::exponential() { return ModelSpec(Family::exponential, 0.0); }
ModelSpec ModelSpec::gamma(double shape) {
  require_positive_hyper(shape, "gamma shape k");
  return ModelSpec(Family::gamma, shape);
}
ModelSpec ModelSpec::weibull(double shape) {
  require_positive_hyper(shape, "weibull shape k");
  return ModelSpec(Family::weibull, shape);
}
ModelSpec ModelSpec::pareto() { return ModelSpec(Family::pareto, 0.0); }

ModelSpec ModelSpec::parse(std::string_view text) {
  std::string_view head = text;
  std::string_view tail;
  if (auto colon = text.find(':'); colon != std::string_view::npos) {
    head = text.substr(0, colon);
    tail = text.substr(colon + 1);
  }
  auto hyper_value = [&](std::string_view key, double fallback) {
    if (tail.empty()) return fallback;
    auto eq = tail.find('=');
    if (eq == std::string_view::npos || tail.substr(0, eq) != key) {
      throw std::invalid_argument("model '" + std::string(text) + "': expected " +
                                  std::string(key) + "=<value>");
    }
    return parse_number(tail.substr(eq + 1), key);
  };
  auto no_hyper = [&]() {
    if (!tail.empty()) {
      throw std::invalid_argument("model '" + std::string(head) + "' takes no hyperparameter");
    }
  };
  if (head == "normal") return normal(hyper_value("sigma", 1.0));
  if (head == "normal-loc-scale") { no_hyper(); return normal_loc_scale(); }
  if (head == "lognormal") return log_normal(hyper_value("sigma", 1.0));
  if (head == "exponential") { no_hyper(); return exponential(); }
  if (head == "pareto") { no_hyper(); return pareto(); }
  if (head == "gamma" || head == "weibull") {
    if (tail.empty()) {
      throw std::invalid_argument("model '" + std::string(head) + "' needs a known shape, e.g. " +
                                  std::string(head) + ":k=2");
    }
    const double k = hyper_value("k", 0.0);
    return head == "gamma" ? gamma(k) : weibull(k);
  }
  throw std::invalid_argument("unknown model '" + std::string(text) + "'");
}

std::string ModelSpec::name() const {
  std::ostringstream os;
  switch (family_) {
    case Family::normal_known_scale: os << "normal:sigma=" << hyper_; break;
    case Family::normal_loc_scale: os << "normal-loc-scale"; break;
    case Family::log_normal: os << "lognormal:sigma=" << hyper_; break;
    case Family::exponential: os << "exponential"; break;
    case Family::gamma: os << "gamma:k=" << hyper_; break;
    case Family::weibull: os << "weibull:k=" << hyper_; break;
    case Family::pareto: os << "pareto"; break;
  }
  return os.str();
}

bool ModelSpec::positive_coordinate(int i) const noexcept {
  switch (family_) {
    case Family::normal_known_scale:
    case Family::log_normal:
      return false;
    case Family::normal_loc_scale:
      return i == 1;
    default:
      return true;
  }
}

bool ModelSpec::is_location_family() const noexcept {
  return family_ == Family::normal_known_scale || family_ == Family::normal_loc_scale ||
         family_ == Family::log_normal;
}

bool ModelSpec::valid(const Params& p) const noexcept {
  if (p.size() != dim()) return false;
  for (int i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i])) return false;
    if (positive_coordinate(i) && !(p[i] > 0.0)) return false;
  }
  return true;
}

void ModelSpec::require_valid(const Params& p) const {
  if (!valid(p)) {
    std::ostringstream os;
    os << "parameters (" << p.transpose() << ") outside the domain of " << name();
    throw std::invalid_argument(os.str());
  }
}

Params ModelSpec::params(std::initializer_list<double> values) const {
  Params p(static_cast<Eigen::Index>(values.size()));
  std::copy(values.begin(), values.end(), p.data());
  require_valid(p);
  return p;
}

bool ModelSpec::in_support(double x) const noexcept {
  if (!std::isfinite(x)) return false;
  switch (family_) {
    case Family::normal_known_scale:
    case Family::normal_loc_scale:
      return true;
    case Family::log_normal:
      return x > 0.0;
    case Family::exponential:
      return x >= 0.0;
    case Family::gamma:
    case Family::weibull:
      // x = 0 only carries density for shape 1 (and diverges for shape < 1).
      return hyper_ == 1.0 ? x >= 0.0 : x > 0.0;
    case Family::pareto:
      return x > 1.0;
  }
  return false;
}

bool ModelSpec::in_ratio_domain(double x) const noexcept {
  if (!std::isfinite(x)) return false;
  switch (family_) {
    case Family::normal_known_scale:
    case Family::normal_loc_scale:
      return true;
    case Family::log_normal:
      return x > 0.0;
    case Family::exponential:
    case Family::gamma:
    case Family::weibull:
      return x >= 0.0;
    case Family::pareto:
      return x >= 1.0;
  }
  return false;
}

double ModelSpec::support_lower() const noexcept {
  switch (family_) {
    case Family::normal_known_scale:
    case Family::normal_loc_scale:
      return -std::numeric_limits<double>::infinity();
    case Family::pareto:
      return 1.0;
    default:
      return 0.0;
  }
}

double density(const ModelSpec& m, const Params& p, double x) {
  m.require_valid(p);
  return std::exp(log_density<double>(m, p, x));
}

double density_ratio(const ModelSpec& m, const Params& theta, const Params& alpha, double x) {
  m.require_valid(theta);
  m.require_valid(alpha);
  if (!m.in_ratio_domain(x)) {
    throw std::out_of_range("density ratio evaluated outside the support of " + m.name());
  }
  return std::exp(log_density_ratio<double>(m, theta, alpha, x));
}

double dual_integral(const ModelSpec& m, const DivergenceSpec& spec, const Params& theta,
                     const Params& alpha) {
  m.require_valid(theta);
  m.require_valid(alpha);
  if (spec.is_modified_kl() || spec.is_kl()) {
    throw std::domain_error("dual_integral closed form requires gamma not in {0, 1}");
  }
  return dual_integral<double>(m, spec.gamma(), theta, alpha);
}

double kl_integral(const ModelSpec& m, const Params& theta, const Params& alpha) {
  m.require_valid(theta);
  m.require_valid(alpha);
  return kl_integral<double>(m, theta, alpha);
}

Params mle(const ModelSpec& m, std::span<const double> sample) {
  const std::vector<double> ones(sample.size(), 1.0);
  return mle(m, sample, ones);
}

Params mle(const ModelSpec& m, std::span<const double> sample, std::span<const double> weights) {
  if (sample.empty()) throw std::invalid_argument("mle: empty sample");
  if (weights.size() != sample.size()) throw std::invalid_argument("mle: weight length mismatch");
  double wsum = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (!m.in_support(sample[i])) {
      std::ostringstream os;
      os << "mle: observation " << sample[i] << " outside the support of " << m.name();
      throw std::invalid_argument(os.str());
    }
    if (!(weights[i] >= 0.0)) throw std::invalid_argument("mle: negative weight");
    wsum += weights[i];
  }
  if (!(wsum > 0.0)) throw std::invalid_argument("mle: weights sum to zero");

  auto wmean = [&](auto&& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) acc += weights[i] * f(sample[i]);
    return acc / wsum;
  };
  const double k = m.hyper();
  Params p(m.dim());
  switch (m.family()) {
    case Family::normal_known_scale:
      p[0] = wmean([](double x) { return x; });
      break;
    case Family::normal_loc_scale: {
      const double mu = wmean([](double x) { return x; });
      p[0] = mu;
      p[1] = std::sqrt(wmean([mu](double x) { return (x - mu) * (x - mu); }));
      break;
    }
    case Family::log_normal:
      p[0] = wmean([](double x) { return std::log(x); });
      break;
    case Family::exponential:
      p[0] = 1.0 / wmean([](double x) { return x; });
      break;
    case Family::gamma:
      p[0] = k / wmean([](double x) { return x; });
      break;
    case Family::weibull:
      p[0] = std::pow(wmean([k](double x) { return std::pow(x, k); }), 1.0 / k);
      break;
    case Family::pareto:
      p[0] = 1.0 / wmean([](double x) { return std::log(x); });
      break;
  }
  if (!m.valid(p)) throw std::invalid_argument("mle: sample does not determine a valid estimate");
  return p;
}

Sample draw_sample(const ModelSpec& m, const Params& p, std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("draw_sample: n must be >= 1");
  m.require_valid(p);
  Sample out(n);
  switch (m.family()) {
    case Family::normal_known_scale: {
      std::normal_distribution<double> d(p[0], m.hyper());
      for (auto& x : out) x = d(rng);
      break;
    }
    case Family::normal_loc_scale: {
      std::normal_distribution<double> d(p[0], p[1]);
      for (auto& x : out) x = d(rng);
      break;
    }
    case Family::log_normal: {
      std::lognormal_distribution<double> d(p[0], m.hyper());
      for (auto& x : out) x = d(rng);
      break;
    }
    case Family::exponential: {
      std::exponential_distribution<double> d(p[0]);
      for (auto& x : out) x = d(rng);
      break;
    }
    case Family::gamma: {
      std::gamma_distribution<double> d(m.hyper(), 1.0 / p[0]);
      for (auto& x : out) x = d(rng);
      break;
    }
    case Family::weibull: {
      std::weibull_distribution<double> d(m.hyper(), p[0]);
      for (auto& x : out) x = d(rng);
      break;
    }
    case Family::pareto: {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (auto& x : out) x = std::pow(1.0 - u(rng), -1.0 / p[0]);
      break;
    }
  }
  return out;
}

Sample draw_contaminated(const ModelSpec& m, const Params& p, double eps,
                         const Contaminant& contaminant, std::size_t n, Rng& rng) {
  if (!(eps >= 0.0 && eps <= 1.0)) {
    throw std::invalid_argument("draw_contaminated: eps must lie in [0, 1]");
  }
  if (n == 0) throw std::invalid_argument("draw_contaminated: n must be >= 1");
  m.require_valid(p);
  if (const auto* mc = std::get_if<ModelContaminant>(&contaminant)) mc->model.require_valid(mc->params);

  std::bernoulli_distribution pick(eps);
  Sample out(n);
  for (auto& x : out) {
    if (pick(rng)) {
      if (const auto* dirac = std::get_if<DiracAt>(&contaminant)) {
        x = dirac->location;
      } else {
        const auto& mc = std::get<ModelContaminant>(contaminant);
        x = draw_sample(mc.model, mc.params, 1, rng)[0];
      }
    } else {
      x = draw_sample(m, p, 1, rng)[0];
    }
  }
  return out;
}

}  // namespace dualdiv
