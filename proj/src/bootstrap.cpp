#include "dualdiv/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "dualdiv/parallel.hpp"

namespace dualdiv {

namespace {

std::vector<double> multinomial_counts(std::size_t n, Rng& rng) {
  std::vector<double> w(n, 0.0);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t i = 0; i < n; ++i) w[pick(rng)] += 1.0;
  return w;
}

std::vector<double> scaled_dirichlet(std::size_t n, double concentration, Rng& rng) {
  std::gamma_distribution<double> g(concentration, 1.0);
  std::vector<double> w(n);
  double sum = 0.0;
  for (auto& v : w) {
    v = g(rng);
    sum += v;
  }
  // divide first so that n = 1 gives exactly 1
  for (auto& v : w) v = v / sum * static_cast<double>(n);
  return w;
}

}  // namespace

WeightScheme::WeightScheme(Kind kind, double c, Generator generator)
    : kind_(kind), c_(c), generator_(std::move(generator)) {}

WeightScheme WeightScheme::efron() {
  return WeightScheme(Kind::efron_multinomial, 1.0, multinomial_counts);
}

WeightScheme WeightScheme::bayesian() {
  return WeightScheme(Kind::bayesian_dirichlet1, 1.0,
                      [](std::size_t n, Rng& rng) { return scaled_dirichlet(n, 1.0, rng); });
}

WeightScheme WeightScheme::dirichlet4() {
  return WeightScheme(Kind::dirichlet4, 0.5,
                      [](std::size_t n, Rng& rng) { return scaled_dirichlet(n, 4.0, rng); });
}

WeightScheme WeightScheme::fixed(double c, Generator generator) {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("scheme constant c must be positive");
  if (!generator) throw std::invalid_argument("fixed weight scheme needs a generator");
  return WeightScheme(Kind::fixed, c, std::move(generator));
}

WeightScheme WeightScheme::degenerate() {
  return fixed(1.0, [](std::size_t n, Rng&) { return std::vector<double>(n, 1.0); });
}

WeightScheme WeightScheme::parse(std::string_view text) {
  if (text == "efron" || text == "multinomial") return efron();
  if (text == "bayesian" || text == "dirichlet1") return bayesian();
  if (text == "dirichlet4") return dirichlet4();
  throw std::invalid_argument("unknown weight scheme '" + std::string(text) +
                              "' (efron, bayesian, dirichlet4)");
}

std::string WeightScheme::name() const {
  switch (kind_) {
    case Kind::efron_multinomial: return "efron";
    case Kind::bayesian_dirichlet1: return "bayesian";
    case Kind::dirichlet4: return "dirichlet4";
    case Kind::fixed: break;
  }
  std::ostringstream os;
  os << "fixed(c=" << c_ << ")";
  return os.str();
}

WeightVector gen_weights(const WeightScheme& scheme, std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("gen_weights: n must be >= 1");
  std::vector<double> w = scheme.generator_(n, rng);
  if (w.size() != n) throw std::runtime_error("weight generator returned the wrong length");
  return WeightVector(std::move(w));
}

WeightReport check_w_conditions(const WeightScheme& scheme, std::size_t n, int reps, Rng& rng,
                                double tail_from) {
  if (reps < 100) throw std::invalid_argument("check_w_conditions: reps must be >= 100");
  double mean = 0.0;
  double c2 = 0.0;
  std::vector<double> pooled;
  pooled.reserve(n * static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    const WeightVector w = gen_weights(scheme, n, rng);
    double ss = 0.0;
    for (double v : w.values()) {
      ss += (v - 1.0) * (v - 1.0);
      mean += v;
      pooled.push_back(v);
    }
    c2 += ss / static_cast<double>(n);
  }
  const double total = static_cast<double>(pooled.size());
  std::sort(pooled.begin(), pooled.end());
  double tail = 0.0;
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    const double t = pooled[i];
    if (t < tail_from) continue;
    // P(W > t) from the sorted pool
    const auto above = pooled.end() - std::upper_bound(pooled.begin(), pooled.end(), t);
    tail = std::max(tail, t * t * static_cast<double>(above) / total);
  }
  return {mean / total, c2 / reps, tail};
}

std::vector<double> BootstrapResult::coordinate(int i) const {
  std::vector<double> out;
  out.reserve(replicates.size());
  for (const auto& p : replicates) out.push_back(p[i]);
  return out;
}

BootstrapResult bootstrap_replicates(const WeightScheme& scheme, std::size_t n, int B,
                                     std::uint64_t seed,
                                     const std::function<EstimationResult(const WeightVector&)>& estimate,
                                     int threads, double max_failure_fraction) {
  if (B < 1) throw std::invalid_argument("bootstrap: B must be >= 1");
  std::vector<std::optional<Params>> slots(static_cast<std::size_t>(B));
  parallel_for(slots.size(), threads, [&](std::size_t b) {
    Rng rng = make_rng(seed, {b});
    const WeightVector w = gen_weights(scheme, n, rng);
    try {
      const EstimationResult r = estimate(w);
      if (r.converged) slots[b] = r.alpha_hat;
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      // counted as a failed replicate
    }
  });
  BootstrapResult out;
  for (auto& s : slots) {
    if (s) out.replicates.push_back(std::move(*s));
    else ++out.failures;
  }
  if (out.failures > max_failure_fraction * B) {
    std::ostringstream os;
    os << out.failures << " of " << B << " bootstrap replicates failed";
    throw BootstrapFailure(os.str());
  }
  return out;
}

BootstrapResult bootstrap_distribution(const ModelSpec& m, const DivergenceSpec& spec,
                                       const Params& theta, std::span<const double> sample,
                                       const WeightScheme& scheme, int B, std::uint64_t seed,
                                       const BootstrapOptions& opts) {
  return bootstrap_replicates(
      scheme, sample.size(), B, seed,
      [&](const WeightVector& w) { return dphide(m, spec, theta, sample, w, opts.dphide); },
      opts.threads, opts.max_failure_fraction);
}

BootstrapResult bootstrap_distribution(const ModelSpec& m, const DivergenceSpec& spec,
                                       const Params& theta, std::span<const double> sample,
                                       const WeightScheme& scheme, int B, Rng& rng,
                                       const BootstrapOptions& opts) {
  const std::uint64_t seed = rng();
  return bootstrap_distribution(m, spec, theta, sample, scheme, B, seed, opts);
}

double empirical_quantile(std::span<const double> values, double eps) {
  if (values.empty()) throw std::invalid_argument("empirical_quantile: empty input");
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("empirical_quantile: eps must lie in (0, 1]");
  const double B = static_cast<double>(values.size());
  // guard against eps * B landing a rounding error above an integer
  auto k = static_cast<std::size_t>(std::ceil(eps * B - 1e-9 * B));
  k = std::clamp<std::size_t>(k, 1, values.size());
  std::vector<double> v(values.begin(), values.end());
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end());
  return v[k - 1];
}

namespace {

void check_ci_args(std::span<const double> replicates, double c, double eps) {
  if (replicates.empty()) throw std::invalid_argument("confidence interval: no replicates");
  if (!(c > 0.0)) throw std::invalid_argument("confidence interval: c must be positive");
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("confidence interval: eps must lie in (0, 1)");
}

}  // namespace

ConfidenceInterval percentile_ci(double alpha_hat, std::span<const double> replicates, double c,
                                 double eps) {
  check_ci_args(replicates, c, eps);
  const double lo = empirical_quantile(replicates, eps / 2.0);
  const double hi = empirical_quantile(replicates, 1.0 - eps / 2.0);
  return {alpha_hat + (lo - alpha_hat) / c, alpha_hat + (hi - alpha_hat) / c, 1.0 - eps,
          IntervalKind::percentile};
}

ConfidenceInterval hybrid_ci(double alpha_hat, std::span<const double> replicates, double c,
                             double eps, std::size_t n) {
  check_ci_args(replicates, c, eps);
  if (n == 0) throw std::invalid_argument("confidence interval: n must be >= 1");
  const double rn = std::sqrt(static_cast<double>(n));
  const double q_lo = rn / c * (empirical_quantile(replicates, eps / 2.0) - alpha_hat);
  const double q_hi = rn / c * (empirical_quantile(replicates, 1.0 - eps / 2.0) - alpha_hat);
  return {alpha_hat - q_hi / rn, alpha_hat - q_lo / rn, 1.0 - eps, IntervalKind::hybrid};
}

IntervalKind parse_interval_kind(std::string_view text) {
  if (text == "percentile") return IntervalKind::percentile;
  if (text == "hybrid") return IntervalKind::hybrid;
  throw std::invalid_argument("unknown interval kind '" + std::string(text) + "' (percentile, hybrid)");
}

}  // namespace dualdiv
