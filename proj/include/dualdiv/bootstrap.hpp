#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dualdiv/estimation.hpp"
#include "dualdiv/rng.hpp"

namespace dualdiv {

/// Exchangeable bootstrap weights (nonnegative, summing to n).
class WeightScheme {
 public:
  enum class Kind { efron_multinomial, bayesian_dirichlet1, dirichlet4, fixed };
  /// Must return n nonnegative weights summing to n.
  using Generator = std::function<std::vector<double>(std::size_t n, Rng& rng)>;

  /// Multinomial(n; 1/n, ..., 1/n) counts, c = 1.
  static WeightScheme efron();
  /// n times a Dirichlet(1, ..., 1) draw, c = 1.
  static WeightScheme bayesian();
  /// n times a Dirichlet(4, ..., 4) draw, c = 1/2.
  static WeightScheme dirichlet4();
  /// User generator with its limit constant c.
  static WeightScheme fixed(double c, Generator generator);
  /// All weights equal to one (c = 1); every replicate is the plain estimate.
  static WeightScheme degenerate();

  /// "efron", "bayesian", "dirichlet4".
  static WeightScheme parse(std::string_view text);

  Kind kind() const noexcept { return kind_; }
  /// Limit of (1/n) sum (W_i - 1)^2 is c^2.
  double c() const noexcept { return c_; }
  std::string name() const;

 private:
  WeightScheme(Kind kind, double c, Generator generator);
  friend WeightVector gen_weights(const WeightScheme& scheme, std::size_t n, Rng& rng);
  Kind kind_;
  double c_;
  Generator generator_;
};

WeightVector gen_weights(const WeightScheme& scheme, std::size_t n, Rng& rng);

struct WeightReport {
  double mean_w1;        // E[W_n1], pooled over coordinates
  double c2_hat;         // mean of (1/n) sum (W_i - 1)^2
  double max_tail_stat;  // max over t >= tail_from of t^2 P(W_n1 > t)
};

/// Monte Carlo check of the weight conditions; reps >= 100.
WeightReport check_w_conditions(const WeightScheme& scheme, std::size_t n, int reps, Rng& rng,
                                double tail_from = 3.0);

struct BootstrapOptions {
  DphideOptions dphide;
  int threads = 1;
  double max_failure_fraction = 0.2;
};

struct BootstrapResult {
  std::vector<Params> replicates;  // converged replicates, in draw order
  int failures = 0;

  /// Coordinate i of every replicate.
  std::vector<double> coordinate(int i) const;
};

class BootstrapFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// B weighted estimates, replicate b using weights drawn from the stream
/// derive_seed(seed, {b}). Replicates whose solver does not converge are
/// dropped and counted; more than max_failure_fraction of them throws
/// BootstrapFailure.
BootstrapResult bootstrap_distribution(const ModelSpec& m, const DivergenceSpec& spec,
                                       const Params& theta, std::span<const double> sample,
                                       const WeightScheme& scheme, int B, std::uint64_t seed,
                                       const BootstrapOptions& opts = {});
/// As above with the stream seed taken from rng.
BootstrapResult bootstrap_distribution(const ModelSpec& m, const DivergenceSpec& spec,
                                       const Params& theta, std::span<const double> sample,
                                       const WeightScheme& scheme, int B, Rng& rng,
                                       const BootstrapOptions& opts = {});

/// Generic driver: replicate b calls estimate(W_b) with W_b drawn from the
/// stream derive_seed(seed, {b}). Failure accounting as above.
BootstrapResult bootstrap_replicates(const WeightScheme& scheme, std::size_t n, int B,
                                     std::uint64_t seed,
                                     const std::function<EstimationResult(const WeightVector&)>& estimate,
                                     int threads = 1, double max_failure_fraction = 0.2);

/// inf{x : F_B(x) >= eps}, i.e. the ceil(eps * B)-th order statistic.
double empirical_quantile(std::span<const double> values, double eps);

enum class IntervalKind { percentile, hybrid };

struct ConfidenceInterval {
  double lower;
  double upper;
  double level;
  IntervalKind kind;

  bool contains(double x) const noexcept { return lower <= x && x <= upper; }
};

/// [a + (q_{eps/2} - a)/c, a + (q_{1-eps/2} - a)/c] with a = alpha_hat.
ConfidenceInterval percentile_ci(double alpha_hat, std::span<const double> replicates, double c,
                                 double eps);
/// [a - (q_{1-eps/2} - a)/c, a - (q_{eps/2} - a)/c].
ConfidenceInterval hybrid_ci(double alpha_hat, std::span<const double> replicates, double c,
                             double eps, std::size_t n);

IntervalKind parse_interval_kind(std::string_view text);

}  // namespace dualdiv
