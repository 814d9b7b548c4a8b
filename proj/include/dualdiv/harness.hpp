#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dualdiv/bootstrap.hpp"
#include "dualdiv/censoring.hpp"
#include "dualdiv/estimation.hpp"

namespace dualdiv {

struct ContaminationSpec {
  double eps;
  Contaminant contaminant;
};

struct CensoringSpec {
  ModelSpec model;
  Params params;
};

/// What the MSE cells average. `bootstrap` averages (a* - theta0)^2 over the
/// B weighted-bootstrap replicates of every run, `point` uses the estimate
/// from the original sample only.
enum class MseTarget { bootstrap, point };

struct SimConfig {
  ModelSpec model = ModelSpec::normal();
  Params true_params;  // empty: family default
  std::vector<double> gammas{-1.0, 0.0, 0.5, 1.0, 2.0};
  std::vector<std::size_t> sample_sizes{25, 50, 75, 100, 150, 200};
  int reps = 500;
  int B = 500;
  WeightScheme scheme = WeightScheme::bayesian();
  double level = 0.95;
  IntervalKind interval = IntervalKind::percentile;
  EscortStrategy escort = EscortMle{};
  std::optional<ContaminationSpec> contamination;
  std::optional<CensoringSpec> censoring;
  std::uint64_t seed = 20100601;
  int threads = 1;
  MseTarget mse_target = MseTarget::bootstrap;
  KlConvention kl_convention = KlConvention::printed;

  /// true_params, or the family default when unset.
  Params theta0() const;
  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

Params default_true_params(const ModelSpec& m);

struct CellRecord {
  std::optional<double> gamma;  // unset for baselines that do not depend on gamma
  std::size_t n;
  std::string metric;
  double value;
  double stderr_;
  int failures;
  bool flagged = false;  // more than 20% of the runs failed
};

struct Provenance {
  std::uint64_t seed = 0;
  std::string config_hash;
  double wall_seconds = 0.0;
  int threads = 1;
};

struct ExperimentReport {
  std::string experiment;
  std::vector<CellRecord> records;
  Provenance provenance;
};

ExperimentReport run_mse_experiment(const SimConfig& cfg);
ExperimentReport run_coverage_experiment(const SimConfig& cfg);
ExperimentReport run_censored_experiment(const SimConfig& cfg);

struct EscortCurve {
  std::string escort;
  double gamma;
  Params theta;
  std::vector<double> alpha;
  std::vector<double> value;
  double argmax;
};

/// Criterion curves alpha -> P_n h(theta, alpha) on one sample of size
/// cfg.sample_sizes[0] (contaminated per cfg), for each escort and gamma.
std::vector<EscortCurve> run_escort_study(const SimConfig& cfg, const std::vector<double>& alpha_grid,
                                          const std::vector<EscortStrategy>& escorts);

/// Evenly spaced grid lo, lo + step, ..., up to hi inclusive.
std::vector<double> make_grid(double lo, double hi, double step);

/// gamma,n,metric,value,stderr,failures with 10 significant digits.
void write_csv(const ExperimentReport& report, std::ostream& os);
/// One aligned table per metric, gamma rows by n columns, 4 decimals.
void write_table(const ExperimentReport& report, std::ostream& os);
/// Seed, config hash, wall time and thread count as JSON.
void write_provenance(const ExperimentReport& report, std::ostream& os);

/// escort,gamma,alpha,value rows.
void write_curves_csv(const std::vector<EscortCurve>& curves, std::ostream& os);
void write_curves_table(const std::vector<EscortCurve>& curves, std::ostream& os);

/// Canonical key = value text of a configuration; config_hash hashes it.
std::string config_text(const SimConfig& cfg);
std::string config_hash(const SimConfig& cfg);

}  // namespace dualdiv
