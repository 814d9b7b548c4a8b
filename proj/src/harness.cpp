#include "dualdiv/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "dualdiv/config.hpp"
#include "dualdiv/parallel.hpp"

namespace dualdiv {

Params default_true_params(const ModelSpec& m) {
  switch (m.family()) {
    case Family::normal_known_scale:
    case Family::log_normal:
      return m.params({0.0});
    case Family::normal_loc_scale:
      return m.params({0.0, 1.0});
    default:
      return m.params({1.0});
  }
}

Params SimConfig::theta0() const {
  return true_params.size() == 0 ? default_true_params(model) : true_params;
}

void SimConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument("field '" + field + "': " + why);
  };
  if (true_params.size() != 0 && !model.valid(true_params)) {
    fail("true_params", "outside the parameter domain of " + model.name());
  }
  if (gammas.empty()) fail("gammas", "at least one value required");
  for (double g : gammas) {
    if (!std::isfinite(g)) fail("gammas", "values must be finite");
  }
  if (sample_sizes.empty()) fail("sample_sizes", "at least one size required");
  for (auto n : sample_sizes) {
    if (n < 1) fail("sample_sizes", "sizes must be >= 1");
  }
  if (reps < 1) fail("reps", "must be >= 1");
  if (B < 1) fail("B", "must be >= 1");
  if (!(level > 0.0 && level < 1.0)) fail("level", "must lie in (0, 1)");
  if (threads < 1) fail("threads", "must be >= 1");
  if (const auto* f = std::get_if<EscortFixed>(&escort); f && !model.valid(f->theta)) {
    fail("escort", "fixed escort outside the parameter domain of " + model.name());
  }
}

namespace {

using Clock = std::chrono::steady_clock;

double squared_error(const Params& a, const Params& b) { return (a - b).squaredNorm(); }

struct Accumulator {
  std::vector<double> values;
  int failures = 0;

  void add(std::optional<double> v) {
    if (v) values.push_back(*v);
    else ++failures;
  }
};

CellRecord summarize(std::optional<double> gamma, std::size_t n, const std::string& metric,
                     const Accumulator& acc, int reps, bool proportion) {
  CellRecord rec{gamma, n, metric, std::numeric_limits<double>::quiet_NaN(), 0.0, acc.failures};
  const auto k = static_cast<double>(acc.values.size());
  if (k > 0) {
    const double mean = std::accumulate(acc.values.begin(), acc.values.end(), 0.0) / k;
    rec.value = mean;
    if (proportion) {
      rec.stderr_ = std::sqrt(mean * (1.0 - mean) / k);
    } else if (k > 1) {
      double ss = 0.0;
      for (double v : acc.values) ss += (v - mean) * (v - mean);
      rec.stderr_ = std::sqrt(ss / (k - 1.0) / k);
    }
  }
  rec.flagged = acc.failures > 0.2 * reps;
  return rec;
}

Sample draw_lifetimes(const SimConfig& cfg, const Params& theta0, std::size_t n, Rng& rng) {
  if (cfg.contamination) {
    return draw_contaminated(cfg.model, theta0, cfg.contamination->eps,
                             cfg.contamination->contaminant, n, rng);
  }
  return draw_sample(cfg.model, theta0, n, rng);
}

DphideOptions dphide_options(const SimConfig& cfg) {
  DphideOptions o;
  o.criterion.kl_convention = cfg.kl_convention;
  return o;
}

std::string metric_name(const std::string& base, int coord, int dim) {
  return dim == 1 ? base : base + "_" + std::to_string(coord);
}

ConfidenceInterval make_ci(const SimConfig& cfg, double center, const std::vector<double>& reps,
                           std::size_t n) {
  const double eps = 1.0 - cfg.level;
  return cfg.interval == IntervalKind::percentile ? percentile_ci(center, reps, cfg.scheme.c(), eps)
                                                  : hybrid_ci(center, reps, cfg.scheme.c(), eps, n);
}

// Runs body(ni, rep) for every (sample size, replication) pair in parallel.
// Each call fills slot [ni * reps + rep] of its own output.
template <typename Body>
void for_each_run(const SimConfig& cfg, Body&& body) {
  const std::size_t reps = static_cast<std::size_t>(cfg.reps);
  parallel_for(cfg.sample_sizes.size() * reps, cfg.threads,
               [&](std::size_t k) { body(k / reps, k % reps); });
}

Provenance provenance(const SimConfig& cfg, Clock::time_point start) {
  Provenance p;
  p.seed = cfg.seed;
  p.config_hash = config_hash(cfg);
  p.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  p.threads = cfg.threads;
  return p;
}

// Per-run results for every gamma: squared errors and coverage flags.
struct RunResult {
  std::vector<std::optional<double>> mse;
  std::vector<std::vector<std::optional<double>>> cover;  // [gamma][coord]
  std::optional<double> amle_mse;
  std::optional<double> censored_fraction;
};

}  // namespace

ExperimentReport run_mse_experiment(const SimConfig& cfg) {
  cfg.validate();
  if (cfg.censoring) throw std::invalid_argument("run_mse_experiment: use run_censored_experiment for censored data");
  const auto start = Clock::now();
  const Params theta0 = cfg.theta0();
  const std::size_t G = cfg.gammas.size();
  const auto opts = dphide_options(cfg);
  std::vector<RunResult> runs(cfg.sample_sizes.size() * static_cast<std::size_t>(cfg.reps));

  for_each_run(cfg, [&](std::size_t ni, std::size_t rep) {
    RunResult& out = runs[ni * static_cast<std::size_t>(cfg.reps) + rep];
    out.mse.assign(G, std::nullopt);
    Rng rng = make_rng(cfg.seed, {ni, rep, 0});
    const Sample x = draw_lifetimes(cfg, theta0, cfg.sample_sizes[ni], rng);
    Params theta;
    try {
      theta = escort(cfg.model, x, cfg.escort);
    } catch (const std::invalid_argument&) {
      return;
    }
    const std::uint64_t boot_seed = derive_seed(cfg.seed, {ni, rep, 1});
    for (std::size_t gi = 0; gi < G; ++gi) {
      const DivergenceSpec spec(cfg.gammas[gi]);
      try {
        if (cfg.mse_target == MseTarget::point) {
          const auto r = dphide(cfg.model, spec, theta, x, opts);
          if (r.converged) out.mse[gi] = squared_error(r.alpha_hat, theta0);
        } else {
          BootstrapOptions bo;
          bo.dphide = opts;
          const auto br = bootstrap_distribution(cfg.model, spec, theta, x, cfg.scheme, cfg.B,
                                                 boot_seed, bo);
          double acc = 0.0;
          for (const auto& a : br.replicates) acc += squared_error(a, theta0);
          out.mse[gi] = acc / static_cast<double>(br.replicates.size());
        }
      } catch (const std::invalid_argument&) {
        throw;
      } catch (const std::exception&) {
        // failed run
      }
    }
  });

  ExperimentReport rep;
  rep.experiment = "mse";
  for (std::size_t gi = 0; gi < G; ++gi) {
    for (std::size_t ni = 0; ni < cfg.sample_sizes.size(); ++ni) {
      Accumulator acc;
      for (int r = 0; r < cfg.reps; ++r) acc.add(runs[ni * static_cast<std::size_t>(cfg.reps) + static_cast<std::size_t>(r)].mse[gi]);
      rep.records.push_back(summarize(cfg.gammas[gi], cfg.sample_sizes[ni], "mse", acc, cfg.reps, false));
    }
  }
  rep.provenance = provenance(cfg, start);
  return rep;
}

ExperimentReport run_coverage_experiment(const SimConfig& cfg) {
  cfg.validate();
  if (cfg.censoring) throw std::invalid_argument("run_coverage_experiment: use run_censored_experiment for censored data");
  const auto start = Clock::now();
  const Params theta0 = cfg.theta0();
  const int dim = cfg.model.dim();
  const std::size_t G = cfg.gammas.size();
  const auto opts = dphide_options(cfg);
  std::vector<RunResult> runs(cfg.sample_sizes.size() * static_cast<std::size_t>(cfg.reps));

  for_each_run(cfg, [&](std::size_t ni, std::size_t rep) {
    RunResult& out = runs[ni * static_cast<std::size_t>(cfg.reps) + rep];
    out.cover.assign(G, std::vector<std::optional<double>>(static_cast<std::size_t>(dim)));
    const std::size_t n = cfg.sample_sizes[ni];
    Rng rng = make_rng(cfg.seed, {ni, rep, 0});
    const Sample x = draw_lifetimes(cfg, theta0, n, rng);
    Params theta;
    try {
      theta = escort(cfg.model, x, cfg.escort);
    } catch (const std::invalid_argument&) {
      return;
    }
    const std::uint64_t boot_seed = derive_seed(cfg.seed, {ni, rep, 1});
    for (std::size_t gi = 0; gi < G; ++gi) {
      const DivergenceSpec spec(cfg.gammas[gi]);
      try {
        const auto point = dphide(cfg.model, spec, theta, x, opts);
        if (!point.converged) continue;
        BootstrapOptions bo;
        bo.dphide = opts;
        const auto br = bootstrap_distribution(cfg.model, spec, theta, x, cfg.scheme, cfg.B, boot_seed, bo);
        for (int i = 0; i < dim; ++i) {
          const auto ci = make_ci(cfg, point.alpha_hat[i], br.coordinate(i), n);
          out.cover[gi][static_cast<std::size_t>(i)] = ci.contains(theta0[i]) ? 1.0 : 0.0;
        }
      } catch (const std::invalid_argument&) {
        throw;
      } catch (const std::exception&) {
      }
    }
  });

  ExperimentReport rep;
  rep.experiment = "coverage";
  for (std::size_t gi = 0; gi < G; ++gi) {
    for (int i = 0; i < dim; ++i) {
      for (std::size_t ni = 0; ni < cfg.sample_sizes.size(); ++ni) {
        Accumulator acc;
        for (int r = 0; r < cfg.reps; ++r) {
          acc.add(runs[ni * static_cast<std::size_t>(cfg.reps) + static_cast<std::size_t>(r)].cover[gi][static_cast<std::size_t>(i)]);
        }
        rep.records.push_back(summarize(cfg.gammas[gi], cfg.sample_sizes[ni],
                                        metric_name("coverage", i, dim), acc, cfg.reps, true));
      }
    }
  }
  rep.provenance = provenance(cfg, start);
  return rep;
}

ExperimentReport run_censored_experiment(const SimConfig& cfg) {
  cfg.validate();
  if (!cfg.censoring) throw std::invalid_argument("field 'censoring': required for the censored experiment");
  if (cfg.model.dim() != 1) throw std::invalid_argument("field 'model': censored experiment needs a one-parameter family");
  const auto start = Clock::now();
  const Params theta0 = cfg.theta0();
  const std::size_t G = cfg.gammas.size();
  const auto opts = dphide_options(cfg);
  const bool exponential = cfg.model.family() == Family::exponential;
  std::vector<RunResult> runs(cfg.sample_sizes.size() * static_cast<std::size_t>(cfg.reps));

  for_each_run(cfg, [&](std::size_t ni, std::size_t rep) {
    RunResult& out = runs[ni * static_cast<std::size_t>(cfg.reps) + rep];
    out.mse.assign(G, std::nullopt);
    out.cover.assign(G, std::vector<std::optional<double>>(1));
    const std::size_t n = cfg.sample_sizes[ni];
    Rng rng = make_rng(cfg.seed, {ni, rep, 0});
    const Sample t = draw_lifetimes(cfg, theta0, n, rng);
    const Sample c = draw_sample(cfg.censoring->model, cfg.censoring->params, n, rng);
    std::vector<double> y(n);
    std::vector<int> delta(n);
    std::size_t censored = 0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = std::min(t[i], c[i]);
      delta[i] = t[i] <= c[i] ? 1 : 0;
      censored += 1 - static_cast<std::size_t>(delta[i]);
    }
    out.censored_fraction = static_cast<double>(censored) / static_cast<double>(n);
    std::optional<CensoredSample> cs;
    try {
      cs.emplace(std::move(y), std::move(delta));
    } catch (const std::invalid_argument&) {
      return;  // every observation censored
    }
    const KMWeights kw = km_weights(*cs);
    Params theta;
    try {
      if (std::holds_alternative<EscortMle>(cfg.escort)) {
        if (exponential) {
          theta = exp_mle_censored(*cs);
        } else {
          std::vector<double> w(kw.w);
          for (auto& v : w) v *= static_cast<double>(n);
          theta = mle(cfg.model, cs->y(), w);
        }
      } else {
        theta = escort(cfg.model, cs->y(), cfg.escort);
      }
    } catch (const std::invalid_argument&) {
      return;
    }
    if (exponential) out.amle_mse = squared_error(amle(*cs), theta0);

    const std::uint64_t boot_seed = derive_seed(cfg.seed, {ni, rep, 1});
    for (std::size_t gi = 0; gi < G; ++gi) {
      const DivergenceSpec spec(cfg.gammas[gi]);
      try {
        const auto point = censored_dphide(cfg.model, spec, theta, *cs, kw, opts);
        if (!point.converged) continue;
        const auto br = bootstrap_replicates(
            cfg.scheme, n, cfg.B, boot_seed,
            [&](const WeightVector& w) {
              return censored_dphide(cfg.model, spec, theta, *cs, km_bootstrap_weights(*cs, w), opts);
            });
        if (cfg.mse_target == MseTarget::point) {
          out.mse[gi] = squared_error(point.alpha_hat, theta0);
        } else {
          double acc = 0.0;
          for (const auto& a : br.replicates) acc += squared_error(a, theta0);
          out.mse[gi] = acc / static_cast<double>(br.replicates.size());
        }
        const auto ci = make_ci(cfg, point.alpha_hat[0], br.coordinate(0), n);
        out.cover[gi][0] = ci.contains(theta0[0]) ? 1.0 : 0.0;
      } catch (const std::invalid_argument&) {
        throw;
      } catch (const std::exception&) {
      }
    }
  });

  ExperimentReport rep;
  rep.experiment = "censored";
  const auto reps = static_cast<std::size_t>(cfg.reps);
  for (const char* metric : {"mse", "coverage"}) {
    const bool is_mse = std::string(metric) == "mse";
    for (std::size_t gi = 0; gi < G; ++gi) {
      for (std::size_t ni = 0; ni < cfg.sample_sizes.size(); ++ni) {
        Accumulator acc;
        for (std::size_t r = 0; r < reps; ++r) {
          const auto& run = runs[ni * reps + r];
          acc.add(is_mse ? run.mse[gi] : run.cover[gi][0]);
        }
        rep.records.push_back(summarize(cfg.gammas[gi], cfg.sample_sizes[ni], metric, acc, cfg.reps, !is_mse));
      }
    }
  }
  for (std::size_t ni = 0; ni < cfg.sample_sizes.size(); ++ni) {
    Accumulator amle_acc, frac_acc;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& run = runs[ni * reps + r];
      if (exponential) amle_acc.add(run.amle_mse);
      frac_acc.add(run.censored_fraction);
    }
    if (exponential) {
      rep.records.push_back(summarize(std::nullopt, cfg.sample_sizes[ni], "mse_amle", amle_acc, cfg.reps, false));
    }
    rep.records.push_back(summarize(std::nullopt, cfg.sample_sizes[ni], "censored_fraction", frac_acc, cfg.reps, false));
  }
  rep.provenance = provenance(cfg, start);
  return rep;
}

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw std::invalid_argument("grid: need lo <= hi and step > 0");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) g[i] = lo + static_cast<double>(i) * step;
  return g;
}

std::vector<EscortCurve> run_escort_study(const SimConfig& cfg, const std::vector<double>& alpha_grid,
                                          const std::vector<EscortStrategy>& escorts) {
  cfg.validate();
  if (cfg.model.dim() != 1) throw std::invalid_argument("field 'model': escort study needs a one-parameter family");
  if (alpha_grid.empty()) throw std::invalid_argument("field 'alpha_grid': empty grid");
  if (escorts.empty()) throw std::invalid_argument("field 'escorts': at least one escort required");
  const Params theta0 = cfg.theta0();
  Rng rng = make_rng(cfg.seed, {0});
  const Sample x = draw_lifetimes(cfg, theta0, cfg.sample_sizes.front(), rng);
  CriterionOptions copts;
  copts.kl_convention = cfg.kl_convention;

  std::vector<EscortCurve> curves;
  for (const auto& e : escorts) {
    const Params theta = escort(cfg.model, x, e);
    for (double g : cfg.gammas) {
      const DivergenceSpec spec(g);
      EscortCurve c{escort_name(e), g, theta, alpha_grid, {}, std::numeric_limits<double>::quiet_NaN()};
      c.value.resize(alpha_grid.size());
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
        Params a(1);
        a[0] = alpha_grid[i];
        const double v = cfg.model.valid(a) ? criterion(cfg.model, spec, theta, a, x, copts)
                                            : -std::numeric_limits<double>::infinity();
        c.value[i] = v;
        const bool better = v > best || (v == best && std::isfinite(v) &&
                                          std::abs(a[0] - theta[0]) < std::abs(c.argmax - theta[0]));
        if (better) {
          best = v;
          c.argmax = a[0];
        }
      }
      curves.push_back(std::move(c));
    }
  }
  return curves;
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string gamma_label(const std::optional<double>& g) { return g ? fmt("%.10g", *g) : "NA"; }

}  // namespace

void write_csv(const ExperimentReport& report, std::ostream& os) {
  os << "gamma,n,metric,value,stderr,failures\n";
  for (const auto& r : report.records) {
    os << gamma_label(r.gamma) << ',' << r.n << ',' << r.metric << ',' << fmt("%.10g", r.value) << ','
       << fmt("%.10g", r.stderr_) << ',' << r.failures << '\n';
  }
}

void write_table(const ExperimentReport& report, std::ostream& os) {
  std::vector<std::string> metrics;
  std::vector<std::size_t> sizes;
  for (const auto& r : report.records) {
    if (std::find(metrics.begin(), metrics.end(), r.metric) == metrics.end()) metrics.push_back(r.metric);
    if (std::find(sizes.begin(), sizes.end(), r.n) == sizes.end()) sizes.push_back(r.n);
  }
  for (const auto& metric : metrics) {
    std::vector<std::string> rows;
    std::map<std::pair<std::string, std::size_t>, const CellRecord*> cells;
    for (const auto& r : report.records) {
      if (r.metric != metric) continue;
      const std::string label = gamma_label(r.gamma);
      if (std::find(rows.begin(), rows.end(), label) == rows.end()) rows.push_back(label);
      cells[{label, r.n}] = &r;
    }
    os << metric << '\n';
    char buf[64];
    std::snprintf(buf, sizeof buf, "%8s", "gamma");
    os << buf;
    for (auto n : sizes) {
      std::snprintf(buf, sizeof buf, "%11s", ("n=" + std::to_string(n)).c_str());
      os << buf;
    }
    os << '\n';
    for (const auto& row : rows) {
      std::snprintf(buf, sizeof buf, "%8s", row.c_str());
      os << buf;
      for (auto n : sizes) {
        const auto it = cells.find({row, n});
        if (it == cells.end()) {
          std::snprintf(buf, sizeof buf, "%11s", "");
        } else {
          std::snprintf(buf, sizeof buf, "%10.4f%s", it->second->value, it->second->flagged ? "*" : " ");
        }
        os << buf;
      }
      os << '\n';
    }
    os << '\n';
  }
}

void write_provenance(const ExperimentReport& report, std::ostream& os) {
  nlohmann::ordered_json j;
  j["experiment"] = report.experiment;
  j["seed"] = report.provenance.seed;
  j["config_hash"] = report.provenance.config_hash;
  j["wall_seconds"] = report.provenance.wall_seconds;
  j["threads"] = report.provenance.threads;
  os << j.dump(2) << '\n';
}

void write_curves_csv(const std::vector<EscortCurve>& curves, std::ostream& os) {
  os << "escort,gamma,alpha,value\n";
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.alpha.size(); ++i) {
      os << c.escort << ',' << fmt("%.10g", c.gamma) << ',' << fmt("%.10g", c.alpha[i]) << ','
         << fmt("%.10g", c.value[i]) << '\n';
    }
  }
}

void write_curves_table(const std::vector<EscortCurve>& curves, std::ostream& os) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-14s %8s %10s %10s %12s\n", "escort", "gamma", "theta", "argmax", "max value");
  os << buf;
  for (const auto& c : curves) {
    double best = -std::numeric_limits<double>::infinity();
    for (double v : c.value) best = std::max(best, v);
    std::snprintf(buf, sizeof buf, "%-14s %8.4g %10.4f %10.4f %12.4f\n", c.escort.c_str(), c.gamma, c.theta[0],
                  c.argmax, best);
    os << buf;
  }
}

std::string config_text(const SimConfig& cfg) {
  std::ostringstream os;
  std::vector<double> sizes(cfg.sample_sizes.begin(), cfg.sample_sizes.end());
  os << "model = " << cfg.model.name() << '\n'
     << "true_params = " << format_params(cfg.theta0()) << '\n'
     << "gammas = " << format_double_list(cfg.gammas) << '\n';
  os << "sample_sizes = ";
  for (std::size_t i = 0; i < cfg.sample_sizes.size(); ++i) os << (i ? "," : "") << cfg.sample_sizes[i];
  os << '\n'
     << "reps = " << cfg.reps << '\n'
     << "B = " << cfg.B << '\n'
     << "scheme = " << cfg.scheme.name() << '\n'
     << "level = " << format_double_list({cfg.level}) << '\n'
     << "interval = " << (cfg.interval == IntervalKind::percentile ? "percentile" : "hybrid") << '\n'
     << "escort = " << escort_name(cfg.escort) << '\n'
     << "contamination = " << (cfg.contamination ? format_contamination(*cfg.contamination) : "none") << '\n'
     << "censoring = " << (cfg.censoring ? format_censoring(*cfg.censoring) : "none") << '\n'
     << "seed = " << cfg.seed << '\n'
     << "mse_target = " << (cfg.mse_target == MseTarget::bootstrap ? "bootstrap" : "point") << '\n'
     << "kl_convention = " << (cfg.kl_convention == KlConvention::exact ? "exact" : "printed") << '\n';
  return os.str();
}

std::string config_hash(const SimConfig& cfg) {
  // FNV-1a, 64 bit
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config_text(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dualdiv
