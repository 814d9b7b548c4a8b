#include "dualdiv/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "dualdiv/bootstrap.hpp"
#include "dualdiv/config.hpp"
#include "dualdiv/data_io.hpp"
#include "dualdiv/harness.hpp"

namespace dualdiv {

namespace {

// Error classes that map to exit code 1.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SimFlags {
  std::string config;
  std::optional<std::string> model, true_params, gammas, sizes, reps, B, scheme, level, interval,
      escort, contamination, censoring, seed, threads, mse_target, kl_convention;
  std::string out;
};

void add_sim_flags(CLI::App* app, SimFlags& f) {
  app->add_option("--config", f.config, "key = value configuration file");
  app->add_option("--model", f.model, "model, e.g. normal, exponential, gamma:k=2");
  app->add_option("--true", f.true_params, "true parameter(s), comma separated");
  app->add_option("--gammas", f.gammas, "divergence indices, comma separated");
  app->add_option("--sizes", f.sizes, "sample sizes, comma separated");
  app->add_option("--reps", f.reps, "Monte Carlo replications");
  app->add_option("-B,--bootstrap-reps", f.B, "bootstrap replicates per run");
  app->add_option("--scheme", f.scheme, "weights: efron, bayesian, dirichlet4");
  app->add_option("--level", f.level, "confidence level");
  app->add_option("--interval", f.interval, "percentile or hybrid");
  app->add_option("--escort", f.escort, "mle, mean, median or fixed:<v>");
  app->add_option("--contamination", f.contamination, "<eps>,dirac,<x> or <eps>,<model>,<params>");
  app->add_option("--censoring", f.censoring, "<model>,<params> censoring distribution");
  app->add_option("--seed", f.seed, "master seed");
  app->add_option("--threads", f.threads, "worker threads");
  app->add_option("--mse-target", f.mse_target, "bootstrap or point");
  app->add_option("--kl-convention", f.kl_convention, "exact or printed");
  app->add_option("--out", f.out, "CSV output path");
}

const std::vector<std::string> kStudyKeys = {"alpha_grid", "escorts"};

SimConfig build_config(const SimFlags& f, SimConfig cfg, ConfigMap* file_entries) {
  if (!f.config.empty()) {
    ConfigMap entries = read_config_file(f.config);
    apply_config(entries, cfg, kStudyKeys);
    if (file_entries) *file_entries = std::move(entries);
  }
  const std::pair<const char*, const std::optional<std::string>*> flags[] = {
      {"model", &f.model},       {"true_params", &f.true_params},
      {"gammas", &f.gammas},     {"sample_sizes", &f.sizes},
      {"reps", &f.reps},         {"B", &f.B},
      {"scheme", &f.scheme},     {"level", &f.level},
      {"interval", &f.interval}, {"escort", &f.escort},
      {"contamination", &f.contamination}, {"censoring", &f.censoring},
      {"seed", &f.seed},         {"threads", &f.threads},
      {"mse_target", &f.mse_target}, {"kl_convention", &f.kl_convention}};
  for (const auto& [key, value] : flags) {
    if (*value) set_config_value(cfg, key, **value);
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

// Resolves where the CSV goes: --out, else $DUALDIV_OUT_DIR/<name>.csv, else
// nowhere (the CSV is then printed to stdout).
std::optional<std::filesystem::path> csv_destination(const std::string& out, const std::string& name) {
  if (!out.empty()) return std::filesystem::path(out);
  if (const char* dir = std::getenv("DUALDIV_OUT_DIR"); dir && *dir) {
    return std::filesystem::path(dir) / (name + ".csv");
  }
  return std::nullopt;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  f << content;
  if (!f) throw std::runtime_error("failed writing '" + path.string() + "'");
}

void emit_report(const ExperimentReport& rep, const std::string& name, const std::string& out_flag,
                 std::ostream& out) {
  write_table(rep, out);
  std::ostringstream csv;
  write_csv(rep, csv);
  if (auto dest = csv_destination(out_flag, name)) {
    write_file(*dest, csv.str());
    std::ostringstream prov;
    write_provenance(rep, prov);
    write_file(dest->string() + ".json", prov.str());
    out << "wrote " << dest->string() << '\n';
  } else {
    out << csv.str();
  }
}

DivergenceSpec parse_gamma(const std::string& text) {
  try {
    return DivergenceSpec::parse(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--gamma: ") + e.what());
  }
}

ModelSpec parse_model(const std::string& text) {
  try {
    return ModelSpec::parse(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--model: ") + e.what());
  }
}

EscortStrategy parse_escort_flag(const std::string& text) {
  try {
    return parse_escort(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--escort: ") + e.what());
  }
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string params_text(const Params& p) {
  std::string s;
  for (int i = 0; i < p.size(); ++i) s += (i ? ", " : "") + num(p[i]);
  return s;
}

Params censored_escort(const ModelSpec& m, const CensoredSample& cs, const EscortStrategy& e) {
  if (!std::holds_alternative<EscortMle>(e)) return escort(m, cs.y(), e);
  if (m.family() == Family::exponential) return exp_mle_censored(cs);
  std::vector<double> w = km_weights(cs).w;
  for (auto& v : w) v *= static_cast<double>(cs.size());
  return mle(m, cs.y(), w);
}

void print_result(std::ostream& out, const ModelSpec& m, const DivergenceSpec& spec,
                  const Params& theta, const EstimationResult& r) {
  out << "model      = " << m.name() << '\n'
      << "gamma      = " << num(spec.gamma()) << " (" << spec.name() << ")\n"
      << "theta      = " << params_text(theta) << '\n'
      << "alpha_hat  = " << params_text(r.alpha_hat) << '\n'
      << "criterion  = " << num(r.criterion_value) << '\n'
      << "gradient   = " << num(r.gradient_norm) << '\n'
      << "converged  = " << (r.converged ? "yes" : "no") << " ("
      << (r.solver_path == SolverPath::newton ? "newton" : "fallback line search") << ", "
      << r.iterations << " iterations)\n";
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dual phi-divergence estimation, weighted bootstrap and simulation"};
  app.require_subcommand(1);

  // estimate / bootstrap-ci
  std::string model_text, gamma_text, data_path, escort_text = "mle", kl_text = "exact";
  bool censored = false;
  std::string scheme_text = "bayesian", interval_text = "percentile", out_path;
  int B = 500;
  double level = 0.95;
  std::uint64_t seed = 20100601;

  auto* est = app.add_subcommand("estimate", "dual phi-divergence estimate on a data file");
  auto* bci = app.add_subcommand("bootstrap-ci", "weighted bootstrap confidence interval");
  for (auto* sc : {est, bci}) {
    sc->add_option("--model", model_text, "model, e.g. normal, exponential, gamma:k=2")->required();
    sc->add_option("--gamma", gamma_text, "divergence index or alias (klm, kl, chi2, ...)")->required();
    sc->add_option("--data", data_path, "CSV data file")->required();
    sc->add_option("--escort", escort_text, "mle, mean, median or fixed:<v>");
    sc->add_flag("--censored", censored, "data has (time, indicator) columns");
    sc->add_option("--kl-convention", kl_text, "exact or printed");
  }
  bci->add_option("--scheme", scheme_text, "weights: efron, bayesian, dirichlet4");
  bci->add_option("-B,--bootstrap-reps", B, "bootstrap replicates")->check(CLI::PositiveNumber);
  bci->add_option("--level", level, "confidence level")->check(CLI::Range(0.0, 1.0));
  bci->add_option("--interval", interval_text, "percentile or hybrid");
  bci->add_option("--seed", seed, "master seed");

  SimFlags mse_f, cov_f, cens_f, esc_f;
  auto* mse = app.add_subcommand("simulate-mse", "Monte Carlo MSE table");
  auto* cov = app.add_subcommand("simulate-coverage", "Monte Carlo bootstrap coverage table");
  auto* cens = app.add_subcommand("simulate-censored", "right-censored MSE and coverage tables");
  auto* esc = app.add_subcommand("escort-study", "criterion curves for several escorts");
  add_sim_flags(mse, mse_f);
  add_sim_flags(cov, cov_f);
  add_sim_flags(cens, cens_f);
  add_sim_flags(esc, esc_f);
  std::string grid_text, escorts_text, plot_dir;
  esc->add_option("--alpha-grid", grid_text, "lo:hi:step (default -2:12:0.01)");
  esc->add_option("--escorts", escorts_text, "escort strategies, comma separated (default mean,median)");
  esc->add_option("--emit-plot-data", plot_dir, "directory for one CSV per (escort, gamma) panel");

  auto* chk = app.add_subcommand("check-weights", "Monte Carlo check of the weight conditions");
  std::string chk_scheme = "bayesian";
  std::size_t chk_n = 10000;
  int chk_reps = 200;
  std::uint64_t chk_seed = 20100601;
  chk->add_option("--scheme", chk_scheme, "weights: efron, bayesian, dirichlet4");
  chk->add_option("--n", chk_n, "sample size")->check(CLI::PositiveNumber);
  chk->add_option("--reps", chk_reps, "draws (>= 100)")->check(CLI::Range(100, 100000000));
  chk->add_option("--seed", chk_seed, "master seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (est->parsed() || bci->parsed()) {
      const ModelSpec m = parse_model(model_text);
      const DivergenceSpec spec = parse_gamma(gamma_text);
      const EscortStrategy es = parse_escort_flag(escort_text);
      DphideOptions opts;
      if (kl_text == "printed") opts.criterion.kl_convention = KlConvention::printed;
      else if (kl_text != "exact") throw UsageError("--kl-convention: expected exact or printed");

      std::optional<CensoredSample> cs;
      Sample x;
      if (censored) cs = read_censored_csv(data_path);
      else x = read_sample_csv(data_path);
      const Params theta = cs ? censored_escort(m, *cs, es) : escort(m, x, es);
      const KMWeights kw = cs ? km_weights(*cs) : KMWeights{};
      const EstimationResult r =
          cs ? censored_dphide(m, spec, theta, *cs, kw, opts) : dphide(m, spec, theta, x, opts);
      print_result(out, m, spec, theta, r);
      if (est->parsed()) return r.converged ? 0 : 2;

      WeightScheme scheme = WeightScheme::parse(scheme_text);
      const IntervalKind kind = parse_interval_kind(interval_text);
      const std::size_t n = cs ? cs->size() : x.size();
      BootstrapResult br;
      if (cs) {
        br = bootstrap_replicates(scheme, n, B, seed, [&](const WeightVector& w) {
          return censored_dphide(m, spec, theta, *cs, km_bootstrap_weights(*cs, w), opts);
        });
      } else {
        BootstrapOptions bo;
        bo.dphide = opts;
        br = bootstrap_distribution(m, spec, theta, x, scheme, B, seed, bo);
      }
      out << "replicates = " << br.replicates.size() << " (" << br.failures << " failed)\n";
      for (int i = 0; i < m.dim(); ++i) {
        const auto coord = br.coordinate(i);
        const auto ci = kind == IntervalKind::percentile
                            ? percentile_ci(r.alpha_hat[i], coord, scheme.c(), 1.0 - level)
                            : hybrid_ci(r.alpha_hat[i], coord, scheme.c(), 1.0 - level, n);
        out << (kind == IntervalKind::percentile ? "percentile" : "hybrid") << " " << num(level)
            << " interval [" << i << "] = [" << num(ci.lower) << ", " << num(ci.upper) << "]\n";
      }
      return 0;
    }

    if (chk->parsed()) {
      const WeightScheme scheme = WeightScheme::parse(chk_scheme);
      Rng rng(derive_seed(chk_seed, {}));
      const auto rep = check_w_conditions(scheme, chk_n, chk_reps, rng);
      out << "scheme        = " << scheme.name() << " (c = " << num(scheme.c()) << ")\n"
          << "mean_w1       = " << num(rep.mean_w1) << '\n'
          << "c2_hat        = " << num(rep.c2_hat) << '\n'
          << "max_tail_stat = " << num(rep.max_tail_stat) << '\n';
      return 0;
    }

    if (mse->parsed()) {
      const SimConfig cfg = build_config(mse_f, SimConfig{}, nullptr);
      emit_report(run_mse_experiment(cfg), "simulate-mse", mse_f.out, out);
      return 0;
    }
    if (cov->parsed()) {
      SimConfig base;
      base.sample_sizes = {25, 50, 75, 100, 150, 200};
      const SimConfig cfg = build_config(cov_f, base, nullptr);
      emit_report(run_coverage_experiment(cfg), "simulate-coverage", cov_f.out, out);
      return 0;
    }
    if (cens->parsed()) {
      SimConfig base;
      base.model = ModelSpec::exponential();
      base.sample_sizes = {25, 50, 100, 150};
      base.censoring = CensoringSpec{ModelSpec::exponential(), ModelSpec::exponential().params({1.0 / 9.0})};
      const SimConfig cfg = build_config(cens_f, base, nullptr);
      emit_report(run_censored_experiment(cfg), "simulate-censored", cens_f.out, out);
      return 0;
    }
    if (esc->parsed()) {
      SimConfig base;
      base.sample_sizes = {100};
      base.gammas = {0.0, 0.5, 1.0, 2.0};
      base.contamination = ContaminationSpec{0.1, DiracAt{10.0}};
      ConfigMap entries;
      const SimConfig cfg = build_config(esc_f, base, &entries);
      if (grid_text.empty()) {
        auto it = entries.find("alpha_grid");
        grid_text = it == entries.end() ? "-2:12:0.01" : it->second.value;
      }
      if (escorts_text.empty()) {
        auto it = entries.find("escorts");
        escorts_text = it == entries.end() ? "mean,median" : it->second.value;
      }
      std::vector<double> g;
      {
        std::vector<std::string> parts;
        std::stringstream ss(grid_text);
        for (std::string tok; std::getline(ss, tok, ':');) parts.push_back(tok);
        if (parts.size() != 3) throw ConfigError("field 'alpha_grid': expected lo:hi:step");
        g = make_grid(parse_double(parts[0], "alpha_grid"), parse_double(parts[1], "alpha_grid"),
                      parse_double(parts[2], "alpha_grid"));
      }
      std::vector<EscortStrategy> escorts;
      {
        std::stringstream ss(escorts_text);
        for (std::string tok; std::getline(ss, tok, ';');) {
          // "fixed:" values use commas, so split on ';' first and fall back to ','
          if (tok.rfind("fixed:", 0) == 0) {
            escorts.push_back(parse_escort_flag(tok));
          } else {
            std::stringstream inner(tok);
            for (std::string e; std::getline(inner, e, ',');) escorts.push_back(parse_escort_flag(e));
          }
        }
      }
      const auto curves = run_escort_study(cfg, g, escorts);
      write_curves_table(curves, out);
      std::ostringstream csv;
      write_curves_csv(curves, csv);
      if (auto dest = csv_destination(esc_f.out, "escort-study")) {
        write_file(*dest, csv.str());
        out << "wrote " << dest->string() << '\n';
      } else {
        out << csv.str();
      }
      if (!plot_dir.empty()) {
        for (const auto& c : curves) {
          std::ostringstream panel;
          panel << "alpha,value\n";
          for (std::size_t i = 0; i < c.alpha.size(); ++i) panel << num(c.alpha[i]) << ',' << num(c.value[i]) << '\n';
          std::string name = "curve_" + c.escort + "_gamma_" + num(c.gamma) + ".csv";
          std::replace(name.begin(), name.end(), ':', '_');
          write_file(std::filesystem::path(plot_dir) / name, panel.str());
        }
        out << "wrote " << curves.size() << " panel files to " << plot_dir << '\n';
      }
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}

}  // namespace dualdiv
