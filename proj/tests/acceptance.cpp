// Acceptance checks at full Monte Carlo scale. Prints one PASS/FAIL line per
// criterion and exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dualdiv/bootstrap.hpp"
#include "dualdiv/censoring.hpp"
#include "dualdiv/estimation.hpp"
#include "dualdiv/harness.hpp"
#include "dualdiv/quadrature.hpp"

using namespace dualdiv;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
    pass = pass && ok;
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double cell(const ExperimentReport& r, std::optional<double> gamma, std::size_t n, const std::string& metric) {
  for (const auto& c : r.records)
    if (c.gamma == gamma && c.n == n && c.metric == metric) {
      if (c.flagged) return std::numeric_limits<double>::quiet_NaN();
      return c.value;
    }
  return std::numeric_limits<double>::quiet_NaN();
}

bool in(double v, double lo, double hi) { return v >= lo && v <= hi; }

std::vector<ModelSpec> all_models() {
  return {ModelSpec::normal(1.0),   ModelSpec::normal_loc_scale(), ModelSpec::log_normal(0.7),
          ModelSpec::exponential(), ModelSpec::gamma(2.0),         ModelSpec::weibull(1.7),
          ModelSpec::pareto()};
}

SimConfig table_defaults() {
  SimConfig cfg;
  cfg.reps = 500;
  cfg.B = 500;
  cfg.scheme = WeightScheme::bayesian();
  cfg.escort = EscortMle{};
  return cfg;
}

// 1. Normal MSE table at n = 200.
Outcome normal_mse() {
  SimConfig cfg = table_defaults();
  cfg.model = ModelSpec::normal();
  cfg.gammas = {0.0, 1.0, 2.0};
  cfg.sample_sizes = {200};
  const auto t0 = std::chrono::steady_clock::now();
  const auto rep = run_mse_experiment(cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  Outcome o;
  const double g0 = cell(rep, 0.0, 200, "mse");
  const double g1 = cell(rep, 1.0, 200, "mse");
  const double g2 = cell(rep, 2.0, 200, "mse");
  o.require(in(g1, 0.004, 0.008), "gamma=1 " + fmt("%.4f", g1) + " in [0.004,0.008]");
  o.require(in(g0, 0.008, 0.013), "gamma=0 " + fmt("%.4f", g0) + " in [0.008,0.013]");
  o.require(in(g2, 0.009, 0.014), "gamma=2 " + fmt("%.4f", g2) + " in [0.009,0.014]");
  o.require(secs < 300.0, "runtime " + fmt("%.0f", secs) + "s < 300s");
  return o;
}

// 2. Exponential MSE table at n = 200: Hellinger equals the MLE.
Outcome exponential_mse() {
  SimConfig cfg = table_defaults();
  cfg.model = ModelSpec::exponential();
  cfg.gammas = {0.0, 0.5};
  cfg.sample_sizes = {200};
  const auto rep = run_mse_experiment(cfg);
  const double g0 = cell(rep, 0.0, 200, "mse");
  const double gh = cell(rep, 0.5, 200, "mse");
  Outcome o;
  o.require(std::abs(gh - 0.0105) <= 0.003, "gamma=0.5 " + fmt("%.4f", gh) + " within 0.003 of 0.0105");
  o.require(std::abs(gh - g0) <= 0.1 * g0, "gamma=0 " + fmt("%.4f", g0) + " within 10%");
  return o;
}

// 3. Normal coverage, Dirichlet(1) weights.
Outcome normal_coverage() {
  SimConfig cfg = table_defaults();
  cfg.model = ModelSpec::normal();
  cfg.gammas = {1.0, 2.0};
  cfg.sample_sizes = {200};
  const auto rep = run_coverage_experiment(cfg);
  const double c1 = cell(rep, 1.0, 200, "coverage");
  const double c2 = cell(rep, 2.0, 200, "coverage");
  Outcome o;
  o.require(std::abs(c2 - 0.95) <= 0.03, "gamma=2 " + fmt("%.3f", c2) + " within 0.03 of 0.95");
  o.require(std::abs(c1 - 0.51) <= 0.10, "gamma=1 " + fmt("%.3f", c1) + " within 0.10 of 0.51");
  return o;
}

// 4. Censored exponential: coverage and contaminated MSE at n = 150.
Outcome censored() {
  SimConfig cfg = table_defaults();
  cfg.model = ModelSpec::exponential();
  cfg.gammas = {-1.0, 0.0, 0.5, 1.0, 2.0};
  cfg.sample_sizes = {150};
  cfg.censoring = CensoringSpec{ModelSpec::exponential(), ModelSpec::exponential().params({1.0 / 9.0})};
  const auto clean = run_censored_experiment(cfg);
  const double cov2 = cell(clean, 2.0, 150, "coverage");

  cfg.contamination = ContaminationSpec{0.2, ModelContaminant{ModelSpec::exponential(),
                                                              ModelSpec::exponential().params({0.2})}};
  const auto dirty = run_censored_experiment(cfg);
  double best = std::numeric_limits<double>::infinity();
  double best_gamma = std::numeric_limits<double>::quiet_NaN();
  std::string cells;
  for (double g : cfg.gammas) {
    const double v = cell(dirty, g, 150, "mse");
    cells += (cells.empty() ? "" : " ") + fmt("%.4f", v);
    if (v < best) {
      best = v;
      best_gamma = g;
    }
  }
  const double mse2 = cell(dirty, 2.0, 150, "mse");
  Outcome o;
  o.require(std::abs(cov2 - 0.67) <= 0.05, "coverage gamma=2 " + fmt("%.3f", cov2) + " within 0.05 of 0.67");
  o.require(best_gamma == 2.0, "contaminated mse {" + cells + "} smallest at gamma=2");
  o.require(std::abs(mse2 - 0.1266) <= 0.03, "gamma=2 mse within 0.03 of 0.1266");
  return o;
}

// 5. Closed-form dual integrals against quadrature.
Outcome closed_form_vs_quadrature() {
  Outcome o;
  double worst = 0.0;
  int min_points = std::numeric_limits<int>::max();
  std::string failures;
  for (const auto& m : all_models()) {
    std::vector<std::pair<Params, Params>> pairs;
    const std::vector<double> shifts{-1.2, -0.8, -0.5, -0.3, 0.0, 0.2, 0.4, 0.9, 1.5, 2.0};
    const std::vector<double> factors{0.55, 0.65, 0.75, 0.9, 1.0, 1.15, 1.3, 1.5, 1.7, 2.2};
    if (m.family() == Family::normal_loc_scale) {
      for (double mu : {-1.0, 0.5})
        for (double s : {0.7, 1.4})
          for (std::size_t k = 0; k < shifts.size(); ++k)
            pairs.emplace_back(m.params({mu, s}), m.params({mu + shifts[k], s * factors[k]}));
    } else if (m.is_location_family()) {
      for (double t : {-1.5, -0.2, 0.6, 2.0})
        for (double d : shifts) pairs.emplace_back(m.params({t}), m.params({t + d}));
    } else {
      for (double t : {0.4, 1.0, 1.8, 3.5})
        for (double f : factors) pairs.emplace_back(m.params({t}), m.params({t * f}));
    }
    for (double g : {-1.0, 0.5, 2.0}) {
      int points = 0;
      for (const auto& [t, a] : pairs) {
        const double closed = dual_integral(m, DivergenceSpec(g), t, a);
        if (!std::isfinite(closed)) continue;
        ++points;
        double rel;
        try {
          const double quad = quadrature_oracle(m, DivergenceSpec(g), t, a);
          rel = std::abs(closed - quad) / std::abs(quad);
        } catch (const std::exception&) {
          rel = std::numeric_limits<double>::infinity();
        }
        worst = std::max(worst, rel);
        if (!(rel <= 1e-8)) failures += " " + m.name() + "@" + fmt("%g", g);
      }
      min_points = std::min(min_points, points);
    }
  }
  o.require(worst <= 1e-8, "max relative difference " + fmt("%.2e", worst) + " <= 1e-8" + failures);
  o.require(min_points >= 20, "feasible points per family and gamma >= 20 (min " + std::to_string(min_points) + ")");
  return o;
}

// 6. criterion(theta, theta) = 0 and the gamma = 0 estimator equals the MLE.
Outcome exact_identities() {
  Outcome o;
  double worst = 0.0;
  for (const auto& m : all_models()) {
    for (std::uint64_t s = 0; s < 10; ++s) {
      Rng rng = make_rng(606, {s});
      const Params t = default_true_params(m);
      const Sample x = draw_sample(m, t, 5 + 10 * s, rng);
      const Params th = mle(m, x);
      for (double g : {-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 3.0})
        for (auto conv : {KlConvention::exact, KlConvention::printed}) {
          CriterionOptions co;
          co.kl_convention = conv;
          worst = std::max(worst, std::abs(criterion(m, DivergenceSpec(g), th, th, x, co)));
          worst = std::max(worst, std::abs(criterion(m, DivergenceSpec(g), t, t, x, co)));
        }
    }
  }
  o.require(worst <= 1e-12, "max |criterion(theta,theta)| " + fmt("%.1e", worst) + " <= 1e-12");

  double worst_normal = 0.0, worst_pareto = 0.0;
  const auto n = ModelSpec::normal();
  const auto p = ModelSpec::pareto();
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng = make_rng(607, {s});
    const Sample xn = draw_sample(n, n.params({0.0}), 50, rng);
    double mean = 0.0;
    for (double v : xn) mean += v;
    mean /= static_cast<double>(xn.size());
    for (double e : {-5.0, 0.0, 17.0}) {
      const auto r = dphide(n, DivergenceSpec(0.0), n.params({e}), xn);
      worst_normal = std::max(worst_normal, r.converged ? std::abs(r.alpha_hat[0] - mean) : 1.0);
    }
    const Sample xp = draw_sample(p, p.params({2.0}), 50, rng);
    double sl = 0.0;
    for (double v : xp) sl += std::log(v);
    const double pareto_mle = static_cast<double>(xp.size()) / sl;
    for (double e : {0.5, 2.0, 6.0}) {
      const auto r = dphide(p, DivergenceSpec(0.0), p.params({e}), xp);
      worst_pareto = std::max(worst_pareto, r.converged ? std::abs(r.alpha_hat[0] - pareto_mle) : 1.0);
    }
  }
  o.require(worst_normal <= 1e-8, "normal |alpha - mean| " + fmt("%.1e", worst_normal) + " <= 1e-8");
  o.require(worst_pareto <= 1e-8, "pareto |alpha - mle| " + fmt("%.1e", worst_pareto) + " <= 1e-8");
  return o;
}

// 7. Weight schemes and the bootstrap Kaplan-Meier reduction.
Outcome weight_schemes() {
  Outcome o;
  bool exact_sum = true;
  double worst_rel = 0.0;
  Rng rng(707);
  for (std::size_t n : {1u, 3u, 50u, 200u, 10000u}) {
    for (int r = 0; r < 50; ++r) {
      const auto e = gen_weights(WeightScheme::efron(), n, rng);
      double se = 0.0;
      for (double v : e.values()) se += v;
      exact_sum = exact_sum && se == static_cast<double>(n);
      for (const auto& s : {WeightScheme::bayesian(), WeightScheme::dirichlet4()}) {
        const auto w = gen_weights(s, n, rng);
        double sw = 0.0;
        for (double v : w.values()) sw += v;
        worst_rel = std::max(worst_rel, std::abs(sw - static_cast<double>(n)) / static_cast<double>(n));
      }
    }
  }
  o.require(exact_sum, "multinomial sums exact");
  o.require(worst_rel <= 1e-9, "Dirichlet sums within " + fmt("%.1e", worst_rel) + " <= 1e-9");

  Rng crng(708);
  const auto efron = check_w_conditions(WeightScheme::efron(), 10000, 200, crng);
  const auto bayes = check_w_conditions(WeightScheme::bayesian(), 10000, 200, crng);
  o.require(std::abs(efron.c2_hat - 1.0) <= 0.05, "efron c2_hat " + fmt("%.4f", efron.c2_hat));
  o.require(std::abs(bayes.c2_hat - 1.0) <= 0.05, "bayesian c2_hat " + fmt("%.4f", bayes.c2_hat));

  std::mt19937_64 prng(709);
  std::exponential_distribution<double> life(1.0), cens(0.4);
  double worst_km = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 50);
    std::vector<double> t(n);
    std::vector<int> d(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = life(prng), c = cens(prng);
      t[i] = std::min(a, c);
      d[i] = a <= c ? 1 : 0;
    }
    d[trial % n] = 1;
    const CensoredSample cs(t, d);
    const auto a = km_weights(cs);
    const auto b = km_bootstrap_weights(cs, WeightVector::uniform(n));
    for (std::size_t j = 0; j < n; ++j) worst_km = std::max(worst_km, std::abs(a.w[j] - b.w[j]));
  }
  o.require(worst_km <= 1e-12, "KM reduction max diff " + fmt("%.1e", worst_km) + " over 200 patterns");
  return o;
}

// 8. Population criterion peaks at theta0.
Outcome population_argmax() {
  Outcome o;
  const auto m = ModelSpec::normal();
  const double theta0 = 0.3;
  const Params t0 = m.params({theta0});
  const Params th = m.params({theta0 + 0.7});
  const double inf = std::numeric_limits<double>::infinity();
  for (double g : {-1.0, 0.5, 1.0, 2.0}) {
    const DivergenceSpec spec(g);
    int best_k = 0;
    double best = -inf;
    for (int k = -200; k <= 200; ++k) {
      const Params a = m.params({theta0 + 0.01 * k});
      const double v = integrate(
                           [&](double x) {
                             const double p = density(m, t0, x);
                             if (p == 0.0) return 0.0;
                             return p * criterion(m, spec, th, a, std::vector<double>{x});
                           },
                           -inf, inf)
                           .value;
      if (v > best) {
        best = v;
        best_k = k;
      }
    }
    o.require(best_k == 0, "gamma=" + fmt("%g", g) + " peak at theta0" + fmt("%+.2f", 0.01 * best_k));
  }
  return o;
}

// 9. Escort study under 10% contamination at 10.
Outcome escort_study() {
  SimConfig cfg;
  cfg.model = ModelSpec::normal();
  cfg.sample_sizes = {100};
  cfg.gammas = {0.0, 0.5, 1.0, 2.0};
  cfg.contamination = ContaminationSpec{0.1, DiracAt{10.0}};
  const auto curves = run_escort_study(cfg, make_grid(-2.0, 12.0, 0.01), {EscortMean{}, EscortMedian{}});
  Outcome o;
  for (const auto& c : curves) {
    if (c.escort == "mean" && c.gamma == 0.0) {
      o.require(c.argmax >= 0.5, "mean gamma=0 argmax " + fmt("%.2f", c.argmax) + " >= 0.5");
    }
    if (c.escort == "median" && c.gamma != 0.0) {
      o.require(std::abs(c.argmax) <= 0.25,
                "median gamma=" + fmt("%g", c.gamma) + " argmax " + fmt("%.2f", c.argmax) + " within 0.25");
    }
  }
  return o;
}

// 10. Byte-identical CSV for repeated runs at 1 and 8 threads.
Outcome determinism() {
  auto csv = [](const ExperimentReport& r) {
    std::ostringstream os;
    write_csv(r, os);
    return os.str();
  };
  std::vector<std::pair<const char*, std::function<std::string(int)>>> runs;
  runs.emplace_back("mse", [&](int threads) {
    SimConfig c;
    c.sample_sizes = {25, 50};
    c.reps = 20;
    c.B = 50;
    c.threads = threads;
    return csv(run_mse_experiment(c));
  });
  runs.emplace_back("coverage", [&](int threads) {
    SimConfig c;
    c.model = ModelSpec::exponential();
    c.sample_sizes = {30};
    c.reps = 20;
    c.B = 50;
    c.threads = threads;
    return csv(run_coverage_experiment(c));
  });
  runs.emplace_back("censored", [&](int threads) {
    SimConfig c;
    c.model = ModelSpec::exponential();
    c.sample_sizes = {40};
    c.reps = 20;
    c.B = 50;
    c.censoring = CensoringSpec{ModelSpec::exponential(), ModelSpec::exponential().params({1.0 / 9.0})};
    c.contamination = ContaminationSpec{0.2, DiracAt{5.0}};
    c.threads = threads;
    return csv(run_censored_experiment(c));
  });
  Outcome o;
  for (auto& [name, f] : runs) {
    const std::string a = f(1), b = f(1), c = f(8), d = f(8);
    o.require(a == b && a == c && a == d, name);
  }
  return o;
}

}  // namespace

// Optional arguments select criteria by tag, e.g. `acceptance AC5 AC9`.
int main(int argc, char** argv) {
  const std::vector<std::string> only(argv + 1, argv + argc);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC1 normal MSE table", normal_mse},
      {"AC2 exponential MSE table", exponential_mse},
      {"AC3 normal coverage", normal_coverage},
      {"AC4 censored coverage and contaminated MSE", censored},
      {"AC5 closed form vs quadrature", closed_form_vs_quadrature},
      {"AC6 exact identities", exact_identities},
      {"AC7 weight schemes", weight_schemes},
      {"AC8 population argmax", population_argmax},
      {"AC9 escort study", escort_study},
      {"AC10 determinism", determinism},
  };
  int failed = 0;
  int ran = 0;
  for (const auto& [name, check] : criteria) {
    const std::string tag = name.substr(0, name.find(' '));
    if (!only.empty() && std::find(only.begin(), only.end(), tag) == only.end()) continue;
    ++ran;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
