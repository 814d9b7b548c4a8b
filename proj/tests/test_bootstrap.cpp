#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dualdiv/bootstrap.hpp"

using namespace dualdiv;

namespace {

std::vector<WeightScheme> schemes() {
  return {WeightScheme::efron(), WeightScheme::bayesian(), WeightScheme::dirichlet4()};
}

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_CASE("generated weights are nonnegative and sum to n") {
  Rng rng(1);
  for (const auto& s : schemes()) {
    for (std::size_t n : {1u, 2u, 7u, 100u}) {
      for (int r = 0; r < 20; ++r) {
        const WeightVector w = gen_weights(s, n, rng);
        REQUIRE(w.size() == n);
        for (double x : w.values()) CHECK(x >= 0.0);
        if (s.kind() == WeightScheme::Kind::efron_multinomial) {
          for (double x : w.values()) CHECK(x == std::floor(x));
          CHECK(sum(w.values()) == static_cast<double>(n));
        } else {
          CHECK(std::abs(sum(w.values()) - static_cast<double>(n)) <= 1e-9 * static_cast<double>(n));
        }
        if (n == 1) CHECK(w[0] == 1.0);
      }
    }
  }
  const WeightVector b = gen_weights(WeightScheme::bayesian(), 100, rng);
  for (double x : b.values()) CHECK(x > 0.0);
}

TEST_CASE("scheme constants and parsing") {
  CHECK(WeightScheme::efron().c() == 1.0);
  CHECK(WeightScheme::bayesian().c() == 1.0);
  CHECK(WeightScheme::dirichlet4().c() == 0.5);
  CHECK(WeightScheme::parse("bayesian").name() == "bayesian");
  CHECK_THROWS_AS(WeightScheme::parse("wild"), std::invalid_argument);
  const auto bad = WeightScheme::fixed(1.0, [](std::size_t n, Rng&) { return std::vector<double>(n, 2.0); });
  Rng rng(3);
  CHECK_THROWS_AS(gen_weights(bad, 4, rng), std::invalid_argument);
  CHECK_THROWS_AS(WeightScheme::fixed(0.0, [](std::size_t n, Rng&) { return std::vector<double>(n, 1.0); }),
                  std::invalid_argument);
}

TEST_CASE("weight conditions by Monte Carlo") {
  Rng rng(17);
  // Var(Binomial(n, 1/n)) = 1 - 1/n, Dirichlet(a) scaled by n has variance (n - 1)/(n a + 1)
  const auto efron = check_w_conditions(WeightScheme::efron(), 10000, 200, rng);
  CHECK(std::abs(efron.c2_hat - (1.0 - 1e-4)) <= 0.05);
  CHECK(std::abs(efron.mean_w1 - 1.0) <= 0.05);
  const auto bayes = check_w_conditions(WeightScheme::bayesian(), 10000, 200, rng);
  CHECK(std::abs(bayes.c2_hat - 9999.0 / 10001.0) <= 0.05);
  CHECK(std::abs(bayes.mean_w1 - 1.0) <= 0.05);
  const auto d4 = check_w_conditions(WeightScheme::dirichlet4(), 10000, 200, rng);
  CHECK(std::abs(d4.c2_hat - 9999.0 / 40001.0) <= 0.05);
  CHECK(std::abs(d4.mean_w1 - 1.0) <= 0.05);
  CHECK(std::isfinite(bayes.max_tail_stat));
  CHECK_THROWS_AS(check_w_conditions(WeightScheme::efron(), 10, 50, rng), std::invalid_argument);
}

TEST_CASE("exchangeability smoke test at n = 5") {
  const int reps = 40000;
  for (const auto& s : {WeightScheme::efron(), WeightScheme::bayesian()}) {
    Rng rng(404);
    std::vector<double> m1(5, 0.0), m1sq(5, 0.0);
    std::vector<double> m2(25, 0.0), m2sq(25, 0.0);
    for (int r = 0; r < reps; ++r) {
      const WeightVector w = gen_weights(s, 5, rng);
      for (int i = 0; i < 5; ++i) {
        m1[i] += w[i];
        m1sq[i] += w[i] * w[i];
        for (int j = 0; j < 5; ++j) {
          if (i == j) continue;
          const double p = w[i] * w[j];
          m2[i * 5 + j] += p;
          m2sq[i * 5 + j] += p * p;
        }
      }
    }
    auto check_stable = [&](const std::vector<double>& acc, const std::vector<double>& acc2,
                            const std::vector<int>& idx) {
      double pooled = 0.0;
      for (int k : idx) pooled += acc[k];
      pooled /= static_cast<double>(idx.size()) * reps;
      for (int k : idx) {
        const double mean = acc[k] / reps;
        const double sd = std::sqrt(acc2[k] / reps - mean * mean);
        CHECK(std::abs(mean - pooled) <= 3.0 * sd / std::sqrt(static_cast<double>(reps)));
      }
    };
    check_stable(m1, m1sq, {0, 1, 2, 3, 4});
    std::vector<int> off;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        if (i != j) off.push_back(i * 5 + j);
    check_stable(m2, m2sq, off);
  }
}

TEST_CASE("empirical quantile") {
  const std::vector<double> v{4.0, 1.0, 3.0, 2.0};
  CHECK(empirical_quantile(v, 0.5) == 2.0);
  CHECK(empirical_quantile(v, 1.0) == 4.0);
  CHECK(empirical_quantile(v, 0.25) == 1.0);
  CHECK(empirical_quantile(v, 0.26) == 2.0);
  CHECK(empirical_quantile(std::vector<double>{5.0}, 0.3) == 5.0);
  CHECK(empirical_quantile(std::vector<double>{5.0}, 1.0) == 5.0);
  CHECK_THROWS_AS(empirical_quantile(std::vector<double>{}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(empirical_quantile(v, 0.0), std::invalid_argument);
  std::vector<double> hundred(100);
  std::iota(hundred.begin(), hundred.end(), 1.0);
  CHECK(empirical_quantile(hundred, 0.025) == 3.0);
  CHECK(empirical_quantile(hundred, 0.975) == 98.0);
  CHECK(empirical_quantile(hundred, 0.03) == 3.0);
}

TEST_CASE("percentile and hybrid intervals") {
  std::vector<double> sym;
  for (int k = -50; k <= 50; ++k) sym.push_back(0.01 * k);
  const auto p1 = percentile_ci(0.0, sym, 1.0, 0.05);
  CHECK(p1.lower == empirical_quantile(sym, 0.025));
  CHECK(p1.upper == empirical_quantile(sym, 0.975));
  CHECK(p1.level == doctest::Approx(0.95));
  CHECK(p1.kind == IntervalKind::percentile);

  const std::vector<double> pm{-1.0, -1.0, 1.0, 1.0};
  const auto p2 = percentile_ci(0.0, pm, 2.0, 0.5);
  CHECK(p2.lower == doctest::Approx(-0.5));
  CHECK(p2.upper == doctest::Approx(0.5));
  const auto h1 = hybrid_ci(0.0, pm, 1.0, 0.5, 10);
  CHECK(h1.lower == doctest::Approx(-1.0));
  CHECK(h1.upper == doctest::Approx(1.0));

  const std::vector<double> same(20, 1.7);
  for (double c : {0.5, 1.0, 3.0}) {
    const auto pd = percentile_ci(1.7, same, c, 0.1);
    const auto hd = hybrid_ci(1.7, same, c, 0.1, 20);
    CHECK(pd.lower == 1.7);
    CHECK(pd.upper == 1.7);
    CHECK(hd.lower == 1.7);
    CHECK(hd.upper == 1.7);
  }

  // reflection about alpha_hat when c = 1
  const std::vector<double> skew{0.1, 0.4, 0.45, 0.9, 1.3, 2.2, 2.5, 3.0};
  const double a = 0.8;
  const auto ps = percentile_ci(a, skew, 1.0, 0.2);
  const auto hs = hybrid_ci(a, skew, 1.0, 0.2, 8);
  CHECK(hs.lower == doctest::Approx(2.0 * a - ps.upper));
  CHECK(hs.upper == doctest::Approx(2.0 * a - ps.lower));

  // symmetric replicates: both kinds agree
  const auto hsym = hybrid_ci(0.0, sym, 1.0, 0.05, 101);
  CHECK(hsym.lower == doctest::Approx(p1.lower));
  CHECK(hsym.upper == doctest::Approx(p1.upper));

  // nested levels
  Rng rng(8);
  std::normal_distribution<double> z;
  std::vector<double> reps(500);
  for (double& r : reps) r = z(rng);
  for (double eps : {0.01, 0.05, 0.1, 0.2}) {
    for (double eps2 : {0.02, 0.1, 0.3}) {
      if (eps2 <= eps) continue;
      for (bool hybrid : {false, true}) {
        const auto wide = hybrid ? hybrid_ci(0.1, reps, 1.0, eps, 500) : percentile_ci(0.1, reps, 1.0, eps);
        const auto narrow = hybrid ? hybrid_ci(0.1, reps, 1.0, eps2, 500) : percentile_ci(0.1, reps, 1.0, eps2);
        CHECK(wide.lower <= narrow.lower);
        CHECK(narrow.upper <= wide.upper);
      }
    }
  }

  CHECK_THROWS_AS(percentile_ci(0.0, pm, 0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(hybrid_ci(0.0, pm, -1.0, 0.1, 4), std::invalid_argument);
  CHECK_THROWS_AS(percentile_ci(0.0, std::vector<double>{}, 1.0, 0.1), std::invalid_argument);
  CHECK(parse_interval_kind("hybrid") == IntervalKind::hybrid);
  CHECK_THROWS_AS(parse_interval_kind("bca"), std::invalid_argument);
}

TEST_CASE("bootstrap distribution") {
  const auto m = ModelSpec::normal();
  Rng rng(55);
  const Sample s = draw_sample(m, m.params({0.0}), 200, rng);
  const Params th = mle(m, s);

  SUBCASE("degenerate weights collapse to the plain estimate") {
    const auto plain = dphide(m, DivergenceSpec(2.0), th, s);
    const auto one = bootstrap_distribution(m, DivergenceSpec(2.0), th, s, WeightScheme::degenerate(), 1, 9);
    REQUIRE(one.replicates.size() == 1);
    CHECK(one.replicates[0][0] == plain.alpha_hat[0]);
    const auto many = bootstrap_distribution(m, DivergenceSpec(2.0), th, s, WeightScheme::degenerate(), 25, 9);
    for (const auto& r : many.replicates) CHECK(r[0] == plain.alpha_hat[0]);
  }

  SUBCASE("deterministic given the seed and independent of threads") {
    BootstrapOptions o1, o4;
    o4.threads = 4;
    const auto a = bootstrap_distribution(m, DivergenceSpec(0.5), th, s, WeightScheme::bayesian(), 40, 123, o1);
    const auto b = bootstrap_distribution(m, DivergenceSpec(0.5), th, s, WeightScheme::bayesian(), 40, 123, o4);
    CHECK(a.coordinate(0) == b.coordinate(0));
    const auto c = bootstrap_distribution(m, DivergenceSpec(0.5), th, s, WeightScheme::bayesian(), 40, 124, o1);
    CHECK(a.coordinate(0) != c.coordinate(0));
  }

  SUBCASE("replicate spread matches the asymptotic standard deviation") {
    const auto r = bootstrap_distribution(m, DivergenceSpec(1.0), th, s, WeightScheme::efron(), 500, 2010);
    const auto v = r.coordinate(0);
    const double mean = sum(v) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    CHECK(std::abs(sd - 1.0 / std::sqrt(200.0)) <= 0.3 / std::sqrt(200.0));
  }

  SUBCASE("too many failed replicates is an error") {
    int calls = 0;
    auto flaky = [&](const WeightVector&) {
      EstimationResult r;
      r.alpha_hat = m.params({0.0});
      r.converged = (calls++ % 4) != 0;  // 25% failures
      return r;
    };
    CHECK_THROWS_AS(bootstrap_replicates(WeightScheme::efron(), 10, 40, 1, flaky), BootstrapFailure);
    calls = 1;
    auto mostly = [&](const WeightVector&) {
      EstimationResult r;
      r.alpha_hat = m.params({0.0});
      r.converged = (calls++ % 10) != 0;  // 10% failures
      return r;
    };
    const auto ok = bootstrap_replicates(WeightScheme::efron(), 10, 40, 1, mostly);
    CHECK(ok.failures == 4);
    CHECK(ok.replicates.size() == 36);
  }
}
