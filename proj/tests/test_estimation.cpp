#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <limits>
#include <random>

#include "dualdiv/estimation.hpp"
#include "dualdiv/quadrature.hpp"

using namespace dualdiv;

namespace {

std::vector<ModelSpec> all_models() {
  return {ModelSpec::normal(1.0),   ModelSpec::normal_loc_scale(), ModelSpec::log_normal(0.8),
          ModelSpec::exponential(), ModelSpec::gamma(2.5),         ModelSpec::weibull(1.7),
          ModelSpec::pareto()};
}

Params unit_params(const ModelSpec& m) {
  if (m.family() == Family::normal_loc_scale) return m.params({0.0, 1.0});
  if (m.is_location_family()) return m.params({0.0});
  return m.params({1.5});
}

Params perturb(const ModelSpec& m, const Params& p, double f) {
  Params q = p;
  for (int i = 0; i < q.size(); ++i) q[i] = m.positive_coordinate(i) ? q[i] * (1.0 + f) : q[i] + f;
  return q;
}

const std::vector<double> kGammas{-1.0, 0.0, 0.5, 1.0, 2.0, 1.5, -0.5};

}  // namespace

TEST_CASE("criterion vanishes at alpha = theta") {
  for (const auto& m : all_models()) {
    const Params t = unit_params(m);
    Rng rng(99);
    const Sample s = draw_sample(m, t, 40, rng);
    for (double g : kGammas) {
      for (double f : {0.0, 0.2, -0.1}) {
        const Params th = perturb(m, t, f);
        CAPTURE(m.name());
        CAPTURE(g);
        CHECK(std::abs(criterion(m, DivergenceSpec(g), th, th, s)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("gamma = 1 normal example under both KL conventions") {
  const auto m = ModelSpec::normal();
  const Params t = m.params({0.0});
  const Params a = m.params({1.0});
  const std::vector<double> x{0.0};
  // oracle: quadrature KL plus the ratio term from the two densities
  const double kl = kl_quadrature_oracle(m, t, a);
  const double ratio_term = std::expm1(std::log(density(m, t, 0.0) / density(m, a, 0.0)));
  CriterionOptions printed;
  printed.kl_convention = KlConvention::printed;
  const double v_printed = criterion(m, DivergenceSpec::kl(), t, a, x, printed);
  CHECK(v_printed == doctest::Approx(-kl - ratio_term).epsilon(1e-10));
  CHECK(v_printed == doctest::Approx(-0.5 - std::exp(0.5) + 1.0).epsilon(1e-14));
  CHECK(v_printed == doctest::Approx(-1.148721).epsilon(1e-6));
  const double v_exact = criterion(m, DivergenceSpec::kl(), t, a, x);
  CHECK(v_exact == doctest::Approx(kl - ratio_term).epsilon(1e-10));
}

TEST_CASE("generic gamma criterion matches an oracle composition") {
  for (const auto& m : all_models()) {
    const Params t = unit_params(m);
    const Params a = perturb(m, t, 0.15);
    Rng rng(5);
    const Sample s = draw_sample(m, t, 7, rng);
    for (double g : {-1.0, 0.5, 2.0}) {
      double acc = 0.0;
      for (double x : s) acc += std::pow(density(m, t, x) / density(m, a, x), g) - 1.0;
      const double oracle = quadrature_oracle(m, DivergenceSpec(g), t, a) - acc / (g * static_cast<double>(s.size())) -
                            1.0 / (g - 1.0);
      CAPTURE(m.name());
      CAPTURE(g);
      CHECK(criterion(m, DivergenceSpec(g), t, a, s) == doctest::Approx(oracle).epsilon(1e-8));
    }
  }
}

TEST_CASE("unit weights reproduce the unweighted criterion exactly") {
  for (const auto& m : all_models()) {
    const Params t = unit_params(m);
    const Params a = perturb(m, t, 0.3);
    Rng rng(12);
    const Sample s = draw_sample(m, t, 30, rng);
    const WeightVector ones(std::vector<double>(s.size(), 1.0));
    for (double g : kGammas) {
      CHECK(criterion(m, DivergenceSpec(g), t, a, s, ones) == criterion(m, DivergenceSpec(g), t, a, s));
    }
  }
}

TEST_CASE("criterion errors and infeasible alpha") {
  const auto e = ModelSpec::exponential();
  const std::vector<double> s{1.0, 2.0};
  CHECK_THROWS_AS(criterion(e, DivergenceSpec(2.0), e.params({1.0}), e.params({1.0}), s, WeightVector::uniform(3)),
                  std::invalid_argument);
  const double v = criterion(e, DivergenceSpec(2.0), e.params({1.0}), e.params({2.5}), s);
  CHECK(v == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(criterion_gradient(e, DivergenceSpec(2.0), e.params({1.0}), e.params({2.5}), s, WeightVector::uniform(2)),
                  std::domain_error);
  CHECK_THROWS_AS(WeightVector(std::vector<double>{1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(WeightVector(std::vector<double>{-1.0, 3.0}), std::invalid_argument);
}

TEST_CASE("criterion gradient") {
  const auto n = ModelSpec::normal();
  const std::vector<double> s123{1.0, 2.0, 3.0};
  const auto g0 = criterion_gradient(n, DivergenceSpec(0.0), n.params({5.0}), n.params({0.0}), s123,
                                     WeightVector::uniform(3));
  CHECK(g0[0] == doctest::Approx(2.0).epsilon(1e-14));
  const auto at_mean = criterion_gradient(n, DivergenceSpec(0.0), n.params({5.0}), n.params({2.0}), s123,
                                          WeightVector::uniform(3));
  CHECK(at_mean.norm() <= 1e-8);

  // central differences with step eps^(1/3) max(1, |alpha|)
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
  for (const auto& m : all_models()) {
    const Params t0 = unit_params(m);
    Rng srng(8);
    const Sample s = draw_sample(m, t0, 25, srng);
    const WeightVector w = WeightVector::uniform(s.size());
    for (double g : kGammas) {
      for (int trial = 0; trial < 4; ++trial) {
        const Params th = perturb(m, t0, u(rng));
        const Params al = perturb(m, th, 0.5 * u(rng));
        const DivergenceSpec spec(g);
        if (!std::isfinite(criterion(m, spec, th, al, s))) continue;
        const Eigen::VectorXd grad = criterion_gradient(m, spec, th, al, s, w);
        for (int i = 0; i < al.size(); ++i) {
          const double h = h0 * std::max(1.0, std::abs(al[i]));
          Params ap = al, am = al;
          ap[i] += h;
          am[i] -= h;
          const double fd = (criterion(m, spec, th, ap, s) - criterion(m, spec, th, am, s)) / (2.0 * h);
          CAPTURE(m.name());
          CAPTURE(g);
          CHECK(std::abs(grad[i] - fd) <= 1e-5 * std::max(1.0, std::abs(grad[i])));
        }
      }
    }
  }
}

TEST_CASE("escort strategies") {
  const auto n = ModelSpec::normal();
  CHECK(escort(n, std::vector<double>{1.0, 2.0, 3.0}, EscortMean{})[0] == doctest::Approx(2.0));
  CHECK(escort(n, std::vector<double>{0.0, 0.0, 10.0}, EscortMedian{})[0] == 0.0);
  CHECK(escort(n, std::vector<double>{0.0, 0.0, 10.0}, EscortFixed{n.params({1.25})})[0] == 1.25);
  CHECK(escort(n, std::vector<double>{1.0, 2.0, 6.0}, EscortMle{})[0] == doctest::Approx(3.0));
  CHECK_THROWS_AS(escort(n, std::vector<double>{}, EscortMean{}), std::invalid_argument);
  const auto e = ModelSpec::exponential();
  CHECK(escort(e, std::vector<double>{1.0, 2.0, 3.0}, EscortMean{})[0] == doctest::Approx(0.5));
  CHECK(escort(e, std::vector<double>{1.0, 2.0, 30.0}, EscortMedian{})[0] == doctest::Approx(std::log(2.0) / 2.0));
  CHECK(escort_name(parse_escort("median")) == "median");
  CHECK(escort_name(parse_escort("fixed:1.5")) == "fixed:1.5");
  CHECK_THROWS_AS(parse_escort("mode"), std::invalid_argument);
}

TEST_CASE("dphide reference examples") {
  const auto n = ModelSpec::normal();
  const std::vector<double> s123{1.0, 2.0, 3.0};
  for (double th : {17.0, -4.0, 2.0}) {
    const auto r = dphide(n, DivergenceSpec(0.0), n.params({th}), s123);
    CHECK(r.converged);
    CHECK(r.alpha_hat[0] == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(r.gradient_norm <= 1e-8);
  }
  const double e = std::exp(1.0);
  const auto p = ModelSpec::pareto();
  const auto rp = dphide(p, DivergenceSpec(0.0), p.params({3.0}), std::vector<double>{e, e, e});
  CHECK(rp.converged);
  CHECK(rp.alpha_hat[0] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("dphide is consistent at n = 10^4") {
  for (const auto& m : {ModelSpec::normal(), ModelSpec::exponential(), ModelSpec::gamma(2.0), ModelSpec::pareto()}) {
    const Params t0 = unit_params(m);
    Rng rng(2024);
    const Sample s = draw_sample(m, t0, 10000, rng);
    const Params th = mle(m, s);
    for (double g : {-1.0, 0.0, 0.5, 1.0, 2.0}) {
      const auto r = dphide(m, DivergenceSpec(g), th, s);
      CAPTURE(m.name());
      CAPTURE(g);
      CHECK(r.converged);
      CHECK(std::abs(r.alpha_hat[0] - t0[0]) <= 0.1);
    }
  }
}

TEST_CASE("gamma -> 0 continuity") {
  for (const auto& m : {ModelSpec::normal(), ModelSpec::exponential(), ModelSpec::weibull(1.5)}) {
    Rng rng(77);
    const Sample s = draw_sample(m, unit_params(m), 60, rng);
    const Params th = perturb(m, mle(m, s), 0.1);
    const auto r0 = dphide(m, DivergenceSpec(0.0), th, s);
    const auto r1 = dphide(m, DivergenceSpec(1e-6), th, s);
    CHECK(std::abs(r0.alpha_hat[0] - r1.alpha_hat[0]) <= 1e-4);
  }
}

TEST_CASE("argmax does not depend on the constant convention") {
  // alternative form: integral - (1/(g n)) sum r^g - 1/(g (g - 1)) + 5
  for (const auto& m : {ModelSpec::normal(), ModelSpec::exponential(), ModelSpec::normal_loc_scale()}) {
    const Params t0 = unit_params(m);
    Rng rng(64);
    const Sample s = draw_sample(m, t0, 50, rng);
    const Params th = mle(m, s);
    for (double g : {-1.0, 0.5, 2.0}) {
      auto f = [&](const auto& alpha) {
        using S = typename std::decay_t<decltype(alpha)>::Scalar;
        using std::exp;
        S acc(0.0);
        for (double x : s) acc += exp(g * log_density_ratio<S>(m, th, alpha, x));
        const S integral = dual_integral<S>(m, g, th, alpha);
        if (!is_finite(integral)) return S(-std::numeric_limits<double>::infinity());
        return integral - acc / (g * static_cast<double>(s.size())) - 1.0 / (g * (g - 1.0)) + 5.0;
      };
      const auto obj = make_objective(f);
      const auto alt = maximize(m, th, obj);
      const auto ref = dphide(m, DivergenceSpec(g), th, s);
      CAPTURE(m.name());
      CAPTURE(g);
      for (int i = 0; i < th.size(); ++i) CHECK(alt.alpha_hat[i] == doctest::Approx(ref.alpha_hat[i]).epsilon(1e-8));
    }
  }
}

TEST_CASE("population criterion peaks at the true parameter") {
  const auto m = ModelSpec::normal();
  const Params t0 = m.params({0.4});
  const Params th = m.params({0.9});
  for (double g : {-1.0, 0.5, 2.0}) {
    double best = -std::numeric_limits<double>::infinity();
    double best_alpha = 0.0;
    for (int k = -10; k <= 10; ++k) {
      const Params a = m.params({0.4 + 0.1 * k + 0.03});
      const double inf = std::numeric_limits<double>::infinity();
      const double v = integrate(
                           [&](double x) {
                             const double p = density(m, t0, x);
                             if (p == 0.0) return 0.0;
                             return p * criterion(m, DivergenceSpec(g), th, a, std::vector<double>{x});
                           },
                           -inf, inf)
                           .value;
      if (v > best) {
        best = v;
        best_alpha = a[0];
      }
    }
    CAPTURE(g);
    CHECK(best_alpha == doctest::Approx(0.43));
  }
}
