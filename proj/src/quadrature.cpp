#include "dualdiv/quadrature.hpp"

#include <array>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

namespace dualdiv {

namespace {

constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the nodes kXgk[1], kXgk[3], kXgk[5], kXgk[7].
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gauss_kronrod(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  auto eval = [&](double x) {
    const double v = f(x);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "integrand not finite at x = " << x;
      throw QuadratureError(os.str(), std::numeric_limits<double>::quiet_NaN(),
                            std::numeric_limits<double>::infinity());
    }
    return v;
  };
  const double fc = eval(c);
  double kronrod = kWgk[7] * fc;
  double gauss = kWg[3] * fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double pair = eval(c - dx) + eval(c + dx);
    kronrod += kWgk[j] * pair;
    if (j % 2 == 1) gauss += kWg[j / 2] * pair;
  }
  return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

QuadratureResult integrate_finite(const std::function<double(double)>& f, double a, double b,
                                  const QuadratureOptions& opts) {
  std::priority_queue<Segment> heap;
  Segment first = gauss_kronrod(f, a, b);
  double total = first.value;
  double err = first.error;
  heap.push(first);
  int subdivisions = 0;
  while (err > std::max(opts.abs_tol, opts.rel_tol * std::abs(total))) {
    if (subdivisions >= opts.max_subdivisions) {
      std::ostringstream os;
      os << "quadrature did not converge after " << subdivisions
         << " subdivisions (estimate " << total << ", error " << err << ")";
      throw QuadratureError(os.str(), total, err);
    }
    const Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const Segment left = gauss_kronrod(f, worst.a, mid);
    const Segment right = gauss_kronrod(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++subdivisions;
    // Re-sum occasionally so the running totals do not drift.
    if (subdivisions % 64 == 0) {
      std::vector<Segment> all;
      total = err = 0.0;
      while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
      }
      for (const auto& s : all) {
        total += s.value;
        err += s.error;
        heap.push(s);
      }
    }
  }
  return {total, err, subdivisions};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts) {
  if (std::isnan(a) || std::isnan(b)) throw std::invalid_argument("integrate: NaN limit");
  if (a == b) return {0.0, 0.0, 0};
  if (a > b) {
    auto r = integrate(f, b, a, opts);
    r.value = -r.value;
    return r;
  }
  const bool lo_inf = std::isinf(a);
  const bool hi_inf = std::isinf(b);
  if (!lo_inf && !hi_inf) return integrate_finite(f, a, b, opts);
  if (lo_inf && hi_inf) {
    // x = t / (1 - t^2) on (-1, 1)
    auto g = [&f](double t) {
      const double d = 1.0 - t * t;
      return f(t / d) * (1.0 + t * t) / (d * d);
    };
    return integrate_finite(g, -1.0, 1.0, opts);
  }
  if (hi_inf) {
    // x = a + t / (1 - t) on [0, 1)
    auto g = [&f, a](double t) {
      const double d = 1.0 - t;
      return f(a + t / d) / (d * d);
    };
    return integrate_finite(g, 0.0, 1.0, opts);
  }
  auto g = [&f, b](double t) {
    const double d = 1.0 - t;
    return f(b - t / d) / (d * d);
  };
  return integrate_finite(g, 0.0, 1.0, opts);
}

namespace {

// Integral of exp(log_g(x)) dx over the support of m.
double integrate_log_integrand(const ModelSpec& m, const std::function<double(double)>& log_g,
                               const QuadratureOptions& opts) {
  auto finite_exp = [](double v) { return v == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(v); };
  if (m.family() == Family::normal_known_scale || m.family() == Family::normal_loc_scale) {
    return integrate([&](double x) { return finite_exp(log_g(x)); },
                     -std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity(), opts)
        .value;
  }
  const double lower = m.family() == Family::pareto ? 0.0 : -std::numeric_limits<double>::infinity();
  return integrate(
             [&](double y) {
               const double x = std::exp(y);
               if (!m.in_support(x)) return 0.0;
               return finite_exp(log_g(x) + y);
             },
             lower, std::numeric_limits<double>::infinity(), opts)
      .value;
}

}  // namespace

double expectation_oracle(const ModelSpec& m, const Params& p,
                          const std::function<double(double)>& f, const QuadratureOptions& opts) {
  m.require_valid(p);
  auto plain = [&](double x) {
    const double lp = log_density<double>(m, p, x);
    if (lp == -std::numeric_limits<double>::infinity()) return 0.0;
    return f(x) * std::exp(lp);
  };
  if (m.family() == Family::normal_known_scale || m.family() == Family::normal_loc_scale) {
    return integrate(plain, -std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity(), opts)
        .value;
  }
  const double lower = m.family() == Family::pareto ? 0.0 : -std::numeric_limits<double>::infinity();
  return integrate(
             [&](double y) {
               const double x = std::exp(y);
               if (!m.in_support(x)) return 0.0;
               return plain(x) * x;
             },
             lower, std::numeric_limits<double>::infinity(), opts)
      .value;
}

double quadrature_oracle(const ModelSpec& m, const DivergenceSpec& spec, const Params& theta,
                         const Params& alpha, const QuadratureOptions& opts) {
  m.require_valid(theta);
  m.require_valid(alpha);
  if (spec.is_kl()) throw std::domain_error("quadrature_oracle: gamma = 1 has no power form");
  const double gm1 = spec.gamma() - 1.0;
  auto log_g = [&](double x) {
    const double lt = log_density<double>(m, theta, x);
    if (lt == -std::numeric_limits<double>::infinity()) return lt;
    return gm1 * (lt - log_density<double>(m, alpha, x)) + lt;
  };
  return integrate_log_integrand(m, log_g, opts) / gm1;
}

double kl_quadrature_oracle(const ModelSpec& m, const Params& theta, const Params& alpha,
                            const QuadratureOptions& opts) {
  return expectation_oracle(
      m, theta,
      [&](double x) { return log_density<double>(m, theta, x) - log_density<double>(m, alpha, x); },
      opts);
}

}  // namespace dualdiv
