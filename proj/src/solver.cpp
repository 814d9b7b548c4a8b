#include "dualdiv/solver.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace dualdiv {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kGolden = 0.6180339887498948482;

// alpha = u for free coordinates, alpha = exp(u) for positive ones.
class Reparam {
 public:
  Reparam(const ModelSpec& m, const Objective& f) : m_(m), f_(f), dim_(m.dim()) {}

  int dim() const { return dim_; }

  Eigen::VectorXd to_u(const Params& a) const {
    Eigen::VectorXd u(dim_);
    for (int i = 0; i < dim_; ++i) u[i] = m_.positive_coordinate(i) ? std::log(a[i]) : a[i];
    return u;
  }
  Params to_alpha(const Eigen::VectorXd& u) const {
    Params a(dim_);
    for (int i = 0; i < dim_; ++i) a[i] = m_.positive_coordinate(i) ? std::exp(u[i]) : u[i];
    return a;
  }

  double value(const Eigen::VectorXd& u) const {
    for (int i = 0; i < dim_; ++i) {
      if (!std::isfinite(u[i])) return kNegInf;
    }
    const Params a = to_alpha(u);
    if (!m_.valid(a)) return kNegInf;
    const double v = f_(a);
    return std::isnan(v) ? kNegInf : v;
  }

  // Value, gradient and Hessian in u.
  template <int N>
  Jet<N> jet(const Eigen::VectorXd& u) const {
    ParamVector<Jet<N>> a(dim_);
    for (int i = 0; i < dim_; ++i) {
      const Jet<N> ui = Jet<N>::variable(u[i], i);
      a[i] = m_.positive_coordinate(i) ? exp(ui) : ui;
    }
    return f_(a);
  }

  // Gradient in alpha from the gradient in u.
  Eigen::VectorXd alpha_gradient(const Eigen::VectorXd& u, const Eigen::VectorXd& gu) const {
    Eigen::VectorXd g = gu;
    for (int i = 0; i < dim_; ++i) {
      if (m_.positive_coordinate(i)) g[i] /= std::exp(u[i]);
    }
    return g;
  }

  double alpha_step(const Eigen::VectorXd& from, const Eigen::VectorXd& to) const {
    const Params a = to_alpha(from);
    const Params b = to_alpha(to);
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s = std::max(s, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(a[i])));
    return s;
  }

 private:
  const ModelSpec& m_;
  const Objective& f_;
  int dim_;
};

struct Derivs {
  double value;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

Derivs derivatives(const Reparam& r, const Eigen::VectorXd& u) {
  if (r.dim() == 1) {
    const Jet<1> j = r.jet<1>(u);
    return {j.v, Eigen::VectorXd(j.g), Eigen::MatrixXd(j.h)};
  }
  const Jet<2> j = r.jet<2>(u);
  return {j.v, Eigen::VectorXd(j.g), Eigen::MatrixXd(j.h)};
}

bool gradient_small(const Reparam& r, const Eigen::VectorXd& u, const Derivs& d,
                    const SolverOptions& opts, double* norm) {
  *norm = r.alpha_gradient(u, d.grad).norm();
  return *norm <= opts.gradient_tol * std::max(1.0, std::abs(d.value));
}

struct NewtonOutcome {
  Eigen::VectorXd u;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;  // Hessian not negative definite or no ascent step
};

NewtonOutcome newton(const Reparam& r, Eigen::VectorXd u, const SolverOptions& opts, int budget) {
  NewtonOutcome out;
  double last_step = std::numeric_limits<double>::infinity();
  for (int it = 0; it < budget; ++it) {
    out.iterations = it + 1;
    const Derivs d = derivatives(r, u);
    if (!std::isfinite(d.value) || !d.grad.allFinite() || !d.hess.allFinite()) {
      out.stalled = true;
      break;
    }
    double gnorm = 0.0;
    const bool small = gradient_small(r, u, d, opts, &gnorm);
    if (small && last_step <= opts.step_tol) {
      out.converged = true;
      break;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(d.hess);
    if (eig.eigenvalues().maxCoeff() >= 0.0) {
      out.stalled = !small;
      out.converged = small;
      break;
    }
    const Eigen::VectorXd dir = -eig.eigenvectors() *
                                (eig.eigenvalues().cwiseInverse().asDiagonal() *
                                 (eig.eigenvectors().transpose() * d.grad));
    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial;
    // Near the optimum the predicted gain drops below the resolution of the
    // criterion; comparing values is then meaningless, take the full step.
    const double predicted_gain = 0.5 * std::abs(d.grad.dot(dir));
    if (predicted_gain <= 1e-13 * std::max(1.0, std::abs(d.value))) {
      trial = u + dir;
      accepted = std::isfinite(r.value(trial));
    }
    for (int h = 0; h < 60 && !accepted; ++h, t *= 0.5) {
      trial = u + t * dir;
      const double v = r.value(trial);
      if (v > d.value || (v == d.value && small)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No representable ascent: at the optimum up to rounding, or stuck.
      out.converged = small;
      out.stalled = !small;
      break;
    }
    last_step = r.alpha_step(u, trial);
    u = trial;
    if (small && last_step <= opts.step_tol) {
      out.converged = true;
      break;
    }
  }
  out.u = u;
  return out;
}

// Golden-section maximization of g on [a, c] given an interior b with
// g(b) >= g(a), g(b) >= g(c).
double golden(const std::function<double(double)>& g, double a, double b, double c, double fb) {
  double x = b;
  double fx = fb;
  for (int it = 0; it < 200 && std::abs(c - a) > 1e-13 * std::max(1.0, std::abs(x)); ++it) {
    const bool left = (x - a) > (c - x);
    const double y = left ? x - (1.0 - kGolden) * (x - a) : x + (1.0 - kGolden) * (c - x);
    const double fy = g(y);
    if (fy > fx) {
      if (left) c = x; else a = x;
      x = y;
      fx = fy;
    } else {
      if (left) a = y; else c = y;
    }
  }
  return x;
}

// Walks from 0 in direction `sign` with doubling steps while g increases.
// Returns the maximizing point found along that ray together with its value.
std::pair<double, double> walk(const std::function<double(double)>& g, double f0, double h,
                               double sign) {
  double prev = 0.0, fprev = f0;
  double cur = sign * h, fcur = g(cur);
  if (!(fcur > f0)) return {0.0, f0};
  double step = h;
  for (int k = 0; k < 80; ++k) {
    step *= 2.0;
    const double next = cur + sign * step;
    const double fnext = g(next);
    if (!(fnext > fcur)) {
      const double lo = std::min(prev, next), hi = std::max(prev, next);
      const double x = golden(g, lo, cur, hi, fcur);
      return {x, g(x)};
    }
    prev = cur;
    fprev = fcur;
    cur = next;
    fcur = fnext;
  }
  (void)fprev;
  return {cur, fcur};
}

// One-dimensional search along coordinate i from u.
Eigen::VectorXd line_search(const Reparam& r, const Eigen::VectorXd& u, int i, double h) {
  auto g = [&](double s) {
    Eigen::VectorXd v = u;
    v[i] += s;
    return r.value(v);
  };
  const double f0 = g(0.0);
  const auto up = walk(g, f0, h, 1.0);
  const auto down = walk(g, f0, h, -1.0);
  double best = 0.0;
  if (up.second > f0 || down.second > f0) {
    if (std::abs(up.second - down.second) <= 1e-12 * std::max(1.0, std::abs(up.second))) {
      best = std::abs(up.first) <= std::abs(down.first) ? up.first : down.first;
    } else {
      best = up.second > down.second ? up.first : down.first;
    }
  }
  Eigen::VectorXd out = u;
  out[i] += best;
  return out;
}

}  // namespace

EstimationResult maximize(const ModelSpec& m, const Params& start, const Objective& objective,
                          const SolverOptions& opts) {
  m.require_valid(start);
  const Reparam r(m, objective);
  const Eigen::VectorXd u0 = r.to_u(start);
  if (!std::isfinite(r.value(u0))) throw std::runtime_error("criterion everywhere -inf");

  EstimationResult res;
  NewtonOutcome nt = newton(r, u0, opts, opts.max_iterations);
  int iterations = nt.iterations;
  Eigen::VectorXd u = nt.u;
  res.solver_path = SolverPath::newton;

  if (!nt.converged) {
    res.solver_path = SolverPath::fallback_line_search;
    u = u0;
    for (int cycle = 0; cycle < 100; ++cycle) {
      const Eigen::VectorXd before = u;
      for (int i = 0; i < r.dim(); ++i) {
        const double h = m.positive_coordinate(i) ? 0.05 : 0.05 * std::max(1.0, std::abs(u[i]));
        u = line_search(r, u, i, h);
      }
      ++iterations;
      if (r.alpha_step(before, u) <= opts.step_tol || r.dim() == 1) break;
    }
    const NewtonOutcome polish = newton(r, u, opts, opts.max_iterations);
    iterations += polish.iterations;
    const double fu = r.value(u);
    if (polish.converged && r.value(polish.u) >= fu - 1e-12 * std::max(1.0, std::abs(fu))) u = polish.u;
    nt.converged = polish.converged;
  }

  res.alpha_hat = r.to_alpha(u);
  res.iterations = iterations;
  const Derivs d = derivatives(r, u);
  res.criterion_value = r.value(u);
  double gnorm = std::numeric_limits<double>::infinity();
  const bool small = std::isfinite(d.value) && gradient_small(r, u, d, opts, &gnorm);
  res.gradient_norm = gnorm;
  res.converged = nt.converged && small;
  return res;
}

}  // namespace dualdiv
