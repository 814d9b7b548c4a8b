#pragma once

#include <utility>

#include "dualdiv/jet.hpp"
#include "dualdiv/models.hpp"

namespace dualdiv {

enum class SolverPath { newton, fallback_line_search };

struct EstimationResult {
  Params alpha_hat;
  double criterion_value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  SolverPath solver_path = SolverPath::newton;
};

struct SolverOptions {
  int max_iterations = 200;
  double gradient_tol = 1e-8;
  double step_tol = 1e-10;
};

/// Objective alpha -> criterion, evaluated at double, Jet<1> and Jet<2>
/// scalars. A return value of -inf marks alpha as infeasible.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual double operator()(const ParamVector<double>& alpha) const = 0;
  virtual Jet<1> operator()(const ParamVector<Jet<1>>& alpha) const = 0;
  virtual Jet<2> operator()(const ParamVector<Jet<2>>& alpha) const = 0;
};

/// Wraps a generic callable `template <class S> S f(const ParamVector<S>&)`.
template <typename F>
class GenericObjective final : public Objective {
 public:
  explicit GenericObjective(F f) : f_(std::move(f)) {}
  double operator()(const ParamVector<double>& a) const override { return f_(a); }
  Jet<1> operator()(const ParamVector<Jet<1>>& a) const override { return f_(a); }
  Jet<2> operator()(const ParamVector<Jet<2>>& a) const override { return f_(a); }

 private:
  F f_;
};

template <typename F>
GenericObjective<F> make_objective(F f) {
  return GenericObjective<F>(std::move(f));
}

/// Local maximization started at `start`: damped Newton in a parameterization
/// that is logarithmic for positive coordinates, with a bracketing
/// golden-section fallback. Throws std::runtime_error when the objective is
/// -inf at the start.
EstimationResult maximize(const ModelSpec& m, const Params& start, const Objective& objective,
                          const SolverOptions& opts = {});

}  // namespace dualdiv
