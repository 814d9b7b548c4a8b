#pragma once

#include <functional>
#include <stdexcept>

#include "dualdiv/divergence.hpp"
#include "dualdiv/models.hpp"

namespace dualdiv {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-12;
  int max_subdivisions = 10000;
};

struct QuadratureResult {
  double value;
  double error;
  int subdivisions;
};

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double estimate, double error)
      : std::runtime_error(what), estimate_(estimate), error_(error) {}
  double estimate() const noexcept { return estimate_; }
  double error_estimate() const noexcept { return error_; }

 private:
  double estimate_;
  double error_;
};

/// Globally adaptive 15-point Gauss-Kronrod integration over [a, b]. Either
/// end may be infinite; infinite ranges are mapped onto finite ones. Throws
/// QuadratureError on non-finite integrand values or when the subdivision cap
/// is reached before the tolerance is met.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts = {});

/// E_p[f(X)] under the model, computed by quadrature. Positive-support
/// families are integrated in log x.
double expectation_oracle(const ModelSpec& m, const Params& p,
                          const std::function<double(double)>& f,
                          const QuadratureOptions& opts = {});

/// (1/(gamma-1)) * integral of (dP_theta/dP_alpha)^(gamma-1) dP_theta by
/// quadrature; gamma = 1 throws std::domain_error.
double quadrature_oracle(const ModelSpec& m, const DivergenceSpec& spec, const Params& theta,
                         const Params& alpha, const QuadratureOptions& opts = {});

/// integral of log(dP_theta/dP_alpha) dP_theta by quadrature.
double kl_quadrature_oracle(const ModelSpec& m, const Params& theta, const Params& alpha,
                            const QuadratureOptions& opts = {});

}  // namespace dualdiv
