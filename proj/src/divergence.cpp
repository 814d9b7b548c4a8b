#include "dualdiv/divergence.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dualdiv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

DivergenceSpec::DivergenceSpec(double gamma) : gamma_(gamma) {
  if (!std::isfinite(gamma)) {
    throw std::invalid_argument("divergence index gamma must be finite");
  }
}

DivergenceSpec DivergenceSpec::parse(std::string_view text) {
  const std::string key = lowercase(text);
  if (key == "chi2m" || key == "modified-chi2") return modified_chi_square();
  if (key == "klm" || key == "kl_m" || key == "modified-kl") return modified_kl();
  if (key == "hellinger") return hellinger();
  if (key == "kl") return kl();
  if (key == "chi2") return chi_square();

  double value = 0.0;
  const char* first = key.data();
  const char* last = key.data() + key.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || key.empty()) {
    throw std::invalid_argument("unknown divergence '" + std::string(text) + "'");
  }
  return DivergenceSpec(value);
}

bool DivergenceSpec::is_modified_kl() const noexcept {
  return std::abs(gamma_) < kGammaLimitTolerance;
}

bool DivergenceSpec::is_kl() const noexcept {
  return std::abs(gamma_ - 1.0) < kGammaLimitTolerance;
}

std::string DivergenceSpec::name() const {
  if (is_modified_kl()) return "KLm";
  if (is_kl()) return "KL";
  if (gamma_ == 2.0) return "chi2";
  if (gamma_ == -1.0) return "chi2m";
  if (gamma_ == 0.5) return "hellinger";
  std::ostringstream os;
  os << "power(" << gamma_ << ")";
  return os.str();
}

double phi(const DivergenceSpec& spec, double x) noexcept {
  if (std::isnan(x) || x < 0.0) return kInf;
  const double g = spec.gamma();
  if (x == 0.0) {
    // lim_{x -> 0} phi_gamma(x) is 1/gamma for gamma > 0 and diverges otherwise.
    if (spec.is_modified_kl() || g < 0.0) return kInf;
    if (spec.is_kl()) return 1.0;
    return 1.0 / g;
  }
  const double lx = std::log(x);
  if (spec.is_modified_kl()) return -lx + x - 1.0;
  if (spec.is_kl()) return x * lx - x + 1.0;
  // x^g - g x + g - 1 == expm1(g log x) - g (x - 1)
  return (std::expm1(g * lx) - g * (x - 1.0)) / (g * (g - 1.0));
}

double phi_prime(const DivergenceSpec& spec, double x) {
  if (!(x > 0.0)) throw std::domain_error("phi_prime requires x > 0");
  if (spec.is_kl()) return std::log(x);
  const double gm1 = spec.gamma() - 1.0;
  return std::expm1(gm1 * std::log(x)) / gm1;
}

double fenchel_term(const DivergenceSpec& spec, double x) {
  if (!(x > 0.0)) throw std::domain_error("fenchel_term requires x > 0");
  if (spec.is_modified_kl()) return std::log(x);
  const double g = spec.gamma();
  return std::expm1(g * std::log(x)) / g;
}

}  // namespace dualdiv
