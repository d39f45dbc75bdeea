#include "illiquid/utility.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace illiquid {

UtilitySpec UtilitySpec::power(double gamma) {
  if (!(gamma < 1.0) || gamma == 0.0 || !std::isfinite(gamma)) {
    throw std::invalid_argument("utility: power gamma must satisfy gamma < 1, gamma != 0");
  }
  return UtilitySpec(Kind::power, gamma);
}

UtilitySpec UtilitySpec::log() { return UtilitySpec(Kind::log, 0.0); }

double UtilitySpec::evaluate(double x) const {
  if (!(x > 0.0)) throw std::domain_error("utility: wealth must be positive");
  if (kind_ == Kind::log) return std::log(x);
  return std::pow(x, gamma_) / gamma_;
}

double UtilitySpec::marginal(double x) const {
  if (!(x > 0.0)) throw std::domain_error("utility: wealth must be positive");
  if (kind_ == Kind::log) return 1.0 / x;
  return std::pow(x, gamma_ - 1.0);
}

double UtilitySpec::conjugate(double y) const {
  if (!(y > 0.0)) throw std::domain_error("utility: conjugate argument must be positive");
  if (kind_ == Kind::log) return -std::log(y) - 1.0;
  return (1.0 - gamma_) / gamma_ * std::pow(y, gamma_ / (gamma_ - 1.0));
}

GrowthConstants UtilitySpec::growth() const {
  GrowthConstants g;
  if (kind_ == Kind::log) {
    // ln x <= x^p / (p e) for every p > 0; same bound for -ln x with p < 0.
    g.upper_p = 0.5;
    g.upper_c = 1.0 / (0.5 * std::exp(1.0));
    g.lower_p = -0.5;
    g.lower_c = 1.0 / (0.5 * std::exp(1.0));
  } else if (gamma_ > 0.0) {
    g.upper_p = gamma_;
    g.upper_c = 1.0 / gamma_;
  } else {
    // U <= 0, so any (C, p) bounds the positive part.
    g.upper_p = 0.5;
    g.upper_c = 1.0;
    g.lower_p = gamma_;
    g.lower_c = 1.0 / -gamma_;
  }
  return g;
}

std::string UtilitySpec::describe() const {
  if (kind_ == Kind::log) return "log";
  std::ostringstream os;
  os << "power(gamma=" << gamma_ << ")";
  return os.str();
}

}  // namespace illiquid
