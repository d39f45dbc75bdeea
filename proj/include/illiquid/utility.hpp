#pragma once

#include <optional>
#include <string>

namespace illiquid {

/// Growth constants: U+(x) <= C (1 + x^p), and for utilities unbounded
/// below U-(x) <= C' (1 + x^p').
struct GrowthConstants {
  double upper_c = 0.0;
  double upper_p = 0.0;
  std::optional<double> lower_c;
  std::optional<double> lower_p;
};

/// CRRA utility: power x^gamma / gamma (gamma < 1, gamma != 0) or ln x.
class UtilitySpec {
 public:
  enum class Kind { power, log };

  static UtilitySpec power(double gamma);
  static UtilitySpec log();

  Kind kind() const { return kind_; }
  bool is_log() const { return kind_ == Kind::log; }
  /// Risk-aversion parameter; 0 for log.
  double gamma() const { return gamma_; }

  double evaluate(double x) const;
  double marginal(double x) const;
  /// Fenchel-Legendre conjugate sup_{x>0} [U(x) - x y].
  double conjugate(double y) const;

  /// True when U(0+) = -infinity.
  bool unbounded_below() const { return kind_ == Kind::log || gamma_ < 0.0; }
  GrowthConstants growth() const;

  std::string describe() const;

 private:
  UtilitySpec(Kind kind, double gamma) : kind_(kind), gamma_(gamma) {}

  Kind kind_;
  double gamma_;
};

}  // namespace illiquid
