#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <utility>

#include "avgsfde/error.hpp"

namespace avgsfde {

// Model tuple for dX = (aX + b/(1+t) * int_{-1}^t X) dt + sigma dB.
// The history enters the t >= 0 dynamics only through psi(0) and its integral.
struct Params {
  double a = 0.0;
  double b = 0.0;
  double sigma = 1.0;
  double psi0 = 0.0;
  double psi_int = 0.0;

  void validate() const {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(sigma) || !std::isfinite(psi0) ||
        !std::isfinite(psi_int)) {
      fail(ErrorKind::invalid_argument, "parameters must be finite");
    }
    if (!(sigma > 0.0)) fail(ErrorKind::invalid_argument, "sigma must be positive");
  }
};

enum class RegimeLabel {
  RecurrentOU,
  RecurrentShifted,
  PolynomialGrowth,
  ExponentialGrowth,
  SubexponentialGrowth,
  BrownianLike,
  DegenerateOU,
  DegenerateBM,
  DegenerateExp,
};

struct Regime {
  RegimeLabel label = RegimeLabel::DegenerateBM;
  bool degenerate_integer = false;
  // Integer n = round(b/a) when degenerate_integer is set, zero otherwise.
  int integer_ratio = 0;

  friend bool operator==(const Regime&, const Regime&) = default;
};

namespace tolerance {
inline constexpr double boundary = 1e-12;
inline constexpr double integer_ratio = 1e-9;
}  // namespace tolerance

inline bool is_zero(double v) { return std::abs(v) <= tolerance::boundary; }

inline std::string_view to_string(RegimeLabel label) {
  switch (label) {
    case RegimeLabel::RecurrentOU: return "RecurrentOU";
    case RegimeLabel::RecurrentShifted: return "RecurrentShifted";
    case RegimeLabel::PolynomialGrowth: return "PolynomialGrowth";
    case RegimeLabel::ExponentialGrowth: return "ExponentialGrowth";
    case RegimeLabel::SubexponentialGrowth: return "SubexponentialGrowth";
    case RegimeLabel::BrownianLike: return "BrownianLike";
    case RegimeLabel::DegenerateOU: return "DegenerateOU";
    case RegimeLabel::DegenerateBM: return "DegenerateBM";
    case RegimeLabel::DegenerateExp: return "DegenerateExp";
  }
  return "?";
}

// Nearest integer to x when x is within the classification tolerance of it.
inline bool near_integer(double x, double& rounded) {
  rounded = std::round(x);
  return std::abs(x - rounded) <= tolerance::integer_ratio * (1.0 + std::abs(x));
}

inline Regime classify(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) fail(ErrorKind::invalid_argument, "classify: non-finite (a, b)");
  Regime r;
  const bool a_zero = is_zero(a);
  const bool b_zero = is_zero(b);
  if (a_zero) {
    r.label = b_zero ? RegimeLabel::DegenerateBM
                     : (b > 0.0 ? RegimeLabel::SubexponentialGrowth : RegimeLabel::BrownianLike);
    return r;
  }
  if (b_zero) {
    r.label = a < 0.0 ? RegimeLabel::DegenerateOU : RegimeLabel::DegenerateExp;
    return r;
  }
  if (a > 0.0) {
    r.label = RegimeLabel::ExponentialGrowth;
  } else if (is_zero(a + b)) {
    r.label = RegimeLabel::RecurrentShifted;
  } else {
    r.label = (a + b < 0.0) ? RegimeLabel::RecurrentOU : RegimeLabel::PolynomialGrowth;
  }
  double n = 0.0;
  if (near_integer(b / a, n)) {
    if ((a < 0.0 && n >= 1.0) || (a > 0.0 && n <= -1.0)) {
      r.degenerate_integer = true;
      r.integer_ratio = static_cast<int>(n);
    }
  }
  return r;
}

inline Regime classify(const Params& p) { return classify(p.a, p.b); }

inline bool is_recurrent(RegimeLabel l) {
  return l == RegimeLabel::RecurrentOU || l == RegimeLabel::RecurrentShifted || l == RegimeLabel::DegenerateOU;
}

inline bool is_growth(RegimeLabel l) {
  return l == RegimeLabel::PolynomialGrowth || l == RegimeLabel::ExponentialGrowth ||
         l == RegimeLabel::SubexponentialGrowth;
}

// Two-population market: fundamentalists with strength alpha, trend followers
// with strength beta, feeding back into (a, b).
inline std::pair<double, double> market_to_ab(double alpha, double beta) {
  if (!std::isfinite(alpha) || !std::isfinite(beta)) fail(ErrorKind::invalid_argument, "market_to_ab: non-finite input");
  return {alpha + beta, -alpha};
}

inline std::pair<double, double> ab_to_market(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) fail(ErrorKind::invalid_argument, "ab_to_market: non-finite input");
  return {0.0 - b, a + b};
}

}  // namespace avgsfde
