#pragma once

#include <cmath>
#include <limits>

namespace avgsfde {

// mantissa * exp(log_scale); keeps e^{+-x} factors out of the representable
// range check until the final combination.
struct Scaled {
  double mantissa = 0.0;
  double log_scale = 0.0;

  double value() const {
    if (mantissa == 0.0) return 0.0;
    return mantissa * std::exp(log_scale);
  }

  // log|value|; -inf for zero.
  double log_abs() const {
    return mantissa == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(std::abs(mantissa)) + log_scale;
  }

  Scaled normalized() const {
    if (mantissa == 0.0 || !std::isfinite(mantissa)) return *this;
    int e = 0;
    const double m = std::frexp(mantissa, &e);
    return {m, log_scale + e * std::log(2.0)};
  }

  friend Scaled operator*(Scaled x, Scaled y) { return {x.mantissa * y.mantissa, x.log_scale + y.log_scale}; }
  friend Scaled operator*(Scaled x, double k) { return {x.mantissa * k, x.log_scale}; }
  friend Scaled operator*(double k, Scaled x) { return {x.mantissa * k, x.log_scale}; }
};

// x + y evaluated without forming either term in linear space.
inline Scaled add(Scaled x, Scaled y) {
  if (x.mantissa == 0.0) return y;
  if (y.mantissa == 0.0) return x;
  if (x.log_scale >= y.log_scale) return {x.mantissa + y.mantissa * std::exp(y.log_scale - x.log_scale), x.log_scale};
  return {y.mantissa + x.mantissa * std::exp(x.log_scale - y.log_scale), y.log_scale};
}

// A value and its derivative sharing one exponential scale.
struct ScaledPair {
  double value = 0.0;
  double deriv = 0.0;
  double log_scale = 0.0;

  double v() const { return value == 0.0 ? 0.0 : value * std::exp(log_scale); }
  double d() const { return deriv == 0.0 ? 0.0 : deriv * std::exp(log_scale); }
};

}  // namespace avgsfde
