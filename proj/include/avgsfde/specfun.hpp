#pragma once

// Real-argument special functions: Gamma, Kummer M, Tricomi U (beta in {1,2}),
// Bessel J/Y and modified Bessel I/K of orders 0 and 1.
//
// Small arguments use ascending series, large arguments the asymptotic
// expansions truncated at the smallest term. Series that cancel (K, J, Y)
// are summed in binary128 so both branches agree at the switchover.

#include <quadmath.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "avgsfde/error.hpp"
#include "avgsfde/scaled.hpp"

namespace avgsfde::specfun {

inline constexpr double default_target_rel_err = 1e-10;

struct FnAccuracy {
  double target_rel_err = default_target_rel_err;
  double achieved_rel_err_estimate = 0.0;
};

struct FnValue {
  double value = 0.0;
  FnAccuracy accuracy{};
  bool overflow = false;
};

// Value represented as mantissa * exp(log_scale), with accuracy metadata.
struct ScaledValue {
  Scaled scaled{};
  FnAccuracy accuracy{};
};

namespace detail {

inline constexpr double eps = std::numeric_limits<double>::epsilon();

inline bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::round(x); }

// sin(pi x) with exact zeros at the integers.
inline double sin_pi(double x) {
  const double r = x - 2.0 * std::round(0.5 * x);  // r in [-1, 1]
  if (r == 0.0 || std::abs(r) == 1.0) return 0.0;
  return std::sin(std::numbers::pi * r);
}

inline double cos_pi(double x) {
  const double r = x - 2.0 * std::round(0.5 * x);
  if (std::abs(r) == 0.5) return 0.0;
  return std::cos(std::numbers::pi * r);
}

// Lanczos approximation, g = 7, n = 9.
inline constexpr double lanczos_g = 7.0;
inline constexpr double lanczos_coef[9] = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

// log Gamma(x) for x >= 0.5.
inline double lanczos_log_gamma(double x) {
  x -= 1.0;
  double acc = lanczos_coef[0];
  for (int i = 1; i < 9; ++i) acc += lanczos_coef[i] / (x + i);
  const double t = x + lanczos_g + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (x + 0.5) * std::log(t) - t + std::log(acc);
}

inline double lanczos_gamma(double x) {
  if (x > 20.0) return std::exp(lanczos_log_gamma(x));
  x -= 1.0;
  double acc = lanczos_coef[0];
  for (int i = 1; i < 9; ++i) acc += lanczos_coef[i] / (x + i);
  const double t = x + lanczos_g + 0.5;
  return std::sqrt(2.0 * std::numbers::pi) * std::pow(t, x + 0.5) * std::exp(-t) * acc;
}

}  // namespace detail

inline double gamma(double x) {
  if (!std::isfinite(x)) fail(ErrorKind::domain, "gamma: non-finite argument");
  if (detail::is_nonpositive_integer(x)) fail(ErrorKind::domain, "gamma: pole at nonpositive integer");
  if (x < 0.5) return std::numbers::pi / (detail::sin_pi(x) * detail::lanczos_gamma(1.0 - x));
  return detail::lanczos_gamma(x);
}

// 1/Gamma(x); zero at the poles.
inline double rgamma(double x) {
  if (detail::is_nonpositive_integer(x)) return 0.0;
  if (x < 0.5) return detail::sin_pi(x) * detail::lanczos_gamma(1.0 - x) / std::numbers::pi;
  if (x > 170.0) return std::exp(-detail::lanczos_log_gamma(x));
  return 1.0 / detail::lanczos_gamma(x);
}

// log|Gamma(x)|.
inline double log_abs_gamma(double x) {
  if (detail::is_nonpositive_integer(x)) fail(ErrorKind::domain, "log_abs_gamma: pole at nonpositive integer");
  if (x < 0.5)
    return std::log(std::numbers::pi) - std::log(std::abs(detail::sin_pi(x))) - detail::lanczos_log_gamma(1.0 - x);
  return detail::lanczos_log_gamma(x);
}

// ---------------------------------------------------------------------------
// Kummer M

namespace detail {

inline constexpr double kummer_asymptotic_threshold = 50.0;

struct SeriesSum {
  double sum = 0.0;
  double rel_err = 0.0;
};

// sum_k (alpha)_k / (beta)_k x^k / k!
inline SeriesSum kummer_series(double alpha, double beta, double x) {
  double term = 1.0;
  double sum = 1.0;
  double abs_sum = 1.0;
  const double k_floor = std::max(x, -alpha) + 2.0;
  for (int k = 0; k < 4000; ++k) {
    term *= (alpha + k) / (beta + k) * x / (k + 1.0);
    sum += term;
    abs_sum += std::abs(term);
    if (term == 0.0) break;
    if (k > k_floor && std::abs(term) <= 0.25 * eps * std::abs(sum)) break;
  }
  const double rel = sum == 0.0 ? eps : eps * (2.0 + std::sqrt(x + 1.0)) * abs_sum / std::abs(sum);
  return {sum, rel};
}

// Asymptotic series truncated at the smallest term. Returns the relative size
// of the first omitted term as the error estimate.
template <class NextRatio>
SeriesSum asymptotic_sum(NextRatio ratio) {
  double term = 1.0;
  double sum = 1.0;
  double last = 1.0;
  for (int k = 0; k < 500; ++k) {
    const double next = term * ratio(k);
    if (next == 0.0) return {sum, eps};
    if (std::abs(next) >= std::abs(last) && k > 0) return {sum, std::abs(last) + eps};
    sum += next;
    last = std::abs(next);
    term = next;
    if (last <= 0.25 * eps * std::abs(sum)) return {sum, eps};
  }
  return {sum, last};
}

}  // namespace detail

// M(alpha, beta, x) for x >= 0, with the e^x growth kept in the log scale.
inline ScaledValue kummer_m_scaled(double alpha, double beta, double x) {
  if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(x))
    fail(ErrorKind::domain, "kummer_m: non-finite argument");
  if (detail::is_nonpositive_integer(beta)) fail(ErrorKind::domain, "kummer_m: beta is a nonpositive integer");
  if (x < 0.0) fail(ErrorKind::domain, "kummer_m: negative argument");
  ScaledValue out;
  if (x <= detail::kummer_asymptotic_threshold || detail::is_nonpositive_integer(alpha)) {
    const auto s = detail::kummer_series(alpha, beta, x);
    out.scaled = Scaled{s.sum, 0.0};
    out.accuracy.achieved_rel_err_estimate = s.rel_err;
    return out;
  }
  // Exponentially large branch plus the exponentially small recessive branch.
  const auto s1 = detail::asymptotic_sum(
      [&](int k) { return (beta - alpha + k) * (1.0 - alpha + k) / ((k + 1.0) * x); });
  const auto s2 = detail::asymptotic_sum(
      [&](int k) { return -(alpha + k) * (alpha - beta + 1.0 + k) / ((k + 1.0) * x); });
  const double gb = gamma(beta);
  const double big = gb * rgamma(alpha) * std::exp((alpha - beta) * std::log(x)) * s1.sum;
  const double small =
      gb * rgamma(beta - alpha) * detail::cos_pi(alpha) * std::exp(-alpha * std::log(x) - x) * s2.sum;
  out.scaled = Scaled{big + small, x};
  out.accuracy.achieved_rel_err_estimate = std::max(s1.rel_err, 4.0 * detail::eps);
  return out;
}

inline FnValue kummer_m_eval(double alpha, double beta, double x) {
  const auto s = kummer_m_scaled(alpha, beta, x);
  FnValue out;
  out.accuracy = s.accuracy;
  const double m = s.scaled.mantissa;
  if (m != 0.0 && std::log(std::abs(m)) + s.scaled.log_scale > 709.0) {
    out.value = std::copysign(std::numeric_limits<double>::infinity(), m);
    out.overflow = true;
    return out;
  }
  out.value = s.scaled.value();
  return out;
}

inline double kummer_m(double alpha, double beta, double x) { return kummer_m_eval(alpha, beta, x).value; }

// ---------------------------------------------------------------------------
// Tricomi U, beta in {1, 2}

namespace detail {

inline constexpr double tricomi_asymptotic_threshold = 50.0;

// Exact polynomial U(-n, beta, x) = (-1)^n (beta)_n M(-n, beta, x).
inline double tricomi_polynomial(int n, double beta, double x) {
  double poch = 1.0;
  for (int j = 0; j < n; ++j) poch *= beta + j;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 0; k < n; ++k) {
    term *= (-n + k) / (beta + k) * x / (k + 1.0);
    sum += term;
  }
  return (n % 2 == 0 ? 1.0 : -1.0) * poch * sum;
}

// x^{-alpha}/Gamma(alpha) int_0^inf e^{-w} w^{alpha-1} (1 + w/x)^{beta-alpha-1} dw
// by the double-exponential trapezoid rule with w = exp(v - e^{-v}).
inline SeriesSum tricomi_integral(double alpha, double beta, double x) {
  const double power = beta - alpha - 1.0;
  auto f = [&](double v) {
    const double ev = std::exp(-v);
    const double lw = v - ev;
    if (lw > 7.0) {
      const double w = std::exp(lw);
      if (w > 800.0) return 0.0;
    }
    const double w = std::exp(lw);
    const double log_val = -w + alpha * lw + power * std::log1p(w / x);
    if (log_val < -745.0) return 0.0;
    return std::exp(log_val) * (1.0 + ev);
  };
  // Lower cutoff where w^alpha is negligible: v - e^{-v} < (log eps - 40)/alpha.
  const double lw_min = std::max(-745.0, (-60.0) / std::max(alpha, 1e-3));
  double v_lo = -1.0;
  while (v_lo - std::exp(-v_lo) > lw_min && v_lo > -10.0) v_lo -= 0.25;
  const double v_hi = 7.0;
  double h = 0.25;
  double sum = 0.0;
  for (double v = v_lo; v <= v_hi + 1e-12; v += h) sum += f(v);
  double estimate = h * sum;
  double rel = 1.0;
  for (int level = 0; level < 10; ++level) {
    double extra = 0.0;
    for (double v = v_lo + 0.5 * h; v <= v_hi; v += h) extra += f(v);
    sum += extra;
    h *= 0.5;
    const double next = h * sum;
    rel = std::abs(next - estimate) / std::max(std::abs(next), std::numeric_limits<double>::min());
    estimate = next;
    if (rel < 1e-13 && level >= 2) break;
  }
  const double scale = std::exp(-alpha * std::log(x)) * rgamma(alpha);
  // The trapezoid error after convergence is far below the last difference.
  return {estimate * scale, std::max(std::min(rel, 1e-12), 8.0 * eps)};
}

inline SeriesSum tricomi_asymptotic(double alpha, double beta, double x) {
  const auto s = asymptotic_sum([&](int k) { return -(alpha + k) * (alpha - beta + 1.0 + k) / ((k + 1.0) * x); });
  return {std::exp(-alpha * std::log(x)) * s.sum, s.rel_err};
}

inline SeriesSum tricomi_positive(double alpha, double beta, double x) {
  if (x >= tricomi_asymptotic_threshold) {
    const auto s = tricomi_asymptotic(alpha, beta, x);
    if (s.rel_err < 1e-15) return s;
  }
  return tricomi_integral(alpha, beta, x);
}

}  // namespace detail

inline FnValue tricomi_u_eval(double alpha, double beta, double x) {
  if (!std::isfinite(alpha) || !std::isfinite(x)) fail(ErrorKind::domain, "tricomi_u: non-finite argument");
  if (beta != 1.0 && beta != 2.0) fail(ErrorKind::unsupported, "tricomi_u: only beta in {1, 2} is supported");
  if (!(x > 0.0)) fail(ErrorKind::domain, "tricomi_u: argument must be positive");
  FnValue out;
  const double n_round = std::round(alpha);
  if (alpha <= 0.0 && std::abs(alpha - n_round) <= 1e-13 * (1.0 + std::abs(alpha))) {
    out.value = detail::tricomi_polynomial(static_cast<int>(-n_round), beta, x);
    out.accuracy.achieved_rel_err_estimate = detail::eps * (1.0 - n_round);
    return out;
  }
  if (alpha > 0.0) {
    const auto s = detail::tricomi_positive(alpha, beta, x);
    out.value = s.sum;
    out.accuracy.achieved_rel_err_estimate = s.rel_err;
    return out;
  }
  // Negative non-integer alpha: contiguous relation in alpha, run downward
  // (the dominant direction for U) from a start in (0, 1].
  const int steps = static_cast<int>(std::ceil(-alpha));
  double a_hi = alpha + steps;  // in (0, 1)
  const auto u0 = detail::tricomi_positive(a_hi, beta, x);
  const auto u1 = detail::tricomi_positive(a_hi + 1.0, beta, x);
  double u_cur = u0.sum;
  double u_next = u1.sum;
  // U(a-1) = -(beta - 2a - x) U(a) - a (a - beta + 1) U(a+1)
  for (int i = 0; i < steps; ++i) {
    const double a = a_hi;
    const double u_prev = -(beta - 2.0 * a - x) * u_cur - a * (a - beta + 1.0) * u_next;
    u_next = u_cur;
    u_cur = u_prev;
    a_hi -= 1.0;
  }
  out.value = u_cur;
  out.accuracy.achieved_rel_err_estimate = (steps + 1) * std::max(u0.rel_err, u1.rel_err);
  return out;
}

inline double tricomi_u(double alpha, double beta, double x) { return tricomi_u_eval(alpha, beta, x).value; }

// ---------------------------------------------------------------------------
// Bessel functions of order 0 and 1

namespace detail {

using quad = __float128;

inline constexpr double bessel_asymptotic_threshold = 20.0;
inline constexpr quad euler_gamma_q = 0.5772156649015328606065120900824024310Q;
inline constexpr quad pi_q = 3.1415926535897932384626433832795028842Q;

inline void check_order(int order) {
  if (order != 0 && order != 1) fail(ErrorKind::unsupported, "bessel: only orders 0 and 1 are supported");
}

// J_n series and the companion sum used by Y_n (n in {0, 1}).
struct JSeries {
  quad j = 0;
  quad y_sum = 0;
};

inline JSeries bessel_j_series(int n, quad x) {
  const quad q = x * x / 4;
  // term_k = (-q)^k / (k! (k+n)!) times (x/2)^n
  quad term = n == 0 ? quad(1) : x / 2;
  quad j = term;
  // psi(k+1) + psi(k+n+1) = 2 (H_k - gamma) + [n==1] / (k+1)
  quad hk = 0;
  quad ysum = n == 0 ? quad(0) : (-2 * euler_gamma_q + 1) * term;
  for (int k = 1; k < 400; ++k) {
    term *= -q / (quad(k) * quad(k + n));
    hk += quad(1) / k;
    j += term;
    if (n == 0) {
      ysum += hk * term;
    } else {
      ysum += (2 * (hk - euler_gamma_q) + quad(1) / (k + 1)) * term;
    }
    if (k > x && fabsq(term) < 1e-36Q * (fabsq(j) + 1e-300Q)) break;
  }
  return {j, ysum};
}

struct ISeries {
  quad i = 0;
  quad k_sum = 0;
};

inline ISeries bessel_i_series(int n, quad x) {
  const quad q = x * x / 4;
  quad term = n == 0 ? quad(1) : x / 2;
  quad i = term;
  quad hk = 0;
  quad ksum = n == 0 ? quad(0) : (-2 * euler_gamma_q + 1) * term;
  for (int k = 1; k < 400; ++k) {
    term *= q / (quad(k) * quad(k + n));
    hk += quad(1) / k;
    i += term;
    if (n == 0) {
      ksum += hk * term;
    } else {
      ksum += (2 * (hk - euler_gamma_q) + quad(1) / (k + 1)) * term;
    }
    if (k > x && term < 1e-36Q * i) break;
  }
  return {i, ksum};
}

inline double i_series_double(int n, double x) {
  const double q = x * x / 4;
  double term = n == 0 ? 1.0 : x / 2;
  double sum = term;
  for (int k = 1; k < 400; ++k) {
    term *= q / (double(k) * double(k + n));
    sum += term;
    if (term < 0.25 * eps * sum) break;
  }
  return sum;
}

// Hankel-type coefficient a_k(nu) = prod_{j=1..k} (mu - (2j-1)^2) / (k! 8^k).
inline double hankel_ratio(int n, int k) {
  const double mu = 4.0 * n * n;
  const double odd = 2.0 * (k + 1) - 1.0;
  return (mu - odd * odd) / (8.0 * (k + 1));
}

struct PQ {
  double p = 1.0;
  double q = 0.0;
  double rel_err = 0.0;
};

inline PQ hankel_pq(int n, double x) {
  // sum_k (-1)^k a_k / x^k split into even (P) and odd (Q) parts.
  double term = 1.0;
  double p = 1.0;
  double q = 0.0;
  double last = 1.0;
  for (int k = 0; k < 200; ++k) {
    const double next = term * hankel_ratio(n, k) / x;
    if (std::abs(next) >= last && k > 1) break;
    if (next == 0.0) break;
    // index k+1: even -> P with sign (-1)^{(k+1)/2}; odd -> Q with sign (-1)^{k/2}
    const int idx = k + 1;
    if (idx % 2 == 0) {
      p += ((idx / 2) % 2 == 0 ? 1.0 : -1.0) * next;
    } else {
      q += ((idx / 2) % 2 == 0 ? 1.0 : -1.0) * next;
    }
    last = std::abs(next);
    term = next;
    if (last < 0.25 * eps) break;
  }
  return {p, q, std::max(last, eps)};
}

// sum_k (+-1)^k a_k / x^k for the modified functions.
inline SeriesSum modified_asymptotic(int n, double x, bool alternating) {
  return asymptotic_sum([&](int k) { return (alternating ? -1.0 : 1.0) * hankel_ratio(n, k) / x; });
}

}  // namespace detail

inline FnValue bessel_j_eval(int order, double x) {
  detail::check_order(order);
  if (!(x >= 0.0) || !std::isfinite(x)) fail(ErrorKind::domain, "bessel_j: argument must be finite and >= 0");
  FnValue out;
  if (x <= detail::bessel_asymptotic_threshold) {
    out.value = static_cast<double>(detail::bessel_j_series(order, x).j);
    out.accuracy.achieved_rel_err_estimate = detail::eps;
    return out;
  }
  const auto pq = detail::hankel_pq(order, x);
  const double chi = x - (0.5 * order + 0.25) * std::numbers::pi;
  out.value = std::sqrt(2.0 / (std::numbers::pi * x)) * (pq.p * std::cos(chi) - pq.q * std::sin(chi));
  out.accuracy.achieved_rel_err_estimate = pq.rel_err;
  return out;
}

inline FnValue bessel_y_eval(int order, double x) {
  detail::check_order(order);
  if (!(x > 0.0) || !std::isfinite(x)) fail(ErrorKind::domain, "bessel_y: argument must be positive");
  FnValue out;
  if (x <= detail::bessel_asymptotic_threshold) {
    using detail::quad;
    const quad xq = x;
    const auto s = detail::bessel_j_series(order, xq);
    const quad lg = logq(xq / 2);
    quad y;
    if (order == 0) {
      // (2/pi)[(ln(x/2) + gamma) J0 - sum_{k>=1} H_k (-q)^k/(k!)^2]
      y = 2 / detail::pi_q * ((lg + detail::euler_gamma_q) * s.j - s.y_sum);
    } else {
      // -2/(pi x) + (2/pi) ln(x/2) J1 - (1/pi) sum (psi(k+1)+psi(k+2)) (-q)^k (x/2)/(k!(k+1)!)
      y = -2 / (detail::pi_q * xq) + 2 / detail::pi_q * lg * s.j - s.y_sum / detail::pi_q;
    }
    out.value = static_cast<double>(y);
    out.accuracy.achieved_rel_err_estimate = detail::eps;
    return out;
  }
  const auto pq = detail::hankel_pq(order, x);
  const double chi = x - (0.5 * order + 0.25) * std::numbers::pi;
  out.value = std::sqrt(2.0 / (std::numbers::pi * x)) * (pq.p * std::sin(chi) + pq.q * std::cos(chi));
  out.accuracy.achieved_rel_err_estimate = pq.rel_err;
  return out;
}

// I_n(x) with the e^x growth kept in the log scale.
inline ScaledValue bessel_i_scaled(int order, double x) {
  detail::check_order(order);
  if (!(x >= 0.0) || !std::isfinite(x)) fail(ErrorKind::domain, "bessel_i: argument must be finite and >= 0");
  ScaledValue out;
  if (x <= detail::bessel_asymptotic_threshold) {
    out.scaled = Scaled{detail::i_series_double(order, x), 0.0};
    out.accuracy.achieved_rel_err_estimate = 2.0 * detail::eps;
    return out;
  }
  const auto s = detail::modified_asymptotic(order, x, true);
  out.scaled = Scaled{s.sum / std::sqrt(2.0 * std::numbers::pi * x), x};
  out.accuracy.achieved_rel_err_estimate = s.rel_err;
  return out;
}

// K_n(x) with the e^{-x} decay kept in the log scale.
inline ScaledValue bessel_k_scaled(int order, double x) {
  detail::check_order(order);
  if (!(x > 0.0) || !std::isfinite(x)) fail(ErrorKind::domain, "bessel_k: argument must be positive");
  ScaledValue out;
  if (x <= detail::bessel_asymptotic_threshold) {
    using detail::quad;
    const quad xq = x;
    const auto s = detail::bessel_i_series(order, xq);
    const quad lg = logq(xq / 2);
    quad k;
    if (order == 0) {
      k = -(lg + detail::euler_gamma_q) * s.i + s.k_sum;
    } else {
      k = 1 / xq + lg * s.i - s.k_sum / 2;
    }
    out.scaled = Scaled{static_cast<double>(k), 0.0};
    out.accuracy.achieved_rel_err_estimate = detail::eps;
    return out;
  }
  const auto s = detail::modified_asymptotic(order, x, false);
  out.scaled = Scaled{std::sqrt(std::numbers::pi / (2.0 * x)) * s.sum, -x};
  out.accuracy.achieved_rel_err_estimate = s.rel_err;
  return out;
}

inline FnValue scaled_to_value(const ScaledValue& s) {
  FnValue out;
  out.accuracy = s.accuracy;
  const double m = s.scaled.mantissa;
  if (m != 0.0 && std::log(std::abs(m)) + s.scaled.log_scale > 709.0) {
    out.value = std::copysign(std::numeric_limits<double>::infinity(), m);
    out.overflow = true;
    return out;
  }
  out.value = s.scaled.value();
  return out;
}

inline FnValue bessel_i_eval(int order, double x) { return scaled_to_value(bessel_i_scaled(order, x)); }
inline FnValue bessel_k_eval(int order, double x) { return scaled_to_value(bessel_k_scaled(order, x)); }

inline double bessel_j(int order, double x) { return bessel_j_eval(order, x).value; }
inline double bessel_y(int order, double x) { return bessel_y_eval(order, x).value; }
inline double bessel_i(int order, double x) { return bessel_i_eval(order, x).value; }
inline double bessel_k(int order, double x) { return bessel_k_eval(order, x).value; }

}  // namespace avgsfde::specfun
