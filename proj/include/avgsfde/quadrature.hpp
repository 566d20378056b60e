#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "avgsfde/error.hpp"

namespace avgsfde::quad {

inline constexpr double default_tol = 1e-9;

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

namespace detail {
struct Panel {
  double lo, hi, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

// Boost's non-adaptive call reports a relative error, so the absolute |K - G| is
// formed here from its node tables. Gauss nodes are the even Kronrod indices.
template <class F>
Panel gk15(F& f, double lo, double hi) {
  using kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
  using gauss = boost::math::quadrature::gauss<double, 7>;
  const auto& x = kronrod::abscissa();
  const auto& wk = kronrod::weights();
  const auto& wg = gauss::weights();
  const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
  const double f0 = f(c);
  double k = wk[0] * f0, g = wg[0] * f0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double fs = f(c - h * x[i]) + f(c + h * x[i]);
    k += wk[i] * fs;
    if (i % 2 == 0) g += wg[i / 2] * fs;
  }
  return {lo, hi, h * k, std::abs(h * (k - g))};
}
}  // namespace detail

// Globally adaptive Gauss-Kronrod (7/15) over consecutive panels [cuts[i], cuts[i+1]]:
// the panel with the largest error estimate is bisected until the summed
// estimate is below max(abs_tol, tol * |integral|).
template <class F>
QuadResult integrate_split(F&& f, std::vector<double> cuts, double tol = default_tol, double abs_tol = 0.0,
                           std::size_t max_panels = 4000) {
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  if (cuts.size() < 2) return {};
  std::priority_queue<detail::Panel> heap;
  double value = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const detail::Panel p = detail::gk15(f, cuts[i], cuts[i + 1]);
    value += p.value;
    error += p.error;
    heap.push(p);
  }
  while (error > std::max(abs_tol, tol * std::abs(value)) && heap.size() < max_panels) {
    const detail::Panel worst = heap.top();
    if (worst.hi - worst.lo <= 1e-12 * (std::abs(worst.lo) + std::abs(worst.hi))) break;
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const detail::Panel left = detail::gk15(f, worst.lo, mid);
    const detail::Panel right = detail::gk15(f, mid, worst.hi);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to shed the drift of the running updates.
  value = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  if (!std::isfinite(value)) fail(ErrorKind::overflow, "quadrature produced a non-finite value");
  return {value, error};
}

template <class F>
QuadResult integrate(F&& f, double lo, double hi, double tol = default_tol, double abs_tol = 0.0) {
  if (hi == lo) return {};
  if (hi < lo) {
    QuadResult r = integrate_split(f, {hi, lo}, tol, abs_tol);
    r.value = -r.value;
    return r;
  }
  return integrate_split(f, {lo, hi}, tol, abs_tol);
}

// Cut points for an integral over [lo, hi] whose integrand has structure near hi
// on the scale `width`, plus any extra points inside the range.
inline std::vector<double> graded_cuts(double lo, double hi, double width, const std::vector<double>& extra = {}) {
  std::vector<double> cuts{lo, hi};
  for (double d = width; hi - d > lo; d *= 4.0) cuts.push_back(hi - d);
  for (double e : extra)
    if (e > lo && e < hi) cuts.push_back(e);
  return cuts;
}

struct TailResult {
  double value = 0.0;
  double truncation_T = 0.0;
  double tail_estimate = 0.0;
  double error_estimate = 0.0;
  bool converged = false;
};

// int_lo^inf f by doubling panels [T, 2T] until the last panel contributes less than
// panel_ratio of the total, then extrapolating the remaining tail from the ratio of
// the last two panels (exact for geometric panel sequences, i.e. power-law tails).
template <class F>
TailResult integrate_to_infinity(F&& f, double lo, double first_T, double tol = default_tol,
                                 double panel_ratio = 1e-3, double max_T = 1e12) {
  TailResult out;
  double T = lo + first_T;
  QuadResult head = integrate(f, lo, T, tol);
  double total = head.value;
  double err = head.error_estimate;
  double prev_panel = std::numeric_limits<double>::quiet_NaN();
  double panel = 0.0;
  while (true) {
    const double T2 = lo + 2.0 * (T - lo);
    const QuadResult p = integrate(f, T, T2, tol);
    prev_panel = panel;
    panel = p.value;
    total += panel;
    err += p.error_estimate;
    T = T2;
    if (std::abs(panel) <= panel_ratio * std::abs(total) && prev_panel != 0.0) {
      out.converged = true;
      break;
    }
    if (T - lo > max_T) break;
  }
  double tail = 0.0;
  if (std::isfinite(prev_panel) && prev_panel != 0.0) {
    const double rho = panel / prev_panel;
    if (rho > 0.0 && rho < 1.0) tail = panel * rho / (1.0 - rho);
  }
  out.value = total + tail;
  out.truncation_T = T;
  out.tail_estimate = tail;
  out.error_estimate = err + 0.1 * std::abs(tail);
  return out;
}

}  // namespace avgsfde::quad
