#pragma once

// Dormand-Prince 5(4) with PI step-size control and continuous (dense) output.
// Integrates forwards or backwards depending on the sign of t_end - t_start.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "avgsfde/error.hpp"

namespace avgsfde::ode {

template <std::size_t N>
using State = std::array<double, N>;

struct Options {
  double rtol = 1e-10;
  double atol = 1e-10;
  double initial_step = 0.0;  // 0: chosen from the problem scale
  std::size_t max_steps = 2'000'000;
};

namespace dp {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                        a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;

// Continuous extension weights: y(t + th h) = y + h th sum_i w_i(th) k_i.
inline std::array<double, 7> dense_weights(double th) {
  return {
      1.0 + (-2.8605386690370886310 + (3.0995778787091209227 + (-1.1618105836403092858 + 0.013917207301610327394 * th) * th) * th) * th,
      0.0,
      (4.0471414996427855732 + (-6.3453540469389257351 + (2.7954650864140050830 - 0.048016240824962854620 * th) * th) * th) * th,
      (-3.9411600711126589294 + (10.904003027940294347 + (-6.7293175092092785730 + 0.41751621904830982182 * th) * th) * th) * th,
      (2.8419447015870346406 + (-7.5476758629593859984 + (4.9576367249312529806 - 0.57428174280418464170 * th) * th) * th) * th,
      (-1.6109886359167998170 + (4.2189158390395179940 + (-2.9501038655667317753 + 0.47312904339639455060 * th) * th) * th) * th,
      (1.5236011748367271635 + (-4.3294668357906215305 + (3.0881301470710615705 - 0.28226448611716720348 * th) * th) * th) * th,
  };
}
}  // namespace dp

template <std::size_t N>
struct Step {
  double t = 0.0;
  double h = 0.0;
  State<N> y{};
  std::array<State<N>, 7> k{};
};

// Accepted steps with their stage derivatives; evaluates the interpolant
// anywhere in the integrated range.
template <std::size_t N>
class DenseSolution {
 public:
  DenseSolution() = default;
  DenseSolution(double t0, double t1, State<N> y_end, std::vector<Step<N>> steps)
      : t0_(t0), t1_(t1), y_end_(y_end), steps_(std::move(steps)) {}

  double t_start() const { return t0_; }
  double t_end() const { return t1_; }
  bool forward() const { return t1_ >= t0_; }
  const std::vector<Step<N>>& steps() const { return steps_; }
  const State<N>& final_state() const { return y_end_; }

  State<N> operator()(double t) const {
    if (steps_.empty()) return y_end_;
    const double lo = std::min(t0_, t1_), hi = std::max(t0_, t1_);
    if (t < lo - 1e-12 * (1.0 + std::abs(lo)) || t > hi + 1e-12 * (1.0 + std::abs(hi)))
      fail(ErrorKind::domain, "dense output requested outside the integrated range");
    const Step<N>& s = locate(t);
    const double th = std::clamp((t - s.t) / s.h, 0.0, 1.0);
    const auto w = dp::dense_weights(th);
    State<N> y = s.y;
    for (std::size_t i = 0; i < N; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < 7; ++j) acc += w[j] * s.k[j][i];
      y[i] += s.h * th * acc;
    }
    return y;
  }

 private:
  const Step<N>& locate(double t) const {
    // Steps are ordered in the direction of integration.
    if (forward()) {
      auto it = std::upper_bound(steps_.begin(), steps_.end(), t, [](double v, const Step<N>& s) { return v < s.t; });
      return it == steps_.begin() ? steps_.front() : *(it - 1);
    }
    auto it = std::upper_bound(steps_.begin(), steps_.end(), t, [](double v, const Step<N>& s) { return v > s.t; });
    return it == steps_.begin() ? steps_.front() : *(it - 1);
  }

  double t0_ = 0.0, t1_ = 0.0;
  State<N> y_end_{};
  std::vector<Step<N>> steps_;
};

template <std::size_t N, class F>
DenseSolution<N> integrate(F&& rhs, double t_start, const State<N>& y_start, double t_end, const Options& opt) {
  using namespace dp;
  std::vector<Step<N>> steps;
  if (t_end == t_start) return DenseSolution<N>(t_start, t_end, y_start, {});

  const double dir = t_end > t_start ? 1.0 : -1.0;
  const double span = std::abs(t_end - t_start);
  auto norm = [&](const State<N>& err, const State<N>& y0, const State<N>& y1) {
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
      acc += (err[i] / sc) * (err[i] / sc);
    }
    return std::sqrt(acc / N);
  };
  auto axpy = [](State<N> y, double h, std::initializer_list<std::pair<double, const State<N>*>> terms) {
    for (const auto& [c, k] : terms)
      for (std::size_t i = 0; i < N; ++i) y[i] += h * c * (*k)[i];
    return y;
  };

  double t = t_start;
  State<N> y = y_start;
  State<N> k1 = rhs(t, y);
  double h = opt.initial_step > 0.0 ? opt.initial_step : std::min(span, 1e-3 * std::max(1.0, span));
  h *= dir;

  constexpr double beta = 0.04, expo = 0.2 - 0.75 * beta, safe = 0.9, fac_min = 0.2, fac_max = 10.0;
  double err_old = 1e-4;
  bool rejected = false;
  for (std::size_t n = 0; n < opt.max_steps; ++n) {
    bool last = false;
    if (dir * (t + h - t_end) >= 0.0) {
      h = t_end - t;
      last = true;
    }
    const double h_min = 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (last && std::abs(h) < h_min) return DenseSolution<N>(t_start, t_end, y, std::move(steps));
    if (std::abs(h) < h_min) {
      std::ostringstream os;
      os << "step size underflow at t = " << t;
      fail(ErrorKind::stiffness, os.str());
    }
    const State<N> k2 = rhs(t + c2 * h, axpy(y, h, {{a21, &k1}}));
    const State<N> k3 = rhs(t + c3 * h, axpy(y, h, {{a31, &k1}, {a32, &k2}}));
    const State<N> k4 = rhs(t + c4 * h, axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State<N> k5 = rhs(t + c5 * h, axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State<N> k6 = rhs(t + h, axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State<N> y_new = axpy(y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
    const State<N> k7 = rhs(t + h, y_new);
    State<N> err{};
    for (std::size_t i = 0; i < N; ++i)
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    const double en = norm(err, y, y_new);
    if (!std::isfinite(en)) {
      h *= 0.1;
      rejected = true;
      continue;
    }
    if (en <= 1.0) {
      steps.push_back({t, h, y, {k1, k2, k3, k4, k5, k6, k7}});
      t = last ? t_end : t + h;
      y = y_new;
      k1 = k7;
      if (last) return DenseSolution<N>(t_start, t_end, y, std::move(steps));
      double fac = std::pow(std::max(en, 1e-10), expo) / std::pow(err_old, beta);
      fac = std::clamp(fac / safe, 1.0 / fac_max, 1.0 / fac_min);
      double h_new = h / fac;
      if (rejected) h_new = dir * std::min(std::abs(h_new), std::abs(h));
      err_old = std::max(en, 1e-4);
      rejected = false;
      h = h_new;
    } else {
      const double fac = std::min(1.0 / fac_min, std::pow(en, expo) / safe);
      h /= fac;
      rejected = true;
    }
  }
  fail(ErrorKind::stiffness, "step budget exhausted");
}

}  // namespace avgsfde::ode
