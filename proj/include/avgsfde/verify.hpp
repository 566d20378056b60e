#pragma once

// Acceptance suites shared by `avg_sfde verify` and the acceptance runner.
// Each criterion computes its measured quantities, compares them with fixed
// tolerances and keeps everything it measured for the report.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "avgsfde/autocov.hpp"
#include "avgsfde/core.hpp"
#include "avgsfde/meanpath.hpp"
#include "avgsfde/montecarlo.hpp"
#include "avgsfde/resolvent.hpp"
#include "avgsfde/specfun.hpp"

namespace avgsfde::verify {

struct Result {
  Result() = default;
  Result(int i, std::string t) : id(i), title(std::move(t)) {}

  int id = 0;
  std::string title;
  bool passed = false;
  double seconds = 0.0;
  std::vector<std::pair<std::string, double>> values;
  std::string note;

  void put(std::string key, double v) { values.emplace_back(std::move(key), v); }
  double get(std::string_view key) const {
    for (const auto& [k, v] : values)
      if (k == key) return v;
    return std::numeric_limits<double>::quiet_NaN();
  }
};

struct Options {
  std::uint64_t seed = 20261018;
  double dt = 1.0 / 128.0;
};

inline constexpr int criterion_count = 12;

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

// Worst |decomposition - oracle| / (1 + |oracle|) over 20 (t, s) pairs in [0, 20].
inline double oracle_gap(double a, double b) {
  const Resolvent r(a, b);
  double worst = 0.0;
  for (double s : {0.0, 1.5, 4.0, 9.0, 15.0}) {
    const OdeSolution o = resolvent_ode_oracle(a, b, s, 20.0, 1e-12);
    const double span = 20.0 - s;
    for (double off : {0.25, 1.7, 0.55 * span, span}) {
      const double t = s + off;
      const double ov = o.value(t);
      worst = std::max(worst, std::abs(r(t, s) - ov) / (1.0 + std::abs(ov)));
    }
  }
  return worst;
}

struct GrowthRun {
  SampleStats stats;
  double mean_C = 0.0, var_C = 0.0, z = 0.0, var_rel = 0.0, exact_ratio = 0.0;
};

// Final X(T) / normalizer(T) over an Euler ensemble.
inline GrowthRun growth_run(const Params& p, double T, double dt, std::uint64_t seed, std::size_t n) {
  GrowthRun g;
  const Regime reg = classify(p);
  std::vector<double> fin = ensemble_final_values(p, T, dt, seed, n);
  const double scale = std::exp(-log_growth_normalizer(reg, p.a, p.b, T));
  for (double& v : fin) v *= scale;
  g.stats = sample_stats(fin);
  const LimitStats ls = limit_stats(p);
  g.mean_C = ls.mean_C;
  g.var_C = ls.var_C;
  g.z = (g.stats.mean - g.mean_C) / g.stats.std_error;
  g.var_rel = g.stats.variance / g.var_C - 1.0;
  g.exact_ratio = normalized_mean(mean_solution(p), T);
  return g;
}

inline void put_growth(Result& r, const GrowthRun& g) {
  r.put("sample_mean", g.stats.mean);
  r.put("std_error", g.stats.std_error);
  r.put("expected_C", g.mean_C);
  r.put("z", g.z);
  r.put("sample_variance", g.stats.variance);
  r.put("var_C", g.var_C);
  r.put("variance_rel_error", g.var_rel);
  r.put("mean_over_normalizer_at_T", g.exact_ratio);
  // Distance of the exact mean ratio at T from its limit, in standard errors.
  r.put("finite_horizon_bias_se", (g.exact_ratio - g.mean_C) / g.stats.std_error);
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline Result special_function_identities() {
  Result r{1, "special-function identities"};
  double w_mu = 0, w_j = 0, w_ik = 0, km = 0, ku = 0;
  for (int i = 0; i < 40; ++i) {
    const double x = 0.1 * std::pow(800.0, i / 39.0);
    for (double al : {0.25, 0.5, 1.5, 2.5}) {
      using namespace specfun;
      const double M = kummer_m(al, 1, x), Mp = al * kummer_m(al + 1, 2, x);
      const double U = tricomi_u(al, 1, x), Up = -al * tricomi_u(al + 1, 2, x);
      const double ref = -std::exp(x) / x * rgamma(al);
      w_mu = std::max(w_mu, std::abs((M * Up - Mp * U) / ref - 1.0));
      const double m1 = (al + 1) * x * kummer_m(al + 2, 2, x), m2 = x * kummer_m(al + 1, 1, x),
                   m3 = al * x * kummer_m(al + 1, 2, x);
      km = std::max(km, std::abs(m1 - m2 - m3) / std::max({std::abs(m1), std::abs(m2), std::abs(m3)}));
      const double u1 = (al + 1) * x * tricomi_u(al + 2, 2, x), u2 = x * tricomi_u(al + 1, 1, x),
                   u3 = x * tricomi_u(al + 1, 2, x);
      ku = std::max(ku, std::abs(u1 + u2 - u3) / std::max({std::abs(u1), std::abs(u2), std::abs(u3)}));
    }
    using namespace specfun;
    const double wj = bessel_j(1, x) * bessel_y(0, x) - bessel_j(0, x) * bessel_y(1, x);
    w_j = std::max(w_j, std::abs(wj * std::numbers::pi * x / 2.0 - 1.0));
    const double wik = bessel_k(0, x) * bessel_i(1, x) + bessel_k(1, x) * bessel_i(0, x);
    w_ik = std::max(w_ik, std::abs(wik * x - 1.0));
  }
  r.put("kummer_tricomi_wronskian", w_mu);
  r.put("bessel_wronskian", w_j);
  r.put("modified_bessel_wronskian", w_ik);
  r.put("recurrence_M", km);
  r.put("recurrence_U", ku);
  r.passed = w_mu <= 1e-8 && w_j <= 1e-10 && w_ik <= 1e-10 && km <= 1e-8 && ku <= 1e-8;
  return r;
}

inline Result resolvent_oracle_agreement() {
  Result r{2, "resolvent decomposition vs ODE oracle"};
  const std::pair<double, double> grid[] = {{-1, 0.5}, {-1, -0.5}, {-1, 2}, {-1, -1}, {1, 1}, {1, -0.5},
                                            {1, -1},   {1, -2},    {0, 1},  {0, -1},  {-1, -2}};
  double worst = 0.0;
  for (auto [a, b] : grid) {
    const double g = detail::oracle_gap(a, b);
    r.put("gap(" + detail::fmt(a) + "," + detail::fmt(b) + ")", g);
    worst = std::max(worst, g);
  }
  r.put("worst", worst);
  r.passed = worst <= 1e-6;
  return r;
}

inline Result ou_closed_form() {
  Result r{3, "closed form for b = 0"};
  const Params p{-0.7, 0.0, 1.0, 0.0, 0.0};
  const Autocovariance acv(p, 1e-12);
  double wr = 0, wc = 0;
  for (double t : {1.0, 5.0}) {
    for (double s : {0.0, 0.5 * t, t}) wr = std::max(wr, std::abs(resolvent_eval(p.a, p.b, t, s) / std::exp(p.a * (t - s)) - 1.0));
    for (double d : {0.0, 1.0, 3.0}) {
      const double ref = std::exp(p.a * d) * (1.0 - std::exp(2.0 * p.a * t)) / (-2.0 * p.a);
      wc = std::max(wc, std::abs(acv.covariance(t, d) / ref - 1.0));
    }
  }
  r.put("resolvent_rel_error", wr);
  r.put("covariance_rel_error", wc);
  r.passed = wr <= 1e-10 && wc <= 1e-10;
  return r;
}

inline Result long_memory_decay() {
  Result r{4, "polynomial autocovariance decay"};
  const Params p{-1.0, 0.5, 1.0, 0.0, 0.0};
  const DecayFit fit = decay_fit(p, 1.0, 50.0, 500.0, 16);
  const double far = Autocovariance(p).covariance(1.0, 1e4) * std::pow(1e4, 1.0 + p.b / p.a);
  const double rel = far / fit.c_t_quadrature - 1.0;
  r.put("fitted_exponent", fit.fitted_exponent);
  r.put("theoretical_exponent", fit.theoretical_exponent);
  r.put("scaled_cov_at_1e4", far);
  r.put("c_t", fit.c_t_quadrature);
  r.put("scaled_cov_rel_error", rel);
  r.passed = std::abs(fit.fitted_exponent + 0.5) <= 0.05 && std::abs(rel) <= 0.02;
  return r;
}

inline Result transient_nonstationarity() {
  Result r{5, "limiting autocovariance at large t"};
  const Params p{-1.0, 0.5, 1.0, 0.0, 0.0};
  const double c = covariance(p, 200.0, 1.0);
  const double ref = std::exp(-1.0) / 2.0;
  const double rel_a = c / ref - 1.0;
  const Params q{-1.0, 1.0, 1.0, 0.0, 0.0};
  const double cq = covariance(q, 200.0, 20.0), lq = limiting_acf(q, 20.0);
  const double rel_b = cq / lq - 1.0;
  r.put("cov(200,1)", c);
  r.put("limit(1)", ref);
  r.put("rel_error", rel_a);
  r.put("shifted_cov(200,20)", cq);
  r.put("shifted_limit(20)", lq);
  r.put("shifted_rel_error", rel_b);
  r.passed = std::abs(rel_a) <= 0.01 && std::abs(rel_b) <= 0.03;
  if (std::abs(rel_a) > 0.01) r.note = "gap to the limit decays slowly (about t^-0.85); within 1% needs t near 1000";
  return r;
}

// Initial history psi = 1 on [-1, 0], so psi0 = psi_int = 1.
inline Result brownian_like_variance() {
  Result r{6, "variance growth and mean decay for a = 0, b < 0"};
  const Params p{0.0, -1.0, 1.0, 1.0, 1.0};
  const double v = Autocovariance(p).variance(2000.0) / 2000.0;
  const double x = mean_eval(mean_solution(p), 1e4);
  const double x_point = mean_eval(mean_solution(Params{0.0, -1.0, 1.0, 1.0, 0.0}), 1e4);
  r.put("var_over_t", v);
  r.put("var_rel_error", 3.0 * v - 1.0);
  r.put("abs_mean_1e4", std::abs(x));
  r.put("abs_mean_1e4_point_history", std::abs(x_point));
  r.passed = std::abs(3.0 * v - 1.0) <= 0.02 && std::abs(x) <= 0.1;
  return r;
}

inline Result polynomial_growth(const Options& o) {
  Result r{7, "polynomial growth ensemble"};
  const auto g = detail::growth_run(Params{-1.0, 2.0, 1.0, 1.0, 0.0}, 50.0, o.dt, o.seed + 7000, 10000);
  detail::put_growth(r, g);
  r.passed = std::abs(g.z) <= 3.0 && std::abs(g.var_rel) <= 0.15;
  if (!r.passed) r.note = "x(T)/T differs from E[C] by O(1/T); at T = 50 that offset is about 4 standard errors";
  return r;
}

inline Result exponential_growth(const Options& o) {
  Result r{8, "exponential growth ensemble"};
  const auto g = detail::growth_run(Params{0.5, -0.25, 1.0, 1.0, 0.0}, 30.0, o.dt, o.seed + 8000, 10000);
  detail::put_growth(r, g);
  double drift_only = 0.0;
  run_em(Params{0.5, -0.25, 1.0, 1.0, 0.0}, 30.0, o.dt, 0, 0, EmOptions{1, true, false},
         [&](std::size_t, double, double x, double) { drift_only = x; });
  r.put("euler_mean_bias", drift_only / mean_eval(mean_solution(Params{0.5, -0.25, 1.0, 1.0, 0.0}), 30.0) - 1.0);
  const double gap = detail::oracle_gap(0.5, -0.5);
  r.put("degenerate_oracle_gap", gap);
  r.passed = std::abs(g.z) <= 3.0 && gap <= 1e-6;
  if (std::abs(g.z) > 3.0) r.note = "Euler step bias on e^{at} is about -a^2 dt T / 2 at this step";
  return r;
}

inline Result subexponential_growth(const Options& o) {
  Result r{9, "subexponential growth ensemble"};
  const auto g = detail::growth_run(Params{0.0, 1.0, 1.0, 1.0, 0.0}, 40.0, o.dt, o.seed + 9000, 10000);
  detail::put_growth(r, g);
  r.put("normalizer_shift_factor", std::exp(2.0 * (std::sqrt(41.0) - std::sqrt(40.0))));
  r.passed = std::abs(g.z) <= 3.0;
  if (!r.passed) r.note = "the mean itself exceeds E[C] at T = 40 by the factor exp(2 sqrt(1+T) - 2 sqrt(T))";
  return r;
}

inline Result lil_bands(const Options& o) {
  Result r{10, "iterated-logarithm soft bands"};
  auto max_sup = [&](const Params& p, LilMode mode, std::uint64_t seed) {
    std::vector<double> sup(64);
    parallel_for(sup.size(), [&](std::size_t i) { sup[i] = lil_statistic_em(p, 1e5, 1.0 / 16.0, seed, i, mode).sup_stat; });
    return *std::max_element(sup.begin(), sup.end());
  };
  const double s1 = max_sup(Params{0.0, -1.0, 1.0, 0.0, 0.0}, LilMode::brownian_like, o.seed + 10000);
  const double s2 = max_sup(Params{-1.0, 0.5, 1.0, 0.0, 0.0}, LilMode::recurrent, o.seed + 10001);
  r.put("brownian_like_max_sup", s1);
  r.put("brownian_like_constant", 1.0 / std::sqrt(3.0));
  r.put("recurrent_max_sup", s2);
  r.put("recurrent_constant", 1.0 / std::sqrt(2.0));
  r.passed = s1 >= 0.29 && s1 <= 0.75 && s2 >= 0.35 && s2 <= 0.92;
  if (!r.passed) r.note = "finite-horizon maxima over 64 paths overshoot the almost-sure constants";
  return r;
}

inline Result ou_coupling(const Options& o) {
  Result r{11, "coupling with the Ornstein-Uhlenbeck process"};
  const Params p{-1.0, 0.5, 1.0, 1.0, 0.0};
  const double bound = 10.0 / std::sqrt(1000.0);
  std::vector<double> fin(100);
  parallel_for(fin.size(), [&](std::size_t i) {
    fin[i] = xu_difference(p, 1000.0, o.dt, o.seed + 11000, i, std::size_t{1} << 30).values.back();
  });
  const auto inside = std::count_if(fin.begin(), fin.end(), [&](double v) { return std::abs(v) < bound; });
  const Params q{-1.0, 1.0, 1.0, 1.0, 0.0};
  const SampleStats st = sample_stats(ensemble_xu_final(q, 1000.0, o.dt, o.seed + 11001, 10000));
  const double el = limit_stats(q).mean_C;
  const double z = (st.mean - el) / st.std_error;
  r.put("share_inside_envelope", double(inside) / double(fin.size()));
  r.put("L_sample_mean", st.mean);
  r.put("L_std_error", st.std_error);
  r.put("expected_L", el);
  r.put("z", z);
  r.passed = inside >= 95 && std::abs(z) <= 3.0;
  return r;
}

inline Result normalization_invariance() {
  Result r{12, "degenerate-branch normalization invariance"};
  const std::pair<double, double> grid[] = {{-1, -1}, {-1, -2}, {-0.5, -1.5}, {1, -1}, {1, -2}, {0.5, -0.5}};
  BasisOptions scaled;
  scaled.tilde_wronskian = 7.3;
  double wr = 0, wm = 0;
  for (auto [a, b] : grid) {
    const Resolvent r1(a, b), r2(a, b, scaled);
    for (double s : {0.0, 0.8, 3.0, 7.5})
      for (double dt : {0.3, 2.0, 6.0, 12.0}) {
        const double v1 = r1(s + dt, s), v2 = r2(s + dt, s);
        wr = std::max(wr, std::abs(v1 - v2) / std::max(std::abs(v1), std::abs(v2)));
      }
    const Params p{a, b, 1.0, 1.0, 0.4};
    const MeanSolution m1 = mean_solution(p), m2 = mean_solution(p, scaled);
    for (double t : {0.0, 0.5, 2.0, 5.0, 10.0, 20.0}) {
      const double v1 = mean_eval(m1, t), v2 = mean_eval(m2, t);
      wm = std::max(wm, std::abs(v1 - v2) / std::max(std::abs(v1), std::abs(v2)));
    }
  }
  r.put("resolvent_rel_change", wr);
  r.put("mean_rel_change", wm);
  r.passed = wr <= 1e-10 && wm <= 1e-10;
  return r;
}

// ---------------------------------------------------------------------------

inline Result run(int id, const Options& o = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  Result r;
  try {
    switch (id) {
      case 1: r = special_function_identities(); break;
      case 2: r = resolvent_oracle_agreement(); break;
      case 3: r = ou_closed_form(); break;
      case 4: r = long_memory_decay(); break;
      case 5: r = transient_nonstationarity(); break;
      case 6: r = brownian_like_variance(); break;
      case 7: r = polynomial_growth(o); break;
      case 8: r = exponential_growth(o); break;
      case 9: r = subexponential_growth(o); break;
      case 10: r = lil_bands(o); break;
      case 11: r = ou_coupling(o); break;
      case 12: r = normalization_invariance(); break;
      default: fail(ErrorKind::invalid_argument, "no criterion " + std::to_string(id));
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::invalid_argument && (id < 1 || id > criterion_count)) throw;
    r.id = id;
    r.title = "criterion " + std::to_string(id);
    r.passed = false;
    r.note = e.what();
  }
  r.seconds = detail::seconds_since(t0);
  // Runtime limits, where the criterion states one.
  const double limit = id == 1 ? 5 : id == 2 ? 30 : id == 4 ? 60 : id == 7 ? 300 : id == 10 ? 600 : 0;
  if (limit > 0) {
    r.put("runtime_limit_s", limit);
    if (r.seconds > limit) {
      r.passed = false;
      r.note += (r.note.empty() ? "" : "; ") + std::string("runtime limit exceeded");
    }
  }
  return r;
}

inline std::vector<int> suite(std::string_view name) {
  if (name == "specfun") return {1};
  if (name == "resolvent") return {2, 3, 12};
  if (name == "autocov") return {4, 5};
  if (name == "meanpath") return {6};
  if (name == "montecarlo") return {7, 8, 9, 10, 11};
  if (name == "all") return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  fail(ErrorKind::invalid_argument,
       "unknown suite '" + std::string(name) + "' (specfun, resolvent, autocov, meanpath, montecarlo, all)");
}

inline std::vector<std::string_view> suite_names() {
  return {"specfun", "resolvent", "autocov", "meanpath", "montecarlo", "all"};
}

}  // namespace avgsfde::verify
