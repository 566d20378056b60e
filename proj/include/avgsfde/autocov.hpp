#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <limits>
#include <sstream>
#include <vector>

#include "avgsfde/core.hpp"
#include "avgsfde/error.hpp"
#include "avgsfde/quadrature.hpp"
#include "avgsfde/resolvent.hpp"
#include "avgsfde/scaled.hpp"
#include "avgsfde/specfun.hpp"

namespace avgsfde {

struct AcfEstimate {
  double t = 0.0;
  std::vector<double> deltas;
  std::vector<double> values;
  double quad_tol = quad::default_tol;
};

struct DecayFit {
  double fitted_exponent = 0.0;
  double theoretical_exponent = 0.0;
  double fitted_constant = 0.0;
  double c_t_quadrature = 0.0;
  std::pair<double, double> delta_range{};
  // Root-mean-square residual of the log-log line; large for non-power-law decay.
  double residual_rms = 0.0;
  bool poor_linear_fit = false;
};

namespace detail {

inline const Params& validated(const Params& p) {
  p.validate();
  return p;
}

inline double structure_width(double a) { return a < 0.0 ? std::min(1.0, 1.0 / -a) : 1.0; }

inline std::vector<double> covariance_cuts(const Resolvent& r, double hi) {
  std::vector<double> extra;
  if (!r.closed_form() && r.basis().anchor > 0.0) extra.push_back(r.basis().anchor);
  return quad::graded_cuts(0.0, hi, structure_width(r.a()), extra);
}

}  // namespace detail

// Covariance structure of X for one parameter set; caches the resolvent basis.
class Autocovariance {
 public:
  explicit Autocovariance(const Params& p, double tol = quad::default_tol, const BasisOptions& opt = {})
      : p_(detail::validated(p)), tol_(tol), r_(p.a, p.b, opt) {}

  const Params& params() const { return p_; }
  const Resolvent& resolvent() const { return r_; }
  double tol() const { return tol_; }

  // gamma_t(delta) = Cov(X(t), X(t+delta)) = sigma^2 int_0^{min(t, t+delta)} r(t,s) r(t+delta,s) ds.
  double gamma(double t, double delta) const {
    if (!(t >= 0.0)) fail(ErrorKind::domain, "covariance: t must be nonnegative");
    if (delta < -t) fail(ErrorKind::domain, "covariance: t + delta must be nonnegative");
    const double hi = std::min(t, t + delta);
    if (hi <= 0.0) return 0.0;
    const auto p1 = r_.point(t);
    const auto p2 = r_.point(t + delta);
    auto f = [&](double s) {
      const ResolventSlice c = r_.slice(s);
      const Scaled x = Resolvent::combine_at(c, p1.A, p1.B);
      const Scaled y = Resolvent::combine_at(c, p2.A, p2.B);
      return (x * y).value();
    };
    const double abs_tol = 1e-15 * hi;
    const quad::QuadResult q = quad::integrate_split(f, detail::covariance_cuts(r_, hi), tol_, abs_tol);
    return p_.sigma * p_.sigma * q.value;
  }

  double covariance(double t, double delta) const {
    if (!(delta >= 0.0)) fail(ErrorKind::domain, "covariance: delta must be nonnegative");
    return gamma(t, delta);
  }

  double variance(double t) const { return gamma(t, 0.0); }

  AcfEstimate acf(double t, const std::vector<double>& deltas) const {
    AcfEstimate out;
    out.t = t;
    out.deltas = deltas;
    out.quad_tol = tol_;
    for (double d : deltas) out.values.push_back(covariance(t, d));
    return out;
  }

  // Cov(X(t), X(t+delta)) = c1 rA(t+delta) + c2 rB(t+delta) with
  // c_i = sigma^2 int_0^t r(t,s) d_i(s) ds.
  struct ProductForm {
    Scaled c1, c2;
  };

  ProductForm product_form(double t) const {
    if (r_.closed_form()) fail(ErrorKind::unsupported, "product form: b = 0 has a single exponential mode");
    if (!(t > 0.0)) return {};
    const auto pt = r_.point(t);
    const Scaled dA_t = r_.basis().dA_scaled(t);
    const Scaled dB_t = r_.basis().dB_scaled(t);
    const double lsA = dA_t.log_scale, lsB = dB_t.log_scale;
    auto make = [&](bool first) {
      const double ls = first ? lsA : lsB;
      auto f = [&](double s) {
        const ResolventSlice c = r_.slice(s);
        const Scaled rts = Resolvent::combine_at(c, pt.A, pt.B);
        const Scaled d = first ? c.dA : c.dB;
        Scaled v = rts * d;
        v.log_scale -= ls;
        return v.value();
      };
      const quad::QuadResult q = quad::integrate_split(f, detail::covariance_cuts(r_, t), tol_, 1e-15 * t);
      return Scaled{p_.sigma * p_.sigma * q.value, ls};
    };
    return {make(true), make(false)};
  }

  double product_covariance(const ProductForm& pf, double t, double delta) const {
    const auto p = r_.point(t + delta);
    return add(pf.c1 * p.A.scaled_value(), pf.c2 * p.B.scaled_value()).value();
  }

 private:
  Params p_;
  double tol_;
  Resolvent r_;
};

inline double covariance(const Params& p, double t, double delta, double tol = quad::default_tol) {
  if (t == 0.0) return 0.0;
  return Autocovariance(p, tol).covariance(t, delta);
}

inline void require_recurrent(const Params& p, const char* op) {
  if (!(p.a < 0.0) || p.a + p.b > tolerance::boundary) {
    fail(ErrorKind::unsupported, std::string(op) + ": needs a < 0 and a + b <= 0 (regime " +
                                     std::string(to_string(classify(p).label)) + ")");
  }
}

// Long-lag constant: Cov(X(t), X(t+delta)) ~ c_t delta^{-(1+b/a)}.
inline double ct_limit(const Params& p, double t, double tol = quad::default_tol) {
  p.validate();
  require_recurrent(p, "ct_limit");
  if (is_zero(p.b) || t <= 0.0) return 0.0;
  const double aa = -p.a, r = p.b / p.a;
  const Resolvent res(p.a, p.b);
  const auto pt = res.point(t);
  auto f = [&](double s) {
    const Scaled rts = Resolvent::combine_at(res.slice(s), pt.A, pt.B);
    return rts.value() * (1.0 + s) * specfun::tricomi_u(1.0 - r, 2.0, aa * (1.0 + s));
  };
  const quad::QuadResult q = quad::integrate_split(f, detail::covariance_cuts(res, t), tol, 1e-15 * t);
  return p.sigma * p.sigma * p.b * std::pow(aa, -1.0 - r) * q.value;
}

// The additive constant of the limiting autocovariance on a + b = 0.
inline double shifted_line_constant(const Params& p, double tol = 1e-10) {
  const double aa = -p.a, r = p.b / p.a;
  auto f = [&](double s) {
    const double u = (1.0 + s) * specfun::tricomi_u(1.0 - r, 2.0, aa * (1.0 + s));
    return u * u;
  };
  const quad::TailResult q = quad::integrate_to_infinity(f, 0.0, 8.0 / aa, tol);
  return p.sigma * p.sigma * p.b * p.b * std::pow(aa, -2.0 - 2.0 * r) * q.value;
}

// lim_{t -> inf} Cov(X(t), X(t+delta)).
inline double limiting_acf(const Params& p, double delta) {
  p.validate();
  require_recurrent(p, "limiting_acf");
  if (!(delta >= 0.0)) fail(ErrorKind::domain, "limiting_acf: delta must be nonnegative");
  const double ou = p.sigma * p.sigma * std::exp(p.a * delta) / (2.0 * -p.a);
  if (classify(p).label == RegimeLabel::RecurrentShifted) return ou + shifted_line_constant(p);
  return ou;
}

inline DecayFit decay_fit(const Params& p, double t, double delta_min, double delta_max, int n_points,
                          double tol = quad::default_tol) {
  p.validate();
  require_recurrent(p, "decay_fit");
  if (!(delta_min > 0.0) || !(delta_max >= 10.0 * delta_min))
    fail(ErrorKind::invalid_argument, "decay_fit: need 0 < delta_min and delta_max >= 10 delta_min");
  if (n_points < 8) fail(ErrorKind::invalid_argument, "decay_fit: need at least 8 points");
  const Autocovariance acv(p, tol);
  std::vector<double> deltas(n_points), cov(n_points);
  for (int i = 0; i < n_points; ++i)
    deltas[i] = delta_min * std::pow(delta_max / delta_min, static_cast<double>(i) / (n_points - 1));

  std::function<double(double)> cov_at;
  std::shared_ptr<Autocovariance::ProductForm> pf;
  if (acv.resolvent().closed_form()) {
    cov_at = [&](double d) { return acv.covariance(t, d); };
  } else {
    pf = std::make_shared<Autocovariance::ProductForm>(acv.product_form(t));
    cov_at = [&, pf](double d) { return acv.product_covariance(*pf, t, d); };
  }
  for (int i = 0; i < n_points; ++i) cov[i] = cov_at(deltas[i]);
  for (int i = 1; i < n_points; ++i) {
    if ((cov[i] < 0.0) != (cov[0] < 0.0) || cov[i] == 0.0) {
      double lo = deltas[i - 1], hi = deltas[i];
      const bool neg_lo = cov[i - 1] < 0.0;
      for (int it = 0; it < 80; ++it) {
        const double mid = std::sqrt(lo * hi);
        if ((cov_at(mid) < 0.0) == neg_lo) lo = mid;
        else hi = mid;
      }
      std::ostringstream os;
      os << "covariance changes sign near delta = " << 0.5 * (lo + hi);
      fail(ErrorKind::sign_change, os.str());
    }
  }

  DecayFit out;
  out.theoretical_exponent = -(1.0 + p.b / p.a);
  out.delta_range = {delta_min, delta_max};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n_points; ++i) {
    const double x = std::log(deltas[i]), y = std::log(std::abs(cov[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = n_points;
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / n;
  double ss = 0.0, const_sum = 0.0;
  for (int i = 0; i < n_points; ++i) {
    const double res = std::log(std::abs(cov[i])) - (icpt + slope * std::log(deltas[i]));
    ss += res * res;
    const_sum += cov[i] * std::pow(deltas[i], 1.0 + p.b / p.a);
  }
  out.fitted_exponent = slope;
  out.residual_rms = std::sqrt(ss / n);
  out.poor_linear_fit = out.residual_rms > 1e-2;
  out.fitted_constant = const_sum / n;
  out.c_t_quadrature = ct_limit(p, t, tol);
  return out;
}

// Residual of the lag equation
//   gamma'(D) = a gamma(D) + b/(1+t+D) int_{-t}^{D} gamma(w) dw + [D < 0] sigma^2 r(t, t+D),
// relative to max(|a gamma|, |integral term|, sigma^2). The derivative is a central difference.
inline double yule_walker_residual(const Params& p, double t, double delta, double tol = 1e-11) {
  p.validate();
  if (!(t > 0.0)) fail(ErrorKind::domain, "yule_walker_residual: t must be positive");
  if (delta < -t) fail(ErrorKind::domain, "yule_walker_residual: delta must be >= -t");
  const Autocovariance acv(p, tol);
  const double h = 1e-4 * (1.0 + std::abs(delta));
  auto g = [&](double d) { return acv.gamma(t, std::max(d, -t)); };
  const double deriv = (g(delta + h) - g(delta - h)) / (2.0 * h);
  const double gd = g(delta);
  std::vector<double> cuts{-t, delta};
  if (delta > 0.0) cuts.push_back(0.0);
  const double integral = quad::integrate_split(g, cuts, 1e-9, 1e-14).value;
  const double integral_term = p.b / (1.0 + t + delta) * integral;
  double noise = 0.0;
  if (delta < 0.0) noise = p.sigma * p.sigma * acv.resolvent()(t, t + delta);
  const double residual = deriv - p.a * gd - integral_term - noise;
  const double scale = std::max({std::abs(p.a * gd), std::abs(integral_term), p.sigma * p.sigma});
  return residual / scale;
}

}  // namespace avgsfde
