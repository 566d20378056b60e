#pragma once

// Resolvent r(t, s) of r' = a r + b/(1+t) int_s^t r, r(s, s) = 1, assembled from a
// pair of fundamental solutions (rA, rB) of
//   r'' + (1/(1+t) - a) r' - (a+b)/(1+t) r = 0
// as r(t, s) = dA(s) rA(t) + dB(s) rB(t).

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <vector>

#include "avgsfde/core.hpp"
#include "avgsfde/error.hpp"
#include "avgsfde/ode.hpp"
#include "avgsfde/quadrature.hpp"
#include "avgsfde/scaled.hpp"
#include "avgsfde/specfun.hpp"

namespace avgsfde {

// A basis function at one time: value, t-derivative and (derivative - a value),
// all multiplied by exp(log_scale).
struct BasisPoint {
  double v = 0.0;
  double dv = 0.0;
  double shift = 0.0;
  double log_scale = 0.0;

  double value() const { return Scaled{v, log_scale}.value(); }
  double deriv() const { return Scaled{dv, log_scale}.value(); }
  Scaled scaled_value() const { return {v, log_scale}; }
  Scaled scaled_deriv() const { return {dv, log_scale}; }
};

inline BasisPoint rescale(const BasisPoint& p, double log_scale) {
  const double f = std::exp(p.log_scale - log_scale);
  return {p.v * f, p.dv * f, p.shift * f, log_scale};
}

// x + k y in a shared scale.
inline BasisPoint combine(const BasisPoint& x, double k, const BasisPoint& y) {
  if (k == 0.0 || (y.v == 0.0 && y.dv == 0.0)) return x;
  const double ls = std::max(x.log_scale, y.log_scale);
  const BasisPoint xs = rescale(x, ls), ys = rescale(y, ls);
  return {xs.v + k * ys.v, xs.dv + k * ys.dv, xs.shift + k * ys.shift, ls};
}

// ---------------------------------------------------------------------------
// ODE oracle

struct OdeSolution {
  std::vector<double> abscissae;
  std::vector<double> values;
  std::vector<double> derivative_values;
  double tol = 0.0;
  ode::DenseSolution<2> dense;

  double value(double t) const { return dense(t)[0]; }
  double derivative(double t) const { return dense(t)[1]; }
};

inline auto resolvent_rhs(double a, double b) {
  return [a, b](double t, const ode::State<2>& y) -> ode::State<2> {
    const double w = 1.0 / (1.0 + t);
    return {y[1], -(w - a) * y[1] + (a + b) * w * y[0]};
  };
}

inline OdeSolution resolvent_ode_oracle(double a, double b, double s, double t_max, double tol) {
  if (!std::isfinite(a) || !std::isfinite(b)) fail(ErrorKind::invalid_argument, "resolvent_ode_oracle: non-finite (a, b)");
  if (!(s >= 0.0) || !(t_max > s)) fail(ErrorKind::domain, "resolvent_ode_oracle: need 0 <= s < t_max");
  if (!(tol > 0.0)) fail(ErrorKind::invalid_argument, "resolvent_ode_oracle: tol must be positive");
  ode::Options opt;
  opt.rtol = tol;
  opt.atol = tol;
  OdeSolution out;
  out.tol = tol;
  out.dense = ode::integrate<2>(resolvent_rhs(a, b), s, {1.0, a}, t_max, opt);
  for (const auto& st : out.dense.steps()) {
    out.abscissae.push_back(st.t);
    out.values.push_back(st.y[0]);
    out.derivative_values.push_back(st.y[1]);
  }
  out.abscissae.push_back(t_max);
  out.values.push_back(out.dense.final_state()[0]);
  out.derivative_values.push_back(out.dense.final_state()[1]);
  return out;
}

// ---------------------------------------------------------------------------
// Regime bases

namespace detail {

class BasisImpl {
 public:
  virtual ~BasisImpl() = default;
  virtual BasisPoint A(double t) const = 0;
  virtual BasisPoint B(double t) const = 0;
  virtual double anchor() const { return 0.0; }
};

inline Scaled as_scaled(const specfun::ScaledValue& s) { return s.scaled; }

// a < 0: e^{at} U(alpha, 1, z), e^{at} M(alpha, 1, z), z = |a|(1+t), alpha = -b/a.
class ConfluentDecaying final : public BasisImpl {
 public:
  ConfluentDecaying(double a, double b) : a_(a), alpha_(-b / a) {}

  BasisPoint A(double t) const override {
    const double z = -a_ * (1.0 + t);
    const double u1 = specfun::tricomi_u(alpha_, 1.0, z);
    const double up = specfun::tricomi_u(alpha_ + 1.0, 2.0, z);
    return {u1, a_ * (u1 + alpha_ * up), a_ * alpha_ * up, a_ * t};
  }

  BasisPoint B(double t) const override {
    const double z = -a_ * (1.0 + t);
    const Scaled m1 = specfun::kummer_m_scaled(alpha_, 1.0, z).scaled;
    const Scaled mp = specfun::kummer_m_scaled(alpha_ + 1.0, 2.0, z).scaled;
    const double ls = std::max(m1.log_scale, mp.log_scale);
    const double v = m1.mantissa * std::exp(m1.log_scale - ls);
    const double w = mp.mantissa * std::exp(mp.log_scale - ls);
    return {v, a_ * (v - alpha_ * w), -a_ * alpha_ * w, ls + a_ * t};
  }

 private:
  double a_, alpha_;
};

// a > 0: U(alpha, 1, z), M(alpha, 1, z), z = a(1+t), alpha = 1 + b/a.
class ConfluentGrowing final : public BasisImpl {
 public:
  ConfluentGrowing(double a, double b) : a_(a), b_(b), alpha_(1.0 + b / a) {}

  BasisPoint A(double t) const override {
    const double z = a_ * (1.0 + t);
    const double u1 = specfun::tricomi_u(alpha_, 1.0, z);
    const double up = specfun::tricomi_u(alpha_ + 1.0, 2.0, z);
    return {u1, -a_ * alpha_ * up, -a_ * (u1 + alpha_ * up), 0.0};
  }

  BasisPoint B(double t) const override {
    const double z = a_ * (1.0 + t);
    const Scaled m1 = specfun::kummer_m_scaled(alpha_, 1.0, z).scaled;
    const Scaled mp = specfun::kummer_m_scaled(alpha_ + 1.0, 2.0, z).scaled;
    const Scaled m2 = specfun::kummer_m_scaled(alpha_, 2.0, z).scaled;
    const double ls = std::max({m1.log_scale, mp.log_scale, m2.log_scale});
    auto at = [ls](const Scaled& m) { return m.mantissa * std::exp(m.log_scale - ls); };
    // M(alpha+1,2) alpha - M(alpha,1) = (alpha-1) M(alpha,2) keeps the shift free of cancellation.
    return {at(m1), a_ * alpha_ * at(mp), b_ * at(m2), ls};
  }

 private:
  double a_, b_, alpha_;
};

// a = 0, b > 0: I0(z), K0(z), z = 2 sqrt(b(1+t)).
class ModifiedBesselBasis final : public BasisImpl {
 public:
  explicit ModifiedBesselBasis(double b) : b_(b) {}

  BasisPoint A(double t) const override {
    const double z = 2.0 * std::sqrt(b_ * (1.0 + t));
    const double zp = 2.0 * b_ / z;
    const Scaled i0 = specfun::bessel_i_scaled(0, z).scaled;
    const Scaled i1 = specfun::bessel_i_scaled(1, z).scaled;
    const double ls = std::max(i0.log_scale, i1.log_scale);
    const double v = i0.mantissa * std::exp(i0.log_scale - ls);
    const double d = i1.mantissa * std::exp(i1.log_scale - ls) * zp;
    return {v, d, d, ls};
  }

  BasisPoint B(double t) const override {
    const double z = 2.0 * std::sqrt(b_ * (1.0 + t));
    const double zp = 2.0 * b_ / z;
    const Scaled k0 = specfun::bessel_k_scaled(0, z).scaled;
    const Scaled k1 = specfun::bessel_k_scaled(1, z).scaled;
    const double ls = std::max(k0.log_scale, k1.log_scale);
    const double v = k0.mantissa * std::exp(k0.log_scale - ls);
    const double d = -k1.mantissa * std::exp(k1.log_scale - ls) * zp;
    return {v, d, d, ls};
  }

 private:
  double b_;
};

// a = 0, b < 0: J0(z), Y0(z), z = 2 sqrt(|b|(1+t)).
class BesselBasis final : public BasisImpl {
 public:
  explicit BesselBasis(double b) : c_(-b) {}

  BasisPoint A(double t) const override {
    const double z = 2.0 * std::sqrt(c_ * (1.0 + t));
    const double d = -specfun::bessel_j(1, z) * 2.0 * c_ / z;
    return {specfun::bessel_j(0, z), d, d, 0.0};
  }

  BasisPoint B(double t) const override {
    const double z = 2.0 * std::sqrt(c_ * (1.0 + t));
    const double d = -specfun::bessel_y(1, z) * 2.0 * c_ / z;
    return {specfun::bessel_y(0, z), d, d, 0.0};
  }

 private:
  double c_;
};

// Largest real zero of U(-n, 1, x) (a Laguerre polynomial up to sign), or 0 if n = 0.
inline double largest_polynomial_root(int n) {
  if (n <= 0) return 0.0;
  // Cauchy bound from the coefficients c_k = (-1)^k C(n,k)/k! of L_n.
  std::vector<double> c(n + 1);
  double binom = 1.0, fact = 1.0;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) {
      binom *= static_cast<double>(n - k + 1) / k;
      fact *= k;
    }
    c[k] = binom / fact;
  }
  double bound = 0.0;
  for (int k = 0; k < n; ++k) bound = std::max(bound, c[k] / c[n]);
  bound += 1.0;
  auto p = [n](double x) { return specfun::detail::tricomi_polynomial(n, 1.0, x); };
  const int grid = 400 * n;
  double hi = bound;
  double p_hi = p(hi);
  for (int i = grid - 1; i >= 0; --i) {
    const double lo = bound * i / grid;
    const double p_lo = p(lo);
    if (p_lo == 0.0) return lo;
    if ((p_lo < 0.0) != (p_hi < 0.0)) {
      double l = lo, h = hi, pl = p_lo;
      for (int it = 0; it < 200 && h - l > 4.0 * specfun::detail::eps * h; ++it) {
        const double m = 0.5 * (l + h);
        const double pm = p(m);
        if ((pm < 0.0) == (pl < 0.0)) {
          l = m;
          pl = pm;
        } else {
          h = m;
        }
      }
      return 0.5 * (l + h);
    }
    hi = lo;
    p_hi = p_lo;
  }
  fail(ErrorKind::domain, "no real zero found for the degenerate polynomial");
}

// Degenerate ratios: rA is polynomial (times e^{at} for a < 0),
//   p(t) = U(-n, 1, |a|(1+t)),   n = b/a (a < 0) or n = -1 - b/a (a > 0),
// and rB = rA + W q with q the reduction-of-order solution
//   q(t) = e^{(kappa+|a|)t} p(t) G(t),  G(t) = int_{t1}^t e^{-|a|(t-s)} ds / ((1+s) p(s)^2),
// kappa = a for a < 0 and 0 for a > 0, so that W(rA, q) = e^{at}/(1+t).
// Below the anchor t1 the solution q is continued by the ODE.
class DegenerateBasis final : public BasisImpl {
 public:
  DegenerateBasis(double a, int n, double wronskian, double ode_tol = 1e-12)
      : a_(a), abs_a_(std::abs(a)), n_(n), w_(wronskian) {
    const double z_root = largest_polynomial_root(n_);
    const double t_root = n_ == 0 ? 0.0 : z_root / abs_a_ - 1.0;
    t1_ = 1.0 + std::max(0.0, t_root);
    const double p1 = p(t1_);
    const double q1_prime = std::exp(a_ * t1_) / ((1.0 + t1_) * (a_ < 0.0 ? std::exp(a_ * t1_) * p1 : p1));
    ode::Options opt;
    opt.rtol = ode_tol;
    opt.atol = ode_tol * std::max(1.0, std::abs(q1_prime));
    // b = n a for a < 0 and b = -(n+1) a for a > 0.
    const double b = a_ < 0.0 ? n_ * a_ : -(n_ + 1.0) * a_;
    below_ = ode::integrate<2>(resolvent_rhs(a_, b), t1_, {0.0, q1_prime}, 0.0, opt);
  }

  double anchor() const override { return t1_; }
  int degree() const { return n_; }

  double p(double t) const { return specfun::detail::tricomi_polynomial(n_, 1.0, abs_a_ * (1.0 + t)); }
  double p_prime(double t) const {
    if (n_ == 0) return 0.0;
    return abs_a_ * n_ * specfun::detail::tricomi_polynomial(n_ - 1, 2.0, abs_a_ * (1.0 + t));
  }
  double h(double s) const {
    const double ps = p(s);
    return 1.0 / ((1.0 + s) * ps * ps);
  }

  double G(double t) const {
    if (t <= t1_) return 0.0;
    const double window = (45.0 + (2.0 * n_ + 1.0) * std::log(2.0 + t)) / abs_a_;
    const double lo = std::max(t1_, t - window);
    auto f = [&](double s) { return std::exp(-abs_a_ * (t - s)) * h(s); };
    return quad::integrate_split(f, quad::graded_cuts(lo, t, 1.0 / abs_a_), 1e-13).value;
  }

  BasisPoint A(double t) const override {
    const double pv = p(t), pd = p_prime(t);
    if (a_ < 0.0) return {pv, a_ * pv + pd, pd, a_ * t};
    return {pv, pd, pd - a_ * pv, 0.0};
  }

  BasisPoint Q(double t) const {
    if (t < t1_) {
      const auto y = below_(t);
      return {y[0], y[1], y[1] - a_ * y[0], 0.0};
    }
    const double pv = p(t), pd = p_prime(t), g = G(t), hv = h(t);
    if (a_ < 0.0) {
      const double q = pv * g;
      const double qd = pd * g + pv * (hv - abs_a_ * g);
      return {q, qd, pd * g + pv * hv, 0.0};
    }
    const double q = pv * g;
    const double qd = pd * g + pv * hv;
    return {q, qd, qd - a_ * q, a_ * t};
  }

  BasisPoint B(double t) const override { return combine(A(t), w_, Q(t)); }

 private:
  double a_, abs_a_;
  int n_;
  double w_;
  double t1_ = 1.0;
  ode::DenseSolution<2> below_;
};

}  // namespace detail

struct BasisOptions {
  // Scale of the degenerate-branch second solution (its Wronskian constant).
  double tilde_wronskian = 1.0;
  // Non-integer b/a this close (relative) to a degenerate integer is routed to
  // the degenerate branch.
  double near_degenerate_tol = 1e-6;
};

// Fundamental pair (rA, rB) with coefficient functions
//   dA(s) = (rB'(s) - a rB(s)) / W(s),  dB(s) = (a rA(s) - rA'(s)) / W(s),
// W(s) = wronskian0 e^{as}/(1+s), so that dA rA + dB rB = 1 and dA rA' + dB rB' = a.
class BasisPair {
 public:
  BasisPair(double a, double b, const BasisOptions& opt = {}) : a_(a), b_(b) {
    regime = classify(a, b);
    if (regime.label == RegimeLabel::DegenerateOU || regime.label == RegimeLabel::DegenerateExp ||
        regime.label == RegimeLabel::DegenerateBM)
      fail(ErrorKind::unsupported, "basis: b = 0 has the closed form e^{a(t-s)}");
    int n_int = 0;
    bool degenerate = regime.degenerate_integer;
    if (degenerate) {
      n_int = regime.integer_ratio;
    } else if (a != 0.0 && !is_zero(a)) {
      const double ratio = b / a;
      const double n = std::round(ratio);
      if (std::abs(ratio - n) <= opt.near_degenerate_tol * (1.0 + std::abs(ratio)) &&
          ((a < 0.0 && n >= 1.0) || (a > 0.0 && n <= -1.0))) {
        degenerate = true;
        near_degenerate = true;
        n_int = static_cast<int>(n);
      }
    }
    if (is_zero(a)) {
      if (b > 0.0) {
        impl_ = std::make_shared<detail::ModifiedBesselBasis>(b);
        wronskian0 = -0.5;
      } else {
        impl_ = std::make_shared<detail::BesselBasis>(b);
        wronskian0 = 1.0 / std::numbers::pi;
      }
      a_ = 0.0;
    } else if (degenerate) {
      const int n = a < 0.0 ? n_int : -1 - n_int;
      impl_ = std::make_shared<detail::DegenerateBasis>(a, n, opt.tilde_wronskian);
      wronskian0 = opt.tilde_wronskian;
      anchor = impl_->anchor();
    } else if (a < 0.0) {
      impl_ = std::make_shared<detail::ConfluentDecaying>(a, b);
      wronskian0 = std::exp(-a) * specfun::rgamma(-b / a);
    } else {
      impl_ = std::make_shared<detail::ConfluentGrowing>(a, b);
      wronskian0 = std::exp(a) * specfun::rgamma(1.0 + b / a);
    }
  }

  Regime regime;
  double wronskian0 = 1.0;
  // Maximal-zero anchor t1 of the degenerate branch (0 otherwise).
  double anchor = 0.0;
  bool near_degenerate = false;

  double a() const { return a_; }
  double b() const { return b_; }

  BasisPoint pointA(double t) const { return impl_->A(t); }
  BasisPoint pointB(double t) const { return impl_->B(t); }

  double rA(double t) const { return pointA(t).value(); }
  double rB(double t) const { return pointB(t).value(); }
  double rA_prime(double t) const { return pointA(t).deriv(); }
  double rB_prime(double t) const { return pointB(t).deriv(); }

  double wronskian(double t) const { return wronskian0 * std::exp(a_ * t) / (1.0 + t); }

  Scaled dA_scaled(double s) const {
    const BasisPoint p = pointB(s);
    return {p.shift * (1.0 + s) / wronskian0, p.log_scale - a_ * s};
  }
  Scaled dB_scaled(double s) const {
    const BasisPoint p = pointA(s);
    return {-p.shift * (1.0 + s) / wronskian0, p.log_scale - a_ * s};
  }
  double dA(double s) const { return dA_scaled(s).value(); }
  double dB(double s) const { return dB_scaled(s).value(); }

  // The degenerate-branch implementation, when present.
  const detail::DegenerateBasis* degenerate_branch() const {
    return dynamic_cast<const detail::DegenerateBasis*>(impl_.get());
  }

 private:
  double a_, b_;
  std::shared_ptr<const detail::BasisImpl> impl_;
};

inline BasisPair basis(double a, double b, const BasisOptions& opt = {}) { return BasisPair(a, b, opt); }

// Evaluator for the degenerate second solution r~ (rB of the degenerate branch).
inline std::function<double(double)> tilde_second_solution(double a, double b, const BasisOptions& opt = {}) {
  const Regime reg = classify(a, b);
  if (!reg.degenerate_integer) fail(ErrorKind::unsupported, "tilde_second_solution: b/a is not a degenerate integer");
  auto pair = std::make_shared<BasisPair>(a, b, opt);
  return [pair](double t) { return pair->rB(t); };
}

// ---------------------------------------------------------------------------

// Coefficients (dA(s), dB(s)) frozen at one s; r(., s) then costs one basis evaluation.
struct ResolventSlice {
  Scaled dA, dB;
};

class Resolvent {
 public:
  Resolvent(double a, double b, const BasisOptions& opt = {}) : a_(a), b_(b) {
    if (!std::isfinite(a) || !std::isfinite(b)) fail(ErrorKind::invalid_argument, "resolvent: non-finite (a, b)");
    if (!is_zero(b)) basis_ = std::make_shared<BasisPair>(a, b, opt);
  }

  bool closed_form() const { return !basis_; }
  const BasisPair& basis() const {
    if (!basis_) fail(ErrorKind::unsupported, "resolvent: b = 0 has no special-function basis");
    return *basis_;
  }
  double a() const { return a_; }
  double b() const { return b_; }

  ResolventSlice slice(double s) const {
    if (!basis_) return {{std::exp(-a_ * s), 0.0}, {0.0, 0.0}};
    return {basis_->dA_scaled(s), basis_->dB_scaled(s)};
  }

  // r(t, s) from a slice and the basis point pair at t.
  static Scaled combine_at(const ResolventSlice& c, const BasisPoint& pa, const BasisPoint& pb) {
    return add(c.dA * pa.scaled_value(), c.dB * pb.scaled_value());
  }

  struct Point {
    BasisPoint A, B;
  };
  Point point(double t) const {
    if (!basis_) return {{1.0, a_, 0.0, a_ * t}, {}};
    return {basis_->pointA(t), basis_->pointB(t)};
  }

  Scaled scaled(double t, double s) const {
    check_times(t, s);
    if (t < s) return {0.0, 0.0};
    if (t == s) return {1.0, 0.0};
    if (!basis_) return {1.0, a_ * (t - s)};
    const Point p = point(t);
    return combine_at(slice(s), p.A, p.B);
  }

  double operator()(double t, double s) const { return scaled(t, s).value(); }

  // d/dt r(t, s).
  double derivative(double t, double s) const {
    check_times(t, s);
    if (t < s) return 0.0;
    if (!basis_) return a_ * std::exp(a_ * (t - s));
    const Point p = point(t);
    const ResolventSlice c = slice(s);
    return add(c.dA * p.A.scaled_deriv(), c.dB * p.B.scaled_deriv()).value();
  }

 private:
  static void check_times(double t, double s) {
    if (!(t >= 0.0) || !(s >= 0.0)) fail(ErrorKind::domain, "resolvent: times must be nonnegative");
  }

  double a_, b_;
  std::shared_ptr<const BasisPair> basis_;
};

inline double resolvent_eval(double a, double b, double t, double s) {
  if (!(t >= 0.0) || !(s >= 0.0)) fail(ErrorKind::domain, "resolvent_eval: times must be nonnegative");
  if (t < s) return 0.0;
  if (t == s) return 1.0;
  return Resolvent(a, b)(t, s);
}

}  // namespace avgsfde
