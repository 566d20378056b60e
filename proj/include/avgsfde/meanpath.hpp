#pragma once

#include <cmath>
#include <memory>
#include <numbers>

#include "avgsfde/core.hpp"
#include "avgsfde/error.hpp"
#include "avgsfde/quadrature.hpp"
#include "avgsfde/resolvent.hpp"
#include "avgsfde/scaled.hpp"
#include "avgsfde/specfun.hpp"

namespace avgsfde {

// x(t) = E[X(t)] = cA rA(t) + cB rB(t) with x(0) = psi0, x'(0) = a psi0 + b psi_int.
struct MeanSolution {
  Params params;
  Regime regime;
  Scaled cA{};
  Scaled cB{};
  std::shared_ptr<const BasisPair> basis;  // null for b = 0

  double cA_value() const { return cA.value(); }
  double cB_value() const { return cB.value(); }
};

inline MeanSolution mean_solution(const Params& p, const BasisOptions& opt = {}) {
  p.validate();
  MeanSolution sol;
  sol.params = p;
  sol.regime = classify(p);
  if (is_zero(p.b)) {
    sol.cA = {p.psi0, 0.0};
    return sol;
  }
  sol.basis = std::make_shared<BasisPair>(p.a, p.b, opt);
  const BasisPoint A = sol.basis->pointA(0.0);
  const BasisPoint B = sol.basis->pointB(0.0);
  const double w0 = sol.basis->wronskian0;
  // Cramer's rule on [rA rB; rA' rB'] c = [psi0; a psi0 + b psi_int], written with
  // (r' - a r) so that no cancellation enters.
  sol.cA = Scaled{(p.psi0 * B.shift - p.b * p.psi_int * B.v) / w0, B.log_scale};
  sol.cB = Scaled{(p.b * p.psi_int * A.v - p.psi0 * A.shift) / w0, A.log_scale};
  return sol;
}

inline Scaled mean_eval_scaled(const MeanSolution& sol, double t) {
  if (!(t >= 0.0)) fail(ErrorKind::domain, "mean_eval: t must be nonnegative");
  if (!sol.basis) return {sol.params.psi0, sol.params.a * t};
  const BasisPoint A = sol.basis->pointA(t);
  const BasisPoint B = sol.basis->pointB(t);
  return add(sol.cA * A.scaled_value(), sol.cB * B.scaled_value());
}

inline double mean_eval(const MeanSolution& sol, double t) { return mean_eval_scaled(sol, t).value(); }

inline double mean_derivative(const MeanSolution& sol, double t) {
  if (!sol.basis) return sol.params.a * sol.params.psi0 * std::exp(sol.params.a * t);
  const BasisPoint A = sol.basis->pointA(t);
  const BasisPoint B = sol.basis->pointB(t);
  return add(sol.cA * A.scaled_deriv(), sol.cB * B.scaled_deriv()).value();
}

// ---------------------------------------------------------------------------
// Growth normalizers

inline bool has_normalizer(RegimeLabel l) { return l != RegimeLabel::DegenerateOU && l != RegimeLabel::DegenerateExp; }

inline double log_growth_normalizer(const Regime& regime, double a, double b, double t) {
  switch (regime.label) {
    case RegimeLabel::ExponentialGrowth: return a * t + (b / a) * std::log(t);
    case RegimeLabel::PolynomialGrowth: return -(1.0 + b / a) * std::log(t);
    case RegimeLabel::SubexponentialGrowth: return -0.25 * std::log(t) + 2.0 * std::sqrt(b * t);
    case RegimeLabel::RecurrentOU:
    case RegimeLabel::RecurrentShifted:
      if (!(t > 1.0)) fail(ErrorKind::domain, "growth_normalizer: needs t > 1");
      return 0.5 * std::log(2.0 * std::log(t));
    case RegimeLabel::BrownianLike:
    case RegimeLabel::DegenerateBM:
      if (!(t > std::numbers::e)) fail(ErrorKind::domain, "growth_normalizer: needs t > e");
      return 0.5 * std::log(2.0 * t * std::log(std::log(t)));
    default: break;
  }
  fail(ErrorKind::unsupported, std::string("growth_normalizer: no normalizer for ") + std::string(to_string(regime.label)));
}

inline double growth_normalizer(const Regime& regime, double a, double b, double t) {
  return std::exp(log_growth_normalizer(regime, a, b, t));
}

// Human-readable form of the normalizer, for reports.
inline const char* normalizer_formula(RegimeLabel l) {
  switch (l) {
    case RegimeLabel::ExponentialGrowth: return "exp(a t) t^(b/a)";
    case RegimeLabel::PolynomialGrowth: return "t^(-(1+b/a))";
    case RegimeLabel::SubexponentialGrowth: return "t^(-1/4) exp(2 sqrt(b t))";
    case RegimeLabel::RecurrentOU:
    case RegimeLabel::RecurrentShifted: return "sqrt(2 log t)";
    case RegimeLabel::BrownianLike:
    case RegimeLabel::DegenerateBM: return "sqrt(2 t log log t)";
    default: return "none";
  }
}

// x(t) / normalizer(t), formed in log space.
inline double normalized_mean(const MeanSolution& sol, double t) {
  const Scaled x = mean_eval_scaled(sol, t);
  const double ln = log_growth_normalizer(sol.regime, sol.params.a, sol.params.b, t);
  return Scaled{x.mantissa, x.log_scale - ln}.value();
}

// ---------------------------------------------------------------------------
// Limit constants

struct LimitStats {
  double mean_C = 0.0;
  double var_C = 0.0;
  double truncation_T = 0.0;
  double quadrature_tol = 0.0;
  // Share of var_C supplied by tail extrapolation beyond truncation_T.
  double tail_fraction = 0.0;
};

inline LimitStats limit_stats(const Params& p, double tol = 1e-10) {
  p.validate();
  const Regime reg = classify(p);
  const double a = p.a, b = p.b, s2 = p.sigma * p.sigma;
  LimitStats out;
  out.quadrature_tol = tol;
  auto finish = [&](const quad::TailResult& r, double factor) {
    out.var_C = factor * r.value;
    out.truncation_T = r.truncation_T;
    out.tail_fraction = r.value != 0.0 ? r.tail_estimate / r.value : 0.0;
  };
  switch (reg.label) {
    case RegimeLabel::PolynomialGrowth: {
      const double aa = -a, r = b / a;
      const double pre = std::pow(aa, -1.0 - r);
      out.mean_C = pre * b *
                   (p.psi0 * specfun::tricomi_u(1.0 - r, 2.0, aa) + p.psi_int * specfun::tricomi_u(-r, 1.0, aa));
      auto f = [&](double s) {
        const double u = (1.0 + s) * specfun::tricomi_u(1.0 - r, 2.0, aa * (1.0 + s));
        return u * u;
      };
      finish(quad::integrate_to_infinity(f, 0.0, 8.0, tol), s2 * b * b * std::pow(aa, -2.0 - 2.0 * r));
      return out;
    }
    case RegimeLabel::ExponentialGrowth: {
      const double r = b / a;
      out.mean_C = std::pow(a, r) * (a * p.psi0 * specfun::tricomi_u(1.0 + r, 2.0, a) +
                                     b * p.psi_int * specfun::tricomi_u(1.0 + r, 1.0, a));
      auto f = [&](double s) {
        const double u = (1.0 + s) * specfun::tricomi_u(1.0 + r, 2.0, a * (1.0 + s));
        return std::exp(-2.0 * a * s) * u * u;
      };
      finish(quad::integrate_to_infinity(f, 0.0, 4.0 / a, tol, 1e-14), s2 * std::pow(a, 2.0 + 2.0 * r));
      return out;
    }
    case RegimeLabel::SubexponentialGrowth: {
      const double z = 2.0 * std::sqrt(b);
      out.mean_C = (p.psi0 * std::pow(b, 0.25) * specfun::bessel_k(1, z) +
                    std::pow(b, 0.75) * p.psi_int * specfun::bessel_k(0, z)) /
                   std::sqrt(std::numbers::pi);
      auto f = [&](double s) {
        const double k = specfun::bessel_k(1, 2.0 * std::sqrt(b * (s + 1.0)));
        return (s + 1.0) * k * k;
      };
      finish(quad::integrate_to_infinity(f, 0.0, 8.0 / b, tol, 1e-14), s2 * std::sqrt(b) / std::numbers::pi);
      return out;
    }
    case RegimeLabel::RecurrentShifted: {
      // alpha = -b/a = 1 on this line; the innermost integral is exact:
      //   F(w) = int_w^inf U(alpha+1, 2, |a|(1+s)) ds = U(alpha, 1, |a|(1+w)) / (alpha |a|).
      const double aa = -a, alpha = -b / a;
      const double k = b * b * specfun::gamma(alpha);
      auto F = [&](double w) { return specfun::tricomi_u(alpha, 1.0, aa * (1.0 + w)) / (alpha * aa); };
      // e^{-a u} int_u^inf e^{a w} F(w) dw
      auto H = [&](double u) {
        auto g = [&](double w) { return std::exp(a * (w - u)) * F(w); };
        return quad::integrate_to_infinity(g, u, 4.0 / aa, 1e-12, 1e-14).value;
      };
      const double psi0_part = quad::integrate_to_infinity([&](double u) { return std::exp(a * u) * F(u); }, 0.0,
                                                           4.0 / aa, tol, 1e-14)
                                   .value;
      out.mean_C = k * (p.psi_int * F(0.0) + p.psi0 * psi0_part);
      auto v = [&](double u) {
        const double h = H(u);
        return h * h;
      };
      finish(quad::integrate_to_infinity(v, 0.0, 8.0 / aa, tol), s2 * k * k);
      return out;
    }
    default: break;
  }
  fail(ErrorKind::unsupported,
       std::string("limit_stats: no limit variable for regime ") + std::string(to_string(reg.label)));
}

}  // namespace avgsfde
