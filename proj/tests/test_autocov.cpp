#include <gtest/gtest.h>

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>

#include "avgsfde/autocov.hpp"

using namespace avgsfde;

namespace {

// Z = (X, I) with dZ = A(u) Z du + sigma e1 dB, A = [[a, b/(1+u)], [1, 0]].
// P = Cov(Z(t)) solves P' = A P + P A^T + sigma^2 e1 e1^T; then Q(u) = Cov(Z(u), Z(t))
// solves Q' = A Q from Q(t) = P(t). Returns Q_11(t + delta).
double moment_covariance(const Params& p, double t, double delta) {
  namespace oi = boost::numeric::odeint;
  using s3 = std::array<double, 3>;  // P11, P12, P22
  s3 P{0, 0, 0};
  const double s2 = p.sigma * p.sigma;
  auto lyap = [&](const s3& x, s3& dx, double u) {
    const double k = p.b / (1.0 + u);
    dx[0] = 2 * (p.a * x[0] + k * x[1]) + s2;
    dx[1] = p.a * x[1] + k * x[2] + x[0];
    dx[2] = 2 * x[1];
  };
  auto stepper = oi::make_controlled<oi::runge_kutta_dopri5<s3>>(1e-13, 1e-13);
  oi::integrate_adaptive(stepper, lyap, P, 0.0, t, 1e-3);
  if (delta == 0.0) return P[0];
  using s2v = std::array<double, 2>;
  // first column of Q: (Cov(X(u), X(t)), Cov(I(u), X(t)))
  s2v q{P[0], P[1]};
  auto prop = [&](const s2v& x, s2v& dx, double u) {
    dx[0] = p.a * x[0] + p.b / (1.0 + u) * x[1];
    dx[1] = x[0];
  };
  oi::integrate_adaptive(oi::make_controlled<oi::runge_kutta_dopri5<s2v>>(1e-13, 1e-13), prop, q, t, t + delta, 1e-3);
  return q[0];
}

}  // namespace

TEST(Covariance, OuClosedForm) {
  const Params p{-0.7, 0.0, 1.3, 1, 0};
  const Autocovariance acv(p);
  for (double t : {0.5, 3.0, 20.0})
    for (double d : {0.0, 0.4, 5.0}) {
      const double ref = p.sigma * p.sigma * std::exp(p.a * d) * (1 - std::exp(2 * p.a * t)) / (-2 * p.a);
      EXPECT_NEAR(acv.covariance(t, d), ref, 1e-12 * ref);
    }
}

TEST(Covariance, AgreesWithMomentEquations) {
  for (const Params& p : {Params{-1, 0.5, 1, 1, 0}, Params{-1, -0.5, 0.7, 1, 0}, Params{-1, 1, 1, 1, 0},
                          Params{-1, 2, 1, 1, 0}, Params{0, -1, 1, 1, 0}, Params{0.5, -0.25, 1, 1, 0},
                          Params{-1, -2, 1, 1, 0}, Params{0, 1, 1, 1, 0}}) {
    const Autocovariance acv(p, 1e-11);
    for (double t : {0.7, 4.0, 15.0})
      for (double d : {0.0, 0.3, 3.0, 12.0}) {
        const double ref = moment_covariance(p, t, d);
        EXPECT_NEAR(acv.covariance(t, d), ref, 1e-8 * std::max(1.0, std::abs(ref))) << p.a << " " << p.b << " " << t << " " << d;
      }
  }
}

TEST(Covariance, SymmetricNegativeLag) {
  const Autocovariance acv(Params{-1, 0.5, 1, 1, 0}, 1e-11);
  EXPECT_NEAR(acv.gamma(8.0, -3.0), acv.covariance(5.0, 3.0), 1e-11);
  EXPECT_THROW(acv.gamma(2.0, -3.0), Error);
  EXPECT_THROW(acv.covariance(2.0, -1.0), Error);
  EXPECT_EQ(covariance(Params{-1, 0.5, 1, 1, 0}, 0.0, 2.0), 0.0);
}

TEST(Covariance, PositiveForPositiveFeedback) {
  for (double b : {0.2, 0.5, 0.9}) {
    const Autocovariance acv(Params{-1, b, 1, 1, 0});
    for (double t : {1.0, 10.0})
      for (double d = 0.0; d < 300.0; d = 1.8 * d + 0.5) EXPECT_GT(acv.covariance(t, d), 0.0) << b << " " << t << " " << d;
  }
}

TEST(Covariance, ProductFormMatchesDirect) {
  for (const Params& p : {Params{-1, 0.5, 1, 1, 0}, Params{-1, -2, 1, 1, 0}, Params{-0.5, 0.25, 2, 1, 0}}) {
    const Autocovariance acv(p, 1e-11);
    const double t = 3.0;
    const auto pf = acv.product_form(t);
    for (double d : {0.5, 10.0, 200.0}) {
      const double direct = acv.covariance(t, d);
      EXPECT_NEAR(acv.product_covariance(pf, t, d), direct, 1e-8 * std::abs(direct) + 1e-14) << p.a << " " << p.b << " " << d;
    }
  }
  EXPECT_THROW(Autocovariance(Params{-1, 0, 1, 1, 0}).product_form(1.0), Error);
}

TEST(Covariance, LongLagConstant) {
  const Params p{-1, 0.5, 1, 1, 0};
  const Autocovariance acv(p, 1e-11);
  const double ct = ct_limit(p, 1.0);
  const auto pf = acv.product_form(1.0);
  double prev = 1e300;
  for (double d : {1e2, 1e3, 1e4}) {
    const double gap = std::abs(acv.product_covariance(pf, 1.0, d) * std::sqrt(d) / ct - 1.0);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  EXPECT_LT(prev, 1e-3);
  EXPECT_EQ(ct_limit(Params{-1, 0, 1, 1, 0}, 1.0), 0.0);
}

TEST(Covariance, LimitingAcf) {
  const Params ou{-1, 0.5, 1, 1, 0};
  EXPECT_NEAR(limiting_acf(ou, 1.0), std::exp(-1.0) / 2, 1e-15);
  EXPECT_NEAR(covariance(ou, 5000.0, 1.0) / limiting_acf(ou, 1.0), 1.0, 5e-3);
  const Params sh{-1, 1, 1, 1, 0};
  EXPECT_NEAR(covariance(sh, 400.0, 2.0, 1e-11) / limiting_acf(sh, 2.0), 1.0, 2e-3);
  EXPECT_THROW(limiting_acf(ou, -1.0), Error);
}

TEST(Covariance, LagEquationResidual) {
  for (const Params& p : {Params{-1, 0.5, 1, 1, 0}, Params{-1, 1, 1, 1, 0}, Params{-0.5, -1, 1, 1, 0}})
    for (double d : {-2.0, 0.5, 4.0}) EXPECT_LT(yule_walker_residual(p, 3.0, d), 1e-5) << p.a << " " << p.b << " " << d;
  EXPECT_THROW(yule_walker_residual(Params{-1, 0.5, 1, 1, 0}, 0.0, 1.0), Error);
}

TEST(DecayFit, PowerLawRecovered) {
  const Params p{-1, 0.5, 1, 1, 0};
  const auto fit = decay_fit(p, 1.0, 50.0, 500.0, 16);
  EXPECT_EQ(fit.theoretical_exponent, -0.5);
  EXPECT_NEAR(fit.fitted_exponent, -0.5, 0.02);
  EXPECT_FALSE(fit.poor_linear_fit);
  EXPECT_NEAR(fit.fitted_constant / fit.c_t_quadrature, 1.0, 0.05);
}

TEST(DecayFit, ExponentialDecayFlaggedAsPoorFit) {
  const auto fit = decay_fit(Params{-1, 0, 1, 1, 0}, 1.0, 1.0, 30.0, 12);
  EXPECT_TRUE(fit.poor_linear_fit);
  EXPECT_LT(fit.fitted_exponent, -3.0);
  EXPECT_EQ(fit.c_t_quadrature, 0.0);
}

TEST(DecayFit, InputAndRegimeErrors) {
  auto kind = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::overflow;
  };
  EXPECT_EQ(kind([] { decay_fit(Params{-1, 2, 1, 1, 0}, 1, 10, 100, 10); }), ErrorKind::unsupported);
  EXPECT_EQ(kind([] { decay_fit(Params{0.5, -1, 1, 1, 0}, 1, 10, 100, 10); }), ErrorKind::unsupported);
  EXPECT_EQ(kind([] { decay_fit(Params{-1, 0.5, 1, 1, 0}, 1, 10, 50, 10); }), ErrorKind::invalid_argument);
  EXPECT_EQ(kind([] { decay_fit(Params{-1, 0.5, 1, 1, 0}, 1, 10, 100, 4); }), ErrorKind::invalid_argument);
  EXPECT_EQ(kind([] { ct_limit(Params{-1, 2, 1, 1, 0}, 1); }), ErrorKind::unsupported);
}

TEST(DecayFit, SignChangeReported) {
  // negative feedback: the long-lag tail is negative while short lags are positive
  const Params p{-1, -0.5, 1, 1, 0};
  EXPECT_LT(ct_limit(p, 1.0), 0.0);
  try {
    decay_fit(p, 1.0, 0.5, 500.0, 16);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::sign_change);
  }
}
