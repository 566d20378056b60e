#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "avgsfde/ode.hpp"
#include "avgsfde/quadrature.hpp"

using namespace avgsfde;

TEST(Quadrature, SmoothIntegrands) {
  EXPECT_NEAR(quad::integrate([](double x) { return std::sin(x); }, 0, std::numbers::pi).value, 2.0, 1e-14);
  EXPECT_NEAR(quad::integrate([](double x) { return x * x * x; }, -1, 2).value, 3.75, 1e-14);
  EXPECT_NEAR(quad::integrate([](double x) { return std::exp(x); }, 1, 0).value, 1.0 - std::numbers::e, 1e-14);
  EXPECT_EQ(quad::integrate([](double) { return 1.0; }, 3, 3).value, 0.0);
}

TEST(Quadrature, EndpointSingularityAndKinks) {
  const auto r = quad::integrate([](double x) { return std::log(x); }, 0, 1, 1e-12);
  EXPECT_NEAR(r.value, -1.0, 1e-10);
  EXPECT_LE(r.error_estimate, 1e-10);
  const auto k = quad::integrate_split([](double x) { return std::abs(x - 0.3); }, {0.0, 0.3, 1.0}, 1e-13);
  EXPECT_NEAR(k.value, 0.5 * 0.09 + 0.5 * 0.49, 1e-14);
  const auto s = quad::integrate([](double x) { return 1.0 / std::sqrt(x); }, 0, 4, 1e-10);
  EXPECT_NEAR(s.value, 4.0, 1e-8);
}

TEST(Quadrature, GradedCutsStayInRange) {
  const auto c = quad::graded_cuts(0, 100, 0.5, {50.0, 150.0});
  for (double x : c) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 100.0);
  }
  EXPECT_NE(std::find(c.begin(), c.end(), 99.5), c.end());
  EXPECT_NE(std::find(c.begin(), c.end(), 50.0), c.end());
  EXPECT_EQ(std::find(c.begin(), c.end(), 150.0), c.end());
}

TEST(Quadrature, NonFiniteIntegrandThrows) {
  EXPECT_THROW(quad::integrate([](double) { return std::numeric_limits<double>::infinity(); }, 0, 1), Error);
}

TEST(TailIntegration, ExponentialAndPowerLawTails) {
  const auto e = quad::integrate_to_infinity([](double x) { return std::exp(-x); }, 0, 1.0, 1e-12);
  EXPECT_TRUE(e.converged);
  EXPECT_NEAR(e.value, 1.0, 1e-5);
  const auto e2 = quad::integrate_to_infinity([](double x) { return std::exp(-x); }, 0, 1.0, 1e-12, 1e-12);
  EXPECT_NEAR(e2.value, 1.0, 1e-11);
  // the extrapolated tail recovers most of what the truncation drops
  const auto p = quad::integrate_to_infinity([](double x) { return 1.0 / (x * x); }, 1, 1.0, 1e-12);
  EXPECT_TRUE(p.converged);
  EXPECT_GT(p.tail_estimate, 0.0);
  EXPECT_LT(std::abs(p.value - 1.0), 0.01 * std::abs(p.value - p.tail_estimate - 1.0));
  const auto q = quad::integrate_to_infinity([](double x) { return std::pow(1.0 + x, -1.5); }, 0, 1.0, 1e-12);
  EXPECT_NEAR(q.value, 2.0, 1e-3);
}

TEST(Ode, ExponentialDecayAndDenseOutput) {
  ode::Options opt;
  opt.rtol = opt.atol = 1e-12;
  const auto sol = ode::integrate<1>([](double, const ode::State<1>& y) { return ode::State<1>{-y[0]}; }, 0.0, {1.0}, 5.0, opt);
  EXPECT_NEAR(sol.final_state()[0], std::exp(-5.0), 1e-11);
  for (double t = 0.0; t <= 5.0; t += 0.137) EXPECT_NEAR(sol(t)[0], std::exp(-t), 1e-9) << t;
  EXPECT_THROW(sol(5.5), Error);
}

TEST(Ode, HarmonicOscillatorBackwards) {
  ode::Options opt;
  opt.rtol = opt.atol = 1e-11;
  auto rhs = [](double, const ode::State<2>& y) { return ode::State<2>{y[1], -y[0]}; };
  const auto sol = ode::integrate<2>(rhs, 10.0, {std::sin(10.0), std::cos(10.0)}, 0.0, opt);
  EXPECT_FALSE(sol.forward());
  EXPECT_NEAR(sol.final_state()[0], 0.0, 1e-9);
  EXPECT_NEAR(sol.final_state()[1], 1.0, 1e-9);
  for (double t = 0.05; t < 10; t += 0.77) {
    EXPECT_NEAR(sol(t)[0], std::sin(t), 1e-8);
    EXPECT_NEAR(sol(t)[1], std::cos(t), 1e-8);
  }
}

TEST(Ode, NonAutonomousPolynomial) {
  // y' = 3 t^2 is integrated exactly by a fifth-order method
  const auto sol = ode::integrate<1>([](double t, const ode::State<1>&) { return ode::State<1>{3 * t * t}; }, 1.0, {1.0}, 3.0,
                                     ode::Options{});
  EXPECT_NEAR(sol.final_state()[0], 27.0, 1e-12);
  EXPECT_NEAR(sol(2.0)[0], 8.0, 1e-12);
}

TEST(Ode, StepBudgetExhaustion) {
  ode::Options opt;
  opt.max_steps = 10;
  try {
    ode::integrate<1>([](double, const ode::State<1>& y) { return ode::State<1>{-1e4 * (y[0] - 1.0)}; }, 0.0, {0.0}, 100.0, opt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::stiffness);
  }
}
