#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <boost/math/special_functions/laguerre.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>

#include <cmath>
#include <numbers>

#include "avgsfde/specfun.hpp"

namespace sf = avgsfde::specfun;
using avgsfde::Error;
using avgsfde::ErrorKind;

namespace {

double rel(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

// Gamma(alpha)^{-1} int_0^inf e^{-x u} u^{alpha-1} (1+u)^{beta-alpha-1} du
double u_integral(double alpha, double beta, double x) {
  boost::math::quadrature::exp_sinh<double> q;
  auto f = [&](double u) { return std::exp(-x * u + (alpha - 1) * std::log(u) + (beta - alpha - 1) * std::log1p(u)); };
  return q.integrate(f, 1e-15) / std::tgamma(alpha);
}

using big = boost::multiprecision::number<boost::multiprecision::cpp_dec_float<200>>;

big kummer_taylor(big alpha, big beta, big x) {
  big term = 1, sum = 1;
  for (int k = 0; k < 2000; ++k) {
    term *= (alpha + k) / (beta + k) * x / (k + 1);
    sum += term;
    if (abs(term) < abs(sum) * big("1e-120")) break;
  }
  return sum;
}

}  // namespace

TEST(Gamma, Examples) {
  EXPECT_DOUBLE_EQ(sf::gamma(1.0), 1.0);
  EXPECT_NEAR(sf::gamma(5.0), 24.0, 24.0 * 1e-14);
  EXPECT_NEAR(sf::gamma(0.5), 1.7724538509055160, 1e-14);
}

TEST(Gamma, MatchesStdAndReflection) {
  for (double x = -9.75; x < 40.0; x += 0.37) {
    if (x == std::round(x) && x <= 0) continue;
    EXPECT_LT(rel(sf::gamma(x), std::tgamma(x)), 1e-12) << x;
    EXPECT_LT(std::abs(sf::rgamma(x) * std::tgamma(x) - 1.0), 1e-12) << x;
    EXPECT_NEAR(sf::log_abs_gamma(x), std::lgamma(x), 1e-12 * (1 + std::abs(std::lgamma(x)))) << x;
  }
}

TEST(Gamma, PolesAreDomainErrors) {
  for (double x : {0.0, -1.0, -7.0}) {
    try {
      sf::gamma(x);
      ADD_FAILURE() << x;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::domain);
    }
    EXPECT_EQ(sf::rgamma(x), 0.0);
  }
}

TEST(KummerM, Examples) {
  EXPECT_DOUBLE_EQ(sf::kummer_m(0, 1, 3.7), 1.0);
  EXPECT_NEAR(sf::kummer_m(1, 1, 1), std::numbers::e, 1e-15);
  EXPECT_NEAR(sf::kummer_m(1, 2, 1), std::numbers::e - 1.0, 1e-15);
}

TEST(KummerM, HighPrecisionTaylorOracle) {
  const double ref = static_cast<double>(kummer_taylor(big(1) / 2, big(1), big(10)));
  EXPECT_LT(rel(sf::kummer_m(0.5, 1, 10), ref), 1e-14);
  for (double x : {0.3, 4.0, 25.0, 49.0, 51.0, 70.0}) {
    const double r = static_cast<double>(kummer_taylor(big(2.5), big(2), big(x)));
    EXPECT_LT(rel(sf::kummer_m(2.5, 2, x), r), 1e-12) << x;
  }
}

TEST(KummerM, MatchesBoost) {
  for (double al : {0.25, 0.5, 1.5, 2.5, 3.0, -0.5, -1.5}) {
    for (double be : {1.0, 2.0}) {
      for (double x = 0.05; x < 120; x *= 1.3) {
        const double ref = boost::math::hypergeometric_1F1(al, be, x);
        EXPECT_LT(std::abs(sf::kummer_m(al, be, x) - ref), 1e-11 * std::abs(ref) + 1e-14) << al << " " << be << " " << x;
      }
    }
  }
}

TEST(KummerM, OverflowIsFlagged) {
  const auto v = sf::kummer_m_eval(0.5, 1, 800.0);
  EXPECT_TRUE(v.overflow);
  EXPECT_EQ(v.value, std::numeric_limits<double>::infinity());
  const auto s = sf::kummer_m_scaled(0.5, 1, 800.0);
  EXPECT_NEAR(s.scaled.log_abs(), 800.0 - 0.5 * std::log(800.0) - std::lgamma(0.5), 1e-3);
}

TEST(KummerM, InvalidBeta) { EXPECT_THROW(sf::kummer_m(1, -2, 1), Error); }

TEST(TricomiU, Examples) {
  EXPECT_DOUBLE_EQ(sf::tricomi_u(0, 1, 2.5), 1.0);
  EXPECT_NEAR(sf::tricomi_u(-1, 1, 3), 2.0, 1e-15);
  EXPECT_LT(rel(sf::tricomi_u(1.5, 2, 1), u_integral(1.5, 2, 1)), 1e-12);
}

TEST(TricomiU, IntegralRepresentationOracle) {
  for (double al : {0.25, 0.5, 1.0, 1.5, 2.5, 3.0, 4.7}) {
    for (double be : {1.0, 2.0}) {
      for (double x : {0.1, 0.4, 1.0, 3.0, 9.0, 30.0, 49.5, 50.5, 80.0}) {
        EXPECT_LT(rel(sf::tricomi_u(al, be, x), u_integral(al, be, x)), 1e-11) << al << " " << be << " " << x;
      }
    }
  }
}

TEST(TricomiU, PolynomialCaseIsLaguerre) {
  // U(-n, 1, x) = (-1)^n n! L_n(x)
  for (int n = 0; n <= 8; ++n) {
    for (double x : {0.2, 1.0, 5.0, 17.0}) {
      const double ref = (n % 2 ? -1.0 : 1.0) * std::tgamma(n + 1.0) * boost::math::laguerre(n, x);
      EXPECT_NEAR(sf::tricomi_u(-n, 1, x), ref, 1e-12 * (1 + std::abs(ref))) << n << " " << x;
    }
  }
}

TEST(TricomiU, NegativeNonIntegerAlphaSolvesKummerEquation) {
  for (double al : {-0.3, -1.5, -2.25}) {
    for (double x : {0.5, 2.0, 8.0, 30.0}) {
      // Wronskian with M, beta = 1
      const double M = sf::kummer_m(al, 1, x), Mp = al * sf::kummer_m(al + 1, 2, x);
      const double U = sf::tricomi_u(al, 1, x), Up = -al * sf::tricomi_u(al + 1, 2, x);
      const double W = -std::exp(x) / x / std::tgamma(al);
      EXPECT_LT(rel(M * Up - Mp * U, W), 1e-9) << al << " " << x;
      // x U'' + (1 - x) U' - al U = 0 with U'' by central differences
      const double h = 1e-3 * x;
      const double upp = (sf::tricomi_u(al, 1, x + h) - 2 * U + sf::tricomi_u(al, 1, x - h)) / (h * h);
      const double scale = std::abs(x * upp) + std::abs((1 - x) * Up) + std::abs(al * U);
      EXPECT_LT(std::abs(x * upp + (1 - x) * Up - al * U) / scale, 1e-5) << al << " " << x;
    }
  }
}

TEST(TricomiU, UnsupportedBeta) {
  try {
    sf::tricomi_u(0.5, 3.0, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::unsupported);
  }
}

TEST(TricomiU, LargeArgumentAsymptotics) {
  // U x^alpha - 1 = -alpha (alpha - beta + 1) / x + O(1/x^2)
  for (double al : {0.5, 1.5, 2.5}) {
    for (double be : {1.0, 2.0}) {
      for (double x : {50.0, 100.0, 400.0}) {
        const double d = sf::tricomi_u(al, be, x) * std::pow(x, al) - 1.0;
        EXPECT_NEAR(d * x, -al * (al - be + 1), 2.0 * std::abs(al * (al - be + 1) * (al + 1) * (al - be + 2)) / x + 1e-9);
      }
    }
  }
}

TEST(KummerM, LargeArgumentAsymptotics) {
  // M(alpha, beta, x) Gamma(alpha) / Gamma(beta) e^{-x} x^{beta-alpha} -> 1 with O(1/x)
  for (double al : {0.5, 1.5}) {
    for (double x : {60.0, 120.0, 240.0}) {
      const auto s = sf::kummer_m_scaled(al, 1, x);
      const double r = s.scaled.mantissa * std::exp(s.scaled.log_scale - x) * std::tgamma(al) * std::pow(x, 1 - al);
      EXPECT_LT(std::abs(r - 1.0) * x, 2.0 * std::abs((1 - al) * (1 - al)) + 1e-6);
    }
  }
}

TEST(Switchover, BranchesAgreeAcrossThresholds) {
  for (double al : {0.25, 1.5, 2.5}) {
    for (double be : {1.0, 2.0}) {
      const double lo = sf::tricomi_u(al, be, 50.0 - 1e-9), hi = sf::tricomi_u(al, be, 50.0 + 1e-9);
      EXPECT_LT(rel(lo, hi), 1e-9);
      const double mlo = sf::kummer_m(al, be, 50.0 - 1e-9), mhi = sf::kummer_m(al, be, 50.0 + 1e-9);
      EXPECT_LT(rel(mlo, mhi), 1e-8);
    }
  }
  for (int n : {0, 1}) {
    const double x0 = 20.0;
    EXPECT_LT(rel(sf::bessel_j(n, x0 - 1e-10), sf::bessel_j(n, x0 + 1e-10)), 1e-9);
    EXPECT_LT(rel(sf::bessel_y(n, x0 - 1e-10), sf::bessel_y(n, x0 + 1e-10)), 1e-9);
    EXPECT_LT(rel(sf::bessel_i(n, x0 - 1e-10), sf::bessel_i(n, x0 + 1e-10)), 1e-9);
    EXPECT_LT(rel(sf::bessel_k(n, x0 - 1e-10), sf::bessel_k(n, x0 + 1e-10)), 1e-9);
  }
}

TEST(Bessel, Examples) {
  EXPECT_EQ(sf::bessel_j(0, 0), 1.0);
  EXPECT_EQ(sf::bessel_j(1, 0), 0.0);
  EXPECT_EQ(sf::bessel_i(0, 0), 1.0);
  EXPECT_EQ(sf::bessel_i(1, 0), 0.0);
  EXPECT_LT(sf::bessel_y(0, 1e-8), -10.0);
  EXPECT_GT(sf::bessel_k(0, 1e-8), 10.0);
  EXPECT_THROW(sf::bessel_y(0, 0.0), Error);
  EXPECT_THROW(sf::bessel_k(0, -1.0), Error);
}

TEST(Bessel, AscendingSeriesOracles) {
  // J0(5), I0(2) and Y0(5) from their ascending series at 200 digits
  const big x5 = 5, q5 = x5 * x5 / 4, x2 = 2, q2 = x2 * x2 / 4;
  big j0 = 0, i0 = 0, ysum = 0, term5 = 1, term2 = 1, harm = 0;
  for (int k = 0; k < 200; ++k) {
    if (k > 0) {
      term5 *= q5 / (big(k) * k);
      term2 *= q2 / (big(k) * k);
      harm += big(1) / k;
    }
    const big sgn = (k % 2) ? -1 : 1;
    j0 += sgn * term5;
    i0 += term2;
    ysum += -sgn * harm * term5;
  }
  const big pi = boost::math::constants::pi<big>();
  const big gamma_e = boost::math::constants::euler<big>();
  const big y0 = 2 / pi * (log(x5 / 2) + gamma_e) * j0 + 2 / pi * ysum;
  EXPECT_LT(rel(sf::bessel_j(0, 5), static_cast<double>(j0)), 1e-13);
  EXPECT_LT(rel(sf::bessel_i(0, 2), static_cast<double>(i0)), 1e-14);
  EXPECT_LT(rel(sf::bessel_y(0, 5), static_cast<double>(y0)), 1e-13);
}

TEST(Bessel, K0IntegralOracle) {
  boost::math::quadrature::exp_sinh<double> q;
  const double ref = q.integrate([](double t) { return std::exp(-std::cosh(t)); }, 1e-15);
  EXPECT_LT(rel(sf::bessel_k(0, 1), ref), 1e-13);
}

TEST(Bessel, MatchesBoost) {
  for (double x = 0.03; x < 150; x *= 1.11) {
    for (int n : {0, 1}) {
      EXPECT_NEAR(sf::bessel_j(n, x), boost::math::cyl_bessel_j(n, x), 2e-15 * std::max(1.0, 1.0 / std::sqrt(x)) + 1e-15);
      EXPECT_NEAR(sf::bessel_y(n, x), boost::math::cyl_neumann(n, x), 1e-14 * std::max(1.0, std::abs(boost::math::cyl_neumann(n, x))));
      EXPECT_LT(rel(sf::bessel_i(n, x), boost::math::cyl_bessel_i(n, x)), 1e-13) << n << " " << x;
      EXPECT_LT(rel(sf::bessel_k(n, x), boost::math::cyl_bessel_k(n, x)), 1e-13) << n << " " << x;
    }
  }
}

TEST(Bessel, WronskiansAtOne) {
  const double x = 1.0;
  const double wj = sf::bessel_j(0, x) * -sf::bessel_y(1, x) - -sf::bessel_j(1, x) * sf::bessel_y(0, x);
  EXPECT_NEAR(wj, 2.0 / (std::numbers::pi * x), 1e-15);
  const double wk = sf::bessel_k(0, x) * sf::bessel_i(1, x) - -sf::bessel_k(1, x) * sf::bessel_i(0, x);
  EXPECT_NEAR(wk, 1.0 / x, 1e-15);
}

TEST(Bessel, ModifiedDerivatives) {
  const double h = 1e-6;
  for (double x : {0.3, 1.0, 4.0, 19.0, 21.0, 35.0}) {
    const double di = (sf::bessel_i(0, x + h) - sf::bessel_i(0, x - h)) / (2 * h);
    const double dk = (sf::bessel_k(0, x + h) - sf::bessel_k(0, x - h)) / (2 * h);
    EXPECT_LT(rel(di, sf::bessel_i(1, x)), 1e-6) << x;
    EXPECT_LT(rel(dk, -sf::bessel_k(1, x)), 1e-6) << x;
  }
}

TEST(Bessel, LargeArgumentAmplitudes) {
  for (double x : {60.0, 200.0, 1000.0}) {
    const double amp = std::hypot(sf::bessel_j(0, x), sf::bessel_y(0, x));
    EXPECT_LT(std::abs(amp / std::sqrt(2.0 / (std::numbers::pi * x)) - 1.0), 1.0 / (8 * x * x) + 1e-12);
    const auto i = sf::bessel_i_scaled(0, x), k = sf::bessel_k_scaled(0, x);
    const double ri = i.scaled.mantissa * std::exp(i.scaled.log_scale - x) * std::sqrt(2 * std::numbers::pi * x);
    const double rk = k.scaled.mantissa * std::exp(k.scaled.log_scale + x) * std::sqrt(2 * x / std::numbers::pi);
    EXPECT_LT(std::abs(ri - 1.0) * x, 0.2);
    EXPECT_LT(std::abs(rk - 1.0) * x, 0.2);
  }
}

TEST(Accuracy, EstimatesAreReported) {
  const auto m = sf::kummer_m_eval(0.5, 1, 10);
  EXPECT_GT(m.accuracy.achieved_rel_err_estimate, 0.0);
  EXPECT_LE(m.accuracy.achieved_rel_err_estimate, m.accuracy.target_rel_err);
  const auto u = sf::tricomi_u_eval(1.5, 2, 60);
  EXPECT_LE(u.accuracy.achieved_rel_err_estimate, u.accuracy.target_rel_err);
}
