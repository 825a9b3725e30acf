#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "pmthermo/baths.hpp"

namespace pmthermo {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(SpectralDensity, OhmicAtCutoff) {
  const SpectralDensity j = SpectralDensity::ohmic(1.5);
  EXPECT_NEAR(eval_J(j, 1.5), kPi * 1.5 * std::exp(-1.0), 1e-14);
  EXPECT_EQ(eval_J(j, 0.0), 0.0);
}

TEST(SpectralDensity, AntisymLorentzianIsOdd) {
  const SpectralDensity j = SpectralDensity::antisym_lorentzian(0.3, 1.2);
  for (double w : {0.01, 0.5, 1.2, 3.0, 17.0}) EXPECT_NEAR(eval_J(j, -w), -eval_J(j, w), 1e-14);
  EXPECT_EQ(eval_J(j, 0.0), 0.0);
}

TEST(ThermalizedDensity, DetailedBalance) {
  for (const SpectralDensity& j : {SpectralDensity::ohmic(1.0), SpectralDensity::antisym_lorentzian(2.0, 4.0)}) {
    for (double beta : {0.5, 1.0, 5.0}) {
      for (int i = 0; i < 100; ++i) {
        const double w = 0.05 + 0.1 * i;
        const double pos = thermalized_J(j, beta, w);
        const double neg = thermalized_J(j, beta, -w);
        EXPECT_NEAR(neg, std::exp(-beta * w) * pos, 1e-12 * std::max(1.0, pos)) << w;
      }
    }
  }
}

TEST(ThermalizedDensity, ZeroTemperatureLimit) {
  const SpectralDensity j = SpectralDensity::ohmic(1.0);
  EXPECT_NEAR(thermalized_J(j, kInfiniteBeta, 0.7), eval_J(j, 0.7), 1e-15);
  EXPECT_EQ(thermalized_J(j, kInfiniteBeta, -0.7), 0.0);
  EXPECT_NEAR(thermalized_J(j, 200.0, 0.7), eval_J(j, 0.7), 1e-14);
}

TEST(ThermalizedDensity, OhmicOriginLimit) {
  const SpectralDensity j = SpectralDensity::ohmic(1.0);
  for (double beta : {0.5, 2.0}) {
    EXPECT_NEAR(thermalized_J(j, beta, 0.0), kPi / beta, 1e-14);
    EXPECT_NEAR(thermalized_J(j, beta, 1e-7), kPi / beta, 1e-6);
  }
}

TEST(Correlation, ImaginaryPartVanishesAtZero) {
  EXPECT_NEAR(correlation(SpectralDensity::ohmic(1.0), 1.0, 0.0).imag(), 0.0, 1e-10);
  EXPECT_NEAR(correlation(SpectralDensity::antisym_lorentzian(2.0, 4.0), 0.5, 0.0).imag(), 0.0, 1e-10);
}

TEST(Correlation, ZeroTemperatureOhmic) {
  const SpectralDensity j = SpectralDensity::ohmic(2.0);
  EXPECT_NEAR(std::abs(correlation(j, kInfiniteBeta, 0.0) - kPi * 4.0), 0.0, 1e-8);
  const Complex at_one = kPi * 4.0 / std::pow(Complex(1.0, 1.0), 2);
  EXPECT_NEAR(std::abs(correlation(j, kInfiniteBeta, 0.5) - at_one), 0.0, 1e-8);
  for (int i = 0; i <= 40; ++i) {
    const double t = 0.125 * i;
    EXPECT_NEAR(std::abs(correlation(j, kInfiniteBeta, t) - ohmic_zero_temperature_correlation(2.0, t)), 0.0, 1e-8);
  }
}

// Composite Simpson rule for Re C(0) = int_0^W pi w e^{-w/wc} coth(beta w/2) dw.
double simpson_real_c0(double cutoff, double beta) {
  const double upper = 80.0 * cutoff;
  const int n = 40000;
  const double h = upper / n;
  auto f = [&](double w) {
    if (w == 0.0) return 2.0 * kPi / beta;
    return kPi * w * std::exp(-w / cutoff) / std::tanh(0.5 * beta * w);
  };
  double sum = f(0.0) + f(upper);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return sum * h / 3.0;
}

TEST(Correlation, RealPartAtZeroAgainstSimpson) {
  for (double beta : {0.5, 1.0, 4.0}) {
    EXPECT_NEAR(correlation(SpectralDensity::ohmic(1.0), beta, 0.0).real(), simpson_real_c0(1.0, beta), 1e-8);
  }
}

TEST(Correlation, FourierFormAgrees) {
  const SpectralDensity families[] = {SpectralDensity::ohmic(1.0), SpectralDensity::antisym_lorentzian(0.05, 1.0),
                                      SpectralDensity::antisym_lorentzian(2.0, 4.0)};
  for (const SpectralDensity& j : families) {
    for (double beta : {0.5, 5.0}) {
      for (double t : {0.0, 0.3, 1.7, 6.0}) {
        EXPECT_NEAR(std::abs(correlation(j, beta, t) - correlation_fourier(j, beta, t)), 0.0, 1e-8)
            << j.describe() << " beta=" << beta << " t=" << t;
      }
    }
  }
}

TEST(Correlation, BoundedByValueAtZero) {
  const SpectralDensity j = SpectralDensity::antisym_lorentzian(2.0, 4.0);
  const double c0 = correlation(j, 0.5, 0.0).real();
  for (int i = 1; i <= 30; ++i) EXPECT_LE(std::abs(correlation(j, 0.5, 0.2 * i)), c0 + 1e-10);
}

TEST(CorrelationDerivative, PurelyImaginaryAtZero) {
  EXPECT_LE(std::abs(correlation_derivative(SpectralDensity::ohmic(1.0), 1.0, 0.0).real()), 1e-10);
}

TEST(CorrelationDerivative, FiniteDifference) {
  const SpectralDensity j = SpectralDensity::ohmic(1.0);
  const double beta = 1.0;
  const double t = 0.5;
  const double h = 1e-2;
  auto c = [&](double s) { return correlation(j, beta, s); };
  const Complex fd = (-c(t + 2 * h) + 8.0 * c(t + h) - 8.0 * c(t - h) + c(t - 2 * h)) / (12.0 * h);
  EXPECT_NEAR(std::abs(correlation_derivative(j, beta, t) - fd), 0.0, 1e-6);
}

TEST(CorrelationDerivative, ZeroTemperatureAnalytic) {
  const SpectralDensity j = SpectralDensity::ohmic(1.0);
  for (double t : {0.0, 0.5, 2.0, 7.5}) {
    // d/dt pi wc^2 (1 + i wc t)^-2 = -2 i pi wc^3 (1 + i wc t)^-3
    const Complex exact = Complex(0.0, -2.0) * kPi / std::pow(Complex(1.0, t), 3);
    EXPECT_NEAR(std::abs(correlation_derivative(j, kInfiniteBeta, t) - exact), 0.0, 1e-8);
    EXPECT_NEAR(std::abs(ohmic_zero_temperature_correlation_derivative(1.0, t) - exact), 0.0, 1e-14);
  }
}

double fd_error(const ModulationFn& f, double t, double h) {
  return std::abs((f.value(t + h) - f.value(t - h)) / (2.0 * h) - f.derivative(t));
}

TEST(Modulation, DerivativeIsSecondOrderConsistent) {
  const ModulationFn fns[] = {ModulationFn::cosine(0.3, 1.7), ModulationFn::windowed_sine(10.0, 1.0, 0.05)};
  for (const ModulationFn& f : fns) {
    for (double t : {0.4, 3.3, 21.0}) {
      const double e1 = fd_error(f, t, 1e-3);
      const double e2 = fd_error(f, t, 5e-4);
      EXPECT_LT(e1, 1e-5);
      EXPECT_NEAR(e1 / e2, 4.0, 0.2) << t;
    }
  }
}

TEST(Modulation, WindowEnds) {
  const ModulationFn f = ModulationFn::windowed_sine(10.0, 1.0, 0.05);
  const double end = kPi / 0.05;
  EXPECT_EQ(f.value(end + 1e-9), 0.0);
  EXPECT_EQ(f.derivative(end + 3.0), 0.0);
  EXPECT_NEAR(f.value(0.5 * end), 10.0 * std::sin(0.5 * end), 1e-12);
}

TEST(Modulation, ConstantAndZero) {
  EXPECT_EQ(ModulationFn::constant(0.4).derivative(2.0), 0.0);
  EXPECT_EQ(ModulationFn::constant(0.4).value(2.0), 0.4);
  EXPECT_TRUE(ModulationFn::zero().is_identically_zero());
  EXPECT_FALSE(ModulationFn::cosine(0.1, 1.0).is_identically_zero());
}

}  // namespace
}  // namespace pmthermo
