#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <string>

namespace pmthermo {

using Complex = std::complex<double>;

inline constexpr double kInfiniteBeta = std::numeric_limits<double>::infinity();

/// Physical spectral density J(omega). Both families vanish at omega = 0 and
/// are evaluated as odd functions for negative frequencies.
class SpectralDensity {
 public:
  enum class Family { OhmicExp, AntisymLorentzian };

  /// J(w) = pi w exp(-w / cutoff)
  static SpectralDensity ohmic(double cutoff);
  /// J(w) = width [1/(width^2/4 + (w - center)^2) - 1/(width^2/4 + (w + center)^2)]
  static SpectralDensity antisym_lorentzian(double width, double center);

  Family family() const { return family_; }
  double cutoff() const { return cutoff_; }
  double width() const { return width_; }
  double center() const { return center_; }

  /// J(w) / w, an even function that is finite at w = 0.
  double over_omega(double omega) const;

  /// Frequency above which the integrand is handled as a tail.
  double upper_frequency(double beta) const;

  std::string describe() const;

 private:
  SpectralDensity(Family f, double cutoff, double width, double center)
      : family_(f), cutoff_(cutoff), width_(width), center_(center) {}

  Family family_;
  double cutoff_ = 0.0;
  double width_ = 0.0;
  double center_ = 0.0;
};

/// Time-dependent scalar multiplier with analytic derivative.
class ModulationFn {
 public:
  enum class Kind { Zero, Constant, Cosine, WindowedSine };

  static ModulationFn zero();
  static ModulationFn constant(double value);
  /// amplitude * cos(frequency t)
  static ModulationFn cosine(double amplitude, double frequency);
  /// amplitude sin(carrier t) sin^2(window t) for t <= pi/window, else 0.
  static ModulationFn windowed_sine(double amplitude, double carrier, double window);

  Kind kind() const { return kind_; }
  double amplitude() const { return amplitude_; }
  double frequency() const { return frequency_; }
  double window() const { return window_; }

  double value(double t) const;
  double derivative(double t) const;
  bool is_time_dependent() const { return kind_ == Kind::Cosine || kind_ == Kind::WindowedSine; }
  bool is_identically_zero() const { return kind_ == Kind::Zero || amplitude_ == 0.0; }

 private:
  Kind kind_ = Kind::Zero;
  double amplitude_ = 0.0;
  double frequency_ = 0.0;
  double window_ = 0.0;
};

struct BathSpec {
  SpectralDensity density = SpectralDensity::ohmic(1.0);
  double beta = kInfiniteBeta;  // 1/T with k_B = 1; infinity means T = 0
  ModulationFn modulation = ModulationFn::constant(1.0);
  std::string coupling_operator = "sigma_x";

  double temperature() const { return std::isinf(beta) ? 0.0 : 1.0 / beta; }
};

double eval_J(const SpectralDensity& density, double omega);

/// sign(w) J(|w|) [1 + coth(beta w / 2)] / 2, continuous through w = 0.
double thermalized_J(const SpectralDensity& density, double beta, double omega);

/// C(t) = int_0^inf dw J(w) [coth(beta w/2) cos(wt) - i sin(wt)], by adaptive
/// quadrature to absolute accuracy 1e-10. Throws NumericError when the
/// quadrature does not converge.
Complex correlation(const SpectralDensity& density, double beta, double t);

/// dC/dt, differentiating under the integral.
Complex correlation_derivative(const SpectralDensity& density, double beta, double t);

/// C(t) = int_{-inf}^{inf} dw J_beta(w) exp(-iwt): the thermalized-density
/// form of the same function.
Complex correlation_fourier(const SpectralDensity& density, double beta, double t);

/// Zero-temperature ohmic correlation pi cutoff^2 / (1 + i cutoff t)^2.
Complex ohmic_zero_temperature_correlation(double cutoff, double t);
Complex ohmic_zero_temperature_correlation_derivative(double cutoff, double t);

}  // namespace pmthermo
