#include "pmthermo/baths.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "pmthermo/error.hpp"

namespace pmthermo {

using std::numbers::pi;

SpectralDensity SpectralDensity::ohmic(double cutoff) {
  if (!(cutoff > 0.0)) throw std::invalid_argument("ohmic spectral density: cutoff must be positive");
  return SpectralDensity(Family::OhmicExp, cutoff, 0.0, 0.0);
}

SpectralDensity SpectralDensity::antisym_lorentzian(double width, double center) {
  if (!(width > 0.0)) throw std::invalid_argument("antisymmetrized Lorentzian: width must be positive");
  if (!(center >= 0.0)) throw std::invalid_argument("antisymmetrized Lorentzian: center must be >= 0");
  return SpectralDensity(Family::AntisymLorentzian, 0.0, width, center);
}

double SpectralDensity::over_omega(double omega) const {
  switch (family_) {
    case Family::OhmicExp:
      return pi * std::exp(-std::abs(omega) / cutoff_);
    case Family::AntisymLorentzian: {
      const double b2 = 0.25 * width_ * width_;
      const double dm = omega - center_;
      const double dp = omega + center_;
      return 4.0 * width_ * center_ / ((dm * dm + b2) * (dp * dp + b2));
    }
  }
  return 0.0;
}

double SpectralDensity::upper_frequency(double beta) const {
  switch (family_) {
    case Family::OhmicExp:
      // pi w e^{-w/cutoff} integrated beyond 40 cutoff is below 1e-15 cutoff^2
      return 40.0 * cutoff_;
    case Family::AntisymLorentzian: {
      double w = center_ + 40.0 * width_;
      if (std::isfinite(beta)) w = std::max(w, 40.0 / beta);
      return w;
    }
  }
  return 0.0;
}

std::string SpectralDensity::describe() const {
  std::ostringstream os;
  if (family_ == Family::OhmicExp) {
    os << "ohmic(cutoff=" << cutoff_ << ")";
  } else {
    os << "antisym_lorentzian(width=" << width_ << ", center=" << center_ << ")";
  }
  return os.str();
}

ModulationFn ModulationFn::zero() { return ModulationFn{}; }

ModulationFn ModulationFn::constant(double value) {
  ModulationFn m;
  m.kind_ = Kind::Constant;
  m.amplitude_ = value;
  return m;
}

ModulationFn ModulationFn::cosine(double amplitude, double frequency) {
  ModulationFn m;
  m.kind_ = Kind::Cosine;
  m.amplitude_ = amplitude;
  m.frequency_ = frequency;
  return m;
}

ModulationFn ModulationFn::windowed_sine(double amplitude, double carrier, double window) {
  if (!(window > 0.0)) throw std::invalid_argument("windowed sine: window frequency must be positive");
  ModulationFn m;
  m.kind_ = Kind::WindowedSine;
  m.amplitude_ = amplitude;
  m.frequency_ = carrier;
  m.window_ = window;
  return m;
}

double ModulationFn::value(double t) const {
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Constant:
      return amplitude_;
    case Kind::Cosine:
      return amplitude_ * std::cos(frequency_ * t);
    case Kind::WindowedSine: {
      if (t > pi / window_) return 0.0;
      const double s = std::sin(window_ * t);
      return amplitude_ * std::sin(frequency_ * t) * s * s;
    }
  }
  return 0.0;
}

double ModulationFn::derivative(double t) const {
  switch (kind_) {
    case Kind::Zero:
    case Kind::Constant:
      return 0.0;
    case Kind::Cosine:
      return -amplitude_ * frequency_ * std::sin(frequency_ * t);
    case Kind::WindowedSine: {
      if (t > pi / window_) return 0.0;
      const double s = std::sin(window_ * t);
      return amplitude_ * (frequency_ * std::cos(frequency_ * t) * s * s +
                           window_ * std::sin(frequency_ * t) * std::sin(2.0 * window_ * t));
    }
  }
  return 0.0;
}

double eval_J(const SpectralDensity& density, double omega) { return omega * density.over_omega(omega); }

namespace {

// y / (1 - e^{-y}), with the removable singularity at y = 0
double bose_weight(double y) {
  if (y == 0.0) return 1.0;
  return y / -std::expm1(-y);
}

// x coth(x), even and equal to 1 at the origin
double x_coth_x(double x) {
  const double ax = std::abs(x);
  if (ax < 1e-4) return 1.0 + ax * ax / 3.0;
  return ax / std::tanh(ax);
}

// J(w) coth(beta w / 2) for w >= 0
double symmetric_density(const SpectralDensity& d, double beta, double omega) {
  if (std::isinf(beta)) return eval_J(d, omega);
  return d.over_omega(omega) * (2.0 / beta) * x_coth_x(0.5 * beta * omega);
}

}  // namespace

double thermalized_J(const SpectralDensity& density, double beta, double omega) {
  if (std::isinf(beta)) return omega > 0.0 ? eval_J(density, omega) : 0.0;
  if (!(beta > 0.0)) throw std::invalid_argument("thermalized_J: beta must be positive");
  return density.over_omega(omega) * bose_weight(beta * omega) / beta;
}

namespace {

constexpr double kAbsTol = 1e-11;
constexpr double kAcceptTol = 1e-10;
constexpr std::size_t kLimit = 20000;

struct WorkspaceDeleter {
  void operator()(gsl_integration_workspace* w) const { gsl_integration_workspace_free(w); }
};
struct QawoDeleter {
  void operator()(gsl_integration_qawo_table* w) const { gsl_integration_qawo_table_free(w); }
};
using Workspace = std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter>;
using QawoTable = std::unique_ptr<gsl_integration_qawo_table, QawoDeleter>;

struct GslHandlerGuard {
  GslHandlerGuard() { previous = gsl_set_error_handler_off(); }
  ~GslHandlerGuard() { gsl_set_error_handler(previous); }
  gsl_error_handler_t* previous;
};

using Integrand = std::function<double(double)>;

double trampoline(double x, void* params) { return (*static_cast<const Integrand*>(params))(x); }

gsl_integration_workspace* workspace(int slot) {
  thread_local Workspace pool[2] = {Workspace(gsl_integration_workspace_alloc(kLimit)),
                                    Workspace(gsl_integration_workspace_alloc(kLimit))};
  return pool[slot].get();
}

void check(int status, double abserr, const char* what, double a, double b, double t) {
  if (status == GSL_SUCCESS) return;
  if ((status == GSL_EROUND || status == GSL_ESING) && abserr <= kAcceptTol) return;
  std::ostringstream os;
  os << "quadrature failed for " << what << " on [" << a << ", " << b << "] at t=" << t << ": "
     << gsl_strerror(status) << " (estimated error " << abserr << ")";
  throw NumericError(os.str());
}

// int_a^b f(w) dw
double integrate_plain(const Integrand& f, double a, double b, const char* what) {
  GslHandlerGuard guard;
  gsl_function F{&trampoline, const_cast<Integrand*>(&f)};
  double result = 0.0;
  double abserr = 0.0;
  const int status = gsl_integration_qag(&F, a, b, kAbsTol, 0.0, kLimit, GSL_INTEG_GAUSS61, workspace(0),
                                         &result, &abserr);
  check(status, abserr, what, a, b, 0.0);
  return result;
}

// int_a^b f(w) {cos, sin}(t w) dw
double integrate_oscillatory(const Integrand& f, double a, double b, double t, bool sine, const char* what) {
  if (t == 0.0) {
    if (sine) return 0.0;
    return integrate_plain(f, a, b, what);
  }
  GslHandlerGuard guard;
  QawoTable table(gsl_integration_qawo_table_alloc(t, b - a, sine ? GSL_INTEG_SINE : GSL_INTEG_COSINE, 50));
  gsl_function F{&trampoline, const_cast<Integrand*>(&f)};
  double result = 0.0;
  double abserr = 0.0;
  const int status = gsl_integration_qawo(&F, a, kAbsTol, 0.0, kLimit, workspace(0), table.get(), &result, &abserr);
  check(status, abserr, what, a, b, t);
  return result;
}

// int_a^inf f(w) {cos, sin}(t w) dw
double integrate_tail(const Integrand& f, double a, double t, bool sine, const char* what) {
  GslHandlerGuard guard;
  gsl_function F{&trampoline, const_cast<Integrand*>(&f)};
  double result = 0.0;
  double abserr = 0.0;
  if (t == 0.0) {
    if (sine) return 0.0;
    const int status = gsl_integration_qagiu(&F, a, kAbsTol, 0.0, kLimit, workspace(0), &result, &abserr);
    check(status, abserr, what, a, INFINITY, t);
    return result;
  }
  QawoTable table(gsl_integration_qawo_table_alloc(t, 1.0, sine ? GSL_INTEG_SINE : GSL_INTEG_COSINE, 50));
  Workspace cycles(gsl_integration_workspace_alloc(kLimit));
  const int status =
      gsl_integration_qawf(&F, a, kAcceptTol * 0.1, kLimit, workspace(0), cycles.get(), table.get(), &result, &abserr);
  check(status, abserr, what, a, INFINITY, t);
  return result;
}

bool needs_tail(const SpectralDensity& d) { return d.family() == SpectralDensity::Family::AntisymLorentzian; }

// int_0^inf f(w) trig(tw) dw, splitting off the algebraic tail when present
double half_line(const SpectralDensity& d, double beta, const Integrand& f, double t, bool sine, const char* what) {
  const double w_max = d.upper_frequency(beta);
  double value = integrate_oscillatory(f, 0.0, w_max, t, sine, what);
  if (needs_tail(d)) value += integrate_tail(f, w_max, t, sine, what);
  return value;
}

void require_beta(double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("bath correlation: beta must be positive (or infinite)");
}

}  // namespace

Complex correlation(const SpectralDensity& density, double beta, double t) {
  require_beta(beta);
  if (t < 0.0) throw std::invalid_argument("correlation: t must be >= 0");
  const Integrand sym = [&](double w) { return symmetric_density(density, beta, w); };
  const Integrand odd = [&](double w) { return eval_J(density, w); };
  const double re = half_line(density, beta, sym, t, false, "Re C(t)");
  const double im = -half_line(density, beta, odd, t, true, "Im C(t)");
  return {re, im};
}

Complex correlation_derivative(const SpectralDensity& density, double beta, double t) {
  require_beta(beta);
  if (t < 0.0) throw std::invalid_argument("correlation_derivative: t must be >= 0");
  const Integrand sym = [&](double w) { return w * symmetric_density(density, beta, w); };
  const Integrand odd = [&](double w) { return w * eval_J(density, w); };
  const double re = -half_line(density, beta, sym, t, true, "Re dC/dt");
  const double im = -half_line(density, beta, odd, t, false, "Im dC/dt");
  return {re, im};
}

Complex correlation_fourier(const SpectralDensity& density, double beta, double t) {
  require_beta(beta);
  const Integrand pos = [&](double w) { return thermalized_J(density, beta, w); };
  // negative frequencies, mirrored onto w >= 0 so the same kernels apply:
  // int_{-W}^0 J_b(w) e^{-iwt} dw = int_0^W J_b(-u) [cos(ut) + i sin(ut)] du
  const Integrand neg = [&](double u) { return thermalized_J(density, beta, -u); };
  double re = half_line(density, beta, pos, t, false, "Re Fourier C(t)");
  double im = -half_line(density, beta, pos, t, true, "Im Fourier C(t)");
  if (std::isfinite(beta)) {
    // J_b(-w) = e^{-beta w} J_b(w); with beta W >= 40 the tail beyond W is negligible
    const double w_max = density.upper_frequency(beta);
    re += integrate_oscillatory(neg, 0.0, w_max, t, false, "Re Fourier C(t), w < 0");
    im += integrate_oscillatory(neg, 0.0, w_max, t, true, "Im Fourier C(t), w < 0");
  }
  return {re, im};
}

Complex ohmic_zero_temperature_correlation(double cutoff, double t) {
  const Complex denom = Complex(1.0, cutoff * t);
  return pi * cutoff * cutoff / (denom * denom);
}

Complex ohmic_zero_temperature_correlation_derivative(double cutoff, double t) {
  const Complex denom = Complex(1.0, cutoff * t);
  return Complex(0.0, -2.0 * pi * cutoff * cutoff * cutoff) / (denom * denom * denom);
}

}  // namespace pmthermo
