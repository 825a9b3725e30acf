#include "pmthermo/ode.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pmthermo/error.hpp"

namespace pmthermo {

namespace {

constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace

double DormandPrince::error_norm(const State& err, const State& y0, const State& y1) const {
  const Eigen::Index n = err.size();
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sk = opt_.atol + opt_.rtol * std::sqrt(std::max(std::norm(y0[i]), std::norm(y1[i])));
    const double r = std::sqrt(std::norm(err[i])) / sk;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(n));
}

double DormandPrince::initial_step(const Rhs& rhs, double t0, const State& y0, const State& f0, double span) {
  const State zero = State::Zero(y0.size());
  const double d0 = error_norm(y0, y0, zero);
  const double d1n = error_norm(f0, y0, zero);
  double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
  h0 = std::min(h0, span);
  State y1 = y0 + h0 * f0;
  State f1(y0.size());
  rhs(t0 + h0, y1, f1);
  ++stats_.rhs_calls;
  const double d2 = error_norm(f1 - f0, y0, zero) / h0;
  const double dm = std::max(d1n, d2);
  const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
  return std::min({100.0 * h0, h1, span, opt_.h_max});
}

DormandPrince::State DormandPrince::integrate(const Rhs& rhs, double t0, const State& y0,
                                              std::span<const double> outputs, const Observer& observer) {
  stats_ = Stats{};
  if (outputs.empty()) return y0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (outputs[i] < t0 || (i > 0 && outputs[i] < outputs[i - 1])) {
      throw std::invalid_argument("DormandPrince: output times must be ascending and >= t0");
    }
  }
  const double t_end = outputs.back();
  const double span = t_end - t0;
  const Eigen::Index n = y0.size();

  std::size_t next = 0;
  while (next < outputs.size() && outputs[next] == t0) {
    if (observer) observer(t0, y0);
    ++next;
  }
  if (next == outputs.size()) return y0;

  State y = y0, y_new(n), tmp(n);
  State k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  State r1(n), r2(n), r3(n), r4(n), r5(n), dense(n);
  rhs(t0, y, k1);
  ++stats_.rhs_calls;

  double h = opt_.h_init > 0.0 ? std::min(opt_.h_init, span) : initial_step(rhs, t0, y, k1, span);
  const double h_floor = opt_.h_min * std::max(1.0, std::abs(span));
  double t = t0;
  bool last_rejected = false;
  long steps = 0;

  while (next < outputs.size()) {
    if (++steps > opt_.max_steps) {
      std::ostringstream os;
      os << "integrator exceeded " << opt_.max_steps << " steps at t=" << t;
      throw NumericError(os.str());
    }
    if (t + h > t_end) h = t_end - t;
    if (h < h_floor && t_end - t > h_floor) {
      std::ostringstream os;
      os << "step size underflow at t=" << t << " (h=" << h << ")";
      throw NumericError(os.str());
    }

    tmp = y + h * a21 * k1;
    rhs(t + c2 * h, tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, tmp, k6);
    y_new = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    rhs(t + h, y_new, k7);
    stats_.rhs_calls += 6;

    tmp = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double err = error_norm(tmp, y, y_new);
    if (!std::isfinite(err)) {
      std::ostringstream os;
      os << "non-finite state encountered at t=" << t;
      throw NumericError(os.str());
    }

    if (err <= 1.0) {
      const double t_new = (t_end - (t + h) <= h_floor) ? t_end : t + h;
      bool dense_ready = false;
      while (next < outputs.size() && outputs[next] <= t_new) {
        if (outputs[next] == t_new) {
          if (observer) observer(t_new, y_new);
        } else {
          if (!dense_ready) {
            r1 = y;
            r2 = y_new - y;
            r3 = h * k1 - r2;
            r4 = r2 - h * k7 - r3;
            r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
            dense_ready = true;
          }
          const double theta = (outputs[next] - t) / h;
          const double theta1 = 1.0 - theta;
          dense = r1 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
          if (observer) observer(outputs[next], dense);
        }
        ++next;
      }
      ++stats_.accepted;
      stats_.last_step = h;
      t = t_new;
      y.swap(y_new);
      k1.swap(k7);
      double fac = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.2);
      fac = std::clamp(fac, 0.2, 5.0);
      if (last_rejected) fac = std::min(fac, 1.0);
      h = std::min(h * fac, opt_.h_max);
      last_rejected = false;
    } else {
      ++stats_.rejected;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      last_rejected = true;
    }
  }
  return y;
}

}  // namespace pmthermo
