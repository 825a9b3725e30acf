#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <limits>
#include <span>

namespace pmthermo {

struct OdeOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double h_init = 0.0;  // 0 selects the starting step automatically
  double h_max = std::numeric_limits<double>::infinity();
  double h_min = 1e-13;  // relative to the integration span
  long max_steps = 50'000'000;
};

/// Adaptive Dormand-Prince 5(4) with the 4th-order continuous extension of
/// Hairer, Norsett and Wanner. The state is a flat complex vector; callers
/// pack density matrices and real accumulators into it.
class DormandPrince {
 public:
  using State = Eigen::VectorXcd;
  using Rhs = std::function<void(double t, const State& y, State& dydt)>;
  using Observer = std::function<void(double t, const State& y)>;

  using Options = OdeOptions;

  struct Stats {
    long accepted = 0;
    long rejected = 0;
    long rhs_calls = 0;
    double last_step = 0.0;
  };

  explicit DormandPrince(Options options = OdeOptions()) : opt_(options) {}

  /// Integrates from `t0` with state `y0`, calling `observer` at each entry of
  /// `outputs` (ascending, all >= t0). An output equal to t0 reports y0
  /// unchanged. Returns the state at the last output time.
  State integrate(const Rhs& rhs, double t0, const State& y0, std::span<const double> outputs,
                  const Observer& observer);

  const Stats& stats() const { return stats_; }
  const Options& options() const { return opt_; }

 private:
  double initial_step(const Rhs& rhs, double t0, const State& y0, const State& f0, double span);
  double error_norm(const State& err, const State& y0, const State& y1) const;

  Options opt_;
  Stats stats_;
};

}  // namespace pmthermo
