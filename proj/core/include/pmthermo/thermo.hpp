#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pmthermo/dynamics.hpp"

namespace pmthermo {

/// -Tr{H_IM,j(t) L_{M,j}[rho]}: energy flowing into bath j.
RateChannel heat_rate(const GeneratorParts& parts, int j);
/// (d lambda_j/dt) Tr{(A_j x X_j) rho}
RateChannel interaction_work_rate(const GeneratorParts& parts, int j);
/// f'(t) Tr{(V x 1) rho}
RateChannel system_work_rate(const GeneratorParts& parts);

/// W_S, then Q_j and W_I_j for every bath, named "W_S", "Q_<j>", "W_I_<j>".
std::vector<RateChannel> standard_channels(const GeneratorParts& parts);

/// Tr{H_S(t) rho_S}
double internal_energy(const SystemSpec& system, const Matrix& rho_system, double t);
/// Tr{H_IM,j(t) rho}
double interaction_energy(const GeneratorParts& parts, int j, const Matrix& rho, double t);

/// Energy bookkeeping along a trajectory; every column is a difference from
/// t = 0. R = U + sum_j (I_j + Q_j) - W_S - sum_j W_I_j.
struct EnergyLedger {
  std::vector<double> times;
  std::vector<double> U;
  std::vector<std::vector<double>> I;    // [bath][time]
  std::vector<std::vector<double>> Q;    // [bath][time]
  std::vector<double> W_S;
  std::vector<std::vector<double>> W_I;  // [bath][time]
  std::vector<double> R;
  double e_ref = 0.0;

  double max_relative_residual() const;  // max_t |R| / e_ref
};

/// Needs the channels of standard_channels().
EnergyLedger energy_ledger(const Trajectory& traj);

enum class EntropyVariant { ELB, Spohn, DL };

struct EntropyRecord {
  std::vector<double> S_S;  // von Neumann entropy of the reduced state
  std::vector<double> sigma_elb;
  std::vector<double> sigma_spohn;
  std::vector<double> sigma_dl;
  std::vector<std::string> warnings;
};

/// One entropy-production column. ELB uses every bath with its own beta;
/// Spohn and DL use `betas[0]` and require a single bath.
std::vector<double> entropy_production(const Trajectory& traj, const EnergyLedger& ledger, EntropyVariant variant,
                                       const std::vector<double>& betas);

/// All three columns plus S_S. Spohn and DL are left empty for several baths.
EntropyRecord entropy_record(const Trajectory& traj, const EnergyLedger& ledger, const std::vector<double>& betas);

using CorrelationFn = std::function<Complex(double)>;

struct TwoTimeResult {
  double Q = 0.0;
  double W_I = 0.0;
  double I = 0.0;
  // |value(h) - value(2h)| from the same samples on every other grid point
  double Q_residual = 0.0;
  double W_I_residual = 0.0;
  double I_residual = 0.0;
  bool converged = true;
  std::string message;
};

/// Two-time route for bath j up to grid.back(): double integrals of
/// Im{C(t-s) <A(t)A(s)>} (and of its derivative for the heat) by the
/// trapezoid rule on the triangular grid. `grid` must be uniform from 0 with
/// an even number of intervals. `tolerance` bounds the refinement change
/// relative to max(|value|, scale) before the result is flagged.
TwoTimeResult two_time_thermo(const ModelConfig& config, const GeneratorParts& parts, int j,
                              const CorrelationFn& c, const CorrelationFn& c_dot, const std::vector<double>& grid,
                              double tolerance = 1e-3, int threads = 1);

/// Same, from an already computed correlation matrix of two_time_correlation.
TwoTimeResult two_time_integrals(const Matrix& g, const ModulationFn& lambda, const CorrelationFn& c,
                                 const CorrelationFn& c_dot, const std::vector<double>& grid, double tolerance);

struct CycleLedger {
  double tau = 0.0;
  std::vector<int> ell;
  std::vector<double> W_tot, Q_hot, Q_cold, P, eta, A;
  std::vector<bool> eta_defined;
};

/// Per-cycle differences over [(l-1) tau, l tau] for l = 1..ell_max. Throws
/// NumericError when a cycle boundary is not an output time.
CycleLedger cycle_metrics(const EnergyLedger& ledger, double tau, int ell_max, int hot, int cold);

}  // namespace pmthermo
