#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pmthermo/config.hpp"
#include "pmthermo/thermo.hpp"

namespace pmthermo {

struct RunControls {
  double t_final = 0.0;
  double dt_out = 0.0;
  OdeOptions ode{1e-8, 1e-10};
  LeakageThresholds leakage;
  double validate_horizon = 0.0;
};

/// A physical bath together with the pseudomodes that represent it.
struct BathModel {
  std::string name;
  BathSpec spec;
  BathNetwork network;
  std::vector<int> fock;
  std::optional<ThermalMatch> match;  // set when the network came from match_thermal_mode

  BathCoupling coupling(ModulationFn lambda) const;
};

struct EntropyExperiment {
  double omega0 = 2.0;
  std::string initial = "excited";
  ModulationFn drive = ModulationFn::zero();
  BathModel bath;
  std::vector<double> lambdas;
  RunControls run;

  ModelConfig model(double lambda) const;
};

struct MachineExperiment {
  double omega0 = 2.0;
  std::string initial = "excited";
  BathModel cold;
  BathModel hot;
  double g_cold = 0.1;
  double g_hot = 0.4;
  double drive_frequency = 1.0;  // Omega_d of the cold coupling
  int periods = 20;
  int steps_per_period = 64;
  RunControls run;

  double tau() const;
  ModelConfig model() const;  // baths ordered cold, hot
};

struct SweepExperiment {
  MachineExperiment base;
  std::vector<double> drive_frequencies;
  std::vector<double> omega0s;
};

struct CorrelationReport {
  BathModel bath;
  double t_final = 10.0;
  double dt = 0.05;
  int fit_modes = 2;
  bool lindblad = true;
};

struct ExperimentConfig {
  std::string kind;
  std::string output_dir;
  std::variant<EntropyExperiment, MachineExperiment, SweepExperiment, CorrelationReport> body;
};

/// Strict: unknown keys raise ConfigError.
ExperimentConfig parse_experiment(const ConfigDocument& doc);
ExperimentConfig load_experiment(const std::string& path);

/// Uniform grid 0, dt, 2 dt, ... ending exactly at t_final.
std::vector<double> uniform_grid(double t_final, double dt);

struct EntropyRun {
  double lambda = 0.0;
  Trajectory trajectory;
  EnergyLedger ledger;
  EntropyRecord entropy;
};

std::vector<EntropyRun> run_entropy_production(const EntropyExperiment& exp, int threads);

struct MachineRun {
  Trajectory trajectory;
  EnergyLedger ledger;
  EntropyRecord entropy;
  CycleLedger cycles;
};

MachineRun run_thermal_machine(const MachineExperiment& exp);

/// Whether |A(last)| <= 1e-3 max_l |W_tot(l)|.
bool steady_state_reached(const CycleLedger& cycles);

struct SweepRow {
  double drive_frequency = 0.0;
  double omega0 = 0.0;
  double P_inf = 0.0;
  double eta_inf = 0.0;
  std::string status;
};

/// Rows sorted by (omega0, drive_frequency); a failing point is recorded and
/// the sweep continues.
std::vector<SweepRow> run_sweep(const SweepExperiment& exp, int threads);

struct CorrelationRow {
  double t = 0.0;
  Complex target, closed_form, lindblad, fit;
};

struct CorrelationReportResult {
  std::vector<CorrelationRow> rows;
  FitResult fit;
  double max_closed_vs_target = 0.0;
  double max_lindblad_vs_closed = 0.0;
};

CorrelationReportResult run_correlation_report(const CorrelationReport& rep);

struct ValidationEntry {
  std::string quantity;
  double reference = 0.0;
  double refined = 0.0;
  double relative_change = 0.0;
};

struct ValidationReport {
  double horizon = 0.0;
  double threshold = 1e-4;
  std::vector<ValidationEntry> entries;
  bool passed = true;
};

/// Reruns a short horizon with doubled Fock truncations and halved
/// tolerances. Relative changes use max(|refined|, 1e-2 E_ref) as the
/// denominator, E_ref being the ledger scale of the refined run.
ValidationReport validate_experiment(const ExperimentConfig& config, int threads);

/// 17 significant digits, comma separated, LF endings.
std::string format_double(double v);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Writes the experiment's CSV files into `dir` and returns their paths.
std::vector<std::string> write_entropy_outputs(const std::vector<EntropyRun>& runs, const std::string& dir);
std::vector<std::string> write_machine_outputs(const MachineRun& run, const std::string& dir);
std::string write_sweep_output(const std::vector<SweepRow>& rows, const std::string& dir);
std::vector<std::string> write_correlation_outputs(const CorrelationReportResult& res, const std::string& dir);

/// Runs `fn(i)` for i in [0, n) on up to `threads` workers; the first
/// exception is rethrown after all workers stop.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

/// Worker cap from PMTHERMO_MAX_THREADS (unset: hardware concurrency).
int max_threads();

}  // namespace pmthermo
