// pmthermo command-line runner.
//
//   pmthermo run <config> [--out DIR] [--threads N]
//   pmthermo validate <config> [--threads N]
//   pmthermo sweep <config> [--out DIR] [--threads N]
//
// Exit codes: 0 success, 1 config error, 2 convergence failure, 3 numeric failure.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>

#include "pmthermo/error.hpp"
#include "pmthermo/experiments.hpp"

using namespace pmthermo;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitConvergence = 2;
constexpr int kExitNumeric = 3;

int resolve_threads(int requested) {
  const int cap = max_threads();
  if (requested <= 0) return cap;
  return std::min(requested, cap);
}

void print_files(const std::vector<std::string>& paths) {
  for (const std::string& p : paths) std::printf("wrote %s\n", p.c_str());
}

void print_warnings(const std::vector<std::string>& warnings, const char* context) {
  for (const std::string& w : warnings) std::fprintf(stderr, "warning (%s): %s\n", context, w.c_str());
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void print_validation(const ValidationReport& rep) {
  std::printf("validate: horizon t=%g, doubled Fock truncations, halved tolerances\n", rep.horizon);
  for (const ValidationEntry& e : rep.entries) {
    std::printf("  %-16s reference=% .10e refined=% .10e relative change=%.3e %s\n", e.quantity.c_str(), e.reference,
                e.refined, e.relative_change, e.relative_change < rep.threshold ? "ok" : "FAIL");
  }
  std::printf("validate: %s (threshold %.0e)\n", rep.passed ? "PASS" : "FAIL", rep.threshold);
}

int run_entropy(const EntropyExperiment& e, const std::string& out, int threads) {
  const auto runs = run_entropy_production(e, threads);
  for (const EntropyRun& r : runs) {
    print_warnings(r.trajectory.warnings, "trajectory");
    print_warnings(r.entropy.warnings, "entropy");
    std::vector<double> diff(r.entropy.sigma_elb.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = r.entropy.sigma_elb[i] - r.entropy.sigma_spohn[i];
    std::printf("lambda=%g  max|R|/E_ref=%.2e  max|Sigma_ELB - Sigma_Spohn|=%.6e  steps=%ld\n", r.lambda,
                r.ledger.max_relative_residual(), max_abs(diff), r.trajectory.stats.accepted);
  }
  print_files(write_entropy_outputs(runs, out));
  return 0;
}

int run_machine(const MachineExperiment& m, const std::string& out) {
  if (m.cold.match) {
    std::printf("cold bath: %s, fitted c %.4g, match residual %.3e of |C(0)|\n", m.cold.network.describe().c_str(),
                m.cold.match->network.modes().front().coupling, m.cold.match->relative_max_residual);
  }
  if (m.hot.match) {
    std::printf("hot bath:  %s, fitted c %.4g, match residual %.3e of |C(0)|\n", m.hot.network.describe().c_str(),
                m.hot.match->network.modes().front().coupling, m.hot.match->relative_max_residual);
  }
  const MachineRun r = run_thermal_machine(m);
  print_warnings(r.trajectory.warnings, "trajectory");
  print_warnings(r.entropy.warnings, "entropy");
  const CycleLedger& c = r.cycles;
  std::printf("cycles=%d tau=%g  P_inf=%.6e  eta_inf=%.6e  Q_hot=%.6e  A_last=%.3e  max|R|/E_ref=%.2e\n",
              static_cast<int>(c.ell.size()), c.tau, c.P.back(), c.eta.back(), c.Q_hot.back(), c.A.back(),
              r.ledger.max_relative_residual());
  std::printf("periodic steady state: %s\n", steady_state_reached(c) ? "reached" : "NOT reached");
  print_files(write_machine_outputs(r, out));
  return 0;
}

int run_sweep_cmd(const SweepExperiment& s, const std::string& out, int threads) {
  const auto rows = run_sweep(s, threads);
  int failed = 0;
  for (const SweepRow& r : rows) {
    if (r.status != "ok") ++failed;
  }
  std::printf("sweep: %zu points, %d not ok\n", rows.size(), failed);
  std::printf("wrote %s\n", write_sweep_output(rows, out).c_str());
  return 0;
}

int run_report(const CorrelationReport& r, const std::string& out) {
  const auto res = run_correlation_report(r);
  std::printf("network %s\n", r.bath.network.describe().c_str());
  std::printf("max |C_pseudomode - C_target| = %.3e\n", res.max_closed_vs_target);
  if (r.lindblad) std::printf("max |C_lindblad - C_closed| = %.3e\n", res.max_lindblad_vs_closed);
  std::printf("exponential fit (%d terms): max residual %.3e, rms %.3e, %s\n", r.fit_modes, res.fit.max_residual,
              res.fit.rms_residual, res.fit.message.c_str());
  print_files(write_correlation_outputs(res, out));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudomode simulations of strong-coupling quantum thermodynamics"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int threads = 0;

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--out", out_dir, "Output directory (overrides [output] dir)");
  run->add_option("--threads", threads, "Worker threads (capped by PMTHERMO_MAX_THREADS)");

  auto* validate = app.add_subcommand("validate", "Convergence check: doubled truncations, halved tolerances");
  validate->add_option("config", config_path, "Config file")->required();
  validate->add_option("--threads", threads, "Worker threads");

  auto* sweep = app.add_subcommand("sweep", "Run a thermal-machine parameter sweep");
  sweep->add_option("config", config_path, "Config file")->required();
  sweep->add_option("--out", out_dir, "Output directory (overrides [output] dir)");
  sweep->add_option("--threads", threads, "Worker threads (capped by PMTHERMO_MAX_THREADS)");

  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig cfg = load_experiment(config_path);
    const std::string out = out_dir.empty() ? cfg.output_dir : out_dir;
    const int nthreads = resolve_threads(threads);
    const auto start = std::chrono::steady_clock::now();
    int status = 0;

    if (validate->parsed()) {
      const ValidationReport rep = validate_experiment(cfg, nthreads);
      print_validation(rep);
      status = rep.passed ? 0 : kExitConvergence;
    } else if (sweep->parsed()) {
      const auto* s = std::get_if<SweepExperiment>(&cfg.body);
      if (!s) throw ConfigError("'sweep' needs a config of kind \"sweep\"");
      status = run_sweep_cmd(*s, out, nthreads);
    } else if (const auto* e = std::get_if<EntropyExperiment>(&cfg.body)) {
      status = run_entropy(*e, out, nthreads);
    } else if (const auto* m = std::get_if<MachineExperiment>(&cfg.body)) {
      status = run_machine(*m, out);
    } else if (const auto* s = std::get_if<SweepExperiment>(&cfg.body)) {
      status = run_sweep_cmd(*s, out, nthreads);
    } else if (const auto* r = std::get_if<CorrelationReport>(&cfg.body)) {
      status = run_report(*r, out);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("elapsed %.2f s\n", secs);
    return status;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "convergence failure: %s\n", e.what());
    return kExitConvergence;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  }
}
