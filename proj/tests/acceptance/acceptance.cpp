// Acceptance runner: one PASS/FAIL line per criterion.
//
//   pmthermo-acceptance [--criterion N]
//
// Without --criterion every criterion runs in order. The exit status is 1 when
// any selected criterion fails. Tolerances are pinned below and must not be
// loosened to make a run pass.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "pmthermo/baths.hpp"
#include "pmthermo/error.hpp"
#include "pmthermo/experiments.hpp"
#include "pmthermo/hilbert.hpp"
#include "pmthermo/pseudomodes.hpp"
#include "pmthermo/thermo.hpp"

using namespace pmthermo;

namespace {

// Criterion tolerances.
constexpr double kResidualTol = 1e-6;         // |R| / E_ref
constexpr double kConfigBudget = 60.0;        // seconds per single-run config
constexpr double kSweepBudget = 20.0 * 60.0;  // seconds, shared with the resonance sweep
constexpr double kRouteTol = 1e-3;            // relative, one-time vs two-time
constexpr double kRouteBudget = 300.0;
constexpr double kCorrelationTol = 1e-8;
constexpr double kDetailedBalanceTol = 1e-12;
constexpr double kFourierTol = 1e-8;
constexpr double kZeroTTol = 1e-8;
constexpr double kRatioLow = 8.0;
constexpr double kRatioHigh = 32.0;
constexpr double kEntropyBudget = 600.0;
constexpr double kMachineBudget = 120.0;
constexpr double kSteadyFraction = 1e-3;
constexpr double kIdentityTol = 1e-8;
constexpr double kTraceTol = 1e-9;
constexpr double kHermiticityTol = 1e-10;
constexpr double kValidateTol = 1e-4;

std::string config_path(const std::string& name) { return std::string(PMTHERMO_CONFIG_DIR) + "/" + name; }

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

template <typename T>
T body_of(const std::string& file) {
  return std::get<T>(load_experiment(config_path(file)).body);
}

struct TimedEntropy {
  std::vector<EntropyRun> runs;
  double seconds = 0.0;
};

TimedEntropy entropy_runs(const std::string& file) {
  Stopwatch w;
  TimedEntropy t;
  t.runs = run_entropy_production(body_of<EntropyExperiment>(file), max_threads());
  t.seconds = w.seconds();
  return t;
}

struct SweepPoint {
  double omega0 = 0.0;
  double drive_frequency = 0.0;
  bool ok = false;
  std::string error;
  double residual = 0.0;
  double trace = 0.0;
  double hermiticity = 0.0;
};

// Every point of the shipped sweep run in full, keeping the ledger gates.
std::vector<SweepPoint> sweep_points(const SweepExperiment& s) {
  std::vector<SweepPoint> pts;
  for (double w0 : s.omega0s) {
    for (double wd : s.drive_frequencies) pts.push_back({w0, wd});
  }
  parallel_for(static_cast<int>(pts.size()), max_threads(), [&](int i) {
    MachineExperiment m = s.base;
    m.omega0 = pts[i].omega0;
    m.drive_frequency = pts[i].drive_frequency;
    try {
      const MachineRun r = run_thermal_machine(m);
      pts[i].ok = true;
      pts[i].residual = r.ledger.max_relative_residual();
      pts[i].trace = max_abs(r.trajectory.trace_deviation);
      pts[i].hermiticity = max_abs(r.trajectory.hermiticity_deviation);
    } catch (const Error& e) {
      pts[i].error = e.what();
    }
  });
  return pts;
}

// 1. Energy ledger closes on every shipped config within its runtime budget.
void energy_conservation(Outcome& out) {
  for (const char* file : {"entropy_static.toml", "entropy_driven.toml"}) {
    const TimedEntropy t = entropy_runs(file);
    double worst = 0.0;
    for (const EntropyRun& r : t.runs) worst = std::max(worst, r.ledger.max_relative_residual());
    out.detail << " " << file << " max|R|/E_ref=" << sci(worst) << " (" << sci(t.seconds) << " s);";
    out.require(worst <= kResidualTol, std::string(file) + " residual");
    out.require(t.seconds < kConfigBudget, std::string(file) + " runtime");
  }
  {
    Stopwatch w;
    const MachineRun r = run_thermal_machine(body_of<MachineExperiment>("thermal_machine.toml"));
    const double s = w.seconds();
    const double worst = r.ledger.max_relative_residual();
    out.detail << " thermal_machine.toml max|R|/E_ref=" << sci(worst) << " (" << sci(s) << " s);";
    out.require(worst <= kResidualTol, "thermal_machine residual");
    out.require(s < kConfigBudget, "thermal_machine runtime");
  }
  {
    Stopwatch w;
    const auto pts = sweep_points(body_of<SweepExperiment>("sweep.toml"));
    const double s = w.seconds();
    double worst = 0.0;
    int failed = 0;
    for (const SweepPoint& p : pts) {
      if (!p.ok) ++failed;
      worst = std::max(worst, p.residual);
    }
    out.detail << " sweep.toml " << pts.size() << " points max|R|/E_ref=" << sci(worst) << " (" << sci(s) << " s)";
    out.require(failed == 0, std::to_string(failed) + " sweep points did not complete");
    out.require(worst <= kResidualTol, "sweep residual");
    out.require(s < kSweepBudget, "sweep runtime");
  }
  out.detail << "; correlation_report.toml has no energy ledger";
}

// 2. One-time and two-time routes agree for a TLS and one thermal mode.
void route_equivalence(Outcome& out) {
  Stopwatch w;
  ModelConfig cfg;
  cfg.system = SystemSpec::two_level(2.0, ModulationFn::zero(), excited_state());
  BathCoupling b;
  b.name = "bath";
  b.network = BathNetwork::thermal_star({{2.0, 0.5, 0.1, 0.5}});
  b.coupling_operator = pauli_x();
  b.modulation = ModulationFn::cosine(1.0, 1.0);
  b.beta = 2.0;
  b.fock = {6};
  cfg.baths.push_back(b);
  cfg.integrator = OdeOptions{1e-10, 1e-12};
  cfg.output_times = uniform_grid(10.0, 10.0 / 400);

  const GeneratorParts parts(cfg);
  const Trajectory tr = propagate(cfg, parts, standard_channels(parts));
  const EnergyLedger l = energy_ledger(tr);
  const BathNetwork& net = cfg.baths[0].network;
  const TwoTimeResult tt = two_time_thermo(
      cfg, parts, 0, [&](double t) { return closed_form_correlation(net, t); },
      [&](double t) { return closed_form_correlation_derivative(net, t); }, cfg.output_times, kRouteTol,
      max_threads());

  struct Row {
    const char* name;
    double one, two, residual;
  };
  for (const Row& r : {Row{"Q", l.Q[0].back(), tt.Q, tt.Q_residual}, Row{"W_I", l.W_I[0].back(), tt.W_I, tt.W_I_residual},
                       Row{"I", l.I[0].back(), tt.I, tt.I_residual}}) {
    const double diff = std::abs(r.one - r.two);
    const double tol = std::max(kRouteTol * std::abs(r.one), r.residual);
    out.detail << " " << r.name << ": one-time " << r.one << " two-time " << r.two << " |diff| " << sci(diff)
               << " tol " << sci(tol) << ";";
    out.require(diff <= tol, r.name);
  }
  const double s = w.seconds();
  out.detail << " " << sci(s) << " s";
  out.require(s < kRouteBudget, "runtime");
}

// 3. Pseudomode correlations: Lindblad propagation against closed forms.
void correlation_closed_forms(Outcome& out) {
  const std::vector<double> grid = uniform_grid(10.0, 0.05);
  auto worst_gap = [&](const BathNetwork& net, const std::vector<int>& fock) {
    const LindbladCorrelation lc = lindblad_correlation(net, fock, grid);
    double gap = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      gap = std::max(gap, std::abs(lc.values[i] - closed_form_correlation(net, grid[i])));
    }
    return std::pair{gap, lc.max_top_population};
  };

  // The two matched modes of the shipped machine as one thermal star.
  const MachineExperiment m = body_of<MachineExperiment>("thermal_machine.toml");
  std::vector<Pseudomode> modes = m.cold.match->network.modes();
  for (const Pseudomode& p : m.hot.match->network.modes()) modes.push_back(p);
  const BathNetwork star = BathNetwork::thermal_star(modes);
  const std::vector<int> star_fock{8, 14};
  const auto [star_gap, star_top] = worst_gap(star, star_fock);
  out.detail << " thermal star (2 modes, Fock 8x14, top population " << sci(star_top) << ") max gap "
             << sci(star_gap) << ";";
  out.require(star_gap <= kCorrelationTol, "thermal star");

  const CorrelationReport rep = body_of<CorrelationReport>("correlation_report.toml");
  const auto [chain_gap, chain_top] = worst_gap(rep.bath.network, rep.bath.fock);
  out.detail << " zero-T chain (3 modes) max gap " << sci(chain_gap);
  out.require(chain_gap <= kCorrelationTol, "chain");
}

struct ShippedBath {
  const char* label;
  SpectralDensity density;
  double beta;
};

std::vector<ShippedBath> shipped_baths() {
  const EntropyExperiment e = body_of<EntropyExperiment>("entropy_static.toml");
  const MachineExperiment m = body_of<MachineExperiment>("thermal_machine.toml");
  return {{"ohmic", e.bath.spec.density, e.bath.spec.beta},
          {"cold", m.cold.spec.density, m.cold.spec.beta},
          {"hot", m.hot.spec.density, m.hot.spec.beta}};
}

// 4. Thermalized density: detailed balance and the two correlation forms.
void thermalized_density(Outcome& out) {
  double worst_balance = 0.0;
  double worst_forms = 0.0;
  for (const ShippedBath& b : shipped_baths()) {
    for (int i = 1; i <= 100; ++i) {
      const double w = 0.1 * i;
      const double pos = thermalized_J(b.density, b.beta, w);
      const double neg = thermalized_J(b.density, b.beta, -w);
      worst_balance = std::max(worst_balance, std::abs(neg - std::exp(-b.beta * w) * pos) / std::max(1.0, pos));
    }
    for (int i = 0; i <= 40; ++i) {
      const double t = 0.25 * i;
      worst_forms = std::max(worst_forms,
                             std::abs(correlation(b.density, b.beta, t) - correlation_fourier(b.density, b.beta, t)));
    }
  }
  out.detail << " detailed balance max " << sci(worst_balance) << " (relative to max(1, J_beta)) on 100 points;"
             << " Fourier vs integrand max " << sci(worst_forms) << " on t in [0, 10]";
  out.require(worst_balance <= kDetailedBalanceTol, "detailed balance");
  out.require(worst_forms <= kFourierTol, "correlation forms");
}

// 5. Zero-temperature ohmic correlation against its closed form.
void zero_temperature_oracle(Outcome& out) {
  double worst = 0.0;
  for (double cutoff : {0.5, 1.0, 2.0}) {
    const SpectralDensity j = SpectralDensity::ohmic(cutoff);
    for (int i = 0; i <= 200; ++i) {
      const double t = 0.05 * i / cutoff;
      const Complex exact = std::numbers::pi * cutoff * cutoff / std::pow(Complex(1.0, cutoff * t), 2);
      worst = std::max(worst, std::abs(correlation(j, kInfiniteBeta, t) - exact));
    }
  }
  out.detail << " max |C - pi wc^2/(1 + i wc t)^2| = " << sci(worst) << " over wc t in [0, 10]";
  out.require(worst <= kZeroTTol, "closed form");
}

// Returns max|ELB - other| at the largest lambda over the same at lambda/4.
double weak_coupling_ratio(const std::vector<EntropyRun>& runs, bool use_dl, Outcome& out, const char* label) {
  auto gap = [&](const EntropyRun& r) {
    const std::vector<double>& other = use_dl ? r.entropy.sigma_dl : r.entropy.sigma_spohn;
    double g = 0.0;
    for (std::size_t i = 0; i < other.size(); ++i) g = std::max(g, std::abs(r.entropy.sigma_elb[i] - other[i]));
    return g;
  };
  const EntropyRun* strong = nullptr;
  for (const EntropyRun& r : runs) {
    if (!strong || std::abs(r.lambda) > std::abs(strong->lambda)) strong = &r;
  }
  const EntropyRun* weak = nullptr;
  for (const EntropyRun& r : runs) {
    if (std::abs(r.lambda - strong->lambda / 4.0) <= 1e-12 * std::abs(strong->lambda)) weak = &r;
  }
  if (!weak) {
    out.require(false, std::string(label) + " config lacks lambda/4");
    return 0.0;
  }
  const double ratio = gap(*strong) / gap(*weak);
  out.detail << " " << label << " (" << (use_dl ? "ELB-DL" : "ELB-Spohn") << ") lambda " << strong->lambda << ": "
             << sci(gap(*strong)) << ", lambda " << weak->lambda << ": " << sci(gap(*weak)) << ", ratio " << ratio
             << ";";
  return ratio;
}

// 6. Weak-coupling convergence of the entropy-production forms.
void weak_coupling_entropy(Outcome& out) {
  const TimedEntropy fixed = entropy_runs("entropy_static.toml");
  const TimedEntropy driven = entropy_runs("entropy_driven.toml");
  const double r1 = weak_coupling_ratio(fixed.runs, false, out, "static");
  const double r2 = weak_coupling_ratio(driven.runs, true, out, "driven");
  out.require(r1 >= kRatioLow && r1 <= kRatioHigh, "static ratio");
  out.require(r2 >= kRatioLow && r2 <= kRatioHigh, "driven ratio");
  const double s = fixed.seconds + driven.seconds;
  out.detail << " " << sci(s) << " s";
  out.require(s < kEntropyBudget, "runtime");
}

// 7. Shipped thermal machine runs as an engine in its periodic steady state.
void thermal_machine(Outcome& out) {
  Stopwatch w;
  const MachineRun r = run_thermal_machine(body_of<MachineExperiment>("thermal_machine.toml"));
  const double s = w.seconds();
  const CycleLedger& c = r.cycles;
  double wmax = 0.0;
  for (double x : c.W_tot) wmax = std::max(wmax, std::abs(x));
  out.detail << " P=" << sci(c.P.back()) << " eta=" << c.eta.back() << " Q_hot=" << sci(c.Q_hot.back())
             << " |A(" << c.ell.back() << ")|=" << sci(std::abs(c.A.back())) << " bound " << sci(kSteadyFraction * wmax)
             << "; " << sci(s) << " s";
  out.require(c.P.back() < 0.0, "P < 0");
  out.require(c.eta_defined.back() && c.eta.back() > 0.0 && c.eta.back() < 1.0, "0 < eta < 1");
  out.require(c.Q_hot.back() < 0.0, "Q_hot < 0");
  out.require(std::abs(c.A.back()) <= kSteadyFraction * wmax, "steady state");
  out.require(s < kMachineBudget, "runtime");
}

// 8. Resonance: the power peak sits at omega0 minus the cold peak frequency.
void resonance(Outcome& out) {
  Stopwatch w;
  SweepExperiment s = body_of<SweepExperiment>("sweep.toml");
  s.omega0s = {2.0};
  const double cold_peak = s.base.cold.spec.density.center();
  const auto rows = run_sweep(s, max_threads());
  const SweepRow* best = nullptr;
  for (const SweepRow& r : rows) {
    if (std::isfinite(r.P_inf) && (!best || -r.P_inf > -best->P_inf)) best = &r;
  }
  const double secs = w.seconds();
  double spacing = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) spacing = std::max(spacing, rows[i].drive_frequency - rows[i - 1].drive_frequency);
  if (!best) {
    out.require(false, "no finite rows");
    return;
  }
  const double target = 2.0 - cold_peak;
  out.detail << " omega0=2: argmax(-P) at Omega_d=" << best->drive_frequency << " (-P=" << sci(-best->P_inf)
             << ", " << best->status << "), expected " << target << " +- " << spacing << " over " << rows.size()
             << " points; " << sci(secs) << " s";
  out.require(std::abs(spacing - 0.1 * cold_peak) <= 1e-9, "grid spacing");
  out.require(std::abs(best->drive_frequency - target) <= spacing + 1e-9, "peak location");
  out.require(secs < kSweepBudget, "runtime");
}

// 9. Entropy-production identities, computed column by column.
void ledger_identities(Outcome& out) {
  double worst_spohn = 0.0;
  double worst_dl = 0.0;
  int runs = 0;
  for (const char* file : {"entropy_static.toml", "entropy_driven.toml"}) {
    const EntropyExperiment e = body_of<EntropyExperiment>(file);
    const double beta = e.bath.spec.beta;
    for (const EntropyRun& r : run_entropy_production(e, max_threads())) {
      ++runs;
      const EnergyLedger& l = r.ledger;
      for (std::size_t i = 0; i < l.times.size(); ++i) {
        const double elb = r.entropy.sigma_elb[i];
        const double a = elb - r.entropy.sigma_spohn[i] - beta * (l.W_S[i] + l.W_I[0][i] - l.I[0][i]);
        const double b = elb - r.entropy.sigma_dl[i] - beta * (l.W_I[0][i] - l.I[0][i]);
        worst_spohn = std::max(worst_spohn, std::abs(a));
        worst_dl = std::max(worst_dl, std::abs(b));
      }
    }
  }
  out.detail << " " << runs << " runs: max |ELB - Spohn - beta(W_S + W_I - I)| = " << sci(worst_spohn)
             << ", max |ELB - DL - beta(W_I - I)| = " << sci(worst_dl);
  out.require(worst_spohn <= kIdentityTol, "Spohn identity");
  out.require(worst_dl <= kIdentityTol, "DL identity");
}

// 10. State-validity gates on every run and the validate gate on every config.
void gates(Outcome& out) {
  double trace = 0.0;
  double herm = 0.0;
  auto take = [&](const Trajectory& t) {
    trace = std::max(trace, max_abs(t.trace_deviation));
    herm = std::max(herm, max_abs(t.hermiticity_deviation));
  };
  for (const char* file : {"entropy_static.toml", "entropy_driven.toml"}) {
    for (const EntropyRun& r : entropy_runs(file).runs) take(r.trajectory);
  }
  take(run_thermal_machine(body_of<MachineExperiment>("thermal_machine.toml")).trajectory);
  const auto pts = sweep_points(body_of<SweepExperiment>("sweep.toml"));
  for (const SweepPoint& p : pts) {
    out.require(p.ok, "sweep point omega0=" + std::to_string(p.omega0) + " Omega_d=" +
                          std::to_string(p.drive_frequency) + ": " + p.error);
    trace = std::max(trace, p.trace);
    herm = std::max(herm, p.hermiticity);
  }
  out.detail << " max|Tr rho - 1| = " << sci(trace) << ", max|rho - rho^dag| = " << sci(herm) << ";";
  out.require(trace <= kTraceTol, "trace");
  out.require(herm <= kHermiticityTol, "hermiticity");

  for (const char* file : {"entropy_static.toml", "entropy_driven.toml", "thermal_machine.toml", "sweep.toml",
                           "correlation_report.toml"}) {
    const ValidationReport rep = validate_experiment(load_experiment(config_path(file)), max_threads());
    double worst = 0.0;
    for (const ValidationEntry& e : rep.entries) {
      // Work and entropy changes are reported by validate but not gated here.
      if (e.quantity.rfind("Q_", 0) == 0 || e.quantity.rfind("max|C_M|", 0) == 0) {
        worst = std::max(worst, e.relative_change);
      }
    }
    out.detail << " validate " << file << " max relative change " << sci(worst) << ";";
    out.require(worst < kValidateTol, std::string("validate ") + file);
  }
}

const std::vector<std::function<void(Outcome&)>> kCriteria = {
    energy_conservation,   route_equivalence, correlation_closed_forms, thermalized_density, zero_temperature_oracle,
    weak_coupling_entropy, thermal_machine,   resonance,                ledger_identities,   gates,
};

bool run_criterion(int n) {
  Outcome out;
  try {
    kCriteria[n - 1](out);
  } catch (const std::exception& e) {
    out.require(false, std::string("exception: ") + e.what());
  }
  std::printf("criterion %d: %s%s\n", n, out.pass ? "PASS" : "FAIL", out.detail.str().c_str());
  std::fflush(stdout);
  return out.pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pmthermo acceptance criteria"};
  int criterion = 0;
  app.add_option("--criterion", criterion, "Run only this criterion (1-10)")
      ->check(CLI::Range(1, static_cast<int>(kCriteria.size())));
  CLI11_PARSE(app, argc, argv);

  bool all = true;
  for (int n = 1; n <= static_cast<int>(kCriteria.size()); ++n) {
    if (criterion == 0 || criterion == n) all = run_criterion(n) && all;
  }
  return all ? 0 : 1;
}
