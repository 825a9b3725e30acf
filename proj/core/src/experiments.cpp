#include "pmthermo/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "pmthermo/error.hpp"

namespace pmthermo {

namespace {

Matrix system_operator(const std::string& name) {
  if (name == "sigma_x") return pauli_x();
  if (name == "sigma_y") return pauli_y();
  if (name == "sigma_z") return pauli_z();
  throw ConfigError("unknown coupling operator '" + name + "' (expected sigma_x, sigma_y or sigma_z)");
}

Matrix initial_system_state(const std::string& name) {
  if (name == "excited") return excited_state();
  if (name == "ground") return ground_state();
  if (name == "plus") return plus_state();
  throw ConfigError("unknown initial state '" + name + "' (expected excited, ground or plus)");
}

std::vector<int> fock_list(const ConfigDocument& doc, const std::string& sec, int modes) {
  std::vector<int> fock = doc.integers(sec, "fock");
  if (fock.size() == 1 && modes > 1) fock.assign(modes, fock[0]);
  if (static_cast<int>(fock.size()) != modes) {
    throw ConfigError("[" + sec + "] fock must list one truncation per mode (or a single value)");
  }
  for (int n : fock) {
    if (n < 2) throw ConfigError("[" + sec + "] Fock truncations must be >= 2");
  }
  return fock;
}

std::vector<double> sized(const ConfigDocument& doc, const std::string& sec, const std::string& key, int n) {
  std::vector<double> v = doc.numbers(sec, key);
  if (static_cast<int>(v.size()) != n) {
    std::ostringstream os;
    os << "[" << sec << "] " << key << " must have " << n << " entries";
    throw ConfigError(os.str());
  }
  return v;
}

BathModel parse_bath(const ConfigDocument& doc, const std::string& sec) {
  if (!doc.has_section(sec)) throw ConfigError("missing section [" + sec + "]");
  BathModel b;
  b.name = sec;
  const std::string family = doc.string(sec, "spectral");
  if (family == "ohmic") {
    b.spec.density = SpectralDensity::ohmic(doc.number(sec, "cutoff"));
  } else if (family == "antisym_lorentzian") {
    b.spec.density = SpectralDensity::antisym_lorentzian(doc.number(sec, "width"), doc.number(sec, "center"));
  } else {
    throw ConfigError("[" + sec + "] spectral must be \"ohmic\" or \"antisym_lorentzian\"");
  }
  const double temperature = doc.number(sec, "temperature");
  if (temperature < 0.0) throw ConfigError("[" + sec + "] temperature must be >= 0");
  b.spec.beta = temperature == 0.0 ? kInfiniteBeta : 1.0 / temperature;
  b.spec.coupling_operator = doc.string(sec, "operator", "sigma_x");
  system_operator(b.spec.coupling_operator);

  const std::string kind = doc.string(sec, "pseudomodes");
  if (kind == "zero_t_chain" || kind == "thermal_star") {
    const std::vector<double> freq = doc.numbers(sec, "frequencies");
    const int n = static_cast<int>(freq.size());
    const std::vector<double> damp = sized(doc, sec, "dampings", n);
    const std::vector<double> coup = sized(doc, sec, "couplings", n);
    std::vector<Pseudomode> modes(n);
    for (int k = 0; k < n; ++k) modes[k] = {freq[k], damp[k], coup[k], 0.0};
    if (kind == "zero_t_chain") {
      const std::vector<double> re = n > 1 ? sized(doc, sec, "links", n - 1) : doc.numbers(sec, "links", {});
      const std::vector<double> im = doc.has(sec, "links_imag") ? sized(doc, sec, "links_imag", n - 1)
                                                                : std::vector<double>(re.size(), 0.0);
      std::vector<Complex> links;
      for (std::size_t k = 0; k < re.size(); ++k) links.emplace_back(re[k], im[k]);
      b.network = BathNetwork::zero_t_chain(modes, links);
    } else {
      const std::vector<double> temps =
          doc.has(sec, "temperatures") ? sized(doc, sec, "temperatures", n) : std::vector<double>(n, temperature);
      for (int k = 0; k < n; ++k) modes[k].temperature = temps[k];
      b.network = BathNetwork::thermal_star(modes);
    }
    b.fock = fock_list(doc, sec, n);
  } else if (kind == "matched") {
    const double width = b.spec.density.width();
    const double window = doc.number(sec, "match_window", std::min(8.0 / std::max(width, 1e-12), 100.0));
    const int samples = doc.integer(sec, "match_samples", 401);
    if (!(window >= 0.0) || samples < 1) throw ConfigError("[" + sec + "] invalid match window or sample count");
    if (family != "antisym_lorentzian") throw ConfigError("[" + sec + "] matched pseudomodes need antisym_lorentzian");
    b.match = match_thermal_mode(b.spec, window, samples);
    b.network = b.match->network;
    // "unit": the mode couples through b + b^dag and the coupling strength
    // alone sets the amplitude. "matched": the fitted sqrt(c) multiplies it.
    const std::string scale = doc.string(sec, "mode_coupling", "unit");
    if (scale == "unit") {
      std::vector<Pseudomode> modes = b.network.modes();
      for (Pseudomode& m : modes) m.coupling = 1.0;
      b.network = BathNetwork::thermal_star(modes);
    } else if (scale != "matched") {
      throw ConfigError("[" + sec + "] mode_coupling must be \"unit\" or \"matched\"");
    }
    b.fock = fock_list(doc, sec, 1);
  } else {
    throw ConfigError("[" + sec + "] pseudomodes must be zero_t_chain, thermal_star or matched");
  }
  return b;
}

RunControls parse_run(const ConfigDocument& doc, bool timed) {
  RunControls r;
  if (timed) {
    r.t_final = doc.number("run", "t_final");
    r.dt_out = doc.number("run", "dt_out");
    if (!(r.t_final > 0.0) || !(r.dt_out > 0.0)) throw ConfigError("[run] t_final and dt_out must be positive");
  }
  r.ode.rtol = doc.number("run", "rtol", 1e-8);
  r.ode.atol = doc.number("run", "atol", 1e-10);
  r.leakage.warn = doc.number("run", "leakage_warn", r.leakage.warn);
  r.leakage.fail = doc.number("run", "leakage_fail", r.leakage.fail);
  r.validate_horizon = doc.number("run", "validate_horizon", 0.0);
  if (!(r.ode.rtol > 0.0) || !(r.ode.atol > 0.0)) throw ConfigError("[run] tolerances must be positive");
  return r;
}

ModulationFn parse_drive(const ConfigDocument& doc) {
  if (!doc.has_section("drive")) return ModulationFn::zero();
  const std::string shape = doc.string("drive", "shape");
  if (shape == "none") return ModulationFn::zero();
  if (shape == "constant") return ModulationFn::constant(doc.number("drive", "amplitude"));
  if (shape == "cosine") return ModulationFn::cosine(doc.number("drive", "amplitude"), doc.number("drive", "frequency"));
  if (shape == "windowed_sine") {
    const bool has_freq = doc.has("drive", "window_frequency");
    const bool has_dur = doc.has("drive", "window_duration");
    if (has_freq == has_dur) {
      throw ConfigError("[drive] give exactly one of window_frequency or window_duration");
    }
    // a window of duration T_f ends at pi / Omega_f
    const double window = has_freq ? doc.number("drive", "window_frequency")
                                   : std::numbers::pi / doc.number("drive", "window_duration");
    return ModulationFn::windowed_sine(doc.number("drive", "amplitude"), doc.number("drive", "frequency"), window);
  }
  throw ConfigError("[drive] shape must be none, constant, cosine or windowed_sine");
}

MachineExperiment parse_machine(const ConfigDocument& doc) {
  MachineExperiment m;
  m.omega0 = doc.number("system", "omega0");
  m.initial = doc.string("system", "initial", "excited");
  initial_system_state(m.initial);
  m.cold = parse_bath(doc, "cold");
  m.hot = parse_bath(doc, "hot");
  m.g_cold = doc.number("cold", "strength");
  m.g_hot = doc.number("hot", "strength");
  m.drive_frequency = doc.number("cold", "modulation_frequency");
  if (!(m.drive_frequency > 0.0)) throw ConfigError("[cold] modulation_frequency must be positive");
  m.periods = doc.integer("run", "periods");
  m.steps_per_period = doc.integer("run", "steps_per_period");
  if (m.periods < 1 || m.steps_per_period < 2) throw ConfigError("[run] need periods >= 1, steps_per_period >= 2");
  m.run = parse_run(doc, false);
  m.run.t_final = m.periods * m.tau();
  m.run.dt_out = m.tau() / m.steps_per_period;
  return m;
}

}  // namespace

BathCoupling BathModel::coupling(ModulationFn lambda) const {
  return BathCoupling{name, network, system_operator(spec.coupling_operator), lambda, spec.beta, fock};
}

ModelConfig EntropyExperiment::model(double lambda) const {
  ModelConfig cfg;
  cfg.system = SystemSpec::two_level(omega0, drive, initial_system_state(initial));
  cfg.baths.push_back(bath.coupling(ModulationFn::constant(lambda)));
  cfg.integrator = run.ode;
  cfg.leakage = run.leakage;
  cfg.output_times = uniform_grid(run.t_final, run.dt_out);
  return cfg;
}

double MachineExperiment::tau() const { return 2.0 * std::numbers::pi / drive_frequency; }

ModelConfig MachineExperiment::model() const {
  ModelConfig cfg;
  cfg.system = SystemSpec::two_level(omega0, ModulationFn::zero(), initial_system_state(initial));
  cfg.baths.push_back(cold.coupling(ModulationFn::cosine(g_cold, drive_frequency)));
  cfg.baths.push_back(hot.coupling(ModulationFn::constant(g_hot)));
  cfg.integrator = run.ode;
  cfg.leakage = run.leakage;
  const int n = periods * steps_per_period;
  const double t = tau();
  cfg.output_times.resize(n + 1);
  for (int i = 0; i <= n; ++i) cfg.output_times[i] = t * i / steps_per_period;
  return cfg;
}

std::vector<double> uniform_grid(double t_final, double dt) {
  const long n = std::lround(t_final / dt);
  if (n < 1 || std::abs(n * dt - t_final) > 1e-9 * t_final) {
    throw ConfigError("t_final must be a whole multiple of the output spacing");
  }
  std::vector<double> g(n + 1);
  for (long i = 0; i <= n; ++i) g[i] = t_final * static_cast<double>(i) / static_cast<double>(n);
  return g;
}

ExperimentConfig parse_experiment(const ConfigDocument& doc) {
  ExperimentConfig cfg;
  cfg.kind = doc.string("", "kind");
  cfg.output_dir = doc.string("output", "dir", "out");
  if (cfg.kind == "entropy_production") {
    EntropyExperiment e;
    e.omega0 = doc.number("system", "omega0");
    e.initial = doc.string("system", "initial", "excited");
    initial_system_state(e.initial);
    e.drive = parse_drive(doc);
    e.bath = parse_bath(doc, "bath");
    e.lambdas = doc.numbers("coupling", "lambdas");
    if (e.lambdas.empty()) throw ConfigError("[coupling] lambdas must not be empty");
    std::vector<double> sorted = e.lambdas;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ConfigError("[coupling] lambdas must be distinct");
    }
    e.run = parse_run(doc, true);
    cfg.body = e;
  } else if (cfg.kind == "thermal_machine") {
    cfg.body = parse_machine(doc);
  } else if (cfg.kind == "sweep") {
    SweepExperiment s;
    s.base = parse_machine(doc);
    s.drive_frequencies = doc.numbers("sweep", "drive_frequencies");
    s.omega0s = doc.numbers("sweep", "omega0", {1.5, 2.0, 3.0});
    if (s.drive_frequencies.empty() || s.omega0s.empty()) throw ConfigError("[sweep] empty grid");
    for (double w : s.drive_frequencies) {
      if (!(w > 0.0)) throw ConfigError("[sweep] drive frequencies must be positive");
    }
    cfg.body = s;
  } else if (cfg.kind == "correlation_report") {
    CorrelationReport r;
    r.bath = parse_bath(doc, "bath");
    r.t_final = doc.number("report", "t_final");
    r.dt = doc.number("report", "dt");
    r.fit_modes = doc.integer("report", "fit_modes", 2);
    r.lindblad = doc.boolean("report", "lindblad", true);
    uniform_grid(r.t_final, r.dt);
    if (r.fit_modes < 1) throw ConfigError("[report] fit_modes must be >= 1");
    cfg.body = r;
  } else {
    throw ConfigError("unknown kind '" + cfg.kind +
                      "' (expected entropy_production, thermal_machine, sweep or correlation_report)");
  }
  doc.reject_unused();
  return cfg;
}

ExperimentConfig load_experiment(const std::string& path) { return parse_experiment(ConfigDocument::load(path)); }

int max_threads() {
  int cap = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("PMTHERMO_MAX_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) cap = v;
  }
  return cap;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  const int workers = std::max(1, std::min(threads, n));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex m;
  auto work = [&] {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(m);
        if (!failure) failure = std::current_exception();
        next.store(n);
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

std::vector<EntropyRun> run_entropy_production(const EntropyExperiment& exp, int threads) {
  std::vector<EntropyRun> runs(exp.lambdas.size());
  parallel_for(static_cast<int>(runs.size()), threads, [&](int i) {
    const ModelConfig cfg = exp.model(exp.lambdas[i]);
    const GeneratorParts parts(cfg);
    EntropyRun& r = runs[i];
    r.lambda = exp.lambdas[i];
    r.trajectory = propagate(cfg, parts, standard_channels(parts));
    r.ledger = energy_ledger(r.trajectory);
    r.entropy = entropy_record(r.trajectory, r.ledger, {exp.bath.spec.beta});
  });
  return runs;
}

MachineRun run_thermal_machine(const MachineExperiment& exp) {
  const ModelConfig cfg = exp.model();
  const GeneratorParts parts(cfg);
  MachineRun r;
  r.trajectory = propagate(cfg, parts, standard_channels(parts));
  r.ledger = energy_ledger(r.trajectory);
  r.entropy = entropy_record(r.trajectory, r.ledger, {exp.cold.spec.beta, exp.hot.spec.beta});
  r.cycles = cycle_metrics(r.ledger, exp.tau(), exp.periods, 1, 0);
  return r;
}

bool steady_state_reached(const CycleLedger& cycles) {
  if (cycles.A.empty()) return false;
  double wmax = 0.0;
  for (double w : cycles.W_tot) wmax = std::max(wmax, std::abs(w));
  return std::abs(cycles.A.back()) <= 1e-3 * wmax;
}

std::vector<SweepRow> run_sweep(const SweepExperiment& exp, int threads) {
  std::vector<SweepRow> rows;
  for (double w0 : exp.omega0s) {
    for (double wd : exp.drive_frequencies) rows.push_back({wd, w0, 0.0, 0.0, ""});
  }
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return a.omega0 != b.omega0 ? a.omega0 < b.omega0 : a.drive_frequency < b.drive_frequency;
  });
  parallel_for(static_cast<int>(rows.size()), threads, [&](int i) {
    SweepRow& row = rows[i];
    MachineExperiment m = exp.base;
    m.omega0 = row.omega0;
    m.drive_frequency = row.drive_frequency;
    try {
      const MachineRun r = run_thermal_machine(m);
      row.P_inf = r.cycles.P.back();
      row.eta_inf = r.cycles.eta.back();
      row.status = steady_state_reached(r.cycles) ? "ok" : "no_steady_state";
    } catch (const ConvergenceError&) {
      row.status = "convergence_failure";
    } catch (const NumericError&) {
      row.status = "numeric_failure";
    } catch (const ConfigError&) {
      row.status = "config_error";
    }
    if (row.status != "ok" && row.status != "no_steady_state") {
      row.P_inf = std::numeric_limits<double>::quiet_NaN();
      row.eta_inf = std::numeric_limits<double>::quiet_NaN();
    }
  });
  return rows;
}

CorrelationReportResult run_correlation_report(const CorrelationReport& rep) {
  const std::vector<double> grid = uniform_grid(rep.t_final, rep.dt);
  CorrelationReportResult res;
  std::vector<Complex> target(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) target[i] = correlation(rep.bath.spec.density, rep.bath.spec.beta, grid[i]);
  res.fit = fit_exponentials(grid, target, rep.fit_modes);
  std::vector<Complex> lind(grid.size(), Complex(std::nan(""), std::nan("")));
  if (rep.lindblad) lind = lindblad_correlation(rep.bath.network, rep.bath.fock, grid).values;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CorrelationRow row{grid[i], target[i], closed_form_correlation(rep.bath.network, grid[i]), lind[i],
                       res.fit.sum(grid[i])};
    res.max_closed_vs_target = std::max(res.max_closed_vs_target, std::abs(row.closed_form - row.target));
    if (rep.lindblad) {
      res.max_lindblad_vs_closed = std::max(res.max_lindblad_vs_closed, std::abs(row.lindblad - row.closed_form));
    }
    res.rows.push_back(row);
  }
  return res;
}

namespace {

double relative_change(double reference, double refined, double e_ref) {
  return std::abs(reference - refined) / std::max(std::abs(refined), 1e-2 * e_ref);
}

struct HorizonValues {
  std::vector<double> heat;
  double work = 0.0;
  double entropy = 0.0;
  double e_ref = 0.0;
};

HorizonValues horizon_values(const ModelConfig& cfg) {
  const GeneratorParts parts(cfg);
  const Trajectory tr = propagate(cfg, parts, standard_channels(parts));
  const EnergyLedger l = energy_ledger(tr);
  HorizonValues v;
  for (const auto& q : l.Q) v.heat.push_back(q.back());
  v.work = l.W_S.back();
  for (const auto& w : l.W_I) v.work += w.back();
  v.entropy = von_neumann_entropy(DensityMatrix(tr.system_states.back(), 1e-6)) -
              von_neumann_entropy(DensityMatrix(tr.system_states.front(), 1e-6));
  v.e_ref = l.e_ref;
  return v;
}

ModelConfig refined(ModelConfig cfg) {
  for (BathCoupling& b : cfg.baths) {
    for (int& n : b.fock) n *= 2;
  }
  cfg.integrator.rtol *= 0.5;
  cfg.integrator.atol *= 0.5;
  return cfg;
}

ModelConfig shorten(ModelConfig cfg, double horizon) {
  std::vector<double> out;
  for (double t : cfg.output_times) {
    if (t <= horizon * (1.0 + 1e-12)) out.push_back(t);
  }
  cfg.output_times = out;
  return cfg;
}

void compare_model(const ModelConfig& base, ValidationReport& rep, int threads) {
  ModelConfig a = shorten(base, rep.horizon);
  ModelConfig b = refined(a);
  HorizonValues va, vb;
  parallel_for(2, threads, [&](int i) {
    if (i == 0) {
      va = horizon_values(a);
    } else {
      vb = horizon_values(b);
    }
  });
  for (std::size_t j = 0; j < va.heat.size(); ++j) {
    rep.entries.push_back({"Q_" + base.baths[j].name, va.heat[j], vb.heat[j],
                           relative_change(va.heat[j], vb.heat[j], vb.e_ref)});
  }
  rep.entries.push_back({"W", va.work, vb.work, relative_change(va.work, vb.work, vb.e_ref)});
  rep.entries.push_back({"S_S", va.entropy, vb.entropy, relative_change(va.entropy, vb.entropy, 1.0)});
}

}  // namespace

ValidationReport validate_experiment(const ExperimentConfig& config, int threads) {
  ValidationReport rep;
  if (const auto* e = std::get_if<EntropyExperiment>(&config.body)) {
    rep.horizon = e->run.validate_horizon > 0.0 ? e->run.validate_horizon : std::min(e->run.t_final, 5.0);
    double lam = 0.0;
    for (double l : e->lambdas) lam = std::max(lam, std::abs(l));
    compare_model(e->model(lam), rep, threads);
  } else if (const auto* m = std::get_if<MachineExperiment>(&config.body)) {
    rep.horizon = m->run.validate_horizon > 0.0 ? m->run.validate_horizon : m->tau();
    compare_model(m->model(), rep, threads);
  } else if (const auto* s = std::get_if<SweepExperiment>(&config.body)) {
    rep.horizon = s->base.run.validate_horizon > 0.0 ? s->base.run.validate_horizon : s->base.tau();
    compare_model(s->base.model(), rep, threads);
  } else if (const auto* r = std::get_if<CorrelationReport>(&config.body)) {
    rep.horizon = r->t_final;
    const std::vector<double> grid = uniform_grid(r->t_final, r->dt);
    std::vector<int> doubled = r->bath.fock;
    for (int& n : doubled) n *= 2;
    const auto a = lindblad_correlation(r->bath.network, r->bath.fock, grid).values;
    const auto b = lindblad_correlation(r->bath.network, doubled, grid).values;
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    rep.entries.push_back({"max|C_M| change", 0.0, worst, worst / std::max(std::abs(b[0]), 1e-12)});
  }
  for (const ValidationEntry& e : rep.entries) {
    if (!(e.relative_change < rep.threshold)) rep.passed = false;
  }
  return rep;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_output(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

void write_header(std::ofstream& out, const std::vector<std::string>& header) {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
}

std::string join(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

}  // namespace

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out = open_output(path);
  write_header(out, header);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
}

std::vector<std::string> write_entropy_outputs(const std::vector<EntropyRun>& runs, const std::string& dir) {
  std::vector<std::string> paths;
  for (const EntropyRun& r : runs) {
    char name[64];
    std::snprintf(name, sizeof name, "entropy_lambda_%g.csv", r.lambda);
    std::vector<std::vector<double>> rows;
    const EnergyLedger& l = r.ledger;
    for (std::size_t i = 0; i < l.times.size(); ++i) {
      rows.push_back({l.times[i], r.trajectory.trace_deviation[i], l.U[i], l.I[0][i], l.Q[0][i], l.W_S[i],
                      l.W_I[0][i], r.entropy.S_S[i], r.entropy.sigma_elb[i], r.entropy.sigma_spohn[i],
                      r.entropy.sigma_dl[i], l.R[i], r.trajectory.hermiticity_deviation[i]});
    }
    paths.push_back(join(dir, name));
    write_csv(paths.back(),
              {"t", "trace_dev", "U", "I", "Q", "W_S", "W_I", "S_S", "sigma_elb", "sigma_spohn", "sigma_dl", "R",
               "herm_dev"},
              rows);
  }
  return paths;
}

std::vector<std::string> write_machine_outputs(const MachineRun& run, const std::string& dir) {
  const CycleLedger& c = run.cycles;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < c.ell.size(); ++i) {
    rows.push_back({static_cast<double>(c.ell[i]), c.W_tot[i], c.Q_hot[i], c.Q_cold[i], c.P[i], c.eta[i], c.A[i]});
  }
  const std::string cycles = join(dir, "cycles.csv");
  write_csv(cycles, {"ell", "W_tot", "Q_hot", "Q_cold", "P", "eta", "A"}, rows);

  rows.clear();
  const EnergyLedger& l = run.ledger;
  for (std::size_t i = 0; i < l.times.size(); ++i) {
    rows.push_back({l.times[i], run.trajectory.trace_deviation[i], run.trajectory.hermiticity_deviation[i], l.U[i],
                    l.I[0][i], l.I[1][i], l.Q[0][i], l.Q[1][i], l.W_S[i], l.W_I[0][i], l.W_I[1][i],
                    run.entropy.S_S[i], run.entropy.sigma_elb[i], l.R[i]});
  }
  const std::string series = join(dir, "timeseries.csv");
  write_csv(series,
            {"t", "trace_dev", "herm_dev", "U", "I_cold", "I_hot", "Q_cold", "Q_hot", "W_S", "W_I_cold", "W_I_hot",
             "S_S", "sigma_elb", "R"},
            rows);
  return {cycles, series};
}

std::string write_sweep_output(const std::vector<SweepRow>& rows, const std::string& dir) {
  const std::string path = join(dir, "sweep.csv");
  std::ofstream out = open_output(path);
  write_header(out, {"Omega_d", "omega0", "P_inf", "eta_inf", "status"});
  for (const SweepRow& r : rows) {
    out << format_double(r.drive_frequency) << ',' << format_double(r.omega0) << ',' << format_double(r.P_inf) << ','
        << format_double(r.eta_inf) << ',' << r.status << '\n';
  }
  return path;
}

std::vector<std::string> write_correlation_outputs(const CorrelationReportResult& res, const std::string& dir) {
  std::vector<std::vector<double>> rows;
  for (const CorrelationRow& r : res.rows) {
    rows.push_back({r.t, r.target.real(), r.target.imag(), r.closed_form.real(), r.closed_form.imag(),
                    r.lindblad.real(), r.lindblad.imag(), r.fit.real(), r.fit.imag()});
  }
  const std::string corr = join(dir, "correlation.csv");
  write_csv(corr,
            {"t", "target_re", "target_im", "pseudomode_re", "pseudomode_im", "lindblad_re", "lindblad_im", "fit_re",
             "fit_im"},
            rows);
  rows.clear();
  for (std::size_t k = 0; k < res.fit.sum.terms.size(); ++k) {
    const auto& term = res.fit.sum.terms[k];
    rows.push_back({static_cast<double>(k), term.weight.real(), term.weight.imag(), term.rate.real(), term.rate.imag(),
                    res.fit.max_residual, res.fit.rms_residual});
  }
  const std::string fit = join(dir, "fit.csv");
  write_csv(fit, {"term", "weight_re", "weight_im", "rate_re", "rate_im", "max_residual", "rms_residual"}, rows);
  return {corr, fit};
}

}  // namespace pmthermo
