#include <benchmark/benchmark.h>

#include <string>

#include "pmthermo/baths.hpp"
#include "pmthermo/experiments.hpp"
#include "pmthermo/pseudomodes.hpp"
#include "pmthermo/thermo.hpp"

using namespace pmthermo;

namespace {

std::string config_path(const std::string& name) { return std::string(PMTHERMO_CONFIG_DIR) + "/" + name; }

ModelConfig machine_model() {
  return std::get<MachineExperiment>(load_experiment(config_path("thermal_machine.toml")).body).model();
}

ModelConfig static_entropy_model() {
  const auto e = std::get<EntropyExperiment>(load_experiment(config_path("entropy_static.toml")).body);
  return e.model(e.lambdas.front());
}

void run_apply(benchmark::State& state, const ModelConfig& cfg, bool hermitian) {
  const GeneratorParts parts(cfg);
  const Matrix rho = parts.initial_state();
  Matrix out(rho.rows(), rho.cols());
  double t = 0.0;
  for (auto _ : state) {
    parts.apply(t, rho, out, hermitian);
    benchmark::DoNotOptimize(out.data());
    t += 1e-3;
  }
  state.counters["dim"] = parts.dim();
}

void BM_GeneratorApply_Machine(benchmark::State& state) { run_apply(state, machine_model(), state.range(0) != 0); }
BENCHMARK(BM_GeneratorApply_Machine)->Arg(0)->Arg(1);

void BM_GeneratorApply_OhmicChain(benchmark::State& state) {
  run_apply(state, static_entropy_model(), state.range(0) != 0);
}
BENCHMARK(BM_GeneratorApply_OhmicChain)->Arg(0)->Arg(1);

// One drive period of the shipped machine with the full ledger channels.
void BM_PropagateMachinePeriod(benchmark::State& state) {
  ModelConfig cfg = machine_model();
  cfg.output_times.resize(65);
  const GeneratorParts parts(cfg);
  for (auto _ : state) {
    const Trajectory tr = propagate(cfg, parts, standard_channels(parts));
    benchmark::DoNotOptimize(tr.trace_deviation.back());
  }
}
BENCHMARK(BM_PropagateMachinePeriod)->Unit(benchmark::kMillisecond);

void BM_OhmicCorrelation(benchmark::State& state) {
  const SpectralDensity j = SpectralDensity::ohmic(1.0);
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(correlation(j, 1.0, t));
    t = t > 10.0 ? 0.0 : t + 0.37;
  }
}
BENCHMARK(BM_OhmicCorrelation)->Unit(benchmark::kMicrosecond);

void BM_LindbladCorrelationChain(benchmark::State& state) {
  const auto rep = std::get<CorrelationReport>(load_experiment(config_path("correlation_report.toml")).body);
  const std::vector<double> grid = uniform_grid(10.0, 0.05);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lindblad_correlation(rep.bath.network, rep.bath.fock, grid).values.back());
  }
}
BENCHMARK(BM_LindbladCorrelationChain)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
