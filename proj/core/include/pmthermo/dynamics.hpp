#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pmthermo/baths.hpp"
#include "pmthermo/hilbert.hpp"
#include "pmthermo/ode.hpp"
#include "pmthermo/pseudomodes.hpp"

namespace pmthermo {

struct SystemSpec {
  Matrix h0;
  Matrix drive_operator;
  ModulationFn drive = ModulationFn::zero();
  Matrix initial_state;

  /// H_S(t) = omega0 sigma_z / 2 + f(t) sigma_x with index 0 the excited state.
  static SystemSpec two_level(double omega0, ModulationFn drive, Matrix initial_state);

  int dim() const { return static_cast<int>(h0.rows()); }
  Matrix hamiltonian(double t) const { return h0 + drive.value(t) * drive_operator; }
};

/// Two-level states in the sigma_z basis.
Matrix excited_state();
Matrix ground_state();
Matrix plus_state();

struct BathCoupling {
  std::string name;
  BathNetwork network;
  Matrix coupling_operator;  // A_S on the system
  ModulationFn modulation = ModulationFn::constant(1.0);  // lambda_j(t)
  double beta = kInfiniteBeta;  // physical inverse temperature, used by the ledger
  std::vector<int> fock;        // one truncation per mode
};

struct ModelConfig {
  SystemSpec system;
  std::vector<BathCoupling> baths;
  OdeOptions integrator{1e-8, 1e-10};
  std::vector<double> output_times;
  bool store_states = false;
  LeakageThresholds leakage;
  double trace_tolerance = 1e-6;

  /// Throws ConfigError when the configuration is unusable.
  void validate() const;
};

/// Time-independent operators of the joint generator plus the scalar
/// multipliers that carry its time dependence.
class GeneratorParts {
 public:
  explicit GeneratorParts(const ModelConfig& config);

  const SpaceLayout& layout() const { return layout_; }
  int dim() const { return layout_.total_dim(); }
  int num_baths() const { return static_cast<int>(baths_.size()); }

  /// L(t)[rho], written into `out`. With `hermitian` set the argument is
  /// taken to be Hermitian and rho H_eff^dag is formed as (H_eff rho)^dag.
  void apply(double t, const Matrix& rho, Matrix& out, bool hermitian = false) const;
  Matrix apply(double t, const Matrix& rho) const;

  /// Bath j's free generator L_{M,j}[rho] (its own Hamiltonian and dissipators).
  Matrix apply_bath_free(int j, const Matrix& rho) const;

  /// Full Hamiltonian H_S(t) + sum_j (H_M,j + lambda_j(t) A_j x X_j).
  Matrix hamiltonian(double t) const;

  const SparseMatrix& system_hamiltonian() const { return h0_; }   // H_0 x 1
  const SparseMatrix& system_drive() const { return drive_; }      // V x 1
  const SparseMatrix& interaction(int j) const { return baths_.at(j).b; }  // A_j x X_j
  const SparseMatrix& mode_hamiltonian(int j) const { return baths_.at(j).hm; }
  /// L_{M,j}^dag[A_j x X_j], so that Tr{H_IM,j L_{M,j}[rho]} = lambda_j Tr{K_j rho}.
  const SparseMatrix& heat_kernel(int j) const { return baths_.at(j).k; }
  const ModulationFn& drive() const { return drive_fn_; }
  const ModulationFn& modulation(int j) const { return baths_.at(j).lambda; }

  /// Embedded system operator A_S x 1.
  SparseMatrix embed_system(const Matrix& op) const;

  Matrix initial_state() const { return rho0_; }

 private:
  struct Bath {
    SparseMatrix hm;
    SparseMatrix b;
    SparseMatrix k;
    ModulationFn lambda;
    LindbladForm free;
    std::vector<Complex> b_values;  // b on the heff_pattern_ layout
  };

  SpaceLayout layout_;
  SparseMatrix h0_;
  SparseMatrix drive_;
  ModulationFn drive_fn_;
  SparseMatrix heff_static_;  // H_0 + sum H_M - (i/2) sum L^dag L
  // Union sparsity pattern of H_eff(t); the time-dependent values are
  // assembled from these aligned arrays on every call.
  SparseMatrix heff_pattern_;
  std::vector<Complex> static_values_;
  std::vector<Complex> drive_values_;
  std::vector<SparseMatrix> jumps_;
  std::vector<Bath> baths_;
  Matrix rho0_;
};

/// Tr{op * rho} for sparse op.
Complex trace_product(const SparseMatrix& op, const Matrix& rho);

/// A real functional of (t, rho) integrated alongside the state.
struct RateChannel {
  std::string name;
  std::function<double(double, const Matrix&)> rate;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Matrix> system_states;
  std::vector<Matrix> joint_states;  // filled only when store_states is set
  std::vector<std::string> channel_names;
  std::vector<std::vector<double>> channels;  // [channel][time], accumulated integrals

  std::vector<double> system_energy;                   // <H_S(t)>
  std::vector<double> sigma_x, sigma_z;                // two-level systems only
  std::vector<std::vector<double>> interaction_energy; // [bath][time] <H_IM,j(t)>
  std::vector<std::vector<double>> occupations;        // [mode site - 1][time]
  std::vector<std::vector<double>> top_populations;    // [mode site - 1][time]
  std::vector<double> trace_deviation;
  std::vector<double> hermiticity_deviation;

  DormandPrince::Stats stats;
  std::vector<std::string> warnings;

  const std::vector<double>& channel(const std::string& name) const;
};

/// Propagates the joint state from its product initial state through every
/// output time. Throws NumericError on trace drift or integrator failure and
/// ConvergenceError on truncation leakage.
Trajectory propagate(const ModelConfig& config, const GeneratorParts& parts,
                     const std::vector<RateChannel>& channels = {});

/// <A(t_i) A(t_k)> on a uniform grid, for all k <= i, by reinserting
/// (A x 1) rho(t_k) and propagating it forward. Slices run on `threads`
/// workers. Entry (i, k) of the result; the strict upper triangle is zero.
Matrix two_time_correlation(const ModelConfig& config, const GeneratorParts& parts, const Matrix& system_op,
                            const std::vector<double>& grid, int threads = 1);

}  // namespace pmthermo
