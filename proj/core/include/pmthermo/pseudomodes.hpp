#pragma once

#include <Eigen/Sparse>
#include <string>
#include <vector>

#include "pmthermo/baths.hpp"
#include "pmthermo/hilbert.hpp"
#include "pmthermo/ode.hpp"

namespace pmthermo {

using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

struct Pseudomode {
  double frequency = 0.0;
  double damping = 0.0;
  double coupling = 0.0;  // c, entering the interaction as sqrt(c)
  double temperature = 0.0;

  /// Bose occupation 1/(e^{frequency/temperature} - 1); 0 at zero temperature.
  double occupation() const;
};

/// Pseudomodes standing in for one bath.
class BathNetwork {
 public:
  enum class Topology { ZeroTChain, ThermalStar };

  /// Empty placeholder; fails validate() until replaced.
  BathNetwork() = default;

  /// Nearest-neighbour chain in the vacuum; only the first mode touches the
  /// system. `links[k]` couples modes k and k+1.
  static BathNetwork zero_t_chain(std::vector<Pseudomode> modes, std::vector<Complex> links);
  /// Independent modes, each in its own Gibbs state, all coupled to the system.
  static BathNetwork thermal_star(std::vector<Pseudomode> modes);

  Topology topology() const { return topology_; }
  const std::vector<Pseudomode>& modes() const { return modes_; }
  const std::vector<Complex>& links() const { return links_; }
  int size() const { return static_cast<int>(modes_.size()); }
  std::string describe() const;

  /// Throws ConfigError on a violated network invariant.
  void validate() const;

 private:
  BathNetwork(Topology t, std::vector<Pseudomode> modes, std::vector<Complex> links);

  Topology topology_ = Topology::ThermalStar;
  std::vector<Pseudomode> modes_;
  std::vector<Complex> links_;
};

struct PseudomodeNetwork {
  std::vector<BathNetwork> baths;
};

/// C(t) = sum_k w_k exp(chi_k t)
struct ExponentialSum {
  struct Term {
    Complex weight;
    Complex rate;
  };
  std::vector<Term> terms;

  Complex operator()(double t) const;
  Complex derivative(double t) const;
};

/// Exact free correlation of a network.
Complex closed_form_correlation(const BathNetwork& net, double t);
Complex closed_form_correlation_derivative(const BathNetwork& net, double t);
Complex closed_form_correlation(const PseudomodeNetwork& net, int bath, double t);

/// The same correlation as an explicit exponential sum (thermal modes give
/// one or two terms each, chains one term per eigenvalue of H_eff).
ExponentialSum exponential_form(const BathNetwork& net);

/// Single-excitation effective Hamiltonian of a chain.
Matrix chain_effective_hamiltonian(const BathNetwork& net);

/// Operators of one bath network on a layout that contains its sites.
struct ModeOperators {
  SparseMatrix hamiltonian;          // H_M
  SparseMatrix coupling;             // X = sum_k sqrt(c_k)(a_k + a_k^dag)
  std::vector<SparseMatrix> jumps;   // rates folded in as sqrt(rate)
};

ModeOperators mode_operators(const BathNetwork& net, int bath, const SpaceLayout& layout);

/// Initial pseudomode state of one network (vacuum or product of Gibbs
/// states), in the layout order of its own sites.
Matrix initial_mode_state(const BathNetwork& net, const std::vector<int>& fock);

/// Matrix-form Lindblad generator -i(H_eff rho - rho H_eff^dag) + sum L rho L^dag
/// with H_eff = H - (i/2) sum L^dag L.
class LindbladForm {
 public:
  LindbladForm() = default;
  LindbladForm(const SparseMatrix& hamiltonian, std::vector<SparseMatrix> jumps);

  void apply(const Matrix& rho, Matrix& out) const;
  void apply_adjoint(const Matrix& op, Matrix& out) const;
  int dim() const { return static_cast<int>(heff_.rows()); }

 private:
  SparseMatrix heff_;
  SparseMatrix heff_adj_;
  std::vector<SparseMatrix> jumps_;
  std::vector<SparseMatrix> jumps_adj_;
};

struct LindbladCorrelation {
  std::vector<Complex> values;
  double max_top_population = 0.0;  // largest highest-Fock-level weight of rho_M(0)
};

/// Tr{X exp(L_M t)[X rho_M(0)]} by propagating the non-Hermitian argument.
/// Throws ConvergenceError when the truncation leaks more than `leak.fail`.
LindbladCorrelation lindblad_correlation(const BathNetwork& net, const std::vector<int>& fock,
                                         const std::vector<double>& times, const OdeOptions& ode = {1e-11, 1e-13},
                                         const LeakageThresholds& leak = {});

struct FitResult {
  ExponentialSum sum;
  double max_residual = 0.0;
  double rms_residual = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string message;
};

/// Fits n damped exponentials to uniformly sampled data: matrix-pencil start,
/// Levenberg-Marquardt refinement of the squared residual. Re(rate) < 0 is
/// built into the parametrization.
FitResult fit_exponentials(const std::vector<double>& times, const std::vector<Complex>& samples, int n);

struct ThermalMatch {
  BathNetwork network;
  double max_residual = 0.0;
  double rms_residual = 0.0;
  double relative_max_residual = 0.0;  // max_residual / |C(0)|
};

/// One thermal pseudomode at the Lorentzian center and width, bath
/// temperature, and the coupling c that best matches the target correlation
/// on `samples` points spread over [0, window].
ThermalMatch match_thermal_mode(const BathSpec& target, double window, int samples);

}  // namespace pmthermo
