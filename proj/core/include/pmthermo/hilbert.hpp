#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <string>
#include <vector>

namespace pmthermo {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

/// Composite Hilbert space: system at site 0, then every pseudomode in
/// bath-major, chain order. Kronecker products follow this order with the
/// system as the slowest-varying index.
class SpaceLayout {
 public:
  struct Site {
    int bath = -1;  // -1 marks the open system
    int mode = -1;
    bool is_system() const { return bath < 0; }
  };

  SpaceLayout(std::vector<int> dims, std::vector<Site> sites);

  /// System followed by pseudomodes; `fock[j][k]` is the truncation of mode
  /// k of bath j.
  static SpaceLayout with_modes(int system_dim, const std::vector<std::vector<int>>& fock);

  int num_sites() const { return static_cast<int>(dims_.size()); }
  int dim(int site) const { return dims_.at(site); }
  int total_dim() const { return total_; }
  const std::vector<int>& dims() const { return dims_; }
  const Site& site(int index) const { return sites_.at(index); }

  /// Index of mode k of bath j, or -1 if absent.
  int site_of(int bath, int mode) const;

  /// Product of the dimensions of all sites after `site`.
  long stride(int site) const;

  /// Digit of a composite basis index at `site`.
  int digit(long index, int site) const {
    return static_cast<int>((index / stride(site)) % dims_[site]);
  }

  /// Layout restricted to the given sites (kept in layout order).
  SpaceLayout subspace(std::span<const int> keep) const;

  std::string describe() const;

 private:
  std::vector<int> dims_;
  std::vector<Site> sites_;
  std::vector<long> strides_;
  int total_ = 1;
};

bool operator==(const SpaceLayout::Site& a, const SpaceLayout::Site& b);

/// Identity on every site but `site`, where `local` acts.
Matrix embed(const Matrix& local, int site, const SpaceLayout& layout);

/// Truncated bosonic lowering operator on n Fock levels.
Matrix annihilator(int n);

Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

/// Reduced operator on the `keep` sites. Works for non-Hermitian arguments.
Matrix partial_trace(const Matrix& op, std::span<const int> keep, const SpaceLayout& layout);

/// Kronecker product of per-site operators, in site order.
Matrix kron_all(std::span<const Matrix> factors);

double hermiticity_deviation(const Matrix& op);

/// Validated density matrix. Construction checks trace and Hermiticity
/// against `tolerance`; the smallest eigenvalue is computed on request.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix data, double tolerance = 1e-8);

  const Matrix& data() const { return data_; }
  int dim() const { return static_cast<int>(data_.rows()); }
  double trace_deviation() const { return trace_deviation_; }
  double hermiticity_deviation() const { return hermiticity_deviation_; }
  double min_eigenvalue() const;

 private:
  Matrix data_;
  double trace_deviation_ = 0.0;
  double hermiticity_deviation_ = 0.0;
};

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep,
                            const SpaceLayout& layout);

/// Gibbs state exp(-H/T)/Z. T == 0 gives the (uniform mixture over the)
/// ground space.
DensityMatrix thermal_state(const Matrix& hamiltonian, double temperature);

inline constexpr double kEigenvalueFloor = 1e-12;

struct EntropyValue {
  double nats = 0.0;
  double clamped = 0.0;  // probability mass removed by the eigenvalue floor
};

EntropyValue von_neumann_entropy_detailed(const DensityMatrix& rho);
double von_neumann_entropy(const DensityMatrix& rho);

/// S(rho || sigma) = Tr rho (ln rho - ln sigma). sigma must be full rank.
double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Population of the highest Fock level of `site`.
double top_level_population(const Matrix& rho, int site, const SpaceLayout& layout);

/// Mean occupation <a^dag a> of a mode site.
double mode_occupation(const Matrix& rho, int site, const SpaceLayout& layout);

struct LeakageThresholds {
  double warn = 1e-4;
  double fail = 1e-2;
};

}  // namespace pmthermo
