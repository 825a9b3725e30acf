#include "pmthermo/hilbert.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pmthermo/error.hpp"

namespace pmthermo {

SpaceLayout::SpaceLayout(std::vector<int> dims, std::vector<Site> sites)
    : dims_(std::move(dims)), sites_(std::move(sites)) {
  if (dims_.empty()) throw std::invalid_argument("SpaceLayout: no sites");
  if (sites_.size() != dims_.size()) throw std::invalid_argument("SpaceLayout: dims/sites size mismatch");
  long total = 1;
  for (int d : dims_) {
    if (d < 2) throw std::invalid_argument("SpaceLayout: every site dimension must be >= 2");
    total *= d;
    if (total > std::numeric_limits<int>::max()) throw std::invalid_argument("SpaceLayout: dimension overflow");
  }
  total_ = static_cast<int>(total);
  strides_.assign(dims_.size(), 1);
  for (int s = num_sites() - 2; s >= 0; --s) strides_[s] = strides_[s + 1] * dims_[s + 1];
}

SpaceLayout SpaceLayout::with_modes(int system_dim, const std::vector<std::vector<int>>& fock) {
  std::vector<int> dims{system_dim};
  std::vector<Site> sites{Site{}};
  for (std::size_t j = 0; j < fock.size(); ++j) {
    for (std::size_t k = 0; k < fock[j].size(); ++k) {
      dims.push_back(fock[j][k]);
      sites.push_back(Site{static_cast<int>(j), static_cast<int>(k)});
    }
  }
  return SpaceLayout(std::move(dims), std::move(sites));
}

int SpaceLayout::site_of(int bath, int mode) const {
  for (int s = 0; s < num_sites(); ++s) {
    if (sites_[s].bath == bath && sites_[s].mode == mode) return s;
  }
  return -1;
}

long SpaceLayout::stride(int site) const { return strides_.at(site); }

SpaceLayout SpaceLayout::subspace(std::span<const int> keep) const {
  std::vector<int> sorted(keep.begin(), keep.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> dims;
  std::vector<Site> sites;
  for (int s : sorted) {
    dims.push_back(dim(s));
    sites.push_back(site(s));
  }
  return SpaceLayout(std::move(dims), std::move(sites));
}

std::string SpaceLayout::describe() const {
  std::ostringstream os;
  for (int s = 0; s < num_sites(); ++s) {
    if (s) os << " x ";
    if (sites_[s].is_system()) {
      os << "S(" << dims_[s] << ")";
    } else {
      os << "M" << sites_[s].bath << "." << sites_[s].mode << "(" << dims_[s] << ")";
    }
  }
  return os.str();
}

bool operator==(const SpaceLayout::Site& a, const SpaceLayout::Site& b) {
  return a.bath == b.bath && a.mode == b.mode;
}

Matrix embed(const Matrix& local, int site, const SpaceLayout& layout) {
  if (site < 0 || site >= layout.num_sites()) throw std::invalid_argument("embed: site out of range");
  const int n = layout.dim(site);
  if (local.rows() != n || local.cols() != n) {
    throw std::invalid_argument("embed: local operator is " + std::to_string(local.rows()) + "x" +
                                std::to_string(local.cols()) + " but site " + std::to_string(site) +
                                " has dimension " + std::to_string(n));
  }
  const long right = layout.stride(site);
  const long left = layout.total_dim() / (right * n);
  Matrix out = Matrix::Zero(layout.total_dim(), layout.total_dim());
  for (long l = 0; l < left; ++l) {
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        const Complex v = local(a, b);
        if (v == Complex(0.0)) continue;
        const long row = (l * n + a) * right;
        const long col = (l * n + b) * right;
        for (long r = 0; r < right; ++r) out(row + r, col + r) = v;
      }
    }
  }
  return out;
}

Matrix annihilator(int n) {
  if (n < 2) throw std::invalid_argument("annihilator: Fock truncation must be >= 2");
  Matrix a = Matrix::Zero(n, n);
  for (int m = 1; m < n; ++m) a(m - 1, m) = std::sqrt(static_cast<double>(m));
  return a;
}

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << Complex(0.0), -kI, kI, Complex(0.0);
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

Matrix kron_all(std::span<const Matrix> factors) {
  if (factors.empty()) throw std::invalid_argument("kron_all: no factors");
  Matrix out = factors[0];
  for (std::size_t f = 1; f < factors.size(); ++f) {
    const Matrix& b = factors[f];
    Matrix next(out.rows() * b.rows(), out.cols() * b.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      for (Eigen::Index j = 0; j < out.cols(); ++j) {
        next.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = out(i, j) * b;
      }
    }
    out = std::move(next);
  }
  return out;
}

Matrix partial_trace(const Matrix& op, std::span<const int> keep, const SpaceLayout& layout) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep set");
  if (op.rows() != layout.total_dim() || op.cols() != layout.total_dim()) {
    throw std::invalid_argument("partial_trace: operator does not match layout dimension");
  }
  std::vector<bool> kept(layout.num_sites(), false);
  for (int s : keep) {
    if (s < 0 || s >= layout.num_sites()) throw std::invalid_argument("partial_trace: invalid site");
    kept[s] = true;
  }
  long kept_dim = 1;
  for (int s = 0; s < layout.num_sites(); ++s) {
    if (kept[s]) kept_dim *= layout.dim(s);
  }
  const long total = layout.total_dim();
  const long traced_dim = total / kept_dim;

  // full index for every (traced configuration, kept configuration)
  std::vector<long> full(total);
  for (long idx = 0; idx < total; ++idx) {
    long k_idx = 0;
    long t_idx = 0;
    for (int s = 0; s < layout.num_sites(); ++s) {
      const int d = layout.digit(idx, s);
      if (kept[s]) {
        k_idx = k_idx * layout.dim(s) + d;
      } else {
        t_idx = t_idx * layout.dim(s) + d;
      }
    }
    full[t_idx * kept_dim + k_idx] = idx;
  }

  Matrix out = Matrix::Zero(kept_dim, kept_dim);
  for (long t = 0; t < traced_dim; ++t) {
    const long* row = full.data() + t * kept_dim;
    for (long a = 0; a < kept_dim; ++a) {
      for (long b = 0; b < kept_dim; ++b) out(a, b) += op(row[a], row[b]);
    }
  }
  return out;
}

double hermiticity_deviation(const Matrix& op) {
  if (op.size() == 0) return 0.0;
  return (op - op.adjoint()).cwiseAbs().maxCoeff();
}

DensityMatrix::DensityMatrix(Matrix data, double tolerance) : data_(std::move(data)) {
  if (data_.rows() != data_.cols() || data_.rows() < 1) {
    throw std::invalid_argument("DensityMatrix: matrix must be square and non-empty");
  }
  trace_deviation_ = std::abs(data_.trace() - Complex(1.0));
  hermiticity_deviation_ = pmthermo::hermiticity_deviation(data_);
  if (!(trace_deviation_ <= tolerance)) {
    throw NumericError("DensityMatrix: |Tr rho - 1| = " + std::to_string(trace_deviation_) +
                       " exceeds tolerance");
  }
  if (!(hermiticity_deviation_ <= tolerance)) {
    throw NumericError("DensityMatrix: Hermiticity deviation " + std::to_string(hermiticity_deviation_) +
                       " exceeds tolerance");
  }
}

double DensityMatrix::min_eigenvalue() const {
  const Matrix herm = 0.5 * (data_ + data_.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep, const SpaceLayout& layout) {
  return DensityMatrix(partial_trace(rho.data(), keep, layout), 1e-6);
}

namespace {

bool is_diagonal(const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i != j && m(i, j) != Complex(0.0)) return false;
    }
  }
  return true;
}

Eigen::VectorXd gibbs_weights(const Eigen::VectorXd& energies, double temperature) {
  const double e_min = energies.minCoeff();
  Eigen::VectorXd w(energies.size());
  if (temperature == 0.0) {
    const double scale = std::max(1.0, std::abs(e_min));
    for (Eigen::Index i = 0; i < energies.size(); ++i) {
      w(i) = (energies(i) - e_min) <= 1e-12 * scale ? 1.0 : 0.0;
    }
  } else {
    for (Eigen::Index i = 0; i < energies.size(); ++i) w(i) = std::exp(-(energies(i) - e_min) / temperature);
  }
  return w / w.sum();
}

}  // namespace

DensityMatrix thermal_state(const Matrix& hamiltonian, double temperature) {
  if (hamiltonian.rows() != hamiltonian.cols()) throw std::invalid_argument("thermal_state: non-square Hamiltonian");
  if (temperature < 0.0 || std::isnan(temperature)) throw std::invalid_argument("thermal_state: negative temperature");
  const double scale = std::max(1.0, hamiltonian.cwiseAbs().maxCoeff());
  if (hermiticity_deviation(hamiltonian) > 1e-12 * scale) {
    throw std::invalid_argument("thermal_state: Hamiltonian is not Hermitian");
  }
  if (is_diagonal(hamiltonian)) {
    const Eigen::VectorXd energies = hamiltonian.diagonal().real();
    const Eigen::VectorXd p = gibbs_weights(energies, temperature);
    return DensityMatrix(p.cast<Complex>().asDiagonal().toDenseMatrix());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(hamiltonian);
  const Eigen::VectorXd p = gibbs_weights(es.eigenvalues(), temperature);
  const Matrix& v = es.eigenvectors();
  Matrix rho = v * p.cast<Complex>().asDiagonal() * v.adjoint();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(std::move(rho));
}

namespace {

// Hermitian-part eigenvalues, clamped at the floor and renormalized.
Eigen::VectorXd clamped_spectrum(const Matrix& rho, double& clamped) {
  const Matrix herm = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  Eigen::VectorXd p = es.eigenvalues();
  clamped = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) < kEigenvalueFloor) {
      clamped += std::abs(p(i));
      p(i) = 0.0;
    }
  }
  const double sum = p.sum();
  if (sum > 0.0) p /= sum;
  return p;
}

}  // namespace

EntropyValue von_neumann_entropy_detailed(const DensityMatrix& rho) {
  EntropyValue out;
  const Eigen::VectorXd p = clamped_spectrum(rho.data(), out.clamped);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > 0.0) out.nats -= p(i) * std::log(p(i));
  }
  return out;
}

double von_neumann_entropy(const DensityMatrix& rho) { return von_neumann_entropy_detailed(rho).nats; }

double relative_entropy(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw std::invalid_argument("relative_entropy: dimension mismatch");
  const Matrix sigma_h = 0.5 * (sigma.data() + sigma.data().adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma_h);
  const Eigen::VectorXd s = es.eigenvalues();
  if (s.minCoeff() < 1e-14) {
    throw NumericError("relative_entropy: reference state is rank deficient (eigenvalue " +
                       std::to_string(s.minCoeff()) + ")");
  }
  Eigen::VectorXd log_s = s.array().log();
  const Matrix& v = es.eigenvectors();
  const Matrix log_sigma = v * log_s.cast<Complex>().asDiagonal() * v.adjoint();
  const double cross = (rho.data() * log_sigma).trace().real();
  return -von_neumann_entropy(rho) - cross;
}

double top_level_population(const Matrix& rho, int site, const SpaceLayout& layout) {
  const int top = layout.dim(site) - 1;
  double pop = 0.0;
  for (long i = 0; i < layout.total_dim(); ++i) {
    if (layout.digit(i, site) == top) pop += rho(i, i).real();
  }
  return pop;
}

double mode_occupation(const Matrix& rho, int site, const SpaceLayout& layout) {
  double n = 0.0;
  for (long i = 0; i < layout.total_dim(); ++i) n += layout.digit(i, site) * rho(i, i).real();
  return n;
}

}  // namespace pmthermo
