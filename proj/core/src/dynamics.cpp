#include "pmthermo/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <span>
#include <sstream>
#include <thread>

#include "pmthermo/error.hpp"

namespace pmthermo {

SystemSpec SystemSpec::two_level(double omega0, ModulationFn drive, Matrix initial_state) {
  SystemSpec s;
  s.h0 = 0.5 * omega0 * pauli_z();
  s.drive_operator = pauli_x();
  s.drive = drive;
  s.initial_state = std::move(initial_state);
  return s;
}

Matrix excited_state() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  return m;
}

Matrix ground_state() {
  Matrix m = Matrix::Zero(2, 2);
  m(1, 1) = 1.0;
  return m;
}

Matrix plus_state() { return Matrix::Constant(2, 2, 0.5); }

void ModelConfig::validate() const {
  const int d = system.dim();
  if (d < 2) throw ConfigError("system dimension must be >= 2");
  if (system.drive_operator.rows() != d || system.initial_state.rows() != d || system.initial_state.cols() != d) {
    throw ConfigError("system operators have inconsistent dimensions");
  }
  if (baths.empty()) throw ConfigError("at least one bath is required");
  for (const BathCoupling& b : baths) {
    b.network.validate();
    if (b.coupling_operator.rows() != d) throw ConfigError("bath '" + b.name + "': coupling operator dimension");
    if (static_cast<int>(b.fock.size()) != b.network.size()) {
      throw ConfigError("bath '" + b.name + "': one Fock truncation per mode required");
    }
    for (int n : b.fock) {
      if (n < 2) throw ConfigError("bath '" + b.name + "': Fock truncations must be >= 2");
    }
    if (!(b.beta > 0.0)) throw ConfigError("bath '" + b.name + "': beta must be positive");
  }
  if (output_times.empty()) throw ConfigError("empty output grid");
  if (output_times.front() != 0.0) throw ConfigError("output grid must start at t = 0");
  for (std::size_t i = 1; i < output_times.size(); ++i) {
    if (!(output_times[i] > output_times[i - 1])) throw ConfigError("output grid must be strictly increasing");
  }
  if (!(integrator.rtol > 0.0) || !(integrator.atol > 0.0)) throw ConfigError("tolerances must be positive");
}

namespace {

SparseMatrix sparse(const Matrix& m) {
  SparseMatrix s = m.sparseView();
  s.makeCompressed();
  return s;
}

SparseMatrix pattern_of(const SparseMatrix& m) {
  SparseMatrix p = m;
  for (Complex& v : std::span(p.valuePtr(), p.nonZeros())) v = Complex(1.0);
  return p;
}

// Values of `m` scattered onto the (superset) pattern `p`.
std::vector<Complex> aligned_values(const SparseMatrix& p, const SparseMatrix& m) {
  std::vector<Complex> out(p.nonZeros(), Complex(0.0));
  for (int r = 0; r < m.outerSize(); ++r) {
    const int* begin = p.innerIndexPtr() + p.outerIndexPtr()[r];
    const int* end = p.innerIndexPtr() + p.outerIndexPtr()[r + 1];
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      const int* pos = std::lower_bound(begin, end, static_cast<int>(it.col()));
      out[pos - p.innerIndexPtr()] += it.value();
    }
  }
  return out;
}

// out (+)= alpha * S * rho, with S given by the pattern of `p` and `values`.
void sparse_dense(const SparseMatrix& p, const Complex* values, const Matrix& rho, Matrix& out, Complex alpha,
                  bool accumulate) {
  const int n = static_cast<int>(p.rows());
  const int* outer = p.outerIndexPtr();
  const int* inner = p.innerIndexPtr();
  for (int c = 0; c < rho.cols(); ++c) {
    const Complex* col = rho.data() + static_cast<long>(c) * n;
    Complex* dst = out.data() + static_cast<long>(c) * n;
    for (int r = 0; r < n; ++r) {
      Complex acc(0.0);
      for (int q = outer[r]; q < outer[r + 1]; ++q) acc += values[q] * col[inner[q]];
      dst[r] = accumulate ? dst[r] + alpha * acc : alpha * acc;
    }
  }
}

// out += m * L^dag for row-major sparse L.
void dense_times_adjoint(const Matrix& m, const SparseMatrix& l, Matrix& out) {
  const long n = m.rows();
  for (int c = 0; c < l.outerSize(); ++c) {
    Complex* dst = out.data() + c * n;
    for (SparseMatrix::InnerIterator it(l, c); it; ++it) {
      const Complex w = std::conj(it.value());
      const Complex* src = m.data() + it.col() * n;
      for (long i = 0; i < n; ++i) dst[i] += w * src[i];
    }
  }
}

}  // namespace

GeneratorParts::GeneratorParts(const ModelConfig& config)
    : layout_([&] {
        config.validate();
        std::vector<std::vector<int>> fock;
        for (const BathCoupling& b : config.baths) fock.push_back(b.fock);
        return SpaceLayout::with_modes(config.system.dim(), fock);
      }()),
      drive_fn_(config.system.drive) {
  h0_ = sparse(embed(config.system.h0, 0, layout_));
  drive_ = sparse(embed(config.system.drive_operator, 0, layout_));
  SparseMatrix hm_total = h0_;

  for (int j = 0; j < static_cast<int>(config.baths.size()); ++j) {
    const BathCoupling& bc = config.baths[j];
    const ModeOperators ops = mode_operators(bc.network, j, layout_);
    Bath bath;
    bath.hm = ops.hamiltonian;
    bath.b = sparse(Matrix(embed(bc.coupling_operator, 0, layout_) * Matrix(ops.coupling)));
    bath.lambda = bc.modulation;
    bath.free = LindbladForm(ops.hamiltonian, ops.jumps);
    Matrix k;
    bath.free.apply_adjoint(Matrix(bath.b), k);
    bath.k = sparse(k);
    hm_total += ops.hamiltonian;
    for (const SparseMatrix& l : ops.jumps) {
      jumps_.push_back(l);
      jumps_.back().makeCompressed();  // the kernels walk the raw CSR arrays
    }
    baths_.push_back(std::move(bath));
  }

  heff_static_ = hm_total;
  for (const SparseMatrix& l : jumps_) {
    const SparseMatrix ll = SparseMatrix(l.adjoint()) * l;
    heff_static_ -= Complex(0.0, 0.5) * ll;
  }
  heff_static_.prune(Complex(0.0));
  heff_static_.makeCompressed();

  heff_pattern_ = pattern_of(heff_static_) + pattern_of(drive_);
  for (const Bath& b : baths_) heff_pattern_ += pattern_of(b.b);
  heff_pattern_.makeCompressed();
  static_values_ = aligned_values(heff_pattern_, heff_static_);
  drive_values_ = aligned_values(heff_pattern_, drive_);
  for (Bath& b : baths_) b.b_values = aligned_values(heff_pattern_, b.b);

  std::vector<Matrix> factors{config.system.initial_state};
  for (const BathCoupling& b : config.baths) factors.push_back(initial_mode_state(b.network, b.fock));
  rho0_ = kron_all(factors);
}

void GeneratorParts::apply(double t, const Matrix& rho, Matrix& out, bool hermitian) const {
  thread_local std::vector<Complex> values;
  values = static_values_;
  const double f = drive_fn_.value(t);
  if (f != 0.0) {
    for (std::size_t q = 0; q < values.size(); ++q) values[q] += f * drive_values_[q];
  }
  for (const Bath& b : baths_) {
    const double lam = b.lambda.value(t);
    if (lam == 0.0) continue;
    for (std::size_t q = 0; q < values.size(); ++q) values[q] += lam * b.b_values[q];
  }
  const int n = static_cast<int>(rho.rows());
  out.resize(n, n);
  thread_local Matrix lr;
  lr.resize(n, n);
  sparse_dense(heff_pattern_, values.data(), rho, out, Complex(0.0, -1.0), false);
  if (hermitian) {
    // Half of every term, then out + out^dag. Applying the symmetrization to
    // the jump terms as well keeps anti-Hermitian rounding noise from being
    // amplified by L rho L^dag without its compensating decay.
    for (const SparseMatrix& l : jumps_) {
      sparse_dense(l, l.valuePtr(), rho, lr, Complex(0.5), false);
      dense_times_adjoint(lr, l, out);
    }
    for (int c = 0; c < n; ++c) {
      out(c, c) = 2.0 * out(c, c).real();
      for (int r = c + 1; r < n; ++r) {
        const Complex a = out(r, c);
        const Complex b = out(c, r);
        out(r, c) = a + std::conj(b);
        out(c, r) = b + std::conj(a);
      }
    }
    return;
  }
  // rho H^dag = (H rho^dag)^dag
  thread_local Matrix tmp;
  tmp.resize(n, n);
  sparse_dense(heff_pattern_, values.data(), rho.adjoint().eval(), tmp, Complex(1.0), false);
  out += Complex(0.0, 1.0) * tmp.adjoint();
  for (const SparseMatrix& l : jumps_) {
    sparse_dense(l, l.valuePtr(), rho, lr, Complex(1.0), false);
    dense_times_adjoint(lr, l, out);
  }
}

Matrix GeneratorParts::apply(double t, const Matrix& rho) const {
  Matrix out(rho.rows(), rho.cols());
  apply(t, rho, out);
  return out;
}

Matrix GeneratorParts::apply_bath_free(int j, const Matrix& rho) const {
  Matrix out;
  baths_.at(j).free.apply(rho, out);
  return out;
}

Matrix GeneratorParts::hamiltonian(double t) const {
  Matrix h = Matrix(h0_) + drive_fn_.value(t) * Matrix(drive_);
  for (const Bath& b : baths_) h += Matrix(b.hm) + b.lambda.value(t) * Matrix(b.b);
  return h;
}

SparseMatrix GeneratorParts::embed_system(const Matrix& op) const { return sparse(embed(op, 0, layout_)); }

Complex trace_product(const SparseMatrix& op, const Matrix& rho) {
  Complex sum = 0.0;
  for (int r = 0; r < op.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(op, r); it; ++it) sum += it.value() * rho(it.col(), it.row());
  }
  return sum;
}

const std::vector<double>& Trajectory::channel(const std::string& name) const {
  for (std::size_t i = 0; i < channel_names.size(); ++i) {
    if (channel_names[i] == name) return channels[i];
  }
  throw std::out_of_range("trajectory has no channel '" + name + "'");
}

namespace {

using State = DormandPrince::State;

State pack(const Matrix& rho, int extra) {
  State y = State::Zero(rho.size() + extra);
  y.head(rho.size()) = Eigen::Map<const State>(rho.data(), rho.size());
  return y;
}

}  // namespace

Trajectory propagate(const ModelConfig& config, const GeneratorParts& parts,
                     const std::vector<RateChannel>& channels) {
  const int d = parts.dim();
  const long n2 = static_cast<long>(d) * d;
  const int nc = static_cast<int>(channels.size());
  const SpaceLayout& layout = parts.layout();
  const int num_modes = layout.num_sites() - 1;
  const bool two_level = config.system.dim() == 2;
  const SparseMatrix sx = parts.embed_system(pauli_x());
  const SparseMatrix sz = parts.embed_system(pauli_z());
  const std::vector<int> keep_system{0};

  Trajectory tr;
  for (const RateChannel& c : channels) tr.channel_names.push_back(c.name);
  tr.channels.assign(nc, {});
  tr.interaction_energy.assign(parts.num_baths(), {});
  tr.occupations.assign(num_modes, {});
  tr.top_populations.assign(num_modes, {});

  std::vector<double> warn_time(num_modes, -1.0), peak_top(num_modes, 0.0);
  Matrix rho(d, d), drho(d, d);
  auto rhs = [&](double t, const State& y, State& dy) {
    rho = Eigen::Map<const Matrix>(y.data(), d, d);
    parts.apply(t, rho, drho, true);
    dy.resize(y.size());
    dy.head(n2) = Eigen::Map<const State>(drho.data(), n2);
    for (int c = 0; c < nc; ++c) dy[n2 + c] = channels[c].rate(t, rho);
  };

  auto observe = [&](double t, const State& y) {
    const Eigen::Map<const Matrix> r(y.data(), d, d);
    const Matrix joint = r;
    const double tr_dev = std::abs(joint.trace() - 1.0);
    if (tr_dev > config.trace_tolerance) {
      std::ostringstream os;
      os << "trace drift " << tr_dev << " at t=" << t;
      throw NumericError(os.str());
    }
    tr.times.push_back(t);
    tr.trace_deviation.push_back(tr_dev);
    tr.hermiticity_deviation.push_back(hermiticity_deviation(joint));
    for (int c = 0; c < nc; ++c) tr.channels[c].push_back(y[n2 + c].real());
    const Matrix reduced = partial_trace(joint, keep_system, layout);
    tr.system_energy.push_back(std::real((config.system.hamiltonian(t) * reduced).trace()));
    if (two_level) {
      tr.sigma_x.push_back(trace_product(sx, joint).real());
      tr.sigma_z.push_back(trace_product(sz, joint).real());
    }
    for (int j = 0; j < parts.num_baths(); ++j) {
      tr.interaction_energy[j].push_back(parts.modulation(j).value(t) * trace_product(parts.interaction(j), joint).real());
    }
    for (int m = 0; m < num_modes; ++m) {
      const int site = m + 1;
      const double top = top_level_population(joint, site, layout);
      tr.occupations[m].push_back(mode_occupation(joint, site, layout));
      tr.top_populations[m].push_back(top);
      if (top > config.leakage.fail) {
        std::ostringstream os;
        os << "truncation leakage on " << layout.describe() << " site " << site << ": top Fock population " << top
           << " at t=" << t;
        throw ConvergenceError(os.str());
      }
      if (top > config.leakage.warn && warn_time[m] < 0.0) warn_time[m] = t;
      peak_top[m] = std::max(peak_top[m], top);
    }
    tr.system_states.push_back(reduced);
    if (config.store_states) tr.joint_states.push_back(joint);
  };

  DormandPrince solver(config.integrator);
  const State y0 = pack(parts.initial_state(), nc);
  solver.integrate(rhs, 0.0, y0, config.output_times, observe);
  tr.stats = solver.stats();
  for (int m = 0; m < num_modes; ++m) {
    if (warn_time[m] < 0.0) continue;
    std::ostringstream os;
    os << "mode site " << m + 1 << ": top Fock population above " << config.leakage.warn << " from t=" << warn_time[m]
       << " (peak " << peak_top[m] << ")";
    tr.warnings.push_back(os.str());
  }
  return tr;
}

Matrix two_time_correlation(const ModelConfig& config, const GeneratorParts& parts, const Matrix& system_op,
                            const std::vector<double>& grid, int threads) {
  if (grid.empty() || grid.front() != 0.0) throw std::invalid_argument("two_time_correlation: grid must start at 0");
  const int n = static_cast<int>(grid.size());
  const int d = parts.dim();
  const long n2 = static_cast<long>(d) * d;
  const SparseMatrix a = parts.embed_system(system_op);

  ModelConfig forward = config;
  forward.output_times = grid;
  forward.store_states = true;
  const Trajectory base = propagate(forward, parts);

  Matrix g = Matrix::Zero(n, n);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    Matrix rho(d, d), drho(d, d);
    while (true) {
      const int k = next.fetch_add(1);
      if (k >= n) return;
      try {
        const Matrix start = a * base.joint_states[k];
        g(k, k) = trace_product(a, start);
        if (k + 1 == n) continue;
        const std::vector<double> outs(grid.begin() + k + 1, grid.end());
        auto rhs = [&](double t, const State& y, State& dy) {
          rho = Eigen::Map<const Matrix>(y.data(), d, d);
          parts.apply(t, rho, drho);
          dy = Eigen::Map<const State>(drho.data(), n2);
        };
        int i = k + 1;
        auto observe = [&](double, const State& y) {
          const Eigen::Map<const Matrix> r(y.data(), d, d);
          g(i, k) = trace_product(a, r);
          ++i;
        };
        DormandPrince solver(config.integrator);
        solver.integrate(rhs, grid[k], pack(start, 0), outs, observe);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
      }
    }
  };

  const int workers = std::max(1, std::min(threads, n));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return g;
}

}  // namespace pmthermo
