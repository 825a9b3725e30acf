#include "pmthermo/pseudomodes.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "pmthermo/error.hpp"

namespace pmthermo {

double Pseudomode::occupation() const {
  if (temperature <= 0.0) return 0.0;
  return 1.0 / std::expm1(frequency / temperature);
}

BathNetwork::BathNetwork(Topology t, std::vector<Pseudomode> modes, std::vector<Complex> links)
    : topology_(t), modes_(std::move(modes)), links_(std::move(links)) {
  validate();
}

BathNetwork BathNetwork::zero_t_chain(std::vector<Pseudomode> modes, std::vector<Complex> links) {
  return BathNetwork(Topology::ZeroTChain, std::move(modes), std::move(links));
}

BathNetwork BathNetwork::thermal_star(std::vector<Pseudomode> modes) {
  return BathNetwork(Topology::ThermalStar, std::move(modes), {});
}

void BathNetwork::validate() const {
  if (modes_.empty()) throw ConfigError("pseudomode network has no modes");
  for (std::size_t k = 0; k < modes_.size(); ++k) {
    const Pseudomode& m = modes_[k];
    std::ostringstream where;
    where << "pseudomode " << k << ": ";
    if (!std::isfinite(m.frequency) || !std::isfinite(m.damping) || !std::isfinite(m.coupling)) {
      throw ConfigError(where.str() + "non-finite parameter");
    }
    if (m.damping < 0.0) throw ConfigError(where.str() + "damping must be >= 0");
    if (m.coupling < 0.0) throw ConfigError(where.str() + "coupling must be >= 0");
    if (m.temperature < 0.0) throw ConfigError(where.str() + "temperature must be >= 0");
    if (m.temperature > 0.0 && !(m.frequency > 0.0)) {
      throw ConfigError(where.str() + "a thermal mode needs a positive frequency");
    }
    if (topology_ == Topology::ZeroTChain) {
      if (m.temperature != 0.0) throw ConfigError(where.str() + "zero-temperature chain modes must have T = 0");
      if (k > 0 && m.coupling != 0.0) {
        throw ConfigError(where.str() + "only the first chain mode couples to the system");
      }
    }
  }
  if (topology_ == Topology::ZeroTChain) {
    if (links_.size() + 1 != modes_.size()) {
      throw ConfigError("zero-temperature chain needs exactly (modes - 1) chain couplings");
    }
  } else if (!links_.empty()) {
    throw ConfigError("thermal star networks carry no chain couplings");
  }
}

std::string BathNetwork::describe() const {
  std::ostringstream os;
  os << (topology_ == Topology::ZeroTChain ? "zero_t_chain" : "thermal_star") << "[";
  for (std::size_t k = 0; k < modes_.size(); ++k) {
    const Pseudomode& m = modes_[k];
    if (k) os << "; ";
    os << "Omega=" << m.frequency << " Gamma=" << m.damping << " c=" << m.coupling << " T=" << m.temperature;
  }
  os << "]";
  return os.str();
}

Complex ExponentialSum::operator()(double t) const {
  Complex sum = 0.0;
  for (const Term& term : terms) sum += term.weight * std::exp(term.rate * t);
  return sum;
}

Complex ExponentialSum::derivative(double t) const {
  Complex sum = 0.0;
  for (const Term& term : terms) sum += term.weight * term.rate * std::exp(term.rate * t);
  return sum;
}

Matrix chain_effective_hamiltonian(const BathNetwork& net) {
  const int n = net.size();
  Matrix h = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const Pseudomode& m = net.modes()[k];
    h(k, k) = Complex(m.frequency, -0.5 * m.damping);
  }
  for (int k = 0; k + 1 < n; ++k) {
    h(k, k + 1) = net.links()[k];
    h(k + 1, k) = std::conj(net.links()[k]);
  }
  return h;
}

namespace {

Vector chain_coupling_vector(const BathNetwork& net) {
  Vector v = Vector::Zero(net.size());
  for (int k = 0; k < net.size(); ++k) v[k] = std::sqrt(net.modes()[k].coupling);
  return v;
}

}  // namespace

Complex closed_form_correlation(const BathNetwork& net, double t) {
  if (net.topology() == BathNetwork::Topology::ZeroTChain) {
    const Matrix h = chain_effective_hamiltonian(net);
    const Vector v = chain_coupling_vector(net);
    const Matrix u = (Complex(0.0, -t) * h).exp();
    return v.dot(u * v);
  }
  Complex sum = 0.0;
  for (const Pseudomode& m : net.modes()) {
    const double cth = 2.0 * m.occupation() + 1.0;  // coth(Omega / 2T)
    sum += m.coupling * std::exp(-0.5 * m.damping * t) *
           Complex(cth * std::cos(m.frequency * t), -std::sin(m.frequency * t));
  }
  return sum;
}

Complex closed_form_correlation_derivative(const BathNetwork& net, double t) {
  if (net.topology() == BathNetwork::Topology::ZeroTChain) {
    const Matrix h = chain_effective_hamiltonian(net);
    const Vector v = chain_coupling_vector(net);
    const Matrix u = (Complex(0.0, -t) * h).exp();
    return v.dot(Complex(0.0, -1.0) * (h * (u * v)));
  }
  return exponential_form(net).derivative(t);
}

Complex closed_form_correlation(const PseudomodeNetwork& net, int bath, double t) {
  return closed_form_correlation(net.baths.at(bath), t);
}

ExponentialSum exponential_form(const BathNetwork& net) {
  ExponentialSum out;
  if (net.topology() == BathNetwork::Topology::ZeroTChain) {
    const Matrix h = chain_effective_hamiltonian(net);
    const Vector v = chain_coupling_vector(net);
    Eigen::ComplexEigenSolver<Matrix> es(h);
    const Matrix& r = es.eigenvectors();
    const Matrix l = r.inverse();
    for (int k = 0; k < net.size(); ++k) {
      const Complex w = v.dot(r.col(k)) * (l.row(k) * v)(0);
      out.terms.push_back({w, Complex(0.0, -1.0) * es.eigenvalues()[k]});
    }
    return out;
  }
  for (const Pseudomode& m : net.modes()) {
    const double n = m.occupation();
    out.terms.push_back({m.coupling * (n + 1.0), Complex(-0.5 * m.damping, -m.frequency)});
    if (n > 0.0) out.terms.push_back({m.coupling * n, Complex(-0.5 * m.damping, m.frequency)});
  }
  return out;
}

ModeOperators mode_operators(const BathNetwork& net, int bath, const SpaceLayout& layout) {
  const int d = layout.total_dim();
  Matrix h = Matrix::Zero(d, d);
  Matrix x = Matrix::Zero(d, d);
  std::vector<Matrix> lowering;
  ModeOperators ops;
  for (int k = 0; k < net.size(); ++k) {
    const int site = layout.site_of(bath, k);
    if (site < 0) throw std::invalid_argument("mode_operators: layout lacks a site for this bath");
    const Matrix a_local = annihilator(layout.dim(site));
    lowering.push_back(embed(a_local, site, layout));
    const Matrix& a = lowering.back();
    const Pseudomode& m = net.modes()[k];
    h += m.frequency * (a.adjoint() * a);
    if (m.coupling > 0.0) x += std::sqrt(m.coupling) * (a + a.adjoint());
    const double n = m.occupation();
    if (m.damping > 0.0) {
      ops.jumps.push_back((std::sqrt(m.damping * (n + 1.0)) * a).sparseView());
      if (n > 0.0) ops.jumps.push_back((std::sqrt(m.damping * n) * a.adjoint()).sparseView());
    }
  }
  for (int k = 0; k < static_cast<int>(net.links().size()); ++k) {
    const Complex g = net.links()[k];
    const Matrix hop = g * (lowering[k].adjoint() * lowering[k + 1]);
    h += hop + hop.adjoint();
  }
  ops.hamiltonian = h.sparseView();
  ops.coupling = x.sparseView();
  for (SparseMatrix& j : ops.jumps) j.makeCompressed();
  ops.hamiltonian.makeCompressed();
  ops.coupling.makeCompressed();
  return ops;
}

Matrix initial_mode_state(const BathNetwork& net, const std::vector<int>& fock) {
  if (static_cast<int>(fock.size()) != net.size()) {
    throw std::invalid_argument("initial_mode_state: one Fock truncation per mode required");
  }
  std::vector<Matrix> factors;
  for (int k = 0; k < net.size(); ++k) {
    const int n = fock[k];
    const Pseudomode& m = net.modes()[k];
    if (m.temperature <= 0.0) {
      Matrix vac = Matrix::Zero(n, n);
      vac(0, 0) = 1.0;
      factors.push_back(vac);
    } else {
      Matrix num = Matrix::Zero(n, n);
      for (int q = 0; q < n; ++q) num(q, q) = m.frequency * q;
      factors.push_back(thermal_state(num, m.temperature).data());
    }
  }
  return kron_all(factors);
}

LindbladForm::LindbladForm(const SparseMatrix& hamiltonian, std::vector<SparseMatrix> jumps)
    : jumps_(std::move(jumps)) {
  SparseMatrix heff = hamiltonian;
  for (const SparseMatrix& l : jumps_) {
    SparseMatrix ll = SparseMatrix(l.adjoint()) * l;
    heff -= Complex(0.0, 0.5) * ll;
  }
  heff.prune(Complex(0.0));
  heff.makeCompressed();
  heff_ = heff;
  heff_adj_ = SparseMatrix(heff.adjoint());
  for (const SparseMatrix& l : jumps_) jumps_adj_.push_back(SparseMatrix(l.adjoint()));
}

void LindbladForm::apply(const Matrix& rho, Matrix& out) const {
  out.noalias() = Complex(0.0, -1.0) * (heff_ * rho);
  out.noalias() += Complex(0.0, 1.0) * (rho * heff_adj_);
  for (std::size_t k = 0; k < jumps_.size(); ++k) {
    const Matrix lr = jumps_[k] * rho;
    out.noalias() += lr * jumps_adj_[k];
  }
}

void LindbladForm::apply_adjoint(const Matrix& op, Matrix& out) const {
  // L^dag[O] = i(H_eff^dag O - O H_eff) + sum L^dag O L
  out.noalias() = Complex(0.0, 1.0) * (heff_adj_ * op);
  out.noalias() += Complex(0.0, -1.0) * (op * heff_);
  for (std::size_t k = 0; k < jumps_.size(); ++k) {
    const Matrix lo = jumps_adj_[k] * op;
    out.noalias() += lo * jumps_[k];
  }
}

LindbladCorrelation lindblad_correlation(const BathNetwork& net, const std::vector<int>& fock,
                                         const std::vector<double>& times, const OdeOptions& ode,
                                         const LeakageThresholds& leak) {
  if (static_cast<int>(fock.size()) != net.size()) {
    throw std::invalid_argument("lindblad_correlation: one Fock truncation per mode required");
  }
  if (times.empty() || times.front() != 0.0) {
    throw std::invalid_argument("lindblad_correlation: time grid must start at 0");
  }
  std::vector<SpaceLayout::Site> sites;
  for (int k = 0; k < net.size(); ++k) sites.push_back({0, k});
  const SpaceLayout layout(fock, sites);
  const ModeOperators ops = mode_operators(net, 0, layout);
  const LindbladForm gen(ops.hamiltonian, ops.jumps);
  const Matrix rho0 = initial_mode_state(net, fock);

  LindbladCorrelation out;
  for (int k = 0; k < net.size(); ++k) {
    out.max_top_population = std::max(out.max_top_population, top_level_population(rho0, k, layout));
  }
  if (out.max_top_population > leak.fail) {
    std::ostringstream os;
    os << "pseudomode truncation leaks: highest Fock level holds " << out.max_top_population
       << " of the initial state (limit " << leak.fail << ")";
    throw ConvergenceError(os.str());
  }

  const int d = layout.total_dim();
  const Matrix x = Matrix(ops.coupling);
  const Matrix start = x * rho0;
  DormandPrince::State y0 = Eigen::Map<const DormandPrince::State>(start.data(), start.size());
  DormandPrince solver(ode);
  Matrix rho(d, d), drho(d, d);
  auto rhs = [&](double, const DormandPrince::State& y, DormandPrince::State& dy) {
    rho = Eigen::Map<const Matrix>(y.data(), d, d);
    gen.apply(rho, drho);
    dy = Eigen::Map<const DormandPrince::State>(drho.data(), drho.size());
  };
  auto observe = [&](double, const DormandPrince::State& y) {
    const Eigen::Map<const Matrix> r(y.data(), d, d);
    out.values.push_back((x.cwiseProduct(r.transpose())).sum());
  };
  solver.integrate(rhs, 0.0, y0, times, observe);
  return out;
}

namespace {

struct FitParams {
  // per term: log(-Re chi), Im chi, Re w, Im w
  Eigen::VectorXd p;
  int n() const { return static_cast<int>(p.size() / 4); }
  Complex rate(int k) const { return {-std::exp(p[4 * k]), p[4 * k + 1]}; }
  Complex weight(int k) const { return {p[4 * k + 2], p[4 * k + 3]}; }
};

ExponentialSum to_sum(const FitParams& fp) {
  ExponentialSum s;
  for (int k = 0; k < fp.n(); ++k) s.terms.push_back({fp.weight(k), fp.rate(k)});
  return s;
}

// Stacked real and imaginary residuals; optionally the Jacobian.
void residuals(const FitParams& fp, const std::vector<double>& t, const std::vector<Complex>& y, Eigen::VectorXd& r,
               Eigen::MatrixXd* jac) {
  const int m = static_cast<int>(t.size());
  const int n = fp.n();
  r.resize(2 * m);
  if (jac) jac->resize(2 * m, 4 * n);
  for (int i = 0; i < m; ++i) {
    Complex model = 0.0;
    for (int k = 0; k < n; ++k) {
      const Complex chi = fp.rate(k);
      const Complex w = fp.weight(k);
      const Complex e = std::exp(chi * t[i]);
      model += w * e;
      if (jac) {
        const Complex d_s = w * t[i] * e * chi.real();  // d/ds of Re chi = -e^s is Re chi
        const Complex d_om = w * t[i] * e * Complex(0.0, 1.0);
        const Complex d_wr = e;
        const Complex d_wi = e * Complex(0.0, 1.0);
        const Complex cols[4] = {d_s, d_om, d_wr, d_wi};
        for (int c = 0; c < 4; ++c) {
          (*jac)(i, 4 * k + c) = cols[c].real();
          (*jac)(m + i, 4 * k + c) = cols[c].imag();
        }
      }
    }
    const Complex diff = model - y[i];
    r[i] = diff.real();
    r[m + i] = diff.imag();
  }
}

// Least-squares weights for fixed rates.
Vector vandermonde_weights(const std::vector<double>& t, const std::vector<Complex>& y, const Vector& rates) {
  const int m = static_cast<int>(t.size());
  const int n = static_cast<int>(rates.size());
  Matrix v(m, n);
  Vector b(m);
  for (int i = 0; i < m; ++i) {
    b[i] = y[i];
    for (int k = 0; k < n; ++k) v(i, k) = std::exp(rates[k] * t[i]);
  }
  return v.completeOrthogonalDecomposition().solve(b);
}

Vector pencil_rates(const std::vector<double>& t, const std::vector<Complex>& y, int n) {
  const int m = static_cast<int>(y.size());
  const double dt = t[1] - t[0];
  const int pencil = std::max(n, m / 2);
  const int rows = m - pencil;
  Matrix hankel(rows, pencil + 1);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j <= pencil; ++j) hankel(i, j) = y[i + j];
  Eigen::JacobiSVD<Matrix> svd(hankel, Eigen::ComputeThinV);
  const Matrix w = svd.matrixV().leftCols(n).conjugate();
  const Matrix w1 = w.topRows(pencil);
  const Matrix w2 = w.bottomRows(pencil);
  const Matrix shift = w1.completeOrthogonalDecomposition().solve(w2);
  Eigen::ComplexEigenSolver<Matrix> es(shift);
  Vector rates(n);
  const double span = t.back() - t.front();
  for (int k = 0; k < n; ++k) {
    Complex z = es.eigenvalues()[k];
    if (std::abs(z) < 1e-300) z = 1e-300;
    Complex chi = std::log(z) / dt;
    // keep the start strictly decaying so the log-parametrization is defined
    const double floor = -1e-3 / std::max(span, dt);
    if (!(chi.real() < floor)) chi = Complex(floor, chi.imag());
    rates[k] = chi;
  }
  return rates;
}

}  // namespace

FitResult fit_exponentials(const std::vector<double>& times, const std::vector<Complex>& samples, int n) {
  if (n < 1) throw std::invalid_argument("fit_exponentials: n must be >= 1");
  if (times.size() != samples.size()) throw std::invalid_argument("fit_exponentials: size mismatch");
  if (static_cast<int>(times.size()) < 2 * n + 1) {
    throw std::invalid_argument("fit_exponentials: need at least 2n+1 samples");
  }
  const double dt = times[1] - times[0];
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs((times[i] - times[i - 1]) - dt) > 1e-9 * std::max(1.0, std::abs(dt))) {
      throw std::invalid_argument("fit_exponentials: time grid must be uniform");
    }
  }
  // shift to t=0 so weights refer to the first sample
  std::vector<double> t(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) t[i] = times[i] - times[0];

  const Vector rates = pencil_rates(t, samples, n);
  const Vector weights = vandermonde_weights(t, samples, rates);
  FitParams fp;
  fp.p.resize(4 * n);
  for (int k = 0; k < n; ++k) {
    fp.p[4 * k] = std::log(-rates[k].real());
    fp.p[4 * k + 1] = rates[k].imag();
    fp.p[4 * k + 2] = weights[k].real();
    fp.p[4 * k + 3] = weights[k].imag();
  }

  FitResult result;
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  residuals(fp, t, samples, r, &jac);
  double cost = r.squaredNorm();
  double mu = 1e-3;
  const int max_iter = 1000;
  double scale = 0.0;
  for (const Complex& s : samples) scale = std::max(scale, std::abs(s));
  const double cost_floor = 1e-30 * std::max(1.0, scale * scale) * static_cast<double>(samples.size());
  int it = 0;
  for (; it < max_iter; ++it) {
    if (cost <= cost_floor) {
      result.converged = true;
      result.message = "residual at round-off level";
      break;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() <= 1e-14 * std::max(1.0, cost)) {
      result.converged = true;
      result.message = "gradient vanished";
      break;
    }
    bool improved = false;
    double rel_change = 0.0;
    for (int inner = 0; inner < 40; ++inner) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += mu * (jtj.diagonal().array() + 1e-12).matrix();
      const Eigen::VectorXd step = a.ldlt().solve(-grad);
      FitParams trial = fp;
      trial.p += step;
      Eigen::VectorXd r_trial;
      residuals(trial, t, samples, r_trial, nullptr);
      const double c_trial = r_trial.squaredNorm();
      if (std::isfinite(c_trial) && c_trial < cost) {
        rel_change = (cost - c_trial) / cost;
        fp = trial;
        cost = c_trial;
        mu = std::max(mu / 3.0, 1e-12);
        improved = true;
        break;
      }
      mu *= 4.0;
    }
    if (!improved) {
      result.converged = true;
      result.message = "no further decrease (local minimum)";
      break;
    }
    residuals(fp, t, samples, r, &jac);
    if (rel_change < 1e-14) {
      result.converged = true;
      result.message = "relative decrease below 1e-14";
      break;
    }
  }
  if (it == max_iter) result.message = "iteration limit reached";
  result.iterations = it;

  // undo the time shift: w e^{chi (t - t0)} = (w e^{-chi t0}) e^{chi t}
  result.sum = to_sum(fp);
  for (auto& term : result.sum.terms) term.weight *= std::exp(-term.rate * times[0]);

  double sq = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double e = std::abs(result.sum(times[i]) - samples[i]);
    result.max_residual = std::max(result.max_residual, e);
    sq += e * e;
  }
  result.rms_residual = std::sqrt(sq / static_cast<double>(times.size()));
  return result;
}

ThermalMatch match_thermal_mode(const BathSpec& target, double window, int samples) {
  if (target.density.family() != SpectralDensity::Family::AntisymLorentzian) {
    throw std::invalid_argument("match_thermal_mode: target must be an antisymmetrized Lorentzian");
  }
  if (samples < 1) throw std::invalid_argument("match_thermal_mode: need at least one sample");
  Pseudomode unit{target.density.center(), target.density.width(), 1.0, target.temperature()};
  const BathNetwork unit_net = BathNetwork::thermal_star({unit});

  std::vector<double> ts(samples);
  std::vector<Complex> f(samples), g(samples);
  for (int i = 0; i < samples; ++i) {
    ts[i] = samples == 1 ? 0.0 : window * i / (samples - 1);
    f[i] = closed_form_correlation(unit_net, ts[i]);
    g[i] = correlation(target.density, target.beta, ts[i]);
  }
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < samples; ++i) {
    num += (std::conj(f[i]) * g[i]).real();
    den += std::norm(f[i]);
  }
  const double c = den > 0.0 ? std::max(0.0, num / den) : 0.0;
  unit.coupling = c;

  ThermalMatch out{BathNetwork::thermal_star({unit})};
  double sq = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double e = std::abs(c * f[i] - g[i]);
    out.max_residual = std::max(out.max_residual, e);
    sq += e * e;
  }
  out.rms_residual = std::sqrt(sq / samples);
  out.relative_max_residual = out.max_residual / std::abs(g[0]);
  return out;
}

}  // namespace pmthermo
