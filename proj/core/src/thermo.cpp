#include "pmthermo/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pmthermo/error.hpp"

namespace pmthermo {

RateChannel heat_rate(const GeneratorParts& parts, int j) {
  const SparseMatrix* k = &parts.heat_kernel(j);
  const ModulationFn lambda = parts.modulation(j);
  return {"Q_" + std::to_string(j), [k, lambda](double t, const Matrix& rho) {
            const double lam = lambda.value(t);
            if (lam == 0.0) return 0.0;
            return -lam * trace_product(*k, rho).real();
          }};
}

RateChannel interaction_work_rate(const GeneratorParts& parts, int j) {
  const SparseMatrix* b = &parts.interaction(j);
  const ModulationFn lambda = parts.modulation(j);
  return {"W_I_" + std::to_string(j), [b, lambda](double t, const Matrix& rho) {
            const double dl = lambda.derivative(t);
            if (dl == 0.0) return 0.0;
            return dl * trace_product(*b, rho).real();
          }};
}

RateChannel system_work_rate(const GeneratorParts& parts) {
  const SparseMatrix* v = &parts.system_drive();
  const ModulationFn drive = parts.drive();
  return {"W_S", [v, drive](double t, const Matrix& rho) {
            const double df = drive.derivative(t);
            if (df == 0.0) return 0.0;
            return df * trace_product(*v, rho).real();
          }};
}

std::vector<RateChannel> standard_channels(const GeneratorParts& parts) {
  std::vector<RateChannel> out{system_work_rate(parts)};
  for (int j = 0; j < parts.num_baths(); ++j) {
    out.push_back(heat_rate(parts, j));
    out.push_back(interaction_work_rate(parts, j));
  }
  return out;
}

double internal_energy(const SystemSpec& system, const Matrix& rho_system, double t) {
  return std::real((system.hamiltonian(t) * rho_system).trace());
}

double interaction_energy(const GeneratorParts& parts, int j, const Matrix& rho, double t) {
  return parts.modulation(j).value(t) * trace_product(parts.interaction(j), rho).real();
}

double EnergyLedger::max_relative_residual() const {
  double m = 0.0;
  for (double r : R) m = std::max(m, std::abs(r));
  return m / e_ref;
}

EnergyLedger energy_ledger(const Trajectory& traj) {
  const int nb = static_cast<int>(traj.interaction_energy.size());
  const std::size_t nt = traj.times.size();
  EnergyLedger l;
  l.times = traj.times;
  l.W_S = traj.channel("W_S");
  l.U.resize(nt);
  l.R.resize(nt);
  for (std::size_t i = 0; i < nt; ++i) l.U[i] = traj.system_energy[i] - traj.system_energy[0];
  for (int j = 0; j < nb; ++j) {
    l.Q.push_back(traj.channel("Q_" + std::to_string(j)));
    l.W_I.push_back(traj.channel("W_I_" + std::to_string(j)));
    std::vector<double> ij(nt);
    for (std::size_t i = 0; i < nt; ++i) ij[i] = traj.interaction_energy[j][i] - traj.interaction_energy[j][0];
    l.I.push_back(std::move(ij));
  }
  double e_ref = 1e-12;
  for (std::size_t i = 0; i < nt; ++i) {
    double r = l.U[i] - l.W_S[i];
    double mag = std::abs(l.U[i]) + std::abs(l.W_S[i]);
    for (int j = 0; j < nb; ++j) {
      r += l.I[j][i] + l.Q[j][i] - l.W_I[j][i];
      mag += std::abs(l.I[j][i]) + std::abs(l.Q[j][i]) + std::abs(l.W_I[j][i]);
    }
    l.R[i] = r;
    e_ref = std::max(e_ref, mag);
  }
  l.e_ref = e_ref;
  return l;
}

namespace {

std::vector<double> entropy_change(const Trajectory& traj) {
  std::vector<double> s(traj.system_states.size());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = von_neumann_entropy(DensityMatrix(traj.system_states[i], 1e-6));
  return s;
}

}  // namespace

std::vector<double> entropy_production(const Trajectory& traj, const EnergyLedger& ledger, EntropyVariant variant,
                                       const std::vector<double>& betas) {
  const std::vector<double> s = entropy_change(traj);
  const std::size_t nt = s.size();
  const int nb = static_cast<int>(ledger.Q.size());
  if (static_cast<int>(betas.size()) != nb) throw std::invalid_argument("entropy_production: one beta per bath");
  if (variant != EntropyVariant::ELB && nb != 1) {
    throw std::invalid_argument("entropy_production: Spohn and DL forms need a single bath");
  }
  for (double b : betas) {
    if (!std::isfinite(b)) throw std::invalid_argument("entropy_production: bath temperature must be positive");
  }
  std::vector<double> out(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    const double ds = s[i] - s[0];
    switch (variant) {
      case EntropyVariant::ELB: {
        double v = ds;
        for (int j = 0; j < nb; ++j) v += betas[j] * ledger.Q[j][i];
        out[i] = v;
        break;
      }
      case EntropyVariant::Spohn:
        out[i] = ds - betas[0] * ledger.U[i];
        break;
      case EntropyVariant::DL:
        out[i] = ds - betas[0] * ledger.U[i] + betas[0] * ledger.W_S[i];
        break;
    }
  }
  return out;
}

EntropyRecord entropy_record(const Trajectory& traj, const EnergyLedger& ledger, const std::vector<double>& betas) {
  EntropyRecord rec;
  rec.S_S = entropy_change(traj);
  rec.sigma_elb = entropy_production(traj, ledger, EntropyVariant::ELB, betas);
  if (betas.size() == 1) {
    rec.sigma_spohn = entropy_production(traj, ledger, EntropyVariant::Spohn, betas);
    rec.sigma_dl = entropy_production(traj, ledger, EntropyVariant::DL, betas);
  }
  for (std::size_t i = 0; i < rec.sigma_elb.size(); ++i) {
    if (rec.sigma_elb[i] < -1e-3) {
      std::ostringstream os;
      os << "ELB entropy production " << rec.sigma_elb[i] << " < -1e-3 at t=" << traj.times[i];
      rec.warnings.push_back(os.str());
      break;
    }
  }
  return rec;
}

namespace {

// Trapezoid over the triangle using grid points i*stride.
struct TriangleSums {
  double Q, W_I, I;
};

TriangleSums triangle_sums(const Matrix& g, const std::vector<double>& lam, const std::vector<double>& dlam,
                           const std::vector<Complex>& c, const std::vector<Complex>& cd, double h, int stride) {
  const int n = static_cast<int>(g.rows()) - 1;
  const int m = n / stride;
  const double hs = h * stride;
  std::vector<double> inner_q(m + 1, 0.0), inner_w(m + 1, 0.0);
  for (int a = 0; a <= m; ++a) {
    const int i = a * stride;
    double sq = 0.0;
    double sw = 0.0;
    for (int b = 0; b <= a; ++b) {
      const int k = b * stride;
      const double wgt = (b == 0 || b == a) ? 0.5 : 1.0;
      sq += wgt * lam[k] * std::imag(cd[i - k] * g(i, k));
      sw += wgt * lam[k] * std::imag(c[i - k] * g(i, k));
    }
    inner_q[a] = a == 0 ? 0.0 : hs * sq;
    inner_w[a] = a == 0 ? 0.0 : hs * sw;
  }
  double q = 0.0;
  double w = 0.0;
  for (int a = 0; a <= m; ++a) {
    const double wgt = (a == 0 || a == m) ? 0.5 : 1.0;
    const int i = a * stride;
    q += wgt * lam[i] * inner_q[a];
    w += wgt * dlam[i] * inner_w[a];
  }
  return {-2.0 * hs * q, 2.0 * hs * w, 2.0 * lam[n] * inner_w[m]};
}

}  // namespace

TwoTimeResult two_time_integrals(const Matrix& g, const ModulationFn& lambda, const CorrelationFn& c,
                                 const CorrelationFn& c_dot, const std::vector<double>& grid, double tolerance) {
  const int n = static_cast<int>(grid.size()) - 1;
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("two_time_integrals: need an even number of intervals");
  if (g.rows() != n + 1 || g.cols() != n + 1) throw std::invalid_argument("two_time_integrals: matrix size");
  const double h = grid[1] - grid[0];
  for (int i = 1; i <= n; ++i) {
    if (std::abs(grid[i] - i * h) > 1e-9 * std::max(1.0, grid[n])) {
      throw std::invalid_argument("two_time_integrals: grid must be uniform from 0");
    }
  }
  std::vector<double> lam(n + 1), dlam(n + 1);
  std::vector<Complex> cv(n + 1), cdv(n + 1);
  for (int i = 0; i <= n; ++i) {
    lam[i] = lambda.value(grid[i]);
    dlam[i] = lambda.derivative(grid[i]);
    cv[i] = c(grid[i]);
    cdv[i] = c_dot(grid[i]);
  }
  const TriangleSums fine = triangle_sums(g, lam, dlam, cv, cdv, h, 1);
  const TriangleSums coarse = triangle_sums(g, lam, dlam, cv, cdv, h, 2);
  TwoTimeResult r;
  r.Q = fine.Q;
  r.W_I = fine.W_I;
  r.I = fine.I;
  r.Q_residual = std::abs(fine.Q - coarse.Q);
  r.W_I_residual = std::abs(fine.W_I - coarse.W_I);
  r.I_residual = std::abs(fine.I - coarse.I);
  const double scale = std::max({std::abs(r.Q), std::abs(r.W_I), std::abs(r.I), 1e-12});
  if (std::max({r.Q_residual, r.W_I_residual, r.I_residual}) > tolerance * scale) {
    r.converged = false;
    std::ostringstream os;
    os << "two-time grid too coarse: refinement changes (Q " << r.Q_residual << ", W_I " << r.W_I_residual << ", I "
       << r.I_residual << ") exceed " << tolerance << " x " << scale;
    r.message = os.str();
  }
  return r;
}

TwoTimeResult two_time_thermo(const ModelConfig& config, const GeneratorParts& parts, int j,
                              const CorrelationFn& c, const CorrelationFn& c_dot, const std::vector<double>& grid,
                              double tolerance, int threads) {
  const ModulationFn& lambda = parts.modulation(j);
  if (lambda.is_identically_zero()) return {};
  const Matrix g = two_time_correlation(config, parts, config.baths.at(j).coupling_operator, grid, threads);
  return two_time_integrals(g, lambda, c, c_dot, grid, tolerance);
}

CycleLedger cycle_metrics(const EnergyLedger& ledger, double tau, int ell_max, int hot, int cold) {
  if (!(tau > 0.0) || ell_max < 1) throw std::invalid_argument("cycle_metrics: need tau > 0 and ell_max >= 1");
  const int nb = static_cast<int>(ledger.Q.size());
  if (hot < 0 || hot >= nb || cold < 0 || cold >= nb) throw std::invalid_argument("cycle_metrics: bath index");
  std::vector<std::size_t> idx(ell_max + 1);
  for (int l = 0; l <= ell_max; ++l) {
    const double target = l * tau;
    auto it = std::lower_bound(ledger.times.begin(), ledger.times.end(), target - 1e-9 * tau);
    if (it == ledger.times.end() || std::abs(*it - target) > 1e-9 * tau) {
      std::ostringstream os;
      os << "cycle boundary t=" << target << " (cycle " << l << ") is not on the output grid";
      throw NumericError(os.str());
    }
    idx[l] = static_cast<std::size_t>(it - ledger.times.begin());
  }
  auto work = [&](std::size_t i) {
    double w = ledger.W_S[i];
    for (int j = 0; j < nb; ++j) w += ledger.W_I[j][i];
    return w;
  };
  auto stored = [&](std::size_t i) {
    double a = ledger.U[i];
    for (int j = 0; j < nb; ++j) a += ledger.I[j][i];
    return a;
  };
  CycleLedger c;
  c.tau = tau;
  for (int l = 1; l <= ell_max; ++l) {
    const std::size_t a = idx[l - 1];
    const std::size_t b = idx[l];
    const double w = work(b) - work(a);
    const double qh = ledger.Q[hot][b] - ledger.Q[hot][a];
    const double qc = ledger.Q[cold][b] - ledger.Q[cold][a];
    c.ell.push_back(l);
    c.W_tot.push_back(w);
    c.Q_hot.push_back(qh);
    c.Q_cold.push_back(qc);
    c.P.push_back(w / tau);
    const bool defined = std::abs(qh) > 1e-12;
    c.eta_defined.push_back(defined);
    c.eta.push_back(defined ? w / qh : std::numeric_limits<double>::quiet_NaN());
    c.A.push_back(stored(b) - stored(a));
  }
  return c;
}

}  // namespace pmthermo
