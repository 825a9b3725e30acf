#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "pmthermo/error.hpp"
#include "pmthermo/hilbert.hpp"

namespace pmthermo {
namespace {

Matrix random_density(int d, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> n;
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = Complex(n(gen), n(gen));
  Matrix rho = a * a.adjoint();
  return rho / rho.trace();
}

Matrix random_unitary(int d, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> n;
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = Complex(n(gen), n(gen));
  Eigen::HouseholderQR<Matrix> qr(a);
  return qr.householderQ();
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Matrix projector(int d, int k) {
  Matrix m = Matrix::Zero(d, d);
  m(k, k) = 1.0;
  return m;
}

TEST(Embed, IdentityStaysIdentity) {
  const SpaceLayout layout = SpaceLayout::with_modes(2, {{3}});
  EXPECT_EQ(max_abs(embed(Matrix::Identity(2, 2), 0, layout) - Matrix::Identity(6, 6)), 0.0);
}

TEST(Embed, SystemIsSlowestIndex) {
  const SpaceLayout layout = SpaceLayout::with_modes(2, {{2}});
  Matrix expected = Matrix::Zero(4, 4);
  expected.diagonal() << 1.0, 1.0, -1.0, -1.0;
  EXPECT_EQ(max_abs(embed(pauli_z(), 0, layout) - expected), 0.0);
}

TEST(Embed, ProductOfEmbeddingsEmbedsProduct) {
  const SpaceLayout layout = SpaceLayout::with_modes(2, {{3}});
  const Matrix a = annihilator(3);
  const Matrix twice = embed(a, 1, layout) * embed(a, 1, layout);
  EXPECT_LT(max_abs(twice - embed(Matrix(a * a), 1, layout)), 1e-15);
}

TEST(Embed, DisjointSitesCommute) {
  const SpaceLayout layout = SpaceLayout::with_modes(2, {{3, 2}});
  const Matrix a = embed(pauli_x(), 0, layout);
  const Matrix b = embed(annihilator(3), 1, layout);
  const Matrix c = embed(Matrix(annihilator(2).adjoint()), 2, layout);
  EXPECT_LT(max_abs(a * b - b * a), 1e-12);
  EXPECT_LT(max_abs(b * c - c * b), 1e-12);
  EXPECT_LT(max_abs(a * c - c * a), 1e-12);
}

TEST(Annihilator, TwoLevels) {
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 1) = 1.0;
  EXPECT_EQ(max_abs(annihilator(2) - expected), 0.0);
}

TEST(Annihilator, TruncatedCommutatorDiagonal) {
  const Matrix a = annihilator(3);
  const Matrix comm = a * a.adjoint() - a.adjoint() * a;
  EXPECT_NEAR(comm(0, 0).real(), 1.0, 1e-15);
  EXPECT_NEAR(comm(1, 1).real(), 1.0, 1e-15);
  EXPECT_NEAR(comm(2, 2).real(), -2.0, 1e-15);
  EXPECT_LT(max_abs(Matrix(comm - Matrix(comm.diagonal().asDiagonal()))), 1e-15);
}

TEST(Annihilator, KillsVacuum) {
  Vector vac = Vector::Zero(5);
  vac(0) = 1.0;
  EXPECT_EQ((annihilator(5) * vac).norm(), 0.0);
}

// Naive index contraction over the traced site.
Matrix naive_trace_mode(const Matrix& rho, int ds, int dm) {
  Matrix out = Matrix::Zero(ds, ds);
  for (int i = 0; i < ds; ++i)
    for (int j = 0; j < ds; ++j)
      for (int k = 0; k < dm; ++k) out(i, j) += rho(i * dm + k, j * dm + k);
  return out;
}

Matrix naive_trace_system(const Matrix& rho, int ds, int dm) {
  Matrix out = Matrix::Zero(dm, dm);
  for (int i = 0; i < dm; ++i)
    for (int j = 0; j < dm; ++j)
      for (int k = 0; k < ds; ++k) out(i, j) += rho(k * dm + i, k * dm + j);
  return out;
}

TEST(PartialTrace, ProductStateGivesFactor) {
  const SpaceLayout layout = SpaceLayout::with_modes(2, {{3}});
  const Matrix rs = random_density(2, 1);
  const Matrix rm = random_density(3, 2);
  const std::vector<Matrix> f{rs, rm};
  const std::vector<int> keep{0};
  EXPECT_LT(max_abs(partial_trace(kron_all(f), keep, layout) - rs), 1e-14);
}

TEST(PartialTrace, MatchesIndexContraction) {
  const SpaceLayout layout = SpaceLayout::with_modes(2, {{3}});
  const Matrix rho = random_density(6, 3);
  const std::vector<int> system{0};
  const std::vector<int> mode{1};
  EXPECT_LT(max_abs(partial_trace(rho, system, layout) - naive_trace_mode(rho, 2, 3)), 1e-14);
  EXPECT_LT(max_abs(partial_trace(rho, mode, layout) - naive_trace_system(rho, 2, 3)), 1e-14);
  EXPECT_NEAR(std::abs(partial_trace(rho, system, layout).trace() - rho.trace()), 0.0, 1e-12);
}

TEST(PartialTrace, KeepingEverySiteIsIdentity) {
  const SpaceLayout layout = SpaceLayout::with_modes(2, {{2, 3}});
  const Matrix rho = random_density(12, 4);
  const std::vector<int> all{0, 1, 2};
  EXPECT_LT(max_abs(partial_trace(rho, all, layout) - rho), 1e-15);
}

TEST(PartialTrace, MiddleSiteAgainstKron) {
  const SpaceLayout layout = SpaceLayout::with_modes(2, {{3, 2}});
  const std::vector<Matrix> f{random_density(2, 5), random_density(3, 6), random_density(2, 7)};
  const std::vector<int> keep{0, 2};
  const std::vector<Matrix> outer{f[0], f[2]};
  EXPECT_LT(max_abs(partial_trace(kron_all(f), keep, layout) - kron_all(outer)), 1e-14);
}

TEST(ThermalState, ZeroTemperatureIsVacuum) {
  const Matrix a = annihilator(6);
  const DensityMatrix rho = thermal_state(2.0 * a.adjoint() * a, 0.0);
  Matrix vac = Matrix::Zero(6, 6);
  vac(0, 0) = 1.0;
  EXPECT_LT(max_abs(rho.data() - vac), 1e-15);
}

TEST(ThermalState, OccupationMatchesBose) {
  const Matrix a = annihilator(12);
  const Matrix h = 2.0 * a.adjoint() * a;
  const DensityMatrix rho = thermal_state(h, 1.0);
  const double nbar = 1.0 / std::expm1(2.0);
  const double n = std::real((a.adjoint() * a * rho.data()).trace());
  EXPECT_NEAR(n, nbar, 1e-6);
  EXPECT_NEAR(nbar, 0.156518, 1e-6);
  Matrix off = rho.data();
  off.diagonal().setZero();
  EXPECT_LE(max_abs(off), 1e-14);
  EXPECT_EQ(max_abs(h * rho.data() - rho.data() * h), 0.0);
}

TEST(Entropy, PureIsZero) {
  EXPECT_NEAR(von_neumann_entropy(DensityMatrix(projector(2, 0))), 0.0, 1e-12);
}

TEST(Entropy, MaximallyMixedQubit) {
  EXPECT_NEAR(von_neumann_entropy(DensityMatrix(Matrix::Identity(2, 2) / 2.0)), std::log(2.0), 1e-14);
}

TEST(Entropy, DiagonalValue) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 0.8;
  m(1, 1) = 0.2;
  const double expected = -0.8 * std::log(0.8) - 0.2 * std::log(0.2);
  EXPECT_NEAR(von_neumann_entropy(DensityMatrix(m)), expected, 1e-14);
  EXPECT_NEAR(expected, 0.500402, 1e-6);
}

TEST(Entropy, UnitaryInvariance) {
  const Matrix rho = random_density(5, 11);
  const Matrix u = random_unitary(5, 12);
  EXPECT_NEAR(von_neumann_entropy(DensityMatrix(rho)),
              von_neumann_entropy(DensityMatrix(Matrix(u * rho * u.adjoint()))), 1e-10);
}

TEST(Entropy, ClampReportsRemovedMass) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0 + 1e-9;
  m(1, 1) = -1e-9;
  const EntropyValue v = von_neumann_entropy_detailed(DensityMatrix(m));
  EXPECT_NEAR(v.clamped, 1e-9, 1e-15);
  EXPECT_NEAR(v.nats, 0.0, 1e-12);
}

TEST(RelativeEntropy, SelfIsZero) {
  const DensityMatrix rho(random_density(4, 21));
  EXPECT_NEAR(relative_entropy(rho, rho), 0.0, 1e-12);
}

TEST(RelativeEntropy, KleinInequality) {
  for (unsigned s = 0; s < 20; ++s) {
    const DensityMatrix a(random_density(3, 100 + s));
    const DensityMatrix b(random_density(3, 200 + s));
    EXPECT_GE(relative_entropy(a, b), -1e-12);
  }
}

TEST(RelativeEntropy, QubitValue) {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 0.9;
  a(1, 1) = 0.1;
  const double expected = 0.9 * std::log(0.9 / 0.5) + 0.1 * std::log(0.1 / 0.5);
  EXPECT_NEAR(relative_entropy(DensityMatrix(a), DensityMatrix(Matrix::Identity(2, 2) / 2.0)), expected, 1e-14);
  EXPECT_NEAR(expected, 0.368064, 1e-6);
}

TEST(DensityMatrix, RejectsBadTrace) {
  EXPECT_THROW(DensityMatrix(Matrix::Identity(2, 2)), NumericError);
}

TEST(Leakage, TopLevelAndOccupation) {
  const SpaceLayout layout = SpaceLayout::with_modes(2, {{4}});
  Matrix mode = Matrix::Zero(4, 4);
  mode(1, 1) = 0.75;
  mode(3, 3) = 0.25;
  const std::vector<Matrix> f{projector(2, 1), mode};
  const Matrix rho = kron_all(f);
  EXPECT_NEAR(top_level_population(rho, 1, layout), 0.25, 1e-15);
  EXPECT_NEAR(mode_occupation(rho, 1, layout), 0.75 + 0.75, 1e-14);
}

}  // namespace
}  // namespace pmthermo
