#include "xxz/hamiltonian.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <random>
#include <stdexcept>
#include <vector>

#include "xxz/graph.hpp"
#include "xxz/spectral.hpp"

namespace xxz {
namespace {

BaseGraph path(int L) { return build_lattice_window("path", {L}); }

Eigen::MatrixXd dense_of(const HamiltonianOp& op) {
  const Eigen::Index n = static_cast<Eigen::Index>(op.dimension());
  Eigen::MatrixXd m(n, n);
  Eigen::VectorXd unit = Eigen::VectorXd::Zero(n), col(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    unit[c] = 1.0;
    op.apply(unit.data(), col.data());
    unit[c] = 0.0;
    m.col(c) = col;
  }
  return m;
}

TEST(Hamiltonian, TwoSiteOneParticle) {
  HamiltonianSpec spec{path(2)};
  spec.particles = 1;
  spec.delta = 2.0;
  HamiltonianOp op(spec);
  Eigen::MatrixXd h = dense_of(op);
  // diag = S/2 = 1/2 on both sites; hop = -1/(2*Delta) = -1/4.
  EXPECT_DOUBLE_EQ(h(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(h(1, 1), 0.5);
  EXPECT_DOUBLE_EQ(h(0, 1), -0.25);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  EXPECT_NEAR(es.eigenvalues()[0], 0.25, 1e-14);
  EXPECT_NEAR(es.eigenvalues()[1], 0.75, 1e-14);
}

TEST(Hamiltonian, FullSpinMatchesSectors) {
  // Two sites: sectors N=0 -> {0}, N=1 -> {1/4, 3/4}, N=2 -> {0}.
  BaseGraph p2 = path(2);
  Eigen::SparseMatrix<double> full = full_spin_hamiltonian(p2, 2.0);
  Eigen::MatrixXd dense(full);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
  Eigen::VectorXd v = es.eigenvalues();
  ASSERT_EQ(v.size(), 4);
  EXPECT_NEAR(v[0], 0.0, 1e-14);
  EXPECT_NEAR(v[1], 0.0, 1e-14);
  EXPECT_NEAR(v[2], 0.25, 1e-14);
  EXPECT_NEAR(v[3], 0.75, 1e-14);

  SectorReport rep = sector_blocks(full, p2, 2.0, {});
  EXPECT_LE(rep.max_leakage, 1e-12);
  EXPECT_LE(rep.max_deviation, 1e-12);
}

TEST(Hamiltonian, SectorDecompositionPathAndStrip) {
  BaseGraph p4 = path(4);
  SectorReport rep =
      sector_blocks(full_spin_hamiltonian(p4, 3.0), p4, 3.0, {});
  EXPECT_EQ(rep.max_leakage, 0.0);
  EXPECT_LE(rep.max_deviation, 1e-12);

  BaseGraph s = build_lattice_window("strip", {2, 3});
  std::mt19937_64 rng(kDefaultSeed);
  std::vector<double> field(6);
  for (double& x : field) x = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  SectorReport rep2 = sector_blocks(full_spin_hamiltonian(s, 2.5, field), s,
                                    2.5, field);
  EXPECT_EQ(rep2.max_leakage, 0.0);
  EXPECT_LE(rep2.max_deviation, 1e-12);
}

TEST(Hamiltonian, FullSpinCap) {
  EXPECT_THROW(full_spin_hamiltonian(path(15), 2.0), std::length_error);
}

TEST(Hamiltonian, PositiveSemidefiniteAndGroundEnergy) {
  {
    HamiltonianSpec spec{path(5)};
    spec.particles = 2;
    spec.delta = 2.0;
    HamiltonianOp op(spec);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_of(op));
    EXPECT_GE(es.eigenvalues()[0], -1e-10);
  }
  {
    BaseGraph g = build_lattice_window("grid2d", {3, 3});
    HamiltonianSpec spec{g};
    spec.particles = 2;
    spec.delta = 3.0;
    spec.field = degree_restoring_field(g, 4);
    HamiltonianOp op(spec);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_of(op));
    EXPECT_GE(es.eigenvalues()[0], -1e-10);
  }
  {
    // Long chain, restoring field: ground state sits at the band bottom
    // tanh(rho) * tanh(N rho / 2) with rho = arccosh(Delta).
    HamiltonianSpec spec{path(12)};
    spec.particles = 2;
    spec.delta = 3.0;
    spec.field = degree_restoring_field(spec.base, 2);
    HamiltonianOp op(spec);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_of(op));
    double rho = std::acosh(3.0);
    double band_lo = std::tanh(rho) * std::tanh(rho);  // N = 2
    EXPECT_NEAR(es.eigenvalues()[0], band_lo, 5e-3);
  }
}

TEST(Hamiltonian, CompleteGraphFullyPackedIsZero) {
  BaseGraph k3(3, {{0, 1}, {1, 2}, {0, 2}});
  HamiltonianSpec spec{k3};
  spec.particles = 3;
  spec.delta = 2.0;
  HamiltonianOp op(spec);
  EXPECT_EQ(op.dimension(), 1u);
  Eigen::MatrixXd h = dense_of(op);
  EXPECT_DOUBLE_EQ(h(0, 0), 0.0);
}

TEST(Hamiltonian, FieldShiftsDiagonalBySum) {
  BaseGraph g = path(5);
  std::vector<double> field{0.3, 0.0, 0.7, 0.1, 0.0};
  HamiltonianSpec bare{g};
  bare.particles = 2;
  bare.delta = 2.0;
  HamiltonianSpec dressed = bare;
  dressed.field = field;
  HamiltonianOp op0(bare), op1(dressed);
  const SymSpace& space = op0.space();
  for (std::uint64_t r = 0; r < space.dimension(); ++r) {
    double want = 0.0;
    for (int v : space.config(r)) want += field[static_cast<std::size_t>(v)];
    EXPECT_NEAR(op1.diagonal()[static_cast<Eigen::Index>(r)] -
                    op0.diagonal()[static_cast<Eigen::Index>(r)],
                want, 1e-14);
  }
}

TEST(Hamiltonian, RegularizationFloorAndIndicator) {
  HamiltonianSpec spec{path(6)};
  spec.particles = 2;
  spec.delta = 4.0;
  // Floor is k(1-1/Delta)/2 = 0.375 for k = 1.
  spec.regularization =
      Regularization{1, 0.1, 2, "test", SurfaceMode::bulk(2)};
  EXPECT_THROW(HamiltonianOp{spec}, std::invalid_argument);

  spec.regularization =
      Regularization{1, lambda_floor(4.0, 1), 2, "test", SurfaceMode::bulk(2)};
  HamiltonianOp op(spec);
  // Droplet set {S_bulk < 3} = the five adjacent pairs.
  int count = 0;
  for (char c : op.droplet_indicator()) count += c;
  EXPECT_EQ(count, 5);
  EXPECT_TRUE(op.droplet_indicator()[op.space().index({2, 3})]);
  EXPECT_FALSE(op.droplet_indicator()[op.space().index({1, 3})]);

  // The regularized diagonal gains lambda exactly on droplet rows.
  HamiltonianSpec bare = spec;
  bare.regularization.reset();
  HamiltonianOp op0(bare);
  for (std::uint64_t r = 0; r < op.dimension(); ++r) {
    double gain = op.diagonal()[static_cast<Eigen::Index>(r)] -
                  op0.diagonal()[static_cast<Eigen::Index>(r)];
    EXPECT_NEAR(gain, op.droplet_indicator()[r] ? lambda_floor(4.0, 1) : 0.0,
                1e-14);
  }
}

TEST(Hamiltonian, InvalidSpecs) {
  {
    HamiltonianSpec spec{path(4)};
    spec.delta = 1.0;  // Ising phase requires Delta > 1
    EXPECT_THROW(HamiltonianOp{spec}, std::invalid_argument);
  }
  {
    HamiltonianSpec spec{path(4)};
    spec.field = {0.1, 0.2};  // wrong size
    EXPECT_THROW(HamiltonianOp{spec}, std::invalid_argument);
  }
  {
    HamiltonianSpec spec{path(4)};
    spec.field = {0.1, -0.2, 0.0, 0.0};  // negative entry
    EXPECT_THROW(HamiltonianOp{spec}, std::invalid_argument);
  }
  {
    HamiltonianSpec spec{path(30)};
    spec.particles = 15;
    spec.dimension_cap = 1000;
    EXPECT_THROW(HamiltonianOp{spec}, std::length_error);
  }
}

TEST(Hamiltonian, WorkerInvariance) {
  HamiltonianSpec spec{path(8)};
  spec.particles = 3;
  spec.delta = 2.5;
  spec.field = degree_restoring_field(spec.base, 2);
  HamiltonianOp op(spec);
  const std::uint64_t dim = op.dimension();
  std::vector<double> in(dim), out1(dim), out4(dim);
  for (std::uint64_t r = 0; r < dim; ++r)
    in[r] = std::cos(0.1 * static_cast<double>(r));
  op.apply(in.data(), out1.data(), 1);
  op.apply(in.data(), out4.data(), 4);
  EXPECT_EQ(out1, out4);
}

}  // namespace
}  // namespace xxz
