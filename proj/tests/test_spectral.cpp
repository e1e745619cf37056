#include "xxz/spectral.hpp"

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <memory>
#include <random>
#include <stdexcept>
#include <vector>

#include "xxz/graph.hpp"
#include "xxz/hamiltonian.hpp"

namespace xxz {
namespace {

LinearMap wrap(const Eigen::MatrixXd& m, bool hermitian = true) {
  auto keep = std::make_shared<Eigen::MatrixXd>(m);
  LinearMap op;
  op.dimension = static_cast<std::uint64_t>(m.rows());
  op.hermitian = hermitian;
  op.keepalive = keep;
  op.apply_fn = [keep](const double* in, double* out) {
    Eigen::Map<const Eigen::VectorXd> x(in, keep->rows());
    Eigen::Map<Eigen::VectorXd> y(out, keep->rows());
    y = (*keep) * x;
  };
  return op;
}

Eigen::MatrixXd random_symmetric(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      a(i, j) = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
  return 0.5 * (a + a.transpose());
}

TEST(Spectral, DenseSpectrumBasics) {
  Eigen::MatrixXd d = Eigen::Vector3d(3.0, 1.0, 2.0).asDiagonal();
  SpectrumResult r = dense_spectrum(wrap(d), 100);
  EXPECT_NEAR(r.values[0], 1.0, 1e-14);
  EXPECT_NEAR(r.values[1], 2.0, 1e-14);
  EXPECT_NEAR(r.values[2], 3.0, 1e-14);
  EXPECT_LE(r.max_residual, 1e-12);

  Eigen::MatrixXd asym = Eigen::MatrixXd::Zero(2, 2);
  asym(0, 1) = 1.0;  // not symmetric
  EXPECT_THROW(dense_spectrum(wrap(asym), 100), std::logic_error);

  LinearMap non_herm = wrap(d, false);
  EXPECT_THROW(dense_spectrum(non_herm, 100), std::invalid_argument);
  EXPECT_THROW(materialize(wrap(d), 2), std::length_error);
}

TEST(Spectral, CountBelow) {
  std::vector<double> v{0.1, 0.2, 0.2, 0.5};
  EXPECT_EQ(count_below(v, 0.2), 1);
  EXPECT_EQ(count_below(v, 0.21), 3);
  EXPECT_EQ(count_below(v, 1.0), 4);
  EXPECT_EQ(count_below(v, 0.0), 0);
}

TEST(Spectral, LanczosMatchesDense) {
  Eigen::MatrixXd a = random_symmetric(200, 7);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);

  LanczosOptions opt;
  opt.count = 5;
  EigResult lo = extremal_eigs(wrap(a), opt);
  ASSERT_EQ(lo.values.size(), 5);
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(lo.values[i], es.eigenvalues()[i], 1e-8);
    EXPECT_LE(lo.residuals[i], 1e-8);
  }

  opt.largest = true;
  EigResult hi = extremal_eigs(wrap(a), opt);
  for (int i = 0; i < 5; ++i)
    EXPECT_NEAR(hi.values[i], es.eigenvalues()[195 + i], 1e-8);

  // Eigenvectors satisfy the residual equation.
  for (int i = 0; i < 5; ++i) {
    Eigen::VectorXd v = lo.vectors.col(i);
    EXPECT_LE((a * v - lo.values[i] * v).norm(), 1e-7);
    EXPECT_NEAR(v.norm(), 1.0, 1e-10);
  }
}

TEST(Spectral, LanczosResolvesClusteredBand) {
  // 30 eigenvalues packed at spacing 1e-4 below a spread-out tail: the
  // restarted solver must converge the whole cluster, not just its edges.
  const int n = 400;
  Eigen::VectorXd diag(n);
  for (int i = 0; i < 30; ++i) diag[i] = 1.0 + 1e-4 * i;
  for (int i = 30; i < n; ++i) diag[i] = 2.0 + 0.01 * (i - 30);
  Eigen::MatrixXd q = random_symmetric(n, 11);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qr(q);
  Eigen::MatrixXd a =
      qr.eigenvectors() * diag.asDiagonal() * qr.eigenvectors().transpose();

  LanczosOptions opt;
  opt.count = 32;
  opt.tol = 1e-10;
  EigResult r = extremal_eigs(wrap(a), opt);
  ASSERT_EQ(r.values.size(), 32);
  for (int i = 0; i < 32; ++i) EXPECT_NEAR(r.values[i], diag[i], 1e-8);
}

TEST(Spectral, LanczosDegenerateSpectrumContract) {
  // Exactly degenerate eigenvalues: a single-vector Krylov sequence sees one
  // copy per eigenspace. The contract is that every reported value is a true
  // eigenvalue (tight residual) and the distinct values ascend without gaps;
  // exact-multiplicity coverage is not promised (dense paths provide it).
  const int n = 80;
  Eigen::VectorXd diag(n);
  diag[0] = diag[1] = diag[2] = 0.0;
  diag[3] = diag[4] = 1.0;
  for (int i = 5; i < n; ++i) diag[i] = 2.0 + 0.5 * (i - 5);
  Eigen::MatrixXd q = random_symmetric(n, 13);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qr(q);
  Eigen::MatrixXd a =
      qr.eigenvectors() * diag.asDiagonal() * qr.eigenvectors().transpose();

  LanczosOptions opt;
  opt.count = 6;
  EigResult r = extremal_eigs(wrap(a), opt);
  ASSERT_EQ(r.values.size(), 6);
  EXPECT_NEAR(r.values[0], 0.0, 1e-8);
  // Worst case collapses every eigenspace to one copy, so the sixth value can
  // reach the sixth distinct eigenvalue (3.5) but never beyond it.
  EXPECT_LE(r.values[5], 3.5 + 1e-8);
  for (int i = 0; i < 6; ++i) {
    if (i > 0) EXPECT_GE(r.values[i], r.values[i - 1] - 1e-12);
    double nearest = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j)
      nearest = std::min(nearest, std::abs(r.values[i] - diag[j]));
    EXPECT_LE(nearest, 1e-8);
    Eigen::VectorXd v = r.vectors.col(i);
    EXPECT_LE((a * v - r.values[i] * v).norm(), 1e-7);
  }
}

TEST(Spectral, EigenvaluesBelowAdaptive) {
  const int n = 300;
  Eigen::VectorXd diag(n);
  for (int i = 0; i < 30; ++i) diag[i] = 1.0 + 1e-4 * i;
  for (int i = 30; i < n; ++i) diag[i] = 2.0 + 0.01 * (i - 30);
  Eigen::MatrixXd q = random_symmetric(n, 17);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qr(q);
  Eigen::MatrixXd a =
      qr.eigenvectors() * diag.asDiagonal() * qr.eigenvectors().transpose();

  LanczosOptions opt;
  Eigen::VectorXd vals = eigenvalues_below(wrap(a), 1.5, opt);
  // Sentinel guarantee: the last value is at or above the threshold.
  ASSERT_GE(vals.size(), 31);
  EXPECT_GE(vals[vals.size() - 1], 1.5);
  std::vector<double> below;
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    if (vals[i] < 1.5) below.push_back(vals[i]);
  ASSERT_EQ(below.size(), 30u);
  for (int i = 0; i < 30; ++i) EXPECT_NEAR(below[static_cast<std::size_t>(i)], diag[i], 1e-8);
}

TEST(Spectral, CgSolveAgainstLLT) {
  Eigen::MatrixXd a = random_symmetric(60, 19);
  Eigen::MatrixXd spd = a * a.transpose() + 60 * Eigen::MatrixXd::Identity(60, 60);
  Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(60, -1.0, 2.0);
  Eigen::VectorXd x = cg_solve(wrap(spd), b);
  Eigen::VectorXd want = spd.llt().solve(b);
  EXPECT_LE((x - want).norm(), 1e-8 * want.norm());

  Eigen::MatrixXd indef = Eigen::MatrixXd::Identity(3, 3);
  indef(2, 2) = -1.0;
  Eigen::VectorXd rhs = Eigen::VectorXd::Ones(3);
  EXPECT_THROW(cg_solve(wrap(indef), rhs), std::runtime_error);
}

TEST(Spectral, BlockResolventDenseVsIterative) {
  HamiltonianSpec spec{build_lattice_window("path", {8})};
  spec.particles = 2;
  spec.delta = 2.0;
  HamiltonianOp op(spec);
  const std::uint64_t dim = op.dimension();
  ASSERT_EQ(dim, 28u);

  std::vector<std::uint64_t> rows{0, 1, 2, 3, 4};
  std::vector<std::uint64_t> cols{20, 21, 22, 23, 24, 25, 26, 27};
  double e = 0.05;

  ResolventOptions dense_opt;
  double nd = block_resolvent_norm(op.map(), e, rows, cols, dense_opt);
  ResolventOptions iter_opt;
  iter_opt.dense_cap = 1;  // force the matrix-free path
  double ni = block_resolvent_norm(op.map(), e, rows, cols, iter_opt);
  EXPECT_NEAR(nd, ni, 1e-6 * std::max(1.0, nd));

  // Full-block norm equals 1/(lambda_min - E).
  std::vector<std::uint64_t> all(dim);
  for (std::uint64_t i = 0; i < dim; ++i) all[i] = i;
  SpectrumResult full = dense_spectrum(op.map(), 100);
  double want = 1.0 / (full.values[0] - e);
  EXPECT_NEAR(block_resolvent_norm(op.map(), e, all, all, dense_opt), want,
              1e-8 * want);

  // Shift above the spectrum bottom is rejected.
  EXPECT_THROW(block_resolvent_norm(op.map(), full.values[0] + 0.1, rows,
                                    cols, dense_opt),
               std::invalid_argument);
}

TEST(Spectral, ComplexBlockResolventDenseVsIterative) {
  HamiltonianSpec spec{build_lattice_window("path", {6})};
  spec.particles = 2;
  spec.delta = 3.0;
  HamiltonianOp op(spec);
  std::vector<std::uint64_t> rows{0, 1, 2};
  std::vector<std::uint64_t> cols{10, 11, 12, 13, 14};
  std::complex<double> e(0.05, 0.4);

  ResolventOptions dense_opt;
  double nd = block_resolvent_norm(op.map(), e, rows, cols, dense_opt);
  ResolventOptions iter_opt;
  iter_opt.dense_cap = 1;
  double ni = block_resolvent_norm(op.map(), e, rows, cols, iter_opt);
  EXPECT_NEAR(nd, ni, 1e-6 * std::max(1.0, nd));
  EXPECT_GT(nd, 0.0);
}

TEST(Spectral, SpectralProjector) {
  Eigen::MatrixXd a = random_symmetric(30, 23);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  double lo = 0.5 * (es.eigenvalues()[4] + es.eigenvalues()[5]);
  double hi = 0.5 * (es.eigenvalues()[9] + es.eigenvalues()[10]);
  Eigen::MatrixXd q = spectral_projector(wrap(a), lo, hi, 100);
  EXPECT_NEAR(q.trace(), 5.0, 1e-10);
  EXPECT_LE((q * q - q).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((q - q.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  // Q acts as identity on in-window eigenvectors, zero on the rest.
  EXPECT_LE((q * es.eigenvectors().col(7) - es.eigenvectors().col(7)).norm(),
            1e-10);
  EXPECT_LE((q * es.eigenvectors().col(2)).norm(), 1e-10);

  EXPECT_THROW(spectral_projector(wrap(a), es.eigenvalues()[4], hi, 100),
               std::invalid_argument);
  EXPECT_THROW(spectral_projector(wrap(a), hi, lo, 100), std::invalid_argument);
}

TEST(Spectral, ExtractBandEdges) {
  // Isolated defect above the band is skipped.
  std::vector<double> v{0.940, 0.941, 0.942, 0.971};
  auto [lo1, hi1] = extract_band_edges(v, 0.012);
  EXPECT_DOUBLE_EQ(lo1, 0.940);
  EXPECT_DOUBLE_EQ(hi1, 0.942);

  // A defect *pair* below the band is still skipped: mutual support is not
  // enough for min_supporters = 2.
  std::vector<double> w{0.900, 0.9001, 0.940, 0.941, 0.942, 0.943};
  auto [lo2, hi2] = extract_band_edges(w, 0.012);
  EXPECT_DOUBLE_EQ(lo2, 0.940);
  EXPECT_DOUBLE_EQ(hi2, 0.943);

  // All isolated: fall back to the plain extremes.
  std::vector<double> iso{0.1, 0.2, 0.3};
  auto [lo3, hi3] = extract_band_edges(iso, 0.012);
  EXPECT_DOUBLE_EQ(lo3, 0.1);
  EXPECT_DOUBLE_EQ(hi3, 0.3);

  // Tiny inputs use plain extremes; empty input is an error.
  auto [lo4, hi4] = extract_band_edges({1.5}, 0.012);
  EXPECT_DOUBLE_EQ(lo4, 1.5);
  EXPECT_DOUBLE_EQ(hi4, 1.5);
  EXPECT_THROW(extract_band_edges({}, 0.012), std::invalid_argument);
}

TEST(Spectral, DeterministicAcrossCalls) {
  Eigen::MatrixXd a = random_symmetric(150, 29);
  LanczosOptions opt;
  opt.count = 4;
  EigResult r1 = extremal_eigs(wrap(a), opt);
  EigResult r2 = extremal_eigs(wrap(a), opt);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(r1.values[i], r2.values[i]);  // bitwise equal
  }
  EXPECT_EQ(r1.matvecs, r2.matvecs);
}

TEST(Spectral, LinearMapChecks) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 3);
  LinearMap op = wrap(a);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(2);
  EXPECT_THROW(op(x), std::invalid_argument);
  LanczosOptions opt;
  opt.count = 0;
  EXPECT_THROW(extremal_eigs(op, opt), std::invalid_argument);
}

}  // namespace
}  // namespace xxz
