#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "xxz/linear_map.hpp"

namespace xxz {

inline constexpr std::uint64_t kDefaultDenseCap = 6000;
inline constexpr std::uint64_t kDefaultSeed = 0x5EED;

namespace detail {

// Portable deterministic uniform double in [-1, 1).
inline double canonical_unit(std::mt19937_64& rng) {
  return 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0;
}

inline Eigen::VectorXd random_vector(std::uint64_t dim, std::mt19937_64& rng) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = canonical_unit(rng);
  return v;
}

}  // namespace detail

inline Eigen::MatrixXd materialize(const LinearMap& op,
                                   std::uint64_t dense_cap = kDefaultDenseCap) {
  if (op.dimension > dense_cap)
    throw std::length_error("dimension " + std::to_string(op.dimension) +
                            " exceeds dense cap " + std::to_string(dense_cap) +
                            "; use extremal_eigs for matrix-free spectra");
  const Eigen::Index n = static_cast<Eigen::Index>(op.dimension);
  Eigen::MatrixXd m(n, n);
  Eigen::VectorXd unit = Eigen::VectorXd::Zero(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    unit[c] = 1.0;
    op.apply_fn(unit.data(), m.col(c).data());
    unit[c] = 0.0;
  }
  return m;
}

struct SpectrumResult {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns match values
  double max_residual = 0.0;
};

// Full dense eigendecomposition; every eigenpair is re-verified by one matvec.
inline SpectrumResult dense_spectrum(const LinearMap& op,
                                     std::uint64_t dense_cap = kDefaultDenseCap) {
  if (!op.hermitian)
    throw std::invalid_argument("dense_spectrum requires a hermitian map");
  Eigen::MatrixXd m = materialize(op, dense_cap);
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale)
    throw std::logic_error("map declared hermitian but asymmetry is " +
                           std::to_string(asym));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("dense eigensolver failed to converge");
  SpectrumResult r;
  r.values = es.eigenvalues();
  r.vectors = es.eigenvectors();
  double opnorm = std::max(std::abs(r.values[0]),
                           std::abs(r.values[r.values.size() - 1]));
  Eigen::MatrixXd resid =
      m * r.vectors - r.vectors * r.values.asDiagonal();
  r.max_residual = resid.colwise().norm().maxCoeff();
  if (r.max_residual > 1e-10 * std::max(1.0, opnorm))
    throw std::logic_error("dense eigenpair residual " +
                           std::to_string(r.max_residual) +
                           " exceeds tolerance");
  return r;
}

template <typename Values>
std::int64_t count_below(const Values& values, double x) {
  std::int64_t c = 0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(values.size()); ++i)
    if (values[i] < x) ++c;
  return c;
}

struct LanczosOptions {
  int count = 1;
  bool largest = false;
  double tol = 1e-10;
  std::uint64_t seed = kDefaultSeed;
  int ncv = 0;  // 0 = auto: min(dim, max(2*count+1, 40))
  std::uint64_t max_matvecs = 200000;
};

struct EigResult {
  Eigen::VectorXd values;     // ascending
  Eigen::MatrixXd vectors;    // columns match values
  Eigen::VectorXd residuals;  // true ||A y - theta y|| per pair
  std::uint64_t matvecs = 0;
};

namespace detail {

// Thick-restart Lanczos with full reorthogonalization for the smallest
// eigenpairs. The projected matrix T = V^T A V is accumulated from the
// reorthogonalization coefficients, which makes restarted bases (diagonal
// plus residual-coupling arrow) and replacement vectors after breakdown
// handled uniformly.
inline EigResult lanczos_smallest(const LinearMap& op, LanczosOptions opt) {
  const std::uint64_t dim = op.dimension;
  const Eigen::Index n = static_cast<Eigen::Index>(dim);
  const int count = opt.count;
  int ncv = opt.ncv > 0 ? opt.ncv
                        : static_cast<int>(std::min<std::uint64_t>(
                              dim, std::max(2 * count + 1, 40)));
  if (ncv <= count)
    ncv = static_cast<int>(std::min<std::uint64_t>(dim, count + 20));

  std::mt19937_64 rng(opt.seed);
  Eigen::MatrixXd v_basis(n, ncv);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(ncv, ncv);
  Eigen::VectorXd w(n), r(n);
  std::uint64_t matvecs = 0;
  double scale = 1.0;

  v_basis.col(0) = detail::random_vector(dim, rng).normalized();
  int m = 1;        // basis vectors present
  int filled = 0;   // T columns filled

  // Computes A*v_{m-1}, fills T column m-1, leaves the orthogonalized
  // remainder in r and returns its norm.
  auto extend = [&]() -> double {
    op.apply_fn(v_basis.col(m - 1).data(), w.data());
    ++matvecs;
    Eigen::VectorXd c = v_basis.leftCols(m).transpose() * w;
    w.noalias() -= v_basis.leftCols(m) * c;
    Eigen::VectorXd c2 = v_basis.leftCols(m).transpose() * w;
    w.noalias() -= v_basis.leftCols(m) * c2;
    c += c2;
    t.col(m - 1).head(m) = c;
    t.row(m - 1).head(m) = c.transpose();
    filled = m;
    r = w;
    return r.norm();
  };

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  EigResult out;
  while (true) {
    // Grow the basis to ncv columns.
    double beta = 0.0;
    while (m < ncv) {
      beta = extend();
      if (beta <= 1e-13 * std::max(1.0, scale)) {
        // Invariant subspace found: continue with a fresh direction.
        Eigen::VectorXd fresh = detail::random_vector(dim, rng);
        fresh.noalias() -= v_basis.leftCols(m) *
                           (v_basis.leftCols(m).transpose() * fresh);
        fresh.noalias() -= v_basis.leftCols(m) *
                           (v_basis.leftCols(m).transpose() * fresh);
        double fn = fresh.norm();
        if (fn <= 1e-13) break;  // space exhausted
        v_basis.col(m) = fresh / fn;
        t(m, m - 1) = t(m - 1, m) = 0.0;
        ++m;
      } else {
        v_basis.col(m) = r / beta;
        t(m, m - 1) = t(m - 1, m) = beta;
        ++m;
      }
    }
    beta = extend();  // fill the final T column; r is the residual direction

    es.compute(t.topLeftCorner(m, m));
    Eigen::VectorXd theta = es.eigenvalues();
    const Eigen::MatrixXd& s = es.eigenvectors();
    scale = std::max({scale, std::abs(theta[0]), std::abs(theta[m - 1])});

    int want = std::min(count, m);
    bool all_est_ok = true;
    for (int i = 0; i < want; ++i)
      if (beta * std::abs(s(m - 1, i)) > opt.tol * std::max(1.0, scale))
        all_est_ok = false;

    if (all_est_ok || matvecs >= opt.max_matvecs ||
        static_cast<std::uint64_t>(m) >= dim) {
      // Extract wanted pairs and verify true residuals.
      Eigen::MatrixXd y = v_basis.leftCols(m) * s.leftCols(want);
      Eigen::VectorXd resid(want);
      double worst = 0.0;
      for (int i = 0; i < want; ++i) {
        y.col(i).normalize();
        op.apply_fn(y.col(i).data(), w.data());
        ++matvecs;
        resid[i] = (w - theta[i] * y.col(i)).norm();
        worst = std::max(worst, resid[i]);
      }
      if (worst <= opt.tol * std::max(1.0, scale) ||
          static_cast<std::uint64_t>(m) >= dim) {
        out.values = theta.head(want);
        out.vectors = y;
        out.residuals = resid;
        out.matvecs = matvecs;
        if (worst > opt.tol * std::max(1.0, scale) * 10)
          throw std::runtime_error(
              "Lanczos residual " + std::to_string(worst) +
              " above tolerance after exhausting the space");
        return out;
      }
      if (matvecs >= opt.max_matvecs)
        throw std::runtime_error(
            "Lanczos did not converge " + std::to_string(count) +
            " eigenpairs within " + std::to_string(opt.max_matvecs) +
            " matvecs (worst residual " + std::to_string(worst) + ")");
    }

    // Thick restart: keep the wanted side plus a buffer, then append the
    // residual direction with its coupling row.
    int keep = std::min(ncv - 10, count + 20);
    keep = std::max(keep, 1);
    Eigen::MatrixXd y = v_basis.leftCols(m) * s.leftCols(keep);
    Eigen::VectorXd b(keep);
    for (int i = 0; i < keep; ++i) b[i] = beta * s(m - 1, i);
    v_basis.leftCols(keep) = y;
    t.setZero();
    for (int i = 0; i < keep; ++i) t(i, i) = theta[i];
    if (beta > 1e-13 * std::max(1.0, scale)) {
      v_basis.col(keep) = r / beta;
      for (int i = 0; i < keep; ++i) {
        t(keep, i) = b[i];
        t(i, keep) = b[i];
      }
      m = keep + 1;
    } else {
      Eigen::VectorXd fresh = detail::random_vector(dim, rng);
      fresh.noalias() -= v_basis.leftCols(keep) *
                         (v_basis.leftCols(keep).transpose() * fresh);
      fresh.noalias() -= v_basis.leftCols(keep) *
                         (v_basis.leftCols(keep).transpose() * fresh);
      v_basis.col(keep) = fresh.normalized();
      m = keep + 1;
    }
    filled = keep;  // columns beyond keep are refilled by extend()
    (void)filled;
  }
}

}  // namespace detail

// Extremal eigenpairs by thick-restart Lanczos with full reorthogonalization
// and a deterministic seed. Small problems fall back to the dense path.
// Every reported value carries a true-residual check; exactly degenerate
// eigenvalues may appear with reduced multiplicity (one copy per Krylov
// sequence), so use the dense path when exact multiplicities matter.
inline EigResult extremal_eigs(const LinearMap& op, LanczosOptions opt) {
  if (!op.hermitian)
    throw std::invalid_argument("extremal_eigs requires a hermitian map");
  if (opt.count < 1)
    throw std::invalid_argument("count must be >= 1, got " +
                                std::to_string(opt.count));
  if (static_cast<std::uint64_t>(opt.count) > op.dimension)
    throw std::invalid_argument("count " + std::to_string(opt.count) +
                                " exceeds dimension " +
                                std::to_string(op.dimension));
  const std::uint64_t dense_threshold =
      std::max<std::uint64_t>(64, 3 * static_cast<std::uint64_t>(opt.count));
  if (op.dimension <= dense_threshold && op.dimension <= kDefaultDenseCap) {
    SpectrumResult full = dense_spectrum(op);
    EigResult r;
    const Eigen::Index n = full.values.size();
    r.values.resize(opt.count);
    r.vectors.resize(n, opt.count);
    r.residuals = Eigen::VectorXd::Constant(opt.count, full.max_residual);
    for (int i = 0; i < opt.count; ++i) {
      Eigen::Index src = opt.largest ? n - opt.count + i : i;
      r.values[i] = full.values[src];
      r.vectors.col(i) = full.vectors.col(src);
    }
    r.matvecs = op.dimension;
    return r;
  }
  if (!opt.largest) return detail::lanczos_smallest(op, opt);
  LinearMap neg;
  neg.dimension = op.dimension;
  neg.hermitian = true;
  neg.apply_fn = [&op](const double* in, double* out) {
    op.apply_fn(in, out);
    const Eigen::Index n = static_cast<Eigen::Index>(op.dimension);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = -out[i];
  };
  EigResult r = detail::lanczos_smallest(neg, opt);
  // Map back: eigenvalues negate and ascend after reversal.
  Eigen::VectorXd vals(r.values.size());
  Eigen::MatrixXd vecs(r.vectors.rows(), r.vectors.cols());
  for (Eigen::Index i = 0; i < r.values.size(); ++i) {
    vals[i] = -r.values[r.values.size() - 1 - i];
    vecs.col(i) = r.vectors.col(r.values.size() - 1 - i);
  }
  r.values = vals;
  r.vectors = vecs;
  return r;
}

// All converged eigenvalues strictly below `upper`, plus at least one sentinel
// at or above it, found by growing the requested count adaptively.
inline Eigen::VectorXd eigenvalues_below(const LinearMap& op, double upper,
                                         LanczosOptions opt) {
  int count = std::max(8, opt.count);
  while (true) {
    if (static_cast<std::uint64_t>(count) >= op.dimension) {
      LanczosOptions o = opt;
      o.count = static_cast<int>(op.dimension);
      o.largest = false;
      return extremal_eigs(op, o).values;
    }
    LanczosOptions o = opt;
    o.count = count;
    o.largest = false;
    EigResult r = extremal_eigs(op, o);
    if (r.values[r.values.size() - 1] >= upper) return r.values;
    count = count + count / 2 + 4;
    if (count > 4000)
      throw std::length_error(
          "more than 4000 eigenvalues below threshold " +
          std::to_string(upper) + "; refusing to continue");
  }
}

// Positive-definite conjugate gradient solve; deterministic.
inline Eigen::VectorXd cg_solve(const LinearMap& op, const Eigen::VectorXd& b,
                                double tol = 1e-10,
                                std::uint64_t max_iters = 0) {
  const Eigen::Index n = static_cast<Eigen::Index>(op.dimension);
  if (b.size() != n)
    throw std::invalid_argument("cg_solve: rhs size mismatch");
  if (max_iters == 0) max_iters = 2 * op.dimension + 200;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd residual = b;
  Eigen::VectorXd p = residual, ap(n);
  double rr = residual.squaredNorm();
  double bnorm = std::sqrt(rr);
  if (bnorm == 0.0) return x;
  for (std::uint64_t it = 0; it < max_iters; ++it) {
    if (std::sqrt(rr) <= tol * bnorm) return x;
    op.apply_fn(p.data(), ap.data());
    double pap = p.dot(ap);
    if (!(pap > 0.0))
      throw std::runtime_error(
          "cg_solve: operator not positive definite (p'Ap = " +
          std::to_string(pap) + ")");
    double alpha = rr / pap;
    x += alpha * p;
    residual -= alpha * ap;
    double rr_new = residual.squaredNorm();
    p = residual + (rr_new / rr) * p;
    rr = rr_new;
  }
  throw std::runtime_error("cg_solve: no convergence within " +
                           std::to_string(max_iters) + " iterations");
}

struct ResolventOptions {
  std::uint64_t dense_cap = kDefaultDenseCap;
  double cg_tol = 1e-10;
  double power_tol = 1e-8;
  std::uint64_t seed = kDefaultSeed;
};

namespace detail {

inline void check_indices(const std::vector<std::uint64_t>& idx,
                          std::uint64_t dim, const char* name) {
  if (idx.empty())
    throw std::invalid_argument(std::string(name) + " index set is empty");
  for (std::uint64_t i : idx)
    if (i >= dim)
      throw std::out_of_range(std::string(name) + " index " +
                              std::to_string(i) + " outside [0," +
                              std::to_string(dim) + ")");
}

inline double smallest_eigenvalue(const LinearMap& op, std::uint64_t seed) {
  LanczosOptions o;
  o.count = 1;
  o.tol = 1e-9;
  o.seed = seed;
  return extremal_eigs(op, o).values[0];
}

}  // namespace detail

// Operator norm of the A-rows-by-B-columns block of (H - E)^{-1} for real E
// strictly below the spectrum. Dense path below dense_cap; otherwise power
// iteration on the block with CG solves.
inline double block_resolvent_norm(const LinearMap& op, double e,
                                   const std::vector<std::uint64_t>& rows_a,
                                   const std::vector<std::uint64_t>& cols_b,
                                   ResolventOptions ropt = {}) {
  detail::check_indices(rows_a, op.dimension, "rows_a");
  detail::check_indices(cols_b, op.dimension, "cols_b");
  const Eigen::Index n = static_cast<Eigen::Index>(op.dimension);

  if (op.dimension <= ropt.dense_cap) {
    Eigen::MatrixXd m = materialize(op, ropt.dense_cap);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    double lo = es.eigenvalues()[0];
    if (!(e < lo))
      throw std::invalid_argument("shift E=" + std::to_string(e) +
                                  " is not below the spectrum minimum " +
                                  std::to_string(lo));
    m.diagonal().array() -= e;
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(cols_b.size()));
    for (std::size_t j = 0; j < cols_b.size(); ++j)
      rhs(static_cast<Eigen::Index>(cols_b[j]), static_cast<Eigen::Index>(j)) = 1.0;
    Eigen::MatrixXd sol = llt.solve(rhs);
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows_a.size()), sol.cols());
    for (std::size_t i = 0; i < rows_a.size(); ++i)
      sub.row(static_cast<Eigen::Index>(i)) =
          sol.row(static_cast<Eigen::Index>(rows_a[i]));
    if (sub.rows() == 1 && sub.cols() == 1) return std::abs(sub(0, 0));
    Eigen::BDCSVD<Eigen::MatrixXd> svd(sub);
    return svd.singularValues()[0];
  }

  double lo = detail::smallest_eigenvalue(op, ropt.seed);
  if (!(e < lo))
    throw std::invalid_argument("shift E=" + std::to_string(e) +
                                " is not below the spectrum minimum " +
                                std::to_string(lo));
  LinearMap shifted;
  shifted.dimension = op.dimension;
  shifted.hermitian = true;
  shifted.apply_fn = [&op, e](const double* in, double* out) {
    op.apply_fn(in, out);
    const Eigen::Index nn = static_cast<Eigen::Index>(op.dimension);
    for (Eigen::Index i = 0; i < nn; ++i) out[i] -= e * in[i];
  };
  auto apply_r = [&](const Eigen::VectorXd& vb) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
    for (std::size_t j = 0; j < cols_b.size(); ++j)
      full[static_cast<Eigen::Index>(cols_b[j])] = vb[static_cast<Eigen::Index>(j)];
    Eigen::VectorXd y = cg_solve(shifted, full, ropt.cg_tol);
    Eigen::VectorXd wa(static_cast<Eigen::Index>(rows_a.size()));
    for (std::size_t i = 0; i < rows_a.size(); ++i)
      wa[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(rows_a[i])];
    return wa;
  };
  auto apply_rt = [&](const Eigen::VectorXd& va) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < rows_a.size(); ++i)
      full[static_cast<Eigen::Index>(rows_a[i])] = va[static_cast<Eigen::Index>(i)];
    Eigen::VectorXd y = cg_solve(shifted, full, ropt.cg_tol);
    Eigen::VectorXd wb(static_cast<Eigen::Index>(cols_b.size()));
    for (std::size_t j = 0; j < cols_b.size(); ++j)
      wb[static_cast<Eigen::Index>(j)] = y[static_cast<Eigen::Index>(cols_b[j])];
    return wb;
  };
  std::mt19937_64 rng(ropt.seed);
  Eigen::VectorXd v =
      detail::random_vector(cols_b.size(), rng).normalized();
  double sigma2 = 0.0;
  std::uint64_t cap = 10 * op.dimension + 100;
  for (std::uint64_t it = 0; it < cap; ++it) {
    Eigen::VectorXd w = apply_r(v);
    Eigen::VectorXd t = apply_rt(w);
    double lam = t.norm();
    if (lam == 0.0) return 0.0;
    v = t / lam;
    if (it > 0 && std::abs(lam - sigma2) <= ropt.power_tol * lam) {
      return std::sqrt(lam);
    }
    sigma2 = lam;
  }
  throw std::runtime_error("power iteration on the resolvent block did not "
                           "converge within " +
                           std::to_string(cap) + " iterations");
}

// Complex-shift variant: norm of the A,B block of (H - (e_re + i*e_im))^{-1}.
// Uses (A - i eps)^{-1} = (A + i eps)(A^2 + eps^2)^{-1} with CG on the SPD
// squared system when the dense path is unavailable.
inline double block_resolvent_norm(const LinearMap& op, std::complex<double> e,
                                   const std::vector<std::uint64_t>& rows_a,
                                   const std::vector<std::uint64_t>& cols_b,
                                   ResolventOptions ropt = {}) {
  if (e.imag() == 0.0)
    return block_resolvent_norm(op, e.real(), rows_a, cols_b, ropt);
  detail::check_indices(rows_a, op.dimension, "rows_a");
  detail::check_indices(cols_b, op.dimension, "cols_b");
  const Eigen::Index n = static_cast<Eigen::Index>(op.dimension);
  const double eps = e.imag();

  if (op.dimension <= ropt.dense_cap) {
    Eigen::MatrixXd m = materialize(op, ropt.dense_cap);
    Eigen::MatrixXcd mc = m.cast<std::complex<double>>();
    mc.diagonal().array() -= e;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(mc);
    Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(
        n, static_cast<Eigen::Index>(cols_b.size()));
    for (std::size_t j = 0; j < cols_b.size(); ++j)
      rhs(static_cast<Eigen::Index>(cols_b[j]), static_cast<Eigen::Index>(j)) = 1.0;
    Eigen::MatrixXcd sol = lu.solve(rhs);
    Eigen::MatrixXcd sub(static_cast<Eigen::Index>(rows_a.size()), sol.cols());
    for (std::size_t i = 0; i < rows_a.size(); ++i)
      sub.row(static_cast<Eigen::Index>(i)) =
          sol.row(static_cast<Eigen::Index>(rows_a[i]));
    if (sub.rows() == 1 && sub.cols() == 1) return std::abs(sub(0, 0));
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(sub);
    return svd.singularValues()[0];
  }

  // shifted = H - e_re; squared = shifted^2 + eps^2 (SPD).
  LinearMap shifted;
  shifted.dimension = op.dimension;
  shifted.hermitian = true;
  shifted.apply_fn = [&op, &e](const double* in, double* out) {
    op.apply_fn(in, out);
    const Eigen::Index nn = static_cast<Eigen::Index>(op.dimension);
    for (Eigen::Index i = 0; i < nn; ++i) out[i] -= e.real() * in[i];
  };
  LinearMap squared;
  squared.dimension = op.dimension;
  squared.hermitian = true;
  squared.apply_fn = [&shifted, eps, n](const double* in, double* out) {
    Eigen::VectorXd tmp(n);
    shifted.apply_fn(in, tmp.data());
    shifted.apply_fn(tmp.data(), out);
    for (Eigen::Index i = 0; i < n; ++i) out[i] += eps * eps * in[i];
  };
  // (shifted - i eps)^{-1} x = (shifted + i eps) (squared)^{-1} x.
  auto resolvent_apply = [&](const Eigen::VectorXcd& x) {
    Eigen::VectorXd ur = cg_solve(squared, x.real(), ropt.cg_tol);
    Eigen::VectorXd ui = cg_solve(squared, x.imag(), ropt.cg_tol);
    Eigen::VectorXd sr(n), si(n);
    shifted.apply_fn(ur.data(), sr.data());
    shifted.apply_fn(ui.data(), si.data());
    Eigen::VectorXcd out(n);
    out.real() = sr - eps * ui;
    out.imag() = si + eps * ur;
    return out;
  };
  // Adjoint: (shifted + i eps)^{-1} x = (shifted - i eps) (squared)^{-1} x.
  auto resolvent_adjoint = [&](const Eigen::VectorXcd& x) {
    Eigen::VectorXd ur = cg_solve(squared, x.real(), ropt.cg_tol);
    Eigen::VectorXd ui = cg_solve(squared, x.imag(), ropt.cg_tol);
    Eigen::VectorXd sr(n), si(n);
    shifted.apply_fn(ur.data(), sr.data());
    shifted.apply_fn(ui.data(), si.data());
    Eigen::VectorXcd out(n);
    out.real() = sr + eps * ui;
    out.imag() = si - eps * ur;
    return out;
  };
  auto embed_b = [&](const Eigen::VectorXcd& vb) {
    Eigen::VectorXcd full = Eigen::VectorXcd::Zero(n);
    for (std::size_t j = 0; j < cols_b.size(); ++j)
      full[static_cast<Eigen::Index>(cols_b[j])] = vb[static_cast<Eigen::Index>(j)];
    return full;
  };
  std::mt19937_64 rng(ropt.seed);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(cols_b.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v[i] = std::complex<double>(detail::canonical_unit(rng),
                                detail::canonical_unit(rng));
  v.normalize();
  double sigma2 = 0.0;
  std::uint64_t cap = 10 * op.dimension + 100;
  for (std::uint64_t it = 0; it < cap; ++it) {
    Eigen::VectorXcd y = resolvent_apply(embed_b(v));
    Eigen::VectorXcd wa = Eigen::VectorXcd::Zero(n);
    for (std::size_t i = 0; i < rows_a.size(); ++i) {
      Eigen::Index row = static_cast<Eigen::Index>(rows_a[i]);
      wa[row] = y[row];
    }
    Eigen::VectorXcd z = resolvent_adjoint(wa);
    Eigen::VectorXcd t(static_cast<Eigen::Index>(cols_b.size()));
    for (std::size_t j = 0; j < cols_b.size(); ++j)
      t[static_cast<Eigen::Index>(j)] = z[static_cast<Eigen::Index>(cols_b[j])];
    double lam = t.norm();
    if (lam == 0.0) return 0.0;
    v = t / lam;
    if (it > 0 && std::abs(lam - sigma2) <= ropt.power_tol * lam)
      return std::sqrt(lam);
    sigma2 = lam;
  }
  throw std::runtime_error("power iteration on the complex resolvent block "
                           "did not converge within " +
                           std::to_string(cap) + " iterations");
}

// Orthogonal projector onto eigenvectors with eigenvalue in (lo, hi). Both
// endpoints must stay at least `margin` away from every eigenvalue.
inline Eigen::MatrixXd spectral_projector(const LinearMap& op, double lo,
                                          double hi,
                                          std::uint64_t dense_cap = kDefaultDenseCap,
                                          double margin = 1e-9) {
  if (!(lo < hi))
    throw std::invalid_argument("spectral_projector: empty interval [" +
                                std::to_string(lo) + "," +
                                std::to_string(hi) + ")");
  SpectrumResult full = dense_spectrum(op, dense_cap);
  for (Eigen::Index i = 0; i < full.values.size(); ++i) {
    double v = full.values[i];
    if (std::abs(v - lo) < margin || std::abs(v - hi) < margin)
      throw std::invalid_argument(
          "projector endpoint within " + std::to_string(margin) +
          " of eigenvalue " + std::to_string(v) +
          "; shift the interval endpoints");
  }
  std::vector<Eigen::Index> sel;
  for (Eigen::Index i = 0; i < full.values.size(); ++i)
    if (full.values[i] > lo && full.values[i] < hi) sel.push_back(i);
  Eigen::MatrixXd basis(full.vectors.rows(),
                        static_cast<Eigen::Index>(sel.size()));
  for (std::size_t i = 0; i < sel.size(); ++i)
    basis.col(static_cast<Eigen::Index>(i)) = full.vectors.col(sel[i]);
  Eigen::MatrixXd q = basis * basis.transpose();
  double idem = (q * q - q).cwiseAbs().maxCoeff();
  double sym = (q - q.transpose()).cwiseAbs().maxCoeff();
  if (idem > 1e-10 || sym > 1e-10)
    throw std::logic_error("projector check failed: idempotency deviation " +
                           std::to_string(idem) + ", symmetry deviation " +
                           std::to_string(sym));
  return q;
}

// Band-edge extraction: smallest/largest entries of a sorted in-window
// spectrum that are corroborated by at least `min_supporters` further values
// within `support_window` on the band side. Uncorroborated extremes (isolated
// defect states) are skipped; with too few values the plain extremes are
// returned.
inline std::pair<double, double> extract_band_edges(
    const std::vector<double>& sorted_values, double support_window,
    int min_supporters = 2) {
  const int n = static_cast<int>(sorted_values.size());
  if (n == 0)
    throw std::invalid_argument("extract_band_edges: no values in window");
  if (n < min_supporters + 1)
    return {sorted_values.front(), sorted_values.back()};
  auto supported_low = [&](int i) {
    int c = 0;
    for (int j = i + 1; j < n; ++j)
      if (sorted_values[j] - sorted_values[i] <= support_window) ++c;
    return c >= min_supporters;
  };
  auto supported_high = [&](int i) {
    int c = 0;
    for (int j = i - 1; j >= 0; --j)
      if (sorted_values[i] - sorted_values[j] <= support_window) ++c;
    return c >= min_supporters;
  };
  int lo = 0, hi = n - 1;
  while (lo < n - 1 && !supported_low(lo)) ++lo;
  while (hi > 0 && !supported_high(hi)) --hi;
  if (lo > hi) return {sorted_values.front(), sorted_values.back()};
  return {sorted_values[static_cast<std::size_t>(lo)],
          sorted_values[static_cast<std::size_t>(hi)]};
}

}  // namespace xxz
