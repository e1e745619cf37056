#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "xxz/hamiltonian.hpp"
#include "xxz/spectral.hpp"
#include "xxz/sym_space.hpp"

namespace xxz {

struct Partition {
  std::vector<std::uint64_t> v1;  // large-surface side
  std::vector<std::uint64_t> v2;  // small-surface side (candidate droplets)
  std::string descriptor;
};

// V2 = {X : S(X) <= cutoff} under the given measure, V1 the complement.
inline Partition partition_by_surface(const SymSpace& space, SurfaceMode mode,
                                      int cutoff) {
  std::vector<int> s = space.surface_values(mode);
  Partition p;
  for (std::uint64_t r = 0; r < space.dimension(); ++r)
    (s[r] <= cutoff ? p.v2 : p.v1).push_back(r);
  p.descriptor =
      (mode.kind == SurfaceMode::kBulk
           ? "bulk(" + std::to_string(mode.bulk_degree) + ")"
           : std::string("window")) +
      " surface <= " + std::to_string(cutoff);
  if (p.v1.empty() || p.v2.empty())
    throw std::invalid_argument(
        "surface partition at cutoff " + std::to_string(cutoff) +
        " leaves one side empty (|V1|=" + std::to_string(p.v1.size()) +
        ", |V2|=" + std::to_string(p.v2.size()) + ")");
  return p;
}

struct BoundaryDegrees {
  int d1 = 0;  // max neighbors in V2 from a V1 configuration
  int d2 = 0;  // max neighbors in V1 from a V2 configuration
};

inline BoundaryDegrees boundary_degrees(const SymSpace& space,
                                        const Partition& part) {
  std::vector<char> in_v2(static_cast<std::size_t>(space.dimension()), 0);
  for (std::uint64_t r : part.v2) in_v2[r] = 1;
  BoundaryDegrees bd;
  std::vector<std::uint64_t> nbr;
  for (std::uint64_t r : part.v1) {
    int c = 0;
    space.neighbor_ranks(space.config(r), nbr);
    for (std::uint64_t t : nbr)
      if (in_v2[t]) ++c;
    bd.d1 = std::max(bd.d1, c);
  }
  for (std::uint64_t r : part.v2) {
    int c = 0;
    space.neighbor_ranks(space.config(r), nbr);
    for (std::uint64_t t : nbr)
      if (!in_v2[t]) ++c;
    bd.d2 = std::max(bd.d2, c);
  }
  return bd;
}

// Operator norm of the adjacency restricted to V2. With use_degree_bound the
// exact norm is replaced by the internal max-degree upper bound.
inline double restricted_adjacency_norm(const SymSpace& space,
                                        const std::vector<std::uint64_t>& v2,
                                        bool use_degree_bound = false,
                                        std::uint64_t dense_cap = kDefaultDenseCap) {
  if (v2.empty()) return 0.0;
  std::vector<char> in_v2(static_cast<std::size_t>(space.dimension()), 0);
  for (std::uint64_t r : v2) in_v2[r] = 1;
  std::vector<std::uint64_t> nbr;
  if (use_degree_bound) {
    int dmax = 0;
    for (std::uint64_t r : v2) {
      int c = 0;
      space.neighbor_ranks(space.config(r), nbr);
      for (std::uint64_t t : nbr)
        if (in_v2[t]) ++c;
      dmax = std::max(dmax, c);
    }
    return static_cast<double>(dmax);
  }
  std::vector<std::uint64_t> pos(static_cast<std::size_t>(space.dimension()),
                                 0);
  for (std::size_t i = 0; i < v2.size(); ++i) pos[v2[i]] = i;
  const std::uint64_t m = v2.size();
  if (m <= dense_cap) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                              static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < v2.size(); ++i) {
      space.neighbor_ranks(space.config(v2[i]), nbr);
      for (std::uint64_t t : nbr)
        if (in_v2[t])
          a(static_cast<Eigen::Index>(i),
            static_cast<Eigen::Index>(pos[t])) = 1.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    double lo = es.eigenvalues()[0];
    double hi = es.eigenvalues()[es.eigenvalues().size() - 1];
    return std::max(std::abs(lo), std::abs(hi));
  }
  // Matrix-free extremal eigenvalues of the restriction.
  LinearMap restricted;
  restricted.dimension = m;
  restricted.hermitian = true;
  restricted.apply_fn = [&space, &v2, &in_v2, &pos](const double* in,
                                                    double* out) {
    std::vector<std::uint64_t> local;
    for (std::size_t i = 0; i < v2.size(); ++i) {
      double acc = 0.0;
      space.neighbor_ranks(space.config(v2[i]), local);
      for (std::uint64_t t : local)
        if (in_v2[t]) acc += in[pos[t]];
      out[i] = acc;
    }
  };
  LanczosOptions lo_opt;
  lo_opt.count = 1;
  lo_opt.tol = 1e-9;
  double lo = extremal_eigs(restricted, lo_opt).values[0];
  lo_opt.largest = true;
  double hi = extremal_eigs(restricted, lo_opt).values[0];
  return std::max(std::abs(lo), std::abs(hi));
}

struct GapCertificate {
  double g = 0.0;
  double a = 0.0;        // min over V1 of (U - g S_window)
  double b = 0.0;        // max over V2 of U, plus g*a2_norm
  int d1 = 0;
  int d2 = 0;
  double a2_norm = 0.0;
  std::string a2_source;  // "exact" or "degree-bound"
  bool empty = true;
  std::string empty_reason;
  double interval_lo = 0.0;
  double interval_hi = 0.0;
  std::uint64_t v1_size = 0;
  std::uint64_t v2_size = 0;
  std::string partition_descriptor;
};

inline constexpr double kCertificateGuard = 1e-12;

// Interval of certified resolvent set from the one-sided bounds: roots of
// (a - E)(E - b) = g^2 d1 d2, shrunk by a guard band.
inline GapCertificate certify_from_bounds(double g, double a, double b,
                                          int d1, int d2, double a2_norm,
                                          const std::string& a2_source = "exact") {
  GapCertificate c;
  c.g = g;
  c.a = a;
  c.b = b;
  c.d1 = d1;
  c.d2 = d2;
  c.a2_norm = a2_norm;
  c.a2_source = a2_source;
  if (!(a > b)) {
    c.empty = true;
    c.empty_reason = "droplet-side bound b=" + std::to_string(b) +
                     " reaches the bulk-side bound a=" + std::to_string(a);
    return c;
  }
  double mid = 0.5 * (a + b);
  double disc = 0.25 * (a - b) * (a - b) - g * g * d1 * d2;
  if (!(disc > 0.0)) {
    c.empty = true;
    c.empty_reason = "boundary coupling g^2 d1 d2 closes the interval";
    return c;
  }
  double lo = mid - std::sqrt(disc) + kCertificateGuard;
  double hi = mid + std::sqrt(disc) - kCertificateGuard;
  if (!(lo < hi)) {
    c.empty = true;
    c.empty_reason = "certified interval thinner than the guard band";
    return c;
  }
  c.empty = false;
  c.interval_lo = lo;
  c.interval_hi = hi;
  return c;
}

inline GapCertificate certify(const HamiltonianOp& op, const Partition& part,
                              bool use_degree_bound_a2 = false) {
  const SymSpace& space = op.space();
  std::vector<int> s_win = space.surface_values(SurfaceMode::window());
  const Eigen::VectorXd& u = op.diagonal();
  double a = std::numeric_limits<double>::infinity();
  for (std::uint64_t r : part.v1)
    a = std::min(a, u[static_cast<Eigen::Index>(r)] - op.g() * s_win[r]);
  double bmax = -std::numeric_limits<double>::infinity();
  for (std::uint64_t r : part.v2)
    bmax = std::max(bmax, u[static_cast<Eigen::Index>(r)]);
  BoundaryDegrees bd = boundary_degrees(space, part);
  double a2 = restricted_adjacency_norm(space, part.v2, use_degree_bound_a2);
  GapCertificate c =
      certify_from_bounds(op.g(), a, bmax + op.g() * a2, bd.d1, bd.d2, a2,
                          use_degree_bound_a2 ? "degree-bound" : "exact");
  c.v1_size = part.v1.size();
  c.v2_size = part.v2.size();
  c.partition_descriptor = part.descriptor;
  return c;
}

// Closed-form certified interval for the infinite chain above the k-cluster
// band: gamma_pm = k + (1-1/Delta)/2 -+ sqrt((Delta-1)(Delta-(4k+1)))/(2 Delta),
// valid for Delta > 4k+1.
inline std::pair<double, double> chain_gamma(double delta, int k) {
  if (k < 1)
    throw std::invalid_argument("k must be >= 1, got " + std::to_string(k));
  if (!(delta > 4.0 * k + 1.0))
    throw std::invalid_argument(
        "chain_gamma requires Delta > 4k+1 = " + std::to_string(4 * k + 1) +
        ", got Delta = " + std::to_string(delta));
  double mid = k + 0.5 * (1.0 - 1.0 / delta);
  double rad =
      std::sqrt((delta - 1.0) * (delta - (4.0 * k + 1.0))) / (2.0 * delta);
  return {mid - rad, mid + rad};
}

// Bulk-parameter certificate for the chain at cluster number k:
// a = (k+1)(1-1/Delta), b = k(1+1/Delta), d1 d2 = 4k^2. Reproduces
// chain_gamma exactly.
inline GapCertificate chain_bulk_certificate(double delta, int k) {
  if (k < 1)
    throw std::invalid_argument("k must be >= 1, got " + std::to_string(k));
  if (!(delta > 1.0))
    throw std::invalid_argument("delta must be > 1, got " +
                                std::to_string(delta));
  double g = 0.5 / delta;
  double a = (k + 1) * (1.0 - 1.0 / delta);
  double b = k * (1.0 + 1.0 / delta);
  GapCertificate c =
      certify_from_bounds(g, a, b, 2 * k, 2 * k, 2.0 * k, "bulk");
  c.partition_descriptor = "chain bulk quantities, k=" + std::to_string(k);
  return c;
}

struct CertificateVerification {
  bool pass = false;
  std::int64_t eigs_inside = 0;       // clause (i): must be 0
  std::int64_t count_below_upper = 0; // clause (ii): must be >= v2_size
  std::uint64_t v2_size = 0;
  double nearest_below = 0.0;  // largest eigenvalue <= interval_lo
  double nearest_above = 0.0;  // smallest eigenvalue >= interval_hi
};

// Checks a certificate against an exact (ascending) spectrum.
inline CertificateVerification verify_certificate(
    const GapCertificate& cert, const std::vector<double>& eigenvalues) {
  if (cert.empty)
    throw std::invalid_argument(
        "cannot verify an empty certificate: " + cert.empty_reason);
  CertificateVerification v;
  v.v2_size = cert.v2_size;
  v.nearest_below = -std::numeric_limits<double>::infinity();
  v.nearest_above = std::numeric_limits<double>::infinity();
  for (double e : eigenvalues) {
    if (e > cert.interval_lo && e < cert.interval_hi) ++v.eigs_inside;
    if (e <= cert.interval_lo) v.nearest_below = std::max(v.nearest_below, e);
    if (e >= cert.interval_hi) v.nearest_above = std::min(v.nearest_above, e);
    if (e < cert.interval_hi) ++v.count_below_upper;
  }
  v.pass = (v.eigs_inside == 0) &&
           (v.count_below_upper >= static_cast<std::int64_t>(cert.v2_size));
  return v;
}

}  // namespace xxz
