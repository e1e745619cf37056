#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <bit>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "xxz/linear_map.hpp"
#include "xxz/sym_space.hpp"

namespace xxz {

inline constexpr int kFullSpinCap = 14;

// Droplet regularization: adds +lambda on configurations whose surface (under
// droplet_measure) is strictly below d_min + k.
struct Regularization {
  int k = 0;
  double lambda = 0.0;
  int d_min = 0;
  std::string d_min_source;  // how d_min was obtained (brute force, analytic, user)
  SurfaceMode droplet_measure = SurfaceMode::window();
};

struct HamiltonianSpec {
  BaseGraph base;
  int particles = 1;
  double delta = 2.0;
  std::vector<double> field;  // empty = no on-site potential
  std::optional<Regularization> regularization;
  std::uint64_t dimension_cap = kDefaultDimensionCap;
};

inline double lambda_floor(double delta, int k) {
  return 0.5 * k * (1.0 - 1.0 / delta);
}

// N-particle sector Hamiltonian: diag(S/2 + V + lambda*1_droplet) - g*A_N,
// with g = 1/(2*Delta).
class HamiltonianOp {
 public:
  explicit HamiltonianOp(HamiltonianSpec spec, int workers = 1)
      : spec_(std::move(spec)),
        space_(spec_.base, spec_.particles, spec_.dimension_cap) {
    if (!(spec_.delta > 1.0))
      throw std::invalid_argument("delta must be > 1 (Ising phase), got " +
                                  std::to_string(spec_.delta));
    g_ = 0.5 / spec_.delta;
    if (!spec_.field.empty()) validate_field(spec_.base, spec_.field);
    const std::uint64_t dim = space_.dimension();

    std::vector<int> s_win = space_.surface_values(SurfaceMode::window(), workers);
    diag_ = Eigen::VectorXd(static_cast<Eigen::Index>(dim));
    detail::sharded_for(dim, workers, [&](std::uint64_t b, std::uint64_t e) {
      if (space_.particles() == 0) {
        for (std::uint64_t r = b; r < e; ++r)
          diag_[static_cast<Eigen::Index>(r)] = 0.0;
        return;
      }
      Configuration x = space_.config(b);
      for (std::uint64_t r = b; r < e; ++r) {
        double d = 0.5 * s_win[r];
        if (!spec_.field.empty())
          for (int v : x) d += spec_.field[static_cast<std::size_t>(v)];
        diag_[static_cast<Eigen::Index>(r)] = d;
        if (r + 1 < e) next_configuration(x, spec_.base.vertex_count());
      }
    });

    if (spec_.regularization) {
      const Regularization& reg = *spec_.regularization;
      if (reg.k < 0)
        throw std::invalid_argument("regularization k must be >= 0, got " +
                                    std::to_string(reg.k));
      if (reg.d_min < 0)
        throw std::invalid_argument("regularization d_min must be >= 0, got " +
                                    std::to_string(reg.d_min));
      double floor = lambda_floor(spec_.delta, reg.k);
      if (reg.lambda < floor - 1e-12)
        throw std::invalid_argument(
            "regularization lambda " + std::to_string(reg.lambda) +
            " below floor k(1-1/Delta)/2 = " + std::to_string(floor));
      std::vector<int> s_drop =
          space_.surface_values(reg.droplet_measure, workers);
      droplet_.assign(static_cast<std::size_t>(dim), 0);
      for (std::uint64_t r = 0; r < dim; ++r)
        if (s_drop[r] < reg.d_min + reg.k) {
          droplet_[r] = 1;
          diag_[static_cast<Eigen::Index>(r)] += reg.lambda;
        }
    }
  }

  const HamiltonianSpec& spec() const { return spec_; }
  const SymSpace& space() const { return space_; }
  std::uint64_t dimension() const { return space_.dimension(); }
  double g() const { return g_; }
  const Eigen::VectorXd& diagonal() const { return diag_; }

  // 1 on the regularized droplet set; empty when unregularized.
  const std::vector<char>& droplet_indicator() const { return droplet_; }

  void apply(const double* in, double* out, int workers = 1) const {
    space_.apply_adjacency(in, out, workers);
    const std::uint64_t dim = space_.dimension();
    detail::sharded_for(dim, workers, [&](std::uint64_t b, std::uint64_t e) {
      for (std::uint64_t r = b; r < e; ++r)
        out[r] = diag_[static_cast<Eigen::Index>(r)] * in[r] - g_ * out[r];
    });
  }

  // The returned map references *this; keep the operator alive while in use.
  LinearMap map(int workers = 1) const {
    LinearMap m;
    m.dimension = space_.dimension();
    m.hermitian = true;
    m.apply_fn = [this, workers](const double* in, double* out) {
      apply(in, out, workers);
    };
    return m;
  }

 private:
  HamiltonianSpec spec_;
  SymSpace space_;
  double g_ = 0.0;
  Eigen::VectorXd diag_;
  std::vector<char> droplet_;
};

inline HamiltonianOp build_hamiltonian(HamiltonianSpec spec, int workers = 1) {
  return HamiltonianOp(std::move(spec), workers);
}

// Full 2^n spin Hamiltonian over bitmask basis (bit x set = particle at x):
// sum over edges of [ -n_x n_y + (n_x + n_y)/2 - (flip-flop)/(2*Delta) ],
// plus the on-site potential.
inline Eigen::SparseMatrix<double> full_spin_hamiltonian(
    const BaseGraph& g, double delta, const std::vector<double>& field = {},
    int vertex_cap = kFullSpinCap) {
  if (!(delta > 1.0))
    throw std::invalid_argument("delta must be > 1 (Ising phase), got " +
                                std::to_string(delta));
  if (g.vertex_count() > vertex_cap)
    throw std::length_error("full spin space 2^" +
                            std::to_string(g.vertex_count()) +
                            " exceeds vertex cap " + std::to_string(vertex_cap));
  if (!field.empty()) validate_field(g, field);
  const int n = g.vertex_count();
  const std::uint64_t dim = std::uint64_t{1} << n;
  const double hop = -0.5 / delta;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(dim) * (g.edge_count() + 1));
  for (std::uint64_t m = 0; m < dim; ++m) {
    double diag = 0.0;
    for (const auto& e : g.edges()) {
      bool bx = (m >> e[0]) & 1, by = (m >> e[1]) & 1;
      if (bx != by) {
        diag += 0.5;
        std::uint64_t m2 = m ^ (std::uint64_t{1} << e[0]) ^
                           (std::uint64_t{1} << e[1]);
        trips.emplace_back(static_cast<int>(m), static_cast<int>(m2), hop);
      }
      // bx == by contributes -1 + 1/2 + 1/2 = 0 (occupied) or 0 (empty).
    }
    if (!field.empty())
      for (int x = 0; x < n; ++x)
        if ((m >> x) & 1) diag += field[static_cast<std::size_t>(x)];
    if (diag != 0.0)
      trips.emplace_back(static_cast<int>(m), static_cast<int>(m), diag);
  }
  Eigen::SparseMatrix<double> h(static_cast<Eigen::Index>(dim),
                                static_cast<Eigen::Index>(dim));
  h.setFromTriplets(trips.begin(), trips.end());
  return h;
}

struct SectorReport {
  double max_leakage = 0.0;               // largest |entry| between sectors
  std::vector<double> block_deviation;    // per N: max |full block - sector op|
  double max_deviation = 0.0;
};

// Checks that the full spin Hamiltonian is block-diagonal over particle
// sectors and that each block reproduces the symmetric-product construction.
// Leakage above 1e-12 is a structural failure and throws.
inline SectorReport sector_blocks(const Eigen::SparseMatrix<double>& full,
                                  const BaseGraph& g, double delta,
                                  const std::vector<double>& field = {}) {
  const int n = g.vertex_count();
  const std::uint64_t dim = std::uint64_t{1} << n;
  if (static_cast<std::uint64_t>(full.rows()) != dim ||
      static_cast<std::uint64_t>(full.cols()) != dim)
    throw std::invalid_argument(
        "full matrix dimension " + std::to_string(full.rows()) +
        " does not match 2^" + std::to_string(n));

  // Rank of each mask inside its particle sector (colex order of bit sets).
  BinomialTable binom(n, n);
  std::vector<std::uint64_t> sector_rank(static_cast<std::size_t>(dim));
  for (std::uint64_t m = 0; m < dim; ++m) {
    Configuration x;
    for (int v = 0; v < n; ++v)
      if ((m >> v) & 1) x.push_back(v);
    sector_rank[m] = colex_rank(x, binom);
  }

  SectorReport rep;
  rep.block_deviation.assign(static_cast<std::size_t>(n) + 1, 0.0);
  for (int N = 0; N <= n; ++N) {
    std::uint64_t bd = binomial(n, N);
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(bd), static_cast<Eigen::Index>(bd));
    for (int col = 0; col < full.outerSize(); ++col) {
      int pc_col = std::popcount(static_cast<std::uint64_t>(col));
      for (Eigen::SparseMatrix<double>::InnerIterator it(full, col); it;
           ++it) {
        int pc_row = std::popcount(static_cast<std::uint64_t>(it.row()));
        if (pc_row != pc_col) {
          rep.max_leakage = std::max(rep.max_leakage, std::abs(it.value()));
          continue;
        }
        if (pc_col == N)
          block(static_cast<Eigen::Index>(
                    sector_rank[static_cast<std::uint64_t>(it.row())]),
                static_cast<Eigen::Index>(
                    sector_rank[static_cast<std::uint64_t>(col)])) +=
              it.value();
      }
    }
    HamiltonianSpec spec{g};
    spec.particles = N;
    spec.delta = delta;
    spec.field = field;
    HamiltonianOp op(spec);
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bd));
    Eigen::VectorXd col(static_cast<Eigen::Index>(bd));
    double dev = 0.0;
    for (std::uint64_t c = 0; c < bd; ++c) {
      unit[static_cast<Eigen::Index>(c)] = 1.0;
      op.apply(unit.data(), col.data());
      unit[static_cast<Eigen::Index>(c)] = 0.0;
      dev = std::max(
          dev, (block.col(static_cast<Eigen::Index>(c)) - col).cwiseAbs().maxCoeff());
    }
    rep.block_deviation[static_cast<std::size_t>(N)] = dev;
    rep.max_deviation = std::max(rep.max_deviation, dev);
  }
  if (rep.max_leakage > 1e-12)
    throw std::logic_error(
        "particle-sector leakage " + std::to_string(rep.max_leakage) +
        " exceeds 1e-12: full Hamiltonian is not block-diagonal");
  return rep;
}

}  // namespace xxz
