#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "xxz/combinatorics.hpp"
#include "xxz/graph.hpp"

namespace xxz {

inline constexpr std::uint64_t kDefaultDimensionCap = 50'000'000;
inline constexpr std::uint64_t kNeighborCacheCap = 150'000;

// Which surface measure to attach to a configuration:
//   window: S(X) counted in the given graph;
//   bulk:   N*bulk_degree - 2W(X), the surface X would have if every member
//           vertex had the stated bulk degree.
struct SurfaceMode {
  enum Kind { kWindow, kBulk } kind = kWindow;
  int bulk_degree = 0;

  static SurfaceMode window() { return {kWindow, 0}; }
  static SurfaceMode bulk(int bulk_degree) { return {kBulk, bulk_degree}; }
};

namespace detail {
// Runs fn(begin, end) over contiguous shards of [0, total). The shard
// boundaries depend only on (total, workers), so per-row results are
// identical for any worker count.
template <typename Fn>
void sharded_for(std::uint64_t total, int workers, Fn&& fn) {
  if (workers < 1) workers = 1;
  if (total == 0) return;
  std::uint64_t nw = std::min<std::uint64_t>(workers, total);
  if (nw == 1) {
    fn(std::uint64_t{0}, total);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nw));
  for (std::uint64_t w = 0; w < nw; ++w) {
    std::uint64_t b = total * w / nw;
    std::uint64_t e = total * (w + 1) / nw;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& t : pool) t.join();
}
}  // namespace detail

// N-particle symmetric product of a base graph: vertices are the N-element
// subsets of V(G) in colexicographic order; X ~ Y iff their symmetric
// difference is an edge of G.
class SymSpace {
 public:
  SymSpace(BaseGraph g, int N, std::uint64_t dimension_cap = kDefaultDimensionCap)
      : graph_(std::move(g)), n_(graph_.vertex_count()), N_(N) {
    if (N_ < 0 || N_ > n_)
      throw std::invalid_argument("particle number " + std::to_string(N_) +
                                  " outside [0," + std::to_string(n_) + "]");
    dim_ = binomial(n_, N_);  // throws std::overflow_error past 64 bits
    if (dim_ > dimension_cap)
      throw std::length_error("sector dimension C(" + std::to_string(n_) +
                              "," + std::to_string(N_) + ")=" +
                              std::to_string(dim_) + " exceeds cap " +
                              std::to_string(dimension_cap));
    binom_ = BinomialTable(n_, N_);
    if (dim_ <= kNeighborCacheCap && N_ > 0) build_cache();
  }

  const BaseGraph& base() const { return graph_; }
  int particles() const { return N_; }
  std::uint64_t dimension() const { return dim_; }

  std::uint64_t index(const Configuration& x) const {
    validate_configuration(x, n_);
    if (static_cast<int>(x.size()) != N_)
      throw std::invalid_argument("configuration size " +
                                  std::to_string(x.size()) +
                                  " does not match particle number " +
                                  std::to_string(N_));
    return colex_rank(x, binom_);
  }

  Configuration config(std::uint64_t rank) const {
    if (rank >= dim_)
      throw std::out_of_range("rank " + std::to_string(rank) +
                              " outside [0," + std::to_string(dim_) + ")");
    return colex_unrank(rank, n_, N_, binom_);
  }

  // Neighbors of X in the product graph, ordered by moved vertex (ascending
  // member of X) then by target vertex (ascending).
  std::vector<Configuration> neighbors(const Configuration& x) const {
    std::vector<Configuration> out;
    for_each_neighbor(x, [&](const Configuration& y, std::uint64_t) {
      out.push_back(y);
    });
    return out;
  }

  void neighbor_ranks(const Configuration& x,
                      std::vector<std::uint64_t>& out) const {
    out.clear();
    for_each_neighbor(x, [&](const Configuration&, std::uint64_t r) {
      out.push_back(r);
    });
  }

  // out = A_N * in. Shard boundaries are worker-count dependent but each row
  // is accumulated in its own fixed neighbor order, so results are exact-
  // arithmetic identical for any worker count.
  void apply_adjacency(const double* in, double* out, int workers = 1) const {
    if (N_ == 0) {
      out[0] = 0.0;
      return;
    }
    if (!cache_cols_.empty()) {
      detail::sharded_for(dim_, workers, [&](std::uint64_t b, std::uint64_t e) {
        for (std::uint64_t r = b; r < e; ++r) {
          double acc = 0.0;
          for (std::uint64_t p = cache_offsets_[r]; p < cache_offsets_[r + 1];
               ++p)
            acc += in[cache_cols_[p]];
          out[r] = acc;
        }
      });
      return;
    }
    detail::sharded_for(dim_, workers, [&](std::uint64_t b, std::uint64_t e) {
      Configuration x = colex_unrank(b, n_, N_, binom_);
      for (std::uint64_t r = b; r < e; ++r) {
        double acc = 0.0;
        for_each_neighbor(x, [&](const Configuration&, std::uint64_t rr) {
          acc += in[rr];
        });
        out[r] = acc;
        if (r + 1 < e) next_configuration(x, n_);
      }
    });
  }

  // S(X) per rank under the given measure; as doubles for operator use.
  std::vector<double> surface_vector(SurfaceMode mode = SurfaceMode::window(),
                                     int workers = 1) const {
    std::vector<int> s = surface_values(mode, workers);
    return std::vector<double>(s.begin(), s.end());
  }

  std::vector<int> surface_values(SurfaceMode mode = SurfaceMode::window(),
                                  int workers = 1) const {
    if (mode.kind == SurfaceMode::kBulk)
      require_bulk_degree(graph_, mode.bulk_degree);
    std::vector<int> s(static_cast<std::size_t>(dim_), 0);
    if (N_ == 0) return s;
    detail::sharded_for(dim_, workers, [&](std::uint64_t b, std::uint64_t e) {
      Configuration x = colex_unrank(b, n_, N_, binom_);
      std::vector<char> in(static_cast<std::size_t>(n_), 0);
      for (int v : x) in[static_cast<std::size_t>(v)] = 1;
      for (std::uint64_t r = b; r < e; ++r) {
        int dtot = 0, w2 = 0;
        for (int v : x) {
          dtot += graph_.degree(v);
          for (int u : graph_.adjacency(v))
            if (in[static_cast<std::size_t>(u)]) ++w2;
        }
        s[r] = (mode.kind == SurfaceMode::kBulk)
                   ? N_ * mode.bulk_degree - w2
                   : dtot - w2;
        if (r + 1 < e) {
          for (int v : x) in[static_cast<std::size_t>(v)] = 0;
          next_configuration(x, n_);
          for (int v : x) in[static_cast<std::size_t>(v)] = 1;
        }
      }
    });
    return s;
  }

 private:
  template <typename Fn>
  void for_each_neighbor(const Configuration& x, Fn&& fn) const {
    thread_local Configuration y;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (int t : graph_.adjacency(x[i])) {
        if (std::find(x.begin(), x.end(), t) != x.end()) continue;
        y = x;
        y[i] = t;
        // Re-sort the single displaced member.
        for (std::size_t j = i; j + 1 < y.size() && y[j] > y[j + 1]; ++j)
          std::swap(y[j], y[j + 1]);
        for (std::size_t j = i; j > 0 && y[j] < y[j - 1]; --j)
          std::swap(y[j], y[j - 1]);
        fn(static_cast<const Configuration&>(y), colex_rank(y, binom_));
      }
    }
  }

  void build_cache() {
    cache_offsets_.assign(static_cast<std::size_t>(dim_) + 1, 0);
    std::vector<std::uint64_t> tmp;
    Configuration x = colex_unrank(0, n_, N_, binom_);
    std::vector<std::vector<std::uint32_t>> rows(
        static_cast<std::size_t>(dim_));
    for (std::uint64_t r = 0; r < dim_; ++r) {
      for_each_neighbor(x, [&](const Configuration&, std::uint64_t rr) {
        rows[r].push_back(static_cast<std::uint32_t>(rr));
      });
      next_configuration(x, n_);
    }
    std::uint64_t nnz = 0;
    for (std::uint64_t r = 0; r < dim_; ++r) {
      cache_offsets_[r] = nnz;
      nnz += rows[r].size();
    }
    cache_offsets_[dim_] = nnz;
    cache_cols_.reserve(nnz);
    for (std::uint64_t r = 0; r < dim_; ++r)
      cache_cols_.insert(cache_cols_.end(), rows[r].begin(), rows[r].end());
  }

  BaseGraph graph_;
  int n_ = 0;
  int N_ = 0;
  std::uint64_t dim_ = 0;
  BinomialTable binom_;
  std::vector<std::uint64_t> cache_offsets_;
  std::vector<std::uint32_t> cache_cols_;
};

// Multi-source BFS distances over the product graph; -1 marks unreachable.
inline std::vector<std::int32_t> distances_from(
    const SymSpace& space, const std::vector<std::uint64_t>& sources) {
  if (sources.empty())
    throw std::invalid_argument("distances_from: source set is empty");
  std::vector<std::int32_t> dist(static_cast<std::size_t>(space.dimension()),
                                 -1);
  std::queue<std::uint64_t> q;
  for (std::uint64_t s : sources) {
    if (s >= space.dimension())
      throw std::out_of_range("source rank " + std::to_string(s) +
                              " outside [0," +
                              std::to_string(space.dimension()) + ")");
    if (dist[s] < 0) {
      dist[s] = 0;
      q.push(s);
    }
  }
  std::vector<std::uint64_t> nbr;
  while (!q.empty()) {
    std::uint64_t r = q.front();
    q.pop();
    space.neighbor_ranks(space.config(r), nbr);
    for (std::uint64_t rr : nbr)
      if (dist[rr] < 0) {
        dist[rr] = dist[r] + 1;
        q.push(rr);
      }
  }
  return dist;
}

// Graph distance in the product graph between two configurations.
inline int bfs_distance(const SymSpace& space, const Configuration& x,
                        const Configuration& y) {
  std::uint64_t target = space.index(y);
  std::vector<std::int32_t> dist =
      distances_from(space, {space.index(x)});
  return dist[target];
}

namespace detail {
// O(n^3) Hungarian algorithm (potentials form), square cost matrix.
inline long long hungarian(const std::vector<std::vector<int>>& cost) {
  int n = static_cast<int>(cost.size());
  const long long kInf = std::numeric_limits<long long>::max() / 4;
  std::vector<long long> u(static_cast<std::size_t>(n) + 1, 0),
      v(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> p(static_cast<std::size_t>(n) + 1, 0),
      way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<long long> minv(static_cast<std::size_t>(n) + 1, kInf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      int i0 = p[static_cast<std::size_t>(j0)], j1 = -1;
      long long delta = kInf;
      for (int j = 1; j <= n; ++j)
        if (!used[static_cast<std::size_t>(j)]) {
          long long cur = cost[static_cast<std::size_t>(i0 - 1)]
                              [static_cast<std::size_t>(j - 1)] -
                          u[static_cast<std::size_t>(i0)] -
                          v[static_cast<std::size_t>(j)];
          if (cur < minv[static_cast<std::size_t>(j)]) {
            minv[static_cast<std::size_t>(j)] = cur;
            way[static_cast<std::size_t>(j)] = j0;
          }
          if (minv[static_cast<std::size_t>(j)] < delta) {
            delta = minv[static_cast<std::size_t>(j)];
            j1 = j;
          }
        }
      for (int j = 0; j <= n; ++j)
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0);
  }
  long long total = 0;
  for (int j = 1; j <= n; ++j)
    total += cost[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)]
                 [static_cast<std::size_t>(j - 1)];
  return total;
}
}  // namespace detail

// Minimum-cost perfect matching between X and Y under base-graph distance:
// equals the product-graph distance between the configurations.
inline int assignment_distance(const BaseGraph& g, const Configuration& x,
                               const Configuration& y) {
  validate_configuration(x, g.vertex_count());
  validate_configuration(y, g.vertex_count());
  if (x.size() != y.size())
    throw std::invalid_argument("configurations have different sizes " +
                                std::to_string(x.size()) + " and " +
                                std::to_string(y.size()));
  if (x.empty()) return 0;
  int N = static_cast<int>(x.size());
  std::vector<std::vector<int>> cost(static_cast<std::size_t>(N),
                                     std::vector<int>(static_cast<std::size_t>(N)));
  for (int i = 0; i < N; ++i) {
    std::vector<int> d = bfs_distances(g, x[static_cast<std::size_t>(i)]);
    for (int j = 0; j < N; ++j)
      cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          d[static_cast<std::size_t>(y[static_cast<std::size_t>(j)])];
  }
  return static_cast<int>(detail::hungarian(cost));
}

}  // namespace xxz
