#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "xxz/combinatorics.hpp"
#include "xxz/graph.hpp"

namespace xxz {

inline constexpr std::uint64_t kDefaultEnumCap = 10'000'000;

enum class EnumConstraint {
  kNone,  // all N-subsets of the window
  kBulk,  // members restricted to vertices of maximal (bulk) degree
};

struct DropletCatalog {
  int particles = 0;
  EnumConstraint constraint = EnumConstraint::kNone;
  int bulk_degree = 0;  // degree defining the bulk under kBulk
  int d_min = 0;
  int second_level = -1;  // next surface level above d_min; -1 if none seen
  int k_max = 0;          // sublevel sets stored for k = 0..k_max
  std::vector<Configuration> minimizers;             // colex order
  std::map<int, std::vector<Configuration>> k_sets;  // k -> {X : S < d_min+k}
  std::map<int, std::uint64_t> level_counts;         // surface value -> count
};

// Exhaustive edge-isoperimetric scan at fixed particle number. Under the bulk
// constraint, members are restricted to vertices of maximal degree, so the
// window surface coincides with the infinite-lattice surface. The full range
// is always scanned (exact second level requires it).
inline DropletCatalog brute_force_surface_levels(
    const BaseGraph& g, int N, EnumConstraint constraint,
    std::uint64_t enum_cap = kDefaultEnumCap, int k_max = 4) {
  if (N < 1)
    throw std::invalid_argument("particle number must be >= 1, got " +
                                std::to_string(N));
  std::vector<int> domain;
  for (int v = 0; v < g.vertex_count(); ++v)
    if (constraint == EnumConstraint::kNone || g.degree(v) == g.max_degree())
      domain.push_back(v);
  if (constraint == EnumConstraint::kBulk && domain.empty())
    throw std::invalid_argument(
        "bulk constraint is empty: no vertex has the bulk degree " +
        std::to_string(g.max_degree()));
  if (static_cast<int>(domain.size()) < N)
    throw std::invalid_argument(
        "bulk constraint admits only " + std::to_string(domain.size()) +
        " vertices, fewer than N=" + std::to_string(N));
  std::uint64_t total = binomial(static_cast<int>(domain.size()), N);
  if (total > enum_cap)
    throw std::length_error("enumeration size C(" +
                            std::to_string(domain.size()) + "," +
                            std::to_string(N) + ")=" + std::to_string(total) +
                            " exceeds cap " + std::to_string(enum_cap));

  DropletCatalog cat;
  cat.particles = N;
  cat.constraint = constraint;
  cat.bulk_degree = g.max_degree();
  cat.k_max = k_max;

  struct Retained {
    Configuration x;
    int s;
  };
  std::vector<Retained> retained;  // configs with s < best + k_max
  int best = std::numeric_limits<int>::max();
  int second = std::numeric_limits<int>::max();

  Configuration sel(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) sel[static_cast<std::size_t>(i)] = i;
  std::vector<char> in(static_cast<std::size_t>(g.vertex_count()), 0);
  Configuration x(static_cast<std::size_t>(N));
  bool more = true;
  while (more) {
    for (int i = 0; i < N; ++i)
      x[static_cast<std::size_t>(i)] = domain[static_cast<std::size_t>(
          sel[static_cast<std::size_t>(i)])];
    for (int v : x) in[static_cast<std::size_t>(v)] = 1;
    int dtot = 0, w2 = 0;
    for (int v : x) {
      dtot += g.degree(v);
      for (int u : g.adjacency(v))
        if (in[static_cast<std::size_t>(u)]) ++w2;
    }
    for (int v : x) in[static_cast<std::size_t>(v)] = 0;
    int s = dtot - w2;

    ++cat.level_counts[s];
    if (s < best) {
      second = std::min(second, best);
      best = s;
      retained.erase(std::remove_if(retained.begin(), retained.end(),
                                    [&](const Retained& r) {
                                      return r.s >= best + k_max;
                                    }),
                     retained.end());
    } else if (s > best) {
      second = std::min(second, s);
    }
    if (s < best + k_max) retained.push_back({x, s});
    more = next_configuration(sel, static_cast<int>(domain.size()));
  }

  cat.d_min = best;
  cat.second_level =
      second == std::numeric_limits<int>::max() ? -1 : second;
  for (const Retained& r : retained)
    if (r.s == best) cat.minimizers.push_back(r.x);
  for (int k = 0; k <= k_max; ++k) {
    auto& set = cat.k_sets[k];
    for (const Retained& r : retained)
      if (r.s < best + k) set.push_back(r.x);
  }
  return cat;
}

// Sublevel set {X : S(X) < D_min + k} within the catalog's enumeration.
inline const std::vector<Configuration>& droplet_set(const DropletCatalog& cat,
                                                     int k) {
  if (k < 0)
    throw std::invalid_argument("k must be >= 0, got " + std::to_string(k));
  auto it = cat.k_sets.find(k);
  if (it == cat.k_sets.end())
    throw std::invalid_argument("catalog stores sublevel sets only up to k=" +
                                std::to_string(cat.k_max) +
                                "; rebuild with a larger k_max");
  return it->second;
}

struct Thresholds {
  double e_threshold = 0.0;   // (1/2)(1-1/Delta)(D_min + k)
  double window_lo = 0.0;     // droplet window is the open interval
  double window_hi = 0.0;     // (0, (1/2)(1-1/Delta) * second_level)
};

inline Thresholds thresholds(const DropletCatalog& cat, double delta, int k) {
  if (!(delta > 1.0))
    throw std::invalid_argument("delta must be > 1, got " +
                                std::to_string(delta));
  if (k < 0)
    throw std::invalid_argument("k must be >= 0, got " + std::to_string(k));
  if (cat.second_level < 0)
    throw std::invalid_argument(
        "catalog has a single surface level; no droplet window exists");
  Thresholds t;
  t.e_threshold = 0.5 * (1.0 - 1.0 / delta) * (cat.d_min + k);
  t.window_lo = 0.0;
  t.window_hi = 0.5 * (1.0 - 1.0 / delta) * cat.second_level;
  return t;
}

// Droplet band of the infinite chain, with cosh(rho) = Delta:
// [tanh(rho) tanh(N rho/2), tanh(rho) coth(N rho/2)], equal to
// tanh(rho) (cosh(N rho) -+ 1)/sinh(N rho).
inline std::pair<double, double> chain_band(double delta, int N) {
  if (!(delta > 1.0))
    throw std::invalid_argument("delta must be > 1, got " +
                                std::to_string(delta));
  if (N < 1)
    throw std::invalid_argument("N must be >= 1, got " + std::to_string(N));
  double rho = std::acosh(delta);
  double t = std::tanh(rho);
  double h = std::tanh(0.5 * N * rho);
  return {t * h, t / h};
}

// Closed-form minimizer lists for the lattice families, placed inside the
// window's bulk (members of maximal degree).
inline std::vector<Configuration> analytic_minimizers(
    const std::string& family, const std::vector<int>& dims, int N) {
  std::vector<Configuration> out;
  if (family == "chain" || family == "path") {
    if (dims.size() != 1)
      throw std::invalid_argument("chain minimizers expect dims=[L]");
    int L = dims[0];
    if (N < 1) throw std::invalid_argument("N must be >= 1");
    for (int z = 1; z + N - 1 <= L - 2; ++z) {
      Configuration x;
      for (int i = 0; i < N; ++i) x.push_back(z + i);
      out.push_back(std::move(x));
    }
    return out;
  }
  if (family == "strip") {
    if (dims.size() != 2)
      throw std::invalid_argument("strip minimizers expect dims=[M,L]");
    int M = dims[0], L = dims[1];
    if (N % M != 0 || 2 * (N / M) <= M)
      throw std::invalid_argument(
          "strip minimizers require N = l*M with l > M/2 (stated hypothesis); "
          "got N=" + std::to_string(N) + ", M=" + std::to_string(M));
    int ell = N / M;
    for (int z0 = 1; z0 + ell - 1 <= L - 2; ++z0) {
      Configuration x;
      for (int z = z0; z < z0 + ell; ++z)
        for (int m = 1; m <= M; ++m) x.push_back(z * M + (m - 1));
      std::sort(x.begin(), x.end());
      out.push_back(std::move(x));
    }
    return out;
  }
  if (family == "grid2d") {
    if (dims.size() != 2)
      throw std::invalid_argument("grid2d minimizers expect dims=[Lx,Ly]");
    int lx = dims[0], ly = dims[1];
    int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(N))));
    if (s * s != N)
      throw std::invalid_argument(
          "grid2d minimizers require a perfect-square N (stated hypothesis); "
          "got N=" + std::to_string(N));
    for (int x0 = 1; x0 + s - 1 <= lx - 2; ++x0)
      for (int y0 = 1; y0 + s - 1 <= ly - 2; ++y0) {
        Configuration x;
        for (int dx = 0; dx < s; ++dx)
          for (int dy = 0; dy < s; ++dy)
            x.push_back((x0 + dx) * ly + (y0 + dy));
        std::sort(x.begin(), x.end());
        out.push_back(std::move(x));
      }
    // Emit in colex order to match brute-force enumeration.
    std::sort(out.begin(), out.end(),
              [](const Configuration& a, const Configuration& b) {
                return std::lexicographical_compare(a.rbegin(), a.rend(),
                                                    b.rbegin(), b.rend());
              });
    return out;
  }
  throw std::invalid_argument("unknown family \"" + family +
                              "\" (expected chain, strip, or grid2d)");
}

}  // namespace xxz
