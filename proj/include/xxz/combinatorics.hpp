#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace xxz {

// Saturating binomial table for the combinatorial number system.
// Entries that would exceed uint64 are pinned to kBinomOverflow; any arithmetic
// that touches a pinned entry is treated as an overflow error by callers.
inline constexpr std::uint64_t kBinomOverflow =
    std::numeric_limits<std::uint64_t>::max();

class BinomialTable {
 public:
  BinomialTable() = default;

  // Table of C(v, j) for 0 <= v <= n_max, 0 <= j <= k_max.
  BinomialTable(int n_max, int k_max) : n_max_(n_max), k_max_(k_max) {
    if (n_max < 0 || k_max < 0)
      throw std::invalid_argument("BinomialTable: negative bounds");
    table_.assign(static_cast<std::size_t>(n_max + 1) * (k_max + 1), 0);
    for (int v = 0; v <= n_max; ++v) {
      at(v, 0) = 1;
      for (int j = 1; j <= k_max; ++j) {
        if (v == 0) {
          at(v, j) = 0;
          continue;
        }
        std::uint64_t a = at(v - 1, j);
        std::uint64_t b = at(v - 1, j - 1);
        if (a == kBinomOverflow || b == kBinomOverflow ||
            a > kBinomOverflow - b) {
          at(v, j) = kBinomOverflow;
        } else {
          at(v, j) = a + b;
        }
      }
    }
  }

  std::uint64_t operator()(int v, int j) const {
    if (j < 0 || j > k_max_) return 0;
    if (v < 0) return 0;
    if (v < j) return 0;
    if (v > n_max_)
      throw std::out_of_range("BinomialTable: v=" + std::to_string(v) +
                              " exceeds table bound " + std::to_string(n_max_));
    return table_[static_cast<std::size_t>(v) * (k_max_ + 1) + j];
  }

  int n_max() const { return n_max_; }
  int k_max() const { return k_max_; }

 private:
  std::uint64_t& at(int v, int j) {
    return table_[static_cast<std::size_t>(v) * (k_max_ + 1) + j];
  }

  int n_max_ = -1;
  int k_max_ = -1;
  std::vector<std::uint64_t> table_;
};

// Exact C(n, k) with overflow detection (throws std::overflow_error).
inline std::uint64_t binomial(int n, int k) {
  if (n < 0 || k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    // r * (n - k + i) / i is exact at every step.
    std::uint64_t num = static_cast<std::uint64_t>(n - k + i);
    if (r > kBinomOverflow / num)
      throw std::overflow_error("binomial(" + std::to_string(n) + "," +
                                std::to_string(k) + ") exceeds 64 bits");
    r = r * num / i;
  }
  return r;
}

// Sorted strictly-increasing vertex subset.
using Configuration = std::vector<int>;

inline void validate_configuration(const Configuration& x, int vertex_count) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0 || x[i] >= vertex_count)
      throw std::invalid_argument("configuration member " +
                                  std::to_string(x[i]) +
                                  " outside vertex range [0," +
                                  std::to_string(vertex_count) + ")");
    if (i > 0 && x[i] <= x[i - 1])
      throw std::invalid_argument(
          "configuration not strictly increasing at position " +
          std::to_string(i));
  }
}

// Colexicographic rank: sum of C(x[i], i+1).
inline std::uint64_t colex_rank(const Configuration& x,
                                const BinomialTable& binom) {
  std::uint64_t r = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    r += binom(x[i], static_cast<int>(i) + 1);
  return r;
}

// Inverse of colex_rank for N-subsets of [0, n).
inline Configuration colex_unrank(std::uint64_t r, int n, int N,
                                  const BinomialTable& binom) {
  Configuration x(static_cast<std::size_t>(N));
  for (int i = N; i >= 1; --i) {
    // Largest v with C(v, i) <= r; search range [i-1, n-1].
    int lo = i - 1, hi = n - 1;
    while (lo < hi) {
      int mid = lo + (hi - lo + 1) / 2;
      if (binom(mid, i) <= r)
        lo = mid;
      else
        hi = mid - 1;
    }
    x[static_cast<std::size_t>(i - 1)] = lo;
    r -= binom(lo, i);
  }
  return x;
}

// Advance x to its colex successor among N-subsets of [0, n).
// Returns false (x unchanged) when x is the last subset.
inline bool next_configuration(Configuration& x, int n) {
  const int N = static_cast<int>(x.size());
  for (int i = 0; i < N; ++i) {
    int limit = (i + 1 < N) ? x[static_cast<std::size_t>(i + 1)] : n;
    if (x[static_cast<std::size_t>(i)] + 1 < limit) {
      ++x[static_cast<std::size_t>(i)];
      for (int j = 0; j < i; ++j) x[static_cast<std::size_t>(j)] = j;
      return true;
    }
  }
  return false;
}

}  // namespace xxz
