#pragma once

// Test-only reference computations. They deliberately avoid the library's
// solver and enumerator code paths.

#include <functional>
#include <vector>

#include "ballsbins/core_model.hpp"
#include "ballsbins/rational.hpp"

namespace oracle {

using ballsbins::Count;
using ballsbins::Rational;

/// E[X] by walking every effective removal sequence (no memoisation): each
/// step removes a ball from a non-empty bin chosen with probability
/// proportional to its weight.
inline Rational expected_by_paths(std::vector<Count> counts, const std::vector<Rational>& w) {
  Rational total = 0;
  std::function<void(const Rational&)> walk = [&](const Rational& p) {
    std::size_t live = 0;
    Count balls = 0;
    Rational mass = 0;
    for (std::size_t j = 0; j < counts.size(); ++j) {
      if (counts[j] > 0) {
        ++live;
        mass += w[j];
      }
      balls += counts[j];
    }
    if (live <= 1) {
      total += p * balls;
      return;
    }
    for (std::size_t j = 0; j < counts.size(); ++j) {
      if (counts[j] == 0) continue;
      --counts[j];
      walk(p * w[j] / mass);
      ++counts[j];
    }
  };
  walk(1);
  return total;
}

/// Two-bin f by the textbook recursion on a dense table.
inline Rational two_bin_table(Count a, Count b, const Rational& p) {
  std::vector<std::vector<Rational>> f(a + 1, std::vector<Rational>(b + 1));
  for (Count x = 0; x <= a; ++x)
    for (Count y = 0; y <= b; ++y) {
      if (x == 0) f[x][y] = y;
      else if (y == 0) f[x][y] = x;
      else f[x][y] = p * f[x - 1][y] + (1 - p) * f[x][y - 1];
    }
  return f[a][b];
}

inline Count binomial(Count n, Count r) {
  Count c = 1;
  for (Count t = 1; t <= r; ++t) c = c * (n - r + t) / t;
  return c;
}

}  // namespace oracle
