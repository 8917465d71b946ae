#pragma once

// Exhaustive search over allocations of n balls into k bins.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ballsbins/core_model.hpp"
#include "ballsbins/errors.hpp"
#include "ballsbins/exact_solver.hpp"
#include "ballsbins/rational.hpp"

namespace ballsbins {

/// Calls `visit(const Allocation&)` for each composition of n into k parts in
/// decreasing lexicographic order. With `reduce_symmetry` only the
/// non-increasing ones (partitions of n into at most k parts) are produced.
template <class Visitor>
void for_each_composition(Count n, std::size_t k, bool reduce_symmetry, Visitor&& visit) {
  if (n < 0) fail_invalid("n must be >= 0");
  if (k < 2) fail_invalid("compositions need k >= 2");
  std::vector<Count> parts(k, 0);
  std::function<void(std::size_t, Count, Count)> fill = [&](std::size_t pos, Count left,
                                                            Count cap) {
    if (pos + 1 == k) {
      if (left > cap) return;
      parts[pos] = left;
      visit(static_cast<const Allocation&>(Allocation(parts)));
      return;
    }
    for (Count v = std::min(left, cap); v >= 0; --v) {
      parts[pos] = v;
      fill(pos + 1, left - v, reduce_symmetry ? v : n);
    }
  };
  fill(0, n, n);
}

inline std::vector<Allocation> enumerate_compositions(Count n, std::size_t k,
                                                      bool reduce_symmetry) {
  std::vector<Allocation> out;
  for_each_composition(n, k, reduce_symmetry, [&](const Allocation& a) { out.push_back(a); });
  return out;
}

/// All distinct permutations of `alloc`, sorted.
inline std::vector<Allocation> orbit(const Allocation& alloc) {
  auto c = alloc.counts();
  std::sort(c.begin(), c.end());
  std::vector<Allocation> out;
  do {
    out.emplace_back(c);
  } while (std::next_permutation(c.begin(), c.end()));
  return out;
}

/// max_j |a_j - b_j|
inline Count linf_distance(const Allocation& a, const Allocation& b) {
  if (a.bins() != b.bins()) fail_mismatch("distance between different bin counts");
  Count d = 0;
  for (std::size_t j = 0; j < a.bins(); ++j) d = std::max(d, std::abs(a[j] - b[j]));
  return d;
}

struct OptimizationResult {
  std::vector<Allocation> minimizers;  // sorted
  Rational min_value = 0;
  std::size_t evaluated = 0;
  bool used_symmetry = false;
};

/// Exact argmin of f over all allocations of n balls into k bins. Under
/// uniform weights only non-increasing representatives are evaluated and each
/// minimising representative is expanded to its full permutation orbit.
inline OptimizationResult optimal_allocations(ExactSolver& solver, Count n, std::size_t k) {
  if (n < 1) fail_invalid("optimisation needs n >= 1");
  if (solver.weights().bins() != k)
    fail_mismatch("k=" + std::to_string(k) + " but weights have " +
                  std::to_string(solver.weights().bins()) + " entries");
  OptimizationResult res;
  res.used_symmetry = solver.uses_symmetry();
  std::vector<Allocation> best;
  bool first = true;
  for_each_composition(n, k, res.used_symmetry, [&](const Allocation& a) {
    const Rational v = solver.expected_remaining(a);
    ++res.evaluated;
    if (first || v < res.min_value) {
      res.min_value = v;
      best.clear();
      first = false;
    }
    if (v == res.min_value) best.push_back(a);
  });
  if (res.used_symmetry) {
    for (const auto& rep : best)
      for (auto& a : orbit(rep)) res.minimizers.push_back(std::move(a));
  } else {
    res.minimizers = std::move(best);
  }
  std::sort(res.minimizers.begin(), res.minimizers.end());
  return res;
}

inline OptimizationResult optimal_allocations(Count n, std::size_t k, const WeightVector& weights,
                                              SolverConfig config = {}) {
  ExactSolver solver(weights, config);
  return optimal_allocations(solver, n, k);
}

struct Theorem1Row {
  Count n = 0;
  std::size_t k = 0;
  OptimizationResult result;
  std::vector<Allocation> balanced;
  bool sets_equal = false;
  /// min_value recomputed from scratch by a fresh solver agrees.
  bool recheck_ok = false;
  bool passed() const { return sets_equal && recheck_ok; }
};

struct Theorem1Report {
  std::vector<Theorem1Row> rows;
  /// Set when a budget error stopped the run; rows then hold the prefix done.
  std::optional<std::string> aborted;

  bool all_passed() const {
    return !aborted && std::all_of(rows.begin(), rows.end(),
                                   [](const Theorem1Row& r) { return r.passed(); });
  }
};

/// For 1 <= n <= n_max and 2 <= k <= k_max, checks that the uniform-weight
/// minimiser set equals the balanced family exactly.
inline Theorem1Report verify_theorem1(Count n_max, std::size_t k_max, SolverConfig config = {}) {
  if (n_max < 1) fail_invalid("n_max must be >= 1");
  if (k_max < 2) fail_invalid("k_max must be >= 2");
  Theorem1Report report;
  try {
    for (std::size_t k = 2; k <= k_max; ++k) {
      ExactSolver solver(WeightVector::uniform(k), config);
      for (Count n = 1; n <= n_max; ++n) {
        Theorem1Row row{n, k, optimal_allocations(solver, n, k), balanced_allocations(n, k)};
        row.sets_equal = row.result.minimizers == row.balanced;
        row.recheck_ok =
            expected_remaining(row.result.minimizers.front(), WeightVector::uniform(k), config) ==
            row.result.min_value;
        report.rows.push_back(std::move(row));
      }
    }
  } catch (const BudgetExceeded& e) {
    report.aborted = e.what();
  }
  return report;
}

struct ScanRow {
  Count n = 0;
  Allocation optimal;
  Count balanced_distance = 0;
  Count proportional_distance = 0;
  Rational min_value = 0;
};

inline Count balanced_distance(const Allocation& a) {
  Count best = -1;
  for (const auto& b : balanced_allocations(a.total(), a.bins())) {
    const Count d = linf_distance(a, b);
    if (best < 0 || d < best) best = d;
  }
  return best;
}

/// One row per n in [n_from, n_to] describing the optimal allocation under
/// non-uniform weights. Among tied minimisers the row keeps the one closest to
/// the balanced family, then the lexicographically smallest. Returns the
/// budget error message if the scan stopped early.
template <class RowSink>
std::optional<std::string> conjecture_scan(std::size_t k, const WeightVector& weights,
                                           Count n_from, Count n_to, RowSink&& sink,
                                           SolverConfig config = {}) {
  if (weights.bins() != k)
    fail_mismatch("k=" + std::to_string(k) + " but weights have " +
                  std::to_string(weights.bins()) + " entries");
  if (weights.is_uniform())
    fail_invalid("scan needs non-uniform weights; uniform optima are balanced");
  if (n_from < 1 || n_to < n_from) fail_invalid("scan range must satisfy 1 <= from <= to");
  ExactSolver solver(weights, config);
  try {
    for (Count n = n_from; n <= n_to; ++n) {
      const auto res = optimal_allocations(solver, n, k);
      const Allocation* pick = nullptr;
      Count pick_dist = 0;
      for (const auto& m : res.minimizers) {  // sorted, so the first tie wins
        const Count d = balanced_distance(m);
        if (!pick || d < pick_dist) {
          pick = &m;
          pick_dist = d;
        }
      }
      sink(static_cast<const ScanRow&>(ScanRow{n, *pick, pick_dist,
                                               linf_distance(*pick, proportional_allocation(n, weights)),
                                               res.min_value}));
    }
  } catch (const BudgetExceeded& e) {
    return std::string(e.what());
  }
  return std::nullopt;
}

inline std::vector<ScanRow> conjecture_scan(std::size_t k, const WeightVector& weights,
                                            Count n_from, Count n_to, SolverConfig config = {}) {
  std::vector<ScanRow> rows;
  if (auto err = conjecture_scan(k, weights, n_from, n_to,
                                 [&](const ScanRow& r) { rows.push_back(r); }, config))
    throw BudgetExceeded(*err);
  return rows;
}

}  // namespace ballsbins
