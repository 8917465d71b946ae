#pragma once

// Exact expected number of balls left in the last non-empty bin,
//
//   f(n) = sum over non-empty j of (w_j / W) * f(n - e_j),   W = sum of those w_j,
//   f(n) = sum(n)                                          if <= 1 bin is non-empty,
//
// evaluated bottom-up over the states reachable from the query.

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ballsbins/core_model.hpp"
#include "ballsbins/errors.hpp"
#include "ballsbins/rational.hpp"

namespace ballsbins {

struct SolverConfig {
  /// Maximum number of memoised states.
  std::size_t state_budget = 10'000'000;
  /// Sort memo keys under uniform weights. Turning this off is only useful
  /// for cross-checking the symmetry reduction.
  bool exploit_symmetry = true;
};

/// Owns a memo table for one weight vector. Not thread-safe for concurrent
/// queries; const access to a finished solver is.
class ExactSolver {
 public:
  using Key = std::vector<Count>;

  explicit ExactSolver(WeightVector weights, SolverConfig config = {})
      : weights_(std::move(weights)), config_(config), symmetric_(config.exploit_symmetry && weights_.is_uniform()) {}

  const WeightVector& weights() const { return weights_; }
  bool uses_symmetry() const { return symmetric_; }
  std::size_t memo_size() const { return memo_.size(); }

  /// Memo key: sorted descending under uniform weights, verbatim otherwise.
  Key canonical(Key counts) const {
    if (symmetric_) std::sort(counts.begin(), counts.end(), std::greater<>{});
    return counts;
  }

  Rational expected_remaining(const Allocation& alloc) {
    require_same_length(alloc, weights_);
    Key root = canonical(alloc.counts());
    if (terminal(root)) return alloc.total();
    if (auto it = memo_.find(root); it != memo_.end()) return it->second;

    // Discover unsolved non-terminal states level by level (one ball fewer per
    // level), then solve them in non-decreasing total order.
    const Count top = alloc.total();
    std::vector<std::vector<Key>> levels(static_cast<std::size_t>(top) + 1);
    std::set<Key> pending;
    auto admit = [&](Key state, Count t) {
      if (memo_.size() + pending.size() >= config_.state_budget)
        fail_budget("exact solver state budget " + std::to_string(config_.state_budget) +
                    " reached while expanding " + alloc.to_string());
      pending.insert(state);
      levels[static_cast<std::size_t>(t)].push_back(std::move(state));
    };
    admit(root, top);
    for (Count t = top; t > 0; --t) {
      for (std::size_t s = 0; s < levels[static_cast<std::size_t>(t)].size(); ++s) {
        const Key state = levels[static_cast<std::size_t>(t)][s];
        for (std::size_t j = 0; j < state.size(); ++j) {
          if (state[j] == 0) continue;
          Key child = state;
          --child[j];
          child = canonical(std::move(child));
          if (terminal(child) || memo_.count(child) || pending.count(child)) continue;
          admit(std::move(child), t - 1);
        }
      }
    }

    for (const auto& level : levels) {
      for (const Key& state : level) memo_.emplace(state, evaluate(state));
    }
    return memo_.at(root);
  }

 private:
  static bool terminal(const Key& counts) {
    std::size_t live = 0;
    for (Count c : counts) live += c > 0;
    return live <= 1;
  }

  static Count sum(const Key& counts) {
    Count s = 0;
    for (Count c : counts) s += c;
    return s;
  }

  Rational value(const Key& counts) const {
    if (terminal(counts)) return sum(counts);
    return memo_.at(counts);
  }

  // All children of `state` are terminal or already memoised.
  Rational evaluate(const Key& state) const {
    Rational acc = 0;
    Rational mass = 0;
    for (std::size_t j = 0; j < state.size(); ++j) {
      if (state[j] == 0) continue;
      Key child = state;
      --child[j];
      // Under uniform weights every w_j is equal, so the verbatim index is fine.
      acc += weights_[j] * value(canonical(std::move(child)));
      mass += weights_[j];
    }
    return acc / mass;
  }

  WeightVector weights_;
  SolverConfig config_;
  bool symmetric_;
  std::map<Key, Rational> memo_;
};

inline Rational expected_remaining(const Allocation& alloc, const WeightVector& weights,
                                   SolverConfig config = {}) {
  ExactSolver solver(weights, config);
  return solver.expected_remaining(alloc);
}

inline Rational expected_remaining(const Allocation& alloc) {
  return expected_remaining(alloc, WeightVector::uniform(alloc.bins()));
}

namespace detail {
inline void require_open_unit(const Rational& p) {
  if (sgn(p) <= 0 || p >= 1)
    fail_invalid("p = " + ballsbins::to_string(p) + " must lie strictly between 0 and 1");
}
}  // namespace detail

/// Two bins, bin 2 holding one ball, bin 1 chosen with probability p:
/// f_p(a,1) = a - (p - p^a) / (1 - p).
inline Rational closed_form_b1(Count a, const Rational& p) {
  detail::require_open_unit(p);
  if (a < 1) fail_invalid("closed_form_b1 needs a >= 1");
  return Rational(a) - (p - pow(p, static_cast<unsigned long>(a))) / (1 - p);
}

/// Two bins, bin 2 holding two balls:
/// f_p(a,2) = a + 2 - 2/(1-p) + p^a (a + 2 + 2p/(1-p)).
inline Rational closed_form_b2(Count a, const Rational& p) {
  detail::require_open_unit(p);
  if (a < 0) fail_invalid("closed_form_b2 needs a >= 0");
  const Rational q = 1 - p;
  return Rational(a + 2) - 2 / q + pow(p, static_cast<unsigned long>(a)) * (a + 2 + 2 * p / q);
}

/// f(alloc) - f(alloc - e_from + e_to).
inline Rational marginal_delta(ExactSolver& solver, const Allocation& alloc, BinIndex from,
                               BinIndex to) {
  if (from >= alloc.bins() || to >= alloc.bins())
    fail_out_of_range("bins " + std::to_string(from + 1) + "," + std::to_string(to + 1) +
                      " with k=" + std::to_string(alloc.bins()));
  if (from == to) fail_invalid("marginal_delta with from == to is degenerate");
  if (alloc[from] < 1) fail_invalid("marginal_delta needs at least one ball in the source bin");
  return solver.expected_remaining(alloc) - solver.expected_remaining(alloc.transfer(from, to));
}

inline Rational marginal_delta(const Allocation& alloc, BinIndex from, BinIndex to,
                               const WeightVector& weights) {
  ExactSolver solver(weights);
  return marginal_delta(solver, alloc, from, to);
}

}  // namespace ballsbins
