#pragma once

// Allocations, selection weights and the removal-process state machine.
//
// Bins are 0-based in the library. The command-line tool and all printed
// reports use 1-based bin labels.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "ballsbins/errors.hpp"
#include "ballsbins/rational.hpp"

namespace ballsbins {

using Count = std::int64_t;
using BinIndex = std::size_t;

namespace detail {
inline std::vector<std::string_view> split_commas(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    parts.push_back(text.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return parts;
}

inline std::string join(const auto& values, const char* sep, auto&& render) {
  std::string out;
  bool first = true;
  for (const auto& v : values) {
    if (!first) out += sep;
    out += render(v);
    first = false;
  }
  return out;
}
}  // namespace detail

/// Balls per bin. Holds at least one bin; operations that need k >= 2
/// check it themselves.
class Allocation {
 public:
  Allocation() = default;
  explicit Allocation(std::vector<Count> counts) : counts_(std::move(counts)) {
    if (counts_.empty()) fail_invalid("allocation needs at least one bin");
    for (Count c : counts_)
      if (c < 0) fail_invalid("negative ball count " + std::to_string(c));
  }
  Allocation(std::initializer_list<Count> counts)
      : Allocation(std::vector<Count>(counts)) {}

  /// "5,1" -> (5,1)
  static Allocation parse(std::string_view text) {
    std::vector<Count> counts;
    for (auto part : detail::split_commas(text)) {
      if (!detail::all_digits(part) || part.size() > 15)
        fail_malformed("allocation '" + std::string(text) + "'");
      counts.push_back(std::stoll(std::string(part)));
    }
    return Allocation(std::move(counts));
  }

  std::size_t bins() const { return counts_.size(); }
  Count operator[](BinIndex j) const { return counts_[j]; }
  const std::vector<Count>& counts() const { return counts_; }

  Count total() const { return std::accumulate(counts_.begin(), counts_.end(), Count{0}); }

  std::size_t non_empty() const {
    return static_cast<std::size_t>(
        std::count_if(counts_.begin(), counts_.end(), [](Count c) { return c > 0; }));
  }

  /// Copy with one ball moved from bin `from` to bin `to`.
  Allocation transfer(BinIndex from, BinIndex to) const {
    if (from >= bins() || to >= bins())
      fail_out_of_range("transfer " + std::to_string(from + 1) + "->" + std::to_string(to + 1) +
                        " with k=" + std::to_string(bins()));
    if (counts_[from] < 1) fail_invalid("transfer from empty bin " + std::to_string(from + 1));
    auto c = counts_;
    --c[from];
    ++c[to];
    return Allocation(std::move(c));
  }

  std::string to_string() const {
    return detail::join(counts_, ",", [](Count c) { return std::to_string(c); });
  }

  friend auto operator<=>(const Allocation&, const Allocation&) = default;
  friend bool operator==(const Allocation&, const Allocation&) = default;

 private:
  std::vector<Count> counts_;
};

/// Per-bin selection probabilities: positive exact rationals summing to 1.
class WeightVector {
 public:
  WeightVector() = default;
  explicit WeightVector(std::vector<Rational> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) fail_invalid("weight vector needs at least one entry");
    Rational sum = 0;
    for (const auto& w : weights_) {
      if (sgn(w) <= 0) fail_invalid("weight " + ballsbins::to_string(w) + " is not positive");
      sum += w;
    }
    if (sum != 1) fail_invalid("weights sum to " + ballsbins::to_string(sum) + ", not 1");
  }

  static WeightVector uniform(std::size_t k) {
    if (k == 0) fail_invalid("uniform weights need k >= 1");
    return WeightVector(std::vector<Rational>(k, Rational(1, static_cast<unsigned long>(k))));
  }

  /// "5/6,1/6" -> (5/6, 1/6)
  static WeightVector parse(std::string_view text) {
    std::vector<Rational> ws;
    for (auto part : detail::split_commas(text)) ws.push_back(parse_rational(part));
    return WeightVector(std::move(ws));
  }

  std::size_t bins() const { return weights_.size(); }
  const Rational& operator[](BinIndex j) const { return weights_[j]; }
  const std::vector<Rational>& weights() const { return weights_; }

  bool is_uniform() const {
    return std::all_of(weights_.begin(), weights_.end(),
                       [&](const Rational& w) { return w == weights_.front(); });
  }

  /// Weights of the listed bins, renormalised to sum to 1.
  WeightVector restricted(const std::vector<BinIndex>& bins) const {
    Rational sum = 0;
    for (auto j : bins) sum += weights_.at(j);
    std::vector<Rational> ws;
    for (auto j : bins) ws.push_back(weights_[j] / sum);
    return WeightVector(std::move(ws));
  }

  std::string to_string() const {
    return detail::join(weights_, ",", [](const Rational& w) { return ballsbins::to_string(w); });
  }

  friend bool operator==(const WeightVector&, const WeightVector&) = default;

 private:
  std::vector<Rational> weights_;
};

inline void require_same_length(const Allocation& alloc, const WeightVector& weights) {
  if (alloc.bins() != weights.bins())
    fail_mismatch("allocation has " + std::to_string(alloc.bins()) + " bins, weights have " +
                  std::to_string(weights.bins()));
}

enum class StepMode {
  plain,   // selecting an empty bin is a no-op on its residual
  signed_  // residuals may go negative
};

/// Evolving bin contents. residuals[j] == initial[j] - selections[j] in signed
/// mode; in plain mode a residual stops at 0.
struct ProcessState {
  std::vector<Count> residuals;
  std::vector<Count> selection_counts;
  std::uint64_t round = 0;

  static ProcessState initial(const Allocation& alloc) {
    return {alloc.counts(), std::vector<Count>(alloc.bins(), 0), 0};
  }

  std::size_t non_empty() const {
    return static_cast<std::size_t>(
        std::count_if(residuals.begin(), residuals.end(), [](Count c) { return c > 0; }));
  }

  friend bool operator==(const ProcessState&, const ProcessState&) = default;
};

inline ProcessState step(ProcessState state, BinIndex bin, StepMode mode) {
  if (bin >= state.residuals.size())
    fail_out_of_range("selected bin " + std::to_string(bin + 1) + " with k=" +
                      std::to_string(state.residuals.size()));
  ++state.selection_counts[bin];
  ++state.round;
  if (mode == StepMode::signed_ || state.residuals[bin] > 0) --state.residuals[bin];
  return state;
}

/// True when at most one bin still holds balls. The first round at which this
/// holds is the stopping time T; zero non-empty bins also counts as stopped.
inline bool is_terminal(const ProcessState& state) { return state.non_empty() <= 1; }

/// Sum of positive residuals: the balls left in the last non-empty bin once
/// the state is terminal.
inline Count remaining_balls(const ProcessState& state) {
  Count x = 0;
  for (Count c : state.residuals) x += std::max<Count>(c, 0);
  return x;
}

/// A finite sequence of effective selections together with its probability
/// (the product of the per-step renormalised selection probabilities).
struct RemovalTrace {
  std::vector<BinIndex> selections;
  Rational probability = 1;
};

inline ProcessState replay(const Allocation& alloc, const RemovalTrace& trace, StepMode mode) {
  auto state = ProcessState::initial(alloc);
  for (auto b : trace.selections) state = step(std::move(state), b, mode);
  return state;
}

/// Every allocation of n balls into k bins whose entries differ pairwise by at
/// most one, in lexicographic order.
inline std::vector<Allocation> balanced_allocations(Count n, std::size_t k) {
  if (n < 0) fail_invalid("n must be >= 0");
  if (k < 2) fail_invalid("balanced allocations need k >= 2");
  const auto kk = static_cast<Count>(k);
  const Count low = n / kk;
  const Count extra = n % kk;
  std::vector<Count> base(k, low);
  for (Count j = 0; j < extra; ++j) base[k - 1 - static_cast<std::size_t>(j)] += 1;
  std::vector<Allocation> out;
  do {
    out.emplace_back(base);
  } while (std::next_permutation(base.begin(), base.end()));
  return out;
}

/// Integer allocation of n balls approximating n * weights. Largest remainder
/// (Hamilton) rounding; equal remainders favour the lower bin index.
inline Allocation proportional_allocation(Count n, const WeightVector& weights) {
  if (n < 0) fail_invalid("n must be >= 0");
  const std::size_t k = weights.bins();
  std::vector<Count> counts(k);
  std::vector<Rational> remainders(k);
  Count assigned = 0;
  for (std::size_t j = 0; j < k; ++j) {
    const Rational quota = weights[j] * n;
    const BigInt floor = quota.get_num() / quota.get_den();
    counts[j] = floor.get_si();
    remainders[j] = quota - Rational(floor);
    assigned += counts[j];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainders[a] > remainders[b];
  });
  for (Count left = n - assigned, idx = 0; left > 0; --left, ++idx)
    ++counts[order[static_cast<std::size_t>(idx)]];
  return Allocation(std::move(counts));
}

}  // namespace ballsbins
