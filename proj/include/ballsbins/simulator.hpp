#pragma once

// Seeded Monte Carlo for the removal process.
//
// Every trial draws from its own SplitMix64 stream derived from
// (seed, mode, trial index), so results do not depend on the thread count or
// scheduling. Bit-for-bit reproducibility holds for a fixed standard library
// (the std distributions used for the continuous mode are
// implementation-defined).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "ballsbins/core_model.hpp"
#include "ballsbins/errors.hpp"
#include "ballsbins/rational.hpp"

namespace ballsbins {

/// SplitMix64 (Steele, Lea, Flood 2014). Also used as a mixing function to
/// derive independent per-trial seeds.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

enum class SimMode {
  discrete,   // chain conditioned on non-empty bins; T counts removals
  continuous  // independent exponential clocks (Erlang emptying times)
};

inline const char* to_string(SimMode m) {
  return m == SimMode::discrete ? "discrete" : "continuous";
}

struct SimConfig {
  std::uint64_t trials = 100'000;
  std::uint64_t seed = 1;
  SimMode mode = SimMode::discrete;
  /// Discrete mode only: select among all k bins, empty ones included, and
  /// report T as wall-clock rounds.
  bool literal = false;
  unsigned threads = 1;
};

struct SimSummary {
  double mean_x = 0;
  double stderr_x = 0;
  double mean_t = 0;
  std::map<Count, std::uint64_t> histogram_x;
  std::uint64_t trials = 0;
};

namespace detail {

inline std::uint64_t stream_seed(std::uint64_t seed, SimMode mode, bool literal,
                                 std::uint64_t trial) {
  const std::uint64_t tag = mode == SimMode::discrete ? (literal ? 0x11ULL : 0x5aULL) : 0xc3ULL;
  return SplitMix64::mix(SplitMix64::mix(seed ^ (tag << 56)) + trial);
}

/// Weights scaled to integers by the lcm of their denominators, for exact
/// categorical draws.
inline std::vector<std::uint64_t> integer_weights(const WeightVector& weights) {
  BigInt l = 1;
  for (const auto& w : weights.weights()) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), w.get_den_mpz_t());
  if (mpz_sizeinbase(l.get_mpz_t(), 2) > 62)
    fail_invalid("weight denominators too large for simulation");
  std::vector<std::uint64_t> out;
  for (const auto& w : weights.weights()) {
    const Rational scaled = w * l;
    out.push_back(scaled.get_num().get_ui());
  }
  return out;
}

struct TrialOutcome {
  Count x = 0;
  std::uint64_t t = 0;
};

inline std::size_t pick(const std::vector<std::uint64_t>& iw, const std::vector<Count>& counts,
                        bool only_non_empty, SplitMix64& rng) {
  std::uint64_t mass = 0;
  for (std::size_t j = 0; j < iw.size(); ++j)
    if (!only_non_empty || counts[j] > 0) mass += iw[j];
  std::uniform_int_distribution<std::uint64_t> dist(0, mass - 1);
  std::uint64_t u = dist(rng);
  for (std::size_t j = 0; j < iw.size(); ++j) {
    if (only_non_empty && counts[j] <= 0) continue;
    if (u < iw[j]) return j;
    u -= iw[j];
  }
  return iw.size() - 1;  // unreachable
}

inline TrialOutcome discrete_trial(const Allocation& alloc, const std::vector<std::uint64_t>& iw,
                                   bool literal, SplitMix64& rng) {
  std::vector<Count> c = alloc.counts();
  std::size_t live = alloc.non_empty();
  TrialOutcome o;
  while (live > 1) {
    const std::size_t j = pick(iw, c, !literal, rng);
    ++o.t;
    if (c[j] > 0 && --c[j] == 0) --live;
  }
  for (Count v : c) o.x += v;
  return o;
}

// Bin j's removals happen at the ticks of a rate-w_j Poisson clock, so it
// empties at an Erlang(n_j, w_j) time. The process stops when the second to
// last bin empties; X is what the last bin still holds then.
inline TrialOutcome continuous_trial(const Allocation& alloc, const std::vector<double>& rates,
                                     SplitMix64& rng) {
  const std::size_t k = alloc.bins();
  std::vector<std::vector<double>> ticks(k);
  std::vector<double> empty_at(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    std::exponential_distribution<double> gap(rates[j]);
    double t = 0;
    for (Count b = 0; b < alloc[j]; ++b) {
      t += gap(rng);
      ticks[j].push_back(t);
    }
    empty_at[j] = t;
  }
  TrialOutcome o;
  if (alloc.non_empty() <= 1) {
    o.x = alloc.total();
    return o;
  }
  std::size_t last = 0;
  for (std::size_t j = 1; j < k; ++j)
    if (alloc[j] > 0 && (alloc[last] == 0 || empty_at[j] > empty_at[last])) last = j;
  double stop = 0;
  for (std::size_t j = 0; j < k; ++j)
    if (j != last && alloc[j] > 0) stop = std::max(stop, empty_at[j]);
  const auto removed = std::upper_bound(ticks[last].begin(), ticks[last].end(), stop) -
                       ticks[last].begin();
  o.x = alloc[last] - static_cast<Count>(removed);
  o.t = static_cast<std::uint64_t>(alloc.total() - o.x);
  return o;
}

struct Tally {
  std::map<Count, std::uint64_t> histogram;
  std::uint64_t sum_t = 0;

  void merge(const Tally& other) {
    for (const auto& [x, c] : other.histogram) histogram[x] += c;
    sum_t += other.sum_t;
  }
};

}  // namespace detail

inline SimSummary simulate(const Allocation& alloc, const WeightVector& weights,
                           const SimConfig& config) {
  require_same_length(alloc, weights);
  if (config.trials == 0) fail_invalid("trials must be >= 1");
  if (alloc.total() < 1) fail_invalid("simulation needs at least one ball");
  if (config.literal && config.mode != SimMode::discrete)
    fail_invalid("literal selection is a discrete-mode option");

  const auto iw = detail::integer_weights(weights);
  std::vector<double> rates;
  for (const auto& w : weights.weights()) rates.push_back(w.get_d());

  auto run_range = [&](std::uint64_t from, std::uint64_t to) {
    detail::Tally tally;
    for (std::uint64_t trial = from; trial < to; ++trial) {
      SplitMix64 rng(detail::stream_seed(config.seed, config.mode, config.literal, trial));
      const auto o = config.mode == SimMode::discrete
                         ? detail::discrete_trial(alloc, iw, config.literal, rng)
                         : detail::continuous_trial(alloc, rates, rng);
      ++tally.histogram[o.x];
      tally.sum_t += o.t;
    }
    return tally;
  };

  const unsigned workers =
      static_cast<unsigned>(std::max<std::uint64_t>(1, std::min<std::uint64_t>(config.threads, config.trials)));
  std::vector<detail::Tally> parts(workers);
  if (workers == 1) {
    parts[0] = run_range(0, config.trials);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t from = config.trials * w / workers;
      const std::uint64_t to = config.trials * (w + 1) / workers;
      pool.emplace_back([&, w, from, to] { parts[w] = run_range(from, to); });
    }
    for (auto& th : pool) th.join();
  }
  detail::Tally all;
  for (const auto& p : parts) all.merge(p);

  // Moments come from the integer histogram, not a running float sum.
  SimSummary s;
  s.trials = config.trials;
  s.histogram_x = std::move(all.histogram);
  const double n = static_cast<double>(config.trials);
  long double sum = 0;
  for (const auto& [x, c] : s.histogram_x) sum += static_cast<long double>(x) * c;
  s.mean_x = static_cast<double>(sum / n);
  if (config.trials > 1) {
    long double ss = 0;
    for (const auto& [x, c] : s.histogram_x) {
      const long double d = static_cast<long double>(x) - s.mean_x;
      ss += d * d * c;
    }
    s.stderr_x = std::sqrt(static_cast<double>(ss / (n - 1))) / std::sqrt(n);
  }
  s.mean_t = static_cast<double>(all.sum_t) / n;
  return s;
}

struct CompareThresholds {
  /// Maximum |z| for the difference of the two means.
  double z = 4.0;
  /// The histogram statistic must stay below the chi-square quantile whose
  /// upper tail matches a standard normal beyond this many sigmas
  /// (Wilson-Hilferty approximation).
  double chi_sigmas = 4.0;
};

struct ModeComparison {
  SimSummary discrete;
  SimSummary continuous;
  double z = 0;
  double chi_square = 0;
  std::size_t degrees_of_freedom = 0;
  bool means_agree = true;
  bool histograms_agree = true;

  bool agree() const { return means_agree && histograms_agree; }
};

/// Runs the discrete and continuous simulators on disjoint streams and
/// compares them: a two-sample z statistic on mean X and a two-sample
/// chi-square statistic on the X histograms.
inline ModeComparison compare_modes(const Allocation& alloc, const WeightVector& weights,
                                    std::uint64_t trials, std::uint64_t seed,
                                    CompareThresholds thresholds = {}, unsigned threads = 1) {
  ModeComparison cmp;
  cmp.discrete = simulate(alloc, weights, {trials, seed, SimMode::discrete, false, threads});
  cmp.continuous = simulate(alloc, weights, {trials, seed, SimMode::continuous, false, threads});

  const double se = std::hypot(cmp.discrete.stderr_x, cmp.continuous.stderr_x);
  const double diff = cmp.discrete.mean_x - cmp.continuous.mean_x;
  if (se > 0) {
    cmp.z = diff / se;
  } else {
    cmp.z = diff == 0 ? 0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
  cmp.means_agree = std::abs(cmp.z) <= thresholds.z;

  std::map<Count, std::pair<double, double>> joint;
  for (const auto& [x, c] : cmp.discrete.histogram_x) joint[x].first = static_cast<double>(c);
  for (const auto& [x, c] : cmp.continuous.histogram_x) joint[x].second = static_cast<double>(c);
  const double r = std::sqrt(static_cast<double>(cmp.continuous.trials) /
                             static_cast<double>(cmp.discrete.trials));
  for (const auto& [_, ab] : joint) {
    const auto [a, b] = ab;
    const double d = a * r - b / r;
    cmp.chi_square += d * d / (a + b);
  }
  cmp.degrees_of_freedom = joint.empty() ? 0 : joint.size() - 1;
  const double df = static_cast<double>(cmp.degrees_of_freedom);
  if (df > 0) {
    const double c = 2.0 / (9.0 * df);
    const double limit = df * std::pow(1 - c + thresholds.chi_sigmas * std::sqrt(c), 3);
    cmp.histograms_agree = cmp.chi_square <= limit;
  }
  return cmp;
}

}  // namespace ballsbins
