#pragma once

// Exhaustive enumeration of coupled removal traces.
//
// One selection sequence is run simultaneously from the base allocation n and
// from the shifted allocation n - e_1 + e_i (one ball moved from bin 1 to bin
// i). Residuals are signed: a bin selected more often than it had balls holds
// a negative count. Each trace is then classified relative to the base run:
//
//   S   first round (counting the initial state as round 0) at whose end
//       (a) bin 1 holds exactly one ball more than bin i, or
//       (b) exactly two bins are non-empty and one of them holds one ball.
//   C_a             (a) holds at S
//   F_1i \ C_a      bins 1 and i are the last two non-empty bins
//   F_empty \ C_a   the last two non-empty bins avoid both 1 and i
//   F_1j^{a,b} \ C_a  bins 1 and j are the last two, holding a and b balls at S
//
// Traces keep only effective selections: a step picks among bins non-empty
// under at least one of the two allocations, with weights renormalised over
// that set. Bin 1 is index 0 throughout.

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "ballsbins/core_model.hpp"
#include "ballsbins/errors.hpp"
#include "ballsbins/exact_solver.hpp"
#include "ballsbins/rational.hpp"

namespace ballsbins {

enum class Trigger { cond_a, cond_b };

struct StoppingRecord {
  std::uint64_t s_round = 0;
  Trigger trigger = Trigger::cond_a;
  /// Balls in the larger of the two non-empty bins when (b) triggers; 0 for (a).
  Count r = 0;
  /// Signed base-run state at S.
  ProcessState state_at_s;
};

enum class EventTag { c_a, f_1i, f_empty, f_1j };

struct EventClass {
  EventTag tag = EventTag::c_a;
  BinIndex j = 0;  // f_1j only
  Count a = 0;     // bin 1 at S, f_1j only
  Count b = 0;     // bin j at S, f_1j only

  static EventClass c_a() { return {EventTag::c_a}; }
  static EventClass f_1i() { return {EventTag::f_1i}; }
  static EventClass f_empty() { return {EventTag::f_empty}; }
  static EventClass f_1j(BinIndex j, Count a, Count b) { return {EventTag::f_1j, j, a, b}; }

  /// Stable 1-based label, e.g. "C_a", "F_1i\C_a", "F_13^{2,1}\C_a".
  std::string label() const {
    switch (tag) {
      case EventTag::c_a:
        return "C_a";
      case EventTag::f_1i:
        return "F_1i\\C_a";
      case EventTag::f_empty:
        return "F_empty\\C_a";
      case EventTag::f_1j:
        return "F_1" + std::to_string(j + 1) + "^{" + std::to_string(a) + "," +
               std::to_string(b) + "}\\C_a";
    }
    return {};
  }

  friend auto operator<=>(const EventClass&, const EventClass&) = default;
  friend bool operator==(const EventClass&, const EventClass&) = default;
};

/// Everything one coupled trace determines.
struct CoupledOutcome {
  EventClass event;
  StoppingRecord stop;
  std::uint64_t t_base = 0;
  Count x_base = 0;
  std::array<BinIndex, 2> last_two{};
  /// Round at which (b) first holds in the base run and the two bins then.
  std::uint64_t first_b_round = 0;
  std::array<BinIndex, 2> first_b_bins{};
  std::array<Count, 2> first_b_counts{};
  /// Present once the trace reaches the shifted run's stopping time.
  std::optional<std::uint64_t> t_shifted;
  std::optional<Count> x_shifted;
};

struct EnumerationLimits {
  Count max_total = 12;
  std::size_t max_bins = 4;
  std::uint64_t max_nodes = 50'000'000;
};

namespace detail {

inline std::vector<BinIndex> positive_bins(const std::vector<Count>& residuals) {
  std::vector<BinIndex> out;
  for (BinIndex j = 0; j < residuals.size(); ++j)
    if (residuals[j] > 0) out.push_back(j);
  return out;
}

inline Count positive_sum(const std::vector<Count>& residuals) {
  Count s = 0;
  for (Count c : residuals) s += std::max<Count>(c, 0);
  return s;
}

inline bool condition_b(const std::vector<Count>& residuals) {
  const auto live = positive_bins(residuals);
  return live.size() == 2 && std::min(residuals[live[0]], residuals[live[1]]) == 1;
}

}  // namespace detail

/// Checks that (alloc, i) is an instance the event partition is defined for:
/// bin 1 maximal, n_1 >= n_i + 2, and at least two non-empty bins.
inline void require_admissible(const Allocation& alloc, BinIndex i, const WeightVector& weights,
                               const EnumerationLimits& limits) {
  require_same_length(alloc, weights);
  const std::size_t k = alloc.bins();
  if (k < 2) fail_invalid("event enumeration needs k >= 2");
  if (i == 0 || i >= k)
    fail_out_of_range("i=" + std::to_string(i + 1) + " must be in 2.." + std::to_string(k));
  for (BinIndex j = 1; j < k; ++j)
    if (alloc[j] > alloc[0])
      fail_invalid("bin 1 must hold a maximal count; bin " + std::to_string(j + 1) + " has more");
  if (alloc[0] < alloc[i] + 2)
    fail_invalid("need n_1 >= n_i + 2 (n_1=" + std::to_string(alloc[0]) +
                 ", n_i=" + std::to_string(alloc[i]) + ")");
  if (alloc.non_empty() < 2)
    fail_invalid("allocation " + alloc.to_string() + " has fewer than two non-empty bins");
  if (alloc.total() > limits.max_total)
    fail_budget("total " + std::to_string(alloc.total()) + " exceeds enumeration limit " +
                std::to_string(limits.max_total));
  if (k > limits.max_bins)
    fail_budget("k=" + std::to_string(k) + " exceeds enumeration limit " +
                std::to_string(limits.max_bins));
}

/// Replays `selections` on the coupled pair and derives the stopping data and
/// event. Throws ValidationError if the trace stops before the base run's T.
inline CoupledOutcome analyze_coupled_trace(const Allocation& alloc, BinIndex i,
                                            const std::vector<BinIndex>& selections) {
  const Allocation shifted_alloc = alloc.transfer(0, i);
  auto base = ProcessState::initial(alloc);
  auto shifted = ProcessState::initial(shifted_alloc);

  CoupledOutcome out;
  bool have_s = false, have_b = false, have_t = false;
  std::optional<std::array<BinIndex, 2>> two_left;

  auto observe = [&]() {
    const auto& u = base.residuals;
    if (!have_t) {
      const auto live = detail::positive_bins(u);
      if (live.size() == 2) two_left = std::array<BinIndex, 2>{live[0], live[1]};
      if (!have_s) {
        if (u[0] == u[i] + 1) {
          out.stop = {base.round, Trigger::cond_a, 0, base};
          have_s = true;
        } else if (detail::condition_b(u)) {
          out.stop = {base.round, Trigger::cond_b, std::max(u[live[0]], u[live[1]]), base};
          have_s = true;
        }
      }
      if (!have_b && detail::condition_b(u)) {
        out.first_b_round = base.round;
        out.first_b_bins = {live[0], live[1]};
        out.first_b_counts = {u[live[0]], u[live[1]]};
        have_b = true;
      }
      if (live.size() <= 1) {
        out.t_base = base.round;
        out.x_base = detail::positive_sum(u);
        have_t = true;
      }
    }
    if (!out.t_shifted && shifted.non_empty() <= 1) {
      out.t_shifted = shifted.round;
      out.x_shifted = detail::positive_sum(shifted.residuals);
    }
  };

  observe();
  for (BinIndex sel : selections) {
    base = step(std::move(base), sel, StepMode::signed_);
    shifted = step(std::move(shifted), sel, StepMode::signed_);
    observe();
  }

  if (!have_t) fail_invalid("trace ends before the base run stops");
  if (!have_s || !have_b || !two_left)
    throw std::logic_error("stopping data missing for a terminated trace of " + alloc.to_string());
  out.last_two = *two_left;

  const bool has1 = out.last_two[0] == 0 || out.last_two[1] == 0;
  const bool has_i = out.last_two[0] == i || out.last_two[1] == i;
  if (out.stop.trigger == Trigger::cond_a) {
    out.event = EventClass::c_a();
  } else if (has1 && has_i) {
    out.event = EventClass::f_1i();
  } else if (has1) {
    const BinIndex j = out.last_two[0] == 0 ? out.last_two[1] : out.last_two[0];
    const auto& u = out.stop.state_at_s.residuals;
    out.event = EventClass::f_1j(j, u[0], u[j]);
  } else if (!has_i) {
    out.event = EventClass::f_empty();
  } else {
    throw std::logic_error("trace outside the event partition for " + alloc.to_string());
  }
  return out;
}

/// The partition member containing `trace` and its stopping data.
inline std::pair<EventClass, StoppingRecord> classify_trace(const RemovalTrace& trace,
                                                           const Allocation& alloc, BinIndex i) {
  require_admissible(alloc, i, WeightVector::uniform(alloc.bins()),
                     {alloc.total(), alloc.bins(), 0});
  auto outcome = analyze_coupled_trace(alloc, i, trace.selections);
  return {outcome.event, outcome.stop};
}

/// Calls `visit(const RemovalTrace&)` for every complete effective coupled
/// trace, i.e. one that runs until both the base and the shifted run stop.
/// Returns the number of tree nodes visited.
template <class Visitor>
std::uint64_t for_each_coupled_trace(const Allocation& alloc, BinIndex i,
                                     const WeightVector& weights, const EnumerationLimits& limits,
                                     Visitor&& visit) {
  require_admissible(alloc, i, weights, limits);
  const std::size_t k = alloc.bins();
  std::vector<Count> base = alloc.counts();
  std::vector<Count> shifted = alloc.transfer(0, i).counts();
  RemovalTrace trace;
  std::uint64_t nodes = 0;

  auto live = [](const std::vector<Count>& v) {
    return std::count_if(v.begin(), v.end(), [](Count c) { return c > 0; });
  };

  std::function<void()> descend = [&]() {
    if (++nodes > limits.max_nodes)
      fail_budget("enumeration node budget " + std::to_string(limits.max_nodes) + " exhausted");
    if (live(base) <= 1 && live(shifted) <= 1) {
      visit(static_cast<const RemovalTrace&>(trace));
      return;
    }
    Rational active_mass = 0;
    for (BinIndex j = 0; j < k; ++j)
      if (base[j] > 0 || shifted[j] > 0) active_mass += weights[j];
    const Rational parent = trace.probability;
    for (BinIndex j = 0; j < k; ++j) {
      if (base[j] <= 0 && shifted[j] <= 0) continue;
      --base[j];
      --shifted[j];
      trace.selections.push_back(j);
      trace.probability = parent * weights[j] / active_mass;
      descend();
      trace.selections.pop_back();
      ++base[j];
      ++shifted[j];
    }
    trace.probability = parent;
  };
  descend();
  return nodes;
}

/// Probability mass of an event and the X-weighted masses under both runs.
struct EventMass {
  Rational probability = 0;
  Rational x_base_mass = 0;
  Rational x_shifted_mass = 0;

  Rational expected_base() const { return x_base_mass / probability; }
  Rational expected_shifted() const { return x_shifted_mass / probability; }

  void add(const Rational& p, Count x_base, Count x_shifted) {
    probability += p;
    x_base_mass += p * x_base;
    x_shifted_mass += p * x_shifted;
  }
};

struct EventTable {
  Allocation alloc;
  BinIndex i = 1;
  WeightVector weights;
  std::map<EventClass, EventMass> rows;
  /// P(F_1j^{a,b}) without removing C_a, keyed by (j, a, b).
  std::map<std::tuple<BinIndex, Count, Count>, Rational> f_1j_with_ca;
  /// F_1j^{r,1} \ C_a split by whether bin i was over-selected at S
  /// (k_{i,S} > n_i), keyed by (j, r, over_selected).
  std::map<std::tuple<BinIndex, Count, bool>, EventMass> f_1j_r1_split;
  std::uint64_t traces = 0;
  std::uint64_t nodes = 0;

  Rational total_probability() const {
    Rational s = 0;
    for (const auto& [_, m] : rows) s += m.probability;
    return s;
  }
  Rational reconstruct_base() const {
    Rational s = 0;
    for (const auto& [_, m] : rows) s += m.x_base_mass;
    return s;
  }
  Rational reconstruct_shifted() const {
    Rational s = 0;
    for (const auto& [_, m] : rows) s += m.x_shifted_mass;
    return s;
  }
  const EventMass* find(const EventClass& e) const {
    auto it = rows.find(e);
    return it == rows.end() ? nullptr : &it->second;
  }
};

namespace detail {

template <class PerTrace>
EventTable tabulate(const Allocation& alloc, BinIndex i, const WeightVector& weights,
                    const EnumerationLimits& limits, PerTrace&& per_trace) {
  EventTable table{alloc, i, weights};
  table.nodes = for_each_coupled_trace(alloc, i, weights, limits, [&](const RemovalTrace& trace) {
    const CoupledOutcome o = analyze_coupled_trace(alloc, i, trace.selections);
    ++table.traces;
    table.rows[o.event].add(trace.probability, o.x_base, *o.x_shifted);

    const auto [p, q] = o.last_two;
    if ((p == 0 || q == 0) && p != i && q != i) {
      const bool first_is_1 = o.first_b_bins[0] == 0;
      const BinIndex j = first_is_1 ? o.first_b_bins[1] : o.first_b_bins[0];
      const Count a = first_is_1 ? o.first_b_counts[0] : o.first_b_counts[1];
      const Count b = first_is_1 ? o.first_b_counts[1] : o.first_b_counts[0];
      table.f_1j_with_ca[{j, a, b}] += trace.probability;
    }
    if (o.event.tag == EventTag::f_1j && o.event.a >= 2 && o.event.b == 1) {
      const bool over = o.stop.state_at_s.selection_counts[i] > alloc[i];
      table.f_1j_r1_split[{o.event.j, o.event.a, over}].add(trace.probability, o.x_base,
                                                             *o.x_shifted);
    }
    per_trace(trace, o);
  });
  return table;
}

}  // namespace detail

/// Exact probability and conditional expectations of X under both runs for
/// every event in the partition.
inline EventTable event_distribution(const Allocation& alloc, BinIndex i,
                                     const WeightVector& weights,
                                     const EnumerationLimits& limits = {}) {
  return detail::tabulate(alloc, i, weights, limits, [](const RemovalTrace&, const CoupledOutcome&) {});
}

struct ClaimCheck {
  std::string name;
  bool passed = true;
  std::string detail;
  std::optional<RemovalTrace> counterexample;
};

struct CouplingReport {
  EventTable table;
  std::vector<ClaimCheck> claims;
  /// False when weights are non-uniform; the claims are then exploratory.
  bool proven_scope = true;

  bool all_passed() const {
    return std::all_of(claims.begin(), claims.end(), [](const ClaimCheck& c) { return c.passed; });
  }
};

namespace detail {

inline std::string show(const Rational& q) { return ballsbins::to_string(q); }

inline void fail_claim(ClaimCheck& c, std::string why, const RemovalTrace* trace = nullptr) {
  if (!c.passed) return;  // keep the first counterexample
  c.passed = false;
  c.detail = std::move(why);
  if (trace) c.counterexample = *trace;
}

}  // namespace detail

/// Per-trace and aggregate checks of the coupling argument:
///  - partition and law-of-total-expectation reconstruction for both runs,
///  - T(shifted) >= S on every trace,
///  - equal conditional means on C_a; strictly larger base mean on F_1i \ C_a,
///  - X equal under both runs on F_empty \ C_a; both equal 1 on F_1j^{1,1} \ C_a,
///  - the conditional means on F_1j^{r,1} and F_1j^{1,r} match the two- and
///    three-bin values f(r,1), f(r,0), f(r-1,1), f(r-1,1,1),
///  - the event-level differences add up to f(n) - f(shifted) > 0,
///  - P(F_1i \ C_a) > 0 when n_i >= 1.
inline CouplingReport verify_coupling_claims(const Allocation& alloc, BinIndex i,
                                             const WeightVector& weights,
                                             const EnumerationLimits& limits = {}) {
  using detail::fail_claim;
  using detail::show;

  CouplingReport report;
  report.proven_scope = weights.is_uniform();

  ClaimCheck lemma2{"T(shifted) >= S"};
  ClaimCheck equal_on_empty{"X_base = X_shifted on F_empty\\C_a"};
  ClaimCheck ones_on_11{"X_base = X_shifted = 1 on F_1j^{1,1}\\C_a"};
  ClaimCheck split_cases{"k_{i,S} >= n_i on F_1j\\C_a"};

  report.table = detail::tabulate(
      alloc, i, weights, limits, [&](const RemovalTrace& trace, const CoupledOutcome& o) {
        if (*o.t_shifted < o.stop.s_round)
          fail_claim(lemma2,
                     "T(shifted)=" + std::to_string(*o.t_shifted) +
                         " < S=" + std::to_string(o.stop.s_round),
                     &trace);
        if (o.event.tag == EventTag::f_empty && o.x_base != *o.x_shifted)
          fail_claim(equal_on_empty,
                     "X_base=" + std::to_string(o.x_base) +
                         " X_shifted=" + std::to_string(*o.x_shifted),
                     &trace);
        if (o.event.tag == EventTag::f_1j && o.event.a == 1 && o.event.b == 1 &&
            (o.x_base != 1 || *o.x_shifted != 1))
          fail_claim(ones_on_11,
                     "X_base=" + std::to_string(o.x_base) +
                         " X_shifted=" + std::to_string(*o.x_shifted),
                     &trace);
        if (o.event.tag == EventTag::f_1j && o.stop.state_at_s.selection_counts[i] < alloc[i])
          fail_claim(split_cases, "bin i still non-empty at S", &trace);
      });
  const EventTable& t = report.table;

  ExactSolver solver(weights);
  const Allocation shifted_alloc = alloc.transfer(0, i);
  const Rational f_base = solver.expected_remaining(alloc);
  const Rational f_shifted = solver.expected_remaining(shifted_alloc);

  ClaimCheck partition{"partition probabilities sum to 1"};
  if (t.total_probability() != 1)
    fail_claim(partition, "sum = " + show(t.total_probability()));

  ClaimCheck recon_base{"E[X_base] reconstructed from the partition"};
  if (t.reconstruct_base() != f_base)
    fail_claim(recon_base, show(t.reconstruct_base()) + " != f = " + show(f_base));
  ClaimCheck recon_shifted{"E[X_shifted] reconstructed from the partition"};
  if (t.reconstruct_shifted() != f_shifted)
    fail_claim(recon_shifted, show(t.reconstruct_shifted()) + " != f = " + show(f_shifted));

  ClaimCheck equal_on_ca{"E[X_base | C_a] = E[X_shifted | C_a]"};
  if (const auto* m = t.find(EventClass::c_a());
      m && m->expected_base() != m->expected_shifted())
    fail_claim(equal_on_ca, show(m->expected_base()) + " vs " + show(m->expected_shifted()));

  ClaimCheck larger_on_1i{"E[X_base | F_1i\\C_a] > E[X_shifted | F_1i\\C_a]"};
  if (const auto* m = t.find(EventClass::f_1i());
      m && !(m->expected_base() > m->expected_shifted()))
    fail_claim(larger_on_1i, show(m->expected_base()) + " vs " + show(m->expected_shifted()));

  ClaimCheck identities{"conditional means on F_1j^{r,1} and F_1j^{1,r}"};
  for (const auto& [event, m] : t.rows) {
    if (event.tag != EventTag::f_1j || (event.a == 1 && event.b == 1)) continue;
    const BinIndex j = event.j;
    const Count r = std::max(event.a, event.b);
    ExactSolver pair(weights.restricted({0, j}));
    const Rational f_r1 = pair.expected_remaining(Allocation{r, 1});
    const std::string where = event.label();
    if (m.expected_base() != f_r1)
      fail_claim(identities, "E[X_base | " + where + "] = " + show(m.expected_base()) +
                                 ", expected f(r,1) = " + show(f_r1));
    if (event.b == r && m.expected_shifted() != r)
      fail_claim(identities, "E[X_shifted | " + where + "] = " + show(m.expected_shifted()) +
                                 ", expected f(r,0) = " + std::to_string(r));
  }
  for (const auto& [key, m] : t.f_1j_r1_split) {
    const auto [j, r, over] = key;
    Rational expected;
    if (over) {
      expected = ExactSolver(weights.restricted({0, j})).expected_remaining(Allocation{r - 1, 1});
    } else {
      expected =
          ExactSolver(weights.restricted({0, j, i})).expected_remaining(Allocation{r - 1, 1, 1});
    }
    if (m.expected_shifted() != expected)
      fail_claim(identities, "E[X_shifted | F_1" + std::to_string(j + 1) + "^{" +
                                 std::to_string(r) + ",1}\\C_a, k_{i,S} " +
                                 (over ? "> n_i" : "= n_i") + "] = " +
                                 show(m.expected_shifted()) + ", expected " + show(expected));
  }

  ClaimCheck decrease{"sum of event-level differences = f(n) - f(shifted) > 0"};
  Rational diff = 0;
  for (const auto& [_, m] : t.rows) diff += m.x_base_mass - m.x_shifted_mass;
  if (diff != f_base - f_shifted || sgn(diff) <= 0)
    fail_claim(decrease, "difference = " + show(diff) + ", f(n) - f(shifted) = " +
                             show(f_base - f_shifted));

  ClaimCheck positive_1i{"P(F_1i\\C_a) > 0"};
  if (alloc[i] >= 1) {
    const auto* m = t.find(EventClass::f_1i());
    if (!m || sgn(m->probability) <= 0) fail_claim(positive_1i, "event has probability 0");
  } else {
    positive_1i.detail = "not applicable: n_i = 0, bin i is never non-empty in the base run";
  }

  report.claims = {partition,    recon_base,  recon_shifted,  lemma2,      equal_on_ca,
                   larger_on_1i, equal_on_empty, ones_on_11,  split_cases, identities,
                   decrease,     positive_1i};
  return report;
}

struct PairCheck {
  BinIndex j = 0;
  Count r = 0;
  Rational p_r1 = 0;  // P(F_1j^{r,1}[\C_a])
  Rational p_1r = 0;  // P(F_1j^{1,r}[\C_a])
  bool passed() const { return p_r1 >= p_1r; }
};

struct LemmaReport {
  /// P(F_1j^{r,1}) >= P(F_1j^{1,r})
  std::vector<PairCheck> without_removal;
  /// P(F_1j^{r,1} \ C_a) >= P(F_1j^{1,r} \ C_a)
  std::vector<PairCheck> with_removal;
  bool proven_scope = true;

  bool all_passed() const {
    auto ok = [](const PairCheck& c) { return c.passed(); };
    return std::all_of(without_removal.begin(), without_removal.end(), ok) &&
           std::all_of(with_removal.begin(), with_removal.end(), ok);
  }
};

/// For every j outside {1, i} and r >= 2 that occurs in the table, compares
/// the probabilities of finishing with bins (1, j) at (r, 1) versus (1, r).
inline LemmaReport verify_lemma_inequalities(const EventTable& t) {
  LemmaReport report;
  report.proven_scope = t.weights.is_uniform();

  std::map<std::pair<BinIndex, Count>, PairCheck> plain, removed;
  auto touch = [](auto& m, BinIndex j, Count r) -> PairCheck& {
    auto& c = m[{j, r}];
    c.j = j;
    c.r = r;
    return c;
  };
  for (const auto& [key, p] : t.f_1j_with_ca) {
    const auto [j, a, b] = key;
    if (a >= 2 && b == 1) touch(plain, j, a).p_r1 += p;
    if (a == 1 && b >= 2) touch(plain, j, b).p_1r += p;
  }
  for (const auto& [event, m] : t.rows) {
    if (event.tag != EventTag::f_1j) continue;
    if (event.a >= 2 && event.b == 1) touch(removed, event.j, event.a).p_r1 += m.probability;
    if (event.a == 1 && event.b >= 2) touch(removed, event.j, event.b).p_1r += m.probability;
  }
  for (auto& [_, c] : plain) report.without_removal.push_back(c);
  for (auto& [_, c] : removed) report.with_removal.push_back(c);
  return report;
}

inline LemmaReport verify_lemma_inequalities(const Allocation& alloc, BinIndex i,
                                             const WeightVector& weights,
                                             const EnumerationLimits& limits = {}) {
  return verify_lemma_inequalities(event_distribution(alloc, i, weights, limits));
}

}  // namespace ballsbins
