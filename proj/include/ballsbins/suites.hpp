#pragma once

// Batch checks run by `ballsbins verify`. Each suite returns one ClaimCheck
// per verified statement; a suite passes when all of them do.

#include <string>
#include <utility>
#include <vector>

#include "ballsbins/core_model.hpp"
#include "ballsbins/event_enumerator.hpp"
#include "ballsbins/exact_solver.hpp"
#include "ballsbins/optimizer.hpp"

namespace ballsbins::suites {

struct SuiteResult {
  std::vector<ClaimCheck> checks;
  /// Budget error text when the suite stopped early.
  std::optional<std::string> aborted;

  bool passed() const {
    return !aborted && std::all_of(checks.begin(), checks.end(),
                                   [](const ClaimCheck& c) { return c.passed; });
  }
};

inline SuiteResult theorem1(Count n_max, std::size_t k_max, SolverConfig config = {}) {
  SuiteResult out;
  const auto report = verify_theorem1(n_max, k_max, config);
  for (const auto& row : report.rows) {
    ClaimCheck c{"minimisers = balanced family, n=" + std::to_string(row.n) +
                 " k=" + std::to_string(row.k)};
    c.passed = row.passed();
    c.detail = "min f = " + to_string(row.result.min_value) + " over " +
               std::to_string(row.result.minimizers.size()) + " minimiser(s)";
    if (!row.recheck_ok) c.detail += "; fresh-solver recomputation disagrees";
    out.checks.push_back(std::move(c));
  }
  out.aborted = report.aborted;
  return out;
}

/// Two bins, uniform: the balanced split is optimal, strictly unless the
/// other split is also balanced, and moving a ball from a bin holding at
/// least two more strictly lowers f.
inline SuiteResult lemma1(Count n_max) {
  SuiteResult out;
  ExactSolver solver(WeightVector::uniform(2));
  auto f = [&](Count a, Count b) { return solver.expected_remaining(Allocation{a, b}); };
  for (Count n = 0; n <= n_max; ++n) {
    ClaimCheck c{"balanced split optimal, n=" + std::to_string(n)};
    const Rational best = f((n + 1) / 2, n / 2);
    for (Count a = 0; a <= n; ++a) {
      const Rational v = f(a, n - a);
      const bool strict_expected = std::abs(a - (n - a)) > 1;
      if (v < best || strict_expected != (best < v)) {
        c.passed = false;
        c.detail = "f(" + std::to_string(a) + "," + std::to_string(n - a) + ") = " +
                   to_string(v) + " vs balanced " + to_string(best);
        break;
      }
    }
    out.checks.push_back(std::move(c));
  }
  ClaimCheck step{"f(a,b) > f(a-1,b+1) whenever a >= b+2, a+b <= " + std::to_string(n_max)};
  for (Count n = 2; n <= n_max && step.passed; ++n)
    for (Count b = 0; 2 * b + 2 <= n; ++b) {
      const Count a = n - b;
      if (!(f(a, b) > f(a - 1, b + 1))) {
        step.passed = false;
        step.detail = "fails at (" + std::to_string(a) + "," + std::to_string(b) + ")";
        break;
      }
    }
  out.checks.push_back(std::move(step));
  return out;
}

inline const std::vector<Rational>& closed_form_probabilities() {
  static const std::vector<Rational> ps{Rational(1, 6), Rational(1, 3), Rational(1, 2),
                                        Rational(5, 6)};
  return ps;
}

inline SuiteResult closed_forms(Count a_max) {
  SuiteResult out;
  for (const auto& p : closed_form_probabilities()) {
    ExactSolver solver(WeightVector({p, 1 - p}));
    ClaimCheck c1{"f_p(a,1) closed form, p=" + to_string(p)};
    ClaimCheck c2{"f_p(a,2) closed form, p=" + to_string(p)};
    for (Count a = 0; a <= a_max; ++a) {
      if (a >= 1 && c1.passed && closed_form_b1(a, p) != solver.expected_remaining(Allocation{a, 1})) {
        c1.passed = false;
        c1.detail = "a=" + std::to_string(a);
      }
      if (c2.passed && closed_form_b2(a, p) != solver.expected_remaining(Allocation{a, 2})) {
        c2.passed = false;
        c2.detail = "a=" + std::to_string(a);
      }
    }
    out.checks.push_back(std::move(c1));
    out.checks.push_back(std::move(c2));
  }
  return out;
}

/// f(r-1,1,1) <= f(r-1,1) and f(r-1,1) < r = f(r,0) for 2 <= r <= r_max.
inline SuiteResult proof_chain(Count r_max) {
  SuiteResult out;
  ExactSolver two(WeightVector::uniform(2));
  ExactSolver three(WeightVector::uniform(3));
  ClaimCheck c3{"f(r-1,1,1) <= f(r-1,1), 2 <= r <= " + std::to_string(r_max)};
  ClaimCheck c2{"f(r-1,1) < r = f(r,0), 2 <= r <= " + std::to_string(r_max)};
  for (Count r = 2; r <= r_max; ++r) {
    const Rational f21 = two.expected_remaining(Allocation{r - 1, 1});
    if (c3.passed && !(three.expected_remaining(Allocation{r - 1, 1, 1}) <= f21)) {
      c3.passed = false;
      c3.detail = "r=" + std::to_string(r);
    }
    if (c2.passed && !(f21 < r && two.expected_remaining(Allocation{r, 0}) == r)) {
      c2.passed = false;
      c2.detail = "r=" + std::to_string(r);
    }
  }
  out.checks.push_back(std::move(c3));
  out.checks.push_back(std::move(c2));
  return out;
}

/// (allocation, i) pairs the event partition is defined for: bin 1 maximal,
/// n_1 >= n_i + 2, at least two non-empty bins, total <= max_total.
inline std::vector<std::pair<Allocation, BinIndex>> admissible_instances(Count max_total,
                                                                          std::size_t k) {
  std::vector<std::pair<Allocation, BinIndex>> out;
  for (Count n = 2; n <= max_total; ++n)
    for_each_composition(n, k, false, [&](const Allocation& a) {
      for (std::size_t j = 1; j < k; ++j)
        if (a[j] > a[0]) return;
      if (a.non_empty() < 2) return;
      for (BinIndex i = 1; i < k; ++i)
        if (a[0] >= a[i] + 2) out.emplace_back(a, i);
    });
  return out;
}

inline SuiteResult events(Count max_total, std::size_t k_max, EnumerationLimits limits = {}) {
  SuiteResult out;
  try {
    for (std::size_t k = 2; k <= k_max; ++k) {
      for (const auto& [alloc, i] : admissible_instances(max_total, k)) {
        const auto weights = WeightVector::uniform(k);
        const auto report = verify_coupling_claims(alloc, i, weights, limits);
        const auto lemmas = verify_lemma_inequalities(report.table);
        ClaimCheck c{"coupling claims, n=(" + alloc.to_string() + ") i=" + std::to_string(i + 1)};
        for (const auto& claim : report.claims)
          if (!claim.passed) {
            c.passed = false;
            c.detail = claim.name + ": " + claim.detail;
            break;
          }
        if (c.passed && !lemmas.all_passed()) {
          c.passed = false;
          c.detail = "P(F^{r,1}) >= P(F^{1,r}) comparison fails";
        }
        out.checks.push_back(std::move(c));
      }
    }
  } catch (const BudgetExceeded& e) {
    out.aborted = e.what();
  }
  return out;
}

}  // namespace ballsbins::suites
