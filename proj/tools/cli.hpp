#pragma once

// ballsbins command-line front end.
//
//   exact     f for one allocation
//   optimize  exact minimisers over all allocations of n balls into k bins
//   events    event partition table for a coupled pair (n, n - e_1 + e_i)
//   simulate  Monte Carlo estimate of E[X] and the law of X
//   verify    batch checks (theorem1, lemma1, closed-forms, chain, events, all)
//   scan      optimal vs balanced/proportional allocations for non-uniform weights
//
// Exit status: 0 success, 1 invalid input, 2 budget exhausted, 3 a verification
// check failed. Bins are numbered from 1 on the command line.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ballsbins/ballsbins.hpp"

namespace ballsbins::cli {

using Json = nlohmann::ordered_json;

enum ExitCode : int { ok = 0, invalid_input = 1, budget_exhausted = 2, check_failed = 3 };

namespace detail {

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Decimal approximation as a JSON number (round-half-even at `digits`).
inline Json approx(const Rational& q, unsigned digits) {
  return Json::parse(to_decimal(q, digits));
}

inline WeightVector weights_or_uniform(const std::string& text, std::size_t k) {
  return text.empty() ? WeightVector::uniform(k) : WeightVector::parse(text);
}

/// Default for an omitted --i: the lowest-index bin of minimum count.
inline BinIndex min_count_bin(const Allocation& a) {
  BinIndex best = 0;
  for (BinIndex j = 1; j < a.bins(); ++j)
    if (a[j] < a[best]) best = j;
  return best;
}

inline std::pair<Count, Count> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  const std::string lo = text.substr(0, dots);
  const std::string hi = dots == std::string::npos ? lo : text.substr(dots + 2);
  if (!ballsbins::detail::all_digits(lo) || !ballsbins::detail::all_digits(hi) || lo.size() > 15 ||
      hi.size() > 15)
    fail_malformed("range '" + text + "' (expected FROM..TO)");
  return {std::stoll(lo), std::stoll(hi)};
}

inline Json checks_json(const std::vector<ClaimCheck>& checks) {
  Json arr = Json::array();
  for (const auto& c : checks) {
    Json j{{"name", c.name}, {"passed", c.passed}};
    if (!c.detail.empty()) j["detail"] = c.detail;
    if (c.counterexample) {
      Json sel = Json::array();
      for (auto b : c.counterexample->selections) sel.push_back(b + 1);
      j["counterexample"] = {{"selections", sel},
                             {"probability", to_string(c.counterexample->probability)}};
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

inline Json pair_checks_json(const std::vector<PairCheck>& checks) {
  Json arr = Json::array();
  for (const auto& c : checks)
    arr.push_back({{"j", c.j + 1},
                   {"r", c.r},
                   {"p_r1", to_string(c.p_r1)},
                   {"p_1r", to_string(c.p_1r)},
                   {"passed", c.passed()}});
  return arr;
}

inline Json summary_json(const SimSummary& s) {
  Json hist = Json::object();
  for (const auto& [x, c] : s.histogram_x) hist[std::to_string(x)] = c;
  return {{"mean_X", s.mean_x},
          {"stderr_X", s.stderr_x},
          {"mean_T", s.mean_t},
          {"trials", s.trials},
          {"histogram_X", hist}};
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact and Monte Carlo tools for the balls-in-bins removal process", "ballsbins"};
  app.require_subcommand(1);

  auto add_format = [&](CLI::App* sub, std::string& format) {
    sub->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
  };

  // exact
  auto* exact = app.add_subcommand("exact", "Exact expected number of remaining balls");
  std::string e_alloc, e_weights;
  unsigned digits = 6;
  std::size_t state_budget = SolverConfig{}.state_budget;
  exact->add_option("--alloc", e_alloc, "Balls per bin, e.g. 5,1")->required();
  exact->add_option("--weights", e_weights, "Selection probabilities, e.g. 5/6,1/6 (default uniform)");
  exact->add_option("--digits", digits, "Digits of the decimal approximation")->capture_default_str();
  exact->add_option("--budget", state_budget, "Maximum memoised states")->capture_default_str();
  std::string e_format = "json";
  add_format(exact, e_format);

  // optimize
  auto* optimize = app.add_subcommand("optimize", "Exact minimisers of f over all allocations");
  std::string o_alloc, o_weights;
  Count o_n = -1;
  std::size_t o_k = 0;
  auto* o_alloc_opt =
      optimize->add_option("--alloc", o_alloc, "Use this allocation's total and bin count, and report whether it is optimal");
  auto* o_n_opt = optimize->add_option("--n", o_n, "Number of balls");
  auto* o_k_opt = optimize->add_option("--k", o_k, "Number of bins");
  o_alloc_opt->excludes(o_n_opt)->excludes(o_k_opt);
  optimize->add_option("--weights", o_weights, "Selection probabilities (default uniform)");
  optimize->add_option("--digits", digits, "Digits of the decimal approximation")->capture_default_str();
  optimize->add_option("--budget", state_budget, "Maximum memoised states")->capture_default_str();

  // events
  auto* events = app.add_subcommand("events", "Event partition of coupled traces (small instances)");
  std::string v_alloc, v_weights;
  std::size_t v_i = 0;
  EnumerationLimits limits;
  bool v_csv = false, v_verify = false;
  events->add_option("--alloc", v_alloc, "Balls per bin; bin 1 must hold a maximal count")->required();
  events->add_option("--i", v_i, "Receiving bin (default: lowest-index bin of minimum count)");
  events->add_option("--weights", v_weights, "Selection probabilities (default uniform)");
  events->add_option("--budget", limits.max_nodes, "Maximum enumeration tree nodes")->capture_default_str();
  events->add_option("--max-total", limits.max_total, "Largest admissible ball total")->capture_default_str();
  events->add_option("--max-bins", limits.max_bins, "Largest admissible bin count")->capture_default_str();
  events->add_flag("--csv", v_csv, "Shorthand for --format csv");
  events->add_flag("--verify", v_verify, "Also run the coupling and lemma checks (exit 3 on failure)");
  std::string v_format = "json";
  add_format(events, v_format);

  // simulate
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo estimate of E[X]");
  std::string s_alloc, s_weights, s_mode = "discrete";
  SimConfig sim;
  bool s_hist = false, s_compare = false;
  simulate_cmd->add_option("--alloc", s_alloc, "Balls per bin")->required();
  simulate_cmd->add_option("--weights", s_weights, "Selection probabilities (default uniform)");
  simulate_cmd->add_option("--trials", sim.trials, "Number of trials")->capture_default_str();
  simulate_cmd->add_option("--seed", sim.seed, "Base seed")->capture_default_str();
  simulate_cmd->add_option("--mode", s_mode, "discrete or continuous")
      ->check(CLI::IsMember({"discrete", "continuous"}))
      ->capture_default_str();
  simulate_cmd->add_flag("--literal", sim.literal,
                         "Discrete mode: select among all bins, empty ones included; T is wall-clock rounds");
  simulate_cmd->add_option("--threads", sim.threads, "Worker threads")->capture_default_str();
  simulate_cmd->add_flag("--hist", s_hist, "Emit the X histogram as CSV (value,count)");
  simulate_cmd->add_flag("--compare", s_compare, "Run both modes and compare them");

  // verify
  auto* verify = app.add_subcommand("verify", "Run verification suites");
  std::string suite = "all";
  Count n_max = 0;
  std::size_t k_max = 0;
  verify->add_option("--suite", suite, "theorem1 | lemma1 | closed-forms | chain | events | all")
      ->check(CLI::IsMember({"theorem1", "lemma1", "closed-forms", "chain", "events", "all"}))
      ->capture_default_str();
  verify->add_option("--n-max", n_max,
                     "Size bound (defaults: theorem1 20, lemma1 30, closed-forms 12, chain 20, events 10)");
  verify->add_option("--k-max", k_max, "Largest bin count (defaults: theorem1 4, events 3)");
  verify->add_option("--budget", state_budget, "Maximum memoised states")->capture_default_str();
  verify->add_option("--node-budget", limits.max_nodes, "Maximum enumeration tree nodes")->capture_default_str();

  // scan
  auto* scan = app.add_subcommand("scan", "Optimal vs balanced/proportional allocations, non-uniform weights");
  std::size_t c_k = 0;
  std::string c_weights, c_range;
  scan->add_option("--k", c_k, "Number of bins")->required();
  scan->add_option("--weights", c_weights, "Non-uniform selection probabilities")->required();
  scan->add_option("--n", c_range, "Range of totals, FROM..TO")->required();
  scan->add_option("--budget", state_budget, "Maximum memoised states")->capture_default_str();
  std::string c_format = "csv";
  add_format(scan, c_format);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? ok : invalid_input;
  }

  try {
    const SolverConfig solver_config{state_budget};

    if (*exact) {
      const auto alloc = Allocation::parse(e_alloc);
      const auto weights = detail::weights_or_uniform(e_weights, alloc.bins());
      require_same_length(alloc, weights);
      const Rational f = expected_remaining(alloc, weights, solver_config);
      if (e_format == "csv") {
        out << "alloc,weights,f,approx\n"
            << detail::csv_quote(alloc.to_string()) << ',' << detail::csv_quote(weights.to_string())
            << ',' << to_string(f) << ',' << to_decimal(f, digits) << '\n';
      } else {
        Json j{{"f", to_string(f)}, {"approx", detail::approx(f, digits)},
               {"alloc", alloc.to_string()}, {"weights", weights.to_string()}};
        if (alloc.bins() == 1) j["note"] = "single bin: X equals the total";
        out << j.dump() << '\n';
      }
      return ok;
    }

    if (*optimize) {
      std::optional<Allocation> query;
      if (!o_alloc.empty()) {
        query = Allocation::parse(o_alloc);
        o_n = query->total();
        o_k = query->bins();
      } else if (o_n < 0 || o_k == 0) {
        fail_invalid("optimize needs --alloc or both --n and --k");
      }
      const auto weights = detail::weights_or_uniform(o_weights, o_k);
      if (weights.bins() != o_k)
        fail_mismatch("k=" + std::to_string(o_k) + " but weights have " +
                      std::to_string(weights.bins()) + " entries");
      ExactSolver solver(weights, solver_config);
      const auto res = optimal_allocations(solver, o_n, o_k);
      Json mins = Json::array();
      for (const auto& m : res.minimizers) mins.push_back(m.to_string());
      Json j{{"n", o_n},
             {"k", o_k},
             {"minimizers", mins},
             {"min_value", to_string(res.min_value)},
             {"approx", detail::approx(res.min_value, digits)},
             {"evaluated", res.evaluated},
             {"used_symmetry", res.used_symmetry}};
      if (query) {
        const Rational v = solver.expected_remaining(*query);
        j["query"] = query->to_string();
        j["query_value"] = to_string(v);
        j["query_optimal"] = v == res.min_value;
      }
      out << j.dump() << '\n';
      return ok;
    }

    if (*events) {
      const auto alloc = Allocation::parse(v_alloc);
      const auto weights = detail::weights_or_uniform(v_weights, alloc.bins());
      const BinIndex i = v_i == 0 ? detail::min_count_bin(alloc) : v_i - 1;
      if (v_csv) v_format = "csv";
      std::optional<CouplingReport> report;
      std::optional<LemmaReport> lemmas;
      EventTable table;
      if (v_verify) {
        report = verify_coupling_claims(alloc, i, weights, limits);
        lemmas = verify_lemma_inequalities(report->table);
        table = report->table;
      } else {
        table = event_distribution(alloc, i, weights, limits);
      }
      const bool failed = report && (!report->all_passed() || !lemmas->all_passed());
      if (v_format == "csv") {
        out << "event,probability,e_x_base,e_x_shifted\n";
        for (const auto& [e, m] : table.rows)
          out << detail::csv_quote(e.label()) << ',' << to_string(m.probability) << ','
              << to_string(m.expected_base()) << ',' << to_string(m.expected_shifted()) << '\n';
      } else {
        Json rows = Json::array();
        for (const auto& [e, m] : table.rows)
          rows.push_back({{"event", e.label()},
                          {"probability", to_string(m.probability)},
                          {"e_x_base", to_string(m.expected_base())},
                          {"e_x_shifted", to_string(m.expected_shifted())}});
        Json j{{"alloc", alloc.to_string()},
               {"i", i + 1},
               {"weights", weights.to_string()},
               {"proven_scope", weights.is_uniform()},
               {"traces", table.traces},
               {"nodes", table.nodes},
               {"total_probability", to_string(table.total_probability())},
               {"rows", rows}};
        if (!weights.is_uniform()) j["note"] = "outside proven scope: non-uniform weights";
        if (report) {
          j["claims"] = detail::checks_json(report->claims);
          j["lemma_r1_vs_1r"] = detail::pair_checks_json(lemmas->without_removal);
          j["lemma_r1_vs_1r_without_ca"] = detail::pair_checks_json(lemmas->with_removal);
          j["passed"] = !failed;
        }
        out << j.dump() << '\n';
      }
      return failed ? check_failed : ok;
    }

    if (*simulate_cmd) {
      const auto alloc = Allocation::parse(s_alloc);
      const auto weights = detail::weights_or_uniform(s_weights, alloc.bins());
      sim.mode = s_mode == "continuous" ? SimMode::continuous : SimMode::discrete;
      if (s_compare) {
        const auto cmp = compare_modes(alloc, weights, sim.trials, sim.seed, {}, sim.threads);
        Json j{{"alloc", alloc.to_string()},
               {"weights", weights.to_string()},
               {"seed", sim.seed},
               {"discrete", detail::summary_json(cmp.discrete)},
               {"continuous", detail::summary_json(cmp.continuous)},
               {"z", cmp.z},
               {"chi_square", cmp.chi_square},
               {"degrees_of_freedom", cmp.degrees_of_freedom},
               {"agree", cmp.agree()}};
        out << j.dump() << '\n';
        return ok;
      }
      const auto s = simulate(alloc, weights, sim);
      if (s_hist) {
        out << "value,count\n";
        for (const auto& [x, c] : s.histogram_x) out << x << ',' << c << '\n';
        return ok;
      }
      Json j{{"alloc", alloc.to_string()},
             {"weights", weights.to_string()},
             {"mode", to_string(sim.mode)},
             {"literal", sim.literal},
             {"seed", sim.seed}};
      j.update(detail::summary_json(s));
      out << j.dump() << '\n';
      return ok;
    }

    if (*verify) {
      auto pick = [](Count given, Count def) { return given > 0 ? given : def; };
      Json suites_json = Json::array();
      bool all_ok = true;
      bool budget_hit = false;
      auto record = [&](const std::string& name, const suites::SuiteResult& r) {
        Json j{{"suite", name}, {"passed", r.passed()}, {"checks", detail::checks_json(r.checks)}};
        if (r.aborted) {
          j["aborted"] = *r.aborted;
          budget_hit = true;
        }
        all_ok = all_ok && r.passed();
        suites_json.push_back(std::move(j));
      };
      const bool all = suite == "all";
      if (all || suite == "theorem1")
        record("theorem1", suites::theorem1(pick(n_max, 20), k_max ? k_max : 4, solver_config));
      if (all || suite == "lemma1") record("lemma1", suites::lemma1(pick(n_max, 30)));
      if (all || suite == "closed-forms")
        record("closed-forms", suites::closed_forms(pick(n_max, 12)));
      if (all || suite == "chain") record("chain", suites::proof_chain(pick(n_max, 20)));
      if (all || suite == "events")
        record("events", suites::events(pick(n_max, 10), k_max ? k_max : 3,
                                        {pick(n_max, 10), k_max ? k_max : 3, limits.max_nodes}));
      out << Json{{"passed", all_ok}, {"suites", suites_json}}.dump() << '\n';
      if (budget_hit) return budget_exhausted;
      return all_ok ? ok : check_failed;
    }

    if (*scan) {
      const auto weights = WeightVector::parse(c_weights);
      const auto [from, to] = detail::parse_range(c_range);
      if (c_format == "csv") out << "n,optimal,min_value,balanced_dist,proportional_dist\n";
      Json rows = Json::array();
      const auto stopped = conjecture_scan(
          c_k, weights, from, to,
          [&](const ScanRow& r) {
            if (c_format == "csv") {
              out << r.n << ',' << detail::csv_quote(r.optimal.to_string()) << ','
                  << to_string(r.min_value) << ',' << r.balanced_distance << ','
                  << r.proportional_distance << '\n';
            } else {
              rows.push_back({{"n", r.n},
                              {"optimal", r.optimal.to_string()},
                              {"min_value", to_string(r.min_value)},
                              {"balanced_dist", r.balanced_distance},
                              {"proportional_dist", r.proportional_distance}});
            }
          },
          solver_config);
      if (c_format == "json") {
        Json j{{"k", c_k}, {"weights", weights.to_string()}, {"rows", rows}};
        if (stopped) j["partial"] = *stopped;
        out << j.dump() << '\n';
      } else if (stopped) {
        out << "# partial: " << *stopped << '\n';
      }
      if (stopped) {
        err << "error: " << *stopped << '\n';
        return budget_exhausted;
      }
      return ok;
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return invalid_input;
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << '\n';
    return budget_exhausted;
  }
  return ok;
}

}  // namespace ballsbins::cli
