#include <gtest/gtest.h>

#include <sstream>

#include "cli.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "ballsbins");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = ballsbins::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

nlohmann::ordered_json json_of(const Result& r) { return nlohmann::ordered_json::parse(r.out); }

}  // namespace

TEST(CliExact, CounterexampleValue) {
  const auto r = run({"exact", "--alloc", "5,1", "--weights", "5/6,1/6"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out,
            "{\"f\":\"3125/1296\",\"approx\":2.411265,\"alloc\":\"5,1\",\"weights\":\"5/6,1/6\"}\n");
  const auto j = json_of(r);
  EXPECT_EQ(ballsbins::parse_rational(j["f"].get<std::string>()), ballsbins::Rational(3125, 1296));
}

TEST(CliExact, CsvAndDigits) {
  const auto r = run({"exact", "--alloc", "4,2", "--weights", "5/6,1/6", "--format", "csv",
                      "--digits", "3"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "alloc,weights,f,approx\n\"4,2\",\"5/6,1/6\",139/81,1.716\n");
}

TEST(CliExact, UniformDefaultAndSingleBinNote) {
  EXPECT_EQ(json_of(run({"exact", "--alloc", "2,1"}))["f"], "3/2");
  const auto j = json_of(run({"exact", "--alloc", "7"}));
  EXPECT_EQ(j["f"], "7");
  EXPECT_TRUE(j.contains("note"));
}

TEST(CliExact, ErrorsMapToExitCodes) {
  auto r = run({"exact", "--alloc", "5,x"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: malformed input: ", 0), 0u) << r.err;
  r = run({"exact", "--alloc", "5,1", "--weights", "1/2,1/3,1/6"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: length mismatch: ", 0), 0u) << r.err;
  r = run({"exact", "--alloc", "5,1", "--weights", "1/2,1/3"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: invalid argument: ", 0), 0u) << r.err;
  r = run({"exact", "--alloc", "9,9,9", "--budget", "10"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.err.rfind("error: budget exceeded: ", 0), 0u) << r.err;
  EXPECT_EQ(run({"exact"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"bogus"}).code, 1);
}

TEST(CliOptimize, ByNAndK) {
  const auto r = run({"optimize", "--n", "5", "--k", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json_of(r);
  EXPECT_EQ(j["minimizers"], nlohmann::ordered_json({"2,3", "3,2"}));
  EXPECT_TRUE(j["used_symmetry"].get<bool>());
}

TEST(CliOptimize, QueryAllocation) {
  const auto j = json_of(run({"optimize", "--alloc", "5,1", "--weights", "5/6,1/6"}));
  EXPECT_EQ(j["minimizers"], nlohmann::ordered_json({"4,2"}));
  EXPECT_EQ(j["min_value"], "139/81");
  EXPECT_EQ(j["query_value"], "3125/1296");
  EXPECT_FALSE(j["query_optimal"].get<bool>());
}

TEST(CliOptimize, ArgumentErrors) {
  EXPECT_EQ(run({"optimize", "--alloc", "3,3", "--n", "6"}).code, 1);
  EXPECT_EQ(run({"optimize", "--n", "6"}).code, 1);
  EXPECT_EQ(run({"optimize", "--n", "6", "--k", "2", "--weights", "1/3,1/3,1/3"}).code, 1);
}

TEST(CliEvents, JsonTable) {
  const auto r = run({"events", "--alloc", "3,1,1", "--i", "2", "--verify"});
  ASSERT_EQ(r.code, 0) << r.err << r.out;
  const auto j = json_of(r);
  EXPECT_EQ(j["total_probability"], "1");
  EXPECT_EQ(j["i"], 2);
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_EQ(j["claims"].size(), 12u);
  bool saw_ca = false;
  for (const auto& row : j["rows"]) saw_ca = saw_ca || row["event"] == "C_a";
  EXPECT_TRUE(saw_ca);
}

TEST(CliEvents, CsvDefaultReceivingBin) {
  const auto r = run({"events", "--alloc", "4,2,1", "--csv"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("event,probability,e_x_base,e_x_shifted\n", 0), 0u);
  EXPECT_NE(r.out.find("F_12^{"), std::string::npos);  // default i is bin 3
}

TEST(CliEvents, ErrorsAndBudgets) {
  EXPECT_EQ(run({"events", "--alloc", "2,2"}).code, 1);
  EXPECT_EQ(run({"events", "--alloc", "3,1", "--i", "5"}).code, 1);
  EXPECT_EQ(run({"events", "--alloc", "5,1,1", "--budget", "10"}).code, 2);
  EXPECT_EQ(run({"events", "--alloc", "5,1,1", "--max-total", "5"}).code, 2);
  const auto j = json_of(run({"events", "--alloc", "4,1,1", "--weights", "1/2,1/4,1/4"}));
  EXPECT_FALSE(j["proven_scope"].get<bool>());
  EXPECT_TRUE(j.contains("note"));
}

TEST(CliSimulate, DeterministicForSeed) {
  const std::vector<std::string> args{"simulate", "--alloc", "5,1", "--weights", "5/6,1/6",
                                      "--trials", "20000", "--seed", "7"};
  const auto a = run(args);
  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  const auto b = run(threaded);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto j = json_of(a);
  EXPECT_EQ(j["mode"], "discrete");
  EXPECT_NEAR(j["mean_X"].get<double>(), 3125.0 / 1296, 4 * j["stderr_X"].get<double>());
}

TEST(CliSimulate, HistogramCompareAndErrors) {
  const auto h = run({"simulate", "--alloc", "1,1", "--trials", "10", "--hist"});
  EXPECT_EQ(h.out, "value,count\n1,10\n");
  const auto c = json_of(run({"simulate", "--alloc", "3,3", "--trials", "20000", "--compare"}));
  EXPECT_TRUE(c["agree"].get<bool>());
  EXPECT_EQ(run({"simulate", "--alloc", "3,3", "--mode", "continuous", "--literal"}).code, 1);
  EXPECT_EQ(run({"simulate", "--alloc", "3,3", "--mode", "quantum"}).code, 1);
  EXPECT_EQ(run({"simulate", "--alloc", "3,3", "--trials", "0"}).code, 1);
}

TEST(CliVerify, SmallSuitesPass) {
  for (const char* suite : {"theorem1", "lemma1", "closed-forms", "chain", "events"}) {
    const auto r = run({"verify", "--suite", suite, "--n-max", "6", "--k-max", "3"});
    EXPECT_EQ(r.code, 0) << suite << ": " << r.out;
    EXPECT_TRUE(json_of(r)["passed"].get<bool>());
  }
}

TEST(CliVerify, BudgetStopExitsWithTwo) {
  const auto r = run({"verify", "--suite", "theorem1", "--n-max", "12", "--budget", "30"});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(json_of(r)["suites"][0].contains("aborted"));
}

TEST(CliScan, CsvRows) {
  const auto r = run({"scan", "--k", "2", "--weights", "2/3,1/3", "--n", "3..15"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "n,optimal,min_value,balanced_dist,proportional_dist");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(line.rfind(std::to_string(rows + 2) + ",\"", 0), 0u) << line;
  }
  EXPECT_EQ(rows, 13);
}

TEST(CliScan, JsonPartialAndErrors) {
  const auto j = json_of(run({"scan", "--k", "2", "--weights", "5/6,1/6", "--n", "6..6",
                              "--format", "json"}));
  EXPECT_EQ(j["rows"][0]["optimal"], "4,2");
  const auto p = run({"scan", "--k", "2", "--weights", "2/3,1/3", "--n", "1..40", "--budget", "100"});
  EXPECT_EQ(p.code, 2);
  EXPECT_NE(p.out.find("# partial: budget exceeded: "), std::string::npos);
  EXPECT_EQ(run({"scan", "--k", "2", "--weights", "1/2,1/2", "--n", "1..3"}).code, 1);
  EXPECT_EQ(run({"scan", "--k", "2", "--weights", "2/3,1/3", "--n", "a..3"}).code, 1);
  EXPECT_EQ(run({"scan", "--k", "2", "--weights", "2/3,1/3", "--n", "99999999999999999999..3"}).code, 1);
}

TEST(CliHelp, DocumentsDefaults) {
  const auto r = run({"simulate", "--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("100000"), std::string::npos);
  EXPECT_NE(r.out.find("--literal"), std::string::npos);
  const auto top = run({"--help"});
  EXPECT_EQ(top.code, 0);
  for (const char* sub : {"exact", "optimize", "events", "simulate", "verify", "scan"})
    EXPECT_NE(top.out.find(sub), std::string::npos) << sub;
}
