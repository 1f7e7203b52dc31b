#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

using nlohmann::ordered_json;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run_shell(std::string cmd) {
  cmd += " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  int status = pclose(pipe);
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = std::move(out);
  return r;
}

RunResult amc(const std::string& args) {
  return run_shell(std::string("\"") + AMC_CLI_PATH + "\" " + args);
}

std::string fixture(const std::string& name) {
  return std::string(AMC_FIXTURE_DIR) + "/" + name;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << content;
}

}  // namespace

TEST_CASE("eval prints exact rationals") {
  RunResult r = amc("eval -m " + fixture("dice.json") + " -w w4 -f 'p1^{1/2}' --exact");
  CHECK(r.code == 0);
  CHECK(r.out == "{\"value\":\"7/16\"}\n");
}

TEST_CASE("eval prints a rounded decimal by default") {
  RunResult r = amc("eval -m " + fixture("pig.json") + " -w biased -f '(gt2 ? F : odd)'");
  CHECK(r.code == 0);
  CHECK(r.out == "{\"value\":\"3/20\",\"decimal\":\"0.15\"}\n");

  RunResult tbl = amc("eval -m " + fixture("pig.json") +
                      " -w biased -f '(gt2 ? F : odd)' --pretty");
  CHECK(tbl.code == 0);
  CHECK(tbl.out.find("value") != std::string::npos);
  CHECK(tbl.out.find("3/20") != std::string::npos);
}

TEST_CASE("eval reads formulas from files") {
  write_file("cli_eval_formula.txt", "p1^{1/2}");
  RunResult r = amc("eval -m " + fixture("dice.json") + " -w w4 -f @cli_eval_formula.txt --exact");
  CHECK(r.code == 0);
  CHECK(r.out == "{\"value\":\"7/16\"}\n");
  std::remove("cli_eval_formula.txt");
}

TEST_CASE("eval rejects bad input with a usage exit") {
  CHECK(amc("eval -m " + fixture("dice.json") + " -w nowhere -f T").code == 2);
  CHECK(amc("eval -w w4 -f T").code == 2);
  CHECK(amc("").code == 2);
  CHECK(amc("eval -m " + fixture("dice.json") + " -w w4 -f 'p1 ?'").code == 2);
}

TEST_CASE("equiv reports the shared polynomial") {
  RunResult r = amc("equiv -f 'x & y' -g 'y & x'");
  CHECK(r.code == 0);
  CHECK(r.out == "{\"equivalent\":true,\"polynomial\":\"p_x*p_y\"}\n");
}

TEST_CASE("equiv reports a separating valuation") {
  RunResult r = amc("equiv -f x -g 'x & x'");
  CHECK(r.code == 1);
  ordered_json j = ordered_json::parse(r.out);
  CHECK(j.at("equivalent") == false);
  CHECK(j.at("witness").contains("x"));
  CHECK(j.at("lhs") != j.at("rhs"));
}

TEST_CASE("prove writes a replayable trace") {
  RunResult r = amc("prove -f 'x & y' -g 'y & x' -o cli_prove_trace.jsonl");
  CHECK(r.code == 0);
  ordered_json j = ordered_json::parse(r.out);
  CHECK(j.at("status") == "found");
  CHECK(j.at("trace") == "cli_prove_trace.jsonl");

  RunResult chk = amc("check cli_prove_trace.jsonl");
  CHECK(chk.code == 0);
  ordered_json cj = ordered_json::parse(chk.out);
  CHECK(cj.at("ok") == true);
  CHECK(cj.at("steps") == j.at("steps"));
  std::remove("cli_prove_trace.jsonl");
}

TEST_CASE("prove streams the trace when no output file is given") {
  RunResult r = amc("prove -f '(x ? y : y)' -g y");
  CHECK(r.code == 0);
  std::istringstream lines(r.out);
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    ordered_json j = ordered_json::parse(line);
    if (count == 0) CHECK(j.contains("start"));
    ++count;
  }
  CHECK(count >= 1);

  RunResult pretty = amc("prove -f 'x & y' -g 'y & x' --pretty");
  CHECK(pretty.code == 0);
  CHECK(pretty.out.find("start") != std::string::npos);
  CHECK(pretty.out.find("end") != std::string::npos);
}

TEST_CASE("prove refutes and reports the witness") {
  RunResult r = amc("prove -f x -g F");
  CHECK(r.code == 1);
  ordered_json j = ordered_json::parse(r.out);
  CHECK(j.at("status") == "refuted");
  CHECK(j.contains("witness"));
}

TEST_CASE("prove signals an exhausted search budget") {
  RunResult r = amc("prove -f '[F | x]@a' -g F --search 200");
  CHECK(r.code == 3);
  CHECK(r.out == "{\"status\":\"exhausted\"}\n");
}

TEST_CASE("check accepts the stored derivations") {
  CHECK(amc("check " + fixture("commutativity.trace.jsonl")).code == 0);
  CHECK(amc("check " + fixture("duality.trace.jsonl")).code == 0);
}

TEST_CASE("check rejects a derivation that misses its end") {
  write_file("cli_bad_trace.jsonl", "{\"start\":\"x\",\"end\":\"y\"}\n");
  RunResult r = amc("check cli_bad_trace.jsonl");
  CHECK(r.code == 1);
  ordered_json j = ordered_json::parse(r.out);
  CHECK(j.at("ok") == false);
  std::remove("cli_bad_trace.jsonl");

  write_file("cli_junk_trace.jsonl", "nonsense\n");
  CHECK(amc("check cli_junk_trace.jsonl").code == 2);
  std::remove("cli_junk_trace.jsonl");
}

TEST_CASE("normalize prints the tree and the polynomial") {
  RunResult r = amc("normalize -f '(x ? y : y)'");
  CHECK(r.code == 0);
  CHECK(r.out ==
        "{\"tree\":\"(x ? (y ? T : F) : (y ? T : F))\",\"polynomial\":\"p_y\","
        "\"top_paths\":2,\"bot_paths\":2}\n");
  CHECK(amc("normalize -f '[x | y]@a'").code == 2);
}

TEST_CASE("translate-k compares both readings") {
  RunResult r = amc("translate-k -f 'box@a q' -m " + fixture("kripke.json") + " -w w0");
  CHECK(r.code == 0);
  ordered_json j = ordered_json::parse(r.out);
  CHECK(j.at("k") == "box@a q");
  CHECK(j.at("formula") == "[F | (x_q ? F : T)]@a");
  CHECK(j.at("model").contains("pi"));
  CHECK(j.at("check").at("agree") == true);
  CHECK(j.at("check").at("value") == "1");

  RunResult plain = amc("translate-k -f '~q'");
  CHECK(plain.code == 0);
  CHECK(plain.out == "{\"k\":\"~q\",\"formula\":\"(x_q ? F : T)\"}\n");

  RunResult random_rule = amc("translate-k -f 'box@a q' -m " + fixture("kripke.json") +
                              " -w w2 --choice random --seed 9");
  CHECK(random_rule.code == 0);
  ordered_json rj = ordered_json::parse(random_rule.out);
  CHECK(rj.at("check").at("agree") == true);
  CHECK(rj.at("check").at("value") == "0");
}

TEST_CASE("validate lints both model kinds") {
  RunResult ok = amc("validate -m " + fixture("dice.json"));
  CHECK(ok.code == 0);
  CHECK(ok.out == "{\"valid\":true,\"violations\":[]}\n");
  CHECK(amc("validate -m " + fixture("kripke.json") + " --kripke").code == 0);

  RunResult strict = amc("validate -m " + fixture("kripke.json") + " --kripke --enforce-12");
  CHECK(strict.code == 1);
  ordered_json j = ordered_json::parse(strict.out);
  CHECK(j.at("valid") == false);
  CHECK(!j.at("violations").empty());

  write_file("cli_bad_model.json",
             R"({"agents":["a"],"variables":["x"],)"
             R"("worlds":[{"id":"u","f":{"x":"1/2"}}],)"
             R"("pi":{"a":{"u":{"u":"1/2"}}}})");
  RunResult bad = amc("validate -m cli_bad_model.json");
  CHECK(bad.code == 1);
  ordered_json bj = ordered_json::parse(bad.out);
  CHECK(bj.at("violations").at(0).at("kind") == "row-sum");
  std::remove("cli_bad_model.json");
}

TEST_CASE("estimate is reproducible for a fixed seed") {
  std::string cmd = "estimate -m " + fixture("dice.json") + " -w w4 -f 'p1^{1/2}' -n 2000 --seed 7";
  RunResult a = amc(cmd);
  RunResult b = amc(cmd);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  ordered_json j = ordered_json::parse(a.out);
  CHECK(j.at("n") == 2000);
  CHECK(j.at("seed") == 7);

  RunResult via_env = run_shell(std::string("AMC_SEED=7 \"") + AMC_CLI_PATH + "\" estimate -m " +
                                fixture("dice.json") + " -w w4 -f 'p1^{1/2}' -n 2000");
  CHECK(via_env.out == a.out);

  RunResult bad_env = run_shell(std::string("AMC_SEED=banana \"") + AMC_CLI_PATH + "\" estimate -m " +
                                fixture("dice.json") + " -w w4 -f T -n 10");
  CHECK(bad_env.code == 2);
}

TEST_CASE("estimate exhausts its rejection budget on nearly impossible givens") {
  write_file("cli_rare_model.json",
             R"({"agents":["a"],"variables":["x","y"],)"
             R"("worlds":[{"id":"u","f":{"x":"1/2","y":"1/1000000"}}],)"
             R"("pi":{"a":{"u":{"u":"1"}}}})");
  RunResult r = amc("estimate -m cli_rare_model.json -w u -f '[x | y]@a' -n 50 --max-rejections 20");
  CHECK(r.code == 3);
  std::remove("cli_rare_model.json");
}

TEST_CASE("every command in the examples document succeeds") {
  std::ifstream doc(AMC_EXAMPLES_DOC);
  REQUIRE(doc.good());
  const std::string doc_path = AMC_EXAMPLES_DOC;
  const std::string root = doc_path.substr(0, doc_path.rfind("/docs/"));

  std::string line;
  std::size_t commands = 0;
  while (std::getline(doc, line)) {
    std::size_t at = line.find_first_not_of(" \t");
    if (at == std::string::npos || line.compare(at, 6, "$ amc ") != 0) continue;
    std::string args = line.substr(at + 6);
    std::string cmd = "cd \"" + root + "\" && \"" + AMC_CLI_PATH + "\" " + args;
    CAPTURE(args);
    CHECK(run_shell(cmd).code == 0);
    ++commands;
  }
  CHECK(commands >= 10);
}
