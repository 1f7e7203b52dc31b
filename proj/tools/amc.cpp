#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "amc/equivalence.hpp"
#include "amc/formula.hpp"
#include "amc/kbridge.hpp"
#include "amc/model.hpp"
#include "amc/proof.hpp"
#include "amc/rational.hpp"
#include "amc/semantics.hpp"

namespace {

using nlohmann::ordered_json;

// 0 = success / affirmative verdict, 1 = negative verdict, 2 = usage or data
// error, 3 = a configured budget ran out.
constexpr int kOk = 0;
constexpr int kNo = 1;
constexpr int kError = 2;
constexpr int kBudget = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read file \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Formula arguments are inline text, or @path to read the text from a file.
std::string formula_text(const std::string& arg) {
  if (!arg.empty() && arg[0] == '@') return slurp(arg.substr(1));
  return arg;
}

void print_table(const ordered_json& j, const std::string& prefix) {
  for (const auto& [k, v] : j.items()) {
    std::string key = prefix.empty() ? k : prefix + "." + k;
    if (v.is_object()) {
      print_table(v, key);
    } else {
      std::string val = v.is_string() ? v.get<std::string>() : v.dump();
      std::cout << key;
      for (std::size_t i = key.size(); i < 14; ++i) std::cout << ' ';
      std::cout << "  " << val << "\n";
    }
  }
}

void emit(const ordered_json& j, bool pretty) {
  if (pretty)
    print_table(j, "");
  else
    std::cout << j.dump() << "\n";
}

ordered_json witness_json(const amc::Witness& w) {
  ordered_json out;
  ordered_json valuation = ordered_json::object();
  for (const auto& [var, p] : w.valuation) valuation[var] = amc::format_rat(p);
  out["witness"] = std::move(valuation);
  out["lhs"] = amc::format_rat(w.lhs);
  out["rhs"] = amc::format_rat(w.rhs);
  return out;
}

std::uint64_t seed_from_env() {
  const char* env = std::getenv("AMC_SEED");
  if (!env || !*env) return 0;
  try {
    return std::stoull(env);
  } catch (const std::exception&) {
    throw std::invalid_argument("AMC_SEED is not a number: \"" + std::string(env) + "\"");
  }
}

struct Options {
  std::string model_path, world, trace_path, out_path;
  std::string formula, rhs_formula;
  std::string choice = "uniform";
  std::uint64_t n = 100000, seed = 0, max_rejections = 1000000;
  std::uint64_t search_budget = 20000;
  std::size_t node_budget = amc::kDefaultNodeBudget;
  unsigned precision = 6;
  bool exact = false, pretty = false, kripke = false, enforce_12 = false;
};

int run_eval(const Options& o) {
  amc::ProbModel m = amc::load_model_file(o.model_path);
  amc::Formula f = amc::parse(formula_text(o.formula));
  amc::Rat v = amc::evaluate(m, o.world, f);
  ordered_json out;
  out["value"] = amc::format_rat(v);
  if (!o.exact) out["decimal"] = amc::decimal_string(v, o.precision);
  emit(out, o.pretty);
  return kOk;
}

int run_estimate(const Options& o) {
  amc::ProbModel m = amc::load_model_file(o.model_path);
  amc::Formula f = amc::parse(formula_text(o.formula));
  amc::Rat est = amc::estimate(m, o.world, f, o.n, o.seed, o.max_rejections);
  ordered_json out;
  out["estimate"] = amc::format_rat(est);
  out["decimal"] = amc::decimal_string(est, o.precision);
  out["n"] = o.n;
  out["seed"] = o.seed;
  emit(out, o.pretty);
  return kOk;
}

int run_equiv(const Options& o) {
  amc::Formula a = amc::parse(formula_text(o.formula));
  amc::Formula b = amc::parse(formula_text(o.rhs_formula));
  amc::EquivResult r = amc::decide_equiv(a, b);
  ordered_json out;
  out["equivalent"] = r.equivalent;
  if (r.equivalent) {
    out["polynomial"] = r.lhs_poly.str();
    emit(out, o.pretty);
    return kOk;
  }
  if (r.witness) {
    out.update(witness_json(*r.witness));
  } else if (r.separation) {
    ordered_json sep;
    sep["monomial"] = r.separation->monomial;
    sep["lhs_coeff"] = amc::format_rat(r.separation->lhs_coeff);
    sep["rhs_coeff"] = amc::format_rat(r.separation->rhs_coeff);
    out["separation"] = std::move(sep);
  }
  emit(out, o.pretty);
  return kNo;
}

int run_prove(const Options& o) {
  amc::Formula a = amc::parse(formula_text(o.formula));
  amc::Formula b = amc::parse(formula_text(o.rhs_formula));
  amc::ProveResult r = amc::prove_equiv(a, b, o.search_budget, o.node_budget);
  if (r.status == amc::ProveStatus::Refuted) {
    ordered_json out;
    out["status"] = "refuted";
    if (r.witness) out.update(witness_json(*r.witness));
    emit(out, o.pretty);
    return kNo;
  }
  if (r.status == amc::ProveStatus::Exhausted) {
    ordered_json out;
    out["status"] = "exhausted";
    emit(out, o.pretty);
    return kBudget;
  }
  std::string jsonl = amc::trace_to_jsonl(r.trace);
  if (!o.out_path.empty()) {
    std::ofstream file(o.out_path, std::ios::binary);
    if (!file) throw std::invalid_argument("cannot write file \"" + o.out_path + "\"");
    file << jsonl;
    ordered_json out;
    out["status"] = "found";
    out["steps"] = r.trace.steps.size();
    out["trace"] = o.out_path;
    emit(out, o.pretty);
  } else if (o.pretty) {
    std::cout << "start  " << amc::print(r.trace.start) << "\n";
    for (std::size_t i = 0; i < r.trace.steps.size(); ++i) {
      const amc::Step& s = r.trace.steps[i];
      std::cout << "  " << i + 1 << ". " << s.axiom << " " << amc::to_string(s.dir) << " at "
                << amc::print_pos(s.pos) << "\n";
    }
    std::cout << "end    " << amc::print(r.trace.end) << "\n";
  } else {
    std::cout << jsonl;
  }
  return kOk;
}

int run_check(const Options& o) {
  amc::ProofTrace trace = amc::trace_from_jsonl(slurp(o.trace_path));
  amc::CheckResult r = amc::check(trace);
  ordered_json out;
  out["ok"] = r.ok;
  if (r.ok) {
    out["steps"] = trace.steps.size();
  } else {
    out["step"] = r.step;
    out["reason"] = r.reason;
  }
  emit(out, o.pretty);
  return r.ok ? kOk : kNo;
}

int run_normalize(const Options& o) {
  amc::Formula f = amc::parse(formula_text(o.formula));
  amc::TreeForm t = amc::to_tree_form(f, o.node_budget);
  amc::PathSets ps = amc::paths(t);
  ordered_json out;
  out["tree"] = amc::print(t.to_formula());
  out["polynomial"] = amc::polynomial(f, o.node_budget).str();
  out["top_paths"] = ps.top.size();
  out["bot_paths"] = ps.bot.size();
  emit(out, o.pretty);
  return kOk;
}

int run_translate_k(const Options& o) {
  amc::KFormula kf = amc::parse_k(formula_text(o.formula));
  amc::WeightRule rule =
      o.choice == "random" ? amc::WeightRule::RandomPositive : amc::WeightRule::Uniform;
  ordered_json out;
  out["k"] = amc::print_k(kf);
  out["formula"] = amc::print(amc::lambda_formula(kf));
  if (!o.model_path.empty()) {
    amc::KripkeModel k = amc::load_kripke_file(o.model_path);
    amc::ProbModel image = amc::lambda_model(k, rule, o.seed);
    out["model"] = ordered_json::parse(amc::save_model(image));
    if (!o.world.empty()) {
      amc::GeneralisationVerdict v = amc::generalisation_check(k, o.world, kf, rule, o.seed);
      ordered_json chk;
      chk["k_truth"] = v.k_truth;
      chk["value"] = amc::format_rat(v.mac_value);
      chk["two_valued"] = v.two_valued;
      chk["agree"] = v.agree;
      out["check"] = std::move(chk);
      emit(out, o.pretty);
      return v.agree ? kOk : kNo;
    }
  }
  emit(out, o.pretty);
  return kOk;
}

int run_validate(const Options& o) {
  std::vector<amc::Violation> violations;
  if (o.kripke) {
    amc::KripkeModel k = amc::load_kripke_file(o.model_path);
    violations = amc::validate_kripke(k, o.enforce_12);
  } else {
    amc::ProbModel m = amc::load_model_file(o.model_path);
    violations = amc::validate(m);
  }
  ordered_json out;
  out["valid"] = violations.empty();
  ordered_json list = ordered_json::array();
  for (const amc::Violation& v : violations) {
    ordered_json item;
    item["kind"] = v.kind;
    if (!v.agent.empty()) item["agent"] = v.agent;
    if (!v.world.empty()) item["world"] = v.world;
    item["detail"] = v.detail;
    list.push_back(std::move(item));
  }
  out["violations"] = std::move(list);
  emit(out, o.pretty);
  return violations.empty() ? kOk : kNo;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact model checking, equivalence proofs and modal translation "
               "for aleatoric formulas"};
  app.require_subcommand(1);

  Options o;
  std::function<int(const Options&)> runner;

  try {
    o.seed = seed_from_env();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }

  auto add_pretty = [&](CLI::App* sub) {
    sub->add_flag("--pretty", o.pretty, "human-readable table instead of JSON");
  };
  auto add_model = [&](CLI::App* sub, bool required) {
    CLI::Option* opt = sub->add_option("-m,--model", o.model_path, "model JSON file");
    if (required) opt->required();
  };
  auto add_formula = [&](CLI::App* sub, const char* help) {
    sub->add_option("-f,--formula", o.formula, help)->required();
  };

  CLI::App* eval = app.add_subcommand("eval", "exact probability of a formula at a world");
  add_model(eval, true);
  eval->add_option("-w,--world", o.world, "evaluation world id")->required();
  add_formula(eval, "formula text, or @path");
  eval->add_flag("--exact", o.exact, "print the exact rational only");
  eval->add_option("--precision", o.precision, "significant digits for decimals");
  add_pretty(eval);
  eval->callback([&] { runner = run_eval; });

  CLI::App* est = app.add_subcommand("estimate", "Monte Carlo estimate via the sampling protocol");
  add_model(est, true);
  est->add_option("-w,--world", o.world, "evaluation world id")->required();
  add_formula(est, "formula text, or @path");
  est->add_option("-n,--samples", o.n, "number of protocol runs");
  est->add_option("--seed", o.seed, "RNG seed (default: AMC_SEED or 0)");
  est->add_option("--max-rejections", o.max_rejections, "per-run rejection budget");
  est->add_option("--precision", o.precision, "significant digits for decimals");
  add_pretty(est);
  est->callback([&] { runner = run_estimate; });

  CLI::App* equiv = app.add_subcommand("equiv", "decide equivalence of two modality-free formulas");
  add_formula(equiv, "left formula, or @path");
  equiv->add_option("-g,--rhs", o.rhs_formula, "right formula, or @path")->required();
  add_pretty(equiv);
  equiv->callback([&] { runner = run_equiv; });

  CLI::App* prove = app.add_subcommand("prove", "derive an axiom trace between two formulas");
  add_formula(prove, "left formula, or @path");
  prove->add_option("-g,--rhs", o.rhs_formula, "right formula, or @path")->required();
  prove->add_option("--search", o.search_budget, "rewrite-search attempt budget (0 disables)");
  prove->add_option("--budget", o.node_budget, "node budget for tree derivations");
  prove->add_option("-o,--out", o.out_path, "write the trace to a file");
  add_pretty(prove);
  prove->callback([&] { runner = run_prove; });

  CLI::App* check = app.add_subcommand("check", "replay and verify a proof trace");
  check->add_option("trace", o.trace_path, "trace file (JSON lines)")->required();
  add_pretty(check);
  check->callback([&] { runner = run_check; });

  CLI::App* norm = app.add_subcommand("normalize", "decision-tree form and canonical polynomial");
  add_formula(norm, "formula text, or @path");
  norm->add_option("--budget", o.node_budget, "node budget for tree construction");
  add_pretty(norm);
  norm->callback([&] { runner = run_normalize; });

  CLI::App* tk = app.add_subcommand("translate-k", "translate modal logic formulas and models");
  add_formula(tk, "modal formula text, or @path");
  add_model(tk, false);
  tk->add_option("-w,--world", o.world, "also compare both semantics at this world");
  tk->add_option("--choice", o.choice, "successor weight rule: uniform or random")
      ->check(CLI::IsMember({"uniform", "random"}));
  tk->add_option("--seed", o.seed, "seed for the random weight rule");
  add_pretty(tk);
  tk->callback([&] { runner = run_translate_k; });

  CLI::App* val = app.add_subcommand("validate", "lint a model file");
  add_model(val, true);
  val->add_flag("--kripke", o.kripke, "treat the file as a Kripke model");
  val->add_flag("--enforce-12", o.enforce_12, "also require euclidean and transitive relations");
  add_pretty(val);
  val->callback([&] { runner = run_validate; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  try {
    return runner(o);
  } catch (const amc::BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBudget;
  } catch (const amc::RejectionLimitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
}
