#include <algorithm>
#include <random>

#include "doctest.h"

#include "amc/equivalence.hpp"
#include "amc/semantics.hpp"
#include "test_support.hpp"

using namespace amc;

namespace {

std::vector<Path> all_paths(const TreeForm& t) {
  PathSets ps = paths(t);
  std::vector<Path> out = ps.top;
  out.insert(out.end(), ps.bot.begin(), ps.bot.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_SUITE("equivalence") {
  TEST_CASE("decision trees of the base cases") {
    TreeForm t = to_tree_form(parse("T"));
    CHECK(t.is_leaf());
    CHECK(t.truth());
    CHECK_FALSE(to_tree_form(parse("F")).truth());

    TreeForm x = to_tree_form(parse("x"));
    REQUIRE_FALSE(x.is_leaf());
    CHECK(x.var() == "x");
    CHECK(x.left() == TreeForm::leaf(true));
    CHECK(x.right() == TreeForm::leaf(false));
    CHECK(logical_size(x) == 3);
  }

  TEST_CASE("a choice on a compound guard pushes the branches to its leaves") {
    TreeForm t = to_tree_form(parse("((x ? y : z) ? p : q)"));
    REQUIRE_FALSE(t.is_leaf());
    CHECK(t.var() == "x");
    CHECK(t.left() == to_tree_form(parse("(y ? p : q)")));
    CHECK(t.right() == to_tree_form(parse("(z ? p : q)")));
  }

  TEST_CASE("a redundant test keeps both branches, shared") {
    TreeForm t = to_tree_form(parse("(x ? y : y)"));
    REQUIRE_FALSE(t.is_leaf());
    CHECK(t.left() == t.right());
    CHECK(logical_size(t) == 7);

    // Sharing is by subterm identity: one y node reused in both branches
    // becomes one tree node.
    Formula x = Formula::var("x"), y = Formula::var("y");
    TreeForm shared = to_tree_form(Formula::ite(x, y, y));
    CHECK(shared.left().key() == shared.right().key());
  }

  TEST_CASE("decision trees reject belief operators") {
    CHECK_THROWS_AS(to_tree_form(parse("[x | T]@a")), std::invalid_argument);
  }

  TEST_CASE("round trip through the formula reading") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 80; ++i) {
      Formula f = random_pure(rng, 5, {"x", "y", "z"});
      TreeForm t = to_tree_form(f);
      CHECK(to_tree_form(t.to_formula()) == t);
    }
  }

  TEST_CASE("path listing of a double test") {
    TreeForm t = to_tree_form(parse("(x ? (x ? F : y) : (x ? y : F))"));
    PathSets ps = paths(t);
    REQUIRE(ps.top.size() == 2);
    CHECK(to_string(ps.top[0]) == "<x, ~x, y>");
    CHECK(to_string(ps.top[1]) == "<~x, x, y>");
    REQUIRE(ps.bot.size() == 4);
    CHECK(to_string(ps.bot[0]) == "<x, x>");
    CHECK(to_string(ps.bot[1]) == "<x, ~x, ~y>");
    CHECK(to_string(ps.bot[2]) == "<~x, x, ~y>");
    CHECK(to_string(ps.bot[3]) == "<~x, ~x>");
  }

  TEST_CASE("the constant tree has a single empty path") {
    PathSets ps = paths(TreeForm::leaf(true));
    CHECK(ps.top == std::vector<Path>{Path{}});
    CHECK(ps.bot.empty());
  }

  TEST_CASE("paths partition the probability mass") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 60; ++i) {
      PathSets ps = paths(to_tree_form(random_pure(rng, 5, {"x", "y", "z"})));
      Polynomial covered = path_polynomial(ps) + path_polynomial(PathSets{ps.bot, {}});
      CHECK(covered == Polynomial::constant(1));
      CHECK(std::is_sorted(ps.top.begin(), ps.top.end()));
      CHECK(std::is_sorted(ps.bot.begin(), ps.bot.end()));
    }
  }

  TEST_CASE("polynomial rendering") {
    CHECK(polynomial(parse("x & y")).str() == "p_x*p_y");
    CHECK(polynomial(parse("x & x")).str() == "p_x^2");
    CHECK(polynomial(parse("(x ? T : F)")).str() == "p_x");
    CHECK(polynomial(parse("~x")).str() == "1 - p_x");
    CHECK(polynomial(parse("x v y")).str() == "p_x - p_x*p_y + p_y");
    CHECK(polynomial(parse("F")).str() == "0");
    CHECK(polynomial(parse("(x ? F : x)")).str() == "p_x - p_x^2");
  }

  TEST_CASE("both polynomial routes agree") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 100; ++i) {
      Formula f = random_pure(rng, 5, {"x", "y", "z"});
      CHECK(polynomial(f) == polynomial_direct(f));
    }
  }

  TEST_CASE("the polynomial computes the exact value") {
    std::mt19937_64 rng(31);
    Polynomial half_run = polynomial(parse("p1^{1/2}"));
    CHECK(half_run.eval({{"p1", Rat(1, 4)}}) == Rat(7, 16));
    for (int i = 0; i < 80; ++i) {
      Formula f = random_pure(rng, 5, {"x", "y"});
      std::map<std::string, Rat> valuation{{"x", random_prob(rng)}, {"y", random_prob(rng)}};
      ProbModel m = valuation_model(valuation);
      CHECK(polynomial(f).eval(valuation) == evaluate(m, "w", f));
    }
  }

  TEST_CASE("evaluating with a variable missing is an error") {
    CHECK_THROWS_AS(polynomial(parse("x & y")).eval({{"x", Rat(1, 2)}}), std::invalid_argument);
  }

  TEST_CASE("deciding equivalence of pure terms") {
    EquivResult same = decide_equiv(parse("x & y"), parse("y & x"));
    CHECK(same.equivalent);
    CHECK(same.lhs_poly == same.rhs_poly);
    CHECK_FALSE(same.witness.has_value());

    CHECK(decide_equiv(parse("(x ? y : y)"), parse("y")).equivalent);
    CHECK(decide_equiv(parse("~~x"), parse("x")).equivalent);

    EquivResult diff = decide_equiv(parse("x"), parse("x & x"));
    CHECK_FALSE(diff.equivalent);
    REQUIRE(diff.witness.has_value());
    const Witness& w = *diff.witness;
    CHECK(w.lhs != w.rhs);
    ProbModel m = valuation_model(w.valuation);
    CHECK(evaluate(m, "w", parse("x")) == w.lhs);
    CHECK(evaluate(m, "w", parse("x & x")) == w.rhs);
  }

  TEST_CASE("witnesses found at random really separate") {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 60; ++i) {
      Formula a = random_pure(rng, 4, {"x", "y"});
      Formula b = random_pure(rng, 4, {"x", "y"});
      EquivResult r = decide_equiv(a, b);
      if (r.equivalent) {
        for (int k = 0; k < 3; ++k) {
          std::map<std::string, Rat> val{{"x", random_prob(rng)}, {"y", random_prob(rng)}};
          ProbModel m = valuation_model(val);
          CHECK(evaluate(m, "w", a) == evaluate(m, "w", b));
        }
      } else {
        REQUIRE(r.witness.has_value());
        ProbModel m = valuation_model(r.witness->valuation);
        Rat va = evaluate(m, "w", a), vb = evaluate(m, "w", b);
        CHECK(va == r.witness->lhs);
        CHECK(vb == r.witness->rhs);
        CHECK(va != vb);
      }
    }
  }

  TEST_CASE("aligning a tree with itself changes nothing") {
    TreeForm t = to_tree_form(parse("(x ? (y ? T : F) : z)"));
    Alignment a = align_and_swap(t, t);
    CHECK(a.complete);
    CHECK(a.swaps.empty());
    CHECK(a.lhs == a.rhs);
  }

  TEST_CASE("aligning against a constant grafts the missing test") {
    Alignment a = align_and_swap(to_tree_form(parse("T")), to_tree_form(parse("(x ? T : T)")));
    CHECK(a.complete);
    CHECK(a.swaps.empty());
    CHECK(a.lhs == to_tree_form(parse("(x ? T : T)")));
    CHECK(a.lhs == a.rhs);
  }

  TEST_CASE("a commuted conjunction aligns with one leaf swap") {
    Alignment a = align_and_swap(to_tree_form(parse("x & y")), to_tree_form(parse("y & x")));
    REQUIRE(a.complete);
    REQUIRE(a.swaps.size() == 1);
    Path top_key = a.swaps[0].top_path, bot_key = a.swaps[0].bot_path;
    std::sort(top_key.begin(), top_key.end());
    std::sort(bot_key.begin(), bot_key.end());
    CHECK(top_key == bot_key);
    CHECK(apply_swaps(a.lhs, a.swaps) == a.rhs);
  }

  TEST_CASE("alignment survives cancellation across path multisets") {
    // After plain grafting these two associativity variants end up with Top
    // paths whose products cancel in sums without matching one to one, e.g.
    // (1-q)r + (1-r) = q(1-r) + (1-q). The alignment has to fall back to a
    // common full test profile to pair them.
    Formula f = parse("x & (y & z)");
    Formula g = parse("z & (y & x)");
    Alignment a = align_and_swap(to_tree_form(f), to_tree_form(g));
    REQUIRE(a.complete);
    CHECK(all_paths(a.lhs) == all_paths(a.rhs));
    CHECK(apply_swaps(a.lhs, a.swaps) == a.rhs);
    CHECK(path_polynomial(paths(a.lhs)) == polynomial(f));
    CHECK(path_polynomial(paths(a.rhs)) == polynomial(g));
  }

  TEST_CASE("inequivalent trees fail to pair off") {
    Alignment a = align_and_swap(to_tree_form(parse("x")), to_tree_form(parse("y")));
    CHECK_FALSE(a.complete);
    CHECK(a.swaps.empty());
  }

  TEST_CASE("alignment always equalizes the traced paths") {
    std::mt19937_64 rng(59);
    for (int i = 0; i < 60; ++i) {
      Formula f = random_pure(rng, 4, {"x", "y", "z"});
      Formula g = random_pure(rng, 4, {"x", "y", "z"});
      Alignment a = align_and_swap(to_tree_form(f), to_tree_form(g));
      CHECK(all_paths(a.lhs) == all_paths(a.rhs));
      bool equal_polys = polynomial(f) == polynomial(g);
      CHECK(a.complete == equal_polys);
      if (a.complete) CHECK(apply_swaps(a.lhs, a.swaps) == a.rhs);
    }
  }

  TEST_CASE("the node budget stops runaway trees") {
    Formula g = Formula::var("x");
    for (int i = 0; i < 6; ++i) g = Formula::ite(g, g, g);
    CHECK_THROWS_AS(to_tree_form(g, 5000), BudgetError);
    CHECK_NOTHROW(polynomial_direct(g));
  }
}
