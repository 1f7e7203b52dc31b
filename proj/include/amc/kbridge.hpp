#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "amc/formula.hpp"
#include "amc/model.hpp"
#include "amc/rational.hpp"

namespace amc {

enum class KOp { Prop, And, Not, Box };

// Formula of the basic multi-agent modal logic: q | phi & psi | ~phi | box@i phi.
class KFormula {
 public:
  KFormula() = default;

  static KFormula prop(std::string q);
  static KFormula conj(KFormula a, KFormula b);
  static KFormula neg(KFormula a);
  static KFormula box(std::string agent, KFormula a);

  bool is_null() const { return !node_; }
  KOp op() const;
  const std::string& id() const;  // Prop: proposition name; Box: agent name
  std::size_t arity() const;
  const KFormula& child(std::size_t i) const;

  struct Node;
  // Opaque; defined in kbridge.cpp.
  explicit KFormula(std::shared_ptr<const Node> node);

 private:
  const Node& node() const;
  std::shared_ptr<const Node> node_;
};

// Grammar: kand := kunary ("&" kunary)* ; kunary := "~" kunary
//        | "box@" ident kunary | katom ; katom := ident | "(" kand ")".
KFormula parse_k(const std::string& text);
std::string print_k(const KFormula& f);

std::vector<std::string> propositions(const KFormula& f);  // sorted, dup-free
std::vector<std::string> k_agents(const KFormula& f);      // sorted, dup-free

// The worlds satisfying f, by id: V(q) for propositions, intersection for &,
// complement for ~, and box@i f holds where every i-successor satisfies f.
std::set<std::string> eval_k(const KripkeModel& m, const KFormula& f);

// Each proposition q gets the dedicated sampling variable x_q.
std::string prop_variable(const std::string& q);

// Structural translation into the conditional language: q -> x_q,
// a & b -> (a ? b : F), ~a -> (a ? F : T), box@i a -> [F | ~a]@i.
Formula lambda_formula(const KFormula& f);

// How transition weights are spread over a world's successors. Any strictly
// positive assignment works; both rules are provided so tests can show the
// translated truth value does not depend on the choice.
enum class WeightRule { Uniform, RandomPositive };

// Probability-model image of a Kripke model: worlds and agents carry over,
// f scores x_q as 1 exactly on V(q), and each pi row is positive exactly on
// the world's successors. Requires seriality, otherwise a row would be empty.
ProbModel lambda_model(const KripkeModel& m, WeightRule rule = WeightRule::Uniform,
                       std::uint64_t seed = 0);

struct GeneralisationVerdict {
  bool k_truth = false;  // w is in the evaluation set of f
  Rat mac_value;         // value of lambda_formula(f) at w in lambda_model(m)
  bool two_valued = false;
  bool agree = false;
};

// Evaluates f both ways, in the Kripke model and in its translated image, and
// reports whether the two verdicts coincide.
GeneralisationVerdict generalisation_check(const KripkeModel& m, const std::string& world,
                                           const KFormula& f,
                                           WeightRule rule = WeightRule::Uniform,
                                           std::uint64_t seed = 0);

}  // namespace amc
