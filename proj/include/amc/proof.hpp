#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "amc/equivalence.hpp"
#include "amc/formula.hpp"

namespace amc {

struct ProofError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Dir { LR, RL };

std::string to_string(Dir d);
Dir flip(Dir d);

// Substitution for the schematic variables of an axiom. Term metavariables
// stand for arbitrary formulas, agent metavariables for agent names.
struct Bindings {
  std::map<std::string, Formula> terms;
  std::map<std::string, std::string> agents;
};

// Schematic equation over core terms: Var leaves are term metavariables and
// the agent slot of a Cond is an agent metavariable.
struct Axiom {
  std::string name;
  Formula lhs, rhs;

  const Formula& side(Dir d) const { return d == Dir::LR ? lhs : rhs; }
  const Formula& other(Dir d) const { return d == Dir::LR ? rhs : lhs; }
};

// id, vacuous, ignore, always, never, tree, swap, then A0 through A4.
const std::vector<Axiom>& axioms();
const Axiom& axiom(const std::string& name);  // throws ProofError for unknown names

// One-way pattern matching, extending `into`; repeated metavariables must
// agree. On failure `into` may hold partial bindings.
bool match(const Formula& pattern, const Formula& term, Bindings& into);

// Throws ProofError when the pattern mentions an unbound metavariable.
Formula instantiate(const Formula& pattern, const Bindings& b);

struct Step {
  std::string axiom;
  Pos pos;
  Dir dir = Dir::LR;
  Bindings bind;
};

struct ProofTrace {
  Formula start, end;
  std::vector<Step> steps;
};

// Rewrites the subterm of `f` at `pos` across the named axiom. `extra`
// supplies bindings for metavariables absent from the matched side; `used`
// receives the complete substitution, which always covers both sides, so a
// recorded step can be replayed in either direction.
Formula apply(const Formula& f, const Axiom& ax, const Pos& pos, Dir dir,
              const Bindings& extra = {}, Bindings* used = nullptr);

struct CheckResult {
  bool ok = false;
  // First failing step when !ok; steps.size() means the replay finished but
  // did not reach the stated end.
  std::size_t step = 0;
  std::string reason;
};

// Replays the steps from desugar(start) and compares against desugar(end).
CheckResult check(const ProofTrace& trace);

// Same derivation read backwards; valid as-is because steps carry complete
// bindings.
ProofTrace reversed(const ProofTrace& trace);

enum class ProveStatus { Found, Refuted, Exhausted };

struct ProveResult {
  ProveStatus status = ProveStatus::Exhausted;
  ProofTrace trace;                // meaningful when Found
  std::optional<Witness> witness;  // separating valuation, for pure refutations
};

// Bidirectional axiom search from both endpoints, then, for conditional-free
// inputs, the guaranteed route: rewrite both sides into decision-tree shape,
// graft redundant tests until the trees agree on paths, and exchange
// multiset-equal leaf pairs. search_budget 0 skips the search phase.
ProveResult prove_equiv(const Formula& a, const Formula& b, std::size_t search_budget = 20000,
                        std::size_t node_budget = kDefaultNodeBudget);

// One JSON object per line: a start/end header followed by the steps.
std::string trace_to_jsonl(const ProofTrace& trace);
ProofTrace trace_from_jsonl(const std::string& text);

// The classic five-step derivation of y∧x from x∧y.
ProofTrace commutativity_trace();

// ⟨¬x|y⟩ᵢ rewritten to ⟨x|y⟩ᵢ → □ᵢ¬(x∧y): the conditional is its own dual.
ProofTrace duality_trace();

// E_i x ∧ ⟨y|x⟩_i ≃ E_i(x∧y), obtained from A0 by specializing the split to
// (x ? y : ⊥) under the trivial condition. The equation is exact wherever the
// guard ⟨⊥|¬x⟩_i evaluates to 0, i.e. where the agent considers x possible.
struct A0Consequence {
  Formula lhs;       // E_i x ∧ ⟨y|x⟩_i
  Formula rhs;       // E_i (x∧y)
  Formula guard;     // ⟨⊥|¬x⟩_i
  ProofTrace trace;  // rhs unfolded to (E_i x ? ⟨y|x⟩_i : guard)
};

A0Consequence a0_specialize(const Formula& x, const Formula& y, const std::string& agent);

}  // namespace amc
