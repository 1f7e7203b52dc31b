#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "amc/formula.hpp"
#include "amc/rational.hpp"

namespace amc {

struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultNodeBudget = std::size_t{1} << 20;

// Binary decision tree: every internal node tests a bare variable, leaves are
// truth constants. Subtrees are shared, so the logical size (what the node
// budget limits) can exceed the allocated size.
class TreeForm {
 public:
  TreeForm() = default;

  static TreeForm leaf(bool truth);
  static TreeForm node(std::string var, TreeForm left, TreeForm right);

  bool is_leaf() const;
  bool truth() const;                // leaves only
  const std::string& var() const;    // internal nodes only
  const TreeForm& left() const;      // branch when the variable holds
  const TreeForm& right() const;

  Formula to_formula() const;

  friend bool operator==(const TreeForm& a, const TreeForm& b);
  friend bool operator!=(const TreeForm& a, const TreeForm& b) { return !(a == b); }

  const void* key() const { return node_.get(); }

 private:
  struct TNode;
  explicit TreeForm(std::shared_ptr<const TNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const TNode> node_;
};

// Saturates at the cap instead of overflowing.
std::size_t logical_size(const TreeForm& t, std::size_t cap = kDefaultNodeBudget * 4);

struct PathToken {
  std::string var;
  bool negated = false;

  friend bool operator==(const PathToken& a, const PathToken& b) {
    return a.var == b.var && a.negated == b.negated;
  }
  // Lexicographic by variable, positive before negated.
  friend bool operator<(const PathToken& a, const PathToken& b) {
    if (a.var != b.var) return a.var < b.var;
    return a.negated < b.negated;
  }
};

using Path = std::vector<PathToken>;

std::string to_string(const Path& p);

// Root-to-leaf traces, split by the truth value at the leaf and sorted.
struct PathSets {
  std::vector<Path> top;
  std::vector<Path> bot;
};

TreeForm to_tree_form(const Formula& f, std::size_t node_budget = kDefaultNodeBudget);
PathSets paths(const TreeForm& t);

using Monomial = std::map<std::string, unsigned>;  // variable -> exponent >= 1

// Sparse multivariate polynomial over the per-variable probabilities, kept in
// canonical fully expanded form (sorted monomials, no zero coefficients).
class Polynomial {
 public:
  Polynomial() = default;  // zero
  static Polynomial constant(const Rat& c);
  static Polynomial variable(const std::string& name);

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;

  bool is_zero() const { return terms_.empty(); }
  const std::map<Monomial, Rat>& terms() const { return terms_; }
  Rat eval(const std::map<std::string, Rat>& valuation) const;
  std::string str() const;

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.terms_ == b.terms_;
  }
  friend bool operator!=(const Polynomial& a, const Polynomial& b) { return !(a == b); }

 private:
  std::map<Monomial, Rat> terms_;
};

// Sum over the Top paths of the token products, with a negated token x~
// contributing the factor (1 - p_x).
Polynomial path_polynomial(const PathSets& ps);

// Normal form via the decision tree route; throws BudgetError past the budget.
Polynomial polynomial(const Formula& f, std::size_t node_budget = kDefaultNodeBudget);

// Same polynomial by structural recursion on the term; no tree is built, so
// this survives inputs whose decision tree would blow the budget.
Polynomial polynomial_direct(const Formula& f);

struct Witness {
  std::map<std::string, Rat> valuation;
  Rat lhs, rhs;
};

struct Separation {
  std::string monomial;
  Rat lhs_coeff, rhs_coeff;
};

struct EquivResult {
  bool equivalent = false;
  Polynomial lhs_poly, rhs_poly;
  std::optional<Witness> witness;        // refuting valuation, when one was found
  std::optional<Separation> separation;  // fallback: a differing monomial
};

EquivResult decide_equiv(const Formula& a, const Formula& b);

// One leaf relabeling: a path that is Top on the left but Bot on the right,
// paired with a multiset-equal path going the other way.
struct SwapPair {
  Path top_path;
  Path bot_path;
};

struct Alignment {
  TreeForm lhs, rhs;  // same Path sets
  std::vector<SwapPair> swaps;
  bool complete = false;  // swaps fully reconcile the Top sets
};

// Grafts redundant tests ((x?R:R) ~ R, read right to left) until both trees
// trace identical path sets, then pairs off the differing leaves.
Alignment align_and_swap(const TreeForm& lhs, const TreeForm& rhs,
                         std::size_t node_budget = kDefaultNodeBudget);

// Applies the leaf relabelings; with a complete swap list from align_and_swap
// the result is syntactically the aligned right tree.
TreeForm apply_swaps(const TreeForm& t, const std::vector<SwapPair>& swaps);

}  // namespace amc
