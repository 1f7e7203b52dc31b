#pragma once

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace amc {

// Core connectives are Top, Bot, Var, Ite ("(c ? a : b)") and Cond ("[a | b]@i").
// Everything below Cond is derived syntax; derived nodes are kept in the AST and
// expanded by desugar() so printing can show what the user wrote.
enum class Op {
  Top,
  Bot,
  Var,
  Ite,
  Cond,
  And,
  Or,
  Implies,
  Not,
  Expect,
  Box,
  Repeat,
};

// Immutable formula handle with structural sharing. Equality is structural;
// key() exposes node identity for memo tables over shared DAGs.
class Formula {
 public:
  Formula() = default;

  static Formula top();
  static Formula bot();
  static Formula var(std::string name);
  static Formula ite(Formula c, Formula t, Formula e);
  static Formula cond(Formula target, Formula given, std::string agent);
  static Formula conj(Formula a, Formula b);
  static Formula disj(Formula a, Formula b);
  static Formula implies(Formula a, Formula b);
  static Formula neg(Formula a);
  static Formula expect(std::string agent, Formula a);
  static Formula box(std::string agent, Formula a);
  static Formula repeat(Formula a, unsigned long lo, unsigned long hi);

  bool is_null() const { return node_ == nullptr; }
  Op op() const;
  // Variable name for Var, agent for Cond/Expect/Box.
  const std::string& id() const;
  std::size_t arity() const;
  const Formula& child(std::size_t i) const;
  unsigned long repeat_lo() const;
  unsigned long repeat_hi() const;

  std::size_t hash() const;
  const void* key() const { return node_.get(); }

  friend bool operator==(const Formula& a, const Formula& b);
  friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }

  // Opaque; defined in formula.cpp.
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

 private:
  const Node& node() const;
  std::shared_ptr<const Node> node_;
};

struct ParseError : std::runtime_error {
  ParseError(int line, int col, const std::string& what)
      : std::runtime_error("parse error at " + std::to_string(line) + ":" +
                           std::to_string(col) + ": " + what),
        line(line),
        col(col) {}
  int line;
  int col;
};

Formula parse(const std::string& text);
std::string print(const Formula& f);

// Expands derived connectives into Top/Bot/Var/Ite/Cond. Repeat expands to a
// memoized DAG, so repeated subterms are shared rather than copied. Idempotent.
Formula desugar(const Formula& f);

// Replaces every occurrence of variable `name` by `replacement`.
Formula substitute(const Formula& f, const std::string& name, const Formula& replacement);

// Sorted, duplicate-free.
std::vector<std::string> variables(const Formula& f);
std::vector<std::string> agents(const Formula& f);

// True when no conditional/modal operator occurs anywhere in the term.
bool is_pure(const Formula& f);

std::size_t node_count(const Formula& f);

// Child-index path into the AST: 0 = condition/target, 1 = then/given, 2 = else.
using Pos = std::vector<int>;

std::string print_pos(const Pos& pos);
Formula subterm_at(const Formula& f, const Pos& pos);  // throws std::out_of_range
Formula replace_at(const Formula& f, const Pos& pos, const Formula& with);

}  // namespace amc

template <>
struct std::hash<amc::Formula> {
  std::size_t operator()(const amc::Formula& f) const { return f.hash(); }
};
