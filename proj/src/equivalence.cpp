#include "amc/equivalence.hpp"

#include <algorithm>
#include <random>
#include <unordered_map>

namespace amc {

struct TreeForm::TNode {
  bool is_leaf;
  bool truth = false;
  std::string var;
  TreeForm left, right;
};

TreeForm TreeForm::leaf(bool truth) {
  auto n = std::make_shared<TNode>();
  n->is_leaf = true;
  n->truth = truth;
  return TreeForm(std::move(n));
}

TreeForm TreeForm::node(std::string var, TreeForm left, TreeForm right) {
  auto n = std::make_shared<TNode>();
  n->is_leaf = false;
  n->var = std::move(var);
  n->left = std::move(left);
  n->right = std::move(right);
  return TreeForm(std::move(n));
}

bool TreeForm::is_leaf() const { return node_->is_leaf; }
bool TreeForm::truth() const {
  if (!node_->is_leaf) throw std::logic_error("truth() on internal node");
  return node_->truth;
}
const std::string& TreeForm::var() const {
  if (node_->is_leaf) throw std::logic_error("var() on leaf");
  return node_->var;
}
const TreeForm& TreeForm::left() const { return node_->left; }
const TreeForm& TreeForm::right() const { return node_->right; }

Formula TreeForm::to_formula() const {
  if (is_leaf()) return truth() ? Formula::top() : Formula::bot();
  return Formula::ite(Formula::var(var()), left().to_formula(), right().to_formula());
}

bool operator==(const TreeForm& a, const TreeForm& b) {
  if (a.node_ == b.node_) return true;
  if (!a.node_ || !b.node_) return false;
  if (a.node_->is_leaf != b.node_->is_leaf) return false;
  if (a.node_->is_leaf) return a.node_->truth == b.node_->truth;
  return a.node_->var == b.node_->var && a.node_->left == b.node_->left &&
         a.node_->right == b.node_->right;
}

namespace {

std::size_t sat_add(std::size_t a, std::size_t b, std::size_t cap) {
  return a >= cap - b ? cap : a + b;
}

std::size_t sized(const TreeForm& t, std::size_t cap,
                  std::unordered_map<const void*, std::size_t>& memo) {
  if (t.is_leaf()) return 1;
  auto it = memo.find(t.key());
  if (it != memo.end()) return it->second;
  std::size_t n = sat_add(1, sat_add(sized(t.left(), cap, memo), sized(t.right(), cap, memo), cap), cap);
  memo.emplace(t.key(), n);
  return n;
}

}  // namespace

std::size_t logical_size(const TreeForm& t, std::size_t cap) {
  std::unordered_map<const void*, std::size_t> memo;
  return sized(t, cap, memo);
}

std::string to_string(const Path& p) {
  std::string out = "<";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += ", ";
    if (p[i].negated) out += "~";
    out += p[i].var;
  }
  return out + ">";
}

namespace {

[[noreturn]] void budget_exceeded(std::size_t budget) {
  throw BudgetError("decision tree exceeds the node budget of " + std::to_string(budget) +
                    " nodes");
}

class TreeBuilder {
 public:
  explicit TreeBuilder(std::size_t budget) : budget_(budget) {}

  TreeForm build(const Formula& core) {
    auto it = memo_.find(core.key());
    if (it != memo_.end()) return it->second;
    TreeForm out;
    switch (core.op()) {
      case Op::Top:
        out = TreeForm::leaf(true);
        break;
      case Op::Bot:
        out = TreeForm::leaf(false);
        break;
      case Op::Var:
        out = TreeForm::node(core.id(), TreeForm::leaf(true), TreeForm::leaf(false));
        break;
      case Op::Ite: {
        TreeForm c = build(core.child(0));
        TreeForm t = build(core.child(1));
        TreeForm e = build(core.child(2));
        out = graft(c, t, e);
        if (logical_size(out, budget_ + 1) > budget_) budget_exceeded(budget_);
        break;
      }
      default:
        throw std::invalid_argument("decision trees are defined for pure terms only, got " +
                                    print(core));
    }
    memo_.emplace(core.key(), out);
    return out;
  }

 private:
  // Replaces the true leaves of `cond` by `t` and the false leaves by `e`:
  // the tree/always/never reading of ((cond) ? t : e).
  TreeForm graft(const TreeForm& cond, const TreeForm& t, const TreeForm& e) {
    std::unordered_map<const void*, TreeForm> local;
    return graft_rec(cond, t, e, local);
  }

  TreeForm graft_rec(const TreeForm& cond, const TreeForm& t, const TreeForm& e,
                     std::unordered_map<const void*, TreeForm>& local) {
    if (cond.is_leaf()) return cond.truth() ? t : e;
    auto it = local.find(cond.key());
    if (it != local.end()) return it->second;
    TreeForm out = TreeForm::node(cond.var(), graft_rec(cond.left(), t, e, local),
                                  graft_rec(cond.right(), t, e, local));
    local.emplace(cond.key(), out);
    return out;
  }

  std::size_t budget_;
  std::unordered_map<const void*, TreeForm> memo_;
};

}  // namespace

TreeForm to_tree_form(const Formula& f, std::size_t node_budget) {
  return TreeBuilder(node_budget).build(desugar(f));
}

namespace {

void collect_paths(const TreeForm& t, Path& prefix, PathSets& out) {
  if (t.is_leaf()) {
    (t.truth() ? out.top : out.bot).push_back(prefix);
    return;
  }
  prefix.push_back({t.var(), false});
  collect_paths(t.left(), prefix, out);
  prefix.back().negated = true;
  collect_paths(t.right(), prefix, out);
  prefix.pop_back();
}

}  // namespace

PathSets paths(const TreeForm& t) {
  PathSets out;
  Path prefix;
  collect_paths(t, prefix, out);
  std::sort(out.top.begin(), out.top.end());
  std::sort(out.bot.begin(), out.bot.end());
  return out;
}

Polynomial Polynomial::constant(const Rat& c) {
  Polynomial p;
  if (c != 0) p.terms_[Monomial{}] = c;
  return p;
}

Polynomial Polynomial::variable(const std::string& name) {
  Polynomial p;
  p.terms_[Monomial{{name, 1}}] = 1;
  return p;
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial out = *this;
  for (const auto& [mono, coeff] : o.terms_) {
    auto [it, fresh] = out.terms_.emplace(mono, coeff);
    if (!fresh) {
      it->second += coeff;
      if (it->second == 0) out.terms_.erase(it);
    }
  }
  return out;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
  Polynomial neg;
  for (const auto& [mono, coeff] : o.terms_) neg.terms_[mono] = -coeff;
  return *this + neg;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
  Polynomial out;
  for (const auto& [ma, ca] : terms_)
    for (const auto& [mb, cb] : o.terms_) {
      Monomial m = ma;
      for (const auto& [var, exp] : mb) m[var] += exp;
      auto [it, fresh] = out.terms_.emplace(std::move(m), ca * cb);
      if (!fresh) {
        it->second += ca * cb;
        if (it->second == 0) out.terms_.erase(it);
      }
    }
  return out;
}

Rat Polynomial::eval(const std::map<std::string, Rat>& valuation) const {
  Rat sum = 0;
  for (const auto& [mono, coeff] : terms_) {
    Rat term = coeff;
    for (const auto& [var, exp] : mono) {
      auto it = valuation.find(var);
      if (it == valuation.end())
        throw std::invalid_argument("valuation missing variable \"" + var + "\"");
      for (unsigned i = 0; i < exp; ++i) term *= it->second;
    }
    sum += term;
  }
  return sum;
}

namespace {

std::string monomial_str(const Monomial& m) {
  std::string out;
  for (const auto& [var, exp] : m) {
    if (!out.empty()) out += "*";
    out += "p_" + var;
    if (exp > 1) out += "^" + std::to_string(exp);
  }
  return out;
}

}  // namespace

std::string Polynomial::str() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (const auto& [mono, coeff] : terms_) {
    const bool negative = coeff < 0;
    const Rat mag = negative ? Rat(-coeff) : coeff;
    if (out.empty()) {
      if (negative) out += "-";
    } else {
      out += negative ? " - " : " + ";
    }
    std::string vars = monomial_str(mono);
    if (vars.empty())
      out += format_rat(mag);
    else if (mag == 1)
      out += vars;
    else
      out += format_rat(mag) + "*" + vars;
  }
  return out;
}

Polynomial path_polynomial(const PathSets& ps) {
  Polynomial sum;
  for (const Path& path : ps.top) {
    Polynomial product = Polynomial::constant(1);
    for (const PathToken& tok : path) {
      Polynomial v = Polynomial::variable(tok.var);
      product = product * (tok.negated ? Polynomial::constant(1) - v : v);
    }
    sum = sum + product;
  }
  return sum;
}

Polynomial polynomial(const Formula& f, std::size_t node_budget) {
  return path_polynomial(paths(to_tree_form(f, node_budget)));
}

namespace {

Polynomial poly_rec(const Formula& core, std::unordered_map<const void*, Polynomial>& memo) {
  auto it = memo.find(core.key());
  if (it != memo.end()) return it->second;
  Polynomial out;
  switch (core.op()) {
    case Op::Top:
      out = Polynomial::constant(1);
      break;
    case Op::Bot:
      break;
    case Op::Var:
      out = Polynomial::variable(core.id());
      break;
    case Op::Ite: {
      Polynomial c = poly_rec(core.child(0), memo);
      Polynomial t = poly_rec(core.child(1), memo);
      Polynomial e = poly_rec(core.child(2), memo);
      out = c * (t - e) + e;
      break;
    }
    default:
      throw std::invalid_argument("polynomials are defined for pure terms only, got " +
                                  print(core));
  }
  memo.emplace(core.key(), out);
  return out;
}

}  // namespace

Polynomial polynomial_direct(const Formula& f) {
  std::unordered_map<const void*, Polynomial> memo;
  return poly_rec(desugar(f), memo);
}

namespace {

Polynomial robust_polynomial(const Formula& f) {
  try {
    return polynomial(f);
  } catch (const BudgetError&) {
    return polynomial_direct(f);
  }
}

}  // namespace

EquivResult decide_equiv(const Formula& a, const Formula& b) {
  EquivResult res;
  res.lhs_poly = robust_polynomial(a);
  res.rhs_poly = robust_polynomial(b);
  if (res.lhs_poly == res.rhs_poly) {
    res.equivalent = true;
    return res;
  }

  std::vector<std::string> vars;
  {
    auto va = variables(a), vb = variables(b);
    vars = va;
    vars.insert(vars.end(), vb.begin(), vb.end());
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  }

  std::mt19937_64 rng(0x5eedULL);
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::map<std::string, Rat> valuation;
    for (const auto& v : vars) {
      std::uint64_t den = rng() % 97 + 1;
      std::uint64_t num = rng() % (den + 1);
      valuation[v] = Rat(Int(num), Int(den));
    }
    Rat lhs = res.lhs_poly.eval(valuation);
    Rat rhs = res.rhs_poly.eval(valuation);
    if (lhs != rhs) {
      res.witness = Witness{std::move(valuation), lhs, rhs};
      return res;
    }
  }

  // No sampled point separated them; the polynomials still differ, so report
  // the first monomial whose coefficients disagree.
  auto ia = res.lhs_poly.terms().begin(), ea = res.lhs_poly.terms().end();
  auto ib = res.rhs_poly.terms().begin(), eb = res.rhs_poly.terms().end();
  while (ia != ea || ib != eb) {
    if (ib == eb || (ia != ea && ia->first < ib->first)) {
      res.separation = Separation{monomial_str(ia->first), ia->second, 0};
      return res;
    }
    if (ia == ea || ib->first < ia->first) {
      res.separation = Separation{monomial_str(ib->first), 0, ib->second};
      return res;
    }
    if (ia->second != ib->second) {
      res.separation = Separation{monomial_str(ia->first), ia->second, ib->second};
      return res;
    }
    ++ia;
    ++ib;
  }
  throw std::logic_error("polynomials differ but no separating monomial found");
}

namespace {

class Aligner {
 public:
  explicit Aligner(std::size_t budget) : budget_(budget) {}

  std::pair<TreeForm, TreeForm> run(const TreeForm& l, const TreeForm& r) {
    if (++steps_ > 4 * budget_)
      throw BudgetError("alignment exceeds the node budget of " + std::to_string(budget_) +
                        " nodes");
    if (l.is_leaf() && r.is_leaf()) return {l, r};
    if (!l.is_leaf() && !r.is_leaf() && l.var() == r.var()) {
      auto [a, c] = run(l.left(), r.left());
      auto [b, d] = run(l.right(), r.right());
      return {TreeForm::node(l.var(), a, b), TreeForm::node(l.var(), c, d)};
    }
    if (!l.is_leaf() && r.is_leaf()) {
      // r ~ (x ? r : r) for l's root variable x.
      auto [a, ra] = run(l.left(), r);
      auto [b, rb] = run(l.right(), r);
      return {TreeForm::node(l.var(), a, b), TreeForm::node(l.var(), ra, rb)};
    }
    if (l.is_leaf() && !r.is_leaf()) {
      auto [la, a] = run(l, r.left());
      auto [lb, b] = run(l, r.right());
      return {TreeForm::node(r.var(), la, lb), TreeForm::node(r.var(), a, b)};
    }
    // Both internal with different root variables: test r's variable on top of
    // the whole of l, then align against r's branches.
    auto [l1, c] = run(l, r.left());
    auto [l2, d] = run(l, r.right());
    return {TreeForm::node(r.var(), l1, l2), TreeForm::node(r.var(), c, d)};
  }

 private:
  std::size_t budget_;
  std::size_t steps_ = 0;
};

std::vector<Path> path_difference(const std::vector<Path>& a, const std::vector<Path>& b) {
  std::vector<Path> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

Path sorted_tokens(const Path& p) {
  Path key = p;
  std::sort(key.begin(), key.end());
  return key;
}

void pair_swaps(Alignment& out) {
  PathSets pl = paths(out.lhs);
  PathSets pr = paths(out.rhs);

  std::vector<Path> gained = path_difference(pl.top, pr.top);  // Top left, Bot right
  std::vector<Path> lost = path_difference(pr.top, pl.top);    // Bot left, Top right

  std::map<Path, std::vector<Path>> by_multiset;
  for (const Path& p : lost) by_multiset[sorted_tokens(p)].push_back(p);

  out.swaps.clear();
  out.complete = true;
  for (const Path& p : gained) {
    auto it = by_multiset.find(sorted_tokens(p));
    if (it == by_multiset.end() || it->second.empty()) {
      out.complete = false;
      continue;
    }
    out.swaps.push_back({p, it->second.front()});
    it->second.erase(it->second.begin());
  }
  for (const auto& [key, rest] : by_multiset)
    if (!rest.empty()) out.complete = false;
}

// Per-variable maximum number of tests along any single path, over both trees,
// flattened into sorted blocks: {x,x,y} means two x tests then one y test.
std::vector<std::string> merged_profile(const TreeForm& a, const TreeForm& b) {
  std::map<std::string, std::size_t> peak;
  auto absorb = [&peak](const TreeForm& t) {
    PathSets ps = paths(t);
    auto count = [&peak](const std::vector<Path>& side) {
      for (const Path& p : side) {
        std::map<std::string, std::size_t> c;
        for (const PathToken& tok : p) ++c[tok.var];
        for (const auto& [var, n] : c)
          if (n > peak[var]) peak[var] = n;
      }
    };
    count(ps.top);
    count(ps.bot);
  };
  absorb(a);
  absorb(b);
  std::vector<std::string> out;
  for (const auto& [var, n] : peak) out.insert(out.end(), n, var);
  return out;
}

// Brings one test of v to the root: grafts a redundant test over v-free
// leaves, transposes v above a foreign root otherwise. Path multisets are
// unchanged apart from the grafted token.
TreeForm lift_test(const TreeForm& t, const std::string& v) {
  if (t.is_leaf()) return TreeForm::node(v, t, t);
  if (t.var() == v) return t;
  TreeForm l = lift_test(t.left(), v);
  TreeForm r = lift_test(t.right(), v);
  return TreeForm::node(v, TreeForm::node(t.var(), l.left(), r.left()),
                        TreeForm::node(t.var(), l.right(), r.right()));
}

TreeForm full_profile(const TreeForm& t, const std::vector<std::string>& wanted, std::size_t k) {
  if (k == wanted.size()) {
    if (!t.is_leaf()) throw std::logic_error("profile expansion left a dangling test");
    return t;
  }
  TreeForm lifted = lift_test(t, wanted[k]);
  return TreeForm::node(wanted[k], full_profile(lifted.left(), wanted, k + 1),
                        full_profile(lifted.right(), wanted, k + 1));
}

}  // namespace

Alignment align_and_swap(const TreeForm& lhs, const TreeForm& rhs, std::size_t node_budget) {
  Alignment out;
  std::tie(out.lhs, out.rhs) = Aligner(node_budget).run(lhs, rhs);
  if (logical_size(out.lhs, node_budget + 1) > node_budget ||
      logical_size(out.rhs, node_budget + 1) > node_budget)
    budget_exceeded(node_budget);
  pair_swaps(out);
  if (out.complete) return out;

  // Equal polynomials do not force a one-to-one multiset pairing on these
  // path sets: sums of products over distinct multisets can cancel, as in
  // (1-q)r + (1-r) = q(1-r) + (1-q). Rebuilding both trees over a common full
  // test profile makes the per-multiset products linearly independent (a
  // Bernstein tensor basis), so equivalent inputs always pair completely.
  if (path_polynomial(paths(lhs)) != path_polynomial(paths(rhs))) return out;
  std::vector<std::string> wanted = merged_profile(lhs, rhs);
  if (wanted.size() >= 63 || (std::size_t{1} << (wanted.size() + 1)) > node_budget)
    budget_exceeded(node_budget);
  Alignment full;
  full.lhs = full_profile(lhs, wanted, 0);
  full.rhs = full_profile(rhs, wanted, 0);
  pair_swaps(full);
  return full;
}

namespace {

TreeForm flip_leaf(const TreeForm& t, const Path& p, std::size_t i) {
  if (i == p.size()) {
    if (!t.is_leaf()) throw std::invalid_argument("path stops short of a leaf");
    return TreeForm::leaf(!t.truth());
  }
  if (t.is_leaf() || t.var() != p[i].var)
    throw std::invalid_argument("path " + to_string(p) + " does not trace the tree");
  if (p[i].negated) return TreeForm::node(t.var(), t.left(), flip_leaf(t.right(), p, i + 1));
  return TreeForm::node(t.var(), flip_leaf(t.left(), p, i + 1), t.right());
}

}  // namespace

TreeForm apply_swaps(const TreeForm& t, const std::vector<SwapPair>& swaps) {
  TreeForm out = t;
  for (const SwapPair& s : swaps) {
    out = flip_leaf(out, s.top_path, 0);
    out = flip_leaf(out, s.bot_path, 0);
  }
  return out;
}

}  // namespace amc
