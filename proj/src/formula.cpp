#include "amc/formula.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

namespace amc {

struct Formula::Node {
  Op op;
  std::string id;  // Var name, or agent for Cond/Expect/Box
  std::vector<Formula> kids;
  unsigned long lo = 0, hi = 0;  // Repeat bounds
  std::size_t hash = 0;
};

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

std::size_t node_hash(Op op, const std::string& id, const std::vector<Formula>& kids,
                      unsigned long lo, unsigned long hi) {
  std::size_t h = static_cast<std::size_t>(op) * 0x100000001b3ULL;
  h = mix(h, std::hash<std::string>{}(id));
  for (const auto& k : kids) h = mix(h, k.hash());
  h = mix(h, lo);
  h = mix(h, hi);
  return h;
}

}  // namespace

static Formula make(Op op, std::string id, std::vector<Formula> kids, unsigned long lo = 0,
                    unsigned long hi = 0);

const Formula::Node& Formula::node() const {
  if (!node_) throw std::logic_error("null formula");
  return *node_;
}

Op Formula::op() const { return node().op; }
const std::string& Formula::id() const { return node().id; }
std::size_t Formula::arity() const { return node().kids.size(); }
const Formula& Formula::child(std::size_t i) const { return node().kids.at(i); }
unsigned long Formula::repeat_lo() const { return node().lo; }
unsigned long Formula::repeat_hi() const { return node().hi; }
std::size_t Formula::hash() const { return node().hash; }

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (!a.node_ || !b.node_) return false;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.hash != y.hash || x.op != y.op || x.id != y.id || x.lo != y.lo || x.hi != y.hi ||
      x.kids.size() != y.kids.size())
    return false;
  for (std::size_t i = 0; i < x.kids.size(); ++i)
    if (!(x.kids[i] == y.kids[i])) return false;
  return true;
}

static Formula make(Op op, std::string id, std::vector<Formula> kids, unsigned long lo,
                    unsigned long hi) {
  auto n = std::make_shared<Formula::Node>();
  n->op = op;
  n->id = std::move(id);
  n->kids = std::move(kids);
  n->lo = lo;
  n->hi = hi;
  n->hash = node_hash(n->op, n->id, n->kids, lo, hi);
  return Formula(std::move(n));
}

Formula Formula::top() {
  static const Formula instance = make(Op::Top, "", {});
  return instance;
}

Formula Formula::bot() {
  static const Formula instance = make(Op::Bot, "", {});
  return instance;
}

Formula Formula::var(std::string name) { return make(Op::Var, std::move(name), {}); }

Formula Formula::ite(Formula c, Formula t, Formula e) {
  return make(Op::Ite, "", {std::move(c), std::move(t), std::move(e)});
}

Formula Formula::cond(Formula target, Formula given, std::string agent) {
  return make(Op::Cond, std::move(agent), {std::move(target), std::move(given)});
}

Formula Formula::conj(Formula a, Formula b) {
  return make(Op::And, "", {std::move(a), std::move(b)});
}

Formula Formula::disj(Formula a, Formula b) {
  return make(Op::Or, "", {std::move(a), std::move(b)});
}

Formula Formula::implies(Formula a, Formula b) {
  return make(Op::Implies, "", {std::move(a), std::move(b)});
}

Formula Formula::neg(Formula a) { return make(Op::Not, "", {std::move(a)}); }

Formula Formula::expect(std::string agent, Formula a) {
  return make(Op::Expect, std::move(agent), {std::move(a)});
}

Formula Formula::box(std::string agent, Formula a) {
  return make(Op::Box, std::move(agent), {std::move(a)});
}

Formula Formula::repeat(Formula a, unsigned long lo, unsigned long hi) {
  return make(Op::Repeat, "", {std::move(a)}, lo, hi);
}

namespace {

class Desugarer {
 public:
  Formula run(const Formula& f) {
    auto it = memo_.find(f.key());
    if (it != memo_.end()) return it->second;
    Formula out = expand(f);
    memo_.emplace(f.key(), out);
    return out;
  }

 private:
  Formula expand(const Formula& f) {
    switch (f.op()) {
      case Op::Top:
      case Op::Bot:
      case Op::Var:
        return f;
      case Op::Ite: {
        Formula c = run(f.child(0)), t = run(f.child(1)), e = run(f.child(2));
        if (c == f.child(0) && t == f.child(1) && e == f.child(2)) return f;
        return Formula::ite(c, t, e);
      }
      case Op::Cond: {
        Formula t = run(f.child(0)), g = run(f.child(1));
        if (t == f.child(0) && g == f.child(1)) return f;
        return Formula::cond(t, g, f.id());
      }
      case Op::And:
        return Formula::ite(run(f.child(0)), run(f.child(1)), Formula::bot());
      case Op::Or:
        return Formula::ite(run(f.child(0)), Formula::top(), run(f.child(1)));
      case Op::Implies:
        return Formula::ite(run(f.child(0)), run(f.child(1)), Formula::top());
      case Op::Not:
        return Formula::ite(run(f.child(0)), Formula::bot(), Formula::top());
      case Op::Expect:
        return Formula::cond(run(f.child(0)), Formula::top(), f.id());
      case Op::Box:
        return Formula::cond(
            Formula::bot(), Formula::ite(run(f.child(0)), Formula::bot(), Formula::top()),
            f.id());
      case Op::Repeat:
        return repeat_table(run(f.child(0)), f.repeat_lo(), f.repeat_hi());
    }
    throw std::logic_error("unreachable");
  }

  // a-out-of-b expansion with shared subterms: cell (i, j) is the term for
  // "at least i successes in j trials", so the table is (a+1) x (b+1) at most.
  Formula repeat_table(const Formula& base, unsigned long a, unsigned long b) {
    std::map<std::pair<unsigned long, unsigned long>, Formula> cells;
    return repeat_cell(cells, base, a, b);
  }

  Formula repeat_cell(std::map<std::pair<unsigned long, unsigned long>, Formula>& cells,
                      const Formula& base, unsigned long a, unsigned long b) {
    if (a == 0) return Formula::top();
    if (b < a) return Formula::bot();
    auto key = std::make_pair(a, b);
    auto it = cells.find(key);
    if (it != cells.end()) return it->second;
    Formula out = Formula::ite(base, repeat_cell(cells, base, a - 1, b - 1),
                               repeat_cell(cells, base, a, b - 1));
    cells.emplace(key, out);
    return out;
  }

  std::unordered_map<const void*, Formula> memo_;
};

}  // namespace

Formula desugar(const Formula& f) { return Desugarer{}.run(f); }

Formula substitute(const Formula& f, const std::string& name, const Formula& replacement) {
  switch (f.op()) {
    case Op::Top:
    case Op::Bot:
      return f;
    case Op::Var:
      return f.id() == name ? replacement : f;
    default:
      break;
  }
  std::vector<Formula> kids;
  kids.reserve(f.arity());
  bool changed = false;
  for (std::size_t i = 0; i < f.arity(); ++i) {
    kids.push_back(substitute(f.child(i), name, replacement));
    changed = changed || !(kids.back() == f.child(i));
  }
  if (!changed) return f;
  switch (f.op()) {
    case Op::Ite:
      return Formula::ite(kids[0], kids[1], kids[2]);
    case Op::Cond:
      return Formula::cond(kids[0], kids[1], f.id());
    case Op::And:
      return Formula::conj(kids[0], kids[1]);
    case Op::Or:
      return Formula::disj(kids[0], kids[1]);
    case Op::Implies:
      return Formula::implies(kids[0], kids[1]);
    case Op::Not:
      return Formula::neg(kids[0]);
    case Op::Expect:
      return Formula::expect(f.id(), kids[0]);
    case Op::Box:
      return Formula::box(f.id(), kids[0]);
    case Op::Repeat:
      return Formula::repeat(kids[0], f.repeat_lo(), f.repeat_hi());
    default:
      throw std::logic_error("unreachable");
  }
}

namespace {

void walk(const Formula& f, std::set<std::string>& vars, std::set<std::string>& ags,
          std::set<const void*>& seen) {
  if (!seen.insert(f.key()).second) return;
  if (f.op() == Op::Var) vars.insert(f.id());
  if (f.op() == Op::Cond || f.op() == Op::Expect || f.op() == Op::Box) ags.insert(f.id());
  for (std::size_t i = 0; i < f.arity(); ++i) walk(f.child(i), vars, ags, seen);
}

}  // namespace

std::vector<std::string> variables(const Formula& f) {
  std::set<std::string> vars, ags;
  std::set<const void*> seen;
  walk(f, vars, ags, seen);
  return {vars.begin(), vars.end()};
}

std::vector<std::string> agents(const Formula& f) {
  std::set<std::string> vars, ags;
  std::set<const void*> seen;
  walk(f, vars, ags, seen);
  return {ags.begin(), ags.end()};
}

bool is_pure(const Formula& f) {
  if (f.op() == Op::Cond || f.op() == Op::Expect || f.op() == Op::Box) return false;
  for (std::size_t i = 0; i < f.arity(); ++i)
    if (!is_pure(f.child(i))) return false;
  return true;
}

namespace {

std::size_t count_nodes(const Formula& f, std::unordered_map<const void*, std::size_t>& memo) {
  auto it = memo.find(f.key());
  if (it != memo.end()) return it->second;
  std::size_t n = 1;
  for (std::size_t i = 0; i < f.arity(); ++i) n += count_nodes(f.child(i), memo);
  memo.emplace(f.key(), n);
  return n;
}

}  // namespace

std::size_t node_count(const Formula& f) {
  std::unordered_map<const void*, std::size_t> memo;
  return count_nodes(f, memo);
}

std::string print_pos(const Pos& pos) {
  std::string out = "[";
  for (std::size_t i = 0; i < pos.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(pos[i]);
  }
  return out + "]";
}

Formula subterm_at(const Formula& f, const Pos& pos) {
  Formula cur = f;
  for (int step : pos) {
    if (step < 0 || static_cast<std::size_t>(step) >= cur.arity())
      throw std::out_of_range("no subterm at position " + print_pos(pos) + " of " + print(f));
    cur = cur.child(static_cast<std::size_t>(step));
  }
  return cur;
}

Formula replace_at(const Formula& f, const Pos& pos, const Formula& with) {
  if (pos.empty()) return with;
  int step = pos.front();
  if (step < 0 || static_cast<std::size_t>(step) >= f.arity())
    throw std::out_of_range("no subterm at position " + print_pos(pos) + " of " + print(f));
  Pos rest(pos.begin() + 1, pos.end());
  std::vector<Formula> kids;
  kids.reserve(f.arity());
  for (std::size_t i = 0; i < f.arity(); ++i)
    kids.push_back(i == static_cast<std::size_t>(step) ? replace_at(f.child(i), rest, with)
                                                       : f.child(i));
  switch (f.op()) {
    case Op::Ite:
      return Formula::ite(kids[0], kids[1], kids[2]);
    case Op::Cond:
      return Formula::cond(kids[0], kids[1], f.id());
    case Op::And:
      return Formula::conj(kids[0], kids[1]);
    case Op::Or:
      return Formula::disj(kids[0], kids[1]);
    case Op::Implies:
      return Formula::implies(kids[0], kids[1]);
    case Op::Not:
      return Formula::neg(kids[0]);
    case Op::Expect:
      return Formula::expect(f.id(), kids[0]);
    case Op::Box:
      return Formula::box(f.id(), kids[0]);
    case Op::Repeat:
      return Formula::repeat(kids[0], f.repeat_lo(), f.repeat_hi());
    default:
      throw std::logic_error("unreachable");
  }
}

}  // namespace amc
