#include "amc/proof.hpp"

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace amc {

std::string to_string(Dir d) { return d == Dir::LR ? "LR" : "RL"; }

Dir flip(Dir d) { return d == Dir::LR ? Dir::RL : Dir::LR; }

const std::vector<Axiom>& axioms() {
  static const std::vector<Axiom> table = [] {
    const Formula x = Formula::var("x"), y = Formula::var("y"), z = Formula::var("z");
    const Formula p = Formula::var("p"), q = Formula::var("q");
    const Formula r = Formula::var("r"), s = Formula::var("s"), c = Formula::var("c");
    const Formula T = Formula::top(), F = Formula::bot();
    auto ite = [](const Formula& a, const Formula& b, const Formula& e) {
      return Formula::ite(a, b, e);
    };
    auto cond = [](const Formula& tgt, const Formula& gvn) {
      return Formula::cond(tgt, gvn, "i");
    };

    std::vector<Axiom> t;
    t.push_back({"id", x, x});
    t.push_back({"vacuous", ite(x, T, F), x});
    t.push_back({"ignore", ite(x, y, y), y});
    t.push_back({"always", ite(T, x, y), x});
    t.push_back({"never", ite(F, x, y), y});
    t.push_back({"tree", ite(ite(x, y, z), p, q), ite(x, ite(y, p, q), ite(z, p, q))});
    t.push_back({"swap", ite(x, ite(y, p, q), ite(y, r, s)), ite(y, ite(x, p, r), ite(x, q, s))});
    t.push_back({"A0", cond(ite(x, y, z), c),
                 ite(cond(x, c), cond(y, ite(x, c, F)), cond(z, ite(x, F, c)))});
    t.push_back({"A1", ite(cond(F, x), cond(x, y), F), cond(F, ite(x, T, y))});
    // Conditionals on an impossible body are two-valued, so they absorb their
    // own conjunction.
    t.push_back({"A2", cond(F, x), ite(cond(F, x), cond(F, x), F)});
    t.push_back({"A3", cond(T, x), T});
    t.push_back({"A4", cond(x, F), T});
    return t;
  }();
  return table;
}

const Axiom& axiom(const std::string& name) {
  for (const Axiom& ax : axioms())
    if (ax.name == name) return ax;
  throw ProofError("unknown axiom \"" + name + "\"");
}

bool match(const Formula& pattern, const Formula& term, Bindings& into) {
  switch (pattern.op()) {
    case Op::Var: {
      auto [it, fresh] = into.terms.emplace(pattern.id(), term);
      return fresh || it->second == term;
    }
    case Op::Top:
    case Op::Bot:
      return term.op() == pattern.op();
    case Op::Ite:
      return term.op() == Op::Ite && match(pattern.child(0), term.child(0), into) &&
             match(pattern.child(1), term.child(1), into) &&
             match(pattern.child(2), term.child(2), into);
    case Op::Cond: {
      if (term.op() != Op::Cond) return false;
      auto [it, fresh] = into.agents.emplace(pattern.id(), term.id());
      if (!fresh && it->second != term.id()) return false;
      return match(pattern.child(0), term.child(0), into) &&
             match(pattern.child(1), term.child(1), into);
    }
    default:
      throw ProofError("axiom patterns are core terms, got " + print(pattern));
  }
}

Formula instantiate(const Formula& pattern, const Bindings& b) {
  switch (pattern.op()) {
    case Op::Var: {
      auto it = b.terms.find(pattern.id());
      if (it == b.terms.end()) throw ProofError("unbound metavariable \"" + pattern.id() + "\"");
      return it->second;
    }
    case Op::Top:
    case Op::Bot:
      return pattern;
    case Op::Ite:
      return Formula::ite(instantiate(pattern.child(0), b), instantiate(pattern.child(1), b),
                          instantiate(pattern.child(2), b));
    case Op::Cond: {
      auto it = b.agents.find(pattern.id());
      if (it == b.agents.end())
        throw ProofError("unbound agent metavariable \"" + pattern.id() + "\"");
      return Formula::cond(instantiate(pattern.child(0), b), instantiate(pattern.child(1), b),
                           it->second);
    }
    default:
      throw ProofError("axiom patterns are core terms, got " + print(pattern));
  }
}

Formula apply(const Formula& f, const Axiom& ax, const Pos& pos, Dir dir, const Bindings& extra,
              Bindings* used) {
  Formula sub = subterm_at(f, pos);
  Bindings b = extra;
  if (!match(ax.side(dir), sub, b))
    throw ProofError(ax.name + " (" + to_string(dir) + ") does not match " + print(sub) + " at " +
                     print_pos(pos));
  Formula to = instantiate(ax.other(dir), b);
  if (used) *used = std::move(b);
  return replace_at(f, pos, to);
}

CheckResult check(const ProofTrace& trace) {
  Formula cur = desugar(trace.start);
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const Step& s = trace.steps[i];
    const Axiom* ax = nullptr;
    for (const Axiom& cand : axioms())
      if (cand.name == s.axiom) {
        ax = &cand;
        break;
      }
    if (!ax) return {false, i, "unknown axiom \"" + s.axiom + "\""};
    Formula sub;
    try {
      sub = subterm_at(cur, s.pos);
    } catch (const std::out_of_range&) {
      return {false, i, "no subterm at " + print_pos(s.pos)};
    }
    Formula from, to;
    try {
      from = instantiate(ax->side(s.dir), s.bind);
      to = instantiate(ax->other(s.dir), s.bind);
    } catch (const ProofError& e) {
      return {false, i, e.what()};
    }
    if (from != sub)
      return {false, i,
              s.axiom + " instance " + print(from) + " does not match subterm " + print(sub) +
                  " at " + print_pos(s.pos)};
    cur = replace_at(cur, s.pos, to);
  }
  if (cur != desugar(trace.end))
    return {false, trace.steps.size(),
            "replay ends at " + print(cur) + " instead of " + print(desugar(trace.end))};
  return {true, 0, ""};
}

ProofTrace reversed(const ProofTrace& trace) {
  ProofTrace out;
  out.start = trace.end;
  out.end = trace.start;
  out.steps.reserve(trace.steps.size());
  for (auto it = trace.steps.rbegin(); it != trace.steps.rend(); ++it) {
    Step s = *it;
    s.dir = flip(s.dir);
    out.steps.push_back(std::move(s));
  }
  return out;
}

namespace {

// Applies steps to a working term and keeps the log needed for a ProofTrace.
// The optional caps guard the derivation generators against blowup.
class Recorder {
 public:
  explicit Recorder(Formula start, std::size_t node_cap = 0, std::size_t steps_cap = 0)
      : work_(std::move(start)), node_cap_(node_cap), steps_cap_(steps_cap) {}

  void step(const std::string& ax, Pos pos, Dir dir, const Bindings& extra = {}) {
    Bindings used;
    work_ = apply(work_, axiom(ax), pos, dir, extra, &used);
    steps_.push_back({ax, std::move(pos), dir, std::move(used)});
    if (steps_cap_ && steps_.size() > steps_cap_)
      throw BudgetError("derivation exceeds " + std::to_string(steps_cap_) + " steps");
    if (node_cap_ && node_count(work_) > node_cap_)
      throw BudgetError("derivation term exceeds " + std::to_string(node_cap_) + " nodes");
  }

  const Formula& work() const { return work_; }
  const std::vector<Step>& steps() const { return steps_; }
  std::vector<Step> take() { return std::move(steps_); }

 private:
  Formula work_;
  std::vector<Step> steps_;
  std::size_t node_cap_, steps_cap_;
};

int branch_of(const PathToken& tok) { return tok.negated ? 2 : 1; }

Pos extended(const Pos& pos, int child) {
  Pos out = pos;
  out.push_back(child);
  return out;
}

void ttf(Recorder& rec, const Pos& pos);

// The subterm at `pos` is (c ? t : e) with c already in tree shape; push t and
// e down to c's leaves, then continue on the copies that surface.
void pushdown(Recorder& rec, const Pos& pos) {
  Formula c = subterm_at(rec.work(), pos).child(0);
  if (c.op() == Op::Top) {
    rec.step("always", pos, Dir::LR);
    ttf(rec, pos);
    return;
  }
  if (c.op() == Op::Bot) {
    rec.step("never", pos, Dir::LR);
    ttf(rec, pos);
    return;
  }
  rec.step("tree", pos, Dir::LR);
  pushdown(rec, extended(pos, 1));
  pushdown(rec, extended(pos, 2));
}

// Rewrites the subterm at `pos` into decision-tree shape: every condition a
// bare variable test, every branch tip a constant.
void ttf(Recorder& rec, const Pos& pos) {
  Formula sub = subterm_at(rec.work(), pos);
  switch (sub.op()) {
    case Op::Top:
    case Op::Bot:
      return;
    case Op::Var:
      rec.step("vacuous", pos, Dir::RL);
      return;
    case Op::Ite:
      ttf(rec, extended(pos, 0));
      pushdown(rec, pos);
      return;
    default:
      throw std::invalid_argument("tree derivations are defined for pure terms only, got " +
                                  print(sub));
  }
}

bool is_tree_leaf(const Formula& f) { return f.op() == Op::Top || f.op() == Op::Bot; }

// Grafts redundant tests until the two working terms trace the same paths,
// mirroring the tree alignment so the grafts land as ignore steps.
void align_rec(Recorder& lhs, Recorder& rhs, const Pos& pl, const Pos& pr) {
  Formula l = subterm_at(lhs.work(), pl);
  Formula r = subterm_at(rhs.work(), pr);
  if (is_tree_leaf(l) && is_tree_leaf(r)) return;
  if (!is_tree_leaf(l) && !is_tree_leaf(r) && l.child(0).id() == r.child(0).id()) {
    align_rec(lhs, rhs, extended(pl, 1), extended(pr, 1));
    align_rec(lhs, rhs, extended(pl, 2), extended(pr, 2));
    return;
  }
  if (!is_tree_leaf(l) && is_tree_leaf(r)) {
    Bindings extra;
    extra.terms.emplace("x", Formula::var(l.child(0).id()));
    rhs.step("ignore", pr, Dir::RL, extra);
  } else {
    // Leaf-under-node and mismatched roots both resolve by testing r's root
    // variable on top of the whole left subterm.
    Bindings extra;
    extra.terms.emplace("x", Formula::var(r.child(0).id()));
    lhs.step("ignore", pl, Dir::RL, extra);
  }
  align_rec(lhs, rhs, pl, pr);
}

// Lifts the variable tested at path step k+1 above the one at step k, keeping
// the path itself pointing at the same leaf.
void transpose(Recorder& rec, const Pos& base, Path& path, std::size_t k) {
  Pos node_pos = base;
  for (std::size_t i = 0; i < k; ++i) node_pos.push_back(branch_of(path[i]));
  Bindings extra;
  extra.terms.emplace("x", Formula::var(path[k + 1].var));
  rec.step("ignore", extended(node_pos, 3 - branch_of(path[k])), Dir::RL, extra);
  rec.step("swap", node_pos, Dir::LR);
  std::swap(path[k], path[k + 1]);
}

// Exchanges the leaves at two multiset-equal paths of a tree-shaped term and
// restores every other structural detail. Descends the common prefix, bubbles
// a shared tail token up to both divergence branches, swaps, and recurses on
// the shortened paths; the tidy-up replays the bubbling backwards.
void swap_leaves(Recorder& rec, Pos pos, Path a, Path b) {
  std::size_t shared = 0;
  while (shared < a.size() && shared < b.size() && a[shared] == b[shared]) {
    pos.push_back(branch_of(a[shared]));
    ++shared;
  }
  a.erase(a.begin(), a.begin() + shared);
  b.erase(b.begin(), b.begin() + shared);
  if (a.empty() || b.empty()) throw std::logic_error("leaf swap on identical paths");

  std::map<std::pair<std::string, bool>, int> tail_of_b;
  for (std::size_t j = 1; j < b.size(); ++j) ++tail_of_b[{b[j].var, b[j].negated}];
  std::size_t pa = 0;
  for (std::size_t j = 1; j < a.size(); ++j) {
    auto it = tail_of_b.find({a[j].var, a[j].negated});
    if (it != tail_of_b.end() && it->second > 0) {
      pa = j;
      break;
    }
  }

  if (pa == 0) {
    // No shared tail token: the paths are <t, ~t> and <~t, t> over one
    // variable, and a single swap exchanges exactly the two leaves.
    rec.step("swap", pos, Dir::LR);
    return;
  }

  const PathToken pivot = a[pa];
  std::size_t pb = 0;
  for (std::size_t j = 1; j < b.size(); ++j)
    if (b[j] == pivot) {
      pb = j;
      break;
    }

  const std::size_t setup_begin = rec.steps().size();
  for (std::size_t k = pa; k > 1; --k) transpose(rec, pos, a, k - 1);
  for (std::size_t k = pb; k > 1; --k) transpose(rec, pos, b, k - 1);
  const std::size_t setup_end = rec.steps().size();

  rec.step("swap", pos, Dir::LR);
  Path a2, b2;
  a2.push_back(a[0]);
  a2.insert(a2.end(), a.begin() + 2, a.end());
  b2.push_back(b[0]);
  b2.insert(b2.end(), b.begin() + 2, b.end());
  swap_leaves(rec, extended(pos, branch_of(pivot)), std::move(a2), std::move(b2));
  rec.step("swap", pos, Dir::RL);

  for (std::size_t i = setup_end; i-- > setup_begin;) {
    const Step undo = rec.steps()[i];
    rec.step(undo.axiom, undo.pos, flip(undo.dir));
  }
}

TreeForm tree_of(const Formula& f) {
  if (f.op() == Op::Top) return TreeForm::leaf(true);
  if (f.op() == Op::Bot) return TreeForm::leaf(false);
  if (f.op() != Op::Ite || f.child(0).op() != Op::Var)
    throw std::logic_error("term is not in tree shape: " + print(f));
  return TreeForm::node(f.child(0).id(), tree_of(f.child(1)), tree_of(f.child(2)));
}

// Brings one test of v to the root of the subterm at `pos`: grafts a
// redundant test over v-free leaves, then transposes v upward.
void rootify(Recorder& rec, const Pos& pos, const std::string& v) {
  Formula sub = subterm_at(rec.work(), pos);
  if (is_tree_leaf(sub)) {
    Bindings extra;
    extra.terms.emplace("x", Formula::var(v));
    rec.step("ignore", pos, Dir::RL, extra);
    return;
  }
  if (sub.child(0).id() == v) return;
  rootify(rec, extended(pos, 1), v);
  rootify(rec, extended(pos, 2), v);
  rec.step("swap", pos, Dir::LR);
}

// Rewrites the tree-shaped subterm at `pos` so every path tests exactly the
// variables in `wanted`, in that order.
void to_full_profile(Recorder& rec, const Pos& pos, const std::vector<std::string>& wanted,
                     std::size_t k) {
  if (k == wanted.size()) return;
  rootify(rec, pos, wanted[k]);
  to_full_profile(rec, extended(pos, 1), wanted, k + 1);
  to_full_profile(rec, extended(pos, 2), wanted, k + 1);
}

std::vector<std::string> common_profile(const TreeForm& a, const TreeForm& b) {
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

std::vector<Step> merge_routes(Recorder& lhs, Recorder& rhs) {
  std::vector<Step> steps = lhs.take();
  std::vector<Step> back = rhs.take();
  steps.reserve(steps.size() + back.size());
  for (auto it = back.rbegin(); it != back.rend(); ++it) {
    Step st = std::move(*it);
    st.dir = flip(st.dir);
    steps.push_back(std::move(st));
  }
  return steps;
}

std::optional<std::vector<Step>> tree_route(const Formula& s, const Formula& t,
                                            std::size_t node_budget) {
  const std::size_t node_cap = 4 * node_budget;
  const std::size_t steps_cap = std::size_t{1} << 20;
  {
    Recorder lhs(s, node_cap, steps_cap);
    Recorder rhs(t, node_cap, steps_cap);
    ttf(lhs, {});
    ttf(rhs, {});
    align_rec(lhs, rhs, {}, {});
    Alignment al = align_and_swap(tree_of(lhs.work()), tree_of(rhs.work()), node_budget);
    // align_and_swap may have rebuilt the trees over a full profile; its swap
    // paths only trace our working terms when the shapes were kept.
    if (al.complete && al.lhs == tree_of(lhs.work()) && al.rhs == tree_of(rhs.work())) {
      for (const SwapPair& sp : al.swaps) swap_leaves(lhs, {}, sp.top_path, sp.bot_path);
      if (lhs.work() == rhs.work()) return merge_routes(lhs, rhs);
    }
  }

  // The cheap alignment can leave differing leaves that no multiset pairing
  // reconciles even though the sides are equivalent. Expanding both sides to
  // a common full test profile restores the pairing guarantee.
  Recorder lhs(s, node_cap, steps_cap);
  Recorder rhs(t, node_cap, steps_cap);
  ttf(lhs, {});
  ttf(rhs, {});
  std::vector<std::string> wanted = common_profile(tree_of(lhs.work()), tree_of(rhs.work()));
  if (wanted.size() >= 63 || (std::size_t{1} << (wanted.size() + 1)) > node_budget)
    throw BudgetError("full profile exceeds the node budget of " + std::to_string(node_budget) +
                      " nodes");
  to_full_profile(lhs, {}, wanted, 0);
  to_full_profile(rhs, {}, wanted, 0);
  Alignment al = align_and_swap(tree_of(lhs.work()), tree_of(rhs.work()), node_budget);
  if (!al.complete) return std::nullopt;
  for (const SwapPair& sp : al.swaps) swap_leaves(lhs, {}, sp.top_path, sp.bot_path);
  if (lhs.work() != rhs.work()) return std::nullopt;
  return merge_routes(lhs, rhs);
}

void collect_positions(const Formula& f, Pos& cur, std::vector<std::pair<Pos, Formula>>& out) {
  out.emplace_back(cur, f);
  for (std::size_t i = 0; i < f.arity(); ++i) {
    cur.push_back(static_cast<int>(i));
    collect_positions(f.child(i), cur, out);
    cur.pop_back();
  }
}

void collect_meta(const Formula& pat, std::vector<std::string>& terms,
                  std::vector<std::string>& agents) {
  if (pat.op() == Op::Var) {
    if (std::find(terms.begin(), terms.end(), pat.id()) == terms.end()) terms.push_back(pat.id());
  } else if (pat.op() == Op::Cond) {
    if (std::find(agents.begin(), agents.end(), pat.id()) == agents.end())
      agents.push_back(pat.id());
  }
  for (std::size_t i = 0; i < pat.arity(); ++i) collect_meta(pat.child(i), terms, agents);
}

struct BudgetStop {};

struct SearchSide {
  struct Rec {
    Formula term;
    int parent = -1;
    Step step;
  };
  std::vector<Rec> recs;
  std::unordered_map<std::string, int> seen;
  std::deque<int> frontier;
};

std::vector<Step> steps_to(const SearchSide& side, int idx) {
  std::vector<Step> out;
  for (int i = idx; side.recs[i].parent >= 0; i = side.recs[i].parent)
    out.push_back(side.recs[i].step);
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<Step> compose_meeting(const SearchSide& fwd, int fi, const SearchSide& bwd, int bi) {
  std::vector<Step> steps = steps_to(fwd, fi);
  std::vector<Step> back = steps_to(bwd, bi);
  for (auto it = back.rbegin(); it != back.rend(); ++it) {
    Step st = *it;
    st.dir = flip(st.dir);
    steps.push_back(std::move(st));
  }
  return steps;
}

// Breadth-first over axiom rewrites from both endpoints at once, meeting in
// the middle. Metavariables that the matched side leaves free are filled from
// the endpoints' variables plus the constants.
std::optional<std::vector<Step>> bidirectional_search(const Formula& s, const Formula& t,
                                                      std::size_t budget) {
  std::vector<Formula> term_pool{Formula::top(), Formula::bot()};
  {
    auto vs = variables(s), vt = variables(t);
    vs.insert(vs.end(), vt.begin(), vt.end());
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    for (const auto& v : vs) term_pool.push_back(Formula::var(v));
  }
  std::vector<std::string> agent_pool;
  {
    auto as = agents(s), at = agents(t);
    as.insert(as.end(), at.begin(), at.end());
    std::sort(as.begin(), as.end());
    as.erase(std::unique(as.begin(), as.end()), as.end());
    agent_pool = std::move(as);
  }
  const std::size_t size_cap = 2 * std::max(node_count(s), node_count(t)) + 24;

  SearchSide fwd, bwd;
  fwd.recs.push_back({s, -1, {}});
  fwd.seen.emplace(print(s), 0);
  fwd.frontier.push_back(0);
  bwd.recs.push_back({t, -1, {}});
  bwd.seen.emplace(print(t), 0);
  bwd.frontier.push_back(0);

  std::size_t attempts = 0;
  std::optional<std::vector<Step>> found;

  auto expand = [&](SearchSide& own, SearchSide& other, bool own_is_fwd, int idx) {
    const Formula u = own.recs[idx].term;
    std::vector<std::pair<Pos, Formula>> positions;
    Pos cur;
    collect_positions(u, cur, positions);

    for (const Axiom& ax : axioms()) {
      if (ax.name == "id") continue;
      for (Dir dir : {Dir::LR, Dir::RL}) {
        std::vector<std::string> side_terms, side_agents, other_terms, other_agents;
        collect_meta(ax.side(dir), side_terms, side_agents);
        collect_meta(ax.other(dir), other_terms, other_agents);
        std::vector<std::string> free_terms, free_agents;
        for (const auto& v : other_terms)
          if (std::find(side_terms.begin(), side_terms.end(), v) == side_terms.end())
            free_terms.push_back(v);
        for (const auto& v : other_agents)
          if (std::find(side_agents.begin(), side_agents.end(), v) == side_agents.end())
            free_agents.push_back(v);
        if (!free_agents.empty() && agent_pool.empty()) continue;

        for (const auto& [pos, sub] : positions) {
          Bindings base;
          if (!match(ax.side(dir), sub, base)) continue;

          std::vector<Bindings> assignments{base};
          for (const auto& mv : free_terms) {
            std::vector<Bindings> next;
            for (const Bindings& b : assignments)
              for (const Formula& cand : term_pool) {
                Bindings nb = b;
                nb.terms.emplace(mv, cand);
                next.push_back(std::move(nb));
              }
            assignments = std::move(next);
          }
          for (const auto& mv : free_agents) {
            std::vector<Bindings> next;
            for (const Bindings& b : assignments)
              for (const std::string& ag : agent_pool) {
                Bindings nb = b;
                nb.agents.emplace(mv, ag);
                next.push_back(std::move(nb));
              }
            assignments = std::move(next);
          }

          for (const Bindings& b : assignments) {
            if (++attempts > budget) throw BudgetStop{};
            Formula cand = replace_at(u, pos, instantiate(ax.other(dir), b));
            if (node_count(cand) > size_cap) continue;
            std::string key = print(cand);
            if (own.seen.count(key)) continue;
            own.recs.push_back({cand, idx, Step{ax.name, pos, dir, b}});
            int ni = static_cast<int>(own.recs.size()) - 1;
            own.seen.emplace(std::move(key), ni);
            own.frontier.push_back(ni);
            auto hit = other.seen.find(print(cand));
            if (hit != other.seen.end()) {
              found = own_is_fwd ? compose_meeting(own, ni, other, hit->second)
                                 : compose_meeting(other, hit->second, own, ni);
              return;
            }
          }
        }
      }
    }
  };

  try {
    while (!fwd.frontier.empty() || !bwd.frontier.empty()) {
      SearchSide* own = &fwd;
      SearchSide* other = &bwd;
      bool own_is_fwd = true;
      if (fwd.frontier.empty() || (!bwd.frontier.empty() && bwd.recs.size() < fwd.recs.size())) {
        own = &bwd;
        other = &fwd;
        own_is_fwd = false;
      }
      int idx = own->frontier.front();
      own->frontier.pop_front();
      expand(*own, *other, own_is_fwd, idx);
      if (found) return found;
    }
  } catch (const BudgetStop&) {
  }
  return found;
}

}  // namespace

ProveResult prove_equiv(const Formula& a, const Formula& b, std::size_t search_budget,
                        std::size_t node_budget) {
  ProveResult out;
  out.trace.start = a;
  out.trace.end = b;
  Formula s = desugar(a), t = desugar(b);
  if (s == t) {
    out.status = ProveStatus::Found;
    return out;
  }

  const bool pure = is_pure(s) && is_pure(t);
  if (pure) {
    EquivResult eq = decide_equiv(s, t);
    if (!eq.equivalent) {
      out.status = ProveStatus::Refuted;
      out.witness = eq.witness;
      return out;
    }
  }

  if (search_budget > 0) {
    if (auto steps = bidirectional_search(s, t, search_budget)) {
      out.status = ProveStatus::Found;
      out.trace.steps = std::move(*steps);
      return out;
    }
  }

  if (pure) {
    try {
      if (auto steps = tree_route(s, t, node_budget)) {
        out.status = ProveStatus::Found;
        out.trace.steps = std::move(*steps);
        return out;
      }
    } catch (const BudgetError&) {
    }
  }

  out.status = ProveStatus::Exhausted;
  return out;
}

std::string trace_to_jsonl(const ProofTrace& trace) {
  using nlohmann::ordered_json;
  std::string out;
  ordered_json header;
  header["start"] = print(trace.start);
  header["end"] = print(trace.end);
  out += header.dump();
  out += "\n";
  for (const Step& s : trace.steps) {
    ordered_json j;
    j["axiom"] = s.axiom;
    j["pos"] = s.pos;
    j["dir"] = to_string(s.dir);
    ordered_json bind = ordered_json::object();
    for (const auto& [k, v] : s.bind.terms) bind[k] = print(v);
    for (const auto& [k, v] : s.bind.agents) bind[k] = v;
    j["bind"] = std::move(bind);
    out += j.dump();
    out += "\n";
  }
  return out;
}

ProofTrace trace_from_jsonl(const std::string& text) {
  using nlohmann::json;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  ProofTrace out;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      if (!have_header) {
        out.start = parse(j.at("start").get<std::string>());
        out.end = parse(j.at("end").get<std::string>());
        have_header = true;
        continue;
      }
      Step s;
      s.axiom = j.at("axiom").get<std::string>();
      s.pos = j.at("pos").get<Pos>();
      std::string d = j.at("dir").get<std::string>();
      if (d != "LR" && d != "RL") throw ProofError("unknown direction \"" + d + "\"");
      s.dir = d == "LR" ? Dir::LR : Dir::RL;
      const Axiom& ax = axiom(s.axiom);
      std::vector<std::string> terms, agent_vars;
      collect_meta(ax.lhs, terms, agent_vars);
      collect_meta(ax.rhs, terms, agent_vars);
      for (const auto& [k, v] : j.at("bind").items()) {
        if (std::find(agent_vars.begin(), agent_vars.end(), k) != agent_vars.end())
          s.bind.agents[k] = v.get<std::string>();
        else
          s.bind.terms[k] = parse(v.get<std::string>());
      }
      out.steps.push_back(std::move(s));
    } catch (const ProofError&) {
      throw;
    } catch (const std::exception& e) {
      throw ProofError("trace line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_header) throw ProofError("trace has no header line");
  return out;
}

ProofTrace commutativity_trace() {
  const Formula x = Formula::var("x"), y = Formula::var("y");
  ProofTrace out;
  out.start = Formula::conj(x, y);
  out.end = Formula::conj(y, x);
  Recorder rec(desugar(out.start));
  rec.step("vacuous", {1}, Dir::RL);
  Bindings dup;
  dup.terms.emplace("x", y);
  rec.step("ignore", {2}, Dir::RL, dup);
  rec.step("swap", {}, Dir::LR);
  rec.step("vacuous", {1}, Dir::LR);
  rec.step("ignore", {2}, Dir::LR);
  out.steps = rec.take();
  return out;
}

ProofTrace duality_trace() {
  const Formula x = Formula::var("x"), y = Formula::var("y");
  const std::string i = "i";
  ProofTrace out;
  out.start = Formula::cond(Formula::neg(x), y, i);
  out.end =
      Formula::implies(Formula::cond(x, y, i), Formula::box(i, Formula::neg(Formula::conj(x, y))));
  Recorder rec(desugar(out.start));
  rec.step("A0", {}, Dir::LR);
  rec.step("A3", {2}, Dir::LR);
  // The then-branch is now ⟨⊥|x∧y⟩ᵢ; rebuild its body as ¬¬(x∧y) so the term
  // reads as the boxed negation.
  rec.step("vacuous", {1, 1}, Dir::RL);
  Bindings under_never;
  under_never.terms.emplace("x", Formula::bot());
  rec.step("never", {1, 1, 1}, Dir::RL, under_never);
  Bindings under_always;
  under_always.terms.emplace("y", Formula::top());
  rec.step("always", {1, 1, 2}, Dir::RL, under_always);
  rec.step("tree", {1, 1}, Dir::RL);
  out.steps = rec.take();
  return out;
}

A0Consequence a0_specialize(const Formula& x, const Formula& y, const std::string& agent) {
  A0Consequence out;
  out.lhs = Formula::conj(Formula::expect(agent, x), Formula::cond(y, x, agent));
  out.rhs = Formula::expect(agent, Formula::conj(x, y));
  out.guard = Formula::cond(Formula::bot(), Formula::neg(x), agent);
  out.trace.start = out.rhs;
  out.trace.end = Formula::ite(Formula::expect(agent, x), Formula::cond(y, x, agent), out.guard);
  Recorder rec(desugar(out.trace.start));
  rec.step("A0", {}, Dir::LR);
  rec.step("vacuous", {1, 1}, Dir::LR);
  out.trace.steps = rec.take();
  return out;
}

}  // namespace amc
