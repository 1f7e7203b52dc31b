#include "amc/kbridge.hpp"

#include <algorithm>
#include <cctype>
#include <random>

#include "amc/semantics.hpp"

namespace amc {

struct KFormula::Node {
  KOp op;
  std::string id;
  KFormula kids[2];
};

KFormula::KFormula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

const KFormula::Node& KFormula::node() const {
  if (!node_) throw std::logic_error("null KFormula");
  return *node_;
}

KFormula KFormula::prop(std::string q) {
  return KFormula(std::make_shared<const Node>(Node{KOp::Prop, std::move(q), {}}));
}

KFormula KFormula::conj(KFormula a, KFormula b) {
  return KFormula(
      std::make_shared<const Node>(Node{KOp::And, "", {std::move(a), std::move(b)}}));
}

KFormula KFormula::neg(KFormula a) {
  return KFormula(std::make_shared<const Node>(Node{KOp::Not, "", {std::move(a), {}}}));
}

KFormula KFormula::box(std::string agent, KFormula a) {
  return KFormula(
      std::make_shared<const Node>(Node{KOp::Box, std::move(agent), {std::move(a), {}}}));
}

KOp KFormula::op() const { return node().op; }

const std::string& KFormula::id() const { return node().id; }

std::size_t KFormula::arity() const {
  switch (node().op) {
    case KOp::Prop:
      return 0;
    case KOp::Not:
    case KOp::Box:
      return 1;
    case KOp::And:
      return 2;
  }
  return 0;
}

const KFormula& KFormula::child(std::size_t i) const {
  if (i >= arity()) throw std::out_of_range("KFormula child index");
  return node().kids[i];
}

namespace {

class KParser {
 public:
  explicit KParser(const std::string& src) : src_(src) {}

  KFormula parse_all() {
    KFormula f = conj();
    skip_space();
    if (pos_ < src_.size()) fail("trailing input after formula");
    return f;
  }

 private:
  KFormula conj() {
    KFormula lhs = unary();
    while (peek() == '&') {
      ++pos_;
      lhs = KFormula::conj(std::move(lhs), unary());
    }
    return lhs;
  }

  KFormula unary() {
    skip_space();
    if (peek() == '~') {
      ++pos_;
      return KFormula::neg(unary());
    }
    std::size_t mark = pos_;
    std::string word = ident();
    if (word == "box") {
      if (peek_raw() != '@') fail("expected '@' after 'box'");
      ++pos_;
      std::string agent = ident();
      if (agent.empty()) fail("expected agent name after 'box@'");
      return KFormula::box(agent, unary());
    }
    pos_ = mark;
    return atom();
  }

  KFormula atom() {
    skip_space();
    if (peek() == '(') {
      ++pos_;
      KFormula f = conj();
      skip_space();
      if (peek() != ')') fail("expected ')'");
      ++pos_;
      return f;
    }
    std::string name = ident();
    if (name.empty()) fail("expected a proposition");
    return KFormula::prop(name);
  }

  std::string ident() {
    skip_space();
    std::string out;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                  src_[pos_] == '_'))
      out += src_[pos_++];
    return out;
  }

  char peek() {
    skip_space();
    return peek_raw();
  }

  char peek_raw() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) {
    throw ParseError(1, static_cast<int>(pos_) + 1, what);
  }

  const std::string& src_;
  std::size_t pos_ = 0;
};

void render_k(const KFormula& f, bool tight, std::string& out) {
  switch (f.op()) {
    case KOp::Prop:
      out += f.id();
      return;
    case KOp::Not:
      out += "~";
      render_k(f.child(0), true, out);
      return;
    case KOp::Box:
      out += "box@" + f.id() + " ";
      render_k(f.child(0), true, out);
      return;
    case KOp::And:
      if (tight) out += "(";
      render_k(f.child(0), false, out);
      out += " & ";
      render_k(f.child(1), true, out);
      if (tight) out += ")";
      return;
  }
}

void collect_k(const KFormula& f, std::vector<std::string>& props,
               std::vector<std::string>& agents) {
  if (f.op() == KOp::Prop) props.push_back(f.id());
  if (f.op() == KOp::Box) agents.push_back(f.id());
  for (std::size_t i = 0; i < f.arity(); ++i) collect_k(f.child(i), props, agents);
}

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::vector<bool> holds_at(const KripkeModel& m, const KFormula& f) {
  const std::size_t n = m.worlds.size();
  switch (f.op()) {
    case KOp::Prop: {
      int q = m.prop_index(f.id());
      if (q == -1) throw ModelError("unknown proposition \"" + f.id() + "\"");
      return m.val[static_cast<std::size_t>(q)];
    }
    case KOp::And: {
      std::vector<bool> a = holds_at(m, f.child(0)), b = holds_at(m, f.child(1));
      for (std::size_t w = 0; w < n; ++w) a[w] = a[w] && b[w];
      return a;
    }
    case KOp::Not: {
      std::vector<bool> a = holds_at(m, f.child(0));
      for (std::size_t w = 0; w < n; ++w) a[w] = !a[w];
      return a;
    }
    case KOp::Box: {
      std::vector<bool> a = holds_at(m, f.child(0));
      int agent = m.agent_index(f.id());
      if (agent == -1) throw ModelError("unknown agent \"" + f.id() + "\"");
      std::vector<bool> out(n, true);
      for (std::size_t w = 0; w < n; ++w)
        for (int u : m.rel[static_cast<std::size_t>(agent)][w])
          if (!a[static_cast<std::size_t>(u)]) {
            out[w] = false;
            break;
          }
      return out;
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

KFormula parse_k(const std::string& text) { return KParser(text).parse_all(); }

std::string print_k(const KFormula& f) {
  std::string out;
  render_k(f, false, out);
  return out;
}

std::vector<std::string> propositions(const KFormula& f) {
  std::vector<std::string> props, agents;
  collect_k(f, props, agents);
  return sorted_unique(std::move(props));
}

std::vector<std::string> k_agents(const KFormula& f) {
  std::vector<std::string> props, agents;
  collect_k(f, props, agents);
  return sorted_unique(std::move(agents));
}

std::set<std::string> eval_k(const KripkeModel& m, const KFormula& f) {
  std::vector<bool> h = holds_at(m, f);
  std::set<std::string> out;
  for (std::size_t w = 0; w < h.size(); ++w)
    if (h[w]) out.insert(m.worlds[w]);
  return out;
}

std::string prop_variable(const std::string& q) { return "x_" + q; }

Formula lambda_formula(const KFormula& f) {
  switch (f.op()) {
    case KOp::Prop:
      return Formula::var(prop_variable(f.id()));
    case KOp::And:
      return Formula::ite(lambda_formula(f.child(0)), lambda_formula(f.child(1)), Formula::bot());
    case KOp::Not:
      return Formula::ite(lambda_formula(f.child(0)), Formula::bot(), Formula::top());
    case KOp::Box:
      return Formula::cond(
          Formula::bot(),
          Formula::ite(lambda_formula(f.child(0)), Formula::bot(), Formula::top()), f.id());
  }
  throw std::logic_error("unreachable");
}

ProbModel lambda_model(const KripkeModel& m, WeightRule rule, std::uint64_t seed) {
  for (const Violation& v : validate_kripke(m, false))
    if (v.kind == "seriality") throw ModelError(to_string(v));

  ProbModel out;
  out.agents = m.agents;
  out.worlds = m.worlds;
  for (const std::string& q : m.props) out.variables.push_back(prop_variable(q));

  out.f.assign(m.worlds.size(), std::vector<Rat>(m.props.size(), Rat(0)));
  for (std::size_t q = 0; q < m.props.size(); ++q)
    for (std::size_t w = 0; w < m.worlds.size(); ++w)
      if (m.val[q][w]) out.f[w][q] = 1;

  std::mt19937_64 rng(seed);
  out.pi.assign(m.agents.size(), {});
  for (std::size_t a = 0; a < m.agents.size(); ++a) {
    out.pi[a].resize(m.worlds.size());
    for (std::size_t w = 0; w < m.worlds.size(); ++w) {
      const std::vector<int>& succ = m.rel[a][w];
      std::vector<Rat> weight(succ.size(), Rat(1));
      if (rule == WeightRule::RandomPositive)
        for (Rat& wt : weight) wt = Rat(static_cast<long>(rng() % 97 + 1));
      Rat total(0);
      for (const Rat& wt : weight) total += wt;
      for (std::size_t j = 0; j < succ.size(); ++j)
        out.pi[a][w].emplace_back(succ[j], weight[j] / total);
    }
  }
  return out;
}

GeneralisationVerdict generalisation_check(const KripkeModel& m, const std::string& world,
                                           const KFormula& f, WeightRule rule,
                                           std::uint64_t seed) {
  if (m.world_index(world) == -1) throw ModelError("unknown world \"" + world + "\"");
  std::set<std::string> truth_set = eval_k(m, f);
  ProbModel image = lambda_model(m, rule, seed);

  GeneralisationVerdict out;
  out.k_truth = truth_set.count(world) > 0;
  out.mac_value = evaluate(image, world, lambda_formula(f));
  out.two_valued = out.mac_value == Rat(0) || out.mac_value == Rat(1);
  out.agree = out.two_valued && out.k_truth == (out.mac_value == Rat(1));
  return out;
}

}  // namespace amc
