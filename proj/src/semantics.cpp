#include "amc/semantics.hpp"

#include <future>
#include <vector>

namespace amc {

namespace {

int require_world(const ProbModel& m, const std::string& id) {
  int wi = m.world_index(id);
  if (wi == -1) throw EvalError("unknown world \"" + id + "\"");
  return wi;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

Rat Evaluator::value(const std::string& world, const Formula& f) {
  return value(require_world(m_, world), f);
}

Rat Evaluator::value(int world, const Formula& f) {
  auto it = desugared_.find(f.key());
  if (it == desugared_.end()) it = desugared_.emplace(f.key(), desugar(f)).first;
  return core_value(world, it->second);
}

Rat Evaluator::expectation(int agent, int world, const Formula& f) {
  auto it = desugared_.find(f.key());
  if (it == desugared_.end()) it = desugared_.emplace(f.key(), desugar(f)).first;
  const Formula& core = it->second;
  Rat sum = 0;
  for (const auto& [target, weight] : m_.row(agent, world))
    sum += weight * core_value(target, core);
  return sum;
}

Rat Evaluator::core_value(int world, const Formula& core) {
  switch (core.op()) {
    case Op::Top:
      return 1;
    case Op::Bot:
      return 0;
    default:
      break;
  }
  auto key = std::make_pair(core.key(), world);
  auto hit = memo_.find(key);
  if (hit != memo_.end()) return hit->second;

  Rat out;
  switch (core.op()) {
    case Op::Var: {
      int vi = m_.variable_index(core.id());
      if (vi == -1)
        throw EvalError("unknown variable \"" + core.id() + "\" at world \"" +
                        m_.worlds[static_cast<std::size_t>(world)] + "\"");
      out = m_.f[static_cast<std::size_t>(world)][static_cast<std::size_t>(vi)];
      break;
    }
    case Op::Ite: {
      Rat c = core_value(world, core.child(0));
      out = c * core_value(world, core.child(1)) +
            (1 - c) * core_value(world, core.child(2));
      break;
    }
    case Op::Cond: {
      int ai = m_.agent_index(core.id());
      if (ai == -1) throw EvalError("unknown agent \"" + core.id() + "\"");
      const Formula& target = core.child(0);
      const Formula& given = core.child(1);
      Rat joint = 0, base = 0;
      for (const auto& [succ, weight] : m_.row(ai, world)) {
        Rat g = core_value(succ, given);
        base += weight * g;
        joint += weight * g * core_value(succ, target);
      }
      out = base > 0 ? Rat(joint / base) : Rat(1);
      break;
    }
    default:
      throw std::logic_error("core_value: unexpected derived connective");
  }
  memo_.emplace(key, out);
  return out;
}

Rat evaluate(const ProbModel& m, const std::string& world, const Formula& f) {
  return Evaluator(m).value(world, f);
}

Rat expectation(const ProbModel& m, const std::string& agent, const std::string& world,
                const Formula& f) {
  int ai = m.agent_index(agent);
  if (ai == -1) throw EvalError("unknown agent \"" + agent + "\"");
  return Evaluator(m).expectation(ai, require_world(m, world), f);
}

Sampler::Sampler(const ProbModel& m, std::uint64_t seed, std::uint64_t max_rejections)
    : eval_(m), rng_(splitmix64(seed)), max_rejections_(max_rejections) {}

SampleResult Sampler::sample(const std::string& world, const Formula& f) {
  return sample(require_world(eval_.model(), world), f);
}

SampleResult Sampler::sample(int world, const Formula& f) {
  auto it = desugared_.find(f.key());
  if (it == desugared_.end()) it = desugared_.emplace(f.key(), desugar(f)).first;
  std::uint64_t trials = 0;
  bool truth = run(world, it->second, trials);
  return {truth, trials};
}

Int Sampler::below(const Int& bound) {
  if (bound <= 1) return 0;
  const unsigned bits = static_cast<unsigned>(msb(bound)) + 1;
  for (;;) {
    Int draw = 0;
    unsigned remaining = bits;
    while (remaining > 0) {
      unsigned take = remaining < 64 ? remaining : 64;
      draw <<= take;
      draw |= Int(rng_() >> (64 - take));
      remaining -= take;
    }
    if (draw < bound) return draw;
  }
}

bool Sampler::bernoulli(const Rat& p) {
  if (p == 0) return false;
  if (p == 1) return true;
  return below(denominator(p)) < numerator(p);
}

bool Sampler::run(int world, const Formula& core, std::uint64_t& trials) {
  const ProbModel& m = eval_.model();
  switch (core.op()) {
    case Op::Top:
      ++trials;
      return true;
    case Op::Bot:
      ++trials;
      return false;
    case Op::Var: {
      ++trials;
      int vi = m.variable_index(core.id());
      if (vi == -1)
        throw EvalError("unknown variable \"" + core.id() + "\" at world \"" +
                        m.worlds[static_cast<std::size_t>(world)] + "\"");
      return bernoulli(m.f[static_cast<std::size_t>(world)][static_cast<std::size_t>(vi)]);
    }
    case Op::Ite:
      return run(world, core.child(0), trials) ? run(world, core.child(1), trials)
                                               : run(world, core.child(2), trials);
    case Op::Cond: {
      int ai = m.agent_index(core.id());
      if (ai == -1) throw EvalError("unknown agent \"" + core.id() + "\"");
      const Formula& target = core.child(0);
      const Formula& given = core.child(1);
      // Exact zero test first: a vacuous conditional holds by convention and
      // would otherwise loop forever in the rejection sampler.
      if (eval_.expectation(ai, world, given) == 0) {
        ++trials;
        return true;
      }
      const auto& row = m.row(ai, world);
      Int denom = 1;
      for (const auto& [_, weight] : row) denom = lcm(denom, denominator(weight));
      std::vector<Int> cumulative;
      Int acc = 0;
      for (const auto& [_, weight] : row) {
        acc += numerator(weight) * (denom / denominator(weight));
        cumulative.push_back(acc);
      }
      for (std::uint64_t attempt = 0; attempt < max_rejections_; ++attempt) {
        ++trials;
        Int draw = below(acc);
        std::size_t pick = 0;
        while (cumulative[pick] <= draw) ++pick;
        int succ = row[pick].first;
        if (run(succ, given, trials)) return run(succ, target, trials);
      }
      throw RejectionLimitError("conditional sampling exhausted " +
                                std::to_string(max_rejections_) + " rejections");
    }
    default:
      throw std::logic_error("sample: unexpected derived connective");
  }
}

Rat estimate(const ProbModel& m, const std::string& world, const Formula& f, std::uint64_t n,
             std::uint64_t seed, std::uint64_t max_rejections) {
  if (n == 0) throw EvalError("estimate needs n >= 1");
  int wi = require_world(m, world);

  constexpr std::uint64_t kChunks = 16;
  std::vector<std::uint64_t> sizes(kChunks, n / kChunks);
  for (std::uint64_t i = 0; i < n % kChunks; ++i) ++sizes[i];

  std::vector<std::future<std::uint64_t>> parts;
  for (std::uint64_t c = 0; c < kChunks; ++c) {
    if (sizes[c] == 0) continue;
    std::uint64_t chunk_seed = splitmix64(seed ^ (c + 1));
    parts.push_back(std::async(std::launch::async, [&, c, chunk_seed]() {
      Sampler sampler(m, chunk_seed, max_rejections);
      std::uint64_t hits = 0;
      for (std::uint64_t i = 0; i < sizes[c]; ++i)
        if (sampler.sample(wi, f).truth) ++hits;
      return hits;
    }));
  }
  Int hits = 0;
  for (auto& part : parts) hits += part.get();
  return Rat(hits, Int(n));
}

}  // namespace amc
