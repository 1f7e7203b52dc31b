#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "amc/formula.hpp"
#include "amc/model.hpp"
#include "amc/rational.hpp"

namespace amc {

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when the conditional sampling protocol exceeds its rejection budget.
struct RejectionLimitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exact evaluator with a (world, subterm) memo, so shared subterms (e.g. the
// DAG produced by expanding x^{a/b}) are costed once per world.
class Evaluator {
 public:
  explicit Evaluator(const ProbModel& m) : m_(m) {}

  Rat value(int world, const Formula& f);
  Rat value(const std::string& world, const Formula& f);

  // E^agent_world(f): pi-weighted sum of values at successor worlds.
  Rat expectation(int agent, int world, const Formula& f);

  const ProbModel& model() const { return m_; }

 private:
  Rat core_value(int world, const Formula& core);

  const ProbModel& m_;
  std::unordered_map<const void*, Formula> desugared_;
  struct KeyHash {
    std::size_t operator()(const std::pair<const void*, int>& k) const {
      return std::hash<const void*>{}(k.first) * 1000003u ^
             std::hash<int>{}(k.second);
    }
  };
  std::unordered_map<std::pair<const void*, int>, Rat, KeyHash> memo_;
};

Rat evaluate(const ProbModel& m, const std::string& world, const Formula& f);
Rat expectation(const ProbModel& m, const std::string& agent, const std::string& world,
                const Formula& f);

struct SampleResult {
  bool truth;
  std::uint64_t trials;  // elementary sampling events consumed, >= 1
};

// One run of the operational reading: variables are Bernoulli draws, the
// conditional draws a successor world and rejects until the given holds.
// A given that is exactly impossible (expectation 0) short-circuits to true.
class Sampler {
 public:
  Sampler(const ProbModel& m, std::uint64_t seed, std::uint64_t max_rejections = 1000000);

  SampleResult sample(int world, const Formula& f);
  SampleResult sample(const std::string& world, const Formula& f);

 private:
  bool run(int world, const Formula& core, std::uint64_t& trials);
  bool bernoulli(const Rat& p);
  Int below(const Int& bound);  // uniform in [0, bound)

  Evaluator eval_;
  std::mt19937_64 rng_;
  std::uint64_t max_rejections_;
  std::unordered_map<const void*, Formula> desugared_;
};

// Mean of n protocol runs as an exact fraction successes/n. Work is split over
// a fixed number of logical chunks with per-chunk derived seeds and merged in
// chunk order, so the result is identical no matter how many threads run.
Rat estimate(const ProbModel& m, const std::string& world, const Formula& f, std::uint64_t n,
             std::uint64_t seed, std::uint64_t max_rejections = 1000000);

}  // namespace amc
