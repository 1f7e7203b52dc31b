#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "amc/rational.hpp"

namespace amc {

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Violation {
  std::string kind;   // "row-sum", "range", "seriality", "euclidean", "transitive"
  std::string agent;  // may be empty
  std::string world;  // may be empty
  std::string detail;
};

std::string to_string(const Violation& v);

// Worlds, agents and variables keep their declaration order; all probabilities
// are exact rationals. Transition rows are sparse: a missing entry is weight 0.
struct ProbModel {
  std::vector<std::string> agents;
  std::vector<std::string> variables;
  std::vector<std::string> worlds;

  // f[world][variable]; dense, every world assigns every declared variable.
  std::vector<std::vector<Rat>> f;

  // pi[agent][world] -> list of (target world, weight), nonzero weights only,
  // ordered by target world index.
  std::vector<std::vector<std::vector<std::pair<int, Rat>>>> pi;

  int world_index(const std::string& id) const;
  int agent_index(const std::string& id) const;
  int variable_index(const std::string& id) const;

  const std::vector<std::pair<int, Rat>>& row(int agent, int world) const {
    return pi[static_cast<std::size_t>(agent)][static_cast<std::size_t>(world)];
  }
};

ProbModel load_model(const std::string& json_text);
ProbModel load_model_file(const std::string& path);
std::string save_model(const ProbModel& m);  // canonical: save(load(save(m))) == save(m)

std::vector<Violation> validate(const ProbModel& m);

struct KripkeModel {
  std::vector<std::string> worlds;
  std::vector<std::string> agents;
  std::vector<std::string> props;

  // rel[agent][world] -> sorted successor world indices.
  std::vector<std::vector<std::vector<int>>> rel;
  // val[prop][world]
  std::vector<std::vector<bool>> val;

  int world_index(const std::string& id) const;
  int agent_index(const std::string& id) const;
  int prop_index(const std::string& id) const;
};

KripkeModel load_kripke(const std::string& json_text);
KripkeModel load_kripke_file(const std::string& path);
std::string save_kripke(const KripkeModel& k);

// Seriality is always checked; euclidean + transitive only when enforce_12 is set.
std::vector<Violation> validate_kripke(const KripkeModel& k, bool enforce_12);

}  // namespace amc
