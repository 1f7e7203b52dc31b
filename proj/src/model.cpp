#include "amc/model.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace amc {

using Json = nlohmann::ordered_json;

namespace {

int find_index(const std::vector<std::string>& xs, const std::string& id) {
  auto it = std::find(xs.begin(), xs.end(), id);
  return it == xs.end() ? -1 : static_cast<int>(it - xs.begin());
}

Json parse_json(const std::string& text, const char* what) {
  Json doc = Json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ModelError(std::string("malformed JSON in ") + what);
  return doc;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Rat prob_entry(const Json& v, const std::string& where) {
  if (!v.is_string())
    throw ModelError("probability at " + where + " must be a rational string");
  try {
    return parse_rat(v.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ModelError("probability at " + where + ": " + e.what());
  }
}

std::vector<std::string> string_array(const Json& doc, const std::string& key) {
  if (!doc.contains(key) || !doc[key].is_array())
    throw ModelError("expected array field \"" + key + "\"");
  std::vector<std::string> out;
  for (const auto& v : doc[key]) {
    if (!v.is_string()) throw ModelError("\"" + key + "\" entries must be strings");
    out.push_back(v.get<std::string>());
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = i + 1; j < out.size(); ++j)
      if (out[i] == out[j]) throw ModelError("duplicate id \"" + out[i] + "\" in \"" + key + "\"");
  return out;
}

}  // namespace

std::string to_string(const Violation& v) {
  std::string out = v.kind;
  if (!v.agent.empty()) out += " agent=" + v.agent;
  if (!v.world.empty()) out += " world=" + v.world;
  return out + ": " + v.detail;
}

int ProbModel::world_index(const std::string& id) const { return find_index(worlds, id); }
int ProbModel::agent_index(const std::string& id) const { return find_index(agents, id); }
int ProbModel::variable_index(const std::string& id) const { return find_index(variables, id); }

ProbModel load_model(const std::string& json_text) {
  Json doc = parse_json(json_text, "model");
  if (!doc.is_object()) throw ModelError("model document must be a JSON object");

  ProbModel m;
  m.agents = string_array(doc, "agents");
  m.variables = string_array(doc, "variables");

  if (!doc.contains("worlds") || !doc["worlds"].is_array())
    throw ModelError("expected array field \"worlds\"");
  for (const auto& w : doc["worlds"]) {
    if (!w.is_object() || !w.contains("id") || !w["id"].is_string())
      throw ModelError("each world must be an object with a string \"id\"");
    const std::string id = w["id"].get<std::string>();
    if (find_index(m.worlds, id) != -1) throw ModelError("duplicate world id \"" + id + "\"");
    m.worlds.push_back(id);
    std::vector<Rat> row(m.variables.size());
    const Json& fs = w.contains("f") ? w["f"] : Json::object();
    if (!fs.is_object()) throw ModelError("world \"" + id + "\": \"f\" must be an object");
    for (auto it = fs.begin(); it != fs.end(); ++it)
      if (find_index(m.variables, it.key()) == -1)
        throw ModelError("world \"" + id + "\" assigns undeclared variable \"" + it.key() + "\"");
    for (std::size_t vi = 0; vi < m.variables.size(); ++vi) {
      const std::string& var = m.variables[vi];
      if (!fs.contains(var))
        throw ModelError("world \"" + id + "\" missing assignment for variable \"" + var + "\"");
      row[vi] = prob_entry(fs[var], "f(" + id + ", " + var + ")");
    }
    m.f.push_back(std::move(row));
  }

  m.pi.assign(m.agents.size(), std::vector<std::vector<std::pair<int, Rat>>>(m.worlds.size()));
  const Json& pi = doc.contains("pi") ? doc["pi"] : Json::object();
  if (!pi.is_object()) throw ModelError("\"pi\" must be an object");
  for (auto ait = pi.begin(); ait != pi.end(); ++ait) {
    int ai = find_index(m.agents, ait.key());
    if (ai == -1) throw ModelError("pi references undeclared agent \"" + ait.key() + "\"");
    if (!ait.value().is_object())
      throw ModelError("pi[\"" + ait.key() + "\"] must be an object");
    for (auto wit = ait.value().begin(); wit != ait.value().end(); ++wit) {
      int wi = find_index(m.worlds, wit.key());
      if (wi == -1) throw ModelError("pi references undeclared world \"" + wit.key() + "\"");
      if (!wit.value().is_object())
        throw ModelError("pi[\"" + ait.key() + "\"][\"" + wit.key() + "\"] must be an object");
      std::map<int, Rat> row;
      for (auto tit = wit.value().begin(); tit != wit.value().end(); ++tit) {
        int ti = find_index(m.worlds, tit.key());
        if (ti == -1)
          throw ModelError("pi row for (" + ait.key() + ", " + wit.key() +
                           ") references undeclared world \"" + tit.key() + "\"");
        Rat p = prob_entry(tit.value(), "pi(" + ait.key() + ", " + wit.key() + ", " + tit.key() + ")");
        if (p != 0) row[ti] = p;
      }
      auto& dest = m.pi[static_cast<std::size_t>(ai)][static_cast<std::size_t>(wi)];
      dest.assign(row.begin(), row.end());
    }
  }
  return m;
}

ProbModel load_model_file(const std::string& path) { return load_model(read_file(path)); }

std::string save_model(const ProbModel& m) {
  Json doc;
  doc["agents"] = m.agents;
  doc["variables"] = m.variables;
  Json worlds = Json::array();
  for (std::size_t wi = 0; wi < m.worlds.size(); ++wi) {
    Json w;
    w["id"] = m.worlds[wi];
    Json fs;
    for (std::size_t vi = 0; vi < m.variables.size(); ++vi)
      fs[m.variables[vi]] = format_rat(m.f[wi][vi]);
    w["f"] = std::move(fs);
    worlds.push_back(std::move(w));
  }
  doc["worlds"] = std::move(worlds);
  Json pi;
  for (std::size_t ai = 0; ai < m.agents.size(); ++ai) {
    Json rows;
    for (std::size_t wi = 0; wi < m.worlds.size(); ++wi) {
      const auto& row = m.pi[ai][wi];
      if (row.empty()) continue;
      Json entries;
      for (const auto& [ti, p] : row)
        entries[m.worlds[static_cast<std::size_t>(ti)]] = format_rat(p);
      rows[m.worlds[wi]] = std::move(entries);
    }
    pi[m.agents[ai]] = std::move(rows);
  }
  doc["pi"] = std::move(pi);
  return doc.dump();
}

std::vector<Violation> validate(const ProbModel& m) {
  std::vector<Violation> out;
  for (std::size_t wi = 0; wi < m.worlds.size(); ++wi)
    for (std::size_t vi = 0; vi < m.variables.size(); ++vi) {
      const Rat& p = m.f[wi][vi];
      if (p < 0 || p > 1)
        out.push_back({"range", "", m.worlds[wi],
                       "f(" + m.variables[vi] + ") = " + format_rat(p) + " outside [0,1]"});
    }
  for (std::size_t ai = 0; ai < m.agents.size(); ++ai)
    for (std::size_t wi = 0; wi < m.worlds.size(); ++wi) {
      Rat sum = 0;
      for (const auto& [ti, p] : m.pi[ai][wi]) {
        if (p < 0 || p > 1)
          out.push_back({"range", m.agents[ai], m.worlds[wi],
                         "pi weight to " + m.worlds[static_cast<std::size_t>(ti)] + " = " +
                             format_rat(p) + " outside [0,1]"});
        sum += p;
      }
      if (sum != 0 && sum != 1)
        out.push_back({"row-sum", m.agents[ai], m.worlds[wi],
                       "row sum " + format_rat(sum) + ", expected 0 or 1"});
    }
  return out;
}

int KripkeModel::world_index(const std::string& id) const { return find_index(worlds, id); }
int KripkeModel::agent_index(const std::string& id) const { return find_index(agents, id); }
int KripkeModel::prop_index(const std::string& id) const { return find_index(props, id); }

KripkeModel load_kripke(const std::string& json_text) {
  Json doc = parse_json(json_text, "Kripke model");
  if (!doc.is_object()) throw ModelError("Kripke document must be a JSON object");

  KripkeModel k;
  k.worlds = string_array(doc, "worlds");

  const Json& rel = doc.contains("R") ? doc["R"] : Json::object();
  if (!rel.is_object()) throw ModelError("\"R\" must be an object");
  for (auto ait = rel.begin(); ait != rel.end(); ++ait) {
    k.agents.push_back(ait.key());
    std::vector<std::vector<int>> rows(k.worlds.size());
    if (!ait.value().is_array())
      throw ModelError("R[\"" + ait.key() + "\"] must be an array of pairs");
    for (const auto& pair : ait.value()) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string())
        throw ModelError("R[\"" + ait.key() + "\"] entries must be [world, world] pairs");
      int s = find_index(k.worlds, pair[0].get<std::string>());
      int t = find_index(k.worlds, pair[1].get<std::string>());
      if (s == -1 || t == -1)
        throw ModelError("R[\"" + ait.key() + "\"] references an undeclared world");
      rows[static_cast<std::size_t>(s)].push_back(t);
    }
    for (auto& row : rows) {
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    k.rel.push_back(std::move(rows));
  }

  const Json& val = doc.contains("V") ? doc["V"] : Json::object();
  if (!val.is_object()) throw ModelError("\"V\" must be an object");
  for (auto pit = val.begin(); pit != val.end(); ++pit) {
    if (find_index(k.props, pit.key()) != -1)
      throw ModelError("duplicate proposition \"" + pit.key() + "\" in V");
    k.props.push_back(pit.key());
    std::vector<bool> members(k.worlds.size(), false);
    if (!pit.value().is_array())
      throw ModelError("V[\"" + pit.key() + "\"] must be an array of worlds");
    for (const auto& w : pit.value()) {
      if (!w.is_string()) throw ModelError("V[\"" + pit.key() + "\"] entries must be strings");
      int wi = find_index(k.worlds, w.get<std::string>());
      if (wi == -1)
        throw ModelError("V[\"" + pit.key() + "\"] references undeclared world \"" +
                         w.get<std::string>() + "\"");
      members[static_cast<std::size_t>(wi)] = true;
    }
    k.val.push_back(std::move(members));
  }
  return k;
}

KripkeModel load_kripke_file(const std::string& path) { return load_kripke(read_file(path)); }

std::string save_kripke(const KripkeModel& k) {
  Json doc;
  doc["worlds"] = k.worlds;
  Json rel;
  for (std::size_t ai = 0; ai < k.agents.size(); ++ai) {
    Json pairs = Json::array();
    for (std::size_t wi = 0; wi < k.worlds.size(); ++wi)
      for (int ti : k.rel[ai][wi])
        pairs.push_back(Json::array({k.worlds[wi], k.worlds[static_cast<std::size_t>(ti)]}));
    rel[k.agents[ai]] = std::move(pairs);
  }
  doc["R"] = std::move(rel);
  Json val;
  for (std::size_t pi = 0; pi < k.props.size(); ++pi) {
    Json members = Json::array();
    for (std::size_t wi = 0; wi < k.worlds.size(); ++wi)
      if (k.val[pi][wi]) members.push_back(k.worlds[wi]);
    val[k.props[pi]] = std::move(members);
  }
  doc["V"] = std::move(val);
  return doc.dump();
}

std::vector<Violation> validate_kripke(const KripkeModel& k, bool enforce_12) {
  std::vector<Violation> out;
  for (std::size_t ai = 0; ai < k.agents.size(); ++ai) {
    for (std::size_t wi = 0; wi < k.worlds.size(); ++wi) {
      const auto& succ = k.rel[ai][wi];
      if (succ.empty())
        out.push_back({"seriality", k.agents[ai], k.worlds[wi], "no successor"});
      if (!enforce_12) continue;
      for (int u : succ) {
        const auto& from_u = k.rel[ai][static_cast<std::size_t>(u)];
        for (int v : succ)
          if (!std::binary_search(from_u.begin(), from_u.end(), v))
            out.push_back({"euclidean", k.agents[ai], k.worlds[wi],
                           k.worlds[static_cast<std::size_t>(u)] + " and " +
                               k.worlds[static_cast<std::size_t>(v)] + " both reachable, but " +
                               k.worlds[static_cast<std::size_t>(v)] + " not reachable from " +
                               k.worlds[static_cast<std::size_t>(u)]});
        for (int v : from_u)
          if (!std::binary_search(succ.begin(), succ.end(), v))
            out.push_back({"transitive", k.agents[ai], k.worlds[wi],
                           "reaches " + k.worlds[static_cast<std::size_t>(u)] + " which reaches " +
                               k.worlds[static_cast<std::size_t>(v)] + ", but " +
                               k.worlds[static_cast<std::size_t>(v)] + " not directly reachable"});
      }
    }
  }
  return out;
}

}  // namespace amc
