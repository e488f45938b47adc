#include "rasql/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace rasql {

using nlohmann::json;

namespace {

template <typename T>
T required(const json& doc, const char* key, const char* where) {
  if (!doc.contains(key)) throw ConfigError(std::string(where) + ": missing key '" + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(where) + ": bad value for '" + key + "': " + e.what());
  }
}

std::vector<double> flatten(const json& node, std::vector<std::size_t> shape, const char* what) {
  std::vector<double> out;
  auto walk = [&](auto&& self, const json& n, std::size_t depth) -> void {
    if (depth == shape.size()) {
      if (!n.is_number()) throw ConfigError(std::string(what) + ": expected a number");
      out.push_back(n.get<double>());
      return;
    }
    if (!n.is_array() || n.size() != shape[depth]) {
      std::ostringstream os;
      os << what << ": expected an array of length " << shape[depth] << " at depth " << depth;
      throw ConfigError(os.str());
    }
    for (const auto& child : n) self(self, child, depth + 1);
  };
  walk(walk, node, 0);
  return out;
}

std::size_t array_depth(const json& node) {
  std::size_t depth = 0;
  const json* cur = &node;
  while (cur->is_array() && !cur->empty()) {
    ++depth;
    cur = &cur->front();
  }
  return depth;
}

}  // namespace

PomdpModel model_from_json(const json& doc) {
  constexpr const char* where = "model";
  const auto S = required<std::size_t>(doc, "num_states", where);
  const auto A = required<std::size_t>(doc, "num_actions", where);
  const auto Y = required<std::size_t>(doc, "num_obs", where);
  const auto gamma = required<double>(doc, "discount", where);
  if (S == 0 || A == 0 || Y == 0) throw ConfigError("model: dimensions must be positive");

  auto reward = flatten(required<json>(doc, "reward", where), {S, A}, "model.reward");
  if (doc.contains("reward_scale")) {
    const auto& scale = doc.at("reward_scale");
    double factor = 1.0;
    if (scale.is_string() && scale.get<std::string>() == "1-discount") {
      factor = 1.0 - gamma;
    } else if (scale.is_number()) {
      factor = scale.get<double>();
    } else {
      throw ConfigError("model.reward_scale: expected a number or \"1-discount\"");
    }
    for (double& r : reward) r *= factor;
  }
  const auto init = flatten(required<json>(doc, "init_dist", where), {S}, "model.init_dist");

  PomdpModel model;
  if (doc.contains("kernel")) {
    model.num_states = S;
    model.num_actions = A;
    model.num_obs = Y;
    model.discount = gamma;
    model.kernel = flatten(doc.at("kernel"), {S, A, S, Y}, "model.kernel");
    model.reward = reward;
    model.init_dist = init;
    if (doc.contains("init_obs")) {
      model.init_obs = flatten(doc.at("init_obs"), {S, Y}, "model.init_obs");
    } else {
      model.init_obs.assign(S * Y, 1.0 / static_cast<double>(Y));
    }
  } else if (doc.contains("transition") && doc.contains("observation_map")) {
    const auto transition = flatten(doc.at("transition"), {S, A, S}, "model.transition");
    const auto obs_map = doc.at("observation_map").get<std::vector<std::size_t>>();
    try {
      model = make_factored_model(S, A, Y, transition, obs_map, reward, gamma, init);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else {
    throw ConfigError("model: needs either 'kernel' or 'transition' + 'observation_map'");
  }
  return model;
}

json model_to_json(const PomdpModel& m) {
  json kernel = json::array();
  for (std::size_t s = 0; s < m.num_states; ++s) {
    json per_action = json::array();
    for (std::size_t a = 0; a < m.num_actions; ++a) {
      json rows = json::array();
      for (std::size_t ns = 0; ns < m.num_states; ++ns) {
        json row = json::array();
        for (std::size_t y = 0; y < m.num_obs; ++y) row.push_back(m.transition(s, a, ns, y));
        rows.push_back(row);
      }
      per_action.push_back(rows);
    }
    kernel.push_back(per_action);
  }
  json reward = json::array();
  for (std::size_t s = 0; s < m.num_states; ++s) {
    json row = json::array();
    for (std::size_t a = 0; a < m.num_actions; ++a) row.push_back(m.r(s, a));
    reward.push_back(row);
  }
  json init_obs = json::array();
  for (std::size_t s = 0; s < m.num_states; ++s)
    init_obs.push_back(std::vector<double>(m.init_obs.begin() + s * m.num_obs,
                                           m.init_obs.begin() + (s + 1) * m.num_obs));
  return {{"num_states", m.num_states}, {"num_actions", m.num_actions}, {"num_obs", m.num_obs},
          {"discount", m.discount},     {"init_dist", m.init_dist},     {"reward", reward},
          {"kernel", kernel},           {"init_obs", init_obs}};
}

AgentStateMachine agent_state_from_json(const json& doc, std::size_t num_obs,
                                        std::size_t num_actions) {
  const auto kind = required<std::string>(doc, "kind", "agent_state");
  try {
    if (kind == "observation") return make_observation_state(num_obs, num_actions);
    if (kind == "window") {
      const auto k = required<std::size_t>(doc, "k", "agent_state");
      const bool pad = doc.value("pad", true);
      const auto cap = doc.value<std::size_t>("max_states", std::size_t{1} << 20);
      return make_sliding_window(num_obs, num_actions, k, pad, cap);
    }
    if (kind == "table") {
      const auto Z = required<std::size_t>(doc, "num_states", "agent_state");
      const auto z0 = doc.value<std::size_t>("init_state", 0);
      const auto phi_real = flatten(required<json>(doc, "phi", "agent_state"),
                                    {Z, num_obs, num_actions}, "agent_state.phi");
      std::vector<std::size_t> phi(phi_real.size());
      for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = static_cast<std::size_t>(phi_real[i]);
      std::vector<std::size_t> initial(num_obs);
      if (doc.contains("initial")) {
        initial = doc.at("initial").get<std::vector<std::size_t>>();
      } else {
        // z_1 = phi(z_0, y_1, 0)
        for (std::size_t y = 0; y < num_obs; ++y) {
          const std::size_t idx = (z0 * num_obs + y) * num_actions;
          initial[y] = idx < phi.size() ? phi[idx] : 0;
        }
      }
      return AgentStateMachine(Z, num_obs, num_actions, z0, std::move(phi), std::move(initial),
                               "table");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("agent_state: ") + e.what());
  } catch (const std::length_error& e) {
    throw ConfigError(std::string("agent_state: ") + e.what());
  }
  throw ConfigError("agent_state: unknown kind '" + kind + "'");
}

namespace {

Policy policy_from_json(const json& node, std::size_t Z, std::size_t A, const char* what) {
  try {
    return Policy(Z, A, flatten(node, {Z, A}, what));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path.string() + "': " + e.what());
  }
}

}  // namespace

// The output location does not affect any result, so it stays out of the digest.
std::string ExperimentConfig::digest() const {
  json doc = source;
  doc.erase("out");
  return fnv1a_hex(doc.dump());
}

ExperimentConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  cfg.source = doc;
  cfg.name = doc.value("name", std::string("experiment"));

  json model_doc = required<json>(doc, "model", "config");
  if (model_doc.is_string()) {
    std::filesystem::path path = model_doc.get<std::string>();
    if (path.is_relative()) path = base_dir / path;
    model_doc = load_json_file(path);
  }
  cfg.model = model_from_json(model_doc);
  const auto violations = validate_model(cfg.model);
  if (!violations.empty()) throw ConfigError("model is invalid:\n" + format_violations(violations));

  json machine_doc = {{"kind", "observation"}};
  if (doc.contains("agent_state")) {
    machine_doc = doc.at("agent_state");
  } else if (model_doc.contains("agent_state")) {
    machine_doc = model_doc.at("agent_state");
  }
  cfg.machine = agent_state_from_json(machine_doc, cfg.model.num_obs, cfg.model.num_actions);
  const std::size_t Z = cfg.machine.num_agent_states(), A = cfg.model.num_actions;

  if (doc.contains("regularizer")) {
    const auto& r = doc.at("regularizer");
    cfg.regularizer.kind = r.value("kind", std::string("entropy"));
    cfg.regularizer.beta = r.value("beta", 1.0);
    if (r.contains("ref_dist")) cfg.regularizer.ref_dist = r.at("ref_dist").get<std::vector<double>>();
  }
  try {
    (void)make_regularizer(cfg.regularizer);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("regularizer: ") + e.what());
  }

  const json& behavior = required<json>(doc, "behavior", "config");
  const std::size_t depth = array_depth(behavior);
  if (depth == 2) {
    cfg.behavior = PeriodicPolicy({policy_from_json(behavior, Z, A, "behavior")});
    cfg.periodic = false;
  } else if (depth == 3) {
    std::vector<Policy> phases;
    for (const auto& phase : behavior) phases.push_back(policy_from_json(phase, Z, A, "behavior"));
    cfg.behavior = PeriodicPolicy(std::move(phases));
    cfg.periodic = true;
  } else {
    throw ConfigError("behavior: expected a |Z|x|A| matrix or a list of them");
  }

  try {
    cfg.schedule = LearningRateSchedule::parse(doc.value("schedule", std::string("inverse-visit")));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  cfg.allow_noncompliant = doc.value("allow_noncompliant_schedule", false);
  cfg.steps = doc.value<std::uint64_t>("steps", 100'000);
  if (cfg.steps == 0) throw ConfigError("steps must be at least 1");
  if (doc.contains("seeds")) {
    cfg.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
  } else {
    cfg.seeds = seed_range(doc.value<std::uint64_t>("first_seed", 1),
                           doc.value<std::size_t>("num_seeds", 25));
  }
  if (cfg.seeds.empty()) throw ConfigError("at least one seed is required");
  {
    auto sorted = cfg.seeds;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw ConfigError("seeds must be distinct");
  }
  cfg.log_every = doc.value<std::uint64_t>("log_every", 0);
  cfg.out_dir = doc.value("out", std::string("out/") + cfg.name);
  cfg.allow_partial = doc.value("allow_partial", false);
  if (doc.contains("stationary")) {
    const auto& s = doc.at("stationary");
    cfg.stationary.tol = s.value("tol", cfg.stationary.tol);
    cfg.stationary.max_iter = s.value("max_iter", cfg.stationary.max_iter);
    cfg.stationary.restarts = s.value("restarts", cfg.stationary.restarts);
  }
  if (doc.contains("solver")) {
    const auto& s = doc.at("solver");
    cfg.solver.tol = s.value("tol", cfg.solver.tol);
    cfg.solver.max_iter = s.value("max_iter", cfg.solver.max_iter);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return config_from_json(load_json_file(path), path.parent_path());
}

namespace {

const char* kReferenceModel = R"({
  "num_states": 4,
  "num_actions": 2,
  "num_obs": 2,
  "discount": 0.9,
  "init_dist": [0.3, 0.0, 0.2, 0.5],
  "reward_scale": "1-discount",
  "reward": [[0.6, 0.1], [0.0, -0.3], [0.5, -0.2], [-0.3, 0.5]],
  "transition": [
    [[0.0, 0.6, 0.4, 0.0], [0.8, 0.2, 0.0, 0.0]],
    [[0.8, 0.0, 0.2, 0.0], [0.4, 0.0, 0.6, 0.0]],
    [[0.7, 0.3, 0.0, 0.0], [0.0, 0.8, 0.2, 0.0]],
    [[0.2, 0.0, 0.0, 0.8], [0.1, 0.7, 0.2, 0.0]]
  ],
  "observation_map": [0, 1, 1, 0]
})";

}  // namespace

std::vector<std::string> preset_names() { return {"paper-stationary", "paper-periodic"}; }

json preset_document(const std::string& name) {
  json doc = {{"name", name},
              {"model", json::parse(kReferenceModel)},
              {"agent_state", {{"kind", "observation"}}},
              {"regularizer", {{"kind", "entropy"}, {"beta", 1.0}}},
              {"schedule", "inverse-visit"},
              {"steps", 100000},
              {"num_seeds", 25},
              {"first_seed", 1},
              {"log_every", 500},
              {"out", "out/" + name}};
  if (name == "paper-stationary") {
    doc["behavior"] = json::parse("[[0.2, 0.8], [0.8, 0.2]]");
  } else if (name == "paper-periodic") {
    doc["behavior"] = json::parse("[[[0.2, 0.8], [0.8, 0.2]], [[0.8, 0.2], [0.2, 0.8]]]");
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return doc;
}

ExperimentConfig load_preset(const std::string& name) { return config_from_json(preset_document(name)); }

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = first + i;
  return seeds;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace rasql
