#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "rasql/agent_state.hpp"
#include "rasql/learner.hpp"
#include "rasql/occupancy.hpp"
#include "rasql/induced_solver.hpp"
#include "rasql/policy.hpp"
#include "rasql/pomdp.hpp"
#include "rasql/regularizer.hpp"

namespace rasql {

/// Malformed model or config document.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model document. Either a full joint `kernel` [s][a][s'][y'] or the
/// factored pair `transition` [s][a][s'] + `observation_map` [s]. An
/// optional `init_obs` [s][y] gives P(y_1 | s_1) for joint kernels
/// (uniform when absent).
PomdpModel model_from_json(const nlohmann::json& doc);
nlohmann::json model_to_json(const PomdpModel& model);

/// {"kind": "observation"} | {"kind": "window", "k": 2, "pad": true}
/// | {"kind": "table", "num_states": n, "init_state": z0, "phi": [z][y][a],
///    "initial": [y]}.
AgentStateMachine agent_state_from_json(const nlohmann::json& doc, std::size_t num_obs,
                                        std::size_t num_actions);

/// Resolved experiment description.
struct ExperimentConfig {
  std::string name;
  PomdpModel model;
  AgentStateMachine machine = make_observation_state(1, 1);
  RegularizerSpec regularizer;
  PeriodicPolicy behavior{{Policy::uniform(1, 1)}};
  bool periodic = false;  // true when the behavior was given as a phase list
  LearningRateSchedule schedule;
  std::uint64_t steps = 100'000;
  std::vector<std::uint64_t> seeds;
  std::uint64_t log_every = 0;
  std::string out_dir = "out";
  bool allow_partial = false;
  bool allow_noncompliant = false;
  StationaryOptions stationary;
  SolveOptions solver;
  /// The document the config was resolved from (after overrides).
  nlohmann::json source;

  std::size_t period() const { return behavior.period(); }
  std::string digest() const;
};

/// Parses an experiment document. `base_dir` resolves relative model paths.
ExperimentConfig config_from_json(const nlohmann::json& doc,
                                  const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Bundled presets: "paper-stationary", "paper-periodic".
std::vector<std::string> preset_names();
nlohmann::json preset_document(const std::string& name);
ExperimentConfig load_preset(const std::string& name);

/// Seeds first, first+1, ..., first+count-1.
std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count);

/// 64-bit FNV-1a of `text`, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

}  // namespace rasql
