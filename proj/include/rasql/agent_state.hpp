#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace rasql {

/// Deterministic agent-state machine z' = phi(z, y', a).
///
/// Besides phi, the machine carries `initial_table`, which maps the first
/// observation y_1 to z_1 (the first update has no preceding action).
class AgentStateMachine {
 public:
  AgentStateMachine(std::size_t num_agent_states, std::size_t num_obs, std::size_t num_actions,
                    std::size_t init_state, std::vector<std::size_t> update_table,
                    std::vector<std::size_t> initial_table, std::string kind = "table");

  std::size_t num_agent_states() const { return num_agent_states_; }
  std::size_t num_obs() const { return num_obs_; }
  std::size_t num_actions() const { return num_actions_; }
  std::size_t init_state() const { return init_state_; }
  const std::string& kind() const { return kind_; }
  const std::vector<std::size_t>& update_table() const { return table_; }
  const std::vector<std::size_t>& initial_table() const { return initial_; }

  std::size_t update(std::size_t z, std::size_t next_obs, std::size_t a) const;
  std::size_t initial(std::size_t first_obs) const;

 private:
  std::size_t num_agent_states_;
  std::size_t num_obs_;
  std::size_t num_actions_;
  std::size_t init_state_;
  std::vector<std::size_t> table_;
  std::vector<std::size_t> initial_;
  std::string kind_;
};

/// z_t = y_t.
AgentStateMachine make_observation_state(std::size_t num_obs, std::size_t num_actions);

/// Window over the last k observations, oldest first.
///
/// With padding (k >= 2) every position ranges over Y plus a pad symbol,
/// giving (|Y|+1)^k states; z_0 is all-pad and z_1 = (pad, ..., pad, y_1).
/// Without padding z_1 = (y_1, ..., y_1) and there are |Y|^k states. For
/// k = 1 no pad symbol is ever needed and both forms coincide with
/// make_observation_state.
AgentStateMachine make_sliding_window(std::size_t num_obs, std::size_t num_actions,
                                      std::size_t k, bool pad = true,
                                      std::size_t max_states = std::size_t{1} << 20);

/// Tuple <-> index for window states. Tuples are oldest first; the pad
/// symbol is num_obs.
std::size_t window_index(const std::vector<std::size_t>& tuple, std::size_t num_obs, bool pad);
std::vector<std::size_t> window_tuple(std::size_t z, std::size_t num_obs, std::size_t k, bool pad);

}  // namespace rasql
