#include "rasql/agent_state.hpp"

#include <stdexcept>

namespace rasql {

AgentStateMachine::AgentStateMachine(std::size_t num_agent_states, std::size_t num_obs,
                                     std::size_t num_actions, std::size_t init_state,
                                     std::vector<std::size_t> update_table,
                                     std::vector<std::size_t> initial_table, std::string kind)
    : num_agent_states_(num_agent_states),
      num_obs_(num_obs),
      num_actions_(num_actions),
      init_state_(init_state),
      table_(std::move(update_table)),
      initial_(std::move(initial_table)),
      kind_(std::move(kind)) {
  if (num_agent_states_ == 0 || num_obs_ == 0 || num_actions_ == 0)
    throw std::invalid_argument("agent state machine: dimensions must be positive");
  if (init_state_ >= num_agent_states_)
    throw std::invalid_argument("agent state machine: z0 out of range");
  if (table_.size() != num_agent_states_ * num_obs_ * num_actions_)
    throw std::invalid_argument("agent state machine: update table must have |Z|*|Y|*|A| entries");
  if (initial_.size() != num_obs_)
    throw std::invalid_argument("agent state machine: initial table must have |Y| entries");
  for (std::size_t z : table_)
    if (z >= num_agent_states_)
      throw std::invalid_argument("agent state machine: update table entry out of range");
  for (std::size_t z : initial_)
    if (z >= num_agent_states_)
      throw std::invalid_argument("agent state machine: initial table entry out of range");
}

std::size_t AgentStateMachine::update(std::size_t z, std::size_t next_obs, std::size_t a) const {
  if (z >= num_agent_states_ || next_obs >= num_obs_ || a >= num_actions_)
    throw std::out_of_range("agent state update: index out of range");
  return table_[(z * num_obs_ + next_obs) * num_actions_ + a];
}

std::size_t AgentStateMachine::initial(std::size_t first_obs) const {
  if (first_obs >= num_obs_) throw std::out_of_range("agent state initial: observation out of range");
  return initial_[first_obs];
}

AgentStateMachine make_observation_state(std::size_t num_obs, std::size_t num_actions) {
  std::vector<std::size_t> table(num_obs * num_obs * num_actions);
  for (std::size_t z = 0; z < num_obs; ++z)
    for (std::size_t y = 0; y < num_obs; ++y)
      for (std::size_t a = 0; a < num_actions; ++a) table[(z * num_obs + y) * num_actions + a] = y;
  std::vector<std::size_t> initial(num_obs);
  for (std::size_t y = 0; y < num_obs; ++y) initial[y] = y;
  return AgentStateMachine(num_obs, num_obs, num_actions, 0, std::move(table), std::move(initial),
                           "observation");
}

std::size_t window_index(const std::vector<std::size_t>& tuple, std::size_t num_obs, bool pad) {
  const std::size_t base = (pad && tuple.size() > 1) ? num_obs + 1 : num_obs;
  std::size_t z = 0;
  for (std::size_t d : tuple) {
    if (d >= base) throw std::out_of_range("window_index: symbol out of range");
    z = z * base + d;
  }
  return z;
}

std::vector<std::size_t> window_tuple(std::size_t z, std::size_t num_obs, std::size_t k, bool pad) {
  const std::size_t base = (pad && k > 1) ? num_obs + 1 : num_obs;
  std::vector<std::size_t> tuple(k);
  for (std::size_t i = k; i-- > 0;) {
    tuple[i] = z % base;
    z /= base;
  }
  if (z != 0) throw std::out_of_range("window_tuple: index out of range");
  return tuple;
}

AgentStateMachine make_sliding_window(std::size_t num_obs, std::size_t num_actions, std::size_t k,
                                      bool pad, std::size_t max_states) {
  if (k == 0) throw std::invalid_argument("sliding window: k must be at least 1");
  if (num_obs == 0 || num_actions == 0)
    throw std::invalid_argument("sliding window: dimensions must be positive");
  pad = pad && k > 1;
  const std::size_t base = pad ? num_obs + 1 : num_obs;
  std::size_t count = 1;
  for (std::size_t i = 0; i < k; ++i) {
    if (count > max_states / base)
      throw std::length_error("sliding window: state count exceeds cap of " +
                              std::to_string(max_states));
    count *= base;
  }

  std::vector<std::size_t> table(count * num_obs * num_actions);
  for (std::size_t z = 0; z < count; ++z) {
    auto tuple = window_tuple(z, num_obs, k, pad);
    for (std::size_t y = 0; y < num_obs; ++y) {
      std::vector<std::size_t> shifted(tuple.begin() + 1, tuple.end());
      shifted.push_back(y);
      const std::size_t next = window_index(shifted, num_obs, pad);
      for (std::size_t a = 0; a < num_actions; ++a) table[(z * num_obs + y) * num_actions + a] = next;
    }
  }

  std::vector<std::size_t> initial(num_obs);
  for (std::size_t y = 0; y < num_obs; ++y) {
    std::vector<std::size_t> tuple(k, pad ? num_obs : y);
    tuple.back() = y;
    initial[y] = window_index(tuple, num_obs, pad);
  }
  const std::size_t z0 = pad ? window_index(std::vector<std::size_t>(k, num_obs), num_obs, pad) : 0;
  return AgentStateMachine(count, num_obs, num_actions, z0, std::move(table), std::move(initial),
                           "window(" + std::to_string(k) + ")");
}

}  // namespace rasql
