#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rasql/qtable.hpp"
#include "rasql/regularizer.hpp"
#include "rasql/rng.hpp"

namespace rasql {

/// Stationary agent-state policy pi(a | z), rows validated on construction.
class Policy {
 public:
  Policy(std::size_t num_states, std::size_t num_actions, std::vector<double> probs);

  static Policy uniform(std::size_t num_states, std::size_t num_actions);

  std::size_t num_states() const { return num_states_; }
  std::size_t num_actions() const { return num_actions_; }
  double operator()(std::size_t z, std::size_t a) const { return probs_[z * num_actions_ + a]; }
  std::span<const double> row(std::size_t z) const {
    return {probs_.data() + z * num_actions_, num_actions_};
  }
  const std::vector<double>& probs() const { return probs_; }

  friend bool operator==(const Policy&, const Policy&) = default;

 private:
  std::size_t num_states_;
  std::size_t num_actions_;
  std::vector<double> probs_;
};

/// L phase policies; time t >= 1 uses phase (t - 1) mod L.
class PeriodicPolicy {
 public:
  explicit PeriodicPolicy(std::vector<Policy> phases);

  std::size_t period() const { return phases_.size(); }
  const Policy& phase(std::size_t l) const { return phases_[l]; }
  const std::vector<Policy>& phases() const { return phases_; }
  std::size_t num_states() const { return phases_.front().num_states(); }
  std::size_t num_actions() const { return phases_.front().num_actions(); }

 private:
  std::vector<Policy> phases_;
};

/// Phase of time t (t >= 1).
std::size_t phase_of(std::uint64_t t, std::size_t period);

const Policy& phase_policy(const PeriodicPolicy& policy, std::uint64_t t);

std::size_t sample_action(const Policy& policy, std::size_t z, RngStream& rng);

/// Row z is grad Omega*(q[z, .]).
Policy greedy_policy(const QTable& q, const Regularizer& reg);

}  // namespace rasql
