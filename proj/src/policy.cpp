#include "rasql/policy.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rasql {

Policy::Policy(std::size_t num_states, std::size_t num_actions, std::vector<double> probs)
    : num_states_(num_states), num_actions_(num_actions), probs_(std::move(probs)) {
  if (num_states_ == 0 || num_actions_ == 0)
    throw std::invalid_argument("policy: dimensions must be positive");
  if (probs_.size() != num_states_ * num_actions_)
    throw std::invalid_argument("policy: table must have |Z|*|A| entries");
  for (std::size_t z = 0; z < num_states_; ++z) {
    double total = 0.0;
    for (std::size_t a = 0; a < num_actions_; ++a) {
      const double p = (*this)(z, a);
      if (!(p >= 0.0) || !std::isfinite(p))
        throw std::invalid_argument("policy: row " + std::to_string(z) + " has an invalid entry");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("policy: row " + std::to_string(z) + " does not sum to 1");
  }
}

Policy Policy::uniform(std::size_t num_states, std::size_t num_actions) {
  return Policy(num_states, num_actions,
                std::vector<double>(num_states * num_actions, 1.0 / static_cast<double>(num_actions)));
}

PeriodicPolicy::PeriodicPolicy(std::vector<Policy> phases) : phases_(std::move(phases)) {
  if (phases_.empty()) throw std::invalid_argument("periodic policy: period must be at least 1");
  for (const auto& p : phases_)
    if (p.num_states() != phases_.front().num_states() ||
        p.num_actions() != phases_.front().num_actions())
      throw std::invalid_argument("periodic policy: phase shapes differ");
}

std::size_t phase_of(std::uint64_t t, std::size_t period) {
  if (t == 0) throw std::invalid_argument("phase_of: time starts at 1");
  return static_cast<std::size_t>((t - 1) % period);
}

const Policy& phase_policy(const PeriodicPolicy& policy, std::uint64_t t) {
  return policy.phase(phase_of(t, policy.period()));
}

std::size_t sample_action(const Policy& policy, std::size_t z, RngStream& rng) {
  if (z >= policy.num_states()) throw std::out_of_range("sample_action: agent state out of range");
  return rng.categorical(policy.row(z));
}

Policy greedy_policy(const QTable& q, const Regularizer& reg) {
  std::vector<double> probs(q.num_states() * q.num_actions());
  for (std::size_t z = 0; z < q.num_states(); ++z)
    reg.conjugate_gradient(q.row(z), std::span<double>(probs).subspan(z * q.num_actions(),
                                                                      q.num_actions()));
  return Policy(q.num_states(), q.num_actions(), std::move(probs));
}

}  // namespace rasql
