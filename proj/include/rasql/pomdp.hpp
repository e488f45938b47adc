#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rasql/rng.hpp"

namespace rasql {

/// Finite POMDP with a dense joint kernel P(s', y' | s, a).
///
/// `kernel` is row-major over (s, a, s', y'). `init_obs` gives the
/// distribution of the first observation y_1 given s_1, row-major (s, y);
/// the kernel only produces observations for s_2 onwards.
struct PomdpModel {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::size_t num_obs = 0;
  std::vector<double> kernel;
  std::vector<double> reward;
  double discount = 0.0;
  std::vector<double> init_dist;
  std::vector<double> init_obs;

  double transition(std::size_t s, std::size_t a, std::size_t next_s, std::size_t y) const {
    return kernel[((s * num_actions + a) * num_states + next_s) * num_obs + y];
  }
  double& transition(std::size_t s, std::size_t a, std::size_t next_s, std::size_t y) {
    return kernel[((s * num_actions + a) * num_states + next_s) * num_obs + y];
  }
  double r(std::size_t s, std::size_t a) const { return reward[s * num_actions + a]; }

  /// The |S|*|Y| joint row P(., . | s, a).
  std::span<const double> kernel_row(std::size_t s, std::size_t a) const {
    return {kernel.data() + (s * num_actions + a) * num_states * num_obs, num_states * num_obs};
  }

  /// Observation marginal P(y' | s, a) = sum over s' of the joint kernel.
  double obs_prob(std::size_t s, std::size_t a, std::size_t y) const;

  double reward_min() const;
  double reward_max() const;
};

/// Builds the joint kernel from P(s'|s,a) (row-major (s, a, s')) and a
/// deterministic observation map o: S -> Y, with y' = o(s'). The first
/// observation is o(s_1).
PomdpModel make_factored_model(std::size_t num_states, std::size_t num_actions,
                               std::size_t num_obs, std::span<const double> state_transition,
                               std::span<const std::size_t> observation_map,
                               std::span<const double> reward, double discount,
                               std::span<const double> init_dist);

struct Violation {
  std::string field;
  std::vector<std::size_t> index;
  std::string message;
  double amount = 0.0;
};

struct ValidationOptions {
  double sum_tolerance = 1e-12;
  /// When set, rewards outside [0, r_max] are reported.
  std::optional<double> strict_reward_max;
};

std::vector<Violation> validate_model(const PomdpModel& model, const ValidationOptions& opts = {});
std::string format_violations(const std::vector<Violation>& violations);

struct Transition {
  std::size_t next_state;
  std::size_t obs;
  double reward;
};

/// Samples (s', y') from the joint kernel row and returns r(s, a).
Transition step(const PomdpModel& model, std::size_t s, std::size_t a, RngStream& rng);

std::size_t sample_initial(const PomdpModel& model, RngStream& rng);
std::size_t sample_initial_obs(const PomdpModel& model, std::size_t s, RngStream& rng);

/// The four-state, two-action, two-observation example with gamma = 0.9.
PomdpModel reference_example_model();

}  // namespace rasql
