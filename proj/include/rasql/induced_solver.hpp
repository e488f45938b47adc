#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rasql/agent_state.hpp"
#include "rasql/occupancy.hpp"
#include "rasql/pomdp.hpp"
#include "rasql/qtable.hpp"
#include "rasql/regularizer.hpp"

namespace rasql {

/// MDP on the agent state obtained by averaging the true model under
/// zeta(s | z):
///   r(z, a)      = sum_s r(s, a) zeta(s | z)
///   P(z' | z, a) = sum_{s, y'} 1{z' = phi(z, y', a)} P(y' | s, a) zeta(s | z)
///
/// In a partial MDP, unsupported (z, a) rows are pinned: the Bellman
/// operators hold them at 0, the value a learner's untouched entry keeps.
struct InducedMdp {
  std::size_t num_states = 0;
  std::size_t num_actions = 0;
  std::vector<double> reward;      // (z, a)
  std::vector<double> transition;  // (z, a, z')
  double discount = 0.0;
  std::vector<bool> supported;     // (z, a)
  bool partial = false;

  double r(std::size_t z, std::size_t a) const { return reward[z * num_actions + a]; }
  double p(std::size_t z, std::size_t a, std::size_t next) const {
    return transition[(z * num_actions + a) * num_states + next];
  }
  std::span<const double> row(std::size_t z, std::size_t a) const {
    return {transition.data() + (z * num_actions + a) * num_states, num_states};
  }
  bool is_supported(std::size_t z, std::size_t a) const { return supported[z * num_actions + a]; }
};

InducedMdp build_induced_mdp(const PomdpModel& model, const AgentStateMachine& machine,
                             const JointDistribution& zeta, bool allow_partial = false);

std::vector<InducedMdp> build_periodic_induced(const PomdpModel& model,
                                               const AgentStateMachine& machine,
                                               std::span<const JointDistribution> zetas,
                                               bool allow_partial = false);

/// (B q)(z, a) = r(z, a) + gamma sum_z' P(z' | z, a) Omega*(q[z', .])
QTable bellman_apply(const QTable& q, const InducedMdp& mdp, const Regularizer& reg);

/// Same with Omega* replaced by max (unregularized ASQL operator).
QTable bellman_apply_max(const QTable& q, const InducedMdp& mdp);

/// B^l B^{l+1} ... B^{l+L-1} q (rightmost applied first).
QTable composed_apply(const QTable& q, std::span<const InducedMdp> mdps, const Regularizer& reg,
                      std::size_t first_phase);

struct SolveOptions {
  double tol = 1e-12;
  std::size_t max_iter = 100'000;
};

/// Sweep count after which value iteration from zero is guaranteed to meet
/// `tol` in sup-norm residual.
std::size_t fixed_point_sweep_bound(const InducedMdp& mdp, const Regularizer& reg, double tol);

/// Value iteration from zero (or `init`) until ||B Q - Q||_inf <= tol.
/// Throws std::runtime_error if max_iter is exceeded.
QTable solve_fixed_point(const InducedMdp& mdp, const Regularizer& reg,
                         const SolveOptions& opts = {});
QTable solve_fixed_point(const InducedMdp& mdp, const Regularizer& reg, const SolveOptions& opts,
                         const QTable& init);

/// Fixed point of the max-bootstrap operator.
QTable solve_unregularized_fixed_point(const InducedMdp& mdp, const SolveOptions& opts = {});

/// Jointly solves Q^l = r^l + gamma P^l Omega*(Q^{l+1 mod L}) by synchronous
/// sweeps, then checks each Q^l against the composed operator (residual
/// <= L * tol, std::logic_error otherwise).
std::vector<QTable> solve_periodic_fixed_point(std::span<const InducedMdp> mdps,
                                               const Regularizer& reg,
                                               const SolveOptions& opts = {});

/// Largest ||B q1 - B q2|| / ||q1 - q2|| over `pairs` random pairs with
/// entries in [-scale, scale].
double empirical_contraction_factor(const InducedMdp& mdp, const Regularizer& reg,
                                    std::size_t pairs, std::uint64_t seed, double scale = 50.0);

}  // namespace rasql
