#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rasql/agent_state.hpp"
#include "rasql/policy.hpp"
#include "rasql/pomdp.hpp"

namespace rasql {

/// Raised when the behavior chain has no unique limiting distribution.
class NonErgodicError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when some (z, a) (or (phase, z, a)) has zero limiting mass.
class ZeroVisitError : public std::runtime_error {
 public:
  ZeroVisitError(const std::string& what, std::vector<std::pair<std::size_t, std::size_t>> pairs)
      : std::runtime_error(what), pairs_(std::move(pairs)) {}
  const std::vector<std::pair<std::size_t, std::size_t>>& pairs() const { return pairs_; }

 private:
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
};

/// Shape of the (s, y, z, a) product space; index order is s, y, z, a.
struct JointDims {
  std::size_t states = 0;
  std::size_t obs = 0;
  std::size_t agent_states = 0;
  std::size_t actions = 0;

  std::size_t size() const { return states * obs * agent_states * actions; }
  std::size_t index(std::size_t s, std::size_t y, std::size_t z, std::size_t a) const {
    return ((s * obs + y) * agent_states + z) * actions + a;
  }
  friend bool operator==(const JointDims&, const JointDims&) = default;
};

/// Dense row-stochastic matrix.
class StochasticMatrix {
 public:
  explicit StochasticMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * n_, n_}; }

  /// out = v T
  void left_multiply(std::span<const double> v, std::span<double> out) const;

  /// max over rows of |row sum - 1|
  double row_sum_error() const;

 private:
  std::size_t n_;
  std::vector<double> data_;
};

/// Transition of (s, y, z, a) -> (s', y', z', a'):
/// P(s', y' | s, a) 1{z' = phi(z, y', a)} next_policy(a' | z').
/// `next_policy` draws the action at the destination time step.
StochasticMatrix joint_transition(const PomdpModel& model, const AgentStateMachine& machine,
                                  const Policy& next_policy);

struct StationaryOptions {
  double tol = 1e-12;
  std::size_t max_iter = 1'000'000;
  std::size_t restarts = 5;
  std::uint64_t restart_seed = 0x5eed;
  /// (z, a) pairs with limiting mass at or below this are treated as unvisited.
  double support_threshold = 1e-10;
};

struct StationaryResult {
  std::vector<double> dist;
  double residual = 0.0;
  std::size_t sweeps = 0;
  /// True when plain power iteration stalled and the lazy chain (I + T)/2 was used.
  bool used_averaging = false;
};

/// Applies one step of a chain: out = v T.
using ChainStep = std::function<void(std::span<const double>, std::span<double>)>;

/// Power iteration from the uniform vector, verified by restarts from
/// random starts. Throws NonErgodicError on non-convergence or disagreement.
StationaryResult stationary_distribution(const ChainStep& step, std::size_t n,
                                         const StationaryOptions& opts = {});
StationaryResult stationary_distribution(const StochasticMatrix& T,
                                         const StationaryOptions& opts = {});

/// Limiting distribution over (s, y, z, a).
struct JointDistribution {
  JointDims dims;
  std::vector<double> mass;
  /// Per (z, a): limiting mass above the support threshold.
  std::vector<bool> support;
  double residual = 0.0;
  bool partial = false;

  double operator()(std::size_t s, std::size_t y, std::size_t z, std::size_t a) const {
    return mass[dims.index(s, y, z, a)];
  }
  double za_mass(std::size_t z, std::size_t a) const;
  double z_mass(std::size_t z) const;
  bool supported(std::size_t z, std::size_t a) const { return support[z * dims.actions + a]; }
};

/// Stationary joint distribution of the chain driven by `behavior`.
/// Throws ZeroVisitError for unvisited (z, a) unless `allow_partial`.
JointDistribution limiting_distribution(const PomdpModel& model, const AgentStateMachine& machine,
                                        const Policy& behavior, const StationaryOptions& opts = {},
                                        bool allow_partial = false);

/// Per-phase limiting distributions. zeta^0 is stationary for the L-step
/// skeleton T^0 ... T^{L-1} and zeta^{l+1} = zeta^l T^l, where T^l moves
/// from phase l to phase l+1 (next action drawn from phase l+1).
std::vector<JointDistribution> periodic_stationary(const PomdpModel& model,
                                                   const AgentStateMachine& machine,
                                                   const PeriodicPolicy& behavior,
                                                   const StationaryOptions& opts = {},
                                                   bool allow_partial = false);

/// zeta(s | z) as a row-major (z, s) table. Also checks
/// zeta(s | z, a) = zeta(s | z) on supported pairs (std::logic_error if not).
/// Rows of zero-mass z are all zero when `allow_partial`, else ZeroVisitError.
std::vector<double> conditional_s_given_z(const JointDistribution& zeta, bool allow_partial = false);

}  // namespace rasql
