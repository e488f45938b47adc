#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rasql/agent_state.hpp"
#include "rasql/policy.hpp"
#include "rasql/pomdp.hpp"
#include "rasql/qtable.hpp"
#include "rasql/regularizer.hpp"

namespace rasql {

/// Per-entry step size alpha_n as a function of the entry's visit count n.
struct LearningRateSchedule {
  enum class Kind { InverseVisit, Polynomial, Constant };

  Kind kind = Kind::InverseVisit;
  double exponent = 1.0;  // polynomial: alpha_n = n^-exponent, exponent in (0.5, 1]
  double constant = 0.1;  // constant: alpha_n = constant (diagnostics only)

  static LearningRateSchedule inverse_visit() { return {}; }
  static LearningRateSchedule polynomial(double exponent);
  static LearningRateSchedule constant_rate(double c);
  /// "inverse-visit", "polynomial:<omega>" or "constant:<c>".
  static LearningRateSchedule parse(const std::string& text);

  double rate(std::uint64_t visits) const;
  /// Sum alpha = inf and sum alpha^2 < inf.
  bool compliant() const { return kind != Kind::Constant; }
  std::string describe() const;
};

struct RunOptions {
  std::uint64_t steps = 100'000;
  std::uint64_t seed = 1;
  /// Snapshot cadence; 0 selects steps / 200 (at least 1).
  std::uint64_t log_every = 0;
  /// Required to run a non-compliant (constant) schedule.
  bool allow_noncompliant = false;
  std::string config_digest;
};

struct Snapshot {
  std::uint64_t t = 0;          // number of updates applied
  std::vector<QTable> tables;   // one per phase
  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

struct RunRecord {
  std::string config_digest;
  std::uint64_t seed = 0;
  std::uint64_t steps = 0;
  std::size_t period = 1;
  std::string schedule;
  std::vector<Snapshot> snapshots;
  std::vector<QTable> final_tables;
  std::vector<std::uint64_t> visits;  // (phase, z, a)

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

std::uint64_t effective_log_every(const RunOptions& opts);

/// Off-policy regularized agent-state Q-learning: at each step only the
/// visited (z_t, a_t) entry moves toward r_t + gamma Omega*(Q(z_{t+1}, .)).
RunRecord run_rasql(const PomdpModel& model, const AgentStateMachine& machine,
                    const Policy& behavior, const Regularizer& reg,
                    const LearningRateSchedule& schedule, const RunOptions& opts);

/// Periodic variant: at step t (phase l = (t-1) mod L) updates Q^l at
/// (z_t, a_t), bootstrapping from Omega*(Q^{l+1 mod L}(z_{t+1}, .)).
RunRecord run_repasql(const PomdpModel& model, const AgentStateMachine& machine,
                      const PeriodicPolicy& behavior, const Regularizer& reg,
                      const LearningRateSchedule& schedule, const RunOptions& opts);

/// Unregularized baseline with a max bootstrap.
RunRecord run_asql(const PomdpModel& model, const AgentStateMachine& machine,
                   const Policy& behavior, const LearningRateSchedule& schedule,
                   const RunOptions& opts);

}  // namespace rasql
