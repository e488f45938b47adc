#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rasql/config.hpp"
#include "rasql/induced_solver.hpp"
#include "rasql/learner.hpp"
#include "rasql/occupancy.hpp"

namespace rasql {

/// Predicted limit of the learner plus the quantities it was derived from.
struct LimitReport {
  std::size_t period = 1;
  std::vector<JointDistribution> zetas;
  std::vector<InducedMdp> mdps;
  std::vector<QTable> limits;
  std::vector<double> fixed_point_residuals;
  /// Empirical Lipschitz factor of each phase operator (and, for L > 1,
  /// of the composed operator) on random pairs.
  std::vector<double> contraction_factors;
  double composed_contraction_factor = 0.0;
  bool partial = false;
};

/// occupancy -> induced MDP -> regularized fixed point.
LimitReport solve_limit(const ExperimentConfig& config);

/// One learner run (RASQL for L = 1, RePASQL otherwise).
RunRecord run_single(const ExperimentConfig& config, std::uint64_t seed);

/// All seeds on up to `max_workers` threads (0: RASQL_MAX_WORKERS or the
/// hardware concurrency). Results are in seed-list order.
std::vector<RunRecord> run_seeds(const ExperimentConfig& config, std::size_t max_workers = 0);

struct AggregateSeries {
  std::size_t phase = 0, z = 0, a = 0;
  std::vector<std::uint64_t> t;
  std::vector<double> lower, median, upper;
  double limit = 0.0;
};

struct ErrorSummary {
  /// Per seed: max over phases of ||Q_final - Q_limit||_inf.
  std::vector<double> final_errors;
  double median = 0.0, lower = 0.0, upper = 0.0;
  /// Per phase: median over seeds of ||Q^l_final - Q^l_limit||_inf.
  std::vector<double> phase_medians;
};

struct AggregateTrace {
  std::vector<AggregateSeries> series;
  ErrorSummary summary;
};

/// Linear-interpolation quantile of an unsorted sample (p in [0, 1]).
double quantile(std::vector<double> sample, double p);

/// Median and quartiles across seeds on the common snapshot grid.
AggregateTrace aggregate(const std::vector<RunRecord>& runs, const std::vector<QTable>& limits);

struct CompareResult {
  double tolerance = 0.0;
  std::vector<double> phase_median_errors;
  /// Median over seeds of max over phases of the final error.
  double median_error = 0.0;
  /// (t, median over seeds of the error at t) for each checkpoint on the grid.
  std::vector<std::pair<std::uint64_t, double>> trend;
  bool trend_ok = true;
  bool pass = false;
};

/// 0.05 * (1 + max_l ||Q^l||_inf)
double default_tolerance(const std::vector<QTable>& limits);

/// Pass iff the median final error is within `tolerance` and the median
/// error decreases strictly across the checkpoints found on the grid
/// (a checkpoint already at zero error counts as decreasing).
CompareResult compare(const std::vector<QTable>& limits, const std::vector<RunRecord>& runs,
                      double tolerance,
                      const std::vector<std::uint64_t>& checkpoints = {1'000, 10'000, 100'000});

struct ReturnEstimate {
  double mean = 0.0, stderr_ = 0.0;                 // unregularized J
  double regularized_mean = 0.0, regularized_stderr = 0.0;  // J^Omega
  std::size_t horizon = 0;
  double truncation_bound = 0.0;
  std::size_t episodes = 0;
};

/// Smallest horizon H with gamma^H * span / (1 - gamma) <= 1e-6, where span
/// bounds |r - Omega(pi(.|z))|.
std::size_t return_horizon(const PomdpModel& model, const PeriodicPolicy& policy,
                           const Regularizer& reg, double bound = 1e-6);

/// Monte-Carlo discounted return of an agent-state policy on the POMDP,
/// with and without the per-step penalty Omega(pi(.|z_t)).
ReturnEstimate evaluate_return(const PomdpModel& model, const AgentStateMachine& machine,
                               const PeriodicPolicy& policy, const Regularizer& reg,
                               const std::vector<std::uint64_t>& seeds,
                               std::size_t episodes_per_seed, std::size_t horizon = 0);

}  // namespace rasql
