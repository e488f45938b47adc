#include "rasql/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <sstream>
#include <thread>

namespace rasql {

LimitReport solve_limit(const ExperimentConfig& config) {
  const auto reg = make_regularizer(config.regularizer);
  LimitReport report;
  report.period = config.period();
  if (config.periodic) {
    report.zetas = periodic_stationary(config.model, config.machine, config.behavior,
                                       config.stationary, config.allow_partial);
  } else {
    report.zetas.push_back(limiting_distribution(config.model, config.machine,
                                                 config.behavior.phase(0), config.stationary,
                                                 config.allow_partial));
  }
  for (const auto& zeta : report.zetas) report.partial = report.partial || zeta.partial;
  report.mdps = build_periodic_induced(config.model, config.machine, report.zetas,
                                       config.allow_partial);
  if (report.period == 1) {
    report.limits = {solve_fixed_point(report.mdps[0], *reg, config.solver)};
  } else {
    report.limits = solve_periodic_fixed_point(report.mdps, *reg, config.solver);
  }

  for (std::size_t l = 0; l < report.period; ++l) {
    const auto& next = report.limits[(l + 1) % report.period];
    report.fixed_point_residuals.push_back(
        sup_distance(bellman_apply(next, report.mdps[l], *reg), report.limits[l]));
    report.contraction_factors.push_back(
        empirical_contraction_factor(report.mdps[l], *reg, 100, 0xc0ffee + l));
  }

  RngStream rng(0xfeed);
  const auto& first = report.mdps[0];
  for (std::size_t i = 0; i < 100; ++i) {
    QTable a(first.num_states, first.num_actions), b(first.num_states, first.num_actions);
    for (double& v : a.values()) v = 100.0 * rng.uniform() - 50.0;
    for (double& v : b.values()) v = 100.0 * rng.uniform() - 50.0;
    const double before = sup_distance(a, b);
    const double after =
        sup_distance(composed_apply(a, report.mdps, *reg, 0), composed_apply(b, report.mdps, *reg, 0));
    report.composed_contraction_factor = std::max(report.composed_contraction_factor, after / before);
  }
  return report;
}

RunRecord run_single(const ExperimentConfig& config, std::uint64_t seed) {
  const auto reg = make_regularizer(config.regularizer);
  RunOptions opts;
  opts.steps = config.steps;
  opts.seed = seed;
  opts.log_every = config.log_every;
  opts.allow_noncompliant = config.allow_noncompliant;
  opts.config_digest = config.digest();
  if (config.periodic)
    return run_repasql(config.model, config.machine, config.behavior, *reg, config.schedule, opts);
  return run_rasql(config.model, config.machine, config.behavior.phase(0), *reg, config.schedule,
                   opts);
}

std::vector<RunRecord> run_seeds(const ExperimentConfig& config, std::size_t max_workers) {
  const std::size_t n = config.seeds.size();
  if (max_workers == 0) {
    max_workers = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("RASQL_MAX_WORKERS")) {
      const long cap = std::strtol(env, nullptr, 10);
      if (cap > 0) max_workers = static_cast<std::size_t>(cap);
    }
  }
  const std::size_t workers = std::min(max_workers, n);

  std::vector<RunRecord> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = run_single(config, config.seeds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw std::runtime_error("seed " + std::to_string(config.seeds[i]) + " failed: " + e.what());
    }
  }
  return results;
}

double quantile(std::vector<double> sample, double p) {
  if (sample.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(sample.begin(), sample.end());
  const double pos = p * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sample.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sample[lo] + frac * (sample[hi] - sample[lo]);
}

namespace {

void check_grid(const std::vector<RunRecord>& runs, const std::vector<QTable>& limits) {
  if (runs.empty()) throw std::invalid_argument("aggregate: no runs");
  const auto& ref = runs.front();
  if (ref.final_tables.size() != limits.size())
    throw std::invalid_argument("aggregate: run period does not match the limit");
  for (const auto& run : runs) {
    if (run.snapshots.size() != ref.snapshots.size() ||
        run.final_tables.size() != ref.final_tables.size())
      throw std::invalid_argument("aggregate: runs do not share a snapshot grid");
    for (std::size_t k = 0; k < run.snapshots.size(); ++k)
      if (run.snapshots[k].t != ref.snapshots[k].t)
        throw std::invalid_argument("aggregate: runs do not share a snapshot grid");
    for (std::size_t l = 0; l < limits.size(); ++l)
      if (run.final_tables[l].num_states() != limits[l].num_states() ||
          run.final_tables[l].num_actions() != limits[l].num_actions())
        throw std::invalid_argument("aggregate: Q-table shape does not match the limit");
  }
}

double snapshot_error(const Snapshot& snap, const std::vector<QTable>& limits) {
  return sup_distance(std::span<const QTable>(snap.tables), std::span<const QTable>(limits));
}

}  // namespace

AggregateTrace aggregate(const std::vector<RunRecord>& runs, const std::vector<QTable>& limits) {
  check_grid(runs, limits);
  AggregateTrace trace;
  const auto& grid = runs.front().snapshots;
  const std::size_t Z = limits.front().num_states(), A = limits.front().num_actions();
  for (std::size_t l = 0; l < limits.size(); ++l)
    for (std::size_t z = 0; z < Z; ++z)
      for (std::size_t a = 0; a < A; ++a) {
        AggregateSeries series;
        series.phase = l;
        series.z = z;
        series.a = a;
        series.limit = limits[l](z, a);
        for (std::size_t k = 0; k < grid.size(); ++k) {
          std::vector<double> values;
          values.reserve(runs.size());
          for (const auto& run : runs) values.push_back(run.snapshots[k].tables[l](z, a));
          series.t.push_back(grid[k].t);
          series.lower.push_back(quantile(values, 0.25));
          series.median.push_back(quantile(values, 0.5));
          series.upper.push_back(quantile(values, 0.75));
        }
        trace.series.push_back(std::move(series));
      }

  auto& summary = trace.summary;
  for (const auto& run : runs)
    summary.final_errors.push_back(sup_distance(std::span<const QTable>(run.final_tables),
                                                std::span<const QTable>(limits)));
  summary.median = quantile(summary.final_errors, 0.5);
  summary.lower = quantile(summary.final_errors, 0.25);
  summary.upper = quantile(summary.final_errors, 0.75);
  for (std::size_t l = 0; l < limits.size(); ++l) {
    std::vector<double> errors;
    for (const auto& run : runs) errors.push_back(sup_distance(run.final_tables[l], limits[l]));
    summary.phase_medians.push_back(quantile(errors, 0.5));
  }
  return trace;
}

double default_tolerance(const std::vector<QTable>& limits) {
  double peak = 0.0;
  for (const auto& q : limits) peak = std::max(peak, q.sup_norm());
  return 0.05 * (1.0 + peak);
}

CompareResult compare(const std::vector<QTable>& limits, const std::vector<RunRecord>& runs,
                      double tolerance, const std::vector<std::uint64_t>& checkpoints) {
  check_grid(runs, limits);
  CompareResult result;
  result.tolerance = tolerance;
  std::vector<double> finals;
  for (const auto& run : runs)
    finals.push_back(sup_distance(std::span<const QTable>(run.final_tables),
                                  std::span<const QTable>(limits)));
  result.median_error = quantile(finals, 0.5);
  for (std::size_t l = 0; l < limits.size(); ++l) {
    std::vector<double> errors;
    for (const auto& run : runs) errors.push_back(sup_distance(run.final_tables[l], limits[l]));
    result.phase_median_errors.push_back(quantile(errors, 0.5));
  }

  const auto& grid = runs.front().snapshots;
  for (std::uint64_t t : checkpoints) {
    const auto it = std::find_if(grid.begin(), grid.end(), [t](const Snapshot& s) { return s.t == t; });
    if (it == grid.end()) continue;
    const auto k = static_cast<std::size_t>(it - grid.begin());
    std::vector<double> errors;
    for (const auto& run : runs) errors.push_back(snapshot_error(run.snapshots[k], limits));
    result.trend.emplace_back(t, quantile(errors, 0.5));
  }
  for (std::size_t i = 1; i < result.trend.size(); ++i) {
    const double before = result.trend[i - 1].second, after = result.trend[i].second;
    if (!(after < before || before == 0.0)) result.trend_ok = false;
  }
  result.pass = result.median_error <= tolerance && result.trend_ok;
  return result;
}

std::size_t return_horizon(const PomdpModel& model, const PeriodicPolicy& policy,
                           const Regularizer& reg, double bound) {
  const double gamma = model.discount;
  double span = std::max(std::abs(model.reward_min()), std::abs(model.reward_max()));
  double penalty = 0.0;
  for (const auto& phase : policy.phases())
    for (std::size_t z = 0; z < phase.num_states(); ++z)
      penalty = std::max(penalty, std::abs(reg.omega(phase.row(z))));
  span += penalty;
  if (gamma == 0.0 || span == 0.0) return 1;
  const double h = std::log(bound * (1.0 - gamma) / span) / std::log(gamma);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(h)));
}

ReturnEstimate evaluate_return(const PomdpModel& model, const AgentStateMachine& machine,
                               const PeriodicPolicy& policy, const Regularizer& reg,
                               const std::vector<std::uint64_t>& seeds,
                               std::size_t episodes_per_seed, std::size_t horizon) {
  if (policy.num_states() != machine.num_agent_states() ||
      policy.num_actions() != model.num_actions)
    throw std::invalid_argument("evaluate_return: policy shape does not match Z x A");
  if (seeds.empty() || episodes_per_seed == 0)
    throw std::invalid_argument("evaluate_return: need at least one episode");

  const std::size_t L = policy.period();
  std::vector<double> penalty(L * machine.num_agent_states());
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t z = 0; z < machine.num_agent_states(); ++z)
      penalty[l * machine.num_agent_states() + z] = reg.omega(policy.phase(l).row(z));

  ReturnEstimate est;
  est.horizon = horizon > 0 ? horizon : return_horizon(model, policy, reg);
  double max_penalty = 0.0;
  for (double p : penalty) max_penalty = std::max(max_penalty, std::abs(p));
  const double span =
      std::max(std::abs(model.reward_min()), std::abs(model.reward_max())) + max_penalty;
  est.truncation_bound = std::pow(model.discount, static_cast<double>(est.horizon)) * span /
                         (1.0 - model.discount);

  double sum = 0.0, sum_sq = 0.0, reg_sum = 0.0, reg_sum_sq = 0.0;
  for (std::uint64_t seed : seeds) {
    RngStream rng(seed);
    for (std::size_t e = 0; e < episodes_per_seed; ++e) {
      std::size_t s = sample_initial(model, rng);
      std::size_t z = machine.initial(sample_initial_obs(model, s, rng));
      double discount = 1.0, ret = 0.0, reg_ret = 0.0;
      for (std::size_t t = 1; t <= est.horizon; ++t) {
        const std::size_t l = phase_of(t, L);
        const std::size_t a = sample_action(policy.phase(l), z, rng);
        const Transition tr = step(model, s, a, rng);
        ret += discount * tr.reward;
        reg_ret += discount * (tr.reward - penalty[l * machine.num_agent_states() + z]);
        discount *= model.discount;
        z = machine.update(z, tr.obs, a);
        s = tr.next_state;
      }
      sum += ret;
      sum_sq += ret * ret;
      reg_sum += reg_ret;
      reg_sum_sq += reg_ret * reg_ret;
      ++est.episodes;
    }
  }
  const double n = static_cast<double>(est.episodes);
  auto stderr_of = [n](double s, double sq) {
    if (n < 2) return 0.0;
    const double var = std::max(0.0, (sq - s * s / n) / (n - 1.0));
    return std::sqrt(var / n);
  };
  est.mean = sum / n;
  est.stderr_ = stderr_of(sum, sum_sq);
  est.regularized_mean = reg_sum / n;
  est.regularized_stderr = stderr_of(reg_sum, reg_sum_sq);
  return est;
}

}  // namespace rasql
