#include "rasql/learner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rasql {

LearningRateSchedule LearningRateSchedule::polynomial(double exponent) {
  if (!(exponent > 0.5 && exponent <= 1.0))
    throw std::invalid_argument("polynomial schedule: exponent must lie in (0.5, 1]");
  LearningRateSchedule s;
  s.kind = Kind::Polynomial;
  s.exponent = exponent;
  return s;
}

LearningRateSchedule LearningRateSchedule::constant_rate(double c) {
  if (!(c > 0.0 && c <= 1.0)) throw std::invalid_argument("constant schedule: rate must lie in (0, 1]");
  LearningRateSchedule s;
  s.kind = Kind::Constant;
  s.constant = c;
  return s;
}

LearningRateSchedule LearningRateSchedule::parse(const std::string& text) {
  if (text == "inverse-visit") return inverse_visit();
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  if (colon != std::string::npos) {
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(text.substr(colon + 1), &used);
      if (used != text.size() - colon - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw std::invalid_argument("schedule '" + text + "': bad numeric parameter");
    }
    if (head == "polynomial") return polynomial(value);
    if (head == "constant") return constant_rate(value);
  }
  throw std::invalid_argument("unknown schedule '" + text +
                              "' (expected inverse-visit, polynomial:<w> or constant:<c>)");
}

double LearningRateSchedule::rate(std::uint64_t visits) const {
  const double n = static_cast<double>(visits);
  switch (kind) {
    case Kind::InverseVisit:
      return 1.0 / n;
    case Kind::Polynomial:
      return exponent == 1.0 ? 1.0 / n : std::pow(n, -exponent);
    case Kind::Constant:
      return constant;
  }
  return 0.0;
}

std::string LearningRateSchedule::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::InverseVisit:
      os << "inverse-visit";
      break;
    case Kind::Polynomial:
      os << "polynomial:" << exponent;
      break;
    case Kind::Constant:
      os << "constant:" << constant;
      break;
  }
  return os.str();
}

std::uint64_t effective_log_every(const RunOptions& opts) {
  if (opts.log_every > 0) return opts.log_every;
  return std::max<std::uint64_t>(1, opts.steps / 200);
}

namespace {

void check_inputs(const PomdpModel& model, const AgentStateMachine& machine, std::size_t policy_states,
                  std::size_t policy_actions, const LearningRateSchedule& schedule,
                  const RunOptions& opts) {
  if (machine.num_obs() != model.num_obs || machine.num_actions() != model.num_actions)
    throw std::invalid_argument("learner: agent state machine does not match the model");
  if (policy_states != machine.num_agent_states() || policy_actions != model.num_actions)
    throw std::invalid_argument("learner: behavior policy shape does not match Z x A");
  if (opts.steps == 0) throw std::invalid_argument("learner: steps must be at least 1");
  if (!schedule.compliant() && !opts.allow_noncompliant)
    throw std::invalid_argument("learner: schedule '" + schedule.describe() +
                                "' violates sum(alpha^2) < inf; opt in explicitly to run it");
}

RunRecord make_record(const RunOptions& opts, std::size_t period, const LearningRateSchedule& schedule,
                      std::size_t table_size) {
  RunRecord record;
  record.config_digest = opts.config_digest;
  record.seed = opts.seed;
  record.steps = opts.steps;
  record.period = period;
  record.schedule = schedule.describe();
  record.visits.assign(period * table_size, 0);
  return record;
}

template <typename Bootstrap>
RunRecord run_stationary(const PomdpModel& model, const AgentStateMachine& machine,
                         const Policy& behavior, const LearningRateSchedule& schedule,
                         const RunOptions& opts, Bootstrap bootstrap) {
  check_inputs(model, machine, behavior.num_states(), behavior.num_actions(), schedule, opts);
  const std::size_t Z = machine.num_agent_states(), A = model.num_actions;
  const std::uint64_t log_every = effective_log_every(opts);
  RunRecord record = make_record(opts, 1, schedule, Z * A);
  QTable q(Z, A);

  RngStream rng(opts.seed);
  std::size_t s = sample_initial(model, rng);
  std::size_t z = machine.initial(sample_initial_obs(model, s, rng));
  for (std::uint64_t t = 1; t <= opts.steps; ++t) {
    const std::size_t a = sample_action(behavior, z, rng);
    const Transition tr = step(model, s, a, rng);
    const std::size_t next_z = machine.update(z, tr.obs, a);
    const double target = tr.reward + model.discount * bootstrap(q.row(next_z));
    const std::uint64_t n = ++record.visits[z * A + a];
    q(z, a) += schedule.rate(n) * (target - q(z, a));
    s = tr.next_state;
    z = next_z;
    if (t % log_every == 0 || t == opts.steps) record.snapshots.push_back({t, {q}});
  }
  record.final_tables = {q};
  return record;
}

}  // namespace

RunRecord run_rasql(const PomdpModel& model, const AgentStateMachine& machine,
                    const Policy& behavior, const Regularizer& reg,
                    const LearningRateSchedule& schedule, const RunOptions& opts) {
  return run_stationary(model, machine, behavior, schedule, opts,
                        [&reg](std::span<const double> row) { return reg.conjugate(row); });
}

RunRecord run_asql(const PomdpModel& model, const AgentStateMachine& machine,
                   const Policy& behavior, const LearningRateSchedule& schedule,
                   const RunOptions& opts) {
  return run_stationary(model, machine, behavior, schedule, opts,
                        [](std::span<const double> row) { return hard_max(row); });
}

RunRecord run_repasql(const PomdpModel& model, const AgentStateMachine& machine,
                      const PeriodicPolicy& behavior, const Regularizer& reg,
                      const LearningRateSchedule& schedule, const RunOptions& opts) {
  check_inputs(model, machine, behavior.num_states(), behavior.num_actions(), schedule, opts);
  const std::size_t Z = machine.num_agent_states(), A = model.num_actions;
  const std::size_t L = behavior.period();
  const std::uint64_t log_every = effective_log_every(opts);
  RunRecord record = make_record(opts, L, schedule, Z * A);
  std::vector<QTable> q(L, QTable(Z, A));

  RngStream rng(opts.seed);
  std::size_t s = sample_initial(model, rng);
  std::size_t z = machine.initial(sample_initial_obs(model, s, rng));
  for (std::uint64_t t = 1; t <= opts.steps; ++t) {
    const std::size_t phase = phase_of(t, L);
    const std::size_t next_phase = (phase + 1) % L;
    const std::size_t a = sample_action(behavior.phase(phase), z, rng);
    const Transition tr = step(model, s, a, rng);
    const std::size_t next_z = machine.update(z, tr.obs, a);
    const double target = tr.reward + model.discount * reg.conjugate(q[next_phase].row(next_z));
    const std::uint64_t n = ++record.visits[(phase * Z + z) * A + a];
    q[phase](z, a) += schedule.rate(n) * (target - q[phase](z, a));
    s = tr.next_state;
    z = next_z;
    if (t % log_every == 0 || t == opts.steps) record.snapshots.push_back({t, q});
  }
  record.final_tables = q;
  return record;
}

}  // namespace rasql
