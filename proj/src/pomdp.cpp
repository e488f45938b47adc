#include "rasql/pomdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rasql {

double PomdpModel::obs_prob(std::size_t s, std::size_t a, std::size_t y) const {
  double total = 0.0;
  for (std::size_t next = 0; next < num_states; ++next) total += transition(s, a, next, y);
  return total;
}

double PomdpModel::reward_min() const { return *std::min_element(reward.begin(), reward.end()); }
double PomdpModel::reward_max() const { return *std::max_element(reward.begin(), reward.end()); }

PomdpModel make_factored_model(std::size_t num_states, std::size_t num_actions,
                               std::size_t num_obs, std::span<const double> state_transition,
                               std::span<const std::size_t> observation_map,
                               std::span<const double> reward, double discount,
                               std::span<const double> init_dist) {
  if (state_transition.size() != num_states * num_actions * num_states)
    throw std::invalid_argument("factored model: transition must have |S|*|A|*|S| entries");
  if (observation_map.size() != num_states)
    throw std::invalid_argument("factored model: observation map must have |S| entries");
  if (reward.size() != num_states * num_actions)
    throw std::invalid_argument("factored model: reward must have |S|*|A| entries");
  if (init_dist.size() != num_states)
    throw std::invalid_argument("factored model: init_dist must have |S| entries");
  for (std::size_t y : observation_map)
    if (y >= num_obs) throw std::invalid_argument("factored model: observation index out of range");

  PomdpModel m;
  m.num_states = num_states;
  m.num_actions = num_actions;
  m.num_obs = num_obs;
  m.discount = discount;
  m.reward.assign(reward.begin(), reward.end());
  m.init_dist.assign(init_dist.begin(), init_dist.end());
  m.kernel.assign(num_states * num_actions * num_states * num_obs, 0.0);
  for (std::size_t s = 0; s < num_states; ++s)
    for (std::size_t a = 0; a < num_actions; ++a)
      for (std::size_t next = 0; next < num_states; ++next)
        m.transition(s, a, next, observation_map[next]) =
            state_transition[(s * num_actions + a) * num_states + next];
  m.init_obs.assign(num_states * num_obs, 0.0);
  for (std::size_t s = 0; s < num_states; ++s) m.init_obs[s * num_obs + observation_map[s]] = 1.0;
  return m;
}

namespace {

void check_distribution(std::span<const double> row, const std::string& field,
                        std::vector<std::size_t> index, double tol,
                        std::vector<Violation>& out) {
  double total = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (!std::isfinite(row[i]) || row[i] < 0.0) {
      auto idx = index;
      idx.push_back(i);
      out.push_back({field, idx, "entry is negative or non-finite", row[i]});
    }
    total += row[i];
  }
  if (!(std::abs(total - 1.0) <= tol))
    out.push_back({field, std::move(index), "row does not sum to 1 (deficit shown)", 1.0 - total});
}

}  // namespace

std::vector<Violation> validate_model(const PomdpModel& m, const ValidationOptions& opts) {
  std::vector<Violation> out;
  if (m.num_states == 0) out.push_back({"num_states", {}, "must be positive", 0.0});
  if (m.num_actions == 0) out.push_back({"num_actions", {}, "must be positive", 0.0});
  if (m.num_obs == 0) out.push_back({"num_obs", {}, "must be positive", 0.0});
  if (!out.empty()) return out;

  const std::size_t S = m.num_states, A = m.num_actions, Y = m.num_obs;
  bool shapes_ok = true;
  auto check_size = [&](const std::vector<double>& v, std::size_t expected, const char* name) {
    if (v.size() != expected) {
      out.push_back({name, {}, "has " + std::to_string(v.size()) + " entries, expected " +
                                   std::to_string(expected),
                     0.0});
      shapes_ok = false;
    }
  };
  check_size(m.kernel, S * A * S * Y, "kernel");
  check_size(m.reward, S * A, "reward");
  check_size(m.init_dist, S, "init_dist");
  check_size(m.init_obs, S * Y, "init_obs");
  if (!shapes_ok) return out;

  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t a = 0; a < A; ++a)
      check_distribution(m.kernel_row(s, a), "kernel", {s, a}, opts.sum_tolerance, out);
  check_distribution(m.init_dist, "init_dist", {}, opts.sum_tolerance, out);
  for (std::size_t s = 0; s < S; ++s)
    check_distribution(std::span<const double>(m.init_obs).subspan(s * Y, Y), "init_obs", {s},
                       opts.sum_tolerance, out);

  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t a = 0; a < A; ++a) {
      const double r = m.r(s, a);
      if (!std::isfinite(r)) {
        out.push_back({"reward", {s, a}, "reward is not finite", r});
      } else if (opts.strict_reward_max && (r < 0.0 || r > *opts.strict_reward_max)) {
        out.push_back({"reward", {s, a}, "reward outside [0, R_max]", r});
      }
    }
  if (!(m.discount >= 0.0 && m.discount < 1.0))
    out.push_back({"discount", {}, "discount must lie in [0, 1)", m.discount});
  return out;
}

std::string format_violations(const std::vector<Violation>& violations) {
  std::ostringstream os;
  for (const auto& v : violations) {
    os << v.field;
    if (!v.index.empty()) {
      os << '[';
      for (std::size_t i = 0; i < v.index.size(); ++i) os << (i ? "," : "") << v.index[i];
      os << ']';
    }
    os << ": " << v.message << " (" << v.amount << ")\n";
  }
  return os.str();
}

Transition step(const PomdpModel& m, std::size_t s, std::size_t a, RngStream& rng) {
  if (s >= m.num_states) throw std::out_of_range("step: state index out of range");
  if (a >= m.num_actions) throw std::out_of_range("step: action index out of range");
  const std::size_t joint = rng.categorical(m.kernel_row(s, a));
  return {joint / m.num_obs, joint % m.num_obs, m.r(s, a)};
}

std::size_t sample_initial(const PomdpModel& m, RngStream& rng) {
  return rng.categorical(m.init_dist);
}

std::size_t sample_initial_obs(const PomdpModel& m, std::size_t s, RngStream& rng) {
  if (s >= m.num_states) throw std::out_of_range("sample_initial_obs: state index out of range");
  return rng.categorical(std::span<const double>(m.init_obs).subspan(s * m.num_obs, m.num_obs));
}

PomdpModel reference_example_model() {
  constexpr double gamma = 0.9;
  // rows s, columns s'
  const double p0[4][4] = {
      {0.0, 0.6, 0.4, 0.0}, {0.8, 0.0, 0.2, 0.0}, {0.7, 0.3, 0.0, 0.0}, {0.2, 0.0, 0.0, 0.8}};
  const double p1[4][4] = {
      {0.8, 0.2, 0.0, 0.0}, {0.4, 0.0, 0.6, 0.0}, {0.0, 0.8, 0.2, 0.0}, {0.1, 0.7, 0.2, 0.0}};
  const double r0[4] = {0.6, 0.0, 0.5, -0.3};
  const double r1[4] = {0.1, -0.3, -0.2, 0.5};

  std::vector<double> transition(4 * 2 * 4);
  std::vector<double> reward(4 * 2);
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t next = 0; next < 4; ++next) {
      transition[(s * 2 + 0) * 4 + next] = p0[s][next];
      transition[(s * 2 + 1) * 4 + next] = p1[s][next];
    }
    reward[s * 2 + 0] = (1.0 - gamma) * r0[s];
    reward[s * 2 + 1] = (1.0 - gamma) * r1[s];
  }
  const std::size_t obs_map[4] = {0, 1, 1, 0};
  const double rho[4] = {0.3, 0.0, 0.2, 0.5};
  return make_factored_model(4, 2, 2, transition, obs_map, reward, gamma, rho);
}

}  // namespace rasql
