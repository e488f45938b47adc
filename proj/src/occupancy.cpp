#include "rasql/occupancy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rasql {

void StochasticMatrix::left_multiply(std::span<const double> v, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const double weight = v[i];
    if (weight == 0.0) continue;
    const double* r = data_.data() + i * n_;
    for (std::size_t j = 0; j < n_; ++j) out[j] += weight * r[j];
  }
}

double StochasticMatrix::row_sum_error() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double total = 0.0;
    for (double v : row(i)) total += v;
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return worst;
}

StochasticMatrix joint_transition(const PomdpModel& model, const AgentStateMachine& machine,
                                  const Policy& next_policy) {
  if (machine.num_obs() != model.num_obs || machine.num_actions() != model.num_actions)
    throw std::invalid_argument("joint_transition: agent state machine does not match the model");
  if (next_policy.num_states() != machine.num_agent_states() ||
      next_policy.num_actions() != model.num_actions)
    throw std::invalid_argument("joint_transition: policy shape does not match Z x A");

  const JointDims dims{model.num_states, model.num_obs, machine.num_agent_states(),
                       model.num_actions};
  StochasticMatrix T(dims.size());
  for (std::size_t s = 0; s < dims.states; ++s)
    for (std::size_t z = 0; z < dims.agent_states; ++z)
      for (std::size_t a = 0; a < dims.actions; ++a) {
        for (std::size_t y = 0; y < dims.obs; ++y) {
          const std::size_t from = dims.index(s, y, z, a);
          for (std::size_t ns = 0; ns < dims.states; ++ns)
            for (std::size_t ny = 0; ny < dims.obs; ++ny) {
              const double p = model.transition(s, a, ns, ny);
              if (p == 0.0) continue;
              const std::size_t nz = machine.update(z, ny, a);
              for (std::size_t na = 0; na < dims.actions; ++na) {
                const double pa = next_policy(nz, na);
                if (pa != 0.0) T(from, dims.index(ns, ny, nz, na)) += p * pa;
              }
            }
        }
      }
  return T;
}

namespace {

double l1_distance(std::span<const double> a, std::span<const double> b) {
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
  return total;
}

void normalize(std::span<double> v) {
  double total = 0.0;
  for (double x : v) total += x;
  for (double& x : v) x /= total;
}

StationaryResult power_iterate(const ChainStep& step, std::vector<double> v,
                               const StationaryOptions& opts) {
  const std::size_t n = v.size();
  normalize(v);
  std::vector<double> next(n);
  StationaryResult result;
  double checkpoint = std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  std::size_t stalled = 0;
  constexpr std::size_t kCheckEvery = 1024;
  constexpr std::size_t kStallLimit = 64;

  while (result.sweeps < opts.max_iter) {
    step(v, next);
    if (result.used_averaging)
      for (std::size_t i = 0; i < n; ++i) next[i] = 0.5 * (next[i] + v[i]);
    normalize(next);
    const double change = l1_distance(next, v);
    v.swap(next);
    ++result.sweeps;

    if (change <= opts.tol * 1e-3) break;
    if (change <= opts.tol) {
      if (change < best) {
        best = change;
        stalled = 0;
      } else if (++stalled >= kStallLimit) {
        break;  // at the floating-point floor
      }
    }
    if (!result.used_averaging) {
      if (result.sweeps % kCheckEvery == 0) {
        // an oscillating (periodic) chain never halves its step size
        if (change > 0.5 * checkpoint) result.used_averaging = true;
        checkpoint = change;
      }
      if (result.sweeps >= opts.max_iter / 2) result.used_averaging = true;
    }
  }

  step(v, next);
  result.residual = l1_distance(next, v);
  result.dist = std::move(v);
  if (!(result.residual <= opts.tol)) {
    std::ostringstream os;
    os << "stationary distribution: power iteration did not converge (residual "
       << result.residual << " after " << result.sweeps << " sweeps)";
    throw NonErgodicError(os.str());
  }
  return result;
}

}  // namespace

StationaryResult stationary_distribution(const ChainStep& step, std::size_t n,
                                         const StationaryOptions& opts) {
  if (n == 0) throw std::invalid_argument("stationary_distribution: empty chain");
  auto primary = power_iterate(step, std::vector<double>(n, 1.0), opts);

  RngStream rng(opts.restart_seed);
  for (std::size_t r = 0; r < opts.restarts; ++r) {
    std::vector<double> start(n);
    for (double& x : start) x = rng.uniform() + 1e-3;
    const auto other = power_iterate(step, std::move(start), opts);
    const double gap = l1_distance(primary.dist, other.dist);
    if (gap > 10.0 * opts.tol) {
      std::ostringstream os;
      os << "stationary distribution: restart " << r << " converged to a different distribution (l1 gap "
         << gap << "); the behavior chain has no unique limit";
      throw NonErgodicError(os.str());
    }
  }
  return primary;
}

StationaryResult stationary_distribution(const StochasticMatrix& T, const StationaryOptions& opts) {
  return stationary_distribution(
      [&T](std::span<const double> v, std::span<double> out) { T.left_multiply(v, out); }, T.size(),
      opts);
}

double JointDistribution::za_mass(std::size_t z, std::size_t a) const {
  double total = 0.0;
  for (std::size_t s = 0; s < dims.states; ++s)
    for (std::size_t y = 0; y < dims.obs; ++y) total += mass[dims.index(s, y, z, a)];
  return total;
}

double JointDistribution::z_mass(std::size_t z) const {
  double total = 0.0;
  for (std::size_t a = 0; a < dims.actions; ++a) total += za_mass(z, a);
  return total;
}

namespace {

JointDistribution make_joint(const JointDims& dims, std::vector<double> mass, double residual,
                             const StationaryOptions& opts) {
  JointDistribution zeta;
  zeta.dims = dims;
  zeta.mass = std::move(mass);
  zeta.residual = residual;
  zeta.support.assign(dims.agent_states * dims.actions, false);
  for (std::size_t z = 0; z < dims.agent_states; ++z)
    for (std::size_t a = 0; a < dims.actions; ++a) {
      const bool visited = zeta.za_mass(z, a) > opts.support_threshold;
      zeta.support[z * dims.actions + a] = visited;
      if (!visited) zeta.partial = true;
    }
  return zeta;
}

void enforce_support(const JointDistribution& zeta, bool allow_partial, const std::string& label) {
  if (!zeta.partial || allow_partial) return;
  std::vector<std::pair<std::size_t, std::size_t>> missing;
  std::ostringstream os;
  os << label << "(z, a) pairs with zero limiting mass:";
  for (std::size_t z = 0; z < zeta.dims.agent_states; ++z)
    for (std::size_t a = 0; a < zeta.dims.actions; ++a)
      if (!zeta.supported(z, a)) {
        missing.emplace_back(z, a);
        os << " (" << z << "," << a << ")";
      }
  os << "; every (z, a) must be visited infinitely often";
  throw ZeroVisitError(os.str(), std::move(missing));
}

JointDims dims_of(const PomdpModel& model, const AgentStateMachine& machine) {
  return {model.num_states, model.num_obs, machine.num_agent_states(), model.num_actions};
}

}  // namespace

JointDistribution limiting_distribution(const PomdpModel& model, const AgentStateMachine& machine,
                                        const Policy& behavior, const StationaryOptions& opts,
                                        bool allow_partial) {
  const auto T = joint_transition(model, machine, behavior);
  auto result = stationary_distribution(T, opts);
  auto zeta = make_joint(dims_of(model, machine), std::move(result.dist), result.residual, opts);
  enforce_support(zeta, allow_partial, "");
  return zeta;
}

std::vector<JointDistribution> periodic_stationary(const PomdpModel& model,
                                                   const AgentStateMachine& machine,
                                                   const PeriodicPolicy& behavior,
                                                   const StationaryOptions& opts,
                                                   bool allow_partial) {
  const std::size_t L = behavior.period();
  std::vector<StochasticMatrix> steps;
  steps.reserve(L);
  for (std::size_t l = 0; l < L; ++l)
    steps.push_back(joint_transition(model, machine, behavior.phase((l + 1) % L)));
  const JointDims dims = dims_of(model, machine);
  const std::size_t n = dims.size();

  // L-step skeleton starting at phase `first`
  auto skeleton = [&](std::size_t first) {
    return [&steps, first, L, n](std::span<const double> v, std::span<double> out) {
      std::vector<double> cur(v.begin(), v.end());
      for (std::size_t k = 0; k < L; ++k) {
        steps[(first + k) % L].left_multiply(cur, out);
        cur.assign(out.begin(), out.end());
      }
    };
  };

  StationaryResult base;
  try {
    base = stationary_distribution(skeleton(0), n, opts);
  } catch (const NonErgodicError& e) {
    throw NonErgodicError(std::string("phase 0 skeleton: ") + e.what());
  }

  std::vector<JointDistribution> out;
  std::vector<double> current = std::move(base.dist);
  std::vector<double> scratch(n);
  for (std::size_t l = 0; l < L; ++l) {
    skeleton(l)(current, scratch);
    const double residual = l1_distance(scratch, current);
    if (!(residual <= opts.tol)) {
      std::ostringstream os;
      os << "phase " << l << " skeleton residual " << residual << " exceeds tolerance";
      throw NonErgodicError(os.str());
    }
    out.push_back(make_joint(dims, current, residual, opts));
    enforce_support(out.back(), allow_partial, "phase " + std::to_string(l) + ": ");
    steps[l].left_multiply(current, scratch);
    normalize(scratch);
    current = scratch;
  }
  return out;
}

std::vector<double> conditional_s_given_z(const JointDistribution& zeta, bool allow_partial) {
  const auto& d = zeta.dims;
  std::vector<double> sz(d.agent_states * d.states, 0.0);   // zeta(s, z), stored (z, s)
  std::vector<double> sza(d.agent_states * d.actions * d.states, 0.0);  // zeta(s, z, a)
  for (std::size_t s = 0; s < d.states; ++s)
    for (std::size_t y = 0; y < d.obs; ++y)
      for (std::size_t z = 0; z < d.agent_states; ++z)
        for (std::size_t a = 0; a < d.actions; ++a) {
          const double m = zeta(s, y, z, a);
          sz[z * d.states + s] += m;
          sza[(z * d.actions + a) * d.states + s] += m;
        }

  std::vector<std::pair<std::size_t, std::size_t>> missing;
  for (std::size_t z = 0; z < d.agent_states; ++z) {
    double total = 0.0;
    for (std::size_t s = 0; s < d.states; ++s) total += sz[z * d.states + s];
    bool any_supported = false;
    for (std::size_t a = 0; a < d.actions; ++a) any_supported = any_supported || zeta.supported(z, a);
    if (!any_supported || !(total > 0.0)) {
      for (std::size_t s = 0; s < d.states; ++s) sz[z * d.states + s] = 0.0;
      for (std::size_t a = 0; a < d.actions; ++a) missing.emplace_back(z, a);
      continue;
    }
    for (std::size_t s = 0; s < d.states; ++s) sz[z * d.states + s] /= total;

    for (std::size_t a = 0; a < d.actions; ++a) {
      if (!zeta.supported(z, a)) continue;
      double za = 0.0;
      for (std::size_t s = 0; s < d.states; ++s) za += sza[(z * d.actions + a) * d.states + s];
      for (std::size_t s = 0; s < d.states; ++s) {
        const double given_za = sza[(z * d.actions + a) * d.states + s] / za;
        if (std::abs(given_za - sz[z * d.states + s]) > 1e-8) {
          std::ostringstream os;
          os << "conditional_s_given_z: zeta(s|z,a) != zeta(s|z) at s=" << s << " z=" << z
             << " a=" << a;
          throw std::logic_error(os.str());
        }
      }
    }
  }
  if (!missing.empty() && !allow_partial) {
    std::ostringstream os;
    os << "conditional_s_given_z: agent states with zero limiting mass:";
    for (std::size_t i = 0; i < missing.size(); i += d.actions) os << " " << missing[i].first;
    throw ZeroVisitError(os.str(), std::move(missing));
  }
  return sz;
}

}  // namespace rasql
