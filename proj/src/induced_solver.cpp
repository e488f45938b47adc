#include "rasql/induced_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "rasql/rng.hpp"

namespace rasql {

InducedMdp build_induced_mdp(const PomdpModel& model, const AgentStateMachine& machine,
                             const JointDistribution& zeta, bool allow_partial) {
  const auto& d = zeta.dims;
  if (d.states != model.num_states || d.obs != model.num_obs ||
      d.agent_states != machine.num_agent_states() || d.actions != model.num_actions)
    throw std::invalid_argument("build_induced_mdp: distribution shape does not match model");
  if (zeta.partial && !allow_partial)
    throw ZeroVisitError("build_induced_mdp: distribution leaves some (z, a) unvisited", {});

  const auto cond = conditional_s_given_z(zeta, allow_partial);
  const std::size_t Z = d.agent_states, A = d.actions, S = d.states, Y = d.obs;

  InducedMdp mdp;
  mdp.num_states = Z;
  mdp.num_actions = A;
  mdp.discount = model.discount;
  mdp.reward.assign(Z * A, 0.0);
  mdp.transition.assign(Z * A * Z, 0.0);
  mdp.supported = zeta.support;
  mdp.partial = zeta.partial;

  for (std::size_t z = 0; z < Z; ++z)
    for (std::size_t a = 0; a < A; ++a) {
      auto* row = mdp.transition.data() + (z * A + a) * Z;
      if (!zeta.supported(z, a)) {
        row[z] = 1.0;
        continue;
      }
      double reward = 0.0;
      for (std::size_t s = 0; s < S; ++s) {
        const double w = cond[z * S + s];
        if (w == 0.0) continue;
        reward += model.r(s, a) * w;
        for (std::size_t y = 0; y < Y; ++y) {
          const double py = model.obs_prob(s, a, y);
          if (py != 0.0) row[machine.update(z, y, a)] += py * w;
        }
      }
      mdp.reward[z * A + a] = reward;
      double total = 0.0;
      for (std::size_t next = 0; next < Z; ++next) total += row[next];
      if (std::abs(total - 1.0) > 1e-10) {
        std::ostringstream os;
        os << "build_induced_mdp: row (" << z << "," << a << ") sums to " << total;
        throw std::logic_error(os.str());
      }
    }
  return mdp;
}

std::vector<InducedMdp> build_periodic_induced(const PomdpModel& model,
                                               const AgentStateMachine& machine,
                                               std::span<const JointDistribution> zetas,
                                               bool allow_partial) {
  std::vector<InducedMdp> out;
  out.reserve(zetas.size());
  for (const auto& zeta : zetas) out.push_back(build_induced_mdp(model, machine, zeta, allow_partial));
  return out;
}

namespace {

template <typename Conjugate>
QTable apply_operator(const QTable& q, const InducedMdp& mdp, Conjugate conjugate) {
  if (q.num_states() != mdp.num_states || q.num_actions() != mdp.num_actions)
    throw std::invalid_argument("bellman_apply: Q-table shape does not match the MDP");
  std::vector<double> values(mdp.num_states);
  for (std::size_t z = 0; z < mdp.num_states; ++z) values[z] = conjugate(q.row(z));
  QTable out(mdp.num_states, mdp.num_actions);
  for (std::size_t z = 0; z < mdp.num_states; ++z)
    for (std::size_t a = 0; a < mdp.num_actions; ++a) {
      if (!mdp.is_supported(z, a)) continue;
      double expected = 0.0;
      const auto row = mdp.row(z, a);
      for (std::size_t next = 0; next < mdp.num_states; ++next) expected += row[next] * values[next];
      out(z, a) = mdp.r(z, a) + mdp.discount * expected;
    }
  return out;
}

template <typename Apply>
QTable iterate_to_fixed_point(QTable q, Apply apply, double gamma, const SolveOptions& opts) {
  // Once the residual is within tol, keep going until it is within
  // tol (1 - gamma), which puts Q within tol of the fixed point, or until
  // rounding stops it from shrinking.
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t sweep = 0; sweep < opts.max_iter; ++sweep) {
    QTable next = apply(q);
    const double residual = sup_distance(next, q);
    if (residual <= opts.tol && residual >= previous) return q;
    q = std::move(next);
    if (residual <= opts.tol * (1.0 - gamma)) return q;
    previous = residual;
  }
  std::ostringstream os;
  os << "fixed point solver: no convergence to " << opts.tol << " within " << opts.max_iter
     << " sweeps";
  throw std::runtime_error(os.str());
}

}  // namespace

QTable bellman_apply(const QTable& q, const InducedMdp& mdp, const Regularizer& reg) {
  return apply_operator(q, mdp, [&reg](std::span<const double> row) { return reg.conjugate(row); });
}

QTable bellman_apply_max(const QTable& q, const InducedMdp& mdp) {
  return apply_operator(q, mdp, [](std::span<const double> row) { return hard_max(row); });
}

QTable composed_apply(const QTable& q, std::span<const InducedMdp> mdps, const Regularizer& reg,
                      std::size_t first_phase) {
  const std::size_t L = mdps.size();
  QTable cur = q;
  for (std::size_t k = L; k-- > 0;) cur = bellman_apply(cur, mdps[(first_phase + k) % L], reg);
  return cur;
}

std::size_t fixed_point_sweep_bound(const InducedMdp& mdp, const Regularizer& reg, double tol) {
  const double gamma = mdp.discount;
  if (gamma == 0.0) return 2;
  // ||Q_{k+1} - Q_k|| <= gamma^k ||B 0||
  const double first_step = bellman_apply(QTable(mdp.num_states, mdp.num_actions), mdp, reg).sup_norm();
  if (first_step <= tol * (1.0 - gamma)) return 2;
  const double k = std::log(tol * (1.0 - gamma) / first_step) / std::log(gamma);
  return static_cast<std::size_t>(std::ceil(k)) + 2;
}

QTable solve_fixed_point(const InducedMdp& mdp, const Regularizer& reg, const SolveOptions& opts) {
  return solve_fixed_point(mdp, reg, opts, QTable(mdp.num_states, mdp.num_actions));
}

QTable solve_fixed_point(const InducedMdp& mdp, const Regularizer& reg, const SolveOptions& opts,
                         const QTable& init) {
  return iterate_to_fixed_point(
      init, [&](const QTable& q) { return bellman_apply(q, mdp, reg); }, mdp.discount, opts);
}

QTable solve_unregularized_fixed_point(const InducedMdp& mdp, const SolveOptions& opts) {
  return iterate_to_fixed_point(
      QTable(mdp.num_states, mdp.num_actions),
      [&](const QTable& q) { return bellman_apply_max(q, mdp); }, mdp.discount, opts);
}

std::vector<QTable> solve_periodic_fixed_point(std::span<const InducedMdp> mdps,
                                               const Regularizer& reg, const SolveOptions& opts) {
  const std::size_t L = mdps.size();
  if (L == 0) throw std::invalid_argument("solve_periodic_fixed_point: period must be at least 1");
  for (const auto& m : mdps)
    if (m.num_states != mdps[0].num_states || m.num_actions != mdps[0].num_actions)
      throw std::invalid_argument("solve_periodic_fixed_point: phase MDPs differ in shape");

  std::vector<QTable> q(L, QTable(mdps[0].num_states, mdps[0].num_actions));
  const double gamma = mdps[0].discount;
  bool converged = false;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t sweep = 0; sweep < opts.max_iter && !converged; ++sweep) {
    std::vector<QTable> next;
    next.reserve(L);
    for (std::size_t l = 0; l < L; ++l) next.push_back(bellman_apply(q[(l + 1) % L], mdps[l], reg));
    const double residual = sup_distance(std::span<const QTable>(next), std::span<const QTable>(q));
    if (residual <= opts.tol && residual >= previous) {
      converged = true;
      break;
    }
    q = std::move(next);
    converged = residual <= opts.tol * (1.0 - gamma);
    previous = residual;
  }
  if (!converged) {
    std::ostringstream os;
    os << "periodic fixed point solver: no convergence within " << opts.max_iter << " sweeps";
    throw std::runtime_error(os.str());
  }

  for (std::size_t l = 0; l < L; ++l) {
    const double residual = sup_distance(composed_apply(q[l], mdps, reg, l), q[l]);
    if (residual > static_cast<double>(L) * opts.tol) {
      std::ostringstream os;
      os << "periodic fixed point solver: phase " << l << " composed-operator residual " << residual;
      throw std::logic_error(os.str());
    }
  }
  return q;
}

double empirical_contraction_factor(const InducedMdp& mdp, const Regularizer& reg,
                                    std::size_t pairs, std::uint64_t seed, double scale) {
  RngStream rng(seed);
  double worst = 0.0;
  auto random_table = [&] {
    QTable q(mdp.num_states, mdp.num_actions);
    for (double& v : q.values()) v = scale * (2.0 * rng.uniform() - 1.0);
    return q;
  };
  for (std::size_t i = 0; i < pairs; ++i) {
    const QTable a = random_table(), b = random_table();
    const double before = sup_distance(a, b);
    if (before == 0.0) continue;
    worst = std::max(worst, sup_distance(bellman_apply(a, mdp, reg), bellman_apply(b, mdp, reg)) / before);
  }
  return worst;
}

}  // namespace rasql
