#pragma once
// Reference computations used only by tests. None of these call into the
// library's solvers; they are written as plainly as possible so that a
// disagreement points at the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "rasql/agent_state.hpp"
#include "rasql/occupancy.hpp"
#include "rasql/policy.hpp"
#include "rasql/pomdp.hpp"

namespace oracle {

// Long-run frequencies of (s, y, z, a) from one simulated trajectory, split
// by phase (t - 1) mod L. Each phase's counts are normalized separately.
inline std::vector<std::vector<double>> simulated_phase_frequencies(
    const rasql::PomdpModel& m, const rasql::AgentStateMachine& asm_,
    const std::vector<rasql::Policy>& phases, std::size_t steps, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto draw = [&](auto&& prob, std::size_t n) {
    const double u = U(gen);
    double c = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = prob(i);
      if (p <= 0.0) continue;
      last = i;
      c += p;
      if (u < c) return i;
    }
    return last;
  };
  const std::size_t S = m.num_states, Y = m.num_obs, Z = asm_.num_agent_states(),
                    A = m.num_actions, L = phases.size();
  std::size_t s = draw([&](std::size_t i) { return m.init_dist[i]; }, S);
  std::size_t y = draw([&](std::size_t i) { return m.init_obs[s * Y + i]; }, Y);
  std::size_t z = asm_.initial(y);
  std::size_t a = draw([&](std::size_t i) { return phases[0](z, i); }, A);
  std::vector<std::vector<double>> counts(L, std::vector<double>(S * Y * Z * A, 0.0));
  std::vector<double> totals(L, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    counts[t % L][((s * Y + y) * Z + z) * A + a] += 1.0;
    totals[t % L] += 1.0;
    const std::size_t j = draw(
        [&](std::size_t k) { return m.transition(s, a, k / Y, k % Y); }, S * Y);
    const std::size_t ns = j / Y, ny = j % Y;
    z = asm_.update(z, ny, a);
    s = ns;
    y = ny;
    const auto& pi = phases[(t + 1) % L];
    a = draw([&](std::size_t i) { return pi(z, i); }, A);
  }
  for (std::size_t l = 0; l < L; ++l)
    for (auto& c : counts[l]) c /= totals[l];
  return counts;
}

inline std::vector<double> simulated_frequencies(const rasql::PomdpModel& m,
                                                 const rasql::AgentStateMachine& asm_,
                                                 const rasql::Policy& pi, std::size_t steps,
                                                 std::uint64_t seed) {
  return simulated_phase_frequencies(m, asm_, {pi}, steps, seed)[0];
}

inline double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

// (1/beta) log sum exp(beta q), computed by the textbook max-shift.
inline double soft_max(const double* q, std::size_t n, double beta) {
  double mx = q[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, q[i]);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(beta * (q[i] - mx));
  return mx + std::log(s) / beta;
}

// Plain MDP given as P[s][a][s'] and r[s][a] (flattened row-major).
struct Mdp {
  std::size_t S = 0, A = 0;
  std::vector<double> P;  // (s, a, s')
  std::vector<double> r;  // (s, a)
  double gamma = 0.0;
};

// Soft value iteration with entropy 1/beta, or the hard max when beta == 0,
// run for a fixed, generous number of sweeps.
inline std::vector<double> soft_value_iteration(const Mdp& m, double beta,
                                                std::size_t sweeps = 0) {
  if (sweeps == 0)
    sweeps = static_cast<std::size_t>(std::ceil(std::log(1e-16) / std::log(m.gamma))) + 200;
  std::vector<double> q(m.S * m.A, 0.0), v(m.S), nq(m.S * m.A);
  for (std::size_t it = 0; it < sweeps; ++it) {
    for (std::size_t s = 0; s < m.S; ++s) {
      if (beta > 0.0) {
        v[s] = soft_max(&q[s * m.A], m.A, beta);
      } else {
        v[s] = *std::max_element(q.begin() + s * m.A, q.begin() + (s + 1) * m.A);
      }
    }
    for (std::size_t s = 0; s < m.S; ++s)
      for (std::size_t a = 0; a < m.A; ++a) {
        double e = 0.0;
        for (std::size_t n = 0; n < m.S; ++n) e += m.P[(s * m.A + a) * m.S + n] * v[n];
        nq[s * m.A + a] = m.r[s * m.A + a] + m.gamma * e;
      }
    q.swap(nq);
  }
  return q;
}

// Periodic soft fixed point: Q^l = r^l + gamma P^l V(Q^{l+1}), by repeated
// backward passes over the cycle.
inline std::vector<std::vector<double>> periodic_soft_value_iteration(const std::vector<Mdp>& ms,
                                                                      double beta) {
  const std::size_t L = ms.size();
  const auto& m0 = ms[0];
  std::vector<std::vector<double>> q(L, std::vector<double>(m0.S * m0.A, 0.0));
  const std::size_t rounds =
      static_cast<std::size_t>(std::ceil(std::log(1e-16) / std::log(m0.gamma))) + 200;
  for (std::size_t it = 0; it < rounds; ++it) {
    for (std::size_t back = 0; back < L; ++back) {
      const std::size_t l = L - 1 - back;
      const auto& m = ms[l];
      const auto& nxt = q[(l + 1) % L];
      std::vector<double> v(m.S);
      for (std::size_t s = 0; s < m.S; ++s) v[s] = soft_max(&nxt[s * m.A], m.A, beta);
      for (std::size_t s = 0; s < m.S; ++s)
        for (std::size_t a = 0; a < m.A; ++a) {
          double e = 0.0;
          for (std::size_t n = 0; n < m.S; ++n) e += m.P[(s * m.A + a) * m.S + n] * v[n];
          q[l][s * m.A + a] = m.r[s * m.A + a] + m.gamma * e;
        }
    }
  }
  return q;
}

// Induced MDP straight from the defining sums over a joint distribution
// zeta(s, y, z, a) (indexing as rasql::JointDims).
inline Mdp induced_from_zeta(const rasql::PomdpModel& m, const rasql::AgentStateMachine& asm_,
                             const std::vector<double>& zeta) {
  const std::size_t S = m.num_states, Y = m.num_obs, Z = asm_.num_agent_states(),
                    A = m.num_actions;
  std::vector<double> zs(Z * S, 0.0), zm(Z, 0.0);
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t y = 0; y < Y; ++y)
      for (std::size_t z = 0; z < Z; ++z)
        for (std::size_t a = 0; a < A; ++a) {
          const double p = zeta[((s * Y + y) * Z + z) * A + a];
          zs[z * S + s] += p;
          zm[z] += p;
        }
  Mdp out;
  out.S = Z;
  out.A = A;
  out.gamma = m.discount;
  out.P.assign(Z * A * Z, 0.0);
  out.r.assign(Z * A, 0.0);
  for (std::size_t z = 0; z < Z; ++z) {
    if (zm[z] <= 0.0) continue;
    for (std::size_t a = 0; a < A; ++a)
      for (std::size_t s = 0; s < S; ++s) {
        const double w = zs[z * S + s] / zm[z];
        out.r[z * A + a] += w * m.r(s, a);
        for (std::size_t ns = 0; ns < S; ++ns)
          for (std::size_t y = 0; y < Y; ++y)
            out.P[(z * A + a) * Z + asm_.update(z, y, a)] += w * m.transition(s, a, ns, y);
      }
  }
  return out;
}

}  // namespace oracle
