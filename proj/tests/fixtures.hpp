#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "rasql/agent_state.hpp"
#include "rasql/policy.hpp"
#include "rasql/pomdp.hpp"

#include "oracles.hpp"

namespace fixtures {

// |S| = |Y| = |A| = 1, r = 1.
inline rasql::PomdpModel scalar_model(double gamma = 0.9, double reward = 1.0) {
  const std::vector<double> P{1.0}, r{reward}, rho{1.0};
  const std::vector<std::size_t> obs{0};
  return rasql::make_factored_model(1, 1, 1, P, obs, r, gamma, rho);
}

inline rasql::Policy paper_behavior() { return rasql::Policy(2, 2, {0.2, 0.8, 0.8, 0.2}); }

inline rasql::PeriodicPolicy paper_periodic_behavior() {
  return rasql::PeriodicPolicy(
      {rasql::Policy(2, 2, {0.2, 0.8, 0.8, 0.2}), rasql::Policy(2, 2, {0.8, 0.2, 0.2, 0.8})});
}

// A dense random MDP with strictly positive transitions.
inline oracle::Mdp random_mdp(std::size_t S, std::size_t A, double gamma, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> U(0.05, 1.0), R(-1.0, 1.0);
  oracle::Mdp m;
  m.S = S;
  m.A = A;
  m.gamma = gamma;
  m.P.resize(S * A * S);
  m.r.resize(S * A);
  for (std::size_t sa = 0; sa < S * A; ++sa) {
    double t = 0.0;
    for (std::size_t n = 0; n < S; ++n) t += (m.P[sa * S + n] = U(gen));
    for (std::size_t n = 0; n < S; ++n) m.P[sa * S + n] /= t;
    m.r[sa] = R(gen);
  }
  return m;
}

// The MDP wrapped as a POMDP with y = s (observations reveal the state).
inline rasql::PomdpModel fully_observed(const oracle::Mdp& m) {
  std::vector<std::size_t> obs(m.S);
  for (std::size_t s = 0; s < m.S; ++s) obs[s] = s;
  std::vector<double> rho(m.S, 1.0 / static_cast<double>(m.S));
  return rasql::make_factored_model(m.S, m.A, m.S, m.P, obs, m.r, m.gamma, rho);
}

inline rasql::Policy random_policy(std::size_t Z, std::size_t A, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> U(0.05, 1.0);
  std::vector<double> p(Z * A);
  for (std::size_t z = 0; z < Z; ++z) {
    double t = 0.0;
    for (std::size_t a = 0; a < A; ++a) t += (p[z * A + a] = U(gen));
    for (std::size_t a = 0; a < A; ++a) p[z * A + a] /= t;
  }
  return rasql::Policy(Z, A, std::move(p));
}

// Upper chi-square quantiles at alpha = 0.001.
inline double chi2_crit_0001(std::size_t df) {
  static const double table[] = {0.0,    10.828, 13.816, 16.266, 18.467, 20.515,
                                 22.458, 24.322, 26.124, 27.877, 29.588, 31.264};
  return table[df];
}

template <class Counts, class Probs>
double chi2_stat(const Counts& counts, const Probs& probs, double n) {
  double x = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    const double e = n * probs[i];
    x += (counts[i] - e) * (counts[i] - e) / e;
  }
  return x;
}

}  // namespace fixtures
