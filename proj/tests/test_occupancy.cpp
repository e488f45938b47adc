#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "rasql/agent_state.hpp"
#include "rasql/occupancy.hpp"
#include "rasql/policy.hpp"
#include "rasql/pomdp.hpp"

#include "fixtures.hpp"
#include "linear_oracle.hpp"
#include "oracles.hpp"

using namespace rasql;

namespace {

double l1_residual(const StochasticMatrix& T, const std::vector<double>& v) {
  std::vector<double> out(v.size());
  T.left_multiply(v, out);
  return oracle::l1(out, v);
}

StochasticMatrix product(const StochasticMatrix& a, const StochasticMatrix& b) {
  const std::size_t n = a.size();
  StochasticMatrix c(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const double x = a(i, k);
      if (x == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) c(i, j) += x * b(k, j);
    }
  return c;
}

}  // namespace

TEST_CASE("joint_transition: degenerate one-point chain") {
  const auto m = fixtures::scalar_model();
  const auto T = joint_transition(m, make_observation_state(1, 1), Policy::uniform(1, 1));
  REQUIRE(T.size() == 1);
  CHECK(T(0, 0) == 1.0);
}

TEST_CASE("joint_transition: rows of the reference chain are stochastic") {
  const auto T = joint_transition(reference_example_model(), make_observation_state(2, 2),
                                  fixtures::paper_behavior());
  CHECK(T.size() == 4 * 2 * 2 * 2);
  CHECK(T.row_sum_error() <= 1e-12);
}

TEST_CASE("joint_transition: deterministic model and policy give a 0/1 matrix") {
  // s -> s + 1 mod 3 under both actions, y = s, policy always action 1.
  std::vector<double> P(3 * 2 * 3, 0.0);
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t a = 0; a < 2; ++a) P[(s * 2 + a) * 3 + (s + 1) % 3] = 1.0;
  const std::vector<std::size_t> obs{0, 1, 2};
  const std::vector<double> r(6, 0.0), rho{1.0, 0.0, 0.0};
  const auto m = make_factored_model(3, 2, 3, P, obs, r, 0.5, rho);
  const auto T = joint_transition(m, make_observation_state(3, 2), Policy(3, 2, {0, 1, 0, 1, 0, 1}));
  for (std::size_t i = 0; i < T.size(); ++i) {
    int ones = 0;
    for (std::size_t j = 0; j < T.size(); ++j) {
      REQUIRE((T(i, j) == 0.0 || T(i, j) == 1.0));
      ones += T(i, j) == 1.0;
    }
    CHECK(ones == 1);
  }
}

TEST_CASE("joint_transition: entries follow the defining product") {
  const auto m = reference_example_model();
  const auto asm_ = make_sliding_window(2, 2, 2, false);
  std::mt19937_64 gen(4);
  const auto pi = fixtures::random_policy(4, 2, gen);
  const auto T = joint_transition(m, asm_, pi);
  const JointDims d{4, 2, 4, 2};
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t y = 0; y < 2; ++y)
      for (std::size_t z = 0; z < 4; ++z)
        for (std::size_t a = 0; a < 2; ++a)
          for (std::size_t s2 = 0; s2 < 4; ++s2)
            for (std::size_t y2 = 0; y2 < 2; ++y2)
              for (std::size_t z2 = 0; z2 < 4; ++z2)
                for (std::size_t a2 = 0; a2 < 2; ++a2) {
                  const double want = m.transition(s, a, s2, y2) *
                                      (asm_.update(z, y2, a) == z2 ? 1.0 : 0.0) * pi(z2, a2);
                  REQUIRE(T(d.index(s, y, z, a), d.index(s2, y2, z2, a2)) == want);
                }
}

TEST_CASE("stationary_distribution: identity chain is non-ergodic") {
  StochasticMatrix I(2);
  I(0, 0) = I(1, 1) = 1.0;
  CHECK_THROWS_AS(stationary_distribution(I), NonErgodicError);
}

TEST_CASE("stationary_distribution: doubly stochastic chain gives uniform") {
  StochasticMatrix T(2);
  T(0, 0) = T(1, 1) = 0.7;
  T(0, 1) = T(1, 0) = 0.3;
  const auto r = stationary_distribution(T);
  CHECK(std::abs(r.dist[0] - 0.5) <= 1e-12);
  CHECK(std::abs(r.dist[1] - 0.5) <= 1e-12);
  CHECK(r.residual <= 1e-12);
}

TEST_CASE("stationary_distribution: periodic chain falls back to the lazy chain") {
  StochasticMatrix T(3);
  T(0, 1) = T(1, 2) = T(2, 0) = 1.0;
  // Start away from uniform: the plain iteration would cycle forever.
  const auto r = stationary_distribution(T);
  for (double x : r.dist) CHECK(std::abs(x - 1.0 / 3) <= 1e-12);
  CHECK(l1_residual(T, r.dist) <= 1e-12);
}

TEST_CASE("stationary_distribution: random dense chains match the linear solve") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 5 + gen() % 30;
    StochasticMatrix T(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += (T(i, j) = U(gen) < 0.3 ? U(gen) : 0.0);
      T(i, (i + 1) % n) += 0.1;
      s += 0.1;
      for (std::size_t j = 0; j < n; ++j) T(i, j) /= s;
    }
    const auto r = stationary_distribution(T);
    const auto x = oracle::stationary_linear_solve(T);
    CHECK(oracle::l1(r.dist, x) <= 1e-10);
    CHECK(l1_residual(T, r.dist) <= 1e-12);
  }
}

TEST_CASE("limiting_distribution: reference chain against the linear-solve oracle") {
  const auto m = reference_example_model();
  const auto asm_ = make_observation_state(2, 2);
  const auto pi = fixtures::paper_behavior();
  const auto zeta = limiting_distribution(m, asm_, pi);
  const auto T = joint_transition(m, asm_, pi);
  CHECK(zeta.residual <= 1e-12);
  CHECK(l1_residual(T, zeta.mass) <= 1e-12);
  // The chain has unreachable (s, y) combinations (y is a function of s),
  // so the oracle solves on the reachable class.
  const auto x = oracle::reachable_stationary(T, {0});
  CHECK(oracle::l1(zeta.mass, x) <= 1e-10);
  for (std::size_t z = 0; z < 2; ++z)
    for (std::size_t a = 0; a < 2; ++a) CHECK(zeta.supported(z, a));
  double total = 0.0;
  for (double v : zeta.mass) {
    CHECK(v >= 0.0);
    total += v;
  }
  CHECK(std::abs(total - 1.0) <= 1e-10);
}

TEST_CASE("limiting_distribution: factorization over the current action") {
  const auto m = reference_example_model();
  const auto asm_ = make_sliding_window(2, 2, 2, true);
  std::mt19937_64 gen(8);
  const auto pi = fixtures::random_policy(asm_.num_agent_states(), 2, gen);
  const auto zeta = limiting_distribution(m, asm_, pi, {}, true);
  const auto& d = zeta.dims;
  for (std::size_t s = 0; s < d.states; ++s)
    for (std::size_t y = 0; y < d.obs; ++y)
      for (std::size_t z = 0; z < d.agent_states; ++z) {
        double syz = 0.0;
        for (std::size_t a = 0; a < d.actions; ++a) syz += zeta(s, y, z, a);
        for (std::size_t a = 0; a < d.actions; ++a)
          CHECK(std::abs(zeta(s, y, z, a) - syz * pi(z, a)) <= 1e-8);
      }
}

TEST_CASE("limiting_distribution: deterministic behavior leaves pairs unvisited") {
  const auto m = reference_example_model();
  const auto asm_ = make_observation_state(2, 2);
  const Policy always0(2, 2, {1.0, 0.0, 1.0, 0.0});
  try {
    limiting_distribution(m, asm_, always0);
    FAIL("expected ZeroVisitError");
  } catch (const ZeroVisitError& e) {
    CHECK(e.pairs().size() == 2);
    for (const auto& [z, a] : e.pairs()) CHECK(a == 1);
  }
  const auto partial = limiting_distribution(m, asm_, always0, {}, true);
  CHECK(partial.partial);
  CHECK(partial.supported(0, 0));
  CHECK_FALSE(partial.supported(0, 1));
}

TEST_CASE("periodic_stationary: L = 1 reduces to the stationary solve") {
  const auto m = reference_example_model();
  const auto asm_ = make_observation_state(2, 2);
  const auto pi = fixtures::paper_behavior();
  const auto one = periodic_stationary(m, asm_, PeriodicPolicy({pi}));
  const auto st = limiting_distribution(m, asm_, pi);
  REQUIRE(one.size() == 1);
  CHECK(one[0].mass == st.mass);
}

TEST_CASE("periodic_stationary: identical phases give identical distributions") {
  const auto m = reference_example_model();
  const auto asm_ = make_observation_state(2, 2);
  const auto pi = fixtures::paper_behavior();
  const auto z = periodic_stationary(m, asm_, PeriodicPolicy({pi, pi, pi}));
  for (std::size_t l = 1; l < 3; ++l) CHECK(oracle::l1(z[0].mass, z[l].mass) <= 1e-11);
}

TEST_CASE("periodic_stationary: reference L = 2 against the skeleton oracle") {
  const auto m = reference_example_model();
  const auto asm_ = make_observation_state(2, 2);
  const auto pp = fixtures::paper_periodic_behavior();
  const auto z = periodic_stationary(m, asm_, pp);
  REQUIRE(z.size() == 2);
  // T^l moves phase l to phase l+1, so its next action comes from phase l+1.
  const auto T0 = joint_transition(m, asm_, pp.phase(1));
  const auto T1 = joint_transition(m, asm_, pp.phase(0));
  const auto x0 = oracle::reachable_stationary(product(T0, T1), {0, 1});
  CHECK(oracle::l1(z[0].mass, x0) <= 1e-10);
  std::vector<double> x1(x0.size());
  T0.left_multiply(x0, x1);
  CHECK(oracle::l1(z[1].mass, x1) <= 1e-10);
  for (std::size_t l = 0; l < 2; ++l)
    for (std::size_t zz = 0; zz < 2; ++zz)
      for (std::size_t a = 0; a < 2; ++a) CHECK(z[l].supported(zz, a));
}

TEST_CASE("periodic_stationary: empirical phase-indexed frequencies") {
  const auto m = reference_example_model();
  const auto asm_ = make_observation_state(2, 2);
  const auto pp = fixtures::paper_periodic_behavior();
  const auto z = periodic_stationary(m, asm_, pp);
  const auto f = oracle::simulated_phase_frequencies(m, asm_, pp.phases(), 20'000'000, 31);
  for (std::size_t l = 0; l < 2; ++l) CHECK(oracle::l1(z[l].mass, f[l]) <= 1e-3);
}

TEST_CASE("conditional_s_given_z: point mass, product, and reference identity") {
  // Point mass: all mass on (s=1, y=0, z=0, a=0) of a 2x1x1x1 space.
  JointDistribution pm;
  pm.dims = {2, 1, 1, 1};
  pm.mass = {0.0, 1.0};
  pm.support = {true};
  const auto c = conditional_s_given_z(pm);
  CHECK(c == std::vector<double>{0.0, 1.0});

  // Product mu(s) nu(z) pi(a).
  JointDistribution pr;
  pr.dims = {3, 1, 2, 2};
  const double mu[] = {0.2, 0.5, 0.3}, nu[] = {0.4, 0.6}, act[] = {0.7, 0.3};
  pr.mass.resize(pr.dims.size());
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t z = 0; z < 2; ++z)
      for (std::size_t a = 0; a < 2; ++a) pr.mass[pr.dims.index(s, 0, z, a)] = mu[s] * nu[z] * act[a];
  pr.support.assign(4, true);
  const auto cp = conditional_s_given_z(pr);
  for (std::size_t z = 0; z < 2; ++z)
    for (std::size_t s = 0; s < 3; ++s) CHECK(std::abs(cp[z * 3 + s] - mu[s]) <= 1e-14);

  const auto zeta = limiting_distribution(reference_example_model(), make_observation_state(2, 2),
                                          fixtures::paper_behavior());
  const auto cz = conditional_s_given_z(zeta);
  for (std::size_t z = 0; z < 2; ++z)
    for (std::size_t a = 0; a < 2; ++a) {
      const double za = zeta.za_mass(z, a);
      for (std::size_t s = 0; s < 4; ++s) {
        double sza = 0.0;
        for (std::size_t y = 0; y < 2; ++y) sza += zeta(s, y, z, a);
        CHECK(std::abs(sza / za - cz[z * 4 + s]) <= 1e-8);
      }
    }
}

TEST_CASE("conditional_s_given_z: z without mass") {
  JointDistribution d;
  d.dims = {1, 1, 2, 1};
  d.mass = {1.0, 0.0};
  d.support = {true, false};
  CHECK_THROWS_AS(conditional_s_given_z(d), ZeroVisitError);
  const auto c = conditional_s_given_z(d, true);
  CHECK(c == std::vector<double>{1.0, 0.0});
}
