#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "rasql/policy.hpp"
#include "rasql/qtable.hpp"
#include "rasql/regularizer.hpp"
#include "rasql/rng.hpp"

#include "conjugate_checks.hpp"
#include "fixtures.hpp"

using namespace rasql;
using doctest::Approx;

TEST_CASE("policy: rows are validated") {
  CHECK_NOTHROW(Policy(2, 2, {0.2, 0.8, 0.8, 0.2}));
  CHECK_THROWS_AS(Policy(2, 2, {0.2, 0.8, 0.8, 0.3}), std::invalid_argument);
  CHECK_THROWS_AS(Policy(1, 2, {1.1, -0.1}), std::invalid_argument);
  CHECK_THROWS_AS(Policy(2, 2, {1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(PeriodicPolicy({}), std::invalid_argument);
  CHECK_THROWS_AS(PeriodicPolicy({Policy::uniform(2, 2), Policy::uniform(3, 2)}),
                  std::invalid_argument);
}

TEST_CASE("sample_action: point mass row") {
  const Policy p(1, 2, {1.0, 0.0});
  RngStream rng(1);
  for (int i = 0; i < 10000; ++i) CHECK(sample_action(p, 0, rng) == 0);
}

TEST_CASE("sample_action: behavior row frequency within 3 sigma") {
  const auto p = fixtures::paper_behavior();
  RngStream rng(77);
  const double N = 1e6;
  double ones = 0.0;
  for (int i = 0; i < 1'000'000; ++i) ones += sample_action(p, 0, rng) == 1 ? 1.0 : 0.0;
  CHECK(std::abs(ones - N * 0.8) <= 3 * std::sqrt(N * 0.8 * 0.2));
}

TEST_CASE("sample_action: chi-square on a three-action row and replay") {
  const Policy p(1, 3, {0.5, 0.3, 0.2});
  RngStream rng(5), again(5);
  std::vector<double> counts(3, 0.0);
  for (int i = 0; i < 1'000'000; ++i) {
    const auto a = sample_action(p, 0, rng);
    counts[a] += 1.0;
    if (i < 1000) REQUIRE(a == sample_action(p, 0, again));
  }
  CHECK(fixtures::chi2_stat(counts, p.probs(), 1e6) < fixtures::chi2_crit_0001(2));
}

TEST_CASE("phase convention: t = 1 is phase 0") {
  const auto pp = fixtures::paper_periodic_behavior();
  CHECK(phase_of(1, 2) == 0);
  CHECK(phase_of(2, 2) == 1);
  CHECK(phase_of(3, 2) == 0);
  CHECK(&phase_policy(pp, 1) == &pp.phase(0));
  CHECK(&phase_policy(pp, 2) == &pp.phase(1));
  CHECK(&phase_policy(pp, 3) == &pp.phase(0));
  const PeriodicPolicy one({fixtures::paper_behavior()});
  for (std::uint64_t t = 1; t < 20; ++t) CHECK(&phase_policy(one, t) == &one.phase(0));
  CHECK_THROWS(phase_of(0, 2));
}

TEST_CASE("greedy_policy examples") {
  EntropyRegularizer e1(1.0), e100(100.0);
  const auto g0 = greedy_policy(QTable(3, 2), e1);
  for (std::size_t z = 0; z < 3; ++z) {
    CHECK(g0(z, 0) == Approx(0.5));
    CHECK(g0(z, 1) == Approx(0.5));
  }
  const QTable q(1, 2, std::vector<double>{1.0, 0.0});
  const auto g1 = greedy_policy(q, e1);
  CHECK(g1(0, 0) == Approx(0.73106).epsilon(1e-5));
  CHECK(g1(0, 1) == Approx(0.26894).epsilon(1e-5));
  const auto g2 = greedy_policy(q, e100);
  CHECK(g2(0, 1) > 0.0);
  CHECK(g2(0, 1) < 1e-40);
  CHECK(1.0 - g2(0, 0) < 1e-15);
}

TEST_CASE("greedy_policy rows beat sampled simplex points") {
  std::mt19937_64 gen(9);
  EntropyRegularizer e(1.5);
  KlRegularizer k(0.7, {0.2, 0.5, 0.3});
  for (const Regularizer* r : {static_cast<const Regularizer*>(&e), static_cast<const Regularizer*>(&k)}) {
    QTable q(5, 3, checks::random_vector(gen, 15, -5.0, 5.0));
    const auto g = greedy_policy(q, *r);
    for (std::size_t z = 0; z < 5; ++z) {
      const std::vector<double> row(g.row(z).begin(), g.row(z).end());
      const std::vector<double> qz(q.row(z).begin(), q.row(z).end());
      const double best = checks::dot(row, qz) - r->omega(row);
      for (int i = 0; i < 2000; ++i) {
        const auto xi = checks::random_simplex(gen, 3);
        REQUIRE(checks::dot(xi, qz) - r->omega(xi) <= best + 1e-10);
      }
    }
  }
}

TEST_CASE("qtable: sup norm and distance") {
  QTable a(2, 2, std::vector<double>{1.0, -3.0, 2.0, 0.5});
  QTable b(2, 2, 0.0);
  CHECK(a.sup_norm() == 3.0);
  CHECK(sup_distance(a, b) == 3.0);
  std::vector<QTable> x{a, b}, y{b, b};
  CHECK(sup_distance(std::span<const QTable>(x), std::span<const QTable>(y)) == 3.0);
  CHECK_THROWS(sup_distance(a, QTable(1, 2)));
}
