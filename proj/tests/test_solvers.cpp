#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "graphmatch/brute_force.hpp"
#include "graphmatch/linear_assignment.hpp"
#include "graphmatch/sinkhorn.hpp"
#include "test_util.hpp"

using namespace graphmatch;

TEST_CASE("linear assignment picks the identity on an identity score matrix") {
  const Matching y = linear_assignment(MatrixD::identity(3));
  CHECK(y.assign == BinaryMatrix::identity(3));
  CHECK(assignment_score(MatrixD::identity(3), y) == 3.0);
}

TEST_CASE("linear assignment follows dominant entries") {
  MatrixD c(3, 3, 0.0);
  c(0, 2) = 10.0;
  c(1, 0) = 10.0;
  c(2, 1) = 10.0;
  const auto targets = linear_assignment(c).row_targets();
  CHECK(targets == std::vector<int>{2, 0, 1});
}

TEST_CASE("linear assignment matches exhaustive enumeration on random instances") {
  RandomStream rng(301);
  for (int rep = 0; rep < 100; ++rep) {
    MatrixD c(5, 6, 0.0);
    for (auto& v : c.data()) v = rng.uniform(-5.0, 5.0);
    const Matching y = linear_assignment(c);
    REQUIRE_FALSE(validate_matching(y, 5, 6).has_value());
    CHECK(assignment_score(c, y) == testutil::lap_value_by_enumeration(c));
  }
}

TEST_CASE("linear assignment rejects bad inputs") {
  CHECK_THROWS_AS(linear_assignment(MatrixD(3, 2, 0.0)), std::invalid_argument);
  MatrixD c(2, 2, 0.0);
  c(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(linear_assignment(c), std::invalid_argument);
}

TEST_CASE("shifting every score by a constant does not change the argmax") {
  RandomStream rng(303);
  for (int rep = 0; rep < 20; ++rep) {
    MatrixD c(4, 5, 0.0);
    for (auto& v : c.data()) v = rng.uniform(-1.0, 1.0);
    MatrixD shifted = c;
    const double offset = rng.uniform(-10.0, 10.0);
    for (auto& v : shifted.data()) v += offset;
    CHECK(linear_assignment(c).assign == linear_assignment(shifted).assign);
  }
}

TEST_CASE("brute force QAP degenerates to linear assignment without edge weight") {
  RandomStream rng(305);
  for (int rep = 0; rep < 10; ++rep) {
    const auto g = testutil::random_graph(rng, 4, 2);
    const auto gp = testutil::random_graph(rng, 5, 2);
    MatrixD c(4, 5, 0.0);
    for (auto& v : c.data()) v = rng.uniform(-1.0, 1.0);
    const CompatibilityTables tables{c, 0.0};
    const Matching y = brute_force_qap(tables, g, gp);
    CHECK(assignment_score(c, y) == assignment_score(c, linear_assignment(c)));
  }
}

TEST_CASE("brute force QAP returns the identity for identical graphs with identity unary") {
  RandomStream rng(307);
  const auto g = testutil::random_graph(rng, 5, 2);
  MatrixD c(5, 5, 0.0);
  for (int i = 0; i < 5; ++i) c(i, i) = 100.0;
  const Matching y = brute_force_qap({c, 1.0}, g, g);
  CHECK(y.assign == BinaryMatrix::identity(5));
}

TEST_CASE("brute force QAP dominates random matchings") {
  RandomStream rng(309);
  const auto g = testutil::random_graph(rng, 5, 2);
  const auto gp = testutil::random_graph(rng, 5, 2);
  MatrixD c(5, 5, 0.0);
  for (auto& v : c.data()) v = rng.uniform(-1.0, 1.0);
  const CompatibilityTables tables{c, 0.5};
  const double best = objective_value(tables, g, gp, brute_force_qap(tables, g, gp));
  for (int rep = 0; rep < 1000; ++rep) {
    const Matching y = testutil::random_matching(rng, 5, 5);
    CHECK(objective_value(tables, g, gp, y) <= best);
  }
}

TEST_CASE("brute force QAP breaks ties lexicographically") {
  RandomStream rng(311);
  const auto g = testutil::random_graph(rng, 3, 2);
  const auto gp = testutil::random_graph(rng, 4, 2);
  // All-zero tables: every injection ties, so the first in lexicographic
  // order must win.
  const Matching y = brute_force_qap({MatrixD(3, 4, 0.0), 0.0}, g, gp);
  CHECK(y.row_targets() == std::vector<int>{0, 1, 2});
}

TEST_CASE("brute force QAP refuses oversized instances") {
  RandomStream rng(313);
  const auto g = testutil::random_graph(rng, 9, 2);
  CHECK_THROWS_AS(brute_force_qap({MatrixD(9, 9, 0.0), 0.0}, g, g),
                  std::invalid_argument);
}

TEST_CASE("sinkhorn returns a doubly stochastic input unchanged") {
  MatrixD ds(2, 2, 0.5);
  const DoublyStochasticMatrix out = sinkhorn(ds);
  CHECK(out.m == ds);
  CHECK(out.iterations == 0);
  CHECK(out.deviation == 0.0);
}

TEST_CASE("sinkhorn normalizes the all-ones matrix to uniform") {
  const DoublyStochasticMatrix out = sinkhorn(MatrixD(4, 4, 1.0));
  for (const double v : out.m.data()) CHECK(v == Catch::Approx(0.25).margin(1e-12));
}

TEST_CASE("sinkhorn drives random positive matrices to tolerance") {
  RandomStream rng(315);
  for (int rep = 0; rep < 20; ++rep) {
    MatrixD m(6, 6, 0.0);
    for (auto& v : m.data()) v = rng.uniform(0.05, 3.0);
    const DoublyStochasticMatrix out = sinkhorn(m, 1e-6, 300);
    CHECK(out.deviation < 1e-6);
    CHECK(out.iterations <= 300);
    for (const double v : out.m.data()) CHECK(v > 0.0);
  }
}

TEST_CASE("sinkhorn rejects nonpositive entries") {
  MatrixD m(2, 2, 1.0);
  m(0, 1) = 0.0;
  CHECK_THROWS_AS(sinkhorn(m), std::invalid_argument);
  m(0, 1) = -2.0;
  CHECK_THROWS_AS(sinkhorn(m), std::invalid_argument);
}
