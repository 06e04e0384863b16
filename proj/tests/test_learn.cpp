#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <iostream>

#include "graphmatch/learn.hpp"
#include "test_util.hpp"

using namespace graphmatch;

namespace {

TrainingInstance random_instance(RandomStream& rng, int n, int n_prime,
                                 int attr_dim) {
  TrainingInstance instance;
  instance.g = testutil::random_graph(rng, n, attr_dim);
  instance.g_prime = testutil::random_graph(rng, n_prime, attr_dim);
  instance.y_true = testutil::random_matching(rng, n, n_prime);
  instance.scene_width = 1.0;
  return instance;
}

/// Instances whose ground truth is learnable: the target is the query with
/// jittered attributes under a hidden permutation.
TrainingInstance planted_instance(RandomStream& rng, int n, int attr_dim,
                                  double noise) {
  TrainingInstance instance;
  instance.g = testutil::random_graph(rng, n, attr_dim);
  const Matching truth = testutil::random_matching(rng, n, n);
  const auto cols = truth.row_targets();
  AttributedGraph gp;
  gp.points.assign(n, Point2{});
  gp.node_attrs = MatrixD(n, attr_dim, 0.0);
  gp.adjacency = BinaryMatrix(n, n, 0);
  for (int i = 0; i < n; ++i) {
    gp.points[cols[i]] = instance.g.points[i];
    for (int r = 0; r < attr_dim; ++r)
      gp.node_attrs(cols[i], r) = instance.g.node_attrs(i, r) + noise * rng.normal();
    for (int j = 0; j < n; ++j)
      gp.adjacency(cols[i], cols[j]) = instance.g.adjacency(i, j);
  }
  instance.g_prime = gp;
  instance.y_true = truth;
  return instance;
}

double augmented_objective(const AugmentedTables& aug,
                           const TrainingInstance& instance, const Matching& y) {
  return objective_value(aug.tables, instance.g, instance.g_prime, y) + aug.constant;
}

}  // namespace

TEST_CASE("build_tables with zero weights yields zero tables") {
  RandomStream rng(601);
  const auto g = testutil::random_graph(rng, 4, 3);
  const auto gp = testutil::random_graph(rng, 5, 3);
  const CompatibilityTables t = build_tables(WeightVector::zeros(3), g, gp);
  for (const double v : t.unary.data()) CHECK(v == 0.0);
  CHECK(t.edge_weight == 0.0);
}

TEST_CASE("flat node weights produce negated squared attribute distances") {
  RandomStream rng(603);
  const auto g = testutil::random_graph(rng, 4, 3);
  const auto gp = testutil::random_graph(rng, 4, 3);
  const CompatibilityTables t = build_tables(WeightVector::flat(3, 0.0), g, gp);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double sq = 0.0;
      for (int r = 0; r < 3; ++r) {
        const double d = g.node_attrs(i, r) - gp.node_attrs(j, r);
        sq += d * d;
      }
      CHECK(t.unary(i, j) == Catch::Approx(-sq).epsilon(1e-14));
    }
  CHECK(t.edge_weight == 0.0);
}

TEST_CASE("build_tables rejects dimension mismatches") {
  RandomStream rng(605);
  const auto g = testutil::random_graph(rng, 3, 3);
  const auto gp = testutil::random_graph(rng, 3, 2);
  CHECK_THROWS_AS(build_tables(WeightVector::zeros(3), g, gp),
                  std::invalid_argument);
}

TEST_CASE("predict refuses linear inference on a quadratic model unless overridden") {
  RandomStream rng(607);
  const auto g = testutil::random_graph(rng, 3, 2);
  const auto gp = testutil::random_graph(rng, 4, 2);
  WeightVector w = WeightVector::flat(2, 1.0);
  CHECK_THROWS_AS(predict(w, g, gp, InferenceSpec::linear()), std::invalid_argument);
  InferenceSpec forced = InferenceSpec::linear();
  forced.allow_linear_on_quadratic = true;
  CHECK_NOTHROW(predict(w, g, gp, forced));
  CHECK_NOTHROW(predict(w, g, gp, InferenceSpec::graduated()));
}

TEST_CASE("predict at zero weights is deterministic with lexicographic ties") {
  RandomStream rng(609);
  const auto g = testutil::random_graph(rng, 3, 2);
  const auto gp = testutil::random_graph(rng, 5, 2);
  const WeightVector w = WeightVector::zeros(2);
  const Matching y = predict(w, g, gp, InferenceSpec::linear());
  CHECK(y.assign == predict(w, g, gp, InferenceSpec::linear()).assign);
  CHECK(y.row_targets() == std::vector<int>{0, 1, 2});
}

TEST_CASE("predict argmax is invariant under positive rescaling of the linear model") {
  RandomStream rng(611);
  for (int rep = 0; rep < 10; ++rep) {
    const auto instance = random_instance(rng, 5, 6, 3);
    auto w = testutil::random_weights(rng, 3);
    w.edge_weight = 0.0;
    const Matching base =
        predict(w, instance.g, instance.g_prime, InferenceSpec::linear());
    WeightVector scaled = w;
    const double factor = rng.uniform(0.1, 7.0);
    for (double& v : scaled.node_weights) v *= factor;
    const Matching rescaled =
        predict(scaled, instance.g, instance.g_prime, InferenceSpec::linear());
    CHECK(base.assign == rescaled.assign);
  }
}

TEST_CASE("the augmented objective equals score plus loss (hamming)") {
  RandomStream rng(613);
  for (int rep = 0; rep < 50; ++rep) {
    const auto instance = random_instance(rng, 4, 5, 3);
    auto w = testutil::random_weights(rng, 3);
    const AugmentedTables aug =
        build_augmented_tables(w, instance, LossKind::hamming());
    const Matching y = testutil::random_matching(rng, 4, 5);
    const double lhs = augmented_objective(aug, instance, y);
    const double rhs = joint_feature(instance.g, instance.g_prime, y).dot(w) +
                       hamming_loss(y, instance.y_true);
    CHECK(std::fabs(lhs - rhs) <= 1e-12 * (1.0 + std::fabs(rhs)));
  }
}

TEST_CASE("the augmented objective equals score plus loss (endpoint)") {
  RandomStream rng(615);
  for (int rep = 0; rep < 50; ++rep) {
    auto instance = random_instance(rng, 4, 6, 3);
    instance.g_prime.points = testutil::random_points(rng, 6, 2.0);
    instance.scene_width = 2.0;
    auto w = testutil::random_weights(rng, 3);
    const LossKind loss = LossKind::endpoint(instance.scene_width);
    const AugmentedTables aug = build_augmented_tables(w, instance, loss);
    const Matching y = testutil::random_matching(rng, 4, 6);
    const double lhs = augmented_objective(aug, instance, y);
    const double rhs = joint_feature(instance.g, instance.g_prime, y).dot(w) +
                       instance_loss(instance, y, loss);
    CHECK(std::fabs(lhs - rhs) <= 1e-12 * (1.0 + std::fabs(rhs)));
  }
}

TEST_CASE("the ground truth scores exactly its model value under augmentation") {
  RandomStream rng(617);
  const auto instance = random_instance(rng, 4, 5, 3);
  const auto w = testutil::random_weights(rng, 3);
  const AugmentedTables aug =
      build_augmented_tables(w, instance, LossKind::hamming());
  const double via_aug = augmented_objective(aug, instance, instance.y_true);
  const double score =
      joint_feature(instance.g, instance.g_prime, instance.y_true).dot(w);
  CHECK(via_aug == Catch::Approx(score).margin(1e-12));
}

TEST_CASE("at zero weights the most violating matching avoids the ground truth") {
  RandomStream rng(619);
  for (int rep = 0; rep < 10; ++rep) {
    auto instance = random_instance(rng, 4, 4, 3);
    instance.g.adjacency = BinaryMatrix(4, 4, 0);
    instance.g_prime.adjacency = BinaryMatrix(4, 4, 0);
    const WeightVector w = WeightVector::zeros(3);
    const AugmentedTables aug =
        build_augmented_tables(w, instance, LossKind::hamming());
    const Matching y_hat =
        brute_force_qap(aug.tables, instance.g, instance.g_prime);
    int overlap = 0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        overlap += y_hat.assign(i, j) * instance.y_true.assign(i, j);
    CHECK(overlap == 0);
    // And its violation is the maximal loss.
    const Violation v =
        most_violated(w, instance, LossKind::hamming(), InferenceSpec::linear());
    CHECK(v.value == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("violation values are never negative") {
  RandomStream rng(621);
  for (int rep = 0; rep < 30; ++rep) {
    const auto instance = random_instance(rng, 4, 6, 3);
    auto w = testutil::random_weights(rng, 3);
    w.edge_weight = 0.0;
    const Violation v =
        most_violated(w, instance, LossKind::hamming(), InferenceSpec::linear());
    CHECK(v.value >= -1e-12);
  }
}

TEST_CASE("most_violated with exact inference matches exhaustive maximization") {
  RandomStream rng(623);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 3 + rng.uniform_int(3);  // up to 5
    const int np = n + rng.uniform_int(3);
    const auto instance = random_instance(rng, n, np, 3);
    auto w = testutil::random_weights(rng, 3);
    w.edge_weight = 0.0;
    const LossKind loss =
        rep % 2 == 0 ? LossKind::hamming() : LossKind::endpoint(1.0);

    double best = -1e300;
    std::vector<int> best_map;
    testutil::enumerate_injections(n, np, [&](const std::vector<int>& target_of) {
      const Matching y = Matching::from_assignments(target_of, np);
      const double v = joint_feature(instance.g, instance.g_prime, y).dot(w) +
                       instance_loss(instance, y, loss);
      if (v > best) {
        best = v;
        best_map = target_of;
      }
    });

    const Violation got = most_violated(w, instance, loss, InferenceSpec::linear());
    CHECK(got.y_hat.row_targets() == best_map);
    const double truth_score =
        joint_feature(instance.g, instance.g_prime, instance.y_true).dot(w);
    CHECK(got.value == Catch::Approx(best - truth_score).margin(1e-12));
  }
}

TEST_CASE("the regularizer contributes nothing to the gradient at w = 0") {
  RandomStream rng(625);
  std::vector<TrainingInstance> instances = {random_instance(rng, 4, 5, 3)};
  const RiskEval eval = regularized_risk_and_subgradient(
      WeightVector::zeros(3), instances, LossKind::hamming(),
      InferenceSpec::linear(), 0.5);
  CHECK(eval.grad == eval.risk_grad);
  CHECK(eval.value == eval.risk_value);
}

TEST_CASE("the subgradient matches central finite differences away from kinks") {
  RandomStream rng(627);
  std::vector<TrainingInstance> instances;
  for (int i = 0; i < 4; ++i) instances.push_back(random_instance(rng, 4, 5, 3));
  const LossKind loss = LossKind::hamming();
  const InferenceSpec inference = InferenceSpec::linear();
  const double lambda = 0.7;
  const double h = 1e-5;

  int checked = 0;
  for (int attempt = 0; attempt < 40 && checked < 10; ++attempt) {
    auto w = testutil::random_weights(rng, 3);
    w.edge_weight = 0.0;
    const RiskEval at_w =
        regularized_risk_and_subgradient(w, instances, loss, inference, lambda);

    bool kink = false;
    double max_rel = 0.0;
    for (std::size_t r = 0; r < 3 && !kink; ++r) {
      WeightVector plus = w, minus = w;
      plus.node_weights[r] += h;
      minus.node_weights[r] -= h;
      const RiskEval ep =
          regularized_risk_and_subgradient(plus, instances, loss, inference, lambda);
      const RiskEval em =
          regularized_risk_and_subgradient(minus, instances, loss, inference, lambda);
      for (std::size_t k = 0; k < instances.size(); ++k)
        if (ep.y_hat[k].assign != at_w.y_hat[k].assign ||
            em.y_hat[k].assign != at_w.y_hat[k].assign)
          kink = true;
      if (kink) break;
      const double fd = (ep.value - em.value) / (2.0 * h);
      max_rel = std::max(max_rel, std::fabs(fd - at_w.grad[r]) /
                                      (1.0 + std::fabs(at_w.grad[r])));
    }
    if (kink) continue;
    CHECK(max_rel <= 1e-4);
    ++checked;
  }
  CHECK(checked == 10);
}

TEST_CASE("the slack mean upper-bounds the empirical risk (Lemma check)") {
  RandomStream rng(629);
  std::vector<TrainingInstance> instances;
  for (int i = 0; i < 5; ++i) instances.push_back(random_instance(rng, 4, 5, 3));
  for (int rep = 0; rep < 10; ++rep) {
    auto w = testutil::random_weights(rng, 3);
    w.edge_weight = 0.0;
    const RiskEval eval = regularized_risk_and_subgradient(
        w, instances, LossKind::hamming(), InferenceSpec::linear(), 1.0);
    double empirical = 0.0;
    for (const auto& instance : instances)
      empirical += hamming_loss(
          predict(w, instance.g, instance.g_prime, InferenceSpec::linear()),
          instance.y_true);
    empirical /= instances.size();
    CHECK(eval.risk_value + 1e-9 >= empirical);
  }
}

TEST_CASE("the regularized risk is convex along random segments") {
  RandomStream rng(631);
  std::vector<TrainingInstance> instances;
  for (int i = 0; i < 3; ++i) instances.push_back(random_instance(rng, 4, 5, 3));
  auto risk_at = [&](const WeightVector& w) {
    return regularized_risk_and_subgradient(w, instances, LossKind::hamming(),
                                            InferenceSpec::linear(), 0.3)
        .value;
  };
  for (int rep = 0; rep < 20; ++rep) {
    auto wa = testutil::random_weights(rng, 3);
    auto wb = testutil::random_weights(rng, 3);
    wa.edge_weight = wb.edge_weight = 0.0;
    const double t = rng.uniform(0.05, 0.95);
    WeightVector mix = wa;
    for (std::size_t r = 0; r < 3; ++r)
      mix.node_weights[r] = t * wa.node_weights[r] + (1.0 - t) * wb.node_weights[r];
    CHECK(risk_at(mix) <= t * risk_at(wa) + (1.0 - t) * risk_at(wb) + 1e-9);
  }
}

TEST_CASE("every cutting plane lower-bounds the true risk") {
  RandomStream rng(633);
  std::vector<TrainingInstance> instances;
  for (int i = 0; i < 4; ++i) instances.push_back(random_instance(rng, 4, 5, 3));
  LearnerConfig cfg;
  cfg.lambda = 0.5;
  cfg.epsilon = 1e-6;
  cfg.max_iterations = 25;
  cfg.loss = LossKind::hamming();
  const TrainerState state = train(instances, cfg);
  REQUIRE_FALSE(state.cutting_planes.empty());
  for (int rep = 0; rep < 10; ++rep) {
    auto w = testutil::random_weights(rng, 3);
    w.edge_weight = 0.0;
    const std::vector<double> flat = w.flatten();
    const double true_risk =
        regularized_risk_and_subgradient(w, instances, cfg.loss,
                                         InferenceSpec::linear(), cfg.lambda)
            .risk_value;
    for (const CuttingPlane& plane : state.cutting_planes) {
      double value = plane.offset;
      for (std::size_t r = 0; r < flat.size(); ++r) value += plane.grad[r] * flat[r];
      CHECK(value <= true_risk + 1e-9);
    }
  }
}

TEST_CASE("a single trivially-satisfied instance converges immediately") {
  TrainingInstance instance;
  instance.g.points = {{0, 0}};
  instance.g.node_attrs = MatrixD(1, 2, 0.0);
  instance.g.adjacency = BinaryMatrix(1, 1, 0);
  instance.g_prime = instance.g;
  instance.y_true = Matching::from_assignments({0}, 1);

  LearnerConfig cfg;
  cfg.lambda = 1.0;
  cfg.epsilon = 1.0;
  cfg.loss = LossKind::hamming();
  const TrainerState state = train({instance}, cfg);
  CHECK(state.converged);
  CHECK(state.history.size() <= 2);
  CHECK(state.risk_upper_bound == Catch::Approx(0.0).margin(1e-12));
  for (const double xi : state.xi) CHECK(xi <= 1e-12);
}

TEST_CASE("training drives the planted-permutation risk down with a monotone bound") {
  RandomStream rng(635);
  std::vector<TrainingInstance> instances;
  for (int i = 0; i < 20; ++i) instances.push_back(planted_instance(rng, 5, 4, 0.05));

  LearnerConfig cfg;
  cfg.lambda = 0.01;
  cfg.epsilon = 1e-4;
  cfg.max_iterations = 100;
  cfg.loss = LossKind::hamming();
  const TrainerState state = train(instances, cfg);

  REQUIRE_FALSE(state.history.empty());
  double prev_ub = std::numeric_limits<double>::infinity();
  for (const TrainingRecord& rec : state.history) {
    CHECK(rec.lemma_ok);
    CHECK(rec.xi_mean + 1e-9 >= rec.empirical_risk);
    CHECK(rec.upper_bound <= prev_ub + 1e-12);
    prev_ub = rec.upper_bound;
    CHECK(rec.gap >= -1e-9);
  }
  CHECK(state.risk_upper_bound + 1e-9 >= state.empirical_risk);
  // The planted signal is learnable: the final predictor beats flat weights.
  double flat_risk = 0.0, learned_risk = 0.0;
  const WeightVector flat = WeightVector::flat(4, 0.0);
  for (const auto& instance : instances) {
    flat_risk += hamming_loss(
        predict(flat, instance.g, instance.g_prime, InferenceSpec::linear()),
        instance.y_true);
    learned_risk += hamming_loss(
        predict(state.w, instance.g, instance.g_prime, InferenceSpec::linear()),
        instance.y_true);
  }
  CHECK(learned_risk <= flat_risk);
}

TEST_CASE("hitting the iteration cap flags non-convergence instead of throwing") {
  RandomStream rng(637);
  std::vector<TrainingInstance> instances = {random_instance(rng, 4, 5, 3)};
  LearnerConfig cfg;
  cfg.lambda = 1e-4;
  cfg.epsilon = 1e-12;
  cfg.max_iterations = 2;
  cfg.loss = LossKind::hamming();
  const TrainerState state = train(instances, cfg);
  CHECK_FALSE(state.converged);
  CHECK(state.history.size() == 2);
}

TEST_CASE("train validates its inputs") {
  LearnerConfig cfg;
  CHECK_THROWS_AS(train({}, cfg), std::invalid_argument);
  RandomStream rng(639);
  auto instance = random_instance(rng, 3, 4, 2);
  instance.y_true = Matching(3, 4);  // all-zero rows: invalid ground truth
  CHECK_THROWS_AS(train({instance}, cfg), std::invalid_argument);
  LearnerConfig bad;
  bad.lambda = -1.0;
  CHECK_THROWS_AS(train({random_instance(rng, 3, 4, 2)}, bad),
                  std::invalid_argument);
}
