#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "graphmatch/brute_force.hpp"
#include "graphmatch/bundle.hpp"
#include "graphmatch/core.hpp"
#include "graphmatch/features.hpp"
#include "graphmatch/graduated_assignment.hpp"
#include "graphmatch/linear_assignment.hpp"
#include "graphmatch/loss.hpp"

namespace graphmatch {

/// How argmax over matchings is computed. Linear inference is exact but
/// only valid when the model has no edge term (w2 = 0); graduated
/// assignment handles the quadratic model approximately.
struct InferenceSpec {
  enum class Kind { linear, graduated };
  Kind kind = Kind::linear;
  GraduatedAssignmentConfig ga{};
  // Lets a caller knowingly run linear inference on a model with w2 != 0,
  // dropping the edge term from the argmax.
  bool allow_linear_on_quadratic = false;

  static InferenceSpec linear() { return {}; }
  static InferenceSpec graduated(const GraduatedAssignmentConfig& cfg = {}) {
    return {Kind::graduated, cfg, false};
  }
};

/// Column-generation trainer configuration.
struct LearnerConfig {
  double lambda = 1.0;      // regularization constant
  double epsilon = 1e-3;    // stop when ub - lb <= epsilon
  int max_iterations = 200;
  InferenceSpec inference{};
  LossKind loss{};

  void validate() const {
    detail::require(lambda > 0.0, "learner: lambda must be positive");
    detail::require(epsilon > 0.0, "learner: epsilon must be positive");
    detail::require(max_iterations >= 1, "learner: max_iterations >= 1");
  }
};

/// Per-iteration training log record. xi_mean is (1/N) sum_n xi_n at the
/// current iterate; upper_bound is the best regularized risk seen so far
/// and is non-increasing by construction.
struct TrainingRecord {
  int iteration = 0;
  double xi_mean = 0.0;
  double empirical_risk = 0.0;
  double objective = 0.0;  // regularized risk at the current iterate
  double upper_bound = 0.0;
  double lower_bound = 0.0;
  double gap = 0.0;
  double wall_ms = 0.0;
  bool lemma_ok = true;
};

/// Final trainer state: the best iterate, its slacks, and the full history.
struct TrainerState {
  WeightVector w;
  std::vector<CuttingPlane> cutting_planes;
  std::vector<double> xi;
  double risk_upper_bound = 0.0;  // (1/N) sum xi at the returned w
  double empirical_risk = 0.0;    // (1/N) sum loss(predict(w)) at the returned w
  bool converged = false;
  std::vector<TrainingRecord> history;
};

/// c_{ii'} = <phi1(G_i, G'_i'), w1>, edge term w2 * G_ij * G'_i'j'.
inline CompatibilityTables build_tables(const WeightVector& w,
                                        const AttributedGraph& g,
                                        const AttributedGraph& g_prime) {
  detail::require(g.attr_dim() == w.node_weights.size() &&
                      g_prime.attr_dim() == w.node_weights.size(),
                  "build_tables: attribute dimension mismatch");
  const std::size_t n = g.size();
  const std::size_t n_prime = g_prime.size();
  MatrixD c(n, n_prime, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = g.node_attrs.row(i);
    for (std::size_t j = 0; j < n_prime; ++j) {
      const auto b = g_prime.node_attrs.row(j);
      double v = 0.0;
      for (std::size_t r = 0; r < a.size(); ++r) {
        const double d = a[r] - b[r];
        v -= w.node_weights[r] * d * d;
      }
      c(i, j) = v;
    }
  }
  return {std::move(c), w.edge_weight};
}

namespace detail {
inline Matching solve_inference(const CompatibilityTables& tables,
                                const AttributedGraph& g,
                                const AttributedGraph& g_prime,
                                const InferenceSpec& inference) {
  if (inference.kind == InferenceSpec::Kind::linear) {
    require(tables.edge_weight == 0.0 || inference.allow_linear_on_quadratic,
            "linear inference requested on a model with a nonzero edge weight; "
            "pass the explicit linear-model override to drop the edge term");
    return linear_assignment(tables.unary);
  }
  return graduated_assignment(tables, g, g_prime, inference.ga);
}
}  // namespace detail

/// argmax_y <w, Phi(G, G', y)>.
inline Matching predict(const WeightVector& w, const AttributedGraph& g,
                        const AttributedGraph& g_prime,
                        const InferenceSpec& inference) {
  return detail::solve_inference(build_tables(w, g, g_prime), g, g_prime,
                                 inference);
}

/// Loss-augmented compatibilities: the matching objective under these
/// tables, plus `constant`, equals <w, Phi(y)> + loss(y, y_true) for every
/// y. For the Hamming loss the augmentation subtracts y_true / ||y_true||^2
/// (the sign obtained by substituting the loss into the max-violator
/// objective) and carries the constant 1; the endpoint loss is linear in y
/// and adds its per-assignment clamped distance terms with no constant.
struct AugmentedTables {
  CompatibilityTables tables;
  double constant = 0.0;
};

inline AugmentedTables build_augmented_tables(const WeightVector& w,
                                              const TrainingInstance& instance,
                                              const LossKind& loss) {
  AugmentedTables out{build_tables(w, instance.g, instance.g_prime), 0.0};
  const std::size_t n = instance.g.size();
  const std::size_t n_prime = instance.g_prime.size();
  detail::require(instance.y_true.assign.rows() == n &&
                      instance.y_true.assign.cols() == n_prime,
                  "build_augmented_tables: ground truth shape mismatch");

  if (loss.kind == LossKind::Kind::hamming) {
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n_prime; ++j)
        if (instance.y_true.assign(i, j)) norm += 1.0;
    detail::require(norm > 0.0, "build_augmented_tables: empty ground truth");
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n_prime; ++j)
        if (instance.y_true.assign(i, j)) out.tables.unary(i, j) -= 1.0 / norm;
    out.constant = 1.0;
    return out;
  }

  const std::vector<Point2> truth = true_positions_of(instance);
  const double sigma = instance.scene_width;
  detail::require(sigma > 0.0, "build_augmented_tables: scene width must be positive");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n_prime; ++j) {
      double term = distance(instance.g_prime.points[j], truth[i]) / sigma;
      if (loss.clamp) term = std::min(term, 1.0);
      out.tables.unary(i, j) += term / static_cast<double>(n);
    }
  return out;
}

/// The most violated constraint: argmax_y [<w, Phi(y)> + loss(y, y_true)],
/// solved exactly by linear assignment for the linear model and
/// approximately by graduated assignment otherwise. violation_value is
/// measured directly through the feature map and loss, so it is exact for
/// whatever y_hat the solver returned, and is always >= 0 up to the exact
/// arithmetic of the candidate y_true.
struct Violation {
  Matching y_hat;
  double value = 0.0;
};

inline Violation most_violated(const WeightVector& w,
                               const TrainingInstance& instance,
                               const LossKind& loss,
                               const InferenceSpec& inference) {
  const AugmentedTables aug = build_augmented_tables(w, instance, loss);
  const Matching y_hat = detail::solve_inference(aug.tables, instance.g,
                                                 instance.g_prime, inference);
  const double score_hat =
      joint_feature(instance.g, instance.g_prime, y_hat).dot(w) +
      instance_loss(instance, y_hat, loss);
  const double score_true =
      joint_feature(instance.g, instance.g_prime, instance.y_true).dot(w);
  return {y_hat, score_hat - score_true};
}

/// Regularized risk (1/N) sum_n max(0, violation_n) + (lambda/2)||w||^2 and
/// its subgradient in the flat [w1 w2] space. risk_* carry the un-
/// regularized parts used to build cutting planes. With linear inference
/// the edge coordinate is excluded from the model, so its gradient entry
/// stays zero.
struct RiskEval {
  double value = 0.0;
  std::vector<double> grad;
  double risk_value = 0.0;
  std::vector<double> risk_grad;
  std::vector<double> xi;
  std::vector<Matching> y_hat;
};

inline RiskEval regularized_risk_and_subgradient(
    const WeightVector& w, const std::vector<TrainingInstance>& instances,
    const LossKind& loss, const InferenceSpec& inference, double lambda) {
  detail::require(!instances.empty(), "risk: need at least one instance");
  const std::size_t dim = w.dim();
  const double inv_n = 1.0 / static_cast<double>(instances.size());

  RiskEval eval;
  eval.risk_grad.assign(dim, 0.0);
  eval.xi.reserve(instances.size());
  eval.y_hat.reserve(instances.size());
  for (const TrainingInstance& instance : instances) {
    const Violation v = most_violated(w, instance, loss, inference);
    const double xi = std::max(0.0, v.value);
    eval.xi.push_back(xi);
    eval.risk_value += inv_n * xi;
    if (v.value > 0.0) {
      // -Psi(y_hat) = Phi(y_hat) - Phi(y_true)
      const JointFeature diff =
          joint_feature(instance.g, instance.g_prime, v.y_hat) -
          joint_feature(instance.g, instance.g_prime, instance.y_true);
      const std::vector<double> flat = diff.flatten();
      for (std::size_t r = 0; r < dim; ++r) eval.risk_grad[r] += inv_n * flat[r];
    }
    eval.y_hat.push_back(v.y_hat);
  }
  if (inference.kind == InferenceSpec::Kind::linear) eval.risk_grad[dim - 1] = 0.0;

  const std::vector<double> flat_w = w.flatten();
  double norm_sq = 0.0;
  for (double x : flat_w) norm_sq += x * x;
  eval.value = eval.risk_value + 0.5 * lambda * norm_sq;
  eval.grad = eval.risk_grad;
  for (std::size_t r = 0; r < dim; ++r) eval.grad[r] += lambda * flat_w[r];
  return eval;
}

/// Column generation with a bundle master problem: starting from w = 0,
/// alternately evaluate the most violated constraints (one cutting plane of
/// the empirical risk per iteration) and re-solve the master, until the gap
/// between the best observed regularized risk and the master's dual lower
/// bound falls below epsilon. Returns the best iterate; hitting the
/// iteration cap flags the state as non-converged instead of throwing.
///
/// With exact (linear) inference the slack mean dominates the empirical
/// risk of the current predictor at every iterate; that bound is recorded
/// in the history, and with approximate (graduated) inference it is
/// recorded but may fail.
inline TrainerState train(const std::vector<TrainingInstance>& instances,
                          const LearnerConfig& cfg) {
  cfg.validate();
  detail::require(!instances.empty(), "train: need at least one instance");
  const std::size_t attr_dim = instances.front().g.attr_dim();
  for (const TrainingInstance& instance : instances) {
    detail::require(instance.g.attr_dim() == attr_dim &&
                        instance.g_prime.attr_dim() == attr_dim,
                    "train: inconsistent attribute dimensions");
    detail::require(
        !validate_matching(instance.y_true, instance.g.size(), instance.g_prime.size())
             .has_value(),
        "train: invalid ground-truth matching");
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed_ms = [&t0] {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
  };

  TrainerState state;
  WeightVector w = WeightVector::zeros(attr_dim);
  std::vector<double> warm_alpha;
  double best_ub = std::numeric_limits<double>::infinity();
  double best_lb = -std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    const RiskEval eval = regularized_risk_and_subgradient(
        w, instances, cfg.loss, cfg.inference, cfg.lambda);

    double empirical = 0.0;
    for (const TrainingInstance& instance : instances)
      empirical += instance_loss(
          instance, predict(w, instance.g, instance.g_prime, cfg.inference),
          cfg.loss);
    empirical /= static_cast<double>(instances.size());

    if (eval.value < best_ub) {
      best_ub = eval.value;
      state.w = w;
      state.xi = eval.xi;
      state.risk_upper_bound = eval.risk_value;
      state.empirical_risk = empirical;
    }

    const std::vector<double> flat_w = w.flatten();
    CuttingPlane plane;
    plane.grad = eval.risk_grad;
    plane.offset = eval.risk_value;
    for (std::size_t r = 0; r < plane.grad.size(); ++r)
      plane.offset -= plane.grad[r] * flat_w[r];
    state.cutting_planes.push_back(plane);

    const MasterSolution master =
        solve_bundle_master(state.cutting_planes, cfg.lambda, warm_alpha);
    warm_alpha = master.alpha;
    best_lb = std::max(best_lb, master.lower_bound);
    const double gap = best_ub - best_lb;

    TrainingRecord rec;
    rec.iteration = iter;
    rec.xi_mean = eval.risk_value;
    rec.empirical_risk = empirical;
    rec.objective = eval.value;
    rec.upper_bound = best_ub;
    rec.lower_bound = best_lb;
    rec.gap = gap;
    rec.wall_ms = elapsed_ms();
    rec.lemma_ok = eval.risk_value + 1e-9 >= empirical;
    state.history.push_back(rec);

    if (gap <= cfg.epsilon) {
      state.converged = true;
      break;
    }
    w = WeightVector::from_flat(master.w);
    if (cfg.inference.kind == InferenceSpec::Kind::linear) w.edge_weight = 0.0;
  }
  return state;
}

}  // namespace graphmatch
