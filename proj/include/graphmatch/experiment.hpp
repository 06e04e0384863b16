#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "graphmatch/bistochastic.hpp"
#include "graphmatch/core.hpp"
#include "graphmatch/delaunay.hpp"
#include "graphmatch/learn.hpp"
#include "graphmatch/loss.hpp"
#include "graphmatch/scene.hpp"
#include "graphmatch/shape_context.hpp"

namespace graphmatch {

/// What to run: linear vs quadratic assignment, with learned weights, flat
/// unlearned weights, or the bistochastic-normalization baseline.
struct MethodSpec {
  enum class Model { linear, quadratic };
  enum class Weights { learned, unlearned, bistochastic };
  Model model = Model::linear;
  Weights weights = Weights::unlearned;

  std::string name() const {
    std::string s = model == Model::linear ? "linear-" : "quadratic-";
    switch (weights) {
      case Weights::learned: return s + "learned";
      case Weights::unlearned: return s + "unlearned";
      case Weights::bistochastic: return s + "bistochastic";
    }
    return s;
  }

  static MethodSpec parse(const std::string& text) {
    const auto dash = text.find('-');
    detail::require(dash != std::string::npos,
                    "method must look like 'linear-learned': " + text);
    const std::string model = text.substr(0, dash);
    const std::string weights = text.substr(dash + 1);
    MethodSpec spec;
    if (model == "linear") spec.model = Model::linear;
    else if (model == "quadratic") spec.model = Model::quadratic;
    else throw std::invalid_argument("unknown model '" + model + "'");
    if (weights == "learned") spec.weights = Weights::learned;
    else if (weights == "unlearned") spec.weights = Weights::unlearned;
    else if (weights == "bistochastic") spec.weights = Weights::bistochastic;
    else throw std::invalid_argument("unknown weight mode '" + weights + "'");
    return spec;
  }
};

struct ExperimentConfig {
  LossKind::Kind loss = LossKind::Kind::hamming;
  std::vector<double> lambda_grid = {1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3, 1e4};
  double epsilon = 1e-3;
  int max_iterations = 150;
  GraduatedAssignmentConfig ga{};
  double bistochastic_delta = 1e-5;
  ShapeContextConfig shape_context{};
  // Wall-clock measurement is inherently nondeterministic; disable it to
  // get byte-identical reports from identical inputs.
  bool measure_runtime = true;
  int runtime_repeats = 3;
};

struct ReportRow {
  int baseline = 0;
  std::string method;
  int test_pairs = 0;
  double lambda = 0.0;  // 0 for methods without learning
  double mean_loss = 0.0;
  double stderr_ = 0.0;
  double mean_runtime_ms = 0.0;
  bool converged = true;
};

struct ExperimentReport {
  struct WeightsEntry {
    std::string method;
    int baseline = 0;
    WeightVector w;
  };
  std::vector<ReportRow> rows;
  std::vector<WeightsEntry> weights;

  void append(const ExperimentReport& other) {
    rows.insert(rows.end(), other.rows.begin(), other.rows.end());
    weights.insert(weights.end(), other.weights.begin(), other.weights.end());
  }
};

namespace detail {

/// Builds the graph pair and ground truth for one manifest entry. Scenes
/// are triangulated for the Hamming setting; in the endpoint setting the
/// query is a template subset and triangulation is skipped (empty
/// adjacency).
inline TrainingInstance build_instance(const SceneFile& a, const SceneFile& b,
                                       const PairEntry& entry,
                                       const ExperimentConfig& cfg) {
  require(a.points.size() <= b.points.size(),
          "pair " + entry.scene_a + " / " + entry.scene_b +
              ": query scene must not outsize the target scene");
  std::map<int, std::size_t> index_a, index_b;
  for (std::size_t i = 0; i < a.labels.size(); ++i) index_a[a.labels[i]] = i;
  for (std::size_t i = 0; i < b.labels.size(); ++i) index_b[b.labels[i]] = i;

  TrainingInstance instance;
  instance.g.points = a.points;
  instance.g_prime.points = b.points;
  instance.g.node_attrs = shape_context(a.points, cfg.shape_context);
  instance.g_prime.node_attrs = shape_context(b.points, cfg.shape_context);
  const bool triangulate = cfg.loss == LossKind::Kind::hamming;
  instance.g.adjacency = triangulate ? delaunay_adjacency(a.points)
                                     : BinaryMatrix(a.points.size(), a.points.size(), 0);
  instance.g_prime.adjacency =
      triangulate ? delaunay_adjacency(b.points)
                  : BinaryMatrix(b.points.size(), b.points.size(), 0);

  std::vector<int> target_of(a.points.size(), -1);
  for (const auto& [id_a, id_b] : entry.correspondences) {
    require(index_a.count(id_a) > 0, "correspondence id " + std::to_string(id_a) +
                                         " missing from " + entry.scene_a);
    require(index_b.count(id_b) > 0, "correspondence id " + std::to_string(id_b) +
                                         " missing from " + entry.scene_b);
    target_of[index_a[id_a]] = static_cast<int>(index_b[id_b]);
  }
  instance.y_true = Matching::from_assignments(target_of, b.points.size());
  instance.scene_width = b.width;
  return instance;
}

inline LossKind loss_for(const TrainingInstance& instance,
                         const ExperimentConfig& cfg) {
  return cfg.loss == LossKind::Kind::hamming
             ? LossKind::hamming()
             : LossKind::endpoint(instance.scene_width);
}

struct SceneCache {
  std::map<std::string, SceneFile> loaded;
  const SceneFile& get(const std::string& path) {
    auto it = loaded.find(path);
    if (it == loaded.end()) it = loaded.emplace(path, load_scene(path)).first;
    return it->second;
  }
};

}  // namespace detail

/// Instances of one split (pair index mod 3) of a manifest.
inline std::vector<TrainingInstance> manifest_instances(
    const PairManifest& manifest, Split split, const ExperimentConfig& cfg) {
  detail::SceneCache cache;
  std::vector<TrainingInstance> out;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    if (split_of(i) != split) continue;
    const PairEntry& entry = manifest.entries[i];
    out.push_back(detail::build_instance(cache.get(entry.scene_a),
                                         cache.get(entry.scene_b), entry, cfg));
  }
  return out;
}

/// Runs one method on one manifest: trains on the train split when the
/// method is learned (selecting lambda on the validation split), then
/// reports mean test loss with its standard error and the mean per-pair
/// inference time. A non-converged training run flags the row rather than
/// aborting.
inline ExperimentReport run_experiment(const PairManifest& manifest,
                                       const MethodSpec& method,
                                       const ExperimentConfig& cfg) {
  const auto train_set = manifest_instances(manifest, Split::train, cfg);
  const auto valid_set = manifest_instances(manifest, Split::validation, cfg);
  const auto test_set = manifest_instances(manifest, Split::test, cfg);
  detail::require(!test_set.empty(), "run_experiment: empty test split");

  const bool quadratic = method.model == MethodSpec::Model::quadratic;
  const InferenceSpec inference = quadratic ? InferenceSpec::graduated(cfg.ga)
                                            : InferenceSpec::linear();
  const std::size_t attr_dim =
      static_cast<std::size_t>(cfg.shape_context.attr_dim());

  ExperimentReport report;
  ReportRow row;
  row.baseline = manifest.baseline;
  row.method = method.name();
  row.test_pairs = static_cast<int>(test_set.size());

  WeightVector w = WeightVector::flat(attr_dim, quadratic ? 1.0 : 0.0);
  if (method.weights == MethodSpec::Weights::learned) {
    detail::require(!train_set.empty(), "run_experiment: empty training split");
    detail::require(!valid_set.empty(), "run_experiment: empty validation split");
    detail::require(!cfg.lambda_grid.empty(), "run_experiment: empty lambda grid");
    double best_valid = std::numeric_limits<double>::infinity();
    for (const double lambda : cfg.lambda_grid) {
      LearnerConfig lc;
      lc.lambda = lambda;
      lc.epsilon = cfg.epsilon;
      lc.max_iterations = cfg.max_iterations;
      lc.inference = inference;
      lc.loss = detail::loss_for(train_set.front(), cfg);
      const TrainerState state = train(train_set, lc);
      double valid_loss = 0.0;
      for (const TrainingInstance& instance : valid_set)
        valid_loss += instance_loss(
            instance, predict(state.w, instance.g, instance.g_prime, inference),
            detail::loss_for(instance, cfg));
      valid_loss /= static_cast<double>(valid_set.size());
      if (valid_loss < best_valid) {
        best_valid = valid_loss;
        w = state.w;
        row.lambda = lambda;
        row.converged = state.converged;
      }
    }
    report.weights.push_back({row.method, row.baseline, w});
  }

  std::vector<double> losses;
  std::vector<double> runtimes_ms;
  losses.reserve(test_set.size());
  for (const TrainingInstance& instance : test_set) {
    CompatibilityTables tables;
    if (method.weights == MethodSpec::Weights::bistochastic) {
      tables = bistochastic_normalize_baseline(instance.g, instance.g_prime,
                                               cfg.bistochastic_delta)
                   .tables;
      if (!quadratic) tables.edge_weight = 0.0;
    } else {
      tables = build_tables(w, instance.g, instance.g_prime);
    }

    Matching y;
    if (cfg.measure_runtime) {
      std::vector<double> reps;
      for (int r = 0; r < std::max(1, cfg.runtime_repeats); ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        y = detail::solve_inference(tables, instance.g, instance.g_prime, inference);
        const auto t1 = std::chrono::steady_clock::now();
        reps.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
      }
      std::sort(reps.begin(), reps.end());
      runtimes_ms.push_back(reps[reps.size() / 2]);
    } else {
      y = detail::solve_inference(tables, instance.g, instance.g_prime, inference);
      runtimes_ms.push_back(0.0);
    }
    losses.push_back(instance_loss(instance, y, detail::loss_for(instance, cfg)));
  }

  double mean = 0.0;
  for (double v : losses) mean += v;
  mean /= static_cast<double>(losses.size());
  double var = 0.0;
  for (double v : losses) var += (v - mean) * (v - mean);
  const double stddev =
      losses.size() > 1 ? std::sqrt(var / static_cast<double>(losses.size() - 1)) : 0.0;
  row.mean_loss = mean;
  row.stderr_ = stddev / std::sqrt(static_cast<double>(losses.size()));
  double rt = 0.0;
  for (double v : runtimes_ms) rt += v;
  row.mean_runtime_ms = rt / static_cast<double>(runtimes_ms.size());

  report.rows.push_back(std::move(row));
  return report;
}

inline void save_report(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << "# graphmatch experiment report\n";
  out << "columns\tbaseline\tmethod\ttest_pairs\tlambda\tmean_loss\tstderr\t"
         "mean_runtime_ms\tconverged\n";
  for (const ReportRow& r : report.rows) {
    out << "row\t" << r.baseline << "\t" << r.method << "\t" << r.test_pairs
        << "\t" << detail::format_double(r.lambda) << "\t"
        << detail::format_double(r.mean_loss) << "\t"
        << detail::format_double(r.stderr_) << "\t"
        << detail::format_double(r.mean_runtime_ms) << "\t"
        << (r.converged ? 1 : 0) << "\n";
  }
  for (const auto& e : report.weights) {
    out << "weights\t" << e.method << "\t" << e.baseline << "\t"
        << e.w.node_weights.size();
    for (double v : e.w.node_weights) out << "\t" << detail::format_double(v);
    out << "\t" << detail::format_double(e.w.edge_weight) << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline ExperimentReport load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report: " + path);
  ExperimentReport report;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string head;
    fields >> head;
    if (head == "columns") continue;
    if (head == "row") {
      ReportRow r;
      int converged = 0;
      if (!(fields >> r.baseline >> r.method >> r.test_pairs >> r.lambda >>
            r.mean_loss >> r.stderr_ >> r.mean_runtime_ms >> converged))
        detail::parse_fail(path, line_no, "malformed report row");
      r.converged = converged != 0;
      report.rows.push_back(std::move(r));
      continue;
    }
    if (head == "weights") {
      ExperimentReport::WeightsEntry e;
      std::size_t dim = 0;
      if (!(fields >> e.method >> e.baseline >> dim))
        detail::parse_fail(path, line_no, "malformed weights record");
      e.w.node_weights.resize(dim);
      for (std::size_t r = 0; r < dim; ++r)
        if (!(fields >> e.w.node_weights[r]))
          detail::parse_fail(path, line_no, "malformed weights record");
      if (!(fields >> e.w.edge_weight))
        detail::parse_fail(path, line_no, "malformed weights record");
      report.weights.push_back(std::move(e));
      continue;
    }
    detail::parse_fail(path, line_no, "unknown record '" + head + "'");
  }
  return report;
}

/// Tab-separated plot data, one row per report row:
/// baseline, method, mean_loss, stderr, mean_runtime_ms.
inline void emit_plot_data(const ExperimentReport& report, const std::string& path) {
  detail::require(!report.rows.empty(), "emit_plot_data: empty report");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write plot data: " + path);
  out << "baseline\tmethod\tmean_loss\tstderr\tmean_runtime_ms\n";
  for (const ReportRow& r : report.rows)
    out << r.baseline << "\t" << r.method << "\t"
        << detail::format_double(r.mean_loss) << "\t"
        << detail::format_double(r.stderr_) << "\t"
        << detail::format_double(r.mean_runtime_ms) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace graphmatch
