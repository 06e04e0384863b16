// Command-line front end: synthetic data generation, training, prediction,
// evaluation, and plot-data export for the graph-matching toolkit.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "graphmatch/graphmatch.hpp"

namespace gm = graphmatch;
namespace fs = std::filesystem;

namespace {

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) out.push_back(std::stod(token));
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) out.push_back(std::stoi(token));
  }
  return out;
}

gm::LossKind::Kind parse_loss(const std::string& text) {
  if (text == "hamming") return gm::LossKind::Kind::hamming;
  if (text == "endpoint") return gm::LossKind::Kind::endpoint;
  throw CLI::ValidationError("--loss", "expected 'hamming' or 'endpoint'");
}

struct GaOptions {
  gm::GraduatedAssignmentConfig cfg;
  void attach(CLI::App* app) {
    app->add_option("--ga-beta0", cfg.beta0, "initial annealing temperature");
    app->add_option("--ga-beta-rate", cfg.beta_rate, "annealing growth factor");
    app->add_option("--ga-beta-max", cfg.beta_max, "final annealing temperature");
    app->add_option("--ga-sinkhorn-tol", cfg.sinkhorn_tol, "Sinkhorn tolerance");
    app->add_option("--ga-sinkhorn-iters", cfg.sinkhorn_max_iters,
                    "Sinkhorn iteration cap");
    app->add_option("--ga-inner-iters", cfg.outer_iters_per_beta,
                    "relinearizations per temperature");
  }
};

void write_training_log(const gm::TrainerState& state, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write training log: " + path);
  out << "iteration\txi_mean\tempirical_risk\tobjective\tupper_bound\t"
         "lower_bound\tgap\twall_ms\tlemma_ok\n";
  for (const gm::TrainingRecord& r : state.history) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "%d\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\t%.3f\t%d\n",
                  r.iteration, r.xi_mean, r.empirical_risk, r.objective,
                  r.upper_bound, r.lower_bound, r.gap, r.wall_ms,
                  r.lemma_ok ? 1 : 0);
    out << buf;
  }
}

gm::PairManifest manifest_from_options(const std::string& manifest_path,
                                       const std::string& scenes_path,
                                       int baseline) {
  if (!manifest_path.empty()) return gm::load_manifest(manifest_path);
  if (scenes_path.empty())
    throw CLI::ValidationError("input", "need --manifest or --scenes with --baseline");
  return gm::make_pairs(gm::load_scene_list(scenes_path), baseline);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph matching with learned compatibility functions"};
  app.require_subcommand(1);

  // --- synth -------------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "generate a synthetic scene sequence");
  std::string synth_out;
  int synth_frames = 30, synth_points = 15;
  double synth_noise = 0.03, synth_rot_deg = 3.0, synth_width = 1.0;
  std::uint64_t synth_seed = 1;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--frames", synth_frames, "number of frames");
  synth->add_option("--points", synth_points, "landmarks per frame");
  synth->add_option("--noise", synth_noise, "jitter as a fraction of cloud diameter");
  synth->add_option("--rotation-deg", synth_rot_deg, "rotation per frame, degrees");
  synth->add_option("--width", synth_width, "scene width");
  synth->add_option("--seed", synth_seed, "random seed");

  // --- train -------------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "train a model on a pair manifest");
  std::string train_manifest, train_scenes, train_method = "linear-learned";
  std::string train_loss = "hamming", train_model_out, train_log_out;
  std::string train_lambdas = "0.01,0.1,1,10,100,1000,10000";
  int train_baseline = 0, train_max_iters = 150;
  double train_epsilon = 1e-3;
  GaOptions train_ga;
  train_cmd->add_option("--manifest", train_manifest, "pair manifest file");
  train_cmd->add_option("--scenes", train_scenes, "scene list file (with --baseline)");
  train_cmd->add_option("--baseline", train_baseline, "frame separation");
  train_cmd->add_option("--method", train_method, "linear-learned or quadratic-learned");
  train_cmd->add_option("--loss", train_loss, "hamming or endpoint");
  train_cmd->add_option("--lambdas", train_lambdas, "comma-separated lambda grid");
  train_cmd->add_option("--epsilon", train_epsilon, "column-generation gap tolerance");
  train_cmd->add_option("--max-iters", train_max_iters, "iteration cap");
  train_cmd->add_option("--model-out", train_model_out, "model file")->required();
  train_cmd->add_option("--log-out", train_log_out, "training log (TSV)");
  train_ga.attach(train_cmd);

  // --- predict -----------------------------------------------------------
  auto* predict_cmd = app.add_subcommand("predict", "match one scene pair with a model");
  std::string pred_model, pred_a, pred_b, pred_out;
  bool pred_no_triangulation = false;
  GaOptions pred_ga;
  predict_cmd->add_option("--model", pred_model, "model file")->required();
  predict_cmd->add_option("--scene-a", pred_a, "query scene")->required();
  predict_cmd->add_option("--scene-b", pred_b, "target scene")->required();
  predict_cmd->add_option("--out", pred_out, "matching output file")->required();
  predict_cmd->add_flag("--no-triangulation", pred_no_triangulation,
                        "skip Delaunay adjacency (template matching)");
  pred_ga.attach(predict_cmd);

  // --- eval --------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "evaluate methods over manifests");
  std::vector<std::string> eval_manifests;
  std::string eval_scenes, eval_baselines, eval_methods = "linear-unlearned";
  std::string eval_loss = "hamming", eval_report, eval_model, eval_plot;
  std::string eval_lambdas = "0.01,0.1,1,10,100,1000,10000";
  double eval_epsilon = 1e-3;
  int eval_max_iters = 150;
  bool eval_no_timing = false;
  GaOptions eval_ga;
  eval_cmd->add_option("--manifest", eval_manifests, "pair manifest file(s)");
  eval_cmd->add_option("--scenes", eval_scenes, "scene list file (with --baselines)");
  eval_cmd->add_option("--baselines", eval_baselines, "comma-separated baselines");
  eval_cmd->add_option("--methods", eval_methods,
                       "comma-separated, e.g. linear-learned,quadratic-unlearned");
  eval_cmd->add_option("--loss", eval_loss, "hamming or endpoint");
  eval_cmd->add_option("--model", eval_model,
                       "evaluate this model on the test split instead of training");
  eval_cmd->add_option("--lambdas", eval_lambdas, "lambda grid for learned methods");
  eval_cmd->add_option("--epsilon", eval_epsilon, "column-generation gap tolerance");
  eval_cmd->add_option("--max-iters", eval_max_iters, "training iteration cap");
  eval_cmd->add_option("--report", eval_report, "report output file")->required();
  eval_cmd->add_option("--plot", eval_plot, "also write plot data TSV here");
  eval_cmd->add_flag("--no-timing", eval_no_timing,
                     "skip runtime measurement for reproducible reports");
  eval_ga.attach(eval_cmd);

  // --- plotdata ----------------------------------------------------------
  auto* plot_cmd = app.add_subcommand("plotdata", "convert a report to plot TSV");
  std::string plot_report, plot_out;
  plot_cmd->add_option("--report", plot_report, "report file")->required();
  plot_cmd->add_option("--out", plot_out, "TSV output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      const double rot = synth_rot_deg * std::numbers::pi / 180.0;
      const auto frames = gm::synth_sequence(synth_frames, synth_points,
                                             synth_noise, rot, synth_seed,
                                             synth_width);
      fs::create_directories(synth_out);
      std::ofstream list(fs::path(synth_out) / "scenes.list");
      if (!list) throw std::runtime_error("cannot write scene list");
      for (std::size_t t = 0; t < frames.size(); ++t) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%03zu.scene", t);
        gm::save_scene(frames[t], (fs::path(synth_out) / name).string());
        list << name << "\n";
      }
      std::cout << "wrote " << frames.size() << " scenes to " << synth_out << "\n";
      return 0;
    }

    if (*train_cmd) {
      const gm::MethodSpec method = gm::MethodSpec::parse(train_method);
      if (method.weights != gm::MethodSpec::Weights::learned)
        throw CLI::ValidationError("--method", "train expects a *-learned method");
      gm::ExperimentConfig cfg;
      cfg.loss = parse_loss(train_loss);
      cfg.lambda_grid = parse_double_list(train_lambdas);
      cfg.epsilon = train_epsilon;
      cfg.max_iterations = train_max_iters;
      cfg.ga = train_ga.cfg;
      cfg.measure_runtime = false;

      const gm::PairManifest manifest =
          manifest_from_options(train_manifest, train_scenes, train_baseline);
      const auto train_set = gm::manifest_instances(manifest, gm::Split::train, cfg);
      const auto valid_set =
          gm::manifest_instances(manifest, gm::Split::validation, cfg);
      if (train_set.empty()) throw std::runtime_error("empty training split");
      if (valid_set.empty()) throw std::runtime_error("empty validation split");

      const bool quadratic = method.model == gm::MethodSpec::Model::quadratic;
      const gm::InferenceSpec inference =
          quadratic ? gm::InferenceSpec::graduated(cfg.ga)
                    : gm::InferenceSpec::linear();
      double best_valid = std::numeric_limits<double>::infinity();
      double best_lambda = 0.0;
      gm::TrainerState best_state;
      for (const double lambda : cfg.lambda_grid) {
        gm::LearnerConfig lc;
        lc.lambda = lambda;
        lc.epsilon = cfg.epsilon;
        lc.max_iterations = cfg.max_iterations;
        lc.inference = inference;
        lc.loss = cfg.loss == gm::LossKind::Kind::hamming
                      ? gm::LossKind::hamming()
                      : gm::LossKind::endpoint(train_set.front().scene_width);
        gm::TrainerState state = gm::train(train_set, lc);
        double valid_loss = 0.0;
        for (const auto& instance : valid_set)
          valid_loss += gm::instance_loss(
              instance,
              gm::predict(state.w, instance.g, instance.g_prime, inference),
              lc.loss);
        valid_loss /= static_cast<double>(valid_set.size());
        std::cout << "lambda " << lambda << ": validation loss " << valid_loss
                  << (state.converged ? "" : " (not converged)") << "\n";
        if (valid_loss < best_valid) {
          best_valid = valid_loss;
          best_lambda = lambda;
          best_state = std::move(state);
        }
      }
      gm::save_model(best_state.w, train_model_out);
      if (!train_log_out.empty()) write_training_log(best_state, train_log_out);
      std::cout << "selected lambda " << best_lambda << ", model written to "
                << train_model_out << "\n";
      return 0;
    }

    if (*predict_cmd) {
      const gm::WeightVector w = gm::load_model(pred_model);
      const gm::SceneFile a = gm::load_scene(pred_a);
      const gm::SceneFile b = gm::load_scene(pred_b);
      gm::ExperimentConfig cfg;
      cfg.loss = pred_no_triangulation ? gm::LossKind::Kind::endpoint
                                       : gm::LossKind::Kind::hamming;
      gm::PairEntry entry{pred_a, pred_b, {}};
      std::map<int, bool> in_b;
      for (int id : b.labels) in_b[id] = true;
      for (int id : a.labels) {
        if (!in_b.count(id))
          throw std::runtime_error("scene-a landmark " + std::to_string(id) +
                                   " missing from scene-b; prediction needs no "
                                   "ground truth, pass matching ids anyway");
        entry.correspondences.emplace_back(id, id);
      }
      const gm::TrainingInstance instance =
          gm::detail::build_instance(a, b, entry, cfg);
      const gm::InferenceSpec inference =
          w.edge_weight != 0.0 ? gm::InferenceSpec::graduated(pred_ga.cfg)
                               : gm::InferenceSpec::linear();
      const gm::Matching y = gm::predict(w, instance.g, instance.g_prime, inference);
      const auto targets = y.row_targets();
      std::ofstream out(pred_out);
      if (!out) throw std::runtime_error("cannot write matching: " + pred_out);
      out << "pairs " << targets.size() << "\n";
      for (std::size_t i = 0; i < targets.size(); ++i)
        out << a.labels[i] << " " << b.labels[targets[i]] << "\n";
      std::cout << "wrote matching to " << pred_out << "\n";
      return 0;
    }

    if (*eval_cmd) {
      gm::ExperimentConfig cfg;
      cfg.loss = parse_loss(eval_loss);
      cfg.lambda_grid = parse_double_list(eval_lambdas);
      cfg.epsilon = eval_epsilon;
      cfg.max_iterations = eval_max_iters;
      cfg.ga = eval_ga.cfg;
      cfg.measure_runtime = !eval_no_timing;

      std::vector<gm::PairManifest> manifests;
      for (const std::string& m : eval_manifests)
        manifests.push_back(gm::load_manifest(m));
      if (!eval_scenes.empty()) {
        const gm::SceneSequence seq = gm::load_scene_list(eval_scenes);
        for (int b : parse_int_list(eval_baselines))
          manifests.push_back(gm::make_pairs(seq, b));
      }
      if (manifests.empty())
        throw CLI::ValidationError("input", "need --manifest or --scenes/--baselines");

      gm::ExperimentReport report;
      for (const gm::PairManifest& manifest : manifests) {
        std::stringstream methods(eval_methods);
        std::string token;
        while (std::getline(methods, token, ',')) {
          if (token.empty()) continue;
          const gm::MethodSpec method = gm::MethodSpec::parse(token);
          if (method.weights == gm::MethodSpec::Weights::learned &&
              !eval_model.empty()) {
            // Fixed-model evaluation on the test split.
            const gm::WeightVector w = gm::load_model(eval_model);
            const auto test_set =
                gm::manifest_instances(manifest, gm::Split::test, cfg);
            if (test_set.empty()) throw std::runtime_error("empty test split");
            const bool quadratic =
                method.model == gm::MethodSpec::Model::quadratic;
            const gm::InferenceSpec inference =
                quadratic ? gm::InferenceSpec::graduated(cfg.ga)
                          : gm::InferenceSpec::linear();
            gm::ReportRow row;
            row.baseline = manifest.baseline;
            row.method = method.name();
            row.test_pairs = static_cast<int>(test_set.size());
            std::vector<double> losses;
            for (const auto& instance : test_set) {
              const gm::Matching y =
                  gm::predict(w, instance.g, instance.g_prime, inference);
              losses.push_back(gm::instance_loss(
                  instance, y,
                  cfg.loss == gm::LossKind::Kind::hamming
                      ? gm::LossKind::hamming()
                      : gm::LossKind::endpoint(instance.scene_width)));
            }
            double mean = 0.0;
            for (double v : losses) mean += v;
            mean /= static_cast<double>(losses.size());
            double var = 0.0;
            for (double v : losses) var += (v - mean) * (v - mean);
            row.mean_loss = mean;
            row.stderr_ = losses.size() > 1
                              ? std::sqrt(var / (losses.size() - 1.0)) /
                                    std::sqrt(static_cast<double>(losses.size()))
                              : 0.0;
            report.rows.push_back(std::move(row));
          } else {
            report.append(gm::run_experiment(manifest, method, cfg));
          }
        }
      }
      gm::save_report(report, eval_report);
      if (!eval_plot.empty()) gm::emit_plot_data(report, eval_plot);
      std::cout << "wrote report with " << report.rows.size() << " rows to "
                << eval_report << "\n";
      return 0;
    }

    if (*plot_cmd) {
      gm::emit_plot_data(gm::load_report(plot_report), plot_out);
      std::cout << "wrote plot data to " << plot_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
