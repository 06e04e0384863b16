#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "graphmatch/core.hpp"
#include "graphmatch/rng.hpp"

namespace graphmatch {

/// One scene: labeled 2-D landmarks plus the nominal image width.
/// File format: a "width W" header line, then one "id x y" line per point.
/// Blank lines and '#' comments are ignored.
struct SceneFile {
  std::vector<Point2> points;
  std::vector<int> labels;
  double width = 1.0;
};

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] inline void parse_fail(const std::string& name, int line,
                                    const std::string& what) {
  throw std::runtime_error(name + ":" + std::to_string(line) + ": " + what);
}

}  // namespace detail

inline SceneFile parse_scene(std::istream& in, const std::string& name) {
  SceneFile scene;
  bool have_width = false;
  std::map<int, bool> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::string head;
    fields >> head;
    if (head == "width") {
      double w;
      if (!(fields >> w) || !std::isfinite(w) || w <= 0.0)
        detail::parse_fail(name, line_no, "expected positive finite width");
      scene.width = w;
      have_width = true;
      continue;
    }
    int id;
    double x, y;
    std::istringstream point_fields(line);
    if (!(point_fields >> id >> x >> y))
      detail::parse_fail(name, line_no, "expected 'id x y'");
    if (!std::isfinite(x) || !std::isfinite(y))
      detail::parse_fail(name, line_no, "non-finite coordinate");
    if (seen[id]) detail::parse_fail(name, line_no, "duplicate landmark id " + std::to_string(id));
    seen[id] = true;
    scene.labels.push_back(id);
    scene.points.push_back({x, y});
  }
  if (!have_width) throw std::runtime_error(name + ": missing 'width' header");
  return scene;
}

inline SceneFile load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene file: " + path);
  return parse_scene(in, path);
}

inline void save_scene(const SceneFile& scene, const std::string& path) {
  detail::require(scene.points.size() == scene.labels.size(),
                  "save_scene: one label per point required");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scene file: " + path);
  out << "width " << detail::format_double(scene.width) << "\n";
  for (std::size_t i = 0; i < scene.points.size(); ++i)
    out << scene.labels[i] << " " << detail::format_double(scene.points[i].x)
        << " " << detail::format_double(scene.points[i].y) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

/// An ordered scene sequence: paths plus their loaded contents.
struct SceneSequence {
  std::vector<std::string> paths;
  std::vector<SceneFile> scenes;

  std::size_t size() const noexcept { return scenes.size(); }
};

inline SceneSequence load_scene_list(const std::string& list_path) {
  std::ifstream in(list_path);
  if (!in) throw std::runtime_error("cannot open scene list: " + list_path);
  const std::filesystem::path base = std::filesystem::path(list_path).parent_path();
  SceneSequence seq;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string entry = line.substr(first, last - first + 1);
    const std::filesystem::path p = std::filesystem::path(entry).is_absolute()
                                        ? std::filesystem::path(entry)
                                        : base / entry;
    seq.paths.push_back(p.string());
    seq.scenes.push_back(load_scene(p.string()));
  }
  if (seq.scenes.empty()) throw std::runtime_error("scene list is empty: " + list_path);
  return seq;
}

/// A pair of scenes with its ground-truth landmark correspondences
/// (query id, target id).
struct PairEntry {
  std::string scene_a;
  std::string scene_b;
  std::vector<std::pair<int, int>> correspondences;
};

/// All pairs at one frame separation ("baseline"), in sequence order.
struct PairManifest {
  int baseline = 0;
  std::vector<PairEntry> entries;
};

/// Pairs every scene t with scene t+baseline and derives ground truth from
/// shared landmark ids; every query-scene id must exist in the target
/// scene. Pair i belongs to split i mod 3 (train, validation, test).
inline PairManifest make_pairs(const SceneSequence& seq, int baseline) {
  detail::require(baseline >= 0, "make_pairs: baseline must be >= 0");
  detail::require(static_cast<std::size_t>(baseline) < seq.size(),
                  "make_pairs: baseline must be smaller than the scene count");
  detail::require(seq.paths.size() == seq.scenes.size(),
                  "make_pairs: paths/scenes length mismatch");

  PairManifest manifest;
  manifest.baseline = baseline;
  for (std::size_t t = 0; t + static_cast<std::size_t>(baseline) < seq.size(); ++t) {
    const std::size_t u = t + static_cast<std::size_t>(baseline);
    PairEntry entry{seq.paths[t], seq.paths[u], {}};
    std::map<int, bool> in_target;
    for (int id : seq.scenes[u].labels) in_target[id] = true;
    for (int id : seq.scenes[t].labels) {
      detail::require(in_target.count(id) > 0,
                      "make_pairs: query landmark id " + std::to_string(id) +
                          " missing from target scene " + seq.paths[u]);
      entry.correspondences.emplace_back(id, id);
    }
    manifest.entries.push_back(std::move(entry));
  }
  detail::require(!manifest.entries.empty(), "make_pairs: no pairs produced");
  return manifest;
}

enum class Split { train = 0, validation = 1, test = 2 };

inline Split split_of(std::size_t pair_index) {
  return static_cast<Split>(pair_index % 3);
}

inline void save_manifest(const PairManifest& manifest, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << "baseline " << manifest.baseline << "\n";
  for (const PairEntry& e : manifest.entries) {
    out << "pair\t" << e.scene_a << "\t" << e.scene_b << "\t";
    for (std::size_t i = 0; i < e.correspondences.size(); ++i) {
      if (i) out << ",";
      out << e.correspondences[i].first << ":" << e.correspondences[i].second;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline PairManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto resolve = [&base](const std::string& p) {
    return std::filesystem::path(p).is_absolute() ? p : (base / p).string();
  };

  PairManifest manifest;
  std::string line;
  int line_no = 0;
  bool have_baseline = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::string head;
    fields >> head;
    if (head == "baseline") {
      if (!(fields >> manifest.baseline) || manifest.baseline < 0)
        detail::parse_fail(path, line_no, "expected nonnegative baseline");
      have_baseline = true;
      continue;
    }
    if (head != "pair") detail::parse_fail(path, line_no, "unknown record '" + head + "'");
    PairEntry entry;
    std::string pairs;
    if (!(fields >> entry.scene_a >> entry.scene_b >> pairs))
      detail::parse_fail(path, line_no, "expected 'pair a b id:id,...'");
    entry.scene_a = resolve(entry.scene_a);
    entry.scene_b = resolve(entry.scene_b);
    std::istringstream pair_fields(pairs);
    std::string token;
    while (std::getline(pair_fields, token, ',')) {
      const auto colon = token.find(':');
      if (colon == std::string::npos)
        detail::parse_fail(path, line_no, "bad correspondence '" + token + "'");
      try {
        entry.correspondences.emplace_back(std::stoi(token.substr(0, colon)),
                                           std::stoi(token.substr(colon + 1)));
      } catch (const std::exception&) {
        detail::parse_fail(path, line_no, "bad correspondence '" + token + "'");
      }
    }
    if (entry.correspondences.empty())
      detail::parse_fail(path, line_no, "pair without correspondences");
    manifest.entries.push_back(std::move(entry));
  }
  if (!have_baseline) throw std::runtime_error(path + ": missing 'baseline' header");
  if (manifest.entries.empty()) throw std::runtime_error(path + ": no pairs");
  return manifest;
}

/// Synthetic stand-in for a tracked landmark sequence: a fixed random cloud
/// rotated about its centroid by t * rotation per frame, with i.i.d.
/// Gaussian jitter scaled by noise_sigma times the cloud diameter.
/// Landmark ids persist across frames; output is a pure function of the
/// arguments.
inline std::vector<SceneFile> synth_sequence(int num_frames, int num_points,
                                             double noise_sigma,
                                             double rotation_per_frame,
                                             std::uint64_t seed,
                                             double width = 1.0) {
  detail::require(num_frames >= 1, "synth_sequence: need at least one frame");
  detail::require(num_points >= 4, "synth_sequence: need at least 4 points");
  detail::require(noise_sigma >= 0.0 && std::isfinite(noise_sigma),
                  "synth_sequence: noise_sigma must be finite and >= 0");
  detail::require(std::isfinite(rotation_per_frame),
                  "synth_sequence: rotation must be finite");
  detail::require(width > 0.0 && std::isfinite(width),
                  "synth_sequence: width must be positive");

  RandomStream rng(seed);
  std::vector<Point2> base(num_points);
  for (Point2& p : base) p = {rng.uniform() * width, rng.uniform() * width};

  double diameter = 0.0;
  Point2 centroid{0.0, 0.0};
  for (const Point2& p : base) {
    centroid.x += p.x;
    centroid.y += p.y;
  }
  centroid.x /= num_points;
  centroid.y /= num_points;
  for (int i = 0; i < num_points; ++i)
    for (int j = i + 1; j < num_points; ++j)
      diameter = std::max(diameter, distance(base[i], base[j]));
  const double jitter = noise_sigma * diameter;

  std::vector<SceneFile> frames(num_frames);
  for (int t = 0; t < num_frames; ++t) {
    SceneFile& frame = frames[t];
    frame.width = width;
    frame.points.resize(num_points);
    frame.labels.resize(num_points);
    const double angle = static_cast<double>(t) * rotation_per_frame;
    const double c = std::cos(angle), s = std::sin(angle);
    for (int i = 0; i < num_points; ++i) {
      frame.labels[i] = i;
      Point2 p = base[i];
      if (angle != 0.0) {
        const double dx = p.x - centroid.x, dy = p.y - centroid.y;
        p = {centroid.x + c * dx - s * dy, centroid.y + s * dx + c * dy};
      }
      if (noise_sigma > 0.0) {
        p.x += jitter * rng.normal();
        p.y += jitter * rng.normal();
      }
      frame.points[i] = p;
    }
  }
  return frames;
}

}  // namespace graphmatch
