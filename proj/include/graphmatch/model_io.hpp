#pragma once

#include <cmath>
#include <fstream>
#include <string>

#include "graphmatch/core.hpp"
#include "graphmatch/scene.hpp"

namespace graphmatch {

/// Model files hold w in decimal text: a "dim N" header, N node weights one
/// per line, then the edge weight.
inline void save_model(const WeightVector& w, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << "dim " << w.node_weights.size() << "\n";
  for (double v : w.node_weights) out << detail::format_double(v) << "\n";
  out << detail::format_double(w.edge_weight) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline WeightVector load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::string head;
  std::size_t dim = 0;
  if (!(in >> head >> dim) || head != "dim")
    throw std::runtime_error(path + ": expected 'dim N' header");
  WeightVector w;
  w.node_weights.resize(dim);
  for (std::size_t r = 0; r < dim; ++r) {
    if (!(in >> w.node_weights[r]) || !std::isfinite(w.node_weights[r]))
      throw std::runtime_error(path + ": bad node weight " + std::to_string(r));
  }
  if (!(in >> w.edge_weight) || !std::isfinite(w.edge_weight))
    throw std::runtime_error(path + ": bad edge weight");
  double extra;
  if (in >> extra) throw std::runtime_error(path + ": trailing values");
  return w;
}

}  // namespace graphmatch
