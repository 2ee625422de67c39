#pragma once

#include <string>
#include <vector>

#include "pattern_ising/circle_pattern.hpp"

namespace pattern_ising {

struct SvgOptions {
  double scale = 80.0;        // pixels per geometry unit
  double margin = 1.2;        // extra geometry units around the bounding box
  bool draw_circles = true;   // primal circles
  bool draw_edges = true;     // primal edges
  bool draw_chords = true;    // dual chords
  bool label_vertices = false;
  // One value per edge (empty for none): edges are colored from light gray
  // at the smallest magnitude to red at the largest.
  std::vector<double> edge_values;
};

// Deterministic rendering: equal patterns and options give byte-equal output.
std::string render_svg(const CirclePattern& pattern, const SvgOptions& options = {});

void save_svg(const CirclePattern& pattern, const std::string& path,
              const SvgOptions& options = {});

}  // namespace pattern_ising
