#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "pattern_ising/circle_pattern.hpp"
#include "pattern_ising/directed_graph.hpp"
#include "pattern_ising/geometry.hpp"

// Exhaustive reference computations on small graphs. Everything here is
// deliberately independent of the linear-algebra pipeline: plain sums over
// subsets, spin assignments, or parity vectors, so the two routes can be
// compared in tests. All enumerations enforce hard size caps and throw
// SizeLimitError beyond them.
namespace pattern_ising::oracle {

using Complex = std::complex<double>;

// A straight-line drawing used for subset sums; positions matter only for
// crossing signs and turning angles.
struct PlanarDrawing {
  std::vector<Point> positions;
  std::vector<std::pair<int, int>> edges;

  int vertex_count() const { return static_cast<int>(positions.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }
};

PlanarDrawing drawing_from_pattern(const CirclePattern& pattern);

// Sum of prod_{e in w} weight[e] over subsets w whose odd-degree vertex set
// equals odd_vertices. With crossing_signs, each subset is weighted by
// (-1)^(number of proper pairwise edge crossings).
double subgraph_generating_sum(const PlanarDrawing& drawing,
                               const std::vector<double>& weights,
                               const std::vector<int>& odd_vertices,
                               bool crossing_signs);

double even_subgraph_sum(const PlanarDrawing& drawing,
                         const std::vector<double>& weights,
                         bool crossing_signs = false);

// Ratio of the two-sourced sum to the even sum; with weights tanh(K_e) this
// is the spin pair correlation of the free-boundary model.
double two_point_high_temperature(const PlanarDrawing& drawing,
                                  const std::vector<double>& weights, int u,
                                  int v);

// Nearest-neighbour spin model with optional external fields. Couplings are
// the full exponents (inverse temperature already folded in).
struct SpinModel {
  int spins = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<double> couplings;
  std::vector<double> fields;  // empty means zero field everywhere
};

SpinModel spin_model_from_pattern(const CirclePattern& pattern, double beta);

struct SpinRequest {
  std::vector<std::pair<int, int>> pairs;  // pair correlations to report
  std::vector<int> singles;                // magnetizations to report
};

struct SpinStatistics {
  double partition = 0.0;
  std::vector<double> pair_correlation;
  std::vector<double> magnetization;
};

// One sweep over all 2^n spin assignments in Gray-code order.
SpinStatistics enumerate_spins(const SpinModel& model,
                               const SpinRequest& request);

double spin_two_point(const SpinModel& model, int u, int v);
double spin_magnetization(const SpinModel& model, int v);

// Sum over integer-valued flows with prescribed odd-parity sources, reduced
// to a parity enumeration: sinh on odd edges, cosh on even ones.
double current_source_sum(const SpinModel& model,
                          const std::vector<int>& sources);

// Verifies that two sourced flow systems can be traded for two sourceless
// ones restricted to configurations connecting the sources. Returns both
// sides through the out parameters.
void switching_identity(const SpinModel& model, int u, int v, double* sourced,
                        double* sourceless_connected);

// Direct configuration sum for one entry of the inverse Kac-Ward matrix
// built from the symmetric weight lift (sqrt of the undirected weight on
// both directions). Curves start at the midpoint of the start edge and end
// at the midpoint of the end edge; at every vertex the walk continues along
// the unused configuration edge with the largest turning angle. Assumes a
// crossing-free drawing. The underlying undirected edges must differ.
Complex fermionic_observable(const DirectedGraph& graph,
                             const std::vector<double>& segment_weights,
                             int start_directed, int end_directed);

}  // namespace pattern_ising::oracle
