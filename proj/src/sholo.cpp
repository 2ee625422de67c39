#include "pattern_ising/sholo.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <utility>

#include <json.hpp>

#include "pattern_ising/errors.hpp"
#include "pattern_ising/weights.hpp"

namespace pattern_ising {

namespace {

constexpr Complex kImaginary{0.0, 1.0};

Complex unit_direction(const Point& eta) {
  const double len = std::abs(eta);
  if (len == 0.0) throw NumericalError("unit direction of a zero vector");
  return eta / len;
}

std::string hex_fingerprint(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace

Complex line_direction(Point eta) {
  if (std::abs(eta) == 0.0)
    throw NumericalError("line direction of a zero vector");
  return std::polar(1.0, -0.5 * std::arg(eta));
}

Complex project_to_line(Complex z, Complex line) {
  return line * std::real(std::conj(line) * z);
}

Eigen::VectorXcd s_transform(const DirectedGraph& graph,
                             const std::vector<double>& rho,
                             const Eigen::VectorXcd& f) {
  Eigen::VectorXcd phi(graph.directed_count());
  for (int d = 0; d < graph.directed_count(); ++d) {
    const DirectedEdge& de = graph.edge(d);
    phi[d] =
        rho[d] * project_to_line(f[de.undirected], line_direction(de.direction));
  }
  return phi;
}

Eigen::VectorXcd s_inverse(const DirectedGraph& graph,
                           const std::vector<double>& rho,
                           const Eigen::VectorXcd& phi) {
  Eigen::VectorXcd f = Eigen::VectorXcd::Zero(graph.segment_count());
  for (int d = 0; d < graph.directed_count(); ++d) {
    const int rev = graph.reversal(d);
    if (rev < d) continue;
    f[graph.edge(d).undirected] = (phi[d] + phi[rev]) / rho[d];
  }
  return f;
}

double line_space_residual(const DirectedGraph& graph,
                           const Eigen::VectorXcd& phi) {
  double scale = 1.0;
  for (int d = 0; d < graph.directed_count(); ++d)
    scale = std::max(scale, std::abs(phi[d]));
  double worst = 0.0;
  for (int d = 0; d < graph.directed_count(); ++d) {
    const Complex u = unit_direction(graph.edge(d).direction);
    worst = std::max(worst, std::abs(std::imag(phi[d] * phi[d] * u)));
  }
  return worst / (scale * scale);
}

double check_scale(const Eigen::VectorXcd& f) {
  double sup = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i)
    sup = std::max(sup, std::abs(f[i]));
  return std::max(1.0, sup);
}

CornerCheck is_sholomorphic(const CirclePattern& pattern,
                            const Eigen::VectorXcd& f, int v, double tol) {
  if (f.size() != pattern.edge_count())
    throw Error("edge function has wrong size");
  if (v < 0 || v >= pattern.vertex_count())
    throw Error("vertex out of range");
  if (pattern.is_boundary(v))
    throw Error("s-holomorphicity is undefined at boundary vertex " +
                std::to_string(v));

  std::map<int, std::vector<int>> corner_edges;
  for (int e : pattern.edges_at(v)) {
    corner_edges[pattern.edge(e).du].push_back(e);
    corner_edges[pattern.edge(e).dv].push_back(e);
  }
  CornerCheck result;
  for (const auto& [corner, edges] : corner_edges) {
    if (edges.size() != 2)
      throw Error("fan at vertex " + std::to_string(v) +
                  " is not closed at corner " + std::to_string(corner));
    const Complex line = std::polar(
        1.0,
        -0.5 * std::arg(pattern.vertex(v).pos - pattern.dual_position(corner)));
    const Complex diff = project_to_line(f[edges[0]], line) -
                         project_to_line(f[edges[1]], line);
    result.worst_residual = std::max(result.worst_residual, std::abs(diff));
  }
  result.ok = result.worst_residual <= tol * check_scale(f);
  return result;
}

double sholo_operator_residual(const CirclePattern& pattern,
                               const DirectedGraph& graph,
                               const Eigen::VectorXcd& f, int v) {
  const std::vector<double> weights = directed_weights_critical(pattern, graph);
  const std::vector<double> rho = chord_root_weights(pattern, graph);
  const Eigen::VectorXcd phi = s_transform(graph, rho, f);

  double worst = 0.0;
  for (int o : graph.out_edges(v)) {
    const int row = graph.reversal(o);
    Complex value = phi[row];
    for (int g : graph.out_edges(v)) {
      if (g == o) continue;
      value -= weights[o] * weights[g] *
               std::polar(1.0, 0.5 * graph.turning(row, g)) * phi[g];
    }
    worst = std::max(worst, std::abs(value));
  }
  return worst / check_scale(f);
}

Complex contour_sum(const CirclePattern& pattern, const DirectedGraph& graph,
                    const Eigen::VectorXcd& f, int v) {
  Complex sum = 0.0;
  for (int o : graph.out_edges(v)) {
    const DirectedEdge& de = graph.edge(o);
    const double chord = pattern.edge(de.undirected).chord;
    sum += kImaginary * unit_direction(de.direction) * chord * f[de.undirected];
  }
  return sum;
}

SquareContour contour_sum_squared(const CirclePattern& pattern,
                                  const DirectedGraph& graph,
                                  const Eigen::VectorXcd& f, int v) {
  const std::vector<double> rho = chord_root_weights(pattern, graph);
  const Eigen::VectorXcd phi = s_transform(graph, rho, f);
  SquareContour result;
  result.sum = 0.0;
  for (int o : graph.out_edges(v)) {
    const DirectedEdge& de = graph.edge(o);
    const double chord = pattern.edge(de.undirected).chord;
    const Complex value = f[de.undirected];
    result.sum += kImaginary * unit_direction(de.direction) * chord * value *
                  value;
    result.outgoing_minus_incoming +=
        std::norm(phi[o]) - std::norm(phi[graph.reversal(o)]);
  }
  return result;
}

SquareIdentitySides square_identity_sides(const DirectedGraph& graph,
                                          const Eigen::VectorXcd& phi, int e) {
  const int rev = graph.reversal(e);
  const Complex u = unit_direction(graph.edge(e).direction);
  const Complex sum = phi[e] + phi[rev];
  SquareIdentitySides sides;
  sides.eta_f_squared = kImaginary * u * sum * sum;
  sides.cross_term = 2.0 * kImaginary * u * phi[e] * phi[rev];
  sides.norm_difference = std::norm(phi[e]) - std::norm(phi[rev]);
  return sides;
}

BvpSolution solve_boundary_problem(const BarGraph& bar,
                                   const Eigen::VectorXcd& boundary,
                                   double tol) {
  const DirectedGraph& graph = bar.graph();
  if (boundary.size() != graph.directed_count())
    throw Error("boundary data has wrong size");

  std::vector<char> outward(graph.directed_count(), 0);
  for (int d : bar.outward_edges()) outward[d] = 1;
  const double scale = check_scale(boundary);
  for (int d = 0; d < graph.directed_count(); ++d) {
    if (!outward[d]) {
      if (std::abs(boundary[d]) > tol * scale)
        throw Error("boundary datum off the outward frame at directed edge " +
                    std::to_string(d));
      continue;
    }
    // On the admissible line the square times the unit direction is |datum|^2;
    // on the orthogonal line it is -|datum|^2, so check the sign too.
    const Complex u = unit_direction(graph.edge(d).direction);
    const Complex square = boundary[d] * boundary[d] * u;
    if (std::abs(std::imag(square)) > tol * scale * scale ||
        std::real(square) < -tol * scale * scale)
      throw Error("boundary datum off its line at directed edge " +
                  std::to_string(d));
  }

  KacWardSolver solver(graph, bar.weights());
  BvpSolution solution;
  solution.phi = solver.solve(boundary);
  solution.f = s_inverse(graph, bar.chord_roots(), solution.phi);
  return solution;
}

Eigen::VectorXcd rho_normal_datum(const BarGraph& bar) {
  const SparseMatrixC t = kac_ward_matrix(bar.graph(), bar.weights());
  Eigen::VectorXcd rho(bar.graph().directed_count());
  for (int d = 0; d < bar.graph().directed_count(); ++d)
    rho[d] = bar.chord_roots()[d];
  return t * rho;
}

Eigen::VectorXcd random_boundary_data(const BarGraph& bar,
                                      std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::VectorXcd boundary =
      Eigen::VectorXcd::Zero(bar.graph().directed_count());
  for (int d : bar.outward_edges())
    boundary[d] = line_direction(bar.graph().edge(d).direction) * uni(gen);
  return boundary;
}

Eigen::VectorXcd pattern_edge_values(const BarGraph& bar,
                                     const Eigen::VectorXcd& f_segments) {
  Eigen::VectorXcd values =
      Eigen::VectorXcd::Zero(bar.pattern().edge_count());
  for (int seg = 0; seg < bar.graph().segment_count(); ++seg)
    values[bar.segment_edge(seg)] = f_segments[seg];
  return values;
}

std::string bvp_to_json(const BarGraph& bar, const Eigen::VectorXcd& boundary,
                        const BvpSolution* solution) {
  nlohmann::json j;
  j["pattern_fingerprint"] = hex_fingerprint(pattern_fingerprint(bar.pattern()));
  nlohmann::json data = nlohmann::json::object();
  for (int d : bar.outward_edges())
    data[std::to_string(d)] = {boundary[d].real(), boundary[d].imag()};
  j["boundary"] = std::move(data);
  if (solution != nullptr) {
    nlohmann::json f = nlohmann::json::object();
    for (int seg = 0; seg < bar.graph().segment_count(); ++seg)
      f[std::to_string(seg)] = {solution->f[seg].real(),
                                solution->f[seg].imag()};
    nlohmann::json phi = nlohmann::json::object();
    for (int d = 0; d < bar.graph().directed_count(); ++d)
      phi[std::to_string(d)] = {solution->phi[d].real(),
                                solution->phi[d].imag()};
    j["solution"] = {{"f", std::move(f)}, {"phi", std::move(phi)}};
  }
  return j.dump(2);
}

Eigen::VectorXcd boundary_from_json(const BarGraph& bar,
                                    const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    Eigen::VectorXcd boundary =
        Eigen::VectorXcd::Zero(bar.graph().directed_count());
    for (const auto& [key, value] : j.at("boundary").items()) {
      const int d = std::stoi(key);
      if (d < 0 || d >= bar.graph().directed_count())
        throw BuildError("boundary datum for unknown directed edge " + key);
      boundary[d] = Complex(value.at(0).get<double>(),
                            value.at(1).get<double>());
    }
    return boundary;
  } catch (const nlohmann::json::exception& e) {
    throw BuildError(std::string("malformed boundary data: ") + e.what());
  }
}

}  // namespace pattern_ising
