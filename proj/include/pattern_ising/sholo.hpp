#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pattern_ising/bar_graph.hpp"
#include "pattern_ising/circle_pattern.hpp"
#include "pattern_ising/directed_graph.hpp"
#include "pattern_ising/kac_ward.hpp"

namespace pattern_ising {

// Unit spanner exp(-i Arg(eta) / 2) of the complex line eta^{-1/2} R
// associated with a directed edge of direction eta. The opposite direction
// gives the orthogonal line.
Complex line_direction(Point eta);

// Orthogonal projection of z onto the line spanned by the given unit vector.
// Independent of the sign of the spanner.
Complex project_to_line(Complex z, Complex line);

// Per-directed-edge lift phi(e) = rho(e) * Proj(f(edge of e); line of e) of a
// per-segment function f. The result lies in the line space: phi(e)^2 times
// the edge direction is real.
Eigen::VectorXcd s_transform(const DirectedGraph& graph,
                             const std::vector<double>& rho,
                             const Eigen::VectorXcd& f);

// Left inverse: f(e) = (phi(e) + phi(-e)) / rho(e); the two directions span
// orthogonal lines, so this undoes s_transform exactly.
Eigen::VectorXcd s_inverse(const DirectedGraph& graph,
                           const std::vector<double>& rho,
                           const Eigen::VectorXcd& phi);

// Worst |Im(phi(e)^2 * unit direction)| over directed edges, relative to
// max(1, sup |phi|)^2. Zero exactly when phi lies in the line space.
double line_space_residual(const DirectedGraph& graph,
                           const Eigen::VectorXcd& phi);

// max(1, sup |f|); the scale used by all residual checks here.
double check_scale(const Eigen::VectorXcd& f);

struct CornerCheck {
  bool ok = false;
  double worst_residual = 0.0;
};

// s-holomorphicity of a per-edge function at an interior vertex: for every
// corner of the fan at v, the two incident edges sharing that corner must
// project f to the same point of the line spanned by
// exp(-i Arg(v - corner) / 2). Throws on boundary vertices, where the fan is
// not closed.
CornerCheck is_sholomorphic(const CirclePattern& pattern,
                            const Eigen::VectorXcd& f, int v,
                            double tol = 1e-9);

// The same condition through the Kac-Ward matrix at critical weights: the
// sup norm of (T Sf) over directed edges into v, relative to check_scale(f).
// Vanishes exactly when the corner projections agree.
double sholo_operator_residual(const CirclePattern& pattern,
                               const DirectedGraph& graph,
                               const Eigen::VectorXcd& f, int v);

// Sum over edges leaving v of eta(dual edge) * f(edge): the discrete contour
// integral of f around the face of the dual surrounding v. The dual edge is
// oriented a positive quarter turn from the primal one.
Complex contour_sum(const CirclePattern& pattern, const DirectedGraph& graph,
                    const Eigen::VectorXcd& f, int v);

struct SquareContour {
  Complex sum;
  // Squared norm of Sf on edges out of v minus edges into v; matches the
  // imaginary part of the sum when f is s-holomorphic at v.
  double outgoing_minus_incoming = 0.0;
};

// Same contour applied to f^2. For s-holomorphic f the real part vanishes
// and the imaginary part is nonnegative.
SquareContour contour_sum_squared(const CirclePattern& pattern,
                                  const DirectedGraph& graph,
                                  const Eigen::VectorXcd& f, int v);

struct SquareIdentitySides {
  Complex eta_f_squared;      // eta(dual edge) * f(edge)^2
  Complex cross_term;         // 2 * unit dual direction * phi(e) * phi(-e)
  double norm_difference;     // |phi(e)|^2 - |phi(-e)|^2
};

// Both sides of the per-edge square identities: for phi in the line space,
// Re(eta* f^2) equals the cross term (which is then real) and Im(eta* f^2)
// equals the norm difference. rho cancels, so none is needed.
SquareIdentitySides square_identity_sides(const DirectedGraph& graph,
                                          const Eigen::VectorXcd& phi, int e);

struct BvpSolution {
  Eigen::VectorXcd f;    // per segment of the bar graph
  Eigen::VectorXcd phi;  // = S f, per directed edge; solves T phi = boundary
};

// Riemann-Hilbert boundary value problem on the bar graph of a core:
// given data on the outward directed edges, each value on its edge line,
// find f with S f matching the data there and (T Sf) = 0 on all directed
// edges into core vertices. Solved exactly as f = S^{-1} T^{-1} data.
// Throws Error when a datum sits off its line or off the outward frame
// (tolerance tol relative to check_scale of the data).
BvpSolution solve_boundary_problem(const BarGraph& bar,
                                   const Eigen::VectorXcd& boundary,
                                   double tol = 1e-9);

// The product T * rho on the bar graph, computed literally. Supported on the
// outward edges, where it equals rho; solving with it recovers rho.
Eigen::VectorXcd rho_normal_datum(const BarGraph& bar);

// Admissible random boundary data: a seeded uniform multiple of the line
// direction on every outward edge, zero elsewhere.
Eigen::VectorXcd random_boundary_data(const BarGraph& bar, std::uint64_t seed);

// Values of a per-segment function of the bar graph copied onto the pattern
// edges behind the segments (zero on pattern edges away from the core).
// At core vertices this makes the pattern-based checks above applicable to
// boundary-value-problem solutions.
Eigen::VectorXcd pattern_edge_values(const BarGraph& bar,
                                     const Eigen::VectorXcd& f_segments);

// JSON round trip for problems and solutions: boundary data (and, when
// given, the solution) keyed by directed-edge id.
std::string bvp_to_json(const BarGraph& bar, const Eigen::VectorXcd& boundary,
                        const BvpSolution* solution = nullptr);
Eigen::VectorXcd boundary_from_json(const BarGraph& bar,
                                    const std::string& text);

}  // namespace pattern_ising
