#pragma once

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "pattern_ising/circle_pattern.hpp"
#include "pattern_ising/directed_graph.hpp"

namespace pattern_ising {

using Complex = std::complex<double>;
using SparseMatrixC = Eigen::SparseMatrix<Complex>;

// Transition operator between consecutive directed edges: entry (e, g) is
// x(-e) * x(g) * exp(i/2 * turning(e, g)) when head(e) == tail(g) and g is
// not the reversal of e.
SparseMatrixC transition_matrix(const DirectedGraph& graph,
                                const std::vector<double>& weights);

// Identity minus the transition operator.
SparseMatrixC kac_ward_matrix(const DirectedGraph& graph,
                              const std::vector<double>& weights);

// Factorized Kac-Ward matrix: sparse LU for large graphs, dense LU for small
// ones. Solves are checked against a residual ceiling.
class KacWardSolver {
 public:
  KacWardSolver(const DirectedGraph& graph, const std::vector<double>& weights);
  ~KacWardSolver();
  KacWardSolver(KacWardSolver&&) noexcept;
  KacWardSolver& operator=(KacWardSolver&&) noexcept;

  int dimension() const;
  const SparseMatrixC& matrix() const;
  Complex determinant() const;

  // sqrt(det); requires a real positive determinant.
  double partition_function() const;

  Eigen::VectorXcd solve(const Eigen::VectorXcd& rhs) const;

  // One column of the inverse.
  Eigen::VectorXcd inverse_column(int col) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

double partition_function(const DirectedGraph& graph,
                          const std::vector<double>& weights);

// Restriction of the transition operator to one vertex: rows are reversed
// out-edges, columns are out-edges, both in out_edges(v) order. Hermitian.
Eigen::MatrixXcd vertex_block(const DirectedGraph& graph,
                              const std::vector<double>& weights, int v);

double operator_norm(const Eigen::MatrixXcd& m);

// Norm of the vertex block at a vertex whose edges close up around it, found
// as the root of sum_k atan(x_k^2 / s) = pi/2 by bisection. At a boundary
// vertex the fan is only part of a closed one, so this value is an upper
// bound for the true block norm.
double block_norm_root(const DirectedGraph& graph,
                       const std::vector<double>& weights, int v);

// 1 - c*(1-beta) with c = 2M/sinh(2M); a ceiling for the transition operator
// norm of the beta-deformed weights when every coupling is at most M.
double transition_norm_bound(double max_coupling, double beta);

// How far sqrt(chord length) is from being a fixed vector of the transition
// operator, measured on directed edges pointing into interior vertices,
// relative to the sup norm of the vector.
double critical_eigenvector_residual(const CirclePattern& pattern,
                                     const DirectedGraph& graph,
                                     const std::vector<double>& weights);

// "row,col,re,im" lines, one per stored entry, ordered by row then column.
std::string matrix_to_csv(const SparseMatrixC& m);
void export_matrix_csv(const SparseMatrixC& m, const std::string& path);

}  // namespace pattern_ising
