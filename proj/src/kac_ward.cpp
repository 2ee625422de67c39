#include "pattern_ising/kac_ward.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include <Eigen/LU>
#include <Eigen/SVD>
#include <Eigen/SparseLU>

#include "pattern_ising/errors.hpp"

namespace pattern_ising {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kDenseCutoff = 64;        // below this, dense LU is faster
constexpr double kSolveResidual = 1e-10;
constexpr double kDetImagTolerance = 1e-9;

void check_weights(const DirectedGraph& graph,
                   const std::vector<double>& weights) {
  if (static_cast<int>(weights.size()) != graph.directed_count())
    throw Error("weight vector does not match the directed edge count");
}

}  // namespace

SparseMatrixC transition_matrix(const DirectedGraph& graph,
                                const std::vector<double>& weights) {
  check_weights(graph, weights);
  const int n = graph.directed_count();
  std::vector<Eigen::Triplet<Complex>> triplets;
  for (int v = 0; v < graph.node_count(); ++v) {
    const auto& out = graph.out_edges(v);
    for (int o : out) {
      const int row = graph.reversal(o);  // arrives at v
      for (int g : out) {
        if (g == o) continue;
        const double turn = graph.turning(row, g);
        const Complex phase = std::polar(1.0, 0.5 * turn);
        triplets.emplace_back(row, g, weights[o] * weights[g] * phase);
      }
    }
  }
  SparseMatrixC m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

SparseMatrixC kac_ward_matrix(const DirectedGraph& graph,
                              const std::vector<double>& weights) {
  SparseMatrixC m = transition_matrix(graph, weights);
  SparseMatrixC id(m.rows(), m.cols());
  id.setIdentity();
  SparseMatrixC t = id - m;
  t.makeCompressed();
  return t;
}

struct KacWardSolver::Impl {
  SparseMatrixC matrix;
  std::unique_ptr<Eigen::SparseLU<SparseMatrixC>> sparse;
  std::unique_ptr<Eigen::PartialPivLU<Eigen::MatrixXcd>> dense;

  Eigen::VectorXcd raw_solve(const Eigen::VectorXcd& rhs) const {
    return sparse ? Eigen::VectorXcd(sparse->solve(rhs))
                  : Eigen::VectorXcd(dense->solve(rhs));
  }
};

KacWardSolver::KacWardSolver(const DirectedGraph& graph,
                             const std::vector<double>& weights)
    : impl_(std::make_unique<Impl>()) {
  impl_->matrix = kac_ward_matrix(graph, weights);
  const int n = graph.directed_count();
  if (n >= kDenseCutoff) {
    impl_->sparse = std::make_unique<Eigen::SparseLU<SparseMatrixC>>();
    impl_->sparse->compute(impl_->matrix);
    if (impl_->sparse->info() != Eigen::Success)
      throw NumericalError("sparse LU factorization failed");
  } else {
    impl_->dense = std::make_unique<Eigen::PartialPivLU<Eigen::MatrixXcd>>(
        Eigen::MatrixXcd(impl_->matrix));
  }
}

KacWardSolver::~KacWardSolver() = default;
KacWardSolver::KacWardSolver(KacWardSolver&&) noexcept = default;
KacWardSolver& KacWardSolver::operator=(KacWardSolver&&) noexcept = default;

int KacWardSolver::dimension() const {
  return static_cast<int>(impl_->matrix.rows());
}

const SparseMatrixC& KacWardSolver::matrix() const { return impl_->matrix; }

Complex KacWardSolver::determinant() const {
  return impl_->sparse ? impl_->sparse->determinant()
                       : impl_->dense->determinant();
}

double KacWardSolver::partition_function() const {
  const Complex det = determinant();
  const double mag = std::abs(det);
  if (!(mag > 0.0)) throw NumericalError("vanishing Kac-Ward determinant");
  if (std::abs(det.imag()) > kDetImagTolerance * mag)
    throw NumericalError("Kac-Ward determinant is not real: imag/|det| = " +
                         std::to_string(det.imag() / mag));
  if (det.real() <= 0.0)
    throw NumericalError("Kac-Ward determinant is not positive");
  return std::sqrt(det.real());
}

Eigen::VectorXcd KacWardSolver::solve(const Eigen::VectorXcd& rhs) const {
  Eigen::VectorXcd z = impl_->raw_solve(rhs);
  const double scale = std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
  const double residual =
      (impl_->matrix * z - rhs).lpNorm<Eigen::Infinity>() / scale;
  if (!(residual <= kSolveResidual))
    throw NumericalError("Kac-Ward solve residual " + std::to_string(residual));
  return z;
}

Eigen::VectorXcd KacWardSolver::inverse_column(int col) const {
  Eigen::VectorXcd unit = Eigen::VectorXcd::Zero(dimension());
  unit[col] = Complex(1.0, 0.0);
  return solve(unit);
}

double partition_function(const DirectedGraph& graph,
                          const std::vector<double>& weights) {
  return KacWardSolver(graph, weights).partition_function();
}

Eigen::MatrixXcd vertex_block(const DirectedGraph& graph,
                              const std::vector<double>& weights, int v) {
  check_weights(graph, weights);
  const auto& out = graph.out_edges(v);
  const int d = static_cast<int>(out.size());
  Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(d, d);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) {
      if (j == k) continue;
      const double turn = graph.turning(graph.reversal(out[j]), out[k]);
      block(j, k) =
          weights[out[j]] * weights[out[k]] * std::polar(1.0, 0.5 * turn);
    }
  return block;
}

double operator_norm(const Eigen::MatrixXcd& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  return svd.singularValues()[0];
}

double block_norm_root(const DirectedGraph& graph,
                       const std::vector<double>& weights, int v) {
  check_weights(graph, weights);
  std::vector<double> squares;
  for (int o : graph.out_edges(v)) {
    const double x2 = weights[o] * weights[o];
    if (x2 > 0.0) squares.push_back(x2);
  }
  if (squares.size() <= 1) return 0.0;

  auto angle_sum = [&](double s) {
    double total = 0.0;
    for (double x2 : squares) total += std::atan(x2 / s);
    return total;
  };

  double hi = 0.0;
  for (double x2 : squares) hi += x2;
  // angle_sum(hi) <= sum x2/hi = 1 < pi/2, so hi is above the root.
  double lo = hi;
  int guard = 0;
  while (angle_sum(lo) <= kPi / 2) {
    lo /= 2;
    if (++guard > 4000)
      throw NumericalError("block norm bracket did not close");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (angle_sum(mid) > kPi / 2)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double transition_norm_bound(double max_coupling, double beta) {
  if (!(max_coupling > 0.0)) throw Error("coupling bound must be positive");
  if (!(beta > 0.0 && beta <= 1.0))
    throw Error("norm bound applies for beta in (0, 1]");
  const double c = 2.0 * max_coupling / std::sinh(2.0 * max_coupling);
  return 1.0 - c * (1.0 - beta);
}

double critical_eigenvector_residual(const CirclePattern& pattern,
                                     const DirectedGraph& graph,
                                     const std::vector<double>& weights) {
  check_weights(graph, weights);
  Eigen::VectorXcd rho(graph.directed_count());
  double sup = 0.0;
  for (int d = 0; d < graph.directed_count(); ++d) {
    const double value = std::sqrt(pattern.edge(graph.edge(d).undirected).chord);
    rho[d] = value;
    sup = std::max(sup, value);
  }
  const Eigen::VectorXcd image = transition_matrix(graph, weights) * rho;
  double worst = 0.0;
  for (int d = 0; d < graph.directed_count(); ++d) {
    if (pattern.is_boundary(graph.edge(d).head)) continue;
    worst = std::max(worst, std::abs(image[d] - rho[d]));
  }
  return worst / sup;
}

std::string matrix_to_csv(const SparseMatrixC& m) {
  struct Entry {
    int row, col;
    Complex value;
  };
  std::vector<Entry> entries;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrixC::InnerIterator it(m, k); it; ++it)
      entries.push_back({static_cast<int>(it.row()),
                         static_cast<int>(it.col()), it.value()});
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.row != b.row) return a.row < b.row;
    return a.col < b.col;
  });
  std::string out = "row,col,re,im\n";
  char buf[128];
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g\n", e.row, e.col,
                  e.value.real(), e.value.imag());
    out += buf;
  }
  return out;
}

void export_matrix_csv(const SparseMatrixC& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << matrix_to_csv(m);
}

}  // namespace pattern_ising
