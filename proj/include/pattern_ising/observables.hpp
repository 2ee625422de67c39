#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pattern_ising/circle_pattern.hpp"
#include "pattern_ising/directed_graph.hpp"
#include "pattern_ising/kac_ward.hpp"
#include "pattern_ising/weights.hpp"

namespace pattern_ising {

enum class CorrelationMethod { kKacWard, kSpinOracle, kHighTemperature };

// "kacward", "spin_oracle" or "hte_oracle"; the tags used in reports.
std::string method_name(CorrelationMethod method);

struct CorrelationResult {
  int u = -1;
  int v = -1;
  double beta = 0.0;
  double value = 0.0;
  CorrelationMethod method = CorrelationMethod::kKacWard;
  // Hash of the disorder-line route behind the value; zero when none was
  // needed (coinciding endpoints or oracle methods).
  std::uint64_t defect_fingerprint = 0;
};

struct CorrelationBounds {
  double lower = 0.0;
  double value = 0.0;
  double upper = 0.0;
};

// Exact free-boundary pair correlations of the Ising model on the pattern,
// through the factored Kac-Ward matrix of disorder-deformed weights. The
// pattern must outlive the engine.
class CorrelationEngine {
 public:
  CorrelationEngine(const CirclePattern& pattern, double beta);

  double beta() const { return beta_; }
  const DirectedGraph& graph() const { return graph_; }
  const std::vector<double>& weights() const { return weights_; }
  double partition_function() const { return z_; }

  // <sigma_u sigma_v>, disorder line found by breadth-first search.
  CorrelationResult two_point(int u, int v) const;

  // Same along an explicit corner route; the value is route-independent.
  CorrelationResult two_point_through(int u, int v,
                                      const std::vector<int>& corners) const;

  // The value together with a one-entry lower bound (largest weighted
  // undeformed inverse entry between the endpoint fans) and an upper bound
  // (weighted absolute sum of the deformed inverse entries entering the
  // exact formula).
  CorrelationBounds bounds(int u, int v) const;

 private:
  CorrelationResult evaluate(const DefectLine& line) const;

  const CirclePattern* pattern_;
  double beta_;
  DirectedGraph graph_;
  std::vector<double> weights_;
  KacWardSolver solver_;  // undeformed system, shared by Z and lower bounds
  double z_ = 0.0;
};

// Reference values through exhaustive enumeration (oracle module).
CorrelationResult spin_oracle_two_point(const CirclePattern& pattern,
                                        double beta, int u, int v);
CorrelationResult high_temperature_two_point(const CirclePattern& pattern,
                                             double beta, int u, int v);

// Boundary-flux functional of a connected vertex set S containing v: the sum
// over edges (u, w) leaving S of tanh(beta J_uw) times the free-boundary
// correlation of v and u in the model induced on S. Computed by exhaustive
// spin enumeration.
double phi_functional(const CirclePattern& pattern, double beta,
                      const std::vector<int>& set, int v);

// sqrt(r / R) * tan(eps / 2): r the largest neighbor radius at v, R the
// largest radius overall, eps the widest margin such that all half angles
// lie in [eps, pi/2 - eps]. A floor for phi_functional at beta = 1.
double phi_lower_bound(const CirclePattern& pattern, int v);

// All connected vertex sets containing v, restricted to `allowed` (all
// vertices when empty) and to at most max_size elements (no cap when 0).
std::vector<std::vector<int>> connected_sets_containing(
    const CirclePattern& pattern, int v, int max_size,
    const std::vector<int>& allowed = {});

struct Magnetization {
  double value = 0.0;
  double std_error = 0.0;  // zero when exact
  bool exact = true;
  long samples = 0;
};

// <sigma_v> with all boundary spins pinned to +1, realized as fields on the
// interior spins. Exact enumeration up to 22 interior spins, seeded
// Metropolis sampling with batch-means errors beyond.
Magnetization magnetization_plus(const CirclePattern& pattern, double beta,
                                 int v, std::uint64_t seed = 1);

struct DifferentialInequalityPoint {
  double beta = 0.0;
  double magnetization = 0.0;
  double derivative = 0.0;    // centered difference, step 1e-4
  double phi_infimum = 0.0;   // over connected interior sets containing v
  double rhs = 0.0;           // phi_infimum * (1 - m^2) / beta
  double slack = 0.0;         // derivative - rhs
};

// Verifies d/dbeta <sigma_v>+ >= phi_inf * (1 - m^2) / beta at each grid
// point. The infimum is exhaustive over connected interior sets containing
// v; the patch must have at most 12 interior vertices.
std::vector<DifferentialInequalityPoint> differential_inequality_check(
    const CirclePattern& pattern, int v, const std::vector<double>& betas);

struct DecayPoint {
  int u = -1;
  int distance = 0;
  double correlation = 0.0;
};

struct DecayFit {
  double rate = 0.0;  // least-squares slope of -log correlation vs distance
  double intercept = 0.0;
  std::vector<DecayPoint> points;
};

// Correlations from v to every vertex within the given graph distance,
// fitted to exponential decay. Throws unless at least three distinct
// distances contribute.
DecayFit decay_rate_fit(const CirclePattern& pattern, double beta, int v,
                        int max_distance);

// (distance-1) * (-log eps) - log(max_degree^2 / (1 - eps)): every
// -log correlation at the given graph distance must exceed this when the
// transition-operator norm is at most eps < 1.
double correlation_log_floor(int distance, int max_degree, double eps);

// Sum of <sigma_u sigma_v> over every u in the pattern (self term included).
double finite_susceptibility(const CirclePattern& pattern, double beta, int v);

// "beta,d,u,v,value,method" lines; d is the graph distance from u to v.
std::string correlations_to_csv(const CirclePattern& pattern,
                                const std::vector<CorrelationResult>& results);

}  // namespace pattern_ising
