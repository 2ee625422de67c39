#include "pattern_ising/observables.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <utility>

#include "pattern_ising/errors.hpp"
#include "pattern_ising/geometry.hpp"
#include "pattern_ising/oracle.hpp"

namespace pattern_ising {

constexpr double kPi = std::numbers::pi;

namespace {

std::uint64_t route_fingerprint(const DefectLine& line) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t value) {
    for (int b = 0; b < 8; ++b) {
      h ^= (value >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  mix(static_cast<std::uint64_t>(line.source));
  mix(static_cast<std::uint64_t>(line.target));
  for (int corner : line.corners) mix(static_cast<std::uint64_t>(corner));
  return h;
}

std::vector<int> bfs_distances(const CirclePattern& pattern, int v) {
  std::vector<int> dist(pattern.vertex_count(), -1);
  std::deque<int> queue{v};
  dist[v] = 0;
  while (!queue.empty()) {
    const int a = queue.front();
    queue.pop_front();
    for (int e : pattern.edges_at(a)) {
      const int b = pattern.other_end(e, a);
      if (dist[b] < 0) {
        dist[b] = dist[a] + 1;
        queue.push_back(b);
      }
    }
  }
  return dist;
}

}  // namespace

std::string method_name(CorrelationMethod method) {
  switch (method) {
    case CorrelationMethod::kKacWard:
      return "kacward";
    case CorrelationMethod::kSpinOracle:
      return "spin_oracle";
    case CorrelationMethod::kHighTemperature:
      return "hte_oracle";
  }
  throw Error("unknown correlation method");
}

CorrelationEngine::CorrelationEngine(const CirclePattern& pattern, double beta)
    : pattern_(&pattern),
      beta_(beta),
      graph_(graph_from_pattern(pattern)),
      weights_(directed_weights_beta(pattern, graph_, beta)),
      solver_(graph_, weights_) {
  z_ = solver_.partition_function();
}

CorrelationResult CorrelationEngine::evaluate(const DefectLine& line) const {
  const std::vector<double> deformed = apply_defect(weights_, line);
  KacWardSolver solver(graph_, deformed);
  const double z_deformed = solver.partition_function();

  Complex sum = 0.0;
  for (int e : graph_.in_edges(line.source)) {
    const Eigen::VectorXcd column = solver.inverse_column(e);
    const double tail_phase =
        turning_angle(graph_.edge(e).direction, line.start_direction);
    const double x_in = deformed[graph_.reversal(e)];
    for (int c : graph_.out_edges(line.target)) {
      const double head_phase =
          turning_angle(line.end_direction, graph_.edge(c).direction);
      sum += deformed[c] * x_in *
             std::polar(1.0, 0.5 * (head_phase + tail_phase)) * column[c];
    }
  }
  const Complex total = std::polar(1.0, 0.5 * line.total_turning) * sum;
  const double ratio = z_deformed / z_;

  CorrelationResult result;
  result.u = line.source;
  result.v = line.target;
  result.beta = beta_;
  result.value = -ratio * total.real();
  result.method = CorrelationMethod::kKacWard;
  result.defect_fingerprint = route_fingerprint(line);
  if (ratio * std::abs(total.imag()) >
      1e-9 * std::max(1.0, std::abs(result.value)))
    throw NumericalError(
        "pair correlation came out with a non-negligible imaginary part");
  return result;
}

CorrelationResult CorrelationEngine::two_point(int u, int v) const {
  if (u == v) {
    CorrelationResult result;
    result.u = u;
    result.v = v;
    result.beta = beta_;
    result.value = 1.0;
    return result;
  }
  return evaluate(defect_line(*pattern_, graph_, u, v));
}

CorrelationResult CorrelationEngine::two_point_through(
    int u, int v, const std::vector<int>& corners) const {
  return evaluate(defect_line_through(*pattern_, graph_, u, v, corners));
}

CorrelationBounds CorrelationEngine::bounds(int u, int v) const {
  if (u == v) return {1.0, 1.0, 1.0};
  const DefectLine line = defect_line(*pattern_, graph_, u, v);
  const std::vector<double> deformed = apply_defect(weights_, line);
  KacWardSolver solver(graph_, deformed);
  const double z_deformed = solver.partition_function();

  Complex sum = 0.0;
  CorrelationBounds result;
  for (int e : graph_.in_edges(u)) {
    const Eigen::VectorXcd deformed_column = solver.inverse_column(e);
    const Eigen::VectorXcd plain_column = solver_.inverse_column(e);
    const double tail_phase =
        turning_angle(graph_.edge(e).direction, line.start_direction);
    const double x_in = deformed[graph_.reversal(e)];
    const double plain_in = weights_[graph_.reversal(e)];
    for (int c : graph_.out_edges(v)) {
      const double head_phase =
          turning_angle(line.end_direction, graph_.edge(c).direction);
      sum += deformed[c] * x_in *
             std::polar(1.0, 0.5 * (head_phase + tail_phase)) *
             deformed_column[c];
      result.upper +=
          std::abs(deformed[c]) * std::abs(x_in) * std::abs(deformed_column[c]);
      result.lower = std::max(
          result.lower, weights_[c] * plain_in * std::abs(plain_column[c]));
    }
  }
  result.value =
      -(z_deformed / z_) * (std::polar(1.0, 0.5 * line.total_turning) * sum)
           .real();
  return result;
}

CorrelationResult spin_oracle_two_point(const CirclePattern& pattern,
                                        double beta, int u, int v) {
  const oracle::SpinModel model = oracle::spin_model_from_pattern(pattern, beta);
  CorrelationResult result;
  result.u = u;
  result.v = v;
  result.beta = beta;
  result.method = CorrelationMethod::kSpinOracle;
  result.value = oracle::spin_two_point(model, u, v);
  return result;
}

CorrelationResult high_temperature_two_point(const CirclePattern& pattern,
                                             double beta, int u, int v) {
  const oracle::PlanarDrawing drawing = oracle::drawing_from_pattern(pattern);
  const std::vector<double> couplings = critical_couplings(pattern);
  std::vector<double> tanh_weights(couplings.size());
  for (std::size_t e = 0; e < couplings.size(); ++e)
    tanh_weights[e] = std::tanh(beta * couplings[e]);
  CorrelationResult result;
  result.u = u;
  result.v = v;
  result.beta = beta;
  result.method = CorrelationMethod::kHighTemperature;
  result.value = oracle::two_point_high_temperature(drawing, tanh_weights, u, v);
  return result;
}

double phi_functional(const CirclePattern& pattern, double beta,
                      const std::vector<int>& set, int v) {
  std::vector<int> index(pattern.vertex_count(), -1);
  for (std::size_t k = 0; k < set.size(); ++k) {
    const int a = set[k];
    if (a < 0 || a >= pattern.vertex_count())
      throw Error("phi functional: vertex out of range");
    if (index[a] >= 0) throw Error("phi functional: repeated vertex");
    index[a] = static_cast<int>(k);
  }
  if (v < 0 || v >= pattern.vertex_count() || index[v] < 0)
    throw Error("phi functional: the base vertex must belong to the set");

  // Connectivity of the induced subgraph.
  std::vector<char> reached(set.size(), 0);
  std::deque<int> queue{v};
  reached[index[v]] = 1;
  std::size_t found = 1;
  while (!queue.empty()) {
    const int a = queue.front();
    queue.pop_front();
    for (int e : pattern.edges_at(a)) {
      const int b = pattern.other_end(e, a);
      if (index[b] >= 0 && !reached[index[b]]) {
        reached[index[b]] = 1;
        ++found;
        queue.push_back(b);
      }
    }
  }
  if (found != set.size()) throw Error("phi functional needs a connected set");

  const std::vector<double> couplings = critical_couplings(pattern);
  oracle::SpinModel model;
  model.spins = static_cast<int>(set.size());
  // tanh(beta J) flowing out of the set, accumulated at the inside endpoint.
  std::vector<double> outflow(set.size(), 0.0);
  std::vector<char> has_leaving(set.size(), 0);
  for (int e = 0; e < pattern.edge_count(); ++e) {
    const Edge& edge = pattern.edge(e);
    const bool in_u = index[edge.u] >= 0;
    const bool in_v = index[edge.v] >= 0;
    if (in_u && in_v) {
      model.edges.emplace_back(index[edge.u], index[edge.v]);
      model.couplings.push_back(beta * couplings[e]);
    } else if (in_u != in_v) {
      const int inside = in_u ? index[edge.u] : index[edge.v];
      outflow[inside] += std::tanh(beta * couplings[e]);
      has_leaving[inside] = 1;
    }
  }

  oracle::SpinRequest request;
  std::vector<int> sites;
  for (std::size_t k = 0; k < set.size(); ++k) {
    if (!has_leaving[k]) continue;
    request.pairs.emplace_back(index[v], static_cast<int>(k));
    sites.push_back(static_cast<int>(k));
  }
  if (sites.empty()) return 0.0;
  const oracle::SpinStatistics stats = oracle::enumerate_spins(model, request);
  double total = 0.0;
  for (std::size_t i = 0; i < sites.size(); ++i)
    total += outflow[sites[i]] * stats.pair_correlation[i];
  return total;
}

double phi_lower_bound(const CirclePattern& pattern, int v) {
  if (v < 0 || v >= pattern.vertex_count())
    throw Error("phi lower bound: vertex out of range");
  double neighbor_radius = 0.0;
  for (int e : pattern.edges_at(v))
    neighbor_radius = std::max(
        neighbor_radius, pattern.vertex(pattern.other_end(e, v)).radius);
  double max_radius = 0.0;
  for (int k = 0; k < pattern.vertex_count(); ++k)
    max_radius = std::max(max_radius, pattern.vertex(k).radius);
  double eps = kPi / 4.0;
  for (const Edge& edge : pattern.edges()) {
    for (double theta : {edge.half_angle_u, edge.half_angle_v})
      eps = std::min({eps, theta, kPi / 2.0 - theta});
  }
  return std::sqrt(neighbor_radius / max_radius) * std::tan(0.5 * eps);
}

std::vector<std::vector<int>> connected_sets_containing(
    const CirclePattern& pattern, int v, int max_size,
    const std::vector<int>& allowed) {
  std::vector<int> pool = allowed;
  if (pool.empty()) {
    pool.resize(pattern.vertex_count());
    for (int k = 0; k < pattern.vertex_count(); ++k) pool[k] = k;
  }
  const int n = static_cast<int>(pool.size());
  if (n > 22)
    throw SizeLimitError(
        "connected-set enumeration is capped at 22 candidate vertices");
  std::vector<int> position(pattern.vertex_count(), -1);
  for (int k = 0; k < n; ++k) {
    if (pool[k] < 0 || pool[k] >= pattern.vertex_count())
      throw Error("connected sets: vertex out of range");
    position[pool[k]] = k;
  }
  if (v < 0 || v >= pattern.vertex_count() || position[v] < 0)
    throw Error("connected sets: base vertex not among the candidates");

  std::vector<std::uint32_t> adjacency(n, 0);
  for (const Edge& edge : pattern.edges()) {
    const int a = position[edge.u];
    const int b = position[edge.v];
    if (a < 0 || b < 0) continue;
    adjacency[a] |= 1u << b;
    adjacency[b] |= 1u << a;
  }

  const int pv = position[v];
  std::vector<std::vector<int>> sets;
  const std::uint32_t top = n >= 32 ? 0 : (1u << n);
  for (std::uint32_t mask = 1; mask < top; ++mask) {
    if (!(mask & (1u << pv))) continue;
    const int size = std::popcount(mask);
    if (max_size > 0 && size > max_size) continue;
    std::uint32_t reached = 1u << pv;
    for (;;) {
      std::uint32_t next = reached;
      std::uint32_t scan = reached;
      while (scan) {
        const int bit = std::countr_zero(scan);
        scan &= scan - 1;
        next |= adjacency[bit] & mask;
      }
      if (next == reached) break;
      reached = next;
    }
    if (reached != mask) continue;
    std::vector<int> members;
    std::uint32_t scan = mask;
    while (scan) {
      const int bit = std::countr_zero(scan);
      scan &= scan - 1;
      members.push_back(pool[bit]);
    }
    sets.push_back(std::move(members));
  }
  return sets;
}

namespace {

struct PinnedModel {
  oracle::SpinModel model;
  int site = -1;  // index of the requested vertex among the free spins
};

// All boundary spins pinned to +1, realized as fields on the interior ones.
PinnedModel pinned_boundary_model(const CirclePattern& pattern, double beta,
                                  int v) {
  PinnedModel pinned;
  std::vector<int> index(pattern.vertex_count(), -1);
  int count = 0;
  for (int k = 0; k < pattern.vertex_count(); ++k)
    if (!pattern.is_boundary(k)) index[k] = count++;
  pinned.model.spins = count;
  pinned.model.fields.assign(count, 0.0);
  const std::vector<double> couplings = critical_couplings(pattern);
  for (int e = 0; e < pattern.edge_count(); ++e) {
    const Edge& edge = pattern.edge(e);
    const int a = index[edge.u];
    const int b = index[edge.v];
    if (a >= 0 && b >= 0) {
      pinned.model.edges.emplace_back(a, b);
      pinned.model.couplings.push_back(beta * couplings[e]);
    } else if (a >= 0) {
      pinned.model.fields[a] += beta * couplings[e];
    } else if (b >= 0) {
      pinned.model.fields[b] += beta * couplings[e];
    }
  }
  pinned.site = index[v];
  return pinned;
}

Magnetization metropolis_magnetization(const oracle::SpinModel& model,
                                       int site, std::uint64_t seed) {
  const int n = model.spins;
  std::vector<std::vector<std::pair<int, double>>> neighbors(n);
  for (std::size_t e = 0; e < model.edges.size(); ++e) {
    const auto [a, b] = model.edges[e];
    neighbors[a].emplace_back(b, model.couplings[e]);
    neighbors[b].emplace_back(a, model.couplings[e]);
  }
  std::vector<double> field =
      model.fields.empty() ? std::vector<double>(n, 0.0) : model.fields;
  std::vector<int> spin(n, 1);
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  auto sweep = [&] {
    for (int k = 0; k < n; ++k) {
      double local = field[k];
      for (const auto& [other, coupling] : neighbors[k])
        local += coupling * spin[other];
      const double gain = -2.0 * spin[k] * local;
      if (gain >= 0.0 || uni(gen) < std::exp(gain)) spin[k] = -spin[k];
    }
  };

  constexpr int kBurnIn = 4000;
  constexpr int kBatches = 80;
  constexpr int kBatchSize = 500;
  constexpr int kSamples = kBatches * kBatchSize;
  for (int s = 0; s < kBurnIn; ++s) sweep();

  std::vector<double> batch_mean(kBatches, 0.0);
  double mean = 0.0;
  double square = 0.0;
  for (int b = 0; b < kBatches; ++b) {
    for (int s = 0; s < kBatchSize; ++s) {
      sweep();
      const double value = spin[site];
      batch_mean[b] += value;
      mean += value;
      square += value * value;
    }
    batch_mean[b] /= kBatchSize;
  }
  mean /= kSamples;
  const double sample_var = square / kSamples - mean * mean;
  double batch_var = 0.0;
  for (double m : batch_mean) batch_var += (m - mean) * (m - mean);
  batch_var /= (kBatches - 1);

  Magnetization result;
  result.value = mean;
  result.std_error = std::sqrt(batch_var / kBatches);
  result.exact = false;
  result.samples = kSamples;
  if (sample_var > 0.0) {
    const double ess =
        batch_var > 0.0 ? kSamples * sample_var / (kBatchSize * batch_var)
                        : static_cast<double>(kSamples);
    if (ess < 64.0)
      throw NumericalError(
          "Monte Carlo magnetization failed the effective-sample-size "
          "threshold");
  }
  return result;
}

}  // namespace

Magnetization magnetization_plus(const CirclePattern& pattern, double beta,
                                 int v, std::uint64_t seed) {
  if (v < 0 || v >= pattern.vertex_count())
    throw Error("magnetization: vertex out of range");
  if (pattern.is_boundary(v)) return {1.0, 0.0, true, 0};
  const PinnedModel pinned = pinned_boundary_model(pattern, beta, v);
  if (pinned.model.spins <= 22) {
    Magnetization result;
    result.value = oracle::spin_magnetization(pinned.model, pinned.site);
    return result;
  }
  return metropolis_magnetization(pinned.model, pinned.site, seed);
}

std::vector<DifferentialInequalityPoint> differential_inequality_check(
    const CirclePattern& pattern, int v, const std::vector<double>& betas) {
  if (v < 0 || v >= pattern.vertex_count() || pattern.is_boundary(v))
    throw Error("the differential inequality concerns an interior vertex");
  const std::vector<int> interior = pattern.interior_vertices();
  if (interior.size() > 12)
    throw SizeLimitError(
        "the exhaustive set scan is capped at 12 interior vertices");
  const std::vector<std::vector<int>> sets =
      connected_sets_containing(pattern, v, 0, interior);

  constexpr double kStep = 1e-4;
  std::vector<DifferentialInequalityPoint> report;
  for (double beta : betas) {
    if (beta <= kStep)
      throw Error("beta grid must stay above the finite-difference step");
    DifferentialInequalityPoint point;
    point.beta = beta;
    point.magnetization = magnetization_plus(pattern, beta, v).value;
    point.derivative =
        (magnetization_plus(pattern, beta + kStep, v).value -
         magnetization_plus(pattern, beta - kStep, v).value) /
        (2.0 * kStep);
    double infimum = std::numeric_limits<double>::infinity();
    for (const std::vector<int>& set : sets)
      infimum = std::min(infimum, phi_functional(pattern, beta, set, v));
    point.phi_infimum = infimum;
    point.rhs =
        infimum * (1.0 - point.magnetization * point.magnetization) / beta;
    point.slack = point.derivative - point.rhs;
    report.push_back(point);
  }
  return report;
}

DecayFit decay_rate_fit(const CirclePattern& pattern, double beta, int v,
                        int max_distance) {
  if (v < 0 || v >= pattern.vertex_count())
    throw Error("decay fit: vertex out of range");
  const std::vector<int> dist = bfs_distances(pattern, v);
  const CorrelationEngine engine(pattern, beta);

  DecayFit fit;
  std::set<int> distances;
  for (int u = 0; u < pattern.vertex_count(); ++u) {
    if (u == v || dist[u] < 1 || dist[u] > max_distance) continue;
    DecayPoint point;
    point.u = u;
    point.distance = dist[u];
    point.correlation = engine.two_point(u, v).value;
    fit.points.push_back(point);
    distances.insert(dist[u]);
  }
  if (distances.size() < 3)
    throw Error("decay fit needs at least three distinct distances");

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const DecayPoint& point : fit.points) {
    const double x = point.distance;
    const double y = -std::log(point.correlation);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(fit.points.size());
  fit.rate = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.rate * sx) / n;
  return fit;
}

double correlation_log_floor(int distance, int max_degree, double eps) {
  if (eps <= 0.0 || eps >= 1.0)
    throw Error("the log floor needs a transition norm in (0, 1)");
  return (distance - 1) * (-std::log(eps)) -
         std::log(max_degree * max_degree / (1.0 - eps));
}

double finite_susceptibility(const CirclePattern& pattern, double beta,
                             int v) {
  const CorrelationEngine engine(pattern, beta);
  double total = 0.0;
  for (int u = 0; u < pattern.vertex_count(); ++u)
    total += engine.two_point(u, v).value;
  return total;
}

std::string correlations_to_csv(const CirclePattern& pattern,
                                const std::vector<CorrelationResult>& results) {
  std::string csv = "beta,d,u,v,value,method\n";
  std::vector<std::vector<int>> distance_cache(pattern.vertex_count());
  char buf[128];
  for (const CorrelationResult& r : results) {
    if (r.v < 0 || r.v >= pattern.vertex_count() || r.u < 0 ||
        r.u >= pattern.vertex_count())
      throw Error("correlation row with out-of-range endpoints");
    if (distance_cache[r.v].empty())
      distance_cache[r.v] = bfs_distances(pattern, r.v);
    const int d = distance_cache[r.v][r.u];
    std::snprintf(buf, sizeof(buf), "%.17g,%d,%d,%d,%.17g,", r.beta, d, r.u,
                  r.v, r.value);
    csv += buf;
    csv += method_name(r.method);
    csv += '\n';
  }
  return csv;
}

}  // namespace pattern_ising
