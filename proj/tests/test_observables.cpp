#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pattern_ising/circle_pattern.hpp"
#include "pattern_ising/errors.hpp"
#include "pattern_ising/observables.hpp"
#include "pattern_ising/oracle.hpp"
#include "pattern_ising/weights.hpp"

using namespace pattern_ising;

namespace {

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

// Count connected vertex sets through v by plain bitmask enumeration;
// independent of the library's search order.
int count_connected_sets(const CirclePattern& pattern, int v, int max_size) {
  const int n = pattern.vertex_count();
  int count = 0;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    if (!(mask & (1u << v))) continue;
    if (__builtin_popcount(mask) > max_size) continue;
    std::deque<int> queue{v};
    unsigned seen = 1u << v;
    while (!queue.empty()) {
      const int a = queue.front();
      queue.pop_front();
      for (int e : pattern.edges_at(a)) {
        const int b = pattern.other_end(e, a);
        if ((mask & (1u << b)) && !(seen & (1u << b))) {
          seen |= 1u << b;
          queue.push_back(b);
        }
      }
    }
    if (seen == mask) ++count;
  }
  return count;
}

}  // namespace

TEST_CASE("kacward correlations match the spin oracle everywhere") {
  const CirclePattern pattern = generate_isoradial_square(3, 3, 1.0);
  for (double beta : {0.5, 1.0}) {
    const CorrelationEngine engine(pattern, beta);
    for (int u = 0; u < pattern.vertex_count(); ++u)
      for (int v = u + 1; v < pattern.vertex_count(); ++v) {
        const double expected = spin_oracle_two_point(pattern, beta, u, v).value;
        CHECK(engine.two_point(u, v).value ==
              doctest::Approx(expected).epsilon(1e-11));
      }
  }
}

TEST_CASE("frozen correlation values stay put") {
  // Reference numbers from exhaustive spin enumeration.
  {
    const CirclePattern pattern = generate_isoradial_square(3, 3, 1.0);
    const CorrelationEngine critical(pattern, 1.0);
    CHECK(critical.two_point(0, 4).value ==
          doctest::Approx(0.38244467781867658).epsilon(1e-12));
    const CorrelationEngine warm(pattern, 0.7);
    CHECK(warm.two_point(0, 8).value ==
          doctest::Approx(0.049488179891684782).epsilon(1e-12));
  }
  {
    const CirclePattern pattern = generate_stretched_square({1.0, 1.7, 0.8}, 3);
    const CorrelationEngine engine(pattern, 1.3);
    CHECK(engine.two_point(2, 6).value ==
          doctest::Approx(0.32145734151978733).epsilon(1e-12));
  }
}

TEST_CASE("correlations are symmetric and one on the diagonal") {
  const CirclePattern pattern = generate_stretched_square({1.0, 1.4}, 3);
  const CorrelationEngine engine(pattern, 0.9);
  CHECK(engine.two_point(3, 3).value == 1.0);
  for (const auto& [u, v] : std::vector<std::pair<int, int>>{
           {0, 5}, {1, 4}, {2, 3}}) {
    CHECK(engine.two_point(u, v).value ==
          doctest::Approx(engine.two_point(v, u).value).epsilon(1e-11));
  }
}

TEST_CASE("the disorder route does not matter") {
  const CirclePattern pattern = generate_isoradial_square(3, 3, 1.0);
  const CorrelationEngine engine(pattern, 1.1);
  const double direct = engine.two_point(0, 8).value;

  // Two minimal corner routes on opposite sides of the diagonal, and one
  // long detour that loops outside the grid.
  const double via_east = engine.two_point_through(0, 8, {5, 6, 10}).value;
  const double via_north = engine.two_point_through(0, 8, {5, 9, 10}).value;
  const double detour =
      engine.two_point_through(0, 8, {5, 6, 7, 11, 10}).value;
  CHECK(std::abs(via_east - direct) <= 1e-10);
  CHECK(std::abs(via_north - direct) <= 1e-10);
  CHECK(std::abs(detour - direct) <= 1e-10);

  // Different routes are recorded as different defects.
  CHECK(engine.two_point_through(0, 8, {5, 6, 10}).defect_fingerprint !=
        engine.two_point_through(0, 8, {5, 9, 10}).defect_fingerprint);
}

TEST_CASE("sandwich bounds bracket the correlation") {
  const CirclePattern pattern = generate_stretched_square({1.0, 1.7, 0.8}, 3);
  for (double beta : {0.7, 1.3}) {
    const CorrelationEngine engine(pattern, beta);
    for (int u = 0; u < pattern.vertex_count(); ++u)
      for (int v = u; v < pattern.vertex_count(); ++v) {
        const CorrelationBounds bounds = engine.bounds(u, v);
        CHECK(bounds.lower <= bounds.value + 1e-10);
        CHECK(bounds.value <= bounds.upper + 1e-10);
        CHECK(bounds.value ==
              doctest::Approx(engine.two_point(u, v).value).epsilon(1e-13));
      }
  }
}

TEST_CASE("hte oracle agrees with the spin oracle") {
  const CirclePattern pattern = generate_isoradial_square(2, 3, 1.0);
  for (double beta : {0.6, 1.2}) {
    const CorrelationResult hte = high_temperature_two_point(pattern, beta, 0, 5);
    const CorrelationResult spin = spin_oracle_two_point(pattern, beta, 0, 5);
    CHECK(hte.value == doctest::Approx(spin.value).epsilon(1e-12));
    CHECK(hte.method == CorrelationMethod::kHighTemperature);
    CHECK(spin.method == CorrelationMethod::kSpinOracle);
  }
  CHECK(std::string(method_name(CorrelationMethod::kKacWard)) == "kacward");
}

TEST_CASE("phi functional closed forms on the 3x3 square") {
  const CirclePattern pattern = generate_isoradial_square(3, 3, 1.0);
  const double J = critical_couplings(pattern)[0];
  for (double beta : {0.8, 1.0}) {
    const double t = std::tanh(beta * J);
    // S = {center}: four leaving edges, unit self correlation.
    CHECK(phi_functional(pattern, beta, {4}, 4) ==
          doctest::Approx(4.0 * t).epsilon(1e-12));
    // S = {center, one neighbor}: the neighbor is boundary vertex 1.
    CHECK(phi_functional(pattern, beta, {4, 1}, 4) ==
          doctest::Approx(t * (3.0 + 2.0 * t)).epsilon(1e-12));
  }

  CHECK_THROWS_AS(phi_functional(pattern, 1.0, {4, 0}, 4), Error);  // detached
  CHECK_THROWS_AS(phi_functional(pattern, 1.0, {1, 2}, 4), Error);  // v outside
  CHECK_THROWS_AS(phi_functional(pattern, 1.0, {4, 4}, 4), Error);  // repeated
}

TEST_CASE("phi stays above the radius-ratio bound") {
  const CirclePattern pattern = generate_isoradial_square(3, 3, 1.0);
  const int v = 4;
  // Isoradial and all half angles pi/4, so the bound is tan(pi/8).
  const double bound = phi_lower_bound(pattern, v);
  CHECK(bound == doctest::Approx(std::tan(3.14159265358979323846 / 8))
                     .epsilon(1e-13));
  for (const std::vector<int>& set :
       connected_sets_containing(pattern, v, 4)) {
    CHECK(phi_functional(pattern, 1.0, set, v) >= bound - 1e-10);
  }
}

TEST_CASE("connected set enumeration matches brute force") {
  const CirclePattern pattern = generate_isoradial_square(3, 3, 1.0);
  for (int v : {0, 4}) {
    for (int cap : {1, 2, 3, 4}) {
      const auto sets = connected_sets_containing(pattern, v, cap);
      CHECK(static_cast<int>(sets.size()) ==
            count_connected_sets(pattern, v, cap));
      for (const std::vector<int>& set : sets) {
        CHECK(static_cast<int>(set.size()) <= cap);
        CHECK(std::find(set.begin(), set.end(), v) != set.end());
      }
    }
  }
  // Restricting the pool restricts the sets.
  const auto restricted = connected_sets_containing(pattern, 4, 3, {4, 1, 7});
  for (const std::vector<int>& set : restricted)
    for (int a : set) CHECK((a == 4 || a == 1 || a == 7));

  const CirclePattern big = generate_isoradial_square(5, 5, 1.0);
  CHECK_THROWS_AS(connected_sets_containing(big, 12, 3), SizeLimitError);
}

TEST_CASE("plus-boundary magnetization is exact on small cores") {
  const CirclePattern pattern = generate_isoradial_square(3, 3, 1.0);
  const double J = critical_couplings(pattern)[0];

  const Magnetization boundary_spin = magnetization_plus(pattern, 1.0, 0);
  CHECK(boundary_spin.value == 1.0);
  CHECK(boundary_spin.exact);

  // One interior spin against four pinned neighbors.
  for (double beta : {0.6, 1.0}) {
    const Magnetization center = magnetization_plus(pattern, beta, 4);
    CHECK(center.exact);
    CHECK(center.std_error == 0.0);
    CHECK(center.value ==
          doctest::Approx(std::tanh(4.0 * beta * J)).epsilon(1e-12));
  }
}

TEST_CASE("plus-boundary magnetization falls back to sampling") {
  const CirclePattern pattern = generate_isoradial_square(7, 7, 1.0);
  REQUIRE(pattern.interior_vertices().size() == 25);
  const int center = 3 * 7 + 3;
  const Magnetization sampled = magnetization_plus(pattern, 1.3, center, 42);
  CHECK(!sampled.exact);
  CHECK(sampled.samples > 0);
  CHECK(sampled.std_error > 0.0);
  CHECK(sampled.std_error < 0.05);
  CHECK(sampled.value > 0.5);
  CHECK(sampled.value < 1.0);

  const Magnetization repeat = magnetization_plus(pattern, 1.3, center, 42);
  CHECK(repeat.value == sampled.value);
}

TEST_CASE("magnetization derivative dominates the phi functional bound") {
  const CirclePattern pattern = generate_isoradial_square(3, 3, 1.0);
  const auto report = differential_inequality_check(pattern, 4, {0.5, 1.0});
  REQUIRE(report.size() == 2);
  double previous_m = 0.0;
  for (const DifferentialInequalityPoint& point : report) {
    CHECK(point.derivative > 0.0);
    CHECK(point.phi_infimum > 0.0);
    CHECK(point.magnetization > previous_m);
    previous_m = point.magnetization;
    CHECK(point.rhs ==
          doctest::Approx(point.phi_infimum *
                          (1.0 - point.magnetization * point.magnetization) /
                          point.beta)
              .epsilon(1e-12));
    CHECK(point.slack >= -1e-6);
  }

  const CirclePattern big = generate_isoradial_square(6, 6, 1.0);
  CHECK_THROWS_AS(differential_inequality_check(big, 14, {1.0}),
                  SizeLimitError);
}

TEST_CASE("decay rates are positive and grow as the temperature rises") {
  const CirclePattern pattern = generate_isoradial_square(6, 3, 1.0);
  const DecayFit cold = decay_rate_fit(pattern, 0.9, 0, 7);
  const DecayFit warm = decay_rate_fit(pattern, 0.6, 0, 7);
  CHECK(cold.rate > 0.0);
  CHECK(warm.rate > cold.rate);
  REQUIRE(cold.points.size() >= 3);

  const std::vector<int> dist = bfs_distances(pattern, 0);
  for (const DecayPoint& point : cold.points) {
    CHECK(point.distance == dist[point.u]);
    CHECK(point.correlation > 0.0);
    CHECK(point.correlation < 1.0);
  }

  CHECK_THROWS_AS(decay_rate_fit(pattern, 0.8, 0, 0), Error);
}

TEST_CASE("correlation floor from the contraction rate") {
  const CirclePattern pattern = generate_isoradial_square(6, 3, 1.0);
  const double beta = 0.8;
  const std::vector<double> J = critical_couplings(pattern);
  const double max_j = *std::max_element(J.begin(), J.end());
  int max_degree = 0;
  for (int v = 0; v < pattern.vertex_count(); ++v)
    max_degree = std::max(max_degree, pattern.degree(v));

  const DecayFit fit = decay_rate_fit(pattern, beta, 0, 7);
  for (const DecayPoint& point : fit.points) {
    const double floor = correlation_log_floor(point.distance, max_degree,
                                               transition_norm_bound(max_j, beta));
    CHECK(-std::log(point.correlation) >= floor - 1e-9);
  }
}

TEST_CASE("susceptibility sums the correlations and grows with beta") {
  const CirclePattern pattern = generate_isoradial_square(3, 3, 1.0);
  const double chi = finite_susceptibility(pattern, 0.7, 4);
  double expected = 0.0;
  for (int u = 0; u < pattern.vertex_count(); ++u)
    expected += spin_oracle_two_point(pattern, 0.7, 4, u).value;
  CHECK(chi == doctest::Approx(expected).epsilon(1e-10));
  CHECK(finite_susceptibility(pattern, 1.0, 4) > chi);
}

TEST_CASE("csv report carries distances and round-trips the values") {
  const CirclePattern pattern = generate_isoradial_square(3, 3, 1.0);
  const CorrelationEngine engine(pattern, 0.9);
  std::vector<CorrelationResult> rows;
  rows.push_back(engine.two_point(0, 4));
  rows.push_back(engine.two_point(0, 8));
  rows.push_back(spin_oracle_two_point(pattern, 0.9, 0, 8));
  const std::string csv = correlations_to_csv(pattern, rows);

  std::istringstream lines(csv);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "beta,d,u,v,value,method");
  const std::vector<int> dist = bfs_distances(pattern, 0);
  std::size_t parsed = 0;
  while (std::getline(lines, line)) {
    double beta = 0.0, value = 0.0;
    int d = 0, u = 0, v = 0;
    char method[32] = {0};
    REQUIRE(std::sscanf(line.c_str(), "%lf,%d,%d,%d,%lf,%31s", &beta, &d, &u,
                        &v, &value, method) == 6);
    REQUIRE(parsed < rows.size());
    CHECK(beta == rows[parsed].beta);
    CHECK(d == dist[v]);
    CHECK(value == rows[parsed].value);
    CHECK(std::string(method) == method_name(rows[parsed].method));
    ++parsed;
  }
  CHECK(parsed == rows.size());

  std::vector<CorrelationResult> bad(1);
  bad[0].u = 0;
  bad[0].v = 99;
  CHECK_THROWS_AS(correlations_to_csv(pattern, bad), Error);
}
