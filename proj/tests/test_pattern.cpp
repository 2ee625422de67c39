#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "pattern_ising/circle_pattern.hpp"
#include "pattern_ising/errors.hpp"
#include "pattern_ising/geometry.hpp"
#include "pattern_ising/svg.hpp"

using namespace pattern_ising;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string temp_path(const char* name) {
  return std::string("/tmp/pattern_ising_test_") + name;
}

}  // namespace

TEST_CASE("isoradial square layout") {
  const CirclePattern pattern = generate_isoradial_square(4, 3, 0.7);
  CHECK(pattern.vertex_count() == 12);
  // Grid edges: horizontal (w-1)*h plus vertical w*(h-1).
  CHECK(pattern.edge_count() == 3 * 3 + 4 * 2);

  for (const PrimalVertex& v : pattern.vertices())
    CHECK(v.radius == doctest::Approx(0.7).epsilon(1e-15));

  for (int e = 0; e < pattern.edge_count(); ++e) {
    const Edge& edge = pattern.edge(e);
    CHECK(edge.half_angle_u == doctest::Approx(kPi / 4).epsilon(1e-14));
    CHECK(edge.half_angle_v == doctest::Approx(kPi / 4).epsilon(1e-14));
    CHECK(edge.chord == doctest::Approx(0.7 * std::sqrt(2.0)).epsilon(1e-14));
  }

  int interior = 0;
  for (int v = 0; v < pattern.vertex_count(); ++v) {
    if (pattern.is_boundary(v)) continue;
    ++interior;
    CHECK(pattern.angle_sum(v) == doctest::Approx(kPi).epsilon(1e-13));
    CHECK(pattern.degree(v) == 4);
  }
  CHECK(interior == 2);
  CHECK(pattern.interior_vertices().size() == 2);

  const ValidationReport report = validate(pattern, 0.05);
  CHECK(report.ok);
  CHECK(report.issues.empty());
}

TEST_CASE("stretched square radii and angles") {
  const std::vector<double> widths = {1.0, 1.8, 0.6};
  const CirclePattern pattern = generate_stretched_square(widths, 4);
  CHECK(pattern.vertex_count() == 12);

  for (int v = 0; v < pattern.vertex_count(); ++v) {
    const int column = v % 3;
    const double expected =
        0.5 * std::hypot(widths[column], 1.0);
    CHECK(pattern.vertex(v).radius == doctest::Approx(expected).epsilon(1e-14));
  }

  for (int v : pattern.interior_vertices())
    CHECK(pattern.angle_sum(v) == doctest::Approx(kPi).epsilon(1e-13));

  CHECK(validate(pattern, 0.05).ok);
}

TEST_CASE("stretched square rejects bad parameters") {
  CHECK_THROWS_AS(generate_stretched_square({}, 3), BuildError);
  CHECK_THROWS_AS(generate_stretched_square({1.0, -2.0}, 3), BuildError);
  CHECK_THROWS_AS(generate_stretched_square({1.0}, 0), BuildError);
}

TEST_CASE("acute triangulations validate for several seeds") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const CirclePattern pattern =
        generate_acute_triangulation(seed, 4, 3, 0.12);
    CHECK(pattern.vertex_count() > 4);
    const ValidationReport report = validate(pattern, 0.02);
    CHECK(report.ok);
    for (int v : pattern.interior_vertices())
      CHECK(pattern.angle_sum(v) == doctest::Approx(kPi).epsilon(1e-12));
  }
}

TEST_CASE("triangulations differ across seeds") {
  const CirclePattern a = generate_acute_triangulation(1, 4, 3, 0.12);
  const CirclePattern b = generate_acute_triangulation(2, 4, 3, 0.12);
  CHECK(pattern_fingerprint(a) != pattern_fingerprint(b));
  // Same seed reproduces the same pattern bit for bit.
  const CirclePattern c = generate_acute_triangulation(1, 4, 3, 0.12);
  CHECK(pattern_fingerprint(a) == pattern_fingerprint(c));
}

TEST_CASE("edge incidence is consistent") {
  const CirclePattern pattern = generate_isoradial_square(3, 3, 1.0);
  for (int v = 0; v < pattern.vertex_count(); ++v) {
    for (int e : pattern.edges_at(v)) {
      const Edge& edge = pattern.edge(e);
      CHECK((edge.u == v || edge.v == v));
      const int w = pattern.other_end(e, v);
      CHECK(w != v);
      CHECK(pattern.edge_between(v, w).has_value());
      CHECK(*pattern.edge_between(v, w) == e);
      CHECK(*pattern.edge_between(w, v) == e);
    }
    CHECK(!pattern.edge_between(v, v).has_value());
  }
}

TEST_CASE("edges_at walks the fan counterclockwise") {
  const CirclePattern pattern = generate_isoradial_square(3, 3, 1.0);
  for (int v : pattern.interior_vertices()) {
    const std::vector<int>& fan = pattern.edges_at(v);
    REQUIRE(fan.size() >= 3);
    double previous = -10.0;
    for (int e : fan) {
      const Point to = pattern.vertex(pattern.other_end(e, v)).pos -
                       pattern.vertex(v).pos;
      const double angle = std::arg(std::complex<double>(to.real(), to.imag()));
      CHECK(angle > previous);
      previous = angle;
    }
  }
}

TEST_CASE("chords are perpendicular bisected by their edges") {
  const CirclePattern pattern = generate_acute_triangulation(3, 4, 3, 0.12);
  for (int e = 0; e < pattern.edge_count(); ++e) {
    const Edge& edge = pattern.edge(e);
    const Point along =
        pattern.vertex(edge.v).pos - pattern.vertex(edge.u).pos;
    const Point chord =
        pattern.dual_position(edge.dv) - pattern.dual_position(edge.du);
    CHECK(std::abs(dot(along, chord)) < 1e-10);
    CHECK(std::abs(chord) == doctest::Approx(edge.chord).epsilon(1e-12));
    // Both corners sit on both endpoint circles.
    for (int d : {edge.du, edge.dv}) {
      for (int v : {edge.u, edge.v}) {
        const double dist =
            std::abs(pattern.dual_position(d) - pattern.vertex(v).pos);
        CHECK(dist == doctest::Approx(pattern.vertex(v).radius).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("validation flags a perturbed radius") {
  RawGeometry raw = to_raw(generate_isoradial_square(3, 3, 1.0));
  raw.primal[4].r *= 1.05;
  // The perturbed geometry still builds (chords are data) but validation
  // must notice the broken circle consistency.
  const CirclePattern pattern = build_pattern(raw);
  const ValidationReport report = validate(pattern, 0.05);
  CHECK(!report.ok);
  CHECK(!report.issues.empty());
}

TEST_CASE("validation respects the epsilon margin") {
  const CirclePattern pattern = generate_isoradial_square(3, 3, 1.0);
  CHECK(validate(pattern, 0.05).ok);
  // Half angles are exactly pi/4, so a margin above pi/4 must fail.
  CHECK(!validate(pattern, 0.05 + kPi / 4).ok);
}

TEST_CASE("induced subpattern keeps geometry and remaps ids") {
  const CirclePattern pattern = generate_isoradial_square(4, 4, 1.0);
  const std::vector<int> keep = {0, 1, 2, 4, 5, 6, 8, 9, 10};
  std::vector<int> map;
  const CirclePattern sub = induced_subpattern(pattern, keep, &map);
  CHECK(sub.vertex_count() == 9);
  REQUIRE(map.size() == static_cast<std::size_t>(pattern.vertex_count()));
  for (int old = 0; old < pattern.vertex_count(); ++old) {
    const bool kept = std::find(keep.begin(), keep.end(), old) != keep.end();
    if (!kept) {
      REQUIRE(map[old] == -1);
      continue;
    }
    REQUIRE(map[old] >= 0);
    CHECK(sub.vertex(map[old]).pos == pattern.vertex(old).pos);
    CHECK(sub.vertex(map[old]).radius == pattern.vertex(old).radius);
  }
  // Vertex 5 of the parent keeps all four neighbors, so it stays interior;
  // vertex 10 lost a neighbor and must now be boundary.
  CHECK(!sub.is_boundary(map[5]));
  CHECK(sub.is_boundary(map[10]));
  // Edges survive exactly when both ends are kept.
  int expected_edges = 0;
  const std::set<int> kept(keep.begin(), keep.end());
  for (const Edge& edge : pattern.edges())
    if (kept.count(edge.u) && kept.count(edge.v)) ++expected_edges;
  CHECK(sub.edge_count() == expected_edges);
}

TEST_CASE("induced subpattern rejects bad input") {
  const CirclePattern pattern = generate_isoradial_square(3, 3, 1.0);
  CHECK_THROWS_AS(induced_subpattern(pattern, {}, nullptr), BuildError);
  CHECK_THROWS_AS(induced_subpattern(pattern, {0, 0}, nullptr), BuildError);
  CHECK_THROWS_AS(induced_subpattern(pattern, {0, 99}, nullptr), BuildError);
}

TEST_CASE("json round trip preserves the pattern") {
  const CirclePattern pattern = generate_stretched_square({1.0, 1.4}, 3);
  const std::string text = pattern_to_json(pattern);
  const CirclePattern restored = pattern_from_json(text);
  CHECK(pattern_fingerprint(restored) == pattern_fingerprint(pattern));
  CHECK(restored.vertex_count() == pattern.vertex_count());
  CHECK(restored.edge_count() == pattern.edge_count());
}

TEST_CASE("file round trip preserves the pattern") {
  const CirclePattern pattern = generate_acute_triangulation(4, 3, 3, 0.1);
  const std::string path = temp_path("roundtrip.json");
  save_pattern(pattern, path);
  const CirclePattern restored = load_pattern(path);
  CHECK(pattern_fingerprint(restored) == pattern_fingerprint(pattern));
  std::remove(path.c_str());
}

TEST_CASE("malformed json is rejected") {
  CHECK_THROWS_AS(pattern_from_json("not json at all"), BuildError);
  CHECK_THROWS_AS(pattern_from_json("{\"primal\": 3}"), BuildError);
  CHECK_THROWS_AS(load_pattern("/nonexistent/nowhere.json"), Error);
}

TEST_CASE("fingerprints separate different patterns") {
  const std::uint64_t a =
      pattern_fingerprint(generate_isoradial_square(3, 3, 1.0));
  const std::uint64_t b =
      pattern_fingerprint(generate_isoradial_square(3, 3, 1.1));
  const std::uint64_t c =
      pattern_fingerprint(generate_stretched_square({1.0, 1.0}, 2));
  CHECK(a != b);
  CHECK(a != c);
}

TEST_CASE("turning angle basics") {
  const Point east(1.0, 0.0), north(0.0, 1.0), west(-1.0, 0.0);
  CHECK(turning_angle(east, north) == doctest::Approx(kPi / 2));
  CHECK(turning_angle(north, east) == doctest::Approx(-kPi / 2));
  // A u-turn lands on the positive branch cut.
  CHECK(turning_angle(east, west) == doctest::Approx(kPi));
  CHECK(turning_angle(east, east) == doctest::Approx(0.0));
  CHECK_THROWS_AS(turning_angle(east, Point(0.0, 0.0)), NumericalError);
}

TEST_CASE("svg rendering is deterministic and reflects options") {
  const CirclePattern pattern = generate_isoradial_square(3, 3, 1.0);
  const std::string plain = render_svg(pattern);
  CHECK(plain == render_svg(pattern));
  CHECK(plain.find("<svg") == 0);
  CHECK(plain.find("</svg>") != std::string::npos);

  SvgOptions labelled;
  labelled.label_vertices = true;
  const std::string with_labels = render_svg(pattern, labelled);
  CHECK(with_labels.find("<text") != std::string::npos);
  CHECK(plain.find("<text") == std::string::npos);

  SvgOptions overlay;
  overlay.edge_values.assign(pattern.edge_count(), 0.0);
  overlay.edge_values[0] = 2.0;
  const std::string heat = render_svg(pattern, overlay);
  CHECK(heat != plain);

  SvgOptions bad;
  bad.edge_values = {1.0};
  CHECK_THROWS_AS(render_svg(pattern, bad), Error);
}
