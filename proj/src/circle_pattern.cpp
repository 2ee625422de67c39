#include "pattern_ising/circle_pattern.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace pattern_ising {

namespace {

constexpr double kPi = std::numbers::pi;

// Clamp an asin argument to [-1, 1]; anything further out than `slack` is a
// genuine geometry error, not roundoff.
double clamped_asin(double arg, double slack, const std::string& where) {
  if (arg > 1.0 + slack || arg < -1.0 - slack)
    throw BuildError("chord does not fit its circle at " + where +
                     " (asin argument " + std::to_string(arg) + ")");
  return std::asin(std::clamp(arg, -1.0, 1.0));
}

}  // namespace

std::optional<int> CirclePattern::edge_between(int u, int v) const {
  for (int e : incident_[u])
    if (other_end(e, u) == v) return e;
  return std::nullopt;
}

std::vector<int> CirclePattern::interior_vertices() const {
  std::vector<int> out;
  for (int v = 0; v < vertex_count(); ++v)
    if (!vertices_[v].boundary) out.push_back(v);
  return out;
}

CirclePattern build_pattern(const RawGeometry& raw) {
  CirclePattern p;
  const int nv = static_cast<int>(raw.primal.size());
  const int nd = static_cast<int>(raw.dual.size());
  if (nv == 0) throw BuildError("pattern has no primal vertices");

  p.vertices_.reserve(nv);
  for (int v = 0; v < nv; ++v) {
    const auto& rv = raw.primal[v];
    if (!(rv.r > 0.0))
      throw BuildError("non-positive radius at vertex " + std::to_string(v));
    p.vertices_.push_back({Point(rv.x, rv.y), rv.r, rv.boundary});
  }
  p.duals_.reserve(nd);
  for (const auto& d : raw.dual) p.duals_.emplace_back(d.x, d.y);

  std::set<std::pair<int, int>> seen;
  p.edges_.reserve(raw.edges.size());
  for (std::size_t k = 0; k < raw.edges.size(); ++k) {
    const auto& re = raw.edges[k];
    const std::string where = "edge " + std::to_string(k);
    if (re.u < 0 || re.u >= nv || re.v < 0 || re.v >= nv)
      throw BuildError(where + ": primal endpoint out of range");
    if (re.du < 0 || re.du >= nd || re.dv < 0 || re.dv >= nd)
      throw BuildError(where + ": dual endpoint out of range");
    if (re.u == re.v) throw BuildError(where + ": loop edge");
    if (re.du == re.dv) throw BuildError(where + ": degenerate dual chord");
    auto key = std::minmax(re.u, re.v);
    if (!seen.insert(key).second)
      throw BuildError(where + ": duplicate edge {" + std::to_string(re.u) +
                       "," + std::to_string(re.v) + "}");

    Edge e;
    e.u = re.u;
    e.v = re.v;
    e.du = re.du;
    e.dv = re.dv;
    e.chord = std::abs(p.duals_[e.dv] - p.duals_[e.du]);
    if (!(e.chord > 0.0)) throw BuildError(where + ": zero-length dual chord");
    e.half_angle_u =
        clamped_asin(e.chord / (2.0 * p.vertices_[e.u].radius), 1e-9, where);
    e.half_angle_v =
        clamped_asin(e.chord / (2.0 * p.vertices_[e.v].radius), 1e-9, where);
    p.edges_.push_back(e);
  }

  p.incident_.assign(nv, {});
  for (int e = 0; e < p.edge_count(); ++e) {
    p.incident_[p.edges_[e].u].push_back(e);
    p.incident_[p.edges_[e].v].push_back(e);
  }
  for (int v = 0; v < nv; ++v) {
    auto& list = p.incident_[v];
    std::sort(list.begin(), list.end(), [&](int a, int b) {
      const Point da = p.vertices_[p.other_end(a, v)].pos - p.vertices_[v].pos;
      const Point db = p.vertices_[p.other_end(b, v)].pos - p.vertices_[v].pos;
      const double aa = std::atan2(da.imag(), da.real());
      const double ab = std::atan2(db.imag(), db.real());
      if (aa != ab) return aa < ab;
      return a < b;
    });
  }
  p.angle_sums_.assign(nv, 0.0);
  for (int v = 0; v < nv; ++v)
    for (int e : p.incident_[v]) p.angle_sums_[v] += p.half_angle_at(e, v);
  return p;
}

ValidationReport validate(const CirclePattern& pattern, double epsilon,
                          double tol) {
  ValidationReport report;
  auto fail = [&](const std::string& check, const std::string& detail,
                  double violation) {
    report.ok = false;
    report.issues.push_back({check, detail, violation});
  };

  // Dual chord endpoints must lie on both circles.
  for (int e = 0; e < pattern.edge_count(); ++e) {
    const Edge& ed = pattern.edge(e);
    for (int end : {ed.u, ed.v}) {
      const PrimalVertex& vx = pattern.vertex(end);
      for (int d : {ed.du, ed.dv}) {
        const double dist = std::abs(pattern.dual_position(d) - vx.pos);
        const double rel = std::abs(dist - vx.radius) / vx.radius;
        report.worst_chord_consistency =
            std::max(report.worst_chord_consistency, rel);
        if (rel > tol)
          fail("chord-consistency",
               "dual vertex " + std::to_string(d) + " is off circle " +
                   std::to_string(end) + " of edge " + std::to_string(e),
               rel);
      }
    }
  }

  // Interior angle sums equal pi.
  for (int v = 0; v < pattern.vertex_count(); ++v) {
    const double dev = std::abs(pattern.angle_sum(v) - kPi);
    if (!pattern.is_boundary(v)) {
      report.worst_angle_sum_deviation =
          std::max(report.worst_angle_sum_deviation, dev);
      if (dev > tol)
        fail("angle-sum",
             "interior vertex " + std::to_string(v) + " has angle sum " +
                 std::to_string(pattern.angle_sum(v)),
             dev);
    } else if (dev <= tol && pattern.degree(v) > 0) {
      fail("boundary-flag",
           "vertex " + std::to_string(v) +
               " is flagged boundary but has interior angle sum",
           dev);
    }
  }

  // Bounded-angle band.
  report.worst_angle_margin = kPi;
  for (int e = 0; e < pattern.edge_count(); ++e) {
    const Edge& ed = pattern.edge(e);
    for (double theta : {ed.half_angle_u, ed.half_angle_v}) {
      const double margin = std::min(theta - epsilon, kPi / 2 - epsilon - theta);
      report.worst_angle_margin = std::min(report.worst_angle_margin, margin);
      if (margin < -tol)
        fail("bounded-angle",
             "edge " + std::to_string(e) + " has half angle " +
                 std::to_string(theta) + " outside [eps, pi/2 - eps]",
             -margin);
    }
  }

  // Closed fan and center-in-face at interior vertices.
  for (int v = 0; v < pattern.vertex_count(); ++v) {
    if (pattern.is_boundary(v)) continue;
    std::map<int, int> corner_multiplicity;
    for (int e : pattern.edges_at(v)) {
      corner_multiplicity[pattern.edge(e).du]++;
      corner_multiplicity[pattern.edge(e).dv]++;
    }
    bool closed = pattern.degree(v) >= 3;
    for (const auto& [corner, mult] : corner_multiplicity)
      if (mult != 2) closed = false;
    if (!closed) {
      fail("center-in-face",
           "interior vertex " + std::to_string(v) + " has an unclosed fan", 1.0);
      continue;
    }
    const Point c = pattern.vertex(v).pos;
    std::vector<Point> polygon;
    for (const auto& [corner, mult] : corner_multiplicity)
      polygon.push_back(pattern.dual_position(corner));
    std::sort(polygon.begin(), polygon.end(), [&](Point a, Point b) {
      return std::atan2((a - c).imag(), (a - c).real()) <
             std::atan2((b - c).imag(), (b - c).real());
    });
    if (!inside_convex_polygon(polygon, c, tol))
      fail("center-in-face",
           "vertex " + std::to_string(v) + " is not strictly inside its face",
           1.0);
  }

  return report;
}

CirclePattern generate_isoradial_square(int width, int height, double radius) {
  if (width < 1 || height < 1) throw BuildError("grid dimensions must be >= 1");
  if (!(radius > 0.0)) throw BuildError("radius must be positive");
  const double s = radius * std::sqrt(2.0);
  RawGeometry raw;
  auto vid = [&](int i, int j) { return j * width + i; };
  auto did = [&](int a, int b) { return b * (width + 1) + a; };
  for (int j = 0; j < height; ++j)
    for (int i = 0; i < width; ++i) {
      const bool boundary =
          i == 0 || i == width - 1 || j == 0 || j == height - 1;
      raw.primal.push_back({i * s, j * s, radius, boundary});
    }
  for (int b = 0; b <= height; ++b)
    for (int a = 0; a <= width; ++a)
      raw.dual.push_back({(a - 0.5) * s, (b - 0.5) * s});
  for (int j = 0; j < height; ++j)
    for (int i = 0; i < width; ++i) {
      if (i + 1 < width)
        raw.edges.push_back(
            {vid(i, j), vid(i + 1, j), did(i + 1, j), did(i + 1, j + 1)});
      if (j + 1 < height)
        raw.edges.push_back(
            {vid(i, j), vid(i, j + 1), did(i, j + 1), did(i + 1, j + 1)});
    }
  return build_pattern(raw);
}

CirclePattern generate_stretched_square(const std::vector<double>& column_heights,
                                        int rows) {
  const int cols = static_cast<int>(column_heights.size());
  if (cols < 1 || rows < 1)
    throw BuildError("stretched grid needs at least one column and one row");
  for (double h : column_heights)
    if (!(h > 0.0)) throw BuildError("column sizes must be positive");

  std::vector<double> x(cols + 1, 0.0);
  for (int i = 0; i < cols; ++i) x[i + 1] = x[i] + column_heights[i];

  RawGeometry raw;
  auto vid = [&](int i, int j) { return j * cols + i; };
  auto did = [&](int a, int b) { return b * (cols + 1) + a; };
  for (int j = 0; j < rows; ++j)
    for (int i = 0; i < cols; ++i) {
      const bool boundary = i == 0 || i == cols - 1 || j == 0 || j == rows - 1;
      const double cx = 0.5 * (x[i] + x[i + 1]);
      const double cy = j + 0.5;
      const double r = 0.5 * std::hypot(column_heights[i], 1.0);
      raw.primal.push_back({cx, cy, r, boundary});
    }
  for (int b = 0; b <= rows; ++b)
    for (int a = 0; a <= cols; ++a)
      raw.dual.push_back({x[a], static_cast<double>(b)});
  for (int j = 0; j < rows; ++j)
    for (int i = 0; i < cols; ++i) {
      if (i + 1 < cols)
        raw.edges.push_back(
            {vid(i, j), vid(i + 1, j), did(i + 1, j), did(i + 1, j + 1)});
      if (j + 1 < rows)
        raw.edges.push_back(
            {vid(i, j), vid(i, j + 1), did(i, j + 1), did(i + 1, j + 1)});
    }
  return build_pattern(raw);
}

CirclePattern generate_acute_triangulation(std::uint64_t seed, int width,
                                           int height, double jitter) {
  if (width < 1 || height < 1) throw BuildError("grid dimensions must be >= 1");
  if (jitter < 0.0) throw BuildError("jitter must be non-negative");

  const double rowstep = std::sqrt(3.0) / 2.0;
  const int npx = width + 1;
  std::vector<Point> pts((width + 1) * (height + 1));
  auto pid = [&](int i, int j) { return j * npx + i; };
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> off(-jitter, jitter);
  for (int j = 0; j <= height; ++j)
    for (int i = 0; i <= width; ++i) {
      const double x0 = i + ((j & 1) ? 0.5 : 0.0);
      const double y0 = j * rowstep;
      const double dx = off(rng);
      const double dy = off(rng);
      pts[pid(i, j)] = Point(x0 + dx, y0 + dy);
    }

  std::vector<std::array<int, 3>> tris;
  for (int j = 0; j < height; ++j)
    for (int i = 0; i < width; ++i) {
      if ((j & 1) == 0) {
        tris.push_back({pid(i, j), pid(i + 1, j), pid(i, j + 1)});
        tris.push_back({pid(i + 1, j), pid(i + 1, j + 1), pid(i, j + 1)});
      } else {
        tris.push_back({pid(i, j), pid(i + 1, j), pid(i + 1, j + 1)});
        tris.push_back({pid(i, j), pid(i + 1, j + 1), pid(i, j + 1)});
      }
    }

  // Strict acuteness keeps circumcenters inside their triangles.
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const Point a = pts[tris[t][0]], b = pts[tris[t][1]], c = pts[tris[t][2]];
    const std::array<double, 3> d2 = {std::norm(b - c), std::norm(c - a),
                                      std::norm(a - b)};
    for (int k = 0; k < 3; ++k) {
      // Angle at corner k is non-acute iff the opposite side dominates.
      const double opposite = d2[k];
      const double others = d2[(k + 1) % 3] + d2[(k + 2) % 3];
      if (opposite >= others - 1e-9 * others)
        throw BuildError("jitter produced a non-acute triangle " +
                         std::to_string(t) + " (corner " + std::to_string(k) +
                         ")");
    }
  }

  auto circumcenter = [](Point a, Point b, Point c) {
    const double d = 2.0 * cross(b - a, c - a);
    const double na = std::norm(a), nb = std::norm(b), nc = std::norm(c);
    const double ux = (na * (b.imag() - c.imag()) + nb * (c.imag() - a.imag()) +
                       nc * (a.imag() - b.imag())) /
                      d;
    const double uy = (na * (c.real() - b.real()) + nb * (a.real() - c.real()) +
                       nc * (b.real() - a.real())) /
                      d;
    return Point(ux, uy);
  };

  // Triangles sharing an edge become adjacent primal vertices; the shared
  // triangulation edge is the dual chord.
  std::map<std::pair<int, int>, std::vector<int>> edge_owners;
  for (int t = 0; t < static_cast<int>(tris.size()); ++t)
    for (int k = 0; k < 3; ++k) {
      auto key = std::minmax(tris[t][k], tris[t][(k + 1) % 3]);
      edge_owners[key].push_back(t);
    }

  RawGeometry raw;
  std::vector<int> boundary_count(tris.size(), 0);
  for (const auto& [key, owners] : edge_owners)
    if (owners.size() == 1) boundary_count[owners[0]]++;
  for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
    const Point a = pts[tris[t][0]], b = pts[tris[t][1]], c = pts[tris[t][2]];
    const Point cc = circumcenter(a, b, c);
    raw.primal.push_back(
        {cc.real(), cc.imag(), std::abs(a - cc), boundary_count[t] > 0});
  }

  std::map<int, int> dual_of_point;
  auto dual_id = [&](int point) {
    auto it = dual_of_point.find(point);
    if (it != dual_of_point.end()) return it->second;
    const int id = static_cast<int>(raw.dual.size());
    raw.dual.push_back({pts[point].real(), pts[point].imag()});
    dual_of_point[point] = id;
    return id;
  };
  for (const auto& [key, owners] : edge_owners)
    if (owners.size() == 2)
      raw.edges.push_back(
          {owners[0], owners[1], dual_id(key.first), dual_id(key.second)});

  return build_pattern(raw);
}

CirclePattern induced_subpattern(const CirclePattern& pattern,
                                 const std::vector<int>& keep,
                                 std::vector<int>* vertex_map) {
  std::vector<int> vmap(pattern.vertex_count(), -1);
  RawGeometry raw;
  for (int v : keep) {
    if (v < 0 || v >= pattern.vertex_count())
      throw BuildError("induced_subpattern: vertex out of range");
    if (vmap[v] != -1) throw BuildError("induced_subpattern: repeated vertex");
    vmap[v] = static_cast<int>(raw.primal.size());
    const PrimalVertex& pv = pattern.vertex(v);
    raw.primal.push_back({pv.pos.real(), pv.pos.imag(), pv.radius, false});
  }
  std::map<int, int> dmap;
  auto dual_id = [&](int d) {
    auto it = dmap.find(d);
    if (it != dmap.end()) return it->second;
    const int id = static_cast<int>(raw.dual.size());
    raw.dual.push_back(
        {pattern.dual_position(d).real(), pattern.dual_position(d).imag()});
    dmap[d] = id;
    return id;
  };
  for (int e = 0; e < pattern.edge_count(); ++e) {
    const Edge& ed = pattern.edge(e);
    if (vmap[ed.u] == -1 || vmap[ed.v] == -1) continue;
    raw.edges.push_back(
        {vmap[ed.u], vmap[ed.v], dual_id(ed.du), dual_id(ed.dv)});
  }
  // Boundary status comes from the angle-sum criterion on the induced fan.
  CirclePattern sub = build_pattern(raw);
  RawGeometry raw2 = to_raw(sub);
  for (int v = 0; v < sub.vertex_count(); ++v)
    raw2.primal[v].boundary = std::abs(sub.angle_sum(v) - kPi) > 1e-9;
  CirclePattern result = build_pattern(raw2);
  if (vertex_map) *vertex_map = vmap;
  return result;
}

RawGeometry to_raw(const CirclePattern& pattern) {
  RawGeometry raw;
  for (const auto& v : pattern.vertices())
    raw.primal.push_back({v.pos.real(), v.pos.imag(), v.radius, v.boundary});
  for (int d = 0; d < pattern.dual_count(); ++d)
    raw.dual.push_back(
        {pattern.dual_position(d).real(), pattern.dual_position(d).imag()});
  for (const auto& e : pattern.edges()) raw.edges.push_back({e.u, e.v, e.du, e.dv});
  return raw;
}

std::string pattern_to_json(const CirclePattern& pattern) {
  nlohmann::json root;
  root["primal"] = nlohmann::json::array();
  for (const auto& v : pattern.vertices())
    root["primal"].push_back({{"x", v.pos.real()},
                              {"y", v.pos.imag()},
                              {"r", v.radius},
                              {"boundary", v.boundary}});
  root["dual"] = nlohmann::json::array();
  for (int d = 0; d < pattern.dual_count(); ++d)
    root["dual"].push_back({{"x", pattern.dual_position(d).real()},
                            {"y", pattern.dual_position(d).imag()}});
  root["edges"] = nlohmann::json::array();
  for (const auto& e : pattern.edges())
    root["edges"].push_back(
        {{"u", e.u}, {"v", e.v}, {"du", e.du}, {"dv", e.dv}});
  return root.dump(2);
}

CirclePattern pattern_from_json(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw BuildError(std::string("invalid pattern JSON: ") + ex.what());
  }
  RawGeometry raw;
  try {
    for (const auto& v : root.at("primal"))
      raw.primal.push_back({v.at("x").get<double>(), v.at("y").get<double>(),
                            v.at("r").get<double>(),
                            v.value("boundary", false)});
    for (const auto& d : root.at("dual"))
      raw.dual.push_back({d.at("x").get<double>(), d.at("y").get<double>()});
    for (const auto& e : root.at("edges"))
      raw.edges.push_back({e.at("u").get<int>(), e.at("v").get<int>(),
                           e.at("du").get<int>(), e.at("dv").get<int>()});
  } catch (const nlohmann::json::exception& ex) {
    throw BuildError(std::string("pattern JSON misses a required field: ") +
                     ex.what());
  }
  return build_pattern(raw);
}

void save_pattern(const CirclePattern& pattern, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << pattern_to_json(pattern) << "\n";
}

CirclePattern load_pattern(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return pattern_from_json(buffer.str());
}

std::uint64_t pattern_fingerprint(const CirclePattern& pattern) {
  const std::string text = pattern_to_json(pattern);
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

}  // namespace pattern_ising
