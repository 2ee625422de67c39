#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "pattern_ising/bar_graph.hpp"
#include "pattern_ising/circle_pattern.hpp"
#include "pattern_ising/errors.hpp"
#include "pattern_ising/kac_ward.hpp"
#include "pattern_ising/observables.hpp"
#include "pattern_ising/oracle.hpp"
#include "pattern_ising/sholo.hpp"
#include "pattern_ising/svg.hpp"
#include "pattern_ising/weights.hpp"

namespace {

using namespace pattern_ising;

constexpr const char* kToolVersion = "1.0.0";
constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitSkipped = 3;

// Bad parameter combinations found after CLI11 parsing.
struct UsageError : Error {
  using Error::Error;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << content;
}

// One manifest beside every produced file: enough to reproduce the run.
void write_manifest(const std::string& out_path, const std::string& command,
                    const nlohmann::json& config, const CirclePattern* pattern) {
  nlohmann::json manifest;
  manifest["tool"] = "pattern-ising";
  manifest["version"] = kToolVersion;
  manifest["command"] = command;
  manifest["config"] = config;
  if (pattern != nullptr)
    manifest["pattern_fingerprint"] = hex64(pattern_fingerprint(*pattern));
  write_file(out_path + ".manifest.json", manifest.dump(2) + "\n");
}

std::vector<double> parse_heights(const std::string& text) {
  std::vector<double> heights;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    try {
      heights.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UsageError("cannot parse column height '" + item + "'");
    }
  }
  if (heights.empty()) throw UsageError("empty column height list");
  return heights;
}

CirclePattern load_pattern_file(const std::string& path) {
  try {
    return load_pattern(path);
  } catch (const Error& e) {
    throw UsageError("cannot load pattern " + path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Verification suites.

struct SuiteResult {
  std::vector<std::pair<bool, std::string>> checks;
  bool skipped = false;
  std::string skip_reason;

  void add(bool ok, std::string line) { checks.emplace_back(ok, std::move(line)); }
  void skip(std::string reason) {
    skipped = true;
    skip_reason = std::move(reason);
  }
  bool all_passed() const {
    for (const auto& [ok, line] : checks)
      if (!ok) return false;
    return true;
  }
};

SuiteResult suite_kacward(const CirclePattern& pattern, double tol) {
  SuiteResult result;
  if (pattern.edge_count() > 16) {
    result.skip("needs at most 16 edges for the even-subgraph oracle");
    return result;
  }
  const DirectedGraph graph = graph_from_pattern(pattern);
  const std::vector<double> weights = directed_weights_critical(pattern, graph);
  const KacWardSolver solver(graph, weights);
  const Complex det = solver.determinant();

  const oracle::PlanarDrawing drawing = oracle::drawing_from_pattern(pattern);
  const std::vector<double> couplings = critical_couplings(pattern);
  std::vector<double> edge_weights(couplings.size());
  for (std::size_t e = 0; e < couplings.size(); ++e)
    edge_weights[e] = std::tanh(couplings[e]);
  const double z = oracle::even_subgraph_sum(drawing, edge_weights, true);

  const double residual = std::abs(Complex(z * z, 0.0) - det) / std::abs(det);
  result.add(residual <= tol, "determinant matches the squared even-subgraph "
                              "sum (relative residual " +
                                  fmt(residual) + ")");
  result.add(std::abs(det.imag()) <= 1e-9 * std::abs(det),
             "determinant is real (imaginary part " + fmt(det.imag()) + ")");
  result.add(det.real() > 0.0, "determinant is positive");
  return result;
}

SuiteResult suite_eigenvector(const CirclePattern& pattern, double tol) {
  SuiteResult result;
  const DirectedGraph graph = graph_from_pattern(pattern);
  const std::vector<double> weights = directed_weights_critical(pattern, graph);
  const double residual =
      critical_eigenvector_residual(pattern, graph, weights);
  result.add(residual <= tol,
             "sqrt(chord) is fixed by the transition operator on interior "
             "edges (residual " +
                 fmt(residual) + ")");

  // Negative control: inflating the fan of one interior vertex must break it.
  const std::vector<int> interior = pattern.interior_vertices();
  if (!interior.empty()) {
    const SparseMatrixC lambda = transition_matrix(graph, weights);
    Eigen::VectorXcd rho(graph.directed_count());
    for (int d = 0; d < graph.directed_count(); ++d)
      rho[d] = std::sqrt(pattern.edge(graph.edge(d).undirected).chord);
    for (int o : graph.out_edges(interior.front())) rho[o] *= std::sqrt(1.01);
    const Eigen::VectorXcd image = lambda * rho;
    double sup = 0.0, worst = 0.0;
    for (int d = 0; d < graph.directed_count(); ++d)
      sup = std::max(sup, std::abs(rho[d]));
    for (int d = 0; d < graph.directed_count(); ++d)
      if (!pattern.is_boundary(graph.edge(d).head))
        worst = std::max(worst, std::abs(image[d] - rho[d]));
    worst /= sup;
    result.add(worst > 1e-3, "1% fan perturbation is detected (residual " +
                                 fmt(worst) + ")");
  }
  return result;
}

SuiteResult suite_observable(const CirclePattern& pattern, double tol) {
  SuiteResult result;
  if (pattern.edge_count() > 10) {
    result.skip("needs at most 10 edges for the path-sum oracle");
    return result;
  }
  const DirectedGraph graph = graph_from_pattern(pattern);
  const std::vector<double> couplings = critical_couplings(pattern);
  std::vector<double> segment_weights(couplings.size());
  std::vector<double> lift(graph.directed_count());
  for (std::size_t e = 0; e < couplings.size(); ++e)
    segment_weights[e] = std::tanh(couplings[e]);
  for (int d = 0; d < graph.directed_count(); ++d)
    lift[d] = std::sqrt(segment_weights[graph.edge(d).undirected]);
  const KacWardSolver solver(graph, lift);

  double worst = 0.0;
  int compared = 0;
  for (int end = 0; end < graph.directed_count(); ++end) {
    const Eigen::VectorXcd column = solver.inverse_column(end);
    for (int start = 0; start < graph.directed_count(); ++start) {
      if (graph.edge(start).undirected == graph.edge(end).undirected) continue;
      const Complex direct =
          oracle::fermionic_observable(graph, segment_weights, start, end);
      worst = std::max(worst, std::abs(std::conj(direct) - column[start]));
      ++compared;
    }
  }
  result.add(worst <= tol,
             "conjugated path-sum observable equals the inverse matrix over " +
                 std::to_string(compared) + " entries (worst " + fmt(worst) +
                 ")");
  return result;
}

SuiteResult suite_norm(const CirclePattern& pattern, double tol) {
  SuiteResult result;
  const DirectedGraph graph = graph_from_pattern(pattern);
  const std::vector<double> critical = directed_weights_critical(pattern, graph);

  double worst_interior = 0.0, worst_cross = 0.0, worst_boundary = 0.0;
  for (int v = 0; v < pattern.vertex_count(); ++v) {
    const double svd = operator_norm(vertex_block(graph, critical, v));
    const double root = block_norm_root(graph, critical, v);
    if (pattern.is_boundary(v)) {
      worst_boundary = std::max(worst_boundary, svd - root);
    } else {
      worst_interior = std::max(worst_interior, std::abs(svd - 1.0));
      worst_cross = std::max(worst_cross, std::abs(root - svd));
    }
  }
  result.add(worst_interior <= 1e-10,
             "interior block norms equal 1 (worst deviation " +
                 fmt(worst_interior) + ")");
  result.add(worst_cross <= tol,
             "bisection root matches the dense norm at interior vertices "
             "(worst gap " +
                 fmt(worst_cross) + ")");
  result.add(worst_boundary <= 1e-12,
             "boundary roots stay upper bounds (worst excess " +
                 fmt(worst_boundary) + ")");

  const std::vector<double> couplings = critical_couplings(pattern);
  double max_coupling = 0.0;
  for (double j : couplings) max_coupling = std::max(max_coupling, j);
  for (double beta : {0.5, 0.8, 0.95}) {
    const std::vector<double> deformed =
        directed_weights_beta(pattern, graph, beta);
    double max_root = 0.0, max_svd = 0.0;
    for (int v = 0; v < pattern.vertex_count(); ++v) {
      max_root = std::max(max_root, block_norm_root(graph, deformed, v));
      max_svd = std::max(max_svd, operator_norm(vertex_block(graph, deformed, v)));
    }
    const double bound = transition_norm_bound(max_coupling, beta);
    result.add(max_root <= bound + 1e-9 && max_svd <= max_root + 1e-9,
               "beta=" + fmt(beta) + ": max block norm " + fmt(max_svd) +
                   " <= root " + fmt(max_root) + " <= bound " + fmt(bound));
  }
  return result;
}

SuiteResult suite_switching(const CirclePattern& pattern, double tol) {
  SuiteResult result;
  if (pattern.edge_count() > 8) {
    result.skip("needs at most 8 edges for the sourced-pair enumeration");
    return result;
  }
  const oracle::SpinModel model = oracle::spin_model_from_pattern(pattern, 1.0);
  double worst_switch = 0.0, worst_ratio = 0.0;
  const double empty = oracle::current_source_sum(model, {});
  for (int u = 0; u < pattern.vertex_count(); ++u) {
    for (int v = u + 1; v < pattern.vertex_count(); ++v) {
      double sourced = 0.0, connected = 0.0;
      oracle::switching_identity(model, u, v, &sourced, &connected);
      worst_switch =
          std::max(worst_switch, std::abs(sourced - connected) /
                                     std::max(1.0, std::abs(sourced)));
      const double ratio = oracle::current_source_sum(model, {u, v}) / empty;
      const double spin = oracle::spin_two_point(model, u, v);
      worst_ratio = std::max(worst_ratio, std::abs(ratio - spin));
    }
  }
  result.add(worst_switch <= tol,
             "sourced pair rewrites as connected sourceless pair (worst " +
                 fmt(worst_switch) + ")");
  result.add(worst_ratio <= tol,
             "current ratio reproduces the spin correlation (worst " +
                 fmt(worst_ratio) + ")");
  return result;
}

SuiteResult suite_sholo(const CirclePattern& pattern, double tol,
                        std::uint64_t seed) {
  SuiteResult result;
  const std::vector<int> core = pattern.interior_vertices();
  if (core.empty()) {
    result.skip("needs at least one interior vertex");
    return result;
  }
  const BarGraph bar = build_bar_graph(pattern, core);
  const Eigen::VectorXcd boundary = random_boundary_data(bar, seed);
  const BvpSolution solution = solve_boundary_problem(bar, boundary);
  const DirectedGraph graph = graph_from_pattern(pattern);
  const Eigen::VectorXcd f = pattern_edge_values(bar, solution.f);

  result.add(line_space_residual(bar.graph(), solution.phi) <= 1e-10,
             "solved lift stays in the line space");

  double worst_boundary = 0.0;
  for (int d : bar.outward_edges())
    worst_boundary = std::max(worst_boundary,
                              std::abs(solution.phi[d] - boundary[d]));
  result.add(worst_boundary <= tol, "boundary data reproduced (worst " +
                                        fmt(worst_boundary) + ")");

  double worst_corner = 0.0, worst_operator = 0.0, worst_contour = 0.0;
  double worst_re = 0.0, worst_im = 0.0, worst_gap = 0.0;
  const double scale = check_scale(f);
  for (int v : core) {
    worst_corner =
        std::max(worst_corner, is_sholomorphic(pattern, f, v).worst_residual);
    worst_operator =
        std::max(worst_operator, sholo_operator_residual(pattern, graph, f, v));
    worst_contour = std::max(worst_contour,
                             std::abs(contour_sum(pattern, graph, f, v)));
    const SquareContour square = contour_sum_squared(pattern, graph, f, v);
    worst_re = std::max(worst_re, std::abs(square.sum.real()));
    worst_im = std::max(worst_im, -square.sum.imag());
    worst_gap = std::max(worst_gap, std::abs(square.sum.imag() -
                                             square.outgoing_minus_incoming));
  }
  result.add(worst_corner <= tol * scale,
             "corner projections agree at the core (worst " +
                 fmt(worst_corner) + ")");
  result.add(worst_operator <= tol,
             "Kac-Ward rows vanish on edges into the core (worst " +
                 fmt(worst_operator) + ")");
  result.add(worst_contour <= tol * scale,
             "contour sums of f vanish (worst " + fmt(worst_contour) + ")");
  result.add(worst_re <= tol * scale * scale,
             "contour sums of f^2 are imaginary (worst real part " +
                 fmt(worst_re) + ")");
  result.add(worst_im <= tol * scale * scale,
             "contour sums of f^2 point upward (worst negative part " +
                 fmt(worst_im) + ")");
  result.add(worst_gap <= 1e-10 * scale * scale,
             "imaginary parts equal the outgoing/incoming norm gap (worst " +
                 fmt(worst_gap) + ")");

  const Eigen::VectorXcd datum = rho_normal_datum(bar);
  KacWardSolver bar_solver(bar.graph(), bar.weights());
  const Eigen::VectorXcd recovered = bar_solver.solve(datum);
  double worst_rho = 0.0;
  for (int d = 0; d < bar.graph().directed_count(); ++d)
    worst_rho =
        std::max(worst_rho, std::abs(recovered[d] - bar.chord_roots()[d]));
  result.add(worst_rho <= 1e-10,
             "the chord-root datum solves back to sqrt(chord) (worst " +
                 fmt(worst_rho) + ")");
  return result;
}

SuiteResult suite_bounds(const CirclePattern& pattern, double tol) {
  SuiteResult result;
  std::vector<std::pair<int, int>> pairs;
  if (pattern.vertex_count() <= 12) {
    for (int u = 0; u < pattern.vertex_count(); ++u)
      for (int v = u + 1; v < pattern.vertex_count(); ++v)
        pairs.emplace_back(u, v);
  } else {
    for (int v = 1; v < pattern.vertex_count(); ++v) pairs.emplace_back(0, v);
  }
  const bool oracle_feasible = pattern.vertex_count() <= 20;
  for (double beta : {0.3, 0.7, 1.0, 1.3}) {
    const CorrelationEngine engine(pattern, beta);
    double worst_slack = 0.0, worst_oracle = 0.0;
    for (const auto& [u, v] : pairs) {
      const CorrelationBounds bounds = engine.bounds(u, v);
      worst_slack = std::max({worst_slack, bounds.lower - bounds.value,
                              bounds.value - bounds.upper});
      if (oracle_feasible)
        worst_oracle = std::max(
            worst_oracle, std::abs(bounds.value -
                                   spin_oracle_two_point(pattern, beta, u, v)
                                       .value));
    }
    result.add(worst_slack <= tol,
               "beta=" + fmt(beta) + ": sandwich holds on " +
                   std::to_string(pairs.size()) + " pairs (worst slack " +
                   fmt(worst_slack) + ")");
    if (oracle_feasible)
      result.add(worst_oracle <= 1e-9,
                 "beta=" + fmt(beta) + ": values match the spin oracle (worst " +
                     fmt(worst_oracle) + ")");
  }
  return result;
}

SuiteResult suite_diffineq(const CirclePattern& pattern, double tol) {
  SuiteResult result;
  const std::vector<int> interior = pattern.interior_vertices();
  if (interior.empty()) {
    result.skip("needs an interior vertex");
    return result;
  }
  if (interior.size() > 12) {
    result.skip("needs at most 12 interior vertices for the exhaustive scan");
    return result;
  }
  const std::vector<DifferentialInequalityPoint> report =
      differential_inequality_check(pattern, interior.front(),
                                    {0.5, 1.0, 1.5});
  for (const DifferentialInequalityPoint& point : report)
    result.add(point.slack >= -tol,
               "beta=" + fmt(point.beta) + ": d/dbeta m = " +
                   fmt(point.derivative) + " >= " + fmt(point.rhs) +
                   " (slack " + fmt(point.slack) + ")");
  return result;
}

int run_suite(const CirclePattern& pattern, const std::string& suite,
              double tol, std::uint64_t seed) {
  SuiteResult result;
  if (suite == "kacward") {
    result = suite_kacward(pattern, tol > 0 ? tol : 1e-9);
  } else if (suite == "eigenvector") {
    result = suite_eigenvector(pattern, tol > 0 ? tol : 1e-11);
  } else if (suite == "observable") {
    result = suite_observable(pattern, tol > 0 ? tol : 1e-9);
  } else if (suite == "norm") {
    result = suite_norm(pattern, tol > 0 ? tol : 1e-9);
  } else if (suite == "switching") {
    result = suite_switching(pattern, tol > 0 ? tol : 1e-12);
  } else if (suite == "sholo") {
    result = suite_sholo(pattern, tol > 0 ? tol : 1e-9, seed);
  } else if (suite == "bounds") {
    result = suite_bounds(pattern, tol > 0 ? tol : 1e-10);
  } else if (suite == "diffineq") {
    result = suite_diffineq(pattern, tol > 0 ? tol : 1e-6);
  } else {
    throw UsageError("unknown suite '" + suite + "'");
  }

  if (result.skipped) {
    std::cout << "suite " << suite << " skipped: " << result.skip_reason
              << "\n";
    return kExitSkipped;
  }
  int passed = 0;
  for (const auto& [ok, line] : result.checks) {
    std::cout << (ok ? "  [pass] " : "  [FAIL] ") << line << "\n";
    passed += ok ? 1 : 0;
  }
  std::cout << "suite " << suite << ": " << passed << "/"
            << result.checks.size() << " checks passed\n";
  return result.all_passed() ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Critical Ising models on circle patterns"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string("pattern-ising ") + kToolVersion);

  std::uint64_t seed = 1;
  int threads = 1;
  app.add_option("--seed", seed, "Seed for randomized inputs")
      ->envname("PATTERN_ISING_SEED");
  app.add_option("--threads", threads,
                 "Worker threads; 1 is the deterministic reference mode");

  // generate
  auto* generate = app.add_subcommand("generate", "Write a pattern JSON file");
  std::string kind, heights_text = "1", out_path;
  int width = 4, height = 4, rows = 3;
  double radius = 1.0, jitter = 0.12;
  generate->add_option("--kind", kind,
                       "isoradial-square | stretched-square | acute-triangulation")
      ->required();
  generate->add_option("--width", width, "Circles per row (or rhombi)");
  generate->add_option("--height", height, "Rows of circles (or rhombi)");
  generate->add_option("--radius", radius, "Common radius (isoradial)");
  generate->add_option("--heights", heights_text,
                       "Comma-separated column heights (stretched), e.g. 1,2,1");
  generate->add_option("--rows", rows, "Stacked faces per column (stretched)");
  generate->add_option("--jitter", jitter, "Coordinate jitter (triangulation)");
  generate->add_option("--out", out_path, "Output pattern file")->required();

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "Check a pattern file");
  std::string validate_path, validate_out;
  double epsilon = 0.05, validate_tol = 1e-9;
  validate_cmd->add_option("pattern", validate_path, "Pattern JSON file")
      ->required();
  validate_cmd->add_option("--epsilon", epsilon,
                           "Half angles must stay in [eps, pi/2 - eps]");
  validate_cmd->add_option("--tol", validate_tol, "Geometric tolerance");
  validate_cmd->add_option("--out", validate_out, "Write the report as JSON");

  // verify
  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  std::string verify_path, suite;
  double verify_tol = 0.0;
  verify->add_option("pattern", verify_path, "Pattern JSON file")->required();
  verify
      ->add_option("--suite", suite,
                   "kacward | eigenvector | observable | norm | switching | "
                   "sholo | bounds | diffineq")
      ->required();
  verify->add_option("--tol", verify_tol,
                     "Override the suite's headline tolerance");

  // correlate
  auto* correlate = app.add_subcommand("correlate", "Pair correlation");
  std::string correlate_path, correlate_out, correlate_json;
  double beta = 1.0;
  int endpoint_u = 0, endpoint_v = 0;
  correlate->add_option("pattern", correlate_path, "Pattern JSON file")
      ->required();
  correlate->add_option("--beta", beta, "Inverse-temperature multiplier");
  correlate->add_option("--u", endpoint_u, "First vertex")->required();
  correlate->add_option("--v", endpoint_v, "Second vertex")->required();
  correlate->add_option("--out", correlate_out, "CSV output path");
  correlate->add_option("--json", correlate_json, "JSON output path");

  // scan-beta
  auto* scan = app.add_subcommand("scan-beta", "Correlation across a beta grid");
  std::string scan_path, scan_out;
  int scan_u = 0, scan_v = 0;
  double beta_min = 0.6, beta_max = 1.2, beta_step = 0.1;
  scan->add_option("pattern", scan_path, "Pattern JSON file")->required();
  scan->add_option("--u", scan_u, "First vertex")->required();
  scan->add_option("--v", scan_v, "Second vertex")->required();
  scan->add_option("--beta-min", beta_min, "Grid start");
  scan->add_option("--beta-max", beta_max, "Grid end (inclusive)");
  scan->add_option("--beta-step", beta_step, "Grid step");
  scan->add_option("--out", scan_out, "CSV output path");

  // svg
  auto* svg = app.add_subcommand("svg", "Render a pattern");
  std::string svg_path, svg_out, overlay = "none";
  double svg_beta = 1.0;
  int svg_source = 0;
  bool svg_labels = false;
  svg->add_option("pattern", svg_path, "Pattern JSON file")->required();
  svg->add_option("--out", svg_out, "SVG output path")->required();
  svg->add_option("--overlay", overlay,
                  "none | couplings | correlations | observable");
  svg->add_option("--beta", svg_beta, "Temperature for the correlations overlay");
  svg->add_option("--source", svg_source,
                  "Source vertex for the correlations overlay");
  svg->add_flag("--labels", svg_labels, "Label vertices with their ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  Eigen::setNbThreads(threads);

  try {
    if (app.got_subcommand(generate)) {
      CirclePattern pattern = [&] {
        if (kind == "isoradial-square")
          return generate_isoradial_square(width, height, radius);
        if (kind == "stretched-square")
          return generate_stretched_square(parse_heights(heights_text), rows);
        if (kind == "acute-triangulation")
          return generate_acute_triangulation(seed, width, height, jitter);
        throw UsageError("unknown pattern kind '" + kind + "'");
      }();
      save_pattern(pattern, out_path);
      nlohmann::json config = {{"kind", kind},       {"width", width},
                               {"height", height},   {"radius", radius},
                               {"heights", heights_text}, {"rows", rows},
                               {"jitter", jitter},   {"seed", seed},
                               {"out", out_path}};
      write_manifest(out_path, "generate", config, &pattern);
      std::cout << "wrote " << out_path << ": " << pattern.vertex_count()
                << " vertices, " << pattern.edge_count() << " edges, fingerprint "
                << hex64(pattern_fingerprint(pattern)) << "\n";
      return kExitOk;
    }

    if (app.got_subcommand(validate_cmd)) {
      const CirclePattern pattern = load_pattern_file(validate_path);
      const ValidationReport report = validate(pattern, epsilon, validate_tol);
      nlohmann::json j = {
          {"ok", report.ok},
          {"worst_angle_sum_deviation", report.worst_angle_sum_deviation},
          {"worst_chord_consistency", report.worst_chord_consistency},
          {"worst_angle_margin", report.worst_angle_margin}};
      j["issues"] = nlohmann::json::array();
      for (const ValidationIssue& issue : report.issues)
        j["issues"].push_back({{"check", issue.check},
                               {"detail", issue.detail},
                               {"violation", issue.violation}});
      if (!validate_out.empty()) {
        write_file(validate_out, j.dump(2) + "\n");
        nlohmann::json config = {{"pattern", validate_path},
                                 {"epsilon", epsilon},
                                 {"tol", validate_tol},
                                 {"out", validate_out}};
        write_manifest(validate_out, "validate", config, &pattern);
      }
      std::cout << (report.ok ? "valid" : "INVALID") << ": angle-sum deviation "
                << fmt(report.worst_angle_sum_deviation) << ", chord residual "
                << fmt(report.worst_chord_consistency) << ", angle margin "
                << fmt(report.worst_angle_margin) << "\n";
      for (const ValidationIssue& issue : report.issues)
        std::cout << "  " << issue.check << ": " << issue.detail << "\n";
      return report.ok ? kExitOk : kExitFailed;
    }

    if (app.got_subcommand(verify)) {
      const CirclePattern pattern = load_pattern_file(verify_path);
      return run_suite(pattern, suite, verify_tol, seed);
    }

    if (app.got_subcommand(correlate)) {
      const CirclePattern pattern = load_pattern_file(correlate_path);
      if (endpoint_u < 0 || endpoint_u >= pattern.vertex_count() ||
          endpoint_v < 0 || endpoint_v >= pattern.vertex_count())
        throw UsageError("endpoints must be vertices of the pattern");
      std::vector<CorrelationResult> rows;
      try {
        const CorrelationEngine engine(pattern, beta);
        rows.push_back(engine.two_point(endpoint_u, endpoint_v));
      } catch (const NumericalError& e) {
        std::cerr << "beta=" << fmt(beta) << ": " << e.what() << "\n";
        CorrelationResult failed;
        failed.u = endpoint_u;
        failed.v = endpoint_v;
        failed.beta = beta;
        failed.value = std::nan("");
        rows.push_back(failed);
      }
      if (pattern.vertex_count() <= 20)
        rows.push_back(
            spin_oracle_two_point(pattern, beta, endpoint_u, endpoint_v));
      const std::string csv = correlations_to_csv(pattern, rows);
      nlohmann::json config = {{"pattern", correlate_path}, {"beta", beta},
                               {"u", endpoint_u},           {"v", endpoint_v},
                               {"out", correlate_out},      {"json", correlate_json}};
      if (!correlate_out.empty()) {
        write_file(correlate_out, csv);
        write_manifest(correlate_out, "correlate", config, &pattern);
      } else {
        std::cout << csv;
      }
      if (!correlate_json.empty()) {
        nlohmann::json j;
        j["pattern_fingerprint"] = hex64(pattern_fingerprint(pattern));
        j["rows"] = nlohmann::json::array();
        for (const CorrelationResult& r : rows)
          j["rows"].push_back({{"beta", r.beta},
                               {"u", r.u},
                               {"v", r.v},
                               {"value", r.value},
                               {"method", method_name(r.method)},
                               {"defect_fingerprint", hex64(r.defect_fingerprint)}});
        write_file(correlate_json, j.dump(2) + "\n");
        write_manifest(correlate_json, "correlate", config, &pattern);
      }
      return kExitOk;
    }

    if (app.got_subcommand(scan)) {
      const CirclePattern pattern = load_pattern_file(scan_path);
      if (scan_u < 0 || scan_u >= pattern.vertex_count() || scan_v < 0 ||
          scan_v >= pattern.vertex_count())
        throw UsageError("endpoints must be vertices of the pattern");
      if (beta_step <= 0.0) throw UsageError("beta step must be positive");
      std::vector<CorrelationResult> rows;
      for (double b = beta_min; b <= beta_max + 1e-12; b += beta_step) {
        try {
          const CorrelationEngine engine(pattern, b);
          rows.push_back(engine.two_point(scan_u, scan_v));
        } catch (const NumericalError& e) {
          std::cerr << "beta=" << fmt(b) << ": " << e.what() << "\n";
          CorrelationResult failed;
          failed.u = scan_u;
          failed.v = scan_v;
          failed.beta = b;
          failed.value = std::nan("");
          rows.push_back(failed);
        }
      }
      const std::string csv = correlations_to_csv(pattern, rows);
      if (!scan_out.empty()) {
        write_file(scan_out, csv);
        nlohmann::json config = {{"pattern", scan_path},   {"u", scan_u},
                                 {"v", scan_v},            {"beta_min", beta_min},
                                 {"beta_max", beta_max},   {"beta_step", beta_step},
                                 {"out", scan_out}};
        write_manifest(scan_out, "scan-beta", config, &pattern);
      } else {
        std::cout << csv;
      }
      return kExitOk;
    }

    if (app.got_subcommand(svg)) {
      const CirclePattern pattern = load_pattern_file(svg_path);
      SvgOptions options;
      options.label_vertices = svg_labels;
      if (overlay == "couplings") {
        options.edge_values = critical_couplings(pattern);
      } else if (overlay == "correlations") {
        if (svg_source < 0 || svg_source >= pattern.vertex_count())
          throw UsageError("overlay source must be a vertex of the pattern");
        const CorrelationEngine engine(pattern, svg_beta);
        options.edge_values.resize(pattern.edge_count());
        for (int e = 0; e < pattern.edge_count(); ++e)
          options.edge_values[e] =
              engine.two_point(pattern.edge(e).u, pattern.edge(e).v).value;
      } else if (overlay == "observable") {
        const std::vector<int> core = pattern.interior_vertices();
        if (core.empty())
          throw UsageError("observable overlay needs interior vertices");
        const BarGraph bar = build_bar_graph(pattern, core);
        const BvpSolution solution =
            solve_boundary_problem(bar, random_boundary_data(bar, seed));
        const Eigen::VectorXcd f = pattern_edge_values(bar, solution.f);
        options.edge_values.resize(pattern.edge_count());
        for (int e = 0; e < pattern.edge_count(); ++e)
          options.edge_values[e] = std::abs(f[e]);
      } else if (overlay != "none") {
        throw UsageError("unknown overlay '" + overlay + "'");
      }
      save_svg(pattern, svg_out, options);
      nlohmann::json config = {{"pattern", svg_path}, {"out", svg_out},
                               {"overlay", overlay},  {"beta", svg_beta},
                               {"source", svg_source}, {"seed", seed}};
      write_manifest(svg_out, "svg", config, &pattern);
      std::cout << "wrote " << svg_out << "\n";
      return kExitOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SizeLimitError& e) {
    std::cerr << "skipped: " << e.what() << "\n";
    return kExitSkipped;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailed;
  }
  return kExitUsage;
}
