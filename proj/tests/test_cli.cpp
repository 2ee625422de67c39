#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

namespace {

std::string g_cli;
std::filesystem::path g_dir;

struct RunResult {
  int status = -1;
  std::string output;  // stdout and stderr combined
};

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const std::filesystem::path log =
      g_dir / ("run" + std::to_string(++counter) + ".log");
  const std::string command =
      "\"" + g_cli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  RunResult result;
  const int raw = std::system(command.c_str());
  result.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(log);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  result.output = buffer.str();
  return result;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string scratch(const std::string& name) {
  return (g_dir / name).string();
}

// Lazily generated shared fixtures.
const std::string& iso3_fixture() {
  static const std::string path = [] {
    const std::string p = scratch("iso3.json");
    run_cli("generate --kind isoradial-square --width 3 --height 3 --out \"" +
            p + "\"");
    return p;
  }();
  return path;
}

const std::string& iso23_fixture() {
  static const std::string path = [] {
    const std::string p = scratch("iso23.json");
    run_cli("generate --kind isoradial-square --width 2 --height 3 --out \"" +
            p + "\"");
    return p;
  }();
  return path;
}

std::vector<std::string> csv_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

struct CsvRow {
  double beta = 0.0;
  int d = 0, u = 0, v = 0;
  double value = 0.0;
  std::string method;
};

CsvRow parse_row(const std::string& line) {
  CsvRow row;
  char method[64] = {0};
  REQUIRE(std::sscanf(line.c_str(), "%lf,%d,%d,%d,%lf,%63s", &row.beta, &row.d,
                      &row.u, &row.v, &row.value, method) == 6);
  row.method = method;
  return row;
}

}  // namespace

TEST_CASE("generate writes a pattern and a manifest for every kind") {
  const std::vector<std::pair<std::string, std::string>> jobs = {
      {"iso.json", "--kind isoradial-square --width 3 --height 3"},
      {"str.json", "--kind stretched-square --heights 1,1.8,0.6 --rows 4"},
      {"tri.json",
       "--kind acute-triangulation --width 4 --height 3 --jitter 0.1 --seed 7"}};
  for (const auto& [name, flags] : jobs) {
    const std::string out = scratch(name);
    const RunResult run = run_cli("generate " + flags + " --out \"" + out + "\"");
    CHECK(run.status == 0);
    CHECK(std::filesystem::exists(out));

    const std::filesystem::path manifest = out + ".manifest.json";
    REQUIRE(std::filesystem::exists(manifest));
    const nlohmann::json j = nlohmann::json::parse(slurp(manifest));
    CHECK(j.at("tool") == "pattern-ising");
    CHECK(j.at("version") == "1.0.0");
    CHECK(j.at("command") == "generate");
    CHECK(j.at("pattern_fingerprint").get<std::string>().size() == 16);
  }
}

TEST_CASE("generation is deterministic for a fixed seed") {
  const std::string base =
      "generate --kind acute-triangulation --width 4 --height 3 --jitter 0.1 ";
  const std::string a = scratch("tri_a.json");
  const std::string b = scratch("tri_b.json");
  const std::string c = scratch("tri_c.json");
  CHECK(run_cli(base + "--seed 7 --out \"" + a + "\"").status == 0);
  CHECK(run_cli(base + "--seed 7 --out \"" + b + "\"").status == 0);
  CHECK(run_cli(base + "--seed 8 --out \"" + c + "\"").status == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) != slurp(c));
}

TEST_CASE("validate accepts generated patterns and writes a report") {
  const std::string report = scratch("iso3_report.json");
  const RunResult run =
      run_cli("validate \"" + iso3_fixture() + "\" --out \"" + report + "\"");
  CHECK(run.status == 0);
  CHECK(run.output.find("valid") == 0);

  const nlohmann::json j = nlohmann::json::parse(slurp(report));
  CHECK(j.at("ok") == true);
  CHECK(j.at("worst_angle_sum_deviation").get<double>() < 1e-12);
  CHECK(j.at("issues").empty());
}

TEST_CASE("validate flags an epsilon the angles cannot satisfy") {
  // All half angles are pi/4, so a 0.8 band is impossible.
  const RunResult run =
      run_cli("validate \"" + iso3_fixture() + "\" --epsilon 0.8");
  CHECK(run.status == 1);
  CHECK(run.output.find("INVALID") != std::string::npos);
}

TEST_CASE("validate fails cleanly on corrupt or missing input") {
  // Unloadable input is reported as a usage error.
  const std::string corrupt = scratch("corrupt.json");
  std::ofstream(corrupt) << "this is not a pattern {{{";
  const RunResult bad = run_cli("validate \"" + corrupt + "\"");
  CHECK(bad.status == 2);
  CHECK(bad.output.find("error") != std::string::npos);
  CHECK(bad.output.find("cannot load pattern") != std::string::npos);

  CHECK(run_cli("validate \"" + scratch("no_such_file.json") + "\"").status == 2);
}

TEST_CASE("verification suites pass on patterns that fit their caps") {
  for (const std::string suite :
       {"kacward", "eigenvector", "norm", "bounds", "diffineq", "sholo"}) {
    const RunResult run =
        run_cli("verify \"" + iso3_fixture() + "\" --suite " + suite);
    CAPTURE(suite);
    CAPTURE(run.output);
    CHECK(run.status == 0);
    CHECK(run.output.find("[FAIL]") == std::string::npos);
    CHECK(run.output.find("checks passed") != std::string::npos);
  }
  for (const std::string suite : {"observable", "switching"}) {
    const RunResult run =
        run_cli("verify \"" + iso23_fixture() + "\" --suite " + suite);
    CAPTURE(suite);
    CAPTURE(run.output);
    CHECK(run.status == 0);
    CHECK(run.output.find("[FAIL]") == std::string::npos);
  }
}

TEST_CASE("verification suites skip oversized inputs") {
  // 3x3 has 12 edges: over the exhaustive caps of both suites.
  for (const std::string suite : {"observable", "switching"}) {
    const RunResult run =
        run_cli("verify \"" + iso3_fixture() + "\" --suite " + suite);
    CHECK(run.status == 3);
    CHECK(run.output.find("skipped") != std::string::npos);
  }
}

TEST_CASE("bad arguments are usage errors") {
  CHECK(run_cli("verify \"" + iso3_fixture() + "\" --suite bogus").status == 2);
  CHECK(run_cli("generate --kind bogus --out \"" + scratch("x.json") + "\"")
            .status == 2);
  CHECK(run_cli("generate --kind isoradial-square").status == 2);  // no --out
  CHECK(run_cli("").status == 2);                                  // no command
  CHECK(run_cli("svg \"" + iso3_fixture() + "\" --out \"" + scratch("x.svg") +
                "\" --overlay bogus")
            .status == 2);
  CHECK(run_cli("correlate \"" + iso3_fixture() + "\" --u 0 --v 99").status ==
        2);
}

TEST_CASE("correlate cross-checks the exhaustive oracle on stdout") {
  const RunResult run =
      run_cli("correlate \"" + iso23_fixture() + "\" --beta 0.9 --u 0 --v 5");
  CHECK(run.status == 0);
  const std::vector<std::string> lines = csv_lines(run.output);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "beta,d,u,v,value,method");
  const CsvRow kacward = parse_row(lines[1]);
  const CsvRow oracle = parse_row(lines[2]);
  CHECK(kacward.method == "kacward");
  CHECK(oracle.method == "spin_oracle");
  CHECK(kacward.beta == 0.9);
  CHECK(kacward.u == 0);
  CHECK(kacward.v == 5);
  CHECK(kacward.value == doctest::Approx(oracle.value).epsilon(1e-9));
}

TEST_CASE("correlate writes a json report with fingerprints") {
  const std::string out = scratch("corr.json");
  const RunResult run = run_cli("correlate \"" + iso23_fixture() +
                                "\" --beta 0.9 --u 0 --v 5 --json \"" + out +
                                "\"");
  CHECK(run.status == 0);
  const nlohmann::json j = nlohmann::json::parse(slurp(out));
  CHECK(j.at("pattern_fingerprint").get<std::string>().size() == 16);
  REQUIRE(j.at("rows").size() == 2);
  CHECK(j["rows"][0].at("method") == "kacward");
  CHECK(j["rows"][0].at("defect_fingerprint").get<std::string>().size() == 16);
  CHECK(j["rows"][1].at("method") == "spin_oracle");
}

TEST_CASE("scan-beta emits one row per grid point") {
  const RunResult run =
      run_cli("scan-beta \"" + iso23_fixture() +
              "\" --u 0 --v 5 --beta-min 0.5 --beta-max 1.0 --beta-step 0.25");
  CHECK(run.status == 0);
  const std::vector<std::string> lines = csv_lines(run.output);
  REQUIRE(lines.size() == 4);
  CHECK(parse_row(lines[1]).beta == 0.5);
  CHECK(parse_row(lines[2]).beta == 0.75);
  CHECK(parse_row(lines[3]).beta == 1.0);
  // Correlations grow with beta.
  CHECK(parse_row(lines[1]).value < parse_row(lines[2]).value);
  CHECK(parse_row(lines[2]).value < parse_row(lines[3]).value);
}

TEST_CASE("svg rendering covers every overlay deterministically") {
  const std::string plain = scratch("plain.svg");
  CHECK(run_cli("svg \"" + iso3_fixture() + "\" --out \"" + plain + "\"")
            .status == 0);
  const std::string first = slurp(plain);
  CHECK(first.find("<svg") != std::string::npos);
  CHECK(run_cli("svg \"" + iso3_fixture() + "\" --out \"" + plain + "\"")
            .status == 0);
  CHECK(slurp(plain) == first);

  const std::string labeled = scratch("labeled.svg");
  CHECK(run_cli("svg \"" + iso3_fixture() + "\" --out \"" + labeled +
                "\" --labels")
            .status == 0);
  CHECK(slurp(labeled).find("<text") != std::string::npos);

  for (const std::string overlay : {"couplings", "correlations", "observable"}) {
    const std::string out = scratch(overlay + ".svg");
    const RunResult run =
        run_cli("svg \"" + iso3_fixture() + "\" --out \"" + out +
                "\" --overlay " + overlay + " --beta 0.9 --source 0");
    CAPTURE(overlay);
    CAPTURE(run.output);
    CHECK(run.status == 0);
    CHECK(slurp(out) != first);
  }
}

TEST_CASE("version flag reports the tool version") {
  const RunResult run = run_cli("--version");
  CHECK(run.status == 0);
  CHECK(run.output.find("pattern-ising 1.0.0") != std::string::npos);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <pattern-ising binary> [doctest options]\n");
    return 1;
  }
  g_cli = argv[1];
  g_dir = std::filesystem::temp_directory_path() / "pattern_ising_cli_tests";
  std::filesystem::create_directories(g_dir);

  // Hand everything after the binary path to doctest.
  std::vector<char*> forwarded;
  forwarded.push_back(argv[0]);
  for (int i = 2; i < argc; ++i) forwarded.push_back(argv[i]);
  doctest::Context context(static_cast<int>(forwarded.size()),
                           forwarded.data());
  return context.run();
}
