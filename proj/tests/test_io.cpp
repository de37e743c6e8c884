#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "metric_lab/errors.hpp"
#include "metric_lab/expr.hpp"
#include "metric_lab/io.hpp"
#include "metric_lab/operators.hpp"
#include "metric_lab/runner.hpp"
#include "oracles.hpp"

using namespace metric_lab;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("metric_lab_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::string& config, const fs::path& dir, RunOverrides ov = {}) {
  std::ostringstream out, err;
  const int code = run_experiment(config, dir, ov, out, err);
  return {code, out.str(), err.str()};
}

const char* kMinimal = R"({"schema_version": 1, "seed": 7,
  "space": {"builder": "grid", "dim": 1, "n": 8},
  "fields": [{"name": "f", "kind": "random"}],
  "checks": [{"id": "thm2", "field": "f", "s": 0.3, "p": 1.5, "q": 1.5}],
  "output": {"dir": "out"}})";

std::size_t count_reports(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename().string().rfind("report_", 0) == 0) ++n;
  return n;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("hashing and number formatting") {
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hex64(0xabcULL) == "0000000000000abc");
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("space round trip") {
  const auto s = build_grid(2, 4, WeightMode::cell_volume);
  const auto back = space_from_json(nlohmann::json::parse(space_to_json(s).dump()));
  REQUIRE(back.size() == s.size());
  for (PointId i = 0; i < s.size(); ++i) {
    CHECK(back.weight(i) == s.weight(i));
    for (PointId j = 0; j < s.size(); ++j) CHECK(back.dist(i, j) == s.dist(i, j));
  }
  CHECK(back.edges().size() == s.edges().size());

  const auto plain = space_from_json(nlohmann::json::parse(R"({"points": [[0], [1], [3]]})"));
  CHECK(plain.weight(2) == doctest::Approx(1.0 / 3));
  const auto graph = space_from_json(
      nlohmann::json::parse(R"({"points": [[0], [1], [2]], "adjacency": [[0, 1], [1, 2]], "metric": "graph"})"));
  CHECK(graph.dist(0, 2) == doctest::Approx(2.0));
  const auto expl = space_from_json(nlohmann::json::parse(R"({"metric": "explicit", "distances": [[0, 2], [2, 0]]})"));
  CHECK(expl.dist(0, 1) == 2.0);
  CHECK_THROWS(space_from_json(nlohmann::json::parse(R"({"points": [[0], [1]], "weights": [1]})")));
  CHECK_THROWS(space_from_json(nlohmann::json::parse(R"({"points": [[0], [1]], "metric": "taxicab"})")));
}

TEST_CASE("distance matrix file") {
  TempDir tmp;
  const auto s = build_grid(2, 5, WeightMode::cell_volume);
  const auto file = tmp.path() / "d.bin";
  write_distance_matrix(file, s.distances());
  CHECK(fs::file_size(file) == s.size() * s.size() * 8);
  std::ifstream in(file, std::ios::binary);
  unsigned char bytes[8];
  in.seekg(8);
  in.read(reinterpret_cast<char*>(bytes), 8);
  std::uint64_t bits = 0;
  for (int k = 7; k >= 0; --k) bits = (bits << 8) | bytes[k];
  CHECK(std::bit_cast<double>(bits) == s.dist(0, 1));
  const auto back = read_distance_matrix(file, s.size());
  REQUIRE(back.has_value());
  CHECK(std::equal(back->begin(), back->end(), s.distances().begin()));
  CHECK_FALSE(read_distance_matrix(file, s.size() + 1).has_value());
}

TEST_CASE("distance cache") {
  TempDir tmp;
  ::setenv(kCacheEnvVar, tmp.path().c_str(), 1);
  int builds = 0;
  auto build = [&] {
    ++builds;
    return build_grid(2, 6, WeightMode::cell_volume);
  };
  const auto a = with_distance_cache("grid-6", build);
  CHECK(!fs::is_empty(tmp.path()));
  const auto b = with_distance_cache("grid-6", build);
  ::unsetenv(kCacheEnvVar);
  CHECK(b.size() == a.size());
  for (PointId i = 0; i < a.size(); ++i)
    for (PointId j = 0; j < a.size(); ++j) CHECK(a.dist(i, j) == b.dist(i, j));
}

TEST_CASE("kernel export") {
  TempDir tmp;
  const auto s = build_grid(1, 5, WeightMode::uniform_total_one);
  const auto k = build_rough_kernel(s, 1.0, AngularPattern::random_pm1, true, 3);
  write_kernel(tmp.path() / "k.bin", k);
  CHECK(fs::file_size(tmp.path() / "k.bin") == 25 * 8);
  const auto side = read_json_file(tmp.path() / "k.bin.json");
  CHECK(side["nu"] == 1.0);
  CHECK(side["pattern"] == "random-pm1");
  CHECK(side["seed"] == 3);
  const auto d = read_distance_matrix(tmp.path() / "k.bin", 5);
  CHECK(std::isnan((*d)[0]));
  CHECK((*d)[1] == k.at(0, 1));
}

TEST_CASE("field import and export") {
  const auto s = build_grid(1, 4, WeightMode::uniform_total_one);
  const auto f = field_from_csv(s, "point_id,value\n2,3.5\n0,1\n1,-2\n3,0\n");
  CHECK(f[0] == 1.0);
  CHECK(f[2] == 3.5);
  const auto again = field_from_csv(s, field_to_csv(f));
  for (PointId i = 0; i < 4; ++i) CHECK(again[i] == f[i]);
  CHECK(field_from_json(s, nlohmann::json::parse("[1, 2, 3, 4]"))[3] == 4.0);
  CHECK(field_from_json(s, nlohmann::json::parse(R"({"values": [1, 2, 3, 4]})"))[1] == 2.0);
  CHECK_THROWS(field_from_csv(s, "point_id,value\n0,1\n0,2\n1,1\n2,1\n"));
  CHECK_THROWS(field_from_csv(s, "point_id,value\n0,1\n"));
  CHECK_THROWS(field_from_json(s, nlohmann::json::parse("[1, 2]")));
}

TEST_CASE("report serialization") {
  InequalityReport r;
  r.id = InequalityId::thm1;
  r.lhs = {1.0, 0.0, 0.5};
  r.rhs = {2.0, 0.0, 0.25};
  r.exploratory = true;
  r.params["certificate"] = {{"r_min", 0.1}, {"r_max", 0.5}, {"nu_hat", 0.63}, {"condition_value", 1.3}, {"condition_holds", false}};
  r.seed = 42;
  r.notes = {"note"};
  finalize_report(r, 0.0);
  const auto j = report_to_json(r);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) {
    (void)v;
    keys.push_back(k);
  }
  CHECK(keys.front() == "schema_version");
  CHECK(keys[1] == "inequality_id");
  const auto back = report_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.id == r.id);
  CHECK(back.lhs == r.lhs);
  CHECK(back.empirical_constant == r.empirical_constant);
  CHECK(back.skipped == 1);
  CHECK(nlohmann::json::parse(report_to_json(back).dump()) == nlohmann::json::parse(j.dump()));

  const auto csv = report_to_csv(r);
  CHECK(csv.rfind("point_id,lhs,rhs,ratio\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  const auto line = report_summary_line("r.json", r);
  CHECK(line.find("exploratory (condition 2^{1-ν}c2/c1 ≥ 1)") != std::string::npos);
  CHECK(line.find("window=[0.1, 0.5]") != std::string::npos);
  CHECK(line.find("skipped=1") != std::string::npos);
}

TEST_CASE("formulas") {
  const std::vector<double> x{0.5, 2.0, -1.0};
  auto eval = [&](const std::string& t) { return Expression::parse(t).evaluate(x); };
  CHECK(eval("1 + 2 * 3") == 7.0);
  CHECK(eval("(1 + 2) * 3") == 9.0);
  CHECK(eval("2 ^ 3 ^ 2") == 512.0);
  CHECK(eval("-2 ^ 2") == -4.0);
  CHECK(eval("x0 * x1 - x2") == 2.0);
  CHECK(eval("exp(0) + log(e) + abs(x2)") == doctest::Approx(3.0));
  CHECK(eval("ind(x0 + x1 - 2.5)") == 1.0);
  CHECK(eval("ind(x0 - x1)") == 0.0);
  CHECK(eval("2 * pi") == doctest::Approx(6.283185307179586));
  CHECK(eval("1e-3 * 4") == doctest::Approx(0.004));
  CHECK(Expression::parse("x2 + x0").arity() == 3);
  CHECK_THROWS_AS(Expression::parse("1 +"), ConfigError);
  CHECK_THROWS_AS(Expression::parse("sin(x0)"), ConfigError);
  CHECK_THROWS_AS(Expression::parse("(x0"), ConfigError);
  CHECK_THROWS_AS(Expression::parse("x0 x1"), ConfigError);
  CHECK_THROWS_AS(Expression::parse("x1").evaluate(std::vector<double>{1.0}), ArgumentError);
}

TEST_CASE("minimal run") {
  TempDir tmp;
  const auto r = run(kMinimal, tmp.path());
  CHECK(r.code == kExitOk);
  CHECK(count_reports(tmp.path() / "out") == 1);
  const auto manifest = read_json_file(tmp.path() / "out" / "manifest.json");
  CHECK(manifest["status"] == "ok");
  CHECK(manifest["config_hash"].get<std::string>().size() == 16);
  CHECK(manifest["space"]["triangle_violations"] == 0);
  CHECK(manifest["reports"].size() == 1);
  const auto report = read_json_file(tmp.path() / "out" / "report_00_thm2.json");
  CHECK(report["violations"] == 0);
  CHECK(report["params"]["certificate"].contains("r_min"));
}

TEST_CASE("runs are reproducible") {
  TempDir tmp;
  REQUIRE(run(kMinimal, tmp.path()).code == kExitOk);
  const auto first = read_text_file(tmp.path() / "out" / "report_00_thm2.json");
  const auto manifest = read_text_file(tmp.path() / "out" / "manifest.json");
  RunOverrides ov;
  ov.jobs = 3;
  REQUIRE(run(kMinimal, tmp.path(), ov).code == kExitOk);
  CHECK(read_text_file(tmp.path() / "out" / "report_00_thm2.json") == first);
  CHECK(read_text_file(tmp.path() / "out" / "manifest.json") == manifest);

  ov.seed = 8;
  REQUIRE(run(kMinimal, tmp.path(), ov).code == kExitOk);
  CHECK(read_text_file(tmp.path() / "out" / "report_00_thm2.json") != first);
}

TEST_CASE("config errors leave no output") {
  TempDir tmp;
  auto expect_error = [&](const std::string& config, const std::string& needle) {
    const auto r = run(config, tmp.path());
    CHECK(r.code == kExitConfig);
    CHECK_MESSAGE(r.err.find(needle) != std::string::npos, r.err);
    CHECK_FALSE(fs::exists(tmp.path() / "out"));
  };
  std::string morrey = kMinimal;
  morrey.replace(morrey.find(R"("checks": [)"), std::string::npos,
                 R"("checks": [{"id": "maximal_bound", "norm": {"kind": "morrey", "p": 3, "q": 2}}], "output": {"dir": "out"}})");
  expect_error(morrey, "Morrey constraint p <= q violated");

  std::string pq = kMinimal;
  pq.replace(pq.find(R"("p": 1.5)"), 8, R"("p": 2.5)");
  expect_error(pq, "Morrey constraint 1 < p <= q < inf");

  expect_error("{\n  \"schema_version\": 1,\n  \"seed\": 7,,\n}", "line 3");
  std::string no_seed = kMinimal;
  no_seed.replace(no_seed.find(R"("seed": 7,)"), 10, "");
  expect_error(no_seed, "config.seed");
  std::string unknown = kMinimal;
  unknown.replace(unknown.find(R"("s": 0.3)"), 8, R"("sigma": 0.3)");
  expect_error(unknown, "config.checks[0].sigma: unknown field");
  std::string missing_field = kMinimal;
  missing_field.replace(missing_field.find(R"("field": "f")"), 12, R"("field": "g")");
  expect_error(missing_field, "unknown field \"g\"");
  std::string big_s = kMinimal;
  big_s.replace(big_s.find(R"("s": 0.3)"), 8, R"("s": 3.0)");
  expect_error(big_s, "thm2 requires s < nu/q");
  std::string no_kernel = kMinimal;
  no_kernel.replace(no_kernel.find(R"("checks": [)"), std::string::npos,
                    R"("checks": [{"id": "thm1", "field": "f"}], "output": {"dir": "out"}})");
  expect_error(no_kernel, "needs a kernel section");
  std::string formula = kMinimal;
  formula.replace(formula.find(R"("kind": "random")"), 16, R"("kind": "formula", "expr": "x0 +")");
  expect_error(formula, "config.fields[0].expr");
}

TEST_CASE("fields from formulas and files") {
  TempDir tmp;
  write_text_file(tmp.path() / "f.csv", "point_id,value\n0,1\n1,2\n2,3\n3,4\n4,5\n5,6\n6,7\n7,8\n");
  const std::string config = R"({"schema_version": 1, "seed": 1,
    "space": {"builder": "grid", "dim": 1, "n": 8},
    "kernel": {"pattern": "sign-first-coordinate"},
    "fields": [{"name": "a", "kind": "file", "path": "f.csv"},
               {"name": "b", "kind": "formula", "expr": "1 + x0^2"}],
    "checks": [{"id": "thm2", "field": "a", "s": 0.2, "p": 1.2, "q": 1.2},
               {"id": "thm1", "field": "b"},
               {"id": "poincare", "fields": ["a", "b"], "balls": 4}],
    "output": {"dir": "out"}})";
  const auto r = run(config, tmp.path());
  CHECK_MESSAGE(r.code == kExitOk, r.err);
  CHECK(count_reports(tmp.path() / "out") == 3);
  const auto thm1 = read_json_file(tmp.path() / "out" / "report_01_thm1.json");
  CHECK(thm1["params"].contains("poincare_constant"));
}

TEST_CASE("report rendering") {
  TempDir tmp;
  std::ostringstream out, err;
  CHECK(emit_report(tmp.path() / "absent", "json", out, err) == kExitConfig);
  fs::create_directories(tmp.path() / "empty");
  std::ostringstream eout;
  CHECK(emit_report(tmp.path() / "empty", "summary-text", eout, err) == kExitOk);
  CHECK(eout.str().empty());
  CHECK(read_text_file(tmp.path() / "empty" / "summary.txt").empty());

  REQUIRE(run(kMinimal, tmp.path()).code == kExitOk);
  const auto bundle = tmp.path() / "out";
  CHECK(emit_report(bundle, "csv", out, err) == kExitOk);
  const auto csv = read_text_file(bundle / "report_00_thm2.csv");
  CHECK(csv.rfind("point_id,lhs,rhs,ratio\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
  CHECK(emit_report(bundle, "json", out, err) == kExitOk);
  CHECK(read_json_file(bundle / "reports.json").size() == 1);
  std::ostringstream sout;
  CHECK(emit_report(bundle, "summary-text", sout, err) == kExitOk);
  CHECK(sout.str().find("thm2 constant=") != std::string::npos);
  CHECK(emit_report(bundle, "xml", out, err) == kExitConfig);
}

TEST_CASE("exploratory summary") {
  TempDir tmp;
  const std::string config = R"({"schema_version": 1, "seed": 3,
    "space": {"builder": "cantor", "dim": 1, "level": 4},
    "certificate": {"r_min": 0.012345679012345678, "r_max": 1.0, "centers": "all"},
    "kernel": {"pattern": "random-pm1"},
    "fields": [{"name": "f", "kind": "random", "distribution": "signed-bumps"}],
    "checks": [{"id": "thm1", "field": "f"}],
    "output": {"dir": "out"}})";
  const auto r = run(config, tmp.path());
  CHECK_MESSAGE(r.code == kExitOk, r.err);
  CHECK(r.out.find("exploratory (condition 2^{1-ν}c2/c1 ≥ 1)") != std::string::npos);
  std::ostringstream out, err;
  CHECK(emit_report(tmp.path() / "out", "summary-text", out, err) == kExitOk);
  CHECK(out.str().find("exploratory (condition 2^{1-ν}c2/c1 ≥ 1)") != std::string::npos);
}

TEST_CASE("certify a space file") {
  TempDir tmp;
  write_text_file(tmp.path() / "s.json", space_to_json(build_grid(2, 10, WeightMode::cell_volume)).dump());
  std::ostringstream out, err;
  CHECK(certify_space_file(tmp.path() / "s.json", {}, out, err) == kExitOk);
  const auto j = nlohmann::json::parse(out.str());
  CHECK(j["triangle"]["violations"] == 0);
  CHECK(j["triangle"]["triples"] == 10000);
  CHECK(j["certificate_sound"] == true);
  CHECK(j["doubling"]["d_empirical"].get<double>() <= j["doubling"]["d_theory"].get<double>());
  CHECK(j["certificate"].contains("condition_holds"));
  std::ostringstream o2, e2;
  CHECK(certify_space_file(tmp.path() / "none.json", {}, o2, e2) == kExitConfig);
}

}
