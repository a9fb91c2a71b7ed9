#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "carnot/commands.hpp"
#include "carnot/errors.hpp"
#include "carnot/functions.hpp"
#include "carnot/io.hpp"
#include "carnot/report.hpp"
#include "test_support.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace carnot;
using carnot::testing::make_group;
using carnot::testing::vec;

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("carnot_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_text(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path.string();
}

RunResult run(RunConfig cfg) {
  std::ostringstream out;
  std::ostringstream err;
  return run_command(cfg, out, err);
}

std::size_t count_lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST_CASE("digest is 64-bit FNV-1a") {
  CHECK(digest("") == "cbf29ce484222325");
  CHECK(digest("a") == "af63dc4c8601ec8c");
  CHECK(digest("foobar") == "85944171f73967e8");
}

TEST_CASE("report emission") {
  Report empty;
  empty.command = "noop";
  const auto j = report_json(empty);
  CHECK(j["records"].empty());
  CHECK(j["summary"]["verdict"] == "pass");
  CHECK(report_csv(empty) == "tau,residual,check_id\n");
  CHECK(nlohmann::json::parse(report_json(empty).dump()).is_object());

  Report r;
  r.command = "demo";
  r.add({"a", "in-a", 0.5, 1.0, true, {}});
  r.add({"b", "in-b", 2.0, 1.0, false, {{"note", "x"}}});
  const std::vector<double> tau{0.1, 0.05, 0.025};
  r.add_curve("a", tau, {1.0, 0.5, 0.25});
  r.add_curve("b", tau, {3.0, 2.0, 1.0});
  CHECK_FALSE(r.passed());
  const auto rj = report_json(r);
  CHECK(rj["records"][0]["inputs_digest"] == digest("in-a"));
  CHECK(rj["records"][1]["verdict"] == "fail");
  CHECK(rj["summary"]["failed"] == 1);
  CHECK(count_lines(report_csv(r)) == 1 + tau.size() * 2);
  CHECK(report_summary(r).find("[FAIL] b") != std::string::npos);

  const auto dir = scratch_dir("emit");
  emit_report(r, (dir / "r.json").string(), (dir / "r.csv").string());
  CHECK(fs::exists(dir / "r.csv"));
  CHECK_THROWS_AS(emit_report(r, (dir / "missing" / "r.json").string(), ""), std::runtime_error);
  CHECK(csv_path_for("out/report.json") == "out/report.csv");
}

TEST_CASE("descriptor files") {
  const auto d = parse_descriptor(R"({"name": "h", "layers": [2, 1], "brackets": [{"i": 1, "j": 2, "k": 3}]})");
  CHECK(d.name == "h");
  REQUIRE(d.brackets.size() == 1);
  CHECK(d.brackets[0].i == 0);
  CHECK(d.brackets[0].k == 2);
  CHECK(d.brackets[0].c == 1.0);
  CHECK(validate_descriptor(d).ok());

  CHECK_THROWS_AS(parse_descriptor("{"), ParseError);
  CHECK_THROWS_AS(parse_descriptor(R"({"layers": [2, 1], "extra": 1})"), ParseError);
  CHECK_THROWS_AS(parse_descriptor(R"({"layers": "2"})"), ParseError);
  CHECK_THROWS_AS(parse_descriptor(R"({"layers": [2, 1], "brackets": [{"i": 1, "j": 2}]})"), ParseError);

  const auto dir = scratch_dir("descriptor");
  const auto bad = write_text(dir / "bad.json", R"({"layers": [2, 1], "brackets": [{"i": 1, "j": 2, "k": 2}]})");
  CHECK_THROWS_AS(load_group(bad), InvalidDescriptor);
  CHECK_FALSE(load_group(bad, true)->validated());
  CHECK(load_group("engel")->dim() == 4);
  CHECK_THROWS_AS(load_group("nosuch"), ParseError);
}

TEST_CASE("function specs") {
  const auto g = make_group("heisenberg:1");
  const Vec x = vec({0.3, -0.2, 0.7});

  const auto named = load_function("mixed", g);
  CHECK(named(x) == doctest::Approx(0.09 + 0.04 + 0.7));

  const auto affine = load_function(R"({"builtin": "affine", "params": {"q": [2, 3], "c": 1}})", g);
  CHECK(affine(x) == doctest::Approx(1.0 + 0.6 - 0.6));

  const auto poly = load_function(R"({"polynomial": [{"exponents": [2, 0, 0], "coeff": 1},
                                                     {"exponents": [0, 0, 1], "coeff": 2}]})",
                                  g);
  CHECK(poly(x) == doctest::Approx(0.09 + 1.4));
  REQUIRE(poly.has_gradient());
  // X_1 = d_1 - x_2/2 d_3, X_2 = d_2 + x_1/2 d_3.
  CHECK((poly.gradient(x) - vec({0.6 + 0.2, 0.3})).norm() < 1e-14);

  const auto both = load_function(R"({"composition": "max", "terms": ["abs-x1", {"builtin": "affine"}]})", g);
  CHECK(both(x) == doctest::Approx(std::max(0.3, 0.3 + 0.1)));

  const auto dir = scratch_dir("function");
  CHECK(load_function(write_text(dir / "f.json", R"({"builtin": "one-norm"})"), g)(x) == doctest::Approx(0.5));

  CHECK_THROWS_AS(load_function("", g), ParseError);
  CHECK_THROWS_AS(load_function("{not json", g), ParseError);
  CHECK_THROWS_AS(load_function(R"({"builtin": "affine", "params": {"zz": 1}})", g), ParseError);
  CHECK_THROWS_AS(load_function(R"({"polynomial": [{"exponents": [1, 0], "coeff": 1}]})", g), ParseError);
  CHECK_THROWS_AS(load_function(R"({"something": 1})", g), ParseError);
  CHECK_THROWS_AS(load_polynomial(R"({"polynomial": [{"exponents": [1, 0, 0], "coeff": "a"}]})", *g), ParseError);
}

TEST_CASE("sampling plans and points") {
  const auto p = parse_plan(R"({"radii": [0.1, 0.01], "seed": 7, "tol": {"membership": 1e-5}})");
  CHECK(p.radii.size() == 2);
  CHECK(p.seed == 7);
  CHECK(p.tol.membership == 1e-5);
  CHECK(p.samples_per_shell == SamplingPlan{}.samples_per_shell);
  CHECK_THROWS_AS(parse_plan(R"({"radius": 1})"), ParseError);
  CHECK_THROWS_AS(parse_plan(R"({"radii": [0.01, 0.1]})"), ParseError);
  CHECK_THROWS_AS(parse_plan(R"({"tol": {"nope": 1}})"), ParseError);

  CHECK((parse_point("1, -2.5,3e-1", 3) - vec({1, -2.5, 0.3})).norm() == 0.0);
  CHECK_THROWS_AS(parse_point("1,2", 3), ParseError);
  CHECK_THROWS_AS(parse_point("1,x,3", 3), ParseError);
  CHECK_THROWS_AS(parse_point("1,2,inf", 3), ParseError);
  CHECK_THROWS_AS(parse_point("1,2,3z", 3), ParseError);
}

TEST_CASE("exit statuses") {
  const auto dir = scratch_dir("status");
  const auto bad = write_text(dir / "bad.json", R"({"layers": [2, 1], "brackets": [{"i": 1, "j": 2, "k": 2}]})");

  RunConfig validate{.command = "group-validate", .group = bad};
  const auto v = run(validate);
  CHECK(v.status == kExitCheckFailed);
  REQUIRE(v.report.records.size() == 1);
  CHECK_FALSE(v.report.records[0].details["violations"].empty());

  CHECK(run({.command = "group-validate", .group = "engel"}).status == kExitPass);
  CHECK(run({.command = "group-product", .group = bad}).status == kExitCheckFailed);
  // Only the stratification condition fails here, so the forced group law is still consistent.
  const auto flat = write_text(dir / "flat.json", R"({"layers": [2, 1]})");
  CHECK(run({.command = "group-product", .group = flat}).status == kExitCheckFailed);
  CHECK(run({.command = "group-product", .group = flat, .points = {"1,0,0", "0,1,0"}, .force = true}).status ==
        kExitPass);
  CHECK(run({.command = "nope"}).status == kExitConfig);
  CHECK(run({.command = "mvt"}).status == kExitConfig);
  CHECK(run({.command = "mvt", .function = "mixed", .points = {"0,0"}}).status == kExitConfig);
  CHECK(run({.command = "subdiff", .function = "mixed", .plan_file = (dir / "absent.json").string()}).status ==
        kExitConfig);
  CHECK(run({.command = "poly-hess", .function = R"({"polynomial": [{"exponents": [0, 0, 2], "coeff": 1}]})"})
            .status == kExitConfig);
  CHECK(run({.command = "hconvex-check", .function = "mixed", .tol = -1.0}).status == kExitConfig);
  CHECK(run({.command = "group-product", .out = (dir / "no" / "r.json").string()}).status == kExitInternal);

  // A concave polynomial is not h-convex: a check failure, not an error.
  const auto concave = R"({"polynomial": [{"exponents": [2, 0, 0], "coeff": -1}]})";
  CHECK(run({.command = "hconvex-check", .function = concave}).status == kExitCheckFailed);
  CHECK(run({.command = "mvt", .function = concave, .points = {"-1,0,0", "2,0"}}).status == kExitCheckFailed);
}

TEST_CASE("single commands") {
  const auto dir = scratch_dir("single");

  const auto prod = run({.command = "group-product", .points = {"1,0,0", "0,1,0"}});
  CHECK(prod.status == kExitPass);
  CHECK(prod.report.records[0].details["product"][2] == 0.5);

  const auto hess = run({.command = "poly-hess",
                         .function = R"({"polynomial": [{"exponents": [1, 1, 0], "coeff": 1}]})",
                         .points = {"0.5,1,2"}});
  CHECK(hess.status == kExitPass);
  // x1 x2: (X1X2 + X2X1)/2 = 1 off the diagonal, 0 on it.
  CHECK(hess.report.records[0].details["hessian"][0][1] == doctest::Approx(1.0));
  CHECK(hess.report.records[0].details["hessian"][0][0] == doctest::Approx(0.0));

  CHECK(run({.command = "poly-alij", .group = "engel"}).status == kExitPass);
  CHECK(run({.command = "hconvex-check", .group = "free_step2:3", .function = "log-sum-exp"}).status == kExitPass);
  CHECK(run({.command = "dermax", .function = "one-norm"}).status == kExitPass);

  const auto mvt = run({.command = "mvt", .function = "mixed", .points = {"0,0,0", "1,0"}});
  CHECK(mvt.status == kExitPass);
  CHECK(mvt.report.records[0].details["t"].get<double>() == doctest::Approx(0.5).epsilon(1e-6));

  const auto out = (dir / "subdiff.json").string();
  const auto sub = run({.command = "subdiff", .function = "one-norm", .out = out});
  CHECK(sub.status == kExitPass);
  CHECK(fs::exists(csv_path_for(out)));
  CHECK(count_lines(read_file(csv_path_for(out))) == 1 + sub.report.curves.size());
}

TEST_CASE("verify-thm11 carries the five sub-verdicts") {
  const auto dir = scratch_dir("verify");
  const auto out = (dir / "v.json").string();
  const auto r = run({.command = "verify-thm11", .function = "mixed", .out = out});
  CHECK(r.status == kExitPass);
  REQUIRE(r.report.records.size() == 1);
  const auto& claims = r.report.records[0].details["claims"];
  REQUIRE(claims.size() == 5);
  std::vector<std::string> ids;
  for (const auto& c : claims) ids.push_back(c["id"]);
  CHECK(ids == std::vector<std::string>{"equiv", "c1", "c2", "c3", "psd"});
  CHECK(r.report.records[0].details["equivalence"] == "both converge");

  // Ladder length x curves.
  CHECK(count_lines(read_file(csv_path_for(out))) == 1 + 8 * 3);

  const auto kink = run({.command = "verify-thm11", .function = "one-norm"});
  CHECK(kink.status == kExitPass);
  CHECK(kink.report.records[0].details["equivalence"] == "consistent: neither");
}

TEST_CASE("second-fit") {
  const auto r = run({.command = "second-fit", .function = "mixed"});
  CHECK(r.status == kExitPass);
  CHECK(r.report.records.size() == 3);
  const auto kink = run({.command = "second-fit", .function = "abs-x1"});
  CHECK(kink.status == kExitCheckFailed);
}

TEST_CASE("fixed seed reproduces reports byte for byte") {
  const auto dir = scratch_dir("determinism");
  auto once = [&](const std::string& name, std::uint64_t seed) {
    const auto out = (dir / (name + ".json")).string();
    const auto r = run({.command = "suite", .group = "engel", .out = out, .seed = seed});
    CHECK(r.status == kExitPass);
    return read_file(out) + read_file(csv_path_for(out));
  };
  const auto a = once("a", 11);
  const auto b = once("b", 11);
  const auto c = once("c", 12);
  CHECK(a == b);
  CHECK(a != c);
}
