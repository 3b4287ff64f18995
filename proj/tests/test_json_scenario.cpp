#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "snn/curvature.hpp"
#include "snn/scenario.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include <unistd.h>

using namespace snn;
namespace fs = std::filesystem;

namespace {

BivectorOp random_op(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const BivectorFrame f(n);
  Mat m(f.size(), f.size());
  for (int i = 0; i < m.size(); ++i) m(i) = nd(rng) / 3.0;
  return BivectorOp(f, m);
}

bool bitwise_equal(const Mat& a, const Mat& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

Json so3_item(double t, const std::string& task) {
  return {{"construction",
           {{"name", "scaled_up"},
            {"params", {{"algebra", {{"family", "so"}, {"n", 3}}}, {"subalgebra", {{"coordinates", {2}}}}, {"t", t}}}}},
          {"task", task}};
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("snn_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  return d;
}

} // namespace

TEST_CASE("operators round-trip bitwise through text") {
  for (int n = 3; n <= 6; ++n) {
    const BivectorOp r = random_op(n, 100 + static_cast<std::uint64_t>(n));
    const Json j = Json::parse(operator_to_json(r, "test frame").dump());
    const BivectorOp back = operator_from_json(j);
    CHECK(back.dim() == n);
    CHECK(bitwise_equal(back.matrix(), r.matrix()));
    CHECK(j.at("frame").at("description") == "test frame");
  }
}

TEST_CASE("4-forms and certificates round-trip") {
  const BivectorFrame f(5);
  Vec c(5);
  c << 0.1, -1.0 / 3.0, 1e-300, 2.5, -7.0;
  const FourForm w(f, c);
  const FourForm back = fourform_from_json(Json::parse(fourform_to_json(w).dump()));
  CHECK(bitwise_equal(back.coeffs(), w.coeffs()));

  const Certificate cert = certify(BivectorOp::identity(BivectorFrame(4)));
  const Json cj = certificate_to_json(cert, 42);
  CHECK(Json::parse(cj.dump()) == cj);
  CHECK(cj.at("verdict") == "feasible");
  CHECK(cj.at("seed") == 42);
  CHECK(cj.contains("omega"));
  CHECK(!cj.contains("witness"));
}

TEST_CASE("non-finite certificate fields become strings") {
  Certificate c;
  c.verdict = Verdict::Undecided;
  c.gap = std::numeric_limits<double>::infinity();
  c.margin = std::numeric_limits<double>::quiet_NaN();
  c.bound = -std::numeric_limits<double>::infinity();
  const Json j = certificate_to_json(c, 0);
  CHECK(j.at("gap") == "inf");
  CHECK(j.at("margin") == "nan");
  CHECK(j.at("bound") == "-inf");
}

TEST_CASE("malformed operator documents are rejected") {
  Json j = operator_to_json(BivectorOp::identity(BivectorFrame(4)));
  j["lower"].erase(0);
  CHECK_THROWS(operator_from_json(j));
  CHECK_THROWS(operator_from_json(Json::object()));
}

TEST_CASE("scenario exit codes") {
  Json ok = so3_item(1.0, "certify");
  CHECK(run_scenario(ok).exit_code == kExitOk);

  const ScenarioResult refuted = run_scenario(so3_item(1.4, "certify"));
  CHECK(refuted.exit_code == kExitInfeasible);
  const Json& cert = refuted.report.at("items").at(0).at("result").at("certificate");
  CHECK(cert.at("verdict") == "infeasible");
  CHECK(cert.at("bound").get<double>() < 0.0);

  Json bad = ok;
  bad["construction"]["params"]["tt"] = 1;
  const ScenarioResult r = run_scenario(bad);
  CHECK(r.exit_code == kExitSchema);
  CHECK(r.error.find("/construction/params/tt") != std::string::npos);
  CHECK_THROWS_AS(validate_scenario(bad), SchemaError);
}

TEST_CASE("schema errors point at the offending key") {
  Json doc = {{"items", Json::array({so3_item(1.0, "build"), so3_item(1.0, "frobnicate")})}};
  try {
    validate_scenario(doc);
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(e.pointer() == "/items/1/task");
  }

  doc = so3_item(1.0, "build");
  doc["construction"]["params"]["subalgebra"] = {{"coordinates", {0, 1}}};
  const ScenarioResult r = run_scenario(doc);
  CHECK(r.exit_code == kExitSchema);
  CHECK(r.error.find("/construction/params/subalgebra") != std::string::npos);
}

TEST_CASE("randomized items require a seed") {
  Json doc = {{"construction", {{"name", "random"}, {"params", {{"dim", 4}}}}}, {"task", "certify"}};
  try {
    validate_scenario(doc);
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(e.pointer() == "/seed");
  }
  ScenarioOverrides ov;
  ov.seed = 9;
  CHECK_NOTHROW(validate_scenario(doc, ov));
  const ScenarioResult a = run_scenario(doc, ov), b = run_scenario(doc, ov);
  CHECK(a.report.at("items").at(0).at("result").at("operator_summary") ==
        b.report.at("items").at(0).at("result").at("operator_summary"));
  CHECK(a.report.at("seed") == 9);
}

TEST_CASE("item order and worst exit code") {
  Json doc = {{"items", Json::array()}};
  Json first = so3_item(1.4, "certify");
  first["id"] = "refuted";
  Json second = so3_item(1.0, "build");
  second["id"] = "built";
  doc["items"].push_back(first);
  doc["items"].push_back(second);
  const ScenarioResult r = run_scenario(doc);
  CHECK(r.exit_code == kExitInfeasible);
  CHECK(r.report.at("items").at(0).at("id") == "refuted");
  CHECK(r.report.at("items").at(1).at("id") == "built");
  CHECK(r.report.at("items").at(1).at("exit_code") == 0);
  CHECK(r.artifacts.count("built.operator.json") == 1);
  CHECK(r.artifacts.count("refuted.certificate.json") == 1);
  CHECK(render_table(r.report).find("refuted") != std::string::npos);
}

TEST_CASE("overrides take precedence over the file") {
  Json doc = so3_item(1.0, "certify");
  doc["tolerances"] = {{"tol", 1e-3}};
  ScenarioOverrides ov;
  ov.tol = 1e-7;
  const ScenarioResult r = run_scenario(doc, ov);
  CHECK(r.report.at("settings").at("tol") == 1e-7);
  CHECK(r.report.at("inputs").at("overrides").at("tol") == 1e-7);
}

TEST_CASE("outputs are written atomically") {
  const fs::path dir = fresh_dir("out");
  const ScenarioResult r = run_scenario(so3_item(1.0, "build"));
  write_outputs(r, dir.string());
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "item0.operator.json"));
  for (const auto& e : fs::directory_iterator(dir)) CHECK(e.path().extension() == ".json");
  std::ifstream in(dir / "report.json");
  CHECK(Json::parse(in) == r.report);

  write_file_atomically((dir / "x.json").string(), "{}");
  write_file_atomically((dir / "x.json").string(), "[1]");
  std::ifstream x(dir / "x.json");
  CHECK(Json::parse(x) == Json::array({1}));
  fs::remove_all(dir);
}

TEST_CASE("unreadable and unparsable files") {
  CHECK(run_scenario_file("/nonexistent/scenario.json").exit_code == kExitSchema);
  const fs::path dir = fresh_dir("parse");
  fs::create_directories(dir);
  {
    std::ofstream o(dir / "bad.json");
    o << "{\"task\": ";
  }
  CHECK(run_scenario_file((dir / "bad.json").string()).exit_code == kExitSchema);
  fs::remove_all(dir);
}
