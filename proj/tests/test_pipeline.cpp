#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "dsslab/pipeline.hpp"

using namespace dsslab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dsslab_test_" + name);
  fs::remove_all(p);
  return p;
}

// Fast configuration: few modes, short audits, no physical-space stage.
RunConfig light(const std::string& name) {
  RunConfig c;
  c.k = 4;
  c.steps = 64;
  c.cubic_samples = 20;
  c.trap_starts = 5;
  c.sphere_samples = 20;
  c.pressure_slices = 1;
  c.physical = false;
  c.embeddings = false;
  c.output = scratch(name).string();
  return c;
}

const PipelineResult& light_run() {
  static const PipelineResult r = run_pipeline(light("light"), nullptr, true);
  return r;
}

int run_cli(const std::string& args) {
  const int rc = std::system((std::string(DSSLAB_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

const CriterionResult& find(const std::vector<CriterionResult>& v, int id) {
  for (const auto& c : v)
    if (c.id == id) return c;
  throw std::runtime_error("criterion not found");
}

}  // namespace

TEST(Config, DefaultsAreValid) { EXPECT_NO_THROW(RunConfig{}.validate()); }

TEST(Config, InvalidValuesRejected) {
  auto bad = [](auto&& edit) {
    RunConfig c;
    edit(c);
    EXPECT_THROW(c.validate(), ConfigError);
  };
  bad([](RunConfig& c) { c.lambda = 1.0; });
  bad([](RunConfig& c) { c.delta = 1.0; });
  bad([](RunConfig& c) { c.delta = 0.0; });
  bad([](RunConfig& c) { c.tol = 0.0; });
  bad([](RunConfig& c) { c.newton_tol = -1.0; });
  bad([](RunConfig& c) { c.N = 47; });
  bad([](RunConfig& c) { c.data = "random"; });
  bad([](RunConfig& c) { c.data = "dss"; });  // needs dss mode
  bad([](RunConfig& c) { c.system = System::NS; });
  EXPECT_THROW(mode_from_string("periodic"), ConfigError);
}

TEST(Config, JsonRoundTrip) {
  RunConfig c;
  c.system = System::VNSED;
  c.mode = Mode::DSS;
  c.data = "dss";
  c.lambda = 3.0;
  c.layout = BasisLayout::Radial;
  c.seed = 99;
  c.cache = false;
  const RunConfig d = RunConfig::from_json(c.to_json());
  EXPECT_EQ(d.to_json(), c.to_json());
  EXPECT_EQ(d.table_key(), c.table_key());
  json j = c.to_json();
  j["system"] = "hall";
  EXPECT_THROW(RunConfig::from_json(j), ConfigError);
}

TEST(Config, TableKeyTracksUpstreamInputs) {
  RunConfig a, b;
  b.seed = a.seed + 1;  // audits only
  EXPECT_EQ(a.table_key(), b.table_key());
  b.epsilon = 0.4;
  EXPECT_NE(a.table_key(), b.table_key());
}

TEST(Hash, Fnv1aVectors) {
  EXPECT_EQ(content_hash(""), "cbf29ce484222325");
  EXPECT_EQ(content_hash("a"), "af63dc4c8601ec8c");
  EXPECT_EQ(content_hash("foobar"), "85944171f73967e8");
}

TEST(Pipeline, LightRunPassesEvaluatedCriteria) {
  const auto& r = light_run();
  EXPECT_EQ(r.exit_code, kPass);
  EXPECT_EQ(r.report["report_version"], kReportVersion);
  const auto crit = evaluate_criteria(r.report);
  ASSERT_EQ(crit.size(), 12u);
  for (int id : {1, 2, 3, 4, 5, 6, 7, 8}) EXPECT_EQ(find(crit, id).status, "pass") << find(crit, id).detail;
  for (int id : {9, 10, 11, 12}) EXPECT_EQ(find(crit, id).status, "n/a");
  EXPECT_TRUE(fs::exists(fs::path(r.report["config"]["output"].get<std::string>()) / "report.json"));
  EXPECT_TRUE(fs::exists(fs::path(r.report["config"]["output"].get<std::string>()) / "orbit.csv"));
}

TEST(Pipeline, RepeatedRunIsBitwiseIdentical) {
  const auto& r = light_run();
  const PipelineResult again = run_pipeline(RunConfig::from_json(r.report["config"]), nullptr, false);
  EXPECT_EQ(again.report.dump(), r.report.dump());
}

TEST(Pipeline, TamperedEnergyTraceFailsCriterionThree) {
  json R = light_run().report;
  auto& E = R["orbit"]["energy_audit"]["trace"]["energy"];
  E[E.size() / 2] = E[E.size() / 2].get<double>() * 1.01 + 1e-3;
  const auto crit = evaluate_criteria(R);
  EXPECT_EQ(find(crit, 3).status, "fail");
  EXPECT_EQ(criteria_exit_code(crit), kCriterionFailure);
}

TEST(Pipeline, MissingBlockFailsWithMessage) {
  json R = light_run().report;
  R.erase("cubic");
  const auto c = find(evaluate_criteria(R), 2);
  EXPECT_EQ(c.status, "fail");
  EXPECT_NE(c.detail.find("missing"), std::string::npos);
}

TEST(Pipeline, ZeroAmplitudeGivesZeroSolution) {
  RunConfig c = light("zero");
  c.amplitude = 0;
  c.aux_amplitude = 0;
  c.cross_check = false;
  const PipelineResult r = run_pipeline(c, nullptr, false);
  EXPECT_EQ(r.exit_code, kPass);
  for (double v : r.report["stationary"]["state"]) EXPECT_EQ(v, 0.0);
  for (double v : r.report["orbit"]["start"]) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(r.report["orbit"]["fixed_point_residual"].get<double>(), 0.0);
  EXPECT_EQ(r.report["stationary"]["residual"].get<double>(), 0.0);
  EXPECT_EQ(r.report["tables"]["C2"].get<double>(), 0.0);
}

TEST(Pipeline, InfeasibleDataIsAStageError) {
  RunConfig c = light("big");
  c.amplitude = 5.0;
  try {
    run_pipeline(c, nullptr, false);
    FAIL() << "expected a stage error";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage_name, "background");
    EXPECT_EQ(e.exit_code, kConfigError);
  }
}

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  fs::create_directories(dir);
  EXPECT_EQ(run_cli("verify --report " + (dir / "missing.json").string()), kConfigError);
  std::ofstream(dir / "bad.json") << "{ not json";
  EXPECT_EQ(run_cli("verify --report " + (dir / "bad.json").string()), kConfigError);
  EXPECT_EQ(run_cli("solve --lambda 0.5 -o " + dir.string()), kConfigError);
  EXPECT_EQ(run_cli("solve --system hall -o " + dir.string()), kConfigError);
  EXPECT_EQ(run_cli("frobnicate"), kConfigError);

  // Fresh report verifies; a tampered copy fails with exit code 1.
  const std::string report = (fs::path(light_run().report["config"]["output"].get<std::string>()) / "report.json").string();
  EXPECT_EQ(run_cli("verify --report " + report), kPass);
  json R = light_run().report;
  auto& E = R["orbit"]["energy_audit"]["trace"]["energy"];
  E[3] = E[3].get<double>() + 1.0;
  std::ofstream(dir / "tampered.json") << R.dump();
  EXPECT_EQ(run_cli("verify --report " + (dir / "tampered.json").string()), kCriterionFailure);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const fs::path dir = scratch("cfgfile");
  fs::create_directories(dir);
  std::ofstream(dir / "run.toml") << "k = 4\nsteps = 64\ncubic-samples = 10\ntrap-starts = 3\nsphere-samples = 10\n"
                                     "pressure-slices = 1\nno-physical = true\nno-embeddings = true\n"
                                     "no-cross-check = true\nseed = 5\n";
  const std::string out = (dir / "out").string();
  ASSERT_EQ(run_cli("solve -q --config " + (dir / "run.toml").string() + " --seed 6 -o " + out), kPass);
  std::ifstream is(fs::path(out) / "report.json");
  json R;
  is >> R;
  EXPECT_EQ(R["config"]["k"], 4);
  EXPECT_EQ(R["config"]["seed"], 6);
  EXPECT_EQ(R["config"]["physical"], false);

  ASSERT_EQ(run_cli("export --report " + (fs::path(out) / "report.json").string() + " --what slice --out " +
                    (dir / "slice.csv").string()),
            kPass);
  std::ifstream sl(dir / "slice.csv");
  std::string line;
  int rows = -1;
  while (std::getline(sl, line)) ++rows;
  EXPECT_EQ(rows, 48 * 48);
}
