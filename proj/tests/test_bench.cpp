#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"

using namespace cjsr;
using testing_support::mat2;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& body) {
  const fs::path p = fs::temp_directory_path() / ("cjsr_test_" + name);
  std::ofstream(p) << body;
  return p;
}

std::string csv_of(const SwitchedSystem& sys, const ExperimentConfig& cfg) {
  std::ostringstream os;
  write_experiment_csv(os, run_experiment(sys, cfg), cfg);
  return os.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CJSR_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST(NcsExample, MatricesAndGraph) {
  const SwitchedSystem sys = ncs_example();
  EXPECT_LE((sys.matrix(1) - mat2(0.45, 1.08, -0.06, -0.27)).norm(), 1e-15);
  EXPECT_EQ(sys.matrix(2), mat2(0.45, 1.08, 0.36, 0.09));
  EXPECT_EQ(sys.graph().node_count(), 3u);
  EXPECT_EQ(sys.graph().edge_count(), 5u);
  EXPECT_EQ(sys.graph().label_count(), 2);
  EXPECT_EQ(sys.dimension(), 2);
  EXPECT_FALSE(language(sys.graph(), 3).count(Word{2, 2, 2}));
  const long long n = sys.dimension();
  EXPECT_EQ(static_cast<long long>(sys.graph().node_count()) * n * (n + 1) / 2, 9);
}

TEST(LoadSystem, ShippedConfigMatchesBuiltIn) {
  const SwitchedSystem a = load_system(fs::path(CJSR_SYSTEMS_DIR) / "ncs.json");
  const SwitchedSystem b = ncs_example();
  ASSERT_EQ(a.graph().edge_count(), b.graph().edge_count());
  for (std::size_t e = 0; e < a.graph().edge_count(); ++e) {
    EXPECT_EQ(a.graph().edge(e).source, b.graph().edge(e).source);
    EXPECT_EQ(a.graph().edge(e).target, b.graph().edge(e).target);
    EXPECT_EQ(a.graph().edge(e).label, b.graph().edge(e).label);
  }
  for (int k = 1; k <= 2; ++k) EXPECT_LE((a.matrix(k) - b.matrix(k)).norm(), 1e-15);
  EXPECT_NO_THROW(load_system("ncs"));
}

TEST(LoadSystem, RejectsSinkNode) {
  const auto p = temp_file("sink.json", R"({"nodes":["a","b"],"edges":[["a","b",1]],
    "dimension":1,"matrices":[[0.5]]})");
  EXPECT_THROW(load_system(p), ConfigError);
}

TEST(LoadSystem, RejectsLabelGap) {
  const auto p = temp_file("gap.json", R"({"nodes":["a"],"edges":[["a","a",1],["a","a",3]],
    "dimension":1,"matrices":[[0.5],[0.5],[0.5]]})");
  EXPECT_THROW(load_system(p), ConfigError);
}

TEST(LoadSystem, ErrorsNameTheField) {
  auto message = [](const std::string& body) {
    try {
      load_system(temp_file("bad.json", body));
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  EXPECT_NE(message(R"({"nodes":["a"],"edges":[["a","a",1]],"dimension":1})").find("matrices"),
            std::string::npos);
  EXPECT_NE(message(R"({"nodes":["a"],"edges":[["a","z",1]],"dimension":1,"matrices":[[1]]})")
                .find("edges[0]"),
            std::string::npos);
  EXPECT_NE(message(R"({"nodes":["a"],"edges":[["a","a",1]],"dimension":2,"matrices":[[1]]})")
                .find("matrices[0]"),
            std::string::npos);
  EXPECT_NE(message("{ not json").find("bad.json"), std::string::npos);
  EXPECT_THROW(load_system("/nonexistent/system.json"), ConfigError);
}

TEST(ExperimentConfig, ParsesAndValidates) {
  const auto cfg = load_experiment_config(fs::path(CJSR_SYSTEMS_DIR) / "hybrid_noise.json");
  EXPECT_EQ(cfg.mode, Mode::Hybrid);
  EXPECT_EQ(cfg.realizations, 20);
  EXPECT_EQ(cfg.noise_radii.size(), 3u);
  EXPECT_EQ(cfg.sample_sizes.back(), 8000);
  EXPECT_THROW(parse_experiment_config(nlohmann::json::parse(R"({"realizations":0})")),
               ConfigError);
  EXPECT_THROW(parse_experiment_config(nlohmann::json::parse(R"({"beta":1.5})")), ConfigError);
  EXPECT_THROW(parse_experiment_config(nlohmann::json::parse(R"({"mode":"nope"})")), ConfigError);
  EXPECT_THROW(parse_experiment_config(nlohmann::json::parse(R"({"l":"x"})")), ConfigError);
}

TEST(CellSeed, DistinctPerCell) {
  std::set<std::uint64_t> seeds;
  for (int l : {1, 2})
    for (double w : {0.0, 0.01, -0.0})
      for (long long n : {100LL, 200LL})
        for (int r = 0; r < 3; ++r) seeds.insert(cell_seed(5, l, w, n, r));
  EXPECT_EQ(seeds.size(), 2u * 3u * 2u * 3u);
  EXPECT_EQ(cell_seed(5, 1, 0.01, 100, 2), cell_seed(5, 1, 0.01, 100, 2));
}

TEST(RunExperiment, RowCountContract) {
  ExperimentConfig cfg;
  cfg.horizons = {1, 2};
  cfg.noise_radii = {0.0, 0.01};
  cfg.sample_sizes = {9};
  cfg.realizations = 1;
  const auto out = lines(csv_of(ncs_example(), cfg));
  ASSERT_EQ(out.size(), 1u + 2u * 2u * 2u);
  EXPECT_EQ(out[0],
            "mode,l,W,N,realization,seed,lambda_star,epsilon,rho_primary,rho_alternative,"
            "rho_final,vacuous,certified,wall_ms,error");
  EXPECT_EQ(out[1].rfind("hybrid,1,0,9,0,", 0), 0u);
  EXPECT_EQ(out[2].rfind("hybrid,1,0,9,mean,,", 0), 0u);
}

TEST(RunExperiment, ByteIdenticalAcrossRunsAndWorkers) {
  ExperimentConfig cfg;
  cfg.noise_radii = {0.0, 0.01};
  cfg.sample_sizes = {60, 120};
  cfg.realizations = 3;
  cfg.seed = 99;
  cfg.workers = 1;
  const std::string a = csv_of(ncs_example(), cfg);
  const std::string b = csv_of(ncs_example(), cfg);
  cfg.workers = 4;
  const std::string c = csv_of(ncs_example(), cfg);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(RunExperiment, NumericFieldsCarryFullPrecision) {
  ExperimentConfig cfg;
  cfg.sample_sizes = {200};
  cfg.realizations = 1;
  const auto out = lines(csv_of(ncs_example(), cfg));
  std::vector<std::string> fields;
  std::stringstream ss(out[1]);
  for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
  const std::string lambda = fields[6];
  std::size_t digits = 0;
  for (char ch : lambda.substr(0, lambda.find('e'))) digits += std::isdigit(ch) != 0;
  EXPECT_GE(digits, 12u);
}

TEST(RunExperiment, FailedCellsBecomeErrorRows) {
  ExperimentConfig cfg;
  cfg.sample_sizes = {4, 200};
  cfg.realizations = 2;
  const ExperimentResult res = run_experiment(ncs_example(), cfg);
  EXPECT_TRUE(res.any_error());
  ASSERT_EQ(res.cells.size(), 4u);
  EXPECT_FALSE(res.cells[0].ok());
  EXPECT_NE(res.cells[0].error.find("insufficient samples"), std::string::npos);
  EXPECT_TRUE(res.cells[2].ok());
  EXPECT_EQ(res.aggregates[0].failed, 2);
  EXPECT_EQ(res.aggregates[1].failed, 0);
}

TEST(RunExperiment, ContinuousMode) {
  ExperimentConfig cfg;
  cfg.mode = Mode::Continuous;
  cfg.horizons = {1, 2};
  cfg.sample_sizes = {200};
  cfg.realizations = 2;
  const ExperimentResult res = run_experiment(ncs_example(), cfg);
  EXPECT_FALSE(res.any_error());
  for (const auto& c : res.cells) EXPECT_GE(c.rho_final, c.lambda_star);
}

TEST(RunExperiment, BaselineMode) {
  ExperimentConfig cfg;
  cfg.mode = Mode::Baseline;
  cfg.horizons = {1, 2};
  cfg.cycle_max = 8;
  const auto out = lines(csv_of(ncs_example(), cfg));
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(out[0], "mode,l,cycle_max,lower,upper,width,wall_ms");
  EXPECT_EQ(out[1].rfind("baseline,1,8,", 0), 0u);
}

TEST(Cli, ExitCodes) {
  const std::string sys = (fs::path(CJSR_SYSTEMS_DIR) / "ncs.json").string();
  EXPECT_EQ(run_cli("certify --system " + sys + " --N 300 --seed 1"), 0);
  EXPECT_EQ(run_cli("certify --system ncs --N 4"), 1);
  EXPECT_EQ(run_cli("certify --system /nonexistent.json"), 2);
  EXPECT_EQ(run_cli("certify --mode sideways"), 2);
  EXPECT_EQ(run_cli("baseline --l-max 1 --cycle-max 4"), 0);
  EXPECT_EQ(run_cli("simulate --kind trajectory --steps 5"), 0);
  const auto bad = temp_file("exp_bad.json", R"({"realizations": 0})");
  EXPECT_EQ(run_cli("experiment --config " + bad.string()), 2);
  const auto failing = temp_file("exp_fail.json",
                                 R"({"N": [4], "realizations": 1, "system": "ncs"})");
  EXPECT_EQ(run_cli("experiment --config " + failing.string()), 1);
  const auto good = fs::path(CJSR_SYSTEMS_DIR) / "smoke.json";
  EXPECT_EQ(run_cli("experiment --config " + good.string()), 0);
}

TEST(Cli, ExperimentOutputIsReproducible) {
  const auto cfg = fs::path(CJSR_SYSTEMS_DIR) / "smoke.json";
  const auto a = fs::temp_directory_path() / "cjsr_cli_a.csv";
  const auto b = fs::temp_directory_path() / "cjsr_cli_b.csv";
  ASSERT_EQ(run_cli("experiment --config " + cfg.string() + " --out " + a.string()), 0);
  ASSERT_EQ(run_cli("experiment --config " + cfg.string() + " --out " + b.string()), 0);
  std::ifstream fa(a), fb(b);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  EXPECT_FALSE(sa.str().empty());
  EXPECT_EQ(sa.str(), sb.str());
}
