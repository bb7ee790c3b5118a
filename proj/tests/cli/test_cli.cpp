#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "polystab/cli.hpp"
#include "polystab/error.hpp"

using namespace polystab;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "polystab");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("polystab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void write(const std::string& name, const std::string& text) const {
        std::ofstream(path(name), std::ios::binary) << text;
    }

    static std::string read(const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fs::path dir_;
};

std::string power_law_csv(double exponent, std::int64_t blown_from = -1) {
    std::ostringstream os;
    os.precision(17);
    os << "k,t,mean_square,std_error,surviving,blown_up\n";
    for (std::int64_t k = 0; k <= 1000; k += 10) {
        const double t = 0.1 * static_cast<double>(k);
        const bool blown = blown_from >= 0 && k >= blown_from;
        os << k << ',' << t << ',' << std::pow(1.0 + t, exponent) << ",0," << (blown ? 99 : 100) << ','
           << (blown ? 1 : 0) << '\n';
    }
    return os.str();
}

}  // namespace

TEST_F(CliTest, SimulateRequiresSeed) {
    const auto r = run({"simulate", "--problem", "linear", "--steps", "10", "--paths", "10"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("seed"), std::string::npos);
}

TEST_F(CliTest, SimulateWritesCsvAndConfigEcho) {
    const auto r = run({"simulate", "--problem", "linear", "--scheme", "em", "--dt", "0.1", "--paths", "200",
                        "--steps", "2000", "--seed", "42", "--envelope", "--out", path("run")});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string csv = read(path("run") + ".csv");
    EXPECT_EQ(csv.rfind("k,t,mean_square,std_error,surviving,blown_up,envelope\n", 0), 0u);
    const auto cfg = nlohmann::json::parse(read(path("run") + ".json"));
    EXPECT_EQ(cfg["seed"], 42);
    EXPECT_EQ(cfg["num_paths"], 200);
    EXPECT_EQ(cfg["problem"], "linear");
    EXPECT_EQ(cfg["initial_value"], nlohmann::json::array({1.0}));
}

TEST_F(CliTest, SimulateToStdoutMatchesFile) {
    const std::vector<std::string> base{"simulate", "--problem", "linear", "--paths", "100", "--steps", "50",
                                        "--seed", "3"};
    const auto to_stdout = run(base);
    ASSERT_EQ(to_stdout.code, 0);
    auto with_file = base;
    with_file.insert(with_file.end(), {"--out", path("f")});
    ASSERT_EQ(run(with_file).code, 0);
    EXPECT_EQ(to_stdout.out, read(path("f") + ".csv"));
}

TEST_F(CliTest, AnalyzeRoundTripIsDeterministic) {
    for (int i = 0; i < 2; ++i) {
        ASSERT_EQ(run({"simulate", "--problem", "linear", "--paths", "300", "--steps", "20000", "--seed", "42",
                       "--out", path("r" + std::to_string(i))})
                      .code,
                  0);
    }
    const auto a = run({"analyze", path("r0") + ".csv", "--problem", "linear"});
    const auto b = run({"analyze", path("r1") + ".csv", "--problem", "linear"});
    EXPECT_EQ(a.code, 0) << a.out << a.err;
    const auto ja = nlohmann::json::parse(a.out);
    const auto jb = nlohmann::json::parse(b.out);
    ja.at("slope");
    EXPECT_EQ(ja["slope"], jb["slope"]);
    EXPECT_EQ(ja["conforms"], true);
    EXPECT_EQ(ja["theoretical_bound"], -1.0);
}

TEST_F(CliTest, AnalyzeSyntheticPowerLaw) {
    write("p.csv", power_law_csv(-5.0));
    const auto r = run({"analyze", path("p.csv"), "--k1", "3", "--json-out", path("report.json")});
    EXPECT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_NEAR(j["slope"].get<double>(), -5.0, 1e-9);
    EXPECT_EQ(j["conforms"], true);
    EXPECT_EQ(read(path("report.json")), r.out);
}

TEST_F(CliTest, AnalyzeNonConformingExitsThree) {
    write("p.csv", power_law_csv(-1.0));
    const auto r = run({"analyze", path("p.csv"), "--k1", "3"});
    EXPECT_EQ(r.code, 3);
    EXPECT_EQ(nlohmann::json::parse(r.out)["conforms"], false);
}

TEST_F(CliTest, AnalyzeBlowUpsInWindowExitsTwo) {
    write("p.csv", power_law_csv(-1.0, 500));
    const auto r = run({"analyze", path("p.csv"), "--k1", "1"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("blown-up"), std::string::npos);
}

TEST_F(CliTest, AnalyzeMalformedCsvNamesLine) {
    write("bad.csv", "k,t,mean_square,std_error,surviving,blown_up\n0,0,1,0,10,0\n1,0.1,x,0,10,0\n");
    const auto r = run({"analyze", path("bad.csv"), "--k1", "1"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
}

TEST_F(CliTest, AnalyzeNeedsK1OrProblem) {
    write("p.csv", power_law_csv(-1.0));
    EXPECT_EQ(run({"analyze", path("p.csv")}).code, 1);
    EXPECT_EQ(run({"analyze", path("missing.csv"), "--k1", "1"}).code, 1);
}

TEST_F(CliTest, VerifyGammaDefaultGridPasses) {
    const auto r = run({"verify-gamma"});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("PASS  empty product equals 1"), std::string::npos);
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST_F(CliTest, VerifyGammaReportsInvertedInequality) {
    const std::vector<InequalityCheck> extra{{"inverted EM product bound", [](MarginAccumulator& acc) {
                                                  for (std::int64_t k = 2; k <= 20; ++k) {
                                                      acc.add(-em_product_bound_margin(k, 0.1, 2.0),
                                                              [k] { return "k=" + std::to_string(k); });
                                                  }
                                              }}};
    std::ostringstream out, err;
    const int code = cli::cmd_verify_gamma({}, out, err, extra);
    EXPECT_EQ(code, 3);
    EXPECT_NE(out.str().find("FAIL  inverted EM product bound"), std::string::npos) << out.str();
    EXPECT_NE(out.str().find("at k="), std::string::npos);
}

TEST_F(CliTest, CounterexampleReports) {
    const auto r = run({"counterexample", "--dt", "0.1", "--cap", "1e12"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("exceeds cap 1e+12 at step 4"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("induction invariant: holds"), std::string::npos);
    EXPECT_NE(r.out.find("paths blown up"), std::string::npos);

    const auto slow = run({"counterexample", "--dt", "0.49", "--no-mc"});
    EXPECT_EQ(slow.code, 0);
    EXPECT_NE(slow.out.find("exceeds cap"), std::string::npos);

    EXPECT_EQ(run({"counterexample", "--dt", "0.6"}).code, 1);
    EXPECT_EQ(run({"counterexample", "--dt", "0"}).code, 1);
}

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"simulate", "--dt", "abc"}).code, 1);
    EXPECT_EQ(run({"simulate", "--problem", "nope", "--seed", "1"}).code, 1);
    EXPECT_EQ(run({"simulate", "--scheme", "rk4", "--seed", "1"}).code, 1);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(CliTest, StrictModeRejectsOutOfHypothesisRun) {
    const auto r = run({"simulate", "--problem", "linear", "--dt", "0.5", "--paths", "10", "--steps", "10",
                        "--seed", "1", "--strict"});
    EXPECT_EQ(r.code, 1);
    const auto lax = run({"simulate", "--problem", "linear", "--dt", "0.5", "--paths", "10", "--steps", "10",
                          "--seed", "1"});
    EXPECT_EQ(lax.code, 0);
    EXPECT_NE(lax.err.find("warning"), std::string::npos);
}

TEST_F(CliTest, SpecFileWithOverrides) {
    write("spec.json", R"({"problem": "bem-example", "scheme": "bem", "dt": 0.3, "steps": 100,
                          "paths": 40, "seed": 7, "checkpoints": [0, 50, 100], "window_fraction": 0.5})");
    const auto r = run({"simulate", "--spec", path("spec.json"), "--paths", "20", "--out", path("s")});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto cfg = nlohmann::json::parse(read(path("s") + ".json"));
    EXPECT_EQ(cfg["num_paths"], 20);
    EXPECT_EQ(cfg["scheme"], "bem");
    EXPECT_EQ(cfg["checkpoints"], nlohmann::json::array({0, 50, 100}));
}

TEST(ExperimentSpec, RejectsUnknownKeysAndBadTypes) {
    EXPECT_THROW(cli::parse_experiment_spec(R"({"problem": "linear", "stpes": 10})"), ParseError);
    EXPECT_THROW(cli::parse_experiment_spec(R"({"problem": "linear", "dt": "fast"})"), ParseError);
    EXPECT_THROW(cli::parse_experiment_spec("[1, 2]"), ParseError);
    const auto spec = cli::parse_experiment_spec(R"({"problem": "linear", "seed": 9,
        "solver": {"method": "bisection", "fallback": "none", "max_iterations": 7}})");
    EXPECT_TRUE(spec.seed_set);
    EXPECT_EQ(spec.sim.solver.method, SolverMethod::bisection);
    EXPECT_EQ(spec.sim.solver.fallback, SolverFallback::none);
    EXPECT_EQ(spec.sim.solver.max_iterations, 7);
}

TEST(WorkersFromEnv, ParsesPositiveIntegers) {
    ::setenv("POLYSTAB_THREADS", "4", 1);
    EXPECT_EQ(cli::workers_from_env(), 4u);
    ::setenv("POLYSTAB_THREADS", "zero", 1);
    EXPECT_EQ(cli::workers_from_env(), 0u);
    ::setenv("POLYSTAB_THREADS", "-2", 1);
    EXPECT_EQ(cli::workers_from_env(), 0u);
    ::unsetenv("POLYSTAB_THREADS");
    EXPECT_EQ(cli::workers_from_env(), 0u);
}

TEST_F(CliTest, ThreadCountDoesNotChangeOutput) {
    const std::vector<std::string> base{"simulate", "--problem", "counterexample", "--paths", "500", "--steps",
                                        "100", "--seed", "5"};
    ::setenv("POLYSTAB_THREADS", "1", 1);
    const auto one = run(base);
    ::setenv("POLYSTAB_THREADS", "7", 1);
    const auto seven = run(base);
    ::unsetenv("POLYSTAB_THREADS");
    ASSERT_EQ(one.code, 0);
    EXPECT_EQ(one.out, seven.out);
}
