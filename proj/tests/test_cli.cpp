#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
    int code = -1;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + STGODE_CLI_PATH + "\" " + args + " 2>&1";
    RunResult r;
    std::FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) return r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
    const int status = pclose(pipe);
    if (WIFEXITED(status)) r.code = WEXITSTATUS(status);
    return r;
}

fs::path scratch_root() {
    static const fs::path root = [] {
        fs::path p = fs::temp_directory_path() / "stgode_cli_scratch";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root;
}

std::string dir_arg(const std::string& name) {
    const fs::path p = scratch_root() / name;
    fs::create_directories(p);
    return p.string();
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& p) { return json::parse(read_file(p)); }

// one small dataset most tests share
const std::string kSynthArgs = "--nodes 8 --steps-total 240 --period 48 --seed 4";
const std::string kTinyModel =
    "--history 4 --horizon 3 --c1 4 --c2 3 --c3 4 --blocks-per-kind 1 --layers 1 "
    "--head-hidden 8 --steps 2";
const std::string kTinyTrain = "--epochs 2 --batch-size 8 --max-train-windows 16 --lr 0.01";

const std::string& data_dir() {
    static const std::string dir = [] {
        const std::string d = dir_arg("data");
        const RunResult r = run_cli("synth " + kSynthArgs + " --out-dir " + d);
        EXPECT_EQ(r.code, 0) << r.output;
        return d;
    }();
    return dir;
}

const std::string& graph_dir() {
    static const std::string dir = [] {
        const std::string d = dir_arg("graph");
        const RunResult r = run_cli("build-graph --series " + data_dir() + "/series.csv --edges " +
                                    data_dir() + "/edges.csv --history 4 --horizon 3 --out-dir " + d);
        EXPECT_EQ(r.code, 0) << r.output;
        return d;
    }();
    return dir;
}

std::string train_args(const std::string& out_dir) {
    return "train --series " + data_dir() + "/series.csv --spatial " + graph_dir() +
           "/spatial_adjacency.json --semantic " + graph_dir() + "/semantic_adjacency.json " +
           kTinyModel + " " + kTinyTrain + " --seed 4 --out-dir " + out_dir;
}

}  // namespace

TEST(CliSynth, WritesDeterministicDataset) {
    const std::string a = data_dir();
    EXPECT_TRUE(fs::exists(fs::path(a) / "series.csv"));
    EXPECT_TRUE(fs::exists(fs::path(a) / "edges.csv"));
    const json params = read_json(fs::path(a) / "synth_params.json");
    EXPECT_EQ(params["nodes"].get<int>(), 8);

    const std::string b = dir_arg("data_repeat");
    const RunResult r = run_cli("synth " + kSynthArgs + " --out-dir " + b);
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_EQ(read_file(fs::path(a) / "series.csv"), read_file(fs::path(b) / "series.csv"));
    EXPECT_EQ(read_file(fs::path(a) / "edges.csv"), read_file(fs::path(b) / "edges.csv"));
}

TEST(CliBuildGraph, WritesAdjacenciesAndSummary) {
    const fs::path g(graph_dir());
    EXPECT_TRUE(fs::exists(g / "spatial_adjacency.json"));
    EXPECT_TRUE(fs::exists(g / "semantic_adjacency.json"));
    const json summary = read_json(g / "graph_summary.json");
    EXPECT_EQ(summary["spatial"]["nodes"].get<int>(), 8);
    EXPECT_GE(summary["spatial"]["eig_min"].get<double>(), -1e-8);
    EXPECT_LE(summary["spatial"]["eig_max"].get<double>(), 0.8 + 1e-8);
    EXPECT_GE(summary["semantic"]["eig_min"].get<double>(), -1e-8);

    const json adj = read_json(g / "spatial_adjacency.json");
    EXPECT_EQ(adj["kind"].get<std::string>(), "spatial");
}

TEST(CliBuildGraph, RerunsAreByteIdentical) {
    const std::string again = dir_arg("graph_repeat");
    const RunResult r = run_cli("build-graph --series " + data_dir() + "/series.csv --edges " +
                                data_dir() + "/edges.csv --history 4 --horizon 3 --out-dir " + again);
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_EQ(read_file(fs::path(graph_dir()) / "spatial_adjacency.json"),
              read_file(fs::path(again) / "spatial_adjacency.json"));
    EXPECT_EQ(read_file(fs::path(graph_dir()) / "semantic_adjacency.json"),
              read_file(fs::path(again) / "semantic_adjacency.json"));
}

TEST(CliBuildGraph, ExportCsvAndFullCutoff) {
    const std::string d = dir_arg("graph_csv");
    const RunResult r = run_cli("build-graph --series " + data_dir() + "/series.csv --edges " +
                                data_dir() + "/edges.csv --history 4 --horizon 3 "
                                "--eps-spatial 1.0 --export-csv --out-dir " + d);
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_TRUE(fs::exists(fs::path(d) / "spatial_adjacency.json.csv"));
    // every positive-distance weight falls below a cutoff of 1.0
    const json summary = read_json(fs::path(d) / "graph_summary.json");
    EXPECT_EQ(summary["spatial"]["density"].get<double>(), 0.0);
}

TEST(CliTrain, ProducesCheckpointAndMetrics) {
    const std::string t = dir_arg("train_a");
    const RunResult r = run_cli(train_args(t));
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_TRUE(fs::exists(fs::path(t) / "checkpoint.json"));
    const json metrics = read_json(fs::path(t) / "metrics.json");
    EXPECT_EQ(metrics["command"].get<std::string>(), "train");
    EXPECT_EQ(metrics["epochs"].size(), 2u);
    EXPECT_TRUE(metrics["test"].contains("mae"));
    EXPECT_GT(metrics["windows"]["train"].get<int>(), 0);
}

TEST(CliTrain, RepeatRunsAreByteIdentical) {
    const std::string t1 = dir_arg("train_a");  // reuses the run above if present
    if (!fs::exists(fs::path(t1) / "metrics.json")) {
        ASSERT_EQ(run_cli(train_args(t1)).code, 0);
    }
    const std::string t2 = dir_arg("train_b");
    const RunResult r = run_cli(train_args(t2));
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_EQ(read_file(fs::path(t1) / "metrics.json"), read_file(fs::path(t2) / "metrics.json"));
    EXPECT_EQ(read_file(fs::path(t1) / "checkpoint.json"),
              read_file(fs::path(t2) / "checkpoint.json"));
}

TEST(CliEval, ReproducesTrainTimeTestMetricsExactly) {
    const std::string t = dir_arg("train_a");
    if (!fs::exists(fs::path(t) / "metrics.json")) {
        ASSERT_EQ(run_cli(train_args(t)).code, 0);
    }
    const std::string e = dir_arg("eval_a");
    const RunResult r = run_cli("eval --checkpoint " + t + "/checkpoint.json --series " +
                                data_dir() + "/series.csv --persistence --out-dir " + e);
    ASSERT_EQ(r.code, 0) << r.output;
    const json train_metrics = read_json(fs::path(t) / "metrics.json");
    const json eval_metrics = read_json(fs::path(e) / "eval_metrics.json");
    EXPECT_EQ(eval_metrics["test"], train_metrics["test"]);
    EXPECT_TRUE(eval_metrics.contains("persistence"));
    EXPECT_GT(eval_metrics["persistence"]["mae"].get<double>(), 0.0);
}

TEST(CliEval, RejectsMismatchedSeries) {
    const std::string t = dir_arg("train_a");
    if (!fs::exists(fs::path(t) / "checkpoint.json")) {
        ASSERT_EQ(run_cli(train_args(t)).code, 0);
    }
    const std::string other = dir_arg("data_other");
    ASSERT_EQ(run_cli("synth --nodes 5 --steps-total 240 --seed 6 --out-dir " + other).code, 0);
    const RunResult r = run_cli("eval --checkpoint " + t + "/checkpoint.json --series " + other +
                                "/series.csv --out-dir " + dir_arg("eval_bad"));
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.output.find("node"), std::string::npos) << r.output;
}

TEST(CliVerify, PassesCleanAndFailsWithInjectedFault) {
    const std::string v = dir_arg("verify_ok");
    const RunResult ok = run_cli("verify --out-dir " + v);
    EXPECT_EQ(ok.code, 0) << ok.output;
    EXPECT_TRUE(read_json(fs::path(v) / "verify_report.json")["all_pass"].get<bool>());

    const std::string vf = dir_arg("verify_fault");
    const RunResult bad = run_cli("verify --inject-fault --out-dir " + vf);
    EXPECT_EQ(bad.code, 1);
    EXPECT_FALSE(read_json(fs::path(vf) / "verify_report.json")["all_pass"].get<bool>());
}

TEST(CliExitCodes, FollowTheContract) {
    EXPECT_EQ(run_cli("--help").code, 0);
    EXPECT_EQ(run_cli("train --help").code, 0);
    EXPECT_EQ(run_cli("synth --no-such-flag").code, 1);
    EXPECT_EQ(run_cli("frobnicate").code, 1);
    // required option missing: usage error
    EXPECT_EQ(run_cli("train").code, 1);
    // series file absent: I/O error
    const RunResult io = run_cli("train --series /nonexistent/series.csv --out-dir " +
                                 dir_arg("io_err"));
    EXPECT_EQ(io.code, 2);
    EXPECT_NE(io.output.find("cannot open"), std::string::npos) << io.output;
}

TEST(CliTrain, MissingAdjacencyNamesExpectedPath) {
    const std::string d = dir_arg("no_graph");
    const RunResult r = run_cli("train --series " + data_dir() + "/series.csv " + kTinyModel + " " +
                                kTinyTrain + " --out-dir " + d);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.output.find("spatial_adjacency.json"), std::string::npos) << r.output;
}

TEST(CliTrain, MalformedAdjacencyIsAnIoError) {
    const std::string d = dir_arg("bad_graph");
    {
        std::ofstream out(fs::path(d) / "spatial_adjacency.json");
        out << "{ this is not json";
    }
    const RunResult r = run_cli("train --series " + data_dir() + "/series.csv --spatial " + d +
                                "/spatial_adjacency.json --use-semantic false " + kTinyModel + " " +
                                kTinyTrain + " --out-dir " + d);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.output.find("JSON"), std::string::npos) << r.output;
}

TEST(CliConfigFile, AppliesOverridesAndRejectsUnknownKeys) {
    const std::string d = dir_arg("cfg");
    const fs::path cfg = fs::path(d) / "synth.cfg";
    {
        std::ofstream out(cfg);
        out << "# comment line\n"
            << "nodes = 5\n"
            << "steps-total = 300\n"
            << "seed = 9\n";
    }
    ASSERT_EQ(run_cli("synth --config " + cfg.string() + " --out-dir " + d).code, 0);
    EXPECT_EQ(read_json(fs::path(d) / "synth_params.json")["nodes"].get<int>(), 5);

    // command line beats the file
    const std::string d2 = dir_arg("cfg_override");
    ASSERT_EQ(run_cli("synth --config " + cfg.string() + " --nodes 7 --out-dir " + d2).code, 0);
    EXPECT_EQ(read_json(fs::path(d2) / "synth_params.json")["nodes"].get<int>(), 7);

    const fs::path bad = fs::path(d) / "bad.cfg";
    {
        std::ofstream out(bad);
        out << "bogus_key = 1\n";
    }
    const RunResult r = run_cli("synth --config " + bad.string() + " --out-dir " + d);
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.output.find("bogus_key"), std::string::npos) << r.output;

    EXPECT_EQ(run_cli("synth --config " + d + "/missing.cfg --out-dir " + d).code, 2);
}
