// CLI front end. Exit codes: 0 success, 1 validation or verification
// failure, 2 I/O or parse error.

#include <algorithm>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stgode/commands.hpp"

namespace {

using stgode::CoreKind;
using stgode::RunConfig;

// A config file is a plain list of `key = value` lines ('#' comments allowed)
// where each key names a long option of the subcommand being run. The file is
// expanded into --key=value tokens placed before the explicit command-line
// flags, so flags override the file. Unknown keys are rejected.
std::vector<std::string> parse_config_lines(const std::string& path) {
    const std::string text = stgode::read_text(path);
    std::vector<std::string> tokens;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (const std::size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const auto trim = [](std::string s) {
            const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
            while (!s.empty() && is_space(s.front())) s.erase(s.begin());
            while (!s.empty() && is_space(s.back())) s.pop_back();
            return s;
        };
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw stgode::ValidationError(path + ":" + std::to_string(line_no) +
                                          ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw stgode::ValidationError(path + ":" + std::to_string(line_no) + ": empty key");
        }
        if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                                  (value.front() == '\'' && value.back() == '\''))) {
            value = value.substr(1, value.size() - 2);
        }
        tokens.push_back("--" + key + "=" + value);
    }
    return tokens;
}

void apply_config_file(CLI::App& app, std::vector<std::string>& args) {
    std::string config_path;
    for (auto it = args.begin(); it != args.end();) {
        if (*it == "--config") {
            if (std::next(it) == args.end()) {
                throw stgode::ValidationError("--config requires a file path");
            }
            config_path = *std::next(it);
            it = args.erase(it, std::next(it, 2));
        } else if (it->rfind("--config=", 0) == 0) {
            config_path = it->substr(9);
            it = args.erase(it);
        } else {
            ++it;
        }
    }
    if (config_path.empty()) return;
    if (args.empty() || args.front().front() == '-') {
        throw stgode::ValidationError("--config requires a subcommand");
    }
    CLI::App* sub = app.get_subcommand_no_throw(args.front());
    if (sub == nullptr) throw stgode::ValidationError("unknown subcommand " + args.front());
    const std::vector<std::string> tokens = parse_config_lines(config_path);
    for (const std::string& t : tokens) {
        const std::string name = t.substr(0, t.find('='));
        if (sub->get_option_no_throw(name) == nullptr) {
            throw stgode::ValidationError(config_path + ": unknown key '" + name.substr(2) +
                                          "' for subcommand " + args.front());
        }
    }
    args.insert(std::next(args.begin()), tokens.begin(), tokens.end());
}

void add_common(CLI::App* cmd, RunConfig& rc, std::string& config_sink) {
    cmd->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    cmd->add_option("--config", config_sink, "key = value config file; command-line flags override");
    cmd->add_option("--seed", rc.seed, "master seed for init, shuffling, synthesis")
        ->capture_default_str();
    cmd->add_option("--out-dir", rc.out_dir, "directory for output artifacts")->capture_default_str();
}

void add_model_options(CLI::App* cmd, RunConfig& rc) {
    auto& m = rc.model;
    cmd->add_option("--history", m.history, "input window length T")->capture_default_str();
    cmd->add_option("--horizon", m.horizon, "forecast length T'")->capture_default_str();
    cmd->add_option("--c1", m.c1, "block channel width (entry TCN and ODE state)")->capture_default_str();
    cmd->add_option("--c2", m.c2, "exit TCN hidden width")->capture_default_str();
    cmd->add_option("--c3", m.c3, "block output width")->capture_default_str();
    cmd->add_option("--blocks-per-kind", m.blocks_per_kind, "parallel blocks per adjacency kind")
        ->capture_default_str();
    cmd->add_option("--layers", m.layers, "cascaded block layers")->capture_default_str();
    cmd->add_option("--kernel-width", m.kernel_width, "temporal convolution kernel width")
        ->capture_default_str();
    cmd->add_option("--head-hidden", m.head_hidden, "hidden width of the output head")
        ->capture_default_str();
    cmd->add_option("--t-end", m.solver.t_end, "ODE integration horizon")->capture_default_str();
    cmd->add_option("--steps", m.solver.steps, "Euler steps")->capture_default_str();
    cmd->add_option("--core", m.core, "block core: ode or gcn")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, CoreKind>{{"ode", CoreKind::Ode}, {"gcn", CoreKind::Gcn}}));
    cmd->add_option("--gcn-depth", m.gcn_depth, "stacked convolutions in the gcn core")
        ->capture_default_str();
    cmd->add_option("--use-semantic", m.use_semantic, "include series-similarity blocks (true/false)")
        ->capture_default_str();
    cmd->add_option("--huber-delta", m.huber_delta, "Huber loss threshold")->capture_default_str();
}

void add_graph_options(CLI::App* cmd, RunConfig& rc) {
    auto& m = rc.model;
    cmd->add_option("--alpha", m.alpha, "regularization strength, spectrum lands in [0, alpha]")
        ->capture_default_str();
    cmd->add_option("--sigma", m.sigma, "distance kernel scale")->capture_default_str();
    cmd->add_option("--sigma-squared", m.sigma_is_squared,
                    "interpret --sigma as sigma^2 in the kernel denominator")
        ->capture_default_str();
    cmd->add_option("--eps-spatial", m.eps_spatial, "distance kernel threshold")->capture_default_str();
    cmd->add_option("--eps-semantic", m.eps_semantic, "path-normalized warping distance threshold")
        ->capture_default_str();
    cmd->add_option("--semantic-top-k", m.semantic_top_k,
                    "keep k nearest series neighbours instead of thresholding (0 = use threshold)")
        ->capture_default_str();
    cmd->add_option("--dtw-band", m.dtw_band, "warping band half-width (-1 = unbanded)")
        ->capture_default_str();
}

void add_train_options(CLI::App* cmd, RunConfig& rc) {
    auto& t = rc.train;
    cmd->add_option("--lr", t.lr, "Adam learning rate")->capture_default_str();
    cmd->add_option("--batch-size", t.batch_size, "windows per gradient step")->capture_default_str();
    cmd->add_option("--epochs", t.epochs, "training epochs")->capture_default_str();
    cmd->add_option("--beta1", t.beta1, "Adam first-moment decay")->capture_default_str();
    cmd->add_option("--beta2", t.beta2, "Adam second-moment decay")->capture_default_str();
    cmd->add_option("--adam-eps", t.adam_eps, "Adam stability epsilon")->capture_default_str();
    cmd->add_option("--max-train-windows", t.max_train_windows,
                    "evenly subsample the training windows (0 = all)")
        ->capture_default_str();
    cmd->add_option("--ratio-train", t.ratio_train, "chronological training fraction")
        ->capture_default_str();
    cmd->add_option("--ratio-val", t.ratio_val, "chronological validation fraction")
        ->capture_default_str();
}

void add_series_options(CLI::App* cmd, RunConfig& rc, bool require_series) {
    auto* opt = cmd->add_option("--series", rc.series_path, "flow CSV: header = node ids, one row per step");
    if (require_series) opt->required();
    cmd->add_option("--features", rc.feature_paths, "extra feature CSVs aligned with --series")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
}

void add_synth_options(CLI::App* cmd, RunConfig& rc) {
    auto& s = rc.synth;
    cmd->add_option("--nodes", s.nodes, "node count")->capture_default_str();
    cmd->add_option("--steps-total", s.steps, "series length")->capture_default_str();
    cmd->add_option("--box", s.box, "placement square side")->capture_default_str();
    cmd->add_option("--radius", s.radius, "connection radius")->capture_default_str();
    cmd->add_option("--rho", s.rho, "self persistence")->capture_default_str();
    cmd->add_option("--kappa", s.kappa, "graph diffusion coefficient")->capture_default_str();
    cmd->add_option("--gamma", s.gamma, "periodic forcing gain")->capture_default_str();
    cmd->add_option("--noise", s.noise, "innovation standard deviation")->capture_default_str();
    cmd->add_option("--period", s.period, "forcing period in steps")->capture_default_str();
    cmd->add_option("--base", s.base, "signal offset")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spatial-temporal graph ODE forecasting toolkit"};
    app.require_subcommand(1);

    RunConfig rc_graph, rc_verify, rc_train, rc_eval, rc_demo, rc_synth;
    std::string config_sink;  // --config is consumed before CLI11 runs
    int exit_code = 0;

    CLI::App* build = app.add_subcommand("build-graph", "build regularized adjacency artifacts");
    add_common(build, rc_graph, config_sink);
    add_series_options(build, rc_graph, true);
    build->add_option("--edges", rc_graph.edges_path, "edge CSV with header from,to,distance")->required();
    build->add_option("--spatial-out", rc_graph.spatial_path, "spatial adjacency JSON path");
    build->add_option("--semantic-out", rc_graph.semantic_path, "semantic adjacency JSON path");
    build->add_flag("--export-csv", rc_graph.export_csv, "also write dense CSV matrices");
    build->add_option("--history", rc_graph.model.history, "window length used to bound the training split")
        ->capture_default_str();
    build->add_option("--horizon", rc_graph.model.horizon, "forecast length used to bound the training split")
        ->capture_default_str();
    build->add_option("--ratio-train", rc_graph.train.ratio_train, "chronological training fraction")
        ->capture_default_str();
    build->add_option("--ratio-val", rc_graph.train.ratio_val, "chronological validation fraction")
        ->capture_default_str();
    build->add_option("--use-semantic", rc_graph.model.use_semantic, "build the semantic graph too")
        ->capture_default_str();
    add_graph_options(build, rc_graph);
    build->callback([&] { exit_code = stgode::cmd_build_graph(rc_graph); });

    CLI::App* verify = app.add_subcommand("verify", "run every numerical oracle suite");
    add_common(verify, rc_verify, config_sink);
    verify->add_flag("--inject-fault", rc_verify.inject_fault,
                     "flip a sign in the dynamics to prove the oracles can fail");
    verify->callback([&] { exit_code = stgode::cmd_verify(rc_verify); });

    CLI::App* train = app.add_subcommand("train", "train a forecasting model");
    add_common(train, rc_train, config_sink);
    add_series_options(train, rc_train, true);
    train->add_option("--spatial", rc_train.spatial_path, "spatial adjacency JSON from build-graph");
    train->add_option("--semantic", rc_train.semantic_path, "semantic adjacency JSON from build-graph");
    train->add_option("--checkpoint", rc_train.checkpoint_path, "checkpoint output path");
    train->add_option("--metrics", rc_train.metrics_path, "metrics JSON output path");
    add_model_options(train, rc_train);
    add_train_options(train, rc_train);
    train->callback([&] { exit_code = stgode::cmd_train(rc_train); });

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
    add_common(eval, rc_eval, config_sink);
    add_series_options(eval, rc_eval, true);
    eval->add_option("--checkpoint", rc_eval.checkpoint_path, "checkpoint to evaluate")->required();
    eval->add_option("--metrics", rc_eval.metrics_path, "metrics JSON output path");
    eval->add_flag("--persistence", rc_eval.persistence, "also report the repeat-last-value baseline");
    eval->callback([&] { exit_code = stgode::cmd_eval(rc_eval); });

    // scaled-down defaults so the sweep finishes quickly
    rc_demo.model.c1 = 16;
    rc_demo.model.c2 = 8;
    rc_demo.model.c3 = 16;
    rc_demo.model.blocks_per_kind = 1;
    rc_demo.model.head_hidden = 64;
    rc_demo.train.epochs = 8;
    rc_demo.train.batch_size = 16;
    rc_demo.train.max_train_windows = 96;
    rc_demo.synth.nodes = 12;
    rc_demo.synth.steps = 600;
    CLI::App* demo = app.add_subcommand("demo",
                                        "variance-collapse curves and the depth-robustness sweep");
    add_common(demo, rc_demo, config_sink);
    add_model_options(demo, rc_demo);
    add_train_options(demo, rc_demo);
    add_synth_options(demo, rc_demo);
    demo->add_option("--sigma", rc_demo.model.sigma, "distance kernel scale")->capture_default_str();
    demo->add_option("--alpha", rc_demo.model.alpha, "regularization strength")->capture_default_str();
    demo->callback([&] { exit_code = stgode::cmd_demo(rc_demo); });

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    add_common(synth, rc_synth, config_sink);
    add_synth_options(synth, rc_synth);
    synth->callback([&] { exit_code = stgode::cmd_synth(rc_synth); });

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        apply_config_file(app, args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const stgode::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const stgode::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return exit_code;
}
