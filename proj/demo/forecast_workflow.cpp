// Whole pipeline in memory: synthesize a sensor graph, build both
// adjacencies, train briefly, compare against the persistence baseline,
// then round-trip the checkpoint.
#include <cstdio>
#include <filesystem>

#include "stgode/commands.hpp"

using namespace stgode;

int main() {
    SynthConfig sc;
    sc.nodes = 10;
    sc.steps = 600;
    const SynthResult synth = synthesize_dataset(sc);
    std::printf("dataset: %d nodes, %d steps, %zu edges\n", sc.nodes, sc.steps, synth.net.edges.size());

    ModelConfig mc;
    mc.history = 12;
    mc.horizon = 6;
    mc.c1 = 8;
    mc.c2 = 4;
    mc.c3 = 8;
    mc.blocks_per_kind = 1;
    mc.layers = 1;
    mc.head_hidden = 16;

    const RegularizedAdjacency spatial = build_regularized(
        spatial_adjacency(synth.net, mc.sigma, mc.eps_spatial), mc.alpha, AdjacencyKind::Spatial);

    const SplitWindows sw = split_and_window(synth.series.steps, mc.history, mc.horizon);
    std::vector<std::vector<double>> train_series;
    for (int n = 0; n < synth.series.nodes; ++n) {
        train_series.push_back(synth.series.node_series(n, sw.train_end));
    }
    const RegularizedAdjacency semantic = build_regularized(
        semantic_adjacency(train_series, mc.eps_semantic, mc.dtw_band), mc.alpha, AdjacencyKind::Semantic);

    const Normalizer nz = Normalizer::fit(synth.series, sw.train_end);
    StgodeNetwork net = init_network(mc, spatial, semantic, 1);

    TrainConfig tc;
    tc.epochs = 8;
    tc.batch_size = 16;
    tc.max_train_windows = 64;
    const TrainOutcome out = train_model(net, synth.series, nz, sw, tc);
    for (const EpochStats& e : out.history) {
        std::printf("epoch %2d  train %.4f  val %.4f\n", e.epoch, e.train_loss, e.val_loss);
    }

    const Metrics model = evaluate_forecasts(out.best_net, synth.series, nz, sw.test_starts);
    const Metrics base = persistence_metrics(synth.series, sw.test_starts, mc.history, mc.horizon);
    std::printf("test MAE %.4f vs persistence %.4f\n", model.mae, base.mae);

    const auto path = std::filesystem::temp_directory_path() / "stgode_demo_checkpoint.json";
    save_checkpoint(out.best_net, nz.mean, nz.std_dev, tc.ratio_train, tc.ratio_val, path.string());
    const LoadedCheckpoint loaded = load_checkpoint(path.string());
    auto [x, y] = window_tensors(synth.series, nz, sw.test_starts.front(), mc.history, mc.horizon);
    const double drift = max_abs_diff(forecast(out.best_net, x), forecast(loaded.net, x));
    std::printf("checkpoint reload drift: %.1e\n", drift);
    std::filesystem::remove(path);
    return 0;
}
