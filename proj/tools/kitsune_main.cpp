#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kitsune/errors.hpp"
#include "kitsune/metrics.hpp"
#include "kitsune/pipeline.hpp"

namespace {

void print_summary(const kitsune::PipelineSummary& s) {
    std::printf("rows processed:   %zu\n", s.rows);
    std::printf("feature columns:  %zu\n", s.n_features);
    std::printf("feature-map rows: %zu\n", s.map_rows);
    std::printf("training rows:    %zu\n", s.train_rows);
    std::printf("execute rows:     %zu\n", s.execute_rows);
    std::printf("alerts:           %zu\n", s.alerts);
    std::printf("streams evicted:  %zu\n", s.evicted_streams);
    if (s.ensemble_size) std::printf("ensemble size:    %zu\n", s.ensemble_size);
    if (s.phi >= 0.0) std::printf("threshold base:   %.6g\n", s.phi);
    if (!s.warning.empty()) std::fprintf(stderr, "warning: %s\n", s.warning.c_str());
}

int run_command(kitsune::PipelineConfig& config) {
    print_summary(kitsune::run_pipeline(config));
    return 0;
}

int bench_command(const std::string& features, std::vector<std::size_t>& ks,
                  const kitsune::KitNetConfig& kc, double min_seconds) {
    const auto rows = kitsune::load_feature_rows(features);
    std::printf("rows: %zu, features: %zu\n", rows.size(),
                rows.front().features.size());
    for (const auto& r : kitsune::benchmark_rows(rows, ks, kc, min_seconds))
        std::printf("k=%zu rate=%.0f rows/s macs/row=%llu\n", r.k,
                    r.rows_per_second,
                    static_cast<unsigned long long>(r.macs_per_row));
    return 0;
}

int eval_command(const std::string& scores, const std::string& labels,
                 const std::string& roc_path) {
    const auto data = kitsune::read_score_and_label_files(scores, labels);
    std::printf("%s\n", kitsune::metrics_report(data).dump(2).c_str());
    if (!roc_path.empty()) {
        std::FILE* f = std::fopen(roc_path.c_str(), "wb");
        if (!f) throw kitsune::FormatError("cannot open for writing: " + roc_path);
        std::fputs("threshold,fpr,tpr\n", f);
        for (const auto& p : kitsune::roc_sweep(data))
            std::fprintf(f, "%.17g,%.17g,%.17g\n", p.threshold, p.fpr, p.tpr);
        std::fclose(f);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online network anomaly detector: damped traffic statistics "
                 "feeding an ensemble of small autoencoders"};
    app.require_subcommand(1);

    kitsune::PipelineConfig config;
    auto* run = app.add_subcommand(
        "run", "Process a capture or feature CSV through the full pipeline");
    run->add_option("--pcap", config.pcap_path, "packet capture input");
    run->add_option("--features", config.features_path,
                    "feature CSV input (skips extraction)");
    run->add_option("--m", config.m, "max features per ensemble autoencoder")
        ->capture_default_str();
    run->add_option("--fm-grace", config.fm_grace,
                    "rows used to learn the feature grouping")
        ->capture_default_str();
    run->add_option("--ad-grace", config.ad_grace,
                    "rows used to train the detector")
        ->capture_default_str();
    run->add_option("--rho", config.rho, "hidden size ratio")
        ->capture_default_str();
    run->add_option("--lr", config.learning_rate, "SGD learning rate")
        ->capture_default_str();
    run->add_option("--beta", config.beta_s, "alert threshold multiplier")
        ->capture_default_str();
    run->add_option("--seed", config.seed, "weight initialization seed")
        ->capture_default_str();
    run->add_option("--evict-every", config.evict_every,
                    "rows between stale-stream sweeps (0 disables)")
        ->capture_default_str();
    run->add_option("--scores", config.scores_path, "write per-row scores CSV");
    run->add_option("--alerts", config.alerts_path, "write alerts as JSON lines");
    run->add_option("--dump-features", config.dump_features_path,
                    "write extracted feature vectors as CSV");
    run->add_option("--save-model", config.save_model_path,
                    "write the trained model");
    run->add_option("--load-model", config.load_model_path,
                    "score against a saved model (no training)");

    std::string bench_features;
    std::vector<std::size_t> bench_ks{1, 12, 35};
    kitsune::KitNetConfig bench_config;
    double bench_seconds = 0.5;
    auto* bench = app.add_subcommand(
        "bench", "Measure scoring throughput for forced ensemble sizes");
    bench->add_option("--features", bench_features, "feature CSV input")
        ->required();
    bench->add_option("--k", bench_ks, "ensemble sizes to time")
        ->delimiter(',')
        ->capture_default_str();
    bench->add_option("--seed", bench_config.seed, "weight initialization seed")
        ->capture_default_str();
    bench->add_option("--min-seconds", bench_seconds,
                      "minimum timing window per size")
        ->capture_default_str();

    std::string eval_scores, eval_labels, eval_roc;
    auto* eval = app.add_subcommand(
        "eval", "Score a run against ground-truth labels");
    eval->add_option("--scores", eval_scores, "scores CSV from a run")
        ->required();
    eval->add_option("--labels", eval_labels, "labels, one row per score")
        ->required();
    eval->add_option("--roc", eval_roc, "also write the threshold sweep as CSV");

    try {
        app.parse(argc, argv);
        if (run->parsed()) return run_command(config);
        if (bench->parsed())
            return bench_command(bench_features, bench_ks, bench_config,
                                 bench_seconds);
        return eval_command(eval_scores, eval_labels, eval_roc);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const kitsune::UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const kitsune::FormatError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
}
