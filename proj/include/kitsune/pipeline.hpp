#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kitsune/feature_csv.hpp"
#include "kitsune/feature_extractor.hpp"
#include "kitsune/kitnet.hpp"
#include "kitsune/pcap.hpp"

namespace kitsune {

struct PipelineConfig {
    std::string pcap_path; // exactly one of these two inputs must be set
    std::string features_path;

    std::size_t m = 10;          // max inputs per ensemble autoencoder
    std::size_t fm_grace = 5000; // rows spent learning the feature map
    std::size_t ad_grace = 50000; // rows spent training the detector

    ExtractorConfig extractor;
    double rho = 0.75;
    double learning_rate = 0.1;
    double beta_s = 1.0;
    std::uint64_t seed = 1;
    std::size_t evict_every = 100000; // rows between stale-stream sweeps; 0 = never

    std::string scores_path;        // per-row "index,timestamp,rmse"
    std::string alerts_path;        // one JSON object per alert
    std::string dump_features_path; // feature vectors as CSV
    std::string save_model_path;
    std::string load_model_path; // skip training, score every row
};

struct PipelineSummary {
    std::size_t rows = 0;
    std::size_t map_rows = 0;
    std::size_t train_rows = 0;
    std::size_t execute_rows = 0;
    std::size_t alerts = 0;
    std::size_t evicted_streams = 0;
    std::size_t n_features = 0;
    std::size_t ensemble_size = 0;
    double phi = -1.0;
    std::string warning; // empty when the run had nothing to flag
};

// A stream of timestamped feature vectors, however they are produced.
class FeatureSource {
public:
    virtual ~FeatureSource() = default;
    virtual std::optional<FeatureRow> next() = 0;
    virtual std::size_t evict_stale() { return 0; }
};

// Live extraction: packets out of a capture file, features out of the
// damped-statistics registry.
class PcapFeatureSource : public FeatureSource {
public:
    PcapFeatureSource(const std::string& path, ExtractorConfig config);
    std::optional<FeatureRow> next() override;
    std::size_t evict_stale() override;
    const StatRegistry& registry() const { return registry_; }

private:
    PcapReader reader_;
    StatRegistry registry_;
};

class CsvFeatureSource : public FeatureSource {
public:
    explicit CsvFeatureSource(const std::string& path);
    std::optional<FeatureRow> next() override;

private:
    FeatureCsvReader reader_;
};

// Runs the full grace-period staging over the configured input: rows first
// feed the correlation summary, then train the detector, then are scored
// against it. Only the current row is ever held in memory.
PipelineSummary run_pipeline(const PipelineConfig& config);

// n feature columns in k contiguous groups as even as possible.
FeatureMap uniform_partition(std::size_t n, std::size_t k);

// Whole-file load used by the benchmark, which needs to replay rows many
// times and so cannot stream.
std::vector<FeatureRow> load_feature_rows(const std::string& path);

struct BenchResult {
    std::size_t k = 0;
    double rows_per_second = 0.0;
    std::uint64_t macs_per_row = 0;
};

// Scoring throughput for forced uniform partitions of each requested
// ensemble size, on the same rows and machine. A short training pass sets
// up each model first; timing covers execute only and loops over the rows
// until min_seconds has elapsed.
std::vector<BenchResult> benchmark_rows(const std::vector<FeatureRow>& rows,
                                        const std::vector<std::size_t>& ks,
                                        const KitNetConfig& config,
                                        double min_seconds = 0.5);

} // namespace kitsune
