#include "kitsune/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "kitsune/errors.hpp"

namespace kitsune {

PcapFeatureSource::PcapFeatureSource(const std::string& path,
                                     ExtractorConfig config)
    : reader_(path), registry_(std::move(config)) {}

std::optional<FeatureRow> PcapFeatureSource::next() {
    auto meta = reader_.next();
    if (!meta) return std::nullopt;
    return FeatureRow{meta->timestamp, registry_.extract(*meta)};
}

std::size_t PcapFeatureSource::evict_stale() { return registry_.evict_stale(); }

CsvFeatureSource::CsvFeatureSource(const std::string& path) : reader_(path) {}

std::optional<FeatureRow> CsvFeatureSource::next() { return reader_.next(); }

namespace {

// Score rows buffered and flushed in batches; alerts are rare and urgent,
// so those go straight out.
class ScoreWriter {
public:
    explicit ScoreWriter(const std::string& path) {
        file_ = std::fopen(path.c_str(), "wb");
        if (!file_) throw FormatError("cannot open for writing: " + path);
        std::fputs("index,timestamp,rmse\n", file_);
    }
    ~ScoreWriter() {
        flush();
        if (file_) std::fclose(file_);
    }
    void write(std::size_t index, double timestamp, double score) {
        buffer_ += std::to_string(index);
        buffer_ += ',';
        buffer_ += g17(timestamp);
        buffer_ += ',';
        buffer_ += g17(score);
        buffer_ += '\n';
        if (++pending_ >= 1024) flush();
    }
    void flush() {
        if (!buffer_.empty()) {
            std::fwrite(buffer_.data(), 1, buffer_.size(), file_);
            std::fflush(file_);
            buffer_.clear();
        }
        pending_ = 0;
    }

private:
    std::FILE* file_ = nullptr;
    std::string buffer_;
    std::size_t pending_ = 0;
};

class AlertWriter {
public:
    explicit AlertWriter(const std::string& path) {
        file_ = std::fopen(path.c_str(), "wb");
        if (!file_) throw FormatError("cannot open for writing: " + path);
    }
    ~AlertWriter() {
        if (file_) std::fclose(file_);
    }
    void write(std::size_t index, double timestamp, double score,
               double threshold, std::size_t top_group) {
        nlohmann::json j{{"index", index},
                         {"timestamp", timestamp},
                         {"score", score},
                         {"threshold", threshold},
                         {"top_group", top_group}};
        const std::string line = j.dump() + "\n";
        std::fwrite(line.data(), 1, line.size(), file_);
        std::fflush(file_);
    }

private:
    std::FILE* file_ = nullptr;
};

std::unique_ptr<FeatureSource> open_source(const PipelineConfig& config) {
    const bool has_pcap = !config.pcap_path.empty();
    const bool has_csv = !config.features_path.empty();
    if (has_pcap == has_csv)
        throw UsageError("exactly one input is required: a capture file or a feature CSV");
    if (has_pcap)
        return std::make_unique<PcapFeatureSource>(config.pcap_path, config.extractor);
    return std::make_unique<CsvFeatureSource>(config.features_path);
}

KitNetModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open model: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    KitNetModel model = KitNetModel::from_json(j);
    if (model.train_count() == 0)
        throw FormatError(path + ": model was never trained");
    return model;
}

void save_model_file(const KitNetModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open for writing: " + path);
    out << model.to_json().dump() << "\n";
    if (!out) throw FormatError("failed writing model: " + path);
}

std::size_t argmax(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

} // namespace

PipelineSummary run_pipeline(const PipelineConfig& config) {
    const bool preloaded = !config.load_model_path.empty();
    if (!preloaded) {
        if (config.fm_grace < 2)
            throw UsageError("feature-map grace must be at least 2 rows");
        if (config.ad_grace < 1)
            throw UsageError("detector grace must be at least 1 row");
        if (config.m < 1) throw UsageError("group size cap must be at least 1");
    }

    auto source = open_source(config);
    std::optional<ScoreWriter> scores;
    if (!config.scores_path.empty()) scores.emplace(config.scores_path);
    std::optional<AlertWriter> alerts;
    if (!config.alerts_path.empty()) alerts.emplace(config.alerts_path);
    std::unique_ptr<FeatureCsvWriter> dump;

    std::optional<CorrSummary> summary;
    std::optional<KitNetModel> model;
    if (preloaded) {
        model = load_model_file(config.load_model_path);
        model->set_execute_mode(true);
    }

    PipelineSummary result;
    ExecuteDetail detail;
    std::size_t index = 0;
    for (auto row = source->next(); row; row = source->next(), ++index) {
        const FeatureVector& x = row->features;
        if (index == 0) {
            result.n_features = x.size();
            if (preloaded && model->map().n != x.size())
                throw FormatError("input has " + std::to_string(x.size()) +
                                  " features but the model expects " +
                                  std::to_string(model->map().n));
            if (!config.dump_features_path.empty())
                dump = std::make_unique<FeatureCsvWriter>(config.dump_features_path,
                                                          x.size());
        }
        if (dump) dump->write(row->timestamp, x);

        double score = 0.0;
        if (!preloaded && index < config.fm_grace) {
            if (!summary) summary.emplace(x.size());
            summary->update(x);
            ++result.map_rows;
            if (index + 1 == config.fm_grace) {
                if (config.m > x.size())
                    throw UsageError("group size cap " + std::to_string(config.m) +
                                     " exceeds the feature count " +
                                     std::to_string(x.size()));
                KitNetConfig kc{config.rho, config.learning_rate, config.beta_s,
                                config.seed};
                model.emplace(FeatureMap::build(*summary, config.m), kc);
                summary.reset();
            }
        } else if (!preloaded && index < config.fm_grace + config.ad_grace) {
            score = model->train_step(x);
            ++result.train_rows;
            if (index + 1 == config.fm_grace + config.ad_grace)
                model->set_execute_mode(true);
        } else {
            score = model->execute_step(x, &detail);
            ++result.execute_rows;
            if (model->alert(score)) {
                ++result.alerts;
                if (alerts)
                    alerts->write(index, row->timestamp, score,
                                  model->phi() * config.beta_s,
                                  argmax(detail.output_input));
            }
        }
        if (scores) scores->write(index, row->timestamp, score);
        ++result.rows;
        if (config.evict_every && result.rows % config.evict_every == 0)
            result.evicted_streams += source->evict_stale();
    }

    if (result.rows == 0) throw FormatError("input produced no rows");
    if (!preloaded && result.rows < config.fm_grace)
        throw FormatError("input ended during feature-map training: got " +
                          std::to_string(result.rows) + " rows, need " +
                          std::to_string(config.fm_grace));
    if (result.execute_rows == 0)
        result.warning = preloaded
                             ? ""
                             : "training consumed every row; nothing was scored "
                               "in execute mode";

    if (model) {
        result.ensemble_size = model->ensemble_size();
        result.phi = model->phi();
        if (!config.save_model_path.empty())
            save_model_file(*model, config.save_model_path);
    }
    if (scores) scores->flush();
    return result;
}

FeatureMap uniform_partition(std::size_t n, std::size_t k) {
    if (k < 1 || k > n)
        throw UsageError("ensemble size must be between 1 and the feature count");
    FeatureMap map;
    map.n = n;
    const std::size_t base = n / k, extra = n % k;
    map.m = base + (extra ? 1 : 0);
    std::size_t next = 0;
    for (std::size_t g = 0; g < k; ++g) {
        const std::size_t size = base + (g < extra ? 1 : 0);
        std::vector<std::size_t> group(size);
        for (std::size_t i = 0; i < size; ++i) group[i] = next++;
        map.groups.push_back(std::move(group));
    }
    map.validate();
    return map;
}

std::vector<FeatureRow> load_feature_rows(const std::string& path) {
    FeatureCsvReader reader(path);
    std::vector<FeatureRow> rows;
    while (auto row = reader.next()) rows.push_back(std::move(*row));
    if (rows.empty()) throw FormatError(path + ": no feature rows");
    return rows;
}

std::vector<BenchResult> benchmark_rows(const std::vector<FeatureRow>& rows,
                                        const std::vector<std::size_t>& ks,
                                        const KitNetConfig& config,
                                        double min_seconds) {
    if (rows.empty()) throw UsageError("benchmark needs feature rows");
    const std::size_t n = rows.front().features.size();
    std::vector<BenchResult> results;
    for (std::size_t k : ks) {
        KitNetModel model(uniform_partition(n, k), config);
        const std::size_t warmup = std::min<std::size_t>(rows.size(), 1000);
        for (std::size_t i = 0; i < warmup; ++i)
            model.train_step(rows[i].features);
        model.set_execute_mode(true);

        // One throwaway pass so allocator and cache state do not favour
        // whichever k happens to run first.
        volatile double sink = 0.0;
        sink = model.execute_step(rows.front().features);

        const auto start = std::chrono::steady_clock::now();
        std::size_t done = 0;
        double elapsed = 0.0;
        do {
            for (const FeatureRow& row : rows) sink = model.execute_step(row.features);
            done += rows.size();
            elapsed = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
        } while (elapsed < min_seconds);
        (void)sink;
        results.push_back(
            {k, static_cast<double>(done) / elapsed, model.macs_per_execute()});
    }
    return results;
}

} // namespace kitsune
