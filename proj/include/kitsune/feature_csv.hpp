#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "kitsune/feature_extractor.hpp"

namespace kitsune {

// Decimal form that parses back to the same double, bit for bit.
std::string g17(double value);

struct FeatureRow {
    double timestamp = 0.0;
    FeatureVector features;
};

// Writes "timestamp,f000,f001,..." rows. Values are formatted so that
// reading the file back reproduces the doubles bit for bit.
class FeatureCsvWriter {
public:
    FeatureCsvWriter(const std::string& path, std::size_t n_features);
    ~FeatureCsvWriter();
    FeatureCsvWriter(const FeatureCsvWriter&) = delete;
    FeatureCsvWriter& operator=(const FeatureCsvWriter&) = delete;

    void write(double timestamp, const FeatureVector& features);
    void flush();
    std::size_t rows_written() const { return rows_written_; }

private:
    std::FILE* file_ = nullptr;
    std::size_t n_features_;
    std::size_t rows_written_ = 0;
};

// Streams rows back out of a feature CSV. A leading "timestamp,..." header
// is skipped when present; files that start directly with numbers are
// accepted as written by other tools. Every row must have the same column
// count as the first, otherwise the file is rejected.
class FeatureCsvReader {
public:
    explicit FeatureCsvReader(const std::string& path);
    ~FeatureCsvReader();
    FeatureCsvReader(const FeatureCsvReader&) = delete;
    FeatureCsvReader& operator=(const FeatureCsvReader&) = delete;

    std::optional<FeatureRow> next();
    // Feature columns per row; 0 until the first data row has been read.
    std::size_t n_features() const { return n_features_; }
    std::size_t rows_read() const { return rows_read_; }

private:
    std::optional<std::string> read_line();

    std::FILE* file_ = nullptr;
    std::string path_;
    std::size_t n_features_ = 0;
    std::size_t rows_read_ = 0;
    std::size_t line_no_ = 0;
    bool checked_header_ = false;
};

} // namespace kitsune
