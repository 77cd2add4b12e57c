#include "kitsune/feature_csv.hpp"

#include <cstdlib>
#include <cstring>

#include "kitsune/errors.hpp"

namespace kitsune {

std::string g17(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

FeatureCsvWriter::FeatureCsvWriter(const std::string& path, std::size_t n_features)
    : n_features_(n_features) {
    file_ = std::fopen(path.c_str(), "wb");
    if (!file_) throw FormatError("cannot open for writing: " + path);
    std::string header = "timestamp";
    char col[24];
    for (std::size_t i = 0; i < n_features_; ++i) {
        std::snprintf(col, sizeof(col), ",f%03zu", i);
        header += col;
    }
    header += '\n';
    std::fputs(header.c_str(), file_);
}

FeatureCsvWriter::~FeatureCsvWriter() {
    if (file_) std::fclose(file_);
}

void FeatureCsvWriter::write(double timestamp, const FeatureVector& features) {
    if (features.size() != n_features_)
        throw FormatError("feature row width mismatch");
    std::string line = g17(timestamp);
    for (double f : features) {
        line += ',';
        line += g17(f);
    }
    line += '\n';
    std::fputs(line.c_str(), file_);
    ++rows_written_;
}

void FeatureCsvWriter::flush() {
    if (file_) std::fflush(file_);
}

FeatureCsvReader::FeatureCsvReader(const std::string& path) : path_(path) {
    file_ = std::fopen(path.c_str(), "rb");
    if (!file_) throw FormatError("cannot open: " + path);
}

FeatureCsvReader::~FeatureCsvReader() {
    if (file_) std::fclose(file_);
}

std::optional<std::string> FeatureCsvReader::read_line() {
    std::string line;
    char buf[8192];
    while (std::fgets(buf, sizeof(buf), file_)) {
        line += buf;
        if (!line.empty() && line.back() == '\n') break;
    }
    if (line.empty()) return std::nullopt;
    ++line_no_;
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r'))
        line.pop_back();
    return line;
}

namespace {

bool parse_field(const char* begin, const char* end, double& out) {
    if (begin == end) return false;
    std::string field(begin, end);
    char* stop = nullptr;
    out = std::strtod(field.c_str(), &stop);
    return stop == field.c_str() + field.size();
}

} // namespace

std::optional<FeatureRow> FeatureCsvReader::next() {
    for (;;) {
        auto line = read_line();
        if (!line) return std::nullopt;
        if (line->empty()) continue;

        if (!checked_header_) {
            checked_header_ = true;
            // Files written by this tool lead with a header row; plain
            // numeric dumps from elsewhere start with data immediately.
            double probe;
            const char* text = line->c_str();
            const char* comma = std::strchr(text, ',');
            const char* first_end = comma ? comma : text + line->size();
            if (!parse_field(text, first_end, probe)) continue;
        }

        FeatureRow row;
        std::vector<double> values;
        const char* cursor = line->c_str();
        const char* line_end = cursor + line->size();
        for (;;) {
            const char* comma = std::strchr(cursor, ',');
            const char* field_end = comma ? comma : line_end;
            double v;
            if (!parse_field(cursor, field_end, v))
                throw FormatError(path_ + ": bad value at line " +
                                  std::to_string(line_no_));
            values.push_back(v);
            if (!comma) break;
            cursor = comma + 1;
        }
        if (values.size() < 2)
            throw FormatError(path_ + ": row too short at line " +
                              std::to_string(line_no_));
        row.timestamp = values.front();
        row.features.assign(values.begin() + 1, values.end());
        if (n_features_ == 0) {
            n_features_ = row.features.size();
        } else if (row.features.size() != n_features_) {
            throw FormatError(path_ + ": inconsistent column count at line " +
                              std::to_string(line_no_));
        }
        ++rows_read_;
        return row;
    }
}

} // namespace kitsune
