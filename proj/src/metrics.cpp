#include "kitsune/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "kitsune/errors.hpp"

namespace kitsune {

namespace {

struct ClassCounts {
    std::size_t attack = 0;
    std::size_t normal = 0;
};

ClassCounts check(const LabeledScores& data, bool need_both) {
    if (data.scores.size() != data.labels.size())
        throw FormatError("scores and labels differ in length");
    if (data.scores.empty()) throw FormatError("no scores");
    ClassCounts c;
    for (int label : data.labels) (label ? c.attack : c.normal)++;
    if (need_both && (c.attack == 0 || c.normal == 0))
        throw FormatError("need both an attack and a normal instance");
    return c;
}

std::vector<std::pair<double, int>> sorted_pairs(const LabeledScores& data) {
    std::vector<std::pair<double, int>> s(data.scores.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        s[i] = {data.scores[i], data.labels[i] ? 1 : 0};
    std::sort(s.begin(), s.end());
    return s;
}

struct SweepPoint {
    double threshold;
    double fpr;
    double tpr;
};

// One point per distinct score value (threshold = that value, alerts are
// the >= suffix), plus the alert-on-nothing point. Ascending thresholds,
// so FPR and TPR only fall along the walk.
std::vector<SweepPoint> sweep(const LabeledScores& data, const ClassCounts& c) {
    const auto s = sorted_pairs(data);
    std::vector<SweepPoint> points;
    const double attacks = static_cast<double>(c.attack);
    const double normals = static_cast<double>(c.normal);
    std::size_t pos_below = 0, neg_below = 0;
    std::size_t i = 0;
    while (i < s.size()) {
        const double v = s[i].first;
        points.push_back({v,
                          static_cast<double>(c.normal - neg_below) / normals,
                          static_cast<double>(c.attack - pos_below) / attacks});
        while (i < s.size() && s[i].first == v) {
            (s[i].second ? pos_below : neg_below)++;
            ++i;
        }
    }
    points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    return points;
}

} // namespace

double auc(const LabeledScores& data) {
    const ClassCounts c = check(data, true);
    const auto s = sorted_pairs(data);
    double rank_sum_attack = 0.0;
    std::size_t i = 0;
    while (i < s.size()) {
        std::size_t j = i;
        std::size_t tied_attacks = 0;
        while (j < s.size() && s[j].first == s[i].first) {
            tied_attacks += static_cast<std::size_t>(s[j].second);
            ++j;
        }
        // Ranks i+1..j share the midrank; halves are exact in binary.
        const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        rank_sum_attack += midrank * static_cast<double>(tied_attacks);
        i = j;
    }
    const double attacks = static_cast<double>(c.attack);
    const double u = rank_sum_attack - attacks * (attacks + 1.0) / 2.0;
    return u / (attacks * static_cast<double>(c.normal));
}

double eer(const LabeledScores& data) {
    const ClassCounts c = check(data, true);
    const auto points = sweep(data, c);
    // fnr - fpr runs from -1 (alert on everything) to +1 (alert on
    // nothing); the rate where it crosses zero is the answer. Interpolation
    // happens in rate space, so rescaling the scores cannot move it.
    double prev_diff = 0.0, prev_fpr = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double fpr = points[i].fpr;
        const double fnr = 1.0 - points[i].tpr;
        const double diff = fnr - fpr;
        if (diff == 0.0) return fpr;
        if (i > 0 && prev_diff < 0.0 && diff > 0.0) {
            const double alpha = -prev_diff / (diff - prev_diff);
            return prev_fpr + alpha * (fpr - prev_fpr);
        }
        prev_diff = diff;
        prev_fpr = fpr;
    }
    throw std::logic_error("no balance point in sweep");
}

RatePoint rate_at_fpr(const LabeledScores& data, double target_fpr) {
    if (!(target_fpr >= 0.0 && target_fpr < 1.0))
        throw std::logic_error("target false-positive rate must be in [0, 1)");
    const ClassCounts c = check(data, true);
    for (const SweepPoint& p : sweep(data, c)) {
        if (p.fpr <= target_fpr) return {p.threshold, p.tpr, 1.0 - p.tpr};
    }
    throw std::logic_error("unreachable: infinite threshold has zeroFPR");
}

std::vector<RocPoint> roc_sweep(const LabeledScores& data) {
    const ClassCounts c = check(data, true);
    std::vector<RocPoint> out;
    for (const SweepPoint& p : sweep(data, c))
        out.push_back({p.threshold, p.fpr, p.tpr});
    return out;
}

namespace {

// Splits a CSV line and parses every field as a double; nullopt when any
// field is not numeric.
std::optional<std::vector<double>> parse_numeric_row(const std::string& line) {
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        const std::string field = line.substr(
            start, comma == std::string::npos ? std::string::npos : comma - start);
        char* stop = nullptr;
        const double v = std::strtod(field.c_str(), &stop);
        if (field.empty() || stop != field.c_str() + field.size())
            return std::nullopt;
        row.push_back(v);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return row;
}

// A line counts as a header only when its first field is non-numeric;
// "0.5,zebra" is a data row with a bad value, not a header.
bool header_line(const std::string& line) {
    const std::string field = line.substr(0, line.find(','));
    char* stop = nullptr;
    std::strtod(field.c_str(), &stop);
    return field.empty() || stop != field.c_str() + field.size();
}

// Reads one numeric column per row: the last column of each line. A single
// leading non-numeric line is treated as a header.
std::vector<double> read_last_column(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open: " + path);
    std::vector<double> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
            line.pop_back();
        if (line.empty()) continue;
        auto row = parse_numeric_row(line);
        if (!row) {
            if (out.empty() && line_no == 1 && header_line(line)) continue;
            throw FormatError(path + ": bad value at line " + std::to_string(line_no));
        }
        out.push_back(row->back());
    }
    return out;
}

int to_label(double v) { return v != 0.0 ? 1 : 0; }

} // namespace

LabeledScores read_labeled_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open: " + path);
    LabeledScores data;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
            line.pop_back();
        if (line.empty()) continue;
        auto row = parse_numeric_row(line);
        if (!row) {
            if (data.scores.empty() && line_no == 1 && header_line(line)) continue;
            throw FormatError(path + ": bad value at line " + std::to_string(line_no));
        }
        if (row->size() != 2)
            throw FormatError(path + ": expected score,label at line " +
                              std::to_string(line_no));
        data.scores.push_back((*row)[0]);
        data.labels.push_back(to_label((*row)[1]));
    }
    return data;
}

LabeledScores read_score_and_label_files(const std::string& scores_path,
                                         const std::string& labels_path) {
    LabeledScores data;
    data.scores = read_last_column(scores_path);
    for (double v : read_last_column(labels_path)) data.labels.push_back(to_label(v));
    if (data.scores.size() != data.labels.size())
        throw FormatError("score rows (" + std::to_string(data.scores.size()) +
                          ") and label rows (" + std::to_string(data.labels.size()) +
                          ") differ");
    return data;
}

nlohmann::json metrics_report(const LabeledScores& data) {
    const ClassCounts c = check(data, true);
    nlohmann::json j;
    j["count"] = data.scores.size();
    j["attack_count"] = c.attack;
    j["normal_count"] = c.normal;
    j["auc"] = auc(data);
    j["eer"] = eer(data);
    nlohmann::json points = nlohmann::json::array();
    for (double target : {0.001, 0.0}) {
        const RatePoint p = rate_at_fpr(data, target);
        nlohmann::json entry;
        entry["target_fpr"] = target;
        if (std::isfinite(p.threshold))
            entry["threshold"] = p.threshold;
        else
            entry["threshold"] = nullptr; // no finite threshold met the target
        entry["tpr"] = p.tpr;
        entry["fnr"] = p.fnr;
        entry["tp"] = static_cast<std::size_t>(
            std::llround(p.tpr * static_cast<double>(c.attack)));
        points.push_back(std::move(entry));
    }
    j["operating_points"] = std::move(points);
    return j;
}

} // namespace kitsune
