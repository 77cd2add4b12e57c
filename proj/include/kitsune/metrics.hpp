#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace kitsune {

// Parallel score/label arrays; label 1 marks an attack instance. The alert
// convention throughout is "alert iff score >= threshold".
struct LabeledScores {
    std::vector<double> scores;
    std::vector<int> labels;
};

// Probability that a random attack outscores a random normal instance,
// ties counted half. Rank-sum formulation; equals the O(N^2) pairwise count
// exactly, not just approximately.
double auc(const LabeledScores& data);

// Rate where false positives and false negatives balance, interpolated
// between adjacent sweep points when no threshold hits the crossing
// exactly. A pure rank statistic: monotone rescaling of scores is a no-op.
double eer(const LabeledScores& data);

struct RatePoint {
    double threshold = 0.0;
    double tpr = 0.0;
    double fnr = 1.0;
};

// Smallest threshold whose empirical false-positive rate is within target;
// +infinity (alert on nothing) always qualifies, so this never fails.
// target 0 gives the tightest no-false-alarm operating point.
RatePoint rate_at_fpr(const LabeledScores& data, double target_fpr);

struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

// One point per distinct threshold, descending FPR, ending at the
// alert-on-nothing point.
std::vector<RocPoint> roc_sweep(const LabeledScores& data);

// Two-column CSV, score then label, optional header line.
LabeledScores read_labeled_csv(const std::string& path);

// Joins a score file with a label file row by row. The score is the last
// column of its row (so "index,timestamp,rmse" files work as-is), likewise
// the label; row counts must agree.
LabeledScores read_score_and_label_files(const std::string& scores_path,
                                         const std::string& labels_path);

// AUC, EER, and the low-FPR operating points (0.001 and 0) as one JSON
// document.
nlohmann::json metrics_report(const LabeledScores& data);

} // namespace kitsune
