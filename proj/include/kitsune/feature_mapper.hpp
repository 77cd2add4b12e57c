#pragma once

#include <cstddef>
#include <vector>

#include "json.hpp"
#include "kitsune/feature_extractor.hpp"

namespace kitsune {

// Streaming summary of how feature columns move together. Feeding it rows
// costs O(n^2) each, after which pairwise correlation distances come out in
// one shot, so the whole warm-up needs no stored instance matrix.
class CorrSummary {
public:
    explicit CorrSummary(std::size_t n);

    void update(const FeatureVector& x);

    std::size_t dimension() const { return n_; }
    std::size_t count() const { return count_; }
    const std::vector<double>& residual_squares() const { return res_sq_; }

    // Pairwise distances 1 - corr(i,j), in [0, 2]. Columns that never moved
    // correlate with nothing: distance 1 to every other column. Needs at
    // least two observed rows.
    std::vector<std::vector<double>> distance_matrix() const;

private:
    std::size_t n_;
    std::size_t count_ = 0;
    std::vector<double> sum_;     // per column
    std::vector<double> res_sum_; // per column, residuals vs running mean
    std::vector<double> res_sq_;
    std::vector<double> cross_; // n x n, sum of residual outer products
};

// Groups feature indices by correlation-distance closeness: single-linkage
// clustering over the distance matrix, then the dendrogram is cut top-down
// so no group exceeds max_size. Groups come back ordered by their smallest
// member, members ascending. Deterministic for a given matrix.
std::vector<std::vector<std::size_t>> cluster_features(
    const std::vector<std::vector<double>>& dist, std::size_t max_size);

// A fixed partition of the n feature columns into correlated groups, used
// to route slices of each feature vector to per-group detectors.
struct FeatureMap {
    std::size_t n = 0;
    std::size_t m = 0; // size cap the groups were built under
    std::vector<std::vector<std::size_t>> groups;

    static FeatureMap build(const CorrSummary& summary, std::size_t max_size);

    std::vector<std::vector<double>> apply(const FeatureVector& x) const;
    void apply_into(const FeatureVector& x,
                    std::vector<std::vector<double>>& out) const;

    nlohmann::json to_json() const;
    static FeatureMap from_json(const nlohmann::json& j);

    // Every index in [0, n) must appear exactly once across groups and no
    // group may be empty or exceed m.
    void validate() const;
};

} // namespace kitsune
