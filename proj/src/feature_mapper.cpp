#include "kitsune/feature_mapper.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kitsune/errors.hpp"

namespace kitsune {

CorrSummary::CorrSummary(std::size_t n)
    : n_(n), sum_(n, 0.0), res_sum_(n, 0.0), res_sq_(n, 0.0), cross_(n * n, 0.0) {}

void CorrSummary::update(const FeatureVector& x) {
    if (x.size() != n_) throw FormatError("feature dimension mismatch");
    ++count_;
    std::vector<double> res(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        sum_[i] += x[i];
        res[i] = x[i] - sum_[i] / static_cast<double>(count_);
        res_sum_[i] += res[i];
        res_sq_[i] += res[i] * res[i];
    }
    for (std::size_t i = 0; i < n_; ++i) {
        const double ri = res[i];
        double* row = cross_.data() + i * n_;
        for (std::size_t j = 0; j < n_; ++j) row[j] += ri * res[j];
    }
}

std::vector<std::vector<double>> CorrSummary::distance_matrix() const {
    if (count_ < 2)
        throw std::logic_error("correlation distances need at least two rows");
    std::vector<std::vector<double>> d(n_, std::vector<double>(n_, 0.0));
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = i + 1; j < n_; ++j) {
            const double denom = std::sqrt(res_sq_[i]) * std::sqrt(res_sq_[j]);
            double dist = 1.0;
            if (denom > 0.0)
                dist = std::clamp(1.0 - cross_[i * n_ + j] / denom, 0.0, 2.0);
            d[i][j] = dist;
            d[j][i] = dist;
        }
    }
    return d;
}

std::vector<std::vector<std::size_t>> cluster_features(
    const std::vector<std::vector<double>>& dist, std::size_t max_size) {
    const std::size_t n = dist.size();
    if (max_size < 1) throw std::logic_error("group size cap must be positive");
    if (n == 0) return {};

    struct Node {
        int left = -1;
        int right = -1;
        std::size_t size = 1;
        std::size_t min_member = 0;
        double height = 0.0;
    };
    std::vector<Node> nodes(2 * n - 1);
    for (std::size_t i = 0; i < n; ++i) nodes[i].min_member = i;

    // Cluster-to-cluster distances, indexed by node id. Single linkage: a
    // merged cluster sits at the min of its halves' distances.
    std::vector<std::vector<double>> cd(2 * n - 1,
                                        std::vector<double>(2 * n - 1, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cd[i][j] = dist[i][j];

    std::vector<std::size_t> active(n);
    for (std::size_t i = 0; i < n; ++i) active[i] = i;

    std::size_t next_id = n;
    while (active.size() > 1) {
        std::size_t best_a = 0, best_b = 1;
        double best_d = 0.0;
        std::size_t best_lo = 0, best_hi = 0;
        bool have = false;
        for (std::size_t ai = 0; ai < active.size(); ++ai) {
            for (std::size_t bi = ai + 1; bi < active.size(); ++bi) {
                const std::size_t a = active[ai], b = active[bi];
                const double d = cd[a][b];
                auto [lo, hi] = std::minmax(nodes[a].min_member, nodes[b].min_member);
                if (!have || d < best_d ||
                    (d == best_d &&
                     std::pair(lo, hi) < std::pair(best_lo, best_hi))) {
                    have = true;
                    best_d = d;
                    best_lo = lo;
                    best_hi = hi;
                    best_a = ai;
                    best_b = bi;
                }
            }
        }
        const std::size_t a = active[best_a], b = active[best_b];
        Node& merged = nodes[next_id];
        merged.left = static_cast<int>(a);
        merged.right = static_cast<int>(b);
        merged.size = nodes[a].size + nodes[b].size;
        merged.min_member = std::min(nodes[a].min_member, nodes[b].min_member);
        merged.height = best_d;
        for (std::size_t x : active) {
            if (x == a || x == b) continue;
            const double d = std::min(cd[a][x], cd[b][x]);
            cd[next_id][x] = d;
            cd[x][next_id] = d;
        }
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_a));
        active.push_back(next_id);
        ++next_id;
    }

    // Walk down from the root, emitting the first subtree on each path that
    // fits under the cap. Leaves always fit, so this terminates.
    std::vector<std::vector<std::size_t>> groups;
    std::vector<std::size_t> walk{active.front()};
    while (!walk.empty()) {
        const std::size_t id = walk.back();
        walk.pop_back();
        const Node& node = nodes[id];
        if (node.size <= max_size) {
            std::vector<std::size_t> leaves;
            std::vector<std::size_t> stack{id};
            while (!stack.empty()) {
                const std::size_t cur = stack.back();
                stack.pop_back();
                if (nodes[cur].left < 0) {
                    leaves.push_back(cur);
                } else {
                    stack.push_back(static_cast<std::size_t>(nodes[cur].left));
                    stack.push_back(static_cast<std::size_t>(nodes[cur].right));
                }
            }
            std::sort(leaves.begin(), leaves.end());
            groups.push_back(std::move(leaves));
        } else {
            walk.push_back(static_cast<std::size_t>(node.left));
            walk.push_back(static_cast<std::size_t>(node.right));
        }
    }
    std::sort(groups.begin(), groups.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return groups;
}

FeatureMap FeatureMap::build(const CorrSummary& summary, std::size_t max_size) {
    FeatureMap map;
    map.n = summary.dimension();
    map.m = max_size;
    map.groups = cluster_features(summary.distance_matrix(), max_size);
    map.validate();
    return map;
}

void FeatureMap::apply_into(const FeatureVector& x,
                            std::vector<std::vector<double>>& out) const {
    if (x.size() != n) throw FormatError("feature dimension mismatch");
    out.resize(groups.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        out[g].resize(groups[g].size());
        for (std::size_t k = 0; k < groups[g].size(); ++k)
            out[g][k] = x[groups[g][k]];
    }
}

std::vector<std::vector<double>> FeatureMap::apply(const FeatureVector& x) const {
    std::vector<std::vector<double>> out;
    apply_into(x, out);
    return out;
}

nlohmann::json FeatureMap::to_json() const {
    return nlohmann::json{{"n", n}, {"m", m}, {"groups", groups}};
}

FeatureMap FeatureMap::from_json(const nlohmann::json& j) {
    FeatureMap map;
    try {
        map.n = j.at("n").get<std::size_t>();
        map.m = j.at("m").get<std::size_t>();
        map.groups = j.at("groups").get<std::vector<std::vector<std::size_t>>>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad feature map: ") + e.what());
    }
    map.validate();
    return map;
}

void FeatureMap::validate() const {
    if (n == 0 || m == 0) throw FormatError("feature map: empty dimensions");
    std::vector<char> seen(n, 0);
    for (const auto& group : groups) {
        if (group.empty()) throw FormatError("feature map: empty group");
        if (group.size() > m) throw FormatError("feature map: group over cap");
        for (std::size_t idx : group) {
            if (idx >= n) throw FormatError("feature map: index out of range");
            if (seen[idx]) throw FormatError("feature map: duplicate index");
            seen[idx] = 1;
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!seen[i]) throw FormatError("feature map: missing index");
}

} // namespace kitsune
