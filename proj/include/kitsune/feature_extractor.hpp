#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "kitsune/incremental_stats.hpp"
#include "kitsune/packet.hpp"

namespace kitsune {

using FeatureVector = std::vector<double>;

// Default decay factors, widest window last. Half-lives span roughly 100 ms
// to one minute of traffic history.
inline const std::vector<double> kDefaultLambdas = {5.0, 3.0, 1.0, 0.1, 0.01};

// Layout of one per-window block of the feature vector. The full vector is
// one block per decay factor, in configuration order, so with the default
// five windows the vector has 5 * 23 = 115 columns.
namespace feature_offset {
// Outbound packet size, mean and standard deviation per aggregation.
constexpr int src_mac_ip_size_mean = 0;
constexpr int src_mac_ip_size_std = 1;
constexpr int src_ip_size_mean = 2;
constexpr int src_ip_size_std = 3;
constexpr int channel_size_mean = 4;
constexpr int channel_size_std = 5;
constexpr int socket_size_mean = 6;
constexpr int socket_size_std = 7;
// Two-directional size statistics (outbound stream paired with the
// reverse-direction stream of the same aggregation).
constexpr int channel_size_magnitude = 8;
constexpr int channel_size_radius = 9;
constexpr int channel_size_covariance = 10;
constexpr int channel_size_correlation = 11;
constexpr int socket_size_magnitude = 12;
constexpr int socket_size_radius = 13;
constexpr int socket_size_covariance = 14;
constexpr int socket_size_correlation = 15;
// Outbound packet counts (decayed weights).
constexpr int src_mac_ip_weight = 16;
constexpr int src_ip_weight = 17;
constexpr int channel_weight = 18;
constexpr int socket_weight = 19;
// Inter-arrival delays on the outbound channel.
constexpr int channel_jitter_weight = 20;
constexpr int channel_jitter_mean = 21;
constexpr int channel_jitter_std = 22;
} // namespace feature_offset

constexpr int kOutboundSizeFeatures = 8;
constexpr int kTwoDirectionFeatures = 8;
constexpr int kWeightFeatures = 4;
constexpr int kJitterFeatures = 3;
constexpr int kFeaturesPerWindow =
    kOutboundSizeFeatures + kTwoDirectionFeatures + kWeightFeatures + kJitterFeatures;
static_assert(kFeaturesPerWindow == 23);

constexpr std::array<int, 7> kSocketFeatureOffsets = {
    feature_offset::socket_size_mean,       feature_offset::socket_size_std,
    feature_offset::socket_size_magnitude,  feature_offset::socket_size_radius,
    feature_offset::socket_size_covariance, feature_offset::socket_size_correlation,
    feature_offset::socket_weight};

struct ExtractorConfig {
    std::vector<double> lambdas = kDefaultLambdas;
    double evict_epsilon = 1e-6; // decayed weight below this is dead
};

// Registry of damped statistics keyed by traffic aggregation. One entry per
// key holds the stats for every decay window, so lookups stay amortized
// constant per packet. Single writer: updates must arrive in packet order.
class StatRegistry {
public:
    explicit StatRegistry(ExtractorConfig config = {});

    // Updates every applicable aggregation with the packet and returns the
    // behavioral snapshot. Aggregations the packet does not apply to (no IP
    // layer, no TCP/UDP socket) contribute zeros.
    FeatureVector extract(const PacketMeta& meta);

    // Drops every stream whose weight decayed below epsilon by `now`
    // (defaults to the latest packet time seen). Returns the number of
    // streams evicted; entries whose streams are all dead are erased.
    std::size_t evict_stale();
    std::size_t evict_stale(double now);

    // Approximate resident bytes of the registry contents. Advisory.
    std::size_t memory_estimate() const;

    std::size_t entry_count() const;
    std::size_t feature_count() const { return lambdas_.size() * kFeaturesPerWindow; }
    const std::vector<double>& lambdas() const { return lambdas_; }
    double last_time() const { return last_time_; }

private:
    struct SoloEntry {
        std::vector<DampedStat> stats; // one per window
    };
    struct PairEntry {
        std::vector<DampedStat> forward; // canonical low->high endpoint order
        std::vector<DampedStat> reverse;
        std::vector<StatLink> links;
    };
    struct JitterEntry {
        std::vector<DampedStat> stats;
        double prev_time = 0.0;
        bool has_prev = false;
    };

    SoloEntry& solo_entry(std::unordered_map<std::string, SoloEntry>& map,
                          const std::string& key);
    PairEntry& pair_entry(std::unordered_map<std::string, PairEntry>& map,
                          const std::string& key);

    void update_solo(std::unordered_map<std::string, SoloEntry>& map,
                     const std::string& key, double size, double t,
                     FeatureVector& out, int mean_off, int std_off, int weight_off);
    void update_pair(std::unordered_map<std::string, PairEntry>& map,
                     const std::string& a, const std::string& b, double size,
                     double t, FeatureVector& out, int mean_off, int std_off,
                     int weight_off, int twodir_off);
    void update_jitter(const std::string& key, double t, FeatureVector& out);

    std::vector<double> lambdas_;
    double evict_epsilon_;
    double last_time_ = 0.0;
    std::unordered_map<std::string, SoloEntry> src_mac_ip_;
    std::unordered_map<std::string, SoloEntry> src_ip_;
    std::unordered_map<std::string, PairEntry> channel_;
    std::unordered_map<std::string, PairEntry> socket_;
    std::unordered_map<std::string, JitterEntry> jitter_;
};

} // namespace kitsune
