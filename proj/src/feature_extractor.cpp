#include "kitsune/feature_extractor.hpp"

#include <algorithm>
#include <utility>

namespace kitsune {

StatRegistry::StatRegistry(ExtractorConfig config)
    : lambdas_(std::move(config.lambdas)), evict_epsilon_(config.evict_epsilon) {}

StatRegistry::SoloEntry& StatRegistry::solo_entry(
    std::unordered_map<std::string, SoloEntry>& map, const std::string& key) {
    auto it = map.find(key);
    if (it == map.end()) {
        SoloEntry entry;
        entry.stats.reserve(lambdas_.size());
        for (double lambda : lambdas_) entry.stats.emplace_back(lambda);
        it = map.emplace(key, std::move(entry)).first;
    }
    return it->second;
}

StatRegistry::PairEntry& StatRegistry::pair_entry(
    std::unordered_map<std::string, PairEntry>& map, const std::string& key) {
    auto it = map.find(key);
    if (it == map.end()) {
        PairEntry entry;
        entry.forward.reserve(lambdas_.size());
        entry.reverse.reserve(lambdas_.size());
        for (double lambda : lambdas_) {
            entry.forward.emplace_back(lambda);
            entry.reverse.emplace_back(lambda);
        }
        entry.links.resize(lambdas_.size());
        it = map.emplace(key, std::move(entry)).first;
    }
    return it->second;
}

void StatRegistry::update_solo(std::unordered_map<std::string, SoloEntry>& map,
                               const std::string& key, double size, double t,
                               FeatureVector& out, int mean_off, int std_off,
                               int weight_off) {
    SoloEntry& entry = solo_entry(map, key);
    for (std::size_t i = 0; i < lambdas_.size(); ++i) {
        DampedStat& stat = entry.stats[i];
        stat.insert(size, t);
        const std::size_t base = i * kFeaturesPerWindow;
        const Stats1D s = stat.stats();
        out[base + mean_off] = s.mean;
        out[base + std_off] = s.std_dev;
        out[base + weight_off] = s.weight;
    }
}

void StatRegistry::update_pair(std::unordered_map<std::string, PairEntry>& map,
                               const std::string& a, const std::string& b,
                               double size, double t, FeatureVector& out,
                               int mean_off, int std_off, int weight_off,
                               int twodir_off) {
    const bool is_forward = a <= b;
    const std::string key = is_forward ? a + "|" + b : b + "|" + a;
    PairEntry& entry = pair_entry(map, key);
    for (std::size_t i = 0; i < lambdas_.size(); ++i) {
        DampedStat& inserted = is_forward ? entry.forward[i] : entry.reverse[i];
        DampedStat& other = is_forward ? entry.reverse[i] : entry.forward[i];
        entry.links[i].insert(inserted, other, size, t);
        const std::size_t base = i * kFeaturesPerWindow;
        const Stats1D s1 = inserted.stats();
        out[base + mean_off] = s1.mean;
        out[base + std_off] = s1.std_dev;
        out[base + weight_off] = s1.weight;
        const Stats2D s2 = two_stream_stats(inserted, other, entry.links[i]);
        out[base + twodir_off + 0] = s2.magnitude;
        out[base + twodir_off + 1] = s2.radius;
        out[base + twodir_off + 2] = s2.covariance;
        out[base + twodir_off + 3] = s2.correlation;
    }
}

void StatRegistry::update_jitter(const std::string& key, double t,
                                 FeatureVector& out) {
    auto it = jitter_.find(key);
    if (it == jitter_.end()) {
        JitterEntry entry;
        entry.stats.reserve(lambdas_.size());
        for (double lambda : lambdas_) entry.stats.emplace_back(lambda);
        it = jitter_.emplace(key, std::move(entry)).first;
    }
    JitterEntry& entry = it->second;
    if (!entry.has_prev) {
        // No predecessor, no delay to record; the stream starts next packet.
        entry.prev_time = t;
        entry.has_prev = true;
        return;
    }
    const double delay = std::max(0.0, t - entry.prev_time);
    entry.prev_time = t;
    for (std::size_t i = 0; i < lambdas_.size(); ++i) {
        DampedStat& stat = entry.stats[i];
        stat.insert(delay, t);
        const std::size_t base = i * kFeaturesPerWindow;
        const Stats1D s = stat.stats();
        out[base + feature_offset::channel_jitter_weight] = s.weight;
        out[base + feature_offset::channel_jitter_mean] = s.mean;
        out[base + feature_offset::channel_jitter_std] = s.std_dev;
    }
}

FeatureVector StatRegistry::extract(const PacketMeta& meta) {
    FeatureVector out(feature_count(), 0.0);
    const double t = meta.timestamp;
    const double size = static_cast<double>(meta.frame_len);
    last_time_ = std::max(last_time_, t);

    const std::string src_mac = mac_to_string(meta.src_mac);
    // Link-only frames have no network identity; the source MAC doubles as
    // the host key so the stream still tracks that sender's traffic.
    const std::string host_ip = meta.src_ip ? *meta.src_ip : src_mac;
    update_solo(src_mac_ip_, src_mac + "|" + host_ip, size, t, out,
                feature_offset::src_mac_ip_size_mean,
                feature_offset::src_mac_ip_size_std,
                feature_offset::src_mac_ip_weight);

    if (!meta.src_ip || !meta.dst_ip) return out;

    update_solo(src_ip_, *meta.src_ip, size, t, out,
                feature_offset::src_ip_size_mean, feature_offset::src_ip_size_std,
                feature_offset::src_ip_weight);

    update_pair(channel_, *meta.src_ip, *meta.dst_ip, size, t, out,
                feature_offset::channel_size_mean, feature_offset::channel_size_std,
                feature_offset::channel_weight,
                feature_offset::channel_size_magnitude);

    update_jitter(*meta.src_ip + ">" + *meta.dst_ip, t, out);

    if (meta.src_port && meta.dst_port) {
        const std::string src_ep = *meta.src_ip + ":" + std::to_string(*meta.src_port);
        const std::string dst_ep = *meta.dst_ip + ":" + std::to_string(*meta.dst_port);
        update_pair(socket_, src_ep, dst_ep, size, t, out,
                    feature_offset::socket_size_mean,
                    feature_offset::socket_size_std, feature_offset::socket_weight,
                    feature_offset::socket_size_magnitude);
    }
    return out;
}

std::size_t StatRegistry::evict_stale() { return evict_stale(last_time_); }

std::size_t StatRegistry::evict_stale(double now) {
    std::size_t evicted = 0;
    auto dead = [&](const DampedStat& s) {
        return !s.empty() && s.decayed_weight(now) < evict_epsilon_;
    };

    auto sweep_solo = [&](std::unordered_map<std::string, SoloEntry>& map) {
        for (auto it = map.begin(); it != map.end();) {
            bool alive = false;
            for (DampedStat& s : it->second.stats) {
                if (dead(s)) {
                    s.reset();
                    ++evicted;
                }
                alive = alive || !s.empty();
            }
            it = alive ? std::next(it) : map.erase(it);
        }
    };
    sweep_solo(src_mac_ip_);
    sweep_solo(src_ip_);

    auto sweep_pair = [&](std::unordered_map<std::string, PairEntry>& map) {
        for (auto it = map.begin(); it != map.end();) {
            PairEntry& entry = it->second;
            bool alive = false;
            for (std::size_t i = 0; i < entry.forward.size(); ++i) {
                bool reset_link = false;
                if (dead(entry.forward[i])) {
                    entry.forward[i].reset();
                    reset_link = true;
                    ++evicted;
                }
                if (dead(entry.reverse[i])) {
                    entry.reverse[i].reset();
                    reset_link = true;
                    ++evicted;
                }
                // A residual correlation is meaningless once either of its
                // streams restarted from scratch.
                if (reset_link) entry.links[i].reset();
                alive = alive || !entry.forward[i].empty() || !entry.reverse[i].empty();
            }
            it = alive ? std::next(it) : map.erase(it);
        }
    };
    sweep_pair(channel_);
    sweep_pair(socket_);

    const double slowest = *std::min_element(lambdas_.begin(), lambdas_.end());
    for (auto it = jitter_.begin(); it != jitter_.end();) {
        JitterEntry& entry = it->second;
        bool alive = false;
        for (DampedStat& s : entry.stats) {
            if (dead(s)) {
                s.reset();
                ++evicted;
            }
            alive = alive || !s.empty();
        }
        // An entry holding only a predecessor timestamp is still waiting for
        // its first delay sample; keep it as long as a unit weight observed
        // then would survive in the slowest window.
        if (!alive && entry.has_prev &&
            decay_factor(slowest, now - entry.prev_time) >= evict_epsilon_)
            alive = true;
        it = alive ? std::next(it) : jitter_.erase(it);
    }
    return evicted;
}

std::size_t StatRegistry::entry_count() const {
    return src_mac_ip_.size() + src_ip_.size() + channel_.size() + socket_.size() +
           jitter_.size();
}

std::size_t StatRegistry::memory_estimate() const {
    std::size_t bytes = sizeof(*this);
    auto key_bytes = [](const std::string& k) {
        return sizeof(std::string) + k.capacity();
    };
    for (const auto& [key, entry] : src_mac_ip_)
        bytes += key_bytes(key) + sizeof(entry) + entry.stats.capacity() * sizeof(DampedStat);
    for (const auto& [key, entry] : src_ip_)
        bytes += key_bytes(key) + sizeof(entry) + entry.stats.capacity() * sizeof(DampedStat);
    for (const auto& map : {&channel_, &socket_}) {
        for (const auto& [key, entry] : *map) {
            bytes += key_bytes(key) + sizeof(entry);
            bytes += (entry.forward.capacity() + entry.reverse.capacity()) * sizeof(DampedStat);
            bytes += entry.links.capacity() * sizeof(StatLink);
        }
    }
    for (const auto& [key, entry] : jitter_)
        bytes += key_bytes(key) + sizeof(entry) + entry.stats.capacity() * sizeof(DampedStat);
    return bytes;
}

} // namespace kitsune
