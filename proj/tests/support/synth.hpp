#pragma once

// Builders for test inputs: raw frames, capture files, and synthetic
// feature streams with a known correlation structure.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "kitsune/kitnet.hpp" // uniform53

namespace synth {

using Bytes = std::vector<std::uint8_t>;

inline void put16(Bytes& b, std::uint16_t v) {
    b.push_back(static_cast<std::uint8_t>(v >> 8));
    b.push_back(static_cast<std::uint8_t>(v & 0xff));
}

inline void put32le(Bytes& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::array<std::uint8_t, 4> ip4(const std::string& dotted) {
    std::array<std::uint8_t, 4> out{};
    unsigned a, b, c, d;
    std::sscanf(dotted.c_str(), "%u.%u.%u.%u", &a, &b, &c, &d);
    out = {static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b),
           static_cast<std::uint8_t>(c), static_cast<std::uint8_t>(d)};
    return out;
}

inline Bytes udp_payload(std::uint16_t sport, std::uint16_t dport,
                         std::size_t data_len) {
    Bytes b;
    put16(b, sport);
    put16(b, dport);
    put16(b, static_cast<std::uint16_t>(8 + data_len));
    put16(b, 0); // checksum unused
    b.insert(b.end(), data_len, 0xab);
    return b;
}

inline Bytes tcp_payload(std::uint16_t sport, std::uint16_t dport,
                         std::size_t data_len) {
    Bytes b;
    put16(b, sport);
    put16(b, dport);
    for (int i = 0; i < 8; ++i) b.push_back(0); // seq + ack
    b.push_back(0x50);                          // data offset 5 words
    b.push_back(0x18);                          // PSH|ACK
    put16(b, 0xffff);                           // window
    put16(b, 0);                                // checksum unused
    put16(b, 0);                                // urgent
    b.insert(b.end(), data_len, 0xcd);
    return b;
}

inline Bytes ipv4_packet(const std::string& src, const std::string& dst,
                         std::uint8_t proto, const Bytes& payload) {
    Bytes b;
    b.push_back(0x45); // version 4, IHL 5
    b.push_back(0);
    put16(b, static_cast<std::uint16_t>(20 + payload.size()));
    put16(b, 0); // id
    put16(b, 0); // flags/frag
    b.push_back(64);
    b.push_back(proto);
    put16(b, 0); // header checksum unused by the parser
    const auto s = ip4(src), d = ip4(dst);
    b.insert(b.end(), s.begin(), s.end());
    b.insert(b.end(), d.begin(), d.end());
    b.insert(b.end(), payload.begin(), payload.end());
    return b;
}

inline Bytes eth_frame(const std::array<std::uint8_t, 6>& src_mac,
                       const std::array<std::uint8_t, 6>& dst_mac,
                       std::uint16_t ethertype, const Bytes& payload) {
    Bytes b;
    b.insert(b.end(), dst_mac.begin(), dst_mac.end());
    b.insert(b.end(), src_mac.begin(), src_mac.end());
    put16(b, ethertype);
    b.insert(b.end(), payload.begin(), payload.end());
    return b;
}

inline std::array<std::uint8_t, 6> mac(std::uint8_t last) {
    return {0x02, 0x00, 0x00, 0x00, 0x00, last};
}

inline Bytes udp_frame(std::uint8_t src_host, const std::string& src_ip,
                       const std::string& dst_ip, std::uint16_t sport,
                       std::uint16_t dport, std::size_t data_len) {
    return eth_frame(mac(src_host), mac(0xff), 0x0800,
                     ipv4_packet(src_ip, dst_ip, 17,
                                 udp_payload(sport, dport, data_len)));
}

struct TimedFrame {
    Bytes frame;
    double time = 0.0;
    // When set, the stored length is truncated to this many bytes while the
    // original length field keeps the full size.
    std::size_t snap = SIZE_MAX;
};

// Classic capture format, microsecond clock unless ns is set.
inline void write_pcap(const std::string& path, const std::vector<TimedFrame>& frames,
                       bool ns = false, bool swapped = false) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    Bytes out;
    auto word = [&](std::uint32_t v) {
        if (swapped) v = __builtin_bswap32(v);
        put32le(out, v);
    };
    word(ns ? 0xa1b23c4d : 0xa1b2c3d4);
    if (swapped) {
        put16(out, 0x0200); // major 2, byte-flipped
        put16(out, 0x0400);
    } else {
        out.push_back(2);
        out.push_back(0);
        out.push_back(4);
        out.push_back(0);
    }
    word(0); // thiszone
    word(0); // sigfigs
    word(65535);
    word(1); // ethernet
    const double unit = ns ? 1e9 : 1e6;
    for (const TimedFrame& tf : frames) {
        const auto sec = static_cast<std::uint32_t>(tf.time);
        const auto frac = static_cast<std::uint32_t>(
            std::llround((tf.time - static_cast<double>(sec)) * unit));
        const std::size_t incl = std::min(tf.frame.size(), tf.snap);
        word(sec);
        word(frac);
        word(static_cast<std::uint32_t>(incl));
        word(static_cast<std::uint32_t>(tf.frame.size()));
        out.insert(out.end(), tf.frame.begin(), tf.frame.begin() + incl);
    }
    std::fwrite(out.data(), 1, out.size(), f);
    std::fclose(f);
}

inline double gauss(std::mt19937_64& g) {
    // Box-Muller on the same uniform the production code uses; u1 is kept
    // strictly positive so the log stays finite.
    const double u1 =
        (static_cast<double>(g() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = kitsune::uniform53(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// Feature rows with block-correlated structure: the columns of one latent
// group share a per-row latent draw, so they correlate strongly with each
// other and only via the mixture component with anything else.
class MixtureGen {
public:
    MixtureGen(std::size_t n, std::size_t n_groups, std::size_t n_components,
               std::uint64_t seed)
        : n_(n), rng_(seed) {
        for (std::size_t i = 0; i < n; ++i) group_of_.push_back(i % n_groups);
        means_.resize(n_components, std::vector<double>(n_groups));
        for (auto& comp : means_)
            for (double& m : comp) m = 10.0 * kitsune::uniform53(rng_);
        // Per-group component-mean spread feeds the marginal sigma below.
        mean_var_.assign(n_groups, 0.0);
        for (std::size_t gr = 0; gr < n_groups; ++gr) {
            double s = 0.0, ss = 0.0;
            for (const auto& comp : means_) {
                s += comp[gr];
                ss += comp[gr] * comp[gr];
            }
            const double k = static_cast<double>(n_components);
            mean_var_[gr] = ss / k - (s / k) * (s / k);
        }
    }

    std::vector<double> row() {
        const std::size_t comp = rng_() % means_.size();
        std::vector<double> latent(mean_var_.size());
        for (std::size_t gr = 0; gr < latent.size(); ++gr)
            latent[gr] = means_[comp][gr] + gauss(rng_);
        std::vector<double> x(n_);
        for (std::size_t i = 0; i < n_; ++i)
            x[i] = latent[group_of_[i]] + 0.1 * gauss(rng_);
        return x;
    }

    // Marginal standard deviation of any column in the group: component
    // spread plus latent plus column noise.
    double marginal_sigma(std::size_t group) const {
        return std::sqrt(mean_var_[group] + 1.0 + 0.01);
    }

    // A row with every column of one latent group pushed the given number
    // of marginal sigmas away from normal behaviour.
    std::vector<double> anomalous_row(std::size_t group, double sigmas) {
        std::vector<double> x = row();
        const double shift = sigmas * marginal_sigma(group);
        for (std::size_t i = 0; i < n_; ++i)
            if (group_of_[i] == group) x[i] += shift;
        return x;
    }

    std::size_t group_of(std::size_t feature) const { return group_of_[feature]; }

private:
    std::size_t n_;
    std::mt19937_64 rng_;
    std::vector<std::size_t> group_of_;
    std::vector<std::vector<double>> means_;
    std::vector<double> mean_var_;
};

} // namespace synth
