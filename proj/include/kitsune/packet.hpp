#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace kitsune {

using MacAddress = std::array<std::uint8_t, 6>;

std::string mac_to_string(const MacAddress& mac);

// Per-packet metadata consumed by the feature extractor. IP and transport
// fields are present only for the layers that parsed cleanly.
struct PacketMeta {
    double timestamp = 0.0;      // seconds since epoch
    std::uint32_t frame_len = 0; // original length on the wire
    MacAddress src_mac{};
    MacAddress dst_mac{};
    std::optional<std::string> src_ip; // dotted quad or IPv6 canonical
    std::optional<std::string> dst_ip;
    std::optional<std::uint8_t> ip_proto;
    std::optional<std::uint16_t> src_port;
    std::optional<std::uint16_t> dst_port;

    bool operator==(const PacketMeta& other) const = default;
};

// Parses one Ethernet frame. Handles IPv4, IPv6 (fixed header only) and
// 802.1Q tags; TCP/UDP ports are taken from the transport header. A frame
// that is shorter than a declared inner header degrades to the deepest layer
// that parsed fully. Throws FormatError if fewer than 14 octets are given.
PacketMeta parse_frame(std::span<const std::uint8_t> frame, double timestamp,
                       std::uint32_t orig_len);

} // namespace kitsune
