#include "kitsune/packet.hpp"

#include <arpa/inet.h>

#include <cstdio>

#include "kitsune/errors.hpp"

namespace kitsune {

namespace {

std::uint16_t read_u16_be(std::span<const std::uint8_t> data, std::size_t offset) {
    return static_cast<std::uint16_t>((data[offset] << 8) | data[offset + 1]);
}

std::optional<std::string> ipv4_to_string(std::span<const std::uint8_t> addr) {
    char buf[INET_ADDRSTRLEN];
    if (!inet_ntop(AF_INET, addr.data(), buf, sizeof(buf))) {
        return std::nullopt;
    }
    return std::string(buf);
}

std::optional<std::string> ipv6_to_string(std::span<const std::uint8_t> addr) {
    char buf[INET6_ADDRSTRLEN];
    if (!inet_ntop(AF_INET6, addr.data(), buf, sizeof(buf))) {
        return std::nullopt;
    }
    return std::string(buf);
}

void parse_transport_ports(std::span<const std::uint8_t> transport, PacketMeta& meta) {
    // Source and destination ports are the first two big-endian u16 fields
    // of both TCP and UDP headers.
    if (transport.size() < 4) {
        return;
    }
    meta.src_port = read_u16_be(transport, 0);
    meta.dst_port = read_u16_be(transport, 2);
}

void parse_ipv4(std::span<const std::uint8_t> ip, PacketMeta& meta) {
    if (ip.size() < 20) {
        return;
    }
    const std::size_t header_len = (ip[0] & 0x0F) * 4u;
    if ((ip[0] >> 4) != 4 || header_len < 20) {
        return;
    }
    meta.src_ip = ipv4_to_string(ip.subspan(12, 4));
    meta.dst_ip = ipv4_to_string(ip.subspan(16, 4));
    meta.ip_proto = ip[9];
    if (ip.size() < header_len) {
        return;
    }
    if (*meta.ip_proto == 6 || *meta.ip_proto == 17) {
        parse_transport_ports(ip.subspan(header_len), meta);
    }
}

void parse_ipv6(std::span<const std::uint8_t> ip, PacketMeta& meta) {
    if (ip.size() < 40) {
        return;
    }
    if ((ip[0] >> 4) != 6) {
        return;
    }
    meta.src_ip = ipv6_to_string(ip.subspan(8, 16));
    meta.dst_ip = ipv6_to_string(ip.subspan(24, 16));
    meta.ip_proto = ip[6];
    // Extension headers are not walked; ports only for a direct TCP/UDP
    // next-header.
    if (*meta.ip_proto == 6 || *meta.ip_proto == 17) {
        parse_transport_ports(ip.subspan(40), meta);
    }
}

} // namespace

std::string mac_to_string(const MacAddress& mac) {
    char buf[18];
    std::snprintf(buf, sizeof(buf), "%02x:%02x:%02x:%02x:%02x:%02x", mac[0],
                  mac[1], mac[2], mac[3], mac[4], mac[5]);
    return std::string(buf);
}

PacketMeta parse_frame(std::span<const std::uint8_t> frame, double timestamp,
                       std::uint32_t orig_len) {
    if (frame.size() < 14) {
        throw FormatError("parse_frame: frame shorter than an Ethernet header");
    }
    PacketMeta meta;
    meta.timestamp = timestamp;
    meta.frame_len = orig_len;
    for (std::size_t i = 0; i < 6; ++i) {
        meta.dst_mac[i] = frame[i];
        meta.src_mac[i] = frame[6 + i];
    }
    std::size_t offset = 12;
    std::uint16_t ethertype = read_u16_be(frame, offset);
    offset += 2;
    while (ethertype == 0x8100 && frame.size() >= offset + 4) {
        offset += 2; // VLAN tag control field
        ethertype = read_u16_be(frame, offset);
        offset += 2;
    }
    const auto payload = frame.subspan(offset);
    if (ethertype == 0x0800) {
        parse_ipv4(payload, meta);
    } else if (ethertype == 0x86DD) {
        parse_ipv6(payload, meta);
    }
    return meta;
}

} // namespace kitsune
