#pragma once

#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kitsune/packet.hpp"

namespace kitsune {

// Sequential reader for classic pcap capture files (linktype 1, Ethernet).
// Accepts the microsecond and nanosecond magics in either byte order.
// Truncated trailing records stop the stream and are counted rather than
// raised; records too short to carry an Ethernet header are skipped and
// counted as unparsable.
class PcapReader {
public:
    explicit PcapReader(const std::string& path); // throws FormatError
    ~PcapReader();

    PcapReader(const PcapReader&) = delete;
    PcapReader& operator=(const PcapReader&) = delete;

    // Next packet in file order, or nullopt at end of file.
    std::optional<PacketMeta> next();

    std::size_t records_read() const { return records_read_; }
    std::size_t truncated_records() const { return truncated_records_; }
    std::size_t skipped_records() const { return skipped_records_; }

private:
    std::FILE* file_ = nullptr;
    bool swap_ = false;
    double frac_unit_ = 1e-6; // 1e-9 for nanosecond captures
    std::size_t records_read_ = 0;
    std::size_t truncated_records_ = 0;
    std::size_t skipped_records_ = 0;
    std::vector<std::uint8_t> buffer_;
};

} // namespace kitsune
