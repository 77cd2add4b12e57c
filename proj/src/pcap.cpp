#include "kitsune/pcap.hpp"

#include <cstring>

#include "kitsune/errors.hpp"

namespace kitsune {

namespace {

constexpr std::uint32_t kMagicMicros = 0xa1b2c3d4;
constexpr std::uint32_t kMagicMicrosSwapped = 0xd4c3b2a1;
constexpr std::uint32_t kMagicNanos = 0xa1b23c4d;
constexpr std::uint32_t kMagicNanosSwapped = 0x4d3cb2a1;

std::uint32_t swap32(std::uint32_t v) {
    return ((v & 0x000000FFu) << 24) | ((v & 0x0000FF00u) << 8) |
           ((v & 0x00FF0000u) >> 8) | ((v & 0xFF000000u) >> 24);
}

} // namespace

PcapReader::PcapReader(const std::string& path) {
    file_ = std::fopen(path.c_str(), "rb");
    if (!file_) {
        throw FormatError("pcap: cannot open " + path);
    }
    std::uint8_t header[24];
    if (std::fread(header, 1, sizeof(header), file_) != sizeof(header)) {
        std::fclose(file_);
        file_ = nullptr;
        throw FormatError("pcap: file too short for a global header: " + path);
    }
    std::uint32_t magic;
    std::memcpy(&magic, header, 4);
    switch (magic) {
    case kMagicMicros:
        break;
    case kMagicNanos:
        frac_unit_ = 1e-9;
        break;
    case kMagicMicrosSwapped:
        swap_ = true;
        break;
    case kMagicNanosSwapped:
        swap_ = true;
        frac_unit_ = 1e-9;
        break;
    default:
        std::fclose(file_);
        file_ = nullptr;
        throw FormatError("pcap: bad magic number in " + path);
    }
    std::uint32_t linktype;
    std::memcpy(&linktype, header + 20, 4);
    if (swap_) {
        linktype = swap32(linktype);
    }
    if (linktype != 1) {
        std::fclose(file_);
        file_ = nullptr;
        throw FormatError("pcap: linktype " + std::to_string(linktype) +
                          " is not Ethernet");
    }
}

PcapReader::~PcapReader() {
    if (file_) {
        std::fclose(file_);
    }
}

std::optional<PacketMeta> PcapReader::next() {
    while (file_) {
        std::uint8_t header[16];
        const std::size_t got = std::fread(header, 1, sizeof(header), file_);
        if (got == 0) {
            return std::nullopt; // clean end of file
        }
        if (got != sizeof(header)) {
            ++truncated_records_;
            return std::nullopt;
        }
        std::uint32_t fields[4];
        std::memcpy(fields, header, sizeof(header));
        if (swap_) {
            for (auto& f : fields) {
                f = swap32(f);
            }
        }
        const std::uint32_t incl_len = fields[2];
        const std::uint32_t orig_len = fields[3];
        buffer_.resize(incl_len);
        if (incl_len > 0 &&
            std::fread(buffer_.data(), 1, incl_len, file_) != incl_len) {
            ++truncated_records_;
            return std::nullopt;
        }
        ++records_read_;
        const double timestamp =
            static_cast<double>(fields[0]) + static_cast<double>(fields[1]) * frac_unit_;
        if (incl_len < 14) {
            ++skipped_records_;
            continue; // not even an Ethernet header; nothing to report
        }
        return parse_frame(std::span<const std::uint8_t>(buffer_), timestamp,
                           orig_len);
    }
    return std::nullopt;
}

} // namespace kitsune
