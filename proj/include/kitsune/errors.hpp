#pragma once

#include <stdexcept>
#include <string>

namespace kitsune {

// Malformed or unreadable input data (bad pcap magic, ragged CSV rows,
// model/feature dimension mismatches). The CLI maps this to exit code 2.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration or command usage. The CLI maps this to exit code 1.
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace kitsune
