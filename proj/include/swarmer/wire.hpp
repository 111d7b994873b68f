#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "swarmer/protocol.hpp"

namespace swarmer {

class WireError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Header: kind (1) | sender fid (4) | sender swarm (4) | msg id (8), then the
// kind-specific body. Little-endian throughout.
inline constexpr std::size_t kWireHeaderSize = 17;

std::size_t body_size(MessageKind kind);
std::size_t encoded_size(const Message& msg);

std::vector<std::uint8_t> encode(const Message& msg);
Message decode(std::span<const std::uint8_t> bytes);

}  // namespace swarmer
