#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tracechain {

using Bytes = std::vector<std::uint8_t>;

Bytes to_bytes(std::string_view text);
std::string to_string(std::span<const std::uint8_t> bytes);

/// Lowercase hex rendering.
std::string to_hex(std::span<const std::uint8_t> bytes);

/// Strict inverse of to_hex: even length, [0-9a-fA-F] only.
/// Throws Errc::malformed_key on anything else.
Bytes from_hex(std::string_view hex);

} // namespace tracechain
