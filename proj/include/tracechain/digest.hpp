#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "tracechain/bytes.hpp"

namespace tracechain {

/// A 32-byte SHA-256 digest. Rendered as 64 lowercase hex chars.
class Digest32 {
public:
    static constexpr std::size_t size = 32;

    Digest32() = default; // all-zero

    static Digest32 from_bytes(std::span<const std::uint8_t> bytes);
    static Digest32 from_hex(std::string_view hex);

    std::string hex() const { return to_hex(bytes_); }
    std::span<const std::uint8_t, size> bytes() const { return bytes_; }
    const std::uint8_t* data() const { return bytes_.data(); }
    std::uint8_t* data() { return bytes_.data(); }
    bool is_zero() const;

    auto operator<=>(const Digest32&) const = default;

private:
    std::array<std::uint8_t, size> bytes_{};
};

/// SHA-256 of the exact input bytes.
Digest32 sha256(std::span<const std::uint8_t> bytes);
Digest32 sha256(std::string_view text);

/// Idempotent libsodium init; throws Errc::entropy_unavailable on failure.
void ensure_sodium();

} // namespace tracechain
