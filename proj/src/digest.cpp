#include "tracechain/digest.hpp"

#include <algorithm>

#include <sodium.h>

#include "tracechain/errors.hpp"

namespace tracechain {

void ensure_sodium() {
    if (sodium_init() < 0) {
        raise(Errc::entropy_unavailable, "libsodium initialization failed");
    }
}

Digest32 Digest32::from_bytes(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != size) {
        raise(Errc::bad_length, "digest must be exactly 32 bytes");
    }
    Digest32 d;
    std::copy(bytes.begin(), bytes.end(), d.bytes_.begin());
    return d;
}

Digest32 Digest32::from_hex(std::string_view hex) {
    if (hex.size() != size * 2) {
        raise(Errc::bad_length, "digest hex must be exactly 64 chars");
    }
    return from_bytes(tracechain::from_hex(hex));
}

bool Digest32::is_zero() const {
    return std::all_of(bytes_.begin(), bytes_.end(), [](std::uint8_t b) { return b == 0; });
}

Digest32 sha256(std::span<const std::uint8_t> bytes) {
    ensure_sodium();
    Digest32 out;
    crypto_hash_sha256(out.data(), bytes.data(), bytes.size());
    return out;
}

Digest32 sha256(std::string_view text) {
    return sha256(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

} // namespace tracechain
