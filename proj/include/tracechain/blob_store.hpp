#pragma once

#include <filesystem>
#include <optional>
#include <span>

#include "tracechain/bytes.hpp"
#include "tracechain/digest.hpp"

namespace tracechain {

/// A blob's address is the SHA-256 of its bytes.
using BlobAddress = Digest32;

/// Local content-addressed store: `root/<2 hex>/<62 hex>`, objects stored
/// verbatim, writes atomic (temp + rename), no deletion API.
class BlobStore {
public:
    explicit BlobStore(std::filesystem::path root);

    const std::filesystem::path& root() const { return root_; }

    /// Idempotent: re-putting identical bytes returns the same address and
    /// stores one object.
    BlobAddress put(std::span<const std::uint8_t> bytes);

    /// Fetch and re-verify SHA-256(bytes) == address before returning.
    /// Throws Errc::not_found or Errc::integrity_failure.
    Bytes get(const BlobAddress& address) const;

    /// Fetch without the digest check; nullopt when absent or unreadable.
    /// For verifiers that turn tampering into verdicts rather than errors.
    std::optional<Bytes> read_raw(const BlobAddress& address) const;

    bool contains(const BlobAddress& address) const;
    std::filesystem::path path_for(const BlobAddress& address) const;

private:
    std::filesystem::path root_;
};

} // namespace tracechain
