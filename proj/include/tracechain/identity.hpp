#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tracechain/bytes.hpp"
#include "tracechain/digest.hpp"

namespace tracechain {

using PublicKey = std::array<std::uint8_t, 32>;
using SecretSeed = std::array<std::uint8_t, 32>; // Ed25519 seed (RFC 8032 private key)
using Signature = std::array<std::uint8_t, 64>;

/// SHA-256 of the Ed25519 public key; the stable identity handle.
class IdentityId {
public:
    IdentityId() = default;
    explicit IdentityId(Digest32 digest) : digest_(digest) {}

    static IdentityId of_key(const PublicKey& key);
    static IdentityId from_hex(std::string_view hex);

    std::string hex() const { return digest_.hex(); }
    const Digest32& digest() const { return digest_; }

    auto operator<=>(const IdentityId&) const = default;

private:
    Digest32 digest_;
};

struct KeyPair {
    SecretSeed seed{};
    PublicKey public_key{};
    IdentityId id;
};

/// Fresh Ed25519 key pair. Throws Errc::entropy_unavailable if the CSPRNG
/// cannot be initialized.
KeyPair keygen();

/// Rebuild the public half (and id) from a stored seed.
KeyPair keypair_from_seed(const SecretSeed& seed);

/// Detached Ed25519 signature; deterministic for a given (seed, bytes).
Signature sign_bytes(const SecretSeed& seed, std::span<const std::uint8_t> bytes);
bool verify_bytes(const PublicKey& key, std::span<const std::uint8_t> bytes, const Signature& sig);

// ---------------------------------------------------------------------------
// Profiles and attestations (local stand-in for the uPort layer)

struct IdentityProfile {
    IdentityId id;
    PublicKey public_key{};
    std::map<std::string, std::string> info; // must contain a non-empty "name"
    Signature self_signature{};
};

Bytes canonicalize_profile(const IdentityProfile& profile, bool include_signature);
IdentityProfile parse_profile(std::span<const std::uint8_t> bytes);

/// Sign the canonical unsigned profile bytes with the owner's seed.
IdentityProfile finalize_profile(IdentityProfile profile, const SecretSeed& seed);

/// id == SHA-256(public_key), self-signature verifies, name present.
bool profile_is_valid(const IdentityProfile& profile);

struct Attestation {
    IdentityId subject;
    IdentityId attestor;
    std::string statement;
    Signature signature{};
};

Bytes canonicalize_attestation(const Attestation& att, bool include_signature);
Attestation parse_attestation(std::span<const std::uint8_t> bytes);

/// Build and sign an attestation. Rejects self-attestation.
Attestation make_attestation(const IdentityId& subject, const KeyPair& attestor,
                             const std::string& statement);

/// Lookup table id -> public key, fed from profiles and local keys.
class KeyRegistry {
public:
    void add(const IdentityId& id, const PublicKey& key);
    std::optional<PublicKey> find(const IdentityId& id) const;
    std::size_t size() const { return keys_.size(); }

private:
    std::map<IdentityId, PublicKey> keys_;
};

/// Number of distinct attestors with valid signatures over the subject.
/// Self-attestations and attestations whose signature does not verify under
/// the attestor's registered key are excluded.
std::size_t trust_score(const IdentityId& subject, std::span<const Attestation> attestations,
                        const KeyRegistry& registry);

bool meets_threshold(std::size_t score, std::size_t threshold);

// ---------------------------------------------------------------------------
// Keystore: one `<identity-id>.key` file per identity, hex seed + hex public
// key, one per line, owner-only permissions.

class Keystore {
public:
    explicit Keystore(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }

    IdentityId save(const KeyPair& pair);
    KeyPair load(const IdentityId& id) const;
    bool contains(const IdentityId& id) const;
    std::vector<IdentityId> list() const;

private:
    std::filesystem::path dir_;
};

// Multi-document attestation file: each append writes one canonical XML doc.
void append_attestation(const std::filesystem::path& file, const Attestation& att);
std::vector<Attestation> load_attestations(const std::filesystem::path& file);

} // namespace tracechain
