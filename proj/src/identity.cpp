#include "tracechain/identity.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <system_error>

#include <sodium.h>

#include "tracechain/errors.hpp"
#include "xml_util.hpp"

namespace tracechain {

static_assert(crypto_sign_PUBLICKEYBYTES == 32);
static_assert(crypto_sign_SEEDBYTES == 32);
static_assert(crypto_sign_BYTES == 64);

IdentityId IdentityId::of_key(const PublicKey& key) {
    return IdentityId(sha256(std::span<const std::uint8_t>(key.data(), key.size())));
}

IdentityId IdentityId::from_hex(std::string_view hex) {
    return IdentityId(Digest32::from_hex(hex));
}

KeyPair keygen() {
    ensure_sodium();
    SecretSeed seed{};
    randombytes_buf(seed.data(), seed.size());
    return keypair_from_seed(seed);
}

KeyPair keypair_from_seed(const SecretSeed& seed) {
    ensure_sodium();
    KeyPair pair;
    pair.seed = seed;
    std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> expanded{};
    if (crypto_sign_seed_keypair(pair.public_key.data(), expanded.data(), seed.data()) != 0) {
        raise(Errc::malformed_key, "Ed25519 key derivation failed");
    }
    pair.id = IdentityId::of_key(pair.public_key);
    return pair;
}

Signature sign_bytes(const SecretSeed& seed, std::span<const std::uint8_t> bytes) {
    ensure_sodium();
    std::array<std::uint8_t, crypto_sign_SECRETKEYBYTES> expanded{};
    PublicKey pub{};
    if (crypto_sign_seed_keypair(pub.data(), expanded.data(), seed.data()) != 0) {
        raise(Errc::malformed_key, "Ed25519 key derivation failed");
    }
    Signature sig{};
    crypto_sign_detached(sig.data(), nullptr, bytes.data(), bytes.size(), expanded.data());
    return sig;
}

bool verify_bytes(const PublicKey& key, std::span<const std::uint8_t> bytes, const Signature& sig) {
    ensure_sodium();
    return crypto_sign_verify_detached(sig.data(), bytes.data(), bytes.size(), key.data()) == 0;
}

// ---------------------------------------------------------------------------
// Profiles

Bytes canonicalize_profile(const IdentityProfile& profile, bool include_signature) {
    xml::Writer w;
    w.open("identity-profile", {{"version", "1"}});
    w.leaf("id", {}, profile.id.hex());
    w.leaf("public-key", {}, to_hex(profile.public_key));
    w.open("info");
    for (const auto& [name, value] : profile.info) {
        w.leaf("attr", {{"name", name}}, value);
    }
    w.close();
    if (include_signature) {
        w.leaf("self-signature", {}, to_hex(profile.self_signature));
    }
    w.close();
    return to_bytes(w.take());
}

namespace {

template <std::size_t N>
std::array<std::uint8_t, N> fixed_hex(const std::string& text, const char* what) {
    Bytes raw;
    try {
        raw = from_hex(text);
    } catch (const Error&) {
        raise(Errc::invalid_record, std::string(what) + " is not valid hex");
    }
    if (raw.size() != N) {
        raise(Errc::invalid_record, std::string(what) + " has wrong length");
    }
    std::array<std::uint8_t, N> out{};
    std::copy(raw.begin(), raw.end(), out.begin());
    return out;
}

const std::string& plain_text(const xml::Element& el) {
    if (!el.children.empty() || !el.attrs.empty()) {
        raise(Errc::invalid_record, "<" + el.name + "> must be a plain text element");
    }
    return el.text;
}

} // namespace

IdentityProfile parse_profile(std::span<const std::uint8_t> bytes) {
    const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    const xml::Element root = xml::parse_document(text);
    if (root.name != "identity-profile") {
        raise(Errc::invalid_record, "root element must be <identity-profile>");
    }
    IdentityProfile profile;
    const xml::Element* id = root.child("id");
    const xml::Element* key = root.child("public-key");
    const xml::Element* info = root.child("info");
    const xml::Element* sig = root.child("self-signature");
    if (!id || !key || !info || !sig) {
        raise(Errc::invalid_record, "profile is missing a required element");
    }
    profile.id = IdentityId(Digest32::from_bytes(fixed_hex<32>(plain_text(*id), "profile id")));
    profile.public_key = fixed_hex<32>(plain_text(*key), "public key");
    for (const xml::Element& attr : info->children) {
        const std::string* name = attr.attr("name");
        if (attr.name != "attr" || !name) {
            raise(Errc::invalid_record, "<info> carries only named <attr> elements");
        }
        profile.info[*name] = attr.text;
    }
    profile.self_signature = fixed_hex<64>(plain_text(*sig), "self signature");
    return profile;
}

IdentityProfile finalize_profile(IdentityProfile profile, const SecretSeed& seed) {
    if (!profile.info.contains("name") || profile.info.at("name").empty()) {
        raise(Errc::invalid_record, "profile info must contain a non-empty name");
    }
    profile.self_signature = sign_bytes(seed, canonicalize_profile(profile, false));
    return profile;
}

bool profile_is_valid(const IdentityProfile& profile) {
    if (profile.id != IdentityId::of_key(profile.public_key)) return false;
    const auto name = profile.info.find("name");
    if (name == profile.info.end() || name->second.empty()) return false;
    return verify_bytes(profile.public_key, canonicalize_profile(profile, false),
                        profile.self_signature);
}

// ---------------------------------------------------------------------------
// Attestations

Bytes canonicalize_attestation(const Attestation& att, bool include_signature) {
    xml::Writer w;
    w.open("attestation", {{"version", "1"}});
    w.leaf("subject", {}, att.subject.hex());
    w.leaf("attestor", {}, att.attestor.hex());
    w.leaf("statement", {}, att.statement);
    if (include_signature) {
        w.leaf("signature", {}, to_hex(att.signature));
    }
    w.close();
    return to_bytes(w.take());
}

Attestation parse_attestation(std::span<const std::uint8_t> bytes) {
    const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    const xml::Element root = xml::parse_document(text);
    if (root.name != "attestation") {
        raise(Errc::invalid_record, "root element must be <attestation>");
    }
    const xml::Element* subject = root.child("subject");
    const xml::Element* attestor = root.child("attestor");
    const xml::Element* statement = root.child("statement");
    const xml::Element* sig = root.child("signature");
    if (!subject || !attestor || !statement || !sig) {
        raise(Errc::invalid_record, "attestation is missing a required element");
    }
    Attestation att;
    att.subject = IdentityId(Digest32::from_bytes(fixed_hex<32>(plain_text(*subject), "subject")));
    att.attestor = IdentityId(Digest32::from_bytes(fixed_hex<32>(plain_text(*attestor), "attestor")));
    att.statement = plain_text(*statement);
    att.signature = fixed_hex<64>(plain_text(*sig), "signature");
    return att;
}

Attestation make_attestation(const IdentityId& subject, const KeyPair& attestor,
                             const std::string& statement) {
    if (subject == attestor.id) {
        raise(Errc::invalid_record, "self-attestation is not allowed");
    }
    Attestation att;
    att.subject = subject;
    att.attestor = attestor.id;
    att.statement = statement;
    att.signature = sign_bytes(attestor.seed, canonicalize_attestation(att, false));
    return att;
}

void KeyRegistry::add(const IdentityId& id, const PublicKey& key) {
    keys_[id] = key;
}

std::optional<PublicKey> KeyRegistry::find(const IdentityId& id) const {
    const auto it = keys_.find(id);
    if (it == keys_.end()) return std::nullopt;
    return it->second;
}

std::size_t trust_score(const IdentityId& subject, std::span<const Attestation> attestations,
                        const KeyRegistry& registry) {
    std::set<IdentityId> attestors;
    for (const Attestation& att : attestations) {
        if (att.subject != subject || att.attestor == subject) continue;
        const auto key = registry.find(att.attestor);
        if (!key) continue;
        if (!verify_bytes(*key, canonicalize_attestation(att, false), att.signature)) continue;
        attestors.insert(att.attestor);
    }
    return attestors.size();
}

bool meets_threshold(std::size_t score, std::size_t threshold) {
    return score >= threshold;
}

// ---------------------------------------------------------------------------
// Keystore

namespace fs = std::filesystem;

Keystore::Keystore(fs::path dir) : dir_(std::move(dir)) {}

static fs::path key_path(const fs::path& dir, const IdentityId& id) {
    return dir / (id.hex() + ".key");
}

IdentityId Keystore::save(const KeyPair& pair) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) raise(Errc::keystore_error, "cannot create keystore dir: " + ec.message());

    const fs::path path = key_path(dir_, pair.id);
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) raise(Errc::keystore_error, "cannot write " + path.string());
        out << to_hex(pair.seed) << "\n" << to_hex(pair.public_key) << "\n";
    }
    fs::permissions(path, fs::perms::owner_read | fs::perms::owner_write, ec);
    return pair.id;
}

KeyPair Keystore::load(const IdentityId& id) const {
    const fs::path path = key_path(dir_, id);
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::keystore_error, "no key file for identity " + id.hex());
    std::string seed_hex, pub_hex;
    std::getline(in, seed_hex);
    std::getline(in, pub_hex);
    if (seed_hex.size() != 64 || pub_hex.size() != 64) {
        raise(Errc::keystore_error, "malformed key file " + path.string());
    }
    SecretSeed seed{};
    const Bytes raw = from_hex(seed_hex);
    std::copy(raw.begin(), raw.end(), seed.begin());
    KeyPair pair = keypair_from_seed(seed);
    if (pair.id != id || to_hex(pair.public_key) != pub_hex) {
        raise(Errc::keystore_error, "key file does not match identity " + id.hex());
    }
    return pair;
}

bool Keystore::contains(const IdentityId& id) const {
    std::error_code ec;
    return fs::exists(key_path(dir_, id), ec);
}

std::vector<IdentityId> Keystore::list() const {
    std::vector<IdentityId> ids;
    std::error_code ec;
    if (!fs::is_directory(dir_, ec)) return ids;
    for (const auto& entry : fs::directory_iterator(dir_, ec)) {
        const fs::path& path = entry.path();
        if (path.extension() != ".key") continue;
        const std::string stem = path.stem().string();
        if (stem.size() != 64) continue;
        try {
            ids.push_back(IdentityId::from_hex(stem));
        } catch (const Error&) {
            continue; // foreign file in the keystore dir
        }
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

// ---------------------------------------------------------------------------
// Attestation file: a byte-append-only sequence of canonical XML documents.

void append_attestation(const fs::path& file, const Attestation& att) {
    std::error_code ec;
    if (file.has_parent_path()) {
        fs::create_directories(file.parent_path(), ec);
    }
    std::ofstream out(file, std::ios::binary | std::ios::app);
    if (!out) raise(Errc::io_failure, "cannot append to " + file.string());
    const Bytes doc = canonicalize_attestation(att, true);
    out.write(reinterpret_cast<const char*>(doc.data()), static_cast<std::streamsize>(doc.size()));
}

std::vector<Attestation> load_attestations(const fs::path& file) {
    std::vector<Attestation> out;
    std::ifstream in(file, std::ios::binary);
    if (!in) return out; // absent file: no attestations yet
    const std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    static constexpr std::string_view marker = "<?xml";
    std::size_t start = all.find(marker);
    while (start != std::string::npos) {
        std::size_t next = all.find(marker, start + marker.size());
        const std::string_view doc(all.data() + start,
                                   (next == std::string::npos ? all.size() : next) - start);
        out.push_back(parse_attestation(std::span<const std::uint8_t>(
            reinterpret_cast<const std::uint8_t*>(doc.data()), doc.size())));
        start = next;
    }
    return out;
}

} // namespace tracechain
