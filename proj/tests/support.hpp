#pragma once

// Shared fixtures: temp dirs, deterministic generators, and a signed-record
// factory used across the suites.

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "tracechain/identity.hpp"
#include "tracechain/record.hpp"

namespace tracechain::test {

namespace fs = std::filesystem;

class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::mt19937_64 rng{std::random_device{}()};
        path_ = fs::temp_directory_path()
            / ("tracechain-" + tag + "-" + std::to_string(rng()));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

struct Rng {
    std::mt19937_64 engine;

    explicit Rng(std::uint64_t seed) : engine(seed) {}

    std::uint64_t next(std::uint64_t bound) { // [0, bound)
        return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine);
    }
    bool chance(double p) {
        return std::uniform_real_distribution<double>(0.0, 1.0)(engine) < p;
    }
    std::string ident(std::size_t min_len = 1, std::size_t max_len = 12) {
        static constexpr char alphabet[] =
            "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789._-";
        const std::size_t len = min_len + next(max_len - min_len + 1);
        std::string out;
        for (std::size_t i = 0; i < len; ++i) {
            out.push_back(alphabet[next(sizeof(alphabet) - 1)]);
        }
        return out;
    }
    std::string text(std::size_t max_len = 24) {
        // printable ASCII incl. the XML-special chars, plus a UTF-8 snippet
        static constexpr char pool[] =
            " !\"#$%&'()*+,-./0123456789:;<=>?@ABCXYZ[]^_`abcxyz{|}~";
        std::string out;
        const std::size_t len = next(max_len + 1);
        for (std::size_t i = 0; i < len; ++i) {
            out.push_back(pool[next(sizeof(pool) - 1)]);
        }
        if (chance(0.1)) out += "\xc3\xa9\xe2\x82\xac"; // é€
        return out;
    }
    Bytes blob(std::size_t max_len = 64) {
        Bytes out(next(max_len + 1));
        for (auto& b : out) b = static_cast<std::uint8_t>(next(256));
        return out;
    }
    Digest32 digest() {
        Bytes raw(32);
        for (auto& b : raw) b = static_cast<std::uint8_t>(next(256));
        return Digest32::from_bytes(raw);
    }
    Signature signature() {
        Signature sig{};
        for (auto& b : sig) b = static_cast<std::uint8_t>(next(256));
        return sig;
    }
    UnixSeconds timestamp() { // 1970..~2200
        return static_cast<UnixSeconds>(next(7'000'000'000ULL));
    }
};

/// Structurally valid random record of any kind (signature random bytes).
inline TraceRecord random_record(Rng& rng) {
    const ProductId product{rng.ident(1, 16)};
    const IdentityId signer{rng.digest()};
    const UnixSeconds ts = rng.timestamp();
    TraceRecord record;
    switch (rng.next(3)) {
    case 0: {
        std::vector<FieldSpec> schema;
        std::map<std::string, bool> names;
        const std::size_t n = 1 + rng.next(5);
        while (names.size() < n) names.emplace(rng.ident(), rng.chance(0.7));
        for (const auto& [name, required] : names) schema.push_back({name, required});
        record = make_init_record(product, std::move(schema), ts, signer);
        break;
    }
    case 1: {
        std::map<std::string, std::string> state;
        const std::size_t n = 1 + rng.next(5);
        while (state.size() < n) state.emplace(rng.ident(), rng.text());
        record = make_update_record(product, rng.digest(), std::move(state), ts, signer);
        break;
    }
    default: {
        std::optional<std::string> reason;
        if (rng.chance(0.6)) reason = rng.text();
        record = make_revoke_record(product, rng.digest(), rng.digest(), reason, ts, signer);
        break;
    }
    }
    record.signature = rng.signature();
    return record;
}

} // namespace tracechain::test
