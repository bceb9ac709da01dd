#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <set>

#include "tracechain/blob_store.hpp"
#include "tracechain/errors.hpp"
#include "support.hpp"

using namespace tracechain;
using tracechain::test::Rng;
using tracechain::test::TempDir;

TEST_CASE("put is idempotent and content-addressed") {
    TempDir dir("store");
    BlobStore store(dir.path());
    const Bytes content = to_bytes("same bytes");

    const BlobAddress first = store.put(content);
    const BlobAddress second = store.put(content);
    CHECK(first == second);
    CHECK(first == sha256(content));

    // exactly one stored object
    std::size_t files = 0;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir.path())) {
        if (entry.is_regular_file()) ++files;
    }
    CHECK(files == 1);
}

TEST_CASE("the empty blob lands at the well-known empty-input digest") {
    TempDir dir("store");
    BlobStore store(dir.path());
    CHECK(store.put(Bytes{}).hex()
          == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(store.get(sha256("")).empty());
}

TEST_CASE("objects live under two-level sharded paths") {
    TempDir dir("store");
    BlobStore store(dir.path());
    const BlobAddress address = store.put(to_bytes("shard me"));
    const std::string hex = address.hex();
    CHECK(store.path_for(address) == dir.path() / hex.substr(0, 2) / hex.substr(2));
    CHECK(std::filesystem::exists(store.path_for(address)));
}

TEST_CASE("get(put(b)) == b and distinct contents get distinct addresses") {
    TempDir dir("store");
    BlobStore store(dir.path());
    Rng rng(61);
    std::set<std::string> seen_contents;
    std::set<Digest32> addresses;
    for (int i = 0; i < 300; ++i) {
        const Bytes blob = rng.blob(200);
        const BlobAddress address = store.put(blob);
        CHECK(store.get(address) == blob);
        if (seen_contents.insert(to_string(blob)).second) {
            CHECK(addresses.insert(address).second); // new content, new address
        }
    }
}

TEST_CASE("missing and corrupted objects are reported, never returned") {
    TempDir dir("store");
    BlobStore store(dir.path());

    SUBCASE("absent address") {
        try {
            store.get(sha256("never stored"));
            FAIL("expected NotFound");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::not_found);
        }
        CHECK_FALSE(store.contains(sha256("never stored")));
        CHECK_FALSE(store.read_raw(sha256("never stored")).has_value());
    }
    SUBCASE("corrupt on disk") {
        const BlobAddress address = store.put(to_bytes("pristine content"));
        {
            std::ofstream out(store.path_for(address), std::ios::binary | std::ios::trunc);
            out << "tampered content";
        }
        try {
            store.get(address);
            FAIL("expected IntegrityFailure");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::integrity_failure);
        }
        // the raw path still hands out bytes so verifiers can diagnose
        const auto raw = store.read_raw(address);
        REQUIRE(raw.has_value());
        CHECK(sha256(*raw) != address);
    }
}
