#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "tracechain/errors.hpp"
#include "tracechain/trace_engine.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace tracechain;
using tracechain::test::Rng;
using tracechain::test::TempDir;

namespace {

/// In-memory ledger + on-disk store + one company identity.
struct Scenario {
    TempDir dir{"engine"};
    SimulatedLedger ledger;
    BlobStore store{dir.path()};
    KeyPair company = keygen();
    KeyRegistry registry;

    Scenario() { registry.add(company.id, company.public_key); }

    Digest32 anchor(TraceRecord record, const KeyPair& signer,
                    std::optional<TxCode> code_override = {}) {
        sign_record(record, signer.seed);
        const Bytes bytes = canonicalize(record, true);
        const BlobAddress address = store.put(bytes);
        ledger.submit(encode_payload(code_override.value_or(tx_code_for(record.kind)), address));
        return address;
    }

    void confirm() { ledger.advance_by(3 * 600); }

    TraceEngine engine() { return TraceEngine(ledger, store, registry); }

    void register_key(const KeyPair& pair) { registry.add(pair.id, pair.public_key); }
};

TraceRecord init_record_for(const Scenario& s, const std::string& product,
                            UnixSeconds ts = 1000) {
    return make_init_record(ProductId{product}, {{"location", true}}, ts, s.company.id);
}

} // namespace

TEST_CASE("empty ledger yields an empty index") {
    Scenario s;
    s.confirm();
    const ChainIndex index = s.engine().build_index();
    CHECK(index.by_digest.empty());
    CHECK(index.by_product.empty());
    CHECK(index.anomalies.empty());
}

TEST_CASE("index includes verified anchors and defers pending ones") {
    Scenario s;
    const Digest32 init_digest = s.anchor(init_record_for(s, "prod-1"), s.company);
    s.confirm(); // init verified

    const TraceRecord update = make_update_record(ProductId{"prod-1"}, init_digest,
                                                  {{"location", "dock"}}, 2000, s.company.id);
    s.anchor(update, s.company);
    s.ledger.advance_by(600); // included, 1 of 3 confirmations

    auto engine = s.engine();
    const ChainIndex index = engine.build_index();
    REQUIRE(index.by_product.contains(ProductId{"prod-1"}));
    CHECK(index.by_product.at(ProductId{"prod-1"}).size() == 1);
    CHECK(index.by_product.at(ProductId{"prod-1"})[0] == init_digest);
    REQUIRE(index.pending_by_product.contains(ProductId{"prod-1"}));
    CHECK(index.pending_by_product.at(ProductId{"prod-1"}).size() == 1);

    // the pending update shows up as an unverified-tx anomaly in the report
    const TraceReport report = engine.resolve_chain(ProductId{"prod-1"}, index);
    CHECK(report.states.empty());
    REQUIRE(report.anomalies.size() == 1);
    CHECK(report.anomalies[0].kind == AnomalyKind::unverified_tx);
}

TEST_CASE("init-only product resolves to a clean single-state report") {
    Scenario s;
    const Digest32 digest = s.anchor(init_record_for(s, "prod-1"), s.company);
    s.confirm();
    auto engine = s.engine();
    const TraceReport report = engine.resolve_chain(ProductId{"prod-1"}, engine.build_index());
    CHECK(report.init.digest == digest);
    CHECK(report.init.verdicts.all_pass());
    CHECK(report.states.empty());
    CHECK(report.anomalies.empty());
    CHECK(report.clean());
}

TEST_CASE("lifecycle with a revocation matches the brute-force oracle") {
    Scenario s;
    std::vector<std::pair<Digest32, TraceRecord>> fixture;

    TraceRecord init = init_record_for(s, "prod-1");
    sign_record(init, s.company.seed);
    const Digest32 d_init = hash_record(canonicalize(init, true));
    TraceRecord u1 = make_update_record(ProductId{"prod-1"}, d_init, {{"location", "plant"}},
                                        1100, s.company.id);
    sign_record(u1, s.company.seed);
    const Digest32 d_u1 = hash_record(canonicalize(u1, true));
    TraceRecord u2 = make_update_record(ProductId{"prod-1"}, d_u1, {{"location", "dock"}}, 1200,
                                        s.company.id);
    sign_record(u2, s.company.seed);
    const Digest32 d_u2 = hash_record(canonicalize(u2, true));
    TraceRecord rt = make_revoke_record(ProductId{"prod-1"}, d_u2, d_u1, "sensor fault", 1300,
                                        s.company.id);
    sign_record(rt, s.company.seed);
    const Digest32 d_rt = hash_record(canonicalize(rt, true));

    fixture = {{d_init, init}, {d_u1, u1}, {d_u2, u2}, {d_rt, rt}};

    // submit in an adversarial order: anchoring order must not matter
    for (const auto& record : {rt, u2, init, u1}) {
        const Bytes bytes = canonicalize(record, true);
        s.store.put(bytes);
        s.ledger.submit(encode_payload(tx_code_for(record.kind), hash_record(bytes)));
    }
    s.confirm();

    auto engine = s.engine();
    const ChainIndex index = engine.build_index();
    const TraceReport report = engine.resolve_chain(ProductId{"prod-1"}, index);

    // oracle: unique permutation satisfying the prev relation
    const auto oracle = tracechain::test::brute_force_chain_order(fixture);
    REQUIRE(oracle.has_value());
    const std::vector<VerifiedState> chain = engine.full_chain(ProductId{"prod-1"}, index);
    std::vector<Digest32> resolved;
    for (const VerifiedState& state : chain) resolved.push_back(state.digest);
    CHECK(resolved == *oracle);

    // spec example: states [UT1(revoked), UT2], all verdicts pass
    REQUIRE(report.states.size() == 2);
    CHECK(report.states[0].digest == d_u1);
    CHECK(report.states[0].revoked);
    CHECK(report.states[0].revoked_by == d_rt);
    CHECK(report.states[1].digest == d_u2);
    CHECK_FALSE(report.states[1].revoked);
    CHECK(report.all_verdicts_pass());
    CHECK(report.anomalies.empty());
    CHECK(report.clean());

    // backward from the tail lists exactly the resolve order
    const auto back = engine.backward_trace(d_rt, index);
    std::vector<Digest32> walked;
    for (const VerifiedState& state : back) walked.push_back(state.digest);
    CHECK(walked == resolved);
}

TEST_CASE("an update by a foreign signer keeps its state but fails authorization") {
    Scenario s;
    const Digest32 d_init = s.anchor(init_record_for(s, "prod-1"), s.company);
    const KeyPair intruder = keygen();
    s.register_key(intruder);
    const TraceRecord rogue = make_update_record(ProductId{"prod-1"}, d_init,
                                                 {{"location", "unknown"}}, 2000, intruder.id);
    s.anchor(rogue, intruder);
    s.confirm();

    auto engine = s.engine();
    const TraceReport report = engine.resolve_chain(ProductId{"prod-1"}, engine.build_index());
    REQUIRE(report.states.size() == 1);
    CHECK_FALSE(report.states[0].verdicts.signer_authorized);
    CHECK(report.states[0].verdicts.signature_valid); // the signature itself is fine
    const bool flagged = std::any_of(report.anomalies.begin(), report.anomalies.end(),
                                     [](const Anomaly& a) {
                                         return a.kind == AnomalyKind::unauthorized_signer;
                                     });
    CHECK(flagged);
    CHECK_FALSE(report.clean());
}

TEST_CASE("code/kind mismatch is a failed verdict") {
    Scenario s;
    const Digest32 d_init = s.anchor(init_record_for(s, "prod-1"), s.company);
    const TraceRecord update = make_update_record(ProductId{"prod-1"}, d_init,
                                                  {{"location", "dock"}}, 2000, s.company.id);
    s.anchor(update, s.company, TxCode::RT); // anchored under the wrong code
    s.confirm();

    auto engine = s.engine();
    const TraceReport report = engine.resolve_chain(ProductId{"prod-1"}, engine.build_index());
    REQUIRE(report.states.size() == 1);
    CHECK_FALSE(report.states[0].verdicts.code_matches_kind);
    CHECK(report.states[0].verdicts.hash_anchored);
}

TEST_CASE("nonconformant update is flagged spec_conformant=false") {
    Scenario s;
    TraceRecord init = make_init_record(ProductId{"prod-1"}, {{"location", true}, {"batch", true}},
                                        1000, s.company.id);
    const Digest32 d_init = s.anchor(std::move(init), s.company);
    // hand-crafted update missing the required "batch"
    const TraceRecord bad = make_update_record(ProductId{"prod-1"}, d_init, {{"location", "x"}},
                                               2000, s.company.id);
    s.anchor(bad, s.company);
    s.confirm();

    auto engine = s.engine();
    const TraceReport report = engine.resolve_chain(ProductId{"prod-1"}, engine.build_index());
    REQUIRE(report.states.size() == 1);
    CHECK_FALSE(report.states[0].verdicts.spec_conformant);
    CHECK(report.states[0].verdicts.hash_anchored);
    CHECK_FALSE(report.clean());
}

TEST_CASE("backward_trace") {
    Scenario s;
    const Digest32 d_init = s.anchor(init_record_for(s, "prod-1"), s.company);
    const TraceRecord u1 = make_update_record(ProductId{"prod-1"}, d_init, {{"location", "a"}},
                                              1100, s.company.id);
    const Digest32 d_u1 = s.anchor(u1, s.company);
    const TraceRecord u2 = make_update_record(ProductId{"prod-1"}, d_u1, {{"location", "b"}},
                                              1200, s.company.id);
    const Digest32 d_u2 = s.anchor(u2, s.company);
    s.confirm();

    auto engine = s.engine();
    const ChainIndex index = engine.build_index();

    SUBCASE("from the tail back to the origin") {
        const auto chain = engine.backward_trace(d_u2, index);
        REQUIRE(chain.size() == 3);
        CHECK(chain[0].digest == d_init);
        CHECK(chain[1].digest == d_u1);
        CHECK(chain[2].digest == d_u2);
        for (const auto& state : chain) CHECK(state.verdicts.all_pass());
    }
    SUBCASE("from the origin") {
        const auto chain = engine.backward_trace(d_init, index);
        REQUIRE(chain.size() == 1);
        CHECK(chain[0].digest == d_init);
    }
    SUBCASE("unknown digest") {
        try {
            engine.backward_trace(sha256("unknown"), index);
            FAIL("expected UnknownDigest");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::unknown_digest);
        }
    }
    SUBCASE("deleted predecessor blob breaks the walk") {
        std::filesystem::remove(s.store.path_for(d_u1));
        const ChainIndex stale = engine.build_index();
        try {
            engine.backward_trace(d_u2, stale);
            FAIL("expected BrokenChain");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::broken_chain);
            CHECK(std::string(e.what()).find(d_u1.hex()) != std::string::npos);
        }
    }
}

TEST_CASE("forward_trace matches current states only") {
    Scenario s;
    // product A: current location warehouse-7
    const Digest32 a_init = s.anchor(init_record_for(s, "prod-a"), s.company);
    s.anchor(make_update_record(ProductId{"prod-a"}, a_init, {{"location", "warehouse-7"}}, 1100,
                                s.company.id),
             s.company);
    // product B: current location dock-3
    const Digest32 b_init = s.anchor(init_record_for(s, "prod-b"), s.company);
    s.anchor(make_update_record(ProductId{"prod-b"}, b_init, {{"location", "dock-3"}}, 1100,
                                s.company.id),
             s.company);
    // product C: init only
    s.anchor(init_record_for(s, "prod-c"), s.company);
    // product D: its warehouse-7 state was revoked, so it must not match
    const Digest32 d_init = s.anchor(init_record_for(s, "prod-d"), s.company);
    const TraceRecord d_u1 = make_update_record(ProductId{"prod-d"}, d_init,
                                                {{"location", "warehouse-7"}}, 1100, s.company.id);
    Digest32 d_u1_digest;
    {
        TraceRecord signed_u1 = d_u1;
        sign_record(signed_u1, s.company.seed);
        d_u1_digest = hash_record(canonicalize(signed_u1, true));
    }
    s.anchor(d_u1, s.company);
    s.anchor(make_revoke_record(ProductId{"prod-d"}, d_u1_digest, d_u1_digest, "bad scan", 1200,
                                s.company.id),
             s.company);
    s.confirm();

    auto engine = s.engine();
    const ChainIndex index = engine.build_index();

    SUBCASE("empty criteria match every product's latest state") {
        const auto all = engine.forward_trace({}, index);
        CHECK(all.size() == 4);
    }
    SUBCASE("criteria filter to the one matching product") {
        // filtered by hand over the fixture set: only prod-a currently matches
        const auto hits = engine.forward_trace({{"location", "warehouse-7"}}, index);
        REQUIRE(hits.size() == 1);
        CHECK(hits[0].first == ProductId{"prod-a"});
        CHECK(hits[0].second.record.state.at("location") == "warehouse-7");
    }
    SUBCASE("revoked states are not current") {
        const auto hits = engine.forward_trace({{"location", "dock-3"}}, index);
        CHECK(hits.size() == 1); // prod-b only; prod-d's match is revoked
    }
}

TEST_CASE("verify_file_against_chain") {
    Scenario s;
    TraceRecord init = init_record_for(s, "prod-1");
    sign_record(init, s.company.seed);
    const Bytes bytes = canonicalize(init, true);
    const Digest32 digest = s.store.put(bytes);
    s.ledger.submit(encode_payload(TxCode::IT, digest));

    auto engine = s.engine();

    SUBCASE("mempool-only file is pending") {
        const FileVerdict verdict = engine.verify_file_against_chain(bytes, engine.build_index());
        CHECK(verdict.status == AnchorStatus::pending);
    }
    SUBCASE("1 of 3 confirmations is pending") {
        s.ledger.advance_by(600);
        const FileVerdict verdict = engine.verify_file_against_chain(bytes, engine.build_index());
        CHECK(verdict.status == AnchorStatus::pending);
        CHECK(verdict.height == 1);
    }
    SUBCASE("verified anchor") {
        s.confirm();
        const FileVerdict verdict = engine.verify_file_against_chain(bytes, engine.build_index());
        CHECK(verdict.status == AnchorStatus::anchored);
        CHECK(verdict.code == TxCode::IT);
        REQUIRE(verdict.height.has_value());
    }
    SUBCASE("one flipped byte unanchors the file") {
        s.confirm();
        Bytes mutated = bytes;
        mutated[mutated.size() / 2] ^= 0x20;
        const FileVerdict verdict = engine.verify_file_against_chain(mutated,
                                                                     engine.build_index());
        CHECK(verdict.status == AnchorStatus::unanchored);
    }
}

TEST_CASE("revocation affects exactly the state it names") {
    Scenario s;
    const Digest32 d_init = s.anchor(init_record_for(s, "prod-1"), s.company);
    std::vector<Digest32> digests{d_init};
    for (int i = 0; i < 3; ++i) {
        const TraceRecord update = make_update_record(
            ProductId{"prod-1"}, digests.back(), {{"location", "hop-" + std::to_string(i)}},
            1100 + i * 100, s.company.id);
        digests.push_back(s.anchor(update, s.company));
    }
    s.confirm();
    auto engine = s.engine();
    const TraceReport before = engine.resolve_chain(ProductId{"prod-1"}, engine.build_index());

    // now revoke the middle update and compare
    s.anchor(make_revoke_record(ProductId{"prod-1"}, digests.back(), digests[2], std::nullopt,
                                2000, s.company.id),
             s.company);
    s.confirm();
    const TraceReport after = engine.resolve_chain(ProductId{"prod-1"}, engine.build_index());

    REQUIRE(before.states.size() == 3);
    REQUIRE(after.states.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(before.states[i].digest == after.states[i].digest);
        CHECK(before.states[i].verdicts == after.states[i].verdicts);
        const bool expect_revoked = after.states[i].digest == digests[2];
        CHECK(after.states[i].revoked == expect_revoked);
        CHECK_FALSE(before.states[i].revoked);
    }
    CHECK(after.anomalies.empty());
}

TEST_CASE("duplicate anchoring of one digest is an anomaly, earliest wins") {
    Scenario s;
    TraceRecord init = init_record_for(s, "prod-1");
    sign_record(init, s.company.seed);
    const Bytes bytes = canonicalize(init, true);
    const Digest32 digest = s.store.put(bytes);
    s.ledger.submit(encode_payload(TxCode::IT, digest));
    s.ledger.advance_by(600);
    s.ledger.submit(encode_payload(TxCode::IT, digest)); // anchored again later
    s.confirm();

    auto engine = s.engine();
    const ChainIndex index = engine.build_index();
    REQUIRE(index.by_digest.contains(digest));
    CHECK(index.by_digest.at(digest).height == 1);
    const bool flagged = std::any_of(index.anomalies.begin(), index.anomalies.end(),
                                     [](const Anomaly& a) {
                                         return a.kind == AnomalyKind::duplicate_anchor;
                                     });
    CHECK(flagged);
}

TEST_CASE("fork: two records claiming the same predecessor stop the walk") {
    Scenario s;
    const Digest32 d_init = s.anchor(init_record_for(s, "prod-1"), s.company);
    const TraceRecord left = make_update_record(ProductId{"prod-1"}, d_init,
                                                {{"location", "left"}}, 1100, s.company.id);
    const TraceRecord right = make_update_record(ProductId{"prod-1"}, d_init,
                                                 {{"location", "right"}}, 1200, s.company.id);
    s.anchor(left, s.company);
    s.anchor(right, s.company);
    s.confirm();

    auto engine = s.engine();
    const ChainIndex index = engine.build_index();
    const TraceReport report = engine.resolve_chain(ProductId{"prod-1"}, index);
    const bool fork_flagged = std::any_of(report.anomalies.begin(), report.anomalies.end(),
                                          [](const Anomaly& a) {
                                              return a.kind == AnomalyKind::fork;
                                          });
    CHECK(fork_flagged);
    CHECK_FALSE(report.clean());

    // the oracle also refuses to produce a unique order
    std::vector<std::pair<Digest32, TraceRecord>> fixture;
    for (const Digest32& digest : index.by_product.at(ProductId{"prod-1"})) {
        fixture.emplace_back(digest, *index.by_digest.at(digest).record);
    }
    CHECK_FALSE(tracechain::test::brute_force_chain_order(fixture).has_value());
}

TEST_CASE("resolve errors: no init and several inits") {
    Scenario s;
    SUBCASE("unknown product") {
        s.confirm();
        auto engine = s.engine();
        try {
            engine.resolve_chain(ProductId{"ghost"}, engine.build_index());
            FAIL("expected NoInitRecord");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::no_init_record);
        }
    }
    SUBCASE("two verified init records") {
        s.anchor(init_record_for(s, "prod-1", 1000), s.company);
        s.anchor(init_record_for(s, "prod-1", 2000), s.company);
        s.confirm();
        auto engine = s.engine();
        try {
            engine.resolve_chain(ProductId{"prod-1"}, engine.build_index());
            FAIL("expected MultipleInitRecords");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::multiple_init_records);
        }
    }
}

TEST_CASE("unknown signer key fails the signature verdict with an anomaly") {
    Scenario s;
    s.registry = KeyRegistry{}; // forget every key
    s.anchor(init_record_for(s, "prod-1"), s.company);
    s.confirm();
    auto engine = s.engine();
    const TraceReport report = engine.resolve_chain(ProductId{"prod-1"}, engine.build_index());
    CHECK_FALSE(report.init.verdicts.signature_valid);
    const bool flagged = std::any_of(report.anomalies.begin(), report.anomalies.end(),
                                     [](const Anomaly& a) {
                                         return a.kind == AnomalyKind::unknown_signer_key;
                                     });
    CHECK(flagged);
}

TEST_CASE("tampering any stored byte of a chain surfaces a hash-anchoring failure") {
    Rng rng(202);
    for (int trial = 0; trial < 12; ++trial) {
        Scenario s;
        std::vector<Digest32> digests;
        digests.push_back(s.anchor(init_record_for(s, "prod-1"), s.company));
        for (int i = 0; i < 3; ++i) {
            digests.push_back(s.anchor(
                make_update_record(ProductId{"prod-1"}, digests.back(),
                                   {{"location", "hop-" + std::to_string(i)}}, 1100 + i * 100,
                                   s.company.id),
                s.company));
        }
        s.confirm();

        // flip one random byte in one random stored record file
        const Digest32 victim = digests[rng.next(digests.size())];
        const auto path = s.store.path_for(victim);
        std::ifstream in(path, std::ios::binary);
        Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        in.close();
        bytes[rng.next(bytes.size())] ^= static_cast<std::uint8_t>(1 + rng.next(255));
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
        out.close();

        auto engine = s.engine();
        const ChainIndex index = engine.build_index();
        bool hash_failure_reported = false;
        try {
            const TraceReport report = engine.resolve_chain(ProductId{"prod-1"}, index);
            hash_failure_reported = !report.init.verdicts.hash_anchored;
            for (const VerifiedState& state : report.states) {
                hash_failure_reported |= !state.verdicts.hash_anchored;
            }
            for (const Anomaly& anomaly : report.anomalies) {
                hash_failure_reported |= anomaly.kind == AnomalyKind::blob_hash_mismatch
                    || anomaly.kind == AnomalyKind::missing_blob
                    || anomaly.detail.find("hash_anchored=false") != std::string::npos;
            }
            CHECK_FALSE(report.clean());
        } catch (const Error&) {
            // init unusable: the evidence must be in the store anomalies
            for (const Anomaly& anomaly : global_store_anomalies(index)) {
                hash_failure_reported |= anomaly.kind == AnomalyKind::blob_hash_mismatch;
            }
        }
        CHECK(hash_failure_reported);
    }
}

TEST_CASE("shuffled anchoring order resolves to the oracle order") {
    Rng rng(303);
    for (int trial = 0; trial < 20; ++trial) {
        Scenario s;
        const std::string product = "prod-" + std::to_string(trial);
        std::vector<TraceRecord> records;
        TraceRecord init = init_record_for(s, product);
        sign_record(init, s.company.seed);
        records.push_back(init);
        Digest32 tip = hash_record(canonicalize(init, true));
        const std::size_t updates = 1 + rng.next(5);
        for (std::size_t i = 0; i < updates; ++i) {
            TraceRecord update = make_update_record(
                ProductId{product}, tip, {{"location", "hop-" + std::to_string(i)}},
                1100 + static_cast<UnixSeconds>(i) * 50, s.company.id);
            sign_record(update, s.company.seed);
            tip = hash_record(canonicalize(update, true));
            records.push_back(std::move(update));
        }

        std::vector<std::pair<Digest32, TraceRecord>> fixture;
        for (const TraceRecord& record : records) {
            fixture.emplace_back(hash_record(canonicalize(record, true)), record);
        }
        std::shuffle(records.begin(), records.end(), rng.engine);
        for (const TraceRecord& record : records) {
            const Bytes bytes = canonicalize(record, true);
            s.store.put(bytes);
            s.ledger.submit(encode_payload(tx_code_for(record.kind), hash_record(bytes)));
            if (rng.chance(0.5)) s.ledger.advance_by(600); // spread across blocks
        }
        s.confirm();

        auto engine = s.engine();
        const auto chain = engine.full_chain(ProductId{product}, engine.build_index());
        std::vector<Digest32> resolved;
        for (const VerifiedState& state : chain) resolved.push_back(state.digest);

        const auto oracle = tracechain::test::brute_force_chain_order(fixture);
        REQUIRE(oracle.has_value());
        CHECK(resolved == *oracle);
    }
}
