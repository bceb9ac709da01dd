#include "tracechain/trace_engine.hpp"

#include <algorithm>
#include <set>

#include "tracechain/errors.hpp"

namespace tracechain {

std::string_view to_string(AnomalyKind kind) {
    switch (kind) {
    case AnomalyKind::fork: return "fork";
    case AnomalyKind::missing_blob: return "missing-blob";
    case AnomalyKind::blob_hash_mismatch: return "blob-hash-mismatch";
    case AnomalyKind::unreadable_record: return "unreadable-record";
    case AnomalyKind::unknown_digest: return "unknown-digest";
    case AnomalyKind::unauthorized_signer: return "unauthorized-signer";
    case AnomalyKind::unverified_tx: return "unverified-tx";
    case AnomalyKind::duplicate_anchor: return "duplicate-anchor";
    case AnomalyKind::unchained_record: return "unchained-record";
    case AnomalyKind::revoke_target_unknown: return "revoke-target-unknown";
    case AnomalyKind::unknown_signer_key: return "unknown-signer-key";
    case AnomalyKind::chain_cycle: return "chain-cycle";
    case AnomalyKind::failed_verdicts: return "failed-verdicts";
    }
    return "?";
}

std::string_view to_string(AnchorStatus status) {
    switch (status) {
    case AnchorStatus::anchored: return "anchored";
    case AnchorStatus::pending: return "pending";
    case AnchorStatus::unanchored: return "unanchored";
    }
    return "?";
}

bool TraceReport::all_verdicts_pass() const {
    if (!init.verdicts.all_pass()) return false;
    return std::all_of(states.begin(), states.end(),
                       [](const VerifiedState& s) { return s.verdicts.all_pass(); });
}

TraceEngine::TraceEngine(const LedgerBackend& ledger, const BlobStore& store, KeyRegistry registry)
    : ledger_(ledger), store_(store), registry_(std::move(registry)) {}

ChainIndex TraceEngine::build_index() const {
    ChainIndex index;
    index.tip_height = ledger_.tip_height();
    const std::uint64_t depth = ledger_.confirmation_depth();

    for (const ScanEntry& scanned : ledger_.scan(0, index.tip_height)) {
        const Digest32& digest = scanned.payload.digest;
        if (index.by_digest.contains(digest)) {
            index.anomalies.push_back(
                {AnomalyKind::duplicate_anchor, digest,
                 "digest anchored again at height " + std::to_string(scanned.height)
                     + "; earliest occurrence wins"});
            continue;
        }
        IndexEntry entry;
        entry.txid = scanned.txid;
        entry.height = scanned.height;
        entry.code = scanned.payload.code;
        entry.verified = index.tip_height - scanned.height + 1 >= depth;
        if (auto bytes = store_.read_raw(digest)) {
            entry.blob_present = true;
            entry.stored_digest = sha256(*bytes);
            try {
                entry.record = parse_record(*bytes);
            } catch (const Error& e) {
                entry.parse_error = e.what();
            }
        }
        if (entry.record) {
            auto& groups = entry.verified ? index.by_product : index.pending_by_product;
            groups[entry.record->product].push_back(digest);
        }
        index.by_digest.emplace(digest, std::move(entry));
    }

    for (const PendingTx& pending : ledger_.pending_payloads()) {
        const auto payload = classify_payload(pending.payload);
        if (!payload || index.by_digest.contains(payload->digest)
            || index.mempool.contains(payload->digest)) {
            continue;
        }
        index.mempool.emplace(payload->digest, std::make_pair(pending.txid, payload->code));
        if (auto bytes = store_.read_raw(payload->digest)) {
            try {
                const TraceRecord record = parse_record(*bytes);
                index.pending_by_product[record.product].push_back(payload->digest);
            } catch (const Error&) {
                // nothing to attribute; the tx is not Verified anyway
            }
        }
    }
    return index;
}

std::vector<Anomaly> global_store_anomalies(const ChainIndex& index) {
    std::vector<Anomaly> out;
    for (const auto& [digest, entry] : index.by_digest) {
        if (!entry.verified) continue;
        if (!entry.blob_present) {
            out.push_back({AnomalyKind::missing_blob, digest,
                           "verified anchor has no stored blob (hash_anchored=false: nothing to "
                           "compare against the chain)"});
        } else if (!entry.blob_matches(digest)) {
            out.push_back({AnomalyKind::blob_hash_mismatch, digest,
                           "stored blob hashes to " + entry.stored_digest->hex()
                               + " (hash_anchored=false)"});
        } else if (!entry.record) {
            out.push_back({AnomalyKind::unreadable_record, digest,
                           "stored blob is not a canonical trace record: " + entry.parse_error});
        }
    }
    return out;
}

Verdicts TraceEngine::judge(const TraceRecord& record, const IndexEntry& entry,
                            const TraceRecord& init_record,
                            std::optional<UnixSeconds> prev_timestamp,
                            std::vector<Anomaly>& anomalies, const Digest32& digest) const {
    Verdicts v;
    v.hash_anchored = entry.verified && entry.blob_matches(digest);
    v.code_matches_kind = record_kind_for(entry.code) == record.kind;

    if (const auto key = registry_.find(record.signer)) {
        v.signature_valid = verify_record_signature(record, *key);
    } else {
        v.signature_valid = false;
        anomalies.push_back({AnomalyKind::unknown_signer_key, digest,
                             "no public key known for signer " + record.signer.hex()});
    }

    v.signer_authorized = record.signer == init_record.signer;
    if (!v.signer_authorized) {
        anomalies.push_back({AnomalyKind::unauthorized_signer, digest,
                             "signed by " + record.signer.hex() + ", chain owner is "
                                 + init_record.signer.hex()});
    }

    v.spec_conformant = record.kind != RecordKind::update
        || check_conformance(record, init_record).empty();
    v.timestamp_monotone = !prev_timestamp || record.timestamp >= *prev_timestamp;
    return v;
}

TraceEngine::WalkResult TraceEngine::walk_chain(const ProductId& product,
                                                const ChainIndex& index) const {
    const auto group_it = index.by_product.find(product);
    const std::vector<Digest32> empty;
    const std::vector<Digest32>& group = group_it == index.by_product.end() ? empty
                                                                            : group_it->second;

    std::vector<Digest32> inits;
    for (const Digest32& digest : group) {
        if (index.by_digest.at(digest).record->kind == RecordKind::init) {
            inits.push_back(digest);
        }
    }
    if (inits.empty()) {
        raise(Errc::no_init_record,
              "product \"" + product.str() + "\" has no Verified init record");
    }
    if (inits.size() > 1) {
        std::string detail;
        for (const Digest32& digest : inits) detail += " " + digest.hex();
        raise(Errc::multiple_init_records,
              "product \"" + product.str() + "\" has " + std::to_string(inits.size())
                  + " Verified init records:" + detail);
    }

    std::map<Digest32, std::vector<Digest32>> successors;
    for (const Digest32& digest : group) {
        const TraceRecord& record = *index.by_digest.at(digest).record;
        if (record.prev) successors[*record.prev].push_back(digest);
    }

    WalkResult result;
    const TraceRecord init_record = *index.by_digest.at(inits[0]).record;
    std::set<Digest32> visited;
    std::optional<UnixSeconds> prev_timestamp;
    Digest32 cursor = inits[0];
    for (;;) {
        visited.insert(cursor);
        const IndexEntry& entry = index.by_digest.at(cursor);
        VerifiedState state;
        state.record = *entry.record;
        state.digest = cursor;
        state.txid = entry.txid;
        state.height = entry.height;
        state.verdicts = judge(state.record, entry, init_record, prev_timestamp,
                               result.anomalies, cursor);
        prev_timestamp = state.record.timestamp;
        result.chain.push_back(std::move(state));

        const auto next_it = successors.find(cursor);
        if (next_it == successors.end()) break;
        const std::vector<Digest32>& next = next_it->second;
        if (next.size() > 1) {
            std::string detail = "records disagree about the successor of " + cursor.hex() + ":";
            for (const Digest32& digest : next) detail += " " + digest.hex();
            result.anomalies.push_back({AnomalyKind::fork, cursor, detail});
            break;
        }
        if (visited.contains(next[0])) {
            result.anomalies.push_back({AnomalyKind::chain_cycle, next[0],
                                        "prev links loop back to an earlier record"});
            break;
        }
        cursor = next[0];
    }

    // Anything of this product the walk never reached is evidence by itself.
    for (const Digest32& digest : group) {
        if (visited.contains(digest)) continue;
        const IndexEntry& entry = index.by_digest.at(digest);
        const TraceRecord& record = *entry.record;
        std::string detail = "record never reached by the prev-chain walk";
        if (record.prev && !index.by_digest.contains(*record.prev)) {
            result.anomalies.push_back({AnomalyKind::unknown_digest, *record.prev,
                                        "prev of " + digest.hex() + " is not anchored"});
        }
        if (!entry.blob_matches(digest)) {
            detail += " (hash_anchored=false: stored blob hashes to "
                + (entry.stored_digest ? entry.stored_digest->hex() : std::string("nothing"))
                + ")";
        }
        result.anomalies.push_back({AnomalyKind::unchained_record, digest, detail});
    }

    // Apply revocations and flag revocation records that fail verification.
    for (const VerifiedState& state : result.chain) {
        if (state.record.kind != RecordKind::revoke) continue;
        const Digest32 target = *state.record.revokes;
        bool found = false;
        for (VerifiedState& candidate : result.chain) {
            if (candidate.digest == target) {
                candidate.revoked = true;
                candidate.revoked_by = state.digest;
                found = true;
                break;
            }
        }
        if (!found) {
            result.anomalies.push_back({AnomalyKind::revoke_target_unknown, target,
                                        "revocation " + state.digest.hex()
                                            + " names a digest outside this chain"});
        }
        if (!state.verdicts.all_pass()) {
            std::string failing;
            if (!state.verdicts.hash_anchored) failing += " hash_anchored=false";
            if (!state.verdicts.code_matches_kind) failing += " code_matches_kind=false";
            if (!state.verdicts.signature_valid) failing += " signature_valid=false";
            if (!state.verdicts.signer_authorized) failing += " signer_authorized=false";
            if (!state.verdicts.spec_conformant) failing += " spec_conformant=false";
            if (!state.verdicts.timestamp_monotone) failing += " timestamp_monotone=false";
            result.anomalies.push_back({AnomalyKind::failed_verdicts, state.digest,
                                        "revocation record failed checks:" + failing});
        }
    }
    return result;
}

TraceReport TraceEngine::resolve_chain(const ProductId& product, const ChainIndex& index) const {
    WalkResult walk = walk_chain(product, index);

    TraceReport report;
    report.product = product;
    report.tip_height = index.tip_height;
    report.init = walk.chain.front();
    for (std::size_t i = 1; i < walk.chain.size(); ++i) {
        if (walk.chain[i].record.kind != RecordKind::revoke) {
            report.states.push_back(walk.chain[i]);
        }
    }
    report.anomalies = std::move(walk.anomalies);

    const auto pending_it = index.pending_by_product.find(product);
    if (pending_it != index.pending_by_product.end()) {
        for (const Digest32& digest : pending_it->second) {
            report.anomalies.push_back({AnomalyKind::unverified_tx, digest,
                                        "anchored but below confirmation depth; not part of the "
                                        "verified history yet"});
        }
    }

    std::set<Digest32> covered;
    covered.insert(report.init.digest);
    for (const VerifiedState& state : report.states) covered.insert(state.digest);
    for (const Anomaly& anomaly : index.anomalies) {
        report.anomalies.push_back(anomaly);
    }
    for (Anomaly& anomaly : global_store_anomalies(index)) {
        if (anomaly.digest && covered.contains(*anomaly.digest)) continue;
        report.anomalies.push_back(std::move(anomaly));
    }
    return report;
}

std::vector<VerifiedState> TraceEngine::full_chain(const ProductId& product,
                                                   const ChainIndex& index) const {
    return walk_chain(product, index).chain;
}

std::vector<VerifiedState> TraceEngine::backward_trace(const Digest32& digest,
                                                       const ChainIndex& index) const {
    const auto start = index.by_digest.find(digest);
    if (start == index.by_digest.end() || !start->second.record) {
        raise(Errc::unknown_digest, "digest " + digest.hex() + " is not an indexed record");
    }

    std::vector<std::pair<Digest32, const IndexEntry*>> path;
    std::set<Digest32> visited;
    Digest32 cursor = digest;
    const IndexEntry* entry = &start->second;
    for (;;) {
        visited.insert(cursor);
        path.emplace_back(cursor, entry);
        if (!entry->record->prev) break;
        const Digest32 prev = *entry->record->prev;
        if (visited.contains(prev)) {
            raise(Errc::broken_chain, "prev links form a cycle at " + prev.hex());
        }
        const auto it = index.by_digest.find(prev);
        if (it == index.by_digest.end() || !it->second.record) {
            raise(Errc::broken_chain, "missing predecessor " + prev.hex());
        }
        cursor = prev;
        entry = &it->second;
    }
    std::reverse(path.begin(), path.end());

    const TraceRecord& init_record = *path.front().second->record;
    std::vector<VerifiedState> chain;
    std::vector<Anomaly> scratch;
    std::optional<UnixSeconds> prev_timestamp;
    for (const auto& [d, e] : path) {
        VerifiedState state;
        state.record = *e->record;
        state.digest = d;
        state.txid = e->txid;
        state.height = e->height;
        state.verdicts = judge(state.record, *e, init_record, prev_timestamp, scratch, d);
        prev_timestamp = state.record.timestamp;
        chain.push_back(std::move(state));
    }
    for (const VerifiedState& state : chain) {
        if (state.record.kind != RecordKind::revoke) continue;
        for (VerifiedState& candidate : chain) {
            if (candidate.digest == *state.record.revokes) {
                candidate.revoked = true;
                candidate.revoked_by = state.digest;
            }
        }
    }
    return chain;
}

std::vector<std::pair<ProductId, VerifiedState>> TraceEngine::forward_trace(
    const std::map<std::string, std::string>& criteria, const ChainIndex& index) const {
    std::vector<std::pair<ProductId, VerifiedState>> out;
    for (const auto& [product, digests] : index.by_product) {
        (void)digests;
        TraceReport report;
        try {
            report = resolve_chain(product, index);
        } catch (const Error&) {
            continue; // products without a resolvable chain have no current state
        }
        const VerifiedState* current = nullptr;
        if (!report.init.revoked) current = &report.init;
        for (const VerifiedState& state : report.states) {
            if (!state.revoked) current = &state;
        }
        if (!current) continue;

        const bool matches = std::all_of(
            criteria.begin(), criteria.end(), [&](const auto& criterion) {
                const auto it = current->record.state.find(criterion.first);
                return it != current->record.state.end() && it->second == criterion.second;
            });
        if (matches) {
            out.emplace_back(product, *current);
        }
    }
    return out;
}

FileVerdict TraceEngine::verify_file_against_chain(std::span<const std::uint8_t> file_bytes,
                                                   const ChainIndex& index) const {
    FileVerdict verdict;
    verdict.digest = hash_record(file_bytes);

    const auto it = index.by_digest.find(verdict.digest);
    if (it != index.by_digest.end()) {
        verdict.status = it->second.verified ? AnchorStatus::anchored : AnchorStatus::pending;
        verdict.txid = it->second.txid;
        verdict.height = it->second.height;
        verdict.code = it->second.code;
        return verdict;
    }
    const auto mem = index.mempool.find(verdict.digest);
    if (mem != index.mempool.end()) {
        verdict.status = AnchorStatus::pending;
        verdict.txid = mem->second.first;
        verdict.code = mem->second.second;
        return verdict;
    }
    verdict.status = AnchorStatus::unanchored;
    return verdict;
}

} // namespace tracechain
