#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tracechain/blob_store.hpp"
#include "tracechain/identity.hpp"
#include "tracechain/ledger.hpp"
#include "tracechain/record.hpp"
#include "tracechain/tx_codec.hpp"

namespace tracechain {

enum class AnomalyKind {
    fork,
    missing_blob,
    blob_hash_mismatch,
    unreadable_record,
    unknown_digest,
    unauthorized_signer,
    unverified_tx,
    duplicate_anchor,
    unchained_record,
    revoke_target_unknown,
    unknown_signer_key,
    chain_cycle,
    failed_verdicts,
};

std::string_view to_string(AnomalyKind kind);

struct Anomaly {
    AnomalyKind kind;
    std::optional<Digest32> digest;
    std::string detail;
};

/// Snapshot of one anchored digest: where it sits on the chain and what the
/// store held for it at index time.
struct IndexEntry {
    Digest32 txid;
    std::uint64_t height = 0;
    TxCode code = TxCode::IT;
    bool verified = false;             // confirmations >= depth
    bool blob_present = false;
    std::optional<Digest32> stored_digest; // SHA-256 of the bytes the store returned
    std::optional<TraceRecord> record; // parsed canonical record, when usable
    std::string parse_error;

    bool blob_matches(const Digest32& anchored) const {
        return stored_digest && *stored_digest == anchored;
    }
};

/// Index of every trace payload found on the ledger. by_product covers only
/// Verified, parseable records; pending ones are kept for unverified-tx
/// reporting and file verification.
struct ChainIndex {
    std::map<Digest32, IndexEntry> by_digest;
    std::map<ProductId, std::vector<Digest32>> by_product;
    std::map<ProductId, std::vector<Digest32>> pending_by_product;
    std::map<Digest32, std::pair<Digest32, TxCode>> mempool; // digest -> (txid, code)
    std::vector<Anomaly> anomalies; // duplicate anchors seen while indexing
    std::uint64_t tip_height = 0;
};

struct Verdicts {
    bool hash_anchored = false;
    bool code_matches_kind = false;
    bool signature_valid = false;
    bool signer_authorized = false;
    bool spec_conformant = false;
    bool timestamp_monotone = false;

    bool all_pass() const {
        return hash_anchored && code_matches_kind && signature_valid && signer_authorized
            && spec_conformant && timestamp_monotone;
    }
    bool operator==(const Verdicts&) const = default;
};

struct VerifiedState {
    TraceRecord record;
    Digest32 digest; // the anchored digest the record was fetched under
    Digest32 txid;
    std::uint64_t height = 0;
    Verdicts verdicts;
    bool revoked = false;
    std::optional<Digest32> revoked_by;
};

/// Reconstructed product history at a stated tip. `states` lists the chained
/// update records; revocations act through the revoked/revoked_by flags.
struct TraceReport {
    ProductId product;
    VerifiedState init;
    std::vector<VerifiedState> states;
    std::vector<Anomaly> anomalies;
    std::uint64_t tip_height = 0;

    bool all_verdicts_pass() const;
    bool clean() const { return anomalies.empty() && all_verdicts_pass(); }
};

enum class AnchorStatus { anchored, pending, unanchored };
std::string_view to_string(AnchorStatus status);

struct FileVerdict {
    AnchorStatus status = AnchorStatus::unanchored;
    Digest32 digest; // hash of the checked bytes
    std::optional<Digest32> txid;
    std::optional<std::uint64_t> height;
    std::optional<TxCode> code;
};

/// Reconstructs and verifies product lifecycles from ledger + store without
/// trusting either: every link is re-checked from data.
class TraceEngine {
public:
    TraceEngine(const LedgerBackend& ledger, const BlobStore& store, KeyRegistry registry);

    /// Scan Verified transactions, classify payloads, fetch and parse blobs,
    /// group by product. Anything unusable is flagged, never dropped silently.
    ChainIndex build_index() const;

    /// Follow prev-links from the product's init record, verifying every hop.
    /// Throws Errc::no_init_record / Errc::multiple_init_records.
    TraceReport resolve_chain(const ProductId& product, const ChainIndex& index) const;

    /// The prev-chain from `digest` back to the init record, origin first.
    std::vector<VerifiedState> backward_trace(const Digest32& digest, const ChainIndex& index) const;

    /// Products whose latest non-revoked state matches every criterion.
    std::vector<std::pair<ProductId, VerifiedState>> forward_trace(
        const std::map<std::string, std::string>& criteria, const ChainIndex& index) const;

    /// Standalone file check: anchored (Verified), pending (on ledger or in
    /// the mempool but under depth), or unanchored.
    FileVerdict verify_file_against_chain(std::span<const std::uint8_t> file_bytes,
                                          const ChainIndex& index) const;

    /// Full chain walk including revocation records, origin first. The tail
    /// is what a new record must name as prev.
    std::vector<VerifiedState> full_chain(const ProductId& product, const ChainIndex& index) const;

    const KeyRegistry& registry() const { return registry_; }

private:
    const LedgerBackend& ledger_;
    const BlobStore& store_;
    KeyRegistry registry_;

    struct WalkResult {
        std::vector<VerifiedState> chain; // init first, all kinds
        std::vector<Anomaly> anomalies;
    };
    WalkResult walk_chain(const ProductId& product, const ChainIndex& index) const;
    Verdicts judge(const TraceRecord& record, const IndexEntry& entry, const TraceRecord& init_record,
                   std::optional<UnixSeconds> prev_timestamp, std::vector<Anomaly>& anomalies,
                   const Digest32& digest) const;
};

/// Store-integrity anomalies every report must carry: Verified anchors whose
/// blob is missing, tainted or unparseable (minus digests already covered by
/// this product's states).
std::vector<Anomaly> global_store_anomalies(const ChainIndex& index);

} // namespace tracechain
