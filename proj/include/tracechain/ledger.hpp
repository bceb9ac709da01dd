#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tracechain/bytes.hpp"
#include "tracechain/digest.hpp"
#include "tracechain/time_util.hpp"
#include "tracechain/tx_codec.hpp"

namespace tracechain {

struct ChainTx {
    Digest32 txid;
    Bytes payload; // <= 80 bytes
    std::uint64_t fee = 0;
    UnixSeconds submitted_at = 0;

    bool operator==(const ChainTx&) const = default;
};

struct Block {
    std::uint64_t height = 0;
    Digest32 prev_block_hash; // all-zero for genesis
    UnixSeconds timestamp = 0;
    std::vector<ChainTx> txs;
    Digest32 block_hash;
};

struct LedgerConfig {
    UnixSeconds block_interval = 600; // bitcoin-like ten-minute cadence
    std::uint64_t confirmation_depth = 3;
    std::uint64_t base_fee = 100;
    std::uint64_t per_byte_fee = 1;
    static constexpr std::size_t max_payload = 80;
};

enum class TxStatus { pending, included, verified };
std::string_view to_string(TxStatus status);

struct ScanEntry {
    std::uint64_t height = 0;
    Digest32 txid;
    TxPayload payload;
};

struct PendingTx {
    Digest32 txid;
    Bytes payload;
};

struct IntegrityReport {
    bool ok = true;
    std::optional<std::uint64_t> first_bad_height;
    std::string detail;
};

/// Canonical serializations used for txids and block hashes.
Digest32 compute_txid(std::span<const std::uint8_t> payload, std::uint64_t fee, UnixSeconds submitted_at);
Digest32 compute_block_hash(const Block& block);

/// The seam a real-chain adapter would implement. The rest of the system
/// (trace engine, CLI verification paths) depends only on this surface.
class LedgerBackend {
public:
    virtual ~LedgerBackend() = default;

    virtual Digest32 submit(std::span<const std::uint8_t> payload) = 0;
    virtual TxStatus status(const Digest32& txid) const = 0;
    virtual std::uint64_t confirmations(const Digest32& txid) const = 0;
    virtual std::vector<ScanEntry> scan(std::uint64_t from_height, std::uint64_t to_height) const = 0;
    virtual std::vector<PendingTx> pending_payloads() const = 0;
    virtual std::uint64_t tip_height() const = 0;
    virtual std::uint64_t confirmation_depth() const = 0;
};

/// Append-only simulated blockchain with a mempool, scheduled block
/// production and an explicit virtual clock. Single writer; readers observe
/// only committed blocks.
class SimulatedLedger final : public LedgerBackend {
public:
    explicit SimulatedLedger(LedgerConfig config = {});

    /// Load from (or create) a persisted chain file plus its state sidecar.
    /// The chain file is JSON Lines, one block per line, append-only.
    static SimulatedLedger open(const std::filesystem::path& chain_file, LedgerConfig config = {});

    Digest32 submit(std::span<const std::uint8_t> payload) override;
    TxStatus status(const Digest32& txid) const override;
    std::uint64_t confirmations(const Digest32& txid) const override;
    std::vector<ScanEntry> scan(std::uint64_t from_height, std::uint64_t to_height) const override;
    std::vector<PendingTx> pending_payloads() const override;
    std::uint64_t tip_height() const override;
    std::uint64_t confirmation_depth() const override { return config_.confirmation_depth; }

    /// One production step: if `now` has reached the next slot, drain the
    /// mempool (fee-descending, txid-ascending) into a block stamped with the
    /// slot time. Empty blocks are produced on schedule.
    std::optional<Block> produce_block(UnixSeconds now);

    /// Produce every block due up to `t` and move the clock. Returns the
    /// number of blocks produced.
    std::uint64_t advance_to(UnixSeconds t);
    std::uint64_t advance_by(UnixSeconds dt) { return advance_to(now_ + dt); }

    /// Recompute every txid, block hash and prev link from genesis.
    IntegrityReport verify_chain_integrity() const;

    UnixSeconds now() const { return now_; }
    const LedgerConfig& config() const { return config_; }
    const std::vector<Block>& blocks() const { return blocks_; }
    std::size_t mempool_size() const { return mempool_.size(); }

private:
    LedgerConfig config_;
    std::vector<Block> blocks_; // blocks_[h].height == h
    std::map<Digest32, ChainTx> mempool_;
    std::map<Digest32, std::uint64_t> inclusion_height_;
    UnixSeconds now_ = 0;
    std::optional<std::filesystem::path> chain_file_;

    void append_genesis();
    void persist_block(const Block& block) const;
    void persist_state() const;
    std::filesystem::path state_file() const;
};

/// Integrity check against the persisted file itself (tolerates unparseable
/// lines by reporting them as corruption at that height).
IntegrityReport verify_chain_file(const std::filesystem::path& chain_file);

} // namespace tracechain
