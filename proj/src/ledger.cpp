#include "tracechain/ledger.hpp"

#include <algorithm>
#include <fstream>
#include <system_error>

#include <json.hpp>

#include "tracechain/errors.hpp"

namespace tracechain {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string_view to_string(TxStatus status) {
    switch (status) {
    case TxStatus::pending: return "pending";
    case TxStatus::included: return "included";
    case TxStatus::verified: return "verified";
    }
    return "?";
}

Digest32 compute_txid(std::span<const std::uint8_t> payload, std::uint64_t fee,
                      UnixSeconds submitted_at) {
    std::string preimage = "tracechain-tx\n";
    preimage += "payload:" + to_hex(payload) + "\n";
    preimage += "fee:" + std::to_string(fee) + "\n";
    preimage += "submitted_at:" + std::to_string(submitted_at) + "\n";
    return sha256(preimage);
}

Digest32 compute_block_hash(const Block& block) {
    std::string preimage = "tracechain-block\n";
    preimage += "height:" + std::to_string(block.height) + "\n";
    preimage += "prev:" + block.prev_block_hash.hex() + "\n";
    preimage += "timestamp:" + std::to_string(block.timestamp) + "\n";
    for (const ChainTx& tx : block.txs) {
        preimage += "tx:" + tx.txid.hex() + ":" + to_hex(tx.payload) + ":" + std::to_string(tx.fee)
            + ":" + std::to_string(tx.submitted_at) + "\n";
    }
    return sha256(preimage);
}

namespace {

ordered_json block_to_json(const Block& block) {
    ordered_json txs = ordered_json::array();
    for (const ChainTx& tx : block.txs) {
        txs.push_back({{"txid", tx.txid.hex()},
                       {"payload", to_hex(tx.payload)},
                       {"fee", tx.fee},
                       {"submitted_at", tx.submitted_at}});
    }
    return ordered_json{{"height", block.height},
                        {"prev_block_hash", block.prev_block_hash.hex()},
                        {"timestamp", block.timestamp},
                        {"txs", std::move(txs)},
                        {"block_hash", block.block_hash.hex()}};
}

Block block_from_json(const ordered_json& j) {
    Block block;
    block.height = j.at("height").get<std::uint64_t>();
    block.prev_block_hash = Digest32::from_hex(j.at("prev_block_hash").get<std::string>());
    block.timestamp = j.at("timestamp").get<UnixSeconds>();
    for (const auto& t : j.at("txs")) {
        ChainTx tx;
        tx.txid = Digest32::from_hex(t.at("txid").get<std::string>());
        tx.payload = from_hex(t.at("payload").get<std::string>());
        tx.fee = t.at("fee").get<std::uint64_t>();
        tx.submitted_at = t.at("submitted_at").get<UnixSeconds>();
        block.txs.push_back(std::move(tx));
    }
    block.block_hash = Digest32::from_hex(j.at("block_hash").get<std::string>());
    return block;
}

IntegrityReport verify_blocks(const std::vector<Block>& blocks) {
    if (blocks.empty()) {
        return {false, std::nullopt, "chain has no genesis block"};
    }
    for (std::size_t h = 0; h < blocks.size(); ++h) {
        const Block& block = blocks[h];
        const auto fail = [&](const std::string& what) {
            return IntegrityReport{false, h, "height " + std::to_string(h) + ": " + what};
        };
        if (block.height != h) {
            return fail("stored height " + std::to_string(block.height) + " out of sequence");
        }
        if (h == 0) {
            if (!block.prev_block_hash.is_zero()) return fail("genesis prev hash must be zero");
        } else {
            if (block.prev_block_hash != blocks[h - 1].block_hash) {
                return fail("prev hash does not match block " + std::to_string(h - 1));
            }
            if (block.timestamp < blocks[h - 1].timestamp) {
                return fail("timestamp decreases");
            }
        }
        for (const ChainTx& tx : block.txs) {
            if (tx.payload.size() > LedgerConfig::max_payload) {
                return fail("oversized payload in tx " + tx.txid.hex());
            }
            if (compute_txid(tx.payload, tx.fee, tx.submitted_at) != tx.txid) {
                return fail("txid mismatch for tx " + tx.txid.hex());
            }
        }
        if (compute_block_hash(block) != block.block_hash) {
            return fail("block hash mismatch");
        }
    }
    return {true, std::nullopt, "ok"};
}

} // namespace

SimulatedLedger::SimulatedLedger(LedgerConfig config) : config_(config) {
    if (config_.block_interval <= 0) {
        raise(Errc::config_error, "block_interval must be positive");
    }
    if (config_.confirmation_depth < 1) {
        raise(Errc::config_error, "confirmation_depth must be at least 1");
    }
    append_genesis();
}

void SimulatedLedger::append_genesis() {
    Block genesis;
    genesis.height = 0;
    genesis.timestamp = 0;
    genesis.block_hash = compute_block_hash(genesis);
    blocks_.push_back(std::move(genesis));
}

SimulatedLedger SimulatedLedger::open(const fs::path& chain_file, LedgerConfig config) {
    SimulatedLedger ledger(config);
    ledger.chain_file_ = chain_file;

    std::error_code ec;
    if (!fs::exists(chain_file, ec)) {
        if (chain_file.has_parent_path()) {
            fs::create_directories(chain_file.parent_path(), ec);
        }
        ledger.persist_block(ledger.blocks_.front());
        ledger.persist_state();
        return ledger;
    }

    std::ifstream in(chain_file, std::ios::binary);
    if (!in) raise(Errc::ledger_unavailable, "cannot read " + chain_file.string());
    ledger.blocks_.clear();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            ledger.blocks_.push_back(block_from_json(ordered_json::parse(line)));
        } catch (const std::exception& e) {
            raise(Errc::chain_corrupt,
                  "chain file line " + std::to_string(lineno) + ": " + e.what());
        }
        if (ledger.blocks_.back().height != lineno) {
            raise(Errc::chain_corrupt,
                  "chain file line " + std::to_string(lineno) + ": height out of sequence");
        }
        ++lineno;
    }
    if (ledger.blocks_.empty()) {
        raise(Errc::chain_corrupt, "chain file has no genesis block");
    }
    for (const Block& block : ledger.blocks_) {
        for (const ChainTx& tx : block.txs) {
            ledger.inclusion_height_.emplace(tx.txid, block.height);
        }
    }
    ledger.now_ = ledger.blocks_.back().timestamp;

    const fs::path state = ledger.state_file();
    if (fs::exists(state, ec)) {
        std::ifstream sin(state, std::ios::binary);
        try {
            const auto j = ordered_json::parse(sin);
            ledger.now_ = std::max(ledger.now_, j.at("now").get<UnixSeconds>());
            for (const auto& t : j.at("mempool")) {
                ChainTx tx;
                tx.payload = from_hex(t.at("payload").get<std::string>());
                tx.fee = t.at("fee").get<std::uint64_t>();
                tx.submitted_at = t.at("submitted_at").get<UnixSeconds>();
                tx.txid = compute_txid(tx.payload, tx.fee, tx.submitted_at);
                ledger.mempool_.emplace(tx.txid, std::move(tx));
            }
        } catch (const std::exception& e) {
            raise(Errc::chain_corrupt, std::string("ledger state file: ") + e.what());
        }
    }
    return ledger;
}

std::filesystem::path SimulatedLedger::state_file() const {
    fs::path p = *chain_file_;
    p += ".state";
    return p;
}

void SimulatedLedger::persist_block(const Block& block) const {
    if (!chain_file_) return;
    std::ofstream out(*chain_file_, std::ios::binary | std::ios::app);
    if (!out) raise(Errc::io_failure, "cannot append to " + chain_file_->string());
    out << block_to_json(block).dump() << "\n";
}

void SimulatedLedger::persist_state() const {
    if (!chain_file_) return;
    ordered_json mempool = ordered_json::array();
    for (const auto& [txid, tx] : mempool_) {
        mempool.push_back({{"txid", txid.hex()},
                           {"payload", to_hex(tx.payload)},
                           {"fee", tx.fee},
                           {"submitted_at", tx.submitted_at}});
    }
    const ordered_json j{{"now", now_}, {"mempool", std::move(mempool)}};
    std::ofstream out(state_file(), std::ios::binary | std::ios::trunc);
    if (!out) raise(Errc::io_failure, "cannot write " + state_file().string());
    out << j.dump() << "\n";
}

Digest32 SimulatedLedger::submit(std::span<const std::uint8_t> payload) {
    if (payload.size() > LedgerConfig::max_payload) {
        raise(Errc::payload_too_large,
              std::to_string(payload.size()) + " bytes exceeds the 80-byte OP_RETURN cap");
    }
    ChainTx tx;
    tx.payload.assign(payload.begin(), payload.end());
    tx.fee = config_.base_fee + config_.per_byte_fee * payload.size();
    tx.submitted_at = now_;
    tx.txid = compute_txid(tx.payload, tx.fee, tx.submitted_at);

    // Identical (payload, fee, time) is the same transaction; resubmission
    // is idempotent, like rebroadcasting on a real chain.
    const Digest32 txid = tx.txid;
    if (!inclusion_height_.contains(txid) && !mempool_.contains(txid)) {
        mempool_.emplace(txid, std::move(tx));
        persist_state();
    }
    return txid;
}

std::optional<Block> SimulatedLedger::produce_block(UnixSeconds now) {
    now_ = std::max(now_, now);
    const UnixSeconds slot = blocks_.back().timestamp + config_.block_interval;
    if (now < slot) return std::nullopt;

    std::vector<ChainTx> due;
    for (const auto& [txid, tx] : mempool_) {
        if (tx.submitted_at <= slot) due.push_back(tx);
    }
    std::sort(due.begin(), due.end(), [](const ChainTx& a, const ChainTx& b) {
        if (a.fee != b.fee) return a.fee > b.fee;
        return a.txid < b.txid;
    });

    Block block;
    block.height = blocks_.size();
    block.prev_block_hash = blocks_.back().block_hash;
    block.timestamp = slot;
    block.txs = std::move(due);
    block.block_hash = compute_block_hash(block);

    for (const ChainTx& tx : block.txs) {
        mempool_.erase(tx.txid);
        inclusion_height_.emplace(tx.txid, block.height);
    }
    blocks_.push_back(block);
    persist_block(block);
    persist_state();
    return block;
}

std::uint64_t SimulatedLedger::advance_to(UnixSeconds t) {
    std::uint64_t produced = 0;
    while (blocks_.back().timestamp + config_.block_interval <= t) {
        produce_block(t);
        ++produced;
    }
    now_ = std::max(now_, t);
    persist_state();
    return produced;
}

TxStatus SimulatedLedger::status(const Digest32& txid) const {
    if (mempool_.contains(txid)) return TxStatus::pending;
    const std::uint64_t conf = confirmations(txid);
    return conf >= config_.confirmation_depth ? TxStatus::verified : TxStatus::included;
}

std::uint64_t SimulatedLedger::confirmations(const Digest32& txid) const {
    if (mempool_.contains(txid)) return 0;
    const auto it = inclusion_height_.find(txid);
    if (it == inclusion_height_.end()) {
        raise(Errc::unknown_tx, "no transaction " + txid.hex());
    }
    return tip_height() - it->second + 1;
}

std::vector<ScanEntry> SimulatedLedger::scan(std::uint64_t from_height,
                                             std::uint64_t to_height) const {
    if (from_height > to_height || to_height > tip_height()) {
        raise(Errc::range_out_of_bounds,
              "scan range [" + std::to_string(from_height) + ", " + std::to_string(to_height)
                  + "] exceeds tip " + std::to_string(tip_height()));
    }
    std::vector<ScanEntry> out;
    for (std::uint64_t h = from_height; h <= to_height; ++h) {
        for (const ChainTx& tx : blocks_[h].txs) {
            if (const auto payload = classify_payload(tx.payload)) {
                out.push_back({h, tx.txid, *payload});
            }
        }
    }
    return out;
}

std::vector<PendingTx> SimulatedLedger::pending_payloads() const {
    std::vector<PendingTx> out;
    out.reserve(mempool_.size());
    for (const auto& [txid, tx] : mempool_) {
        out.push_back({txid, tx.payload});
    }
    return out;
}

std::uint64_t SimulatedLedger::tip_height() const {
    return blocks_.back().height;
}

IntegrityReport SimulatedLedger::verify_chain_integrity() const {
    return verify_blocks(blocks_);
}

IntegrityReport verify_chain_file(const fs::path& chain_file) {
    std::ifstream in(chain_file, std::ios::binary);
    if (!in) {
        return {false, std::nullopt, "cannot read " + chain_file.string()};
    }
    std::vector<Block> blocks;
    std::string line;
    std::uint64_t lineno = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
            blocks.push_back(block_from_json(ordered_json::parse(line)));
        } catch (const std::exception& e) {
            return {false, lineno,
                    "height " + std::to_string(lineno) + ": unreadable block line ("
                        + e.what() + ")"};
        }
        ++lineno;
    }
    return verify_blocks(blocks);
}

} // namespace tracechain
