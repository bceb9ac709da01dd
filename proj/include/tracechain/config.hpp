#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "tracechain/ledger.hpp"

namespace tracechain {

enum class OutputMode { text, json };

/// Everything a CLI invocation needs to find its state on disk.
struct AppConfig {
    std::filesystem::path home;
    std::filesystem::path store_root;
    std::filesystem::path chain_file;
    std::filesystem::path keystore_dir;
    std::filesystem::path profiles_dir;
    std::filesystem::path attestations_file;
    LedgerConfig ledger;
    std::uint64_t attestation_threshold = 1;
    OutputMode output = OutputMode::text;
};

/// Values picked up from command-line flags; unset fields fall through.
struct CliOverrides {
    std::optional<std::string> home;
    std::optional<std::string> config_file;
    std::optional<std::string> store;
    std::optional<std::string> chain;
    std::optional<std::string> keystore;
    std::optional<std::string> output;
    std::optional<std::int64_t> block_interval;
    std::optional<std::uint64_t> confirmation_depth;
    std::optional<std::uint64_t> base_fee;
    std::optional<std::uint64_t> per_byte_fee;
    std::optional<std::uint64_t> threshold;
};

/// Resolution order: built-in defaults, then the config file (key = value
/// lines), then flags, then the TRACE_HOME / TRACE_STORE / TRACE_CHAIN
/// environment variables.
AppConfig load_config(const CliOverrides& overrides);

} // namespace tracechain
