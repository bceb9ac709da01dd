#include "tracechain/config.hpp"

#include <cstdlib>
#include <fstream>
#include <map>

#include "tracechain/errors.hpp"

namespace tracechain {

namespace fs = std::filesystem;

namespace {

std::optional<std::string> env_value(const char* name) {
    const char* value = std::getenv(name);
    if (!value || *value == '\0') return std::nullopt;
    return std::string(value);
}

std::string trim(std::string_view s) {
    std::size_t begin = 0, end = s.size();
    while (begin < end && (s[begin] == ' ' || s[begin] == '\t')) ++begin;
    while (end > begin && (s[end - 1] == ' ' || s[end - 1] == '\t' || s[end - 1] == '\r')) --end;
    return std::string(s.substr(begin, end - begin));
}

std::map<std::string, std::string> parse_config_file(const fs::path& path) {
    std::map<std::string, std::string> values;
    std::ifstream in(path);
    if (!in) return values;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            raise(Errc::config_error, path.string() + ":" + std::to_string(lineno)
                                          + ": expected key = value");
        }
        values[trim(stripped.substr(0, eq))] = trim(stripped.substr(eq + 1));
    }
    return values;
}

std::uint64_t parse_unsigned(const std::string& value, const std::string& key) {
    try {
        std::size_t used = 0;
        const std::uint64_t parsed = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        raise(Errc::config_error, "bad value for " + key + ": \"" + value + "\"");
    }
}

OutputMode parse_output(const std::string& value) {
    if (value == "text") return OutputMode::text;
    if (value == "json") return OutputMode::json;
    raise(Errc::config_error, "output must be text or json, got \"" + value + "\"");
}

} // namespace

AppConfig load_config(const CliOverrides& overrides) {
    AppConfig config;

    std::string home = "./tracechain-home";
    if (overrides.home) home = *overrides.home;
    if (const auto env = env_value("TRACE_HOME")) home = *env;
    config.home = home;

    // defaults derived from home
    config.store_root = config.home / "store";
    config.chain_file = config.home / "chain.jsonl";
    config.keystore_dir = config.home / "keys";
    config.profiles_dir = config.home / "profiles";
    config.attestations_file = config.home / "attestations.xml";

    const fs::path config_file = overrides.config_file ? fs::path(*overrides.config_file)
                                                       : config.home / "config";
    for (const auto& [key, value] : parse_config_file(config_file)) {
        if (key == "store") config.store_root = value;
        else if (key == "chain") config.chain_file = value;
        else if (key == "keystore") config.keystore_dir = value;
        else if (key == "profiles") config.profiles_dir = value;
        else if (key == "attestations") config.attestations_file = value;
        else if (key == "block_interval")
            config.ledger.block_interval = static_cast<UnixSeconds>(parse_unsigned(value, key));
        else if (key == "confirmation_depth")
            config.ledger.confirmation_depth = parse_unsigned(value, key);
        else if (key == "base_fee") config.ledger.base_fee = parse_unsigned(value, key);
        else if (key == "per_byte_fee") config.ledger.per_byte_fee = parse_unsigned(value, key);
        else if (key == "threshold") config.attestation_threshold = parse_unsigned(value, key);
        else if (key == "output") config.output = parse_output(value);
        else raise(Errc::config_error, "unknown config key \"" + key + "\"");
    }

    if (overrides.store) config.store_root = *overrides.store;
    if (overrides.chain) config.chain_file = *overrides.chain;
    if (overrides.keystore) config.keystore_dir = *overrides.keystore;
    if (overrides.output) config.output = parse_output(*overrides.output);
    if (overrides.block_interval) config.ledger.block_interval = *overrides.block_interval;
    if (overrides.confirmation_depth) config.ledger.confirmation_depth = *overrides.confirmation_depth;
    if (overrides.base_fee) config.ledger.base_fee = *overrides.base_fee;
    if (overrides.per_byte_fee) config.ledger.per_byte_fee = *overrides.per_byte_fee;
    if (overrides.threshold) config.attestation_threshold = *overrides.threshold;

    // Environment has the last word (TRACE_HOME was already applied above).
    if (const auto env = env_value("TRACE_STORE")) config.store_root = *env;
    if (const auto env = env_value("TRACE_CHAIN")) config.chain_file = *env;

    if (config.ledger.block_interval <= 0) {
        raise(Errc::config_error, "block_interval must be positive");
    }
    if (config.ledger.confirmation_depth < 1) {
        raise(Errc::config_error, "confirmation_depth must be at least 1");
    }
    return config;
}

} // namespace tracechain
