#include "tracechain/bytes.hpp"

#include "tracechain/errors.hpp"

namespace tracechain {

Bytes to_bytes(std::string_view text) {
    return Bytes(text.begin(), text.end());
}

std::string to_string(std::span<const std::uint8_t> bytes) {
    return std::string(bytes.begin(), bytes.end());
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

namespace {

int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) {
        raise(Errc::malformed_key, "hex string has odd length");
    }
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        const int hi = hex_nibble(hex[i]);
        const int lo = hex_nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) {
            raise(Errc::malformed_key, "invalid hex character");
        }
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

const char* errc_name(Errc code) {
    switch (code) {
    case Errc::invalid_record: return "InvalidRecord";
    case Errc::malformed_xml: return "MalformedXml";
    case Errc::non_canonical: return "NonCanonical";
    case Errc::kind_mismatch: return "KindMismatch";
    case Errc::product_mismatch: return "ProductMismatch";
    case Errc::bad_length: return "BadLength";
    case Errc::unknown_code: return "UnknownCode";
    case Errc::entropy_unavailable: return "EntropyUnavailable";
    case Errc::malformed_key: return "MalformedKey";
    case Errc::payload_too_large: return "PayloadTooLarge";
    case Errc::unknown_tx: return "UnknownTx";
    case Errc::range_out_of_bounds: return "RangeOutOfBounds";
    case Errc::not_found: return "NotFound";
    case Errc::integrity_failure: return "IntegrityFailure";
    case Errc::io_failure: return "IoFailure";
    case Errc::ledger_unavailable: return "LedgerUnavailable";
    case Errc::chain_corrupt: return "ChainCorrupt";
    case Errc::no_init_record: return "NoInitRecord";
    case Errc::multiple_init_records: return "MultipleInitRecords";
    case Errc::unknown_digest: return "UnknownDigest";
    case Errc::broken_chain: return "BrokenChain";
    case Errc::threshold_not_met: return "ThresholdNotMet";
    case Errc::duplicate_init: return "DuplicateInit";
    case Errc::not_authorized: return "NotAuthorized";
    case Errc::spec_violation: return "SpecViolation";
    case Errc::unknown_target: return "UnknownTarget";
    case Errc::keystore_error: return "KeystoreError";
    case Errc::file_unreadable: return "FileUnreadable";
    case Errc::config_error: return "ConfigError";
    }
    return "Error";
}

} // namespace tracechain
