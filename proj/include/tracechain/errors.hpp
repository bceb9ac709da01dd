#pragma once

#include <stdexcept>
#include <string>

namespace tracechain {

// Error codes for every failure mode the library can report. Names mirror
// the conditions callers are expected to branch on.
enum class Errc {
    invalid_record,
    malformed_xml,
    non_canonical,
    kind_mismatch,
    product_mismatch,
    bad_length,
    unknown_code,
    entropy_unavailable,
    malformed_key,
    payload_too_large,
    unknown_tx,
    range_out_of_bounds,
    not_found,
    integrity_failure,
    io_failure,
    ledger_unavailable,
    chain_corrupt,
    no_init_record,
    multiple_init_records,
    unknown_digest,
    broken_chain,
    threshold_not_met,
    duplicate_init,
    not_authorized,
    spec_violation,
    unknown_target,
    keystore_error,
    file_unreadable,
    config_error,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
    throw Error(code, message);
}

} // namespace tracechain
