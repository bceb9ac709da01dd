#pragma once

#include <optional>
#include <span>

#include "tracechain/bytes.hpp"
#include "tracechain/digest.hpp"
#include "tracechain/record.hpp"

namespace tracechain {

/// The two-byte ASCII codes that prefix every anchored hash.
enum class TxCode { IT, UT, RT };

std::string_view to_string(TxCode code);
TxCode tx_code_for(RecordKind kind);
RecordKind record_kind_for(TxCode code);

/// The fixed 34-byte on-chain anchor: 2 ASCII code bytes then the 32 digest
/// bytes, well under the 80-byte payload cap.
struct TxPayload {
    TxCode code = TxCode::IT;
    Digest32 digest;

    bool operator==(const TxPayload&) const = default;
};

inline constexpr std::size_t payload_wire_size = 34;

/// Exactly 34 bytes: code then digest.
Bytes encode_payload(TxCode code, const Digest32& digest);

/// Inverse of encode_payload. Throws Errc::bad_length (!= 34 bytes) or
/// Errc::unknown_code (first two bytes not IT/UT/RT).
TxPayload decode_payload(std::span<const std::uint8_t> bytes);

/// Total function used to skim foreign payloads off a shared ledger:
/// nullopt instead of an error for anything that is not a trace payload.
std::optional<TxPayload> classify_payload(std::span<const std::uint8_t> bytes) noexcept;

} // namespace tracechain
