#include "tracechain/tx_codec.hpp"

#include <algorithm>

#include "tracechain/errors.hpp"

namespace tracechain {

std::string_view to_string(TxCode code) {
    switch (code) {
    case TxCode::IT: return "IT";
    case TxCode::UT: return "UT";
    case TxCode::RT: return "RT";
    }
    return "??";
}

TxCode tx_code_for(RecordKind kind) {
    switch (kind) {
    case RecordKind::init: return TxCode::IT;
    case RecordKind::update: return TxCode::UT;
    case RecordKind::revoke: return TxCode::RT;
    }
    raise(Errc::unknown_code, "unhandled record kind");
}

RecordKind record_kind_for(TxCode code) {
    switch (code) {
    case TxCode::IT: return RecordKind::init;
    case TxCode::UT: return RecordKind::update;
    case TxCode::RT: return RecordKind::revoke;
    }
    raise(Errc::unknown_code, "unhandled tx code");
}

Bytes encode_payload(TxCode code, const Digest32& digest) {
    Bytes out;
    out.reserve(payload_wire_size);
    const std::string_view text = to_string(code);
    out.push_back(static_cast<std::uint8_t>(text[0]));
    out.push_back(static_cast<std::uint8_t>(text[1]));
    out.insert(out.end(), digest.bytes().begin(), digest.bytes().end());
    return out;
}

namespace {

std::optional<TxCode> code_from_wire(std::uint8_t first, std::uint8_t second) {
    if (second != 'T') return std::nullopt;
    switch (first) {
    case 'I': return TxCode::IT;
    case 'U': return TxCode::UT;
    case 'R': return TxCode::RT;
    default: return std::nullopt;
    }
}

} // namespace

TxPayload decode_payload(std::span<const std::uint8_t> bytes) {
    if (bytes.size() != payload_wire_size) {
        raise(Errc::bad_length, "trace payload must be exactly 34 bytes, got "
                                    + std::to_string(bytes.size()));
    }
    const auto code = code_from_wire(bytes[0], bytes[1]);
    if (!code) {
        raise(Errc::unknown_code, "payload code is not one of IT/UT/RT");
    }
    return TxPayload{*code, Digest32::from_bytes(bytes.subspan(2))};
}

std::optional<TxPayload> classify_payload(std::span<const std::uint8_t> bytes) noexcept {
    if (bytes.size() != payload_wire_size) return std::nullopt;
    const auto code = code_from_wire(bytes[0], bytes[1]);
    if (!code) return std::nullopt;
    return TxPayload{*code, Digest32::from_bytes(bytes.subspan(2))};
}

} // namespace tracechain
