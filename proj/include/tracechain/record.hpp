#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tracechain/bytes.hpp"
#include "tracechain/digest.hpp"
#include "tracechain/identity.hpp"
#include "tracechain/time_util.hpp"

namespace tracechain {

enum class RecordKind { init, update, revoke };

std::string_view to_string(RecordKind kind);
std::optional<RecordKind> record_kind_from(std::string_view text);

/// Product/batch identifier: 1..64 chars of [A-Za-z0-9._-].
class ProductId {
public:
    ProductId() = default; // empty, invalid until assigned
    explicit ProductId(std::string value);

    static bool valid(std::string_view value);

    const std::string& str() const { return value_; }
    bool empty() const { return value_.empty(); }

    auto operator<=>(const ProductId&) const = default;

private:
    std::string value_;
};

/// One entry of an init record's field list. Names share the ProductId charset.
struct FieldSpec {
    std::string name;
    bool required = true;

    bool operator==(const FieldSpec&) const = default;
};

/// One lifecycle event as a deterministic signed XML document.
/// Kind rules: init has schema and no prev; update has prev and state;
/// revoke has prev and revokes (+ optional reason).
struct TraceRecord {
    RecordKind kind = RecordKind::init;
    ProductId product;
    std::optional<Digest32> prev;
    UnixSeconds timestamp = 0;
    std::vector<FieldSpec> schema;             // init only, sorted by name
    std::map<std::string, std::string> state;  // update only
    std::optional<Digest32> revokes;           // revoke only
    std::optional<std::string> reason;         // revoke only
    IdentityId signer;
    Signature signature{};

    bool operator==(const TraceRecord&) const = default;
};

/// Throws Errc::invalid_record unless the record satisfies its kind invariants.
void validate_record(const TraceRecord& record);

TraceRecord make_init_record(ProductId product, std::vector<FieldSpec> schema,
                             UnixSeconds timestamp, IdentityId signer);
TraceRecord make_update_record(ProductId product, Digest32 prev,
                               std::map<std::string, std::string> state,
                               UnixSeconds timestamp, IdentityId signer);
TraceRecord make_revoke_record(ProductId product, Digest32 prev, Digest32 revokes,
                               std::optional<std::string> reason,
                               UnixSeconds timestamp, IdentityId signer);

/// Deterministic UTF-8 XML bytes (LF endings, 2-space indent, fixed element
/// order, <field> sorted by name, trailing LF). With include_signature=false
/// the <signature> element is omitted entirely; these are the bytes a signer
/// signs.
Bytes canonicalize(const TraceRecord& record, bool include_signature = true);

/// SHA-256 of the exact stored bytes.
Digest32 hash_record(std::span<const std::uint8_t> record_bytes);

/// Inverse of canonicalize(r, true) on canonical input. Non-canonical input
/// (wrong order, CRLF, comments, alternate escaping) raises Errc::non_canonical
/// so hash comparisons stay byte-exact; broken XML raises Errc::malformed_xml;
/// kind-invariant violations raise Errc::invalid_record.
TraceRecord parse_record(std::span<const std::uint8_t> bytes);

/// Sign over canonicalize(record, false) and fill record.signature.
void sign_record(TraceRecord& record, const SecretSeed& seed);
bool verify_record_signature(const TraceRecord& record, const PublicKey& key);

/// Required field names of the init spec that are absent from update.state,
/// ascending. Empty result means conformant; extra state fields are allowed.
std::vector<std::string> check_conformance(const TraceRecord& update, const TraceRecord& init_spec);

} // namespace tracechain
