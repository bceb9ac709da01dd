#include "tracechain/record.hpp"

#include <algorithm>

#include "tracechain/errors.hpp"
#include "xml_util.hpp"

namespace tracechain {

std::string_view to_string(RecordKind kind) {
    switch (kind) {
    case RecordKind::init: return "init";
    case RecordKind::update: return "update";
    case RecordKind::revoke: return "revoke";
    }
    return "?";
}

std::optional<RecordKind> record_kind_from(std::string_view text) {
    if (text == "init") return RecordKind::init;
    if (text == "update") return RecordKind::update;
    if (text == "revoke") return RecordKind::revoke;
    return std::nullopt;
}

namespace {

bool valid_name_char(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')
        || c == '.' || c == '_' || c == '-';
}

bool valid_field_name(std::string_view name) {
    if (name.empty()) return false;
    return std::all_of(name.begin(), name.end(), valid_name_char);
}

} // namespace

bool ProductId::valid(std::string_view value) {
    if (value.empty() || value.size() > 64) return false;
    return std::all_of(value.begin(), value.end(), valid_name_char);
}

ProductId::ProductId(std::string value) : value_(std::move(value)) {
    if (!valid(value_)) {
        raise(Errc::invalid_record,
              "product id must be 1..64 chars of [A-Za-z0-9._-], got \"" + value_ + "\"");
    }
}

void validate_record(const TraceRecord& record) {
    const auto fail = [](const std::string& what) { raise(Errc::invalid_record, what); };

    if (!ProductId::valid(record.product.str())) fail("missing or invalid product id");
    (void)format_utc(record.timestamp); // enforces the representable year range

    const bool has_prev = record.prev.has_value();
    if (record.kind == RecordKind::init && has_prev) fail("init record must not carry prev");
    if (record.kind != RecordKind::init && !has_prev) fail("non-init record must carry prev");

    if (record.kind == RecordKind::init) {
        if (record.schema.empty()) fail("init record needs a non-empty schema");
        for (std::size_t i = 0; i < record.schema.size(); ++i) {
            if (!valid_field_name(record.schema[i].name)) {
                fail("invalid schema field name \"" + record.schema[i].name + "\"");
            }
            if (i > 0 && !(record.schema[i - 1].name < record.schema[i].name)) {
                fail("schema fields must be unique and sorted by name");
            }
        }
    } else if (!record.schema.empty()) {
        fail("only init records carry a schema");
    }

    if (record.kind == RecordKind::update) {
        if (record.state.empty()) fail("update record needs non-empty state");
        for (const auto& [name, value] : record.state) {
            (void)value;
            if (!valid_field_name(name)) fail("invalid state field name \"" + name + "\"");
        }
    } else if (!record.state.empty()) {
        fail("only update records carry state");
    }

    if (record.kind == RecordKind::revoke) {
        if (!record.revokes.has_value()) fail("revoke record must name the revoked digest");
    } else {
        if (record.revokes.has_value()) fail("only revoke records carry revokes");
        if (record.reason.has_value()) fail("only revoke records carry a reason");
    }
}

TraceRecord make_init_record(ProductId product, std::vector<FieldSpec> schema,
                             UnixSeconds timestamp, IdentityId signer) {
    std::sort(schema.begin(), schema.end(),
              [](const FieldSpec& a, const FieldSpec& b) { return a.name < b.name; });
    TraceRecord record;
    record.kind = RecordKind::init;
    record.product = std::move(product);
    record.schema = std::move(schema);
    record.timestamp = timestamp;
    record.signer = signer;
    validate_record(record);
    return record;
}

TraceRecord make_update_record(ProductId product, Digest32 prev,
                               std::map<std::string, std::string> state,
                               UnixSeconds timestamp, IdentityId signer) {
    TraceRecord record;
    record.kind = RecordKind::update;
    record.product = std::move(product);
    record.prev = prev;
    record.state = std::move(state);
    record.timestamp = timestamp;
    record.signer = signer;
    validate_record(record);
    return record;
}

TraceRecord make_revoke_record(ProductId product, Digest32 prev, Digest32 revokes,
                               std::optional<std::string> reason,
                               UnixSeconds timestamp, IdentityId signer) {
    TraceRecord record;
    record.kind = RecordKind::revoke;
    record.product = std::move(product);
    record.prev = prev;
    record.revokes = revokes;
    record.reason = std::move(reason);
    record.timestamp = timestamp;
    record.signer = signer;
    validate_record(record);
    return record;
}

Bytes canonicalize(const TraceRecord& record, bool include_signature) {
    validate_record(record);
    xml::Writer w;
    w.open("trace-record", {{"version", "1"}});
    w.leaf("product", {}, record.product.str());
    w.leaf("type", {}, to_string(record.kind));
    if (record.prev) {
        w.leaf("prev", {}, record.prev->hex());
    }
    w.leaf("timestamp", {}, format_utc(record.timestamp));
    switch (record.kind) {
    case RecordKind::init:
        w.open("schema");
        for (const FieldSpec& field : record.schema) {
            w.self_close("field", {{"name", field.name},
                                   {"required", field.required ? "true" : "false"}});
        }
        w.close();
        break;
    case RecordKind::update:
        w.open("state");
        for (const auto& [name, value] : record.state) { // std::map: sorted by name
            w.leaf("field", {{"name", name}}, value);
        }
        w.close();
        break;
    case RecordKind::revoke:
        w.leaf("revokes", {}, record.revokes->hex());
        if (record.reason) {
            w.leaf("reason", {}, *record.reason);
        }
        break;
    }
    w.leaf("signer", {}, record.signer.hex());
    if (include_signature) {
        w.leaf("signature", {}, to_hex(record.signature));
    }
    w.close();
    return to_bytes(w.take());
}

Digest32 hash_record(std::span<const std::uint8_t> record_bytes) {
    return sha256(record_bytes);
}

namespace {

Digest32 digest_from_text(const std::string& text, const char* what) {
    if (text.size() != 64) {
        raise(Errc::invalid_record, std::string(what) + " must be 64 hex chars");
    }
    try {
        return Digest32::from_hex(text);
    } catch (const Error&) {
        raise(Errc::invalid_record, std::string(what) + " is not valid hex");
    }
}

TraceRecord record_from_dom(const xml::Element& root) {
    if (root.name != "trace-record") {
        raise(Errc::invalid_record, "root element must be <trace-record>");
    }
    if (root.attrs.size() != 1 || root.attrs[0].first != "version" || root.attrs[0].second != "1") {
        raise(Errc::invalid_record, "trace-record must carry version=\"1\"");
    }

    TraceRecord record;
    bool saw_product = false, saw_type = false, saw_timestamp = false;
    bool saw_signer = false, saw_signature = false, saw_body = false, saw_reason = false;
    bool saw_prev = false;

    for (const xml::Element& el : root.children) {
        const auto leaf_text = [&]() -> const std::string& {
            if (!el.children.empty() || !el.attrs.empty()) {
                raise(Errc::invalid_record, "<" + el.name + "> must be a plain text element");
            }
            return el.text;
        };
        const auto once = [&](bool& seen) {
            if (seen) raise(Errc::invalid_record, "duplicate <" + el.name + "> element");
            seen = true;
        };

        if (el.name == "product") {
            once(saw_product);
            record.product = ProductId(leaf_text());
        } else if (el.name == "type") {
            once(saw_type);
            const auto kind = record_kind_from(leaf_text());
            if (!kind) raise(Errc::invalid_record, "unknown record type \"" + el.text + "\"");
            record.kind = *kind;
        } else if (el.name == "prev") {
            once(saw_prev);
            record.prev = digest_from_text(leaf_text(), "prev");
        } else if (el.name == "timestamp") {
            once(saw_timestamp);
            record.timestamp = parse_utc(leaf_text());
        } else if (el.name == "schema") {
            once(saw_body);
            if (!el.attrs.empty() || !el.text.empty()) {
                raise(Errc::invalid_record, "<schema> carries only <field> children");
            }
            for (const xml::Element& field : el.children) {
                if (field.name != "field" || !field.children.empty() || !field.text.empty()) {
                    raise(Errc::invalid_record, "<schema> carries only empty <field> elements");
                }
                const std::string* name = field.attr("name");
                const std::string* required = field.attr("required");
                if (!name || !required || field.attrs.size() != 2) {
                    raise(Errc::invalid_record, "schema field needs exactly name and required");
                }
                if (*required != "true" && *required != "false") {
                    raise(Errc::invalid_record, "schema field required must be true or false");
                }
                record.schema.push_back({*name, *required == "true"});
            }
        } else if (el.name == "state") {
            once(saw_body);
            if (!el.attrs.empty() || !el.text.empty()) {
                raise(Errc::invalid_record, "<state> carries only <field> children");
            }
            for (const xml::Element& field : el.children) {
                if (field.name != "field" || !field.children.empty()) {
                    raise(Errc::invalid_record, "<state> carries only text <field> elements");
                }
                const std::string* name = field.attr("name");
                if (!name || field.attrs.size() != 1) {
                    raise(Errc::invalid_record, "state field needs exactly a name attribute");
                }
                if (!record.state.emplace(*name, field.text).second) {
                    raise(Errc::invalid_record, "duplicate state field \"" + *name + "\"");
                }
            }
        } else if (el.name == "revokes") {
            once(saw_body);
            record.revokes = digest_from_text(leaf_text(), "revokes");
        } else if (el.name == "reason") {
            once(saw_reason);
            record.reason = leaf_text();
        } else if (el.name == "signer") {
            once(saw_signer);
            record.signer = IdentityId(digest_from_text(leaf_text(), "signer"));
        } else if (el.name == "signature") {
            once(saw_signature);
            const std::string& text = leaf_text();
            if (text.size() != 128) {
                raise(Errc::invalid_record, "signature must be 128 hex chars");
            }
            Bytes sig;
            try {
                sig = from_hex(text);
            } catch (const Error&) {
                raise(Errc::invalid_record, "signature is not valid hex");
            }
            std::copy(sig.begin(), sig.end(), record.signature.begin());
        } else {
            raise(Errc::invalid_record, "unknown element <" + el.name + ">");
        }
    }

    if (!saw_product) raise(Errc::invalid_record, "missing <product>");
    if (!saw_type) raise(Errc::invalid_record, "missing <type>");
    if (!saw_timestamp) raise(Errc::invalid_record, "missing <timestamp>");
    if (!saw_signer) raise(Errc::invalid_record, "missing <signer>");
    if (!saw_signature) raise(Errc::invalid_record, "missing <signature>");
    if (record.kind != RecordKind::init && !saw_body) {
        raise(Errc::invalid_record, "missing record body");
    }
    return record;
}

} // namespace

TraceRecord parse_record(std::span<const std::uint8_t> bytes) {
    const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    const xml::Element root = xml::parse_document(text);
    TraceRecord record = record_from_dom(root);
    validate_record(record);

    // Canonical input is the only accepted input: anything that does not
    // re-serialize to the same bytes would break hash comparisons.
    const Bytes canonical = canonicalize(record, true);
    if (canonical.size() != bytes.size()
        || !std::equal(canonical.begin(), canonical.end(), bytes.begin())) {
        raise(Errc::non_canonical, "input differs from the canonical serialization");
    }
    return record;
}

void sign_record(TraceRecord& record, const SecretSeed& seed) {
    record.signature = sign_bytes(seed, canonicalize(record, false));
}

bool verify_record_signature(const TraceRecord& record, const PublicKey& key) {
    return verify_bytes(key, canonicalize(record, false), record.signature);
}

std::vector<std::string> check_conformance(const TraceRecord& update, const TraceRecord& init_spec) {
    if (update.kind != RecordKind::update) {
        raise(Errc::kind_mismatch, "first argument must be an update record");
    }
    if (init_spec.kind != RecordKind::init) {
        raise(Errc::kind_mismatch, "second argument must be an init record");
    }
    if (update.product != init_spec.product) {
        raise(Errc::product_mismatch, "records describe different products: \""
                                          + update.product.str() + "\" vs \""
                                          + init_spec.product.str() + "\"");
    }
    std::vector<std::string> missing;
    for (const FieldSpec& field : init_spec.schema) {
        if (field.required && !update.state.contains(field.name)) {
            missing.push_back(field.name);
        }
    }
    return missing; // schema is sorted, so the result is too
}

} // namespace tracechain
