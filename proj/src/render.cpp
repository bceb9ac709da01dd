#include "tracechain/render.hpp"

#include <ostream>

#include "tracechain/time_util.hpp"

namespace tracechain {

using nlohmann::ordered_json;

ordered_json verdicts_to_json(const Verdicts& verdicts) {
    return ordered_json{{"hash_anchored", verdicts.hash_anchored},
                        {"code_matches_kind", verdicts.code_matches_kind},
                        {"signature_valid", verdicts.signature_valid},
                        {"signer_authorized", verdicts.signer_authorized},
                        {"spec_conformant", verdicts.spec_conformant},
                        {"timestamp_monotone", verdicts.timestamp_monotone}};
}

ordered_json state_to_json(const VerifiedState& state) {
    const TraceRecord& record = state.record;
    ordered_json j{{"kind", std::string(to_string(record.kind))},
                   {"product", record.product.str()},
                   {"digest", state.digest.hex()},
                   {"txid", state.txid.hex()},
                   {"height", state.height},
                   {"timestamp", format_utc(record.timestamp)},
                   {"signer", record.signer.hex()}};
    if (record.prev) j["prev"] = record.prev->hex();
    switch (record.kind) {
    case RecordKind::init: {
        ordered_json schema = ordered_json::array();
        for (const FieldSpec& field : record.schema) {
            schema.push_back({{"name", field.name}, {"required", field.required}});
        }
        j["schema"] = std::move(schema);
        break;
    }
    case RecordKind::update:
        j["state"] = record.state;
        break;
    case RecordKind::revoke:
        j["revokes"] = record.revokes->hex();
        if (record.reason) j["reason"] = *record.reason;
        break;
    }
    j["verdicts"] = verdicts_to_json(state.verdicts);
    j["revoked"] = state.revoked;
    if (state.revoked_by) j["revoked_by"] = state.revoked_by->hex();
    return j;
}

ordered_json anomaly_to_json(const Anomaly& anomaly) {
    ordered_json j{{"kind", std::string(to_string(anomaly.kind))}, {"detail", anomaly.detail}};
    if (anomaly.digest) j["digest"] = anomaly.digest->hex();
    return j;
}

ordered_json report_to_json(const TraceReport& report) {
    ordered_json states = ordered_json::array();
    for (const VerifiedState& state : report.states) {
        states.push_back(state_to_json(state));
    }
    ordered_json anomalies = ordered_json::array();
    for (const Anomaly& anomaly : report.anomalies) {
        anomalies.push_back(anomaly_to_json(anomaly));
    }
    return ordered_json{{"product", report.product.str()},
                        {"tip_height", report.tip_height},
                        {"init", state_to_json(report.init)},
                        {"states", std::move(states)},
                        {"anomalies", std::move(anomalies)},
                        {"ok", report.clean()}};
}

ordered_json file_verdict_to_json(const FileVerdict& verdict) {
    ordered_json j{{"status", std::string(to_string(verdict.status))},
                   {"digest", verdict.digest.hex()}};
    if (verdict.txid) j["txid"] = verdict.txid->hex();
    if (verdict.height) j["height"] = *verdict.height;
    if (verdict.code) j["code"] = std::string(to_string(*verdict.code));
    return j;
}

namespace {

void write_verdicts(std::ostream& out, const Verdicts& v) {
    out << "hash_anchored=" << (v.hash_anchored ? "true" : "false")
        << " code_matches_kind=" << (v.code_matches_kind ? "true" : "false")
        << " signature_valid=" << (v.signature_valid ? "true" : "false")
        << " signer_authorized=" << (v.signer_authorized ? "true" : "false")
        << " spec_conformant=" << (v.spec_conformant ? "true" : "false")
        << " timestamp_monotone=" << (v.timestamp_monotone ? "true" : "false");
}

} // namespace

void write_state_text(std::ostream& out, const VerifiedState& state, std::size_t position) {
    out << "[" << position << "] " << to_string(state.record.kind)
        << " digest=" << state.digest.hex() << " height=" << state.height
        << " time=" << format_utc(state.record.timestamp);
    if (state.revoked) {
        out << " REVOKED by=" << (state.revoked_by ? state.revoked_by->hex() : "?");
    }
    out << "\n    ";
    write_verdicts(out, state.verdicts);
    out << "\n";
    if (state.record.kind == RecordKind::update) {
        for (const auto& [name, value] : state.record.state) {
            out << "    " << name << " = " << value << "\n";
        }
    }
}

void write_report_text(std::ostream& out, const TraceReport& report) {
    out << "product: " << report.product.str() << " (tip height " << report.tip_height << ")\n";
    write_state_text(out, report.init, 0);
    std::size_t position = 1;
    for (const VerifiedState& state : report.states) {
        write_state_text(out, state, position++);
    }
    for (const Anomaly& anomaly : report.anomalies) {
        out << "anomaly: " << to_string(anomaly.kind);
        if (anomaly.digest) out << " digest=" << anomaly.digest->hex();
        out << " " << anomaly.detail << "\n";
    }
    out << "result: " << (report.clean() ? "VERIFIED" : "FAILED") << "\n";
}

} // namespace tracechain
