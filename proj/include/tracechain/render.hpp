#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "tracechain/trace_engine.hpp"

namespace tracechain {

// Machine- and human-readable renderings of engine results. The JSON layout
// is the stable integration surface; see README for the schema.

nlohmann::ordered_json verdicts_to_json(const Verdicts& verdicts);
nlohmann::ordered_json state_to_json(const VerifiedState& state);
nlohmann::ordered_json anomaly_to_json(const Anomaly& anomaly);
nlohmann::ordered_json report_to_json(const TraceReport& report);
nlohmann::ordered_json file_verdict_to_json(const FileVerdict& verdict);

void write_state_text(std::ostream& out, const VerifiedState& state, std::size_t position);
void write_report_text(std::ostream& out, const TraceReport& report);

} // namespace tracechain
