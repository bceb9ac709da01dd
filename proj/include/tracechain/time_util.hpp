#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace tracechain {

/// Seconds since the Unix epoch, UTC. Second precision everywhere.
using UnixSeconds = std::int64_t;

/// ISO-8601 `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_utc(UnixSeconds t);

/// Strict parse of the exact format produced by format_utc.
/// Throws Errc::invalid_record on malformed or out-of-range input.
UnixSeconds parse_utc(std::string_view text);

} // namespace tracechain
