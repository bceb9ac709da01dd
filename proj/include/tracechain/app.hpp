#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tracechain/config.hpp"

namespace tracechain {

// Exit-code contract (documented in the README): 0 success / fully verified,
// 1 operational error, 2 verification failure.
inline constexpr int exit_ok = 0;
inline constexpr int exit_error = 1;
inline constexpr int exit_verification = 2;

/// One CLI invocation's environment. Streams are injected so the command
/// layer is drivable from tests and bindings.
struct AppContext {
    AppConfig config;
    std::ostream& out;
    std::ostream& err;
};

int cmd_keygen(AppContext& ctx, const std::string& name);
int cmd_attest(AppContext& ctx, const std::optional<std::string>& signer,
               const std::string& subject, const std::string& statement);

int cmd_product_init(AppContext& ctx, const std::string& product,
                     const std::vector<std::string>& fields,
                     const std::optional<std::string>& signer,
                     const std::optional<std::string>& at);
int cmd_product_update(AppContext& ctx, const std::string& product,
                       const std::vector<std::string>& assignments,
                       const std::optional<std::string>& signer,
                       const std::optional<std::string>& at);
int cmd_product_revoke(AppContext& ctx, const std::string& product, const std::string& target,
                       const std::optional<std::string>& reason,
                       const std::optional<std::string>& signer,
                       const std::optional<std::string>& at);

int cmd_ingest(AppContext& ctx, const std::string& events_file,
               const std::optional<std::string>& signer);

int cmd_trace(AppContext& ctx, const std::string& product);
int cmd_trace_criteria(AppContext& ctx, const std::vector<std::string>& criteria);
int cmd_backward(AppContext& ctx, const std::string& digest_hex);
int cmd_verify(AppContext& ctx, const std::string& file_path);

int cmd_ledger_advance(AppContext& ctx, std::int64_t seconds);
int cmd_ledger_status(AppContext& ctx, const std::string& txid_hex);
int cmd_ledger_integrity(AppContext& ctx);

} // namespace tracechain
