#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tracechain/app.hpp"
#include "tracechain/errors.hpp"

using namespace tracechain;

int main(int argc, char** argv) {
    CLI::App app{"Decentralized supply-chain traceability: signed XML lifecycle records in a "
                 "content-addressed store, anchored to a simulated blockchain"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    CliOverrides overrides;
    std::string opt_home, opt_config, opt_store, opt_chain, opt_keystore, opt_output;
    std::int64_t opt_interval = 0;
    std::uint64_t opt_depth = 0, opt_base_fee = 0, opt_per_byte = 0, opt_threshold = 0;

    app.add_option("--home", opt_home, "Base directory for store/chain/keys (env TRACE_HOME)");
    app.add_option("--config", opt_config, "Config file (key = value lines)");
    app.add_option("--store", opt_store, "Blob store root (env TRACE_STORE)");
    app.add_option("--chain", opt_chain, "Chain file (env TRACE_CHAIN)");
    app.add_option("--keystore", opt_keystore, "Keystore directory");
    app.add_option("--output", opt_output, "Output mode: text or json")
        ->check(CLI::IsMember({"text", "json"}));
    app.add_option("--block-interval", opt_interval, "Seconds between blocks (default 600)");
    app.add_option("--confirmation-depth", opt_depth, "Blocks required for Verified (default 3)");
    app.add_option("--base-fee", opt_base_fee, "Flat fee per transaction");
    app.add_option("--per-byte-fee", opt_per_byte, "Fee per payload byte");
    app.add_option("--threshold", opt_threshold, "Attestations required to init products");

    std::optional<std::string> signer;
    app.add_option("--signer", signer, "Identity id (hex) used for signing commands");

    // keygen
    std::string keygen_name = "unnamed";
    auto* sc_keygen = app.add_subcommand("keygen", "Create an identity and self-signed profile");
    sc_keygen->add_option("--name", keygen_name, "Company name recorded in the profile");

    // attest
    std::string attest_subject, attest_statement = "verified";
    auto* sc_attest = app.add_subcommand("attest", "Vouch for another identity");
    sc_attest->add_option("subject", attest_subject, "Identity id (hex) being attested")
        ->required();
    sc_attest->add_option("statement", attest_statement, "Statement recorded in the attestation");

    // product init|update|revoke
    auto* sc_product = app.add_subcommand("product", "Company-side lifecycle commands");
    sc_product->require_subcommand(1);
    std::string product_name;
    std::vector<std::string> init_fields;
    std::vector<std::string> update_sets;
    std::string revoke_target;
    std::optional<std::string> revoke_reason;
    std::optional<std::string> at;

    auto* sc_init = sc_product->add_subcommand("init", "Anchor a product's field spec");
    sc_init->add_option("product", product_name)->required();
    sc_init->add_option("--field", init_fields, "Spec field: name, name:required or name:optional")
        ->required();
    sc_init->add_option("--at", at, "Record timestamp (ISO-8601 Z; default: ledger clock)");

    auto* sc_update = sc_product->add_subcommand("update", "Anchor a state update");
    sc_update->add_option("product", product_name)->required();
    sc_update->add_option("--set", update_sets, "State field: name=value")->required();
    sc_update->add_option("--at", at, "Record timestamp (ISO-8601 Z; default: ledger clock)");

    auto* sc_revoke = sc_product->add_subcommand("revoke", "Declare an anchored state false");
    sc_revoke->add_option("product", product_name)->required();
    sc_revoke->add_option("--target", revoke_target, "Digest (hex) of the state being revoked")
        ->required();
    sc_revoke->add_option("--reason", revoke_reason, "Optional reason");
    sc_revoke->add_option("--at", at, "Record timestamp (ISO-8601 Z; default: ledger clock)");

    // ingest
    std::string ingest_file;
    auto* sc_ingest = app.add_subcommand("ingest", "Turn device events (JSON Lines) into updates");
    sc_ingest->add_option("events", ingest_file, "Events file, one JSON object per line")
        ->required();

    // trace / backward / verify
    std::string trace_product;
    std::vector<std::string> trace_criteria;
    auto* sc_trace = app.add_subcommand("trace", "Reconstruct and verify a product history");
    sc_trace->add_option("product", trace_product, "Product id");
    sc_trace->add_option("--criteria", trace_criteria,
                         "Forward trace: match latest states by name=value");

    std::string backward_digest;
    auto* sc_backward = app.add_subcommand("backward", "Walk a state back to its origin");
    sc_backward->add_option("digest", backward_digest, "State digest (hex)")->required();

    std::string verify_file;
    auto* sc_verify = app.add_subcommand("verify", "Check a record file against the chain");
    sc_verify->add_option("file", verify_file, "Path to a record file")->required();

    // ledger advance|status|integrity
    auto* sc_ledger = app.add_subcommand("ledger", "Virtual-time chain administration");
    sc_ledger->require_subcommand(1);
    std::int64_t advance_seconds = 0;
    auto* sc_advance = sc_ledger->add_subcommand("advance", "Move the clock, produce due blocks");
    sc_advance->add_option("--seconds", advance_seconds, "Virtual seconds to advance")->required();
    std::string status_txid;
    auto* sc_status = sc_ledger->add_subcommand("status", "Pending/Included/Verified for a txid");
    sc_status->add_option("txid", status_txid)->required();
    auto* sc_integrity = sc_ledger->add_subcommand("integrity", "Recompute the whole hash chain");

    CLI11_PARSE(app, argc, argv);

    if (!opt_home.empty()) overrides.home = opt_home;
    if (!opt_config.empty()) overrides.config_file = opt_config;
    if (!opt_store.empty()) overrides.store = opt_store;
    if (!opt_chain.empty()) overrides.chain = opt_chain;
    if (!opt_keystore.empty()) overrides.keystore = opt_keystore;
    if (!opt_output.empty()) overrides.output = opt_output;
    if (app.count("--block-interval")) overrides.block_interval = opt_interval;
    if (app.count("--confirmation-depth")) overrides.confirmation_depth = opt_depth;
    if (app.count("--base-fee")) overrides.base_fee = opt_base_fee;
    if (app.count("--per-byte-fee")) overrides.per_byte_fee = opt_per_byte;
    if (app.count("--threshold")) overrides.threshold = opt_threshold;

    try {
        AppContext ctx{load_config(overrides), std::cout, std::cerr};

        if (sc_keygen->parsed()) return cmd_keygen(ctx, keygen_name);
        if (sc_attest->parsed()) return cmd_attest(ctx, signer, attest_subject, attest_statement);
        if (sc_product->parsed()) {
            if (sc_init->parsed())
                return cmd_product_init(ctx, product_name, init_fields, signer, at);
            if (sc_update->parsed())
                return cmd_product_update(ctx, product_name, update_sets, signer, at);
            if (sc_revoke->parsed())
                return cmd_product_revoke(ctx, product_name, revoke_target, revoke_reason, signer,
                                          at);
        }
        if (sc_ingest->parsed()) return cmd_ingest(ctx, ingest_file, signer);
        if (sc_trace->parsed()) {
            if (!trace_criteria.empty()) return cmd_trace_criteria(ctx, trace_criteria);
            if (trace_product.empty()) {
                std::cerr << "error: trace needs a product or --criteria\n";
                return exit_error;
            }
            return cmd_trace(ctx, trace_product);
        }
        if (sc_backward->parsed()) return cmd_backward(ctx, backward_digest);
        if (sc_verify->parsed()) return cmd_verify(ctx, verify_file);
        if (sc_ledger->parsed()) {
            if (sc_advance->parsed()) return cmd_ledger_advance(ctx, advance_seconds);
            if (sc_status->parsed()) return cmd_ledger_status(ctx, status_txid);
            if (sc_integrity->parsed()) return cmd_ledger_integrity(ctx);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_error;
    }
    return exit_error;
}
