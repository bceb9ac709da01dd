#include "tracechain/app.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "tracechain/blob_store.hpp"
#include "tracechain/errors.hpp"
#include "tracechain/identity.hpp"
#include "tracechain/ledger.hpp"
#include "tracechain/render.hpp"
#include "tracechain/trace_engine.hpp"

namespace tracechain {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

KeyRegistry build_registry(const AppConfig& config) {
    KeyRegistry registry;
    std::error_code ec;
    if (fs::is_directory(config.profiles_dir, ec)) {
        for (const auto& entry : fs::directory_iterator(config.profiles_dir, ec)) {
            if (entry.path().extension() != ".xml") continue;
            std::ifstream in(entry.path(), std::ios::binary);
            if (!in) continue;
            const std::string raw((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
            try {
                const IdentityProfile profile = parse_profile(to_bytes(raw));
                // Self-certifying: the id is the key's hash and the profile
                // signs itself, so no out-of-band trust is needed.
                if (profile_is_valid(profile)) {
                    registry.add(profile.id, profile.public_key);
                }
            } catch (const Error&) {
                continue;
            }
        }
    }
    Keystore keystore(config.keystore_dir);
    for (const IdentityId& id : keystore.list()) {
        try {
            registry.add(id, keystore.load(id).public_key);
        } catch (const Error&) {
            continue;
        }
    }
    return registry;
}

KeyPair resolve_signer(const AppConfig& config, const std::optional<std::string>& signer) {
    Keystore keystore(config.keystore_dir);
    if (signer) {
        return keystore.load(IdentityId::from_hex(*signer));
    }
    const std::vector<IdentityId> ids = keystore.list();
    if (ids.size() == 1) {
        return keystore.load(ids.front());
    }
    raise(Errc::keystore_error,
          ids.empty() ? "keystore is empty; run keygen first"
                      : "keystore holds several identities; pass --signer");
}

UnixSeconds resolve_timestamp(const SimulatedLedger& ledger, const std::optional<std::string>& at) {
    return at ? parse_utc(*at) : ledger.now();
}

int operational_failure(AppContext& ctx, const Error& error) {
    ctx.err << "error: " << error.what() << "\n";
    return exit_error;
}

struct SubmitResult {
    Digest32 digest;
    Digest32 txid;
    RecordKind kind;
};

void print_submit(AppContext& ctx, const std::string& product, const SubmitResult& result) {
    if (ctx.config.output == OutputMode::json) {
        ctx.out << ordered_json{{"product", product},
                                {"kind", std::string(to_string(result.kind))},
                                {"digest", result.digest.hex()},
                                {"txid", result.txid.hex()}}
                       .dump()
                << "\n";
    } else {
        ctx.out << "digest: " << result.digest.hex() << "\n"
                << "txid: " << result.txid.hex() << "\n";
    }
}

/// Sign, store and anchor one record. The digest printed is the address of
/// the exact stored bytes.
SubmitResult store_and_anchor(const AppConfig& config, SimulatedLedger& ledger,
                              TraceRecord record, const SecretSeed& seed) {
    sign_record(record, seed);
    const Bytes bytes = canonicalize(record, true);
    BlobStore store(config.store_root);
    const BlobAddress address = store.put(bytes);
    const Bytes payload = encode_payload(tx_code_for(record.kind), address);
    const Digest32 txid = ledger.submit(payload);
    return {address, txid, record.kind};
}

std::map<std::string, std::string> parse_assignments(const std::vector<std::string>& pairs) {
    std::map<std::string, std::string> out;
    for (const std::string& pair : pairs) {
        const auto eq = pair.find('=');
        if (eq == std::string::npos || eq == 0) {
            raise(Errc::config_error, "expected name=value, got \"" + pair + "\"");
        }
        out[pair.substr(0, eq)] = pair.substr(eq + 1);
    }
    return out;
}

std::vector<FieldSpec> parse_field_specs(const std::vector<std::string>& fields) {
    std::vector<FieldSpec> specs;
    for (const std::string& field : fields) {
        const auto colon = field.find(':');
        FieldSpec spec;
        spec.name = colon == std::string::npos ? field : field.substr(0, colon);
        if (colon != std::string::npos) {
            const std::string mode = field.substr(colon + 1);
            if (mode == "required") spec.required = true;
            else if (mode == "optional") spec.required = false;
            else raise(Errc::config_error, "field mode must be required or optional: " + field);
        }
        specs.push_back(std::move(spec));
    }
    return specs;
}

struct UpdateOutcome {
    SubmitResult submit;
};

UpdateOutcome submit_update(const AppConfig& config, SimulatedLedger& ledger,
                            const KeyPair& signer, const ProductId& product,
                            std::map<std::string, std::string> fields, UnixSeconds timestamp) {
    BlobStore store(config.store_root);
    TraceEngine engine(ledger, store, build_registry(config));
    const ChainIndex index = engine.build_index();
    const std::vector<VerifiedState> chain = engine.full_chain(product, index);

    const TraceRecord& init_record = chain.front().record;
    if (signer.id != init_record.signer) {
        raise(Errc::not_authorized, "only the init signer " + init_record.signer.hex()
                                        + " may extend this chain");
    }
    TraceRecord record = make_update_record(product, chain.back().digest, std::move(fields),
                                            timestamp, signer.id);
    const std::vector<std::string> missing = check_conformance(record, init_record);
    if (!missing.empty()) {
        std::string detail = "update is missing required fields:";
        for (const std::string& name : missing) detail += " " + name;
        raise(Errc::spec_violation, detail);
    }
    return {store_and_anchor(config, ledger, std::move(record), signer.seed)};
}

} // namespace

int cmd_keygen(AppContext& ctx, const std::string& name) {
    try {
        const KeyPair pair = keygen();
        Keystore keystore(ctx.config.keystore_dir);
        keystore.save(pair);

        IdentityProfile profile;
        profile.id = pair.id;
        profile.public_key = pair.public_key;
        profile.info["name"] = name;
        profile = finalize_profile(std::move(profile), pair.seed);

        std::error_code ec;
        fs::create_directories(ctx.config.profiles_dir, ec);
        const fs::path profile_path = ctx.config.profiles_dir / (pair.id.hex() + ".xml");
        std::ofstream out(profile_path, std::ios::binary | std::ios::trunc);
        if (!out) raise(Errc::io_failure, "cannot write " + profile_path.string());
        const Bytes doc = canonicalize_profile(profile, true);
        out.write(reinterpret_cast<const char*>(doc.data()),
                  static_cast<std::streamsize>(doc.size()));
        out.close();

        if (ctx.config.output == OutputMode::json) {
            ctx.out << ordered_json{{"id", pair.id.hex()},
                                    {"name", name},
                                    {"key_file",
                                     (ctx.config.keystore_dir / (pair.id.hex() + ".key")).string()},
                                    {"profile_file", profile_path.string()}}
                           .dump()
                    << "\n";
        } else {
            ctx.out << pair.id.hex() << "\n";
        }
        return exit_ok;
    } catch (const Error& e) {
        return operational_failure(ctx, e);
    }
}

int cmd_attest(AppContext& ctx, const std::optional<std::string>& signer,
               const std::string& subject, const std::string& statement) {
    try {
        const KeyPair attestor = resolve_signer(ctx.config, signer);
        const IdentityId subject_id = IdentityId::from_hex(subject);
        const Attestation att = make_attestation(subject_id, attestor, statement);
        append_attestation(ctx.config.attestations_file, att);
        if (ctx.config.output == OutputMode::json) {
            ctx.out << ordered_json{{"subject", subject_id.hex()},
                                    {"attestor", attestor.id.hex()},
                                    {"file", ctx.config.attestations_file.string()}}
                           .dump()
                    << "\n";
        } else {
            ctx.out << "attested " << subject_id.hex() << " by " << attestor.id.hex() << "\n";
        }
        return exit_ok;
    } catch (const Error& e) {
        return operational_failure(ctx, e);
    }
}

int cmd_product_init(AppContext& ctx, const std::string& product,
                     const std::vector<std::string>& fields,
                     const std::optional<std::string>& signer,
                     const std::optional<std::string>& at) {
    try {
        const ProductId product_id{product};
        const KeyPair pair = resolve_signer(ctx.config, signer);

        const KeyRegistry registry = build_registry(ctx.config);
        const std::vector<Attestation> attestations =
            load_attestations(ctx.config.attestations_file);
        const std::size_t score = trust_score(pair.id, attestations, registry);
        if (!meets_threshold(score, ctx.config.attestation_threshold)) {
            raise(Errc::threshold_not_met,
                  "signer has " + std::to_string(score) + " attestation(s), needs "
                      + std::to_string(ctx.config.attestation_threshold));
        }

        SimulatedLedger ledger = SimulatedLedger::open(ctx.config.chain_file, ctx.config.ledger);
        BlobStore store(ctx.config.store_root);
        TraceEngine engine(ledger, store, registry);
        const ChainIndex index = engine.build_index();
        const auto group = index.by_product.find(product_id);
        if (group != index.by_product.end()) {
            for (const Digest32& digest : group->second) {
                if (index.by_digest.at(digest).record->kind == RecordKind::init) {
                    raise(Errc::duplicate_init,
                          "product already has a Verified init record " + digest.hex());
                }
            }
        }

        TraceRecord record = make_init_record(product_id, parse_field_specs(fields),
                                              resolve_timestamp(ledger, at), pair.id);
        print_submit(ctx, product, store_and_anchor(ctx.config, ledger, std::move(record),
                                                    pair.seed));
        return exit_ok;
    } catch (const Error& e) {
        return operational_failure(ctx, e);
    }
}

int cmd_product_update(AppContext& ctx, const std::string& product,
                       const std::vector<std::string>& assignments,
                       const std::optional<std::string>& signer,
                       const std::optional<std::string>& at) {
    try {
        const ProductId product_id{product};
        const KeyPair pair = resolve_signer(ctx.config, signer);
        SimulatedLedger ledger = SimulatedLedger::open(ctx.config.chain_file, ctx.config.ledger);
        const UpdateOutcome outcome = submit_update(ctx.config, ledger, pair, product_id,
                                                    parse_assignments(assignments),
                                                    resolve_timestamp(ledger, at));
        print_submit(ctx, product, outcome.submit);
        return exit_ok;
    } catch (const Error& e) {
        return operational_failure(ctx, e);
    }
}

int cmd_product_revoke(AppContext& ctx, const std::string& product, const std::string& target,
                       const std::optional<std::string>& reason,
                       const std::optional<std::string>& signer,
                       const std::optional<std::string>& at) {
    try {
        const ProductId product_id{product};
        const KeyPair pair = resolve_signer(ctx.config, signer);
        const Digest32 target_digest = Digest32::from_hex(target);

        SimulatedLedger ledger = SimulatedLedger::open(ctx.config.chain_file, ctx.config.ledger);
        BlobStore store(ctx.config.store_root);
        TraceEngine engine(ledger, store, build_registry(ctx.config));
        const ChainIndex index = engine.build_index();
        const std::vector<VerifiedState> chain = engine.full_chain(product_id, index);

        if (pair.id != chain.front().record.signer) {
            raise(Errc::not_authorized, "only the init signer "
                                            + chain.front().record.signer.hex()
                                            + " may revoke states of this chain");
        }
        const bool in_chain = std::any_of(chain.begin(), chain.end(), [&](const VerifiedState& s) {
            return s.digest == target_digest;
        });
        if (!in_chain) {
            raise(Errc::unknown_target,
                  "digest " + target_digest.hex() + " is not part of this product's chain");
        }

        TraceRecord record = make_revoke_record(product_id, chain.back().digest, target_digest,
                                                reason, resolve_timestamp(ledger, at), pair.id);
        print_submit(ctx, product, store_and_anchor(ctx.config, ledger, std::move(record),
                                                    pair.seed));
        return exit_ok;
    } catch (const Error& e) {
        return operational_failure(ctx, e);
    }
}

int cmd_ingest(AppContext& ctx, const std::string& events_file,
               const std::optional<std::string>& signer) {
    std::ifstream in(events_file, std::ios::binary);
    if (!in) {
        ctx.err << "error: " << errc_name(Errc::file_unreadable) << ": cannot open "
                << events_file << "\n";
        return exit_error;
    }
    KeyPair pair;
    try {
        pair = resolve_signer(ctx.config, signer);
    } catch (const Error& e) {
        return operational_failure(ctx, e);
    }

    std::size_t succeeded = 0;
    std::vector<std::pair<std::size_t, std::string>> failures;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            const std::string source = j.at("source").get<std::string>();
            if (source != "barcode" && source != "rfid" && source != "manual") {
                raise(Errc::config_error, "unknown event source \"" + source + "\"");
            }
            const auto fields = j.at("fields").get<std::map<std::string, std::string>>();
            if (fields.empty()) {
                raise(Errc::config_error, "event carries no fields");
            }
            const ProductId product{j.at("product").get<std::string>()};
            const UnixSeconds observed = parse_utc(j.at("observed_at").get<std::string>());

            SimulatedLedger ledger =
                SimulatedLedger::open(ctx.config.chain_file, ctx.config.ledger);
            submit_update(ctx.config, ledger, pair, product, fields, observed);
            ++succeeded;
        } catch (const Error& e) {
            failures.emplace_back(lineno, e.what());
        } catch (const nlohmann::json::exception& e) {
            failures.emplace_back(lineno, std::string("bad event: ") + e.what());
        }
    }

    if (ctx.config.output == OutputMode::json) {
        ordered_json failed = ordered_json::array();
        for (const auto& [at_line, what] : failures) {
            failed.push_back({{"line", at_line}, {"error", what}});
        }
        ctx.out << ordered_json{{"succeeded", succeeded},
                                {"failed", failures.size()},
                                {"failures", std::move(failed)}}
                       .dump()
                << "\n";
    } else {
        ctx.out << "succeeded: " << succeeded << "\n" << "failed: " << failures.size() << "\n";
        for (const auto& [at_line, what] : failures) {
            ctx.out << "line " << at_line << ": " << what << "\n";
        }
    }
    return failures.empty() ? exit_ok : exit_error;
}

int cmd_trace(AppContext& ctx, const std::string& product) {
    try {
        const ProductId product_id{product};
        SimulatedLedger ledger = SimulatedLedger::open(ctx.config.chain_file, ctx.config.ledger);
        BlobStore store(ctx.config.store_root);
        TraceEngine engine(ledger, store, build_registry(ctx.config));
        const ChainIndex index = engine.build_index();
        try {
            const TraceReport report = engine.resolve_chain(product_id, index);
            if (ctx.config.output == OutputMode::json) {
                ctx.out << report_to_json(report).dump() << "\n";
            } else {
                write_report_text(ctx.out, report);
            }
            return report.clean() ? exit_ok : exit_verification;
        } catch (const Error& e) {
            // No resolvable chain. Store corruption may be the very reason
            // (e.g. a tampered init blob), so surface the evidence here.
            ctx.err << "error: " << e.what() << "\n";
            const std::vector<Anomaly> store_anomalies = global_store_anomalies(index);
            for (const Anomaly& anomaly : store_anomalies) {
                ctx.err << "anomaly: " << to_string(anomaly.kind);
                if (anomaly.digest) ctx.err << " digest=" << anomaly.digest->hex();
                ctx.err << " " << anomaly.detail << "\n";
            }
            return store_anomalies.empty() ? exit_error : exit_verification;
        }
    } catch (const Error& e) {
        return operational_failure(ctx, e);
    }
}

int cmd_trace_criteria(AppContext& ctx, const std::vector<std::string>& criteria) {
    try {
        SimulatedLedger ledger = SimulatedLedger::open(ctx.config.chain_file, ctx.config.ledger);
        BlobStore store(ctx.config.store_root);
        TraceEngine engine(ledger, store, build_registry(ctx.config));
        const ChainIndex index = engine.build_index();
        const auto matches = engine.forward_trace(parse_assignments(criteria), index);

        bool all_pass = true;
        if (ctx.config.output == OutputMode::json) {
            ordered_json out = ordered_json::array();
            for (const auto& [product, state] : matches) {
                out.push_back({{"product", product.str()}, {"current", state_to_json(state)}});
                all_pass = all_pass && state.verdicts.all_pass();
            }
            ctx.out << out.dump() << "\n";
        } else {
            for (const auto& [product, state] : matches) {
                ctx.out << product.str() << ":\n";
                write_state_text(ctx.out, state, 0);
                all_pass = all_pass && state.verdicts.all_pass();
            }
            ctx.out << "matched: " << matches.size() << "\n";
        }
        return all_pass ? exit_ok : exit_verification;
    } catch (const Error& e) {
        return operational_failure(ctx, e);
    }
}

int cmd_backward(AppContext& ctx, const std::string& digest_hex) {
    try {
        const Digest32 digest = Digest32::from_hex(digest_hex);
        SimulatedLedger ledger = SimulatedLedger::open(ctx.config.chain_file, ctx.config.ledger);
        BlobStore store(ctx.config.store_root);
        TraceEngine engine(ledger, store, build_registry(ctx.config));
        const ChainIndex index = engine.build_index();
        const std::vector<VerifiedState> chain = engine.backward_trace(digest, index);

        bool all_pass = true;
        if (ctx.config.output == OutputMode::json) {
            ordered_json out = ordered_json::array();
            for (const VerifiedState& state : chain) {
                out.push_back(state_to_json(state));
                all_pass = all_pass && state.verdicts.all_pass();
            }
            ctx.out << out.dump() << "\n";
        } else {
            std::size_t position = 0;
            for (const VerifiedState& state : chain) {
                write_state_text(ctx.out, state, position++);
                all_pass = all_pass && state.verdicts.all_pass();
            }
        }
        return all_pass ? exit_ok : exit_verification;
    } catch (const Error& e) {
        if (e.code() == Errc::broken_chain) {
            ctx.err << "error: " << e.what() << "\n";
            return exit_verification;
        }
        return operational_failure(ctx, e);
    }
}

int cmd_verify(AppContext& ctx, const std::string& file_path) {
    try {
        std::ifstream in(file_path, std::ios::binary);
        if (!in) {
            raise(Errc::file_unreadable, "cannot open " + file_path);
        }
        const Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

        SimulatedLedger ledger = SimulatedLedger::open(ctx.config.chain_file, ctx.config.ledger);
        BlobStore store(ctx.config.store_root);
        TraceEngine engine(ledger, store, build_registry(ctx.config));
        const FileVerdict verdict = engine.verify_file_against_chain(bytes, engine.build_index());

        if (ctx.config.output == OutputMode::json) {
            ctx.out << file_verdict_to_json(verdict).dump() << "\n";
        } else {
            switch (verdict.status) {
            case AnchorStatus::anchored:
                ctx.out << "Anchored txid=" << verdict.txid->hex() << " height="
                        << *verdict.height << " code=" << to_string(*verdict.code) << "\n";
                break;
            case AnchorStatus::pending:
                ctx.out << "Pending txid=" << verdict.txid->hex() << "\n";
                break;
            case AnchorStatus::unanchored:
                ctx.out << "Unanchored digest=" << verdict.digest.hex() << "\n";
                break;
            }
        }
        return verdict.status == AnchorStatus::anchored ? exit_ok : exit_verification;
    } catch (const Error& e) {
        return operational_failure(ctx, e);
    }
}

int cmd_ledger_advance(AppContext& ctx, std::int64_t seconds) {
    try {
        if (seconds < 0) raise(Errc::config_error, "cannot advance time backwards");
        SimulatedLedger ledger = SimulatedLedger::open(ctx.config.chain_file, ctx.config.ledger);
        const std::uint64_t produced = ledger.advance_by(seconds);
        if (ctx.config.output == OutputMode::json) {
            ctx.out << ordered_json{{"now", ledger.now()},
                                    {"blocks_produced", produced},
                                    {"tip_height", ledger.tip_height()}}
                           .dump()
                    << "\n";
        } else {
            ctx.out << "now: " << ledger.now() << "\n"
                    << "blocks produced: " << produced << "\n"
                    << "tip height: " << ledger.tip_height() << "\n";
        }
        return exit_ok;
    } catch (const Error& e) {
        return operational_failure(ctx, e);
    }
}

int cmd_ledger_status(AppContext& ctx, const std::string& txid_hex) {
    try {
        const Digest32 txid = Digest32::from_hex(txid_hex);
        SimulatedLedger ledger = SimulatedLedger::open(ctx.config.chain_file, ctx.config.ledger);
        const TxStatus status = ledger.status(txid);
        const std::uint64_t confirmations = ledger.confirmations(txid);
        if (ctx.config.output == OutputMode::json) {
            ctx.out << ordered_json{{"txid", txid.hex()},
                                    {"status", std::string(to_string(status))},
                                    {"confirmations", confirmations}}
                           .dump()
                    << "\n";
        } else {
            ctx.out << to_string(status) << " confirmations=" << confirmations << "\n";
        }
        return exit_ok;
    } catch (const Error& e) {
        return operational_failure(ctx, e);
    }
}

int cmd_ledger_integrity(AppContext& ctx) {
    std::error_code ec;
    if (!fs::exists(ctx.config.chain_file, ec)) {
        ctx.err << "error: no chain file at " << ctx.config.chain_file.string() << "\n";
        return exit_error;
    }
    const IntegrityReport report = verify_chain_file(ctx.config.chain_file);
    if (ctx.config.output == OutputMode::json) {
        ordered_json j{{"ok", report.ok}, {"detail", report.detail}};
        if (report.first_bad_height) j["first_bad_height"] = *report.first_bad_height;
        ctx.out << j.dump() << "\n";
    } else if (report.ok) {
        ctx.out << "OK\n";
    } else {
        ctx.out << "CORRUPT";
        if (report.first_bad_height) ctx.out << " at height " << *report.first_bad_height;
        ctx.out << ": " << report.detail << "\n";
    }
    return report.ok ? exit_ok : exit_verification;
}

} // namespace tracechain
