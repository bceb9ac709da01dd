#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <sstream>

#include <json.hpp>

#include "tracechain/app.hpp"
#include "tracechain/blob_store.hpp"
#include "tracechain/errors.hpp"
#include "tracechain/identity.hpp"
#include "tracechain/ledger.hpp"
#include "tracechain/record.hpp"
#include "tracechain/render.hpp"
#include "tracechain/trace_engine.hpp"
#include "tracechain/tx_codec.hpp"

namespace py = pybind11;
using namespace tracechain;

namespace {

Bytes as_bytes(const py::bytes& data) {
    const std::string raw = data;
    return to_bytes(raw);
}

py::bytes as_py(const Bytes& data) {
    return py::bytes(reinterpret_cast<const char*>(data.data()), data.size());
}

template <std::size_t N>
std::array<std::uint8_t, N> fixed_from_hex(const std::string& hex) {
    const Bytes raw = from_hex(hex);
    if (raw.size() != N) {
        raise(Errc::malformed_key, "expected " + std::to_string(N * 2) + " hex chars");
    }
    std::array<std::uint8_t, N> out{};
    std::copy(raw.begin(), raw.end(), out.begin());
    return out;
}

TxCode code_from_name(const std::string& name) {
    if (name == "IT") return TxCode::IT;
    if (name == "UT") return TxCode::UT;
    if (name == "RT") return TxCode::RT;
    raise(Errc::unknown_code, "code must be IT, UT or RT");
}

py::object json_to_py(const nlohmann::ordered_json& j) {
    using value_t = nlohmann::ordered_json::value_t;
    switch (j.type()) {
    case value_t::null: return py::none();
    case value_t::boolean: return py::bool_(j.get<bool>());
    case value_t::number_integer: return py::int_(j.get<std::int64_t>());
    case value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
    case value_t::number_float: return py::float_(j.get<double>());
    case value_t::string: return py::str(j.get<std::string>());
    case value_t::array: {
        py::list out;
        for (const auto& item : j) out.append(json_to_py(item));
        return out;
    }
    case value_t::object: {
        py::dict out;
        for (const auto& [key, value] : j.items()) out[py::str(key)] = json_to_py(value);
        return out;
    }
    default: return py::none();
    }
}

KeyRegistry registry_from_dict(const std::map<std::string, std::string>& keys) {
    KeyRegistry registry;
    for (const auto& [id_hex, pub_hex] : keys) {
        registry.add(IdentityId::from_hex(id_hex), fixed_from_hex<32>(pub_hex));
    }
    return registry;
}

// Keeps ledger + store + engine together so python never holds a dangling
// reference between them.
struct PyEngine {
    SimulatedLedger* ledger;
    BlobStore* store;
    TraceEngine engine;

    PyEngine(SimulatedLedger& l, BlobStore& s, const std::map<std::string, std::string>& keys)
        : ledger(&l), store(&s), engine(l, s, registry_from_dict(keys)) {}
};

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Blockchain-anchored supply-chain traceability core";

    py::register_exception<Error>(m, "TraceError");

    // --- record model -----------------------------------------------------
    py::class_<TraceRecord>(m, "TraceRecord")
        .def_property_readonly("kind",
                               [](const TraceRecord& r) { return std::string(to_string(r.kind)); })
        .def_property_readonly("product",
                               [](const TraceRecord& r) { return r.product.str(); })
        .def_property_readonly("prev",
                               [](const TraceRecord& r) -> std::optional<std::string> {
                                   if (!r.prev) return std::nullopt;
                                   return r.prev->hex();
                               })
        .def_property_readonly("timestamp",
                               [](const TraceRecord& r) { return format_utc(r.timestamp); })
        .def_property_readonly("state", [](const TraceRecord& r) { return r.state; })
        .def_property_readonly("schema",
                               [](const TraceRecord& r) {
                                   std::vector<std::pair<std::string, bool>> out;
                                   for (const FieldSpec& f : r.schema)
                                       out.emplace_back(f.name, f.required);
                                   return out;
                               })
        .def_property_readonly("revokes",
                               [](const TraceRecord& r) -> std::optional<std::string> {
                                   if (!r.revokes) return std::nullopt;
                                   return r.revokes->hex();
                               })
        .def_property_readonly("reason", [](const TraceRecord& r) { return r.reason; })
        .def_property_readonly("signer", [](const TraceRecord& r) { return r.signer.hex(); })
        .def("__eq__", [](const TraceRecord& a, const TraceRecord& b) { return a == b; })
        .def("__repr__", [](const TraceRecord& r) {
            return "<TraceRecord " + std::string(to_string(r.kind)) + " " + r.product.str() + ">";
        });

    m.def("make_init_record",
          [](const std::string& product, const std::vector<std::pair<std::string, bool>>& schema,
             const std::string& timestamp, const std::string& signer) {
              std::vector<FieldSpec> fields;
              for (const auto& [name, required] : schema) fields.push_back({name, required});
              return make_init_record(ProductId(product), std::move(fields),
                                      parse_utc(timestamp), IdentityId::from_hex(signer));
          },
          py::arg("product"), py::arg("schema"), py::arg("timestamp"), py::arg("signer"));
    m.def("make_update_record",
          [](const std::string& product, const std::string& prev,
             const std::map<std::string, std::string>& state, const std::string& timestamp,
             const std::string& signer) {
              return make_update_record(ProductId(product), Digest32::from_hex(prev), state,
                                        parse_utc(timestamp), IdentityId::from_hex(signer));
          },
          py::arg("product"), py::arg("prev"), py::arg("state"), py::arg("timestamp"),
          py::arg("signer"));
    m.def("make_revoke_record",
          [](const std::string& product, const std::string& prev, const std::string& revokes,
             const std::optional<std::string>& reason, const std::string& timestamp,
             const std::string& signer) {
              return make_revoke_record(ProductId(product), Digest32::from_hex(prev),
                                        Digest32::from_hex(revokes), reason,
                                        parse_utc(timestamp), IdentityId::from_hex(signer));
          },
          py::arg("product"), py::arg("prev"), py::arg("revokes"), py::arg("reason"),
          py::arg("timestamp"), py::arg("signer"));

    m.def("canonicalize",
          [](const TraceRecord& record, bool include_signature) {
              return as_py(canonicalize(record, include_signature));
          },
          py::arg("record"), py::arg("include_signature") = true);
    m.def("parse_record", [](const py::bytes& data) { return parse_record(as_bytes(data)); });
    m.def("hash_record", [](const py::bytes& data) { return hash_record(as_bytes(data)).hex(); });
    m.def("sign_record", [](TraceRecord record, const std::string& seed) {
        sign_record(record, fixed_from_hex<32>(seed));
        return record;
    });
    m.def("check_conformance", [](const TraceRecord& update, const TraceRecord& init_spec) {
        return check_conformance(update, init_spec);
    });

    // --- tx codec ----------------------------------------------------------
    m.def("encode_payload", [](const std::string& code, const std::string& digest_hex) {
        return as_py(encode_payload(code_from_name(code), Digest32::from_hex(digest_hex)));
    });
    m.def("decode_payload", [](const py::bytes& data) {
        const TxPayload payload = decode_payload(as_bytes(data));
        return std::make_pair(std::string(to_string(payload.code)), payload.digest.hex());
    });
    m.def("classify_payload",
          [](const py::bytes& data) -> std::optional<std::pair<std::string, std::string>> {
              const auto payload = classify_payload(as_bytes(data));
              if (!payload) return std::nullopt;
              return std::make_pair(std::string(to_string(payload->code)), payload->digest.hex());
          });

    // --- identity ----------------------------------------------------------
    py::class_<KeyPair>(m, "KeyPair")
        .def_property_readonly("seed", [](const KeyPair& k) { return to_hex(k.seed); })
        .def_property_readonly("public_key", [](const KeyPair& k) { return to_hex(k.public_key); })
        .def_property_readonly("id", [](const KeyPair& k) { return k.id.hex(); });
    m.def("keygen", &keygen);
    m.def("keypair_from_seed",
          [](const std::string& seed) { return keypair_from_seed(fixed_from_hex<32>(seed)); });
    m.def("sign_bytes", [](const std::string& seed, const py::bytes& data) {
        return to_hex(sign_bytes(fixed_from_hex<32>(seed), as_bytes(data)));
    });
    m.def("verify_bytes",
          [](const std::string& public_key, const py::bytes& data, const std::string& signature) {
              return verify_bytes(fixed_from_hex<32>(public_key), as_bytes(data),
                                  fixed_from_hex<64>(signature));
          });

    // --- ledger -------------------------------------------------------------
    py::class_<SimulatedLedger>(m, "Ledger")
        .def(py::init([](UnixSeconds block_interval, std::uint64_t confirmation_depth,
                         std::uint64_t base_fee, std::uint64_t per_byte_fee) {
                 return SimulatedLedger(
                     {block_interval, confirmation_depth, base_fee, per_byte_fee});
             }),
             py::arg("block_interval") = 600, py::arg("confirmation_depth") = 3,
             py::arg("base_fee") = 100, py::arg("per_byte_fee") = 1)
        .def_static("open",
                    [](const std::string& path, UnixSeconds block_interval,
                       std::uint64_t confirmation_depth, std::uint64_t base_fee,
                       std::uint64_t per_byte_fee) {
                        return SimulatedLedger::open(
                            path, {block_interval, confirmation_depth, base_fee, per_byte_fee});
                    },
                    py::arg("path"), py::arg("block_interval") = 600,
                    py::arg("confirmation_depth") = 3, py::arg("base_fee") = 100,
                    py::arg("per_byte_fee") = 1)
        .def("submit",
             [](SimulatedLedger& ledger, const py::bytes& payload) {
                 return ledger.submit(as_bytes(payload)).hex();
             })
        .def("status",
             [](const SimulatedLedger& ledger, const std::string& txid) {
                 return std::string(to_string(ledger.status(Digest32::from_hex(txid))));
             })
        .def("confirmations",
             [](const SimulatedLedger& ledger, const std::string& txid) {
                 return ledger.confirmations(Digest32::from_hex(txid));
             })
        .def("advance_by", &SimulatedLedger::advance_by)
        .def("advance_to", &SimulatedLedger::advance_to)
        .def("verify_integrity",
             [](const SimulatedLedger& ledger) {
                 const IntegrityReport report = ledger.verify_chain_integrity();
                 return py::make_tuple(report.ok, report.first_bad_height, report.detail);
             })
        .def_property_readonly("now", &SimulatedLedger::now)
        .def_property_readonly("tip_height", &SimulatedLedger::tip_height)
        .def_property_readonly("mempool_size", &SimulatedLedger::mempool_size);

    // --- blob store ----------------------------------------------------------
    py::class_<BlobStore>(m, "BlobStore")
        .def(py::init<std::filesystem::path>())
        .def("put",
             [](BlobStore& store, const py::bytes& data) { return store.put(as_bytes(data)).hex(); })
        .def("get",
             [](const BlobStore& store, const std::string& address) {
                 return as_py(store.get(Digest32::from_hex(address)));
             })
        .def("contains", [](const BlobStore& store, const std::string& address) {
            return store.contains(Digest32::from_hex(address));
        });

    // --- trace engine ----------------------------------------------------------
    py::class_<ChainIndex>(m, "ChainIndex")
        .def_property_readonly("tip_height", [](const ChainIndex& i) { return i.tip_height; })
        .def_property_readonly("products", [](const ChainIndex& i) {
            std::vector<std::string> out;
            for (const auto& [product, digests] : i.by_product) {
                (void)digests;
                out.push_back(product.str());
            }
            return out;
        });

    py::class_<PyEngine>(m, "TraceEngine")
        .def(py::init<SimulatedLedger&, BlobStore&, const std::map<std::string, std::string>&>(),
             py::arg("ledger"), py::arg("store"), py::arg("keys"),
             py::keep_alive<1, 2>(), py::keep_alive<1, 3>())
        .def("build_index", [](const PyEngine& e) { return e.engine.build_index(); })
        .def("trace",
             [](const PyEngine& e, const std::string& product, const ChainIndex& index) {
                 return json_to_py(
                     report_to_json(e.engine.resolve_chain(ProductId(product), index)));
             })
        .def("backward",
             [](const PyEngine& e, const std::string& digest, const ChainIndex& index) {
                 py::list out;
                 for (const VerifiedState& state :
                      e.engine.backward_trace(Digest32::from_hex(digest), index)) {
                     out.append(json_to_py(state_to_json(state)));
                 }
                 return out;
             })
        .def("forward",
             [](const PyEngine& e, const std::map<std::string, std::string>& criteria,
                const ChainIndex& index) {
                 py::list out;
                 for (const auto& [product, state] : e.engine.forward_trace(criteria, index)) {
                     py::dict item;
                     item["product"] = product.str();
                     item["current"] = json_to_py(state_to_json(state));
                     out.append(item);
                 }
                 return out;
             })
        .def("verify_file", [](const PyEngine& e, const py::bytes& data, const ChainIndex& index) {
            return json_to_py(
                file_verdict_to_json(e.engine.verify_file_against_chain(as_bytes(data), index)));
        });
}
