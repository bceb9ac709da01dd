"""Blockchain-anchored supply-chain traceability.

Thin package wrapper around the compiled core: deterministic signed XML
lifecycle records, content-addressed storage, a simulated OP_RETURN ledger
and the trustless trace engine.
"""

from ._core import (
    BlobStore,
    ChainIndex,
    KeyPair,
    Ledger,
    TraceEngine,
    TraceError,
    TraceRecord,
    canonicalize,
    check_conformance,
    classify_payload,
    decode_payload,
    encode_payload,
    hash_record,
    keygen,
    keypair_from_seed,
    make_init_record,
    make_revoke_record,
    make_update_record,
    parse_record,
    sign_bytes,
    sign_record,
    verify_bytes,
)

__all__ = [
    "BlobStore",
    "ChainIndex",
    "KeyPair",
    "Ledger",
    "TraceEngine",
    "TraceError",
    "TraceRecord",
    "canonicalize",
    "check_conformance",
    "classify_payload",
    "decode_payload",
    "encode_payload",
    "hash_record",
    "keygen",
    "keypair_from_seed",
    "make_init_record",
    "make_revoke_record",
    "make_update_record",
    "parse_record",
    "sign_bytes",
    "sign_record",
    "verify_bytes",
]
