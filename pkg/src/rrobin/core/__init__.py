from .crypto import (
    DIGEST_SIZE,
    KeyPair,
    SeedUpdate,
    Tag,
    hash_bytes,
    hash_parts,
    pk_hash,
    sign,
    verify,
    vrf_evaluate,
    vrf_verify,
)
from .params import ParamError, ProtocolParams
from .verdict import Verdict

__all__ = [
    "DIGEST_SIZE",
    "KeyPair",
    "ParamError",
    "ProtocolParams",
    "SeedUpdate",
    "Tag",
    "Verdict",
    "hash_bytes",
    "hash_parts",
    "pk_hash",
    "sign",
    "verify",
    "vrf_evaluate",
    "vrf_verify",
]
