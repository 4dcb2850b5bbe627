"""Portable chain files: canonical block bytes plus a JSON manifest.

``<name>.blocks`` holds a magic prefix followed by length-prefixed block
encodings in chain order. ``<name>.json`` records the genesis (with params),
the block count, the tip hash and, for ``sim`` keys, the secrets needed to
check signatures in another process.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..core.crypto import import_sim_secret, sim_secret
from ..core.encoding import DecodeError, Reader, Writer
from .messages import Block, Genesis

MAGIC = b"RRRCHAIN\x01"
FORMAT = 1


@dataclass(frozen=True)
class ChainDump:
    genesis: Genesis
    blocks: tuple[Block, ...]


def _referenced_pks(genesis: Genesis, blocks) -> list[bytes]:
    pks = [m.pk for m in genesis.members]
    if genesis.provider_pk:
        pks.append(genesis.provider_pk)
    for b in blocks:
        for e in b.enrolls:
            pks.append(getattr(e, "new_pk", None) or getattr(e, "pk_n"))
    return pks


def _base(path) -> Path:
    p = Path(path)
    if p.suffix in (".json", ".blocks"):
        p = p.with_suffix("")
    return p


def _with(base: Path, ext: str) -> Path:
    return base.with_name(base.name + ext)


def encode_blocks(blocks) -> bytes:
    w = Writer().raw(MAGIC)
    for b in blocks:
        w.blob(b.encoded)
    return w.getvalue()


def decode_blocks(data: bytes) -> tuple[Block, ...]:
    r = Reader(data)
    if r.fixed(len(MAGIC)) != MAGIC:
        raise DecodeError("not a chain file")
    out = []
    while r.remaining:
        out.append(Block.decode(r.blob()))
    return tuple(out)


def dump_chain(path, genesis: Genesis, blocks) -> tuple[Path, Path]:
    """Write ``path``.json and ``path``.blocks; returns both paths."""
    base = _base(path)
    blocks = tuple(blocks)
    secrets = {}
    for pk in _referenced_pks(genesis, blocks):
        seed = sim_secret(pk)
        if seed is not None:
            secrets[pk.hex()] = seed.hex()
    manifest = {
        "format": FORMAT,
        "genesis": genesis.to_json(),
        "count": len(blocks),
        "tip": (blocks[-1].block_hash if blocks else genesis.block_hash).hex(),
        "sim_secrets": dict(sorted(secrets.items())),
    }
    mpath, bpath = _with(base, ".json"), _with(base, ".blocks")
    mpath.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    bpath.write_bytes(encode_blocks(blocks))
    return mpath, bpath


def load_chain(path) -> ChainDump:
    base = _base(path)
    manifest = json.loads(_with(base, ".json").read_text())
    if manifest.get("format") != FORMAT:
        raise DecodeError(f"unsupported chain file format {manifest.get('format')!r}")
    for pk_hex, seed_hex in manifest.get("sim_secrets", {}).items():
        if import_sim_secret(bytes.fromhex(seed_hex)).hex() != pk_hex:
            raise DecodeError("sim secret does not match its public key")
    genesis = Genesis.from_json(manifest["genesis"])
    blocks = decode_blocks(_with(base, ".blocks").read_bytes())
    if len(blocks) != manifest["count"]:
        raise DecodeError("block count disagrees with manifest")
    return ChainDump(genesis, blocks)
