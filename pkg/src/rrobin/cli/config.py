"""Run configuration files: JSON with defaults, strict keys and located errors."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, fields

from ..adversary.strategies import AdversaryConfig
from ..core.params import ProtocolParams
from ..netsim.config import LatencyModel, NetConfig

SECTIONS = ("params", "net", "adversary", "rounds", "seed", "output")
OUTPUT_KEYS = ("dir", "prefix", "dump")


class ConfigFileError(ValueError):
    """A configuration problem, located by line when the text is available."""

    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


@dataclass(frozen=True)
class OutputSpec:
    dir: str | None = None
    prefix: str = "run"
    dump: bool = False


@dataclass(frozen=True)
class RunConfig:
    params: ProtocolParams = field(default_factory=ProtocolParams)
    net: NetConfig = field(default_factory=NetConfig)
    adversary: AdversaryConfig = field(default_factory=AdversaryConfig)
    rounds: int = 100
    seed: int = 0
    output: OutputSpec = field(default_factory=OutputSpec)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "net": self.net.to_dict(),
            "adversary": self.adversary.to_dict(),
            "rounds": self.rounds,
            "seed": self.seed,
            "output": {"dir": self.output.dir, "prefix": self.output.prefix, "dump": self.output.dump},
        }


def _line_of(text: str | None, key: str) -> int | None:
    if not text:
        return None
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _type_ok(value, default) -> bool:
    if isinstance(default, bool):
        return isinstance(value, bool)
    if isinstance(default, int):
        return isinstance(value, int) and not isinstance(value, bool)
    if isinstance(default, float):
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if isinstance(default, str):
        return isinstance(value, str)
    return True


def _check_section(name: str, data, cls, text, source) -> None:
    if not isinstance(data, dict):
        raise ConfigFileError(f"'{name}' must be an object", _line_of(text, name), source)
    defaults = cls()
    names = {f.name for f in fields(cls)}
    for key, value in data.items():
        if key not in names:
            raise ConfigFileError(f"unknown key '{name}.{key}'", _line_of(text, key), source)
        default = getattr(defaults, key)
        if value is not None and not _type_ok(value, default):
            raise ConfigFileError(
                f"'{name}.{key}' should be {type(default).__name__}, got {type(value).__name__}",
                _line_of(text, key),
                source,
            )


def parse_run_config(data: dict, text: str | None = None, source: str = "<config>") -> RunConfig:
    """Build and validate a RunConfig from decoded JSON; ``text`` lets errors carry line numbers."""
    if not isinstance(data, dict):
        raise ConfigFileError("top level must be an object", 1, source)
    for key in data:
        if key not in SECTIONS:
            raise ConfigFileError(f"unknown section '{key}'", _line_of(text, key), source)
    try:
        _check_section("params", data.get("params", {}), ProtocolParams, text, source)
        params = ProtocolParams.from_dict(data.get("params", {}))
        net_data = dict(data.get("net", {}))
        _check_section("net", net_data, NetConfig, text, source)
        if "latency" in net_data:
            _check_section("latency", net_data["latency"], LatencyModel, text, source)
        adv_data = data.get("adversary", {})
        _check_section("adversary", adv_data, AdversaryConfig, text, source)
        out_data = data.get("output", {})
        _check_section("output", out_data, OutputSpec, text, source)
        rounds = data.get("rounds", 100)
        seed = data.get("seed", net_data.get("seed", 0))
        for key, v in (("rounds", rounds), ("seed", seed)):
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise ConfigFileError(f"'{key}' must be a non-negative integer", _line_of(text, key), source)
        if rounds < 1:
            raise ConfigFileError("'rounds' must be >= 1", _line_of(text, "rounds"), source)
        net_data["seed"] = seed
        net = NetConfig.from_dict(net_data)
        adversary = AdversaryConfig.from_dict(adv_data)
        cfg = RunConfig(params, net, adversary, rounds, seed, OutputSpec(**out_data))
        validate_run_config(cfg)
    except ConfigFileError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigFileError(str(exc), None, source) from exc
    return cfg


def validate_run_config(cfg: RunConfig) -> None:
    cfg.net.validate(cfg.params)
    cfg.adversary.validate()


def load_run_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigFileError(f"invalid JSON: {exc.msg} (column {exc.colno})", exc.lineno, path) from exc
    return parse_run_config(data, text, path)
