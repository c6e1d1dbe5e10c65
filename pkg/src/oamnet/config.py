"""Config file format shared by every CLI command.

One YAML (or JSON) mapping::

    architecture: p2mp-general        # any fabric architecture
    dims: {d_s: 2, d_r: 3}
    noise: {"*": [0, 0, 2*pi/15]}     # optional, sorter name -> per-arm phase errors
    seed: 7                           # optional, default 0
    simulate: {min_prob: 0.96}        # optional threshold for noisy runs
    sweep: {magnitudes: [0, 2*pi/15], samples: 200, workers: 1, sorters: [demux]}
    protocol: {type: bb84, bits: 10000, sender: 0, receiver: 1}

Numbers may be written as arithmetic over ``pi``. Unknown keys are errors.
"""

from __future__ import annotations

import ast
import math
import operator
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .fabric import NetworkSpec, SpecError

TOP_KEYS = {"architecture", "dims", "noise", "seed", "simulate", "sweep", "protocol"}
SWEEP_KEYS = {"magnitudes", "samples", "workers", "sorters"}
SIMULATE_KEYS = {"min_prob", "include_self", "reverse"}
PROTOCOL_KEYS = {
    "bb84": {"type", "bits", "sender", "receiver", "bit_seed", "basis_seed"},
    "active": {"type", "pair", "rounds"},
    "passive": {"type", "samples", "rounds"},
    "bbm92": {"type", "pair", "samples", "rounds"},
}
DEFAULT_SEED = 0


class ConfigError(ValueError):
    pass


_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.Pow: operator.pow, ast.USub: operator.neg,
        ast.UAdd: operator.pos}


def number(value) -> float:
    """A float, or an arithmetic string over numbers and ``pi``."""
    if isinstance(value, bool):
        raise ConfigError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"expected a number, got {value!r}")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.operand))
        raise ConfigError(f"unsupported expression {value!r}")

    try:
        return float(ev(ast.parse(value, mode="eval")))
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse number {value!r}") from exc


def _check_keys(section: str, data, allowed: set) -> dict:
    if not isinstance(data, dict):
        raise ConfigError(f"{section} must be a mapping, got {type(data).__name__}")
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {section}: {sorted(unknown)}; allowed {sorted(allowed)}")
    return data


def _port(value):
    return tuple(value) if isinstance(value, list) else value


@dataclass
class Config:
    spec: NetworkSpec
    seed: int = DEFAULT_SEED
    simulate: dict = field(default_factory=dict)
    sweep: dict | None = None
    protocol: dict | None = None


def parse(data) -> Config:
    data = _check_keys("config", data, TOP_KEYS)
    if "architecture" not in data or "dims" not in data:
        raise ConfigError("config needs 'architecture' and 'dims'")
    dims = _check_keys("dims", data["dims"], {"d", "d_s", "d_r", "n", "groups"})
    for k, v in dims.items():
        if not isinstance(v, int) or isinstance(v, bool):
            raise ConfigError(f"dims.{k} must be an integer, got {v!r}")
    noise = data.get("noise")
    if noise is not None:
        if not isinstance(noise, dict):
            raise ConfigError("noise must map sorter names to phase-error lists")
        noise = {str(k): [number(x) for x in v] for k, v in noise.items()}
    spec = NetworkSpec(str(data["architecture"]), dims, noise)
    try:
        spec.validate()
    except SpecError as exc:
        raise ConfigError(str(exc)) from exc

    seed = data.get("seed", DEFAULT_SEED)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {seed!r}")
    simulate = dict(_check_keys("simulate", data.get("simulate", {}), SIMULATE_KEYS))
    if "min_prob" in simulate:
        simulate["min_prob"] = number(simulate["min_prob"])

    sweep = data.get("sweep")
    if sweep is not None:
        sweep = dict(_check_keys("sweep", sweep, SWEEP_KEYS))
        mags = sweep.get("magnitudes")
        if not isinstance(mags, list) or not mags:
            raise ConfigError("sweep.magnitudes must be a non-empty list")
        sweep["magnitudes"] = [number(m) for m in mags]

    protocol = data.get("protocol")
    if protocol is not None:
        if not isinstance(protocol, dict) or protocol.get("type") not in PROTOCOL_KEYS:
            raise ConfigError(f"protocol.type must be one of {sorted(PROTOCOL_KEYS)}")
        protocol = dict(_check_keys("protocol", protocol, PROTOCOL_KEYS[protocol["type"]]))
        for key in ("sender", "receiver"):
            if key in protocol:
                protocol[key] = _port(protocol[key])
    return Config(spec, seed, simulate, sweep, protocol)


def load(path) -> Config:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: malformed config: {exc}") from exc
    return parse(data)
