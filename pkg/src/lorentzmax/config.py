"""Experiment configuration: a flat YAML mapping with strict keys.

Example::

    dimension: 1
    L: 8
    n: 1024
    u: {kind: power, alpha: 0}
    w: {kind: power, alpha: 0}
    p: 2
    E: [[0, 1]]
    lambdas: [0.5]
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from typing import Any

import yaml

from .errors import InvalidArgument, LorentzMaxError
from .lorentz import LorentzParams
from .measure import GridDomain, GridFunction, GridSet, WeightU, WeightW


class ParseError(LorentzMaxError):
    """Malformed text or an unknown key; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        self.line = line
        self.key = key
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class ValidationError(LorentzMaxError):
    """A well-formed config whose value for ``key`` is not acceptable."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


@dataclass
class ExperimentConfig:
    dimension: int = 1
    L: float = 8.0
    n: int | None = None
    levels: list | None = None
    u: dict = field(default_factory=lambda: {"kind": "power", "alpha": 0.0})
    w: dict = field(default_factory=lambda: {"kind": "power", "alpha": 0.0})
    p: float = 2.0
    E: list | None = None
    f: list | None = None
    lambdas: list | None = None
    r: float | None = None
    c: float | None = None
    tgrid: list | None = None
    q_grid: list | None = None
    kind: str | None = None
    trials: int = 32
    budget: int = 16
    seed: int = 0
    expect: dict | None = None
    out: str | None = None

    # -- derived objects ----------------------------------------------------

    def resolution_levels(self) -> list[int]:
        if self.levels:
            return list(self.levels)
        return [self.n if self.n is not None else 256]

    def domain(self, cells: int | None = None) -> GridDomain:
        return GridDomain(self.dimension, self.L, cells or self.resolution_levels()[0])

    def weight_u(self, cells: int | None = None) -> WeightU:
        return WeightU.from_spec(self.domain(cells), self.u)

    def weight_w(self) -> WeightW:
        return WeightW.from_spec(self.w)

    def params(self, cells: int | None = None) -> LorentzParams:
        return LorentzParams(self.p, self.weight_u(cells), self.weight_w())

    def set_E(self, cells: int | None = None) -> GridSet:
        if self.E is None:
            raise ValidationError("E", "this operation needs a set E")
        return GridSet.from_boxes(self.domain(cells), self.E)

    def function(self, cells: int | None = None) -> GridFunction:
        if self.f is not None:
            return GridFunction.from_boxes(self.domain(cells), [tuple(x) for x in self.f])
        if self.E is not None:
            return self.set_E(cells).indicator()
        raise ValidationError("f", "this operation needs a function f (or a set E)")

    def to_dict(self) -> dict:
        """Only the fields that differ from the defaults."""
        default = ExperimentConfig()
        return {k: v for k, v in asdict(self).items() if getattr(default, k) != v}


_KEYS = {f.name for f in fields(ExperimentConfig)}


def _key_lines(text: str) -> dict:
    try:
        node = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ParseError(str(exc).splitlines()[0], mark.line + 1 if mark else None) from None
    if node is None:
        return {}
    if not isinstance(node, yaml.MappingNode):
        raise ParseError("the config must be a mapping", node.start_mark.line + 1)
    return {k.value: k.start_mark.line + 1 for k, _ in node.value}


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate; raises :class:`ParseError` or :class:`ValidationError`."""
    lines = _key_lines(text)
    data = yaml.safe_load(text) or {}
    for key in data:
        if key not in _KEYS:
            raise ParseError(f"unknown key {key!r}", lines.get(key), key)
    cfg = ExperimentConfig(**data)
    validate(cfg)
    return cfg


def dump_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False, default_flow_style=None)


def _number(key, value, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(key, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ValidationError(key, f"expected an integer, got {value!r}")
    if not math.isfinite(value):
        raise ValidationError(key, "must be finite")
    return value


def _weight_spec(key, spec, allowed):
    if not isinstance(spec, dict) or spec.get("kind") not in allowed:
        raise ValidationError(key, f"expected a mapping with kind in {sorted(allowed)}")
    return spec


def validate(cfg: ExperimentConfig) -> None:
    if cfg.dimension not in (1, 2):
        raise ValidationError("dimension", "must be 1 or 2")
    if not _number("L", cfg.L) > 0:
        raise ValidationError("L", "must be positive")
    if cfg.n is not None and not _number("n", cfg.n, integer=True) >= 1:
        raise ValidationError("n", "must be a positive integer")
    if cfg.levels is not None:
        if not isinstance(cfg.levels, list) or not cfg.levels:
            raise ValidationError("levels", "must be a nonempty list")
        for v in cfg.levels:
            if not _number("levels", v, integer=True) >= 1:
                raise ValidationError("levels", "every level must be a positive integer")
    if not _number("p", cfg.p) > 0:
        raise ValidationError("p", "must be positive")
    _weight_spec("u", cfg.u, {"power", "constant"})
    if cfg.u["kind"] == "power" and not _number("u", cfg.u.get("alpha", 0.0)) > -cfg.dimension:
        raise ValidationError("u", f"alpha must exceed -{cfg.dimension} (local integrability)")
    _weight_spec("w", cfg.w, {"power", "piecewise"})
    if cfg.w["kind"] == "power" and not _number("w", cfg.w.get("alpha", 0.0)) > -1:
        raise ValidationError("w", "alpha must exceed -1")
    for key in ("lambdas",):
        vals = getattr(cfg, key)
        if vals is not None:
            if not isinstance(vals, list) or not vals:
                raise ValidationError(key, "must be a nonempty list")
            for lam in vals:
                if not 0 < _number(key, lam) < 1:
                    raise ValidationError(key, f"every value must lie in (0, 1), got {lam}")
    for key in ("r", "c"):
        v = getattr(cfg, key)
        if v is not None and not _number(key, v) > 0:
            raise ValidationError(key, "must be positive")
    for key in ("tgrid", "q_grid"):
        vals = getattr(cfg, key)
        if vals is not None:
            if not isinstance(vals, list) or not vals or not all(_number(key, v) > 0 for v in vals):
                raise ValidationError(key, "must be a nonempty list of positive numbers")
    if cfg.kind is not None and cfg.kind not in ("weak", "strong"):
        raise ValidationError("kind", "must be 'weak' or 'strong'")
    for key in ("trials", "budget"):
        if not _number(key, getattr(cfg, key), integer=True) >= 1:
            raise ValidationError(key, "must be a positive integer")
    _number("seed", cfg.seed, integer=True)
    if cfg.expect is not None and not isinstance(cfg.expect, dict):
        raise ValidationError("expect", "must be a mapping of metric -> {value, rtol} or {min, max}")
    # geometry and weights must build on the first level
    for key, build in (("E", lambda: cfg.E is not None and cfg.set_E()),
                       ("f", lambda: cfg.f is not None and cfg.function()),
                       ("u", cfg.weight_u), ("w", cfg.weight_w)):
        try:
            build()
        except (InvalidArgument, KeyError, TypeError, ValueError) as exc:
            raise ValidationError(key, str(exc)) from None
    try:
        cfg.params()
    except InvalidArgument as exc:
        raise ValidationError("w", str(exc)) from None


def check_expectations(expect: dict | None, metrics: dict[str, Any]) -> list[str]:
    """Failed expectations as messages (empty when all hold)."""
    failures = []
    for name, rule in (expect or {}).items():
        if name not in metrics:
            failures.append(f"{name}: not produced by this operation")
            continue
        got = metrics[name]
        if isinstance(rule, dict) and "value" in rule:
            rtol = float(rule.get("rtol", 1e-6))
            if not abs(got - rule["value"]) <= rtol * abs(rule["value"]):
                failures.append(f"{name}: {got!r} not within {rtol:g} of {rule['value']!r}")
        elif isinstance(rule, dict):
            if "min" in rule and not got >= rule["min"]:
                failures.append(f"{name}: {got!r} < {rule['min']!r}")
            if "max" in rule and not got <= rule["max"]:
                failures.append(f"{name}: {got!r} > {rule['max']!r}")
        elif got != rule:
            failures.append(f"{name}: {got!r} != {rule!r}")
    return failures
