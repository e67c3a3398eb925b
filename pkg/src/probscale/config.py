"""JSON experiment configs with field-path diagnostics."""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from . import _io
from .counting import is_dyadic
from .exponents import EquationKind, NonlinearitySpec, Regime

FIELDS = ("eq", "d", "p", "kind", "alpha", "Nset", "samples", "seed", "dataMode", "regime",
          "tolerance", "minPoints", "method")
REQUIRED = ("eq", "d", "p", "alpha", "Nset")


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


@dataclass(frozen=True)
class ExperimentConfig:
    eq: EquationKind
    d: int
    nl: NonlinearitySpec
    alpha: Fraction
    Nset: tuple[int, ...]
    samples: int = 32
    seed: int = 0
    data_mode: str = "gaussian"
    regime: Regime = Regime.HHH
    tolerance: float = 0.5
    min_points: int = 3
    method: str = "auto"

    def to_json(self) -> dict:
        return {
            "eq": self.eq.value, "d": self.d, "p": self.nl.p, "kind": self.nl.label,
            "alpha": _io.format_rational(self.alpha), "Nset": list(self.Nset),
            "samples": self.samples, "seed": self.seed, "dataMode": self.data_mode,
            "regime": self.regime.value, "tolerance": self.tolerance,
            "minPoints": self.min_points, "method": self.method,
        }

    def run(self, threads: int = 1):
        from .randfield.experiment import heat_experiment, scaling_experiment

        if self.eq is EquationKind.HEAT:
            return heat_experiment(self.d, self.nl.p, self.alpha, self.Nset, self.regime,
                                   self.tolerance, self.min_points)
        return scaling_experiment(self.eq, self.d, self.nl, self.alpha, self.Nset, self.samples,
                                  seed=self.seed, data_mode=self.data_mode, regime=self.regime,
                                  tolerance=self.tolerance, method=self.method, threads=threads,
                                  min_points=self.min_points)


def _int(doc, key, lo=None, hi=None) -> int:
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(key, f"expected an integer, got {v!r}")
    if lo is not None and v < lo or hi is not None and v > hi:
        raise ConfigError(key, f"{v} outside [{lo}, {hi}]")
    return v


def _alpha(v: Any) -> Fraction:
    if isinstance(v, bool):
        raise ConfigError("alpha", "expected a number or an 'a/b' string")
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, float):
        return Fraction(repr(v))
    if isinstance(v, str):
        try:
            return Fraction(v.strip().replace("−", "-"))
        except ValueError:
            raise ConfigError("alpha", f"cannot parse {v!r} as a rational") from None
    raise ConfigError("alpha", "expected a number or an 'a/b' string")


def parse_config(doc: Any) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("$", "top level must be a JSON object")
    for key in doc:
        if key not in FIELDS:
            raise ConfigError(key, f"unknown field (allowed: {', '.join(FIELDS)})")
    for key in REQUIRED:
        if key not in doc:
            raise ConfigError(key, "missing required field")
    try:
        eq = EquationKind.parse(doc["eq"])
    except ValueError as exc:
        raise ConfigError("eq", str(exc)) from None
    d = _int(doc, "d", 1, 3)
    p = _int(doc, "p", 2, 9)
    try:
        nl = NonlinearitySpec.parse(p, str(doc.get("kind", "power")))
        if nl.kind.value != "power" and eq is not EquationKind.SCHRODINGER:
            raise ValueError(f"kind {nl.label} is only defined for schrodinger")
    except ValueError as exc:
        raise ConfigError("kind", str(exc)) from None
    alpha = _alpha(doc["alpha"])
    nset = doc["Nset"]
    if not isinstance(nset, list) or not nset:
        raise ConfigError("Nset", "expected a non-empty list of band sizes")
    for i, n in enumerate(nset):
        if isinstance(n, bool) or not isinstance(n, int) or not is_dyadic(n) or n < 2:
            raise ConfigError(f"Nset[{i}]", f"{n!r} is not a power of two >= 2")
    if len(set(nset)) != len(nset):
        raise ConfigError("Nset", "entries must be distinct")
    samples = _int(doc, "samples", 8) if "samples" in doc else 32
    seed = _int(doc, "seed", 0, 2 ** 64 - 1) if "seed" in doc else 0
    default_mode = "oracle" if eq is EquationKind.HEAT else "gaussian"
    mode = str(doc.get("dataMode", default_mode)).strip().lower()
    mode = {"gaussianrandom": "gaussian", "deterministicones": "ones"}.get(mode, mode)
    if mode not in ("gaussian", "ones", "oracle"):
        raise ConfigError("dataMode", f"unknown data mode {doc['dataMode']!r}")
    if eq is EquationKind.HEAT and mode != "oracle":
        raise ConfigError("dataMode", "heat is oracle-only; use dataMode 'oracle'")
    if eq is not EquationKind.HEAT and mode == "oracle":
        raise ConfigError("dataMode", "dataMode 'oracle' is reserved for heat")
    try:
        regime = Regime(str(doc.get("regime", "hhh")).lower())
    except ValueError:
        raise ConfigError("regime", f"expected hhh or hhl, got {doc['regime']!r}") from None
    tol = doc.get("tolerance", 0.5)
    if isinstance(tol, bool) or not isinstance(tol, (int, float)) or not tol > 0:
        raise ConfigError("tolerance", f"expected a positive number, got {tol!r}")
    min_points = _int(doc, "minPoints", 2) if "minPoints" in doc else 3
    if len(nset) < min_points:
        raise ConfigError("Nset", f"need at least {min_points} entries for the fit")
    method = str(doc.get("method", "auto"))
    if method not in ("auto", "direct", "spectral"):
        raise ConfigError("method", f"expected auto, direct or spectral, got {method!r}")
    return ExperimentConfig(eq, d, nl, alpha, tuple(nset), samples, seed, mode, regime,
                            float(tol), min_points, method)


def load_config(path: "str | Path", overrides: Optional[dict] = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError("$", f"cannot read {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if overrides and isinstance(doc, dict):
        doc.update(overrides)
    return parse_config(doc)
