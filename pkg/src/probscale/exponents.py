"""Exact critical exponents for the heat, wave and Schrodinger model equations.

Every quantity here is a :class:`fractions.Fraction`; no floating point is
used anywhere in this module.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence, Union

RationalLike = Union[Fraction, int, str]

__all__ = [
    "EquationKind",
    "NonlinearityKind",
    "NonlinearitySpec",
    "EquationSpec",
    "Criticality",
    "Regime",
    "Threshold",
    "as_rational",
    "regularity_level",
    "s_pr",
    "s_hhl",
    "s_det",
    "gibbs_regularity",
    "beta_hhh",
    "beta_hhl",
    "classify",
    "time_exponents",
    "predicted_slope",
    "exponent_report",
    "regime_predicate",
]


class EquationKind(str, enum.Enum):
    HEAT = "heat"
    WAVE = "wave"
    SCHRODINGER = "schrodinger"

    @classmethod
    def parse(cls, value: "str | EquationKind") -> "EquationKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("ö", "o")
        aliases = {"nls": "schrodinger", "nlw": "wave", "she": "heat"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown equation {value!r}; expected heat, wave or schrodinger") from None


class NonlinearityKind(str, enum.Enum):
    PURE_POWER = "power"
    MODULUS_SQUARE = "modsq"
    SIGNED_PRODUCT = "signs"


@dataclass(frozen=True)
class NonlinearitySpec:
    """Degree ``p`` plus the conjugation pattern of the nonlinearity.

    ``signs`` is only meaningful for :attr:`NonlinearityKind.SIGNED_PRODUCT`,
    where ``+1`` stands for ``u`` and ``-1`` for ``conj(u)``.
    """

    p: int
    kind: NonlinearityKind = NonlinearityKind.PURE_POWER
    signs: tuple[int, ...] = ()

    def __post_init__(self):
        kind = NonlinearityKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "signs", tuple(int(s) for s in self.signs))
        if not isinstance(self.p, int) or isinstance(self.p, bool) or self.p < 2:
            raise ValueError(f"degree p must be an integer >= 2, got {self.p!r}")
        if kind is NonlinearityKind.MODULUS_SQUARE and self.p != 2:
            raise ValueError("|u|^2 nonlinearity forces p = 2")
        if kind is NonlinearityKind.SIGNED_PRODUCT:
            if len(self.signs) != self.p:
                raise ValueError(f"sign list {self.signs} must have length p = {self.p}")
            if any(s not in (1, -1) for s in self.signs):
                raise ValueError("signs must be +1 or -1")
        elif self.signs:
            raise ValueError("signs are only allowed for a signed product nonlinearity")

    @classmethod
    def parse(cls, p: int, kind: str = "power") -> "NonlinearitySpec":
        """Build from the CLI spelling: ``power``, ``modsq`` or ``signs=+-+``."""
        kind = kind.strip()
        if kind == "power":
            return cls(p)
        if kind == "modsq":
            return cls(p, NonlinearityKind.MODULUS_SQUARE)
        if kind.startswith("signs="):
            chars = kind[len("signs="):]
            if not chars or set(chars) - {"+", "-"}:
                raise ValueError(f"bad sign pattern {kind!r}")
            return cls(p, NonlinearityKind.SIGNED_PRODUCT, tuple(1 if c == "+" else -1 for c in chars))
        raise ValueError(f"unknown nonlinearity kind {kind!r}")

    @property
    def sign_pattern(self) -> tuple[int, ...]:
        """Conjugation signs, one per factor."""
        if self.kind is NonlinearityKind.SIGNED_PRODUCT:
            return self.signs
        if self.kind is NonlinearityKind.MODULUS_SQUARE:
            return (1, -1)
        return (1,) * self.p

    @property
    def is_modulus_square(self) -> bool:
        return self.p == 2 and sorted(self.sign_pattern) == [-1, 1]

    @property
    def label(self) -> str:
        if self.kind is NonlinearityKind.SIGNED_PRODUCT:
            return "signs=" + "".join("+" if s > 0 else "-" for s in self.signs)
        return self.kind.value


@dataclass(frozen=True)
class EquationSpec:
    eq: EquationKind
    d: int
    nl: NonlinearitySpec = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        object.__setattr__(self, "eq", EquationKind.parse(self.eq))
        if not isinstance(self.d, int) or self.d < 1:
            raise ValueError(f"dimension d must be an integer >= 1, got {self.d!r}")
        if not isinstance(self.nl, NonlinearitySpec):
            raise ValueError("nl must be a NonlinearitySpec")
        if self.nl.kind is not NonlinearityKind.PURE_POWER and self.eq is not EquationKind.SCHRODINGER:
            raise ValueError(f"{self.nl.kind.value} nonlinearity is only defined for the Schrodinger equation")

    @classmethod
    def of(cls, eq: "str | EquationKind", d: int, p: int, kind: str = "power") -> "EquationSpec":
        return cls(EquationKind.parse(eq), d, NonlinearitySpec.parse(p, kind))

    @property
    def p(self) -> int:
        return self.nl.p


class Criticality(enum.IntEnum):
    """Ordered so that ``SUBCRITICAL > CRITICAL > SUPERCRITICAL``."""

    SUPERCRITICAL = -1
    CRITICAL = 0
    SUBCRITICAL = 1

    def __str__(self):
        return self.name.capitalize()


class Regime(str, enum.Enum):
    HHH = "hhh"
    HHL = "hhl"


class Threshold(NamedTuple):
    """A rational endpoint; ``open_endpoint`` marks an epsilon loss such as ``s_G-``."""

    value: Fraction
    open_endpoint: bool = False


def as_rational(x: RationalLike) -> Fraction:
    """Exact rational from an int, Fraction or an ``"a/b"`` string (unicode minus allowed)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip().replace("−", "-"))
    raise TypeError(f"expected an exact rational, got {type(x).__name__}; floats are not accepted")


def regularity_level(alpha: RationalLike, d: int) -> Fraction:
    if d < 1:
        raise ValueError("d must be >= 1")
    return as_rational(alpha) + 1 - Fraction(d, 2)


def s_pr(spec: EquationSpec) -> Fraction:
    """Probabilistic scaling threshold from the high-high-to-high computation."""
    p, d = spec.p, spec.d
    if spec.eq is EquationKind.HEAT:
        return Fraction(-2, p - 1)
    if spec.eq is EquationKind.WAVE:
        if p == 2 and d == 1:
            return Fraction(-1)
        if p == 2 and d == 2:
            return Fraction(-5, 4)
        return Fraction(-3, 2 * (p - 1))
    return Fraction(-1, p - 1)


def s_hhl(spec: EquationSpec) -> Fraction:
    """Threshold coming from high-high-to-low interactions."""
    p, d = spec.p, spec.d
    if spec.eq is EquationKind.HEAT:
        return Fraction(-(d + 2), 2 * p)
    if spec.eq is EquationKind.WAVE:
        if p == 2 and spec.nl.kind is NonlinearityKind.PURE_POWER:
            return Fraction(-d, 2 * p)
        return Fraction(-(d + 1), 2 * p)
    if spec.nl.is_modulus_square:
        return Fraction(-(d + 1), 2 * p)
    return Fraction(-(d + 2), 2 * p)


def s_det(spec: EquationSpec) -> Fraction:
    """Classical (deterministic) scaling threshold ``d/2 - 2/(p-1)``."""
    return Fraction(spec.d, 2) - Fraction(2, spec.p - 1)


def gibbs_regularity(d: int) -> Fraction:
    if d < 1:
        raise ValueError("d must be >= 1")
    return 1 - Fraction(d, 2)


def beta_hhh(spec: EquationSpec) -> Fraction:
    """Derivatives the data may lose relative to Gibbs data before HHH criticality."""
    return gibbs_regularity(spec.d) - s_pr(spec)


def beta_hhl(spec: EquationSpec) -> Fraction:
    return gibbs_regularity(spec.d) - s_hhl(spec)


def classify(spec: EquationSpec, s: RationalLike, regime: "Regime | str" = Regime.HHH) -> Criticality:
    threshold = s_pr(spec) if Regime(regime) is Regime.HHH else s_hhl(spec)
    s = as_rational(s)
    if s > threshold:
        return Criticality.SUBCRITICAL
    if s == threshold:
        return Criticality.CRITICAL
    return Criticality.SUPERCRITICAL


def time_exponents(spec: EquationSpec, s: RationalLike) -> tuple[Fraction, Fraction]:
    """Exponents of the long-time existence scale and of the kinetic time.

    ``T = N^long`` (an open endpoint) and ``T_kin = N^kinetic`` with
    ``long = (p-1)(s - s_pr)`` and ``kinetic = 2 long + 2``.
    """
    gap = (spec.p - 1) * (as_rational(s) - s_pr(spec))
    return gap, 2 * gap + 2


def predicted_slope(spec: EquationSpec, s: RationalLike, regime: "Regime | str" = Regime.HHH,
                    deterministic: bool = False) -> Fraction:
    """Exponent of N in the norm of the second iterate at regularity level ``s``.

    HHH: ``-(p-1)(s - s_pr)``, or ``-(p-1)(s - s_det)`` for deterministic
    data. HHL: ``-p (s - s_hhl)``.
    """
    s = as_rational(s)
    if Regime(regime) is Regime.HHL:
        return -spec.p * (s - s_hhl(spec))
    threshold = s_det(spec) if deterministic else s_pr(spec)
    return -(spec.p - 1) * (s - threshold)


def exponent_report(spec: EquationSpec, s: "RationalLike | None" = None) -> dict[str, Threshold]:
    """All scalar exponents for one equation, keyed by name."""
    out = {
        "s_pr": Threshold(s_pr(spec)),
        "s_hhl": Threshold(s_hhl(spec)),
        "s_det": Threshold(s_det(spec)),
        "s_G": Threshold(gibbs_regularity(spec.d), open_endpoint=True),
        "beta_hhh": Threshold(beta_hhh(spec)),
        "beta_hhl": Threshold(beta_hhl(spec)),
    }
    s = s_pr(spec) if s is None else as_rational(s)
    long_time, kinetic = time_exponents(spec, s)
    out["long_time"] = Threshold(long_time, open_endpoint=True)
    out["kinetic"] = Threshold(kinetic)
    return out


def regime_predicate(spec: EquationSpec) -> bool:
    """The stated region where ``s_pr >= s_hhl``, written as closed-form conditions.

    Heat: ``d > 2`` and ``p >= (d+2)/(d-2)``. Wave, ``p >= 3``: ``d > 2`` and
    ``p >= (d+1)/(d-2)``. Wave, ``p = 2``: ``d >= 6``, since at ``d = 5`` the
    exponents still give ``s_pr < s_hhl``. Schrodinger: ``d >= 3`` for
    ``|u|^2``, otherwise ``p >= (d+2)/d``.
    """
    d, p = spec.d, spec.p
    if spec.eq is EquationKind.HEAT:
        return d > 2 and p >= Fraction(d + 2, d - 2)
    if spec.eq is EquationKind.WAVE:
        if p == 2:
            return d >= 6
        return d > 2 and p >= max(Fraction(d + 1, d - 2), Fraction(3))
    if spec.nl.is_modulus_square:
        return d >= 3
    return p >= Fraction(d + 2, d)


def specs_grid(eqs: Sequence[EquationKind], dims: Sequence[int], degrees: Sequence[int]):
    """Pure-power specs over a parameter grid."""
    for eq in eqs:
        for d in dims:
            for p in degrees:
                yield EquationSpec(eq, d, NonlinearitySpec(p))
