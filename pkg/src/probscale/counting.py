"""Brute-force lattice counts for the wave and Schrodinger dispersion relations.

For a query ``(d, dispersion, a, N)`` we count lattice points ``n`` in the
dyadic annulus ``N <= |n| < 2N`` whose phase combination
``phi(a+n) +- phi(n)`` lies within distance 1 of an integer level ``m``,
and maximise over ``m``. ``phi(k) = sqrt(1+|k|^2)`` for the wave relation and
``|k|^2`` for Schrodinger.
"""
from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Optional, Sequence, Union

import numpy as np

from . import _io
from .fitting import fit_loglog

MAX_ANNULUS = 10**8
MAX_DIM = 4
# Wave levels are irrational except on perfect squares; this absorbs rounding
# when phi(a+n) - phi(n) - m is exactly +-1.
WAVE_WINDOW_TOL = 1e-9
SCHRODINGER_PLUS_EPS = 0.1

CSV_HEADER = ("dispersion", "d", "aFamily", "N", "supCount", "argmaxM", "annulusSize", "paperBound", "impliedC")


class Dispersion(str, enum.Enum):
    WAVE_MINUS = "wave-minus"
    WAVE_PLUS = "wave-plus"
    SCHRODINGER_MINUS = "schrodinger-minus"
    SCHRODINGER_PLUS = "schrodinger-plus"

    @property
    def is_wave(self) -> bool:
        return self in (Dispersion.WAVE_MINUS, Dispersion.WAVE_PLUS)

    @property
    def sign(self) -> int:
        return 1 if self in (Dispersion.WAVE_PLUS, Dispersion.SCHRODINGER_PLUS) else -1


def is_dyadic(n: int) -> bool:
    return isinstance(n, (int, np.integer)) and n >= 1 and (int(n) & (int(n) - 1)) == 0


def annulus_size_estimate(d: int, N: int) -> float:
    """Volume of the shell ``N <= |x| < 2N`` in R^d."""
    ball = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    return ball * ((2 * N) ** d - N ** d)


def _check_dims(d: int, N: int) -> None:
    if not (1 <= d <= MAX_DIM):
        raise ValueError(f"d must be in [1, {MAX_DIM}], got {d}")
    if not is_dyadic(N) or N < 2:
        raise ValueError(f"N must be a power of two >= 2, got {N}")
    if annulus_size_estimate(d, N) > MAX_ANNULUS:
        raise ValueError(f"annulus d={d}, N={N} exceeds the enumeration guard of {MAX_ANNULUS:.0e} points")


@dataclass(frozen=True)
class AnnulusQuery:
    d: int
    dispersion: Dispersion
    a: tuple[int, ...]
    N: int

    def __post_init__(self):
        object.__setattr__(self, "dispersion", Dispersion(self.dispersion))
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))
        _check_dims(self.d, self.N)
        if len(self.a) != self.d:
            raise ValueError(f"a has length {len(self.a)} but d = {self.d}")

    @property
    def a_norm_sq(self) -> int:
        return sum(x * x for x in self.a)


@dataclass(frozen=True)
class CountReport:
    query: AnnulusQuery
    sup_count: int
    argmax_m: int
    annulus_size: int
    paper_bound: Optional[float]
    m_range: tuple[int, int]
    bound_case: Optional[str] = None
    log_bound: Optional[float] = None

    @property
    def implied_constant(self) -> Optional[float]:
        return None if self.paper_bound is None else self.sup_count / self.paper_bound


@lru_cache(maxsize=8)
def _cube(k: int, r: int) -> tuple[np.ndarray, np.ndarray]:
    """Points of ``[-r, r]^k`` in lexicographic order and their squared norms."""
    axis = np.arange(-r, r + 1, dtype=np.int64)
    if k == 0:
        pts = np.zeros((1, 0), dtype=np.int64)
    else:
        pts = np.stack(np.meshgrid(*([axis] * k), indexing="ij"), axis=-1).reshape(-1, k)
    pts.setflags(write=False)
    sq = (pts * pts).sum(axis=1)
    sq.setflags(write=False)
    return pts, sq


def _annulus_slice(d: int, N: int, first: int) -> np.ndarray:
    rest, sq = _cube(d - 1, 2 * N - 1)
    total = sq + first * first
    mask = (total >= N * N) & (total < 4 * N * N)
    sl = rest[mask]
    return np.concatenate([np.full((len(sl), 1), first, dtype=np.int64), sl], axis=1)


def iter_annulus(d: int, N: int) -> Iterator[np.ndarray]:
    """Yield the annulus in lexicographic chunks, one per first coordinate."""
    _check_dims(d, N)
    for first in range(-2 * N + 1, 2 * N):
        chunk = _annulus_slice(d, N, first)
        if len(chunk):
            yield chunk


def annulus(d: int, N: int) -> np.ndarray:
    """All ``n in Z^d`` with ``N <= |n| < 2N``, lexicographically sorted, shape ``(m, d)``."""
    chunks = list(iter_annulus(d, N))
    return np.concatenate(chunks) if chunks else np.zeros((0, d), dtype=np.int64)


def _levels(n: np.ndarray, a: np.ndarray, dispersion: Dispersion) -> np.ndarray:
    n2 = (n * n).sum(axis=1)
    an2 = n2 + 2 * (n @ a) + int(a @ a)
    if dispersion.is_wave:
        pa, pn = np.sqrt(1.0 + an2), np.sqrt(1.0 + n2)
        if dispersion.sign < 0:
            return (an2 - n2) / (pa + pn)
        return pa + pn
    return (an2 + dispersion.sign * n2).astype(np.float64)


def _window_tol(dispersion: Dispersion) -> float:
    return WAVE_WINDOW_TOL if dispersion.is_wave else 0.0


def level_values(q: AnnulusQuery, threads: int = 1) -> np.ndarray:
    """The phase combination at every annulus point, in annulus order."""
    a = np.asarray(q.a, dtype=np.int64)
    firsts = range(-2 * q.N + 1, 2 * q.N)

    def work(first):
        chunk = _annulus_slice(q.d, q.N, first)
        return _levels(chunk, a, q.dispersion)

    workers = threads or os.cpu_count() or 1
    if workers == 1:
        parts = [work(f) for f in firsts]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, firsts))
    return np.concatenate(parts)


def level_count(q: AnnulusQuery, m: int) -> int:
    x = level_values(q)
    tol = _window_tol(q.dispersion)
    return int(np.count_nonzero(np.abs(x - m) <= 1 + tol))


def dyadic_scale(a: Sequence[int]) -> int:
    """``A = 2^j`` with ``2^(2j-1) <= max(|a|^2, 1) < 2^(2j+1)``; ties round up."""
    a2 = max(sum(int(x) * int(x) for x in a), 1)
    j = 0
    while a2 >= 2 ** (2 * j + 1):
        j += 1
    return 2 ** j


def paper_bound(q: AnnulusQuery) -> tuple[Optional[float], Optional[str]]:
    """Right-hand side of the matching counting bound with constant 1."""
    d, N = q.d, float(q.N)
    if q.dispersion is Dispersion.WAVE_MINUS:
        if d >= 3:
            return N ** d / min(dyadic_scale(q.a), q.N), "eq1"
        if d == 2:
            return N ** 1.5, "eq3"
        return N, "eq4"
    if q.dispersion is Dispersion.WAVE_PLUS:
        return (N ** (d - 1), "eq2") if d >= 3 else (None, None)
    if q.dispersion is Dispersion.SCHRODINGER_MINUS:
        return N ** (d - 1), "schrodinger-minus"
    return N ** (d - 2 + SCHRODINGER_PLUS_EPS), "schrodinger-plus"


def sup_count(q: AnnulusQuery, threads: int = 1) -> CountReport:
    x = np.sort(level_values(q, threads))
    tol = _window_tol(q.dispersion)
    lo, hi = math.floor(x[0]) - 1, math.ceil(x[-1]) + 1
    ms = np.arange(lo, hi + 1, dtype=np.float64)
    counts = np.searchsorted(x, ms + 1 + tol, side="right") - np.searchsorted(x, ms - 1 - tol, side="left")
    i = int(np.argmax(counts))
    bound, case = paper_bound(q)
    log_bound = None
    if q.dispersion is Dispersion.SCHRODINGER_PLUS:
        log_bound = float(q.N) ** (q.d - 2) * max(1.0, math.log2(q.N))
    return CountReport(q, int(counts[i]), int(lo + i), int(len(x)), bound, (int(lo), int(hi)), case, log_bound)


@dataclass(frozen=True)
class FixedLow:
    """Small fixed ``a`` (A << N); samples are its images under signed coordinate permutations."""

    a: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))
        if sum(x * x for x in self.a) > 16:
            raise ValueError("FixedLow requires |a| <= 4")

    label = "low"


@dataclass(frozen=True)
class Proportional:
    """``a = round(N * direction)`` (A ~ N); random unit directions when ``direction`` is None."""

    direction: Optional[tuple[float, ...]] = None

    label = "proportional"


AFamily = Union[FixedLow, Proportional]


def _signed_permutation(v: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    return v[rng.permutation(len(v))] * rng.choice([-1, 1], size=len(v))


def sample_vectors(family: AFamily, d: int, N: int, samples: int, seed: int) -> list[tuple[int, ...]]:
    rng = np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, int(N), d]))
    out = []
    for i in range(samples):
        if isinstance(family, FixedLow):
            base = np.asarray(family.a, dtype=np.int64)
            if len(base) != d:
                raise ValueError("FixedLow vector has the wrong dimension")
            v = base if i == 0 else _signed_permutation(base, rng)
        else:
            if family.direction is None:
                u = rng.standard_normal(d)
                u /= np.linalg.norm(u)
            else:
                u = np.asarray(family.direction, dtype=float)
                if len(u) != d:
                    raise ValueError("direction has the wrong dimension")
                if i:
                    u = _signed_permutation(u, rng)
            v = np.rint(N * u).astype(np.int64)
        out.append(tuple(int(x) for x in v))
    return out


def target_exponent(dispersion: Dispersion, d: int, family: AFamily) -> Optional[float]:
    """N-exponent of the applicable bound, or None when no bound is stated."""
    dispersion = Dispersion(dispersion)
    if dispersion is Dispersion.WAVE_MINUS:
        if d >= 3:
            return float(d) if isinstance(family, FixedLow) else float(d - 1)
        return 1.5 if d == 2 else 1.0
    if dispersion is Dispersion.WAVE_PLUS:
        return float(d - 1) if d >= 3 else None
    if dispersion is Dispersion.SCHRODINGER_MINUS:
        return float(d - 1)
    return d - 2 + SCHRODINGER_PLUS_EPS


@dataclass(frozen=True)
class BoundCheck:
    passes: tuple[Optional[bool], ...]
    implied_constant: Optional[float]
    constant: float

    @property
    def all_pass(self) -> bool:
        return all(p is not False for p in self.passes)


def verify_bounds(reports: Sequence[CountReport], constant: float = 1.0) -> BoundCheck:
    """Grade ``sup_count <= C * paper_bound``; also return the smallest passing C."""
    if constant <= 0:
        raise ValueError("constant must be positive")
    passes = tuple(None if r.paper_bound is None else r.sup_count <= constant * r.paper_bound for r in reports)
    implied = [r.implied_constant for r in reports if r.paper_bound is not None]
    return BoundCheck(passes, max(implied) if implied else None, float(constant))


@dataclass(frozen=True)
class SweepResult:
    dispersion: Dispersion
    d: int
    family: AFamily
    reports: tuple[CountReport, ...]
    per_n: tuple[CountReport, ...]
    slope: float
    intercept: float
    residual_max: float
    target: Optional[float]
    margin: float
    bounds: BoundCheck = field(default=None)  # type: ignore[assignment]

    @property
    def slope_ok(self) -> Optional[bool]:
        return None if self.target is None else self.slope <= self.target + self.margin

    def csv_rows(self):
        for r in self.per_n:
            yield (self.dispersion.value, self.d, self.family.label, r.query.N, r.sup_count, r.argmax_m,
                   r.annulus_size, r.paper_bound, r.implied_constant)

    def to_csv(self) -> str:
        return _io.csv_text(CSV_HEADER, self.csv_rows())

    def to_json(self) -> dict:
        rows = [dict(zip(CSV_HEADER, row)) | {"a": list(r.query.a), "boundCase": r.bound_case,
                                                "mRange": list(r.m_range), "logBound": r.log_bound}
                for row, r in zip(self.csv_rows(), self.per_n)]
        return {
            "rows": rows,
            "fit": {"slope": self.slope, "intercept": self.intercept, "residualMax": self.residual_max,
                    "targetSlope": self.target, "margin": self.margin, "slopeOk": self.slope_ok},
            "bounds": {"constant": self.bounds.constant, "impliedC": self.bounds.implied_constant,
                       "allPass": self.bounds.all_pass},
        }


def scaling_sweep(dispersion: "Dispersion | str", d: int, family: AFamily, Nset: Sequence[int],
                  samples_per_n: int = 8, seed: int = 0, constant: float = 1.0, margin: float = 0.4,
                  threads: int = 1) -> SweepResult:
    """Max sup-count over sampled ``a`` at each N, and the fitted N-exponent."""
    dispersion = Dispersion(dispersion)
    Nset = sorted(int(n) for n in Nset)
    if len(set(Nset)) < 3:
        raise ValueError("Nset needs at least 3 distinct dyadic values")
    if samples_per_n < 1:
        raise ValueError("samples_per_n must be >= 1")
    for N in Nset:
        _check_dims(d, N)
    reports, per_n = [], []
    for N in Nset:
        batch = [sup_count(AnnulusQuery(d, dispersion, a, N), threads)
                 for a in sample_vectors(family, d, N, samples_per_n, seed)]
        reports.extend(batch)
        per_n.append(max(batch, key=lambda r: r.sup_count))
    slope, intercept, resid = fit_loglog({r.query.N: r.sup_count for r in per_n})
    return SweepResult(dispersion, d, family, tuple(reports), tuple(per_n), slope, intercept, resid,
                       target_exponent(dispersion, d, family), margin, verify_bounds(per_n, constant))
