"""Deterministic lattice sums predicting ``E|X_k|^2``.

``bracket`` mode is the square-root-cancellation bound with ``<Omega>^{-1}``
in place of the squared weight. ``exact`` mode is the true second moment of
the Schrodinger iterate at a fixed time: distinct monomials in the Gaussians
are orthogonal, so the variance is a sum over monomial classes of
``|multiplicity * W(Omega, t)|^2`` times the Gaussian moments
``E|g|^(2n) = n!``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.fft as sfft

from ..exponents import EquationKind, NonlinearitySpec
from .field import FieldSpec, band_modes, bracket
from .iterate import CostGuardError, TupleStructure, resonance_weight

HEAT_MAX_CELLS = 1 << 24


@dataclass(frozen=True)
class OracleMap:
    """``values[i]`` is the predicted ``E|X|^2`` at ``modes[i]``.

    For heat the last column of ``modes`` is the time frequency ``l``.
    """

    modes: np.ndarray
    values: np.ndarray

    def as_dict(self) -> dict[tuple[int, ...], float]:
        return {tuple(int(x) for x in k): float(v) for k, v in zip(self.modes, self.values)}

    def at(self, k) -> float:
        hit = np.nonzero((self.modes == np.asarray(k)).all(axis=1))[0]
        return float(self.values[hit[0]]) if len(hit) else 0.0


def _angle(x: np.ndarray) -> np.ndarray:
    return np.sqrt(1.0 + np.asarray(x, dtype=np.float64) ** 2)


def _factorial_runs(sorted_cols: np.ndarray) -> np.ndarray:
    """Product over runs of equal entries (per row, columns sorted) of ``run!``."""
    rows, width = sorted_cols.shape
    out = np.ones(rows, dtype=np.float64)
    run = np.ones(rows, dtype=np.int64)
    for j in range(1, width):
        same = sorted_cols[:, j] == sorted_cols[:, j - 1]
        run = np.where(same, run + 1, 1)
        out *= np.where(same, run, 1)
    return out


def _distinct_mask(idx: np.ndarray) -> np.ndarray:
    keep = np.ones(len(idx), dtype=bool)
    for i, j in itertools.combinations(range(idx.shape[1]), 2):
        keep &= idx[:, i] != idx[:, j]
    return keep


def schrodinger_oracle(modes: np.ndarray, amp: np.ndarray, signs, mode: str = "bracket",
                       t: float = 1.0, structure: Optional[TupleStructure] = None) -> OracleMap:
    modes = np.asarray(modes, dtype=np.int64)
    d = modes.shape[1] if modes.ndim == 2 else 1
    if len(modes) == 0:
        return OracleMap(np.zeros((0, d), dtype=np.int64), np.zeros(0))
    st = structure or TupleStructure(modes, signs, EquationKind.SCHRODINGER, exclude_pairings=True)
    power = np.ones(st.n_tuples)
    for q in range(len(st.signs)):
        power *= amp[st.idx[:, q]] ** 2
    nk = len(st.out_modes)
    if mode == "bracket":
        vals = np.bincount(st.kinv, power / _angle(st.omega), nk)
        return OracleMap(st.out_modes, vals)
    if mode != "exact":
        raise ValueError(f"unknown oracle mode {mode!r}")
    plus = [q for q, s in enumerate(st.signs) if s > 0]
    minus = [q for q, s in enumerate(st.signs) if s < 0]
    canon = np.concatenate([np.sort(st.idx[:, plus], axis=1), np.sort(st.idx[:, minus], axis=1)], axis=1)
    classes, first, mult = np.unique(canon, axis=0, return_index=True, return_counts=True)
    moments = _factorial_runs(classes[:, :len(plus)]) * _factorial_runs(classes[:, len(plus):])
    w = np.abs(resonance_weight(st.omega[first].astype(np.float64), t)) ** 2
    vals = np.bincount(st.kinv[first], mult.astype(np.float64) ** 2 * w * power[first] * moments, nk)
    return OracleMap(st.out_modes, vals)


def wave_oracle(modes: np.ndarray, amp: np.ndarray, p: int) -> OracleMap:
    """Bracket form with both half-waves per factor, distinct frequencies only."""
    modes = np.asarray(modes, dtype=np.int64)
    d = modes.shape[1] if modes.ndim == 2 else 1
    if len(modes) == 0:
        return OracleMap(np.zeros((0, d), dtype=np.int64), np.zeros(0))
    st = TupleStructure(modes, (1,) * p, EquationKind.WAVE, exclude_pairings=False)
    keep = _distinct_mask(st.idx)
    power = np.ones(st.n_tuples)
    for q in range(p):
        power *= amp[st.idx[:, q]] ** 2
    norms_q = [st.norms[st.idx[:, q]] for q in range(p)]
    acc = np.zeros(st.n_tuples)
    for halves in itertools.product((1, -1), repeat=p):
        lam = sum(h * nq for h, nq in zip(halves, norms_q))
        for s0 in (1, -1):
            acc += 1.0 / _angle(lam - s0 * st.out_norm)
    scale = 0.25 * 0.25 ** p
    vals = np.bincount(st.kinv[keep], (scale * acc * power)[keep], len(st.out_modes))
    return OracleMap(st.out_modes, vals / bracket(st.out_modes) ** 2)


def _set_partitions(items: list[int]):
    if not items:
        yield []
        return
    head, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[head] + part[i]] + part[i + 1:]
        yield [[head]] + part


def heat_time_cutoff(N: int) -> int:
    """Time frequencies ``|l| < 4 N^2`` carry the parabolic band ``|l| ~ N^2``."""
    return 4 * N * N


def heat_oracle(d: int, N: int, alpha: float, p: int) -> OracleMap:
    """Bracket sum on the spacetime lattice ``(k, l)`` with distinct input pairs.

    The exclusion of repeated ``(k_q, l_q)`` uses Mobius inversion over set
    partitions; each block contributes a dilated copy of ``f^|block|``.
    """
    modes = band_modes(d, N)
    L = heat_time_cutoff(N)
    kmax = int(np.abs(modes).max())
    mk = 2
    while mk < 2 * p * kmax + 1:
        mk *= 2
    ml = 2
    while ml < 2 * p * (L - 1) + 1:
        ml *= 2
    shape = (mk,) * d + (ml,)
    if math.prod(shape) > HEAT_MAX_CELLS:
        raise CostGuardError(f"heat oracle grid {shape} exceeds {HEAT_MAX_CELLS} cells")
    ells = np.arange(-(L - 1), L)
    k2 = (modes.astype(np.float64) ** 2).sum(axis=1)
    f = (bracket(modes) ** (-2 * float(alpha)))[:, None] * (1 + k2[:, None] + np.abs(ells)[None, :]) ** -2.0
    kk = np.repeat(modes, len(ells), axis=0)
    ll = np.tile(ells, len(modes))
    fv = f.ravel()

    spectra: dict[int, np.ndarray] = {}

    def block_spectrum(b: int) -> np.ndarray:
        if b not in spectra:
            grid = np.zeros(shape)
            pos = tuple(((b * kk) % mk).T) + (((b * ll) % ml),)
            np.add.at(grid, pos, fv ** b)
            spectra[b] = sfft.rfftn(grid)
        return spectra[b]

    total = None
    for part in _set_partitions(list(range(p))):
        mu = math.prod((-1) ** (len(B) - 1) * math.factorial(len(B) - 1) for B in part)
        term = mu * math.prod(block_spectrum(len(B)) for B in part)
        total = term if total is None else total + term
    conv = sfft.irfftn(total, s=shape)
    freqs_k = np.fft.fftfreq(mk, 1.0 / mk).round().astype(np.int64)
    freqs_l = np.fft.fftfreq(ml, 1.0 / ml).round().astype(np.int64)
    mesh = np.meshgrid(*([freqs_k] * d + [freqs_l]), indexing="ij")
    box = np.ones(shape, dtype=bool)
    for m in mesh[:-1]:
        box &= np.abs(m) <= p * kmax
    box &= np.abs(mesh[-1]) <= p * (L - 1)
    out_modes = np.stack([m[box] for m in mesh], axis=1)
    ksq = sum(m[box].astype(np.float64) ** 2 for m in mesh[:-1])
    vals = np.clip(conv[box], 0.0, None) * (1 + ksq + np.abs(mesh[-1][box])) ** -2.0
    return OracleMap(out_modes, vals)


def variance_oracle(spec: FieldSpec, nl: NonlinearitySpec, eq: "EquationKind | str" = None,
                    mode: str = "bracket", t: float = 1.0,
                    modes: Optional[np.ndarray] = None) -> OracleMap:
    """Predicted ``E|X_k|^2`` for the band of ``spec``, or for explicit ``modes`` if given."""
    eq = EquationKind.parse(eq if eq is not None else spec.eq)
    if eq is EquationKind.HEAT:
        if modes is not None:
            raise ValueError("the heat oracle always uses the full band")
        return heat_oracle(spec.d, spec.N, float(spec.alpha), nl.p)
    band = band_modes(spec.d, spec.N) if modes is None else np.asarray(modes, dtype=np.int64).reshape(-1, spec.d)
    amp = bracket(band) ** (-float(spec.alpha) - 1.0) if len(band) else np.zeros(0)
    if eq is EquationKind.WAVE:
        if mode != "bracket":
            raise ValueError("only the bracket oracle is available for the wave iterate")
        return wave_oracle(band, amp, nl.p)
    return schrodinger_oracle(band, amp, nl.sign_pattern, mode=mode, t=t)
