"""The second Picard iterate ``X_k(t)`` for Gaussian data on a dyadic band.

Two backends compute the same quantity:

* ``direct`` enumerates every in-band tuple ``(k_1, ..., k_p)`` and sums the
  resonance weight against the product of coefficients;
* ``spectral`` evaluates the Duhamel integral pseudospectrally, with FFT
  products on a grid large enough to avoid aliasing and Gauss-Legendre
  quadrature in time that is resolved for the largest phase ``|Omega|``.

For Schrodinger the tuples with ``k_i = k_j`` at opposite signs are removed; the
spectral backend does this by inclusion-exclusion over pairing graphs.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.fft as sfft
import scipy.sparse as sp

from ..exponents import EquationKind, NonlinearitySpec
from .field import SpectralField, bracket

DIRECT_MAX_TUPLES = 20_000_000
DIRECT_MAX_WAVE_WORK = 400_000_000
SPECTRAL_MAX_WORK = 4e10
DEFAULT_TIME_GRID = tuple(np.linspace(0.0, 1.0, 33).tolist())


class CostGuardError(ValueError):
    """Raised when a computation would exceed the declared desk-scale budget."""


@dataclass(frozen=True)
class ResonanceWeight:
    """``(exp(i t Omega) - 1) / Omega``, equal to ``i t`` at ``Omega = 0``."""

    omega: float
    t: float

    @property
    def value(self) -> complex:
        return complex(resonance_weight(self.omega, self.t))

    @property
    def bound(self) -> float:
        return min(abs(self.t), 2 / abs(self.omega)) if self.omega else abs(self.t)


def resonance_weight(omega, t):
    """Vectorised weight; the sinc form makes the ``Omega -> 0`` limit exact."""
    omega = np.asarray(omega, dtype=np.float64)
    t = np.asarray(t, dtype=np.float64)
    half = t * omega / 2
    return 1j * t * np.exp(1j * half) * np.sinc(half / np.pi)


@dataclass(frozen=True)
class IterateCoefficients:
    """``values[i, j] = X_{modes[i]}(times[j])``."""

    modes: np.ndarray
    values: np.ndarray
    times: np.ndarray

    def as_dict(self, time_index: int = -1) -> dict[tuple[int, ...], complex]:
        col = self.values[:, time_index]
        return {tuple(int(x) for x in k): complex(v) for k, v in zip(self.modes, col)}

    def at(self, k: Sequence[int], time_index: int = -1) -> complex:
        hit = np.nonzero((self.modes == np.asarray(k)).all(axis=1))[0]
        return complex(self.values[hit[0], time_index]) if len(hit) else 0j

    def restrict(self, mask: np.ndarray) -> "IterateCoefficients":
        return IterateCoefficients(self.modes[mask], self.values[mask], self.times)


def _pack(k: np.ndarray, base: int) -> np.ndarray:
    """Injective integer key for lattice vectors with ``|k_i| < base // 2``."""
    key = np.zeros(len(k), dtype=np.int64)
    for j in range(k.shape[1]):
        key = key * base + (k[:, j] + base // 2)
    return key


def _sign_pattern(nl: NonlinearitySpec, eq: EquationKind) -> tuple[int, ...]:
    if eq is EquationKind.SCHRODINGER:
        return nl.sign_pattern
    if eq is EquationKind.WAVE:
        return (1,) * nl.p
    raise ValueError("the heat iterate is available only through the variance oracle")


class TupleStructure:
    """Index data for the direct sum, reusable across samples on the same band."""

    def __init__(self, modes: np.ndarray, signs: Sequence[int], eq: EquationKind,
                 exclude_pairings: Optional[bool] = None):
        self.eq = EquationKind.parse(eq)
        self.signs = tuple(int(s) for s in signs)
        exclude = self.eq is EquationKind.SCHRODINGER if exclude_pairings is None else exclude_pairings
        modes = np.asarray(modes, dtype=np.int64)
        n, p, d = len(modes), len(self.signs), modes.shape[1]
        if float(n) ** p > DIRECT_MAX_TUPLES:
            raise CostGuardError(f"{n}^{p} tuples exceed the direct-sum guard {DIRECT_MAX_TUPLES}")
        self.modes = modes
        idx = np.indices((n,) * p, dtype=np.int32).reshape(p, -1).T
        if exclude:
            keep = np.ones(len(idx), dtype=bool)
            for i, j in itertools.combinations(range(p), 2):
                if self.signs[i] != self.signs[j]:
                    keep &= idx[:, i] != idx[:, j]
            idx = idx[keep]
        self.idx = idx
        k = np.zeros((len(idx), d), dtype=np.int64)
        for q, s in enumerate(self.signs):
            k += s * modes[idx[:, q]]
        kmax = int(np.abs(modes).max()) if n else 0
        base = 2 * p * kmax + 3
        keys, kinv = np.unique(_pack(k, base), return_inverse=True)
        self.kinv = kinv.ravel()
        first = np.zeros(len(keys), dtype=np.int64)
        first[self.kinv[::-1]] = np.arange(len(idx))[::-1]
        self.out_modes = k[first] if len(idx) else np.zeros((0, d), dtype=np.int64)
        sq = (modes ** 2).sum(axis=1)
        if self.eq is EquationKind.SCHRODINGER:
            omega = -(k ** 2).sum(axis=1)
            for q, s in enumerate(self.signs):
                omega += s * sq[idx[:, q]]
            self.omega = omega
            ou, oinv = np.unique(omega, return_inverse=True)
            self.omega_values = ou.astype(np.float64)
            pair = self.kinv * len(ou) + oinv.ravel()
            pu, self.pair_inv = np.unique(pair, return_inverse=True)
            self.pair_k = pu // len(ou)
            self.pair_o = pu % len(ou)
        else:
            self.norms = np.sqrt(sq.astype(np.float64))
            self.out_norm = np.sqrt((k ** 2).sum(axis=1).astype(np.float64))

    @property
    def n_tuples(self) -> int:
        return len(self.idx)

    def products(self, coeffs: np.ndarray) -> np.ndarray:
        prod = np.ones(len(self.idx), dtype=np.complex128)
        for q, s in enumerate(self.signs):
            c = coeffs[self.idx[:, q]]
            prod *= c if s > 0 else np.conj(c)
        return prod

    def evaluate(self, coeffs: np.ndarray, times: np.ndarray) -> np.ndarray:
        times = np.asarray(times, dtype=np.float64)
        nk = len(self.out_modes)
        if not self.n_tuples:
            return np.zeros((0, len(times)), dtype=np.complex128)
        prod = self.products(np.asarray(coeffs, dtype=np.complex128))
        if self.eq is EquationKind.SCHRODINGER:
            vals = np.bincount(self.pair_inv, prod.real) + 1j * np.bincount(self.pair_inv, prod.imag)
            amat = sp.csr_matrix((vals, (self.pair_k, self.pair_o)), shape=(nk, len(self.omega_values)))
            weights = resonance_weight(self.omega_values[:, None], times[None, :])
            return np.asarray(amat @ weights)
        return self._evaluate_wave(prod, times)

    def _evaluate_wave(self, prod: np.ndarray, times: np.ndarray) -> np.ndarray:
        p = len(self.signs)
        nk = len(self.out_modes)
        work = self.n_tuples * 2 ** (p + 1) * len(times)
        if work > DIRECT_MAX_WAVE_WORK:
            raise CostGuardError(f"direct wave sum needs {work:.3g} weight evaluations")
        prod = prod * 0.5 ** p
        norms_q = [self.norms[self.idx[:, q]] for q in range(p)]
        out = np.zeros((nk, len(times)), dtype=np.complex128)
        kn = self.out_norm
        for halves in itertools.product((1, -1), repeat=p):
            lam = sum(h * nq for h, nq in zip(halves, norms_q))
            for s0 in (1, -1):
                omega = lam - s0 * kn
                for j, t in enumerate(times):
                    term = prod * resonance_weight(omega, t) * (s0 * np.exp(1j * s0 * t * kn))
                    out[:, j] += np.bincount(self.kinv, term.real, nk) + 1j * np.bincount(self.kinv, term.imag, nk)
        return -0.5 * out / bracket(self.out_modes)[:, None]


def _grid_size(p: int, kmax: int) -> int:
    m = 2
    while m < 2 * p * kmax + 1:
        m *= 2
    return m


def _node_schedule(times: np.ndarray, omega_max: float):
    """Gauss-Legendre nodes on each segment between consecutive output times."""
    edges = np.concatenate([[0.0], times])
    nodes = []
    for a, b in zip(edges[:-1], edges[1:]):
        h = b - a
        if h <= 0:
            nodes.append((np.zeros(0), np.zeros(0)))
            continue
        nq = int(math.ceil(omega_max * h / 2)) + 4
        x, w = np.polynomial.legendre.leggauss(nq)
        nodes.append((a + h * (x + 1) / 2, w * h / 2))
    return nodes


class _Grid:
    def __init__(self, field: SpectralField, p: int, threads: int):
        self.d = field.d
        kmax = int(np.abs(field.modes).max())
        self.kmax = kmax
        self.M = _grid_size(p, kmax)
        self.workers = threads if threads > 0 else None
        freqs = np.fft.fftfreq(self.M, 1.0 / self.M).round().astype(np.int64)
        mesh = np.meshgrid(*([freqs] * self.d), indexing="ij")
        self.k2 = sum(m.astype(np.float64) ** 2 for m in mesh)
        self.box = np.ones(self.k2.shape, dtype=bool)
        for m in mesh:
            self.box &= np.abs(m) <= p * kmax
        self.out_modes = np.stack([m[self.box] for m in mesh], axis=1)
        self.scale = float(self.M) ** self.d

    def place(self, modes: np.ndarray, values: np.ndarray) -> np.ndarray:
        arr = np.zeros((self.M,) * self.d, dtype=np.complex128)
        np.add.at(arr, tuple((modes % self.M).T), values)
        return arr

    def synth(self, hat: np.ndarray) -> np.ndarray:
        return sfft.ifftn(hat, workers=self.workers) * self.scale

    def analyse(self, f: np.ndarray) -> np.ndarray:
        return sfft.fftn(f, workers=self.workers) / self.scale


def _pairing_terms(signs: Sequence[int]):
    """Inclusion-exclusion terms ``(coefficient, [(a, b), ...])`` over pairing graphs."""
    p = len(signs)
    edges = [(i, j) for i, j in itertools.combinations(range(p), 2) if signs[i] != signs[j]]
    terms = []
    for r in range(len(edges) + 1):
        for subset in itertools.combinations(edges, r):
            parent = list(range(p))

            def find(x):
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            for i, j in subset:
                parent[find(i)] = find(j)
            comps: dict[int, list[int]] = {}
            for q in range(p):
                comps.setdefault(find(q), [0, 0])[0 if signs[q] > 0 else 1] += 1
            terms.append(((-1) ** r, sorted(tuple(v) for v in comps.values())))
    return terms


def _spectral_schrodinger(field: SpectralField, signs, times, threads, exclude_pairings):
    p = len(signs)
    g = _Grid(field, p, threads)
    band_sq = (field.modes.astype(np.float64) ** 2).sum(axis=1)
    omega_max = (p * p + p) * float(band_sq.max())
    nodes = _node_schedule(times, omega_max)
    total = sum(len(x) for x, _ in nodes)
    terms = _pairing_terms(signs) if exclude_pairings else [(1, [(1, 0) if s > 0 else (0, 1) for s in signs])]
    kinds = sorted({c for _, comps in terms for c in comps})
    work = total * (len(kinds) + 1) * g.scale * max(1.0, math.log2(g.scale))
    if work > SPECTRAL_MAX_WORK:
        raise CostGuardError(f"spectral iterate needs ~{work:.3g} flops")
    c = field.coeffs
    acc = np.zeros((g.M,) * g.d, dtype=np.complex128)
    out = np.zeros((len(g.out_modes), len(times)), dtype=np.complex128)
    for j, (xs, ws) in enumerate(nodes):
        for s, w in zip(xs, ws):
            comp_fields = {}
            if (1, 0) in kinds or (0, 1) in kinds:
                u = g.synth(g.place(field.modes, c * np.exp(1j * s * band_sq)))
                comp_fields[1, 0], comp_fields[0, 1] = u, np.conj(u)
            for a, b in kinds:
                if (a, b) in comp_fields:
                    continue
                n = a - b
                amp = c ** a * np.conj(c) ** b
                if n == 0:
                    comp_fields[a, b] = complex(amp.sum())
                else:
                    phase = np.exp(1j * s * n * band_sq)
                    comp_fields[a, b] = g.synth(g.place(n * field.modes, amp * phase))
            F = 0
            for coef, comps in terms:
                prod = coef
                for ab in comps:
                    prod = prod * comp_fields[ab]
                F = F + prod
            acc += w * np.exp(-1j * s * g.k2) * g.analyse(np.broadcast_to(F, (g.M,) * g.d))
        out[:, j] = 1j * acc[g.box]
    return IterateCoefficients(g.out_modes, out, times)


def _spectral_wave(field: SpectralField, p: int, times, threads):
    g = _Grid(field, p, threads)
    kn = np.sqrt(g.k2)
    band_norm = float(np.sqrt((field.modes.astype(np.float64) ** 2).sum(axis=1)).max())
    nodes = _node_schedule(times, 2 * p * band_norm)
    total = sum(len(x) for x, _ in nodes)
    work = total * 2 * g.scale * max(1.0, math.log2(g.scale))
    if work > SPECTRAL_MAX_WORK:
        raise CostGuardError(f"spectral iterate needs ~{work:.3g} flops")
    chat = g.place(field.modes, field.coeffs)
    cos_acc = np.zeros_like(chat)
    sin_acc = np.zeros_like(chat)
    br = np.sqrt(1 + g.k2)
    out = np.zeros((len(g.out_modes), len(times)), dtype=np.complex128)
    for j, (xs, ws) in enumerate(nodes):
        for s, w in zip(xs, ws):
            u = g.synth(chat * np.cos(s * kn))
            F = g.analyse(u ** p)
            cos_acc += w * np.cos(s * kn) * F
            sin_acc += w * np.sin(s * kn) * F
        t = times[j]
        X = (np.sin(t * kn) * cos_acc - np.cos(t * kn) * sin_acc) / br
        out[:, j] = X[g.box]
    return IterateCoefficients(g.out_modes, out, times)


def choose_method(field: SpectralField, nl: NonlinearitySpec, eq: EquationKind, n_times: int) -> str:
    n = len(field.modes)
    tuples = float(n) ** nl.p
    if tuples > DIRECT_MAX_TUPLES:
        return "spectral"
    if EquationKind.parse(eq) is EquationKind.WAVE and tuples * 2 ** (nl.p + 1) * n_times > DIRECT_MAX_WAVE_WORK:
        return "spectral"
    return "direct"


def second_iterate(field: SpectralField, nl: NonlinearitySpec, eq: "EquationKind | str",
                   times: Sequence[float] = DEFAULT_TIME_GRID, method: str = "auto",
                   structure: Optional[TupleStructure] = None, threads: int = 1,
                   exclude_pairings: Optional[bool] = None) -> IterateCoefficients:
    """Coefficients ``X_k(t)`` of the second iterate at each time in ``times``.

    ``exclude_pairings`` defaults to True for Schrodinger and False for wave.
    """
    eq = EquationKind.parse(eq)
    signs = _sign_pattern(nl, eq)
    times = np.asarray(times, dtype=np.float64)
    if times.ndim != 1 or np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be a nondecreasing list of nonnegative reals")
    exclude = eq is EquationKind.SCHRODINGER if exclude_pairings is None else exclude_pairings
    if eq is EquationKind.WAVE and exclude:
        raise ValueError("pairing exclusion applies to the Schrodinger iterate only")
    d = field.d
    if len(field.modes) == 0:
        return IterateCoefficients(np.zeros((0, d), dtype=np.int64), np.zeros((0, len(times)), complex), times)
    if method == "auto":
        method = "direct" if structure is not None else choose_method(field, nl, eq, len(times))
    if method == "direct":
        if structure is None:
            structure = TupleStructure(field.modes, signs, eq, exclude)
        return IterateCoefficients(structure.out_modes, structure.evaluate(field.coeffs, times), times)
    if method != "spectral":
        raise ValueError(f"unknown method {method!r}")
    if eq is EquationKind.SCHRODINGER:
        return _spectral_schrodinger(field, signs, times, threads, exclude)
    return _spectral_wave(field, nl.p, times, threads)
