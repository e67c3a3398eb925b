"""Scaling experiments: medians of the second-iterate norm against the band ``N``."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from .. import _io
from ..exponents import (
    EquationKind,
    EquationSpec,
    NonlinearitySpec,
    Regime,
    as_rational,
    predicted_slope,
    regularity_level,
)
from ..fitting import ScalingFit, verdict
from .field import DataMode, FieldSpec, bracket, sample_field
from .iterate import DEFAULT_TIME_GRID, TupleStructure, choose_method, second_iterate
from .norms import BESOV_MAX_WORK, besov_norm, besov_work, h_s_norm
from .oracle import heat_oracle, variance_oracle
from .rng import derive_seed

HHH_FRACTION = 0.5
HHL_RADIUS = 4
CSV_HEADER = ["eq", "d", "p", "signs", "alpha", "N", "data_mode", "seed", "sample_index",
              "hs_norm", "besov_norm"]


def output_mask(modes: np.ndarray, N: int, regime: "Regime | str") -> np.ndarray:
    """HHH keeps ``|k| >= N/2``; HHL keeps ``|k| <= 4``."""
    k2 = (np.asarray(modes, dtype=np.float64) ** 2).sum(axis=1)
    if Regime(regime) is Regime.HHH:
        return k2 >= (HHH_FRACTION * N) ** 2
    return k2 <= HHL_RADIUS ** 2


@dataclass(frozen=True)
class IterateResult:
    spec: FieldSpec
    p: int
    signs: tuple[int, ...]
    time_grid: tuple[float, ...]
    hs_norm: float
    besov_norm: Optional[float]
    sample_index: int

    def row(self) -> list:
        return [self.spec.eq.value, self.spec.d, self.p, "".join("+" if s > 0 else "-" for s in self.signs),
                repr(float(self.spec.alpha)), self.spec.N, self.spec.data_mode.value, self.spec.seed,
                self.sample_index, repr(self.hs_norm),
                "" if self.besov_norm is None else repr(self.besov_norm)]


@dataclass(frozen=True)
class ExperimentResult:
    eq: EquationKind
    d: int
    nl: NonlinearitySpec
    alpha: Fraction
    regime: Regime
    data_mode: str
    s: Fraction
    predicted_slope: Fraction
    medians: dict[int, float]
    fit: ScalingFit
    results: tuple[IterateResult, ...] = ()
    method: str = ""

    @property
    def passed(self) -> bool:
        return self.fit.passed

    def to_csv(self) -> str:
        return _io.csv_text(CSV_HEADER, [r.row() for r in self.results])

    def to_json(self) -> dict:
        return {
            "eq": self.eq.value,
            "d": self.d,
            "p": self.nl.p,
            "kind": self.nl.label,
            "alpha": _io.rational_to_json(self.alpha),
            "s": _io.rational_to_json(self.s),
            "regime": self.regime.value,
            "dataMode": self.data_mode,
            "method": self.method,
            "medians": {str(n): v for n, v in sorted(self.medians.items())},
            "predictedSlope": _io.rational_to_json(self.predicted_slope),
            "fit": _io.to_jsonable(self.fit),
        }


def _time_sup_norms(coeffs, mask, s, N, want_besov):
    modes = coeffs.modes[mask]
    vals = coeffs.values[mask]
    w = bracket(modes) ** (2 * s)
    hs = float(np.sqrt((w[:, None] * np.abs(vals) ** 2).sum(axis=0)).max()) if len(modes) else 0.0
    bes = None
    if want_besov:
        bes = max((besov_norm((modes, vals[:, j]), s) for j in range(vals.shape[1])), default=0.0)
    return hs, bes


def scaling_experiment(eq: "EquationKind | str", d: int, nl: NonlinearitySpec, alpha,
                       Nset: Sequence[int], samples: int, seed: int = 0,
                       data_mode: "DataMode | str" = DataMode.GAUSSIAN,
                       regime: "Regime | str" = Regime.HHH, tolerance: float = 0.5,
                       time_grid: Sequence[float] = DEFAULT_TIME_GRID, method: str = "auto",
                       besov: "bool | str" = "auto", threads: int = 1,
                       min_points: int = 3) -> ExperimentResult:
    """Median over ``samples`` of ``sup_t ||X(t)||_{H^s}`` on the output band, per ``N``.

    ``s = alpha + 1 - d/2``. Heat is handled by :func:`heat_experiment`.
    """
    eq = EquationKind.parse(eq)
    if eq is EquationKind.HEAT:
        raise ValueError("the heat equation is oracle-only; use heat_experiment")
    regime = Regime(regime)
    data_mode = DataMode.parse(data_mode)
    alpha = as_rational(alpha)
    if samples < 8:
        raise ValueError(f"samples must be >= 8, got {samples}")
    if len(set(Nset)) < min_points:
        raise ValueError(f"need at least {min_points} distinct N values, got {sorted(set(Nset))}")
    for N in Nset:
        if N < 2:
            raise ValueError(f"band N={N} is empty; need N >= 2")
    spec_eq = EquationSpec(eq, d, nl)
    s = regularity_level(alpha, d)
    times = tuple(float(t) for t in time_grid)
    results: list[IterateResult] = []
    medians: dict[int, float] = {}
    methods = set()
    workers = max(1, threads)
    for N in sorted(set(Nset)):
        base = FieldSpec(eq, d, float(alpha), N, data_mode, seed)
        first = sample_field(base)
        m = method if method != "auto" else choose_method(first, nl, eq, len(times))
        methods.add(m)
        structure = None
        if m == "direct":
            signs = nl.sign_pattern if eq is EquationKind.SCHRODINGER else (1,) * nl.p
            structure = TupleStructure(first.modes, signs, eq)

        def one(i, N=N, m=m, structure=structure):
            spec = FieldSpec(eq, d, float(alpha), N, data_mode, derive_seed(seed, N, i))
            f = sample_field(spec)
            X = second_iterate(f, nl, eq, times, method=m, structure=structure, threads=1)
            mask = output_mask(X.modes, N, regime)
            want = besov is True or (besov == "auto" and
                                     besov_work(X.modes[mask]) * len(times) <= BESOV_MAX_WORK)
            hs, bes = _time_sup_norms(X, mask, float(s), N, want)
            return IterateResult(spec, nl.p, nl.sign_pattern if eq is EquationKind.SCHRODINGER else (1,) * nl.p,
                                 times, hs, bes, i)

        if data_mode is DataMode.ONES:
            r0 = one(0)
            batch = [IterateResult(r0.spec, r0.p, r0.signs, r0.time_grid, r0.hs_norm, r0.besov_norm, i)
                     for i in range(samples)]
        elif workers == 1:
            batch = [one(i) for i in range(samples)]
        else:
            with ThreadPoolExecutor(workers) as pool:
                batch = list(pool.map(one, range(samples)))
        results.extend(batch)
        medians[N] = float(np.median([r.hs_norm for r in batch]))
    target = predicted_slope(spec_eq, s, regime, deterministic=data_mode is DataMode.ONES)
    fit = verdict(medians, float(target), tolerance, min_points=min_points)
    return ExperimentResult(eq, d, nl, alpha, regime, data_mode.value, s, target, medians, fit,
                            tuple(results), "+".join(sorted(methods)))


def heat_norm_proxy(d: int, N: int, alpha, p: int, regime: "Regime | str" = Regime.HHH) -> float:
    """``(sum <k>^{2s} E|X_{k,l}|^2)^(1/2)`` over the output band, from the oracle."""
    o = heat_oracle(d, N, float(alpha), p)
    k = o.modes[:, :d]
    s = float(regularity_level(as_rational(alpha), d))
    mask = output_mask(k, N, regime)
    return float(np.sqrt(np.sum(bracket(k[mask]) ** (2 * s) * o.values[mask])))


def heat_experiment(d: int, p: int, alpha, Nset: Sequence[int], regime: "Regime | str" = Regime.HHH,
                    tolerance: float = 0.5, min_points: int = 3) -> ExperimentResult:
    alpha = as_rational(alpha)
    regime = Regime(regime)
    spec = EquationSpec(EquationKind.HEAT, d, NonlinearitySpec(p))
    s = regularity_level(alpha, d)
    medians = {N: heat_norm_proxy(d, N, alpha, p, regime) for N in sorted(set(Nset))}
    target = predicted_slope(spec, s, regime)
    fit = verdict(medians, float(target), tolerance, min_points=min_points)
    return ExperimentResult(EquationKind.HEAT, d, spec.nl, alpha, regime, "oracle", s, target,
                            medians, fit, (), "oracle")


@dataclass(frozen=True)
class ConsistencyResult:
    """Monte Carlo ``E|X_k(t)|^2`` against the exact-weight oracle."""

    modes: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    oracle: np.ndarray
    z: np.ndarray
    aggregate_z: float
    mode_threshold: float
    samples: int
    signs: tuple[int, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return abs(self.aggregate_z) <= 3.0 and bool(np.all(np.abs(self.z) <= self.mode_threshold))

    @property
    def max_abs_z(self) -> float:
        return float(np.abs(self.z).max()) if len(self.z) else 0.0


def oracle_consistency(d: int, N: int, nl: NonlinearitySpec, alpha, samples: int = 2000,
                       seed: int = 0, t: float = 1.0) -> ConsistencyResult:
    """Compare sample means with the exact second moment of the Schrodinger iterate.

    The aggregate over all output modes must sit within 3 standard errors; each
    single mode within a Bonferroni-adjusted threshold at family level 1e-3
    (never tighter than 3).
    """
    base = FieldSpec(EquationKind.SCHRODINGER, d, float(as_rational(alpha)), N)
    first = sample_field(base)
    structure = TupleStructure(first.modes, nl.sign_pattern, EquationKind.SCHRODINGER)
    sq = np.zeros((samples, len(structure.out_modes)))
    for i in range(samples):
        spec = FieldSpec(EquationKind.SCHRODINGER, d, base.alpha, N, seed=derive_seed(seed, N, i))
        X = structure.evaluate(sample_field(spec).coeffs, [t])[:, 0]
        sq[i] = np.abs(X) ** 2
    exact = variance_oracle(base, nl, EquationKind.SCHRODINGER, mode="exact", t=t)
    pred = np.array([exact.at(k) for k in structure.out_modes])
    mean = sq.mean(axis=0)
    se = sq.std(axis=0, ddof=1) / math.sqrt(samples)
    z = (mean - pred) / np.where(se > 0, se, np.inf)
    totals = sq.sum(axis=1)
    agg = (totals.mean() - pred.sum()) / (totals.std(ddof=1) / math.sqrt(samples))
    thresh = max(3.0, float(stats.norm.isf(1e-3 / (2 * max(1, len(z))))))
    return ConsistencyResult(structure.out_modes, mean, se, pred, z, float(agg), thresh, samples, nl.sign_pattern)
