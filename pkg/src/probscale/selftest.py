"""Hermetic quick checks: golden tables, exact exponents and the invariant suites."""
from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction as F
from typing import Callable

import numpy as np

from .exponents import (
    Criticality,
    EquationKind,
    EquationSpec,
    NonlinearitySpec,
    classify,
    regime_predicate,
    s_hhl,
    s_pr,
)
from .fitting import fit_loglog
from .tables import EQUATIONS, TABLE_DEGREES, TABLE_DIMS, render_tables

# Columns 2D Quad., 2D Cubic, 3D Quad., 3D Cubic, 4D Quad., 4D Cubic.
GOLDEN_BETA_HHH = {
    EquationKind.HEAT: (F(2), F(1), F(3, 2), F(1, 2), F(1), F(0)),
    EquationKind.WAVE: (F(5, 4), F(3, 4), F(1), F(1, 4), F(1, 2), F(-1, 4)),
    EquationKind.SCHRODINGER: (F(1), F(1, 2), F(1, 2), F(0), F(0), F(-1, 2)),
}
GOLDEN_BETA_HHL = {
    EquationKind.HEAT: (F(1), F(2, 3), F(3, 4), F(1, 3), F(1, 2), F(0)),
    EquationKind.WAVE: (F(1, 2), F(1, 2), F(1, 4), F(1, 6), F(0), F(-1, 6)),
    EquationKind.SCHRODINGER: (F(3, 4), F(2, 3), F(1, 2), F(1, 3), F(1, 4), F(0)),
}


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str
    seconds: float


def _columns():
    return [(d, p) for d in TABLE_DIMS for p in TABLE_DEGREES]


def check_tables() -> tuple[bool, str]:
    ts = render_tables()
    bad = []
    for golden, got, label in ((GOLDEN_BETA_HHH, ts.beta_hhh, "table2"), (GOLDEN_BETA_HHL, ts.beta_hhl, "table3")):
        for eq in EQUATIONS:
            for (d, p), want in zip(_columns(), golden[eq]):
                if got[eq, d, p] != want:
                    bad.append(f"{label} {eq.value} d={d} p={p}: {got[eq, d, p]} != {want}")
    for row in ts.thresholds:
        for d in range(1, 5):
            for p in range(2, 10):
                if not row.applies_to(p):
                    continue
                spec = EquationSpec(row.eq, d, NonlinearitySpec.parse(p, "modsq" if (
                    row.eq is EquationKind.SCHRODINGER and p == 2) else "power"))
                if row.s_hhl(d, p) != s_hhl(spec):
                    bad.append(f"table1 s_hhl {row.eq.value} d={d} p={p}")
                anomalous = row.eq is EquationKind.WAVE and p == 2 and d <= 2
                if not anomalous and row.s_pr(d, p) != s_pr(spec):
                    bad.append(f"table1 s_pr {row.eq.value} d={d} p={p}")
    return not bad, "; ".join(bad[:5]) or "36 beta cells and the threshold rows match"


def check_thresholds() -> tuple[bool, str]:
    bad = []
    for d in range(1, 5):
        for p in range(2, 10):
            for eq, want in ((EquationKind.HEAT, F(-2, p - 1)),
                             (EquationKind.WAVE, F(-3, 2 * (p - 1))),
                             (EquationKind.SCHRODINGER, F(-1, p - 1))):
                if eq is EquationKind.WAVE and p == 2 and d <= 2:
                    want = F(-1) if d == 1 else F(-5, 4)
                spec = EquationSpec(eq, d, NonlinearitySpec(p))
                if s_pr(spec) != want:
                    bad.append(f"s_pr {eq.value} d={d} p={p}")
                eps = F(1, 10 ** 6)
                if (classify(spec, want) is not Criticality.CRITICAL
                        or classify(spec, want + eps) is not Criticality.SUBCRITICAL
                        or classify(spec, want - eps) is not Criticality.SUPERCRITICAL):
                    bad.append(f"classify {eq.value} d={d} p={p}")
    return not bad, "; ".join(bad[:5]) or "96 thresholds exact, classify flips at s_pr"


def check_regime_scan() -> tuple[bool, str]:
    bad = []
    for eq in EQUATIONS:
        for d in range(1, 13):
            for p in range(2, 13):
                kinds = ["power", "modsq"] if eq is EquationKind.SCHRODINGER and p == 2 else ["power"]
                for kind in kinds:
                    spec = EquationSpec.of(eq, d, p, kind)
                    if regime_predicate(spec) != (s_pr(spec) >= s_hhl(spec)):
                        bad.append(f"{eq.value} d={d} p={p} {kind}")
    return not bad, "; ".join(bad[:5]) or "closed-form regime predicates agree with s_pr >= s_hhl"


def check_concentration(seed: int = 0) -> tuple[bool, str]:
    rng = np.random.default_rng(seed)
    n, trials = 1000, 10_000
    c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    scale = np.sqrt(np.sum(np.abs(c) ** 2))
    hits = 0
    for chunk in range(10):
        g = (rng.standard_normal((trials // 10, n)) + 1j * rng.standard_normal((trials // 10, n))) / np.sqrt(2)
        hits += int(np.count_nonzero(np.abs(g @ c) <= 10 * scale))
    freq = hits / trials
    return freq >= 0.999, f"frequency {freq:.4f} of |sum c g| <= 10 ||c||"


def check_weight_bound(seed: int = 0) -> tuple[bool, str]:
    from .randfield.iterate import resonance_weight

    rng = np.random.default_rng(seed)
    omega = rng.standard_normal(100_000) * 10.0 ** rng.uniform(-9, 4, 100_000)
    t = rng.uniform(0, 1, 100_000)
    w = np.abs(resonance_weight(omega, t))
    bound = np.minimum(t, 2 / np.abs(omega))
    ok = bool(np.all(w <= bound * (1 + 1e-12) + 1e-300))
    limit = abs(resonance_weight(1e-8, 0.7) - 0.7j) / 0.7
    return ok and limit < 1e-6, f"max |W|/bound {np.max(w / bound):.12f}, Omega->0 error {limit:.1e}"


def check_homogeneity(seed: int = 0) -> tuple[bool, str]:
    from .randfield.field import FieldSpec, sample_field
    from .randfield.iterate import second_iterate

    worst = 0.0
    times = [0.0, 0.5, 1.0]
    for eq, d, N, nl in ((EquationKind.SCHRODINGER, 1, 4, NonlinearitySpec(2)),
                         (EquationKind.SCHRODINGER, 1, 4, NonlinearitySpec.parse(3, "signs=+-+")),
                         (EquationKind.WAVE, 1, 4, NonlinearitySpec(3))):
        f = sample_field(FieldSpec(eq, d, 0.0, N, seed=seed))
        lam = 1.7
        x1 = second_iterate(f, nl, eq, times).values
        x2 = second_iterate(f.scaled(lam), nl, eq, times).values
        ref = np.abs(x1).max()
        worst = max(worst, float(np.abs(x2 - lam ** nl.p * x1).max() / ref))
    return worst < 1e-12, f"max relative deviation {worst:.1e}"


def check_parseval(seed: int = 0) -> tuple[bool, str]:
    from .randfield.field import FieldSpec, sample_field
    from .randfield.norms import h_s_norm, synthesize

    worst = 0.0
    for d, N in ((1, 8), (2, 4), (3, 2)):
        f = sample_field(FieldSpec(EquationKind.SCHRODINGER, d, 0.3, N, seed=seed))
        n_axis = 8 * N
        u = synthesize(f.modes, f.coeffs, n_axis)
        grid_l2 = np.sqrt(np.mean(np.abs(u) ** 2))
        worst = max(worst, abs(grid_l2 - h_s_norm((f.modes, f.coeffs), 0.0)) / grid_l2)
    return worst < 1e-9, f"max relative gap {worst:.1e}"


def check_fit_exactness() -> tuple[bool, str]:
    worst = 0.0
    for gamma in (F(2), F(-3, 2), F(1, 3), F(0), F(-7, 4)):
        for c in (1.0, 0.37, 12.5):
            values = {n: c * n ** float(gamma) for n in (8, 16, 32, 64)}
            slope, _, resid = fit_loglog(values)
            worst = max(worst, abs(slope - float(gamma)), resid)
    return worst < 1e-9, f"max slope or residual error {worst:.1e}"


def check_trivial_examples() -> tuple[bool, str]:
    from .counting import AnnulusQuery, Dispersion, annulus, sup_count
    from .randfield.field import DataMode, FieldSpec, sample_field
    from .randfield.norms import besov_norm, h_s_norm

    bad = []
    ring = annulus(2, 2)
    if len(ring) != 36 or set((ring ** 2).sum(axis=1).tolist()) != {4, 5, 8, 9, 10, 13}:
        bad.append("annulus d=2 N=2")
    if sup_count(AnnulusQuery(2, Dispersion.SCHRODINGER_PLUS, (0, 0), 8)).sup_count <= 0:
        bad.append("schrodinger-plus count")
    f = sample_field(FieldSpec(EquationKind.SCHRODINGER, 1, -1.0, 2, DataMode.ONES))
    if f.as_dict() != {(-3,): 1 + 0j, (-2,): 1 + 0j, (2,): 1 + 0j, (3,): 1 + 0j}:
        bad.append("ones field")
    if abs(h_s_norm({(1, 0): 1.0}, 2) - 2.0) > 1e-12:
        bad.append("h_s single mode")
    if abs(besov_norm({(5, 0): 1.0}, 1.0) - 4.0) > 1e-6:
        bad.append("besov single mode")
    return not bad, "; ".join(bad) or "annulus, data, norm examples hold"


CHECKS: tuple[tuple[str, Callable[[], tuple[bool, str]]], ...] = (
    ("tables", check_tables),
    ("thresholds", check_thresholds),
    ("regime-scan", check_regime_scan),
    ("concentration", check_concentration),
    ("weight-bound", check_weight_bound),
    ("homogeneity", check_homogeneity),
    ("parseval", check_parseval),
    ("fit-exactness", check_fit_exactness),
    ("examples", check_trivial_examples),
)


def run_selftest() -> list[Check]:
    out = []
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, not a crashed run
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(Check(name, bool(ok), detail, time.perf_counter() - t0))
    return out
