import json
from fractions import Fraction as F
from pathlib import Path

import pytest
import sympy

from probscale.exponents import (
    Criticality,
    EquationKind,
    EquationSpec,
    NonlinearitySpec,
    Regime,
    as_rational,
    beta_hhh,
    beta_hhl,
    classify,
    exponent_report,
    predicted_slope,
    regime_predicate,
    regularity_level,
    s_det,
    s_hhl,
    s_pr,
    time_exponents,
)
from probscale.tables import render_tables, table_spec

GOLDEN = json.loads((Path(__file__).parent / "golden" / "tables.json").read_text())
COLUMNS = [(2, 2), (2, 3), (3, 2), (3, 3), (4, 2), (4, 3)]


def spec(eq, d, p, kind="power"):
    return EquationSpec.of(eq, d, p, kind)


@pytest.mark.parametrize("eq,d,p,want", [
    ("schrodinger", 3, 3, F(-1, 2)),
    ("heat", 2, 3, F(-1)),
    ("wave", 1, 2, F(-1)),
    ("wave", 2, 2, F(-5, 4)),
    ("wave", 3, 2, F(-3, 2)),
    ("wave", 2, 3, F(-3, 4)),
    ("schrodinger", 2, 5, F(-1, 4)),
])
def test_s_pr_values(eq, d, p, want):
    assert s_pr(spec(eq, d, p)) == want


def test_s_hhl_cases():
    assert s_hhl(spec("wave", 3, 2)) == F(-3, 4)
    assert s_hhl(spec("wave", 3, 3)) == F(-4, 6)
    assert s_hhl(spec("schrodinger", 2, 2, "modsq")) == F(-3, 4)
    assert s_hhl(spec("schrodinger", 2, 2, "signs=+-")) == F(-3, 4)
    assert s_hhl(spec("schrodinger", 2, 2)) == F(-1)
    assert s_hhl(spec("schrodinger", 2, 2, "signs=--")) == F(-1)
    assert s_hhl(spec("heat", 4, 3)) == F(-1)


def test_deterministic_threshold_and_gap_identity():
    for d in range(1, 5):
        for p in range(2, 10):
            sp = spec("schrodinger", d, p)
            assert s_det(sp) == F(d, 2) - F(2, p - 1)
            assert s_det(sp) - s_pr(sp) == F(d, 2) - F(2, p - 1) + F(1, p - 1)


def test_beta_is_gibbs_minus_threshold():
    sp = spec("wave", 2, 2)
    assert beta_hhh(sp) == 0 - F(-5, 4)
    assert beta_hhl(spec("wave", 4, 3)) == F(-1, 6)


@pytest.mark.parametrize("table,fn", [("table2", beta_hhh), ("table3", beta_hhl)])
def test_beta_tables_match_golden(table, fn):
    for eq in ("heat", "wave", "schrodinger"):
        for (d, p), cell in zip(COLUMNS, GOLDEN[table][eq]):
            assert fn(table_spec(EquationKind(eq), d, p)) == F(cell), (table, eq, d, p)


def test_render_tables_agrees_with_golden():
    ts = render_tables()
    for eq in ("heat", "wave", "schrodinger"):
        for (d, p), c2, c3 in zip(COLUMNS, GOLDEN["table2"][eq], GOLDEN["table3"][eq]):
            assert ts.beta_hhh[EquationKind(eq), d, p] == F(c2)
            assert ts.beta_hhl[EquationKind(eq), d, p] == F(c3)


def _sym(expr, d, p):
    ds, ps = sympy.symbols("d p")
    value = sympy.Rational(sympy.sympify(expr).subs({ds: d, ps: p}))
    return F(int(value.p), int(value.q))


def test_table1_formulas_against_independent_parse():
    ts = render_tables()
    assert len(ts.thresholds) == len(GOLDEN["table1"])
    for row, gold in zip(ts.thresholds, GOLDEN["table1"]):
        assert row.eq.value == gold["eq"] and row.nonlinearity == gold["nonlinearity"]
        for d in range(1, 5):
            for p in range(2, 10):
                if not row.applies_to(p):
                    continue
                kind = "modsq" if row.eq is EquationKind.SCHRODINGER and p == 2 else "power"
                sp = spec(row.eq, d, p, kind)
                assert row.s_pr(d, p) == _sym(gold["s_pr"], d, p)
                assert row.s_hhl(d, p) == _sym(gold["s_hhl"], d, p) == s_hhl(sp)
                anomaly = row.eq is EquationKind.WAVE and p == 2 and d <= 2
                if not anomaly:
                    assert s_pr(sp) == _sym(gold["s_pr"], d, p)
    wave_quad = ts.thresholds[1]
    assert wave_quad.s_pr.footnote


def test_classify_flips_at_threshold():
    sp = spec("schrodinger", 2, 5)
    t = s_pr(sp)
    assert classify(sp, t) is Criticality.CRITICAL
    assert classify(sp, t + F(1, 10**9)) is Criticality.SUBCRITICAL
    assert classify(sp, t - F(1, 10**9)) is Criticality.SUPERCRITICAL
    assert Criticality.SUBCRITICAL > Criticality.CRITICAL > Criticality.SUPERCRITICAL
    hhl = s_hhl(sp)
    assert classify(sp, hhl, Regime.HHL) is Criticality.CRITICAL


def test_regularity_level():
    assert regularity_level("-5/4", 2) == F(-5, 4)
    assert regularity_level(F(1, 2), 3) == F(0)
    with pytest.raises(TypeError):
        as_rational(0.5)


def test_time_exponents():
    sp = spec("schrodinger", 2, 3)
    long, kin = time_exponents(sp, 0)
    assert long == 2 * (0 - F(-1, 2)) == 1
    assert kin == 4
    assert time_exponents(sp, s_pr(sp)) == (0, 2)


def test_predicted_slopes():
    sp = spec("schrodinger", 1, 3, "signs=+-+")
    assert predicted_slope(sp, 0) == -1
    assert predicted_slope(sp, 0, deterministic=True) == -1
    alpha = F(-1, 2)
    p, d = 3, 1
    assert predicted_slope(sp, regularity_level(alpha, d)) == -(p - 1) * alpha + F((d - 2) * (p - 1), 2) - 1
    wave = spec("wave", 3, 2)
    alpha = F(1, 2)
    assert predicted_slope(wave, regularity_level(alpha, 3)) == -(2 - 1) * alpha + F(1, 2) - F(3, 2)
    heat = spec("heat", 2, 3)
    assert predicted_slope(heat, regularity_level(0, 2)) == -2 + 0
    assert predicted_slope(sp, 0, Regime.HHL) == -3 * (0 - s_hhl(sp))


def test_report_keys_and_open_endpoints():
    rep = exponent_report(spec("wave", 3, 3))
    assert set(rep) == {"s_pr", "s_hhl", "s_det", "s_G", "beta_hhh", "beta_hhl", "long_time", "kinetic"}
    assert rep["s_G"].open_endpoint and not rep["s_pr"].open_endpoint


@pytest.mark.parametrize("d", range(1, 13))
def test_regime_predicate_matches_threshold_order(d):
    for p in range(2, 13):
        for eq in EquationKind:
            kinds = ["power", "modsq"] if eq is EquationKind.SCHRODINGER and p == 2 else ["power"]
            for kind in kinds:
                sp = spec(eq, d, p, kind)
                assert regime_predicate(sp) == (s_pr(sp) >= s_hhl(sp)), (eq, d, p, kind)


def test_validation_errors():
    with pytest.raises(ValueError):
        NonlinearitySpec(1)
    with pytest.raises(ValueError):
        NonlinearitySpec.parse(3, "modsq")
    with pytest.raises(ValueError):
        NonlinearitySpec.parse(3, "signs=+-")
    with pytest.raises(ValueError):
        spec("wave", 2, 2, "modsq")
    with pytest.raises(ValueError):
        EquationKind.parse("kdv")
    with pytest.raises(ValueError):
        EquationSpec.of("heat", 0, 2)
