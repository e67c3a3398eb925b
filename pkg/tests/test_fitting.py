import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.base import clone

from probscale.fitting import LogLogRegressor, Verdict, fit_loglog, verdict


def test_exact_power_law():
    slope, intercept, resid = fit_loglog({8: 64, 16: 256, 32: 1024})
    assert slope == 2.0 and resid == 0.0
    assert intercept == pytest.approx(0.0, abs=1e-12)


def test_constant():
    assert fit_loglog({8: 5, 16: 5, 32: 5})[0] == 0.0


@pytest.mark.parametrize("slope,target,tol,want", [
    (2.0, 2, 0.4, Verdict.PASS), (2.5, 2, 0.4, Verdict.FAIL), (-1.3, -1.0, 0.5, Verdict.PASS)])
def test_verdict_examples(slope, target, tol, want):
    values = {n: n ** slope for n in (8, 16, 32)}
    fit = verdict(values, target, tol)
    assert fit.verdict is want
    assert fit.target_slope == target and fit.tolerance == tol
    assert len(fit.points) == 3


def test_errors():
    with pytest.raises(ValueError):
        fit_loglog({8: 1, 16: 2})
    with pytest.raises(ValueError):
        fit_loglog({8: 1, 16: 0, 32: 2})
    with pytest.raises(ValueError):
        verdict({8: 1, 16: 2, 32: 3}, 1, 0)
    assert fit_loglog({4: 1, 8: 2}, min_points=2)[0] == pytest.approx(1.0)


def test_estimator_api():
    est = LogLogRegressor()
    assert clone(est).get_params() == {"min_points": 3}
    est.fit([16, 8, 32], [256, 64, 1024])
    assert est.slope_ == pytest.approx(2.0)
    assert est.predict([64])[0] == pytest.approx(4096)
    assert est.score([8, 16, 32], [64, 256, 1024]) == pytest.approx(1.0)
    assert verdict(est, 2.0, 0.1).passed


rationals = st.fractions(min_value=-4, max_value=4, max_denominator=12)


@settings(max_examples=60, deadline=None)
@given(gamma=rationals, c=st.floats(0.01, 100), k=st.integers(3, 6))
def test_exact_on_rational_power_laws(gamma, c, k):
    values = {2 ** j: c * (2 ** j) ** float(gamma) for j in range(2, 2 + k)}
    slope, _, resid = fit_loglog(values)
    assert slope == pytest.approx(float(gamma), abs=1e-9)
    assert resid < 1e-9


@settings(max_examples=60, deadline=None)
@given(vals=st.lists(st.floats(0.01, 1e4), min_size=3, max_size=6), scale=st.floats(0.01, 100),
       seed=st.integers(0, 2 ** 16))
def test_scale_and_permutation_invariance(vals, scale, seed):
    ns = [2 ** (j + 2) for j in range(len(vals))]
    base = fit_loglog(dict(zip(ns, vals)))
    scaled = fit_loglog({n: v * scale for n, v in zip(ns, vals)})
    assert scaled[0] == pytest.approx(base[0], abs=1e-9)
    perm = np.random.default_rng(seed).permutation(len(ns))
    shuffled = fit_loglog({ns[i]: vals[i] for i in perm})
    assert shuffled == base
