import cmath
import itertools
import math

import numpy as np
import pytest

from probscale.exponents import EquationKind, NonlinearitySpec
from probscale.randfield.experiment import (
    heat_experiment,
    oracle_consistency,
    output_mask,
    scaling_experiment,
)
from probscale.randfield.field import DataMode, FieldSpec, bracket, sample_field
from probscale.randfield.iterate import (
    CostGuardError,
    ResonanceWeight,
    TupleStructure,
    resonance_weight,
    second_iterate,
)
from probscale.randfield.norms import besov_norm, embedding_constant, h_s_norm, synthesize
from probscale.randfield.oracle import heat_oracle, heat_time_cutoff, schrodinger_oracle, variance_oracle
from probscale.randfield.rng import complex_gaussians, derive_seed

SCH = EquationKind.SCHRODINGER
WAVE = EquationKind.WAVE


def W(omega, t):
    return 1j * t if omega == 0 else (cmath.exp(1j * t * omega) - 1) / omega


def brute_schrodinger(field, signs, t):
    coeffs = field.as_dict()
    out = {}
    for ks in itertools.product(coeffs, repeat=len(signs)):
        if any(signs[i] != signs[j] and ks[i] == ks[j] for i, j in itertools.combinations(range(len(signs)), 2)):
            continue
        k = tuple(sum(s * kq[c] for s, kq in zip(signs, ks)) for c in range(field.d))
        omega = -sum(x * x for x in k) + sum(s * sum(x * x for x in kq) for s, kq in zip(signs, ks))
        prod = 1
        for s, kq in zip(signs, ks):
            prod *= coeffs[kq] if s > 0 else coeffs[kq].conjugate()
        out[k] = out.get(k, 0) + W(omega, t) * prod
    return out


def brute_wave(field, p, t):
    """Half-wave expansion of the Duhamel integral, one tuple at a time."""
    coeffs = field.as_dict()
    out = {}
    for ks in itertools.product(coeffs, repeat=p):
        k = tuple(sum(kq[c] for kq in ks) for c in range(field.d))
        kn = math.sqrt(sum(x * x for x in k))
        norms = [math.sqrt(sum(x * x for x in kq)) for kq in ks]
        prod = 1
        for kq in ks:
            prod *= coeffs[kq] / 2
        acc = 0
        for halves in itertools.product((1, -1), repeat=p):
            lam = sum(h * n for h, n in zip(halves, norms))
            for s0 in (1, -1):
                acc += s0 * cmath.exp(1j * s0 * t * kn) * W(lam - s0 * kn, t)
        out[k] = out.get(k, 0) - 0.5 * acc * prod / math.sqrt(1 + kn * kn)
    return out


def test_ones_field_example():
    f = sample_field(FieldSpec(SCH, 1, -1.0, 2, DataMode.ONES))
    assert f.as_dict() == {(-3,): 1, (-2,): 1, (2,): 1, (3,): 1}


def test_gaussian_normalisation_lln():
    spec = FieldSpec(SCH, 1, 0.25, 8)
    acc = np.zeros(16)
    draws = 10_000
    for i in range(draws):
        f = sample_field(FieldSpec(SCH, 1, 0.25, 8, seed=i))
        acc += np.abs(f.coeffs) ** 2 * bracket(f.modes) ** (2 * spec.alpha + 2)
    mean = acc.sum() / (draws * 16)
    assert 0.97 <= mean <= 1.03


def test_counter_based_determinism():
    a = sample_field(FieldSpec(SCH, 2, 0.0, 4, seed=123))
    b = sample_field(FieldSpec(SCH, 2, 0.0, 4, seed=123))
    assert a.coeffs.tobytes() == b.coeffs.tobytes()
    sub = complex_gaussians(123, a.modes[5:9])
    assert np.array_equal(sub, complex_gaussians(123, a.modes)[5:9])
    assert derive_seed(1, 8, 0) != derive_seed(1, 8, 1)


def test_gaussian_moments():
    modes = np.arange(200_000).reshape(-1, 1)
    g = complex_gaussians(7, modes)
    assert abs(np.mean(g)) < 0.01
    assert np.mean(np.abs(g) ** 2) == pytest.approx(1.0, abs=0.01)
    assert abs(np.mean(g * g)) < 0.01
    assert np.mean(np.abs(g) ** 4) == pytest.approx(2.0, abs=0.05)


def test_field_spec_validation():
    with pytest.raises(ValueError):
        FieldSpec(SCH, 4, 0.0, 4)
    with pytest.raises(ValueError):
        FieldSpec(SCH, 1, 0.0, 6)
    with pytest.raises(ValueError):
        FieldSpec(SCH, 1, 0.0, 1)


def test_iterate_hand_example():
    f = sample_field(FieldSpec(SCH, 1, -1.0, 2, DataMode.ONES))
    X = second_iterate(f, NonlinearitySpec(2), SCH, [1.0])
    assert X.at((5,)) == pytest.approx(W(-12, 1.0) * 2, abs=1e-14)


def test_iterate_zero_at_time_zero():
    f = sample_field(FieldSpec(SCH, 2, 0.0, 2, seed=1))
    for eq, nl in ((SCH, NonlinearitySpec(3)), (WAVE, NonlinearitySpec(2))):
        for method in ("direct", "spectral"):
            X = second_iterate(f, nl, eq, [0.0, 0.5], method=method)
            assert np.all(X.values[:, 0] == 0)


def test_weight_continuity_and_bound():
    assert resonance_weight(0.0, 0.8) == pytest.approx(0.8j)
    near = resonance_weight(1e-8, 0.8)
    assert abs(near - 0.8j) / 0.8 < 1e-6
    rw = ResonanceWeight(7.0, 0.3)
    assert abs(rw.value) <= rw.bound
    assert rw.value == pytest.approx(W(7.0, 0.3))
    rng = np.random.default_rng(0)
    om = rng.standard_normal(10_000) * 100
    t = rng.uniform(0, 1, 10_000)
    w = np.abs(resonance_weight(om, t))
    assert np.all(w <= np.minimum(t, 2 / np.abs(om)) * (1 + 1e-12))


@pytest.mark.parametrize("kind,p", [("power", 2), ("modsq", 2), ("signs=+-+", 3), ("signs=--+", 3), ("power", 3)])
def test_direct_schrodinger_matches_brute_force(kind, p):
    nl = NonlinearitySpec.parse(p, kind)
    f = sample_field(FieldSpec(SCH, 1, 0.0, 2, seed=4))
    got = second_iterate(f, nl, SCH, [0.37, 1.0], method="direct")
    want = brute_schrodinger(f, nl.sign_pattern, 1.0)
    assert set(want) == set(got.as_dict())
    for k, v in want.items():
        assert got.at(k) == pytest.approx(v, abs=1e-12)


@pytest.mark.parametrize("p", [2, 3])
def test_direct_wave_matches_closed_form(p):
    f = sample_field(FieldSpec(WAVE, 1, 0.0, 2, seed=2))
    got = second_iterate(f, NonlinearitySpec(p), WAVE, [0.6], method="direct")
    for k, v in brute_wave(f, p, 0.6).items():
        assert got.at(k, 0) == pytest.approx(v, abs=1e-12)


def test_wave_matches_duhamel_quadrature():
    f = sample_field(FieldSpec(WAVE, 1, 0.0, 2, seed=9))
    t = 0.8
    X = second_iterate(f, NonlinearitySpec(2), WAVE, [t], method="direct")
    s, ws = np.polynomial.legendre.leggauss(200)
    s = t * (s + 1) / 2
    ws = ws * t / 2
    k = 5
    kn = abs(k)
    c = f.as_dict()
    Fk = sum(c[(a,)] * c[(b,)] * np.cos(s * abs(a)) * np.cos(s * abs(b))
             for a, in c for b, in c if a + b == k)
    want = np.sum(ws * np.sin((t - s) * kn) * Fk) / math.sqrt(1 + k * k)
    assert X.at((k,)) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("eq,d,N,kind,p", [
    (SCH, 1, 4, "power", 2), (SCH, 1, 4, "signs=+-+", 3), (SCH, 2, 2, "signs=-+-", 3),
    (SCH, 2, 2, "modsq", 2), (WAVE, 1, 4, "power", 3), (WAVE, 2, 2, "power", 2), (WAVE, 3, 2, "power", 2)])
def test_spectral_agrees_with_direct(eq, d, N, kind, p):
    nl = NonlinearitySpec.parse(p, kind)
    f = sample_field(FieldSpec(eq, d, 0.0, N, seed=11))
    times = np.linspace(0, 1, 5)
    a = second_iterate(f, nl, eq, times, method="direct")
    b = second_iterate(f, nl, eq, times, method="spectral")
    db = {tuple(k): v for k, v in zip(b.modes.tolist(), b.values)}
    scale = np.abs(a.values).max()
    for k, v in zip(a.modes.tolist(), a.values):
        assert np.abs(db[tuple(k)] - v).max() <= 1e-9 * scale
    inside = {tuple(k) for k in a.modes.tolist()}
    rest = [np.abs(v).max() for k, v in db.items() if k not in inside]
    assert max(rest, default=0.0) <= 1e-9 * scale


@pytest.mark.parametrize("kind,p", [("power", 2), ("signs=+-+", 3)])
def test_p_homogeneity(kind, p):
    nl = NonlinearitySpec.parse(p, kind)
    f = sample_field(FieldSpec(SCH, 1, 0.0, 4, seed=3))
    x1 = second_iterate(f, nl, SCH, [0.5, 1.0]).values
    x2 = second_iterate(f.scaled(2.5), nl, SCH, [0.5, 1.0]).values
    np.testing.assert_allclose(x2, 2.5 ** p * x1, rtol=1e-13, atol=1e-15 * np.abs(x2).max())


def test_heat_iterate_rejected_and_guards():
    f = sample_field(FieldSpec(SCH, 1, 0.0, 4))
    with pytest.raises(ValueError):
        second_iterate(f, NonlinearitySpec(2), EquationKind.HEAT, [1.0])
    big = sample_field(FieldSpec(SCH, 3, 0.0, 8))
    with pytest.raises(CostGuardError):
        TupleStructure(big.modes, (1, 1), SCH)


# ---------------------------------------------------------------- oracle


def test_oracle_hand_example_and_empty_band():
    o = variance_oracle(FieldSpec(SCH, 1, 0.0, 2), NonlinearitySpec(2), SCH)
    want = (1 + 144) ** -0.5 * (bracket(np.array([[2]]))[0] * bracket(np.array([[3]]))[0]) ** -2 * 2
    assert o.at((5,)) == pytest.approx(want, rel=1e-14)
    empty = schrodinger_oracle(np.zeros((0, 1)), np.zeros(0), (1, 1))
    assert len(empty.values) == 0


@pytest.mark.parametrize("kind,p", [("power", 2), ("modsq", 2), ("signs=--", 2), ("power", 3),
                                    ("signs=+-+", 3), ("signs=--+", 3), ("signs=---", 3)])
def test_exact_oracle_below_four_brackets(kind, p):
    spec = FieldSpec(SCH, 1, -0.5, 8)
    nl = NonlinearitySpec.parse(p, kind)
    ex = variance_oracle(spec, nl, mode="exact", t=1.0)
    br = variance_oracle(spec, nl, mode="bracket")
    assert np.array_equal(ex.modes, br.modes)
    assert np.all(ex.values <= 4 * br.values)


def test_exact_oracle_brute_force_second_moment():
    # Enumerate E|X|^2 = sum_{tau, tau'} W W' E[prod prod'] for a tiny band.
    spec = FieldSpec(SCH, 1, 0.0, 2)
    nl = NonlinearitySpec.parse(3, "signs=+-+")
    band = [-3, -2, 2, 3]
    amp = {k: (1 + k * k) ** -0.5 for k in band}
    ex = variance_oracle(spec, nl, mode="exact", t=1.0)
    tuples = [ks for ks in itertools.product(band, repeat=3) if ks[0] != ks[1] and ks[1] != ks[2]]

    def moment(a, b):
        # E[prod_plus c prod_minus conj(c)] for multisets, c = amp g
        cnt = {}
        for k in a:
            cnt.setdefault(k, [0, 0])[0] += 1
        for k in b:
            cnt.setdefault(k, [0, 0])[1] += 1
        val = 1.0
        for k, (m, n) in cnt.items():
            if m != n:
                return 0.0
            val *= math.factorial(m) * amp[k] ** (2 * m)
        return val

    for k in (-8, -1, 4, 7):
        ts = [ks for ks in tuples if ks[0] - ks[1] + ks[2] == k]
        total = 0
        for x in ts:
            for y in ts:
                ox = -k * k + x[0] ** 2 - x[1] ** 2 + x[2] ** 2
                oy = -k * k + y[0] ** 2 - y[1] ** 2 + y[2] ** 2
                total += W(ox, 1.0) * W(oy, 1.0).conjugate() * moment((x[0], x[2], y[1]), (x[1], y[0], y[2]))
        assert ex.at((k,)) == pytest.approx(total.real, rel=1e-12, abs=1e-300)


def _sup_time_ratios(kind, samples):
    spec = FieldSpec(SCH, 1, -0.5, 8)
    nl = NonlinearitySpec.parse(3, kind)
    br = variance_oracle(spec, nl)
    st = TupleStructure(sample_field(spec).modes, nl.sign_pattern, SCH)
    times = np.linspace(0, 1, 33)
    acc = np.zeros(len(st.out_modes))
    for i in range(samples):
        f = sample_field(FieldSpec(SCH, 1, -0.5, 8, seed=derive_seed(5, 8, i)))
        acc += (np.abs(st.evaluate(f.coeffs, times)) ** 2).max(axis=1)
    pred = np.array([br.at(k) for k in st.out_modes])
    keep = pred > 0
    return st.out_modes[keep], acc[keep] / samples / pred[keep]


@pytest.mark.xfail(strict=True, reason=(
    "off-resonant modes have E sup_t|X_k|^2 ~ |Omega|^-2 while the bracket is <Omega>^-1; "
    "ratios reach ~0.005 at |k| ~ 3N, so the two-sided [0.1, 10] band cannot hold for every k"))
def test_monte_carlo_sup_time_within_bracket_band_every_mode():
    _, ratio = _sup_time_ratios("signs=+-+", 1000)
    assert np.all((ratio >= 0.1) & (ratio <= 10))


@pytest.mark.parametrize("kind", ["signs=+-+", "power"])
def test_monte_carlo_sup_time_bracket_is_upper_bound(kind):
    modes, ratio = _sup_time_ratios(kind, 1000)
    assert np.all(ratio <= 10)
    if kind == "signs=+-+":
        data_band = (np.abs(modes[:, 0]) >= 8) & (np.abs(modes[:, 0]) < 16)
        assert np.all(ratio[data_band] >= 0.1)


def test_oracle_consistency_small():
    res = oracle_consistency(1, 4, NonlinearitySpec.parse(3, "signs=+-+"), "-1/2", samples=400, seed=2)
    assert res.passed, (res.aggregate_z, res.max_abs_z)


def brute_heat(d, N, alpha, p):
    L = heat_time_cutoff(N)
    band = [(n,) for n in range(-2 * N + 1, 2 * N) if N <= abs(n) < 2 * N]
    pts = [(k, l) for k in band for l in range(-(L - 1), L)]
    f = {x: (1 + x[0][0] ** 2) ** -alpha * (1 + x[0][0] ** 2 + abs(x[1])) ** -2.0 for x in pts}
    out = {}
    for xs in itertools.permutations(pts, p):
        key = (sum(x[0][0] for x in xs), sum(x[1] for x in xs))
        out[key] = out.get(key, 0.0) + math.prod(f[x] for x in xs)
    return {k: v * (1 + k[0] ** 2 + abs(k[1])) ** -2.0 for k, v in out.items()}


def test_heat_oracle_matches_brute_force():
    o = heat_oracle(1, 2, 0.3, 2)
    want = brute_heat(1, 2, 0.3, 2)
    got = o.as_dict()
    for key, v in want.items():
        assert got[key] == pytest.approx(v, rel=1e-9, abs=1e-18)
    assert sum(got.values()) == pytest.approx(sum(want.values()), rel=1e-9)


def test_heat_slope():
    res = heat_experiment(1, 2, 0, [4, 8, 16])
    assert res.passed
    assert float(res.predicted_slope) == -2.5


# ------------------------------------------------------------------ norms


def test_h_s_examples():
    assert h_s_norm({(1, 0): 1.0}, 2) == pytest.approx(2.0)
    assert h_s_norm({(0, 0): 0.0}, 1) == 0.0
    assert h_s_norm({}, 1) == 0.0
    assert h_s_norm({(1, 0): 1.0, (-1, 0): 1j}, 0) == pytest.approx(math.sqrt(2))


def test_besov_examples():
    assert besov_norm({(1, 0): 1.0}, 0) == pytest.approx(1.0)
    assert besov_norm({(5, 0): 1.0}, 1) == pytest.approx(4.0, abs=1e-6)
    assert besov_norm({(3, 3): 1.0}, 1) == pytest.approx(4.0, abs=1e-6)
    assert besov_norm({}, 1) == 0.0
    with pytest.raises(ValueError):
        besov_norm({(1,): 1.0}, 0, grid_factor=2)


def test_besov_embedding_on_random_fields():
    for d, N in ((1, 8), (2, 4)):
        modes = sample_field(FieldSpec(SCH, d, 0.0, N)).modes
        C = embedding_constant(modes)
        for i in range(50):
            f = sample_field(FieldSpec(SCH, d, 0.0, N, seed=i))
            s = 0.0
            assert besov_norm((f.modes, f.coeffs), s) <= C * h_s_norm((f.modes, f.coeffs), s + d / 2 + 0.01)


def test_parseval():
    f = sample_field(FieldSpec(SCH, 2, 0.0, 4, seed=8))
    u = synthesize(f.modes, f.coeffs, 32)
    assert np.sqrt(np.mean(np.abs(u) ** 2)) == pytest.approx(h_s_norm((f.modes, f.coeffs), 0), rel=1e-9)


# ------------------------------------------------------------- experiments


def test_scaling_experiment_small_and_deterministic():
    nl = NonlinearitySpec.parse(3, "signs=+-+")
    kw = dict(eq=SCH, d=1, nl=nl, alpha="-1/2", Nset=[4, 8, 16], samples=8, seed=3)
    a = scaling_experiment(**kw)
    b = scaling_experiment(**kw, threads=3)
    assert a.results == b.results
    assert a.to_csv() == b.to_csv()
    assert len(a.results) == 24
    assert all(r.hs_norm > 0 and r.besov_norm is not None and math.isfinite(r.besov_norm) for r in a.results)
    assert a.to_csv().splitlines()[0].startswith("eq,d,p,signs,alpha,N")
    assert a.to_json()["predictedSlope"]["num"] == -1


def test_scaling_experiment_errors():
    nl = NonlinearitySpec(2)
    with pytest.raises(ValueError):
        scaling_experiment(SCH, 1, nl, 0, [1, 2, 4], samples=8)
    with pytest.raises(ValueError):
        scaling_experiment(SCH, 1, nl, 0, [4, 8, 16], samples=4)
    with pytest.raises(ValueError):
        scaling_experiment(SCH, 1, nl, 0, [4, 8], samples=8)
    with pytest.raises(ValueError):
        scaling_experiment(EquationKind.HEAT, 1, nl, 0, [4, 8, 16], samples=8)


def test_ones_mode_uses_deterministic_prediction():
    nl = NonlinearitySpec(3)
    r = scaling_experiment(SCH, 2, nl, 0, [2, 4, 8], samples=8, data_mode="ones", method="spectral")
    assert len({x.hs_norm for x in r.results if x.spec.N == 4}) == 1
    assert r.predicted_slope == -(3 - 1) * (0 - (1 - 1))


def test_hhl_regime_mask():
    modes = np.array([[0], [3], [4], [5], [16]])
    assert output_mask(modes, 16, "hhl").tolist() == [True, True, True, False, False]
    assert output_mask(modes, 16, "hhh").tolist() == [False, False, False, False, True]
