import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gwtails import offspring as off


def test_classify_examples():
    assert off.classify(off.poisson(1.0)) == "critical"
    assert off.classify(off.finite_support({0: 0.6, 2: 0.4})) == "subcritical"
    assert off.classify(off.geometric_critical()) == "critical"
    assert off.classify(off.finite_support({0: 0.25, 2: 0.75})) == "supercritical"


def test_extinction_forced_to_one():
    for d in (off.critical_binary(), off.poisson(0.7), off.geometric(0.6)):
        assert off.extinction_probability(d) == 1.0


def test_extinction_quadratic_roots():
    q = off.extinction_probability(off.finite_support({0: 0.25, 2: 0.75}))
    assert abs(q - 1.0 / 3.0) < 1e-12
    q2 = off.extinction_probability(off.finite_support({0: 0.2, 1: 0.3, 2: 0.5}))
    assert abs(q2 - 0.4) < 1e-12


def test_dual_examples():
    d = off.finite_support({0: 0.25, 2: 0.75})
    dd = off.dual(d)
    atoms = dict(dd.params)
    assert abs(atoms[0] - 0.75) < 1e-12 and abs(atoms[2] - 0.25) < 1e-12
    assert abs(dd.mean - 0.5) < 1e-12
    assert off.classify(dd) == "subcritical"
    # critical laws are their own dual
    b = off.critical_binary()
    assert off.dual(b) is b
    # mu_hat(1) = mu(1) is preserved
    d3 = off.finite_support({0: 0.2, 1: 0.3, 2: 0.5})
    assert abs(off.dual(d3).pmf(1) - 0.3) < 1e-12


def test_dual_parametric_families_exact():
    g = off.geometric(0.3)
    dg = off.dual(g)
    assert dg.family_tag == "geometric" and abs(dg.params[0] - 0.7) < 1e-15
    p = off.poisson(1.5)
    q = off.extinction_probability(p)
    dp = off.dual(p)
    assert dp.family_tag == "poisson"
    assert abs(dp.params[0] - 1.5 * q) < 1e-12


def test_dual_rejects_degenerate():
    with pytest.raises(ValueError):
        off.dual(off.finite_support({2: 1.0}))


def test_dual_idempotent_on_subcritical_side():
    for d in (off.finite_support({0: 0.25, 2: 0.75}), off.geometric(0.25),
              off.poisson(1.8)):
        dd = off.dual(d)
        d3 = off.dual(dd)
        for i in range(0, 12):
            assert abs(float(d3.pmf(i)) - float(dd.pmf(i))) < 1e-12
        assert off.extinction_probability(dd) == 1.0


def test_step_distribution_shift():
    nu = off.step_distribution(off.critical_binary())
    assert nu.pmf(-1) == 0.5 and nu.pmf(1) == 0.5 and nu.pmf(0) == 0.0
    assert abs(nu.mean) < 1e-15
    p = off.step_distribution(off.poisson_critical())
    for i in range(-1, 6):
        assert abs(float(p.pmf(i)) - math.exp(-1) / math.factorial(i + 1)) < 1e-15
    sub = off.step_distribution(off.finite_support({0: 0.6, 2: 0.4}))
    assert sub.mean < 0


def test_step_mass_and_mean_shift():
    for d in (off.geometric_critical(), off.poisson_critical(),
              off.power_critical(1.5)):
        nu = off.step_distribution(d)
        js = np.arange(-1, 4000)
        mass = float(np.sum(nu.pmf(js))) + float(nu.tail(4000))
        assert abs(mass - 1.0) < 1e-9
        assert abs(nu.mean - (d.mean - 1.0)) < 1e-12


def test_tail_properties():
    for d in (off.critical_binary(), off.geometric_critical(),
              off.poisson_critical(), off.power_critical(1.5)):
        assert float(d.tail(0)) == 1.0
        t = np.asarray(d.tail(np.arange(0, 50)))
        assert np.all(np.diff(t) <= 1e-15)
        # tail(i) - tail(i+1) = pmf(i)
        pm = np.asarray(d.pmf(np.arange(0, 49)))
        assert np.allclose(t[:-1] - t[1:], pm, atol=1e-12)


def test_moment_consistency_brute_force():
    for d in (off.geometric_critical(), off.poisson_critical()):
        i = np.arange(0, 200)
        pm = np.asarray(d.pmf(i))
        assert abs(float(pm.sum()) - 1.0) < 1e-12
        assert abs(float(i @ pm) - d.mean) < 1e-10
        var = float((i - d.mean) ** 2 @ pm)
        assert abs(var - d.variance) < 1e-8


def test_power_tail_constructor():
    pw = off.make_power_tail(1.5, "critical")
    assert off.classify(pw) == "critical"
    assert abs(pw.mean - 1.0) < 1e-12
    assert pw.variance == math.inf
    sub = off.make_power_tail(1.5, 0.8)
    assert off.classify(sub) == "subcritical"
    assert abs(sub.mean - 0.8) < 1e-12
    # tail(i) * i^alpha bounded over a wide scan
    mhat = off.power_tail_constant(pw, imax=10**5)
    i = np.arange(1, 10**5, 37)
    assert np.all(i**1.5 * np.asarray(pw.tail(i)) <= mhat + 1e-12)


def test_power_alpha2_second_moment_diverges():
    pw = off.make_power_tail(2.0, "critical")
    assert off.classify(pw) == "critical"
    s3 = pw.second_moment_partial(10**3)
    s6 = pw.second_moment_partial(10**6)
    # log-divergent partial sums: doubling the log doubles the sum
    assert s6 / s3 > 1.5
    p15 = off.power_critical(1.5)
    assert p15.second_moment_partial(10**6) / p15.second_moment_partial(10**3) > 20


def test_power_infeasible_target():
    with pytest.raises(ValueError):
        off.make_power_tail(2.5, "critical")


def test_pgf_values():
    b = off.critical_binary()
    assert b.pgf(0.5) == 0.5 + 0.5 * 0.25
    g = off.geometric_critical()
    assert abs(g.pgf(0.5) - 0.5 / (1 - 0.25)) < 1e-15
    pw = off.power_critical(1.5)
    # brute series comparison
    i = np.arange(1, 40000)
    brute = pw.p0 + float(np.sum(np.asarray(pw.pmf(i)) * 0.9**i))
    assert abs(pw.pgf(0.9) - brute) < 1e-10
    assert abs(pw.pgf(1.0) - 1.0) < 1e-12


def test_spec_roundtrip():
    specs = [
        {"family": "finite", "pmf": {"0": 0.5, "2": 0.5}},
        {"family": "poisson", "mean": 1.0},
        {"family": "geometric", "p": 0.5},
        {"family": "power", "alpha": 1.5, "target": "critical"},
    ]
    for spec in specs:
        d = off.distribution_from_spec(spec)
        d2 = off.distribution_from_spec(off.distribution_to_spec(d))
        assert d2.family_tag == d.family_tag
        assert d2.params == d.params


@st.composite
def finite_laws(draw):
    n = draw(st.integers(2, 5))
    support = draw(st.lists(st.integers(0, 8), min_size=n, max_size=n,
                            unique=True))
    weights = draw(st.lists(st.integers(1, 20), min_size=n, max_size=n))
    tot = sum(weights)
    return off.finite_support({s: w / tot for s, w in zip(support, weights)})


@given(finite_laws())
@settings(max_examples=60, deadline=None)
def test_finite_law_invariants(d):
    i = np.arange(0, 10)
    assert abs(float(np.sum(d.pmf(i))) - 1.0) < 1e-12
    assert off.classify(d) in ("subcritical", "critical", "supercritical")
    q = off.extinction_probability(d)
    assert 0.0 <= q <= 1.0
    assert abs(d.pgf(q) - q) < 1e-9
    if off.classify(d) == "supercritical" and d.p0 > 0:
        dd = off.dual(d)
        assert off.classify(dd) in ("subcritical", "critical")
        assert abs(float(dd.pmf(1)) - float(d.pmf(1))) < 1e-12
