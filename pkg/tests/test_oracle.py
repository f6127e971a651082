import math

import numpy as np
import pytest

from gwtails import offspring as off
from gwtails import oracle


def test_enumerate_binary_three_nodes():
    ens = oracle.enumerate_trees(off.critical_binary(), 3)
    probs = {t.child_counts: t.prob for t in ens.trees}
    assert probs == {(0,): 0.5, (2, 0, 0): 0.125}
    assert abs(ens.total_mass - 0.625) < 1e-15


def test_enumerate_catalan_counts():
    ens = oracle.enumerate_trees(off.critical_binary(), 12)
    by_size = {}
    for t in ens.trees:
        by_size[t.size] = by_size.get(t.size, 0) + 1
    assert by_size == {1: 1, 3: 1, 5: 2, 7: 5, 9: 14, 11: 42}


def test_enumerate_requires_finite_support():
    with pytest.raises(ValueError):
        oracle.enumerate_trees(off.poisson_critical(), 5)


def test_enumeration_work_budget():
    with pytest.raises(RuntimeError):
        oracle.enumerate_trees(off.finite_support({0: 0.4, 1: 0.3, 2: 0.3}),
                               40, work_budget=1000)


def test_size_pmf_values():
    d = off.critical_binary()
    pm = oracle.size_pmf_upto(d, 9)
    assert abs(pm[1] - 0.5) < 1e-15
    assert pm[2] == 0.0
    assert abs(pm[3] - 0.125) < 1e-14
    # (1/5) * P(one +1 and four -1 ... ) cross-check at n=5: 2 trees of size 5
    assert abs(pm[5] - 2 * 0.5**5) < 1e-14
    assert oracle.size_pmf(d, 3) == pm[3]


def test_size_pmf_matches_enumeration_mass():
    for law in (off.critical_binary(),
                off.finite_support({0: 0.2, 1: 0.3, 2: 0.5}),
                off.finite_support({0: 0.6, 3: 0.4})):
        ens = oracle.enumerate_trees(law, 12)
        pm = oracle.size_pmf_upto(law, 12)
        for n in range(1, 13):
            assert abs(ens.size_mass(n) - pm[n]) < 1e-12
        assert abs(ens.total_mass - pm.sum()) < 1e-12


def test_size_pmf_unbounded_support():
    # cycle lemma applies verbatim to parametric laws
    d = off.poisson_critical()
    pm = oracle.size_pmf_upto(d, 6)
    assert abs(pm[1] - math.exp(-1)) < 1e-14
    # P(|T|=2) = (1/2) P(X1+X2 = -1) with X ~ Poisson(1) - 1
    want = sum(
        math.exp(-2.0) / (math.factorial(a) * math.factorial(b))
        for a in range(0, 3) for b in range(0, 3) if a + b == 1
    ) / 2.0
    assert abs(pm[2] - want) < 1e-14


def test_height_cdf_values():
    d = off.critical_binary()
    assert oracle.height_cdf(d, 0) == 0.0
    assert oracle.height_cdf(d, 1) == 0.5
    assert abs(oracle.height_cdf(d, 2) - 0.625) < 1e-15
    # monotone nondecreasing, converging to the extinction probability
    vals = [oracle.height_cdf(d, n) for n in range(0, 30)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    sup_law = off.finite_support({0: 0.25, 2: 0.75})
    q = off.extinction_probability(sup_law)
    assert abs(oracle.height_cdf(sup_law, 3000) - q) < 1e-10


def test_height_cdf_matches_enumeration():
    for law in (off.critical_binary(),
                off.finite_support({0: 0.2, 1: 0.3, 2: 0.5})):
        for n in range(1, 6):
            ens = oracle.enumerate_by_height(law, n - 1)
            assert abs(ens.total_mass - oracle.height_cdf(law, n)) < 1e-12


def test_example_eh_exact():
    b = off.critical_binary()
    assert abs(oracle.example_Eh_exact(b, 1, 2) - 0.125) < 1e-15
    d3 = off.finite_support({0: 0.2, 1: 0.3, 2: 0.5})
    # h=2, k=1: the unique path tree has probability mu(1)^2 mu(0)
    assert abs(oracle.example_Eh_exact(d3, 2, 1) - 0.3**2 * 0.2) < 1e-15
    # lower bound q^h p^(hk) holds on all enumerable cases
    from gwtails.treegen import example_Eh_bound
    for h in range(1, 5):
        for k in (1, 2):
            if float(d3.pmf(k)) == 0.0:
                continue
            exact = oracle.example_Eh_exact(d3, h, k)
            assert exact >= example_Eh_bound(d3, h, k) - 1e-15


def test_log_space_tiny_atoms():
    law = off.finite_support({0: 1.0 - 1e-8, 2: 1e-8})
    ens = oracle.enumerate_trees(law, 5)
    cherry = [t for t in ens.trees if t.size == 3]
    assert len(cherry) == 1
    assert abs(cherry[0].prob - 1e-8 * (1 - 1e-8) ** 2) < 1e-22


def test_survival_shape_constant():
    # n^(1/2) P(|T| >= n) settles near sqrt(2/(pi v)) for the binary law
    pm = oracle.size_pmf_upto(off.critical_binary(), 2000)
    for n in (100, 400, 1600):
        c = math.sqrt(n) * (1.0 - pm[:n].sum())
        assert 0.5 < c < 1.2
