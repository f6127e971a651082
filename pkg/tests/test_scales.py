import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gwtails import offspring as off
from gwtails import scales, walk


def test_decompose_immediate_absorption():
    dec = scales.decompose(np.array([1, 0]))
    assert dec.tau == [0, 1]
    assert dec.L[0] == 0 and dec.L[1] == scales.NEG_INF
    assert dec.n_ell == {0: 1}
    assert dec.m_ell == {0: 1}
    assert dec.sigma == 1


def test_decompose_hand_trace():
    # S = 1, 2, 5, ...: at scale 0 the window is [1/2, 4), so S=5 exits at
    # t=2 and the new scale is 2
    path = np.array([1, 2, 5, 4, 3, 2, 1, 0])
    dec = scales.decompose(path)
    assert dec.tau[0] == 0 and dec.tau[1] == 2
    assert dec.L[0] == 0 and dec.L[1] == 2
    assert dec.lam(0) == 0 and dec.lam(1) == 0 and dec.lam(2) == 2
    assert dec.lam(dec.sigma) == scales.NEG_INF


def test_decompose_partition_invariants():
    for law in (off.critical_binary(), off.power_critical(1.5)):
        b = walk.run_walks(law, 400, 3, step_cap=20000, keep_paths=True)
        for i in range(400):
            if b.censored[i]:
                continue
            p = b.paths[i]
            dec = scales.decompose(p)
            assert sum(dec.n_ell.values()) == dec.sigma
            assert abs(sum(dec.h_ell.values()) - float(np.sum(1.0 / p[:-1]))) < 1e-8
            for ell, nl in dec.n_ell.items():
                hl = dec.h_ell[ell]
                assert 2.0 ** (ell - 1) * hl <= nl + 1e-9
                assert nl <= 2.0 ** (ell + 2) * hl + 1e-9
            # scale moves: up by >= 2, down by exactly 2 (to 2^(l-1) - 1)
            for j in range(1, len(dec.L) - 1):
                prev_l, cur = dec.L[j - 1], dec.L[j]
                if cur == scales.NEG_INF:
                    continue
                if cur > prev_l:
                    assert cur >= prev_l + 2
                elif prev_l >= 2:
                    assert cur == prev_l - 2
                    assert p[dec.tau[j]] == 2 ** (prev_l - 1) - 1
            # the walk stays in the window between change times
            for j in range(len(dec.tau) - 1):
                lo, hi = scales.scale_window(dec.L[j])
                seg = p[dec.tau[j]:dec.tau[j + 1]]
                assert np.all((seg >= lo) & (seg < hi))


def test_upcrossings_hand_trace():
    u = scales.upcrossings(np.array([5, 3, 9, 2, 0]), 4, 8)
    assert u.count == 1
    down = scales.upcrossings(np.arange(9, -1, -1), 4, 8)
    assert down.count == 0
    # spec-adopted convention: tau_0^- = inf{t >= 0 : S_t < x}
    u2 = scales.upcrossings(np.array([1, 5, 0]), 2, 4, retain_times=True)
    assert u2.count == 1 and u2.finish_times == [1]


def test_upcrossings_validates_interval():
    with pytest.raises(ValueError):
        scales.upcrossings(np.array([1, 0]), 4, 4)
    with pytest.raises(ValueError):
        scales.upcrossings(np.array([1, 0]), 0, 4)


@given(st.lists(st.integers(0, 12), min_size=2, max_size=60),
       st.integers(1, 5), st.integers(1, 6))
@settings(max_examples=120, deadline=None)
def test_upcrossings_monotone_in_t(vals, x, dy):
    s = np.array(vals)
    y = x + dy
    counts = [scales.upcrossings(s, x, y, t).count for t in range(len(s))]
    assert all(b >= a for a, b in zip(counts, counts[1:]))


def test_up_bd_strict_counterexample():
    # the two-step path 1, 0 has M(0) = 1 and no completed upcrossing of
    # either flanking interval: the unshifted bound fails, the +1 holds
    p = np.array([1, 0])
    dec = scales.decompose(p)
    rep = scales.check_up_bd(dec, p)
    assert rep.violations == 0
    assert rep.strict_violations == 1
    assert rep.per_ell[0] == (1, 0, 0)


def test_up_bd_zero_violations_sampled():
    for law in (off.critical_binary(), off.power_critical(1.5)):
        b = walk.run_walks(law, 300, 17, step_cap=20000, keep_paths=True)
        for i in range(300):
            if b.censored[i]:
                continue
            dec = scales.decompose(b.paths[i])
            rep = scales.check_up_bd(dec, b.paths[i])
            assert rep.violations == 0


def test_trivial_when_no_visits():
    p = np.array([1, 0])
    dec = scales.decompose(p)
    rep = scales.check_up_bd(dec, p)
    assert 5 not in rep.per_ell  # never-visited scales are absent, trivially fine


def test_exit_interval_trial():
    down = off.finite_support({0: 1.0})
    assert scales.exit_interval_trial(down, 1, 3, 8, 1, 0) is False
    with pytest.raises(ValueError):
        scales.exit_interval_trial(down, 3, 1, 8, 1, 0)
    # z = a, a = 1, b = 2: bound (z+1-a)/(b+1-a) = 1/2
    assert (1 + 1 - 1) / (2 + 1 - 1) == 0.5
    above, tau, cens = scales.exit_interval_batch(
        off.critical_binary(), 1, 1, 2, 4000, 9)
    p = float(np.mean(above))
    assert abs(p - 0.5) < 0.03  # exit above iff the first step is +1


def test_engine_tables_match_decompose():
    law = off.geometric_critical()
    b = walk.run_walks(law, 150, 23, step_cap=10**4, keep_paths=True,
                       track_scales_upto=20)
    for i in range(150):
        if b.censored[i]:
            continue
        dec = scales.decompose(b.paths[i])
        for ell in range(0, 21):
            assert b.n_table[i, ell] == dec.n_ell.get(ell, 0)
            assert b.m_table[i, ell] == dec.m_ell.get(ell, 0)
            assert abs(b.h_table[i, ell] - dec.h_ell.get(ell, 0.0)) < 1e-9
