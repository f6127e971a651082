import math

import numpy as np
import pytest

from gwtails import offspring as off
from gwtails import treegen, walk
from gwtails.harness import wilson_interval

from conftest import ref_walk_python


def test_immediate_death():
    p = walk.simulate(off.step_distribution(off.finite_support({0: 1.0})), 1, 0)
    assert p.sigma == 1 and p.h_sigma == 1.0 and p.max_s == 1
    assert not p.censored


def test_rejects_walk_that_cannot_die():
    with pytest.raises(ValueError):
        walk.simulate(off.finite_support({1: 1.0}), 1, 0)


def test_full_retention_and_harmonic():
    p = walk.simulate(off.critical_binary(), 3, 1, retain="full")
    assert p.path is not None and p.path[0] == 1 and p.path[-1] == 0
    assert walk.harmonic(p, 0) == 0.0
    assert abs(walk.harmonic(p, p.sigma) - p.h_sigma) < 1e-9
    summary = walk.simulate(off.critical_binary(), 3, 1)
    with pytest.raises(ValueError):
        walk.harmonic(summary, 1)


def test_harmonic_hand_path():
    p = walk.WalkPath(start=1, sigma=3, max_s=2, h_sigma=2.5, censored=False,
                      path=np.array([1, 2, 1, 0]))
    assert walk.harmonic(p, 3) == 2.5
    assert walk.harmonic(p, 0) == 0.0


def test_ratio_statistics():
    p = walk.WalkPath(start=1, sigma=1, max_s=1, h_sigma=1.0, censored=False)
    root, stable, sig, mx = walk.ratio_statistics(p, alpha=2.0)
    assert root == 1.0 and stable == 1.0 and sig == 1 and mx == 1
    q = walk.WalkPath(start=1, sigma=4, max_s=3, h_sigma=3.0, censored=False)
    assert walk.ratio_statistics(q)[0] == 1.5
    cens = walk.WalkPath(start=1, sigma=10, max_s=3, h_sigma=3.0, censored=True)
    with pytest.raises(ValueError):
        walk.ratio_statistics(cens)


@pytest.mark.parametrize("law_name", ["binary", "v45", "geom", "pois", "power",
                                      "finite-nondyadic"])
def test_engine_matches_reference(law_name):
    laws = {
        "binary": off.critical_binary(),
        "v45": off.near_four_variance(),
        "geom": off.geometric_critical(),
        "pois": off.poisson_critical(),
        "power": off.power_critical(1.5),
        "finite-nondyadic": off.finite_support({0: 0.3, 1: 0.4, 2: 0.3}),
    }
    d = laws[law_name]
    batch = walk.run_walks(d, 40, 99, step_cap=2500, keep_paths=True,
                           track_levels=True)
    for i in range(40):
        r = ref_walk_python(d, 99, i, 2500)
        assert batch.sigma[i] == r["sigma"]
        assert batch.max_s[i] == r["max_s"]
        assert abs(batch.h_sigma[i] - r["H"]) < 1e-9
        assert bool(batch.censored[i]) == r["censored"]
        assert np.array_equal(batch.paths[i], r["path"])


def test_engine_interval_mode_matches_reference():
    d = off.critical_binary()
    b = walk.run_walks(d, 100, 7, start=3, absorb_low=1, absorb_high=8,
                       step_cap=10**6, want_h=False)
    for i in range(100):
        r = ref_walk_python(d, 7, i, 10**6, start=3, alow=1, ahigh=8)
        assert b.sigma[i] == r["sigma"]
        assert bool(b.exit_above[i]) == r["above"]


def test_walk_invariants_batch():
    for d in (off.critical_binary(), off.power_critical(1.5)):
        b = walk.run_walks(d, 5000, 13, step_cap=10**5)
        keep = ~b.censored
        h, sig, mx = b.h_sigma[keep], b.sigma[keep], b.max_s[keep]
        assert np.all(h <= sig + 1e-9)
        assert np.all(h >= sig / mx - 1e-9)


def test_tree_walk_same_stream_coupling():
    # the queue of the sampled tree IS the walk from the same stream
    d = off.poisson_critical()
    t = treegen.sample_tree(d, 21, 4, node_cap=10**5)
    w = walk.simulate(d, 21, 4, retain="full")
    assert t.size == w.sigma
    assert t.max_queue == w.max_s
    assert np.array_equal(t.queue, w.path[:-1])


def test_empirical_sigma_pmf():
    d = off.critical_binary()
    b = walk.run_walks(d, 200_000, 31, step_cap=10**4)
    n = b.n_trials
    for target, exact in ((1, 0.5), (3, 0.125)):
        hits = int(np.sum(b.sigma == target))
        p, lo, hi = wilson_interval(hits, n)
        assert abs(p - exact) <= 3 * (hi - lo) / 2


def test_block_boundaries_do_not_matter():
    d = off.geometric_critical()
    a = walk.run_walks(d, 300, 5, step_cap=4096, batch_trials=300)
    b = walk.run_walks(d, 300, 5, step_cap=4096, batch_trials=7)
    assert np.array_equal(a.sigma, b.sigma)
    assert np.array_equal(a.max_s, b.max_s)
    assert np.allclose(a.h_sigma, b.h_sigma, atol=1e-12)


def test_trial_offset_alignment():
    d = off.critical_binary()
    full = walk.run_walks(d, 50, 77, step_cap=10**4)
    part = walk.run_walks(d, 20, 77, step_cap=10**4, trial_offset=30)
    assert np.array_equal(full.sigma[30:], part.sigma)
