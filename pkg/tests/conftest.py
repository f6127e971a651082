import numpy as np
import pytest

from gwtails import conc, offspring


@pytest.fixture(scope="session")
def catalog():
    return offspring.catalog()


@pytest.fixture(scope="session")
def binary_law():
    return offspring.critical_binary()


@pytest.fixture(scope="session")
def power_law():
    return offspring.power_critical(1.5)


@pytest.fixture(scope="session")
def binary_nl_table(binary_law):
    """Exact n_ell for the fair +/-1 walk, scales 0..12 (spectral, fast)."""
    return conc.build_scale_exit_table(binary_law, range(0, 13),
                                       method="dp-spectral")


@pytest.fixture(scope="session")
def power_nl_table(power_law):
    """Exact n_ell for the alpha=1.5 power law, scales 0..12 (slow: minutes)."""
    return conc.build_scale_exit_table(power_law, range(0, 13), method="dp")


def ref_walk_python(d, seed, trial, cap, start=1, alow=1, ahigh=None):
    """Step-by-step reference walk reading the documented stream protocol."""
    from numpy.random import Philox

    from gwtails.walk import _dyadic_decomposition, make_step_sampler

    words = Philox(key=seed + (trial << 64)).random_raw(max(cap, 64) + 64)
    atoms = d.params if d.family_tag == "finite-support" else None
    dy = _dyadic_decomposition(atoms) if atoms else None
    bits = np.unpackbits(words.view(np.uint8), bitorder="little")
    us = (words >> np.uint64(11)).astype(np.float64) * 2.0**-53
    sampler = make_step_sampler(d)

    def draw(k):
        if dy is not None:
            cut, vals, m = dy
            u = sum(int(bits[k * m + j]) << j for j in range(m))
            return int(vals[np.searchsorted(cut, u, side="right")])
        idx = np.searchsorted(sampler.cdf, us[k], side="right")
        if hasattr(sampler, "head"):
            if idx > sampler.head:
                return sampler._invert_tail(us[k]) - 1
            return int(idx) - 1
        return int(sampler.values[idx])

    S, t, H, mx, path = start, 0, 0.0, start, [start]
    while t < cap:
        H += 1.0 / S
        S += draw(t)
        t += 1
        path.append(S)
        if S < alow or (ahigh is not None and S >= ahigh):
            return dict(sigma=t, max_s=mx, H=H, censored=False,
                        path=np.array(path),
                        above=(ahigh is not None and S >= ahigh))
        mx = max(mx, S)
    return dict(sigma=cap, max_s=mx, H=H, censored=True,
                path=np.array(path), above=False)
