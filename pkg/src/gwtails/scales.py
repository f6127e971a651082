"""Multiscale decomposition of an absorbed walk path.

The walk is at scale l while its position stays inside the window
[2^(l-1), 2^(l+2)); leaving the window re-anchors the scale at
l' = floor(log2 S) of the landing point (so an up-move raises the scale
by at least 2, a down-move from l >= 2 lands at 2^(l-1)-1 and lowers it
by exactly 2, and hitting 0 ends the path).  The decomposition records
the change times tau_i, the scale sequence L_i, the occupation times
N_l, the per-scale harmonic masses H_l, visit counts M(l), and visit
start times.

Upcrossings of [x, y): alternating stopping times starting from
tau_0^- = inf{t >= 0 : S_t < x}; the count U(t) is the number of
completed up-moves (visits to [y, inf) after a visit below x) by time t.

The visit-count bound checked by `check_up_bd` is

    M(l) <= U(sigma; [2^(l-1), 2^l)) + U(sigma; [2^(l+1), 2^(l+2))) + 1.

The +1 is necessary: every visit except possibly the last is followed by
a completed flanking upcrossing before the next visit, but a final visit
that exits downward and never returns (in particular every path dying
from scale 0, e.g. the two-step path 1,0 which has M(0) = 1 and no
upcrossing of either flank) contributes none.  The count of paths
violating the unshifted form M(l) <= U + U is also reported.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from .offspring import OffspringDistribution, StepDistribution
from .walk import WalkPath, run_walks, _floor_log2

__all__ = [
    "ScaleDecomposition",
    "UpcrossingCount",
    "decompose",
    "upcrossings",
    "check_up_bd",
    "UpBdReport",
    "exit_interval_trial",
    "exit_interval_batch",
    "scale_window",
]

NEG_INF = -(2**62)  # stands in for L = -infinity at absorption


def scale_window(ell: int):
    """Integer window [lo, hi) = [2^(l-1), 2^(l+2)) occupied at scale l."""
    lo = 1 if ell == 0 else 1 << (ell - 1)
    return lo, 1 << (ell + 2)


@dataclass
class ScaleDecomposition:
    """Change-of-scale times and per-scale occupation tables for one path."""

    tau: List[int]                 # change-of-scale times, tau_0 = 0
    L: List[int]                   # scale after each change; last is NEG_INF
    sigma: int
    n_ell: Dict[int, int]          # time at scale l before sigma
    h_ell: Dict[int, float]        # harmonic mass collected at scale l
    m_ell: Dict[int, int]          # number of visits to scale l
    visit_starts: Dict[int, List[int]]   # tau_{i(l, 1..M(l))}

    def lam(self, t: int) -> int:
        """Scale in force at time t (NEG_INF at and after sigma)."""
        if t >= self.sigma:
            return NEG_INF
        j = int(np.searchsorted(np.asarray(self.tau), t, side="right")) - 1
        return self.L[j]

    @property
    def visited(self) -> List[int]:
        return sorted(self.m_ell)


def _path_array(path) -> np.ndarray:
    if isinstance(path, WalkPath):
        if path.path is None:
            raise ValueError("decomposition requires retain='full'")
        if path.censored:
            raise ValueError("decomposition requires an uncensored path")
        return np.asarray(path.path, dtype=np.int64)
    return np.asarray(path, dtype=np.int64)


def decompose(path) -> ScaleDecomposition:
    """Full scale decomposition; one linear pass over S_0..S_sigma."""
    s = _path_array(path)
    if s[-1] > 0:
        raise ValueError("path must end at absorption")
    sigma = len(s) - 1
    tau = [0]
    ell = int(_floor_log2(np.array([s[0]]))[0])
    L = [ell]
    n_ell: Dict[int, int] = {}
    h_ell: Dict[int, float] = {}
    m_ell: Dict[int, int] = {}
    visit_starts: Dict[int, List[int]] = {}
    m_ell[ell] = 1
    visit_starts[ell] = [0]
    t = 0
    while True:
        lo, hi = scale_window(L[-1])
        # first exit of the current window after tau_i
        seg = s[t:]
        out = (seg < lo) | (seg >= hi)
        nxt = int(np.argmax(out))
        if not out[nxt]:
            raise ValueError("path never exits its window; not absorbed?")
        t_exit = t + nxt
        cur = L[-1]
        n_ell[cur] = n_ell.get(cur, 0) + (t_exit - t)
        h_ell[cur] = h_ell.get(cur, 0.0) + float(np.sum(1.0 / s[t:t_exit]))
        tau.append(t_exit)
        if s[t_exit] <= 0:
            L.append(NEG_INF)
            break
        ell = int(_floor_log2(s[t_exit : t_exit + 1])[0])
        L.append(ell)
        m_ell[ell] = m_ell.get(ell, 0) + 1
        visit_starts.setdefault(ell, []).append(t_exit)
        t = t_exit
    return ScaleDecomposition(
        tau=tau, L=L, sigma=sigma,
        n_ell=n_ell, h_ell=h_ell, m_ell=m_ell, visit_starts=visit_starts,
    )


@dataclass
class UpcrossingCount:
    """Completed upcrossings of [x, y) by time t (natural count)."""

    x: int
    y: int
    t: int
    count: int
    finish_times: Optional[List[int]] = None

    def __int__(self) -> int:
        return self.count


def upcrossings(path, x: int, y: int, t: Optional[int] = None,
                retain_times: bool = False) -> UpcrossingCount:
    """Count completed upcrossings of [x, y) by time t (default: all of path).

    tau_0^- = inf{t >= 0 : S_t < x}; each upcrossing finishes at the
    first subsequent time with S_t >= y.
    """
    if not 0 < x < y:
        raise ValueError("need 0 < x < y")
    s = _path_array(path)
    if t is None:
        t = len(s) - 1
    s = s[: t + 1]
    below = s < x
    above = s >= y
    count = 0
    finishes: List[int] = []
    armed = False
    # vectorized alternation: walk the event positions only
    ev = np.nonzero(below | above)[0]
    for pos in ev:
        if below[pos]:
            armed = True
        elif armed:
            count += 1
            armed = False
            if retain_times:
                finishes.append(int(pos))
    return UpcrossingCount(x=x, y=y, t=t, count=count,
                           finish_times=finishes if retain_times else None)


@dataclass
class UpBdReport:
    """Per-scale visit counts against flanking upcrossing counts."""

    per_ell: Dict[int, tuple]      # l -> (M, U_low, U_high)
    violations: int                # of M <= U_low + U_high + 1
    strict_violations: int         # of the unshifted M <= U_low + U_high

    @property
    def ok(self) -> bool:
        return self.violations == 0


def check_up_bd(dec: ScaleDecomposition, path) -> UpBdReport:
    """Check M(l) <= U(sigma;[2^(l-1),2^l)) + U(sigma;[2^(l+1),2^(l+2))) + 1.

    Returns per-scale counters; `strict_violations` counts scales where
    even the unshifted inequality fails (expected for the final visit's
    scale on most paths; see the module docstring).
    """
    s = _path_array(path)
    per = {}
    bad = strict_bad = 0
    for ell, m in dec.m_ell.items():
        if ell == 0:
            u_low = 0  # window [1/2, 1) holds no integers; S < 1/2 means sigma
        else:
            u_low = upcrossings(s, *(scale_window(ell)[0], 1 << ell)).count
        u_high = upcrossings(s, 1 << (ell + 1), 1 << (ell + 2)).count
        per[ell] = (m, u_low, u_high)
        if m > u_low + u_high + 1:
            bad += 1
        if m > u_low + u_high:
            strict_bad += 1
    return UpBdReport(per_ell=per, violations=bad, strict_violations=strict_bad)


def exit_interval_trial(
    nu, a: int, z: int, b: int, seed: int, trial: int,
    step_cap: int = 10**8,
):
    """Run one walk from z to its first exit of [a, b); True if it exits above.

    The comparison target is the exit bound (z+1-a)/(b+1-a).
    """
    if not a <= z < b:
        raise ValueError("need a <= z < b")
    d = nu.offspring if isinstance(nu, StepDistribution) else nu
    batch = run_walks(
        d, 1, seed, trial_offset=trial, start=z, step_cap=step_cap,
        absorb_low=a, absorb_high=b, want_h=False,
    )
    if batch.censored[0]:
        raise RuntimeError("exit trial censored; raise step_cap")
    return bool(batch.exit_above[0])


def exit_interval_batch(
    d: OffspringDistribution, a: int, z: int, b: int,
    n_trials: int, seed: int, step_cap: int = 10**7, trial_offset: int = 0,
):
    """Vectorized exit trials; returns (exit_above bool array, tau array, censored)."""
    if not a <= z < b:
        raise ValueError("need a <= z < b")
    batch = run_walks(
        d, n_trials, seed, start=z, step_cap=step_cap, absorb_low=a,
        absorb_high=b, want_h=False, trial_offset=trial_offset,
    )
    return batch.exit_above, batch.sigma, batch.censored
