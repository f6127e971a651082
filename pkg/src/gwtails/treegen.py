"""Galton-Watson tree sampling and the deterministic tree inequalities.

Trees are stored in breadth-first order as child-count sequences; the
queue lengths S(v_1..v_n) (S(v_1) = 1, S(v_{i+1}) = S(v_i) + c(v_i) - 1)
are exactly the walk of gwtails.walk, which is how sampling is
implemented.  The inequalities checked here are deterministic facts about
every finite tree:

* ht(T) <= 3 * sum_v 1/S(v)            (harmonic height bound)
* max S(v)/2 <= wid(T) <= max S(v)     (width sandwich)
* ht(T) * wid(T) >= |T|
* the two-sum lower bound >= h/3 for positive integer sequences with
  n_0 = n_{h+1} = 1 (the combinatorial core of the harmonic bound).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .offspring import OffspringDistribution
from .walk import WalkBatch, run_walks

__all__ = [
    "BfsTree",
    "sample_tree",
    "sample_forest",
    "harmonic_bound",
    "width_sandwich",
    "two_sums_lhs",
    "example_Eh_bound",
    "DEFAULT_NODE_CAP",
]

DEFAULT_NODE_CAP = 10**7


@dataclass
class BfsTree:
    """A finite (possibly truncated) tree in breadth-first order."""

    child_counts: np.ndarray     # c(v_1..v_n)
    queue: np.ndarray            # S(v_1..v_n)
    level_sizes: np.ndarray      # |T_0..T_ht|
    truncated: bool

    @property
    def size(self) -> int:
        return len(self.child_counts)

    @property
    def height(self) -> int:
        return len(self.level_sizes) - 1

    @property
    def width(self) -> int:
        return int(self.level_sizes.max())

    @property
    def max_queue(self) -> int:
        return int(self.queue.max())

    def check_queue_recurrence(self) -> bool:
        """Exact integer identity S(v_{i+1}) = S(v_i) + c(v_i) - 1."""
        s = self.queue
        c = self.child_counts
        if s[0] != 1:
            return False
        if not np.array_equal(s[1:], s[:-1] + c[:-1] - 1):
            return False
        if not self.truncated and s[-1] + c[-1] - 1 != 0:
            return False
        return True


def _levels_from_queue(queue: np.ndarray, truncated: bool) -> np.ndarray:
    """Level sizes via the boundary recursion b_{k+1} = b_k + S(b_k)."""
    n = len(queue)
    sizes = [1]
    b = 1
    while b < n:
        sizes.append(int(queue[b]))
        b += int(queue[b])
    if not truncated and b != n:
        raise ValueError("queue does not terminate at a level boundary")
    return np.array(sizes, dtype=np.int64)


def sample_tree(
    d: OffspringDistribution,
    seed: int,
    trial: int,
    node_cap: int = DEFAULT_NODE_CAP,
) -> BfsTree:
    """Breadth-first GW(d) tree from stream (seed, trial), capped at node_cap.

    Deterministic given (d, seed, trial); a cap hit is reported via
    `truncated`, not an error.
    """
    if node_cap < 1:
        raise ValueError("node_cap must be >= 1")
    batch = run_walks(
        d, 1, seed, trial_offset=trial, step_cap=node_cap, keep_paths=True
    )
    path = batch.paths[0]          # S_0 .. S_sigma (or S_cap if truncated)
    truncated = bool(batch.censored[0])
    queue = path[:-1]              # S(v_1 .. v_n), one entry per explored node
    child_counts = np.diff(path) + 1
    return BfsTree(
        child_counts=np.asarray(child_counts, dtype=np.int64),
        queue=np.asarray(queue, dtype=np.int64),
        level_sizes=_levels_from_queue(queue, truncated),
        truncated=truncated,
    )


def sample_forest(
    d: OffspringDistribution,
    n_trials: int,
    seed: int,
    node_cap: int = DEFAULT_NODE_CAP,
    trial_offset: int = 0,
) -> WalkBatch:
    """Batched tree statistics (size, height, width, max queue, harmonic sum).

    Returns the underlying WalkBatch: sigma = |T|, max_s = max queue,
    h_sigma = sum_v 1/S(v), height/width from the level recursion.
    """
    return run_walks(
        d, n_trials, seed, step_cap=node_cap, trial_offset=trial_offset,
        track_levels=True,
    )


def harmonic_bound(t: BfsTree) -> float:
    """3 * sum_v 1/S(v); an upper bound for ht(T) on complete trees."""
    if t.truncated:
        raise ValueError("harmonic bound is only valid for complete trees")
    return 3.0 * float(math.fsum(1.0 / s for s in t.queue))


def width_sandwich(t: BfsTree):
    """(max S(v)/2, max S(v)); wid(T) lies in this closed interval."""
    if t.truncated:
        raise ValueError("width sandwich is only valid for complete trees")
    m = t.max_queue
    return 0.5 * m, m


def two_sums_lhs(n_seq) -> float:
    """sum_{k: n_k <= n_{k+1}} n_k/(n_k+n_{k+1}) + sum_{k: n_k > n_{k+1}} log((n_k+n_{k+1})/n_{k+1}).

    n_seq is a positive integer sequence with first = last = 1 (length
    h+2); the value is always >= h/3.  Computed in log space so that
    entries up to 1e9 are safe.
    """
    n = np.asarray(n_seq, dtype=np.float64)
    if len(n) < 2 or n[0] != 1 or n[-1] != 1 or np.any(n < 1):
        raise ValueError("need positive integers with first = last = 1")
    a, b = n[:-1], n[1:]
    up = a <= b
    ratio_terms = a[up] / (a[up] + b[up])
    log_terms = np.log1p(a[~up] / b[~up])
    return float(math.fsum(ratio_terms) + math.fsum(log_terms))


def example_Eh_bound(d: OffspringDistribution, h: int, k: int) -> float:
    """Lower bound mu(k)^h * mu(0)^(h*k) for the caterpillar event E_h(k).

    E_h(k): height exactly h, h nodes with k children each, all other
    nodes leaves.  Computed in log space.
    """
    if h < 1:
        raise ValueError("h must be >= 1")
    p = float(d.pmf(0))
    q = float(d.pmf(k))
    if p <= 0.0 or q <= 0.0:
        raise ValueError("need mu(0) > 0 and mu(k) > 0")
    return math.exp(h * math.log(q) + h * k * math.log(p))
