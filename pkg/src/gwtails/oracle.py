"""Exact ground truth at desk scale.

Three independent oracles used to validate the samplers and the
Monte Carlo harness:

* exhaustive enumeration of all trees up to a node budget (finite-support
  laws), keyed by breadth-first child-count sequences so each plane tree
  appears exactly once;
* the cycle-lemma size law P(|T| = n) = P(X_1+..+X_n = -1)/n, computed by
  exact convolution of the step law (steps above n-2 cannot contribute
  and are pruned exactly);
* the height CDF P(ht(T) < n) by iterating the probability generating
  function, q_n = f(q_{n-1}) with q_0 = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

import numpy as np
from scipy.fft import irfft, rfft

from .offspring import OffspringDistribution

__all__ = [
    "EnumeratedTree",
    "EnumeratedEnsemble",
    "enumerate_trees",
    "enumerate_by_height",
    "size_pmf",
    "size_pmf_upto",
    "height_cdf",
    "example_Eh_exact",
]

_WORK_BUDGET = 5_000_000  # DFS states before enumerate gives up


@dataclass(frozen=True)
class EnumeratedTree:
    child_counts: tuple
    prob: float
    size: int
    height: int
    width: int
    max_queue: int


@dataclass
class EnumeratedEnsemble:
    """All trees with at most `max_nodes` nodes under a finite-support law."""

    law: OffspringDistribution
    max_nodes: int
    trees: List[EnumeratedTree]

    @property
    def total_mass(self) -> float:
        return math.fsum(t.prob for t in self.trees)

    def size_mass(self, n: int) -> float:
        return math.fsum(t.prob for t in self.trees if t.size == n)

    def mass_height_lt(self, n: int) -> float:
        """P(ht < n) -- only valid if the ensemble provably contains all
        trees of height < n (see enumerate_by_height)."""
        return math.fsum(t.prob for t in self.trees if t.height < n)

    def __len__(self) -> int:
        return len(self.trees)


def _tree_stats(seq) -> tuple:
    """(size, height, width, max_queue) of a complete BFS child sequence."""
    n = len(seq)
    s = 1
    maxq = 1
    for c in seq:
        s += c - 1
        maxq = max(maxq, s) if s > 0 else maxq
    # level boundaries: b_{k+1} = b_k + S_{b_k}
    queue = [1]
    s = 1
    for c in seq[:-1]:
        s += c - 1
        queue.append(s)
    sizes = [1]
    b = 1
    while b < n:
        sizes.append(queue[b])
        b += queue[b]
    return n, len(sizes) - 1, max(sizes), max(queue)


def enumerate_trees(
    d: OffspringDistribution,
    max_nodes: int,
    work_budget: int = _WORK_BUDGET,
) -> EnumeratedEnsemble:
    """All plane trees with <= max_nodes nodes, with exact probabilities.

    Probabilities are products of atoms (log-space below 1e-6 atoms).
    Raises if the law is not finite-support or the DFS exceeds the work
    budget; the budget, not a fixed node cap, is the real limit, so small
    supports (e.g. paths) enumerate comfortably past 16 nodes.
    """
    if d.family_tag != "finite-support":
        raise ValueError("enumeration needs a finite-support law")
    atoms = list(d.params)
    use_logs = any(p < 1e-6 for _, p in atoms)
    logp = {i: math.log(p) for i, p in atoms}
    trees: List[EnumeratedTree] = []
    work = 0

    seq: List[int] = []

    def rec(queue: int, nodes: int, acc: float):
        nonlocal work
        work += 1
        if work > work_budget:
            raise RuntimeError("enumeration work budget exceeded")
        for c, p in atoms:
            n2 = nodes + 1
            q2 = queue + c - 1
            seq.append(c)
            a2 = acc + logp[c] if use_logs else acc * p
            if q2 == 0:
                prob = math.exp(a2) if use_logs else a2
                size, ht, wid, mq = _tree_stats(seq)
                trees.append(EnumeratedTree(tuple(seq), prob, size, ht, wid, mq))
            elif n2 < max_nodes and q2 <= max_nodes - n2:
                # q2 more nodes are already owed; prune when they cannot fit
                rec(q2, n2, a2)
            seq.pop()

    rec(1, 0, 0.0 if use_logs else 1.0)
    return EnumeratedEnsemble(law=d, max_nodes=max_nodes, trees=trees)


def enumerate_by_height(
    d: OffspringDistribution,
    max_height: int,
    work_budget: int = _WORK_BUDGET,
) -> EnumeratedEnsemble:
    """All trees with ht <= max_height (complete, any size).

    Nodes at depth max_height are forced to be leaves, which requires
    mu(0) > 0; the ensemble then carries the exact mass P(ht <= max_height).
    """
    if d.family_tag != "finite-support":
        raise ValueError("enumeration needs a finite-support law")
    if d.p0 <= 0.0:
        raise ValueError("mu(0) = 0: no finite trees")
    atoms = list(d.params)
    trees: List[EnumeratedTree] = []
    work = 0
    seq: List[int] = []

    def rec(cur: int, nxt: int, depth: int, acc: float):
        # cur nodes of this depth still unexplored, nxt queued at depth+1
        nonlocal work
        work += 1
        if work > work_budget:
            raise RuntimeError("enumeration work budget exceeded")
        if cur == 0:
            if nxt == 0:
                size, ht, wid, mq = _tree_stats(seq)
                trees.append(EnumeratedTree(tuple(seq), acc, size, ht, wid, mq))
                return
            rec(nxt, 0, depth + 1, acc)
            return
        for c, p in atoms:
            if depth == max_height and c != 0:
                continue
            seq.append(c)
            rec(cur - 1, nxt + c, depth, acc * p)
            seq.pop()

    rec(1, 0, 0, 1.0)
    return EnumeratedEnsemble(law=d, max_nodes=-1, trees=trees)


# ---------------------------------------------------------------------------
# cycle-lemma size law


def size_pmf_upto(d: OffspringDistribution, nmax: int) -> np.ndarray:
    """P(|T| = n) for n = 0..nmax (index 0 unused) by exact convolution.

    P(|T| = n) = P(X_1 + .. + X_n = -1)/n with steps nu(i) = mu(i+1).
    Partial sums above nmax can never return to -1 within the horizon and
    are pruned, which is exact; the returned values carry only
    float64/FFT rounding (~1e-15 absolute).
    """
    if nmax < 1:
        raise ValueError("nmax must be >= 1")
    if nmax > 10**5:
        raise ValueError("nmax beyond supported range")
    width = 2 * nmax + 1           # sums in [-nmax, nmax], slot s + nmax
    kwidth = nmax                  # steps in [-1, nmax - 2], slot j + 1
    j = np.arange(-1, nmax - 1)
    kern = np.asarray(d.pmf(j + 1), dtype=np.float64)
    fftlen = 1
    while fftlen < width + kwidth:
        fftlen *= 2
    fk = rfft(kern, fftlen)
    cur = np.zeros(width)
    cur[nmax] = 1.0
    out = np.zeros(nmax + 1)
    for k in range(1, nmax + 1):
        conv = irfft(rfft(cur, fftlen) * fk, fftlen)
        # kernel slot j+1 shifts sums by +1 slot; undo it
        cur = conv[1 : width + 1].copy()
        cur[cur < 0.0] = 0.0
        out[k] = cur[nmax - 1] / k   # mass at sum = -1
    return out


def size_pmf(d: OffspringDistribution, n: int) -> float:
    """P(|T| = n) by the cycle lemma (exact convolution)."""
    return float(size_pmf_upto(d, n)[n])


def height_cdf(d: OffspringDistribution, n: int) -> float:
    """P(ht(T) < n) = q_n with q_0 = 0, q_{k+1} = f(q_k)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    q = 0.0
    for _ in range(n):
        q = d.pgf(q)
    return q


def example_Eh_exact(d: OffspringDistribution, h: int, k: int,
                     work_budget: int = _WORK_BUDGET) -> float:
    """Exact P(E_h(k)) by enumeration filter.

    E_h(k): ht(T) = h, exactly h nodes have k children, all other nodes
    are leaves (so |T| = hk + 1).
    """
    if h < 1 or k < 1:
        raise ValueError("need h >= 1 and k >= 1")
    ens = enumerate_trees(d, h * k + 1, work_budget=work_budget)
    total = 0.0
    for t in ens.trees:
        if t.height != h or t.size != h * k + 1:
            continue
        internal = [c for c in t.child_counts if c != 0]
        if len(internal) == h and all(c == k for c in internal):
            total += t.prob
    return total
