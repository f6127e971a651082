"""Queue-length walk simulation.

The walk starts at S_0 (1 unless stated otherwise), takes iid steps with
law nu(i) = mu(i+1), and is absorbed on its first visit to 0 at time
sigma.  By the breadth-first queue equivalence this path has the law of
the queue-length sequence of a GW(mu) tree explored breadth-first, so the
same engine also produces tree statistics (size sigma, height and width
via the level-boundary recursion b_{k+1} = b_k + S_{b_k}).

Everything here is driven by the counter-based streams of gwtails.rng:
trial i of an experiment with seed s reads stream (s, i) and nothing
else, so results are reproducible independently of batch sizes and
thread counts.

Per-law draw protocols (bit-exact, see README):

* dyadic finite laws (all masses k/2^m, m <= 16): each variate reads m
  bits (LSB-first within the stream's 64-bit words) and inverts the CDF
  on the m-bit integer.
* all other laws: each variate reads one 64-bit word, maps it to the
  53-bit uniform u = (w >> 11) * 2^-53, and inverts the CDF at u
  (binary search in a precomputed table; power-tail laws fall back to
  the exact Hurwitz-zeta tail beyond the table).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import zeta

from .offspring import OffspringDistribution, StepDistribution
from .rng import Streams

__all__ = [
    "WalkPath",
    "WalkBatch",
    "simulate",
    "harmonic",
    "ratio_statistics",
    "run_walks",
    "make_step_sampler",
    "DEFAULT_STEP_CAP",
]

DEFAULT_STEP_CAP = 10**8

# elementwise budget per simulation round (block_len * active_trials)
_BLOCK_BUDGET = 1 << 23
_MAX_BLOCK = 1 << 16
_I64_MIN = np.iinfo(np.int64).min
_I64_MAX = np.iinfo(np.int64).max


# ---------------------------------------------------------------------------
# step samplers


class _DyadicBitsSampler:
    """Finite law with masses k/2^m sampled from m bits per draw."""

    def __init__(self, cutoffs: np.ndarray, values: np.ndarray, m: int):
        self.cutoffs = cutoffs.astype(np.int64)   # cumulative counts out of 2^m
        self.values = values
        self.m = m
        self.step_dtype = values.dtype

    def draw(self, streams: Streams, t: np.ndarray, k: int) -> np.ndarray:
        bits = streams.bits(t * self.m, k * self.m)
        u = np.zeros((len(t), k), dtype=np.int64)
        for j in range(self.m):
            u += bits[:, j::self.m].astype(np.int64) << j
        idx = np.searchsorted(self.cutoffs, u, side="right")
        return self.values[idx]


class _SignBitSampler:
    """+/-1 steps (critical binary), one bit per draw."""

    step_dtype = np.dtype(np.int8)

    def draw(self, streams: Streams, t: np.ndarray, k: int) -> np.ndarray:
        bits = streams.bits(t, k)
        return (bits.astype(np.int8) << 1) - np.int8(1)


class _TableSampler:
    """Inversion of a CDF table at the 53-bit uniform; one word per draw."""

    def __init__(self, cdf: np.ndarray, values: np.ndarray):
        self.cdf = np.asarray(cdf, dtype=np.float64).copy()
        # a cumsum can land just under 1 - 2^-53; pin the top so the
        # largest uniform cannot index past the table
        self.cdf[-1] = 1.0
        self.values = values
        self.step_dtype = values.dtype

    def draw(self, streams: Streams, t: np.ndarray, k: int) -> np.ndarray:
        u = streams.doubles(t.astype(np.uint64), k)
        idx = np.searchsorted(self.cdf, u, side="right")
        return self.values[idx]


class _PowerTailSampler:
    """Power-tail inversion: head table plus exact zeta-tail binary search."""

    step_dtype = np.dtype(np.int64)

    def __init__(self, alpha: float, c: float, head: int = 1 << 20):
        self.alpha, self.c = alpha, c
        i = np.arange(1, head + 1, dtype=np.float64)
        # cdf[j] = P(child <= j) = 1 - tail(j+1), child value j corresponds
        # to step j-1; index 0 is the atom at child 0.
        tail = c * zeta(alpha + 1.0, i + 1.0)
        self.cdf = np.concatenate([[1.0 - c * float(zeta(alpha + 1.0, 1))],
                                   1.0 - tail])
        self.head = head

    def _invert_tail(self, u: float) -> int:
        # smallest child i with 1 - c*zeta(alpha+1, i+1) >= u
        lo, hi = self.head, self.head
        while 1.0 - self.c * float(zeta(self.alpha + 1.0, hi + 1.0)) < u:
            hi *= 2
            if hi > 1 << 62:  # pragma: no cover - u < 1 guarantees termination
                break
        while lo < hi:
            mid = (lo + hi) // 2
            if 1.0 - self.c * float(zeta(self.alpha + 1.0, mid + 1.0)) >= u:
                hi = mid
            else:
                lo = mid + 1
        return lo

    def draw(self, streams: Streams, t: np.ndarray, k: int) -> np.ndarray:
        u = streams.doubles(t.astype(np.uint64), k)
        idx = np.searchsorted(self.cdf, u, side="right")
        out = idx.astype(np.int64) - 1  # step = child - 1
        esc = idx > self.head
        if np.any(esc):
            for r, cpos in zip(*np.nonzero(esc)):
                out[r, cpos] = self._invert_tail(u[r, cpos]) - 1
        return out


def _dyadic_decomposition(atoms, max_m: int = 16):
    """(cutoffs, values, m) when every mass is a multiple of 2^-m, else None."""
    for m in range(1, max_m + 1):
        scaled = [p * (1 << m) for _, p in atoms]
        if all(abs(s - round(s)) < 1e-9 and round(s) > 0 for s in scaled):
            counts = [int(round(s)) for s in scaled]
            if sum(counts) != 1 << m:
                continue
            cutoffs = np.cumsum(counts)
            values = np.array([i for i, _ in atoms], dtype=np.int64) - 1
            if values.max() <= 127 and values.min() >= -128:
                values = values.astype(np.int8)
            return cutoffs, values, m
    return None


def make_step_sampler(d: OffspringDistribution):
    """Sampler for the step law nu(i) = mu(i+1) of the given offspring law."""
    if d.family_tag == "finite-support":
        dy = _dyadic_decomposition(d.params)
        if dy is not None:
            cutoffs, values, m = dy
            if m == 1 and np.array_equal(values, np.array([-1, 1], dtype=np.int8)):
                return _SignBitSampler()
            return _DyadicBitsSampler(cutoffs, values, m)
        vals = np.array([i for i, _ in d.params], dtype=np.int64) - 1
        cdf = np.cumsum([p for _, p in d.params])
        return _TableSampler(cdf, vals)
    if d.family_tag == "geometric":
        (p,) = d.params
        # table to float64 depth: beyond it the CDF rounds to 1.0
        ks, cdf = [], []
        acc, k = 0.0, 0
        while acc < 1.0 and k < 100000:
            acc = 1.0 - (1.0 - p) ** (k + 1)
            ks.append(k)
            cdf.append(acc)
            k += 1
        return _TableSampler(np.array(cdf), np.array(ks, dtype=np.int64) - 1)
    if d.family_tag == "poisson":
        lam = d.params[0]
        ks, cdf = [], []
        acc, term, k = 0.0, math.exp(-lam), 0
        while acc < 1.0 and k < 100000:
            acc += term
            acc = min(acc, 1.0)
            ks.append(k)
            cdf.append(acc)
            k += 1
            term *= lam / k
        cdf[-1] = 1.0
        return _TableSampler(np.array(cdf), np.array(ks, dtype=np.int64) - 1)
    alpha, c = d.params
    return _PowerTailSampler(alpha, c)


# ---------------------------------------------------------------------------
# results


@dataclass
class WalkPath:
    """One realized walk: summary statistics plus the trajectory if retained."""

    start: int
    sigma: int                      # absorption time, or steps taken if censored
    max_s: int                      # max of S_t over t < sigma
    h_sigma: float                  # sum of 1/S_t over t < sigma
    censored: bool
    path: Optional[np.ndarray] = None   # S_0..S_sigma inclusive when retained

    @property
    def retained(self) -> bool:
        return self.path is not None


@dataclass
class WalkBatch:
    """Per-trial arrays from a batched run; fields are None unless tracked."""

    sigma: np.ndarray
    censored: np.ndarray
    max_s: np.ndarray
    h_sigma: Optional[np.ndarray] = None
    exit_above: Optional[np.ndarray] = None
    height: Optional[np.ndarray] = None
    width: Optional[np.ndarray] = None
    n_ell: Optional[np.ndarray] = None
    h_ell: Optional[np.ndarray] = None
    upcross: Optional[np.ndarray] = None
    paths: Optional[list] = None
    # per-trial x per-scale tables when track_scales_upto is set
    n_table: Optional[np.ndarray] = None
    h_table: Optional[np.ndarray] = None
    m_table: Optional[np.ndarray] = None

    @property
    def n_trials(self) -> int:
        return len(self.sigma)

    @property
    def censor_rate(self) -> float:
        return float(np.mean(self.censored))


# ---------------------------------------------------------------------------
# the batched engine


def _floor_log2(v: np.ndarray) -> np.ndarray:
    """Exact floor(log2(v)) for positive int64 v."""
    z = np.floor(np.log2(v.astype(np.float64))).astype(np.int64)
    # float rounding can misplace values adjacent to powers of two
    two_z = np.left_shift(np.int64(1), z)
    z = np.where(two_z > v, z - 1, z)
    z = np.where(np.left_shift(np.int64(1), z + 1) <= v, z + 1, z)
    return z


def run_walks(
    d: OffspringDistribution,
    n_trials: int,
    seed: int,
    *,
    start: int = 1,
    step_cap: int = DEFAULT_STEP_CAP,
    trial_offset: int = 0,
    absorb_low: int = 1,
    absorb_high: Optional[int] = None,
    want_h: bool = True,
    want_max: bool = True,
    track_levels: bool = False,
    scale_ell: Optional[int] = None,
    track_scales_upto: Optional[int] = None,
    upcross_interval: Optional[tuple] = None,
    keep_paths: bool = False,
    batch_trials: int = 8192,
) -> WalkBatch:
    """Simulate n_trials walks of GW-law d; trial i reads stream (seed, trial_offset+i).

    The walk lives while absorb_low <= S < absorb_high and is stopped at
    its first exit (the standard absorption at 0 is absorb_low=1,
    absorb_high=None) or after step_cap steps (censored).  Optional
    trackers: level boundaries (tree height/width; requires start=1 and
    standard absorption), occupation time and harmonic mass at one scale,
    and upcrossing counts of one interval.
    """
    if step_cap < 1:
        raise ValueError("step_cap must be >= 1")
    if track_levels and (start != 1 or absorb_high is not None):
        raise ValueError("level tracking is defined for standard walks from 1")
    sampler = make_step_sampler(d)

    out_sigma = np.zeros(n_trials, dtype=np.int64)
    out_cens = np.zeros(n_trials, dtype=bool)
    out_max = np.zeros(n_trials, dtype=np.int64) if want_max else None
    out_h = np.zeros(n_trials, dtype=np.float64) if want_h else None
    out_above = np.zeros(n_trials, dtype=bool) if absorb_high else None
    out_ht = np.zeros(n_trials, dtype=np.int64) if track_levels else None
    out_wid = np.zeros(n_trials, dtype=np.int64) if track_levels else None
    out_nell = np.zeros(n_trials, dtype=np.int64) if scale_ell is not None else None
    out_hell = np.zeros(n_trials, dtype=np.float64) if scale_ell is not None else None
    out_up = np.zeros(n_trials, dtype=np.int64) if upcross_interval else None
    out_paths = [None] * n_trials if keep_paths else None
    out_tabs = None
    if track_scales_upto is not None:
        w = track_scales_upto + 1
        out_tabs = (
            np.zeros((n_trials, w), dtype=np.int64),
            np.zeros((n_trials, w), dtype=np.float64),
            np.zeros((n_trials, w), dtype=np.int32),
        )

    for lo in range(0, n_trials, batch_trials):
        hi = min(lo + batch_trials, n_trials)
        _run_batch(
            d, sampler, seed, trial_offset + lo, np.arange(lo, hi),
            start, step_cap, absorb_low, absorb_high,
            out_sigma, out_cens, out_max, out_h, out_above,
            out_ht, out_wid, out_nell, out_hell, out_up, out_paths,
            scale_ell, track_scales_upto, out_tabs, upcross_interval,
        )

    return WalkBatch(
        sigma=out_sigma, censored=out_cens, max_s=out_max, h_sigma=out_h,
        exit_above=out_above, height=out_ht, width=out_wid,
        n_ell=out_nell, h_ell=out_hell, upcross=out_up, paths=out_paths,
        n_table=out_tabs[0] if out_tabs else None,
        h_table=out_tabs[1] if out_tabs else None,
        m_table=out_tabs[2] if out_tabs else None,
    )


def _run_batch(
    d, sampler, seed, trial0, slots, start, step_cap, alow, ahigh,
    out_sigma, out_cens, out_max, out_h, out_above,
    out_ht, out_wid, out_nell, out_hell, out_up, out_paths,
    scale_ell, scales_upto, out_tabs, upcross_interval,
):
    n = len(slots)
    streams = Streams(seed, trial0 + np.arange(n, dtype=np.uint64))
    S = np.full(n, start, dtype=np.int64)
    t = np.zeros(n, dtype=np.int64)
    h_acc = np.zeros(n, dtype=np.float64)
    max_acc = np.full(n, start, dtype=np.int64) if out_max is not None else None
    alive = np.ones(n, dtype=bool)
    # positions fit int32 when the largest reachable value is safely bounded
    max_step = getattr(sampler, "values", np.array([1])).max() if hasattr(
        sampler, "values") else 1
    if hasattr(sampler, "head"):
        max_step = None  # unbounded up-jumps: stay in int64
    pos_dtype = (
        np.int32
        if max_step is not None
        and start + (step_cap + 64) * max(int(max_step), 1) < 2**31 - 1
        and (ahigh is None or ahigh < 2**31 - 1)
        else np.int64
    )

    track_levels = out_ht is not None
    if track_levels:
        next_b = np.ones(n, dtype=np.int64)     # next level boundary index
        levels = np.ones(n, dtype=np.int64)     # level 0 always present
        wid = np.ones(n, dtype=np.int64)
    track_scales = scale_ell is not None or scales_upto is not None
    if track_scales:
        cur_l = np.full(n, _floor_log2(np.full(n, start))[0], dtype=np.int64)
        win_lo = np.maximum(1, np.left_shift(np.int64(1), np.maximum(cur_l - 1, 0)))
        win_lo = np.where(cur_l == 0, 1, win_lo)
        win_hi = np.left_shift(np.int64(1), cur_l + 2)
        n_ell = np.zeros(n, dtype=np.int64)
        h_ell = np.zeros(n, dtype=np.float64)
        if scales_upto is not None:
            np.add.at(out_tabs[2],
                      (slots, np.minimum(cur_l, scales_upto)), 1)
    if upcross_interval is not None:
        ux, uy = upcross_interval
        armed = np.full(n, start < ux, dtype=bool)
        ucount = np.zeros(n, dtype=np.int64)
    if out_paths is not None:
        pieces = [[np.array([start], dtype=np.int64)] for _ in range(n)]

    k = 64
    while True:
        idx = np.nonzero(alive)[0]
        if len(idx) == 0:
            break
        k = min(k, _MAX_BLOCK)
        k = max(64, min(k, (_BLOCK_BUDGET // max(len(idx), 1)) // 64 * 64))
        rem = step_cap - int(t[idx].min())
        k = min(k, max(64, ((rem + 63) // 64) * 64))

        steps = sampler.draw(streams_sub(streams, idx), t[idx], k)
        path = np.cumsum(steps, axis=1, dtype=pos_dtype)
        path += S[idx][:, None].astype(pos_dtype)

        dead = path < alow
        if ahigh is not None:
            dead |= path >= ahigh
        hit = dead.any(axis=1)
        first = np.argmax(dead, axis=1)
        lived = np.where(hit, first + 1, k)
        # per-trial censoring cut
        room = step_cap - t[idx]
        over = lived > room
        lived = np.minimum(lived, room)
        hit = hit & ~over

        rowsel = np.arange(len(idx))
        if out_h is not None or track_scales:
            with np.errstate(divide="ignore"):
                inv = 1.0 / path  # inf at the absorbed position, never gathered
            csum = np.cumsum(inv, axis=1)
            # values S_t for t in [t0, t0+lived) are S_cur then path[:lived-1]
            pre = 1.0 / S[idx]
            seg = np.where(
                lived > 1, csum[rowsel, np.maximum(lived - 2, 0)], 0.0
            )
            h_acc[idx] += np.where(lived > 0, pre + seg, 0.0)
        if max_acc is not None:
            runmax = np.maximum.accumulate(path, axis=1)
            segmax = np.where(
                lived > 1, runmax[rowsel, np.maximum(lived - 2, 0)], _I64_MIN
            )
            max_acc[idx] = np.maximum(max_acc[idx], np.maximum(S[idx], segmax))

        if track_levels:
            _advance_levels(idx, path, lived, t, next_b, levels, wid)
        if track_scales:
            _advance_scale(
                idx, path, csum, lived, t, S, cur_l, win_lo, win_hi,
                n_ell, h_ell, scale_ell, alow,
                slots, scales_upto, out_tabs,
            )
        if upcross_interval is not None:
            _advance_upcross(idx, path, lived, armed, ucount, ux, uy)
        if out_paths is not None:
            for r, row in enumerate(idx):
                pieces[row].append(path[r, : lived[r]].copy())

        last = path[np.arange(len(idx)), np.maximum(lived - 1, 0)]
        newS = np.where(lived > 0, last, S[idx])
        S[idx] = newS
        t[idx] += lived
        done = hit | (t[idx] >= step_cap)
        if ahigh is not None:
            out_above[slots[idx[hit]]] = path[hit, first[hit]] >= ahigh
        cens_rows = idx[(t[idx] >= step_cap) & ~hit]
        out_cens[slots[cens_rows]] = True
        alive[idx[done]] = False
        k *= 2

    out_sigma[slots] = t
    if out_max is not None:
        out_max[slots] = max_acc
    if out_h is not None:
        out_h[slots] = h_acc
    if track_levels:
        out_ht[slots] = levels - 1
        out_wid[slots] = wid
    if scale_ell is not None:
        out_nell[slots] = n_ell
        out_hell[slots] = h_ell
    if out_up is not None:
        out_up[slots] = ucount
    if out_paths is not None:
        for r in range(n):
            out_paths[slots[r]] = np.concatenate(pieces[r])


def streams_sub(streams: Streams, idx: np.ndarray) -> Streams:
    sub = Streams.__new__(Streams)
    sub.seed = streams.seed
    sub.trials = streams.trials[idx]
    return sub


def _advance_levels(idx, path, lived, t, next_b, levels, wid):
    """Consume level boundaries b_{k+1} = b_k + S_{b_k} that fall in this block."""
    t0 = t[idx]
    end = t0 + lived                      # last walk index covered by this block
    rows = np.arange(len(idx))
    pending = rows[(next_b[idx] <= end) & (lived > 0)]
    while len(pending):
        r = pending
        g = idx[r]
        bpos = next_b[g] - t0[r] - 1      # block-local index of S_{b}
        sb = path[r, bpos]
        grow = sb > 0
        gg, rr = g[grow], r[grow]
        levels[gg] += 1
        wid[gg] = np.maximum(wid[gg], sb[grow])
        next_b[gg] += sb[grow]
        next_b[g[~grow]] = _I64_MAX  # boundary hit sigma: done
        pending = r[grow][next_b[gg] <= end[rr]]


def _advance_scale(idx, path, csum, lived, t, S, cur_l, win_lo, win_hi,
                   n_ell, h_ell, ell, alow, slots, scales_upto, out_tabs):
    """Accumulate occupation time and harmonic mass per scale within a block.

    Candidate change-of-scale points are the steps where floor(log2 S)
    changes (window exits imply such a change); the scale automaton is
    advanced candidate-by-candidate in lockstep across trials.  With
    `ell` set, a single scale's N/H go to n_ell/h_ell; with `scales_upto`
    set, full per-scale tables (N, H, visit counts M) are accumulated
    (scales above the cap fold into the top row).
    """
    nrow = len(idx)
    rows = np.arange(nrow)
    live_mask = np.arange(path.shape[1])[None, :] < lived[:, None]
    z = np.zeros_like(path)
    pos = path > 0
    z[pos] = _floor_log2(path[pos])
    z[~pos] = -1
    prev_z = np.concatenate(
        [_floor_log2(np.maximum(S[idx], 1))[:, None], z[:, :-1]], axis=1
    )
    cand = (z != prev_z) & live_mask
    ncand = cand.sum(axis=1)
    cmax = int(ncand.max()) if nrow else 0
    if cmax:
        cpos = np.full((nrow, cmax), -1, dtype=np.int64)
        crow, ccol = np.nonzero(cand)
        starts = np.concatenate([[0], np.cumsum(ncand)[:-1]])
        rank = np.arange(len(crow)) - starts[crow]
        cpos[crow, rank] = ccol

    seg_start = np.zeros(nrow, dtype=np.int64)  # block-local segment start

    def _seg_h(rsel, lo, hi_excl):
        # sum of 1/S_t for local t in [lo, hi_excl); S at local t=0 is S[idx]
        top = np.where(hi_excl >= 2, csum[rsel, np.maximum(hi_excl - 2, 0)], 0.0)
        bot = np.where(lo >= 2, csum[rsel, np.maximum(lo - 2, 0)], 0.0)
        res = top - bot
        res += np.where(lo == 0, 1.0 / S[idx[rsel]], 0.0)
        return np.where(hi_excl > lo, res, 0.0)

    def _close_segments(sel, seg_end):
        """Book the segments [seg_start, seg_end) at each row's current scale."""
        if not len(sel):
            return
        lens = seg_end - seg_start[sel]
        keep = lens > 0
        sel, lens = sel[keep], lens[keep]
        if not len(sel):
            return
        hvals = _seg_h(sel, seg_start[sel], seg_start[sel] + lens)
        scl = cur_l[idx[sel]]
        if ell is not None:
            at = scl == ell
            if np.any(at):
                n_ell[idx[sel[at]]] += lens[at]
                h_ell[idx[sel[at]]] += hvals[at]
        if scales_upto is not None:
            col = np.minimum(scl, scales_upto)
            g = slots[idx[sel]]
            np.add.at(out_tabs[0], (g, col), lens)
            np.add.at(out_tabs[1], (g, col), hvals)

    for j in range(cmax):
        act = rows[(ncand > j)]
        if not len(act):
            break
        p = cpos[act, j]
        val = path[act, p]
        exited = (val < win_lo[idx[act]]) | (val >= win_hi[idx[act]]) | (val < alow)
        er = act[exited]
        if len(er):
            # the walk exits its window at local time p+1 (position val);
            # times [seg_start, p+1) belong to the old scale
            pe = p[exited] + 1
            _close_segments(er, pe)
            seg_start[er] = pe
            ve = val[exited]
            ok = ve >= alow
            newl = np.full(len(er), -(2**30), dtype=np.int64)
            newl[ok] = _floor_log2(ve[ok])
            cur_l[idx[er]] = newl
            win_lo[idx[er]] = np.where(
                newl <= 0, 1, np.left_shift(np.int64(1), np.maximum(newl - 1, 0))
            )
            win_hi[idx[er]] = np.where(
                ok, np.left_shift(np.int64(1), np.maximum(newl, 0) + 2), 0
            )
            if scales_upto is not None and np.any(ok):
                g = slots[idx[er[ok]]]
                np.add.at(out_tabs[2],
                          (g, np.minimum(newl[ok], scales_upto)), 1)

    tail_rows = rows[(cur_l[idx] >= 0) & (lived > seg_start)]
    _close_segments(tail_rows, lived[tail_rows])


def _advance_upcross(idx, path, lived, armed, ucount, ux, uy):
    """Count completed upcrossings of [ux, uy) within the block, vectorized.

    An upcrossing completes at the first visit to [uy, inf) after a visit
    to (-inf, ux); `armed` carries the between-block state.
    """
    k = path.shape[1]
    live = np.arange(k)[None, :] < lived[:, None]
    a = (path < ux) & live
    b = (path >= uy) & live
    ev = np.where(a, 1, 0) + np.where(b, 2, 0)
    # most recent event strictly before each position (0 = none yet)
    evpos = np.where(ev > 0, np.arange(k)[None, :], -1)
    lastpos = np.maximum.accumulate(evpos, axis=1)
    prevpos = np.concatenate(
        [np.full((len(lived), 1), -1, dtype=np.int64), lastpos[:, :-1]], axis=1
    )
    rowix = np.arange(len(lived))[:, None]
    prev_ev = np.where(
        prevpos >= 0, ev[rowix, np.maximum(prevpos, 0)], np.where(armed[idx][:, None], 1, 0)
    )
    completed = b & (prev_ev == 1)
    ucount[idx] += completed.sum(axis=1)
    # new armed state: last event in block is A, or no event and carry
    final = lastpos[:, -1]
    fin_ev = np.where(final >= 0, ev[np.arange(len(lived)), np.maximum(final, 0)], 0)
    armed[idx] = np.where(final >= 0, fin_ev == 1, armed[idx])


# ---------------------------------------------------------------------------
# single-path API


def _as_offspring(law) -> OffspringDistribution:
    if isinstance(law, StepDistribution):
        return law.offspring
    return law


def simulate(
    nu,
    seed: int,
    trial: int,
    step_cap: int = DEFAULT_STEP_CAP,
    retain: str = "summary",
) -> WalkPath:
    """Run one walk from 1 to absorption (or step_cap), per stream (seed, trial).

    nu is a StepDistribution (or the offspring law itself).  The source
    law must have mu(0) > 0, else sigma = inf almost surely.
    """
    d = _as_offspring(nu)
    if d.p0 <= 0.0:
        raise ValueError("mu(0) = 0: the walk never hits zero")
    if retain not in ("summary", "full"):
        raise ValueError("retain must be 'summary' or 'full'")
    batch = run_walks(
        d, 1, seed, trial_offset=trial, step_cap=step_cap,
        keep_paths=(retain == "full"),
    )
    path = batch.paths[0] if retain == "full" else None
    return WalkPath(
        start=1,
        sigma=int(batch.sigma[0]),
        max_s=int(batch.max_s[0]),
        h_sigma=float(batch.h_sigma[0]),
        censored=bool(batch.censored[0]),
        path=path,
    )


def harmonic(path: WalkPath, t: int) -> float:
    """Prefix harmonic sum H(t) = sum_{i<t} 1/S_i (needs full retention)."""
    if path.path is None:
        raise ValueError("harmonic(t) requires retain='full'")
    if t < 0 or t > len(path.path) - 1:
        raise ValueError("t out of range")
    return float(math.fsum(1.0 / s for s in path.path[:t]))


def ratio_statistics(path: WalkPath, alpha: Optional[float] = None):
    """(H/sigma^(1/2), H/sigma^((alpha-1)/alpha) or None, sigma, max_s)."""
    if path.censored:
        raise ValueError("ratio statistics are undefined for censored paths")
    root = path.h_sigma / math.sqrt(path.sigma)
    stable = None
    if alpha is not None:
        stable = path.h_sigma / path.sigma ** ((alpha - 1.0) / alpha)
    return root, stable, path.sigma, path.max_s
