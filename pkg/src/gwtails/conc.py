"""Concentration function, Kesten-type bound checks, and scale-exit medians.

Q(Z, L) = sup_x P(Z in [x, x+L)) is evaluated exactly for lattice laws
(sliding window over atoms) and empirically for samples.  The law of the
n-step sum S_n is produced by windowed exponentiation-by-squaring of the
step law; mass that leaves the window is accumulated in an "escaped"
bucket, so the window atoms are lower bounds and window value + escaped
is an upper bound for any probability.

n_ell is the smallest t at which the worst-case probability of still
being inside the scale-ell window [2^(ell-1), 2^(ell+2)) after t steps
drops to 1/2:

    n_ell = min{ t : sup_x P_x(tau >= t) <= 1/2 }.

Three estimators: exact survival-vector iteration (any law; cost is one
windowed convolution per step), an exact spectral evaluation for the
fair +/-1 walk (DST diagonalization of the absorbing tridiagonal
operator, bisected over t), and Monte Carlo with an upper-confidence
envelope over a subgrid of starting points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.fft import dst, irfft, rfft

from .offspring import OffspringDistribution, step_distribution
from .scales import scale_window
from .walk import run_walks

__all__ = [
    "LatticeLaw",
    "concentration_Q",
    "convolve_steps",
    "kesten_check",
    "KestenReport",
    "estimate_n_ell",
    "ScaleExitTable",
    "build_scale_exit_table",
    "BoundBudget",
    "budget",
    "wilson_upper",
]

_MAX_SPECTRAL_ELL = 30  # 4^ell must stay exactly representable
# comparison guard against float rounding at the survival = 1/2 crossing
# (exact crossings are dyadic, e.g. the +/-1 walk at scale 0)
_HALF_EPS = 1e-12


@dataclass
class LatticeLaw:
    """Masses on consecutive integers [offset, offset + len) plus escaped mass."""

    offset: int
    masses: np.ndarray
    escaped: float = 0.0

    @property
    def total(self) -> float:
        return float(self.masses.sum())

    def check_mass(self, tol: float = 1e-12) -> bool:
        return abs(self.total + self.escaped - 1.0) <= tol


def concentration_Q(law, L: float) -> float:
    """sup_x P(Z in [x, x+L)).

    For a LatticeLaw this is the exact sliding-window maximum over the
    stored atoms (escaped mass not included -- add law.escaped for a
    conservative upper bound).  For a 1-d sample array it is the
    empirical sliding-window maximum.
    """
    if L <= 0:
        raise ValueError("L must be positive")
    if isinstance(law, LatticeLaw):
        w = int(math.ceil(L))
        m = law.masses
        if len(m) == 0:
            raise ValueError("empty lattice law")
        if w >= len(m):
            return float(m.sum())
        c = np.concatenate([[0.0], np.cumsum(m)])
        return float(np.max(c[w:] - c[:-w]))
    x = np.sort(np.asarray(law, dtype=np.float64))
    if len(x) == 0:
        raise ValueError("empty sample")
    hi = np.searchsorted(x, x + L, side="left")
    return float(np.max(hi - np.arange(len(x))) / len(x))


def convolve_steps(
    d: OffspringDistribution,
    n: int,
    window: Optional[tuple] = None,
    mass_tol: float = 1e-12,
) -> LatticeLaw:
    """Law of S_n = X_1 + .. + X_n (steps nu(i) = mu(i+1)), windowed.

    Exponentiation by squaring with truncation to the window at every
    stage; the escaped bucket upper-bounds everything lost.  Without an
    explicit window, the upper edge doubles until the escaped mass is
    below mass_tol or the width cap (1e6) is reached.
    """
    if n < 1 or n > 10**4:
        raise ValueError("n out of supported range [1, 1e4]")
    if window is not None:
        lo, hi = window
        if hi - lo > 10**6:
            raise ValueError("window width beyond supported range (1e6)")
        return _convolve_window(d, n, lo, hi)
    hi = 4 * n
    while True:
        law = _convolve_window(d, n, -n, hi)
        if law.escaped <= mass_tol or hi >= 10**6 - n:
            return law
        hi = min(hi * 4, 10**6 - n)


def _step_pmf_window(d, lo, hi):
    vals = np.arange(lo, hi, dtype=np.int64)
    return np.asarray(d.pmf(vals + 1), dtype=np.float64)


def _convolve_window(d, n, lo, hi):
    width = hi - lo + 1
    fftlen = 1
    while fftlen < 2 * width:
        fftlen *= 2
    base = np.zeros(width)
    bmax = min(hi, 10**6)
    base[: bmax - lo + 1] = _step_pmf_window(d, lo, bmax + 1)
    # indices: slot i holds value lo + i
    result = None
    r_off = 0
    cur, c_off = base, lo
    bits = n
    while bits:
        if bits & 1:
            if result is None:
                result, r_off = cur.copy(), c_off
            else:
                conv = irfft(rfft(result, fftlen) * rfft(cur, fftlen), fftlen)
                off = r_off + c_off
                result, r_off = _clip(conv, off, lo, hi)
        bits >>= 1
        if bits:
            conv = irfft(rfft(cur, fftlen) * rfft(cur, fftlen), fftlen)
            cur, c_off = _clip(conv, 2 * c_off, lo, hi)
    result[result < 0] = 0.0
    return LatticeLaw(offset=r_off, masses=result,
                      escaped=max(0.0, 1.0 - float(result.sum())))


def _clip(conv, off, lo, hi):
    i0 = max(0, lo - off)
    i1 = min(len(conv), hi - off + 1)
    out = conv[i0:i1].copy()
    out[out < 0] = 0.0
    return out, off + i0


# ---------------------------------------------------------------------------
# Kesten-type concentration bound checks


@dataclass
class KestenReport:
    """Exact Q(S_n, L) against the two concentration bounds and the dispersal form.

    For each bound the fitted constant is max_n Q * denominator / L; the
    theorem asserts such a constant exists, the fit reports its size.
    """

    law_label: str
    L: float
    n_grid: List[int]
    q_values: List[float]          # window Q + escaped (conservative)
    escaped: List[float]
    c_pair: List[float]            # per-n fitted constant, bound 1
    c_selfint: List[float]         # per-n fitted constant, bound 2
    c_disperse: List[float]        # per-n fitted constant, dispersal corollary
    trunc_error: float             # truncation error bound on E[(X1-X2)^2 1]

    @property
    def c_hat(self) -> float:
        return max(max(self.c_pair), max(self.c_selfint))


def _pair_second_moment(d: OffspringDistribution, L: float, imax: int = 1 << 20):
    """E[(X1-X2)^2 1{|X1-X2| <= L}] exactly, plus a truncation error bound."""
    nu = step_distribution(d)
    deltas = np.arange(-int(L), int(L) + 1)
    i = np.arange(-1, imax, dtype=np.int64)
    pmf_i = np.asarray(nu.pmf(i), dtype=np.float64)
    total = 0.0
    for delta in deltas:
        shifted = np.asarray(nu.pmf(i - delta), dtype=np.float64)
        total += float(delta) ** 2 * float(pmf_i @ shifted)
    err = float(L) ** 2 * 2.0 * float(nu.tail(imax - int(L)))
    return total, err


def _trunc_second_moment(d: OffspringDistribution, hi: int):
    """E[X^2 1{X in [0, hi)}] of the step law, exact partial sum."""
    nu = step_distribution(d)
    x = np.arange(0, hi, dtype=np.int64)
    return float(np.sum(x.astype(float) ** 2 * np.asarray(nu.pmf(x))))


def kesten_check(d: OffspringDistribution, n_grid: Sequence[int], L: float) -> KestenReport:
    """Exact Q(S_n, L) against both concentration bounds on an n-grid.

    Bound 1: Q <= C L / sqrt(n E[(X1-X2)^2 1{|X1-X2|<=L}])
    Bound 2: Q <= C L / (sqrt(n) sqrt(1 - Q(X, 1/2)))
    Dispersal (L = 2^m): Q <= C L / sqrt(n P(X=-1) E[X^2 1{X in [0, L)}])
    """
    nu = step_distribution(d)
    t2, terr = _pair_second_moment(d, L)
    q_half = float(max(np.asarray(nu.pmf(np.arange(-1, 1 << 20)))))
    m = math.log2(L)
    use_disp = abs(m - round(m)) < 1e-12 and L >= 1
    t_disp = _trunc_second_moment(d, int(L)) if use_disp else float("nan")
    qs, escs, c1, c2, c3 = [], [], [], [], []
    for n in n_grid:
        law = convolve_steps(d, n)
        q = concentration_Q(law, L) + law.escaped
        qs.append(q)
        escs.append(law.escaped)
        c1.append(q * math.sqrt(n * t2) / L)
        c2.append(q * math.sqrt(n) * math.sqrt(1.0 - q_half) / L)
        if use_disp and t_disp > 0:
            c3.append(q * math.sqrt(n * nu.p_minus1 * t_disp) / L)
        else:
            c3.append(float("nan"))
    return KestenReport(
        law_label=d.label(), L=L, n_grid=list(n_grid), q_values=qs,
        escaped=escs, c_pair=c1, c_selfint=c2, c_disperse=c3, trunc_error=terr,
    )


# ---------------------------------------------------------------------------
# scale-exit medians n_ell


@dataclass
class ScaleExitEntry:
    ell: int
    n_ell: int
    method: str                     # "dp", "dp-spectral", "mc"
    curve_t: List[int] = field(default_factory=list)
    curve_sup: List[float] = field(default_factory=list)


@dataclass
class ScaleExitTable:
    law_label: str
    entries: Dict[int, ScaleExitEntry] = field(default_factory=dict)

    def n_ell(self, ell: int) -> int:
        return self.entries[ell].n_ell

    def scale_constant(self, alpha: float) -> float:
        """M = sup_ell n_ell / 2^(alpha*ell) over the computed scales."""
        return max(e.n_ell / 2.0 ** (alpha * e.ell) for e in self.entries.values())

    @property
    def ells(self) -> List[int]:
        return sorted(self.entries)


def _is_fair_sign_walk(d: OffspringDistribution) -> bool:
    return d.family_tag == "finite-support" and d.params == ((0, 0.5), (2, 0.5))


def _survival_kernel(d: OffspringDistribution, width: int):
    """Step pmf nu(j) for j = -1 .. width-1 (within-window transitions)."""
    j = np.arange(-1, width, dtype=np.int64)
    k = np.asarray(d.pmf(j + 1), dtype=np.float64)
    nz = np.nonzero(k > 0.0)[0]
    end = nz[-1] + 1 if len(nz) else 1
    return k[: max(end, 2)]  # >= 2 slots so the convolution slice is valid


def _dp_survival_iterate(d, ell, *, t_values=None, max_steps=20_000_000):
    """Survival vectors u_{t+1} = A u_t; returns (n_ell, curve dict).

    u_t[x] = P_x(tau >= t); iterates until the crossing sup <= 1/2 is
    found and every requested t in t_values has been recorded.
    """
    lo, hi = scale_window(ell)
    width = hi - lo
    kern = _survival_kernel(d, width)
    klen = len(kern)
    rev = kern[::-1].copy()
    use_fft = width * klen > (1 << 17)
    if use_fft:
        fftlen = 1
        while fftlen < width + klen:
            fftlen *= 2
        fk = rfft(rev, fftlen)
    u = np.ones(width)
    t = 1
    targets = set(t_values) if t_values else set()
    t_end = max(targets) if targets else 0
    curve = {1: 1.0}
    n_ell = None
    while n_ell is None or t < t_end:
        if use_fft:
            conv = irfft(rfft(u, fftlen) * fk, fftlen)
        else:
            conv = np.convolve(u, rev)
        # u'[x] = sum_j kern[j+1] u[x+j]; full conv index = x + klen - 2
        u = conv[klen - 2 : klen - 2 + width].copy()
        u[u < 0] = 0.0
        t += 1
        sup = float(u.max())
        if t in targets:
            curve[t] = sup
        if n_ell is None and sup <= 0.5 + _HALF_EPS:
            n_ell = t
            curve.setdefault(t, sup)
        if t > max_steps:
            raise RuntimeError(
                f"scale-exit DP for ell={ell} exceeded {max_steps} steps"
            )
    return n_ell, curve


def _dp_spectral_n_ell(ell: int):
    """Exact n_ell for the fair +/-1 walk via DST diagonalization."""
    lo, hi = scale_window(ell)
    nstates = hi - lo
    j = np.arange(1, nstates + 1)
    lam = np.cos(np.pi * j / (nstates + 1))
    v = dst(np.ones(nstates), type=1, norm="ortho")

    def sup_at(t: int) -> float:
        # u_t = Q diag(lam^t) Q 1 with Q the orthonormal DST-I
        if t <= 1:
            return 1.0
        w = np.sign(lam) ** (t - 1) * np.abs(lam) ** (t - 1) * v
        return float(dst(w, type=1, norm="ortho").max())

    t_hi = 1
    while sup_at(t_hi) > 0.5 + _HALF_EPS:
        t_hi *= 2
    t_lo = t_hi // 2
    while t_hi - t_lo > 1:
        mid = (t_lo + t_hi) // 2
        if sup_at(mid) > 0.5 + _HALF_EPS:
            t_lo = mid
        else:
            t_hi = mid
    return t_hi, sup_at


def wilson_upper(hits: int, trials: int, z: float = 1.959964) -> float:
    p = hits / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return center + half


def _mc_n_ell(d, ell, seed, trials_per_start=100_000, n_starts=64):
    """Upper-confidence-envelope estimate of n_ell from simulated exits."""
    lo, hi = scale_window(ell)
    if hi - lo <= n_starts:
        starts = list(range(lo, hi))
    else:
        grid = np.unique(np.linspace(lo, hi - 1, n_starts).astype(np.int64))
        starts = list(grid)
    taus = []
    for i, x in enumerate(starts):
        b = run_walks(
            d, trials_per_start, seed, trial_offset=i * trials_per_start,
            start=int(x), absorb_low=lo, absorb_high=hi,
            step_cap=10**7, want_h=False, want_max=False,
        )
        taus.append(b.sigma)
    # geometric t-grid; envelope sup over starts of the Wilson upper CI
    tmax = max(int(t.max()) for t in taus)
    grid_t = sorted(set(
        int(math.ceil(2.0 ** (k / 8.0))) for k in range(0, int(math.log2(max(tmax, 2)) * 8) + 9)
    ))
    curve = {}
    n_ell = None
    for t in grid_t:
        sup_u = 0.0
        for tau in taus:
            hits = int(np.sum(tau >= t))
            sup_u = max(sup_u, wilson_upper(hits, len(tau)))
        curve[t] = sup_u
        if n_ell is None and sup_u <= 0.5 + _HALF_EPS:
            n_ell = t
    return n_ell, curve


def estimate_n_ell(
    d: OffspringDistribution,
    ell: int,
    method: str = "auto",
    seed: int = 271828,
    max_steps: int = 20_000_000,
) -> ScaleExitEntry:
    """Scale-exit median n_ell for the walk of law d at scale ell.

    method: "dp" (exact survival iteration), "dp-spectral" (exact, fair
    +/-1 walks only), "mc" (confidence-envelope Monte Carlo), or "auto"
    (spectral when available, else dp).
    """
    if d.p1 >= 1.0 - 1e-15 or d.mean > 1.0 + 1e-12:
        raise ValueError("n_ell requires a (sub)critical law with mu(0) > 0")
    if ell < 0 or ell > _MAX_SPECTRAL_ELL:
        raise ValueError("ell out of the tested range [0, 30]")
    if method == "auto":
        method = "dp-spectral" if _is_fair_sign_walk(d) else "dp"
    if method == "dp-spectral":
        if not _is_fair_sign_walk(d):
            raise ValueError("spectral method applies to the fair +/-1 walk only")
        n, sup_at = _dp_spectral_n_ell(ell)
        curve_t = [max(1, n // 4), max(1, n // 2), n, 2 * n, 4 * n]
        return ScaleExitEntry(
            ell=ell, n_ell=n, method="dp-spectral",
            curve_t=curve_t, curve_sup=[sup_at(t) for t in curve_t],
        )
    if method == "dp":
        n, curve = _dp_survival_iterate(d, ell, max_steps=max_steps)
        ts = sorted(curve)
        return ScaleExitEntry(ell=ell, n_ell=n, method="dp",
                              curve_t=ts, curve_sup=[curve[t] for t in ts])
    if method == "mc":
        n, curve = _mc_n_ell(d, ell, seed)
        ts = sorted(curve)
        return ScaleExitEntry(ell=ell, n_ell=n, method="mc",
                              curve_t=ts, curve_sup=[curve[t] for t in ts])
    raise ValueError(f"unknown method {method!r}")


def build_scale_exit_table(
    d: OffspringDistribution,
    ells: Sequence[int],
    method: str = "auto",
    seed: int = 271828,
) -> ScaleExitTable:
    table = ScaleExitTable(law_label=d.label())
    for ell in ells:
        table.entries[ell] = estimate_n_ell(d, ell, method=method, seed=seed)
    return table


# ---------------------------------------------------------------------------
# budget of the generic harmonic-mass bound


@dataclass
class BoundBudget:
    m: int
    b: List[float]
    V: float                        # 36 sum b_l n_l / 2^l
    Delta: float                    # 4 sum 2^(-l-b_l)


def budget(b: Sequence[float], table: ScaleExitTable, m: Optional[int] = None) -> BoundBudget:
    """Evaluate V(b) = 36 sum b_l n_l/2^l and Delta(b) = 4 sum 2^(-l-b_l)."""
    b = list(b)
    if m is None:
        m = len(b) - 1
    if len(b) != m + 1:
        raise ValueError("need one b_l per scale 0..m")
    if any(x <= 0 for x in b):
        raise ValueError("b_l must be positive")
    missing = [l for l in range(m + 1) if l not in table.entries]
    if missing:
        raise ValueError(f"table lacks n_ell for scales {missing}")
    V = 36.0 * math.fsum(b[l] * table.n_ell(l) / 2.0**l for l in range(m + 1))
    Delta = 4.0 * math.fsum(2.0 ** (-l - b[l]) for l in range(m + 1))
    return BoundBudget(m=m, b=b, V=V, Delta=Delta)
