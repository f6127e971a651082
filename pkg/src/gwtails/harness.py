"""Experiment orchestration: seeded Monte Carlo, tail estimation, verdicts.

A theorem target names an event family indexed by a grid variable x, a
per-x bound, and (usually) one free multiplicative constant C.  The
harness simulates once, turns each trial into a scalar ratio, counts
hits r >= C*x per grid point, scores them with Wilson intervals, and
fits the least C on a 2^(1/8) grid whose upper confidence limits sit
under the bound at every x.  Verdicts are conservative: a point passes
only if the UPPER Wilson limit clears the bound.

Everything is a pure function of (config, seed): trials are chunked on
fixed boundaries, each chunk reads only its own counter-based streams,
and chunk results are merged in index order, so thread count cannot
change any output byte.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import conc, treegen, walk
from .offspring import (
    OffspringDistribution,
    classify,
    distribution_from_spec,
    distribution_to_spec,
    dual,
    step_distribution,
)

__all__ = [
    "WILSON_Z",
    "estimate_tail",
    "wilson_interval",
    "ExperimentConfig",
    "TailRow",
    "TailReport",
    "run_theorem",
    "fit_constant",
    "emit",
    "report_from_json",
    "THEOREM_TARGETS",
    "thread_count",
]

WILSON_Z = 1.959964
SCHEMA = "gwtails/1"

# fitted-constant search grid: 2^(k/8) for k in [-64, 80]
_C_GRID = [2.0 ** (k / 8.0) for k in range(-64, 81)]

THEOREM_TARGETS = (
    "general-width",
    "general-volume",
    "fixed-var",
    "stable",
    "inf-var",
    "hvol-finvar",
    "var-precise",
    "stable-attempt",
    "nl-bd",
    "upcrossing",
    "interval",
    "generic-budget",
)

_CHUNK = 1 << 16


def thread_count() -> int:
    env = os.environ.get("GWTAILS_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return 1


def wilson_interval(hits: int, trials: int, z: float = WILSON_Z):
    """(p_hat, lower, upper) Wilson score interval at confidence z."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= hits <= trials:
        raise ValueError("need 0 <= hits <= trials")
    p = hits / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials**2)) / denom
    return p, max(0.0, center - half), min(1.0, center + half)


def estimate_tail(hits: int, trials: int):
    """(p_hat, (ci_lo, ci_hi)) -- Wilson 95% score interval."""
    p, lo, hi = wilson_interval(hits, trials)
    return p, (lo, hi)


# ---------------------------------------------------------------------------
# configuration and report types


@dataclass
class ExperimentConfig:
    distribution: dict                  # family spec, see README
    target: str                         # one of THEOREM_TARGETS
    trials: int = 10**6
    seed: int = 271828
    x_grid: Sequence[float] = (1.0, 1.5, 2.0, 2.5, 3.0)
    step_cap: Optional[int] = None      # default chosen per target
    node_cap: Optional[int] = None
    alpha: Optional[float] = None       # stable targets
    eps: Optional[float] = None         # inf-var epsilon
    size_threshold: Optional[int] = None    # s in joint events {.., sigma >= s}
    ell: Optional[int] = None           # nl-bd scale
    b_grid: Sequence[float] = (18.0, 36.0, 54.0)
    upcross_x: int = 4
    upcross_y: int = 8
    upcross_start: int = 4
    k_grid: Sequence[int] = (1, 2, 3, 4)
    interval_azb: Optional[Sequence[int]] = None   # (a, z, b)
    budget_m: int = 6
    budget_b: Optional[Sequence[float]] = None
    nl_table_ells: Optional[Sequence[int]] = None

    def __post_init__(self):
        if self.target not in THEOREM_TARGETS:
            raise ValueError(f"unknown target {self.target!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        xs = list(self.x_grid)
        if any(b <= a for a, b in zip(xs, xs[1:])) or any(x <= 0 for x in xs):
            raise ValueError("x_grid must be positive and increasing")
        if self.target in ("stable", "stable-attempt") and self.alpha is None:
            raise ValueError(f"target {self.target} requires alpha")

    def law(self) -> OffspringDistribution:
        return distribution_from_spec(self.distribution)

    @classmethod
    def from_json(cls, payload: dict) -> "ExperimentConfig":
        payload = dict(payload)
        schema = payload.pop("schema", SCHEMA)
        if schema != SCHEMA:
            raise ValueError(f"unsupported config schema {schema!r}")
        return cls(**payload)


@dataclass
class TailRow:
    x: float
    trials: int
    hits: int
    p_hat: float
    ci_lo: float
    ci_hi: float
    bound: float
    verdict: bool


@dataclass
class TailReport:
    target: str
    law_label: str
    seed: int
    trials: int
    c_hat: Optional[float]             # fitted constant; None if target has none
    rows: List[TailRow]
    censor_rate: float
    notes: Dict[str, object] = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return all(r.verdict for r in self.rows)

    @property
    def first_passing_x(self) -> Optional[float]:
        """Smallest grid point whose verdict passes (a threshold report)."""
        for r in self.rows:
            if r.verdict:
                return r.x
        return None

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA,
            "target": self.target,
            "law_label": self.law_label,
            "seed": self.seed,
            "trials": self.trials,
            "c_hat": self.c_hat,
            "censor_rate": self.censor_rate,
            "notes": self.notes,
            "rows": [dataclasses.asdict(r) for r in self.rows],
        }


def report_from_json(payload: dict) -> TailReport:
    if payload.get("schema") != SCHEMA:
        raise ValueError("unsupported report schema")
    rows = [TailRow(**r) for r in payload["rows"]]
    return TailReport(
        target=payload["target"], law_label=payload["law_label"],
        seed=payload["seed"], trials=payload["trials"],
        c_hat=payload["c_hat"], rows=rows,
        censor_rate=payload["censor_rate"], notes=dict(payload.get("notes", {})),
    )


# ---------------------------------------------------------------------------
# simulation plumbing


def _chunk_ranges(n: int, chunk: int = _CHUNK):
    return [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]


def _parallel_batches(fn, n_trials: int):
    """Map fn(lo, hi) over fixed trial chunks, in order; thread-safe by design."""
    ranges = _chunk_ranges(n_trials)
    workers = thread_count()
    if workers <= 1 or len(ranges) <= 1:
        return [fn(lo, hi) for lo, hi in ranges]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futs = [pool.submit(fn, lo, hi) for lo, hi in ranges]
        return [f.result() for f in futs]


def collect_tree_stats(d, trials, seed, node_cap):
    """Concatenated (sigma, height, width, h_sigma, censored) over all trials."""
    def one(lo, hi):
        return treegen.sample_forest(d, hi - lo, seed, node_cap=node_cap,
                                     trial_offset=lo)
    parts = _parallel_batches(one, trials)
    return {
        "sigma": np.concatenate([p.sigma for p in parts]),
        "height": np.concatenate([p.height for p in parts]),
        "width": np.concatenate([p.width for p in parts]),
        "h_sigma": np.concatenate([p.h_sigma for p in parts]),
        "censored": np.concatenate([p.censored for p in parts]),
    }


def collect_walk_stats(d, trials, seed, step_cap, **kw):
    def one(lo, hi):
        return walk.run_walks(d, hi - lo, seed, step_cap=step_cap,
                              trial_offset=lo, want_max=False, **kw)
    parts = _parallel_batches(one, trials)
    out = {
        "sigma": np.concatenate([p.sigma for p in parts]),
        "censored": np.concatenate([p.censored for p in parts]),
    }
    for name in ("h_sigma", "n_ell", "h_ell", "upcross"):
        vals = [getattr(p, name) for p in parts]
        if vals[0] is not None:
            out[name] = np.concatenate(vals)
    return out


# ---------------------------------------------------------------------------
# fitting


def fit_constant(ratios: np.ndarray, x_grid, bound_fn, trials: int,
                 c_grid=_C_GRID) -> Optional[float]:
    """Least C on the grid with Wilson-upper(p_hat(Cx)) <= bound(x) for all x.

    ratios are the per-trial scalars of the event {ratio >= C*x}; returns
    None (reported as infinity) when no grid constant works.
    """
    srt = np.sort(ratios)
    for c in c_grid:
        ok = True
        for x in x_grid:
            hits = len(srt) - int(np.searchsorted(srt, c * x, side="left"))
            # zero observed hits passes trivially whatever the bound
            if hits and wilson_interval(hits, trials)[2] > bound_fn(x):
                ok = False
                break
        if ok:
            return c
    return None


def _rows_for_constant(ratios, x_grid, bound_fn, trials, c):
    srt = np.sort(ratios)
    rows = []
    for x in x_grid:
        thr = (c if c is not None else 1.0) * x
        hits = len(srt) - int(np.searchsorted(srt, thr, side="left"))
        p, lo, hi = wilson_interval(hits, trials)
        b = bound_fn(x)
        rows.append(TailRow(x=float(x), trials=trials, hits=hits, p_hat=p,
                            ci_lo=lo, ci_hi=hi, bound=b,
                            verdict=hits == 0 or hi <= b))
    return rows


def _exact_bound_row(x, hits, trials, bound):
    """Row for a bound with no free constant: pass iff p_hat clears the
    bound within three Wilson half-widths (several of these bounds are
    exact equalities for the fair +/-1 walk, so noise slack is needed)."""
    p, lo, hi = wilson_interval(hits, trials)
    half = (hi - lo) / 2.0
    return TailRow(x=float(x), trials=trials, hits=hits, p_hat=p,
                   ci_lo=lo, ci_hi=hi, bound=bound,
                   verdict=p <= bound + 3.0 * half)


# ---------------------------------------------------------------------------
# the twelve targets


def _default_step_cap(d: OffspringDistribution, trials: int) -> int:
    """Cap keeping the expected censoring rate below 1e-4 (size-biased laws
    get small caps automatically since their sigma-tails are light)."""
    v = d.factorial_second_moment
    if math.isinf(v):
        return 1 << 21
    if classify(d) == "subcritical":
        return 1 << 21
    need = (2.0 / (math.pi * v)) * 1e8   # asymptotic cap for censoring 1e-4
    cap = 1 << 21
    while cap < 2.0 * need and cap < (1 << 28):   # 2x margin: the asymptotic
        cap <<= 1                                 # constant undershoots
    return cap


def run_theorem(cfg: ExperimentConfig, precomputed=None) -> TailReport:
    """Simulate and score one theorem target; see THEOREM_TARGETS.

    `precomputed` optionally supplies the per-trial statistics dict from
    collect_tree_stats/collect_walk_stats so several targets can share
    one simulation (it must match cfg's law, trials, seed, and caps).
    """
    d0 = cfg.law()
    notes: Dict[str, object] = {}
    d = d0
    if classify(d0) == "supercritical":
        d = dual(d0)
        notes["conditioning"] = (
            "supercritical input; simulated the conjugate law (conditioning "
            "on extinction), which preserves mu(1)"
        )
        notes["dual_law"] = distribution_to_spec(d)
    x_grid = list(cfg.x_grid)
    trials = cfg.trials

    if cfg.target in ("general-width", "general-volume", "fixed-var", "stable",
                      "inf-var"):
        cap = cfg.node_cap or _default_step_cap(d, trials)
        st = precomputed if precomputed is not None else collect_tree_stats(
            d, trials, cfg.seed, cap)
        censor = float(st["censored"].mean())
        keep = ~st["censored"]
        ht = st["height"][keep].astype(np.float64)
        wid = st["width"][keep].astype(np.float64)
        size = st["sigma"][keep].astype(np.float64)
        if cfg.target == "general-width":
            ratios = ht * (1.0 - d.p1) / wid
            bound = lambda x: math.exp(-x)
        elif cfg.target == "general-volume":
            ratios = ht / np.sqrt(size / (1.0 - d.p1))
            bound = lambda x: math.exp(-x * x)
        elif cfg.target == "fixed-var":
            v = d.factorial_second_moment
            if not 0 < v < math.inf:
                raise ValueError("fixed-var needs 0 < v < infinity")
            notes["v"] = v
            ratios = ht / np.sqrt(size)
            bound = lambda x: math.exp(-v * x * x)
        elif cfg.target == "stable":
            alpha = cfg.alpha
            table = _nl_table_for(d, cfg, notes)
            M = table.scale_constant(alpha)
            notes["scale_constant_M"] = M
            ratios = ht * (alpha - 1.0) / (M * size ** ((alpha - 1.0) / alpha))
            bound = lambda x: math.exp(-(x ** alpha))
        else:  # inf-var: joint event, no constant
            s = cfg.size_threshold or 10**4
            eps = cfg.eps or 1.0
            notes["size_threshold"] = s
            notes["eps"] = eps
            ratios = np.where(size >= s, ht / np.sqrt(size), -np.inf)
            bound = lambda x: min(1.0, x / math.sqrt(s) * math.exp(-x * x / eps))
            srt = np.sort(ratios)
            rows = []
            for x in x_grid:
                hits = len(srt) - int(np.searchsorted(srt, x, side="left"))
                rows.append(_exact_bound_row(x, hits, trials, bound(x)))
            return TailReport(cfg.target, d0.label(), cfg.seed, trials, None,
                              rows, censor, notes)
        c = fit_constant(ratios, x_grid, bound, trials)
        rows = _rows_for_constant(ratios, x_grid, bound, trials, c)
        return TailReport(cfg.target, d0.label(), cfg.seed, trials,
                          c if c is not None else math.inf, rows, censor, notes)

    if cfg.target in ("hvol-finvar", "var-precise", "stable-attempt"):
        cap = cfg.step_cap or _default_step_cap(d, trials)
        st = precomputed if precomputed is not None else collect_walk_stats(
            d, trials, cfg.seed, cap)
        censor = float(st["censored"].mean())
        keep = ~st["censored"]
        h = st["h_sigma"][keep]
        sig = st["sigma"][keep].astype(np.float64)
        if cfg.target == "hvol-finvar":
            p0 = step_distribution(d).p_zero
            notes["p0"] = p0
            ratios = h * math.sqrt(1.0 - p0) / np.sqrt(sig)
            bound = lambda x: math.exp(-x * x)
            c = fit_constant(ratios, x_grid, bound, trials)
            rows = _rows_for_constant(ratios, x_grid, bound, trials, c)
        elif cfg.target == "var-precise":
            v = d.factorial_second_moment
            if not 0 < v < math.inf:
                raise ValueError("var-precise needs 0 < v < infinity")
            s = cfg.size_threshold or 10**4
            notes["v"] = v
            notes["size_threshold"] = s
            ratios = np.where(sig >= s, h / np.sqrt(sig), -np.inf)
            srt = np.sort(ratios)
            c = None
            for cand in _C_GRID:
                ok = True
                for x in x_grid:
                    hits = len(srt) - int(np.searchsorted(srt, x, side="left"))
                    b = min(1.0, cand * x / math.sqrt(s)
                            * math.exp(-v * x * x / cand))
                    if hits and wilson_interval(hits, trials)[2] > b:
                        ok = False
                        break
                if ok:
                    c = cand
                    break
            cc = c if c is not None else _C_GRID[-1]
            bound = lambda x: min(1.0, cc * x / math.sqrt(s)
                                  * math.exp(-v * x * x / cc))
            rows = []
            for x in x_grid:
                hits = len(srt) - int(np.searchsorted(srt, x, side="left"))
                p, lo2, hi2 = wilson_interval(hits, trials)
                b = bound(x)
                rows.append(TailRow(x=float(x), trials=trials, hits=hits,
                                    p_hat=p, ci_lo=lo2, ci_hi=hi2, bound=b,
                                    verdict=hits == 0 or hi2 <= b))
        else:  # stable-attempt
            alpha = cfg.alpha
            table = _nl_table_for(d, cfg, notes)
            M = table.scale_constant(alpha)
            notes["scale_constant_M"] = M
            ratios = h * (alpha - 1.0) / (M * sig ** ((alpha - 1.0) / alpha))
            bound = lambda x: math.exp(-(x ** alpha))
            c = fit_constant(ratios, x_grid, bound, trials)
            rows = _rows_for_constant(ratios, x_grid, bound, trials, c)
        return TailReport(cfg.target, d0.label(), cfg.seed, trials,
                          c if c is not None else math.inf, rows, censor, notes)

    if cfg.target == "nl-bd":
        ell = cfg.ell if cfg.ell is not None else 3
        entry = conc.estimate_n_ell(d, ell, method="auto")
        nl = entry.n_ell
        notes["ell"] = ell
        notes["n_ell"] = nl
        notes["n_ell_method"] = entry.method
        cap = cfg.step_cap or 1 << 20
        st = collect_walk_stats(d, trials, cfg.seed, cap, scale_ell=ell)
        censor = float(st["censored"].mean())
        notes["censored_as_hits"] = True
        z0 = 1
        pref = min(1.0, z0 / 2.0 ** (ell - 1))
        rows = []
        for b in cfg.b_grid:
            bound = pref * 2.0 ** (1.0 - b / 18.0)
            # censored trials count as hits (their N_ell could still grow)
            hits_n = int(np.sum((st["n_ell"] >= b * nl) | st["censored"]))
            rows.append(_exact_bound_row(b, hits_n, trials, bound))
            hits_h = int(np.sum((st["h_ell"] >= b * nl / 2.0 ** (ell - 1))
                                | st["censored"]))
            rows.append(_exact_bound_row(b, hits_h, trials, bound))
        return TailReport(cfg.target, d0.label(), cfg.seed, trials, None,
                          rows, censor, notes)

    if cfg.target == "upcrossing":
        x0, y0, z0 = cfg.upcross_x, cfg.upcross_y, cfg.upcross_start
        cap = cfg.step_cap or 1 << 20
        def one(lo, hi):
            return walk.run_walks(d, hi - lo, cfg.seed, step_cap=cap,
                                  trial_offset=lo, start=z0, want_h=False,
                                  want_max=False, upcross_interval=(x0, y0))
        parts = _parallel_batches(one, trials)
        ucnt = np.concatenate([p.upcross for p in parts])
        cens = np.concatenate([p.censored for p in parts])
        censor = float(cens.mean())
        notes["interval"] = [x0, y0]
        notes["start"] = z0
        notes["censored_counted_as_observed"] = True
        rows = []
        for k in cfg.k_grid:
            bound = ((x0 - 1) / y0) ** k
            hits = int(np.sum(ucnt >= k))
            rows.append(_exact_bound_row(k, hits, trials, bound))
        return TailReport(cfg.target, d0.label(), cfg.seed, trials, None,
                          rows, censor, notes)

    if cfg.target == "interval":
        a, z, b = cfg.interval_azb or (1, 3, 8)
        above, tau, cens = _interval_batch(d, a, z, b, trials, cfg.seed)
        censor = float(cens.mean())
        bound = (z + 1 - a) / (b + 1 - a)
        hits = int(np.sum(above & ~cens))
        notes["azb"] = [a, z, b]
        rows = [_exact_bound_row(b, hits, trials, bound)]
        return TailReport(cfg.target, d0.label(), cfg.seed, trials, None,
                          rows, censor, notes)

    if cfg.target == "generic-budget":
        m = cfg.budget_m
        bs = list(cfg.budget_b) if cfg.budget_b else [
            4.0 * 2.0 ** ((m - l) / 2.0) for l in range(m + 1)
        ]
        table = _nl_table_for(d, cfg, notes, ells=range(m + 1))
        bud = conc.budget(bs, table, m)
        s = cfg.size_threshold or 4 ** (m + 1)
        thr = bud.V + s / 2.0 ** (m - 1)
        notes["V"] = bud.V
        notes["Delta"] = bud.Delta
        notes["s"] = s
        st = collect_walk_stats(d, trials, cfg.seed, s)  # H(s): censoring harmless
        hs = st["h_sigma"]
        hits = int(np.sum(hs > thr))
        bound = min(1.0, bud.Delta)
        rows = [_exact_bound_row(s, hits, trials, bound)]
        return TailReport(cfg.target, d0.label(), cfg.seed, trials, None,
                          rows, 0.0, notes)

    raise AssertionError("unreachable")


def _interval_batch(d, a, z, b, trials, seed, step_cap=10**7):
    def one(lo, hi):
        return walk.run_walks(d, hi - lo, seed, step_cap=step_cap,
                              trial_offset=lo, start=z, absorb_low=a,
                              absorb_high=b, want_h=False, want_max=False)
    parts = _parallel_batches(one, trials)
    return (np.concatenate([p.exit_above for p in parts]),
            np.concatenate([p.sigma for p in parts]),
            np.concatenate([p.censored for p in parts]))


_NL_CACHE: Dict[tuple, conc.ScaleExitTable] = {}


def _nl_table_for(d, cfg, notes, ells=None) -> conc.ScaleExitTable:
    if ells is None:
        ells = cfg.nl_table_ells or range(0, 13)
    key = (json.dumps(distribution_to_spec(d), sort_keys=True), tuple(ells))
    if key not in _NL_CACHE:
        _NL_CACHE[key] = conc.build_scale_exit_table(d, list(ells), method="auto")
    table = _NL_CACHE[key]
    notes["n_ell_table"] = {str(e.ell): e.n_ell for e in table.entries.values()}
    return table


# ---------------------------------------------------------------------------
# emission


def emit(report: TailReport, out_dir, formats=("csv", "json", "svg")) -> List[Path]:
    """Write tails.csv / report.json / plots/tails.svg; deterministic bytes."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        p = out / "tails.csv"
        p.write_text(render_csv(report))
        written.append(p)
    if "json" in formats:
        p = out / "report.json"
        p.write_text(json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n")
        written.append(p)
    if "svg" in formats:
        pdir = out / "plots"
        pdir.mkdir(exist_ok=True)
        p = pdir / "tails.svg"
        p.write_text(render_svg(report))
        written.append(p)
    return written


def render_csv(report: TailReport) -> str:
    lines = ["x,trials,hits,p_hat,ci_lo,ci_hi,bound,verdict"]
    for r in report.rows:
        lines.append(
            "%.10g,%d,%d,%.10g,%.10g,%.10g,%.10g,%s"
            % (r.x, r.trials, r.hits, r.p_hat, r.ci_lo, r.ci_hi, r.bound,
               "pass" if r.verdict else "fail")
        )
    return "\n".join(lines) + "\n"


def render_svg(report: TailReport, width: int = 640, height: int = 420) -> str:
    """log10 p_hat with CI band against the bound curve, as a standalone SVG."""
    rows = [r for r in report.rows]
    xs = [r.x for r in rows]
    floor = 1.0 / max(r.trials for r in rows) / 10.0

    def logp(v):
        return math.log10(max(v, floor))

    ys = [logp(r.p_hat) for r in rows]
    lo = [logp(r.ci_lo) for r in rows]
    hi = [logp(r.ci_hi) for r in rows]
    bnd = [logp(r.bound) for r in rows]
    y_all = ys + lo + hi + bnd
    y0, y1 = min(y_all) - 0.5, max(y_all) + 0.5
    x0, x1 = min(xs), max(xs)
    if x1 == x0:
        x1 = x0 + 1.0
    mx, my = 50.0, 30.0

    def sx(x):
        return mx + (x - x0) / (x1 - x0) * (width - 2 * mx)

    def sy(y):
        return height - my - (y - y0) / (y1 - y0) * (height - 2 * my)

    def poly(pts, color, dash=""):
        p = " ".join("%.2f,%.2f" % (sx(x), sy(y)) for x, y in pts)
        d = ' stroke-dasharray="6,4"' if dash else ""
        return (f'<polyline fill="none" stroke="{color}" stroke-width="1.5"'
                f'{d} points="{p}"/>')

    band = (
        '<polygon fill="#9ecae1" fill-opacity="0.4" stroke="none" points="'
        + " ".join("%.2f,%.2f" % (sx(x), sy(y)) for x, y in zip(xs, hi))
        + " "
        + " ".join("%.2f,%.2f" % (sx(x), sy(y)) for x, y in zip(xs[::-1], lo[::-1]))
        + '"/>'
    )
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{mx}" y="18" font-size="13" font-family="monospace">'
        f"{report.target} / {report.law_label} / log10 tail vs grid</text>",
        band,
        poly(list(zip(xs, ys)), "#08519c"),
        poly(list(zip(xs, bnd)), "#a63603", dash="1"),
        f'<line x1="{mx}" y1="{height-my}" x2="{width-mx}" y2="{height-my}" stroke="black"/>',
        f'<line x1="{mx}" y1="{my}" x2="{mx}" y2="{height-my}" stroke="black"/>',
    ]
    for x in xs:
        parts.append(
            f'<text x="{sx(x):.2f}" y="{height-my+16:.2f}" font-size="11" '
            f'text-anchor="middle" font-family="monospace">{x:g}</text>'
        )
    for k in range(int(math.floor(y0)), int(math.ceil(y1)) + 1):
        parts.append(
            f'<text x="{mx-6:.2f}" y="{sy(k)+4:.2f}" font-size="11" '
            f'text-anchor="end" font-family="monospace">1e{k}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
