"""Command-line entry points.

    gwtails sample  --dist SPEC --trials N --seed S [--node-cap M] --out trees.csv
    gwtails walk    --dist SPEC --trials N --seed S [--step-cap M] --stats out.csv
    gwtails scales  --dist SPEC --trials N --seed S [--step-cap M] --per-scale out.csv
    gwtails nl      --dist SPEC --ell-max K [--method auto|dp|dp-spectral|mc] --out nl.csv
    gwtails qcheck  --dist SPEC --n-grid 100,1000 --L 2
    gwtails oracle  {size-pmf,height-cdf,enumerate} --dist SPEC ... [--out csv]
    gwtails verify  --config cfg.json --out-dir results/

SPEC is an inline JSON distribution spec or a path to one, e.g.
'{"family":"finite","pmf":{"0":0.5,"2":0.5}}' or
'{"family":"power","alpha":1.5,"target":"critical"}'.

`verify` exits 0 iff every verdict passes.  GWTAILS_THREADS sets the
worker count (results are byte-identical regardless).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import conc, harness, oracle, scales, treegen, walk
from .offspring import distribution_from_spec

__all__ = ["main"]


def _load_dist(spec: str):
    text = spec
    if not spec.lstrip().startswith("{"):
        text = Path(spec).read_text()
    return distribution_from_spec(json.loads(text))


def _cmd_sample(args) -> int:
    d = _load_dist(args.dist)
    lines = ["trial,size,height,width,max_queue,harmonic_bound,truncated"]
    chunk = 1 << 14
    for lo in range(0, args.trials, chunk):
        n = min(chunk, args.trials - lo)
        b = treegen.sample_forest(d, n, args.seed, node_cap=args.node_cap,
                                  trial_offset=lo)
        for i in range(n):
            lines.append("%d,%d,%d,%d,%d,%.10g,%s" % (
                lo + i, b.sigma[i], b.height[i], b.width[i], b.max_s[i],
                3.0 * b.h_sigma[i], "true" if b.censored[i] else "false"))
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"wrote {args.trials} trees to {args.out}")
    return 0


def _cmd_walk(args) -> int:
    d = _load_dist(args.dist)
    lines = ["trial,sigma,max_s,h_sigma,censored"]
    chunk = 1 << 14
    for lo in range(0, args.trials, chunk):
        n = min(chunk, args.trials - lo)
        b = walk.run_walks(d, n, args.seed, step_cap=args.step_cap,
                           trial_offset=lo)
        for i in range(n):
            lines.append("%d,%d,%d,%.10g,%s" % (
                lo + i, b.sigma[i], b.max_s[i], b.h_sigma[i],
                "true" if b.censored[i] else "false"))
    Path(args.stats).write_text("\n".join(lines) + "\n")
    print(f"wrote {args.trials} walks to {args.stats}")
    return 0


def _cmd_scales(args) -> int:
    d = _load_dist(args.dist)
    lines = ["trial,ell,N_ell,H_ell,M_ell,U_low,U_high"]
    chunk = 1 << 10
    skipped = 0
    for lo in range(0, args.trials, chunk):
        n = min(chunk, args.trials - lo)
        b = walk.run_walks(d, n, args.seed, step_cap=args.step_cap,
                           trial_offset=lo, keep_paths=True)
        for i in range(n):
            if b.censored[i]:
                skipped += 1
                continue
            dec = scales.decompose(b.paths[i])
            rep = scales.check_up_bd(dec, b.paths[i])
            for ell in dec.visited:
                m, ulow, uhigh = rep.per_ell[ell]
                lines.append("%d,%d,%d,%.10g,%d,%d,%d" % (
                    lo + i, ell, dec.n_ell.get(ell, 0),
                    dec.h_ell.get(ell, 0.0), m, ulow, uhigh))
    Path(args.per_scale).write_text("\n".join(lines) + "\n")
    print(f"wrote per-scale rows to {args.per_scale}"
          + (f" ({skipped} censored trials skipped)" if skipped else ""))
    return 0


def _cmd_nl(args) -> int:
    d = _load_dist(args.dist)
    lines = ["ell,n_ell,method"]
    for ell in range(0, args.ell_max + 1):
        e = conc.estimate_n_ell(d, ell, method=args.method, seed=args.seed)
        lines.append(f"{ell},{e.n_ell},{e.method}")
        print(f"ell={ell:2d}  n_ell={e.n_ell}  ({e.method})")
    Path(args.out).write_text("\n".join(lines) + "\n")
    return 0


def _cmd_qcheck(args) -> int:
    d = _load_dist(args.dist)
    n_grid = [int(x) for x in args.n_grid.split(",")]
    rep = conc.kesten_check(d, n_grid, args.L)
    print(f"law: {rep.law_label}  L = {rep.L}")
    print("n, Q(S_n,L), escaped, C_pair, C_selfint, C_disperse")
    for i, n in enumerate(rep.n_grid):
        print("%8d  %.6g  %.2g  %.4f  %.4f  %.4f" % (
            n, rep.q_values[i], rep.escaped[i], rep.c_pair[i],
            rep.c_selfint[i], rep.c_disperse[i]))
    print(f"fitted C_hat = {rep.c_hat:.4f}")
    return 0


def _cmd_oracle(args) -> int:
    d = _load_dist(args.dist)
    if args.what == "size-pmf":
        pm = oracle.size_pmf_upto(d, args.n)
        lines = ["n,p"] + ["%d,%.17g" % (k, pm[k]) for k in range(1, args.n + 1)]
    elif args.what == "height-cdf":
        lines = ["n,p_ht_lt_n"] + [
            "%d,%.17g" % (k, oracle.height_cdf(d, k)) for k in range(args.n + 1)
        ]
    else:
        ens = oracle.enumerate_trees(d, args.n)
        lines = ["child_counts,prob,size,height,width,max_queue"] + [
            '"%s",%.17g,%d,%d,%d,%d' % (
                " ".join(map(str, t.child_counts)), t.prob, t.size, t.height,
                t.width, t.max_queue)
            for t in ens.trees
        ]
    if args.out:
        Path(args.out).write_text("\n".join(lines) + "\n")
        print(f"wrote {len(lines) - 1} rows to {args.out}")
    else:
        print("\n".join(lines))
    return 0


def _cmd_verify(args) -> int:
    payload = json.loads(Path(args.config).read_text())
    cfg = harness.ExperimentConfig.from_json(payload)
    rep = harness.run_theorem(cfg)
    harness.emit(rep, args.out_dir)
    status = "PASS" if rep.all_pass else "FAIL"
    chat = "n/a" if rep.c_hat is None else (
        "inf" if rep.c_hat == float("inf") else f"{rep.c_hat:.4f}")
    print(f"[{status}] target={rep.target} law={rep.law_label} "
          f"C_hat={chat} censoring={rep.censor_rate:.2e}")
    for r in rep.rows:
        print("  x=%-8g hits=%-9d p=%.4g  ci=(%.4g, %.4g)  bound=%.4g  %s" % (
            r.x, r.hits, r.p_hat, r.ci_lo, r.ci_hi, r.bound,
            "pass" if r.verdict else "FAIL"))
    return 0 if rep.all_pass else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gwtails", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample trees, emit per-tree stats")
    p.add_argument("--dist", required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=271828)
    p.add_argument("--node-cap", type=int, default=treegen.DEFAULT_NODE_CAP)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("walk", help="simulate queue walks, emit summaries")
    p.add_argument("--dist", required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=271828)
    p.add_argument("--step-cap", type=int, default=walk.DEFAULT_STEP_CAP)
    p.add_argument("--stats", required=True)
    p.set_defaults(fn=_cmd_walk)

    p = sub.add_parser("scales", help="per-scale decomposition tables")
    p.add_argument("--dist", required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=271828)
    p.add_argument("--step-cap", type=int, default=10**5)
    p.add_argument("--per-scale", required=True)
    p.set_defaults(fn=_cmd_scales)

    p = sub.add_parser("nl", help="scale-exit medians n_ell")
    p.add_argument("--dist", required=True)
    p.add_argument("--ell-max", type=int, required=True)
    p.add_argument("--method", default="auto",
                   choices=["auto", "dp", "dp-spectral", "mc"])
    p.add_argument("--seed", type=int, default=271828)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_nl)

    p = sub.add_parser("qcheck", help="exact concentration-function checks")
    p.add_argument("--dist", required=True)
    p.add_argument("--n-grid", default="100,1000,10000")
    p.add_argument("--L", type=float, default=2.0)
    p.set_defaults(fn=_cmd_qcheck)

    p = sub.add_parser("oracle", help="exact small-instance oracles")
    p.add_argument("what", choices=["size-pmf", "height-cdf", "enumerate"])
    p.add_argument("--dist", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", default="")
    p.set_defaults(fn=_cmd_oracle)

    p = sub.add_parser("verify", help="run a theorem verification config")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=_cmd_verify)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
