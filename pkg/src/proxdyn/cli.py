"""``proxdyn run|validate --config FILE [--set key=value]... [--jobs N] [--seed-base S]``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import config as config_mod
from .experiment import build_problem, decreasing_tail, run_replication
from .oracle import OracleError
from .problem import validate_constants
from .prox_ops import prox_check_optimality
from .solvers import DivergenceError

log = logging.getLogger("proxdyn")

TRACE_COLUMNS = ("k", "h_x", "h_star", "inst_regret", "cum_regret", "track_err", "e_norm", "cum_E", "cum_W", "grad_evals")
EXIT_OK, EXIT_ERROR, EXIT_BOUND = 0, 1, 2


def fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_csv(path: Path, columns: dict) -> None:
    rows = zip(*(columns[c] for c in TRACE_COLUMNS))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(TRACE_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def summarize(results) -> dict:
    cols = [r.report.columns() for r in results]
    out = {"k": cols[0]["k"]}
    for c in TRACE_COLUMNS[1:]:
        out[c] = np.mean(np.stack([np.asarray(col[c], dtype=float) for col in cols]), axis=0)
    return out


PLOT_SCRIPT = """\
# gnuplot script: regret and tracking error against k, averaged over replications
set datafile separator ','
set terminal pngcairo size 1000,400
set output 'figures.png'
set multiplot layout 1,2
set xlabel 'k'
set ylabel 'Reg_k / k'
plot 'summary.csv' using 1:($5/$1) every ::1 with lines title 'average dynamic regret'
set ylabel '||x_k - x_k^*||'
set logscale y
plot 'summary.csv' using 1:6 every ::1 with lines title 'tracking error'
unset multiplot
"""


def _run_one(args):
    cfg, seed = args
    return run_replication(cfg, seed)


def cmd_run(cfg: dict, jobs: int, seed_base: int) -> int:
    out = Path(os.environ.get("PROXDYN_OUTPUT_DIR") or cfg["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    seeds = [seed_base + r for r in range(cfg["replications"])]
    work = [(cfg, s) for s in seeds]
    if jobs > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_run_one, work))
    else:
        results = [_run_one(w) for w in work]
    for res in results:
        write_csv(out / f"trace_{res.seed}.csv", res.report.columns())
        if res.report.negative_regret_steps:
            log.warning("seed %d: comparator not optimal at steps %s", res.seed, res.report.negative_regret_steps[:10])
    summary = summarize(results)
    write_csv(out / "summary.csv", summary)
    (out / "plot.gp").write_text(PLOT_SCRIPT, encoding="utf-8")

    failed = [r for r in results if not r.bound_ok]
    lines = [
        f"scenario {cfg['scenario']} algorithm {cfg['algorithm']} replications {len(results)}",
        f"alpha {fmt(results[0].alpha)}",
        "seed rho D_bound tracking_bound Reg_K bound_rhs margin ok",
    ]
    for r in results:
        rep = r.report
        lines.append(" ".join([str(r.seed), fmt(rep.rho), fmt(rep.D_bound), fmt(rep.tracking_bound), fmt(rep.regret),
                               fmt(r.bound_rhs), fmt(r.margin), "yes" if r.bound_ok else "NO"]))
    lines.append(f"min margin {fmt(min(r.margin for r in results))}")
    lines.append(f"bound holds on {len(results) - len(failed)}/{len(results)} replications")
    (out / "bounds.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")

    avg = summary["cum_regret"] / summary["k"]
    K = len(avg)
    print(f"{cfg['scenario']}/{cfg['algorithm']}: {len(results)} replications, K={K}, alpha={results[0].alpha:.6g}")
    print(f"  mean Reg_K/K = {avg[-1]:.6g}; decreasing over final half: {'yes' if decreasing_tail(avg) else 'no'}")
    print(f"  final tracking error (mean) = {summary['track_err'][-1]:.6g}")
    print(f"  mean grad_evals/step = {summary['grad_evals'].mean():.6g} "
          f"(full-gradient step: {build_problem(cfg)[0].N})")
    print(f"  outputs in {out}")
    if failed:
        msg = f"regret bound violated on seeds {[r.seed for r in failed]}"
        if cfg["bounds.on_failure"] == "warn":
            log.warning(msg)
        else:
            print("error: " + msg, file=sys.stderr)
            return EXIT_BOUND
    return EXIT_OK


def prox_suite(op, n, cases, seed=0, tol=1e-8):
    """Nonexpansiveness, idempotence and optimality residual on random inputs; returns a list of failures."""
    rng = np.random.default_rng(seed)
    fails = []
    for c in range(cases):
        x, y = 10 * rng.standard_normal(n), 10 * rng.standard_normal(n)
        a = float(rng.uniform(0.01, 2.0))
        px, py = op.prox(x, a), op.prox(y, a)
        scale = 1.0 + np.linalg.norm(x) + np.linalg.norm(y)
        if np.linalg.norm(px - py) > np.linalg.norm(x - y) + tol * scale:
            fails.append(f"case {c}: not nonexpansive")
        if op.kind in ("affine_projection", "box"):
            if np.linalg.norm(op.prox(px, a) - px) > tol * scale:
                fails.append(f"case {c}: projection not idempotent")
        res = prox_check_optimality(op, x, a, px)
        if res > 1e-6 * (1 + np.linalg.norm(x) / a):
            fails.append(f"case {c}: optimality residual {res:.3g}")
    return fails


def cmd_validate(cfg: dict) -> int:
    p, _, _ = build_problem(cfg)
    rep = validate_constants(p, trials=cfg["validate.trials"])
    print(f"scenario {cfg['scenario']}: n={p.n}, components N={p.N}")
    print(rep.summary())
    ratio = p.constants.mu / p.constants.L
    print(f"declared mu/L = {ratio:.6g}; OP-SVRG condition mu/L > 0.89: {'satisfied' if ratio > 0.89 else 'not satisfied'}")
    fails = prox_suite(p.prox_operator(1), p.n, cfg["validate.prox_cases"])
    print(f"prox suite ({p.prox_operator(1).kind}): {cfg['validate.prox_cases']} cases, {len(fails)} failures")
    for f in fails[:10]:
        print("  " + f)
    return EXIT_OK if rep.ok and not fails else EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="proxdyn", description="Online proximal gradient experiments with dynamic-regret accounting.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "run all replications and write traces"), ("validate", "check declared constants and the prox operator")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True)
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
        sp.add_argument("--algorithm", choices=("ipogd", "opsvrg", "opiss"))
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--seed-base", type=int, default=0)
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    overrides = list(args.set)
    if args.algorithm:
        overrides.append(f"algorithm={args.algorithm}")
    try:
        cfg = config_mod.load(args.config, overrides)
        if args.jobs < 1:
            raise config_mod.ConfigError("--jobs must be >= 1")
        if args.command == "run":
            return cmd_run(cfg, args.jobs, args.seed_base)
        return cmd_validate(cfg)
    except config_mod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (OracleError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
