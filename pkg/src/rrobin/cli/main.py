"""``rrobin`` command line: analyses, sweeps, simulations, bias demo and chain checks."""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from ..adversary.bias import simulate_bias_baseline, trajectory_csv
from ..adversary.strategies import STRATEGIES
from ..analysis import (
    DomainError,
    SweepRule,
    pr_ae,
    pr_afs,
    pr_alv,
    pr_bfs,
    pr_blv,
    quorum_sweep,
    sweep_csv,
    throughput,
)
from ..chain.dump import dump_chain, load_chain
from ..chain.verify import verify_branch
from ..netsim.sim import Simulation
from .config import ConfigFileError, RunConfig, load_run_config, validate_run_config

OUTPUT_ENV = "RROBIN_OUTPUT_DIR"


class UsageError(Exception):
    pass


def output_dir(explicit: str | None) -> Path:
    """Explicit flag, then the environment variable, then the working directory."""
    d = Path(explicit or os.environ.get(OUTPUT_ENV) or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="\n")
    print(f"wrote {path}", file=sys.stderr)


# analyze -------------------------------------------------------------------

FORMULAS = {
    "pr-bfs": (("ne", "q", "alpha", "beta"), lambda a: pr_bfs(a.ne, a.q, a.alpha, a.beta)),
    "pr-afs": (("ne", "q", "alpha", "beta", "d"), lambda a: pr_afs(a.ne, a.q, a.alpha, a.beta, a.d, a.log2_leaves)),
    "pr-blv": (("ne", "q", "beta"), lambda a: pr_blv(a.ne, a.q, a.beta)),
    "pr-alv": (("ne", "q", "alpha", "beta"), lambda a: pr_alv(a.ne, a.q, a.alpha, a.beta)),
    "pr-ae": (("ne", "na", "ta", "alpha"), lambda a: pr_ae(a.ne, a.na, a.ta, a.alpha)),
}


def cmd_analyze(args) -> int:
    if args.formula == "throughput":
        missing = [f for f in ("tr", "block", "ne") if getattr(args, f) is None]
        if missing:
            raise UsageError(f"throughput needs --{' --'.join(missing)}")
        tp = throughput(args.tr, args.block, args.ne, header_bytes=args.header, confirm_bytes=args.confirm,
                        n_enroll=args.n_enroll, enroll_bytes=args.enroll_size, tx_bytes=args.tx)
        if args.csv:
            print("formula,tps,tx_fraction")
            print(f"throughput,{tp.tps:.4f},{tp.tx_fraction:.6f}")
        else:
            print(f"throughput tps={tp.tps:.1f} tx_fraction={tp.tx_fraction:.4f}")
        return 0
    needed, fn = FORMULAS[args.formula]
    missing = [f for f in needed if getattr(args, f) is None]
    if missing:
        raise UsageError(f"{args.formula} needs --{' --'.join(missing)}")
    value = fn(args)
    if args.csv:
        print("formula,value,log10")
        print(f"{args.formula},{value.sci(4)},{value.log10:.6f}")
    else:
        print(f"{args.formula} {value.sci(4)}")
    return 0


# sweep ---------------------------------------------------------------------

SWEEP_DEFAULTS = {"ne": [100], "alpha": [0.33], "beta": [0.05], "d": [12], "s": [5], "q_min": None, "q_max": None}


def _sweep_one(job):
    (ne, alpha, beta, d, s), q_min, q_max, rule = job
    lo = 1 if q_min is None else q_min
    hi = ne if q_max is None else min(q_max, ne)
    return quorum_sweep(ne, alpha, beta, d, s, range(lo, hi + 1), rule)


def sweep_grid(cfg: dict):
    """Cartesian product of the list-valued grid fields, in a fixed order."""
    unknown = set(cfg) - set(SWEEP_DEFAULTS) - {"rule", "jobs", "output"}
    if unknown:
        raise ConfigFileError(f"unknown sweep key(s): {sorted(unknown)}")
    grid = {}
    for k in ("ne", "alpha", "beta", "d", "s"):
        v = cfg.get(k, SWEEP_DEFAULTS[k])
        grid[k] = v if isinstance(v, list) else [v]
        if not grid[k]:
            raise ConfigFileError(f"sweep field '{k}' is empty")
    rule = SweepRule(**cfg.get("rule", {}))
    q_min, q_max = cfg.get("q_min"), cfg.get("q_max")
    if q_min is not None and q_max is not None and q_max < q_min:
        raise DomainError("empty quorum range")
    combos = list(itertools.product(*(grid[k] for k in ("ne", "alpha", "beta", "d", "s"))))
    return [(c, q_min, q_max, rule) for c in combos]


def cmd_sweep(args) -> int:
    cfg = {}
    if args.config:
        cfg = json.loads(Path(args.config).read_text())
    for k, attr in (("ne", "ne"), ("alpha", "alpha"), ("beta", "beta"), ("d", "d"), ("s", "s")):
        v = getattr(args, attr)
        if v is not None:
            cfg[k] = v
    for k in ("q_min", "q_max"):
        if getattr(args, k) is not None:
            cfg[k] = getattr(args, k)
    rule = dict(cfg.get("rule", {}))
    if args.afs_max is not None:
        rule["afs_max"] = args.afs_max
    if args.alv_max is not None:
        rule["alv_max"] = args.alv_max
    if args.pick is not None:
        rule["pick"] = args.pick
    cfg["rule"] = rule
    jobs = sweep_grid(cfg)
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(j) for j in jobs]
    rows = [r for res in results for r in res]
    text = sweep_csv(rows)
    for res in results:
        best = [r.q for r in res if r.recommended]
        r0 = res[0]
        print(f"n_e={r0.n_e} alpha={r0.alpha} beta={r0.beta} d={r0.d} s={r0.s} recommended_q={best[0] if best else 'none'}",
              file=sys.stderr)
    if args.out or os.environ.get(OUTPUT_ENV):
        target = Path(args.out) if args.out else output_dir(None) / "sweep.csv"
        target.parent.mkdir(parents=True, exist_ok=True)
        _write(target, text)
    else:
        sys.stdout.write(text)
    return 0


# simulate / attack ---------------------------------------------------------

def build_run_config(args) -> RunConfig:
    cfg = load_run_config(args.config) if args.config else RunConfig()
    net, adv, params, out = cfg.net, cfg.adversary, cfg.params, cfg.output
    rounds, seed = cfg.rounds, cfg.seed
    if args.rounds is not None:
        rounds = args.rounds
    if args.seed is not None:
        seed = args.seed
    net_over = {k: getattr(args, k) for k in ("n", "beta") if getattr(args, k) is not None}
    if args.latency is not None:
        net_over["latency"] = replace(net.latency, kind="constant", ms=args.latency)
    net = replace(net, seed=seed, **net_over)
    adv_over = {k: getattr(args, k) for k in ("alpha", "strategy") if getattr(args, k) is not None}
    adv = replace(adv, **adv_over)
    if args.quorum is not None or args.endorsers is not None:
        params = params.replace(**{k: v for k, v in (("quorum", args.quorum), ("n_endorsers", args.endorsers)) if v is not None})
    out = replace(out, dir=args.out_dir or out.dir, prefix=args.prefix or out.prefix, dump=args.dump or out.dump)
    if out.dump and net.keep_blocks:
        net = replace(net, keep_blocks=0)
    if rounds < 1:
        raise ConfigFileError("'rounds' must be >= 1")
    cfg = RunConfig(params, net, adv, rounds, seed, out)
    validate_run_config(cfg)
    return cfg


def run_configured(cfg: RunConfig):
    sim = Simulation(cfg.params, cfg.net, cfg.adversary)
    report = sim.run(cfg.rounds)
    report.config = {k: v for k, v in cfg.to_dict().items() if k != "output"}
    return sim, report


def cmd_simulate(args) -> int:
    if args.command == "attack" and args.strategy is None and not args.config:
        raise UsageError("attack needs --strategy or a config with an adversary section")
    cfg = build_run_config(args)
    if args.command == "attack" and cfg.adversary.strategy == "none":
        raise UsageError("attack needs a strategy other than 'none'")
    sim, report = run_configured(cfg)
    d = output_dir(cfg.output.dir)
    _write(d / f"{cfg.output.prefix}.csv", report.to_csv())
    _write(d / f"{cfg.output.prefix}.json", report.to_json())
    if cfg.output.dump:
        m, b = dump_chain(d / f"{cfg.output.prefix}.chain", sim.genesis, sim.main_chain())
        print(f"wrote {m} and {b}", file=sys.stderr)
    s = report.summary
    keys = ("blocks", "skip_rate", "targeted_skip_rate", "fork_rate", "max_fork_depth", "finality_violations",
            "adversary_share")
    print(" ".join(f"{k}={s[k]:.6g}" if isinstance(s[k], float) else f"{k}={s[k]}" for k in keys if k in s))
    return 0


# bias demo -----------------------------------------------------------------

def cmd_bias_demo(args) -> int:
    seeds = np.random.SeedSequence(args.seed).spawn(args.runs)
    trajs = [
        simulate_bias_baseline(args.alpha, args.initial, args.final, np.random.default_rng(s),
                               choice_window=args.choice_window, exploit=not args.control,
                               window=args.window, every=args.every)
        for s in seeds
    ]
    mean = [
        type(pts[0])(pts[0].total_stake, float(np.mean([p.adv_stake_share for p in pts])),
                     float(np.mean([p.adv_block_share for p in pts])))
        for pts in zip(*trajs)
    ]
    text = trajectory_csv(mean)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        _write(Path(args.out), text)
    elif os.environ.get(OUTPUT_ENV):
        _write(output_dir(None) / "bias.csv", text)
    else:
        sys.stdout.write(text)
    last = mean[-1]
    print(f"final stake share={last.adv_stake_share:.4f} block share={last.adv_block_share:.4f}", file=sys.stderr)
    return 0


# verify --------------------------------------------------------------------

def cmd_verify(args) -> int:
    dump = load_chain(args.path)
    verdict = verify_branch(dump.blocks, dump.genesis)
    if verdict:
        print(f"valid: {len(dump.blocks)} blocks")
        return 0
    print(f"invalid: {verdict.reason} at height {verdict.height}")
    return 1


# parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rrobin", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="evaluate one closed-form probability or the throughput formula")
    a.add_argument("formula", choices=sorted(FORMULAS) + ["throughput"])
    a.add_argument("--ne", type=int)
    a.add_argument("--q", type=int)
    a.add_argument("--alpha", type=float)
    a.add_argument("--beta", type=float)
    a.add_argument("--d", type=int)
    a.add_argument("--log2-leaves", type=float, default=80.0)
    a.add_argument("--na", type=int)
    a.add_argument("--ta", type=int)
    a.add_argument("--tr", type=float, help="round time in seconds")
    a.add_argument("--block", type=float, help="block size in bytes")
    a.add_argument("--tx", type=float, default=250)
    a.add_argument("--header", type=float, default=280)
    a.add_argument("--confirm", type=float, default=416)
    a.add_argument("--n-enroll", type=int, default=0)
    a.add_argument("--enroll-size", type=float, default=0)
    a.add_argument("--csv", action="store_true")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sweep", help="quorum sweep over a grid; CSV out")
    s.add_argument("--config")
    s.add_argument("--ne", type=int, nargs="+")
    s.add_argument("--alpha", type=float, nargs="+")
    s.add_argument("--beta", type=float, nargs="+")
    s.add_argument("--d", type=int, nargs="+")
    s.add_argument("--s", type=int, nargs="+")
    s.add_argument("--q-min", type=int)
    s.add_argument("--q-max", type=int)
    s.add_argument("--afs-max", type=float)
    s.add_argument("--alv-max", type=float)
    s.add_argument("--pick", choices=("smallest", "largest"))
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    for name in ("simulate", "attack"):
        m = sub.add_parser(name, help="run the network simulation" + (" with an adversary" if name == "attack" else ""))
        m.add_argument("--config")
        m.add_argument("--rounds", type=int)
        m.add_argument("--seed", type=int)
        m.add_argument("--n", type=int)
        m.add_argument("--beta", type=float)
        m.add_argument("--latency", type=int, help="constant one-way latency in ms")
        m.add_argument("--alpha", type=float)
        m.add_argument("--strategy", choices=STRATEGIES)
        m.add_argument("--quorum", type=int)
        m.add_argument("--endorsers", type=int)
        m.add_argument("--out-dir")
        m.add_argument("--prefix")
        m.add_argument("--dump", action="store_true", help="also write the main chain as a chain file")
        m.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bias-demo", help="stake-priority bias baseline trajectory")
    b.add_argument("--alpha", type=float, default=0.33)
    b.add_argument("--initial", type=int, default=1000)
    b.add_argument("--final", type=int, default=10000)
    b.add_argument("--runs", type=int, default=20)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--choice-window", type=int, default=2)
    b.add_argument("--window", type=int, default=1000)
    b.add_argument("--every", type=int, default=100)
    b.add_argument("--control", action="store_true", help="adversary never uses its choice")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bias_demo)

    v = sub.add_parser("verify", help="validate a chain file from genesis")
    v.add_argument("path")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConfigFileError, DomainError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
