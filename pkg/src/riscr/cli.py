"""Command-line entry point: ``sim sweep``, ``sim single`` and ``sim selftest``."""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .config import SWEEP_VARIABLES, ScenarioConfig, load_config, parse_settings
from .harness import (
    Scheme,
    TrialStreams,
    _design_for,
    emit_csv,
    make_designs,
    run_scheme,
    run_sweep,
    trial_seed,
)
from .channel import build_scenario


def _values(text: list[str]) -> list[float]:
    out = []
    for chunk in text:
        out.extend(float(v) for v in chunk.replace(",", " ").split())
    return out


def _load(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    flat = {}
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise SystemExit(f"--set expects KEY=VALUE, got {item!r}")
        flat[key.strip()] = value.strip()
    if getattr(args, "trials", None) is not None:
        flat["trials"] = str(args.trials)
    if getattr(args, "seed", None) is not None:
        flat["seed"] = str(args.seed)
    if getattr(args, "schemes", None):
        flat["schemes"] = args.schemes
    return parse_settings(flat, cfg) if flat else cfg


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="INI scenario file (defaults used if omitted)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one config key; repeatable")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--schemes", help="comma-separated scheme names")


def cmd_sweep(args) -> int:
    cfg = _load(args)
    res = run_sweep(cfg, args.variable, _values(args.values), workers=args.workers)
    emit_csv(res, args.out, timing=args.timing)
    errors = sum(r.status.startswith("error") for r in res.rows)
    print(f"wrote {len(res)} rows to {args.out}" + (f" ({errors} failed)" if errors else ""))
    return 0


def cmd_single(args) -> int:
    cfg = _load(args)
    seed = args.trial_seed if args.trial_seed is not None else trial_seed(cfg.seed, args.trial)
    streams = TrialStreams.from_seed(seed)
    channels = build_scenario(cfg, streams.channel)
    designs = make_designs(channels, cfg, streams, cfg.schemes)
    out = {"seed": seed, "designs": {k: d.trace.as_dict() for k, d in designs.items()},
           "schemes": {}}
    for name in cfg.schemes:
        r = run_scheme(Scheme(name), channels, cfg, designs[_design_for(Scheme(name))])
        rep = r.report
        out["schemes"][name] = {
            "sum_se": rep.sum_se, "per_su_se": rep.per_su_se.tolist(), "i_pu": rep.i_pu,
            "i_th": cfg.i_th, "tp_used": rep.tp_used, "p_t": cfg.p_t,
            "approx_se": r.approx_se, "power": r.beamformers.p.tolist(), "status": r.status,
        }
    text = json.dumps(out, indent=2, default=float)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_all

    results = run_all(np.random.default_rng(args.seed if args.seed is not None else 0))
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
    failed = sum(not ok for _, ok, _ in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="Monte Carlo sweep over one parameter, written as CSV")
    _add_common(p)
    p.add_argument("--variable", required=True, choices=sorted(SWEEP_VARIABLES))
    p.add_argument("--values", required=True, nargs="+", help="values, comma or space separated")
    p.add_argument("--trials", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true", help="add a wall_time column")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("single", help="one trial with the full BCD trace as JSON")
    _add_common(p)
    p.add_argument("--trial", type=int, default=0, help="trial index under the master seed")
    p.add_argument("--trial-seed", type=int, help="use this trial seed directly")
    p.add_argument("--out", help="JSON output path (stdout if omitted)")
    p.set_defaults(func=cmd_single)

    p = sub.add_parser("selftest", help="run the built-in oracle checks")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
