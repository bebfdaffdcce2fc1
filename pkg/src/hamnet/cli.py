"""Command-line entry point: ``hamnet pretrain | run | ensemble | sweep``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ScenarioConfig
from .dqn import pretrain
from .harness import density_sweep, ensemble, run_scenario, write_summary


def _load(path) -> ScenarioConfig:
    return ScenarioConfig.load(path)


def cmd_pretrain(args) -> int:
    cfg = _load(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    pretrain(cfg, rng=np.random.default_rng(seed), out_path=args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_run(args) -> int:
    cfg = _load(args.config)
    res = run_scenario(cfg, weights=args.weights, seed=args.seed, out_dir=args.out_dir)
    last = res.records[-1]
    print(f"step {last.step}: connectivity {last.connectivity_pct:.1f}%  "
          f"H {last.total_H:.2f}  energy {last.energy:.2f}  degree {last.mean_degree:.2f}")
    return 0


def cmd_ensemble(args) -> int:
    cfg = _load(args.config)
    summary = ensemble(cfg, args.runs, weights=args.weights, out_dir=args.out_dir)
    print(json.dumps(summary.means, indent=2, sort_keys=True))
    return 0


def cmd_sweep(args) -> int:
    cfg = _load(args.config)
    rhos = [float(v) for v in args.rho.split(",") if v.strip()]
    summaries = density_sweep(cfg, rhos, args.runs, weights=args.weights, out_dir=args.out_dir)
    if args.out_dir is not None:
        write_summary({f"rho={r:g}": s for r, s in zip(rhos, summaries)},
                      Path(args.out_dir) / "sweep.json")
    for rho, s in zip(rhos, summaries):
        m = s.means
        print(f"rho={rho:g}: connectivity {m['connectivity_pct']:.1f}%  "
              f"radius {m['mean_radius']:.2f}  degree {m['mean_degree']:.2f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hamnet", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("pretrain", help="train the shared network and write a weights file")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_pretrain)

    s = sub.add_parser("run", help="one simulation")
    s.add_argument("--config", required=True)
    s.add_argument("--weights")
    s.add_argument("--seed", type=int)
    s.add_argument("--out-dir")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("ensemble", help="independent runs with seeds seed, seed+1, ...")
    s.add_argument("--config", required=True)
    s.add_argument("--runs", type=int, default=20)
    s.add_argument("--weights")
    s.add_argument("--out-dir")
    s.set_defaults(func=cmd_ensemble)

    s = sub.add_parser("sweep", help="one ensemble per density")
    s.add_argument("--config", required=True)
    s.add_argument("--rho", required=True, help="comma-separated densities")
    s.add_argument("--runs", type=int, default=20)
    s.add_argument("--weights")
    s.add_argument("--out-dir")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError) as exc:
        print(f"hamnet: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
