"""Command-line front end.

One subcommand per experiment; every run resolves its config as
subcommand defaults, then the optional JSON file, then explicit flags
(flag wins).  Exit codes: 0 done, 2 config problem, 3 I/O problem.
"""

from __future__ import annotations

import argparse
import sys

from . import harness

_DEFAULTS = {
    "z2": {"experiment": "Z2Pipeline", "n": 2000, "lambda": 1.5, "T": 15,
           "trials": 20, "seed": 1},
    "sparse": {"experiment": "SparsePipeline", "n": 4000, "lambda": 1.0,
               "k": 20, "T": 10, "trials": 20, "seed": 1,
               "init": "independent"},
    "se-scan": {"experiment": "SeScan", "seed": 1, "quantity": "fixed-point"},
    "kappa-scan": {"experiment": "KappaScan", "seed": 1, "quantity": "kappa"},
    "decomp-audit": {"experiment": "DecompAudit", "n": 2000, "lambda": 1.5,
                     "T": 10, "trials": 20, "seed": 1},
    "spectral": {"experiment": "SpectralCorrelation", "n": 2000,
                 "lambda": 1.5, "trials": 20, "seed": 1},
}


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON config file; flags override it")
    sub.add_argument("--seed", type=int, help="master seed (64-bit)")
    sub.add_argument("--out", help="CSV output path")
    sub.add_argument("--trials", type=int, help="number of Monte Carlo trials")
    sub.add_argument("--n", type=int, help="problem dimension")
    sub.add_argument("--lambda", type=float, dest="lam", help="signal strength")
    sub.add_argument("--k", type=int, help="signal sparsity")
    sub.add_argument("--T", type=int, help="AMP iterations")
    sub.add_argument("--c-tau", type=float, help="soft-threshold constant")
    sub.add_argument("--s-power", type=int, help="power-iteration steps")
    sub.add_argument("--p-split", type=float, help="split inclusion probability")
    sub.add_argument("--n-rounds", type=int, help="split rounds")
    sub.add_argument("--init", help="sparse init: independent | split")
    sub.add_argument("--quantity", help="scan quantity selector")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spiked-amp",
        description="Monte Carlo experiments for spiked-matrix AMP",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for name in _DEFAULTS:
        _add_common(subs.add_parser(name))
    return parser


_OVERRIDE_KEYS = {
    "seed": "seed",
    "trials": "trials",
    "n": "n",
    "lam": "lambda",
    "k": "k",
    "T": "T",
    "c_tau": "c_tau",
    "s_power": "s_power",
    "p_split": "p_split",
    "n_rounds": "N_rounds",
    "init": "init",
    "quantity": "quantity",
    "out": "output_path",
}


def _resolve_config(args: argparse.Namespace) -> harness.ExperimentConfig:
    data = dict(_DEFAULTS[args.command])
    if args.config:
        file_data = harness.load_config(args.config)
        exp = file_data.get("experiment")
        if exp is not None and exp != data["experiment"]:
            raise harness.ConfigError(
                f"config file names experiment {exp!r} but the "
                f"{args.command!r} subcommand expects {data['experiment']!r}"
            )
        data.update(file_data)
    overrides = {
        json_key: getattr(args, attr)
        for attr, json_key in _OVERRIDE_KEYS.items()
        if getattr(args, attr, None) is not None
    }
    return harness.build_config(data, overrides)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _resolve_config(args)
    except harness.ConfigError as exc:
        print(f"[config] {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"[io] {exc}", file=sys.stderr)
        return 3

    print(f"[run] {config.experiment} trials={config.trials} seed={config.seed}")
    try:
        if config.experiment in ("SeScan", "KappaScan"):
            rows: list = harness.run_scan(config)
            n_fail = sum(1 for r in rows if not r.pass_)
            print(f"[scan] rows={len(rows)} failing={n_fail}")
            row_type: type = harness.ScanRow
        elif config.experiment == "DecompAudit":
            rows = harness.run_decomp_rows(config)
            print(f"[audit] rows={len(rows)}")
            row_type = harness.DecompRow
        else:
            records = harness.run_experiment(config)
            for s in harness.aggregate(records):
                print(
                    f"[summary] t={s.t} {s.metric_name}: median={s.median:.6g} "
                    f"mean={s.mean:.6g} q10={s.q10:.6g} q90={s.q90:.6g}"
                )
            rows = records
            row_type = harness.TrialRecord
        if config.output_path:
            harness.emit_csv(rows, config.output_path, row_type=row_type)
            print(f"[done] wrote {len(rows)} rows to {config.output_path}")
        else:
            print(f"[done] {len(rows)} rows (no --out given, nothing written)")
    except harness.ConfigError as exc:
        print(f"[config] {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"[io] {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
