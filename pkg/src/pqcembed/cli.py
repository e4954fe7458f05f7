"""Command-line experiment runner.

Subcommands:

* ``run``    -- train one configuration and write trace, manifest, figures
* ``verify`` -- execute an analytic verification suite
* ``sweep``  -- repeat one configuration across depolarization strengths

Flags override values from an optional JSON config file (``--config``); all
effective values are echoed into the run manifest.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import metadata
from pathlib import Path

import numpy as np

from . import encoding, report, verify
from .model import CostKind, build_iris_ansatz, build_xor_ansatz
from .training import AdamConfig, EncodingMode, NoiseConfig, TrainTask, train

EXPERIMENT_DEFAULTS = {
    "xor": {"cost": "cnot", "encoding": "superposition", "lr": 1e-3, "iters": 5000},
    "iris": {"cost": "cnot", "encoding": "mixed", "lr": 1e-2, "iters": 400},
    "custom": {"cost": "cnot", "encoding": "mixed", "lr": 1e-2, "iters": 1000},
}

CONFIG_KEYS = ("cost", "encoding", "lr", "iters", "noise", "noise_insertion",
               "seed", "dataset", "header", "out", "threads", "samples", "threshold")


class CliError(Exception):
    pass


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("experiment", choices=("xor", "iris", "custom"))
    p.add_argument("--cost", choices=("cnot", "fredkin"), default=None)
    p.add_argument("--encoding", choices=("perpoint", "mixed", "superposition"), default=None)
    p.add_argument("--lr", type=float, default=None, help="Adam learning rate")
    p.add_argument("--iters", type=int, default=None, help="maximum training iterations")
    p.add_argument("--noise", type=float, default=None,
                   help="depolarization lambda (1.0 disables the channel)")
    p.add_argument("--noise-insertion", choices=("gate", "readout"), default=None)
    p.add_argument("--seed", type=int, default=None, help="run seed (required)")
    p.add_argument("--dataset", default=None, help="CSV path for the custom experiment")
    p.add_argument("--header", action="store_true", default=None,
                   help="the dataset CSV starts with a header row")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--threads", type=int, default=None,
                   help="parallel workers for sweep entries")
    p.add_argument("--samples", type=int, default=None,
                   help="per-iteration sample count for the sampled-ensemble mode")
    p.add_argument("--threshold", type=float, default=None, help="early-stop cost threshold")
    p.add_argument("--config", default=None, help="JSON config file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pqcembed",
                                     description="Cost-embedded PQC training experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="train one configuration")
    _add_run_flags(run_p)

    verify_p = sub.add_parser("verify", help="run an analytic verification suite")
    verify_p.add_argument("suite", choices=verify.SUITE_NAMES + ("all",))

    sweep_p = sub.add_parser("sweep", help="train across depolarization strengths")
    _add_run_flags(sweep_p)
    sweep_p.add_argument("--lambdas", default="1.0,0.999,0.99",
                         help="comma-separated depolarization strengths")
    return parser


def _resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(EXPERIMENT_DEFAULTS[args.experiment])
    cfg.update({"experiment": args.experiment, "noise": None, "noise_insertion": "gate",
                "seed": None, "dataset": None, "header": False, "out": None,
                "threads": os.cpu_count() or 1, "samples": 0, "threshold": None})
    if args.config is not None:
        path = Path(args.config)
        if not path.exists():
            raise CliError(f"config file not found: {path}")
        loaded = json.loads(path.read_text())
        unknown = set(loaded) - set(CONFIG_KEYS)
        if unknown:
            raise CliError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if cfg["seed"] is None:
        raise CliError("--seed is required for reproducible runs")
    if cfg["out"] is None:
        cfg["out"] = f"runs/{args.experiment}"
    return cfg


def _load_experiment(cfg: dict):
    """Returns (bare ansatz, train split, test split) for the configuration."""
    experiment = cfg["experiment"]
    rng = np.random.default_rng(cfg["seed"])
    if experiment == "xor":
        ds = encoding.xor_dataset()
        return build_xor_ansatz(), ds, ds
    if experiment == "iris":
        full = encoding.iris_dataset(classes=(1, 2))
    else:
        if not cfg["dataset"]:
            raise CliError("custom experiment needs --dataset PATH")
        path = Path(cfg["dataset"])
        if not path.exists():
            raise CliError(f"dataset file not found: {path}")
        full = encoding.load_csv(path, header=cfg["header"])
        if len(full.class_set) != 2:
            raise CliError(f"custom dataset must have 2 classes, found {full.class_set}")
    train_raw, test_raw = encoding.train_test_split(full, 0.3, rng)
    if encoding.is_digital(full):
        train_ds, test_ds = train_raw, test_raw
    else:
        scaler = encoding.FeatureScaler().fit(train_raw)
        train_ds, test_ds = scaler.transform(train_raw), scaler.transform(test_raw)
    n_index = (encoding.index_width(len(train_ds))
               if cfg["encoding"] == "superposition" else 0)
    if full.feature_count == 4:
        circuit = build_iris_ansatz(num_index_qubits=n_index)
    elif full.feature_count == 2:
        circuit = build_xor_ansatz(num_index_qubits=n_index)
    else:
        raise CliError(f"supported feature counts are 2 and 4, got {full.feature_count}")
    return circuit, train_ds, test_ds


def _build_task(cfg: dict, lam: float | None = None) -> TrainTask:
    circuit, train_ds, test_ds = _load_experiment(cfg)
    lam = cfg["noise"] if lam is None else lam
    noise = None
    if lam is not None:
        noise = NoiseConfig(enabled=True, lam=float(lam), insertion=cfg["noise_insertion"])
    return TrainTask(
        circuit=circuit,
        train_data=train_ds,
        test_data=test_ds,
        cost_kind=CostKind(cfg["cost"]),
        mode=EncodingMode(cfg["encoding"]),
        adam=AdamConfig(learning_rate=cfg["lr"], max_iterations=cfg["iters"],
                        cost_threshold=cfg["threshold"]),
        noise=noise,
        seed=cfg["seed"],
        sample_size=cfg["samples"],
    )


def _manifest_payload(cfg: dict, trace, extra: dict | None = None) -> dict:
    payload = {
        "package": "pqcembed",
        "version": metadata.version("pqcembed"),
        "config": {k: cfg[k] for k in ("experiment",) + CONFIG_KEYS},
        "final": {
            "iterations": trace.iterations[-1],
            "cost": trace.final_cost,
            "mse": trace.mse[-1],
            "train_accuracy": trace.train_accuracy[-1],
            "test_accuracy": trace.test_accuracy[-1],
            "params": [float(v) for v in trace.final_params],
        },
    }
    if extra:
        payload.update(extra)
    return payload


def _summary_line(trace) -> str:
    return (f"final: cost={trace.final_cost:.6f} mse={trace.mse[-1]:.6f} "
            f"train_acc={trace.train_accuracy[-1]:.4f} test_acc={trace.test_accuracy[-1]:.4f} "
            f"iterations={trace.iterations[-1]}")


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    task = _build_task(cfg)
    trace = train(task)
    outdir = Path(cfg["out"])
    outdir.mkdir(parents=True, exist_ok=True)
    report.write_trace_csv(trace, outdir / "trace.csv")
    figures = report.save_training_figures(
        trace, outdir / "figures",
        f"{cfg['experiment']} / {cfg['cost']} cost / {cfg['encoding']} encoding")
    report.write_manifest(
        _manifest_payload(cfg, trace,
                          {"trace": "trace.csv",
                           "figures": [str(p.relative_to(outdir)) for p in figures]}),
        outdir / "manifest.json")
    print(_summary_line(trace))
    print(f"artifacts written to {outdir}")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    names = verify.SUITE_NAMES if args.suite == "all" else (args.suite,)
    ok = True
    for name in names:
        print(f"[{name}]")
        for res in verify.run_suite(name):
            print(" ", res.line())
            ok = ok and res.passed
    return 0 if ok else 1


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    try:
        lambdas = [float(v) for v in args.lambdas.split(",") if v]
    except ValueError as exc:
        raise CliError(f"bad --lambdas value: {args.lambdas}") from exc
    if not lambdas or any(not 0 <= lam <= 1 for lam in lambdas):
        raise CliError("sweep lambdas must lie in [0, 1]")
    outdir = Path(cfg["out"])
    outdir.mkdir(parents=True, exist_ok=True)

    def one(lam: float):
        return lam, train(_build_task(cfg, lam=lam))

    with ThreadPoolExecutor(max_workers=max(1, min(cfg["threads"], len(lambdas)))) as pool:
        results = dict(pool.map(one, lambdas))

    rows = []
    for lam in lambdas:
        trace = results[lam]
        sub = outdir / f"lambda-{lam}"
        sub.mkdir(parents=True, exist_ok=True)
        report.write_trace_csv(trace, sub / "trace.csv")
        lam_cfg = dict(cfg, noise=lam)
        report.write_manifest(_manifest_payload(lam_cfg, trace, {"trace": "trace.csv"}),
                              sub / "manifest.json")
        rows.append((lam, trace.final_cost, trace.test_accuracy[-1]))
    report.write_sweep_csv(rows, outdir / "sweep.csv")
    report.save_sweep_figure(results, outdir,
                             f"{cfg['experiment']} / {cfg['cost']} cost under depolarization")
    print(f"{'lambda':>8}  {'final_cost':>12}  {'final_test_acc':>14}")
    for lam, cost, acc in rows:
        print(f"{lam:>8}  {cost:>12.6f}  {acc:>14.4f}")
    print(f"artifacts written to {outdir}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": cmd_run, "verify": cmd_verify, "sweep": cmd_sweep}
    try:
        return handlers[args.command](args)
    except (CliError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
