"""Command-line front-end.

Subcommands:

* ``kernel``   build a Gram matrix from a dataset manifest, write CSV + JSON sidecar
* ``ktst``     kernel two-sample test -> TestReport JSON
* ``cbt``      classification-based test -> TestReport JSON
* ``simulate`` star-graph error experiment -> JSON + table CSV

Every report embeds the fully resolved configuration, so re-running
with ``--config <emitted report>`` reproduces it byte for byte. A
``--config`` JSON file supplies defaults; explicit flags win. Exit
codes: 0 success, 2 invalid input or configuration, 1 anything else.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .cbt import CbtConfig, cbt
from .embeddings import KernelMatrix
from .errors import ValidationError
from .graphs import load_dataset
from .ktst import KtstConfig, ktst
from .pipeline import RepresentationConfig, gram_from_dataset
from .simulation import SimConfig, paper_scale, run_error_experiment

_REP_CHOICES = ("dce", "dre", "wl", "sp", "precomputed")

_DEFAULTS = {
    "kernel": {
        "input": None, "rep": "dce", "h": 3, "threshold": None, "sigma": "auto",
        "normalize": False, "prototypes": None, "out": "K.csv",
    },
    "ktst": {
        "input": None, "rep": "dce", "h": 3, "threshold": None, "sigma": "auto",
        "normalize": False, "prototypes": None, "permutations": 10000,
        "seed": 0, "convention": "geq", "smooth": False, "theta": None,
        "workers": 1, "out": None,
    },
    "cbt": {
        "input": None, "rep": "dce", "h": 3, "threshold": None, "sigma": "auto",
        "normalize": False, "prototypes": None, "permutations": 10000,
        "reps": 100, "folds": 5, "c_grid": None, "seed": 0,
        "convention": "geq", "smooth": False, "theta": None, "workers": 1,
        "out": None,
    },
    "simulate": {
        "d": 5, "deltas": None, "m": 20, "n": 20, "repetitions": 500,
        "permutations": 1000, "thetas": None, "seed": 0, "folds": 5,
        "c_grid": None, "convention": "greater", "smooth": False,
        "tests": "ktst,cbt", "cbt_repetitions": 1, "covariance": None,
        "workers": 1, "paper_scale": False, "out": None,
    },
}


def _add_common_kernel_flags(p):
    p.add_argument("--input", help="dataset manifest JSON (or kernel CSV for --rep precomputed)")
    p.add_argument("--rep", choices=_REP_CHOICES, help="graph representation")
    p.add_argument("--h", type=int, help="WL iteration count")
    p.add_argument("--threshold", type=float, help="edge weight threshold for wl/sp")
    p.add_argument("--sigma", help="Gaussian bandwidth: 'auto' (median) or a number")
    p.add_argument("--normalize", action="store_true", default=None,
                   help="cosine-normalize structural kernels")


def _add_test_flags(p):
    p.add_argument("--permutations", type=int, help="null sample size M")
    p.add_argument("--theta", type=float, help="rejection threshold (summary only)")
    p.add_argument("--convention", choices=("geq", "greater"),
                   help="p-value tie handling")
    p.add_argument("--smooth", action="store_true", default=None,
                   help="use the (b+1)/(M+1) p-value estimate")
    p.add_argument("--seed", type=int, help="root RNG seed")
    p.add_argument("--workers", type=int, help="worker threads (results unchanged)")
    p.add_argument("--out", help="output path")
    p.add_argument("--config", help="JSON file of defaults; flags override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphtst",
        description="Two-sample hypothesis tests for populations of graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kernel", help="precompute a Gram matrix")
    _add_common_kernel_flags(p)
    p.add_argument("--out", help="kernel CSV path (JSON sidecar alongside)")
    p.add_argument("--config", help="JSON file of defaults; flags override")

    p = sub.add_parser("ktst", help="kernel two-sample test")
    _add_common_kernel_flags(p)
    _add_test_flags(p)

    p = sub.add_parser("cbt", help="classification-based two-sample test")
    _add_common_kernel_flags(p)
    p.add_argument("--reps", type=int, help="accuracy repetitions R")
    p.add_argument("--folds", type=int, help="cross-validation folds")
    _add_test_flags(p)

    p = sub.add_parser("simulate", help="star-graph Type I/II error experiment")
    p.add_argument("--d", type=int, help="edges per star graph")
    p.add_argument("--delta", type=float, action="append", dest="delta",
                   help="class-b mean shift; repeat for several values")
    p.add_argument("--m", type=int, help="class-a sample size")
    p.add_argument("--n", type=int, help="class-b sample size")
    p.add_argument("--reps", type=int, help="simulation repetitions")
    p.add_argument("--permutations", type=int, help="null sample size M")
    p.add_argument("--theta", type=float, action="append", dest="theta",
                   help="rejection threshold; repeat for several values")
    p.add_argument("--tests", help="comma list from {ktst,cbt}")
    p.add_argument("--convention", choices=("geq", "greater"))
    p.add_argument("--smooth", action="store_true", default=None)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--paper-scale", action="store_true", default=None,
                   dest="paper_scale", help="1000 repetitions, M=10000")
    p.add_argument("--out", help="output stem or JSON path (CSV alongside)")
    p.add_argument("--config", help="JSON file of defaults; flags override")
    return parser


def _load_config_file(path) -> dict:
    try:
        loaded = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config file {path} is not valid JSON: {exc}")
    if not isinstance(loaded, dict):
        raise ValidationError(f"config file {path} must hold a JSON object")
    # An emitted report can be fed straight back in.
    if "config" in loaded and isinstance(loaded["config"], dict):
        loaded = loaded["config"]
    return loaded


def _resolve(command: str, args: argparse.Namespace) -> dict:
    resolved = dict(_DEFAULTS[command])
    if getattr(args, "config", None):
        file_cfg = _load_config_file(args.config)
        unknown = sorted(set(file_cfg) - set(resolved))
        if unknown:
            raise ValidationError(f"unknown config keys for {command}: {unknown}")
        resolved.update(file_cfg)
    for flag, value in vars(args).items():
        if flag in ("command", "config") or value is None:
            continue
        if command == "simulate" and flag == "delta":
            resolved["deltas"] = value
        elif command == "simulate" and flag == "theta":
            resolved["thetas"] = value
        elif command == "simulate" and flag == "reps":
            resolved["repetitions"] = value
        else:
            resolved[flag] = value
    return resolved


def _parse_sigma(raw):
    if raw is None or raw == "auto":
        return None
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise ValidationError(f"--sigma must be 'auto' or a number, got {raw!r}")
    return value


def _representation_config(resolved) -> RepresentationConfig:
    prototypes = resolved.get("prototypes")
    return RepresentationConfig(
        method=resolved["rep"],
        wl_iterations=int(resolved["h"]),
        edge_threshold=resolved["threshold"],
        normalize=bool(resolved["normalize"]),
        sigma=_parse_sigma(resolved["sigma"]),
        prototypes=None if prototypes is None else tuple(prototypes),
    )


def _kernel_inputs(resolved):
    """Gram matrix + labels from either a manifest or a precomputed CSV."""
    if not resolved.get("input"):
        raise ValidationError("--input is required")
    if resolved["rep"] == "precomputed":
        csv_path = Path(resolved["input"])
        sidecar = csv_path.with_suffix(".json")
        if not csv_path.exists():
            raise ValidationError(f"kernel CSV not found: {csv_path}")
        if not sidecar.exists():
            raise ValidationError(
                f"kernel sidecar not found: {sidecar} (needed for labels)"
            )
        values = np.loadtxt(csv_path, delimiter=",", ndmin=2)
        meta = json.loads(sidecar.read_text(encoding="utf-8"))
        if "labels" not in meta:
            raise ValidationError(f"kernel sidecar {sidecar} lacks 'labels'")
        provenance = dict(meta.get("provenance", {}))
        provenance.setdefault("kernel", "precomputed")
        kernel = KernelMatrix(values=values, provenance=provenance)
        kernel.check_psd()
        return kernel, tuple(meta["labels"])
    dataset = load_dataset(resolved["input"])
    kernel = gram_from_dataset(dataset, _representation_config(resolved))
    return kernel, dataset.labels


def _write_json(path, payload) -> None:
    Path(path).write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def _write_null_csv(path, report) -> None:
    lines = ["null_value"]
    lines += [repr(float(v)) for v in report.null_sample]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _emit_test_report(report, resolved, extra_csv_rows=None) -> None:
    payload = report.to_json_dict()
    payload["config"] = resolved
    summary = (
        f"{payload['test']}: statistic={report.statistic:.6g} "
        f"p_value={report.p_value:.6g} (m={report.m}, n={report.n}, "
        f"M={report.permutations})"
    )
    theta = resolved.get("theta")
    if theta is not None:
        decision = "reject" if report.p_value < theta else "no rejection"
        summary += f"; {decision} at theta={theta:g}"
    out = resolved.get("out")
    if out:
        _write_json(out, payload)
        stem = Path(out)
        _write_null_csv(stem.with_name(stem.stem + "_null.csv"), report)
        if extra_csv_rows is not None:
            rep_path = stem.with_name(stem.stem + "_reps.csv")
            Path(rep_path).write_text(extra_csv_rows, encoding="utf-8")
        print(summary)
    else:
        print(summary, file=sys.stderr)
        print(json.dumps(payload, sort_keys=True, indent=2))


def cmd_kernel(resolved) -> int:
    if resolved["rep"] == "precomputed":
        raise ValidationError("the kernel subcommand needs a dataset, not --rep precomputed")
    kernel, labels = _kernel_inputs(resolved)
    out = Path(resolved["out"])
    lines = [",".join(repr(float(v)) for v in row) for row in kernel.values]
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    sidecar = {
        "labels": list(labels),
        "provenance": kernel.provenance,
        "shape": [kernel.size, kernel.size],
        "config": resolved,
    }
    _write_json(out.with_suffix(".json"), sidecar)
    print(f"wrote {out} and {out.with_suffix('.json')} ({kernel.size} graphs)")
    return 0


def cmd_ktst(resolved) -> int:
    kernel, labels = _kernel_inputs(resolved)
    config = KtstConfig(
        permutations=int(resolved["permutations"]),
        seed=int(resolved["seed"]),
        convention=resolved["convention"],
        smooth=bool(resolved["smooth"]),
    )
    report = ktst(kernel, config, labels=labels)
    _emit_test_report(report, resolved)
    return 0


def cmd_cbt(resolved) -> int:
    kernel, labels = _kernel_inputs(resolved)
    kwargs = {}
    if resolved.get("c_grid") is not None:
        kwargs["c_grid"] = tuple(float(c) for c in resolved["c_grid"])
    config = CbtConfig(
        folds=int(resolved["folds"]),
        repetitions=int(resolved["reps"]),
        permutations=int(resolved["permutations"]),
        seed=int(resolved["seed"]),
        convention=resolved["convention"],
        smooth=bool(resolved["smooth"]),
        **kwargs,
    )
    report = cbt(kernel, config, labels=labels)
    rep_lines = ["repetition,acc_cv,p_value"]
    for r in range(report.repetitions):
        rep_lines.append(
            f"{r},{report.acc_cv_all[r]!r},{report.p_values_per_repetition[r]!r}"
        )
    _emit_test_report(report, resolved, extra_csv_rows="\n".join(rep_lines) + "\n")
    return 0


def cmd_simulate(resolved) -> int:
    kwargs = {}
    if resolved.get("c_grid") is not None:
        kwargs["c_grid"] = tuple(float(c) for c in resolved["c_grid"])
    tests = resolved["tests"]
    if isinstance(tests, str):
        tests = tuple(t.strip() for t in tests.split(",") if t.strip())
    else:
        tests = tuple(tests)
    deltas = resolved["deltas"]
    thetas = resolved["thetas"]
    covariance = resolved.get("covariance")
    config = SimConfig(
        d=int(resolved["d"]),
        deltas=tuple(float(v) for v in deltas) if deltas is not None
        else SimConfig.deltas,
        m=int(resolved["m"]),
        n=int(resolved["n"]),
        repetitions=int(resolved["repetitions"]),
        permutations=int(resolved["permutations"]),
        thetas=tuple(float(v) for v in thetas) if thetas is not None
        else SimConfig.thetas,
        seed=int(resolved["seed"]),
        folds=int(resolved["folds"]),
        convention=resolved["convention"],
        smooth=bool(resolved["smooth"]),
        tests=tests,
        cbt_repetitions=int(resolved["cbt_repetitions"]),
        covariance=None if covariance is None
        else tuple(tuple(float(v) for v in row) for row in covariance),
        workers=int(resolved["workers"]),
        **kwargs,
    )
    if resolved["paper_scale"]:
        config = paper_scale(config)
    report = run_error_experiment(config)
    print(report.to_csv_text(), end="")
    out = resolved.get("out")
    if out:
        stem = Path(out)
        json_path = stem if stem.suffix == ".json" else stem.with_suffix(".json")
        report.save(json_path=json_path, csv_path=json_path.with_suffix(".csv"))
        print(f"wrote {json_path} and {json_path.with_suffix('.csv')}",
              file=sys.stderr)
    return 0


_COMMANDS = {
    "kernel": cmd_kernel,
    "ktst": cmd_ktst,
    "cbt": cmd_cbt,
    "simulate": cmd_simulate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        resolved = _resolve(args.command, args)
        return _COMMANDS[args.command](resolved)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # I/O, convergence, ... -> runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
