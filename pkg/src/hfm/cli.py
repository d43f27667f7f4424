"""Command-line entry point.

Every command writes one versioned JSON report (or CSV rows with
``--format csv``). The report embeds the fully resolved configuration, so
re-running it reproduces every non-timing field. Errors are printed to stderr
as a JSON object and mapped to exit codes: 2 config, 3 data, 4 degenerate
attribute.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from hfm import __version__
from hfm.analysis import (
    BENCH_COLUMNS,
    Prop1Inputs,
    bench,
    lambda_advisor,
    lemma1_estimate,
    prop1_base,
    prop1_bound,
    prop1_empirical,
)
from hfm.approx import DEFAULT_M1, ApproxParams, default_m2, extenddist
from hfm.errors import ConfigError, HFMError
from hfm.exact import exact_all_attrs
from hfm.fairness import BaselineConfig, fairness_report
from hfm.ingest import load, load_manifest, load_predictions
from hfm.model import Dataset, LabelChannel, Method
from hfm.synth import random_dataset

REPORT_VERSION = "1.0.0"
COMMANDS = ("exact", "approx", "hfm", "baselines", "bench", "validate-lemma1", "prop1", "advise-params", "stats")
DATASET_COMMANDS = {"exact", "approx", "hfm", "baselines", "bench", "stats"}
TIMING_KEYS = {"wall_time_seconds", "seconds", "elapsed_seconds"}


@dataclass
class RunConfig:
    command: str
    manifest_path: str | None = None
    predictions_path: str | None = None
    perturbed_predictions_paths: list[str] | None = None
    m1: int = DEFAULT_M1
    m2: int | str = "auto"
    seed: int = 0
    workers: int = 3
    channel: str = "true"
    method: str = "approx"
    output: str | None = None
    format: str = "json"
    # synthetic data in place of a manifest
    synthetic_n: int | None = None
    synthetic_n_x: int = 5
    synthetic_cards: list[int] = field(default_factory=lambda: [2, 3])
    synthetic_seed: int = 0
    repeats: int = 1
    # analysis commands
    r1: float | None = None
    r2: float | None = None
    phi: float | None = None
    samples: int = 100_000
    cases: int = 10
    n: int | None = None
    k: int | None = None
    mu: float | None = None
    alpha: float = 1.5
    trials: int = 100
    empirical: bool = False
    variant: str = "statement"

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be json or csv")
        if self.channel not in ("true", "pred"):
            raise ConfigError("channel must be true or pred")
        if self.method not in ("exact", "approx"):
            raise ConfigError("method must be exact or approx")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError("workers must be a positive integer")
        if self.m2 != "auto" and (not isinstance(self.m2, int) or self.m2 < 1):
            raise ConfigError("m2 must be a positive integer or 'auto'")
        if self.command in DATASET_COMMANDS and self.manifest_path is None and self.synthetic_n is None:
            raise ConfigError(f"{self.command} needs --manifest or --synthetic")
        if self.command in ("hfm", "baselines") and self.predictions_path is None and self.synthetic_n is None:
            raise ConfigError(f"{self.command} needs --predictions")
        if self.channel == "pred" and self.predictions_path is None and self.synthetic_n is None:
            raise ConfigError("--channel pred needs --predictions")


def _load_dataset(cfg: RunConfig) -> tuple[Dataset, dict | None]:
    if cfg.synthetic_n is not None:
        ds = random_dataset(cfg.synthetic_n, cfg.synthetic_n_x, tuple(cfg.synthetic_cards), seed=cfg.synthetic_seed)
        return ds, None
    ds, stats = load(cfg.manifest_path, predictions=cfg.predictions_path)
    return ds, stats.to_dict()


def _params(cfg: RunConfig, n: int) -> ApproxParams:
    m2 = default_m2(n) if cfg.m2 == "auto" else cfg.m2
    return ApproxParams(m1=cfg.m1, m2=m2, master_seed=cfg.seed)


def _perturbed(cfg: RunConfig, ds: Dataset):
    if not cfg.perturbed_predictions_paths:
        return None
    return [load_predictions(p, ds.n, ds.n_classes) for p in cfg.perturbed_predictions_paths]


def _distance_rows(rep: dict) -> list[dict]:
    return [
        {"attr": a["attr"], "d_max": a["d_max"], "d_avg": a["d_avg"], "method": rep["method"], "channel": rep["channel"]}
        for a in rep["per_attribute"]
    ]


def _execute(cfg: RunConfig) -> tuple[dict, list[dict]]:
    """Run one command; returns the result document and its CSV rows."""
    command = cfg.command
    if command in DATASET_COMMANDS:
        ds, stats = _load_dataset(cfg)
        if ds.n_a == 0:
            raise ConfigError("no sensitive attribute")
        if cfg.m2 == "auto":
            cfg.m2 = default_m2(ds.n)
        params = _params(cfg, ds.n)
        channel = LabelChannel(cfg.channel)

        if command == "stats":
            if stats is None:
                stats = {"n_instances": ds.n, "n_features_processed": ds.n_x + ds.n_a}
            return stats, [{k: v for k, v in stats.items() if not isinstance(v, (dict, list))}]
        if command == "exact":
            rep = exact_all_attrs(ds, channel, workers=cfg.workers).to_dict()
            return {"distance": rep, "dataset_stats": stats}, _distance_rows(rep)
        if command == "approx":
            rep = extenddist(ds, channel, params, workers=cfg.workers).to_dict()
            return {"distance": rep, "dataset_stats": stats}, _distance_rows(rep)
        if command in ("hfm", "baselines"):
            baseline = BaselineConfig(perturbed=_perturbed(cfg, ds))
            rep = fairness_report(ds, Method(cfg.method), params, baseline, workers=cfg.workers).to_dict()
            rows = [dict(a, method=rep["method"]) for a in rep["per_attribute"]]
            if command == "baselines":
                keep = ("attr", "dp", "eo", "pqp", "dr")
                doc = {"per_attribute": [{k: a[k] for k in keep} for a in rep["per_attribute"]], "dr_avg": rep["dr_avg"]}
                return doc, [{k: a[k] for k in keep} for a in rep["per_attribute"]]
            return {"fairness": rep, "dataset_stats": stats}, rows
        if command == "bench":
            name = "synthetic" if cfg.synthetic_n is not None else Path(cfg.manifest_path).stem
            rows = [asdict(r) for r in bench(ds, params, cfg.repeats, name=name, workers=cfg.workers)]
            return {"rows": rows, "columns": list(BENCH_COLUMNS)}, rows

    if command == "validate-lemma1":
        if cfg.r1 is not None or cfg.r2 is not None or cfg.phi is not None:
            if None in (cfg.r1, cfg.r2, cfg.phi):
                raise ConfigError("--r1, --r2 and --phi go together")
            cases = [(cfg.r1, cfg.r2, cfg.phi)]
        else:
            rng = np.random.default_rng(cfg.seed)
            cases = []
            for _ in range(cfg.cases):
                a, b = rng.uniform(0.05, 1.0, 2)
                cases.append((min(a, b), max(a, b), rng.uniform(0.05, math.pi - 0.05)))
        rows = []
        for i, (r1, r2, phi) in enumerate(cases):
            case = lemma1_estimate(r1, r2, phi, cfg.samples, seed=cfg.seed + i)
            row = case.to_dict()
            row["within_bounds"] = case.lower_bound <= case.closed_form <= case.upper_bound
            row["z_score"] = (case.estimated_p - case.closed_form) / case.sigma if case.sigma > 0 else 0.0
            rows.append(row)
        return {"cases": rows}, rows

    if command == "prop1":
        if cfg.n is None or cfg.k is None:
            raise ConfigError("prop1 needs --n and --k")
        m2 = default_m2(cfg.n) if cfg.m2 == "auto" else cfg.m2
        cfg.m2 = m2
        doc = {}
        if cfg.mu is not None:
            inputs = Prop1Inputs(cfg.n, cfg.k, cfg.mu, cfg.alpha, cfg.m1, m2)
            doc["bound"] = prop1_bound(inputs, cfg.variant)
            doc["base"] = prop1_base(inputs, cfg.variant)
            doc["variant"] = cfg.variant
        if cfg.empirical:
            emp = prop1_empirical(cfg.n, cfg.k, cfg.alpha, cfg.m1, m2, cfg.trials, cfg.seed, cfg.workers)
            doc["empirical"] = emp.to_dict()
        if not doc:
            raise ConfigError("prop1 needs --mu and/or --empirical")
        return doc, [{k: v for k, v in doc.items() if not isinstance(v, dict)}]

    if command == "advise-params":
        n = cfg.n
        if n is None:
            if cfg.manifest_path is None:
                raise ConfigError("advise-params needs --n or --manifest")
            n = load(load_manifest(cfg.manifest_path))[0].n
        if cfg.k is None:
            raise ConfigError("advise-params needs --k (feature dimension minus one)")
        m2 = default_m2(n) if cfg.m2 == "auto" else cfg.m2
        cfg.n, cfg.m2 = n, m2
        adv = lambda_advisor(n, cfg.k, cfg.m1, m2)
        doc = asdict(adv)
        return doc, [doc]

    raise ConfigError(f"unknown command {command!r}")


def run(config: RunConfig) -> tuple[int, dict]:
    """Execute ``config``; returns ``(exit_status, document)``.

    On success the document is the report; on failure it is an error object.
    """
    try:
        config.validate()
        for name in ("manifest_path", "predictions_path"):
            if getattr(config, name):
                setattr(config, name, str(Path(getattr(config, name)).resolve()))
        if config.perturbed_predictions_paths:
            config.perturbed_predictions_paths = [str(Path(p).resolve()) for p in config.perturbed_predictions_paths]
        result, rows = _execute(config)
    except HFMError as exc:
        return exc.exit_status, error_document(exc)
    report = {
        "report_version": REPORT_VERSION,
        "tool": "hfm",
        "tool_version": __version__,
        "command": config.command,
        "config": asdict(config),
        "result": result,
    }
    report["_rows"] = rows
    return 0, report


def error_document(exc: HFMError) -> dict:
    return {
        "report_version": REPORT_VERSION,
        "error": {"code": exc.code, "message": str(exc), "exit_status": exc.exit_status},
    }


def strip_timing(doc):
    """Copy of a report without wall-clock fields."""
    if isinstance(doc, dict):
        return {k: strip_timing(v) for k, v in doc.items() if k not in TIMING_KEYS}
    if isinstance(doc, list):
        return [strip_timing(v) for v in doc]
    return doc


def config_from_report(report: dict) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    return RunConfig(**{k: v for k, v in report["config"].items() if k in known})


def render(report: dict, fmt: str) -> str:
    rows = report.get("_rows", [])
    if fmt == "csv":
        buf = io.StringIO()
        columns = list(dict.fromkeys(k for r in rows for k in r))
        writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({k: "" if r.get(k) is None else r.get(k) for k in columns})
        return buf.getvalue()
    doc = {k: v for k, v in report.items() if k != "_rows"}
    return json.dumps(doc, indent=2, allow_nan=False, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _m2_arg(text: str):
    if text == "auto":
        return "auto"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("m2 must be a positive integer or 'auto'") from None
    if value < 1:
        raise argparse.ArgumentTypeError("m2 must be a positive integer or 'auto'")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hfm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hfm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifest", dest="manifest_path")
    common.add_argument("--predictions", dest="predictions_path")
    common.add_argument("--perturbed", dest="perturbed_predictions_paths", nargs="+", help="one file per attribute")
    common.add_argument("--m1", type=int, default=DEFAULT_M1)
    common.add_argument("--m2", type=_m2_arg, default="auto")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=3)
    common.add_argument("--channel", choices=("true", "pred"), default="true")
    common.add_argument("--method", choices=("exact", "approx"), default="approx")
    common.add_argument("--out", dest="output")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--synthetic", dest="synthetic_n", type=int, help="use a random dataset of this size")
    common.add_argument("--synthetic-n-x", type=int, default=5)
    common.add_argument("--synthetic-cards", type=int, nargs="+", default=[2, 3])
    common.add_argument("--synthetic-seed", type=int, default=0)

    sub.add_parser("exact", parents=[common], help="direct distance computation")
    sub.add_parser("approx", parents=[common], help="projection approximation")
    sub.add_parser("hfm", parents=[common], help="fairness measure from labels and predictions")
    sub.add_parser("baselines", parents=[common], help="DP, EO, PQP and DR")
    sub.add_parser("stats", parents=[common], help="dataset statistics")
    p = sub.add_parser("bench", parents=[common], help="timing table")
    p.add_argument("--repeats", type=int, default=1)

    p = sub.add_parser("validate-lemma1", parents=[common], help="projection-order probability check")
    p.add_argument("--r1", type=float)
    p.add_argument("--r2", type=float)
    p.add_argument("--phi", type=float)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--cases", type=int, default=10)

    p = sub.add_parser("prop1", parents=[common], help="success-probability bound")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--mu", type=float)
    p.add_argument("--alpha", type=float, default=1.5)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--empirical", action="store_true")
    p.add_argument("--variant", choices=("statement", "proof"), default="statement")

    p = sub.add_parser("advise-params", parents=[common], help="hyper-parameter magnitude")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    return parser


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    known = {f.name for f in fields(RunConfig)}
    config = RunConfig(**{k: v for k, v in args.items() if k in known})
    status, doc = run(config)
    if status != 0:
        sys.stderr.write(json.dumps(doc) + "\n")
        return status
    text = render(doc, config.format)
    if config.output and config.output != "-":
        Path(config.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
