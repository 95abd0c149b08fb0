"""Command line front end.

    distorted-premiums premium  --distortion '{"kind":"cte","alpha":0.8}' --loss loss.json
    distorted-premiums verify   --distortion d.json --loss l.json --dual --trials 10000 --seed 1
    distorted-premiums reserve  --distortion d.json --age 50 --horizon 60 [--table t.csv]
    distorted-premiums distance --distortion d.json --loss l.json
    distorted-premiums distort  --distortion d.json --loss l.json --grid 801

Specs are JSON documents given inline or as a file path; a loss given as a
``.csv`` path is read as empirical samples, one value per line.  Exit codes:
0 success, 1 invalid input, 2 a cross-check exceeded its tolerance.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import errors
from .actuarial import LifeTable, bundled_table, reserve_curves
from .distances import distance_report, figure_data
from .distortion import distortion_from_spec
from .dual import sup_oracle
from .losses import DiscreteLoss, EmpiricalLoss, loss_from_spec
from .premium import premium_report, rel_gap

EXIT_OK, EXIT_INVALID, EXIT_TOLERANCE = 0, 1, 2

# verify tolerances: (pair, limit, relative?)
CHECKS = (
    ("direct", "inf_rep", 1e-6),
    ("direct", "kusuoka", 1e-6),
    ("direct", "comonotone", 1e-4),
)


@dataclass
class RunConfig:
    subcommand: str
    distortion: str
    loss: str | None = None
    table: str | None = None
    age: int = 50
    horizon: int = 0
    rate: float = 0.0
    grid: int | None = None
    seed: int = 0
    trials: int = 10_000
    dual: bool = False
    out: str | None = None
    format: str = "text"


def _load_doc(arg: str) -> dict:
    text = arg.strip()
    if not text.startswith("{"):
        path = Path(arg)
        if not path.exists():
            raise errors.DistortionError(f"spec file {arg} does not exist")
        text = path.read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise errors.DistortionError(f"malformed spec: {exc}") from None
    if not isinstance(doc, dict):
        raise errors.DistortionError("spec must be a JSON object")
    return doc


def _load_loss(arg: str):
    if not arg.strip().startswith("{") and arg.endswith(".csv"):
        if not Path(arg).exists():
            raise errors.DistortionError(f"sample file {arg} does not exist")
        return EmpiricalLoss.from_csv(arg)
    base = None if arg.strip().startswith("{") else Path(arg).parent
    return loss_from_spec(_load_doc(arg), base)


def _fmt(x) -> float | int | str | bool | None:
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if np.isfinite(x) else repr(x)
    return x


def _emit_record(record: dict, fmt: str) -> str:
    record = {k: _fmt(v) if not isinstance(v, list) else [_fmt(i) for i in v]
              for k, v in record.items()}
    if fmt == "csv":
        return "key,value\n" + "".join(f"{k},{record[k]}\n" for k in sorted(record))
    return json.dumps(record, sort_keys=True, indent=2) + "\n"


def _emit_columns(cols: dict, fmt: str) -> str:
    keys = list(cols)
    if fmt == "csv":
        rows = [",".join(keys)]
        for vals in zip(*(cols[k] for k in keys)):
            rows.append(",".join(repr(float(v)) for v in vals))
        return "\n".join(rows) + "\n"
    return json.dumps({k: [float(v) for v in cols[k]] for k in keys}, sort_keys=True) + "\n"


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute one subcommand; returns (exit status, emitted text)."""
    sigma = distortion_from_spec(_load_doc(cfg.distortion))
    if cfg.subcommand == "reserve":
        table = LifeTable.from_csv(cfg.table) if cfg.table else bundled_table()
        curve = reserve_curves(sigma, table, cfg.age, cfg.horizon, cfg.rate)
        if cfg.format == "csv":
            return EXIT_OK, curve.to_csv()
        return EXIT_OK, _emit_columns({"age": curve.ages, "net": curve.net,
                                       "distorted_probs": curve.distorted_probs,
                                       "distorted_outcomes": curve.distorted_outcomes}, "text")
    if cfg.loss is None:
        raise errors.DistortionError(f"{cfg.subcommand} needs --loss")
    loss = _load_loss(cfg.loss)
    if cfg.subcommand == "premium":
        rep = premium_report(sigma, loss, cfg.grid or 100_000)
        return EXIT_OK, _emit_record(rep.as_dict(), cfg.format)
    if cfg.subcommand == "distance":
        return EXIT_OK, _emit_record(distance_report(sigma, loss).as_dict(), cfg.format)
    if cfg.subcommand == "distort":
        return EXIT_OK, _emit_columns(figure_data(sigma, loss, cfg.grid or 801), "csv"
                                      if cfg.format == "csv" else "text")
    if cfg.subcommand == "verify":
        return _verify(cfg, sigma, loss)
    raise errors.DistortionError(f"unknown subcommand {cfg.subcommand!r}")


def _verify(cfg: RunConfig, sigma, loss) -> tuple[int, str]:
    rep = premium_report(sigma, loss, cfg.grid or 100_000)
    record = rep.as_dict()
    failures = []
    for a, b, tol in CHECKS:
        gap = rel_gap(record[a], record[b])
        record[f"gap_{a}_{b}"] = gap
        if not gap <= tol:
            failures.append(f"{a} vs {b}: relative gap {gap:.3e} exceeds {tol:g}")
    if not abs(rep.zero_gap) <= 1e-6:
        failures.append(f"zero_gap: residual {rep.zero_gap:.3e} exceeds 1e-06")
    if cfg.dual:
        if not isinstance(loss, DiscreteLoss):
            raise errors.UnsupportedError("--dual needs a discrete or empirical loss")
        res = sup_oracle(sigma, loss, cfg.trials, cfg.seed)
        record.update(dual_candidate=res.candidate, dual_best=res.best,
                      dual_trials=res.trials, dual_accepted=res.accepted,
                      dual_binding=res.binding)
        over = res.best - res.candidate
        if over > 1e-9:
            failures.append(f"dual best vs candidate: exceeds by {over:.3e}")
        gap = abs(res.candidate - rep.direct)
        if gap > 1e-9:
            failures.append(f"dual candidate vs direct: gap {gap:.3e} exceeds 1e-09")
    record["failures"] = failures
    return (EXIT_TOLERANCE if failures else EXIT_OK), _emit_record(record, cfg.format)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="distorted-premiums",
                                     description="Distorted premiums, reserves and cross-checks.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in ("premium", "reserve", "verify", "distance", "distort"):
        p = sub.add_parser(name)
        p.add_argument("--distortion", required=True, help="JSON spec or path")
        p.add_argument("--loss", help="JSON spec, JSON path, or samples .csv")
        p.add_argument("--table", help="life table CSV with header age,qx")
        p.add_argument("--age", type=int, default=50)
        p.add_argument("--horizon", type=int, default=0)
        p.add_argument("--rate", type=float, default=0.0, help="interest rate (reserve)")
        p.add_argument("--grid", type=int)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--trials", type=int, default=10_000)
        p.add_argument("--dual", action="store_true")
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "text"), default="text")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(**vars(args))
    try:
        status, text = run(cfg)
    except (errors.DistortionError, errors.DomainError, errors.UnsupportedError,
            errors.UnboundedError, errors.NoDensityError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    if status == EXIT_TOLERANCE:
        print("tolerance failure", file=sys.stderr)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
