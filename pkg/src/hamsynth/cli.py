"""``hamsynth`` command line: run an experiment and write CSV or JSON."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any, Optional, Sequence

from .experiments import RUNNERS, SCHEMA_VERSION, ExperimentConfig

DIGITS = 12


def _fmt(x: Any) -> Any:
    """Round floats to 12 significant digits; leave everything else alone."""
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, float):
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.{DIGITS}g}")
    if isinstance(x, dict):
        return {k: _fmt(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_fmt(v) for v in x]
    return x


def _csv_cell(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.{DIGITS}g}"
    return str(x)


def _flatten(doc: Any, prefix: str = "") -> list[tuple[str, Any]]:
    if isinstance(doc, dict):
        out = []
        for k, v in doc.items():
            out += _flatten(v, f"{prefix}.{k}" if prefix else k)
        return out
    if isinstance(doc, list):
        out = []
        for i, v in enumerate(doc):
            out += _flatten(v, f"{prefix}[{i}]")
        return out
    return [(prefix, doc)]


def render(name: str, result: Any, fmt: str) -> str:
    if fmt == "json":
        doc = result if isinstance(result, dict) else {"schema_version": SCHEMA_VERSION, "experiment": name,
                                                         "rows": result}
        return json.dumps(_fmt(doc), indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(result, dict):
        w.writerow(["key", "value"])
        for k, v in _flatten(result):
            w.writerow([k, _csv_cell(v)])
        return buf.getvalue()
    header: list[str] = []
    for row in result:
        for k in row:
            if k not in header:
                header.append(k)
    w.writerow(header)
    for row in result:
        w.writerow([_csv_cell(row.get(k)) for k in header])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hamsynth", description=__doc__)
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in RUNNERS:
        sp = sub.add_parser(name)
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--p", type=float, nargs="+", help="noise parameters p, with kappa0 = -ln(p)/pi")
        sp.add_argument("--kappa0", type=float, nargs="+", help="reservoir rates (override --p)")
        sp.add_argument("--sigma", type=float, nargs="+", help="timing jitter standard deviations")
        sp.add_argument("--n", type=int, nargs="+", help="qubit counts")
        sp.add_argument("--dt-prime-min", type=float)
        sp.add_argument("--dt-prime-max", type=float)
        sp.add_argument("--dt-prime-points", type=int)
        sp.add_argument("--noise", choices=("white", "dephasing", "timing"))
        sp.add_argument("--samples", type=int, help="Monte Carlo samples")
        sp.add_argument("--p-l", type=float, nargs="+", help="local operation parameters")
        sp.add_argument("--p-0", type=float, nargs="+", help="two-system noise parameters")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    kw: dict[str, Any] = {"name": args.experiment, "seed": args.seed}
    mapping = {"p": "p", "kappa0": "kappa0", "sigma": "sigma", "n": "n", "dt_prime_min": "dt_prime_min",
               "dt_prime_max": "dt_prime_max", "dt_prime_points": "dt_prime_points", "noise": "noise",
               "samples": "samples", "p_l": "p_l", "p_0": "p_0"}
    for attr, key in mapping.items():
        v = getattr(args, attr)
        if v is not None:
            kw[key] = tuple(v) if isinstance(v, list) else v
    if args.experiment == "timing-compare" and args.n is None:
        kw["n"] = (1, 2, 3, 4)
    return ExperimentConfig(**kw)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        result = RUNNERS[args.experiment](cfg)
        text = render(args.experiment, result, args.format)
    except Exception as exc:  # report any module failure as one machine-readable line
        print(json.dumps({"error": type(exc).__name__, "experiment": args.experiment, "message": str(exc)}),
              file=sys.stderr)
        return 1
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
