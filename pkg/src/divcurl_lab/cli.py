"""Command-line runner: ``divcurl-lab --experiment NAME [options]``.

Writes a JSON or CSV report to ``--out`` (stdout by default), progress to
stderr, and exits 0 iff the experiment passed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from .errors import LabError
from .experiments import FORMATS, ExperimentConfig, list_experiments, run


def build_parser():
    ap = argparse.ArgumentParser(prog="divcurl-lab", description=__doc__.splitlines()[0])
    ap.add_argument("--experiment", help="experiment name (see --list)")
    ap.add_argument("--list", action="store_true", help="print the experiment catalog and exit")
    ap.add_argument("--dim", type=int, help="space dimension N (2 or 3)")
    ap.add_argument("--p", type=float, help="exponent p")
    ap.add_argument("--q", type=float, help="exponent q")
    ap.add_argument("--rho", type=float, help="coefficient integrability exponent")
    ap.add_argument("--n-max", type=int, dest="n_max", help="largest n of the power-of-two ladder")
    ap.add_argument("--quad-order", type=int, dest="quad_order", help="quadrature order")
    ap.add_argument("--lambda", type=float, dest="lam", help="selection threshold")
    ap.add_argument("--k", type=int, help="Beta-integral power k")
    ap.add_argument("--alpha", type=float, help="Beta-integral rate alpha")
    ap.add_argument("--family", choices=("laminate", "stiff"), help="homogenization coefficient family")
    ap.add_argument("--seed", type=int, default=0, help="seed for sample clouds")
    ap.add_argument("--out", help="output file (default: stdout)")
    ap.add_argument("--format", choices=FORMATS, default="json", dest="fmt")
    return ap


def to_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "value"])
    for row in report.table:
        w.writerow([row["n"], repr(row["value"])])
    d = report.to_dict()
    for key in ("experiment", "params", "extrapolated", "reference", "pass", "seed", "runtime_ms"):
        buf.write(f"# {key}: {json.dumps(d[key], sort_keys=True)}\n")
    for c in report.checks:
        buf.write(f"# check: {json.dumps(c, sort_keys=True)}\n")
    return buf.getvalue()


def to_json(report):
    return json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.list:
        for e in list_experiments():
            print(f"{e['name']:24s} criterion {e['criterion']:2d}  {e['citation']}")
        return 0
    if not args.experiment:
        print("error: --experiment is required (or use --list)", file=sys.stderr)
        return 2
    fields = {k: v for k, v in vars(args).items() if k not in ("list",)}
    try:
        cfg = ExperimentConfig(**fields)
        report = run(cfg)
    except LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = to_csv(report) if cfg.fmt == "csv" else to_json(report)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    status = "PASS" if report.passed else "FAIL"
    print(f"[{report.experiment}] {status} in {report.runtime_ms:.0f} ms", file=sys.stderr)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
