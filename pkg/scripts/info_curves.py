#!/usr/bin/env python3
"""Truncated-information ratio I(eta)/I on a log grid of eta, as CSV and SVG."""

import argparse
import sys

import numpy as np

from lcloc import experiments as ex
from lcloc.report import emit_csv, emit_svg


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--densities", default="normal,logistic,laplace,symbeta2.1,symbeta3")
    ap.add_argument("--lo", type=float, default=1e-6)
    ap.add_argument("--hi", type=float, default=0.4)
    ap.add_argument("--points", type=int, default=25)
    ap.add_argument("--out", default="results")
    a = ap.parse_args(argv)

    etas = np.logspace(np.log10(a.lo), np.log10(a.hi), a.points)
    table = ex.run_info_curves(a.densities.split(","), etas)
    out = ex.ensure_dir(a.out)
    emit_csv(table, out / "info_curves.csv")
    emit_svg(table, out / "info_curves.svg")
    for d, eta, _, ratio in table.rows:
        print(f"{d:>11} eta={eta:.2e} ratio={ratio:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
