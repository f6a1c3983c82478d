"""``lcloc`` command line: efficiency study, information curves, diagnostics, estimation.

Exit codes: 0 success, 1 internal error, 2 bad input data, 3 bad configuration.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .errors import ArgumentError, DegenerateInformationError, DegenerateSampleError, DomainError
from .report import emit_csv, emit_svg, format_cell

log = logging.getLogger("lcloc")

EXIT_OK, EXIT_INTERNAL, EXIT_DATA, EXIT_CONFIG = 0, 1, 2, 3

_CONFIG_KEYS = ("seed", "reps", "eta", "out", "densities", "sizes", "estimators")
_ESTIMATE_DEFAULT = "mean,median,trimmed,logistic,mle,os_pmle_mean_t"
FULL_REPS = 3000
_INFO_ETAS = tuple(float(e) for e in np.logspace(-6, np.log10(0.4), 25))


class ConfigError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _csv_list(s: str) -> list:
    return [t.strip() for t in s.split(",") if t.strip()]


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    for i, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{i}: expected key = value")
        k, v = (p.strip() for p in line.split("=", 1))
        if k not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{i}: unknown key {k!r}")
        out[k] = v
    return out


def _coerce(raw: dict) -> dict:
    conv = {"seed": int, "reps": int, "eta": float, "out": str,
            "densities": _csv_list, "sizes": lambda s: [int(v) for v in _csv_list(s)],
            "estimators": _csv_list}
    out = {}
    for k, v in raw.items():
        if v is None:
            continue
        try:
            out[k] = conv[k](v) if isinstance(v, str) else v
        except ValueError:
            raise ConfigError(f"bad value for {k}: {v!r}") from None
    return out


def build_config(args) -> ex.ExperimentConfig:
    """Defaults, then the config file, then command-line flags."""
    merged = {}
    if args.config:
        merged.update(_coerce(read_config(args.config)))
    if getattr(args, "full", False):
        merged["reps"] = FULL_REPS
    merged.update(_coerce({k: getattr(args, k, None) for k in _CONFIG_KEYS}))
    try:
        return ex.ExperimentConfig().updated(**merged)
    except (ArgumentError, TypeError) as e:
        raise ConfigError(str(e)) from None


def read_data(path) -> np.ndarray:
    """One number per line; blank lines and ``#`` comments are skipped."""
    vals = []
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from None
    for i, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            v = float(line)
        except ValueError:
            raise DataError(f"{path}:{i}: not a number: {line!r}") from None
        if not np.isfinite(v):
            raise DataError(f"{path}:{i}: non-finite value")
        vals.append(v)
    if len(vals) < 2:
        raise DataError(f"{path}: need at least two values")
    x = np.asarray(vals)
    if np.all(x == x[0]):
        raise DataError(f"{path}: degenerate sample (all values equal)")
    return x


def _write(table, out: Path, stem: str) -> None:
    emit_csv(table, out / f"{stem}.csv")
    try:
        emit_svg(table, out / f"{stem}.svg")
    except ArgumentError as e:
        log.warning("no chart for %s: %s", stem, e)
    print(f"wrote {out / stem}.csv")


def cmd_efficiency(args) -> int:
    cfg = build_config(args)
    out = ex.ensure_dir(cfg.out)
    table = ex.run_efficiency(cfg)
    _write(table, out, "efficiency")
    return EXIT_OK


def cmd_info_curves(args) -> int:
    cfg = build_config(args)
    etas = _INFO_ETAS
    if args.etas:
        try:
            etas = [float(v) for v in _csv_list(args.etas)]
        except ValueError:
            raise ConfigError(f"bad eta grid {args.etas!r}") from None
    try:
        table = ex.run_info_curves(cfg.densities, etas)
    except ArgumentError as e:
        raise ConfigError(str(e)) from None
    _write(table, ex.ensure_dir(cfg.out), "info_curves")
    return EXIT_OK


def cmd_diagnose(args) -> int:
    cfg = build_config(args)
    if args.data:
        x = read_data(args.data)
    else:
        x = ex.sample_for(cfg.densities[0], args.n, cfg.seed)
    run = ex.run_diagnostics(x)
    out = ex.ensure_dir(cfg.out)
    _write(run.table, out, "diagnostics")
    lines = run.summary_lines()
    (out / "diagnostics_summary.txt").write_text("\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_OK


def cmd_estimate(args) -> int:
    x = read_data(args.data)
    eta = args.eta if args.eta is not None else 0.002
    labels = _csv_list(args.estimators or _ESTIMATE_DEFAULT)
    try:
        ests = [ex.parse_estimator(lab, eta) for lab in labels]
    except ArgumentError as e:
        raise ConfigError(str(e)) from None
    status = EXIT_OK
    for e in ests:
        try:
            print(f"{e.label}\t{format_cell(float(e.run(x, None)))}")
        except (DegenerateInformationError, DomainError) as err:
            print(f"{e.label}\tfailed: {err}")
            status = EXIT_DATA
    return status


def make_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=str, help="unsigned 64-bit seed")
    common.add_argument("--reps", type=str, help="Monte-Carlo replications")
    common.add_argument("--eta", type=float, help="truncation level in (0, 1/2)")
    common.add_argument("--out", type=str, help="output directory")
    common.add_argument("--full", action="store_true",
                        help=f"use {FULL_REPS} replications unless --reps is given")
    common.add_argument("--config", type=str, help="key = value config file")
    common.add_argument("--densities", type=str, help="comma list of density tags")
    common.add_argument("--sizes", type=str, help="comma list of sample sizes")
    common.add_argument("--estimators", type=str, help="comma list of estimator labels")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="lcloc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("efficiency", parents=[common], help="Monte-Carlo efficiency table"
                   ).set_defaults(func=cmd_efficiency)
    s = sub.add_parser("info-curves", parents=[common], help="truncated information ratios")
    s.add_argument("--etas", type=str, help="comma list of eta values")
    s.set_defaults(func=cmd_info_curves)
    s = sub.add_parser("diagnose", parents=[common], help="fit one sample and check the MLE")
    s.add_argument("--n", type=int, default=50)
    s.add_argument("--data", type=str, help="data file instead of a simulated sample")
    s.set_defaults(func=cmd_diagnose)
    s = sub.add_parser("estimate", parents=[common], help="estimate the center of a data file")
    s.add_argument("data", type=str)
    s.set_defaults(func=cmd_estimate)
    return p


def main(argv=None) -> int:
    try:
        args = make_parser().parse_args(argv)
    except ConfigError as e:
        print(f"lcloc: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"lcloc: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, DegenerateSampleError, DomainError, DegenerateInformationError,
            ArgumentError) as e:
        print(f"lcloc: bad input data: {e}", file=sys.stderr)
        return EXIT_DATA
    except OSError as e:
        print(f"lcloc: I/O error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as e:
        log.debug("internal error", exc_info=True)
        print(f"lcloc: internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
