"""Command-line entry point: ``quadcool {sweep,rates,analytic,stats}``.

Every subcommand writes CSV to stdout or to ``-o PATH``.
Exit codes: 0 success, 2 configuration error, 3 all sweep points failed,
4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys

import numpy as np

from . import __version__
from .errors import ConfigError, QuadcoolError
from .kinetics import two_phonon_distribution, strong_absorption_limit
from .params import SystemParams
from .scattering import rate_matrix, weak_coupling_rates
from .statistics import mech_stats
from .sweep import format_number, load_config, records_to_csv, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ALL_FAILED = 3
EXIT_IO = 4

log = logging.getLogger("quadcool")


def _emit(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _params(args) -> SystemParams:
    return SystemParams(g=args.g, kappa=args.kappa, delta=args.delta, omega_drive=args.omega_drive,
                        gamma_m=args.gamma_m, n_th=args.n_th)


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    out = args.output or config.output_path

    def progress(i, rec):
        log.info("point %d/%d delta=%g done", i + 1, config.n_points, rec.delta)

    records = run_sweep(config, progress=progress)
    _emit(records_to_csv(records), out)
    if all(r.failed for r in records):
        log.error("no sweep point converged")
        return EXIT_ALL_FAILED
    return EXIT_OK


def cmd_rates(args) -> int:
    rm = rate_matrix(_params(args), args.n_states, args.l_max)
    rows = [("n", "m", "rate", "tail")]
    for n in range(rm.n_states):
        for m in range(rm.n_states):
            if m != n:
                rows.append((n, m, format_number(rm.rates[n, m]), format_number(rm.tail[n, m])))
    _emit(_csv(rows), args.output)
    return EXIT_OK


def cmd_analytic(args) -> int:
    params = _params(args)
    down, up = weak_coupling_rates(params)
    r = up / down if down > 0 else float("inf")
    p0, p1, nbar = strong_absorption_limit(params.n_th)
    rows = [("quantity", "value"),
            ("gamma_down", format_number(down)),
            ("gamma_up", format_number(up)),
            ("r", format_number(r)),
            ("strong_p0", format_number(p0)),
            ("strong_p1", format_number(p1)),
            ("strong_nbar", format_number(nbar))]
    if r < 1:
        dist = two_phonon_distribution(r, args.gamma_weight, args.n_states)
        rows += [(f"p_{k}", format_number(v)) for k, v in enumerate(dist.probs)]
    _emit(_csv(rows), args.output)
    return EXIT_OK


def read_distribution(path) -> np.ndarray:
    """Probabilities from a CSV with a ``p`` column (or a single bare column)."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise ValueError(f"{path}: empty distribution file")
    col = 0
    try:
        float(rows[0][0])
    except ValueError:
        header = [h.strip() for h in rows[0]]
        if "p" not in header:
            raise ValueError(f"{path}: header has no 'p' column") from None
        col = header.index("p")
        rows = rows[1:]
    return np.array([float(r[col]) for r in rows])


def cmd_stats(args) -> int:
    s = mech_stats(read_distribution(args.distribution))
    rows = [("nbar", "q", "f"), (format_number(s.nbar), format_number(s.mandel_q), format_number(s.fluct_f))]
    _emit(_csv(rows), args.output)
    return EXIT_OK


def _point_args(p, n_states_default):
    p.add_argument("--g", type=float, required=True, help="quadratic coupling (units of omega_m)")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--delta", type=float, required=True, help="laser detuning")
    p.add_argument("--omega-drive", type=float, default=0.1, help="drive amplitude Omega")
    p.add_argument("--gamma-m", type=float, default=0.0)
    p.add_argument("--n-th", type=float, default=0.0)
    p.add_argument("--n-states", type=int, default=n_states_default)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quadcool", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="detuning sweep from a config file")
    p.add_argument("config")
    p.add_argument("-o", "--output", default=None, help="CSV path, '-' for stdout (overrides output_path)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("rates", help="scattering rate matrix at one parameter point")
    _point_args(p, 10)
    p.add_argument("--l-max", type=int, default=None)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("analytic", help="weak-coupling rates and limiting distributions")
    _point_args(p, 20)
    p.add_argument("--gamma-weight", type=float, default=0.0, help="odd-sector weight of the two-phonon state")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("stats", help="nbar, Mandel Q and F of a phonon distribution CSV")
    p.add_argument("distribution")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (QuadcoolError, ValueError) as exc:
        # bad parameters on the command line count as configuration errors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
