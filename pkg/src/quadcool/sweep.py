"""Detuning sweeps over both steady-state solvers, with CSV output.

Config files are UTF-8 text with one ``key = value`` per line; ``#`` starts
a comment.  Frequencies are in units of omega_m and the drive is given as
Omega itself (Omega/kappa = 0.4 at kappa = 0.25 means omega_drive = 0.1).

Keys
    g, kappa, omega_drive, gamma_m, n_th,
    delta_min, delta_max, n_points                        (required)
    solvers = rate | master | rate,master                 (default rate)
    n_phonon_states (30), n_photon_states (3)             master-equation cutoffs
    l_max (auto)                                          scattering-sum cutoff
    cavity_rate_convention (full_kappa | half_kappa)
    concurrency_limit (1)                                 points solved at once
    output_path (-, i.e. stdout)
"""
from __future__ import annotations

import csv
import io
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError, QuadcoolError
from .fock import HilbertDims
from .kinetics import rate_steady_state
from .lindblad import CavityRateConvention, master_steady_state, phonon_distribution
from .params import SystemParams, unstable_photon_numbers
from .statistics import mech_stats

log = logging.getLogger(__name__)

SOLVERS = ("rate", "master")
CSV_HEADER = ("delta", "n_ss_rate", "n_ss_master", "q_rate", "q_master",
              "f_rate", "f_master", "converged_rate", "converged_master")

_REQUIRED = ("g", "kappa", "omega_drive", "gamma_m", "n_th", "delta_min", "delta_max", "n_points")
_DEFAULTS = {
    "solvers": "rate",
    "n_phonon_states": "30",
    "n_photon_states": "3",
    "l_max": "auto",
    "cavity_rate_convention": "full_kappa",
    "concurrency_limit": "1",
    "output_path": "-",
}
_FLOAT_KEYS = ("g", "kappa", "omega_drive", "gamma_m", "n_th", "delta_min", "delta_max")
_INT_KEYS = ("n_points", "n_phonon_states", "n_photon_states", "concurrency_limit")


@dataclass(frozen=True)
class SweepConfig:
    params: SystemParams
    delta_min: float
    delta_max: float
    n_points: int
    solvers: frozenset = frozenset({"rate"})
    n_phonon_states: int = 30
    n_photon_states: int = 3
    l_max: Optional[int] = None
    cavity_rate_convention: CavityRateConvention = CavityRateConvention.FULL_KAPPA
    concurrency_limit: int = 1
    output_path: str = "-"

    def __post_init__(self):
        if not self.delta_min < self.delta_max:
            raise ConfigError(f"delta_min ({self.delta_min}) must be below delta_max ({self.delta_max})")
        if self.n_points < 2:
            raise ConfigError(f"n_points must be >= 2, got {self.n_points}")
        if not self.solvers or not set(self.solvers) <= set(SOLVERS):
            raise ConfigError(f"solvers must be a non-empty subset of {SOLVERS}, got {sorted(self.solvers)}")
        if self.concurrency_limit < 1:
            raise ConfigError("concurrency_limit must be >= 1")
        if self.n_photon_states < 2 or self.n_phonon_states < 2:
            raise ConfigError("n_photon_states and n_phonon_states must be >= 2")
        bad = unstable_photon_numbers(self.params.g, self.params.omega_m, self.n_photon_states)
        if bad:
            raise ConfigError(
                f"stability requires omega_m + 4 s g > 0 for every photon number s < "
                f"{self.n_photon_states}; violated for s = {bad}")

    @property
    def deltas(self) -> np.ndarray:
        return np.linspace(self.delta_min, self.delta_max, self.n_points)

    @property
    def dims(self) -> HilbertDims:
        return HilbertDims(self.n_photon_states, self.n_phonon_states)


@dataclass(frozen=True)
class SweepRecord:
    delta: float
    n_ss_rate: Optional[float] = None
    n_ss_master: Optional[float] = None
    mandel_q_rate: Optional[float] = None
    mandel_q_master: Optional[float] = None
    fluct_f_rate: Optional[float] = None
    fluct_f_master: Optional[float] = None
    converged_rate: Optional[bool] = None
    converged_master: Optional[bool] = None

    @property
    def failed(self) -> bool:
        """True when no requested solver converged."""
        flags = [f for f in (self.converged_rate, self.converged_master) if f is not None]
        return not any(flags)


def _parse_value(key, raw, lineno):
    try:
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _INT_KEYS:
            return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as a number", lineno) from None
    if key == "l_max":
        if raw == "auto":
            return None
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"l_max: expected an integer or 'auto', got {raw!r}", lineno) from None
    if key == "solvers":
        items = [s.strip() for s in raw.split(",") if s.strip()]
        unknown = [s for s in items if s not in SOLVERS]
        if unknown:
            raise ConfigError(f"unknown solver(s) {unknown}; choose from {SOLVERS}", lineno)
        return frozenset(items)
    if key == "cavity_rate_convention":
        try:
            return CavityRateConvention(raw)
        except ValueError:
            raise ConfigError(f"cavity_rate_convention must be full_kappa or half_kappa, got {raw!r}",
                              lineno) from None
    return raw


def parse_config(text: str) -> SweepConfig:
    """Parse and validate a sweep configuration document."""
    known = set(_REQUIRED) | set(_DEFAULTS)
    raw, where = {}, {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        if key not in known:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in raw:
            raise ConfigError(f"duplicate key {key!r} (first set on line {where[key]})", lineno)
        if not value:
            raise ConfigError(f"missing value for {key!r}", lineno)
        raw[key] = value
        where[key] = lineno

    values = {k: _parse_value(k, v, where[k]) for k, v in raw.items()}
    n_photon = values.get("n_photon_states", int(_DEFAULTS["n_photon_states"]))
    if "g" in values:
        bad = unstable_photon_numbers(values["g"], 1.0, n_photon)
        if bad:
            raise ConfigError(
                f"g = {values['g']:g} violates stability omega_m + 4 s g > 0 for s = {bad} "
                f"(photon cutoff {n_photon})", where["g"])
    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    for k, v in _DEFAULTS.items():
        values.setdefault(k, _parse_value(k, v, None))

    try:
        params = SystemParams(g=values["g"], kappa=values["kappa"], omega_drive=values["omega_drive"],
                              gamma_m=values["gamma_m"], n_th=values["n_th"])
    except (ValueError, QuadcoolError) as exc:
        raise ConfigError(str(exc)) from None
    cfg = {f.name: values[f.name] for f in fields(SweepConfig) if f.name != "params"}
    return SweepConfig(params=params, **cfg)


def load_config(path) -> SweepConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def _rate_point(config, params):
    try:
        dist = rate_steady_state(params, l_max=config.l_max)
    except QuadcoolError as exc:
        log.warning("rate solver failed at delta=%g: %s", params.delta, exc)
        return None
    return dist if dist.tail_converged else None


def _master_point(config, params):
    try:
        rho = master_steady_state(params, config.dims, config.cavity_rate_convention)
        dist = phonon_distribution(rho)
    except QuadcoolError as exc:
        log.warning("master solver failed at delta=%g: %s", params.delta, exc)
        return None
    return dist if dist.tail_converged else None


def solve_point(config: SweepConfig, delta: float) -> SweepRecord:
    params = config.params.replace(delta=float(delta))
    out = {"delta": float(delta)}
    for name, solve in (("rate", _rate_point), ("master", _master_point)):
        if name not in config.solvers:
            continue
        dist = solve(config, params)
        out[f"converged_{name}"] = dist is not None
        if dist is not None:
            s = mech_stats(dist)
            out[f"n_ss_{name}"] = s.nbar
            out[f"mandel_q_{name}"] = s.mandel_q
            out[f"fluct_f_{name}"] = s.fluct_f
    return SweepRecord(**out)


def run_sweep(config: SweepConfig, progress=None) -> list[SweepRecord]:
    """One record per detuning, ascending, whatever the execution order.

    At most ``config.concurrency_limit`` points are in flight; with the
    master solver each holds roughly 0.8 GB at the default cutoffs.
    """
    deltas = config.deltas
    records: list = [None] * len(deltas)

    def task(i):
        rec = solve_point(config, deltas[i])
        records[i] = rec
        if progress is not None:
            progress(i, rec)
        return i

    if config.concurrency_limit == 1:
        for i in range(len(deltas)):
            task(i)
    else:
        with ThreadPoolExecutor(max_workers=config.concurrency_limit) as pool:
            list(pool.map(task, range(len(deltas))))
    return records


def format_number(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    return f"{float(x):.12g}"


def record_row(rec: SweepRecord) -> list[str]:
    return [format_number(v) for v in (
        rec.delta, rec.n_ss_rate, rec.n_ss_master, rec.mandel_q_rate, rec.mandel_q_master,
        rec.fluct_f_rate, rec.fluct_f_master, rec.converged_rate, rec.converged_master)]


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rec in records:
        w.writerow(record_row(rec))
    return buf.getvalue()


def write_csv(records, path) -> None:
    """Write records as CSV to ``path`` ("-" for stdout)."""
    text = records_to_csv(records)
    if str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write sweep output to {path}: {exc.strerror}") from exc


def _opt_float(s):
    return float(s) if s != "" else None


def _opt_bool(s):
    return {"true": True, "false": False, "": None}[s]


def read_csv(path) -> list[SweepRecord]:
    """Inverse of :func:`write_csv` (values at 12-digit precision)."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"{path}: not a sweep CSV")
    out = []
    for r in rows[1:]:
        out.append(SweepRecord(float(r[0]), *(_opt_float(v) for v in r[1:7]),
                               _opt_bool(r[7]), _opt_bool(r[8])))
    return out
