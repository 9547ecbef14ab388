"""Mean phonon number, Mandel Q and normalized fluctuations F."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import UndefinedStatisticError
from .kinetics import PhononDistribution


@dataclass(frozen=True)
class MechStats:
    nbar: float
    mandel_q: Optional[float]
    fluct_f: Optional[float]


def _probs(p):
    return np.asarray(p.probs if isinstance(p, PhononDistribution) else p, dtype=float)


def _moments(p):
    P = _probs(p)
    n = np.arange(P.size, dtype=float)
    return float(n @ P), float((n * n) @ P), float((n * (n - 1.0)) @ P)


def mean_phonon(p) -> float:
    return _moments(p)[0]


def mandel_q(p) -> float:
    """Variance over mean, minus one."""
    m1, m2, _ = _moments(p)
    if m1 <= 0:
        raise UndefinedStatisticError("Mandel Q is undefined for zero mean phonon number")
    return (m2 - m1 * m1) / m1 - 1.0


def number_fluctuations(p) -> float:
    """Second factorial moment over the squared mean, <n(n-1)>/<n>^2."""
    m1, _, f2 = _moments(p)
    if m1 <= 0:
        raise UndefinedStatisticError("F is undefined for zero mean phonon number")
    return f2 / (m1 * m1)


def mech_stats(p) -> MechStats:
    """All three observables; undefined ones come back as None."""
    m1, m2, f2 = _moments(p)
    if m1 <= 0:
        return MechStats(m1, None, None)
    return MechStats(m1, (m2 - m1 * m1) / m1 - 1.0, f2 / (m1 * m1))
