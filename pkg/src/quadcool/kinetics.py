"""Phonon-number rate equations: generator, steady state, time evolution.

The classical master equation for P_n combines the thermal mechanical bath
(rate gamma_m, occupation n_th) with the scattering rates:

    dP_n/dt = - gamma_m n_th (n+1) P_n - gamma_m (n_th+1) n P_n
              + gamma_m n_th n P_{n-1} + gamma_m (n_th+1) (n+1) P_{n+1}
              - sum_m Gamma(n->m) P_n + sum_m Gamma(m->n) P_m

written as dP/dt = G P.  The truncated generator drops the thermal jump out
of the top state so that probability is conserved exactly.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from .errors import (DegenerateKineticsError, DivergenceError, NegativeProbabilityError,
                     SolverError, StiffnessError)
from .params import SystemParams
from .scattering import RateMatrix, rate_matrix

log = logging.getLogger(__name__)

NEGATIVE_TOL = 1e-12
TAIL_TOL = 1e-6
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PhononDistribution:
    """Probabilities over phonon Fock states 0..N-1.

    Build through :meth:`from_values` when the input comes out of a linear
    solve: entries down to ``-neg_tol`` are clamped to zero (and counted in
    ``clamped``), anything more negative is an error, and the result is
    renormalized.
    """

    probs: np.ndarray
    clamped: int = 0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("a distribution needs a non-empty 1-d probability vector")
        if np.any(p < -NEGATIVE_TOL) or not np.all(np.isfinite(p)):
            raise NegativeProbabilityError(f"invalid probabilities, min {p.min():.3e}")
        if abs(p.sum() - 1.0) > 1e-10:
            raise ValueError(f"probabilities sum to {p.sum():.15g}, not 1")
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_values(cls, values, neg_tol: float = NEGATIVE_TOL, **meta) -> "PhononDistribution":
        v = np.real_if_close(np.asarray(values)).astype(float)
        low = v.min()
        if low < -neg_tol:
            raise NegativeProbabilityError(f"probability {low:.3e} below -{neg_tol:g}")
        neg = v < 0
        v = np.where(neg, 0.0, v)
        total = v.sum()
        if not total > 0:
            raise NegativeProbabilityError("distribution has no positive mass")
        return cls(v / total, int(neg.sum()), dict(meta))

    @property
    def n_states(self) -> int:
        return self.probs.size

    @property
    def tail(self) -> float:
        return float(self.probs[-1])

    @property
    def tail_converged(self) -> bool:
        return self.tail < TAIL_TOL

    def __len__(self):
        return self.probs.size

    def __getitem__(self, key):
        return self.probs[key]


@dataclass(frozen=True, eq=False)
class KineticGenerator:
    """Markov generator with dP/dt = matrix @ P."""

    matrix: np.ndarray

    @property
    def n_states(self) -> int:
        return self.matrix.shape[0]


def thermal_generator(n_states: int, gamma_m: float, n_th: float) -> np.ndarray:
    """Birth-death generator of the mechanical bath alone."""
    n = np.arange(n_states - 1)
    G = np.zeros((n_states, n_states))
    # up: n -> n+1 at gamma n_th (n+1); down: n+1 -> n at gamma (n_th+1)(n+1)
    G[n + 1, n] = gamma_m * n_th * (n + 1)
    G[n, n + 1] = gamma_m * (n_th + 1.0) * (n + 1)
    G[np.diag_indices(n_states)] = -G.sum(axis=0)
    return G


def build_generator(rates: RateMatrix, params: SystemParams) -> KineticGenerator:
    """Generator from scattering rates plus the thermal bath of ``params``."""
    N = rates.n_states
    if N < 2:
        raise ValueError("need at least two phonon states")
    G = thermal_generator(N, params.gamma_m, params.n_th)
    off = np.asarray(rates.rates, dtype=float).T.copy()
    np.fill_diagonal(off, 0.0)
    G += off
    np.fill_diagonal(G, 0.0)
    G[np.diag_indices(N)] = -G.sum(axis=0)
    G.flags.writeable = False
    return KineticGenerator(G)


def _nullity(G, rtol=1e-13):
    s = scipy.linalg.svdvals(G)
    return int(np.sum(s <= rtol * s[0])) if s[0] > 0 else G.shape[0]


def steady_distribution(gen: KineticGenerator) -> PhononDistribution:
    """Stationary distribution: G P = 0 with sum P = 1.

    The last equation is replaced by the normalization row and the bordered
    system is solved by LU.  Raises :class:`DegenerateKineticsError` when
    the generator has several stationary states.
    """
    G = np.asarray(gen.matrix, dtype=float)
    N = G.shape[0]
    A = G.copy()
    A[-1, :] = 1.0
    b = np.zeros(N)
    b[-1] = 1.0
    try:
        P = scipy.linalg.solve(A, b, check_finite=False)
        ok = np.all(np.isfinite(P))
    except (np.linalg.LinAlgError, ValueError):
        ok = False
    residual = float(np.max(np.abs(G @ P))) if ok else math.inf
    if not ok or residual > RESIDUAL_TOL:
        k = _nullity(G)
        if k > 1:
            raise DegenerateKineticsError(f"generator has {k} stationary states")
        raise SolverError(f"steady-state residual {residual:.2e} exceeds {RESIDUAL_TOL:g}")
    dist = PhononDistribution.from_values(P, residual=residual)
    if dist.clamped:
        log.debug("clamped %d roundoff-negative probabilities", dist.clamped)
    if not dist.tail_converged:
        log.info("truncation tail P[%d] = %.2e is not converged", N - 1, dist.tail)
    return dist


def evolve(p0: PhononDistribution, gen: KineticGenerator, t: float,
           rtol: float = 1e-10, atol: float = 1e-13) -> PhononDistribution:
    """Distribution at time ``t`` from ``p0`` (implicit BDF integration)."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    G = np.asarray(gen.matrix, dtype=float)
    if p0.n_states != G.shape[0]:
        raise ValueError(f"distribution has {p0.n_states} states, generator {G.shape[0]}")
    if t == 0:
        return p0
    sol = solve_ivp(lambda _, y: G @ y, (0.0, t), np.array(p0.probs), method="BDF",
                    jac=G, rtol=rtol, atol=atol, t_eval=[t])
    if sol.status != 0:
        raise StiffnessError(f"integration stopped before t={t}: {sol.message}")
    y = sol.y[:, -1]
    drift = abs(y.sum() - 1.0)
    if drift > 1e-8:
        raise SolverError(f"probability drifted by {drift:.2e} during evolution")
    return PhononDistribution.from_values(y, neg_tol=1e-9)


def two_phonon_distribution(r: float, gamma_weight: float, n_states: int) -> PhononDistribution:
    """Steady state of pure two-phonon kinetics with emission/absorption ratio r.

    P_{2k} = (1 - r) r^k (1 - gamma), P_{2k+1} = (1 - r) r^k gamma, where
    ``gamma_weight`` is the (initial-condition dependent) odd-sector weight.
    Truncated to ``n_states`` and renormalized.
    """
    if not 0 <= gamma_weight <= 1:
        raise ValueError(f"gamma_weight must lie in [0, 1], got {gamma_weight}")
    if r >= 1:
        raise DivergenceError(f"r = {r} >= 1: two-phonon distribution is not normalizable")
    if r < 0:
        raise ValueError(f"r must be >= 0, got {r}")
    n = np.arange(n_states)
    geo = (1.0 - r) * np.power(r, n // 2)
    p = np.where(n % 2 == 0, geo * (1.0 - gamma_weight), geo * gamma_weight)
    return PhononDistribution(p / p.sum())


def strong_absorption_limit(n_th: float) -> tuple[float, float, float]:
    """(P0, P1, mean) when two-phonon absorption dominates the thermal bath."""
    if n_th < 0:
        raise ValueError(f"n_th must be >= 0, got {n_th}")
    x = n_th / (n_th + 1.0)
    p0 = (1 + 2 * x) / (1 + 3 * x)
    p1 = x / (1 + 3 * x)
    return p0, p1, p1


def default_n_states(n_th: float) -> int:
    return max(30, int(math.ceil(5 * n_th)))


def rate_steady_state(params: SystemParams, n_states: int | None = None,
                      max_states: int = 400, l_max: int | None = None) -> PhononDistribution:
    """Steady state of the full rate equations with automatic truncation.

    Starts at ``max(30, 5 n_th)`` states (or ``n_states``) and grows by half
    until the top-state population drops below 1e-6 or ``max_states`` is
    reached; check ``tail_converged`` on the result.
    """
    N = n_states or default_n_states(params.n_th)
    while True:
        rm = rate_matrix(params, N, l_max)
        dist = steady_distribution(build_generator(rm, params))
        dist.meta.update(l_max=rm.l_max)
        if dist.tail_converged or N >= max_states:
            return dist
        N = min(max_states, int(math.ceil(1.5 * N)))
