"""Scattering-theory phonon transition rates.

A weak drive Omega puts at most one photon in the cavity.  Between photon
entry and photon loss the oscillator evolves with the one-photon frequency
``omega_1 = omega_m sqrt(1 + 4 g / omega_m)``, so the second-order
amplitude for n -> m phonons sums over intermediate squeezed states l:

    Gamma(n -> m) = kappa Omega^2 |sum_l S[l, m] S[l, n] / (d(l, n) + Delta + i kappa/2)|^2
    d(l, n)       = (n + 1/2) omega_m - (l + 1/2) omega_1

with S the squeeze-overlap matrix.  Only even n - m survive.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, InvalidTransitionError
from .params import SystemParams, check_stability
from .squeeze import MAX_DIM, overlap_matrix, squeeze_param

#: relative size of the last ten intermediate states allowed in a converged sum
TAIL_TOL = 1e-8
#: intermediate states beyond max(n, m) used before any doubling
DEFAULT_L_MARGIN = 20
MIN_L_MARGIN = 10
_DECADE = 10


def shifted_frequency(params: SystemParams) -> float:
    """Mechanical frequency with one photon in the cavity."""
    check_stability(params.g, params.omega_m, 2)
    return params.omega_m * math.sqrt(1.0 + 4.0 * params.g / params.omega_m)


def detuning_ladder(l: int, n: int, params: SystemParams) -> float:
    """Energy mismatch (n + 1/2) omega_m - (l + 1/2) omega_1."""
    return (n + 0.5) * params.omega_m - (l + 0.5) * shifted_frequency(params)


def resonance_detuning(l: int, n: int, params: SystemParams) -> float:
    """Laser detuning at which the n -> l -> . pathway is resonant."""
    return -detuning_ladder(l, n, params)


def weak_coupling_rates(params: SystemParams) -> tuple[float, float]:
    """Two-phonon absorption and emission strengths (Gamma_down, Gamma_up).

    Closed-form rates for g << omega_m and kappa << omega_m, entering as
    Gamma(n -> n-2) = n(n-1) Gamma_down and Gamma(n -> n+2) = (n+1)(n+2) Gamma_up.
    """
    p = params
    num = p.kappa * p.omega_drive ** 2 * (p.g / p.omega_m) ** 2
    hw = (p.kappa / 2.0) ** 2
    down = num / (hw + (p.delta + 2.0 * p.omega_m) ** 2)
    up = num / (hw + (p.delta - 2.0 * p.omega_m) ** 2)
    return down, up


class TransitionRate(NamedTuple):
    rate: float
    tail: float
    l_max: int


@dataclass(frozen=True, eq=False)
class RateMatrix:
    """Scattering rates ``rates[n, m] = Gamma(n -> m)``, zero diagonal.

    ``tail`` holds each entry's convergence indicator and ``l_max`` the
    intermediate-state cutoff that produced them.
    """

    params: SystemParams
    rates: np.ndarray
    tail: np.ndarray
    l_max: int

    @property
    def n_states(self) -> int:
        return self.rates.shape[0]

    def __getitem__(self, key):
        return self.rates[key]


def _amplitudes(params: SystemParams, n_states: int, l_max: int):
    """Amplitude sums A[m, n] over l = 0..l_max and their tail indicators."""
    xi = squeeze_param(params.g, params.omega_m)
    S = overlap_matrix(xi, l_max + 1).matrix
    Sc = S[:, :n_states]
    l = np.arange(l_max + 1)[:, None]
    n = np.arange(n_states)[None, :]
    w1 = shifted_frequency(params)
    denom = (n + 0.5) * params.omega_m - (l + 0.5) * w1 + params.delta + 0.5j * params.kappa
    weighted = Sc / denom

    amp = Sc.T @ weighted
    cut = l_max + 1 - _DECADE
    tail = Sc[cut:].T @ weighted[cut:]
    scale = np.abs(Sc).T @ np.abs(weighted)
    with np.errstate(invalid="ignore", divide="ignore"):
        rel = np.where(scale > 0, np.abs(tail) / scale, 0.0)
    return amp, rel


def _parity_mask(n_states):
    n = np.arange(n_states)
    return (n[:, None] - n[None, :]) % 2 == 0


def _rates_from_amplitudes(params, amp, rel):
    rates = params.kappa * params.omega_drive ** 2 * np.abs(amp.T) ** 2
    tail = rel.T.copy()
    allowed = _parity_mask(rates.shape[0])
    np.fill_diagonal(allowed, False)
    rates = np.where(allowed, rates, 0.0)
    tail = np.where(allowed, tail, 0.0)
    return rates, tail


def _check_l_max(l_max, top):
    if l_max < top + MIN_L_MARGIN:
        raise ValueError(f"l_max = {l_max} must be at least max(n, m) + {MIN_L_MARGIN} = {top + MIN_L_MARGIN}")
    if l_max + 1 > MAX_DIM:
        raise ValueError(f"l_max = {l_max} exceeds the supported maximum {MAX_DIM - 1}")


def _grow(l_max, top):
    # double the margin above the highest phonon number in use
    return top + 2 * (l_max - top)


def transition_rate(n: int, m: int, params: SystemParams, l_max: int | None = None) -> TransitionRate:
    """Rate of the phonon transition n -> m (m != n).

    With ``l_max=None`` the intermediate-state cutoff starts at
    max(n, m) + 20 and the margin above max(n, m) doubles until the last
    ten terms contribute less than 1e-8 of the series magnitude.  An
    explicit ``l_max`` is used as given.  Raises :class:`ConvergenceError` (carrying the partial rate)
    when the tolerance is not met.
    """
    if n < 0 or m < 0:
        raise ValueError(f"phonon numbers must be >= 0, got n={n}, m={m}")
    if m == n:
        raise InvalidTransitionError(f"transition {n} -> {m} is not a change of state")
    top = max(n, m)
    auto = l_max is None
    if auto:
        l_max = top + DEFAULT_L_MARGIN
    _check_l_max(l_max, top)
    if (n - m) % 2:
        return TransitionRate(0.0, 0.0, l_max)
    while True:
        amp, rel = _amplitudes(params, top + 1, l_max)
        rate = params.kappa * params.omega_drive ** 2 * abs(amp[m, n]) ** 2
        tail = float(rel[m, n])
        if tail <= TAIL_TOL:
            return TransitionRate(float(rate), tail, l_max)
        if not auto or _grow(l_max, top) + 1 > MAX_DIM:
            raise ConvergenceError(
                f"rate {n} -> {m} not converged at l_max={l_max} (tail {tail:.2e})",
                partial=float(rate), tail=tail, pair=(n, m))
        l_max = _grow(l_max, top)


def rate_matrix(params: SystemParams, n_states: int, l_max: int | None = None) -> RateMatrix:
    """All transition rates among phonon states 0..n_states-1.

    Parity-forbidden entries are exact zeros.  Cutoff policy as in
    :func:`transition_rate`, applied to the worst entry.
    """
    if int(n_states) != n_states or n_states < 2:
        raise ValueError(f"n_states must be an integer >= 2, got {n_states}")
    top = n_states - 1
    auto = l_max is None
    if auto:
        l_max = top + DEFAULT_L_MARGIN
    _check_l_max(l_max, top)
    while True:
        amp, rel = _amplitudes(params, n_states, l_max)
        rates, tail = _rates_from_amplitudes(params, amp, rel)
        worst = np.unravel_index(np.argmax(tail), tail.shape)
        if tail[worst] <= TAIL_TOL:
            break
        if not auto or _grow(l_max, top) + 1 > MAX_DIM:
            pair = (int(worst[0]), int(worst[1]))
            raise ConvergenceError(
                f"rate {pair[0]} -> {pair[1]} not converged at l_max={l_max} (tail {tail[worst]:.2e})",
                partial=float(rates[worst]), tail=float(tail[worst]), pair=pair)
        l_max = _grow(l_max, top)
    rates.flags.writeable = False
    tail.flags.writeable = False
    return RateMatrix(params, rates, tail, l_max)
