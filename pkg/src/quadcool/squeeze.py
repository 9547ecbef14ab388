"""Fock-basis matrix elements of the single-mode squeeze operator.

The squeeze operator here is ``U = exp[-xi (b^2 - b^dag^2) / 2]`` and the
overlap matrix is ``S[l, n] = <l|U|n>``, a real matrix.

Two evaluators are provided:

* :func:`closed_form_overlap` sums the finite double series term by term in
  log-factorial arithmetic with explicit signs.  It never overflows, but the
  alternating series cancels catastrophically once l and n reach a few tens
  (roughly 1e-7 absolute error at xi = 0.5, dim = 60 and O(1) error by
  dim = 120).
* :func:`overlap_matrix` is the production path.  Column n of S is the
  eigenvector, with eigenvalue exactly n, of the operator
  ``U N U^dag = cosh^2 N + sinh^2 (N + 1) - cosh sinh (b^2 + b^dag^2)``,
  a symmetric tridiagonal matrix inside each parity sector.  Eigenvectors
  come from LAPACK's tridiagonal solver on a working space large enough
  for the discarded tail to be far below double precision, and signs are
  fixed column by column via ``U b^dag |n> = (cosh b^dag - sinh b) U|n>``
  starting from the exactly known squeezed vacuum column.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

from .errors import InvalidDimensionError, ParameterRangeError, StabilityError

#: validated box for overlap_matrix
MAX_ABS_XI = 2.0
MAX_DIM = 512

# working-space tail is cut where tanh|xi|^(k/2) drops below this
_TAIL_EPS = 1e-24


@dataclass(frozen=True, eq=False)
class OverlapMatrix:
    """Immutable squeeze-overlap matrix ``S[l, n] = <l|U(xi)|n>``."""

    xi: float
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __getitem__(self, key):
        return self.matrix[key]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


def squeeze_param(g: float, omega_m: float = 1.0) -> float:
    """Squeeze parameter ``ln(1 + 4 g / omega_m) / 4`` of the one-photon polaron."""
    if omega_m <= 0:
        raise ValueError(f"omega_m must be positive, got {omega_m}")
    arg = 1.0 + 4.0 * g / omega_m
    if arg <= 0:
        raise StabilityError(
            f"1 + 4 g/omega_m = {arg:g} <= 0: single-photon stability violated", (1,))
    return 0.25 * math.log(arg)


def _check_box(xi, dim):
    if int(dim) != dim or dim < 1:
        raise InvalidDimensionError(f"dim must be a positive integer, got {dim!r}")
    if not math.isfinite(xi) or abs(xi) > MAX_ABS_XI:
        raise ParameterRangeError(f"|xi| = {abs(xi):g} outside the validated range [0, {MAX_ABS_XI}]")
    if dim > MAX_DIM:
        raise ParameterRangeError(f"dim = {dim} exceeds the validated maximum {MAX_DIM}")


def _log_vacuum_column(xi, rows):
    """log|S[l, 0]| and sign for l in ``rows`` (only even l are nonzero)."""
    half_t = 0.5 * math.tanh(xi)
    l = np.asarray(rows)
    k = l // 2
    logv = (-0.5 * math.log(math.cosh(xi)) + 0.5 * gammaln(l + 1.0) - gammaln(k + 1.0)
            + k * math.log(abs(half_t)))
    sign = np.where((k % 2 == 1) & (half_t < 0), -1.0, 1.0)
    sign = np.where(l % 2 == 0, sign, 0.0)
    return logv, sign


def overlap_element(l: int, n: int, xi: float) -> float:
    """One matrix element by direct summation of the closed-form series."""
    if (l - n) % 2:
        return 0.0
    if xi == 0.0:
        return 1.0 if l == n else 0.0
    log_ch = math.log(math.cosh(xi))
    half_t = 0.5 * math.tanh(xi)
    if half_t == 0.0:
        return 1.0 if l == n else 0.0
    log_t = math.log(abs(half_t))
    shift = (l - n) // 2
    # Kronecker delta fixes k' = k + (l - n)/2
    terms = []
    for k in range(max(0, -shift), n // 2 + 1):
        kp = k + shift
        p = k + kp
        log_mag = (0.5 * (math.lgamma(l + 1) + math.lgamma(n + 1)) - (n + 0.5) * log_ch
                   - math.lgamma(kp + 1) - math.lgamma(k + 1) - math.lgamma(n - 2 * k + 1)
                   + 2 * k * log_ch + p * log_t)
        sign = -1.0 if k % 2 else 1.0
        if half_t < 0 and p % 2:
            sign = -sign
        terms.append(sign * math.exp(log_mag))
    return math.fsum(terms)


def closed_form_overlap(xi: float, dim: int) -> OverlapMatrix:
    """Overlap matrix from the closed-form series, entry by entry.

    Accurate to ~1e-12 only while l, n stay below a few tens; see the
    module docstring.
    """
    _check_box(xi, dim)
    S = np.zeros((dim, dim))
    for n in range(dim):
        for l in range(n % 2, dim, 2):
            S[l, n] = overlap_element(l, n, xi)
    S.flags.writeable = False
    return OverlapMatrix(float(xi), S)


def working_dim(xi: float, dim: int) -> int:
    """Size of the auxiliary space used by :func:`overlap_matrix`.

    A squeezed number state |n> spreads up to l ~ n exp(2|xi|); past that
    the amplitude falls like tanh|xi|^(dl/2).
    """
    t = abs(math.tanh(xi))
    spread = int(math.ceil(dim * math.exp(2 * abs(xi))))
    tail = 2 * int(math.ceil(math.log(_TAIL_EPS) / math.log(t))) if t > 0 else 0
    work = spread + tail + 40
    return work + work % 2


@lru_cache(maxsize=64)
def _overlap_cached(xi: float, dim: int) -> np.ndarray:
    if xi == 0.0:
        S = np.eye(dim)
        S.flags.writeable = False
        return S
    c, s = math.cosh(xi), math.sinh(xi)
    D = working_dim(xi, dim)

    sectors = {}
    for p in (0, 1):
        ncols = len(range(p, dim, 2))
        if ncols == 0:
            continue
        l = np.arange(p, D, 2, dtype=float)
        diag = c * c * l + s * s * (l + 1.0)
        off = -c * s * np.sqrt((l[:-1] + 1.0) * (l[:-1] + 2.0))
        evals, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, ncols - 1))
        # eigenvalues of U N U^dag are exactly p, p + 2, ...
        expected = np.arange(p, dim, 2)
        if np.max(np.abs(evals - expected)) > 1e-6 * max(1.0, dim):
            raise ParameterRangeError(f"squeeze spectrum not resolved for xi={xi}, dim={dim}")
        sectors[p] = vecs

    sq = np.sqrt(np.arange(D + 1, dtype=float))
    S = np.zeros((dim, dim))
    prev = None
    for n in range(dim):
        p = n % 2
        col = np.zeros(D)
        col[p::2] = sectors[p][:, n // 2]
        if n == 0:
            # squeezed vacuum has a positive <0|U|0>
            ref = col[0]
        else:
            pred = np.zeros(D)
            pred[1:] = c * sq[1:D] * prev[:-1]
            pred[:-1] -= s * sq[1:D] * prev[1:]
            ref = col @ pred
        if ref < 0:
            col = -col
        S[:, n] = col[:dim]
        prev = col
    S.flags.writeable = False
    return S


def overlap_matrix(xi: float, dim: int) -> OverlapMatrix:
    """Squeeze-overlap matrix ``S[l, n]`` for ``0 <= l, n < dim``.

    Entries are the exact infinite-space matrix elements (not those of a
    squeeze operator truncated to ``dim`` states).  Entries with odd l - n
    are exact zeros.

    Raises
    ------
    ParameterRangeError
        if ``|xi| > 2`` or ``dim > 512``.
    """
    _check_box(xi, dim)
    return OverlapMatrix(float(xi), _overlap_cached(float(xi), int(dim)))
