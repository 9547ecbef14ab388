"""Dense operator algebra on truncated Fock spaces.

Matrices are plain ``numpy.ndarray`` objects of complex dtype.  Composite
cavity (x) mechanics states use the ordering

    index = photon * n_phonon_states + phonon

which is what ``np.kron(photon_op, phonon_op)`` produces.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionMismatchError, InvalidDimensionError


@dataclass(frozen=True)
class HilbertDims:
    """Fock cutoffs of the cavity and the mechanical mode."""

    n_photon_states: int = 3
    n_phonon_states: int = 30

    def __post_init__(self):
        if int(self.n_photon_states) != self.n_photon_states or self.n_photon_states < 2:
            raise InvalidDimensionError(
                f"n_photon_states must be an integer >= 2, got {self.n_photon_states}")
        if int(self.n_phonon_states) != self.n_phonon_states or self.n_phonon_states < 1:
            raise InvalidDimensionError(
                f"n_phonon_states must be a positive integer, got {self.n_phonon_states}")

    @property
    def dim(self) -> int:
        return self.n_photon_states * self.n_phonon_states

    def index(self, photon: int, phonon: int) -> int:
        return photon * self.n_phonon_states + phonon

    def phonon_of(self, index):
        return np.asarray(index) % self.n_phonon_states

    def photon_of(self, index):
        return np.asarray(index) // self.n_phonon_states


def _check_dim(dim):
    if int(dim) != dim or dim < 1:
        raise InvalidDimensionError(f"dimension must be a positive integer, got {dim!r}")
    return int(dim)


def destroy(dim: int) -> np.ndarray:
    """Annihilation operator with sqrt(n) on the superdiagonal."""
    dim = _check_dim(dim)
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def create(dim: int) -> np.ndarray:
    return destroy(dim).T.copy()


def number(dim: int) -> np.ndarray:
    dim = _check_dim(dim)
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def identity(dim: int) -> np.ndarray:
    return np.eye(_check_dim(dim), dtype=complex)


def _as_matrix(M):
    M = np.asarray(M)
    if M.ndim != 2:
        raise DimensionMismatchError(f"expected a 2-d matrix, got shape {M.shape}")
    return M


def kron(A, B, *more) -> np.ndarray:
    """Kronecker product; extra arguments are folded in left to right."""
    out = np.kron(_as_matrix(A), _as_matrix(B))
    for C in more:
        out = np.kron(out, _as_matrix(C))
    return out


def dag(M) -> np.ndarray:
    return _as_matrix(M).conj().T


def commutator(A, B) -> np.ndarray:
    A, B = _as_matrix(A), _as_matrix(B)
    if A.shape[1] != B.shape[0] or B.shape[1] != A.shape[0]:
        raise DimensionMismatchError(f"cannot commute {A.shape} with {B.shape}")
    return A @ B - B @ A


def hermiticity_error(M) -> float:
    """Largest entrywise deviation max |M - M^dagger|."""
    M = _as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatchError(f"non-square matrix {M.shape}")
    return float(np.max(np.abs(M - M.conj().T), initial=0.0))


def is_hermitian(M, tol: float = 0.0) -> bool:
    return hermiticity_error(M) <= tol


def expect(op, rho) -> complex:
    """Expectation value trace(op @ rho)."""
    op, rho = _as_matrix(op), _as_matrix(rho)
    if op.shape[1] != rho.shape[0] or op.shape[0] != rho.shape[1]:
        raise DimensionMismatchError(f"operator {op.shape} does not match state {rho.shape}")
    # trace of a product without forming it
    return complex(np.einsum("ij,ji->", op, rho))


def expm(M) -> np.ndarray:
    """Matrix exponential (Pade scaling and squaring).

    Used to cross-check closed forms; no production path depends on it.
    """
    M = _as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatchError(f"expm needs a square matrix, got {M.shape}")
    return scipy.linalg.expm(M)


def fock_dm(n: int, dim: int) -> np.ndarray:
    dim = _check_dim(dim)
    if not 0 <= n < dim:
        raise InvalidDimensionError(f"Fock state {n} outside a {dim}-state space")
    rho = np.zeros((dim, dim), dtype=complex)
    rho[n, n] = 1.0
    return rho


def thermal_dm(n_th: float, dim: int, normalize: bool = True) -> np.ndarray:
    """Diagonal thermal state with Boltzmann weights n_th^n / (n_th+1)^(n+1).

    With ``normalize=False`` the truncated weights are left as they are, so
    their sum falls short of one by the discarded tail.
    """
    dim = _check_dim(dim)
    if n_th < 0:
        raise ValueError(f"n_th must be >= 0, got {n_th}")
    n = np.arange(dim)
    if n_th == 0:
        p = (n == 0).astype(float)
    else:
        p = np.exp(n * np.log(n_th / (n_th + 1.0))) / (n_th + 1.0)
    if normalize:
        p = p / p.sum()
    return np.diag(p).astype(complex)
