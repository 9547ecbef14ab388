"""Full Lindblad master equation for the driven cavity + mechanics.

    d rho/dt = -i[H, rho] + c_kappa L[a] rho + gamma_m (n_th+1) L[b] rho + gamma_m n_th L[b^dag] rho
    H = -Delta a^dag a + omega_m b^dag b + g a^dag a (b + b^dag)^2 + Omega (a + a^dag)

with L[o] rho = o rho o^dag - {o^dag o, rho}/2.  The cavity prefactor
c_kappa is kappa (``full_kappa``: energy decay rate kappa, matching the
-i kappa/2 a^dag a damping used by the scattering rates) or kappa/2
(``half_kappa``).

Vectorization is row-major, vec(rho)[k*d + l] = rho[k, l], so a term
A rho B contributes A[k, i] B[j, l] to the superoperator element
((k, l), (i, j)).

Both H and the dissipators conserve (phonon(k) - phonon(l)) mod 2 of a
matrix element |k><l|.  The default ``sector="even"`` keeps only elements
with even phonon difference, which contains every diagonal element and
hence the steady state.  That halves the unknowns and cuts the dense LU
cost eightfold.  Peak memory per solve is about three copies of the
superoperator: 3 * 16 * (d^2/2)^2 bytes, i.e. ~0.8 GB at 3 x 30 states.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.linalg import lapack

from . import fock
from .errors import NonUniqueSteadyStateError, SolverError, StabilityError
from .fock import HilbertDims
from .kinetics import PhononDistribution
from .params import SystemParams, unstable_photon_numbers

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-8
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-8


class CavityRateConvention(str, enum.Enum):
    HALF_KAPPA = "half_kappa"
    FULL_KAPPA = "full_kappa"


@dataclass(frozen=True, eq=False)
class DensityOperator:
    dims: HilbertDims
    matrix: np.ndarray
    residual: float = 0.0

    def __post_init__(self):
        rho = self.matrix
        d = self.dims.dim
        if rho.shape != (d, d):
            raise ValueError(f"density matrix shape {rho.shape} does not match dims {d}")
        herm = fock.hermiticity_error(rho)
        if herm > HERMITIAN_TOL:
            raise SolverError(f"density matrix not Hermitian ({herm:.2e})")
        tr = np.trace(rho)
        if abs(tr - 1.0) > TRACE_TOL:
            raise SolverError(f"density matrix trace {tr:.12g}")
        low = self.min_eigenvalue
        if low < -POSITIVITY_TOL:
            raise SolverError(f"density matrix eigenvalue {low:.2e} below -{POSITIVITY_TOL:g}")

    @property
    def min_eigenvalue(self) -> float:
        return float(scipy.linalg.eigvalsh(self.matrix, subset_by_index=[0, 0])[0])


@dataclass(frozen=True, eq=False)
class Liouvillian:
    """Superoperator matrix acting on vec(rho) restricted to ``pairs``.

    ``pairs[r] = (k, l)`` names the density-matrix element carried by
    component r.  For ``sector="full"`` every pair is present.
    """

    dims: HilbertDims
    matrix: np.ndarray
    pairs: np.ndarray
    sector: str

    @property
    def diagonal_rows(self) -> np.ndarray:
        return np.flatnonzero(self.pairs[:, 0] == self.pairs[:, 1])

    def vectorize(self, rho) -> np.ndarray:
        rho = np.asarray(rho)
        return rho[self.pairs[:, 0], self.pairs[:, 1]]

    def unvectorize(self, vec) -> np.ndarray:
        d = self.dims.dim
        rho = np.zeros((d, d), dtype=complex)
        rho[self.pairs[:, 0], self.pairs[:, 1]] = vec
        return rho

    def apply(self, rho) -> np.ndarray:
        return self.unvectorize(self.matrix @ self.vectorize(rho))


def check_dims_stability(params: SystemParams, dims: HilbertDims) -> None:
    bad = unstable_photon_numbers(params.g, params.omega_m, dims.n_photon_states)
    if bad:
        raise StabilityError(
            f"omega_m + 4 s g <= 0 for photon numbers s = {bad} kept in the cavity cutoff", bad)


def mode_operators(dims: HilbertDims):
    """Cavity and mechanical annihilation operators on the composite space."""
    a = fock.kron(fock.destroy(dims.n_photon_states), fock.identity(dims.n_phonon_states))
    b = fock.kron(fock.identity(dims.n_photon_states), fock.destroy(dims.n_phonon_states))
    return a, b


def hamiltonian(params: SystemParams, dims: HilbertDims) -> np.ndarray:
    """Drive-frame Hamiltonian on the truncated composite space."""
    check_dims_stability(params, dims)
    a, b = mode_operators(dims)
    ad, bd = fock.dag(a), fock.dag(b)
    na = ad @ a
    x = b + bd
    H = (-params.delta * na + params.omega_m * (bd @ b) + params.g * (na @ x @ x)
         + params.omega_drive * (a + ad))
    # exact Hermiticity despite roundoff in the products
    return 0.5 * (H + H.conj().T)


def collapse_operators(params: SystemParams, dims: HilbertDims,
                       convention=CavityRateConvention.FULL_KAPPA) -> list:
    convention = CavityRateConvention(convention)
    a, b = mode_operators(dims)
    cavity = params.kappa if convention is CavityRateConvention.FULL_KAPPA else params.kappa / 2
    ops = [np.sqrt(cavity) * a]
    if params.gamma_m > 0:
        ops.append(np.sqrt(params.gamma_m * (params.n_th + 1.0)) * b)
        if params.n_th > 0:
            ops.append(np.sqrt(params.gamma_m * params.n_th) * fock.dag(b))
    return ops


def _sector_pairs(dims: HilbertDims, sector: str):
    d = dims.dim
    k, l = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
    k, l = k.ravel(), l.ravel()
    if sector == "even":
        keep = (dims.phonon_of(k) - dims.phonon_of(l)) % 2 == 0
        k, l = k[keep], l[keep]
    elif sector != "full":
        raise ValueError(f"sector must be 'even' or 'full', got {sector!r}")
    pos = -np.ones((d, d), dtype=np.int64)
    pos[k, l] = np.arange(k.size)
    return np.column_stack([k, l]), pos


def _row_pattern(A):
    """Column indices and values of the nonzeros of each row, zero-padded."""
    nz = A != 0
    width = max(int(nz.sum(axis=1).max(initial=0)), 1)
    order = np.argsort(~nz, axis=1, kind="stable")[:, :width]
    vals = np.take_along_axis(A, order, axis=1)
    vals = np.where(np.take_along_axis(nz, order, axis=1), vals, 0)
    return order, vals


def _accumulate(L, pos, pairs, A, B):
    """L[r, pos[i, j]] += A[k_r, i] * B[j, l_r] for every pair r = (k_r, l_r)."""
    k, l = pairs[:, 0], pairs[:, 1]
    ai, av = _row_pattern(A)
    bj, bv = _row_pattern(B.T)
    i = ai[k][:, :, None]
    j = bj[l][:, None, :]
    vals = av[k][:, :, None] * bv[l][:, None, :]
    cols = pos[i, j]
    rows = np.broadcast_to(np.arange(k.size)[:, None, None], cols.shape)
    use = (vals != 0) & (cols >= 0)
    np.add.at(L, (rows[use], cols[use]), vals[use])


def liouvillian(params: SystemParams, dims: HilbertDims,
                cavity_rate_convention=CavityRateConvention.FULL_KAPPA,
                sector: str = "even") -> Liouvillian:
    H = hamiltonian(params, dims)
    cs = collapse_operators(params, dims, cavity_rate_convention)
    d = dims.dim
    eye = np.eye(d, dtype=complex)
    K = -1j * H
    for c in cs:
        K = K - 0.5 * (fock.dag(c) @ c)
    pairs, pos = _sector_pairs(dims, sector)
    L = np.zeros((pairs.shape[0], pairs.shape[0]), dtype=complex)
    # K rho + rho K^dag + sum_c c rho c^dag
    _accumulate(L, pos, pairs, K, eye)
    _accumulate(L, pos, pairs, eye, fock.dag(K))
    for c in cs:
        _accumulate(L, pos, pairs, c, fock.dag(c))
    return Liouvillian(dims, L, pairs, sector)


def _bordered_solve(M, diag_rows):
    n = M.shape[0]
    r0 = diag_rows[0]
    A = M.copy()
    A[r0, :] = 0.0
    A[r0, diag_rows] = 1.0
    rhs = np.zeros(n, dtype=complex)
    rhs[r0] = 1.0
    anorm = np.abs(A).sum(axis=0).max()
    lu, piv, info = lapack.zgetrf(A, overwrite_a=True)
    if info > 0:
        return None, 0.0
    rcond, _ = lapack.zgecon(lu, anorm, norm="1")
    x, _ = lapack.zgetrs(lu, piv, rhs)
    # one step of iterative refinement against the bordered system
    Ax = M @ x
    Ax[r0] = x[diag_rows].sum()
    dx, _ = lapack.zgetrs(lu, piv, rhs - Ax)
    return x + dx, float(rcond)


def _eig_null_vector(M):
    w, v = scipy.linalg.eig(M)
    return v[:, np.argmin(np.abs(w))]


def steady_state(L: Liouvillian) -> DensityOperator:
    """Steady density operator from the bordered (trace-constrained) solve."""
    M = L.matrix
    diag_rows = L.diagonal_rows
    x, rcond = _bordered_solve(M, diag_rows)

    def finish(vec):
        rho = L.unvectorize(vec)
        rho = 0.5 * (rho + rho.conj().T)
        rho /= np.trace(rho).real
        res = float(np.max(np.abs(M @ L.vectorize(rho))))
        return rho, res

    # the bordered system is singular exactly when the null space is not
    # one-dimensional (or holds only traceless vectors)
    if x is None or rcond < 1e-15 or not np.all(np.isfinite(x)):
        raise NonUniqueSteadyStateError(
            f"Liouvillian null space is not one-dimensional (rcond {rcond:.1e})")
    rho, residual = finish(x)
    if residual > RESIDUAL_TOL and M.shape[0] <= 2500:
        log.info("bordered solve residual %.2e; falling back to eigen-decomposition", residual)
        rho, residual = finish(_eig_null_vector(M))
    if residual > RESIDUAL_TOL:
        raise SolverError(f"steady-state residual {residual:.2e} exceeds {RESIDUAL_TOL:g}")
    return DensityOperator(L.dims, rho, residual)


def phonon_distribution(rho: DensityOperator) -> PhononDistribution:
    """Reduced phonon-number distribution (partial trace over the cavity)."""
    dims = rho.dims
    diag = np.real(np.diag(rho.matrix)).reshape(dims.n_photon_states, dims.n_phonon_states)
    return PhononDistribution.from_values(diag.sum(axis=0), neg_tol=POSITIVITY_TOL)


def photon_number(rho: DensityOperator) -> float:
    a, _ = mode_operators(rho.dims)
    return fock.expect(fock.dag(a) @ a, rho.matrix).real


def master_steady_state(params: SystemParams, dims: HilbertDims | None = None,
                        cavity_rate_convention=CavityRateConvention.FULL_KAPPA,
                        sector: str = "even") -> DensityOperator:
    dims = dims or HilbertDims()
    return steady_state(liouvillian(params, dims, cavity_rate_convention, sector))


def liouvillian_memory_bytes(dims: HilbertDims, sector: str = "even") -> int:
    """Bytes held by one superoperator matrix (a solve needs about three)."""
    n = _sector_pairs(dims, sector)[0].shape[0]
    return 16 * n * n
