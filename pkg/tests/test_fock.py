import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quadcool import fock
from quadcool.errors import DimensionMismatchError, InvalidDimensionError
from quadcool.fock import HilbertDims


@given(st.integers(1, 60))
def test_number_from_ladder_is_exact(d):
    a = fock.destroy(d)
    N = fock.dag(a) @ a
    n = np.arange(d)
    assert np.count_nonzero(N - np.diag(np.diag(N))) == 0
    # sqrt(n)^2 is n to within one rounding
    assert np.all(np.abs(np.diag(N) - n) <= np.spacing(n.astype(float)))
    assert np.array_equal(fock.number(d), np.diag(n).astype(complex))


def test_canonical_commutator_except_top_state():
    d = 8
    c = fock.commutator(fock.destroy(d), fock.create(d))
    expected = np.eye(d)
    expected[-1, -1] = 1 - d
    assert np.allclose(c, expected, atol=0)


small = st.lists(st.integers(-5, 5), min_size=4, max_size=4).map(lambda v: np.array(v, float).reshape(2, 2))


@given(small, small, small)
def test_kron_associative_exactly(A, B, C):
    assert np.array_equal(fock.kron(fock.kron(A, B), C), fock.kron(A, fock.kron(B, C)))
    assert np.array_equal(fock.kron(A, B, C), fock.kron(A, fock.kron(B, C)))


def test_composite_ordering_matches_kron():
    dims = HilbertDims(3, 5)
    assert dims.dim == 15
    a = fock.kron(fock.destroy(3), fock.identity(5))
    # a |photon=2, phonon=4> = sqrt(2) |1, 4>
    v = np.zeros(15)
    v[dims.index(2, 4)] = 1
    w = a @ v
    assert w[dims.index(1, 4)] == pytest.approx(np.sqrt(2))
    assert dims.photon_of(dims.index(2, 4)) == 2
    assert dims.phonon_of(dims.index(2, 4)) == 4


def test_expect_is_real_for_hermitian_pairs():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    op = X + X.conj().T
    Y = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    rho = Y @ Y.conj().T
    rho /= np.trace(rho)
    assert abs(fock.expect(op, rho).imag) < 1e-12


def test_expm_inverse():
    rng = np.random.default_rng(0)
    M = rng.normal(size=(7, 7)) + 1j * rng.normal(size=(7, 7))
    M *= 5 / np.linalg.norm(M, 2)
    assert np.max(np.abs(fock.expm(M) @ fock.expm(-M) - np.eye(7))) < 1e-8


def test_thermal_and_fock_states():
    rho = fock.thermal_dm(2.0, 200)
    assert np.trace(rho).real == pytest.approx(1.0)
    assert fock.expect(fock.number(200), rho).real == pytest.approx(2.0, rel=1e-10)
    f = fock.fock_dm(3, 5)
    assert f[3, 3] == 1 and np.trace(f) == 1


def test_hermiticity_helpers():
    a = fock.destroy(4)
    assert not fock.is_hermitian(a)
    assert fock.is_hermitian(a + fock.dag(a))
    assert fock.hermiticity_error(a + fock.dag(a)) == 0


@pytest.mark.parametrize("bad", [0, -1, 2.5])
def test_bad_dimension(bad):
    with pytest.raises(InvalidDimensionError):
        fock.destroy(bad)


def test_photon_cutoff_must_hold_one_photon():
    with pytest.raises(InvalidDimensionError):
        HilbertDims(1, 10)


def test_mismatched_shapes():
    with pytest.raises(DimensionMismatchError):
        fock.commutator(np.eye(2), np.eye(3))
