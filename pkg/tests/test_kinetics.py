import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quadcool.errors import DegenerateKineticsError, DivergenceError, NegativeProbabilityError
from quadcool.kinetics import (KineticGenerator, PhononDistribution, build_generator, evolve,
                               rate_steady_state, steady_distribution, strong_absorption_limit,
                               thermal_generator, two_phonon_distribution)
from quadcool.params import SystemParams
from quadcool.scattering import rate_matrix
from quadcool.statistics import mech_stats

FIG1 = dict(kappa=0.25, omega_drive=0.1, gamma_m=1e-6, n_th=10)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 0.9), st.floats(-5, 0), st.floats(0, 1e-3), st.floats(0, 20))
def test_generator_is_a_valid_markov_generator(g, delta, gamma_m, n_th):
    p = SystemParams(g=g, kappa=0.25, delta=delta, omega_drive=0.1, gamma_m=gamma_m, n_th=n_th)
    G = build_generator(rate_matrix(p, 20), p).matrix
    off = G - np.diag(np.diag(G))
    assert np.all(off >= 0)
    assert np.max(np.abs(G.sum(axis=0))) <= 1e-12 * max(1.0, np.max(np.abs(G)))


def test_thermal_baseline():
    p = SystemParams(g=0.1, kappa=0.25, delta=-2, omega_drive=0.0, gamma_m=1e-6, n_th=10)
    dist = rate_steady_state(p)
    assert dist.tail_converged
    s = mech_stats(dist)
    assert s.nbar == pytest.approx(10, rel=1e-3)
    assert s.fluct_f == pytest.approx(2.0, abs=1e-3)


def test_thermal_generator_detailed_balance():
    G = thermal_generator(40, 1e-3, 2.0)
    P = steady_distribution(KineticGenerator(G)).probs
    n = np.arange(40)
    thermal = (2 / 3) ** n
    assert np.allclose(P, thermal / thermal.sum(), atol=1e-12)


def test_parity_conserved_without_bath():
    p = SystemParams(g=0.1, kappa=0.25, delta=-2, omega_drive=0.1)
    gen = build_generator(rate_matrix(p, 20), p)
    p0 = np.zeros(20)
    p0[[3, 4, 7]] = [0.2, 0.5, 0.3]
    out = evolve(PhononDistribution(p0), gen, 2000.0)
    assert out.probs[1::2].sum() == pytest.approx(0.5, abs=1e-8)
    assert out.probs[0::2].sum() == pytest.approx(0.5, abs=1e-8)


def test_evolution_approaches_steady_state():
    p = SystemParams(g=0.1, delta=-2, **dict(FIG1, gamma_m=1e-3))
    gen = build_generator(rate_matrix(p, 60), p)
    start = np.zeros(60)
    start[10] = 1
    out = evolve(PhononDistribution(start), gen, 1e5)
    assert np.max(np.abs(out.probs - steady_distribution(gen).probs)) < 1e-6


def test_detailed_balance_is_broken_at_optimum():
    p = SystemParams(g=0.1, delta=-2, **FIG1)
    dist = rate_steady_state(p)
    gen = build_generator(rate_matrix(p, dist.n_states), p)
    G, P = gen.matrix, dist.probs
    flux = P[None, :] * G - (P[None, :] * G).T
    np.fill_diagonal(flux, 0)
    assert np.max(np.abs(flux)) > 10 * 1e-10 * np.max(np.abs(G))


def test_weak_coupling_reaches_strong_absorption_limit():
    # two-phonon absorption dominating the bath leaves only |0> and |1>
    p = SystemParams(g=0.02, kappa=0.25, delta=-2, omega_drive=0.1, gamma_m=1e-8, n_th=10)
    dist = rate_steady_state(p)
    p0, p1, nbar = strong_absorption_limit(10)
    assert dist.probs[0] == pytest.approx(p0, abs=0.02)
    assert dist.probs[1] == pytest.approx(p1, abs=0.02)


def test_strong_absorption_limit_values():
    assert strong_absorption_limit(0) == (1.0, 0.0, 0.0)
    p0, p1, nbar = strong_absorption_limit(10)
    assert nbar == pytest.approx(1 / (4 + 1 / 10))
    assert p0 + p1 == pytest.approx(1.0)
    assert strong_absorption_limit(1e12) == pytest.approx((0.75, 0.25, 0.25))


def test_two_phonon_distribution():
    d = two_phonon_distribution(0.2, 0.0, 40)
    assert np.all(d.probs[1::2] == 0)
    assert d.probs[2] / d.probs[0] == pytest.approx(0.2)
    d = two_phonon_distribution(0.2, 0.3, 40)
    assert d.probs[1::2].sum() == pytest.approx(0.3)
    with pytest.raises(DivergenceError):
        two_phonon_distribution(1.0, 0.0, 10)


def test_degenerate_generator():
    with pytest.raises(DegenerateKineticsError):
        steady_distribution(KineticGenerator(np.zeros((5, 5))))


def test_clamping_policy():
    d = PhononDistribution.from_values([0.5, -1e-14, 0.5])
    assert d.clamped == 1 and d.probs[1] == 0
    with pytest.raises(NegativeProbabilityError):
        PhononDistribution.from_values([0.5, -1e-6, 0.5])
    with pytest.raises(ValueError):
        PhononDistribution(np.array([0.5, 0.4]))


def test_truncation_grows_until_tail_converges():
    p = SystemParams(g=0.1, delta=-4.5, **FIG1)
    dist = rate_steady_state(p)
    assert dist.tail_converged
    assert rate_steady_state(p, n_states=dist.n_states + 20).probs[:10] == pytest.approx(dist.probs[:10], abs=1e-6)
