import math

import numpy as np
import pytest

from hamsynth.channels import correlated_pauli_channel, is_cptp, unitary_channel
from hamsynth.metrics import j_fidelity
from hamsynth.pauli import PauliString, expm_hermitian
from hamsynth.timing import (TimingSpec, collective_fidelity, fidelity_grid, independent_timing_channel,
                             mc_timing_channel, mc_timing_channel_direct, pairwise_fidelity, q_factor,
                             three_qubit_g, timing_channel_commuting_sum, timing_channel_unitary,
                             timing_fidelity_lower_bound)

ZZ = PauliString("ZZ")


def test_spec_validation():
    with pytest.raises(ValueError):
        TimingSpec(-0.1, ((1.0, ZZ),))
    with pytest.raises(ValueError):
        TimingSpec(0.1, ((1.0, PauliString("ZI")), (1.0, PauliString("XI"))))
    with pytest.raises(ValueError):
        TimingSpec(0.1, ((1.0, PauliString("ZZ", 2.0)),))


def test_unitary_timing_channel():
    assert np.allclose(timing_channel_unitary(1.0, ZZ, 0.0).superop, np.eye(16))
    s = 0.3
    q = math.exp(-2 * s**2)
    ch = timing_channel_unitary(1.0, ZZ, s)
    assert np.allclose(ch.superop, correlated_pauli_channel(ZZ, q).superop)
    assert np.isclose(j_fidelity(ch, np.eye(4)), (1 + q) / 2)


@pytest.mark.parametrize("sigma", [0.05, 0.3, 1.0, 2.0])
def test_quadrature_matches_closed_forms(sigma):
    single = TimingSpec(sigma, ((1.0, ZZ),))
    assert np.abs(timing_channel_commuting_sum(single).superop
                  - timing_channel_unitary(1.0, ZZ, sigma).superop).max() < 1e-10
    star = TimingSpec.star(2, sigma)
    assert abs(j_fidelity(timing_channel_commuting_sum(star), np.eye(8)) - three_qubit_g(1.0, sigma)) < 1e-10
    assert abs(collective_fidelity(star) - three_qubit_g(1.0, sigma)) < 1e-10


def test_collective_channel_is_cptp_and_trivial_at_zero():
    spec = TimingSpec.star(3, 0.4)
    assert is_cptp(timing_channel_commuting_sum(spec), atol=1e-8)
    assert np.allclose(timing_channel_commuting_sum(TimingSpec.star(2, 0.0)).superop, np.eye(64))


def test_independent_channel_product_fidelity():
    s = 0.25
    q = q_factor(1.0, s)
    spec = TimingSpec.star(2, s)
    assert np.isclose(j_fidelity(independent_timing_channel(spec), np.eye(8)), ((1 + q) / 2) ** 2)
    assert np.isclose(pairwise_fidelity(spec), ((1 + q) / 2) ** 2)
    assert np.allclose(independent_timing_channel(TimingSpec.star(2, 0.0)).superop, np.eye(64))


@pytest.mark.parametrize("sigma", [0.1, 0.5, 1.0])
def test_lower_bound_cases(sigma):
    assert np.isclose(timing_fidelity_lower_bound(1, 1.0, sigma), (1 + q_factor(1.0, sigma)) / 2)
    assert np.isclose(timing_fidelity_lower_bound(2, 1.0, sigma), three_qubit_g(1.0, sigma))
    assert np.isclose(timing_fidelity_lower_bound(3, 1.0, sigma), collective_fidelity(TimingSpec.chain(3, sigma)))
    for n in (1, 2, 3, 4):
        assert timing_fidelity_lower_bound(n, 1.0, sigma) <= collective_fidelity(TimingSpec.star(n, sigma)) + 1e-12
    with pytest.raises(ValueError):
        timing_fidelity_lower_bound(0, 1.0, sigma)


def test_monte_carlo_oracles():
    assert np.allclose(mc_timing_channel(TimingSpec(0.0, ((1.0, ZZ),)), 1000, 5).superop, np.eye(16))
    s = 0.4
    two = TimingSpec(s, ((1.0, ZZ),))
    mc = mc_timing_channel(two, 100_000, 7)
    assert np.abs(mc.superop - timing_channel_unitary(1.0, ZZ, s).superop).max() < 5e-3
    three = TimingSpec.star(2, s)
    mc3 = mc_timing_channel(three, 100_000, 7)
    assert np.abs(mc3.superop - timing_channel_commuting_sum(three).superop).max() < 5e-3
    with pytest.raises(ValueError):
        mc_timing_channel(two, 10, 0)


def test_fast_mc_matches_brute_force():
    spec = TimingSpec.star(2, 0.3)
    a = mc_timing_channel(spec, 2000, 11)
    b = mc_timing_channel_direct(spec, 2000, 11)
    assert np.allclose(a.superop, b.superop, atol=1e-12)


def test_holder_comparison_grid():
    rows = fidelity_grid(np.linspace(0.05, 0.5, 10), [1, 2, 3, 4, 5])
    for r in rows:
        assert r["collective"] >= r["pairwise"] - 1e-12
    gap = {(r["n"], r["sigma"]): r["collective"] - r["pairwise"] for r in rows}
    assert gap[(5, 0.5)] > gap[(2, 0.5)] > gap[(2, 0.05)]


def test_timing_channel_commutes_with_ideal_evolution():
    spec = TimingSpec.star(2, 0.3)
    t_ch = timing_channel_commuting_sum(spec).superop
    u = unitary_channel(expm_hermitian(spec.hamiltonian(), 0.8)).superop
    assert np.linalg.norm(t_ch @ u - u @ t_ch) < 1e-10


def test_no_cross_terms_between_identity_and_hamiltonian():
    s = 0.6
    ch = timing_channel_unitary(1.0, ZZ, s)
    # Pauli transfer picture: only I and ZZ survive with weights (1+q)/2 and (1-q)/2
    q = q_factor(1.0, s)
    zz = ZZ.to_dense()
    rho = np.eye(4) / 4 + 0.1 * np.kron(np.array([[0, 1], [1, 0]]), np.eye(2))
    out = (ch.superop @ rho.reshape(-1, order="F")).reshape(4, 4, order="F")
    ref = (1 + q) / 2 * rho + (1 - q) / 2 * zz @ rho @ zz
    assert np.abs(out - ref).max() < 1e-12
