import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamsynth.channels import (apply, apply_on_qubits, choi_of, compose, correlated_pauli_channel, dephasing_channel,
                               identity_channel, is_cptp, partial_trace, pure_state, random_channel,
                               random_density_matrix, random_unitary, unitary_channel)
from hamsynth.lindblad import phase_gate_unitary
from hamsynth.metrics import j_fidelity
from hamsynth.pauli import PauliString, kron_all, pauli_matrix
from hamsynth.teleport import (ResourceState, admissible_rounds, dephasing_teleport_fidelity, ghz_kappa_resource,
                               ghz_resource, ghz_teleport_channel, jamiolkowski_teleport, noisy_ghz_resource,
                               teleport_analytic_fidelity, teleport_branch_probabilities, timing_teleport_fidelity,
                               to_graph_frame, u_alpha, weak_protocol_deterministic, weak_protocol_round)

PLUS = np.array([1, 1]) / np.sqrt(2)


def conj(u, rho):
    return u @ rho @ u.conj().T


def test_resource_validation():
    with pytest.raises(ValueError):
        ResourceState("bogus", 1, 0.0, np.eye(2) / 2)
    with pytest.raises(ValueError):
        ResourceState("ghz_tilde", 1, 0.0, np.eye(2))


def test_teleport_through_identity(rng):
    rho = random_density_matrix(2, rng)
    prob, out = jamiolkowski_teleport(choi_of(identity_channel(2)), rho)
    assert abs(prob - 0.25) < 1e-12
    assert np.allclose(out, rho)
    with pytest.raises(ValueError):
        jamiolkowski_teleport(np.eye(4) / 4, np.eye(4) / 4)


def test_teleport_phase_gate_gives_graph_state():
    e = choi_of(unitary_channel(phase_gate_unitary()))
    prob, out = jamiolkowski_teleport(e, pure_state(np.kron(PLUS, PLUS)))
    graph = phase_gate_unitary() @ np.kron(PLUS, PLUS)
    assert abs(prob - 1 / 16) < 1e-12
    assert np.allclose(out, pure_state(graph))


@pytest.mark.parametrize("d", [2, 4, 8])
def test_teleport_probability_and_output(d, rng):
    c = random_channel(d, rng)
    rho = random_density_matrix(d, rng)
    prob, out = jamiolkowski_teleport(choi_of(c), rho)
    assert abs(prob - 1 / d**2) < 1e-10
    assert np.allclose(out, apply(c, rho))


def test_local_manipulation_of_choi_state(rng):
    c = random_channel(2, rng)
    b1, b2 = random_unitary(2, rng), random_unitary(2, rng)
    b = np.kron(b1, b2)
    e2 = b @ choi_of(c) @ b.conj().T
    rho = random_density_matrix(2, rng)
    _, out = jamiolkowski_teleport(e2, rho)
    ref = conj(b1, apply(c, conj(b2.T, rho)))
    assert np.allclose(out, ref, atol=1e-10)


def test_weak_round_trivial_angle(rng):
    rho = random_density_matrix(4, rng)
    for br in weak_protocol_round(0.0, rho, 2):
        assert np.allclose(br.output, rho)
    with pytest.raises(ValueError):
        weak_protocol_round(0.1, np.eye(2) / 2, 1)


@pytest.mark.parametrize("n", [2, 3])
def test_weak_round_branches(n, rng):
    alpha = math.pi / 8
    rho = random_density_matrix(2**n, rng)
    branches = weak_protocol_round(alpha, rho, n)
    assert len(branches) == 4**n
    assert abs(sum(b.probability for b in branches) - 1) < 1e-9
    assert abs(sum(b.probability for b in branches if b.success) - 0.5) < 1e-10
    good, bad = conj(u_alpha(alpha, n), rho), conj(u_alpha(-alpha, n), rho)
    for b in branches:
        assert np.allclose(b.output, good if b.success else bad, atol=1e-10)


@pytest.mark.parametrize("big_n", [1, 2, 3, 4])
def test_deterministic_weak_protocol(big_n, rng):
    alpha = math.pi / 2**big_n
    rho = random_density_matrix(4, rng)
    out = weak_protocol_deterministic(alpha, rho)
    assert np.allclose(out, conj(u_alpha(alpha, 2), rho), atol=1e-10)


def test_deterministic_edge_cases(rng):
    rho = random_density_matrix(4, rng)
    assert np.allclose(weak_protocol_deterministic(0.0, rho), rho)
    assert admissible_rounds(math.pi / 8) == 3
    with pytest.raises(ValueError, match="nearest admissible N is 3"):
        weak_protocol_deterministic(0.4, rho)


def test_ghz_resources():
    one = ghz_resource(1)
    assert abs(one.purity() - 1) < 1e-10
    assert np.allclose(partial_trace(one.state, [0], 2), np.eye(2) / 2)
    three = ghz_resource(3)
    xs = kron_all([pauli_matrix(1)] * 4)
    assert abs(np.trace(xs @ three.state).real - 1) < 1e-12
    ghz = np.zeros(16)
    ghz[0] = ghz[-1] = 1 / math.sqrt(2)
    assert np.allclose(three.state, pure_state(ghz), atol=1e-12)
    with pytest.raises(ValueError):
        ghz_resource(9)


def test_noisy_resource_patterns():
    assert np.allclose(noisy_ghz_resource(3, "dephasing", 0.0).state, ghz_resource(3).state)
    g0, n = 0.08, 3
    p = math.exp(-g0 * math.pi / 4)
    graph = to_graph_frame(ghz_resource(n).state, n)
    for q in range(n):
        graph = apply_on_qubits(graph, dephasing_channel(0, p), [q], n + 1)
    graph = apply_on_qubits(graph, dephasing_channel(0, p**n), [n], n + 1)
    assert np.allclose(to_graph_frame(noisy_ghz_resource(n, "dephasing", g0).state, n), graph, atol=1e-10)
    with pytest.raises(ValueError):
        noisy_ghz_resource(2, "bogus", 0.1)


@settings(max_examples=10, deadline=None)
@given(st.floats(-math.pi, math.pi), st.sampled_from([2, 3, 4]))
def test_pure_resource_gives_the_rotation(alpha, n):
    ch = ghz_teleport_channel(ghz_resource(n), alpha)
    assert np.abs(ch.superop - unitary_channel(u_alpha(alpha, n)).superop).max() < 1e-10


@pytest.mark.parametrize("n", [1, 2, 3])
def test_bell_measurement_variant(n):
    alpha = 0.3
    ch = ghz_teleport_channel(ghz_kappa_resource(n), alpha)
    assert np.abs(ch.superop - unitary_channel(u_alpha(alpha, n)).superop).max() < 1e-10


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("alpha", [math.pi / 4, 0.37, math.pi / 2**10])
def test_dephased_resource_exact(n, alpha):
    g0 = 0.05
    p = math.exp(-g0 * math.pi / 4)
    ch = ghz_teleport_channel(noisy_ghz_resource(n, "dephasing", g0), alpha)
    assert is_cptp(ch)
    assert abs(j_fidelity(ch, u_alpha(alpha, n)) - dephasing_teleport_fidelity(n, p, alpha)) < 1e-10


def test_odd_n_dephasing_matches_simple_form():
    p = 0.97
    assert abs(dephasing_teleport_fidelity(3, p) - teleport_analytic_fidelity(3, p, "dephasing")) < 1e-12
    assert abs(dephasing_teleport_fidelity(2, p) - teleport_analytic_fidelity(2, p, "dephasing")) > 1e-5


@pytest.mark.parametrize("n", [2, 3, 4])
def test_timing_resource_exact(n):
    sigma = 0.2
    q = math.exp(-2 * sigma**2)
    ch = ghz_teleport_channel(noisy_ghz_resource(n, "timing", sigma), math.pi / 4)
    assert abs(j_fidelity(ch, u_alpha(math.pi / 4, n)) - timing_teleport_fidelity(n, q)) < 1e-10
    if n == 3:
        assert abs(timing_teleport_fidelity(3, q) - teleport_analytic_fidelity(3, q, "timing")) < 1e-12


@pytest.mark.parametrize("alpha", [math.pi / 4, 0.4])
def test_e_dephasing_before_measurement(alpha):
    n, p = 3, 0.8
    rho = apply_on_qubits(ghz_resource(n).state, dephasing_channel(0, p), [n], n + 1)
    ch = ghz_teleport_channel(ResourceState("ghz_tilde", n, 0.0, rho), alpha)
    # a flipped E swaps the measurement outcomes, turning U(alpha) into U(-alpha)
    mix = (1 + p) / 2 * unitary_channel(u_alpha(alpha, n)).superop \
        + (1 - p) / 2 * unitary_channel(u_alpha(-alpha, n)).superop
    assert np.abs(ch.superop - mix).max() < 1e-10
    corr = compose(correlated_pauli_channel(PauliString("Z" * n), p), unitary_channel(u_alpha(alpha, n)))
    gap = np.abs(ch.superop - corr.superop).max()
    assert (gap < 1e-10) == (alpha == math.pi / 4)


def test_branch_probabilities_sum_to_one(rng):
    res = noisy_ghz_resource(2, "white", 0.03)
    probs = teleport_branch_probabilities(res, 0.7, random_density_matrix(4, rng))
    assert abs(probs.sum() - 1) < 1e-9
    assert probs.min() >= -1e-12


def test_analytic_forms():
    for kind in ("dephasing", "white", "timing"):
        assert teleport_analytic_fidelity(3, 1.0, kind) == pytest.approx(1.0)
    g = 1e-5
    p = math.exp(-g * math.pi / 4)
    assert (1 - teleport_analytic_fidelity(3, p, "dephasing")) / (3 * math.pi / 4 * g) == pytest.approx(1, rel=1e-3)
    assert (1 - teleport_analytic_fidelity(3, p, "white")) / (15 * math.pi / 16 * g) == pytest.approx(1, rel=1e-3)
    with pytest.raises(ValueError):
        teleport_analytic_fidelity(1, 0.9, "white")
