import numpy as np
import pytest

from hamsynth.channels import (apply, apply_on_qubits, channel_from_choi, channel_from_kraus, choi_of, compose,
                               correlated_pauli_channel, dephasing_channel, depolarizing_channel, embed_channel,
                               identity_channel, is_cptp, kraus_from_choi, partial_trace, pure_state,
                               random_channel, random_density_matrix, random_unitary, tensor_channels,
                               unitary_channel)
from hamsynth.metrics import j_fidelity
from hamsynth.pauli import PauliString, pauli_matrix

X, Z = pauli_matrix(1), pauli_matrix(3)
PLUS = np.array([1, 1]) / np.sqrt(2)


def test_kraus_channel_cases(rng):
    assert np.allclose(channel_from_kraus([np.eye(2)]).superop, np.eye(4))
    p = 0.8
    c = channel_from_kraus([np.sqrt(p) * np.eye(2), np.sqrt(1 - p) * Z])
    assert np.allclose(c.superop, dephasing_channel(0, 2 * p - 1).superop)
    u = random_unitary(4, rng)
    rho = random_density_matrix(4, rng)
    assert np.allclose(apply(channel_from_kraus([u]), rho), u @ rho @ u.conj().T)
    with pytest.raises(ValueError):
        channel_from_kraus([0.5 * np.eye(2)])


def test_apply_examples(rng):
    rho = random_density_matrix(2, rng)
    assert np.allclose(apply(identity_channel(2), rho), rho)
    assert np.allclose(apply(dephasing_channel(0, 0.0), pure_state(PLUS)), np.eye(2) / 2)
    assert np.allclose(apply(depolarizing_channel(0, 0.4), np.eye(2) / 2), np.eye(2) / 2)
    with pytest.raises(ValueError):
        apply(identity_channel(2), np.eye(4) / 4)


def test_trace_preservation_and_positivity(rng):
    c = random_channel(4, rng)
    for _ in range(100):
        out = apply(c, random_density_matrix(4, rng))
        assert abs(np.trace(out) - 1) < 1e-9
    assert np.linalg.eigvalsh(choi_of(c)).min() > -1e-9


def test_compose_cases(rng):
    p = 0.7
    assert np.allclose(compose(dephasing_channel(0, p), dephasing_channel(0, p)).superop,
                       dephasing_channel(0, p * p).superop)
    c = random_channel(2, rng)
    assert np.allclose(compose(identity_channel(2), c).superop, c.superop)
    u = random_unitary(2, rng)
    assert np.allclose(compose(unitary_channel(u), unitary_channel(u.conj().T)).superop, np.eye(4))


def test_dephasing_channel_examples():
    rho = pure_state(PLUS)
    p = np.exp(-np.log(2))
    out = apply(dephasing_channel(0, p), rho)
    assert np.isclose(2 * out[0, 1].real, 0.5)
    assert np.allclose(dephasing_channel(0, 1.0).superop, np.eye(4))
    with pytest.raises(ValueError):
        dephasing_channel(0, 1.5)


def test_depolarizing_channel_examples():
    assert np.allclose(depolarizing_channel(0, 1.0).superop, np.eye(4))
    assert np.allclose(apply(depolarizing_channel(0, 0.0), pure_state([1, 0])), np.eye(2) / 2)
    for p in (0.0, 0.3, 0.9):
        assert np.isclose(j_fidelity(depolarizing_channel(0, p), np.eye(2)), (1 + 3 * p) / 4)


def test_correlated_pauli_channel():
    q = 0.8
    c = correlated_pauli_channel(PauliString("ZZZ"), q)
    assert np.isclose(j_fidelity(c, np.eye(8)), (1 + q) / 2)
    assert np.allclose(correlated_pauli_channel(PauliString("ZZ"), 1.0).superop, np.eye(16))
    with pytest.raises(ValueError):
        correlated_pauli_channel(PauliString("ZZ", 2.0), 0.5)


def test_choi_examples():
    phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(choi_of(identity_channel(2)), np.outer(phi, phi))
    assert np.allclose(choi_of(depolarizing_channel(0, 0.0)), np.eye(4) / 4)
    e = choi_of(unitary_channel(np.diag([1, 1, 1, -1])))
    assert np.isclose(np.trace(e @ e).real, 1.0)


def test_choi_round_trip_and_kraus(rng):
    for _ in range(50):
        c = random_channel(4, rng, n_kraus=int(rng.integers(1, 5)))
        e = choi_of(c)
        assert np.allclose(channel_from_choi(e).superop, c.superop, atol=1e-9)
        assert np.allclose(channel_from_kraus(kraus_from_choi(e)).superop, c.superop, atol=1e-9)
    with pytest.raises(ValueError):
        channel_from_choi(np.eye(4) / 2)


def test_cptp_closure(rng):
    a, b = random_channel(2, rng), random_channel(2, rng)
    assert is_cptp(compose(a, b))
    assert is_cptp(tensor_channels(a, identity_channel(2)))


def test_dephasing_commutes_with_diagonal_unitaries(rng):
    u = np.diag(np.exp(1j * rng.normal(size=4)))
    d = embed_channel(dephasing_channel(0, 0.6), [1], 2)
    a = compose(d, unitary_channel(u)).superop
    b = compose(unitary_channel(u), d).superop
    assert np.linalg.norm(a - b) < 1e-10


def test_embed_paths_agree(rng):
    c = random_channel(4, rng)
    dense = embed_channel(c, [2, 0], 3)
    via_superop = embed_channel(type(c)(c.dim, c.superop), [2, 0], 3)
    assert np.allclose(dense.superop, via_superop.superop)
    rho = random_density_matrix(8, rng)
    assert np.allclose(apply_on_qubits(rho, c, [2, 0], 3), apply(dense, rho))


def test_partial_trace(rng):
    a, b = random_density_matrix(2, rng), random_density_matrix(4, rng)
    assert np.allclose(partial_trace(np.kron(a, b), [0], 3), a)
    assert np.allclose(partial_trace(np.kron(a, b), [1, 2], 3), b)
