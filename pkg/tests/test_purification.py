import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamsynth.purification import (GhzDiagonalState, ghz_diagonal_to_dense, ghz_from_noisy_gates,
                                   ghz_from_noisy_gates_dense, purified_teleport_fidelity, purify_fixpoint,
                                   purify_round, purify_round_dense, twirl_to_ghz_diagonal)
from hamsynth.teleport import ghz_resource, noisy_ghz_resource


def test_state_validation():
    with pytest.raises(ValueError):
        GhzDiagonalState(2, np.array([0.5, 0.5, 0.1, 0.0]))
    with pytest.raises(ValueError):
        GhzDiagonalState(2, np.array([1.0, 0.0]))


def test_twirl_examples():
    c = twirl_to_ghz_diagonal(ghz_resource(3).state).coeffs
    assert abs(c[0] - 1) < 1e-12 and np.abs(c[1:]).max() < 1e-12
    mixed = twirl_to_ghz_diagonal(np.eye(16) / 16).coeffs
    assert np.allclose(mixed, 1 / 16)
    with pytest.raises(ValueError):
        twirl_to_ghz_diagonal(np.eye(3) / 3)


def test_twirl_of_dephased_resource():
    n, g0 = 3, 0.1
    p = math.exp(-g0 * math.pi / 4)
    rho = noisy_ghz_resource(n, "dephasing", g0).state
    got = twirl_to_ghz_diagonal(rho).coeffs
    flip = [(1 - p) / 2] * n + [(1 - p**n) / 2]
    want = np.array([np.prod([f if (mu >> (n - q)) & 1 else 1 - f for q, f in enumerate(flip)])
                     for mu in range(16)])
    assert np.allclose(got, want, atol=1e-12)


def test_dense_round_trip(rng):
    c = rng.dirichlet(np.ones(8))
    s = GhzDiagonalState(3, c)
    assert np.allclose(twirl_to_ghz_diagonal(ghz_diagonal_to_dense(s)).coeffs, c)


def test_pure_inputs_stay_pure():
    pure = GhzDiagonalState.pure(3)
    for sub in ("P1", "P2"):
        out, prob = purify_round(pure, pure, sub, 1.0)
        assert prob == pytest.approx(1.0) and out.fidelity == pytest.approx(1.0)
    with pytest.raises(ValueError):
        purify_round(pure, pure, "P3", 1.0)
    with pytest.raises(ValueError):
        purify_round(pure, pure, "P1", 1.2)


def test_binary_mixture_improves():
    s = GhzDiagonalState.binary(2, 0.8)
    out, prob = purify_round(s, s, "P2", 1.0)
    assert out.fidelity > 0.8 and prob < 1
    dense, pd = purify_round_dense(s, s, "P2", 1.0)
    assert np.allclose(out.coeffs, dense.coeffs, atol=1e-10) and abs(prob - pd) < 1e-10


@settings(max_examples=12, deadline=None)
@given(st.sampled_from([2, 3]), st.sampled_from(["P1", "P2"]), st.sampled_from([1.0, 0.9, 0.6]),
       st.integers(0, 2**31 - 1))
def test_coefficient_recurrence_matches_dense_oracle(n, sub, p_l, seed):
    rng = np.random.default_rng(seed)
    a = GhzDiagonalState(n + 1, rng.dirichlet(np.ones(2 ** (n + 1))))
    b = GhzDiagonalState(n + 1, rng.dirichlet(np.ones(2 ** (n + 1))))
    fast, pf = purify_round(a, b, sub, p_l)
    slow, ps = purify_round_dense(a, b, sub, p_l)
    assert np.abs(fast.coeffs - slow.coeffs).max() < 1e-9
    assert abs(pf - ps) < 1e-9


def test_success_probability_bounds(rng):
    for _ in range(20):
        s = GhzDiagonalState(4, rng.dirichlet(np.ones(16)))
        _, prob = purify_round(s, s, "P1", float(rng.uniform(0.5, 1.0)))
        assert 0 < prob < 1
    _, prob = purify_round(GhzDiagonalState.pure(3), GhzDiagonalState.pure(3), "P1", 0.99)
    assert prob < 1


def test_below_basin_does_not_improve():
    s = GhzDiagonalState.werner(3, 0.1)
    res = purify_fixpoint(s, 1.0)
    assert res.fidelity <= 0.1 + 1e-12


def test_fixpoint_perfect_locals():
    res = purify_fixpoint(ghz_from_noisy_gates(3, 0.8), 1.0)
    assert res.converged and res.fidelity > 1 - 1e-10
    state, rounds = res
    assert rounds == res.rounds and state is res.state
    with pytest.raises(ValueError):
        purify_fixpoint(state, 1.0, tol=0.0)


@pytest.mark.parametrize("p_l", [0.99, 0.999, 0.9999])
def test_fixpoint_independent_of_p0(p_l):
    a = purify_fixpoint(ghz_from_noisy_gates(3, 0.9), p_l)
    b = purify_fixpoint(ghz_from_noisy_gates(3, 0.99), p_l)
    assert abs(a.fidelity - b.fidelity) < 1e-9


@pytest.mark.parametrize("n", [1, 2, 3])
def test_noisy_generation_matches_dense(n):
    coeffs = ghz_from_noisy_gates(n, 0.7).coeffs
    dense = twirl_to_ghz_diagonal(ghz_from_noisy_gates_dense(n, 0.7), frame="graph").coeffs
    assert np.abs(coeffs - dense).max() < 1e-12


def test_two_system_threshold():
    # pairs (n = 1) survive 60% two-system noise
    assert purify_fixpoint(ghz_from_noisy_gates(1, 0.4), 1.0).fidelity > 0.999
    assert purify_fixpoint(ghz_from_noisy_gates(1, 0.3), 1.0).fidelity < 0.999
    # direct generation of larger states tolerates less
    assert purify_fixpoint(ghz_from_noisy_gates(3, 0.4), 1.0).fidelity < 0.999
    assert purify_fixpoint(ghz_from_noisy_gates(3, 0.7), 1.0).fidelity > 0.999


def test_purified_teleport_properties():
    assert purified_teleport_fidelity(3, 1.0, 0.9) == pytest.approx(1.0, abs=1e-10)
    pls = [1 - 1e-2, 1 - 1e-3, 1 - 1e-4, 1 - 1e-5, 1 - 1e-6]
    infid = [1 - purified_teleport_fidelity(3, pl, 0.9) for pl in pls]
    assert all(a > b for a, b in zip(infid, infid[1:]))
    slope = np.polyfit(np.log([1 - pl for pl in pls]), np.log(infid), 1)[0]
    assert 0.8 <= slope <= 1.2
    for pl in (0.99, 0.9999):
        assert abs(purified_teleport_fidelity(3, pl, 0.9) - purified_teleport_fidelity(3, pl, 0.99)) < 1e-3
        small = purified_teleport_fidelity(3, pl, 0.9, alpha=math.pi / 2**15)
        assert abs(small - purified_teleport_fidelity(3, pl, 0.9)) < 1e-2


def test_non_purifiable_input_flagged():
    with pytest.raises(ValueError):
        purified_teleport_fidelity(3, 1.0, 0.3)
