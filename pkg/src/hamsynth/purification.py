"""Recurrence purification of GHZ-type resources and the purified teleportation pipeline.

States are kept diagonal in the star-graph basis ``|G_mu> = Z^mu |G>``, where
|G> is the star graph state with leaves 0..n-1 and centre E = n.  Bit q of mu
(qubit 0 most significant) records a flipped stabilizer ``K_q = X_q Z_{N(q)}``.

One round takes two copies, applies transversal CNOTs (copy 2 -> copy 1 on one
colour class A, copy 1 -> copy 2 on the other class B), measures copy 2 (A in
the X basis, B in the Z basis) and keeps copy 1 when every K_a, a in A, reads
+1.  In coefficient space

    |mu_A, mu_B>|nu_A, nu_B>  ->  |mu_A, mu_B + nu_B>  if mu_A + nu_A = e,

with e the syndrome error from faulty measurements.  Local noise is depolarizing
with parameter p_l on every qubit before the CNOTs and a flip of each
measurement outcome with probability (1 - p_l)/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .channels import (Channel, apply_on_qubits, channel_from_kraus, compose, depolarizing_channel,
                       pure_state)
from .metrics import j_fidelity
from .pauli import kron_all, pauli_matrix
from .teleport import (ResourceState, _phase_gate_full, ghz_teleport_channel,
                       to_graph_frame, u_alpha)

MAX_COEFF_N = 10
MAX_DENSE_N = 3
MAX_ROUNDS = 200


@dataclass(frozen=True, eq=False)
class GhzDiagonalState:
    n_plus_1: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (1 << self.n_plus_1,):
            raise ValueError("need 2^(n+1) coefficients")
        if c.min() < -1e-12 or abs(c.sum() - 1) > 1e-10:
            raise ValueError("coefficients must be a probability vector")
        c = np.clip(c, 0.0, None)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self) -> int:
        return self.n_plus_1 - 1

    @property
    def fidelity(self) -> float:
        return float(self.coeffs[0])

    @classmethod
    def pure(cls, n: int) -> "GhzDiagonalState":
        c = np.zeros(1 << (n + 1))
        c[0] = 1.0
        return cls(n + 1, c)

    @classmethod
    def binary(cls, n: int, f: float, flip: int | None = None) -> "GhzDiagonalState":
        """f |G_0><G_0| + (1 - f) |G_flip><G_flip|; default flip is Z on E."""
        c = np.zeros(1 << (n + 1))
        c[0] = f
        c[1 if flip is None else flip] += 1 - f
        return cls(n + 1, c)

    @classmethod
    def werner(cls, n: int, f: float) -> "GhzDiagonalState":
        d = 1 << (n + 1)
        c = np.full(d, (1 - f) / (d - 1))
        c[0] = f
        return cls(n + 1, c)


@dataclass(frozen=True)
class FixpointResult:
    state: GhzDiagonalState
    rounds: int
    converged: bool
    diverged: bool

    @property
    def fidelity(self) -> float:
        return self.state.fidelity

    def __iter__(self) -> Iterator:
        return iter((self.state, self.rounds))


# --- masks on the star graph ---------------------------------------------------

def _zmask(q: int, n_plus_1: int) -> int:
    return 1 << (n_plus_1 - 1 - q)


def _neighbours(q: int, n_plus_1: int) -> list[int]:
    e = n_plus_1 - 1
    return list(range(e)) if q == e else [e]


def _xmask(q: int, n_plus_1: int) -> int:
    return sum(_zmask(r, n_plus_1) for r in _neighbours(q, n_plus_1))


def _colour(sub: str, n_plus_1: int) -> tuple[list[int], list[int]]:
    """(checked class A, other class B) for each sub-protocol."""
    leaves, centre = list(range(n_plus_1 - 1)), [n_plus_1 - 1]
    if sub == "P1":
        return leaves, centre
    if sub == "P2":
        return centre, leaves
    raise ValueError(f"unknown sub-protocol {sub!r}")


def _xor_convolve(c: np.ndarray, masks: Sequence[int], weights: Sequence[float]) -> np.ndarray:
    idx = np.arange(c.size)
    out = np.zeros_like(c)
    for m, w in zip(masks, weights):
        if w:
            out += w * c[idx ^ m]
    return out


def depolarize_coeffs(c: np.ndarray, qubit: int, p: float, n_plus_1: int) -> np.ndarray:
    """Depolarizing p on one qubit: Z flips mu_q, X flips mu on N(q), Y both."""
    z, x = _zmask(qubit, n_plus_1), _xmask(qubit, n_plus_1)
    r = (1 - p) / 4
    return _xor_convolve(c, [0, z, x, z ^ x], [p + r, r, r, r])


def _check_p(p_l: float) -> None:
    if not 0.0 <= p_l <= 1.0:
        raise ValueError(f"p_l={p_l} outside [0, 1]")


def _syndrome_error(a: Sequence[int], b: Sequence[int], eps: float, n_plus_1: int) -> np.ndarray:
    """Distribution over syndrome flips, indexed by full-width masks restricted to A."""
    dist = np.zeros(1 << n_plus_1)
    dist[0] = 1.0
    if eps == 0:
        return dist
    a_mask = sum(_zmask(q, n_plus_1) for q in a)
    flips = [_zmask(q, n_plus_1) for q in a]
    flips += [_xmask(q, n_plus_1) & a_mask for q in b]
    for m in flips:
        dist = _xor_convolve(dist, [0, m], [1 - eps, eps])
    return dist


def purify_round(a: GhzDiagonalState, b: GhzDiagonalState, sub: str, p_l: float) -> tuple[GhzDiagonalState, float]:
    """One recurrence step on two copies; returns the kept state and the success probability."""
    _check_p(p_l)
    if a.n_plus_1 != b.n_plus_1:
        raise ValueError("copies differ in size")
    n1 = a.n_plus_1
    if n1 - 1 > MAX_COEFF_N:
        raise ValueError(f"n={n1 - 1} exceeds the supported maximum {MAX_COEFF_N}")
    ca, cb = np.array(a.coeffs), np.array(b.coeffs)
    if p_l < 1:
        for q in range(n1):
            ca = depolarize_coeffs(ca, q, p_l, n1)
            cb = depolarize_coeffs(cb, q, p_l, n1)
    cls_a, cls_b = _colour(sub, n1)
    mask_a = sum(_zmask(q, n1) for q in cls_a)
    mask_b = sum(_zmask(q, n1) for q in cls_b)
    err = _syndrome_error(cls_a, cls_b, (1 - p_l) / 2, n1)
    idx = np.arange(1 << n1)
    mu, nu = idx[:, None], idx[None, :]
    out_idx = (mu & mask_a) | ((mu ^ nu) & mask_b)
    weight = np.outer(ca, cb) * err[(mu ^ nu) & mask_a]
    out = np.bincount(out_idx.ravel(), weights=weight.ravel(), minlength=1 << n1)
    prob = float(out.sum())
    if prob <= 0:
        raise ValueError("purification step never succeeds for these inputs")
    return GhzDiagonalState(n1, out / prob), prob


def purify_fixpoint(initial: GhzDiagonalState, p_l: float, tol: float = 1e-12,
                    max_rounds: int = MAX_ROUNDS) -> FixpointResult:
    """Alternate P1 and P2 on pairs of identical copies until the fidelity settles.

    A round is one P1/P2 pair; iteration stops when the fidelity moves by less
    than tol between rounds.  Five consecutive decreases set the divergence flag.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    _check_p(p_l)
    state = initial
    f_prev = state.fidelity
    drops = 0
    for r in range(1, max_rounds + 1):
        for sub in ("P1", "P2"):
            state, _ = purify_round(state, state, sub, p_l)
        f = state.fidelity
        drops = drops + 1 if f < f_prev - tol else 0
        if drops >= 5:
            return FixpointResult(state, r, False, True)
        if abs(f - f_prev) < tol:
            return FixpointResult(state, r, True, False)
        f_prev = f
    return FixpointResult(state, max_rounds, False, False)


# --- dense representations ----------------------------------------------------------

def graph_basis(n_plus_1: int) -> np.ndarray:
    """Columns |G_mu> in the graph frame, mu in index order."""
    n = n_plus_1 - 1
    plus = np.full(2, 1 / math.sqrt(2), dtype=complex)
    g = kron_all([plus] * n_plus_1).reshape(-1)
    for k in range(n):
        g = _phase_gate_full(k, n) @ g
    idx = np.arange(1 << n_plus_1)
    cols = []
    for mu in idx:
        z = np.ones(1 << n_plus_1)
        for q in range(n_plus_1):
            if mu & _zmask(q, n_plus_1):
                z *= 1 - 2 * ((idx >> (n_plus_1 - 1 - q)) & 1)
        cols.append(z * g)
    return np.array(cols).T


def twirl_to_ghz_diagonal(rho: np.ndarray, frame: str = "ghz") -> GhzDiagonalState:
    """Diagonal of rho in the graph basis; rho is given in the standard GHZ frame by default."""
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    n1 = int(round(math.log2(d)))
    if d != 1 << n1 or rho.shape != (d, d):
        raise ValueError("state is not on a whole number of qubits")
    if frame == "ghz":
        rho = to_graph_frame(rho, n1 - 1)
    elif frame != "graph":
        raise ValueError(f"unknown frame {frame!r}")
    basis = graph_basis(n1)
    c = np.real(np.einsum("im,ij,jm->m", basis.conj(), rho, basis))
    return GhzDiagonalState(n1, c / c.sum())


def ghz_diagonal_to_dense(state: GhzDiagonalState, frame: str = "ghz") -> np.ndarray:
    basis = graph_basis(state.n_plus_1)
    rho = (basis * state.coeffs) @ basis.conj().T
    return to_graph_frame(rho, state.n) if frame == "ghz" else rho


def _cnot(n_qubits: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(1 << n_qubits)
    c = (idx >> (n_qubits - 1 - control)) & 1
    out = idx ^ (c << (n_qubits - 1 - target))
    u = np.zeros((1 << n_qubits, 1 << n_qubits))
    u[out, idx] = 1
    return u


def purify_round_dense(a: GhzDiagonalState, b: GhzDiagonalState, sub: str, p_l: float) -> tuple[GhzDiagonalState, float]:
    """Two-copy density-matrix simulation of purify_round, for n <= 3."""
    _check_p(p_l)
    n1 = a.n_plus_1
    if n1 - 1 > MAX_DENSE_N:
        raise ValueError(f"dense oracle limited to n <= {MAX_DENSE_N}")
    tot = 2 * n1
    rho = np.kron(ghz_diagonal_to_dense(a, "graph"), ghz_diagonal_to_dense(b, "graph"))
    if p_l < 1:
        dep = depolarizing_channel(0, p_l)
        for q in range(tot):
            rho = apply_on_qubits(rho, dep, [q], tot)
    cls_a, cls_b = _colour(sub, n1)
    for q in cls_a:
        u = _cnot(tot, n1 + q, q)
        rho = u @ rho @ u.T
    for q in cls_b:
        u = _cnot(tot, q, n1 + q)
        rho = u @ rho @ u.T
    eps = (1 - p_l) / 2
    if eps > 0:
        for q in cls_a:
            rho = apply_on_qubits(rho, _flip_channel(3, eps), [n1 + q], tot)
        for q in cls_b:
            rho = apply_on_qubits(rho, _flip_channel(1, eps), [n1 + q], tot)
    # rotate X-measured qubits so every measurement is in the Z basis
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    rot = kron_all([np.eye(1 << n1)] + [h if q in cls_a else np.eye(2) for q in range(n1)])
    rho = rot @ rho @ rot.conj().T
    r4 = rho.reshape(1 << n1, 1 << n1, 1 << n1, 1 << n1)
    kept = np.zeros((1 << n1, 1 << n1), dtype=complex)
    for o in range(1 << n1):
        bits = [(o >> (n1 - 1 - q)) & 1 for q in range(n1)]
        if all((bits[q] + sum(bits[r] for r in _neighbours(q, n1))) % 2 == 0 for q in cls_a):
            kept += r4[:, o, :, o]
    prob = float(np.real(np.trace(kept)))
    return twirl_to_ghz_diagonal(kept / prob, frame="graph"), prob


def _flip_channel(pauli: int, eps: float) -> Channel:
    return channel_from_kraus([math.sqrt(1 - eps) * np.eye(2), math.sqrt(eps) * pauli_matrix(pauli)])


# --- noisy generation ------------------------------------------------------------

def ghz_from_noisy_gates(n: int, p_0: float) -> GhzDiagonalState:
    """Star graph from phase gates each followed by two-qubit depolarizing noise.

    Gate k acts on (leaf k, E); with probability 1 - p_0 it is followed by a
    uniformly random two-qubit Pauli.  An X on E is pushed through the later
    gates before it is read off as a stabilizer flip.
    """
    if not 0.0 <= p_0 <= 1.0:
        raise ValueError(f"p_0={p_0} outside [0, 1]")
    if n < 1 or n > MAX_COEFF_N:
        raise ValueError(f"n must lie in [1, {MAX_COEFF_N}]")
    n1 = n + 1
    e = n
    c = np.zeros(1 << n1)
    c[0] = 1.0
    for k in range(n):
        zk, xk = _zmask(k, n1), _xmask(k, n1)
        ze = _zmask(e, n1)
        xe = sum(_zmask(j, n1) for j in range(k + 1))  # X_E Z_{later leaves} on the final graph state
        leaf = [0, xk, xk ^ zk, zk]
        centre = [0, xe, xe ^ ze, ze]
        masks = [l ^ m for l in leaf for m in centre]
        w = [(1 - p_0) / 16] * 16
        w[0] += p_0
        c = _xor_convolve(c, masks, w)
    return GhzDiagonalState(n1, c)


def two_system_depolarizing(p_0: float) -> Channel:
    """rho -> p_0 rho + (1 - p_0) tr(rho) I/4 on two qubits."""
    paulis = [np.kron(pauli_matrix(i), pauli_matrix(j)) for i in range(4) for j in range(4)]
    ops = [math.sqrt(p_0 + (1 - p_0) / 16) * paulis[0]] + [math.sqrt((1 - p_0) / 16) * p for p in paulis[1:]]
    return channel_from_kraus(ops)


def ghz_from_noisy_gates_dense(n: int, p_0: float) -> np.ndarray:
    """Graph-frame density matrix of the same construction, as an oracle."""
    n1 = n + 1
    plus = np.full(2, 1 / math.sqrt(2), dtype=complex)
    rho = pure_state(kron_all([plus] * n1))
    noise = two_system_depolarizing(p_0)
    for k in range(n):
        u = _phase_gate_full(k, n)
        rho = u @ rho @ u.conj().T
        rho = apply_on_qubits(rho, noise, [k, n], n1)
    return rho


# --- purified teleportation --------------------------------------------------------

def purified_teleport_fidelity(n: int, p_l: float, p_0: float, alpha: float = math.pi / 4,
                               tol: float = 1e-13) -> float:
    """Fidelity of the GHZ protocol run on the purification fixed point.

    The coupling between each input qubit and its leaf carries depolarizing
    noise p_l on both qubits; everything else is noiseless.
    """
    _check_p(p_l)
    init = ghz_from_noisy_gates(n, p_0)
    res = purify_fixpoint(init, p_l, tol)
    # F <= 1/2 carries no genuine multipartite entanglement, so the run failed
    if res.diverged or res.fidelity <= max(init.fidelity - 1e-12, 0.5):
        raise ValueError(f"input with p_0={p_0} does not purify at p_l={p_l}")
    rho = ghz_diagonal_to_dense(res.state, "ghz")
    for k in range(n):
        rho = apply_on_qubits(rho, depolarizing_channel(0, p_l), [k], n + 1)
    channel = ghz_teleport_channel(ResourceState("ghz_tilde", n, alpha, rho), alpha)
    in_noise = depolarizing_channel(0, p_l, n)
    for k in range(1, n):
        in_noise = compose(depolarizing_channel(k, p_l, n), in_noise)
    return j_fidelity(compose(channel, in_noise), u_alpha(alpha, n))
