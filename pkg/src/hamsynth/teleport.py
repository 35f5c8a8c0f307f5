"""Gate synthesis by teleportation through entangled resource states.

Three protocols are covered:

* teleporting through the Choi state of a channel (succeeds with probability 1/d^2),
* the probabilistic protocol on ``U(alpha)|Phi+>^n`` with angle doubling on failure,
* the deterministic protocol on a GHZ-type resource with an ancilla E whose
  measurement basis picks the sign of alpha.

``U(alpha) = exp(-i alpha Z^n)`` throughout.  Local operations are noiseless.

GHZ resources are stored in the standard form ``(|0..0>|0> + |1..1>|1>)/sqrt 2``
with E as the last qubit.  Hadamards on the leaves map it to the star graph
state ``(|+>^n|0> + |->^n|1>)/sqrt 2`` that the phase gates produce.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .channels import (Channel, apply_on_qubits, correlated_pauli_channel, is_density_matrix,
                       pure_state)
from .lindblad import noisy_phase_gate, phase_gate_unitary
from .pauli import PauliString, kron_all, pauli_matrix
from .timing import q_factor

MAX_GHZ_N = 8
MAX_BRANCH_N = 5
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

# Bell basis |Psi_ij> = (1 x sigma_ij)|Phi+>
BELL_PAULIS = {"11": "I", "12": "Z", "21": "Y", "22": "X"}


@dataclass(frozen=True, eq=False)
class ResourceState:
    kind: str
    n: int
    alpha: float
    state: np.ndarray
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in ("weak_alpha", "ghz_kappa", "ghz_tilde"):
            raise ValueError(f"unknown resource kind {self.kind!r}")
        if not is_density_matrix(self.state, atol=1e-8):
            raise ValueError("resource is not a density matrix")

    @property
    def n_qubits(self) -> int:
        return int(round(math.log2(self.state.shape[0])))

    def purity(self) -> float:
        return float(np.real(np.trace(self.state @ self.state)))


@dataclass(frozen=True, eq=False)
class BranchOutcome:
    labels: tuple[str, ...]
    probability: float
    output: np.ndarray
    corrections: list[PauliString] = field(default_factory=list)
    success: bool = True


def u_alpha(alpha: float, n: int) -> np.ndarray:
    zn = _zn_diag(n)
    return np.diag(np.cos(alpha) - 1j * np.sin(alpha) * zn)


def _popcount(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    c = np.zeros_like(x)
    while np.any(x):
        c += x & 1
        x = x >> 1
    return c


def _zn_diag(n: int) -> np.ndarray:
    return 1.0 - 2.0 * (_popcount(np.arange(1 << n)) & 1)


def _hadamards(rho: np.ndarray, qubits: Sequence[int], n_qubits: int) -> np.ndarray:
    u = kron_all([HADAMARD if q in qubits else np.eye(2) for q in range(n_qubits)])
    return u @ rho @ u.conj().T


def _check_n(n: int, cap: int) -> None:
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > cap:
        raise ValueError(f"n={n} exceeds the supported maximum {cap}")


# --- Choi-state teleportation ------------------------------------------------

def jamiolkowski_teleport(e: np.ndarray, rho: np.ndarray) -> tuple[float, np.ndarray]:
    """Bell-project the input with the second half of a Choi state.

    Returns the success probability and the output on the first half, which is
    the channel applied to rho.
    """
    e = np.asarray(e, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    if e.shape != (d * d, d * d):
        raise ValueError(f"Choi state of shape {e.shape} does not match input dimension {d}")
    e4 = e.reshape(d, d, d, d)
    out = np.einsum("ij,aibj->ab", rho, e4) / d
    prob = float(np.real(np.trace(out)))
    return prob, out / prob


# --- the probabilistic protocol ------------------------------------------------

def weak_resource(alpha: float, n: int) -> ResourceState:
    """U(alpha) on the primed qubits of |Phi+>^n; qubit order A1, A1', A2, A2', ..."""
    _check_n(n, MAX_BRANCH_N)
    phi = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    psi = kron_all([phi] * n)
    # in block order (A..., A'...) U(alpha) acts on the trailing block
    block = psi.reshape([2] * (2 * n)).transpose(list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2)))
    block = block.reshape(1 << n, 1 << n) @ u_alpha(alpha, n).T
    inter = block.reshape([2] * (2 * n)).transpose(np.argsort(list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))))
    labels = tuple(x for k in range(1, n + 1) for x in (f"A{k}", f"A{k}'"))
    return ResourceState("weak_alpha", n, alpha, pure_state(inter.reshape(-1)), labels)


def _pauli_word(word: str) -> np.ndarray:
    return kron_all([pauli_matrix("IXYZ".index(c)) for c in word])


def _commutes_with_zn(word: str) -> bool:
    return sum(c in "XY" for c in word) % 2 == 0


def _bell_kraus(psi_block: np.ndarray, word: str) -> np.ndarray:
    """Kraus operator input -> (A', rest) for Bell outcome P = word on (input, A).

    psi_block has axes (A', A, rest); returns array (A', rest, input).
    """
    d = psi_block.shape[0]
    p = _pauli_word(word)
    return np.einsum("ai,xar->xri", p.conj(), psi_block) / math.sqrt(d)


def weak_protocol_round(alpha: float, rho: np.ndarray, n: int) -> list[BranchOutcome]:
    """One round on |alpha>: every Bell outcome with its Pauli correction.

    Branches with an even number of X/Y byproducts carry U(alpha); the rest
    carry U(-alpha).
    """
    if n < 2:
        raise ValueError("the protocol needs n >= 2")
    _check_n(n, MAX_BRANCH_N)
    d = 1 << n
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (d, d):
        raise ValueError("input dimension does not match n")
    res = weak_resource(alpha, n)
    psi = np.linalg.eigh(res.state)[1][:, -1]
    order = list(range(1, 2 * n, 2)) + list(range(0, 2 * n, 2))
    block = psi.reshape([2] * (2 * n)).transpose(order).reshape(d, d, 1)
    out = []
    from itertools import product
    for idx in product(BELL_PAULIS, repeat=n):
        word = "".join(BELL_PAULIS[i] for i in idx)
        k = _bell_kraus(block, word)[:, 0, :]
        k = _pauli_word(word) @ k
        sigma = k @ rho @ k.conj().T
        prob = float(np.real(np.trace(sigma)))
        out.append(BranchOutcome(tuple(idx), prob, sigma / prob, [PauliString(word)], _commutes_with_zn(word)))
    return out


def admissible_rounds(alpha: float) -> int:
    """N with alpha = pi / 2^N, or ValueError naming the nearest one."""
    ratio = math.pi / abs(alpha)
    n_float = math.log2(ratio)
    n = int(round(n_float))
    if n < 0 or abs(ratio - 2**n) > 1e-9 * ratio:
        raise ValueError(f"alpha={alpha} is not pi/2^N; nearest admissible N is {max(n, 0)}")
    return n


def weak_protocol_deterministic(alpha: float, rho: np.ndarray, max_rounds: Optional[int] = None) -> np.ndarray:
    """Repeat with |alpha>, |2 alpha>, ... until success; exact average output.

    After N failures the accumulated rotation is U(-(2^N - 1) alpha), which for
    alpha = pi/2^N equals U(alpha) up to a global phase, so N rounds suffice.
    """
    rho = np.asarray(rho, dtype=complex)
    if alpha == 0:
        return rho.copy()
    rounds = admissible_rounds(alpha)
    if max_rounds is not None:
        rounds = min(rounds, max_rounds)
    n = int(round(math.log2(rho.shape[0])))
    done = np.zeros_like(rho)
    pending, mass = rho, 1.0
    for k in range(rounds):
        branches = weak_protocol_round(alpha * 2**k, pending, n)
        fail = np.zeros_like(rho)
        fail_p = 0.0
        for b in branches:
            if b.success:
                done += mass * b.probability * b.output
            else:
                fail += b.probability * b.output
                fail_p += b.probability
        pending, mass = fail / fail_p, mass * fail_p
    return done + mass * pending


# --- GHZ resources ---------------------------------------------------------------

def _star_from_phase_gates(n: int, gate: Optional[Channel] = None) -> np.ndarray:
    plus = np.full(2, 1 / math.sqrt(2), dtype=complex)
    rho = pure_state(kron_all([plus] * (n + 1)))
    for k in range(n):
        if gate is None:
            full = _phase_gate_full(k, n)
            rho = full @ rho @ full.conj().T
        else:
            rho = apply_on_qubits(rho, gate, [k, n], n + 1)
    return rho


def _phase_gate_full(k: int, n: int) -> np.ndarray:
    idx = np.arange(1 << (n + 1))
    bk = (idx >> n - k) & 1
    be = idx & 1
    return np.diag(1.0 - 2.0 * (bk & be)).astype(complex)


def ghz_resource(n: int) -> ResourceState:
    """Phase gates between E and every leaf on |+>^(n+1), then Hadamards on the leaves."""
    _check_n(n, MAX_GHZ_N)
    rho = _hadamards(_star_from_phase_gates(n), range(n), n + 1)
    labels = tuple(f"R{k + 1}" for k in range(n)) + ("E",)
    return ResourceState("ghz_tilde", n, 0.0, rho, labels)


def noisy_ghz_resource(n: int, noise_kind: str, rate: float) -> ResourceState:
    """GHZ resource from noisy phase gates.

    dephasing / white: the ZZ pulse runs under a reservoir of the given rate on
    both qubits.  timing: rate is sigma, each gate is followed by the correlated
    ZZ channel with q = exp(-2 sigma^2).
    """
    _check_n(n, MAX_GHZ_N)
    if rate < 0:
        raise ValueError("rate must be non-negative")
    if noise_kind in ("dephasing", "white"):
        gate = noisy_phase_gate(noise_kind, rate)
    elif noise_kind == "timing":
        t = correlated_pauli_channel(PauliString("ZZ"), q_factor(1.0, rate))
        pg = phase_gate_unitary()
        gate = Channel(4, t.superop @ np.kron(pg.conj(), pg))
    else:
        raise ValueError(f"unknown noise kind {noise_kind!r}")
    rho = _hadamards(_star_from_phase_gates(n, gate), range(n), n + 1)
    labels = tuple(f"R{k + 1}" for k in range(n)) + ("E",)
    return ResourceState("ghz_tilde", n, 0.0, rho, labels)


def to_graph_frame(rho: np.ndarray, n: int) -> np.ndarray:
    """Standard GHZ form -> star graph form (Hadamards on the n leaves)."""
    return _hadamards(rho, range(n), n + 1)


def ghz_kappa_resource(n: int) -> ResourceState:
    """(|Phi+>^n |0> + Z^n_{A'} |Phi+>^n |1>)/sqrt 2; qubit order A1', A1, ..., An', An, E."""
    _check_n(n, 4)
    phi = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
    pairs = kron_all([phi] * n)
    zprime = kron_all([np.diag([1, -1]), np.eye(2)] * n).diagonal()
    psi = (np.kron(pairs, [1, 0]) + np.kron(zprime * pairs, [0, 1])) / math.sqrt(2)
    labels = tuple(x for k in range(1, n + 1) for x in (f"A{k}'", f"A{k}")) + ("E",)
    return ResourceState("ghz_kappa", n, 0.0, pure_state(psi), labels)


def _measure_vectors(beta: float) -> tuple[np.ndarray, np.ndarray]:
    m = np.array([math.cos(beta), 1j * math.sin(beta)])
    m_perp = np.array([1j * math.sin(beta), math.cos(beta)])
    return m, m_perp


def _superop_from_kraus(ks: np.ndarray) -> np.ndarray:
    d = ks.shape[1]
    return np.einsum("kab,kcd->acbd", ks.conj(), ks).reshape(d * d, d * d)


def _tilde_kraus(psi: np.ndarray, n: int, alpha: float) -> np.ndarray:
    """Kraus operators of the coupling protocol for one pure resource in graph form.

    The input is rotated by H^n, each input qubit gets a phase gate with its
    leaf and is measured in the X basis (outcome s), E is measured with angle
    (-1)^|s| alpha, then Z^n on the m_perp outcome and X^s are applied.
    """
    d = 1 << n
    idx = np.arange(d)
    sign = 1.0 - 2.0 * (_popcount(idx[:, None] & idx[None, :]) & 1)
    hn = sign / math.sqrt(d)
    zn = _zn_diag(n)
    a = sign[:, None, :] * psi.reshape(d, 2)[:, :, None]  # (r, e, y)
    ks = []
    for s in range(d):
        beta = alpha if bin(s).count("1") % 2 == 0 else -alpha
        for e, m in enumerate(_measure_vectors(beta)):
            v = np.einsum("e,rey->ry", m.conj(), a) * sign[s][None, :] / math.sqrt(d)
            if e:
                v = zn[:, None] * v
            v = v[idx ^ s]
            ks.append(v @ hn)
    return np.array(ks)


def _kappa_kraus(psi: np.ndarray, n: int, alpha: float) -> np.ndarray:
    from itertools import product
    d = 1 << n
    # axes (A', A, E) from interleaved order
    t = psi.reshape([2] * (2 * n + 1))
    t = t.transpose(list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2)) + [2 * n]).reshape(d, d, 2)
    zn = _zn_diag(n)
    ks = []
    for word_t in product("IXYZ", repeat=n):
        word = "".join(word_t)
        k = _bell_kraus(t, word)  # (A', E, in)
        beta = alpha if _commutes_with_zn(word) else -alpha
        p = _pauli_word(word)
        for e, m in enumerate(_measure_vectors(beta)):
            v = np.einsum("e,aei->ai", m.conj(), k)
            if e:
                v = zn[:, None] * v
            ks.append(p @ v)
    return np.array(ks)


def ghz_teleport_channel(resource: ResourceState, alpha: float) -> Channel:
    """Average channel of the deterministic GHZ protocol over all outcomes."""
    n = resource.n
    _check_n(n, MAX_BRANCH_N)
    if resource.kind == "ghz_tilde":
        rho = to_graph_frame(resource.state, n)
        kraus_fn = _tilde_kraus
    elif resource.kind == "ghz_kappa":
        rho = resource.state
        kraus_fn = _kappa_kraus
    else:
        raise ValueError("resource is not a GHZ-type state")
    w, v = np.linalg.eigh(rho)
    d = 1 << n
    s = np.zeros((d * d, d * d), dtype=complex)
    for lam, vec_ in zip(w, v.T):
        if lam > 1e-14:
            s += lam * _superop_from_kraus(kraus_fn(vec_, n, alpha))
    return Channel(d, s)


def teleport_branch_probabilities(resource: ResourceState, alpha: float, rho: np.ndarray) -> np.ndarray:
    """Probabilities of every outcome of the GHZ protocol for a given input."""
    n = resource.n
    w, v = np.linalg.eigh(to_graph_frame(resource.state, n) if resource.kind == "ghz_tilde" else resource.state)
    kraus_fn = _tilde_kraus if resource.kind == "ghz_tilde" else _kappa_kraus
    total = None
    for lam, vec_ in zip(w, v.T):
        if lam > 1e-14:
            ks = kraus_fn(vec_, n, alpha)
            p = lam * np.real(np.einsum("kab,bc,kac->k", ks, rho, ks.conj()))
            total = p if total is None else total + p
    return total


# --- closed forms ----------------------------------------------------------------

def teleport_analytic_fidelity(n: int, p: float, noise_kind: str) -> float:
    """Closed-form fidelities of the GHZ protocol with a noisy resource.

    dephasing: ((1+p^2)/2)^n; timing (p = q): ((1+q)/2)^n + ((1-q)/2)^n;
    white: ((1+3p)/4)^n (1+p^n)/2 + ((1-p)/4)^n (1-p^n)/2.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if noise_kind == "dephasing":
        return ((1 + p**2) / 2) ** n
    if noise_kind == "timing":
        return ((1 + p) / 2) ** n + ((1 - p) / 2) ** n
    if noise_kind == "white":
        return ((1 + 3 * p) / 4) ** n * (1 + p**n) / 2 + ((1 - p) / 4) ** n * (1 - p**n) / 2
    raise ValueError(f"unknown noise kind {noise_kind!r}")


def dephasing_teleport_fidelity(n: int, p: float, alpha: float = math.pi / 4) -> float:
    """Exact fidelity for the dephased resource at any angle and any n.

    A flip of E turns U(alpha) into U(-alpha), whose overlap with U(alpha) is
    cos^2(2 alpha); leaf errors are single-qubit Z's on the outputs.
    """
    a, b = (1 + p) / 2, (1 - p) / 2
    c2, s2 = math.cos(2 * alpha) ** 2, math.sin(2 * alpha) ** 2
    return a**n * ((1 + p**n) / 2 + (1 - p**n) / 2 * c2) + b**n * (1 - p**n) / 2 * s2


def timing_teleport_fidelity(n: int, q: float) -> float:
    """Exact fidelity at alpha = pi/4 for the timing-error resource.

    Every gate leaves a correlated Z_k Z_E error with weight (1-q)/2; the output
    error is Z on the flipped leaves times Z^n when the number of flips is odd.
    """
    a, b = (1 + q) / 2, (1 - q) / 2
    return a**n + (b**n if n % 2 else 0.0)
