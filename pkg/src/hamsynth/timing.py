"""Gaussian timing errors on unitary Hamiltonians and on commuting sums of them.

A pulse meant to last t lasts t + delta with delta ~ N(0, sigma^2).  Removing the
ideal evolution leaves the average of exp(-i delta H) rho exp(i delta H).  For
H = omega h with h^2 = 1 this is the correlated channel with q = exp(-2 sigma^2 omega^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channels import Channel, compose, correlated_pauli_channel, identity_channel
from .pauli import PauliString, PauliSum

GH_NODES = 64


@dataclass(frozen=True)
class TimingSpec:
    sigma: float
    terms: tuple[tuple[float, PauliString], ...]

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        terms = tuple((float(w), h) for w, h in self.terms)
        if not terms:
            raise ValueError("need at least one term")
        n = terms[0][1].n_qubits
        for _, h in terms:
            if h.n_qubits != n:
                raise ValueError("terms act on different qubit counts")
            if not h.is_involution():
                raise ValueError(f"term {h} does not square to the identity")
        for i in range(len(terms)):
            for j in range(i + 1, len(terms)):
                if not terms[i][1].commutes_with(terms[j][1]):
                    raise ValueError("timing terms must commute")
        object.__setattr__(self, "terms", terms)

    @property
    def n_qubits(self) -> int:
        return self.terms[0][1].n_qubits

    def hamiltonian(self) -> np.ndarray:
        return PauliSum(tuple(h * w for w, h in self.terms), self.n_qubits).to_dense()

    @classmethod
    def star(cls, n_terms: int, sigma: float, omega: float = 1.0) -> "TimingSpec":
        """Ising couplings Z_0 Z_k, k = 1..n_terms."""
        n = n_terms + 1
        return cls(sigma, tuple((omega, PauliString.from_sparse(n, {0: "Z", k: "Z"})) for k in range(1, n)))

    @classmethod
    def chain(cls, n_terms: int, sigma: float, omega: float = 1.0) -> "TimingSpec":
        """Open Ising chain Z_k Z_{k+1}."""
        n = n_terms + 1
        return cls(sigma, tuple((omega, PauliString.from_sparse(n, {k: "Z", k + 1: "Z"})) for k in range(n_terms)))


def q_factor(omega: float, sigma: float) -> float:
    return math.exp(-2 * sigma**2 * omega**2)


def timing_channel_unitary(omega: float, h: PauliString, sigma: float) -> Channel:
    return correlated_pauli_channel(h, q_factor(omega, sigma))


def _gauss_hermite(sigma: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes delta_i and weights w_i with sum w_i f(delta_i) ~ E[f(delta)]."""
    x, w = np.polynomial.hermite.hermgauss(GH_NODES)
    return math.sqrt(2) * sigma * x, w / math.sqrt(math.pi)


def _phase_superop(h: np.ndarray, deltas: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """sum_i w_i kron(conj(U_i), U_i) with U_i = exp(-i delta_i h), via the eigenbasis of h."""
    lam, v = np.linalg.eigh(h)
    # average of exp(-i delta (lam_a - lam_b)) for row a, column b in the eigenbasis
    diff = lam[:, None] - lam[None, :]
    avg = np.tensordot(weights, np.exp(-1j * deltas[:, None, None] * diff[None]), axes=1)
    d = h.shape[0]
    # rho' = V (avg * (V^dag rho V)) V^dag, as a superoperator on column-stacked rho
    m = np.kron(v.conj(), v)
    return m @ np.diag(avg.reshape(-1, order="F")) @ m.conj().T


def timing_channel_commuting_sum(spec: TimingSpec) -> Channel:
    """Single shared timing error on the whole commuting sum (Gauss-Hermite quadrature)."""
    if spec.sigma == 0:
        return identity_channel(1 << spec.n_qubits)
    deltas, weights = _gauss_hermite(spec.sigma)
    h = spec.hamiltonian()
    return Channel(h.shape[0], _phase_superop(h, deltas, weights))


def independent_timing_channel(spec: TimingSpec) -> Channel:
    """Independent timing error on every term."""
    out = identity_channel(1 << spec.n_qubits)
    for w, h in spec.terms:
        out = compose(timing_channel_unitary(w, h, spec.sigma), out)
    return out


def timing_fidelity_lower_bound(n: int, omega: float, sigma: float) -> float:
    """Binomial expression for n Ising terms with one shared timing error."""
    if n < 1:
        raise ValueError("n must be at least 1")
    s2w2 = sigma**2 * omega**2
    total = math.comb(2 * n, n) / 2 ** (2 * n)
    total += sum(math.comb(2 * n, k) * math.exp(-2 * (n - k) ** 2 * s2w2) for k in range(n)) / 2 ** (2 * n - 1)
    return total


def collective_fidelity(spec: TimingSpec) -> float:
    """E|tr exp(-i delta H) / d|^2 by quadrature, without forming a superoperator."""
    if spec.sigma == 0:
        return 1.0
    deltas, weights = _gauss_hermite(spec.sigma)
    lam = np.linalg.eigvalsh(spec.hamiltonian())
    tr = np.exp(-1j * deltas[:, None] * lam[None, :]).mean(axis=1)
    return float(np.dot(weights, np.abs(tr) ** 2))


def pairwise_fidelity(spec: TimingSpec) -> float:
    """prod_j (1 + q_j)/2, exact when no product of terms is the identity."""
    return float(np.prod([(1 + q_factor(w, spec.sigma)) / 2 for w, _ in spec.terms]))


def three_qubit_g(omega: float, sigma: float) -> float:
    x = sigma**2 * omega**2
    return 3 / 8 + 0.5 * math.exp(-2 * x) + math.exp(-8 * x) / 8


def mc_timing_channel(spec: TimingSpec, samples: int, seed: int) -> Channel:
    """Empirical average over sampled Gaussian timing errors."""
    if samples < 1000:
        raise ValueError("use at least 1000 samples")
    rng = np.random.default_rng(seed)
    deltas = rng.normal(0.0, spec.sigma, size=samples) if spec.sigma > 0 else np.zeros(samples)
    weights = np.full(samples, 1.0 / samples)
    h = spec.hamiltonian()
    return Channel(h.shape[0], _phase_superop(h, deltas, weights))


def mc_timing_channel_direct(spec: TimingSpec, samples: int, seed: int) -> Channel:
    """Brute-force average of kron(conj(U), U) over samples; slow, used as an oracle."""
    rng = np.random.default_rng(seed)
    deltas = rng.normal(0.0, spec.sigma, size=samples)
    h = spec.hamiltonian()
    lam, v = np.linalg.eigh(h)
    d = h.shape[0]
    acc = np.zeros((d * d, d * d), dtype=complex)
    for dl in deltas:
        u = (v * np.exp(-1j * dl * lam)) @ v.conj().T
        acc += np.kron(u.conj(), u)
    return Channel(d, acc / samples)


def fidelity_grid(sigmas: Sequence[float], ns: Sequence[int], omega: float = 1.0) -> list[dict]:
    """Collective versus pairwise fidelities on star graphs."""
    rows = []
    for n in ns:
        for s in sigmas:
            spec = TimingSpec.star(n, s, omega)
            rows.append({"n": n, "sigma": s, "collective": collective_fidelity(spec),
                         "pairwise": pairwise_fidelity(spec), "bound": timing_fidelity_lower_bound(n, omega, s)})
    return rows
