"""Graph-state encoding of many-body Hamiltonians.

Conjugating with U = prod_{edges} U_PG maps X_a -> X_a Z^{N_a},
Y_a -> Y_a Z^{N_a} and leaves Z_a alone, so a local term becomes a
many-body term supported on the neighbourhood of its qubit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .channels import Channel, compose, embed_channel, unitary_channel
from .lindblad import (NoiseSpec, ReservoirSpec, _local_z_framing, liouvillian, noisy_evolution,
                       noisy_phase_gate)
from .metrics import j_fidelity
from .pauli import PauliString, PauliSum, expm_hermitian, matrix_exp
from .timing import q_factor, timing_fidelity_lower_bound

MAX_VERTICES = 10


@dataclass(frozen=True)
class Graph:
    n_vertices: int
    edges: frozenset

    def __init__(self, n_vertices: int, edges: Iterable[Sequence[int]] = ()):
        es = set()
        for a, b in edges:
            if a == b:
                raise ValueError("self-loops are not allowed")
            if not (0 <= a < n_vertices and 0 <= b < n_vertices):
                raise ValueError(f"edge ({a}, {b}) out of range")
            es.add((min(a, b), max(a, b)))
        object.__setattr__(self, "n_vertices", n_vertices)
        object.__setattr__(self, "edges", frozenset(es))

    @classmethod
    def star(cls, center: int, leaves: Sequence[int], n_vertices: int) -> "Graph":
        return cls(n_vertices, [(center, leaf) for leaf in leaves])

    def neighbors(self, a: int) -> tuple[int, ...]:
        return tuple(sorted({b for e in self.edges for b in e if a in e and b != a}))

    def degree(self, a: int) -> int:
        return len(self.neighbors(a))

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def encoding_unitary(g: Graph) -> np.ndarray:
    """prod over edges of diag(1, 1, 1, -1); diagonal with entries (-1)^{#edges inside the bit set}."""
    n = g.n_vertices
    if n > MAX_VERTICES:
        raise ValueError(f"{n} vertices exceed the cap of {MAX_VERTICES}")
    idx = np.arange(1 << n)
    sign = np.zeros(1 << n, dtype=int)
    for a, b in g.edges:
        sign ^= ((idx >> (n - 1 - a)) & 1) & ((idx >> (n - 1 - b)) & 1)
    return np.diag((1 - 2 * sign).astype(complex))


def conjugate_pauli(g: Graph, s: PauliString) -> PauliString:
    """U s U^dag for the graph's encoding unitary, computed symbolically."""
    n = g.n_vertices
    if s.n_qubits != n:
        raise ValueError("string and graph sizes differ")
    out = PauliString("I" * n, s.coefficient)
    for a, letter in enumerate(s.letters):
        if letter == "I":
            continue
        ops = {a: letter}
        image = PauliString.from_sparse(n, ops)
        if letter in "XY":
            image = image * PauliString.from_sparse(n, {b: "Z" for b in g.neighbors(a)})
        out = out * image
    return out


def transform_hamiltonian(g: Graph, h: PauliSum) -> PauliSum:
    return PauliSum(tuple(conjugate_pauli(g, t) for t in h.terms), h.n_qubits)


def phase_gate_network(g: Graph, encoding_noise: Optional[ReservoirSpec], parallel: bool = True) -> Channel:
    """Noisy realization of the encoding unitary.

    ``parallel`` switches all Z_a Z_b couplings on together for pi/4, with every gate
    bringing its own reservoirs, so a qubit of degree k sees k times the rate.
    Otherwise the gates run one after another.  Local Z framings are noiseless.
    """
    n = g.n_vertices
    if encoding_noise is None or encoding_noise.is_zero:
        return unitary_channel(encoding_unitary(g))
    if not g.edges:
        return unitary_channel(np.eye(1 << n, dtype=complex))
    if parallel:
        h = PauliSum(tuple(PauliString.from_sparse(n, {a: "Z", b: "Z"}) for a, b in g.sorted_edges()), n)
        noise = NoiseSpec()
        for a, b in g.sorted_edges():
            noise = noise.merged(NoiseSpec.on([a, b], encoding_noise))
        ch = noisy_evolution(h, math.pi / 4, noise, allow_six=True)
        frame = _local_z_framing(n, [g.degree(a) for a in range(n)])
        return Channel(ch.dim, np.kron(frame.conj(), frame) @ ch.superop)
    kind, rate = _kind_rate(encoding_noise)
    pg = noisy_phase_gate(kind, rate)
    out = unitary_channel(np.eye(1 << n, dtype=complex))
    for a, b in g.sorted_edges():
        out = compose(embed_channel(pg, [a, b], n), out)
    return out


def _kind_rate(spec: ReservoirSpec) -> tuple[str, float]:
    if spec.B == 0:
        return "dephasing", spec.C
    if spec.B == spec.C and spec.s == 0.5:
        return "white", spec.B
    raise ValueError("sequential phase gates support dephasing or white reservoirs")


def simulate_fixed_encoding(g: Graph, inner_h: PauliSum, dt_prime: float,
                            noise: Optional[Union[NoiseSpec, ReservoirSpec]] = None,
                            encoding_noise: Optional[ReservoirSpec] = None,
                            parallel: bool = True) -> Channel:
    """Encode, evolve the inner Hamiltonian for dt', decode.

    ``noise`` acts during the inner evolution (a ReservoirSpec is placed on the
    support of the inner Hamiltonian); ``encoding_noise`` is the reservoir of each
    phase gate.
    """
    if isinstance(noise, ReservoirSpec):
        noise = NoiseSpec.on(list(inner_h.support), noise)
    net = phase_gate_network(g, encoding_noise, parallel)
    if noise is None or noise.is_empty:
        u = expm_hermitian(inner_h.to_dense(), dt_prime)
        inner = unitary_channel(u)
    else:
        inner = noisy_evolution(inner_h, dt_prime, noise, allow_six=True)
    return compose(net, compose(inner, net))


def fixed_encoding_target(g: Graph, inner_h: PauliSum, dt_prime: float) -> np.ndarray:
    return expm_hermitian(transform_hamiltonian(g, inner_h).to_dense(), dt_prime)


def gse_analytic_fidelity(m: int, rate: float, noise_kind: str) -> float:
    """Small-dt' estimate for a star encoding of an m-body term.

    The centre sees 2(m-1) noisy gates and every leaf two; p = exp(-rate pi/4).
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    p = math.exp(-rate * math.pi / 4)
    if noise_kind == "dephasing":
        return (1 + p ** (2 * (m - 1))) / 2 * ((1 + p**2) / 2) ** (m - 1)
    if noise_kind in ("white", "depolarizing"):
        return (1 + 3 * p ** (2 * (m - 1))) / 4 * ((1 + 3 * p**2) / 4) ** (m - 1)
    raise ValueError(f"unknown noise kind {noise_kind!r}")


def gse_timing_fidelity_bounds(m: int, sigma: float, collective: bool) -> tuple[float, float]:
    """(lower bound, small-sigma form) for timing errors on the encoding, omega = 1.

    The protocol fidelity is bounded by 1 - 4(1 - F_e) where F_e is the fidelity
    of the encoding step: ((1+q)/2)^(m-1) for separate two-qubit couplings, the
    binomial expression for one collective star coupling.
    """
    if m < 2:
        raise ValueError("m must be at least 2")
    if collective:
        f_e = timing_fidelity_lower_bound(m - 1, 1.0, sigma)
    else:
        f_e = ((1 + q_factor(1.0, sigma)) / 2) ** (m - 1)
    return 1 - 4 * (1 - f_e), 1 - 4 * (m - 1) * sigma**2


def variable_encoding_lne(dt_prime: float, rate: float) -> float:
    """kappa ~ (pi / dt') kappa_0 when the encoding is redone for every step."""
    if dt_prime <= 0:
        raise ValueError("dt_prime must be positive")
    return math.pi / dt_prime * rate


def fixed_encoding_lne_estimate(dt_prime: float, rate: float) -> float:
    """kappa ~ 2 pi kappa_0 / (3 dt') for the three-qubit fixed encoding."""
    return 2 * math.pi * rate / (3 * dt_prime)


# --- the three-qubit examples used for gate synthesis ---------------------------------

G1_GRAPH = Graph(3, [(0, 1), (0, 2)])
G2_GRAPH = Graph(3, [(0, 1)])
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def g1_gate_channel(rate: float, dt_prime: float = math.pi / 4, noise_kind: str = "white",
                    parallel: bool = True) -> Channel:
    """Star encoding of X_0, giving X_0 Z_1 Z_2; inner single-qubit evolution noiseless."""
    spec = ReservoirSpec.of_kind(noise_kind, rate)
    return simulate_fixed_encoding(G1_GRAPH, PauliSum.from_labels({"XII": 1.0}), dt_prime, None, spec, parallel)


def g2_gate_channel(rate: float, dt_prime: float = math.pi / 4, noise_kind: str = "white") -> Channel:
    """One phase gate (0, 1) around a noisy two-qubit X_1 Z_2 evolution, giving Z_0 X_1 Z_2."""
    spec = ReservoirSpec.of_kind(noise_kind, rate)
    return simulate_fixed_encoding(G2_GRAPH, PauliSum.from_labels({"IXZ": 1.0}), dt_prime, spec, spec)


def g1_gate_fidelity(rate: float, dt_prime: float = math.pi / 4, noise_kind: str = "white",
                     parallel: bool = True) -> float:
    ch = g1_gate_channel(rate, dt_prime, noise_kind, parallel)
    return j_fidelity(ch, fixed_encoding_target(G1_GRAPH, PauliSum.from_labels({"XII": 1.0}), dt_prime))


def g2_gate_fidelity(rate: float, dt_prime: float = math.pi / 4, noise_kind: str = "white") -> float:
    ch = g2_gate_channel(rate, dt_prime, noise_kind)
    return j_fidelity(ch, fixed_encoding_target(G2_GRAPH, PauliSum.from_labels({"IXZ": 1.0}), dt_prime))


def h2_g2_channel(rate: float, dt_m: float, t_total: float = math.pi / 4, noise_kind: str = "white") -> Channel:
    """exp(-i t (Z Z Z + sum X)) through the single-edge encoding plus a Hadamard on qubit 1.

    With W = Had_1 U_PG(0,1), Z Z Z = W (X_1 Z_2) W^dag and sum X = W (X_0 Z_1 + Z_1 + X_2) W^dag.
    The pipeline applies W^dag, alternates the two primed Hamiltonians for dt_m, then W.
    Two-body terms carry the reservoir on their qubits; single-qubit terms are noiseless.
    """
    if not 0 < dt_m <= t_total:
        raise ValueError("need 0 < dt_m <= t_total")
    spec = ReservoirSpec.of_kind(noise_kind, rate)
    had = embed_channel(unitary_channel(HADAMARD), [1], 3)
    pg = phase_gate_network(G2_GRAPH, spec)
    h1p = PauliSum.from_labels({"IXZ": 1.0})
    h2p = PauliSum.from_labels({"XZI": 1.0, "IZI": 1.0, "IIX": 1.0})
    n1 = NoiseSpec.on([1, 2], spec)
    n2 = NoiseSpec.on([0, 1], spec)

    def block(tau: float) -> np.ndarray:
        a = matrix_exp(liouvillian(h1p, n1) * tau)
        b = matrix_exp(liouvillian(h2p, n2) * tau)
        return b @ a

    n_blocks = math.ceil(t_total / dt_m - 1e-12)
    last = t_total - (n_blocks - 1) * dt_m
    s = np.linalg.matrix_power(block(dt_m), n_blocks - 1) if n_blocks > 1 else np.eye(64, dtype=complex)
    s = block(last) @ s
    loop = Channel(8, s)
    return compose(had, compose(pg, compose(loop, compose(pg, had))))


def h2_target(t_total: float = math.pi / 4) -> np.ndarray:
    return expm_hermitian(PauliSum.from_labels({"ZZZ": 1.0, "XII": 1.0, "IXI": 1.0, "IIX": 1.0}).to_dense(), t_total)


def h2_g2_fidelity(rate: float, dt_m: float, t_total: float = math.pi / 4, noise_kind: str = "white") -> float:
    return j_fidelity(h2_g2_channel(rate, dt_m, t_total, noise_kind), h2_target(t_total))
