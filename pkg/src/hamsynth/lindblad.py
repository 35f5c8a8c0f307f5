"""Liouvillians for Hamiltonians with independent per-qubit reservoirs.

Each qubit alpha may couple to its own reservoir with generator

    L(rho) = B(1-s) D[s_-] rho + B s D[s_+] rho - (2C - B)/4 (rho - Z rho Z),

where D[L] rho = L rho L^dag - {L^dag L, rho}/2.  Coherences decay at rate C
and the inversion at rate B.  B = 0, C = gamma is pure dephasing with
p(t) = exp(-gamma t); s = 1/2, B = C = kappa is white noise, a depolarizing
channel with p(t) = exp(-kappa t).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .channels import Channel
from .pauli import SIGMA_MINUS, SIGMA_PLUS, PauliSum, embed, matrix_exp, pauli_matrix

MAX_QUBITS = 5
MAX_QUBITS_OPT_IN = 6


@dataclass(frozen=True)
class ReservoirSpec:
    B: float
    C: float
    s: float = 0.5

    def __post_init__(self):
        if self.B < 0 or 2 * self.C < self.B - 1e-15:
            raise ValueError(f"need 2C >= B >= 0, got B={self.B}, C={self.C}")
        if not 0.0 <= self.s <= 1.0:
            raise ValueError(f"bath parameter s={self.s} outside [0, 1]")

    @classmethod
    def dephasing(cls, gamma: float) -> "ReservoirSpec":
        return cls(0.0, gamma, 0.5)

    @classmethod
    def white(cls, kappa: float) -> "ReservoirSpec":
        return cls(kappa, kappa, 0.5)

    @classmethod
    def of_kind(cls, kind: str, rate: float) -> "ReservoirSpec":
        if kind == "dephasing":
            return cls.dephasing(rate)
        if kind in ("white", "depolarizing"):
            return cls.white(rate)
        raise ValueError(f"unknown noise kind {kind!r}")

    def scaled(self, factor: float) -> "ReservoirSpec":
        return ReservoirSpec(self.B * factor, self.C * factor, self.s)

    @property
    def is_zero(self) -> bool:
        return self.B == 0 and self.C == 0


@dataclass(frozen=True)
class NoiseSpec:
    """Per-qubit reservoirs; qubits that are not listed are noiseless."""

    reservoirs: Mapping[int, ReservoirSpec] = field(default_factory=dict)

    def __post_init__(self):
        items = dict(self.reservoirs)
        if any(q < 0 for q in items):
            raise ValueError("negative qubit index")
        object.__setattr__(self, "reservoirs", items)

    @classmethod
    def on(cls, qubits: Sequence[int], spec: Optional[ReservoirSpec]) -> "NoiseSpec":
        if spec is None:
            return cls({})
        if len(set(qubits)) != len(qubits):
            raise ValueError("duplicate qubit indices")
        return cls({q: spec for q in qubits})

    def check(self, n_qubits: int) -> None:
        for q in self.reservoirs:
            if q >= n_qubits:
                raise ValueError(f"noise on qubit {q} but only {n_qubits} qubits")

    def merged(self, other: "NoiseSpec") -> "NoiseSpec":
        """Generators add, so rates on shared qubits add up."""
        out = dict(self.reservoirs)
        for q, r in other.reservoirs.items():
            if q in out:
                a = out[q]
                if a.s != r.s and not (a.B == 0 or r.B == 0):
                    raise ValueError("cannot merge reservoirs with different s")
                s = a.s if r.B == 0 else r.s
                out[q] = ReservoirSpec(a.B + r.B, a.C + r.C, s)
            else:
                out[q] = r
        return NoiseSpec(out)

    @property
    def is_empty(self) -> bool:
        return all(r.is_zero for r in self.reservoirs.values())


def _check_size(n_qubits: int, allow_six: bool) -> None:
    cap = MAX_QUBITS_OPT_IN if allow_six else MAX_QUBITS
    if n_qubits > cap:
        raise ValueError(f"{n_qubits}-qubit superoperators exceed the cap of {cap}")


def _dissipator(op: np.ndarray) -> np.ndarray:
    d = op.shape[0]
    eye = np.eye(d)
    ldl = op.conj().T @ op
    return np.kron(op.conj(), op) - 0.5 * np.kron(eye, ldl) - 0.5 * np.kron(ldl.T, eye)


def single_qubit_generator(spec: ReservoirSpec) -> np.ndarray:
    """4x4 column-stacked generator of one reservoir."""
    z = pauli_matrix(3)
    g = spec.B * (1 - spec.s) * _dissipator(SIGMA_MINUS) + spec.B * spec.s * _dissipator(SIGMA_PLUS)
    g = g - (2 * spec.C - spec.B) / 4 * (np.eye(4) - np.kron(z, z))
    return g


def hamiltonian_generator(h: np.ndarray) -> np.ndarray:
    """Column-stacked generator of rho -> -i[H, rho]."""
    d = h.shape[0]
    eye = np.eye(d)
    return -1j * (np.kron(eye, h) - np.kron(h.T, eye))


def liouvillian(h: Union[PauliSum, np.ndarray, None], noise: Optional[NoiseSpec], n_qubits: Optional[int] = None,
                allow_six: bool = False) -> np.ndarray:
    """Superoperator generator H + sum_alpha L^(alpha)."""
    if isinstance(h, PauliSum):
        n = h.n_qubits if n_qubits is None else n_qubits
        if n != h.n_qubits:
            raise ValueError("qubit count mismatch")
        _check_size(n, allow_six)
        hm = h.to_dense()
    elif h is None:
        if n_qubits is None:
            raise ValueError("need n_qubits when h is None")
        n = n_qubits
        _check_size(n, allow_six)
        hm = np.zeros((1 << n, 1 << n), dtype=complex)
    else:
        hm = np.asarray(h, dtype=complex)
        n = int(round(np.log2(hm.shape[0])))
        _check_size(n, allow_six)
    gen = hamiltonian_generator(hm)
    if noise is not None:
        noise.check(n)
        d = 1 << n
        z = pauli_matrix(3)
        for q, spec in noise.reservoirs.items():
            if spec.is_zero:
                continue
            sm = embed(SIGMA_MINUS, [q], n)
            sp = embed(SIGMA_PLUS, [q], n)
            zq = embed(z, [q], n)
            gen = gen + spec.B * (1 - spec.s) * _dissipator(sm) + spec.B * spec.s * _dissipator(sp)
            gen = gen - (2 * spec.C - spec.B) / 4 * (np.eye(d * d) - np.kron(zq, zq))
    return gen


def evolve(gen: np.ndarray, t: float) -> Channel:
    """The channel exp(gen t)."""
    if t < 0:
        raise ValueError("evolution time must be non-negative")
    d2 = gen.shape[0]
    d = int(round(np.sqrt(d2)))
    return Channel(d, matrix_exp(gen * t))


def noisy_evolution(h: PauliSum, t: float, noise: Optional[NoiseSpec], allow_six: bool = False) -> Channel:
    return evolve(liouvillian(h, noise, allow_six=allow_six), t)


def _local_z_framing(n_qubits: int, degrees: Sequence[int]) -> np.ndarray:
    """prod_alpha exp(i deg_alpha (pi/4) Z_alpha) as a diagonal matrix."""
    dim = 1 << n_qubits
    idx = np.arange(dim)
    phase = np.zeros(dim)
    for q, k in enumerate(degrees):
        bit = (idx >> (n_qubits - 1 - q)) & 1
        phase += k * (np.pi / 4) * (1 - 2 * bit)
    return np.diag(np.exp(1j * phase))


def noisy_phase_gate(noise_kind: str, rate: float) -> Channel:
    """Noisy two-qubit phase gate diag(1, 1, 1, -1).

    Z x Z is switched on for t = pi/4 with a reservoir of the given kind on both
    qubits, followed by the noiseless local rotations exp(i pi/4 Z) x exp(i pi/4 Z).
    """
    if rate < 0:
        raise ValueError("rate must be non-negative")
    spec = ReservoirSpec.of_kind(noise_kind, rate)
    h = PauliSum.from_labels({"ZZ": 1.0})
    ch = noisy_evolution(h, np.pi / 4, NoiseSpec.on([0, 1], spec))
    frame = _local_z_framing(2, [1, 1])
    return Channel(4, np.kron(frame.conj(), frame) @ ch.superop)


def phase_gate_unitary() -> np.ndarray:
    return np.diag([1, 1, 1, -1]).astype(complex)


def kappa_from_p(p: float, duration: float = np.pi) -> float:
    """Rate giving parameter p after ``duration``: p = exp(-rate * duration)."""
    return -np.log(p) / duration
