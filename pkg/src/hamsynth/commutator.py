"""The commutator method: pulse sequences whose second-order term is a many-body Hamiltonian.

Every step evolves as exp(-i H dt).  The four-step sequence that runs
h2, h1, -h2, -h1 (in chronological order) multiplies out to

    e^{i h1 dt} e^{i h2 dt} e^{-i h1 dt} e^{-i h2 dt} = exp(-i dt' H_eff) + O(dt^3)

with H_eff = -i/2 [h1, h2] and the dilated time dt' = 2 dt^2.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .channels import Channel, compose, mix, unitary_channel
from .lindblad import NoiseSpec, ReservoirSpec, liouvillian
from .metrics import j_fidelity
from .pauli import (PauliString, PauliSum, effective_commutator_hamiltonian, expm_hermitian, matrix_exp)


@dataclass(frozen=True)
class Step:
    hamiltonian: PauliSum
    duration: float
    noise: NoiseSpec = field(default_factory=NoiseSpec)

    def __post_init__(self):
        if self.duration <= 0:
            raise ValueError("step durations must be positive")


@dataclass(frozen=True)
class ProtocolSequence:
    steps: tuple[Step, ...]
    target: PauliSum
    t_eff: float

    def __post_init__(self):
        n = self.target.n_qubits
        if any(s.hamiltonian.n_qubits != n for s in self.steps):
            raise ValueError("all steps must share the qubit count")

    @property
    def n_qubits(self) -> int:
        return self.target.n_qubits

    @property
    def noiseless(self) -> bool:
        return all(s.noise.is_empty for s in self.steps)


def _restrict(noise: Optional[Union[NoiseSpec, ReservoirSpec]], qubits: Sequence[int]) -> NoiseSpec:
    """Noise acting only on the qubits that take part in a step."""
    if noise is None:
        return NoiseSpec()
    if isinstance(noise, ReservoirSpec):
        return NoiseSpec.on(list(qubits), noise)
    return NoiseSpec({q: r for q, r in noise.reservoirs.items() if q in qubits})


def _step(h: PauliSum, dt: float, noise) -> Step:
    return Step(h, dt, _restrict(noise, h.support))


def inverse_steps(steps: Sequence[Step]) -> list[Step]:
    """Reverse order with negated Hamiltonians: the exact inverse when noiseless."""
    return [Step(-s.hamiltonian, s.duration, s.noise) for s in reversed(steps)]


def group_commutator(first: Sequence[Step], second: Sequence[Step]) -> list[Step]:
    """Steps for S1^-1 S2^-1 S1 S2, i.e. run ``second``, ``first``, then their inverses."""
    return list(second) + list(first) + inverse_steps(second) + inverse_steps(first)


def commutator_sequence(h1: PauliSum, h2: PauliSum, dt: float,
                        noise: Optional[Union[NoiseSpec, ReservoirSpec]] = None) -> ProtocolSequence:
    """Four steps realizing -i/2 [h1, h2] for the dilated time 2 dt^2.

    Noise, if given, acts on each step only on the qubits its Hamiltonian touches.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if h1.n_qubits != h2.n_qubits:
        raise ValueError("Hamiltonians act on different qubit counts")
    steps = group_commutator([_step(h1, dt, noise)], [_step(h2, dt, noise)])
    return ProtocolSequence(tuple(steps), effective_commutator_hamiltonian(h1, h2), 2 * dt * dt)


FIVE_BODY_PAIRS = {
    "AB": "ZXIII",
    "BC": "IYYII",
    "CD": "IIXYI",
    "DE": "IIIXZ",
}


def five_body_blocks(dt: float, noise=None) -> tuple[ProtocolSequence, ProtocolSequence]:
    """The two three-body blocks Z Z Y (qubits 0-2) and X Z Z (qubits 2-4)."""
    h = {k: PauliSum.from_labels({v: 1.0}) for k, v in FIVE_BODY_PAIRS.items()}
    abc = commutator_sequence(h["AB"], h["BC"], dt, noise)
    cde = commutator_sequence(h["DE"], h["CD"], dt, noise)
    return abc, cde


def nested_sequence_5body(dt: float, noise=None) -> ProtocolSequence:
    """Sixteen steps realizing Z^{x5} for the doubly dilated time 8 dt^4.

    The inner blocks are exact group commutators, so the outer commutator of
    the two blocks cancels their third-order remainders to leading order.
    """
    abc, cde = five_body_blocks(dt, noise)
    steps = group_commutator(cde.steps, abc.steps)
    target = effective_commutator_hamiltonian(cde.target, abc.target)
    t_pp = 2 * abc.t_eff * cde.t_eff
    if t_pp > 0.5:
        raise ValueError(f"dt={dt} gives an effective time {t_pp} above 0.5")
    return ProtocolSequence(tuple(steps), target, t_pp)


def dt_for_5body(t_pp: float) -> float:
    """Inner step time for a requested five-body effective time t'' = 8 dt^4."""
    return (t_pp / 8.0) ** 0.25


def sequence_unitary(seq: ProtocolSequence) -> np.ndarray:
    """Noiseless product of the steps (first step rightmost)."""
    d = 1 << seq.n_qubits
    u = np.eye(d, dtype=complex)
    cache: dict[tuple[str, float], np.ndarray] = {}
    for s in seq.steps:
        key = (str(s.hamiltonian), s.duration)
        if key not in cache:
            cache[key] = expm_hermitian(s.hamiltonian.to_dense(), s.duration)
        u = cache[key] @ u
    return u


def simulate_sequence(seq: ProtocolSequence, allow_six: bool = False) -> Channel:
    """Compose the noisy evolution of every step."""
    if seq.noiseless:
        return unitary_channel(sequence_unitary(seq))
    d = 1 << seq.n_qubits
    s = np.eye(d * d, dtype=complex)
    cache: dict[tuple, np.ndarray] = {}
    for st in seq.steps:
        key = (str(st.hamiltonian), st.duration, tuple(sorted(st.noise.reservoirs.items(), key=lambda kv: kv[0])))
        if key not in cache:
            cache[key] = matrix_exp(liouvillian(st.hamiltonian, st.noise, seq.n_qubits, allow_six) * st.duration)
        s = cache[key] @ s
    return Channel(d, s)


def target_unitary(seq: ProtocolSequence) -> np.ndarray:
    return expm_hermitian(seq.target.to_dense(), seq.t_eff)


def taylor_error(seq: ProtocolSequence) -> float:
    """Spectral-norm distance between the noiseless sequence and its target."""
    return float(np.linalg.norm(sequence_unitary(seq) - target_unitary(seq), 2))


def _permute_string(s: PauliString, perm: Sequence[int]) -> PauliString:
    chars = ["I"] * s.n_qubits
    for q, c in enumerate(s.letters):
        chars[perm[q]] = c
    return PauliString("".join(chars), s.coefficient)


def _permute_sum(h: PauliSum, perm: Sequence[int]) -> PauliSum:
    return PauliSum(tuple(_permute_string(t, perm) for t in h.terms), h.n_qubits)


def permute_sequence(seq: ProtocolSequence, perm: Sequence[int]) -> ProtocolSequence:
    """Relabel qubit q as perm[q] in every step and in the target."""
    steps = tuple(
        Step(_permute_sum(s.hamiltonian, perm), s.duration, NoiseSpec({perm[q]: r for q, r in s.noise.reservoirs.items()}))
        for s in seq.steps)
    return ProtocolSequence(steps, _permute_sum(seq.target, perm), seq.t_eff)


def symmetrize(seq: ProtocolSequence) -> list[ProtocolSequence]:
    """The three cyclic role permutations of a three-qubit sequence."""
    if seq.n_qubits != 3:
        raise ValueError("symmetrization is defined for three-qubit sequences")
    return [permute_sequence(seq, p) for p in ((0, 1, 2), (1, 2, 0), (2, 0, 1))]


def simulate_symmetrized(seqs: Sequence[ProtocolSequence]) -> Channel:
    """Equal-weight average of the channels of the permuted sequences."""
    return mix([simulate_sequence(s) for s in seqs])


# --- gate synthesis with Trotter loops -------------------------------------------------

ZZZ_PAIR = (PauliSum.from_labels({"ZXI": 1.0}), PauliSum.from_labels({"IYZ": 1.0}))


def _split_target(target_h: PauliSum) -> tuple[float, PauliSum]:
    """Coefficient of the Z^{x3} term and the remaining single-qubit terms."""
    if target_h.n_qubits != 3:
        raise ValueError("gate synthesis is implemented for three qubits")
    c = 0.0
    local = []
    for t in target_h.simplify().terms:
        if t.letters == "ZZZ":
            c += t.coefficient.real
        elif t.weight <= 1:
            local.append(t)
        else:
            raise ValueError(f"term {t} is neither Z^x3 nor single-qubit")
    return c, PauliSum(tuple(local), 3)


def _block_superop(c: float, local: PauliSum, tau: float, noise: Optional[NoiseSpec]) -> np.ndarray:
    """One Trotter block: the commutator-built c Z^{x3} for tau, then the local terms for tau."""
    d = 8
    s = np.eye(d * d, dtype=complex)
    if c != 0.0:
        h1, h2 = ZZZ_PAIR if c > 0 else (ZZZ_PAIR[1], ZZZ_PAIR[0])
        seq = commutator_sequence(h1, h2, math.sqrt(abs(c) * tau / 2), noise)
        s = simulate_sequence(seq).superop
    if local.terms:
        u = expm_hermitian(local.to_dense(), tau)
        s = np.kron(u.conj(), u) @ s
    return s


def gate_via_commutator(target_h: PauliSum, t_total: float, dt_m: float,
                        noise: Optional[Union[NoiseSpec, ReservoirSpec]] = None) -> Channel:
    """Trotterized exp(-i t_total target_h) with the Z^{x3} part built by commutators.

    ceil(t_total / dt_m) blocks are used and the last one is shortened; single-qubit
    terms are applied noiselessly between the commutator blocks.
    """
    if dt_m >= t_total + 1e-15 or dt_m <= 0:
        raise ValueError("need 0 < dt_m < t_total")
    c, local = _split_target(target_h)
    if isinstance(noise, ReservoirSpec):
        noise = NoiseSpec.on([0, 1, 2], noise)
    n_blocks = math.ceil(t_total / dt_m - 1e-12)
    last = t_total - (n_blocks - 1) * dt_m
    full = _block_superop(c, local, dt_m, noise)
    s = np.linalg.matrix_power(full, n_blocks - 1) if n_blocks > 1 else np.eye(64, dtype=complex)
    s = _block_superop(c, local, last, noise) @ s
    return Channel(8, s)


def gate_fidelity_via_commutator(target_h: PauliSum, t_total: float, dt_m: float, noise=None) -> float:
    ch = gate_via_commutator(target_h, t_total, dt_m, noise)
    return j_fidelity(ch, expm_hermitian(target_h.to_dense(), t_total))


@dataclass(frozen=True)
class OptimumResult:
    dt_m: float
    fidelity: float
    flat: bool
    grid: tuple[float, ...]
    grid_fidelity: tuple[float, ...]


def _golden_max(f, a: float, b: float, iters: int = 40, tol: float = 1e-7) -> tuple[float, float]:
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if abs(b - a) < tol * max(1.0, abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def optimal_dt_m(target_h: PauliSum, t_total: float, noise=None, points: int = 40,
                 dt_min: float = 1e-4) -> OptimumResult:
    """Grid search over log-spaced dt_m followed by golden-section refinement."""
    grid = np.geomspace(dt_min, t_total / 2, points)
    fid = [gate_fidelity_via_commutator(target_h, t_total, float(x), noise) for x in grid]
    i = int(np.argmax(fid))
    flat = (max(fid) - min(fid)) < 1e-9  # round-off over thousands of blocks reaches ~1e-12
    if flat:
        warnings.warn("fidelity landscape is flat over the dt_m grid", RuntimeWarning)
        return OptimumResult(float(grid[i]), float(fid[i]), True, tuple(map(float, grid)), tuple(fid))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    x, fx = _golden_max(lambda v: gate_fidelity_via_commutator(target_h, t_total, v, noise), float(lo), float(hi))
    if fx < fid[i]:
        x, fx = float(grid[i]), float(fid[i])
    return OptimumResult(float(x), float(fx), False, tuple(map(float, grid)), tuple(fid))


def qudit_bodyness(big_d: int, d: int, n_bodies: int = 1) -> int:
    """Number of qubit-like bodies: ceil(n_bodies log D / log d)."""
    if big_d < 2 or d < 2:
        raise ValueError("dimensions must be at least 2")
    x = n_bodies * math.log(big_d) / math.log(d)
    r = round(x)
    return int(r) if abs(x - r) < 1e-9 else math.ceil(x)


def commutator_fidelity_estimate(dt_prime: float, rate: float, kind: str = "white") -> float:
    """Leading-order fidelity of one noisy three-body commutator block."""
    c = 3.0 if kind == "white" else 2.0
    return 1.0 - c * math.sqrt(2 * dt_prime) * rate


def commutator_lne_estimate(dt_prime: float, rate: float) -> float:
    """Leading-order local noise equivalent 8 rate / (3 sqrt(2 dt'))."""
    return 8.0 * rate / (3.0 * math.sqrt(2 * dt_prime))
