"""Jamiolkowski fidelity and distance, chaining bounds and the local noise equivalent."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .channels import Channel, choi_of, compose
from .lindblad import NoiseSpec, ReservoirSpec, noisy_evolution
from .pauli import PauliSum, expm_hermitian, is_unitary


@dataclass(frozen=True)
class FidelityReport:
    fidelity: float
    distance: float
    channel: str = ""
    target: str = ""

    @classmethod
    def of(cls, fidelity: float, channel: str = "", target: str = "") -> "FidelityReport":
        return cls(fidelity, float(np.sqrt(max(0.0, 1.0 - fidelity))), channel, target)


@dataclass(frozen=True)
class LneResult:
    noise_kind: str
    rate: float
    target_fidelity: float
    residual: float
    iterations: int


def max_entangled(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)


def j_fidelity(e: Channel, u: np.ndarray) -> float:
    """<Psi|E|Psi> with E the Choi state of e and |Psi> = (u x 1)|Phi>.

    Equivalent to tr(S_u^dag S_e) / d^2 for superoperators S, which is what
    is evaluated here.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (e.dim, e.dim):
        raise ValueError("unitary and channel dimensions differ")
    if not is_unitary(u):
        raise ValueError("target is not unitary")
    d = e.dim
    # tr(kron(u*, u)^dag S) without forming the Kronecker product
    s4 = e.superop.reshape(d, d, d, d)
    val = np.einsum("be,ac,baec->", u, u.conj(), s4)
    return float(np.real(val)) / d**2


def j_fidelity_choi(e: Channel, u: np.ndarray) -> float:
    """Reference implementation through the explicit Choi state."""
    d = e.dim
    psi = np.kron(u, np.eye(d)) @ max_entangled(d)
    return float(np.real(np.vdot(psi, choi_of(e) @ psi)))


def j_distance(e: Channel, u: np.ndarray) -> float:
    return float(np.sqrt(max(0.0, 1.0 - j_fidelity(e, u))))


def fidelity_report(e: Channel, u: np.ndarray, channel: str = "", target: str = "") -> FidelityReport:
    return FidelityReport.of(j_fidelity(e, u), channel, target)


def avg_fidelity(f: float, d: int) -> float:
    """Average pure-state fidelity from the Jamiolkowski fidelity."""
    if not -1e-12 <= f <= 1 + 1e-12:
        raise ValueError("fidelity outside [0, 1]")
    return (f * d + 1) / (d + 1)


def chaining_bound(step_distances: Sequence[float]) -> tuple[float, float]:
    """(sum of distances, fidelity lower bound 1 - (sum)^2)."""
    if any(x < 0 for x in step_distances):
        raise ValueError("distances must be non-negative")
    total = float(sum(step_distances))
    return total, 1.0 - total**2


def gate_fidelity_repeated(e_step: Channel, u_target: np.ndarray, reps: int) -> float:
    if reps < 1:
        raise ValueError("reps must be at least 1")
    s = np.linalg.matrix_power(e_step.superop, reps)
    return j_fidelity(Channel(e_step.dim, s), u_target)


def _reference_fidelity(h: PauliSum, t: float, kind: str, rate: float, u: np.ndarray) -> float:
    spec = ReservoirSpec.of_kind(kind, rate)
    ch = noisy_evolution(h, t, NoiseSpec.on(list(range(h.n_qubits)), spec))
    return j_fidelity(ch, u)


def lne_solve(e: Channel, h_ideal: PauliSum, t: float, noise_kind: str, tol: float = 1e-8,
              max_iter: int = 200) -> LneResult:
    """Rate of local noise on every qubit that reproduces the fidelity of e.

    The reference is exp[(H + sum_alpha L^(alpha)) t] with the ideal Hamiltonian;
    bisection on the rate, whose fidelity is strictly decreasing.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    kind = "white" if noise_kind in ("white", "depolarizing") else noise_kind
    u = expm_hermitian(h_ideal.to_dense(), t)
    target = j_fidelity(e, u)
    f0 = _reference_fidelity(h_ideal, t, kind, 0.0, u)
    if target >= f0 - tol:
        return LneResult(kind, 0.0, target, abs(f0 - target), 0)
    guess = -np.log(2 * target - 1) / t if target > 0.5 else 1.0
    hi = 10 * max(1.0, guess)
    f_hi = _reference_fidelity(h_ideal, t, kind, hi, u)
    if f_hi > target:
        raise ValueError(f"target fidelity {target} unreachable: F(0)={f0}, F({hi})={f_hi}")
    lo, f_lo = 0.0, f0
    mid, f_mid = lo, f_lo
    for it in range(1, max_iter + 1):
        mid = 0.5 * (lo + hi)
        f_mid = _reference_fidelity(h_ideal, t, kind, mid, u)
        if not f_hi - 1e-12 <= f_mid <= f_lo + 1e-12:
            raise RuntimeError("reference fidelity is not monotone on the bracket")
        if abs(f_mid - target) < tol * 1e-2 or hi - lo < 1e-15 * max(1.0, hi):
            break
        if f_mid > target:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    return LneResult(kind, mid, target, abs(f_mid - target), it)


def lne_analytic_dephasing(f: float, m: int, t: float) -> float:
    """gamma = -ln(2 F^(1/m) - 1) / t for m dephased qubits."""
    arg = 2 * f ** (1.0 / m) - 1
    if arg <= 0:
        raise ValueError("fidelity too small for the closed-form dephasing LNE")
    return float(-np.log(arg) / t)


def dephasing_fidelity(p: float, m: int) -> float:
    return ((1 + p) / 2) ** m


def unitary_of(h: Union[PauliSum, np.ndarray], t: float) -> np.ndarray:
    hm = h.to_dense() if isinstance(h, PauliSum) else np.asarray(h)
    return expm_hermitian(hm, t)


def compose_distance_check(e1: Channel, u1: np.ndarray, e2: Channel, u2: np.ndarray) -> tuple[float, float]:
    """(D(u2 u1, e2 e1), D1 + D2) for testing the chaining inequality."""
    lhs = j_distance(compose(e2, e1), u2 @ u1)
    return lhs, j_distance(e1, u1) + j_distance(e2, u2)
