"""Density matrices, CPTP maps and the Choi-Jamiolkowski correspondence.

Superoperators use column stacking: ``vec(A rho B) = kron(B.T, A) vec(rho)``,
so a Kraus set {K} has superoperator ``sum_k kron(conj(K), K)``.

The Choi state of a channel on dimension d is
``E = (channel x id)(|Phi><Phi|)`` with ``|Phi> = sum_i |i>|i> / sqrt(d)``;
the channel acts on the first tensor factor.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .pauli import PauliString, embed, pauli_matrix, string_to_operator

PSD_TOL = 1e-9
TP_TOL = 1e-9


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: Optional[int] = None) -> np.ndarray:
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    return np.asarray(v).reshape((dim, dim), order="F")


@dataclass(frozen=True, eq=False)
class Channel:
    """A linear map on d x d matrices stored as its d^2 x d^2 superoperator."""

    dim: int
    superop: np.ndarray
    kraus: Optional[tuple[np.ndarray, ...]] = None

    def __post_init__(self):
        s = np.asarray(self.superop, dtype=complex)
        if s.shape != (self.dim**2, self.dim**2):
            raise ValueError(f"superoperator shape {s.shape} does not match dim {self.dim}")
        s.setflags(write=False)
        object.__setattr__(self, "superop", s)

    @property
    def n_qubits(self) -> int:
        return int(round(np.log2(self.dim)))

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return apply(self, rho)

    def __matmul__(self, other: "Channel") -> "Channel":
        return compose(self, other)


def identity_channel(dim: int) -> Channel:
    return Channel(dim, np.eye(dim * dim, dtype=complex))


def unitary_channel(u: np.ndarray) -> Channel:
    u = np.asarray(u, dtype=complex)
    return Channel(u.shape[0], np.kron(u.conj(), u), (u,))


def channel_from_kraus(ops: Sequence[np.ndarray], atol: float = TP_TOL) -> Channel:
    """Build a trace-preserving channel from a Kraus set."""
    ops = [np.asarray(k, dtype=complex) for k in ops]
    if not ops:
        raise ValueError("empty Kraus set")
    d = ops[0].shape[0]
    total = sum(k.conj().T @ k for k in ops)
    if not np.allclose(total, np.eye(d), atol=atol):
        raise ValueError("Kraus operators are not trace preserving")
    s = sum(np.kron(k.conj(), k) for k in ops)
    return Channel(d, s, tuple(ops))


def apply(c: Channel, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho)
    if rho.shape != (c.dim, c.dim):
        raise ValueError(f"state of shape {rho.shape} does not match channel dim {c.dim}")
    return unvec(c.superop @ vec(rho), c.dim)


def compose(late: Channel, early: Channel) -> Channel:
    """The map rho -> late(early(rho))."""
    if late.dim != early.dim:
        raise ValueError("channel dimensions differ")
    kraus = None
    if late.kraus is not None and early.kraus is not None and len(late.kraus) * len(early.kraus) <= 64:
        kraus = tuple(a @ b for a in late.kraus for b in early.kraus)
    return Channel(late.dim, late.superop @ early.superop, kraus)


def compose_all(channels: Sequence[Channel]) -> Channel:
    """Compose in chronological order: the first element acts first."""
    out = channels[0]
    for c in channels[1:]:
        out = compose(c, out)
    return out


def mix(channels: Sequence[Channel], weights: Optional[Sequence[float]] = None) -> Channel:
    if weights is None:
        weights = [1.0 / len(channels)] * len(channels)
    s = sum(w * c.superop for w, c in zip(weights, channels))
    return Channel(channels[0].dim, s)


def _superop_to_tensor(s: np.ndarray, d: int) -> np.ndarray:
    # T[a, b, c, e]: rho'[a, b] = sum T[a, b, c, e] rho[c, e]
    return s.reshape(d, d, d, d).transpose(1, 0, 3, 2)


def _tensor_to_superop(t: np.ndarray, d: int) -> np.ndarray:
    return t.transpose(1, 0, 3, 2).reshape(d * d, d * d)


def embed_channel(c: Channel, targets: Sequence[int], n_qubits: int) -> Channel:
    """Lift a channel on ``targets`` to ``n_qubits`` qubits (identity elsewhere)."""
    k = len(targets)
    if c.dim != 1 << k:
        raise ValueError("channel size does not match the number of targets")
    if c.kraus is not None:
        return Channel(1 << n_qubits, sum(np.kron(K.conj(), K) for K in (embed(k_, targets, n_qubits) for k_ in c.kraus)),
                       tuple(embed(k_, targets, n_qubits) for k_ in c.kraus))
    t = _superop_to_tensor(c.superop, c.dim).reshape([2] * (4 * k))
    rest = [q for q in range(n_qubits) if q not in targets]
    eye = np.eye(1 << len(rest)).reshape([2] * (2 * len(rest)))
    # full tensor with axes (out_targets, in_targets... ) interleaved below
    full = np.multiply.outer(t, np.multiply.outer(eye, eye))
    # axes of full: t -> (a_t, b_t, c_t, e_t), then eye1 -> (a_r, c_r), eye2 -> (b_r, e_r)
    r = len(rest)
    a_t = list(range(0, k))
    b_t = list(range(k, 2 * k))
    c_t = list(range(2 * k, 3 * k))
    e_t = list(range(3 * k, 4 * k))
    base = 4 * k
    a_r = list(range(base, base + r))
    c_r = list(range(base + r, base + 2 * r))
    b_r = list(range(base + 2 * r, base + 3 * r))
    e_r = list(range(base + 3 * r, base + 4 * r))
    order = list(targets) + rest
    perm = np.argsort(order)

    def pick(t_axes, r_axes):
        axes = t_axes + r_axes
        return [axes[p] for p in perm]

    full = full.transpose(pick(a_t, a_r) + pick(b_t, b_r) + pick(c_t, c_r) + pick(e_t, e_r))
    d = 1 << n_qubits
    return Channel(d, _tensor_to_superop(full.reshape(d, d, d, d), d))


def tensor_channels(a: Channel, b: Channel) -> Channel:
    """a acting on the leading factor, b on the trailing factor."""
    na, nb = a.n_qubits, b.n_qubits
    ea = embed_channel(a, list(range(na)), na + nb)
    eb = embed_channel(b, list(range(na, na + nb)), na + nb)
    return compose(ea, eb)


def dephasing_channel(target: int, p: float, n: int = 1) -> Channel:
    """rho -> p rho + (1 - p)/2 (rho + Z rho Z) on ``target``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"dephasing parameter {p} outside [0, 1]")
    ops = [np.sqrt((1 + p) / 2) * np.eye(2), np.sqrt((1 - p) / 2) * pauli_matrix(3)]
    return embed_channel(channel_from_kraus(ops), [target], n)


def depolarizing_channel(target: int, p: float, n: int = 1) -> Channel:
    """rho -> p rho + (1 - p)/4 sum_j sigma_j rho sigma_j on ``target``."""
    if not -1.0 / 3.0 <= p <= 1.0:
        raise ValueError(f"depolarizing parameter {p} outside [-1/3, 1]")
    ops = [np.sqrt((1 + 3 * p) / 4) * np.eye(2)] + [np.sqrt((1 - p) / 4) * pauli_matrix(j) for j in (1, 2, 3)]
    return embed_channel(channel_from_kraus(ops), [target], n)


def correlated_pauli_channel(s: PauliString, p: float) -> Channel:
    """rho -> p rho + (1 - p)/2 (rho + s rho s) for an involutory Pauli string s."""
    if not s.is_involution() or abs(s.coefficient.imag) > 1e-12:
        raise ValueError("correlated channel needs a Hermitian involution")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"parameter {p} outside [0, 1]")
    m = string_to_operator(s)
    return channel_from_kraus([np.sqrt((1 + p) / 2) * np.eye(m.shape[0]), np.sqrt((1 - p) / 2) * m])


def choi_of(c: Channel) -> np.ndarray:
    """Choi state (channel on the first factor), a d^2 x d^2 density matrix."""
    d = c.dim
    s4 = c.superop.reshape(d, d, d, d)
    return s4.transpose(1, 3, 0, 2).reshape(d * d, d * d) / d


def channel_from_choi(e: np.ndarray, atol: float = 1e-8) -> Channel:
    """Inverse of ``choi_of``; checks the trace-preservation marginal."""
    e = np.asarray(e, dtype=complex)
    d = int(round(np.sqrt(e.shape[0])))
    if e.shape != (d * d, d * d):
        raise ValueError("Choi state must be d^2 x d^2")
    e4 = e.reshape(d, d, d, d)
    marginal = np.einsum("ikil->kl", e4)
    if not np.allclose(marginal, np.eye(d) / d, atol=atol):
        raise ValueError("Choi state is not that of a trace-preserving map")
    s = e4.transpose(2, 0, 3, 1).reshape(d * d, d * d) * d
    return Channel(d, s)


def kraus_from_choi(e: np.ndarray, atol: float = 1e-12) -> list[np.ndarray]:
    d = int(round(np.sqrt(e.shape[0])))
    w, v = np.linalg.eigh(e)
    ops = []
    for lam, vec_ in zip(w, v.T):
        if lam > atol:
            # |v> = sum K[i,k] |i>|k> / sqrt(d) up to the eigenvalue weight
            ops.append(np.sqrt(lam * d) * vec_.reshape(d, d))
    return ops


def is_cptp(c: Channel, atol: float = PSD_TOL) -> bool:
    e = choi_of(c)
    if not np.allclose(e, e.conj().T, atol=atol):
        return False
    if np.linalg.eigvalsh((e + e.conj().T) / 2).min() < -atol:
        return False
    d = c.dim
    marginal = np.einsum("ikil->kl", e.reshape(d, d, d, d))
    return bool(np.allclose(marginal, np.eye(d) / d, atol=atol))


def partial_trace(rho: np.ndarray, keep: Sequence[int], n_qubits: int) -> np.ndarray:
    """Trace out every qubit not in ``keep``; kept qubits stay in ascending order."""
    keep = sorted(keep)
    t = np.asarray(rho).reshape([2] * (2 * n_qubits))
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    rows = list(letters[:n_qubits])
    cols = list(letters[n_qubits:2 * n_qubits])
    for q in range(n_qubits):
        if q not in keep:
            cols[q] = rows[q]
    out = "".join(rows[q] for q in keep) + "".join(cols[q] for q in keep)
    r = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
    dk = 1 << len(keep)
    return r.reshape(dk, dk)


def is_density_matrix(rho: np.ndarray, atol: float = 1e-10) -> bool:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return False
    if not np.allclose(rho, rho.conj().T, atol=atol) or abs(np.trace(rho) - 1) > atol:
        return False
    return bool(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() >= -PSD_TOL)


def pure_state(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_density_matrix(dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_channel(dim: int, rng: np.random.Generator, n_kraus: int = 3) -> Channel:
    """Random CPTP map from a Haar isometry into dim * n_kraus dimensions."""
    u = random_unitary(dim * n_kraus, rng)
    iso = u[:, :dim]
    ops = [iso[k * dim:(k + 1) * dim, :] for k in range(n_kraus)]
    return channel_from_kraus(ops)


def pauli_transfer_matrix(c: Channel) -> np.ndarray:
    """R[i, j] = tr(P_i c(P_j)) / d over the n-qubit Pauli basis."""
    from itertools import product

    n = c.n_qubits
    basis = [string_to_operator(PauliString("".join(w))) for w in product("IXYZ", repeat=n)]
    d = c.dim
    out = np.zeros((len(basis), len(basis)))
    for j, pj in enumerate(basis):
        img = apply(c, pj)
        for i, pi in enumerate(basis):
            out[i, j] = np.real(np.trace(pi @ img)) / d
    return out


def apply_on_qubits(rho: np.ndarray, c: Channel, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """Apply a k-qubit channel to ``targets`` of an n-qubit density matrix without lifting it."""
    k = len(targets)
    if c.dim != 1 << k:
        raise ValueError("channel size does not match the number of targets")
    t = _superop_to_tensor(c.superop, c.dim).reshape([2] * (4 * k))
    r = np.asarray(rho).reshape([2] * (2 * n_qubits))
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    rows = list(letters[:n_qubits])
    cols = list(letters[n_qubits:2 * n_qubits])
    new_rows = rows.copy()
    new_cols = cols.copy()
    extra = iter(letters[2 * n_qubits:])
    out_r, out_c = [], []
    for q in targets:
        a, b = next(extra), next(extra)
        new_rows[q] = a
        new_cols[q] = b
        out_r.append(a)
        out_c.append(b)
    t_sub = "".join(out_r) + "".join(out_c) + "".join(rows[q] for q in targets) + "".join(cols[q] for q in targets)
    expr = t_sub + "," + "".join(rows) + "".join(cols) + "->" + "".join(new_rows) + "".join(new_cols)
    d = 1 << n_qubits
    return np.einsum(expr, t, r).reshape(d, d)


def apply_unitary_on_qubits(rho: np.ndarray, u: np.ndarray, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    full = embed(u, targets, n_qubits)
    return full @ rho @ full.conj().T
