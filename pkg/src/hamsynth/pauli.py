"""Pauli-string algebra and the dense linear-algebra substrate.

Conventions used throughout the package:

* Paulis are indexed sigma_0 = I, sigma_1 = X, sigma_2 = Y, sigma_3 = Z.
* Qubit 0 is the most significant tensor factor, so the letter string
  ``"ZX"`` means ``kron(Z, X)``.
* Time evolution is ``exp(-i H t)`` with hbar = 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.linalg

MAX_STRING_QUBITS = 12
MAX_EXP_DIM = 4096

_MATS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_LETTERS = "IXYZ"

# Single-letter products a*b = phase * c.
_PRODUCT: dict[tuple[str, str], tuple[complex, str]] = {}
for _a in _LETTERS:
    _PRODUCT[("I", _a)] = (1, _a)
    _PRODUCT[(_a, "I")] = (1, _a)
    _PRODUCT[(_a, _a)] = (1, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _PRODUCT[(_a, _b)] = (1j, _c)
    _PRODUCT[(_b, _a)] = (-1j, _c)


def pauli_matrix(index: int) -> np.ndarray:
    """Return the 2x2 matrix sigma_index for index in 0..3."""
    if index not in (0, 1, 2, 3):
        raise ValueError(f"Pauli index must be in 0..3, got {index!r}")
    return _MATS[_LETTERS[index]].copy()


SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)  # (X + iY)/2 = |0><1|
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)  # (X - iY)/2 = |1><0|


@dataclass(frozen=True)
class PauliString:
    """A tensor product of Pauli letters times a complex coefficient."""

    letters: str
    coefficient: complex = 1.0

    def __post_init__(self):
        if not self.letters:
            raise ValueError("PauliString needs at least one qubit")
        bad = set(self.letters) - set(_LETTERS)
        if bad:
            raise ValueError(f"invalid Pauli letters {sorted(bad)}")
        object.__setattr__(self, "coefficient", complex(self.coefficient))

    @classmethod
    def from_sparse(cls, n_qubits: int, ops: Mapping[int, str], coefficient: complex = 1.0) -> "PauliString":
        """Build a string from ``{qubit: letter}``; unlisted qubits are I."""
        chars = ["I"] * n_qubits
        for q, letter in ops.items():
            if not 0 <= q < n_qubits:
                raise ValueError(f"qubit {q} out of range for {n_qubits} qubits")
            chars[q] = letter
        return cls("".join(chars), coefficient)

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.letters) if c != "I")

    @property
    def weight(self) -> int:
        return len(self.support)

    def with_coefficient(self, coefficient: complex) -> "PauliString":
        return PauliString(self.letters, coefficient)

    def __mul__(self, other):
        if isinstance(other, PauliString):
            if other.n_qubits != self.n_qubits:
                raise ValueError("qubit counts differ")
            phase = self.coefficient * other.coefficient
            out = []
            for a, b in zip(self.letters, other.letters):
                ph, c = _PRODUCT[(a, b)]
                phase *= ph
                out.append(c)
            return PauliString("".join(out), phase)
        return PauliString(self.letters, self.coefficient * complex(other))

    __rmul__ = __mul__

    def __neg__(self) -> "PauliString":
        return PauliString(self.letters, -self.coefficient)

    def commutes_with(self, other: "PauliString") -> bool:
        anti = sum(1 for a, b in zip(self.letters, other.letters) if a != "I" and b != "I" and a != b)
        return anti % 2 == 0

    def is_involution(self, atol: float = 1e-12) -> bool:
        """True when the operator squares to the identity."""
        return abs(self.coefficient**2 - 1) < atol

    def to_dense(self) -> np.ndarray:
        return string_to_operator(self)

    def __str__(self) -> str:
        c = self.coefficient
        if c == 1:
            return self.letters
        if c.imag == 0:
            return f"{c.real:g}*{self.letters}"
        return f"({c:g})*{self.letters}"


def string_to_operator(s: PauliString) -> np.ndarray:
    """Dense matrix of a Pauli string, qubit 0 most significant."""
    if s.n_qubits > MAX_STRING_QUBITS:
        raise ValueError(f"{s.n_qubits} qubits exceeds the cap of {MAX_STRING_QUBITS}")
    # diagonal and permutation structure avoid the chain of Kronecker products
    dim = 1 << s.n_qubits
    idx = np.arange(dim)
    cols = idx.copy()
    phase = np.full(dim, s.coefficient, dtype=complex)
    for q, letter in enumerate(s.letters):
        if letter == "I":
            continue
        shift = s.n_qubits - 1 - q
        bit = (idx >> shift) & 1
        if letter in "XY":
            cols = cols ^ (1 << shift)
        if letter == "Z":
            phase = phase * (1 - 2 * bit)
        elif letter == "Y":
            # Y|b> = i(-1)^b |1-b>, so row r picks column r^mask with phase i(-1)^(1-r_bit)
            phase = phase * 1j * (2 * bit - 1)
    out = np.zeros((dim, dim), dtype=complex)
    out[idx, cols] = phase
    return out


@dataclass(frozen=True)
class PauliSum:
    """A Hermitian operator sum_k lambda_k H_k with real lambda_k."""

    terms: tuple[PauliString, ...] = field(default_factory=tuple)
    n_qubits: int = 0

    def __post_init__(self):
        terms = tuple(self.terms)
        n = self.n_qubits or (terms[0].n_qubits if terms else 0)
        if n <= 0:
            raise ValueError("PauliSum needs a positive qubit count")
        for t in terms:
            if t.n_qubits != n:
                raise ValueError("all terms must share the qubit count")
            if abs(t.coefficient.imag) > 1e-12:
                raise ValueError(f"term {t} has a non-real coefficient")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "n_qubits", n)

    @classmethod
    def of(cls, *terms: PauliString) -> "PauliSum":
        return cls(tuple(terms))

    @classmethod
    def from_labels(cls, labels: Mapping[str, float]) -> "PauliSum":
        """``{"ZZI": 1.0, "XII": 0.5}`` style constructor."""
        return cls(tuple(PauliString(k, v) for k, v in labels.items()))

    @classmethod
    def zero(cls, n_qubits: int) -> "PauliSum":
        return cls((), n_qubits)

    def simplify(self, atol: float = 1e-14) -> "PauliSum":
        acc: dict[str, complex] = {}
        for t in self.terms:
            acc[t.letters] = acc.get(t.letters, 0) + t.coefficient
        terms = tuple(PauliString(k, v.real) for k, v in sorted(acc.items()) if abs(v) > atol)
        return PauliSum(terms, self.n_qubits)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit counts differ")
        return PauliSum(self.terms + other.terms, self.n_qubits)

    def __neg__(self) -> "PauliSum":
        return self.scaled(-1.0)

    def scaled(self, factor: float) -> "PauliSum":
        return PauliSum(tuple(t * factor for t in self.terms), self.n_qubits)

    @property
    def support(self) -> tuple[int, ...]:
        qs: set[int] = set()
        for t in self.terms:
            qs.update(t.support)
        return tuple(sorted(qs))

    def to_dense(self) -> np.ndarray:
        dim = 1 << self.n_qubits
        out = np.zeros((dim, dim), dtype=complex)
        for t in self.terms:
            out += string_to_operator(t)
        return out

    def all_commute(self) -> bool:
        ts = self.terms
        return all(ts[i].commutes_with(ts[j]) for i in range(len(ts)) for j in range(i + 1, len(ts)))

    def __str__(self) -> str:
        return " + ".join(str(t) for t in self.terms) or "0"


def pauli_sum_commutator(a: PauliSum, b: PauliSum) -> list[PauliString]:
    """Symbolic [a, b] as a list of (generally imaginary-coefficient) strings."""
    out: dict[str, complex] = {}
    for s in a.terms:
        for t in b.terms:
            if s.commutes_with(t):
                continue
            p = s * t
            out[p.letters] = out.get(p.letters, 0) + 2 * p.coefficient
    return [PauliString(k, v) for k, v in sorted(out.items()) if abs(v) > 1e-14]


def effective_commutator_hamiltonian(h1: PauliSum, h2: PauliSum) -> PauliSum:
    """The Hermitian operator -i/2 [h1, h2]."""
    terms = [t * (-0.5j) for t in pauli_sum_commutator(h1, h2)]
    return PauliSum(tuple(terms), h1.n_qubits).simplify()


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Return ab - ba."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return a @ b - b @ a


def matrix_exp(a: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring with Pade approximants."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix_exp needs a square matrix")
    if a.shape[0] > MAX_EXP_DIM:
        raise ValueError(f"dimension {a.shape[0]} exceeds the cap of {MAX_EXP_DIM}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return scipy.linalg.expm(a)


def expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i h t) for Hermitian h via an eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def kron_all(mats: Iterable[np.ndarray]) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def embed(op: np.ndarray, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """Lift an operator on ``targets`` (in that order) to ``n_qubits`` qubits."""
    k = len(targets)
    if op.shape != (1 << k, 1 << k):
        raise ValueError("operator size does not match the number of targets")
    if len(set(targets)) != k or any(not 0 <= t < n_qubits for t in targets):
        raise ValueError(f"bad targets {targets!r}")
    rest = [q for q in range(n_qubits) if q not in targets]
    full = np.kron(op, np.eye(1 << len(rest)))
    # axes currently ordered (targets..., rest...) for both row and column
    order = list(targets) + rest
    perm = np.argsort(order)
    t = full.reshape([2] * (2 * n_qubits))
    t = t.transpose(list(perm) + [n_qubits + p for p in perm])
    return t.reshape(1 << n_qubits, 1 << n_qubits)


def is_unitary(u: np.ndarray, atol: float = 1e-9) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=atol)


def allclose_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-10) -> bool:
    """Compare two operators after aligning their global phase."""
    return phase_aligned_distance(a, b) <= atol


def phase_aligned_distance(a: np.ndarray, b: np.ndarray) -> float:
    """min over phi of max|a - e^{i phi} b|, with phi from the overlap tr(b^dag a)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError("shape mismatch")
    ov = np.vdot(b, a)
    phase = ov / abs(ov) if abs(ov) > 1e-300 else 1.0
    return float(np.max(np.abs(a - phase * b)))
