"""Sparse multi-qubit Pauli strings and their algebra.

Pauli strings are stored as a map from qubit index to axis so that all
estimator arithmetic only ever touches the support.
"""

from __future__ import annotations

from dataclasses import dataclass, field

AXES = ("I", "X", "Y", "Z")

# Single-qubit products: (a, b) -> (axis, phase) with a*b = phase * axis.
_MUL_TABLE = {
    ("I", "I"): ("I", 1), ("I", "X"): ("X", 1), ("I", "Y"): ("Y", 1), ("I", "Z"): ("Z", 1),
    ("X", "I"): ("X", 1), ("Y", "I"): ("Y", 1), ("Z", "I"): ("Z", 1),
    ("X", "X"): ("I", 1), ("Y", "Y"): ("I", 1), ("Z", "Z"): ("I", 1),
    ("X", "Y"): ("Z", 1j), ("Y", "X"): ("Z", -1j),
    ("Y", "Z"): ("X", 1j), ("Z", "Y"): ("X", -1j),
    ("Z", "X"): ("Y", 1j), ("X", "Z"): ("Y", -1j),
}

_VALID_PHASES = (1, -1, 1j, -1j)


class PauliSizeMismatch(ValueError):
    """Raised when two Pauli strings (or a string and a circuit) disagree on qubit count."""


@dataclass(frozen=True)
class PauliString:
    """A phased tensor product of single-qubit Paulis, identity factors omitted."""

    n_qubits: int
    support: tuple[tuple[int, str], ...] = field(default=())
    phase: complex = 1

    def __post_init__(self):
        if self.n_qubits <= 0:
            raise ValueError("n_qubits must be positive")
        support = tuple(sorted((q, a) for q, a in self.support if a != "I"))
        object.__setattr__(self, "support", support)
        seen = set()
        for q, a in support:
            if not 0 <= q < self.n_qubits:
                raise ValueError(f"qubit {q} out of range for {self.n_qubits} qubits")
            if q in seen:
                raise ValueError(f"duplicate qubit {q} in support")
            if a not in ("X", "Y", "Z"):
                raise ValueError(f"invalid axis {a!r}")
            seen.add(q)
        if self.phase not in _VALID_PHASES:
            raise ValueError(f"phase must be one of {_VALID_PHASES}")

    @classmethod
    def from_map(cls, n_qubits: int, support: dict[int, str], phase: complex = 1) -> "PauliString":
        return cls(n_qubits, tuple(support.items()), phase)

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        return cls(n_qubits)

    @classmethod
    def parse(cls, text: str, n_qubits: int | None = None) -> "PauliString":
        """Parse either dense form ("XIZ") or sparse form ("X0 Z2").

        An optional leading '+' or '-' sets the phase.
        """
        text = text.strip()
        phase = 1
        if text.startswith(("+", "-")):
            phase = -1 if text[0] == "-" else 1
            text = text[1:].strip()
        if not text:
            raise ValueError("empty Pauli string")
        if any(ch.isdigit() for ch in text):
            support: dict[int, str] = {}
            max_q = -1
            for token in text.split():
                axis, idx = token[0].upper(), token[1:]
                if axis not in ("X", "Y", "Z", "I") or not idx.isdigit():
                    raise ValueError(f"bad sparse Pauli token {token!r}")
                q = int(idx)
                max_q = max(max_q, q)
                if axis != "I":
                    support[q] = axis
            n = n_qubits if n_qubits is not None else max_q + 1
            return cls.from_map(n, support, phase)
        dense = text.upper()
        if any(ch not in AXES for ch in dense):
            raise ValueError(f"bad dense Pauli string {text!r}")
        n = n_qubits if n_qubits is not None else len(dense)
        if len(dense) != n:
            raise PauliSizeMismatch(f"dense string length {len(dense)} != n_qubits {n}")
        return cls.from_map(n, {q: a for q, a in enumerate(dense) if a != "I"}, phase)

    def axis(self, qubit: int) -> str:
        return dict(self.support).get(qubit, "I")

    @property
    def support_map(self) -> dict[int, str]:
        return dict(self.support)

    @property
    def qubits(self) -> tuple[int, ...]:
        return tuple(q for q, _ in self.support)

    def weight(self) -> int:
        return len(self.support)

    def is_identity(self) -> bool:
        return not self.support

    def is_hermitian(self) -> bool:
        return self.phase in (1, -1)

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n_qubits != other.n_qubits:
            raise PauliSizeMismatch(
                f"cannot multiply Pauli strings on {self.n_qubits} and {other.n_qubits} qubits"
            )
        phase = self.phase * other.phase
        a_map, b_map = self.support_map, other.support_map
        out: dict[int, str] = {}
        for q in set(a_map) | set(b_map):
            axis, ph = _MUL_TABLE[(a_map.get(q, "I"), b_map.get(q, "I"))]
            phase *= ph
            if axis != "I":
                out[q] = axis
        return PauliString.from_map(self.n_qubits, out, phase)

    def dense_label(self) -> str:
        m = self.support_map
        return "".join(m.get(q, "I") for q in range(self.n_qubits))

    def __str__(self):
        sign = {1: "+", -1: "-", 1j: "+i", -1j: "-i"}[self.phase]
        body = " ".join(f"{a}{q}" for q, a in self.support) or "I"
        return f"{sign}{body}"


def pauli_mul(a: PauliString, b: PauliString) -> PauliString:
    """Product of two Pauli strings with the accumulated phase."""
    return a * b


def pauli_weight(p: PauliString) -> int:
    """Number of non-identity tensor factors."""
    return p.weight()
