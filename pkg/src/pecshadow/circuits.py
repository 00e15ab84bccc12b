"""Circuit intermediate representation, gate unitaries, and light cones."""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field

import numpy as np

from .paulis import PauliSizeMismatch, PauliString

_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_FIXED_GATES = {
    "h": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "s": np.array([[1, 0], [0, 1j]], dtype=complex),
    "x": _PAULI_1Q["X"],
    "y": _PAULI_1Q["Y"],
    "z": _PAULI_1Q["Z"],
    "cnot": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "cz": np.diag([1, 1, 1, -1]).astype(complex),
}


def pauli_matrix(label: str) -> np.ndarray:
    """Kronecker product of single-qubit Paulis for a label like "XZ"."""
    m = _PAULI_1Q[label[0]]
    for ch in label[1:]:
        m = np.kron(m, _PAULI_1Q[ch])
    return m


class UnknownGate(ValueError):
    pass


@dataclass(frozen=True)
class GateOp:
    """One ideal gate: fixed unitary or Pauli rotation exp(-i*angle*P/2).

    Rotation kinds are "r" followed by the Pauli label over the targets,
    e.g. "rz" (one qubit) or "rxx", "ryz" (two qubits).
    """

    gate_id: int
    kind: str
    targets: tuple[int, ...]
    angle: float | None = None
    noise_ref: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"gate {self.gate_id}: duplicate target qubits")
        k = self.kind
        if k in _FIXED_GATES:
            if self.angle is not None:
                raise ValueError(f"gate {self.gate_id}: {k} takes no angle")
            arity = 1 if k in ("h", "s", "x", "y", "z") else 2
        elif k.startswith("r") and all(c in "xyz" for c in k[1:]) and 1 <= len(k) - 1 <= 2:
            if self.angle is None:
                raise ValueError(f"gate {self.gate_id}: rotation {k} needs an angle")
            arity = len(k) - 1
        else:
            raise UnknownGate(f"gate {self.gate_id}: unknown kind {k!r}")
        if len(self.targets) != arity:
            raise ValueError(f"gate {self.gate_id}: {k} expects {arity} targets")

    @property
    def arity(self) -> int:
        return len(self.targets)

    def unitary(self) -> np.ndarray:
        if self.kind in _FIXED_GATES:
            return _FIXED_GATES[self.kind]
        label = self.kind[1:].upper()
        p = pauli_matrix(label)
        half = self.angle / 2.0
        return np.cos(half) * np.eye(p.shape[0]) - 1j * np.sin(half) * p


@dataclass(frozen=True)
class Circuit:
    """Ordered ideal-gate list; gate ids run 1..nu in order."""

    n_qubits: int
    gates: tuple[GateOp, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for pos, g in enumerate(self.gates, start=1):
            if g.gate_id != pos:
                raise ValueError(f"gate ids must be 1..nu in order, got {g.gate_id} at {pos}")
            if any(t >= self.n_qubits or t < 0 for t in g.targets):
                raise ValueError(f"gate {g.gate_id} targets out of range")

    @property
    def nu(self) -> int:
        return len(self.gates)

    def to_json(self) -> str:
        gates = []
        for g in self.gates:
            d: dict = {"id": g.gate_id, "kind": g.kind, "targets": list(g.targets)}
            if g.angle is not None:
                d["angle"] = g.angle
            if g.noise_ref is not None:
                d["noise_ref"] = g.noise_ref
            gates.append(d)
        return json.dumps({"n_qubits": self.n_qubits, "gates": gates})

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        data = json.loads(text)
        gates = tuple(
            GateOp(
                gate_id=d["id"],
                kind=d["kind"],
                targets=tuple(d["targets"]),
                angle=d.get("angle"),
                noise_ref=d.get("noise_ref"),
            )
            for d in data["gates"]
        )
        return cls(n_qubits=data["n_qubits"], gates=gates)


def build_circuit(n_qubits: int, specs: list[tuple]) -> Circuit:
    """Convenience builder: specs are (kind, targets[, angle]) tuples in order."""
    gates = []
    for i, spec in enumerate(specs, start=1):
        kind, targets = spec[0], tuple(spec[1])
        angle = spec[2] if len(spec) > 2 else None
        gates.append(GateOp(gate_id=i, kind=kind, targets=targets, angle=angle))
    return Circuit(n_qubits=n_qubits, gates=tuple(gates))


@functools.lru_cache(maxsize=4096)
def _light_cone_cached(circuit: Circuit, support: frozenset[int]) -> frozenset[int]:
    live = set(support)
    cone: set[int] = set()
    for g in reversed(circuit.gates):
        if live.intersection(g.targets):
            cone.add(g.gate_id)
            live.update(g.targets)
    return frozenset(cone)


def light_cone(circuit: Circuit, p: PauliString) -> frozenset[int]:
    """Gate ids in the backward light cone of the support of ``p``.

    Sweeps gates last to first growing a live-qubit set; a gate joins the
    cone iff it touches a live qubit, after which all its targets are live.
    Assumes each gate's noise acts only on the gate's own targets.
    """
    if p.n_qubits != circuit.n_qubits:
        raise PauliSizeMismatch(
            f"observable on {p.n_qubits} qubits vs circuit on {circuit.n_qubits}"
        )
    return _light_cone_cached(circuit, frozenset(p.qubits))
