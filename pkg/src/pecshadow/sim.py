"""Statevector trajectory simulation and the dense density-matrix oracle.

Qubit 0 is the most significant bit of the amplitude index, so the bitstring
b satisfies b[i] = (index >> (n-1-i)) & 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, pauli_matrix
from .noise import NoiseSpec, QuasiDecomposition, circuit_decomposition
from .paulis import PauliSizeMismatch, PauliString

DENSE_LIMIT = 12
STATEVECTOR_LIMIT = 24

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_SDG = np.diag([1, -1j]).astype(complex)
# Rotations into measurement bases: apply, then measure in the computational
# basis. The +1 eigenstate of the measured Pauli maps to |0>.
BASIS_ROTATIONS = {"X": _H, "Y": _H @ _SDG, "Z": np.eye(2, dtype=complex)}


class TooLarge(ValueError):
    pass


def apply_unitary(amps: np.ndarray, u: np.ndarray, targets, n_qubits: int) -> np.ndarray:
    """Apply a k-qubit unitary to amplitudes of shape (2^n,) or (B, 2^n)."""
    single = amps.ndim == 1
    psi = amps.reshape((-1,) + (2,) * n_qubits)
    k = len(targets)
    axes = [1 + t for t in targets]
    psi = np.moveaxis(psi, axes, range(1, 1 + k))
    moved_shape = psi.shape
    mat = psi.reshape(psi.shape[0], 2**k, -1)
    mat = np.einsum("ij,bjk->bik", u, mat)
    psi = np.moveaxis(mat.reshape(moved_shape), range(1, 1 + k), axes)
    out = psi.reshape(-1, 2**n_qubits)
    return out[0] if single else out


def zero_state(n_qubits: int, batch: int | None = None) -> np.ndarray:
    if n_qubits > STATEVECTOR_LIMIT:
        raise TooLarge(f"{n_qubits} qubits exceeds statevector limit {STATEVECTOR_LIMIT}")
    if batch is None:
        psi = np.zeros(2**n_qubits, dtype=complex)
        psi[0] = 1.0
    else:
        psi = np.zeros((batch, 2**n_qubits), dtype=complex)
        psi[:, 0] = 1.0
    return psi


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    n_qubits: int
    entries: np.ndarray

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def purity(self) -> float:
        return float(np.trace(self.entries @ self.entries).real)


def _sample_pauli_label(channel, rng: np.random.Generator) -> str:
    labels = [lab for lab, _ in channel.probs]
    idx = rng.choice(len(labels), p=channel.prob_vector())
    return labels[idx]


def apply_pauli(amps: np.ndarray, label: str, targets, n_qubits: int) -> np.ndarray:
    if set(label) == {"I"}:
        return amps
    return apply_unitary(amps, pauli_matrix(label), targets, n_qubits)


def run_trajectory(
    circuit: Circuit,
    recovery: dict[int, str],
    noise: NoiseSpec,
    rng: np.random.Generator,
) -> StateVector:
    """One Monte-Carlo trajectory: per gate, ideal unitary, a sampled noise
    Pauli, then the prescribed recovery Pauli."""
    psi = zero_state(circuit.n_qubits)
    noisy = noise.gates_map
    for g in circuit.gates:
        psi = apply_unitary(psi, g.unitary(), g.targets, circuit.n_qubits)
        ch = noisy.get(g.gate_id)
        if ch is not None:
            psi = apply_pauli(psi, _sample_pauli_label(ch, rng), g.targets, circuit.n_qubits)
        rec = recovery.get(g.gate_id)
        if rec is not None:
            psi = apply_pauli(psi, rec, g.targets, circuit.n_qubits)
    return StateVector(circuit.n_qubits, psi)


def ideal_statevector(circuit: Circuit) -> StateVector:
    psi = zero_state(circuit.n_qubits)
    for g in circuit.gates:
        psi = apply_unitary(psi, g.unitary(), g.targets, circuit.n_qubits)
    return StateVector(circuit.n_qubits, psi)


def measure_in_bases(s: StateVector, bases, rng: np.random.Generator) -> np.ndarray:
    """Rotate each qubit into its basis, then sample a bitstring from the Born rule."""
    if len(bases) != s.n_qubits:
        raise PauliSizeMismatch("bases length != n_qubits")
    psi = s.amplitudes
    for q, b in enumerate(bases):
        if b == "Z":
            continue
        psi = apply_unitary(psi, BASIS_ROTATIONS[b], (q,), s.n_qubits)
    probs = np.abs(psi) ** 2
    probs /= probs.sum()
    idx = rng.choice(len(probs), p=probs)
    n = s.n_qubits
    return np.array([(idx >> (n - 1 - i)) & 1 for i in range(n)], dtype=np.uint8)


# ---------------------------------------------------------------------------
# Dense density-matrix oracle


def _check_dense(n_qubits: int):
    if n_qubits > DENSE_LIMIT:
        raise TooLarge(f"{n_qubits} qubits exceeds dense oracle limit {DENSE_LIMIT}")


def _embed(label: str, targets, n_qubits: int) -> np.ndarray:
    """Dense n-qubit operator for a Pauli label on the given targets."""
    full = ["I"] * n_qubits
    for t, ch in zip(targets, label):
        full[t] = ch
    return pauli_matrix("".join(full))


def _apply_channel_dense(rho: np.ndarray, weights, labels, targets, n_qubits: int) -> np.ndarray:
    out = np.zeros_like(rho)
    for w, lab in zip(weights, labels):
        if w == 0.0:
            continue
        if set(lab) == {"I"}:
            out += w * rho
        else:
            p = _embed(lab, targets, n_qubits)
            out += w * (p @ rho @ p)
    return out


def exact_density(
    circuit: Circuit,
    noise: NoiseSpec,
    recovery_policy: str = "none",
    decomp: QuasiDecomposition | None = None,
) -> DensityMatrix:
    """Evolve the exact density matrix through ideal gates and noise channels.

    With recovery_policy="full" the exact inverse quasichannel follows every
    noise channel, reproducing the noiseless state.
    """
    _check_dense(circuit.n_qubits)
    if recovery_policy not in ("none", "full"):
        raise ValueError(f"unknown recovery policy {recovery_policy!r}")
    if recovery_policy == "full" and decomp is None:
        decomp = circuit_decomposition(circuit, noise)
    n = circuit.n_qubits
    rho = np.zeros((2**n, 2**n), dtype=complex)
    rho[0, 0] = 1.0
    noisy = noise.gates_map
    for g in circuit.gates:
        ug = _embed_unitary(g, n)
        rho = ug @ rho @ ug.conj().T
        ch = noisy.get(g.gate_id)
        if ch is not None:
            labels = [lab for lab, _ in ch.probs]
            rho = _apply_channel_dense(rho, ch.prob_vector(), labels, g.targets, n)
            if recovery_policy == "full":
                qc = decomp.channels_map[g.gate_id]
                labels = [lab for lab, _ in qc.gamma]
                rho = _apply_channel_dense(rho, qc.gamma_vector(), labels, g.targets, n)
    return DensityMatrix(n, rho)


def _embed_unitary(gate, n_qubits: int) -> np.ndarray:
    eye = np.eye(2**n_qubits, dtype=complex)
    # apply the gate to each basis vector (columns of the identity)
    return apply_unitary(eye, gate.unitary(), gate.targets, n_qubits).T


def exact_expectation(rho: DensityMatrix, p: PauliString) -> float:
    if p.n_qubits != rho.n_qubits:
        raise PauliSizeMismatch("observable and state qubit counts differ")
    op = pauli_matrix(p.dense_label())
    val = np.trace(op @ rho.entries) * p.phase
    return float(val.real)


def statevector_expectation(s: StateVector, p: PauliString) -> float:
    """<psi|P|psi> via direct statevector application; independent of the
    density-matrix path."""
    if p.n_qubits != s.n_qubits:
        raise PauliSizeMismatch("observable and state qubit counts differ")
    psi = s.amplitudes
    for q, a in p.support:
        psi = apply_unitary(psi, pauli_matrix(a), (q,), s.n_qubits)
    return float((np.vdot(s.amplitudes, psi) * p.phase).real)


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    keep = sorted(keep)
    n = rho.n_qubits
    if not keep:
        raise ValueError("subsystem must be nonempty")
    if any(q < 0 or q >= n for q in keep):
        raise ValueError("subsystem qubit out of range")
    k = len(keep)
    drop = [q for q in range(n) if q not in keep]
    t = rho.entries.reshape((2,) * (2 * n))
    # Trace out dropped qubits pairwise (row axis q, column axis n+q).
    for q in sorted(drop, reverse=True):
        t = np.trace(t, axis1=q, axis2=t.ndim // 2 + q)
    return DensityMatrix(k, t.reshape(2**k, 2**k))


def exact_subsystem_purity(rho: DensityMatrix, subsystem) -> float:
    sub = partial_trace(rho, subsystem)
    return sub.purity()
