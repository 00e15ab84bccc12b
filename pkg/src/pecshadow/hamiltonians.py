"""Spin Hamiltonians, Hamiltonian-variational ansatz circuits, and the
offline parameter-fixture optimizer used by the experiment pipelines."""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, GateOp, pauli_matrix
from .paulis import PauliString
from .sim import DENSE_LIMIT, StateVector, TooLarge, ideal_statevector, statevector_expectation

KINDS = ("spin-ring", "heisenberg-chain")


@dataclass(frozen=True)
class HamiltonianSpec:
    """Seeded description of a spin model.

    spin-ring: sum_k omega_k Z_k + J sum_ring (XX + YY + ZZ), omega_k ~ U(-1, 1).
    heisenberg-chain: sum_k J_k (XX + YY + ZZ) on chain edges, J_k ~ U(-1, 1),
    overridable with explicit couplings.
    """

    kind: str
    n_sites: int
    j: float = 0.3
    seed: int = 0
    couplings: tuple[float, ...] | None = None  # chain J_k override
    fields: tuple[float, ...] | None = None  # ring omega_k override

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown Hamiltonian kind {self.kind!r}")
        if self.kind == "spin-ring" and self.n_sites < 3:
            raise ValueError("spin ring needs at least 3 sites")
        if self.kind == "heisenberg-chain" and self.n_sites < 2:
            raise ValueError("chain needs at least 2 sites")
        if self.couplings is not None and len(self.couplings) != self.n_sites - 1:
            raise ValueError("need one coupling per chain edge")
        if self.fields is not None and len(self.fields) != self.n_sites:
            raise ValueError("need one field per site")


def _ring_edges(n: int) -> list[tuple[int, int]]:
    return [(k, (k + 1) % n) for k in range(n)]


def _chain_edges(n: int) -> list[tuple[int, int]]:
    return [(k, k + 1) for k in range(n - 1)]


def _ring_fields(spec: HamiltonianSpec) -> np.ndarray:
    if spec.fields is not None:
        return np.array(spec.fields)
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 71]))
    return rng.uniform(-1.0, 1.0, spec.n_sites)


def _chain_couplings(spec: HamiltonianSpec) -> np.ndarray:
    if spec.couplings is not None:
        return np.array(spec.couplings)
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 72]))
    return rng.uniform(-1.0, 1.0, spec.n_sites - 1)


def build_hamiltonian(spec: HamiltonianSpec) -> list[tuple[float, PauliString]]:
    """Term list (coefficient, PauliString): N + 3N terms for the ring,
    3(N-1) for the chain."""
    n = spec.n_sites
    terms: list[tuple[float, PauliString]] = []
    if spec.kind == "spin-ring":
        for k, w in enumerate(_ring_fields(spec)):
            terms.append((float(w), PauliString.from_map(n, {k: "Z"})))
        for a, b in _ring_edges(n):
            for axis in "XYZ":
                terms.append((spec.j, PauliString.from_map(n, {a: axis, b: axis})))
    else:
        for (a, b), jk in zip(_chain_edges(n), _chain_couplings(spec)):
            for axis in "XYZ":
                terms.append((float(jk), PauliString.from_map(n, {a: axis, b: axis})))
    return terms


def _term_groups(spec: HamiltonianSpec) -> list[list[tuple[float, dict[int, str]]]]:
    """Per-layer rotation groups sharing one variational angle each."""
    n = spec.n_sites
    if spec.kind == "spin-ring":
        fields = _ring_fields(spec)
        groups = [[(float(w), {k: "Z"}) for k, w in enumerate(fields)]]
        for axis in "XYZ":
            groups.append(
                [(spec.j, {a: axis, b: axis}) for a, b in _ring_edges(n)]
            )
        return groups
    couplings = _chain_couplings(spec)
    return [
        [(float(jk), {a: axis, b: axis}) for (a, b), jk in zip(_chain_edges(n), couplings)]
        for axis in "XYZ"
    ]


def params_per_layer(spec: HamiltonianSpec) -> int:
    return 4 if spec.kind == "spin-ring" else 3


def build_hva_ansatz(
    spec: HamiltonianSpec, layers: int, params
) -> Circuit:
    """Layered ansatz: per layer, one shared angle per Hamiltonian term group;
    each term contributes the rotation exp(-i * theta * c_term * P).

    Two-qubit rotations carry noise_ref "noisy" so noise drawing can target
    them; single-qubit field rotations stay noiseless.
    """
    params = list(params)
    per = params_per_layer(spec)
    if len(params) != per * layers:
        raise ValueError(
            f"expected {per * layers} parameters for {layers} layers, got {len(params)}"
        )
    groups = _term_groups(spec)
    gates: list[GateOp] = []
    gid = 0
    for layer in range(layers):
        for g_idx, group in enumerate(groups):
            theta = params[layer * per + g_idx]
            for coef, support in group:
                targets = tuple(sorted(support))
                kind = "r" + "".join(support[t].lower() for t in targets)
                gid += 1
                gates.append(
                    GateOp(
                        gate_id=gid,
                        kind=kind,
                        targets=targets,
                        angle=2.0 * theta * coef,
                        noise_ref="noisy" if len(targets) == 2 else None,
                    )
                )
    return Circuit(n_qubits=spec.n_sites, gates=tuple(gates))


# ---------------------------------------------------------------------------
# Exact references and the parameter fixture optimizer


def hamiltonian_matrix(terms) -> np.ndarray:
    n = terms[0][1].n_qubits
    if n > DENSE_LIMIT:
        raise TooLarge(f"{n} qubits exceeds dense limit {DENSE_LIMIT}")
    h = np.zeros((2**n, 2**n), dtype=complex)
    for coef, p in terms:
        h += coef * p.phase * pauli_matrix(p.dense_label())
    return h


def exact_ground_energy(terms) -> float:
    return float(np.linalg.eigvalsh(hamiltonian_matrix(terms))[0])


def energy_expectation(state: StateVector, terms) -> float:
    return sum(coef * statevector_expectation(state, p) for coef, p in terms)


# Shipped parameter fixtures from offline seeded optimization (64 L-BFGS
# restarts against the dense oracle); keyed by kind|n|j|seed|layers. The
# spin-ring l=5 entry reaches the ground energy within 4%.
_PARAM_FIXTURES: dict[str, tuple[float, ...]] = {
    "spin-ring|6|0.3|0|1": (
        0.858205524301488,
        3.795207855846473,
        -3.0536434604058385,
        1.3089970175450125,
    ),
    "spin-ring|6|0.3|0|5": (
        -0.10073718596544462,
        2.776458253093174,
        -0.7880558282007868,
        0.03564833432007062,
        1.135511816866242,
        0.47197967365725313,
        -0.9322322707425209,
        0.04205405136597353,
        -0.45175222271349286,
        -1.2329527123870392,
        -1.3042339603097557,
        0.011185047378306272,
        -0.11677944971832249,
        -1.8523398609740909,
        0.2437442635790181,
        0.00831558533148728,
        0.5378428709543539,
        -2.0261102772604436,
        2.5697498343055623,
        0.6024823581238462,
    ),
    "heisenberg-chain|6|0.3|0|2": (
        -0.9314322223599111,
        -0.4977560403736077,
        1.2149450002196711,
        -1.26361583807779,
        -1.0994619059706525,
        0.09063755436701845,
    ),
}


@functools.lru_cache(maxsize=64)
def fixture_params(spec: HamiltonianSpec, layers: int, opt_seed: int = 0) -> tuple[float, ...]:
    """Deterministic variational parameters minimizing the ideal-state energy.

    Looked up from the shipped fixture table when available; otherwise
    computed by seeded multi-start local optimization against the dense
    oracle. Experiments treat the result as a fixed fixture.
    """
    if opt_seed == 0 and spec.couplings is None and spec.fields is None:
        key = f"{spec.kind}|{spec.n_sites}|{spec.j}|{spec.seed}|{layers}"
        if key in _PARAM_FIXTURES:
            return _PARAM_FIXTURES[key]
    from scipy.optimize import minimize

    terms = build_hamiltonian(spec)
    h = hamiltonian_matrix(terms)
    per = params_per_layer(spec)
    n = spec.n_sites
    groups = _term_groups(spec)
    # Precompute each group's rotation generators once; one ansatz angle
    # drives every rotation of its group.
    gate_plan = []  # (group index in layer, coef, pauli matrix, targets)
    for g_idx, group in enumerate(groups):
        for coef, support in group:
            targets = tuple(sorted(support))
            label = "".join(support[t] for t in targets)
            gate_plan.append((g_idx, coef, pauli_matrix(label), targets))

    from .sim import apply_unitary

    def energy_and_grad(x):
        # Forward pass, storing the state after every gate.
        psi = np.zeros(2**n, dtype=complex)
        psi[0] = 1.0
        gates = []  # (param index, coef, pmat, targets, unitary)
        states = []
        for layer in range(layers):
            for g_idx, coef, pmat, targets in gate_plan:
                p_idx = layer * per + g_idx
                half = x[p_idx] * coef
                u = np.cos(half) * np.eye(pmat.shape[0]) - 1j * np.sin(half) * pmat
                psi = apply_unitary(psi, u, targets, n)
                gates.append((p_idx, coef, pmat, targets, u))
                states.append(psi)
        e = float(np.real(np.vdot(psi, h @ psi)))
        # Adjoint pass: dE/dtheta_k = 2 Re[lam_k^dag (-i c P) psi_k].
        grad = np.zeros_like(x)
        lam = h @ psi
        for (p_idx, coef, pmat, targets, u), psi_k in zip(reversed(gates), reversed(states)):
            d = apply_unitary(psi_k, -1j * coef * pmat, targets, n)
            grad[p_idx] += 2.0 * float(np.real(np.vdot(lam, d)))
            lam = apply_unitary(lam, u.conj().T, targets, n)
        return e, grad

    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, opt_seed, 73]))
    best_x, best_e = None, np.inf
    for _ in range(24):
        x0 = rng.uniform(-1.0, 1.0, per * layers)
        res = minimize(energy_and_grad, x0, jac=True, method="L-BFGS-B",
                       options={"maxiter": 1000, "ftol": 1e-14})
        if res.fun < best_e:
            best_x, best_e = res.x, res.fun
    return tuple(float(v) for v in best_x)
