"""Pauli noise channels, their quasiprobability inverses, and noise boosting.

A Pauli channel is diagonal in the Pauli basis: its transfer eigenvalue on a
Pauli P is lambda_P = sum_Q probs(Q) * (-1)^{<P,Q>} with the symplectic
(anti-commutation) product <P,Q>. Inversion flips the eigenvalues to 1/lambda_P
and an inverse Walsh-Hadamard-type transform recovers the quasiprobabilities.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

SINGULARITY_EPS = 1e-9


class SingularChannel(ValueError):
    """Channel has a (near-)zero Pauli-transfer eigenvalue and cannot be inverted."""


class BoostBelowNative(ValueError):
    """Requested boosted error rate below the native rate."""


class NonPhysicalBoost(ValueError):
    """Boost target not reachable by inserting Paulis with genuine probabilities."""


def pauli_labels(arity: int) -> tuple[str, ...]:
    return tuple("".join(t) for t in itertools.product("IXYZ", repeat=arity))


def _symplectic_sign_matrix(arity: int) -> np.ndarray:
    """S[p, q] = (-1)^{<P_p, P_q>}; S @ S = 4^arity * I."""
    labels = pauli_labels(arity)
    s = np.empty((len(labels), len(labels)))
    for i, a in enumerate(labels):
        for j, b in enumerate(labels):
            anti = sum(
                1 for x, y in zip(a, b) if x != "I" and y != "I" and x != y
            )
            s[i, j] = -1.0 if anti % 2 else 1.0
    return s


_SIGN_MATRICES = {1: _symplectic_sign_matrix(1), 2: _symplectic_sign_matrix(2)}


@dataclass(frozen=True)
class PauliChannel:
    """Probability distribution over the 4^arity Paulis (identity included)."""

    arity: int
    probs: tuple[tuple[str, float], ...]

    def __post_init__(self):
        if self.arity not in (1, 2):
            raise ValueError("only 1- and 2-qubit channels supported")
        labels = pauli_labels(self.arity)
        d = dict(self.probs)
        for lab, p in d.items():
            if lab not in labels:
                raise ValueError(f"bad Pauli label {lab!r} for arity {self.arity}")
            if p < -1e-12:
                raise ValueError(f"negative probability {p} for {lab}")
        total = sum(d.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, not 1")
        object.__setattr__(
            self, "probs", tuple((lab, d.get(lab, 0.0)) for lab in labels)
        )

    @classmethod
    def from_dict(cls, arity: int, probs: dict[str, float]) -> "PauliChannel":
        return cls(arity, tuple(probs.items()))

    @property
    def probs_map(self) -> dict[str, float]:
        return dict(self.probs)

    def prob_vector(self) -> np.ndarray:
        return np.array([p for _, p in self.probs])

    def error_probability(self) -> float:
        """1 - probability of the identity Pauli."""
        return 1.0 - self.probs_map["I" * self.arity]

    def transfer_eigenvalues(self) -> np.ndarray:
        """Eigenvalues lambda_P ordered like pauli_labels(arity)."""
        return _SIGN_MATRICES[self.arity] @ self.prob_vector()

    def is_identity(self) -> bool:
        return self.error_probability() < 1e-15


@dataclass(frozen=True)
class QuasiChannel:
    """Signed quasiprobabilities implementing an inverse Pauli channel."""

    arity: int
    gamma: tuple[tuple[str, float], ...]
    norm: float

    @property
    def gamma_map(self) -> dict[str, float]:
        return dict(self.gamma)

    def gamma_vector(self) -> np.ndarray:
        return np.array([g for _, g in self.gamma])

    def sampling_probs(self) -> np.ndarray:
        """|gamma| / norm, the recovery-Pauli sampling distribution."""
        g = self.gamma_vector()
        return np.abs(g) / self.norm

    def signs(self) -> np.ndarray:
        return np.where(self.gamma_vector() >= 0, 1, -1).astype(np.int8)


def identity_channel(arity: int = 1) -> PauliChannel:
    return PauliChannel.from_dict(arity, {"I" * arity: 1.0})


def depolarizing_channel(p: float, arity: int = 1) -> PauliChannel:
    """Uniform Pauli errors with total error probability p."""
    labels = pauli_labels(arity)
    n_err = len(labels) - 1
    probs = {lab: p / n_err for lab in labels[1:]}
    probs["I" * arity] = 1.0 - p
    return PauliChannel.from_dict(arity, probs)


def biased_pauli_channel(p: float, eta: float) -> PauliChannel:
    """Z-biased single-qubit Pauli channel with bias parameter eta."""
    if not 0.0 <= p < 0.75:
        raise ValueError(f"error probability {p} outside invertible range [0, 3/4)")
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"bias {eta} outside [0, 1]")
    return PauliChannel.from_dict(
        1,
        {
            "I": 1.0 - p,
            "X": p * (1.0 - eta) / 2.0,
            "Y": p * (1.0 - eta) / 2.0,
            "Z": p * eta,
        },
    )


def two_qubit_biased_channel(p: float, eta: float) -> PauliChannel:
    """Two-qubit channel acting as the biased model independently per leg.

    Total error probability is 1 - (1-p_leg)^2 = p, so each leg carries
    p_leg = 1 - sqrt(1-p).
    """
    p_leg = 1.0 - math.sqrt(1.0 - p)
    leg = biased_pauli_channel(p_leg, eta).probs_map
    probs: dict[str, float] = {}
    for a, pa in leg.items():
        for b, pb in leg.items():
            probs[a + b] = probs.get(a + b, 0.0) + pa * pb
    return PauliChannel.from_dict(2, probs)


def invert_pauli_channel(ch: PauliChannel) -> QuasiChannel:
    """Quasiprobability inverse of a Pauli channel."""
    lam = ch.transfer_eigenvalues()
    if np.min(np.abs(lam)) < SINGULARITY_EPS:
        raise SingularChannel(
            f"transfer eigenvalue {np.min(np.abs(lam)):.3e} below {SINGULARITY_EPS}"
        )
    s = _SIGN_MATRICES[ch.arity]
    gamma = s @ (1.0 / lam) / len(lam)
    labels = pauli_labels(ch.arity)
    return QuasiChannel(
        arity=ch.arity,
        gamma=tuple(zip(labels, gamma.tolist())),
        norm=float(np.abs(gamma).sum()),
    )


# Closed forms for the biased single-qubit model, in terms of the two distinct
# transfer eigenvalues lambda_X = lambda_Y = 1 - p(1+eta), lambda_Z = 1 - 2p(1-eta).

def biased_pauli_inverse_closed_form(p: float, eta: float) -> QuasiChannel:
    lam_x = 1.0 - p * (1.0 + eta)
    lam_z = 1.0 - 2.0 * p * (1.0 - eta)
    if min(abs(lam_x), abs(lam_z)) < SINGULARITY_EPS:
        raise SingularChannel("biased channel not invertible at these parameters")
    g_i = 0.25 * (1.0 + 2.0 / lam_x + 1.0 / lam_z)
    g_x = 0.25 * (1.0 - 1.0 / lam_z)
    g_z = 0.25 * (1.0 + 1.0 / lam_z - 2.0 / lam_x)
    gamma = {"I": g_i, "X": g_x, "Y": g_x, "Z": g_z}
    norm = abs(g_i) + 2 * abs(g_x) + abs(g_z)
    labels = pauli_labels(1)
    return QuasiChannel(1, tuple((lab, gamma[lab]) for lab in labels), norm)


def depolarizing_inverse_norm(p: float) -> float:
    """Quasiprobability 1-norm of the inverse of single-qubit depolarizing noise."""
    return (3.0 + 2.0 * p) / (3.0 - 4.0 * p)


def pec_cost_estimate(p: float) -> float:
    """Generic single-gate norm estimate (1+p)/(1-p).

    Diagnostic cost model only; estimator weights always come from the exact
    numeric inversion, which differs from this at O(p^2).
    """
    return (1.0 + p) / (1.0 - p)


@dataclass(frozen=True)
class ReadoutModel:
    """Independent per-qubit classical bit flips: 0->1 with alpha_plus, 1->0 with alpha_minus."""

    alpha_plus: tuple[float, ...]
    alpha_minus: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "alpha_plus", tuple(self.alpha_plus))
        object.__setattr__(self, "alpha_minus", tuple(self.alpha_minus))
        if len(self.alpha_plus) != len(self.alpha_minus):
            raise ValueError("alpha_plus and alpha_minus lengths differ")
        for a in self.alpha_plus + self.alpha_minus:
            if not 0.0 <= a < 0.5:
                raise ValueError(f"readout flip probability {a} outside [0, 0.5)")

    @classmethod
    def uniform(cls, n_qubits: int, alpha: float) -> "ReadoutModel":
        return cls((alpha,) * n_qubits, (alpha,) * n_qubits)

    @classmethod
    def noiseless(cls, n_qubits: int) -> "ReadoutModel":
        return cls.uniform(n_qubits, 0.0)

    @property
    def n_qubits(self) -> int:
        return len(self.alpha_plus)

    def is_trivial(self) -> bool:
        return all(a == 0.0 for a in self.alpha_plus + self.alpha_minus)

    def is_symmetric(self) -> bool:
        return self.alpha_plus == self.alpha_minus


@dataclass(frozen=True)
class NoiseSpec:
    """Per-gate Pauli channels plus the readout model."""

    gates: tuple[tuple[int, PauliChannel], ...]
    readout: ReadoutModel

    @classmethod
    def from_dict(cls, gates: dict[int, PauliChannel], readout: ReadoutModel) -> "NoiseSpec":
        return cls(tuple(sorted(gates.items())), readout)

    @property
    def gates_map(self) -> dict[int, PauliChannel]:
        return dict(self.gates)

    def channel_for(self, gate_id: int) -> PauliChannel | None:
        return self.gates_map.get(gate_id)

    def validate_against(self, circuit) -> None:
        for gid, ch in self.gates:
            if not 1 <= gid <= circuit.nu:
                raise ValueError(f"noise refers to unknown gate id {gid}")
            if ch.arity != circuit.gates[gid - 1].arity:
                raise ValueError(
                    f"gate {gid}: channel arity {ch.arity} != gate arity "
                    f"{circuit.gates[gid - 1].arity}"
                )

    def xi(self) -> float:
        """Expected number of gate errors per circuit execution."""
        return sum(ch.error_probability() for _, ch in self.gates)


@dataclass(frozen=True)
class QuasiDecomposition:
    """Per-gate inverse quasichannels with the circuit-level norm and error rate."""

    channels: tuple[tuple[int, QuasiChannel], ...]
    g_norm: float
    xi: float

    @property
    def channels_map(self) -> dict[int, QuasiChannel]:
        return dict(self.channels)

    def norm_for(self, gate_id: int) -> float:
        qc = self.channels_map.get(gate_id)
        return qc.norm if qc is not None else 1.0

    def lightcone_norm(self, cone: frozenset[int]) -> float:
        out = 1.0
        for gid, qc in self.channels:
            if gid in cone:
                out *= qc.norm
        return out


def circuit_decomposition(circuit, ns: NoiseSpec) -> QuasiDecomposition:
    """Invert every noisy gate's channel and collect circuit-level norms."""
    ns.validate_against(circuit)
    channels = []
    g_norm = 1.0
    for gid, ch in ns.gates:
        try:
            qc = invert_pauli_channel(ch)
        except SingularChannel as exc:
            raise SingularChannel(f"gate {gid}: {exc}") from exc
        channels.append((gid, qc))
        g_norm *= qc.norm
    return QuasiDecomposition(tuple(channels), g_norm, ns.xi())


def scaled_channel(ch: PauliChannel, p_target: float) -> PauliChannel:
    """Same error shape as ``ch`` but with total error probability p_target."""
    p0 = ch.error_probability()
    probs = ch.probs_map
    ident = "I" * ch.arity
    if p0 == 0.0:
        if p_target == 0.0:
            return ch
        raise ValueError("cannot scale an identity channel to a nonzero rate")
    out = {lab: p_target * q / p0 for lab, q in probs.items() if lab != ident}
    out[ident] = 1.0 - p_target
    return PauliChannel.from_dict(ch.arity, out)


def boost_distribution(ch: PauliChannel, p0: float, p: float) -> PauliChannel:
    """Pauli-insertion distribution realizing the boosted channel.

    Composing the native channel (rate p0) with the returned genuine
    probability distribution over Pauli insertions reproduces the channel
    scaled to rate p exactly.
    """
    if p < p0:
        raise BoostBelowNative(f"boost target {p} below native rate {p0}")
    if abs(ch.error_probability() - p0) > 1e-9:
        raise ValueError("p0 does not match the channel's error probability")
    if p == p0:
        return identity_channel(ch.arity)
    lam_native = ch.transfer_eigenvalues()
    lam_boost = scaled_channel(ch, p).transfer_eigenvalues()
    if np.min(np.abs(lam_native)) < SINGULARITY_EPS:
        raise SingularChannel("native channel has a vanishing transfer eigenvalue")
    ratio = lam_boost / lam_native
    s = _SIGN_MATRICES[ch.arity]
    weights = s @ ratio / len(ratio)
    if np.min(weights) < -1e-10:
        raise NonPhysicalBoost(
            f"insertion weights go negative (min {np.min(weights):.3e})"
        )
    weights = np.clip(weights, 0.0, None)
    weights /= weights.sum()
    labels = pauli_labels(ch.arity)
    return PauliChannel(ch.arity, tuple(zip(labels, weights.tolist())))


def boosted_noise_spec(ns: NoiseSpec, p: float) -> NoiseSpec:
    """Noise spec with every gate channel scaled to total error probability p."""
    gates = {gid: scaled_channel(ch, p) for gid, ch in ns.gates}
    return NoiseSpec.from_dict(gates, ns.readout)


def draw_gate_noise(
    circuit,
    rng: np.random.Generator,
    p_mean: float,
    eta_mean: float = 0.9,
    eta_sigma: float = 0.015,
    readout: ReadoutModel | None = None,
    noisy_arity: int = 2,
) -> NoiseSpec:
    """Draw per-gate biased-Pauli noise for every gate of the given arity.

    Per-gate error rates come from Normal(p, p) truncated to [0, 0.5); bias
    parameters from Normal(eta_mean, eta_sigma) truncated to [0, 1].
    """
    gates: dict[int, PauliChannel] = {}
    for g in circuit.gates:
        if g.arity != noisy_arity:
            continue
        p_k = float(np.clip(rng.normal(p_mean, p_mean), 0.0, 0.499))
        eta_k = float(np.clip(rng.normal(eta_mean, eta_sigma), 0.0, 1.0))
        if noisy_arity == 1:
            gates[g.gate_id] = biased_pauli_channel(p_k, eta_k)
        else:
            gates[g.gate_id] = two_qubit_biased_channel(p_k, eta_k)
    if readout is None:
        readout = ReadoutModel.noiseless(circuit.n_qubits)
    return NoiseSpec.from_dict(gates, readout)


def noise_spec_to_json(ns: NoiseSpec) -> str:
    gates = {
        str(gid): {"model": "explicit", "arity": ch.arity, "probs": ch.probs_map}
        for gid, ch in ns.gates
    }
    return json.dumps(
        {
            "gates": gates,
            "readout": {
                "alpha_plus": list(ns.readout.alpha_plus),
                "alpha_minus": list(ns.readout.alpha_minus),
            },
        }
    )


def noise_spec_from_json(text: str, n_qubits: int | None = None) -> NoiseSpec:
    data = json.loads(text)
    gates: dict[int, PauliChannel] = {}
    for gid, d in data.get("gates", {}).items():
        model = d.get("model", "explicit")
        if model == "depolarizing":
            ch = depolarizing_channel(d["p"], d.get("arity", 1))
        elif model == "biased_pauli":
            arity = d.get("arity", 1)
            if arity == 1:
                ch = biased_pauli_channel(d["p"], d["eta"])
            else:
                ch = two_qubit_biased_channel(d["p"], d["eta"])
        elif model == "explicit":
            probs = d["probs"]
            arity = d.get("arity", len(next(iter(probs))))
            ch = PauliChannel.from_dict(arity, probs)
        else:
            raise ValueError(f"unknown noise model {model!r}")
        gates[int(gid)] = ch
    ro = data.get("readout")
    if ro is None:
        if n_qubits is None:
            raise ValueError("readout missing and n_qubits not given")
        readout = ReadoutModel.noiseless(n_qubits)
    else:
        readout = ReadoutModel(tuple(ro["alpha_plus"]), tuple(ro["alpha_minus"]))
    return NoiseSpec.from_dict(gates, readout)
