"""PEC / conventional / noise-boosted shadow sampling and shadow-file I/O.

Snapshots are held columnar (numpy arrays over snapshot index) for fast
post-processing; `Snapshot` objects are lightweight per-row views.
"""

from __future__ import annotations

import json
import os
import shutil
import zlib
from dataclasses import dataclass, replace

import numpy as np

from .circuits import Circuit, pauli_matrix
from .noise import (
    BoostBelowNative,
    NoiseSpec,
    PauliChannel,
    QuasiDecomposition,
    ReadoutModel,
    boost_distribution,
    circuit_decomposition,
)
from .sim import BASIS_ROTATIONS, apply_unitary, zero_state

FORMAT_VERSION = "pecshadow/1"

BASIS_CHARS = "XYZ"  # basis codes 0, 1, 2


class ShadowFileError(ValueError):
    pass


class MissingGateLog(ValueError):
    pass


@dataclass(frozen=True)
class Snapshot:
    """One shadow record: per-qubit bases and bits, the global quasiprobability
    sign, and the per-gate recovery log (pec mode only)."""

    bases: str
    bits: str
    sign: int
    gate_log: tuple[tuple[int, int], ...] = ()  # (recovery index, local sign) per noisy gate


@dataclass(frozen=True)
class ShadowHeader:
    n_qubits: int
    mode: str  # "pec" | "conventional" | "boosted"
    g_norm: float
    per_gate_norms: tuple[tuple[int, float], ...]
    readout: ReadoutModel
    root_seed: int
    n_snapshots: int
    boost_p: float | None = None

    def __post_init__(self):
        if self.mode not in ("pec", "conventional", "boosted"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode != "pec" and abs(self.g_norm - 1.0) > 1e-12:
            raise ValueError("g_norm must be 1 outside pec mode")


class ShadowSet:
    """Header plus columnar snapshot storage; the estimators' sole input."""

    def __init__(
        self,
        header: ShadowHeader,
        bases: np.ndarray,
        bits: np.ndarray,
        signs: np.ndarray,
        glog_gate_ids: tuple[int, ...] = (),
        glog_idx: np.ndarray | None = None,
        glog_signs: np.ndarray | None = None,
    ):
        n = header.n_snapshots
        if bases.shape != (n, header.n_qubits) or bits.shape != (n, header.n_qubits):
            raise ValueError("bases/bits shape mismatch with header")
        if signs.shape != (n,):
            raise ValueError("signs shape mismatch")
        self.header = header
        self.bases = np.ascontiguousarray(bases, dtype=np.uint8)
        self.bits = np.ascontiguousarray(bits, dtype=np.uint8)
        self.signs = np.ascontiguousarray(signs, dtype=np.int8)
        self.glog_gate_ids = tuple(glog_gate_ids)
        self.glog_idx = glog_idx
        self.glog_signs = glog_signs
        if header.mode == "pec":
            expected = np.prod([nm for _, nm in header.per_gate_norms]) if header.per_gate_norms else 1.0
            if abs(header.g_norm - expected) > 1e-9 * max(1.0, expected):
                raise ValueError("g_norm does not equal the product of per-gate norms")

    def __len__(self) -> int:
        return self.header.n_snapshots

    def snapshot(self, i: int) -> Snapshot:
        glog: tuple[tuple[int, int], ...] = ()
        if self.glog_idx is not None:
            glog = tuple(
                (int(k), int(s))
                for k, s in zip(self.glog_idx[i], self.glog_signs[i])
            )
        return Snapshot(
            bases="".join(BASIS_CHARS[b] for b in self.bases[i]),
            bits="".join(str(b) for b in self.bits[i]),
            sign=int(self.signs[i]),
            gate_log=glog,
        )

    def __iter__(self):
        return (self.snapshot(i) for i in range(len(self)))

    def subset(self, indices: np.ndarray) -> "ShadowSet":
        hdr = replace(self.header, n_snapshots=len(indices))
        return ShadowSet(
            hdr,
            self.bases[indices],
            self.bits[indices],
            self.signs[indices],
            self.glog_gate_ids,
            None if self.glog_idx is None else self.glog_idx[indices],
            None if self.glog_signs is None else self.glog_signs[indices],
        )


# ---------------------------------------------------------------------------
# Snapshot reconstruction factors


def _flip_inverse_1q(alpha_plus: float, alpha_minus: float) -> np.ndarray:
    """Inverse of the classical bit-flip matrix A[obs, true].

    m[true, obs] weights an unbiased estimate of any function of the true bit
    from the observed one; the flips are basis-independent, so applying this
    before the noiseless reconstruction keeps the estimator free of cross-axis
    terms (unlike inverting the full six-effect measurement channel, whose
    per-effect inverses pick up components along the unmeasured axes).
    """
    det = 1.0 - alpha_plus - alpha_minus
    return (
        np.array([[1.0 - alpha_minus, -alpha_minus], [-alpha_plus, 1.0 - alpha_plus]])
        / det
    )


def snapshot_factor(
    s: Snapshot,
    qubit: int,
    readout: ReadoutModel | None = None,
    mitigated: bool = True,
    bias: tuple[float, float, float] | None = None,
) -> np.ndarray:
    """Single-qubit tensor factor of the inverse-measurement-channel snapshot.

    Noiseless uniform sampling gives 3 Q^dag |b><b| Q - 1; symmetric readout
    alpha gives coefficients 3/(1-2a) and (1+a)/(1-2a); asymmetric readout
    inverts the classical bit-flip matrix before the noiseless reconstruction.
    With a sampling bias (p_x, p_y, p_z) the locally biased form
    p_t^-2 E - (mu - p_t^2)/(2 p_t mu) * 1 applies.
    """
    basis = s.bases[qubit]
    bit = int(s.bits[qubit])
    q = BASIS_ROTATIONS[basis]
    proj = np.zeros((2, 2), dtype=complex)
    proj[bit, bit] = 1.0
    eig_proj = q.conj().T @ proj @ q  # |t,b><t,b|
    if bias is not None:
        px, py, pz = bias
        p_t = {"X": px, "Y": py, "Z": pz}[basis]
        mu = px**2 + py**2 + pz**2
        effect = p_t * eig_proj
        return (effect / p_t**2) - ((mu - p_t**2) / (2 * p_t * mu)) * np.eye(2)
    if readout is None or readout.is_trivial() or not mitigated:
        return 3.0 * eig_proj - np.eye(2)
    ap, am = readout.alpha_plus[qubit], readout.alpha_minus[qubit]
    if ap >= 0.5 or am >= 0.5:
        raise ValueError("readout channel not invertible (alpha >= 0.5)")
    if ap == am:
        a = ap
        return (3.0 / (1.0 - 2 * a)) * eig_proj - ((1.0 + a) / (1.0 - 2 * a)) * np.eye(2)
    m = _flip_inverse_1q(ap, am)
    out = np.zeros((2, 2), dtype=complex)
    for true_bit in range(2):
        proj = np.zeros((2, 2), dtype=complex)
        proj[true_bit, true_bit] = 1.0
        out += m[true_bit, bit] * (3.0 * (q.conj().T @ proj @ q) - np.eye(2))
    return out


def estimator_coefficients(
    n_qubits: int,
    readout: ReadoutModel | None,
    mitigated: bool,
) -> np.ndarray:
    """coef[q, bit] = tr[sigma_t * factor] for an axis-matching observable.

    The coefficient is basis-independent (the factor lives in span{1, sigma_t}),
    so only the measured bit matters.
    """
    coef = np.empty((n_qubits, 2))
    trivial = readout is None or readout.is_trivial() or not mitigated
    for qubit in range(n_qubits):
        if trivial:
            coef[qubit] = (3.0, -3.0)
            continue
        ap, am = readout.alpha_plus[qubit], readout.alpha_minus[qubit]
        if ap == am:
            coef[qubit] = (3.0 / (1 - 2 * ap), -3.0 / (1 - 2 * ap))
            continue
        m = _flip_inverse_1q(ap, am)
        # tr[sigma_t * factor] = 3 * (m[0, obs] - m[1, obs])
        for bit in range(2):
            coef[qubit, bit] = 3.0 * (m[0, bit] - m[1, bit])
    return coef


# ---------------------------------------------------------------------------
# Single-snapshot sampling (protocol reference path)


def _sample_recovery(
    decomp: QuasiDecomposition, rng: np.random.Generator
) -> tuple[dict[int, str], list[tuple[int, int]], int]:
    recovery: dict[int, str] = {}
    glog: list[tuple[int, int]] = []
    sign = 1
    for gid, qc in decomp.channels:
        probs = qc.sampling_probs()
        idx = int(rng.choice(len(probs), p=probs))
        local_sign = int(qc.signs()[idx])
        recovery[gid] = qc.gamma[idx][0]
        glog.append((idx, local_sign))
        sign *= local_sign
    return recovery, glog, sign


def _apply_readout_flips(bits: np.ndarray, readout: ReadoutModel, rng) -> np.ndarray:
    ap = np.array(readout.alpha_plus)
    am = np.array(readout.alpha_minus)
    u = rng.random(bits.shape)
    flip = np.where(bits == 0, u < ap, u < am)
    return (bits ^ flip).astype(np.uint8)


def sample_pec_snapshot(
    decomp: QuasiDecomposition,
    circuit: Circuit,
    noise: NoiseSpec,
    readout: ReadoutModel,
    rng: np.random.Generator,
) -> Snapshot:
    """One run of the five-step PEC shadow protocol."""
    from .sim import measure_in_bases, run_trajectory

    recovery, glog, sign = _sample_recovery(decomp, rng)
    bases_codes = rng.integers(0, 3, circuit.n_qubits)
    bases = "".join(BASIS_CHARS[b] for b in bases_codes)
    psi = run_trajectory(circuit, recovery, noise, rng)
    bits = measure_in_bases(psi, bases, rng)
    bits = _apply_readout_flips(bits, readout, rng)
    return Snapshot(bases, "".join(str(b) for b in bits), sign, tuple(glog))


def sample_conventional_snapshot(
    circuit: Circuit,
    noise: NoiseSpec,
    readout: ReadoutModel,
    rng: np.random.Generator,
) -> Snapshot:
    """Plain randomized-Pauli-basis snapshot of the noisy state."""
    from .sim import measure_in_bases, run_trajectory

    bases_codes = rng.integers(0, 3, circuit.n_qubits)
    bases = "".join(BASIS_CHARS[b] for b in bases_codes)
    psi = run_trajectory(circuit, {}, noise, rng)
    bits = measure_in_bases(psi, bases, rng)
    bits = _apply_readout_flips(bits, readout, rng)
    return Snapshot(bases, "".join(str(b) for b in bits), 1, ())


def _insertion_channels(noise: NoiseSpec, boost_p: float) -> dict[int, PauliChannel]:
    out = {}
    for gid, ch in noise.gates:
        p0 = ch.error_probability()
        if boost_p < p0:
            raise BoostBelowNative(f"gate {gid}: boost {boost_p} below native {p0}")
        out[gid] = boost_distribution(ch, p0, boost_p)
    return out


def sample_boosted_snapshot(
    circuit: Circuit,
    noise: NoiseSpec,
    boost_p: float,
    readout: ReadoutModel,
    rng: np.random.Generator,
) -> Snapshot:
    """Snapshot of the noise-boosted state: extra Paulis inserted after each
    noisy gate; sign is always +1 and the sampling overhead is 1."""
    from .sim import measure_in_bases, run_trajectory

    insert = _insertion_channels(noise, boost_p)
    recovery: dict[int, str] = {}
    for gid, ch in insert.items():
        probs = ch.prob_vector()
        idx = int(rng.choice(len(probs), p=probs))
        recovery[gid] = ch.probs[idx][0]
    bases_codes = rng.integers(0, 3, circuit.n_qubits)
    bases = "".join(BASIS_CHARS[b] for b in bases_codes)
    psi = run_trajectory(circuit, recovery, noise, rng)
    bits = measure_in_bases(psi, bases, rng)
    bits = _apply_readout_flips(bits, readout, rng)
    return Snapshot(bases, "".join(str(b) for b in bits), 1, ())


# ---------------------------------------------------------------------------
# Vectorized batch sampling


def _sample_indices(prob_vector: np.ndarray, size: int, rng) -> np.ndarray:
    cum = np.cumsum(prob_vector)
    cum[-1] = 1.0
    return np.searchsorted(cum, rng.random(size), side="right").astype(np.uint8)


def _apply_label_masked(psi, labels, idx, targets, n_qubits):
    """Apply Pauli label labels[k] to the rows of psi where idx == k."""
    for k in range(len(labels)):
        lab = labels[k]
        if set(lab) == {"I"}:
            continue
        mask = idx == k
        if not mask.any():
            continue
        psi[mask] = apply_unitary(psi[mask], pauli_matrix(lab), targets, n_qubits)
    return psi


def _measure_batch(psi, bases_codes, n_qubits, rng):
    for q in range(n_qubits):
        for code, basis in enumerate("XY"):
            mask = bases_codes[:, q] == code
            if mask.any():
                psi[mask] = apply_unitary(
                    psi[mask], BASIS_ROTATIONS[basis], (q,), n_qubits
                )
    probs = np.abs(psi) ** 2
    cum = np.cumsum(probs, axis=1)
    cum /= cum[:, -1:]
    u = rng.random(len(psi))
    idx = (cum < u[:, None]).sum(axis=1)
    shifts = np.arange(n_qubits - 1, -1, -1)
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8)


def _sample_batch(
    circuit: Circuit,
    noise: NoiseSpec,
    mode: str,
    decomp: QuasiDecomposition | None,
    insert: dict[int, PauliChannel] | None,
    seed: int,
    batch_no: int,
    b: int,
    want_glog: bool,
):
    """Sample one batch of b snapshots from stream (seed, batch_no)."""
    n = circuit.n_qubits
    readout = noise.readout
    noisy = noise.gates_map
    rng = np.random.default_rng(np.random.SeedSequence([seed, batch_no]))

    n_glog = len(decomp.channels) if decomp is not None else 0
    glog_idx = np.empty((b, n_glog), dtype=np.uint8) if want_glog else None
    glog_signs = np.empty((b, n_glog), dtype=np.int8) if want_glog else None
    signs = np.ones(b, dtype=np.int8)

    # Recovery / insertion choices per noisy gate.
    rec_idx: dict[int, np.ndarray] = {}
    if mode == "pec":
        for col, (gid, qc) in enumerate(decomp.channels):
            idx = _sample_indices(qc.sampling_probs(), b, rng)
            rec_idx[gid] = idx
            local = qc.signs()[idx]
            signs *= local
            if want_glog:
                glog_idx[:, col] = idx
                glog_signs[:, col] = local
    elif mode == "boosted":
        for gid, ch in insert.items():
            rec_idx[gid] = _sample_indices(ch.prob_vector(), b, rng)

    bases_codes = rng.integers(0, 3, (b, n), dtype=np.uint8)

    psi = zero_state(n, batch=b)
    for g in circuit.gates:
        psi = apply_unitary(psi, g.unitary(), g.targets, n)
        ch = noisy.get(g.gate_id)
        if ch is not None:
            labels = [lab for lab, _ in ch.probs]
            noise_idx = _sample_indices(ch.prob_vector(), b, rng)
            psi = _apply_label_masked(psi, labels, noise_idx, g.targets, n)
        if g.gate_id in rec_idx:
            if mode == "pec":
                labels = [lab for lab, _ in decomp.channels_map[g.gate_id].gamma]
            else:
                labels = [lab for lab, _ in insert[g.gate_id].probs]
            psi = _apply_label_masked(psi, labels, rec_idx[g.gate_id], g.targets, n)

    raw_bits = _measure_batch(psi, bases_codes, n, rng)
    if not readout.is_trivial():
        ap = np.array(readout.alpha_plus)
        am = np.array(readout.alpha_minus)
        u = rng.random(raw_bits.shape)
        flip = np.where(raw_bits == 0, u < ap[None, :], u < am[None, :])
        raw_bits = raw_bits ^ flip
    return bases_codes, raw_bits, signs, glog_idx, glog_signs


def sample_shadow_set(
    circuit: Circuit,
    noise: NoiseSpec,
    mode: str,
    n_snapshots: int,
    seed: int,
    decomp: QuasiDecomposition | None = None,
    boost_p: float | None = None,
    record_glog: bool = True,
    batch_size: int = 50_000,
    n_workers: int = 1,
) -> ShadowSet:
    """Sample a whole ShadowSet with trajectory batching.

    Deterministic for fixed (seed, batch_size) regardless of n_workers:
    snapshots within a batch share one RNG stream derived from
    (seed, batch index), and batches are independent.
    """
    n = circuit.n_qubits
    noise.validate_against(circuit)
    readout = noise.readout
    if readout.n_qubits != n:
        raise ValueError("readout model qubit count mismatch")

    insert = None
    if mode == "pec":
        if decomp is None:
            decomp = circuit_decomposition(circuit, noise)
        per_gate_norms = tuple((gid, qc.norm) for gid, qc in decomp.channels)
        g_norm = decomp.g_norm
        glog_ids = tuple(gid for gid, _ in decomp.channels)
    elif mode == "conventional":
        decomp, per_gate_norms, g_norm, glog_ids = None, (), 1.0, ()
    elif mode == "boosted":
        if boost_p is None:
            raise ValueError("boosted mode requires boost_p")
        decomp, per_gate_norms, g_norm, glog_ids = None, (), 1.0, ()
        insert = _insertion_channels(noise, boost_p)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    bases = np.empty((n_snapshots, n), dtype=np.uint8)
    bits = np.empty((n_snapshots, n), dtype=np.uint8)
    signs = np.ones(n_snapshots, dtype=np.int8)
    want_glog = mode == "pec" and record_glog
    glog_idx = np.empty((n_snapshots, len(glog_ids)), dtype=np.uint8) if want_glog else None
    glog_signs = np.empty((n_snapshots, len(glog_ids)), dtype=np.int8) if want_glog else None

    plan = []  # (batch_no, start, length)
    start = 0
    batch_no = 0
    while start < n_snapshots:
        b = min(batch_size, n_snapshots - start)
        plan.append((batch_no, start, b))
        start += b
        batch_no += 1

    def fill(start, b, result):
        sl = slice(start, start + b)
        bases[sl], bits[sl], signs[sl] = result[0], result[1], result[2]
        if want_glog:
            glog_idx[sl], glog_signs[sl] = result[3], result[4]

    if n_workers > 1 and len(plan) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            futures = [
                (
                    start,
                    b,
                    pool.submit(
                        _sample_batch, circuit, noise, mode, decomp, insert,
                        seed, bno, b, want_glog,
                    ),
                )
                for bno, start, b in plan
            ]
            for start, b, fut in futures:
                fill(start, b, fut.result())
    else:
        for bno, start, b in plan:
            fill(
                start, b,
                _sample_batch(
                    circuit, noise, mode, decomp, insert, seed, bno, b, want_glog
                ),
            )

    header = ShadowHeader(
        n_qubits=n,
        mode=mode,
        g_norm=float(g_norm),
        per_gate_norms=per_gate_norms,
        readout=readout,
        root_seed=seed,
        n_snapshots=n_snapshots,
        boost_p=boost_p,
    )
    return ShadowSet(
        header, bases, bits, signs, glog_ids if want_glog else (), glog_idx, glog_signs
    )


# ---------------------------------------------------------------------------
# Shadow file I/O (JSON-Lines; header line then one line per snapshot)


def _header_to_dict(h: ShadowHeader) -> dict:
    return {
        "version": FORMAT_VERSION,
        "n_qubits": h.n_qubits,
        "mode": h.mode,
        "boost_p": h.boost_p,
        "g_norm": h.g_norm,
        "per_gate_norms": {str(gid): nm for gid, nm in h.per_gate_norms},
        "readout": {
            "alpha_plus": list(h.readout.alpha_plus),
            "alpha_minus": list(h.readout.alpha_minus),
        },
        "root_seed": h.root_seed,
        "n_snapshots": h.n_snapshots,
    }


def _header_from_dict(d: dict) -> ShadowHeader:
    if d.get("version") != FORMAT_VERSION:
        raise ShadowFileError(f"unsupported shadow file version {d.get('version')!r}")
    return ShadowHeader(
        n_qubits=d["n_qubits"],
        mode=d["mode"],
        g_norm=d["g_norm"],
        per_gate_norms=tuple(sorted((int(k), v) for k, v in d["per_gate_norms"].items())),
        readout=ReadoutModel(
            tuple(d["readout"]["alpha_plus"]), tuple(d["readout"]["alpha_minus"])
        ),
        root_seed=d["root_seed"],
        n_snapshots=d["n_snapshots"],
        boost_p=d.get("boost_p"),
    )


def _snapshot_lines(s: ShadowSet):
    has_glog = s.glog_idx is not None
    for i in range(len(s)):
        row = {
            "bases": "".join(BASIS_CHARS[b] for b in s.bases[i]),
            "bits": "".join(str(b) for b in s.bits[i]),
            "sign": int(s.signs[i]),
        }
        if has_glog:
            row["glog"] = [
                [int(k), int(sg)] for k, sg in zip(s.glog_idx[i], s.glog_signs[i])
            ]
        yield (json.dumps(row, separators=(",", ":")) + "\n").encode()


def write_shadow(s: ShadowSet, path: str) -> None:
    tmp = path + ".tmp"
    crc = 0
    with open(tmp, "wb") as f:
        for line in _snapshot_lines(s):
            crc = zlib.crc32(line, crc)
            f.write(line)
    header = _header_to_dict(s.header)
    header["crc32"] = crc
    if s.glog_idx is not None:
        header["glog_gate_ids"] = list(s.glog_gate_ids)
    try:
        with open(path, "wb") as f:
            f.write((json.dumps(header, separators=(",", ":")) + "\n").encode())
            with open(tmp, "rb") as body:
                shutil.copyfileobj(body, f)
    finally:
        os.unlink(tmp)


def _read_header(f) -> tuple[dict, ShadowHeader]:
    first = f.readline()
    if not first:
        raise ShadowFileError("empty shadow file")
    raw = json.loads(first)
    return raw, _header_from_dict(raw)


def read_shadow(path: str) -> ShadowSet:
    """Load a whole shadow file, verifying the body checksum and count."""
    with open(path, "rb") as f:
        raw, header = _read_header(f)
        n, nq = header.n_snapshots, header.n_qubits
        glog_ids = tuple(raw.get("glog_gate_ids", ()))
        bases = np.empty((n, nq), dtype=np.uint8)
        bits = np.empty((n, nq), dtype=np.uint8)
        signs = np.empty(n, dtype=np.int8)
        glog_idx = np.empty((n, len(glog_ids)), dtype=np.uint8) if glog_ids else None
        glog_signs = np.empty((n, len(glog_ids)), dtype=np.int8) if glog_ids else None
        crc = 0
        count = 0
        basis_code = {c: i for i, c in enumerate(BASIS_CHARS)}
        for line in f:
            crc = zlib.crc32(line, crc)
            if count >= n:
                raise ShadowFileError("more snapshot lines than header n_snapshots")
            row = json.loads(line)
            bases[count] = [basis_code[c] for c in row["bases"]]
            bits[count] = [int(c) for c in row["bits"]]
            signs[count] = row["sign"]
            if glog_ids:
                g = row["glog"]
                glog_idx[count] = [k for k, _ in g]
                glog_signs[count] = [sg for _, sg in g]
            count += 1
        if count != n:
            raise ShadowFileError(f"expected {n} snapshots, found {count}")
        if "crc32" in raw and raw["crc32"] != crc:
            raise ShadowFileError("shadow file checksum mismatch")
    return ShadowSet(header, bases, bits, signs, glog_ids, glog_idx, glog_signs)


def iter_shadow(path: str, chunk: int = 100_000):
    """Stream a shadow file as ShadowSet chunks without loading it whole.

    Yields (header, chunk_set) pairs where chunk_set.header.n_snapshots is the
    chunk length. Verifies the checksum after the last chunk.
    """
    with open(path, "rb") as f:
        raw, header = _read_header(f)
        glog_ids = tuple(raw.get("glog_gate_ids", ()))
        basis_code = {c: i for i, c in enumerate(BASIS_CHARS)}
        crc = 0
        total = 0
        buf: list[dict] = []

        def emit(rows):
            m = len(rows)
            bases = np.empty((m, header.n_qubits), dtype=np.uint8)
            bits = np.empty((m, header.n_qubits), dtype=np.uint8)
            signs = np.empty(m, dtype=np.int8)
            gi = np.empty((m, len(glog_ids)), dtype=np.uint8) if glog_ids else None
            gs = np.empty((m, len(glog_ids)), dtype=np.int8) if glog_ids else None
            for i, row in enumerate(rows):
                bases[i] = [basis_code[c] for c in row["bases"]]
                bits[i] = [int(c) for c in row["bits"]]
                signs[i] = row["sign"]
                if glog_ids:
                    gi[i] = [k for k, _ in row["glog"]]
                    gs[i] = [sg for _, sg in row["glog"]]
            hdr = replace(header, n_snapshots=m)
            return ShadowSet(hdr, bases, bits, signs, glog_ids, gi, gs)

        for line in f:
            crc = zlib.crc32(line, crc)
            buf.append(json.loads(line))
            total += 1
            if len(buf) >= chunk:
                yield header, emit(buf)
                buf = []
        if buf:
            yield header, emit(buf)
        if total != header.n_snapshots:
            raise ShadowFileError(
                f"expected {header.n_snapshots} snapshots, found {total}"
            )
        if "crc32" in raw and raw["crc32"] != crc:
            raise ShadowFileError("shadow file checksum mismatch")
