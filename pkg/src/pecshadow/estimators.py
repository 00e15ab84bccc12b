"""Classical post-processing of shadow sets.

Pauli expectation values, light-cone-reduced estimation, pair-based purity
estimation, median-of-means batching, sample budgets, shadow norms,
zero-noise extrapolation, and symmetry-verified expectations.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .circuits import Circuit, light_cone
from .paulis import PauliString, pauli_mul
from .shadows import ShadowSet, MissingGateLog, estimator_coefficients, snapshot_factor, Snapshot
from .noise import ReadoutModel

_AXIS_CODE = {"X": 0, "Y": 1, "Z": 2}


class DegenerateProjection(ArithmeticError):
    """Symmetry-sector weight is consistent with zero; the ratio is undefined."""


@dataclass(frozen=True)
class MoMConfig:
    """Median-of-means batching: snapshot i goes to batch i mod k."""

    k: int = 1

    def __post_init__(self):
        if self.k < 1 or self.k % 2 == 0:
            raise ValueError(f"batch count must be a positive odd integer, got {self.k}")


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    n_used: int
    norm_used: float

    def __post_init__(self):
        if not (self.stderr >= 0.0 or math.isnan(self.stderr)):
            raise ValueError("stderr must be nonnegative")


@dataclass(frozen=True)
class ZneEstimate(Estimate):
    model: str = "linear"
    fallback: bool = False
    params: tuple[float, ...] = ()


@dataclass(frozen=True)
class SampleBudget:
    n_batch: int
    k: int

    @property
    def n_total(self) -> int:
        return self.n_batch * self.k


# ---------------------------------------------------------------------------
# Median of means


def _batch_stats(values: np.ndarray, k: int) -> tuple[float, float]:
    """(median of batch means, stderr across batch means) for batches i mod k."""
    n = len(values)
    if n == 0:
        raise ValueError("empty value list")
    if k > n:
        raise ValueError(f"batch count {k} exceeds {n} values")
    if k == 1:
        mean = float(np.mean(values))
        stderr = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return mean, stderr
    r = np.arange(n) % k
    sums = np.bincount(r, weights=values, minlength=k)
    counts = np.bincount(r, minlength=k)
    means = sums / counts
    return float(np.median(means)), float(np.std(means, ddof=1) / math.sqrt(k))


def median_of_means(values, k: int) -> float:
    """Median of the k batch means, batches assigned by index mod k."""
    if k % 2 == 0 or k < 1:
        raise ValueError(f"batch count must be a positive odd integer, got {k}")
    return _batch_stats(np.asarray(values, dtype=float), k)[0]


# ---------------------------------------------------------------------------
# Pauli expectation values (single-shot reconstruction + batching)


def _require_hermitian(p: PauliString):
    if not p.is_hermitian():
        raise ValueError(f"observable {p} is not Hermitian")


def snapshot_values(
    s: ShadowSet, p: PauliString, mitigate_readout: bool = True
) -> np.ndarray:
    """Per-snapshot single-shot estimates of <p>; zero on basis mismatch."""
    _require_hermitian(p)
    if p.n_qubits != s.header.n_qubits:
        raise ValueError("observable and shadow set qubit counts differ")
    coef = estimator_coefficients(s.header.n_qubits, s.header.readout, mitigate_readout)
    vals = s.header.g_norm * float(p.phase.real) * s.signs.astype(float)
    for q, axis in p.support:
        match = s.bases[:, q] == _AXIS_CODE[axis]
        cq = np.where(s.bits[:, q] == 0, coef[q, 0], coef[q, 1])
        vals = vals * np.where(match, cq, 0.0)
    return vals


def estimate_pauli(
    s: ShadowSet,
    p: PauliString,
    cfg: MoMConfig = MoMConfig(),
    mitigate_readout: bool = True,
) -> Estimate:
    """Median-of-means estimate of the noise-free expectation value of p."""
    _require_hermitian(p)
    if p.is_identity():
        return Estimate(float(p.phase.real), 0.0, len(s), 1.0)
    if len(s) == 0:
        raise ValueError("empty shadow set")
    vals = snapshot_values(s, p, mitigate_readout)
    value, stderr = _batch_stats(vals, cfg.k)
    return Estimate(value, stderr, len(s), s.header.g_norm)


def estimate_pauli_lightcone(
    s: ShadowSet,
    p: PauliString,
    circuit: Circuit,
    cfg: MoMConfig = MoMConfig(),
    mitigate_readout: bool = True,
) -> Estimate:
    """Like estimate_pauli but re-signed and re-normalized over the backward
    light cone of p, which never increases the quasiprobability norm."""
    _require_hermitian(p)
    if p.is_identity():
        return Estimate(float(p.phase.real), 0.0, len(s), 1.0)
    if s.header.mode != "pec":
        raise MissingGateLog("light-cone estimation needs a pec-mode shadow set")
    if s.glog_idx is None:
        raise MissingGateLog("shadow set carries no per-gate recovery log")
    cone = light_cone(circuit, p)
    cols = [i for i, gid in enumerate(s.glog_gate_ids) if gid in cone]
    norms = dict(s.header.per_gate_norms)
    cone_norm = 1.0
    for gid in s.glog_gate_ids:
        if gid in cone:
            cone_norm *= norms[gid]
    if cols:
        cone_signs = np.prod(s.glog_signs[:, cols], axis=1).astype(float)
    else:
        cone_signs = np.ones(len(s))
    coef = estimator_coefficients(s.header.n_qubits, s.header.readout, mitigate_readout)
    vals = cone_norm * float(p.phase.real) * cone_signs
    for q, axis in p.support:
        match = s.bases[:, q] == _AXIS_CODE[axis]
        cq = np.where(s.bits[:, q] == 0, coef[q, 0], coef[q, 1])
        vals = vals * np.where(match, cq, 0.0)
    value, stderr = _batch_stats(vals, cfg.k)
    return Estimate(value, stderr, len(s), cone_norm)


# ---------------------------------------------------------------------------
# Purity / second Renyi entropy (pair statistics)


def pair_factor(basis_i: str, bit_i: int, basis_j: str, bit_j: int) -> float:
    """Single-qubit overlap factor tr[f_i f_j] = 9|<s|t>|^2 - 4 of two
    noiseless snapshot factors: 1/2 across bases, 5 / -4 within a basis."""
    if basis_i != basis_j:
        return 0.5
    return 5.0 if bit_i == bit_j else -4.0


def _qubit_pair_table(qubit: int, readout: ReadoutModel, mitigate: bool) -> np.ndarray:
    """6x6 table over (basis, bit) codes of tr[f_a f_b] for one qubit."""
    table = np.empty((6, 6))
    factors = []
    for b_code in range(3):
        for bit in range(2):
            snap = Snapshot(
                bases="Z" * qubit + "XYZ"[b_code] + "Z",  # only [qubit] is read
                bits="0" * qubit + str(bit) + "0",
                sign=1,
            )
            factors.append(snapshot_factor(snap, qubit, readout, mitigated=mitigate))
    for a in range(6):
        for b in range(6):
            table[a, b] = float(np.trace(factors[a] @ factors[b]).real)
    return table


_CATEGORY_LIMIT = 4  # largest |Q| for the category-counting fast path


def _purity_batch_means(
    s: ShadowSet, subsystem: tuple[int, ...], k: int, mitigate_readout: bool
) -> tuple[np.ndarray, np.ndarray]:
    """Batch means of the pair estimator, pairs batched by (i+j) mod k, plus
    the per-snapshot projection means used for the standard error.

    Snapshots are binned by (sign, per-qubit basis/bit) category and index
    residue; the sum over all distinct pairs reduces to quadratic forms in the
    per-residue category counts, avoiding the O(N^2) pair loop.  The second
    return value is h_bar[i] = mean over partners j != i of the pair value,
    whose spread sets the leading 4*var(h_bar)/N variance of the estimate
    (every snapshot enters every pair batch, so batch spread alone would
    understate the error).
    """
    n = len(s)
    m = len(subsystem)
    tables = [
        _qubit_pair_table(q, s.header.readout, mitigate_readout) for q in subsystem
    ]
    w = np.ones((1, 1))
    for t in tables:
        w = np.kron(w, t)
    a_size = 6**m

    codes = np.zeros(n, dtype=np.int64)
    for q in subsystem:
        codes = codes * 6 + (s.bases[:, q].astype(np.int64) * 2 + s.bits[:, q])
    res = np.arange(n) % k

    signed = np.zeros((k, a_size))
    plain = np.zeros((k, a_size))
    np.add.at(signed, (res, codes), s.signs.astype(float))
    np.add.at(plain, (res, codes), 1.0)

    g2 = s.header.g_norm**2
    gram = signed @ w @ signed.T  # ordered-pair (incl. i=j) signed sums by residues
    n_r = plain.sum(axis=1)
    gram_count = np.outer(n_r, n_r)
    diag_w = plain @ np.diag(w)  # per-residue sum of self-pair values

    sums = np.zeros(k)
    counts = np.zeros(k)
    for r1 in range(k):
        for r2 in range(k):
            beta = (r1 + r2) % k
            sums[beta] += gram[r1, r2]
            counts[beta] += gram_count[r1, r2]
    for r in range(k):
        beta = (2 * r) % k
        sums[beta] -= diag_w[r]
        counts[beta] -= n_r[r]
    sums /= 2.0
    counts /= 2.0
    if np.any(counts < 1):
        raise ValueError("a pair batch is empty; reduce the batch count")

    signs = s.signs.astype(float)
    signed_total = signed.sum(axis=0)
    wv = w @ signed_total
    partner = signs * (wv[codes] - np.diag(w)[codes] * signs)
    hbar = g2 * partner / (n - 1)
    return g2 * sums / counts, hbar


def _purity_batch_means_direct(
    s: ShadowSet, subsystem: tuple[int, ...], k: int, mitigate_readout: bool
) -> tuple[np.ndarray, np.ndarray]:
    """Chunked pairwise evaluation for subsystems too large to categorize."""
    n = len(s)
    tables = [
        _qubit_pair_table(q, s.header.readout, mitigate_readout) for q in subsystem
    ]
    codes = np.stack(
        [s.bases[:, q].astype(np.int64) * 2 + s.bits[:, q] for q in subsystem]
    )
    signs = s.signs.astype(float)
    sums = np.zeros(k)
    counts = np.zeros(k)
    rowsums = np.zeros(n)
    chunk = 2048
    idx = np.arange(n)
    for a0 in range(0, n, chunk):
        ai = slice(a0, min(a0 + chunk, n))
        for b0 in range(a0, n, chunk):
            bi = slice(b0, min(b0 + chunk, n))
            f = np.ones((idx[ai].size, idx[bi].size))
            for qpos, t in enumerate(tables):
                f *= t[codes[qpos, ai][:, None], codes[qpos, bi][None, :]]
            f *= signs[ai][:, None] * signs[bi][None, :]
            upper = idx[ai][:, None] < idx[bi][None, :]
            beta = (idx[ai][:, None] + idx[bi][None, :]) % k
            np.add.at(sums, beta[upper], f[upper])
            np.add.at(counts, beta[upper], 1.0)
            if a0 == b0:
                rowsums[ai] += np.where(upper | upper.T, f, 0.0).sum(axis=1)
            else:
                rowsums[ai] += f.sum(axis=1)
                rowsums[bi] += f.sum(axis=0)
    if np.any(counts < 1):
        raise ValueError("a pair batch is empty; reduce the batch count")
    g2 = s.header.g_norm**2
    return g2 * sums / counts, g2 * rowsums / (n - 1)


def estimate_purity(
    s: ShadowSet,
    subsystem,
    cfg: MoMConfig = MoMConfig(),
    mitigate_readout: bool = True,
) -> Estimate:
    """Subsystem purity tr[rho_Q^2] from all distinct snapshot pairs."""
    subsystem = tuple(sorted(set(subsystem)))
    if not subsystem:
        raise ValueError("subsystem must be nonempty")
    if any(q < 0 or q >= s.header.n_qubits for q in subsystem):
        raise ValueError("subsystem qubit out of range")
    if len(s) < 2:
        raise ValueError("purity estimation needs at least two snapshots")
    if len(subsystem) <= _CATEGORY_LIMIT:
        means, hbar = _purity_batch_means(s, subsystem, cfg.k, mitigate_readout)
    else:
        means, hbar = _purity_batch_means_direct(s, subsystem, cfg.k, mitigate_readout)
    # Every snapshot enters every pair batch, so the batch spread misses the
    # leading per-snapshot variance component; use the projection variance of
    # the pair statistic instead.
    stderr = float(math.sqrt(4.0 * np.var(hbar, ddof=1) / len(s)))
    value = float(means[0]) if cfg.k == 1 else float(np.median(means))
    return Estimate(value, stderr, len(s), s.header.g_norm**2)


def renyi_entropy(purity: float, subsystem_size: int | None = None) -> float:
    """Second Renyi entropy -ln(purity), clamping the purity estimate to the
    physical range [2^-|Q|, 1] before taking the logarithm."""
    floor = 2.0 ** (-subsystem_size) if subsystem_size is not None else 0.0
    clamped = min(max(purity, floor), 1.0)
    if clamped <= 0.0:
        warnings.warn(
            f"purity {purity} nonpositive after clamping; entropy undefined",
            RuntimeWarning,
        )
        return float("nan")
    return -math.log(clamped)


# ---------------------------------------------------------------------------
# Sample budgets and shadow norms


def shadow_norm_sq(q: int, alpha: float = 0.0) -> float:
    """Squared shadow norm 3^q of a weight-q Pauli, with the readout-corrected
    form 3^q / (1-2a)^{2q} under symmetric flip rate a."""
    if q < 0:
        raise ValueError("weight must be nonnegative")
    if not 0.0 <= alpha < 0.5:
        raise ValueError(f"readout rate {alpha} outside [0, 0.5)")
    return 3.0**q / (1.0 - 2.0 * alpha) ** (2 * q)


def sample_budget(
    epsilon: float,
    delta: float,
    m_observables: int,
    g_norm: float,
    max_shadow_norm_sq: float,
) -> SampleBudget:
    """Snapshot budget guaranteeing every one of M estimates within epsilon
    with total failure probability delta."""
    if not 0.0 < epsilon:
        raise ValueError("epsilon must be positive")
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    if m_observables < 1:
        raise ValueError("need at least one observable")
    if g_norm < 1.0:
        raise ValueError("quasiprobability norm is at least 1")
    n_batch = math.ceil(4.0 * g_norm**2 * max_shadow_norm_sq / epsilon**2)
    k_min = 8.0 * math.log(m_observables / delta)
    k = max(1, math.ceil(k_min))
    if k % 2 == 0:
        k += 1
    return SampleBudget(n_batch=n_batch, k=k)


def headline_budget(epsilon: float, delta: float, m_observables: int, g_norm: float) -> float:
    """Un-rounded headline sample count 32 eps^-2 ln(M/delta) g^2 (diagnostic)."""
    return 32.0 * g_norm**2 * math.log(m_observables / delta) / epsilon**2


# ---------------------------------------------------------------------------
# Zero-noise extrapolation


def _weighted_linear_fit(x: np.ndarray, y: np.ndarray, w: np.ndarray):
    """WLS fit y = a + b x; returns (a, b, stderr_a)."""
    design = np.stack([np.ones_like(x), x], axis=1)
    wd = design * w[:, None]
    normal = design.T @ wd
    if abs(np.linalg.det(normal)) < 1e-30 or np.ptp(x) == 0.0:
        raise ValueError("degenerate design: need at least two distinct noise levels")
    cov = np.linalg.inv(normal)
    coef = cov @ (wd.T @ y)
    return float(coef[0]), float(coef[1]), float(math.sqrt(max(cov[0, 0], 0.0)))


def zne_extrapolate(points, model: str = "linear") -> ZneEstimate:
    """Extrapolate (noise level, value, stderr) triples to zero noise.

    Linear fits value = a + b p; exponential fits value = a e^{-b p} by
    log-linear regression (all values sharing a sign) or nonlinear refinement,
    falling back to the linear model (flagged) when that fails.
    """
    pts = [(float(p), float(v), float(e)) for p, v, e in points]
    if model not in ("linear", "exponential"):
        raise ValueError(f"unknown extrapolation model {model!r}")
    min_points = 2 if model == "linear" else 3
    if len(pts) < min_points:
        raise ValueError(f"{model} extrapolation needs >= {min_points} points")
    x = np.array([p for p, _, _ in pts])
    y = np.array([v for _, v, _ in pts])
    e = np.array([s for _, _, s in pts])
    w = np.ones_like(e)
    np.divide(1.0, e**2, out=w, where=e > 0)
    if np.ptp(x) == 0.0:
        raise ValueError("degenerate design: all noise levels equal")
    n_used = len(pts)

    if model == "linear":
        a, b, se = _weighted_linear_fit(x, y, w)
        return ZneEstimate(a, se, n_used, 1.0, model="linear", params=(a, b))

    if np.all(y > 0) or np.all(y < 0):
        sign = 1.0 if y[0] > 0 else -1.0
        ly = np.log(np.abs(y))
        # delta method: var(ln v) = (stderr / v)^2
        lw = np.where(e > 0, (np.abs(y) / np.maximum(e, 1e-300)) ** 2, 1.0)
        la, lb, lse = _weighted_linear_fit(x, ly, lw)
        a = sign * math.exp(la)
        return ZneEstimate(
            a, abs(a) * lse, n_used, 1.0, model="exponential", params=(a, -lb)
        )
    try:
        from scipy.optimize import curve_fit

        popt, pcov = curve_fit(
            lambda p, a, b: a * np.exp(-b * p),
            x,
            y,
            p0=(y[np.argmin(x)], 0.0),
            sigma=np.where(e > 0, e, 1.0),
            absolute_sigma=True,
            maxfev=10_000,
        )
        a, b = float(popt[0]), float(popt[1])
        se = float(math.sqrt(max(pcov[0, 0], 0.0)))
        return ZneEstimate(a, se, n_used, 1.0, model="exponential", params=(a, b))
    except Exception:
        a, b, se = _weighted_linear_fit(x, y, w)
        return ZneEstimate(
            a, se, n_used, 1.0, model="linear", fallback=True, params=(a, b)
        )


# ---------------------------------------------------------------------------
# Symmetry-verified expectation values


def _validate_symmetry_group(symmetries: list[PauliString]):
    keys = {s.support for s in symmetries}
    if len(keys) != len(symmetries):
        raise ValueError("duplicate symmetry elements")
    if not any(s.is_identity() for s in symmetries):
        raise ValueError("symmetry set must contain the identity")
    for s in symmetries:
        if not s.is_hermitian():
            raise ValueError(f"symmetry element {s} is not Hermitian")
        for t in symmetries:
            prod = pauli_mul(s, t)
            if prod.support not in keys:
                raise ValueError(
                    f"symmetry set not closed under multiplication: {s} * {t}"
                )


def _term_values(s: ShadowSet, p: PauliString, mitigate_readout: bool) -> np.ndarray:
    """Per-snapshot estimates of tr[P rho] including a possibly imaginary phase."""
    base = PauliString(p.n_qubits, p.support, 1)
    if base.is_identity():
        return np.full(len(s), complex(p.phase))
    return complex(p.phase) * snapshot_values(s, base, mitigate_readout).astype(complex)


def symmetry_verified_expectation(
    s: ShadowSet,
    o: PauliString,
    symmetries: list[PauliString],
    commuting: bool,
    cfg: MoMConfig = MoMConfig(),
    mitigate_readout: bool = True,
) -> Estimate:
    """Expectation of o in the symmetry-projected state, as a ratio of shadow
    estimates over effective observables S*o (commuting) or S*o*S' (general).

    The stderr comes from first-order propagation through the ratio using the
    covariance of the numerator and denominator batch means.
    """
    _require_hermitian(o)
    _validate_symmetry_group(symmetries)
    if any(sym.n_qubits != o.n_qubits for sym in symmetries):
        raise ValueError("symmetries and observable live on different qubit counts")
    size = len(symmetries)
    num_vals = np.zeros(len(s), dtype=complex)
    if commuting:
        for sym in symmetries:
            num_vals += _term_values(s, pauli_mul(sym, o), mitigate_readout)
    else:
        for sym in symmetries:
            for sym2 in symmetries:
                num_vals += _term_values(
                    s, pauli_mul(pauli_mul(sym, o), sym2), mitigate_readout
                ) / size
    den_vals = np.zeros(len(s), dtype=complex)
    for sym in symmetries:
        den_vals += _term_values(s, sym, mitigate_readout)

    k = cfg.k
    n = len(s)
    if k > n:
        raise ValueError(f"batch count {k} exceeds {n} snapshots")
    r = np.arange(n) % k
    counts = np.bincount(r, minlength=k)
    num_means = np.bincount(r, weights=num_vals.real, minlength=k) / counts
    den_means = np.bincount(r, weights=den_vals.real, minlength=k) / counts
    num_hat = float(np.median(num_means))
    den_hat = float(np.median(den_means))
    if k > 1:
        var_num = float(np.var(num_means, ddof=1)) / k
        var_den = float(np.var(den_means, ddof=1)) / k
        cov = float(np.cov(num_means, den_means, ddof=1)[0, 1]) / k
    else:
        var_num = float(np.var(num_vals.real, ddof=1)) / n if n > 1 else 0.0
        var_den = float(np.var(den_vals.real, ddof=1)) / n if n > 1 else 0.0
        cov = float(np.cov(num_vals.real, den_vals.real, ddof=1)[0, 1]) / n if n > 1 else 0.0
    den_err = math.sqrt(max(var_den, 0.0))
    if abs(den_hat) <= 3.0 * den_err:
        raise DegenerateProjection(
            f"sector weight {den_hat:.3e} consistent with zero (stderr {den_err:.3e})"
        )
    value = num_hat / den_hat
    var = (
        var_num / den_hat**2
        + (num_hat**2 / den_hat**4) * var_den
        - 2.0 * (num_hat / den_hat**3) * cov
    )
    return Estimate(value, math.sqrt(max(var, 0.0)), n, s.header.g_norm)
