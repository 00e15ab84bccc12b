"""Experiment pipelines: seeded circuit/noise setup, snapshot pools,
resampling schedules, and CSV/JSON result emission."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import subprocess
from dataclasses import dataclass
from datetime import datetime, timezone
from itertools import combinations, product

import numpy as np

from . import __version__
from .circuits import Circuit, build_circuit
from .estimators import (
    MoMConfig,
    estimate_pauli,
    estimate_purity,
    headline_budget,
    renyi_entropy,
    sample_budget,
    shadow_norm_sq,
    snapshot_values,
    zne_extrapolate,
)
from .hamiltonians import (
    HamiltonianSpec,
    build_hamiltonian,
    build_hva_ansatz,
    energy_expectation,
    fixture_params,
)
from .noise import (
    NoiseSpec,
    ReadoutModel,
    depolarizing_channel,
    draw_gate_noise,
    noise_spec_to_json,
)
from .paulis import PauliString
from .shadows import ShadowSet, sample_shadow_set
from .sim import (
    DENSE_LIMIT,
    exact_density,
    exact_expectation,
    exact_subsystem_purity,
    ideal_statevector,
)

EXPERIMENT_KINDS = (
    "energy-convergence",
    "all-local-paulis",
    "zne-sweep",
    "entropy-map",
    "budget-report",
)

CSV_COLUMNS = (
    "experiment",
    "N_s",
    "estimator",
    "observable",
    "value",
    "stderr",
    "oracle_value",
    "abs_error",
    "bound",
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    n_qubits: int = 6
    layers: int = 1
    hamiltonian: str = "spin-ring"
    hamiltonian_seed: int = 0
    n_gates: int = 10
    noise_model: str = "biased_pauli"  # or "depolarizing"
    p_mean: float | None = None
    eta_mean: float = 0.9
    xi_target: float | None = None
    readout_alpha: float = 0.0
    noise_levels: tuple[float, ...] = ()
    observables: tuple[str, ...] = ()
    schedule: tuple[int, ...] = ()
    pool_size: int = 100_000
    repetitions: int = 100
    mom_batches: int = 1
    max_locality: int = 2
    epsilon: float = 0.1
    delta: float = 1e-3
    m_observables: int = 1
    g_norm: float = 1.0
    locality: int = 3
    seed: int = 0
    threads: int = 1
    out_csv: str = "results.csv"
    out_manifest: str = "manifest.json"

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        object.__setattr__(self, "schedule", tuple(int(n) for n in self.schedule))
        object.__setattr__(self, "noise_levels", tuple(float(p) for p in self.noise_levels))
        object.__setattr__(self, "observables", tuple(self.observables))
        if self.kind != "budget-report" and not self.schedule:
            raise ConfigError("shot schedule must be nonempty")
        if self.kind in ("energy-convergence", "all-local-paulis", "entropy-map"):
            if self.n_qubits > DENSE_LIMIT:
                raise ConfigError(
                    f"{self.n_qubits} qubits exceeds the oracle limit {DENSE_LIMIT}"
                )
        if self.kind == "zne-sweep" and len(self.noise_levels) < 1:
            raise ConfigError("zne-sweep needs at least one boosted noise level")

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - fields
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


# ---------------------------------------------------------------------------
# Helpers


def random_circuit(n_qubits: int, n_gates: int, seed: int, two_qubit_fraction: float = 0.5) -> Circuit:
    """Seeded mixed circuit of Hadamards and random Pauli rotations."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 11]))
    specs = []
    for _ in range(n_gates):
        if n_qubits >= 2 and rng.random() < two_qubit_fraction:
            pair = rng.choice(n_qubits, size=2, replace=False)
            kind = "r" + "".join(rng.choice(list("xyz"), size=2))
            specs.append((kind, tuple(int(t) for t in sorted(pair)), float(rng.uniform(-np.pi, np.pi))))
        else:
            q = int(rng.integers(n_qubits))
            if rng.random() < 0.4:
                specs.append(("h", (q,)))
            else:
                kind = "r" + str(rng.choice(list("xyz")))
                specs.append((kind, (q,), float(rng.uniform(-np.pi, np.pi))))
    return build_circuit(n_qubits, specs)


def local_paulis(n_qubits: int, max_weight: int) -> list[PauliString]:
    """All Pauli strings of weight 1..max_weight, in a fixed order."""
    out = []
    for w in range(1, max_weight + 1):
        for qubits in combinations(range(n_qubits), w):
            for axes in product("XYZ", repeat=w):
                out.append(PauliString.from_map(n_qubits, dict(zip(qubits, axes))))
    return out


def observable_label(p: PauliString) -> str:
    return " ".join(f"{a}{q}" for q, a in p.support) or "I"


def snapshot_energy_values(s: ShadowSet, terms) -> np.ndarray:
    """Per-snapshot single-shot estimates of the Hamiltonian expectation."""
    vals = np.zeros(len(s))
    for coef, p in terms:
        vals += coef * snapshot_values(s, p)
    return vals


def _noise_for(cfg: ExperimentConfig, circuit: Circuit, alpha: float) -> NoiseSpec:
    readout = ReadoutModel.uniform(circuit.n_qubits, alpha)
    n_noisy = sum(1 for g in circuit.gates if g.arity == 2)
    if cfg.noise_model == "depolarizing":
        p = cfg.p_mean if cfg.p_mean is not None else 1e-3
        gates = {
            g.gate_id: depolarizing_channel(p, 2)
            for g in circuit.gates
            if g.arity == 2
        }
        return NoiseSpec.from_dict(gates, readout)
    if cfg.noise_model != "biased_pauli":
        raise ConfigError(f"unknown noise model {cfg.noise_model!r}")
    if cfg.xi_target is not None:
        if n_noisy == 0:
            raise ConfigError("xi target given but circuit has no two-qubit gates")
        p_mean = cfg.xi_target / n_noisy
    elif cfg.p_mean is not None:
        p_mean = cfg.p_mean
    else:
        raise ConfigError("biased_pauli noise needs p_mean or xi_target")
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 9]))
    return draw_gate_noise(circuit, rng, p_mean, cfg.eta_mean, readout=readout)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.12g}"


def _row(cfg, *, N_s, estimator, observable, value, stderr=None, oracle=None, bound=None):
    abs_error = abs(value - oracle) if oracle is not None else None
    return {
        "experiment": cfg.kind,
        "N_s": N_s,
        "estimator": estimator,
        "observable": observable,
        "value": value,
        "stderr": stderr,
        "oracle_value": oracle,
        "abs_error": abs_error,
        "bound": bound,
    }


def write_csv(rows, path: str) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in CSV_COLUMNS])


def _version_string() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            capture_output=True, text=True, timeout=5, check=False,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except Exception:
        pass
    return __version__


def write_manifest(cfg: ExperimentConfig, noise: NoiseSpec | None, seeds: dict, path: str) -> None:
    manifest = {
        "version": _version_string(),
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config": cfg.to_dict(),
        "seeds": seeds,
        "noise_spec": json.loads(noise_spec_to_json(noise)) if noise is not None else None,
    }
    with open(path, "w") as f:
        json.dump(manifest, f, indent=1, sort_keys=True)
        f.write("\n")


def resample_indices(pool_size: int, n: int, seed_parts) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(list(seed_parts)))
    return rng.integers(0, pool_size, n)


# ---------------------------------------------------------------------------
# Experiment implementations


def _hva_setup(cfg: ExperimentConfig):
    spec = HamiltonianSpec(cfg.hamiltonian, cfg.n_qubits, seed=cfg.hamiltonian_seed)
    terms = build_hamiltonian(spec)
    params = fixture_params(spec, cfg.layers)
    circ = build_hva_ansatz(spec, cfg.layers, params)
    return spec, terms, circ


def _energy_convergence(cfg: ExperimentConfig):
    _, terms, circ = _hva_setup(cfg)
    noise = _noise_for(cfg, circ, cfg.readout_alpha)
    e_ideal = energy_expectation(ideal_statevector(circ), terms)
    rho_noisy = exact_density(circ, noise)
    e_noisy = sum(c * exact_expectation(rho_noisy, p) for c, p in terms)
    bias = abs(e_noisy - e_ideal)

    pools = {
        "pec": sample_shadow_set(
            circ, noise, "pec", cfg.pool_size, seed=cfg.seed * 100 + 1,
            record_glog=False, n_workers=cfg.threads,
        ),
        "conventional": sample_shadow_set(
            circ, noise, "conventional", cfg.pool_size, seed=cfg.seed * 100 + 2,
            n_workers=cfg.threads,
        ),
    }
    rows = [
        _row(cfg, N_s=0, estimator="oracle", observable="energy",
             value=e_ideal, stderr=0.0, oracle=e_ideal),
        _row(cfg, N_s=0, estimator="bias", observable="energy",
             value=bias, stderr=0.0),
    ]
    for est_idx, (name, pool) in enumerate(pools.items()):
        evals = snapshot_energy_values(pool, terms)
        for ns_idx, n_s in enumerate(cfg.schedule):
            errs = np.empty(cfg.repetitions)
            for rep in range(cfg.repetitions):
                idx = resample_indices(
                    len(pool), n_s, (cfg.seed, 5, est_idx, ns_idx, rep)
                )
                errs[rep] = abs(float(evals[idx].mean()) - e_ideal)
            rows.append(
                _row(cfg, N_s=n_s, estimator=name, observable="energy",
                     value=float(errs.mean()),
                     stderr=float(errs.std(ddof=1) / math.sqrt(cfg.repetitions)))
            )
    return rows, noise


def _all_local_paulis(cfg: ExperimentConfig):
    circ = random_circuit(cfg.n_qubits, cfg.n_gates, cfg.seed)
    noise = _noise_for(cfg, circ, 0.0)
    n_s = cfg.schedule[0]
    psi = ideal_statevector(circ)
    from .sim import statevector_expectation

    pools = {
        "pec": (sample_shadow_set(circ, noise, "pec", n_s, seed=cfg.seed * 100 + 1,
                                  record_glog=False, n_workers=cfg.threads), 0.0),
        "conventional": (sample_shadow_set(circ, noise, "conventional", n_s,
                                           seed=cfg.seed * 100 + 2,
                                           n_workers=cfg.threads), 0.0),
    }
    if cfg.readout_alpha > 0.0:
        noise_ro = NoiseSpec(noise.gates, ReadoutModel.uniform(cfg.n_qubits, cfg.readout_alpha))
        pools["pec-readout"] = (
            sample_shadow_set(circ, noise_ro, "pec", n_s, seed=cfg.seed * 100 + 3,
                              record_glog=False, n_workers=cfg.threads),
            cfg.readout_alpha,
        )
    mom = MoMConfig(cfg.mom_batches)
    rows = []
    for p in local_paulis(cfg.n_qubits, cfg.max_locality):
        oracle = statevector_expectation(psi, p)
        for name, (pool, alpha) in pools.items():
            e = estimate_pauli(pool, p, mom)
            bound = None
            if name.startswith("pec"):
                n_batch = len(pool) / cfg.mom_batches
                bound = math.sqrt(
                    4.0 * pool.header.g_norm**2 * shadow_norm_sq(p.weight(), alpha) / n_batch
                )
            rows.append(
                _row(cfg, N_s=len(pool), estimator=name,
                     observable=observable_label(p), value=e.value,
                     stderr=e.stderr, oracle=oracle, bound=bound)
            )
    return rows, noise


def _zne_sweep(cfg: ExperimentConfig):
    circ = random_circuit(cfg.n_qubits, cfg.n_gates, cfg.seed)
    noise = _noise_for(cfg, circ, cfg.readout_alpha)
    n_s = cfg.schedule[0]
    p0 = cfg.p_mean if cfg.p_mean is not None else 1e-3
    psi = ideal_statevector(circ)
    from .sim import statevector_expectation

    native = sample_shadow_set(circ, noise, "conventional", n_s,
                               seed=cfg.seed * 100 + 2, n_workers=cfg.threads)
    boosted = {}
    for li, level in enumerate(cfg.noise_levels):
        boosted[level] = sample_shadow_set(
            circ, noise, "boosted", n_s, seed=cfg.seed * 100 + 10 + li,
            boost_p=level, n_workers=cfg.threads,
        )
    observables = [PauliString.parse(t, cfg.n_qubits) for t in cfg.observables]
    if not observables:
        observables = local_paulis(cfg.n_qubits, min(cfg.max_locality, cfg.n_qubits))
    mom = MoMConfig(cfg.mom_batches)
    rows = []
    for p in observables:
        oracle = statevector_expectation(psi, p)
        label = observable_label(p)
        base = estimate_pauli(native, p, mom)
        rows.append(_row(cfg, N_s=n_s, estimator=f"noisy({p0:g})", observable=label,
                         value=base.value, stderr=base.stderr, oracle=oracle))
        points = [(p0, base.value, base.stderr)]
        for level, pool in boosted.items():
            e = estimate_pauli(pool, p, mom)
            points.append((level, e.value, e.stderr))
            rows.append(_row(cfg, N_s=n_s, estimator=f"boosted({level:g})",
                             observable=label, value=e.value, stderr=e.stderr,
                             oracle=oracle))
        z = zne_extrapolate(points, "linear")
        rows.append(_row(cfg, N_s=n_s, estimator="zne-linear", observable=label,
                         value=z.value, stderr=z.stderr, oracle=oracle))
    return rows, noise


def _entropy_map(cfg: ExperimentConfig):
    cfg_h = cfg.hamiltonian if cfg.hamiltonian != "spin-ring" else "heisenberg-chain"
    spec = HamiltonianSpec(cfg_h, cfg.n_qubits, seed=cfg.hamiltonian_seed)
    terms = build_hamiltonian(spec)
    del terms  # state fixture only; energies not reported here
    params = fixture_params(spec, cfg.layers)
    circ = build_hva_ansatz(spec, cfg.layers, params)
    noise = _noise_for(cfg, circ, cfg.readout_alpha)
    n_s = cfg.schedule[0]
    pools = {
        "pec": sample_shadow_set(circ, noise, "pec", n_s, seed=cfg.seed * 100 + 1,
                                 record_glog=False, n_workers=cfg.threads),
        "conventional": sample_shadow_set(circ, noise, "conventional", n_s,
                                          seed=cfg.seed * 100 + 2,
                                          n_workers=cfg.threads),
    }
    psi = ideal_statevector(circ)
    rho_id = np.outer(psi.amplitudes, psi.amplitudes.conj())
    from .sim import DensityMatrix

    rho = DensityMatrix(cfg.n_qubits, rho_id)
    subsystems = [
        qs
        for w in range(1, cfg.max_locality + 1)
        for qs in combinations(range(cfg.n_qubits), w)
    ]
    mom = MoMConfig(cfg.mom_batches)
    rows = []
    for qs in subsystems:
        label = ",".join(str(q) for q in qs)
        oracle_pur = exact_subsystem_purity(rho, qs)
        oracle_ent = -math.log(oracle_pur)
        for name, pool in pools.items():
            e = estimate_purity(pool, qs, mom)
            rows.append(_row(cfg, N_s=n_s, estimator=name,
                             observable=f"purity:{label}", value=e.value,
                             stderr=e.stderr, oracle=oracle_pur))
            ent = renyi_entropy(e.value, len(qs))
            rows.append(_row(cfg, N_s=n_s, estimator=name,
                             observable=f"renyi:{label}", value=ent,
                             stderr=None, oracle=oracle_ent))
    return rows, noise


def _budget_report(cfg: ExperimentConfig):
    sn2 = shadow_norm_sq(cfg.locality, cfg.readout_alpha)
    budget = sample_budget(cfg.epsilon, cfg.delta, cfg.m_observables, cfg.g_norm, sn2)
    headline = headline_budget(cfg.epsilon, cfg.delta, cfg.m_observables, cfg.g_norm)
    rows = [
        _row(cfg, N_s=budget.n_total, estimator="budget", observable="N_batch",
             value=budget.n_batch, stderr=0.0),
        _row(cfg, N_s=budget.n_total, estimator="budget", observable="K",
             value=budget.k, stderr=0.0),
        _row(cfg, N_s=budget.n_total, estimator="budget", observable="N_total",
             value=budget.n_total, stderr=0.0, bound=headline),
        _row(cfg, N_s=budget.n_total, estimator="budget", observable="shadow_norm_sq",
             value=sn2, stderr=0.0),
    ]
    return rows, None


_RUNNERS = {
    "energy-convergence": _energy_convergence,
    "all-local-paulis": _all_local_paulis,
    "zne-sweep": _zne_sweep,
    "entropy-map": _entropy_map,
    "budget-report": _budget_report,
}


def run_experiment(cfg: ExperimentConfig) -> tuple[str, str]:
    """Run the configured experiment; returns (csv path, manifest path)."""
    rows, noise = _RUNNERS[cfg.kind](cfg)
    write_csv(rows, cfg.out_csv)
    seeds = {
        "root": cfg.seed,
        "noise_draw": [cfg.seed, 9],
        "pools": {"pec": cfg.seed * 100 + 1, "conventional": cfg.seed * 100 + 2,
                  "pec-readout": cfg.seed * 100 + 3,
                  "boosted": [cfg.seed * 100 + 10 + i for i in range(len(cfg.noise_levels))]},
        "resample": [cfg.seed, 5],
    }
    write_manifest(cfg, noise, seeds, cfg.out_manifest)
    return cfg.out_csv, cfg.out_manifest
