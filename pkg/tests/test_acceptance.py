"""End-to-end acceptance suite.

One test function per acceptance property, so that ``pytest -v`` prints one
pass/fail line for each.  The tests exercise the library at realistic scale
(million-snapshot pools); the whole file runs in roughly a quarter hour on a
single core.  All oracles are computed from dense density-matrix or
statevector simulation, never from the code under test's sampling path.
"""

import csv
import math
import time

import numpy as np
import pytest
from scipy import stats

from conftest import bell_circuit, bell_noise
from pecshadow.circuits import build_circuit, pauli_matrix
from pecshadow.estimators import (
    MoMConfig,
    _qubit_pair_table,
    estimate_pauli,
    estimate_pauli_lightcone,
    estimate_purity,
    sample_budget,
    shadow_norm_sq,
    snapshot_values,
    symmetry_verified_expectation,
    zne_extrapolate,
)
from pecshadow.experiments import (
    ExperimentConfig,
    local_paulis,
    observable_label,
    random_circuit,
    resample_indices,
    run_experiment,
)
from pecshadow.noise import (
    NoiseSpec,
    PauliChannel,
    ReadoutModel,
    biased_pauli_channel,
    biased_pauli_inverse_closed_form,
    circuit_decomposition,
    depolarizing_channel,
    draw_gate_noise,
    invert_pauli_channel,
    pauli_labels,
    two_qubit_biased_channel,
)
from pecshadow.paulis import PauliString
from pecshadow.shadows import BASIS_CHARS, sample_shadow_set
from pecshadow.sim import (
    BASIS_ROTATIONS,
    exact_density,
    exact_expectation,
    ideal_statevector,
    statevector_expectation,
)

P_GRID = (0.0, 0.01, 0.05, 0.1)
ETA_GRID = (0.0, 1.0 / 3.0, 0.9, 1.0)


def apply_pauli_mixture(rho, weights, labels):
    out = np.zeros_like(rho)
    for w, lab in zip(weights, labels):
        p = pauli_matrix(lab)
        out += w * (p @ rho @ p)
    return out


def random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


# ---------------------------------------------------------------------------
# Shared million-snapshot pools: one 4-qubit, 10-gate circuit with expected
# error count ~0.2, sampled in recovery mode (with and without readout flips)
# and in plain conventional mode.

N_POOL = 1_000_000


@pytest.fixture(scope="module")
def four_qubit_setup():
    circuit = random_circuit(4, 10, seed=1)
    n2 = sum(1 for g in circuit.gates if g.arity == 2)
    rng = np.random.default_rng([1, 9])
    noise = draw_gate_noise(circuit, rng, 0.2 / n2)
    assert abs(noise.xi() - 0.2) < 0.05
    psi = ideal_statevector(circuit)
    observables = local_paulis(4, 2)
    oracles = {p: statevector_expectation(psi, p) for p in local_paulis(4, 3)}
    return circuit, noise, observables, oracles


@pytest.fixture(scope="module")
def pec_pool(four_qubit_setup):
    circuit, noise, _, _ = four_qubit_setup
    return sample_shadow_set(circuit, noise, "pec", N_POOL, seed=21,
                             record_glog=False)


@pytest.fixture(scope="module")
def conventional_pool(four_qubit_setup):
    circuit, noise, _, _ = four_qubit_setup
    return sample_shadow_set(circuit, noise, "conventional", N_POOL, seed=22)


@pytest.fixture(scope="module")
def readout_pool(four_qubit_setup):
    circuit, noise, _, _ = four_qubit_setup
    noisy_readout = NoiseSpec(noise.gates, ReadoutModel.uniform(4, 0.01))
    return sample_shadow_set(circuit, noisy_readout, "pec", N_POOL, seed=23,
                             record_glog=False)


# ---------------------------------------------------------------------------
# 1. Channel inversion


def test_channel_inverse_restores_random_states_and_matches_closed_forms():
    start = time.monotonic()
    rng = np.random.default_rng(12345)
    checked = 0
    for arity, count in ((1, 150), (2, 50)):
        labels = pauli_labels(arity)
        dim = 2**arity
        while checked < (150 if arity == 1 else 200):
            probs = rng.dirichlet(np.ones(len(labels)))
            ch = PauliChannel(arity, tuple(zip(labels, probs.tolist())))
            if np.min(np.abs(ch.transfer_eigenvalues())) < 1e-3:
                continue  # redraw: effectively non-invertible
            qc = invert_pauli_channel(ch)
            rho = random_density(rng, dim)
            noisy = apply_pauli_mixture(rho, ch.prob_vector(), labels)
            recovered = apply_pauli_mixture(noisy, qc.gamma_vector(), labels)
            assert np.max(np.abs(recovered - rho)) <= 1e-10
            checked += 1
    assert checked == 200

    for p in P_GRID:
        for eta in ETA_GRID:
            cf = biased_pauli_inverse_closed_form(p, eta)
            num = invert_pauli_channel(biased_pauli_channel(p, eta))
            np.testing.assert_allclose(
                cf.gamma_vector(), num.gamma_vector(), atol=1e-10
            )
            assert abs(cf.norm - num.norm) <= 1e-10
    assert time.monotonic() - start < 10.0


# ---------------------------------------------------------------------------
# 2. Recovery-mode snapshot means are unbiased where plain shadows are not


def test_recovered_means_unbiased_where_conventional_shadows_biased(
    four_qubit_setup, pec_pool, conventional_pool
):
    _, _, observables, oracles = four_qubit_setup
    worst_pec = 0.0
    worst_conventional = 0.0
    for p in observables:
        e = estimate_pauli(pec_pool, p)
        assert e.stderr > 0.0
        worst_pec = max(worst_pec, abs(e.value - oracles[p]) / e.stderr)
        c = estimate_pauli(conventional_pool, p)
        worst_conventional = max(
            worst_conventional, abs(c.value - oracles[p]) / c.stderr
        )
    assert worst_pec <= 5.0
    assert worst_conventional > 10.0


# ---------------------------------------------------------------------------
# 3. Single-shot variance bound


def test_single_shot_variance_within_analytic_bound(
    four_qubit_setup, pec_pool, readout_pool
):
    _, _, observables, _ = four_qubit_setup
    for pool, alpha in ((pec_pool, 0.0), (readout_pool, 0.01)):
        g2 = pool.header.g_norm**2
        for p in observables:
            q = p.weight()
            vals = snapshot_values(pool, p)
            bound = g2 * shadow_norm_sq(q, alpha)
            # The bound is attained with equality for zero-mean observables,
            # so allow the sampling fluctuation of the empirical variance.
            slack = 1.0 + 5.0 * math.sqrt(3.0**q / len(pool))
            assert float(np.var(vals)) <= bound * slack


# ---------------------------------------------------------------------------
# 4. Pair factors and purity estimation


def test_pair_factors_and_purity_estimates(tmp_path):
    # (a) the per-qubit pair table holds only {1/2, 5, -4} and each entry
    # equals 9 |<s|t>|^2 - 4 for the corresponding post-measurement states.
    table = _qubit_pair_table(0, ReadoutModel.noiseless(2), True)
    assert set(np.round(table.ravel(), 12)) == {0.5, 5.0, -4.0}
    states = []
    for b in BASIS_CHARS:
        q = BASIS_ROTATIONS[b]
        for bit in (0, 1):
            states.append(q.conj().T[:, bit])
    for a, sa in enumerate(states):
        for b, sb in enumerate(states):
            overlap = abs(np.vdot(sa, sb)) ** 2
            assert table[a, b] == pytest.approx(9.0 * overlap - 4.0, abs=1e-12)

    # (b) a noisy Bell pair still has single-qubit purity 1/2 after recovery.
    pool = sample_shadow_set(bell_circuit(), bell_noise(), "pec", 100_000,
                             seed=300)
    half = estimate_purity(pool, (0,), MoMConfig(9))
    assert abs(half.value - 0.5) <= 5.0 * half.stderr

    # (c) 6-qubit subsystem-entropy map: recovery keeps the worst-case error
    # under 0.1 at 1e5 snapshots; plain shadows are strictly worse.
    cfg = ExperimentConfig(
        kind="entropy-map", n_qubits=6, layers=2, hamiltonian="heisenberg-chain",
        xi_target=0.2, schedule=(100_000,), max_locality=2, mom_batches=5,
        seed=11, out_csv=str(tmp_path / "entropy.csv"),
        out_manifest=str(tmp_path / "entropy.json"),
    )
    csv_path, _ = run_experiment(cfg)
    rows = list(csv.DictReader(open(csv_path)))
    max_err = {}
    for name in ("pec", "conventional"):
        max_err[name] = max(
            abs(float(r["abs_error"]))
            for r in rows
            if r["estimator"] == name and r["observable"].startswith("renyi:")
        )
    assert max_err["pec"] < 0.1
    assert max_err["conventional"] > max_err["pec"]


# ---------------------------------------------------------------------------
# 5. Light-cone restriction


def test_light_cone_restriction_keeps_mean_and_reduces_variance():
    circuit = build_circuit(4, [
        ("h", (0,)), ("cnot", (0, 1)), ("h", (2,)), ("cnot", (2, 3)),
    ])
    noise = NoiseSpec.from_dict(
        {2: two_qubit_biased_channel(0.10, 0.9),
         4: two_qubit_biased_channel(0.15, 0.9)},
        ReadoutModel.noiseless(4),
    )
    pool = sample_shadow_set(circuit, noise, "pec", 200_000, seed=31)
    p = PauliString.parse("Z0 Z1", 4)
    plain = estimate_pauli(pool, p)
    cone = estimate_pauli_lightcone(pool, p, circuit)
    # The second entangling gate is outside the observable's light cone, so
    # the restricted norm is strictly smaller ...
    assert cone.norm_used < pool.header.g_norm
    # ... the estimate is statistically unchanged ...
    sigma = math.hypot(plain.stderr, cone.stderr)
    assert abs(cone.value - plain.value) <= 5.0 * sigma
    # ... and on the same snapshots (paired draws) the spread shrinks.
    assert cone.stderr < plain.stderr


# ---------------------------------------------------------------------------
# 6. Sample-budget guarantee


def test_sample_budget_failure_fraction_within_target():
    epsilon, delta, m = 0.3, 0.1, 9
    circuit = random_circuit(3, 8, seed=2)
    n2 = sum(1 for g in circuit.gates if g.arity == 2)
    noise = draw_gate_noise(circuit, np.random.default_rng([2, 9]), 0.15 / n2)
    g_norm = circuit_decomposition(circuit, noise).g_norm
    budget = sample_budget(epsilon, delta, m, g_norm, shadow_norm_sq(1))
    psi = ideal_statevector(circuit)
    observables = local_paulis(3, 1)
    assert len(observables) == m
    oracles = {p: statevector_expectation(psi, p) for p in observables}

    reps = 200
    pool = sample_shadow_set(circuit, noise, "pec", budget.n_total * reps,
                             seed=600, record_glog=False)
    mom = MoMConfig(budget.k)
    failures = 0
    for rep in range(reps):
        sl = pool.subset(
            np.arange(rep * budget.n_total, (rep + 1) * budget.n_total)
        )
        failures += any(
            abs(estimate_pauli(sl, p, mom).value - oracles[p]) > epsilon
            for p in observables
        )
    assert failures / reps <= delta


# ---------------------------------------------------------------------------
# 7. Noise boosting and zero-noise extrapolation


def test_boosted_linear_extrapolation_beats_unmitigated():
    rng = np.random.default_rng(42)
    pairs = [(0, 1), (1, 2), (0, 2)]
    kinds = ["rzz", "rxx", "ryy", "rxy", "rzx", "ryz"]
    circuit = build_circuit(3, [
        (kinds[i % 6], pairs[i % 3], float(rng.uniform(-np.pi, np.pi)))
        for i in range(30)
    ])
    noise = NoiseSpec.from_dict(
        {g.gate_id: depolarizing_channel(1e-3, 2) for g in circuit.gates},
        ReadoutModel.noiseless(3),
    )
    p = PauliString.parse("Y0 Y1 Z2", 3)
    ideal = statevector_expectation(ideal_statevector(circuit), p)

    pool_size, levels = 2_000_000, (1e-3, 2e-3, 5e-3)
    vals = {}
    vals[levels[0]] = snapshot_values(
        sample_shadow_set(circuit, noise, "conventional", pool_size, seed=201), p
    )
    for i, level in enumerate(levels[1:]):
        vals[level] = snapshot_values(
            sample_shadow_set(circuit, noise, "boosted", pool_size,
                              seed=202 + i, boost_p=level), p
        )

    n_res, wins = 400_000, 0
    for rep in range(100):
        points = []
        for li, level in enumerate(levels):
            idx = resample_indices(pool_size, n_res, (7, 5, li, 0, rep))
            v = vals[level][idx]
            points.append(
                (level, float(v.mean()), float(v.std(ddof=1) / math.sqrt(n_res)))
            )
        z = zne_extrapolate(points, model="linear")
        wins += abs(z.value - ideal) < abs(points[0][1] - ideal)
    assert wins >= 90

    # Exactly linear synthetic data recovers the intercept to 1e-10.
    a, b = 0.8251, -13.7
    synthetic = [(l, a + b * l, 0.01) for l in levels]
    z = zne_extrapolate(synthetic, model="linear")
    assert abs(z.value - a) <= 1e-10


# ---------------------------------------------------------------------------
# 8. Readout-flip mitigation


def test_readout_mitigation_unbiased_with_reported_norm(
    four_qubit_setup, readout_pool
):
    _, _, _, oracles = four_qubit_setup
    worst = 0.0
    for p in local_paulis(4, 3):
        e = estimate_pauli(readout_pool, p, mitigate_readout=True)
        worst = max(worst, abs(e.value - oracles[p]) / e.stderr)
    assert worst <= 5.0
    assert shadow_norm_sq(3, 0.01) == 27.0 / 0.98**6
    assert shadow_norm_sq(3, 0.01) == pytest.approx(30.43, abs=0.06)


# ---------------------------------------------------------------------------
# 9. Symmetry-projected estimation


def test_symmetry_projected_ratio_matches_oracle():
    circuit = build_circuit(2, [("h", (0,)), ("cnot", (0, 1))])
    injected = PauliChannel.from_dict(2, {"II": 0.8, "XI": 0.2})
    noise = NoiseSpec.from_dict({2: injected}, ReadoutModel.noiseless(2))
    rho = exact_density(circuit, noise).entries
    projector = 0.5 * (np.eye(4) + pauli_matrix("ZZ"))
    symmetries = [PauliString.identity(2), PauliString.parse("ZZ")]

    pool = sample_shadow_set(circuit, noise, "conventional", 200_000, seed=905)
    for label in ("XX", "YY"):
        o = pauli_matrix(label)
        oracle = (
            np.trace(projector @ rho @ projector @ o).real
            / np.trace(projector @ rho).real
        )
        e = symmetry_verified_expectation(
            pool, PauliString.parse(label), symmetries, commuting=True,
            cfg=MoMConfig(9),
        )
        assert abs(e.value - oracle) <= 5.0 * e.stderr
        if label == "YY":
            # The parity filter actually does something here: the raw noisy
            # expectation sits far from the projected one.
            raw = exact_expectation(
                exact_density(circuit, noise), PauliString.parse(label)
            )
            assert abs(raw - oracle) > 10.0 * e.stderr


# ---------------------------------------------------------------------------
# 10. Energy-error convergence


def test_energy_error_scaling_beats_conventional_plateau(tmp_path):
    cfg = ExperimentConfig(
        kind="energy-convergence", n_qubits=6, layers=1, xi_target=0.2,
        schedule=(1000, 3160, 10000, 31600, 100000, 215000, 464000, 1000000),
        pool_size=3_000_000, repetitions=100, seed=7,
        out_csv=str(tmp_path / "energy.csv"),
        out_manifest=str(tmp_path / "energy.json"),
    )
    csv_path, _ = run_experiment(cfg)
    rows = list(csv.DictReader(open(csv_path)))
    bias = next(float(r["value"]) for r in rows if r["estimator"] == "bias")
    series = {
        name: {
            int(r["N_s"]): float(r["value"])
            for r in rows if r["estimator"] == name
        }
        for name in ("pec", "conventional")
    }
    # Plain shadows plateau at the systematic offset of the noisy state.
    plateau = series["conventional"][1_000_000]
    assert abs(plateau - bias) <= 0.2 * bias
    # The recovered estimator keeps converging well below that plateau ...
    assert series["pec"][1_000_000] < 0.5 * plateau
    # ... at the statistical 1/sqrt(N) rate over the last decade.
    tail = [100000, 215000, 464000, 1000000]
    slope = stats.linregress(
        np.log([float(n) for n in tail]),
        np.log([series["pec"][n] for n in tail]),
    ).slope
    assert slope == pytest.approx(-0.5, abs=0.1)
