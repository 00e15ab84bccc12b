"""Error-mitigated classical shadows of simulated noisy quantum circuits.

Randomized Pauli-basis snapshots with per-gate probabilistic error
cancellation, noise boosting for extrapolation, readout mitigation, and the
estimators that turn shadow files into expectation values, purities, and
entropies.
"""

__version__ = "0.1.0"

from .paulis import PauliString, PauliSizeMismatch, pauli_mul, pauli_weight
from .circuits import Circuit, GateOp, UnknownGate, build_circuit, light_cone
from .noise import (
    BoostBelowNative,
    NoiseSpec,
    NonPhysicalBoost,
    PauliChannel,
    QuasiChannel,
    QuasiDecomposition,
    ReadoutModel,
    SingularChannel,
    biased_pauli_channel,
    biased_pauli_inverse_closed_form,
    boost_distribution,
    boosted_noise_spec,
    circuit_decomposition,
    depolarizing_channel,
    depolarizing_inverse_norm,
    draw_gate_noise,
    invert_pauli_channel,
    noise_spec_from_json,
    noise_spec_to_json,
    pec_cost_estimate,
    two_qubit_biased_channel,
)
from .sim import (
    DensityMatrix,
    StateVector,
    TooLarge,
    exact_density,
    exact_expectation,
    exact_subsystem_purity,
    ideal_statevector,
    partial_trace,
    statevector_expectation,
)
from .shadows import (
    MissingGateLog,
    ShadowFileError,
    ShadowHeader,
    ShadowSet,
    Snapshot,
    iter_shadow,
    read_shadow,
    sample_boosted_snapshot,
    sample_conventional_snapshot,
    sample_pec_snapshot,
    sample_shadow_set,
    snapshot_factor,
    write_shadow,
)
from .estimators import (
    DegenerateProjection,
    Estimate,
    MoMConfig,
    SampleBudget,
    ZneEstimate,
    estimate_pauli,
    estimate_pauli_lightcone,
    estimate_purity,
    median_of_means,
    pair_factor,
    renyi_entropy,
    sample_budget,
    shadow_norm_sq,
    symmetry_verified_expectation,
    zne_extrapolate,
)
from .hamiltonians import (
    HamiltonianSpec,
    build_hamiltonian,
    build_hva_ansatz,
    energy_expectation,
    exact_ground_energy,
    fixture_params,
)

__all__ = [name for name in dir() if not name.startswith("_")]
