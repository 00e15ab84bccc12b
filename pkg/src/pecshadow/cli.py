"""Command-line interface.

Subcommands: sample (produce a shadow file), estimate (observables/purities
from a shadow file), experiment (full pipelines), bounds (sample budgets and
shadow norms), oracle (exact reference values).

Exit codes: 0 success, 2 configuration error, 3 numeric error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .circuits import Circuit, UnknownGate
from .estimators import (
    MoMConfig,
    estimate_pauli,
    estimate_purity,
    renyi_entropy,
    sample_budget,
    shadow_norm_sq,
)
from .experiments import (
    CSV_COLUMNS,
    ConfigError,
    ExperimentConfig,
    _fmt,
    run_experiment,
    write_csv,
)
from .noise import (
    BoostBelowNative,
    NoiseSpec,
    NonPhysicalBoost,
    ReadoutModel,
    SingularChannel,
    noise_spec_from_json,
)
from .paulis import PauliSizeMismatch, PauliString
from .shadows import (
    MissingGateLog,
    ShadowFileError,
    read_shadow,
    sample_shadow_set,
    write_shadow,
)
from .sim import TooLarge, exact_density, exact_expectation, exact_subsystem_purity

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

_NUMERIC_ERRORS = (
    SingularChannel,
    BoostBelowNative,
    NonPhysicalBoost,
    TooLarge,
    ArithmeticError,
)
_CONFIG_ERRORS = (
    ConfigError,
    UnknownGate,
    PauliSizeMismatch,
    MissingGateLog,
    ValueError,
    KeyError,
    json.JSONDecodeError,
)


def _load_circuit(path: str) -> Circuit:
    with open(path) as f:
        return Circuit.from_json(f.read())


def _load_noise(path: str | None, n_qubits: int) -> NoiseSpec:
    if path is None:
        return NoiseSpec.from_dict({}, ReadoutModel.noiseless(n_qubits))
    with open(path) as f:
        return noise_spec_from_json(f.read(), n_qubits)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=0, help="root random seed")
    p.add_argument("--threads", type=int, default=1, help="sampling worker processes")
    p.add_argument("--out", default=None, help="output path")
    p.add_argument("--config", default=None, help="JSON config file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pecshadow", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample a shadow file from a noisy circuit")
    _add_common(p)
    p.add_argument("--circuit", required=True, help="circuit JSON file")
    p.add_argument("--noise", default=None, help="noise spec JSON file")
    p.add_argument("--mode", choices=("pec", "conventional", "boosted"), default="pec")
    p.add_argument("--n", type=int, required=True, help="number of snapshots")
    p.add_argument("--p", type=float, default=None, help="boosted error rate per gate")

    p = sub.add_parser("estimate", help="estimate observables or purities from a shadow file")
    _add_common(p)
    p.add_argument("shadow", help="shadow JSONL file")
    p.add_argument("--observable", action="append", default=[],
                   help="Pauli string, e.g. 'Z0 Z1' or 'XIZ' (repeatable)")
    p.add_argument("--purity", action="append", default=[],
                   help="comma-separated subsystem qubits, e.g. '0,1' (repeatable)")
    p.add_argument("--k", type=int, default=1, help="median-of-means batch count (odd)")
    p.add_argument("--no-readout-mitigation", action="store_true")
    p.add_argument("--circuit", default=None,
                   help="circuit JSON file enabling light-cone reduction")

    p = sub.add_parser("experiment", help="run a full experiment pipeline")
    _add_common(p)

    p = sub.add_parser("bounds", help="sample budgets and shadow norms")
    _add_common(p)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--M", type=int, required=True, dest="m_observables")
    p.add_argument("--g-norm", type=float, default=1.0)
    p.add_argument("--q", type=int, required=True, help="observable weight")
    p.add_argument("--alpha", type=float, default=0.0, help="symmetric readout rate")

    p = sub.add_parser("oracle", help="exact expectation values / purities")
    _add_common(p)
    p.add_argument("--circuit", required=True)
    p.add_argument("--noise", default=None)
    p.add_argument("--state", choices=("ideal", "noisy"), default="ideal")
    p.add_argument("--observable", action="append", default=[])
    p.add_argument("--purity", action="append", default=[])
    return parser


def _emit(rows, out_path, experiment):
    table = [dict(r, experiment=experiment) for r in rows]
    if out_path:
        write_csv(table, out_path)
    else:
        import csv

        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in table:
            w.writerow([_fmt(r.get(c)) for c in CSV_COLUMNS])


def _cmd_sample(args) -> int:
    circuit = _load_circuit(args.circuit)
    noise = _load_noise(args.noise, circuit.n_qubits)
    if args.out is None:
        raise ConfigError("sample requires --out")
    s = sample_shadow_set(
        circuit, noise, args.mode, args.n, seed=args.seed,
        boost_p=args.p, n_workers=args.threads,
    )
    write_shadow(s, args.out)
    return EXIT_OK


def _cmd_estimate(args) -> int:
    s = read_shadow(args.shadow)
    if not args.observable and not args.purity:
        raise ConfigError("estimate needs --observable and/or --purity")
    cfg = MoMConfig(args.k)
    mitigate = not args.no_readout_mitigation
    circuit = _load_circuit(args.circuit) if args.circuit else None
    rows = []
    for text in args.observable:
        p = PauliString.parse(text, s.header.n_qubits)
        if circuit is not None and s.header.mode == "pec" and s.glog_idx is not None:
            from .estimators import estimate_pauli_lightcone

            e = estimate_pauli_lightcone(s, p, circuit, cfg, mitigate)
        else:
            e = estimate_pauli(s, p, cfg, mitigate)
        rows.append({
            "N_s": len(s), "estimator": s.header.mode, "observable": text,
            "value": e.value, "stderr": e.stderr, "bound": None,
            "oracle_value": None, "abs_error": None,
        })
    for text in args.purity:
        qs = tuple(int(t) for t in text.split(","))
        e = estimate_purity(s, qs, cfg, mitigate)
        rows.append({
            "N_s": len(s), "estimator": s.header.mode, "observable": f"purity:{text}",
            "value": e.value, "stderr": e.stderr, "bound": None,
            "oracle_value": None, "abs_error": None,
        })
        rows.append({
            "N_s": len(s), "estimator": s.header.mode, "observable": f"renyi:{text}",
            "value": renyi_entropy(e.value, len(qs)), "stderr": None, "bound": None,
            "oracle_value": None, "abs_error": None,
        })
    _emit(rows, args.out, "estimate")
    return EXIT_OK


def _cmd_experiment(args) -> int:
    if args.config is None:
        raise ConfigError("experiment requires --config")
    with open(args.config) as f:
        cfg = ExperimentConfig.from_json(f.read())
    overrides = {"seed": args.seed, "threads": args.threads}
    if args.out:
        overrides["out_csv"] = args.out
    import dataclasses

    cfg = dataclasses.replace(cfg, **overrides)
    csv_path, manifest_path = run_experiment(cfg)
    print(csv_path)
    print(manifest_path)
    return EXIT_OK


def _cmd_bounds(args) -> int:
    sn2 = shadow_norm_sq(args.q, args.alpha)
    budget = sample_budget(args.epsilon, args.delta, args.m_observables, args.g_norm, sn2)
    rows = [
        {"N_s": budget.n_total, "estimator": "budget", "observable": "N_batch",
         "value": budget.n_batch, "stderr": 0.0, "oracle_value": None,
         "abs_error": None, "bound": None},
        {"N_s": budget.n_total, "estimator": "budget", "observable": "K",
         "value": budget.k, "stderr": 0.0, "oracle_value": None,
         "abs_error": None, "bound": None},
        {"N_s": budget.n_total, "estimator": "budget", "observable": "N_total",
         "value": budget.n_total, "stderr": 0.0, "oracle_value": None,
         "abs_error": None, "bound": None},
        {"N_s": budget.n_total, "estimator": "budget", "observable": "shadow_norm_sq",
         "value": sn2, "stderr": 0.0, "oracle_value": None,
         "abs_error": None, "bound": None},
    ]
    _emit(rows, args.out, "bounds")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    circuit = _load_circuit(args.circuit)
    noise = _load_noise(args.noise, circuit.n_qubits)
    if args.state == "noisy":
        rho = exact_density(circuit, noise)
    else:
        rho = exact_density(
            circuit, NoiseSpec.from_dict({}, ReadoutModel.noiseless(circuit.n_qubits))
        )
    rows = []
    for text in args.observable:
        p = PauliString.parse(text, circuit.n_qubits)
        rows.append({
            "N_s": 0, "estimator": f"oracle-{args.state}", "observable": text,
            "value": exact_expectation(rho, p), "stderr": 0.0,
            "oracle_value": None, "abs_error": None, "bound": None,
        })
    for text in args.purity:
        qs = tuple(int(t) for t in text.split(","))
        rows.append({
            "N_s": 0, "estimator": f"oracle-{args.state}", "observable": f"purity:{text}",
            "value": exact_subsystem_purity(rho, qs), "stderr": 0.0,
            "oracle_value": None, "abs_error": None, "bound": None,
        })
    if not rows:
        raise ConfigError("oracle needs --observable and/or --purity")
    _emit(rows, args.out, "oracle")
    return EXIT_OK


_COMMANDS = {
    "sample": _cmd_sample,
    "estimate": _cmd_estimate,
    "experiment": _cmd_experiment,
    "bounds": _cmd_bounds,
    "oracle": _cmd_oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except _NUMERIC_ERRORS as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ShadowFileError as exc:
        print(f"shadow file error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except _CONFIG_ERRORS as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
