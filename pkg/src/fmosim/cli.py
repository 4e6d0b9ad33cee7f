"""Command-line front end.

Subcommands:

* ``compile``: turn a target term (``z:<l>``, ``zz:<l>,<l+1>``, ``xy:<l>,<l+1>``)
  into a pulse schedule, verify it by exact unitary reconstruction, and write
  the schedule JSON plus an exported circuit.
* ``verify``: re-verify a schedule file against the configured simulator
  parameters.
* ``evolve``: run the exciton-chain dynamics and write a trajectory CSV
  (``--method both`` adds a per-time trace-distance column between the
  digital and brute-force trajectories).
* ``channel``: print the report (and circuit, when realizable) of a noise
  channel.

Exit codes: 0 success, 2 usage or configuration error, 3 verification
failure.  All commands are deterministic given their inputs.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import circuit as ci
from .channels import (
    channel_circuit,
    channel_report,
    dephasing_kraus_corrected,
    dephasing_kraus_paper,
    dissipation_kraus,
)
from .compiler import (
    compile_single_z,
    compile_xy,
    compile_zz,
    schedule_from_json,
    schedule_program,
    schedule_to_json,
    verify_schedule,
)
from .dynamics import (
    NoiseParameters,
    evolve_trotter_open,
    initial_density,
    integrate_exact,
)
from .hamiltonians import FmoParameters, NmrParameters, nmr_from_fmo
from .qcore import trace_distance

SCHEMA_VERSION = 1

VERIFY_FAILURE = 3
USAGE_ERROR = 2


class ConfigError(ValueError):
    """Configuration file violates the schema."""


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Validated run configuration binding model, noise and run controls."""

    fmo: FmoParameters
    noise: NoiseParameters
    nmr: NmrParameters
    t_max: float
    dt: float
    method: str
    initial_state: str
    output: dict

    def __eq__(self, other):
        if not isinstance(other, RunConfig):
            return NotImplemented
        return (
            np.array_equal(self.fmo.epsilon, other.fmo.epsilon)
            and np.array_equal(self.fmo.nu, other.fmo.nu)
            and np.array_equal(self.noise.dissipation, other.noise.dissipation)
            and np.array_equal(self.noise.dephasing, other.noise.dephasing)
            and np.array_equal(self.nmr.omega, other.nmr.omega)
            and np.array_equal(self.nmr.j, other.nmr.j)
            and (self.t_max, self.dt, self.method, self.initial_state, self.output)
            == (other.t_max, other.dt, other.method, other.initial_state, other.output)
        )


def _require_keys(doc: dict, where: str, required: set, optional: set = frozenset()):
    if not isinstance(doc, dict):
        raise ConfigError(f"{where} must be an object")
    missing = required - set(doc)
    unknown = set(doc) - required - optional
    if missing:
        raise ConfigError(f"{where} is missing keys {sorted(missing)}")
    if unknown:
        raise ConfigError(f"{where} has unknown keys {sorted(unknown)}")


def _vector(doc, where: str) -> np.ndarray:
    try:
        arr = np.asarray(doc, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{where} must be a flat list of finite numbers") from None
    if arr.ndim != 1 or not np.all(np.isfinite(arr)):
        raise ConfigError(f"{where} must be a flat list of finite numbers")
    return arr


def parse_config(doc: dict) -> RunConfig:
    """Validate a configuration document (rejecting unknown keys)."""
    _require_keys(
        doc,
        "config",
        {"schema_version", "fmo", "noise", "evolution"},
        {"nmr", "output"},
    )
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported schema_version {doc['schema_version']!r} "
            f"(this build reads version {SCHEMA_VERSION})"
        )

    fdoc = doc["fmo"]
    _require_keys(fdoc, "config.fmo", {"epsilon"}, {"nu", "nu_bonds"})
    epsilon = _vector(fdoc["epsilon"], "config.fmo.epsilon")
    n = epsilon.shape[0]
    if ("nu" in fdoc) == ("nu_bonds" in fdoc):
        raise ConfigError("config.fmo needs exactly one of 'nu' or 'nu_bonds'")
    if "nu" in fdoc:
        try:
            nu = np.asarray(fdoc["nu"], dtype=float)
        except (TypeError, ValueError):
            raise ConfigError("config.fmo.nu must be a finite n-by-n matrix") from None
        if nu.shape != (n, n) or not np.all(np.isfinite(nu)):
            raise ConfigError("config.fmo.nu must be a finite n-by-n matrix")
    else:
        bonds = _vector(fdoc["nu_bonds"], "config.fmo.nu_bonds")
        if bonds.shape[0] != n - 1:
            raise ConfigError("config.fmo.nu_bonds must have n-1 entries")
        nu = np.zeros((n, n))
        for l, v in enumerate(bonds):
            nu[l, l + 1] = nu[l + 1, l] = v
    try:
        fmo = FmoParameters(epsilon=epsilon, nu=nu)
    except ValueError as exc:
        raise ConfigError(f"config.fmo: {exc}") from None

    ndoc = doc["noise"]
    _require_keys(ndoc, "config.noise", {"dissipation", "dephasing"})
    try:
        noise = NoiseParameters(
            _vector(ndoc["dissipation"], "config.noise.dissipation"),
            _vector(ndoc["dephasing"], "config.noise.dephasing"),
        )
    except ValueError as exc:
        raise ConfigError(f"config.noise: {exc}") from None
    if noise.n_sites != n:
        raise ConfigError("config.noise rate vectors must match the site count")

    if "nmr" in doc:
        mdoc = doc["nmr"]
        _require_keys(mdoc, "config.nmr", {"omega", "j"})
        try:
            nmr = NmrParameters(
                omega=_vector(mdoc["omega"], "config.nmr.omega"),
                j=_vector(mdoc["j"], "config.nmr.j"),
            )
        except ValueError as exc:
            raise ConfigError(f"config.nmr: {exc}") from None
        if nmr.n_qubits != n:
            raise ConfigError("config.nmr.omega must match the site count")
    else:
        for j, l in fmo.coupled_pairs():
            if l != j + 1:
                raise ConfigError(
                    "config.nmr can only be derived for chain couplings; "
                    "add an explicit nmr block"
                )
        nmr = nmr_from_fmo(fmo)

    edoc = doc["evolution"]
    _require_keys(edoc, "config.evolution", {"t_max", "dt", "method", "initial_state"})
    t_max, dt = float(edoc["t_max"]), float(edoc["dt"])
    if not (math.isfinite(t_max) and t_max >= 0):
        raise ConfigError("config.evolution.t_max must be finite and nonnegative")
    if not (math.isfinite(dt) and dt > 0):
        raise ConfigError("config.evolution.dt must be finite and positive")
    method = edoc["method"]
    if method not in ("exact", "trotter", "both"):
        raise ConfigError("config.evolution.method must be exact, trotter or both")
    initial_state = str(edoc["initial_state"])

    output = doc.get("output", {})
    _require_keys(
        output, "config.output", set(), {"trajectory", "states", "schedule", "circuit"}
    )
    if any(not isinstance(v, str) for v in output.values()):
        raise ConfigError("config.output values must be path strings")

    return RunConfig(fmo, noise, nmr, t_max, dt, method, initial_state, dict(output))


def emit_config(cfg: RunConfig) -> dict:
    """Inverse of parse_config: a JSON-ready document."""
    return {
        "schema_version": SCHEMA_VERSION,
        "fmo": {
            "epsilon": [float(x) for x in cfg.fmo.epsilon],
            "nu": [[float(x) for x in row] for row in cfg.fmo.nu],
        },
        "noise": {
            "dissipation": [float(x) for x in cfg.noise.dissipation],
            "dephasing": [float(x) for x in cfg.noise.dephasing],
        },
        "nmr": {
            "omega": [float(x) for x in cfg.nmr.omega],
            "j": [float(x) for x in cfg.nmr.j],
        },
        "evolution": {
            "t_max": cfg.t_max,
            "dt": cfg.dt,
            "method": cfg.method,
            "initial_state": cfg.initial_state,
        },
        "output": dict(cfg.output),
    }


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return parse_config(doc)


def _write_or_print(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_target(spec: str) -> tuple[str, tuple[int, ...]]:
    kind, _, sites_s = spec.partition(":")
    try:
        sites = tuple(int(t) for t in sites_s.split(","))
    except ValueError:
        raise ConfigError(f"malformed target {spec!r}") from None
    if kind == "z" and len(sites) == 1:
        return kind, sites
    if kind in ("zz", "xy") and len(sites) == 2:
        return kind, sites
    raise ConfigError(
        f"malformed target {spec!r}; expected z:<l>, zz:<l>,<l+1> or xy:<l>,<l+1>"
    )


def cmd_compile(args) -> int:
    cfg = load_config(args.config)
    kind, sites = _parse_target(args.target)
    try:
        if kind == "z":
            sched = compile_single_z(sites[0], args.tau, cfg.nmr)
        elif kind == "zz":
            sched = compile_zz(sites, args.tau, cfg.nmr)
        else:
            sched = compile_xy(sites, args.tau, cfg.nmr)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    report = verify_schedule(sched, cfg.nmr)
    _write_or_print(
        schedule_to_json(sched), args.out or cfg.output.get("schedule")
    )
    circuit_text = ci.export_text(schedule_program(sched, cfg.nmr, args.lowering))
    circuit_path = args.circuit or cfg.output.get("circuit")
    if circuit_path:
        _write_or_print(circuit_text, circuit_path)
    print(report.summary())
    return 0 if report.passed else VERIFY_FAILURE


def cmd_verify(args) -> int:
    cfg = load_config(args.config)
    try:
        with open(args.schedule, encoding="utf-8") as fh:
            sched = schedule_from_json(fh.read())
    except (OSError, json.JSONDecodeError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot parse schedule {args.schedule}: {exc}") from None
    report = verify_schedule(sched, cfg.nmr, lowering=args.lowering)
    print(report.summary())
    return 0 if report.passed else VERIFY_FAILURE


def cmd_evolve(args) -> int:
    cfg = load_config(args.config)
    method = args.method or cfg.method
    n = cfg.fmo.n_sites
    try:
        rho0 = initial_density(cfg.initial_state, n)
    except ValueError as exc:
        raise ConfigError(f"config.evolution.initial_state: {exc}") from None

    extra = None
    if method == "exact":
        traj = integrate_exact(
            rho0, cfg.fmo, cfg.noise, cfg.t_max, cfg.dt, args.record_every
        )
    elif method == "trotter":
        traj = evolve_trotter_open(
            rho0, cfg.fmo, cfg.noise, cfg.t_max, cfg.dt, args.lowering, args.record_every
        )
    else:
        traj = evolve_trotter_open(
            rho0, cfg.fmo, cfg.noise, cfg.t_max, cfg.dt, args.lowering, args.record_every
        )
        exact = integrate_exact(
            rho0, cfg.fmo, cfg.noise, cfg.t_max, cfg.dt, args.record_every
        )
        extra = {
            "trace_distance": np.array(
                [trace_distance(a, b) for a, b in zip(traj.states, exact.states)]
            )
        }
    _write_or_print(traj.to_csv(extra_columns=extra), args.out or cfg.output.get("trajectory"))
    states_path = args.states or cfg.output.get("states")
    if states_path:
        _write_or_print(traj.to_state_json(), states_path)
    return 0


def cmd_channel(args) -> int:
    makers = {
        "dissipation": dissipation_kraus,
        "dephasing-paper": dephasing_kraus_paper,
        "dephasing-corrected": dephasing_kraus_corrected,
    }
    try:
        ch = makers[args.kind](args.rate, args.time)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    report = channel_report(ch)
    try:
        report["circuit"] = ci.export_text(channel_circuit(ch))
    except ValueError:
        report["circuit"] = None
        report["circuit_note"] = (
            "no ancilla-circuit realization: the channel is outside the "
            "diagonal/antidiagonal two-Kraus family"
        )
    _write_or_print(json.dumps(report, indent=2) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fmosim",
        description="Pulse compiler and open-system simulator for the exciton chain.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a target term into a pulse schedule")
    p.add_argument("target", help="z:<l>, zz:<l>,<l+1> or xy:<l>,<l+1>")
    p.add_argument("--tau", type=float, required=True, help="target evolution time")
    p.add_argument("--config", required=True, help="run configuration JSON")
    p.add_argument("--out", help="schedule JSON path (default: config output or stdout)")
    p.add_argument("--circuit", help="exported circuit text path")
    p.add_argument(
        "--lowering",
        choices=("gates", "opaque"),
        default="gates",
        help="circuit export style (verification always reconstructs exactly)",
    )
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("verify", help="re-verify a schedule file")
    p.add_argument("schedule", help="schedule JSON path")
    p.add_argument("--config", required=True)
    p.add_argument("--lowering", choices=("opaque", "gates"), default="opaque")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("evolve", help="run the open-system dynamics")
    p.add_argument("--config", required=True)
    p.add_argument("--method", choices=("exact", "trotter", "both"))
    p.add_argument(
        "--lowering",
        choices=("dense-blocks", "compiled-pulses"),
        default="dense-blocks",
        help="step-unitary construction for the digital method",
    )
    p.add_argument("--record-every", type=int, default=1, dest="record_every")
    p.add_argument("--out", help="trajectory CSV path (default: config output or stdout)")
    p.add_argument("--states", help="full-state JSON dump path")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("channel", help="report a single-site noise channel")
    p.add_argument(
        "kind", choices=("dissipation", "dephasing-paper", "dephasing-corrected")
    )
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--time", type=float, required=True)
    p.add_argument("--out", help="report JSON path (default stdout)")
    p.set_defaults(func=cmd_channel)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
