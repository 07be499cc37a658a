"""Command-line surface: verify models, sweep probe sizes, optimize, emit demos.

This module owns the on-disk schemas. Complex scalars are two-element
[re, im] arrays, kets are arrays of those, matrices are nested row-major
arrays, and infinities are serialized as the string "inf". Exit codes are
0 (all applicable inequalities hold), 1 (input problem), and 2 (an
inequality that is a theorem failed, the regression alarm).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional

import numpy as np

from . import __version__
from .bounds import (
    ACL_GATE_TOL,
    ACL_PRECONDITION_TOL,
    BoundReport,
    ConservationPair,
    INEQUALITY_SLACK,
    YANASE_PRECONDITION_TOL,
    bound_report,
)
from .linalg import (
    DimensionMismatch,
    HERMITIAN_TOL,
    Ket,
    Operator,
    StructureError,
    TheoremViolation,
    UNITARY_TOL,
)
from .measurement import MeasurementModel
from .optimizer import (
    CoherentAmplitudes,
    OptimizerConfig,
    commutant_basis,
    hermitian_coordinates,
    optimize_noise,
    oscillator_probe,
    spin_ladder_probe,
    sweep_probe_size,
)
from .spin import (
    named_state,
    spin_operators,
    swap_demo_model,
    trivial_demo_model,
    yw_sample_model,
)

SCHEMA_VERSION = "v1"

TOLERANCES = {
    "inequality_slack": INEQUALITY_SLACK,
    "acl_gate": ACL_GATE_TOL,
    "acl_precondition": ACL_PRECONDITION_TOL,
    "yanase_precondition": YANASE_PRECONDITION_TOL,
    "hermitian": HERMITIAN_TOL,
    "unitary": UNITARY_TOL,
}


class CliInputError(ValueError):
    """Any problem with user input; always maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliInputError(message)


# ---------------------------------------------------------------------------
# JSON encoding


def _complex_to_json(z: complex):
    return [float(np.real(z)), float(np.imag(z))]


def _complex_from_json(value, path: str) -> complex:
    if not (isinstance(value, (list, tuple)) and len(value) == 2
            and all(isinstance(x, (int, float)) for x in value)):
        raise CliInputError(f"{path}: expected a [re, im] pair, got {value!r}")
    return complex(value[0], value[1])


def ket_to_json(ket: Ket):
    return [_complex_to_json(z) for z in ket.amplitudes]


def ket_from_json(value, path: str, normalized: bool = True) -> Ket:
    if not isinstance(value, list) or not value:
        raise CliInputError(f"{path}: expected a nonempty array of [re, im] pairs")
    amps = [_complex_from_json(z, f"{path}[{k}]") for k, z in enumerate(value)]
    try:
        return Ket(np.array(amps), normalized=normalized)
    except (StructureError, ValueError) as exc:
        raise CliInputError(f"{path}: {exc}") from exc


def operator_to_json(op: Operator):
    return [[_complex_to_json(z) for z in row] for row in op.matrix]


def operator_from_json(value, path: str, structure: frozenset) -> Operator:
    if not isinstance(value, list) or not value:
        raise CliInputError(f"{path}: expected a nonempty nested array")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != len(value):
            raise CliInputError(f"{path}: row {i} does not make the matrix square")
        rows.append([_complex_from_json(z, f"{path}[{i}][{j}]")
                     for j, z in enumerate(row)])
    try:
        return Operator(np.array(rows), structure)
    except (StructureError, ValueError) as exc:
        raise CliInputError(f"{path}: {exc}") from exc


def _sanitize(value):
    """Replace non-finite floats by their sentinel strings, recursively."""
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, dict):
        return {k: _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(v) for v in value]
    return value


def _dump_json(payload) -> str:
    return json.dumps(_sanitize(payload), indent=2) + "\n"


def _fmt(x: float) -> str:
    """CSV number format: 17 significant digits, locale independent."""
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.17g}"


# ---------------------------------------------------------------------------
# Model files


def model_to_dict(model: MeasurementModel, pair: ConservationPair,
                  name: str = "", description: str = "") -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "object_dim": model.object_dim,
        "probe_dim": model.probe_dim,
        "A": operator_to_json(model.A),
        "L1": operator_to_json(pair.L1),
        "L2": operator_to_json(pair.L2),
        "M": operator_to_json(model.M),
        "U": operator_to_json(model.U),
        "xi": ket_to_json(model.xi),
        "metadata": {"name": name, "description": description},
    }


def model_from_dict(doc: dict):
    if not isinstance(doc, dict):
        raise CliInputError("model file must contain a JSON object")
    if doc.get("schema") != SCHEMA_VERSION:
        raise CliInputError(f"schema: expected {SCHEMA_VERSION!r}, got {doc.get('schema')!r}")
    for key in ("object_dim", "probe_dim", "A", "L1", "L2", "M", "U", "xi"):
        if key not in doc:
            raise CliInputError(f"{key}: missing required field")
    object_dim = doc["object_dim"]
    probe_dim = doc["probe_dim"]
    if not isinstance(object_dim, int) or not isinstance(probe_dim, int):
        raise CliInputError("object_dim/probe_dim: expected integers")
    hermitian = frozenset({"hermitian"})
    a = operator_from_json(doc["A"], "A", hermitian)
    l1 = operator_from_json(doc["L1"], "L1", hermitian)
    l2 = operator_from_json(doc["L2"], "L2", hermitian)
    m = operator_from_json(doc["M"], "M", hermitian)
    u = operator_from_json(doc["U"], "U", frozenset({"unitary"}))
    xi = ket_from_json(doc["xi"], "xi")
    try:
        model = MeasurementModel(object_dim, probe_dim, xi, u, m, a)
        pair = ConservationPair(L1=l1, L2=l2)
        if l1.dim != object_dim:
            raise DimensionMismatch(f"L1 has dim {l1.dim}, expected object_dim {object_dim}")
        if l2.dim != probe_dim:
            raise DimensionMismatch(f"L2 has dim {l2.dim}, expected probe_dim {probe_dim}")
    except (DimensionMismatch, StructureError, ValueError) as exc:
        raise CliInputError(str(exc)) from exc
    metadata = doc.get("metadata") or {}
    return model, pair, metadata


def load_model_file(path: str):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise CliInputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliInputError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return model_from_dict(doc)


def yw_model_to_dict(yw) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "kind": "yw_model",
        "probe_dim": yw.probe_dim,
        "xi": ket_to_json(yw.xi),
        "xi_plus": ket_to_json(yw.xi_plus),
        "xi_minus": ket_to_json(yw.xi_minus),
        "eta_plus": ket_to_json(yw.eta_plus),
        "eta_minus": ket_to_json(yw.eta_minus),
        "M": operator_to_json(yw.M),
        "metadata": {"name": "yw-sample",
                     "description": "partial interaction data with eps_y^2 = 0.1"},
    }


def _parse_state(spec: str, object_dim: int) -> Ket:
    try:
        return named_state(spec)
    except ValueError:
        pass
    try:
        value = json.loads(spec)
    except json.JSONDecodeError as exc:
        raise CliInputError(
            f"--state must be a named state or a JSON ket, got {spec!r}") from exc
    ket = ket_from_json(value, "--state")
    if ket.dim != object_dim:
        raise CliInputError(f"--state: ket has dim {ket.dim}, expected {object_dim}")
    return ket


# ---------------------------------------------------------------------------
# verify


_REPORT_FIELDS = (
    "eps_sq", "fundamental_bound", "yanase_bound", "spin_bound",
    "acl_residual", "yanase_residual", "commutator_identity_residual",
    "uncertainty_lhs", "uncertainty_rhs",
)


def report_to_dict(report: BoundReport, state_spec: str, name: str,
                   seed: Optional[int] = None) -> dict:
    payload = {"schema": SCHEMA_VERSION, "model_name": name, "state": state_spec}
    for key in _REPORT_FIELDS:
        payload[key] = getattr(report, key)
    payload["violations"] = list(report.violations())
    payload["environment"] = {
        "tool_version": __version__,
        "seed": seed,
        "tolerances": dict(TOLERANCES),
    }
    return payload


def _csv_field(value: str) -> str:
    if any(c in value for c in ',"\n'):
        return '"' + value.replace('"', '""') + '"'
    return value


def _report_csv(report: BoundReport, state_spec: str, name: str) -> str:
    header = ["model_name", "state", *_REPORT_FIELDS, "violations"]
    row = [_csv_field(name), _csv_field(state_spec)]
    for key in _REPORT_FIELDS:
        value = getattr(report, key)
        row.append("" if value is None else _fmt(value))
    row.append("|".join(report.violations()))
    return ",".join(header) + "\n" + ",".join(row) + "\n"


def cmd_verify(args) -> int:
    model, pair, metadata = load_model_file(args.model)
    psi = _parse_state(args.state, model.object_dim)
    report = bound_report(model, pair, psi)
    name = str(metadata.get("name", ""))
    if args.csv:
        sys.stdout.write(_report_csv(report, args.state, name))
    else:
        sys.stdout.write(_dump_json(report_to_dict(report, args.state, name)))
    return 2 if report.violations() else 0


# ---------------------------------------------------------------------------
# sweep


def cmd_sweep(args) -> int:
    if args.family == "spin_ladder":
        try:
            sizes = [int(s) for s in args.sizes.split(",") if s]
        except ValueError as exc:
            raise CliInputError(f"--sizes: {exc}") from exc
    else:
        try:
            sizes = [float(s) for s in args.sizes.split(",") if s]
        except ValueError as exc:
            raise CliInputError(f"--sizes: {exc}") from exc
    if not sizes:
        raise CliInputError("--sizes: need at least one size")
    config = OptimizerConfig(restarts=args.restarts, max_iters=args.max_iters,
                             seed=args.seed)
    rows = sweep_probe_size(args.family, sizes, config, n_max=args.n_max)
    lines = ["family,size,var_mz,bound,achieved,gap_ratio,seed"]
    for row in rows:
        if row.error:
            print(f"size {_fmt(row.size)} failed: {row.error}", file=sys.stderr)
        lines.append(",".join([
            row.family, _fmt(row.size), _fmt(row.var_mz), _fmt(row.bound),
            _fmt(row.achieved), _fmt(row.gap_ratio), str(row.seed),
        ]))
    text = "\n".join(lines) + "\n"
    try:
        with open(args.out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    except OSError as exc:
        raise CliInputError(f"cannot write {args.out}: {exc}") from exc
    return 0


# ---------------------------------------------------------------------------
# optimize


_NAMED_OBSERVABLES = {"s_x": 0, "s_y": 1, "s_z": 2}


def _observable_from_config(value, path: str) -> Operator:
    if isinstance(value, str):
        if value not in _NAMED_OBSERVABLES:
            raise CliInputError(
                f"{path}: unknown observable {value!r}, expected one of "
                f"{sorted(_NAMED_OBSERVABLES)} or a matrix")
        return spin_operators()[_NAMED_OBSERVABLES[value]]
    return operator_from_json(value, path, frozenset({"hermitian"}))


def _swap_theta(basis) -> np.ndarray:
    if basis.conserved.dim != 4:
        raise CliInputError("theta0 'swap' needs a two-qubit composite space")
    swap = np.zeros((4, 4))
    swap[0, 0] = swap[2, 1] = swap[1, 2] = swap[3, 3] = 1.0
    h = Operator.hermitian((np.pi / 2.0) * (np.eye(4) - swap))
    try:
        return hermitian_coordinates(basis, h)
    except ValueError as exc:
        raise CliInputError(f"theta0 'swap' is not conservative here: {exc}") from exc


def _load_optimize_config(path: str):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise CliInputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliInputError(
            f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise CliInputError("config must be a JSON object")

    known = {"seed", "restarts", "max_iters", "grad_step", "tol", "objective",
             "optimize_xi", "theta0", "psi", "object", "probe"}
    unknown = set(doc) - known
    if unknown:
        raise CliInputError(f"unknown config fields: {sorted(unknown)}")

    obj = doc.get("object") or {}
    a = _observable_from_config(obj.get("A", "s_x"), "object.A")
    l1 = _observable_from_config(obj.get("L1", "s_z"), "object.L1")

    probe = doc.get("probe") or {"family": "spin_ladder", "size": 2}
    if "family" in probe:
        if probe["family"] == "spin_ladder":
            l2, m, xi = spin_ladder_probe(int(probe.get("size", 2)))
        elif probe["family"] == "oscillator":
            alpha = _complex_from_json(probe.get("alpha", [0.0, 0.0]), "probe.alpha")
            beta = _complex_from_json(probe.get("beta", [0.0, 0.0]), "probe.beta")
            try:
                l2, m, xi = oscillator_probe(int(probe.get("n_max", 2)),
                                             CoherentAmplitudes(alpha, beta))
            except ValueError as exc:
                raise CliInputError(f"probe: {exc}") from exc
        else:
            raise CliInputError(f"probe.family: unknown family {probe['family']!r}")
    else:
        for key in ("L2", "M", "xi"):
            if key not in probe:
                raise CliInputError(f"probe.{key}: missing (explicit probes need L2, M, xi)")
        l2 = operator_from_json(probe["L2"], "probe.L2", frozenset({"hermitian"}))
        m = operator_from_json(probe["M"], "probe.M", frozenset({"hermitian"}))
        xi = ket_from_json(probe["xi"], "probe.xi")

    pair = ConservationPair(L1=l1, L2=l2)
    psi_spec = doc.get("psi", "alpha_y")
    psi = named_state(psi_spec) if isinstance(psi_spec, str) \
        else ket_from_json(psi_spec, "psi")
    if psi.dim != a.dim:
        raise CliInputError(f"psi: ket has dim {psi.dim}, expected {a.dim}")

    theta0 = doc.get("theta0", "zero")
    if theta0 == "zero":
        theta0_value = None
    elif theta0 == "swap":
        theta0_value = tuple(_swap_theta(commutant_basis(pair.total())))
    elif isinstance(theta0, list):
        theta0_value = tuple(float(t) for t in theta0)
    else:
        raise CliInputError(f"theta0: expected 'zero', 'swap', or a list, got {theta0!r}")

    try:
        config = OptimizerConfig(
            restarts=int(doc.get("restarts", 16)),
            max_iters=int(doc.get("max_iters", 80)),
            grad_step=float(doc.get("grad_step", 1e-5)),
            tol=float(doc.get("tol", 1e-10)),
            seed=int(doc.get("seed", 0)),
            objective=str(doc.get("objective", "state")),
            optimize_xi=bool(doc.get("optimize_xi", False)),
            theta0=theta0_value,
        )
    except (TypeError, ValueError) as exc:
        raise CliInputError(f"config: {exc}") from exc
    return a, pair, m, xi, psi, config


def cmd_optimize(args) -> int:
    a, pair, m, xi, psi, config = _load_optimize_config(args.config)
    run = optimize_noise(a, pair, m, xi, psi, config)
    payload = {
        "schema": SCHEMA_VERSION,
        "seed": run.seed,
        "objective": config.objective,
        "final_objective": run.final_objective,
        "bound_value": run.bound_value,
        "converged": run.converged,
        "theta": [float(t) for t in run.theta],
        "objective_trace": list(run.objective_trace),
        "restart_final_objectives": list(run.restart_final_objectives),
        "result_model": model_to_dict(run.result_model, pair, name="optimized"),
        "environment": {
            "tool_version": __version__,
            "seed": run.seed,
            "tolerances": dict(TOLERANCES),
        },
    }
    text = _dump_json(payload)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="") as handle:
                handle.write(text)
        except OSError as exc:
            raise CliInputError(f"cannot write {args.out}: {exc}") from exc
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# demo


def cmd_demo(args) -> int:
    if args.name == "swap":
        model, pair = swap_demo_model()
        doc = model_to_dict(model, pair, name="swap-demo",
                            description="conservative zero-noise readout that "
                                        "violates the Yanase condition")
    elif args.name == "trivial":
        model, pair = trivial_demo_model()
        doc = model_to_dict(model, pair, name="trivial-demo",
                            description="identity interaction with a null record")
    elif args.name == "yw-sample":
        doc = yw_model_to_dict(yw_sample_model())
    else:
        raise CliInputError(
            f"unknown demo {args.name!r}; available: swap, trivial, yw-sample")
    sys.stdout.write(_dump_json(doc))
    return 0


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> _Parser:
    parser = _Parser(prog="waylimit",
                     description="noise bounds for quantum measurements under "
                                 "additive conservation laws")
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="evaluate every bound on a model file")
    p_verify.add_argument("model", help="path to a model JSON file")
    p_verify.add_argument("--state", default="alpha_y",
                          help="named state (alpha_x..beta_z) or inline JSON ket")
    p_verify.add_argument("--csv", action="store_true", help="emit a CSV row instead of JSON")
    p_verify.add_argument("--json", dest="as_json", action="store_true",
                          help="emit JSON (the default)")
    p_verify.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="bound vs achieved error over probe sizes")
    p_sweep.add_argument("--family", required=True, choices=["spin_ladder", "oscillator"])
    p_sweep.add_argument("--sizes", required=True,
                         help="comma separated sizes (ladder levels, or coherent "
                              "|alpha|^2+|beta|^2)")
    p_sweep.add_argument("--out", required=True, help="output CSV path")
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--restarts", type=int, default=4)
    p_sweep.add_argument("--max-iters", type=int, default=40)
    p_sweep.add_argument("--n-max", type=int, default=2,
                         help="oscillator cutoff used when building full interactions")
    p_sweep.set_defaults(func=cmd_sweep)

    p_opt = sub.add_parser("optimize", help="minimize the noise over conservative interactions")
    p_opt.add_argument("config", help="path to an optimizer config JSON file")
    p_opt.add_argument("--out", default=None, help="output JSON path (stdout if omitted)")
    p_opt.set_defaults(func=cmd_optimize)

    p_demo = sub.add_parser("demo", help="print a built-in model file")
    p_demo.add_argument("name", help="swap, trivial, or yw-sample")
    p_demo.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except TheoremViolation as exc:
        print(f"theorem violation: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # the exit contract allows {0, 1, 2} only
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
