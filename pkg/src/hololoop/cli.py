"""Batch front end.

Usage examples::

    hololoop synth --gate pauli_z --variant doubled
    hololoop verify --gate hadamard --wilson-steps 4096
    hololoop simulate --gate cnot --T 50,100,200 --format csv --out sweep.csv
    hololoop embed --gate cnot --n-main 3 --targets 1,2
    hololoop coeffs --gate hadamard --variant minimal --eigvec 1 --format csv
    hololoop run --config job.json

Every job is described by a :class:`JobConfig`; command-line flags override
fields of an optional ``--config`` JSON file.  Reports are JSON with sorted
keys and complex numbers as ``{"re": x, "im": y}``.  Apart from the
``timing`` block, identical jobs give byte-identical reports.

Exit codes: 0 all checks passed, 1 invalid input, 2 a check failed,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import adiasim, arrayembed, coeffora, gatelog, holocheck, kernels, loopsynth
from .errors import LocalityViolation, NumericalError, ValidationError

COMMANDS = ("synth", "verify", "simulate", "embed", "coeffs", "report")
VARIANTS = ("minimal", "doubled")
FORMATS = ("json", "csv")
CSV_COMMANDS = ("simulate", "coeffs")

DEFAULT_VARIANT = "doubled"
DEFAULT_EIGVEC = 0
DEFAULT_WILSON_STEPS = 4096
DEFAULT_T_LIST = [50.0, 100.0, 200.0, 400.0]
DEFAULT_STEPS_PER_TIME = adiasim.STEPS_PER_TIME
DEFAULT_GRID = 101
DEFAULT_COEFF_TERMS = 12
DEFAULT_TOL_CLOSURE = 1e-9
TOL_WILSON_ONE_QUBIT = 2e-3
TOL_WILSON_TWO_QUBIT = 5e-3
DEFAULT_TOL_FIDELITY = 0.97
DEFAULT_TOL_LEAKAGE = 0.03
ENVELOPE_SLACK = 0.01

EXIT_OK, EXIT_INVALID, EXIT_CHECK, EXIT_NUMERICAL = 0, 1, 2, 3


# ---------------------------------------------------------------- config


@dataclass
class Layout:
    n_main: int
    targets: List[int]


@dataclass
class Tolerances:
    closure: float = DEFAULT_TOL_CLOSURE
    wilson: Optional[float] = None  # None: by gate size
    fidelity: float = DEFAULT_TOL_FIDELITY
    leakage: float = DEFAULT_TOL_LEAKAGE


@dataclass
class Numeric:
    wilson_steps: int = DEFAULT_WILSON_STEPS
    T_list: List[float] = field(default_factory=lambda: list(DEFAULT_T_LIST))
    sim_steps: Optional[int] = None  # None: steps_per_time * T
    steps_per_time: float = DEFAULT_STEPS_PER_TIME
    grid: int = DEFAULT_GRID
    coeff_terms: int = DEFAULT_COEFF_TERMS
    tolerances: Tolerances = field(default_factory=Tolerances)


@dataclass
class Output:
    path: Optional[str] = None
    format: str = "json"
    samples: Optional[str] = None


@dataclass
class JobConfig:
    command: str
    gate: object
    variant: str = DEFAULT_VARIANT
    windings: Optional[List[int]] = None
    eigvec_index: Optional[int] = None
    strict_alpha: bool = False
    layout: Optional[Layout] = None
    numeric: Numeric = field(default_factory=Numeric)
    output: Output = field(default_factory=Output)

    @classmethod
    def from_dict(cls, data: dict) -> "JobConfig":
        cfg = _build(cls, data, "config")
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def validate(self):
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}; expected one of {COMMANDS}")
        if self.gate is None:
            raise ValidationError("no gate given")
        if self.variant not in VARIANTS:
            raise ValidationError(f"variant must be one of {VARIANTS}")
        if self.output.format not in FORMATS:
            raise ValidationError(f"format must be one of {FORMATS}")
        if self.output.format == "csv" and self.command not in CSV_COMMANDS:
            raise ValidationError(f"csv output is only available for {CSV_COMMANDS}")
        if self.windings is not None and not (
            isinstance(self.windings, list) and all(isinstance(n, int) for n in self.windings)
        ):
            raise ValidationError("windings must be a list of integers")
        if self.eigvec_index is not None and not isinstance(self.eigvec_index, int):
            raise ValidationError("eigvec_index must be an integer")
        num = self.numeric
        for name in ("wilson_steps", "grid", "coeff_terms"):
            if not isinstance(getattr(num, name), int):
                raise ValidationError(f"{name} must be an integer")
        if not isinstance(num.T_list, list) or not all(isinstance(t, (int, float)) for t in num.T_list):
            raise ValidationError("T_list must be a list of numbers")
        if num.wilson_steps < holocheck.MIN_WILSON_STEPS:
            raise ValidationError(f"wilson_steps must be >= {holocheck.MIN_WILSON_STEPS}")
        if not num.T_list or any(t <= 0 for t in num.T_list):
            raise ValidationError("T_list must hold positive times")
        if num.grid < 2:
            raise ValidationError("grid must be >= 2")
        if num.coeff_terms < 2:
            raise ValidationError("coeff_terms must be >= 2")
        if self.layout is not None:
            lay = self.layout
            if not isinstance(lay.n_main, int) or not isinstance(lay.targets, list) or not all(
                isinstance(q, int) for q in lay.targets
            ):
                raise ValidationError("layout needs integer n_main and a list of integer targets")
        if self.command == "embed" and self.layout is None:
            raise ValidationError("embed needs a layout (n_main, targets)")


_NESTED = {"layout": Layout, "numeric": Numeric, "output": Output, "tolerances": Tolerances}


def _build(cls, data, where):
    if not isinstance(data, dict):
        raise ValidationError(f"{where} must be an object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ValidationError(f"unknown field(s) in {where}: {', '.join(unknown)}")
    kwargs = {}
    for key, value in data.items():
        if key in _NESTED and value is not None:
            value = _build(_NESTED[key], value, f"{where}.{key}")
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ValidationError(f"{where}: {exc}") from None


# ---------------------------------------------------------------- serialization


def to_jsonable(obj):
    """Convert numpy/complex values into plain JSON types."""
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v + 0.0 if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    return obj


def parse_matrix(data) -> np.ndarray:
    """Nested list with entries that are numbers or ``{"re", "im"}`` objects."""

    def entry(x):
        if isinstance(x, dict):
            if set(x) != {"re", "im"}:
                raise ValidationError(f"complex entry must have keys re, im: {x}")
            return complex(x["re"], x["im"])
        if isinstance(x, (int, float)):
            return complex(x)
        raise ValidationError(f"bad matrix entry {x!r}")

    if not isinstance(data, list) or not all(isinstance(r, list) for r in data):
        raise ValidationError("matrix must be a list of rows")
    return np.array([[entry(x) for x in row] for row in data], dtype=np.complex128)


def export_loop_samples(plan, grid: int, path) -> None:
    """Write ``H(t)`` on ``grid`` evenly spaced points of ``[0, 1]`` as CSV.

    First row: ``dim,<dim>,k,<k>``.  Second row: column names.  Then one row
    per sample: ``t`` followed by real and imaginary parts of ``H(t)`` in
    row-major order, all printed with 17 significant digits.
    """
    if grid < 2:
        raise ValidationError("grid must be >= 2")
    ts = np.linspace(0.0, 1.0, grid)
    hs = loopsynth.hamiltonian_at(plan, ts)
    dim = plan.dim
    cols = ["t"] + [f"h_{i}_{j}_{part}" for i in range(dim) for j in range(dim) for part in ("re", "im")]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["dim", dim, "k", plan.k])
        w.writerow(cols)
        for t, h in zip(ts, hs):
            flat = np.stack([h.real, h.imag], axis=-1).ravel()
            w.writerow(["%.17g" % t] + ["%.17g" % x for x in flat])


def read_loop_samples(path):
    """Inverse of :func:`export_loop_samples`: ``(t, H, dim, k)``."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    head = rows[0]
    dim, k = int(head[1]), int(head[3])
    data = np.array([[float(x) for x in r] for r in rows[2:]])
    parts = data[:, 1:].reshape(-1, dim, dim, 2)
    return data[:, 0], parts[..., 0] + 1j * parts[..., 1], dim, k


# ---------------------------------------------------------------- jobs


def _gate(cfg: JobConfig):
    spec = cfg.gate if isinstance(cfg.gate, str) else parse_matrix(cfg.gate)
    return gatelog.gate_spec(spec)


def _plan(cfg: JobConfig, gate):
    if cfg.variant == "minimal":
        j = DEFAULT_EIGVEC if cfg.eigvec_index is None else cfg.eigvec_index
        n = 1 if not cfg.windings else cfg.windings[0]
        if cfg.windings and len(cfg.windings) != 1:
            raise ValidationError("minimal variant takes a single winding")
        return loopsynth.plan_minimal(gate, j, n, cfg.strict_alpha)
    return loopsynth.plan_doubled(gate, cfg.windings, cfg.strict_alpha)


def _wilson_tol(cfg: JobConfig, k: int) -> float:
    tol = cfg.numeric.tolerances.wilson
    if tol is not None:
        return tol
    return TOL_WILSON_ONE_QUBIT if k <= 2 else TOL_WILSON_TWO_QUBIT


def _check(value, tol, upper=True):
    passed = bool(value <= tol) if upper else bool(value >= tol)
    return {"value": value, "tolerance": tol, "passed": passed}


def _run_synth(cfg, gate, out):
    plan = _plan(cfg, gate)
    e1 = loopsynth.exp_tX(plan, 1.0)
    closure = loopsynth.closure_residual(plan)
    out["results"]["synth"] = {
        "plan": plan.summary(),
        "X": plan.X,
        "closure_residual": closure,
        "offdiag_block_t1": loopsynth.offdiag_block_norm(e1, plan.k),
        "return_block": loopsynth.return_block(plan),
    }
    out["checks"]["closure"] = _check(closure, cfg.numeric.tolerances.closure)
    if cfg.output.samples:
        export_loop_samples(plan, cfg.numeric.grid, cfg.output.samples)
    return plan


def _run_verify(cfg, gate, out):
    plan = _plan(cfg, gate)
    n = cfg.numeric.wilson_steps
    rows = []
    first = None
    for steps in (n, 2 * n):
        rep = holocheck.wilson_holonomy(plan, steps, iso_grid=cfg.numeric.grid if first is None else 0)
        first = first or rep
        rows.append({"N": steps, "distance": rep.target_distance, "raw_distance": rep.raw_distance})
    ratio = rows[0]["raw_distance"] / rows[1]["raw_distance"] if rows[1]["raw_distance"] > 0 else None
    tol = _wilson_tol(cfg, plan.k)
    out["results"]["verify"] = {
        "plan": plan.summary(),
        "closure_residual": first.closure_residual,
        "connection": first.connection,
        "wilson_holonomy": first.wilson_holonomy,
        "wilson": rows,
        "raw_convergence_ratio": ratio,
        "isospectral_residual": first.isospectral_residual,
        "target_distance": first.target_distance,
    }
    out["checks"]["closure"] = _check(first.closure_residual, cfg.numeric.tolerances.closure)
    out["checks"]["wilson"] = _check(first.target_distance, tol)


def _run_simulate(cfg, gate, out):
    plan = _plan(cfg, gate)
    num = cfg.numeric
    rows = []
    for T in num.T_list:
        steps = num.sim_steps or max(adiasim.MIN_STEPS_PER_TIME, math.ceil(num.steps_per_time * T))
        run = adiasim.realized_gate(plan, T, steps)
        row = run.row()
        row.update(transport_fidelity=run.transport_fidelity, column_fidelity=run.column_fidelity)
        rows.append(row)
    infid = [1.0 - r["fidelity"] for r in rows]
    order = np.argsort(num.T_list)
    infid_sorted = [infid[i] for i in order]
    env_excess = max(
        max(infid_sorted[i:]) - infid_sorted[i] for i in range(len(infid_sorted))
    )
    last = rows[order[-1]]
    out["results"]["simulate"] = {"plan": plan.summary(), "runs": rows}
    out["checks"]["fidelity"] = _check(last["fidelity"], num.tolerances.fidelity, upper=False)
    out["checks"]["leakage"] = _check(last["leakage"], num.tolerances.leakage)
    out["checks"]["envelope"] = _check(env_excess, ENVELOPE_SLACK)
    out["csv"] = (["T", "fidelity", "leakage"], [[r["T"], r["fidelity"], r["leakage"]] for r in rows])


def _run_embed(cfg, gate, out):
    lay = arrayembed.ArrayLayout(cfg.layout.n_main)
    targets = tuple(cfg.layout.targets)
    windings = cfg.windings
    if gate.k == 2:
        if len(targets) != 1:
            raise ValidationError("a one-qubit gate needs exactly one target")
        loop = arrayembed.embed_single(gate.U, targets[0], lay, windings, cfg.strict_alpha)
    else:
        loop = arrayembed.embed_two(gate.U, targets, lay, windings, cfg.strict_alpha)
    rep = arrayembed.local_action_report(loop, gate.U, cfg.numeric.wilson_steps)
    closure = loopsynth.closure_residual(loop.plan)
    out["results"]["embed"] = {
        "n_main": lay.n_main,
        "targets": list(targets),
        "dim": lay.dim,
        "local_plan": loop.local_plan.summary(),
        "x_local": loop.x_local,
        "closure_residual": closure,
        "ancilla_leak": rep["ancilla_leak"],
        "spectator_residual": rep["spectator_residual"],
        "residual": rep["residual"],
    }
    tol = cfg.numeric.tolerances
    out["checks"]["closure"] = _check(closure, tol.closure)
    out["checks"]["ancilla_leak"] = _check(rep["ancilla_leak"], tol.closure)
    out["checks"]["spectator"] = _check(rep["spectator_residual"], arrayembed.SPECTATOR_TOL)
    out["checks"]["wilson"] = _check(rep["residual"], _wilson_tol(cfg, gate.k))


def _run_coeffs(cfg, gate, out):
    j = DEFAULT_EIGVEC if cfg.eigvec_index is None else cfg.eigvec_index
    n = 1 if not cfg.windings else cfg.windings[0]
    plan = loopsynth.plan_minimal(gate, j, n, cfg.strict_alpha)
    lam, alpha, s = float(plan.lambdas[0]), float(plan.alphas[0]), float(plan.s_param)
    trip = coeffora.recursion_coeffs(lam, alpha, s, cfg.numeric.coeff_terms)
    rows = [
        [m, *(v for z in (trip.b[m], trip.c[m], trip.d[m]) for v in (z.real, z.imag))]
        for m in range(len(trip.c))
    ]
    out["results"]["coeffs"] = {"lambda": lam, "alpha": alpha, "s": s, "b": trip.b, "c": trip.c, "d": trip.d}
    out["csv"] = (["n", "b_re", "b_im", "c_re", "c_im", "d_re", "d_im"], rows)


def resolved_config(cfg: JobConfig, gate) -> dict:
    """The job as run: every default filled in."""
    d = cfg.to_dict()
    if cfg.variant == "minimal" or cfg.command == "coeffs":
        d["eigvec_index"] = DEFAULT_EIGVEC if cfg.eigvec_index is None else cfg.eigvec_index
    d["numeric"]["tolerances"]["wilson"] = _wilson_tol(cfg, gate.k)
    if d["numeric"]["sim_steps"] is None:
        d["numeric"]["sim_steps"] = "steps_per_time * T"
    d["output"].pop("path")
    return d


def run(cfg: JobConfig) -> tuple:
    """Execute a job.  Returns ``(exit_code, report_dict)``; raises on
    invalid input or numerical failure."""
    start = time.perf_counter()
    stamp = datetime.now(timezone.utc).isoformat()
    gate = _gate(cfg)
    out = {"command": cfg.command, "results": {}, "checks": {}}
    out["gate"] = {"name": gate.name, "U": gate.U, "A": gate.A, "Lambda": gate.Lambda, "Omega": gate.Omega}
    if cfg.command == "report":
        _run_synth(cfg, gate, out)
        _run_verify(cfg, gate, out)
        _run_simulate(cfg, gate, out)
        if cfg.layout is not None:
            _run_embed(cfg, gate, out)
        out.pop("csv", None)
    else:
        {
            "synth": _run_synth,
            "verify": _run_verify,
            "simulate": _run_simulate,
            "embed": _run_embed,
            "coeffs": _run_coeffs,
        }[cfg.command](cfg, gate, out)
    out["config"] = resolved_config(cfg, gate)
    out["backend"] = kernels.BACKEND
    out["passed"] = all(c["passed"] for c in out["checks"].values())
    out["timing"] = {"timestamp": stamp, "wall_clock_s": time.perf_counter() - start}
    return (EXIT_OK if out["passed"] else EXIT_CHECK), out


def render(report: dict, fmt: str) -> str:
    if fmt == "csv":
        header, rows = report["csv"]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([x if isinstance(x, (int, np.integer)) else "%.17g" % (x + 0.0) for x in r])
        return buf.getvalue()
    body = {k: v for k, v in report.items() if k != "csv"}
    return json.dumps(to_jsonable(body), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------- argparse


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _ints(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JobConfig JSON; flags override its fields")
    common.add_argument("--gate", help=f"gate name: {', '.join(gatelog.GATE_NAMES)}")
    common.add_argument("--matrix-file", help="JSON file with a unitary matrix (rows of numbers or {re, im})")
    common.add_argument("--variant", choices=VARIANTS)
    common.add_argument("--windings", type=_ints, help="comma-separated winding integers")
    common.add_argument("--eigvec", type=int, help="0-based eigenvector index for the minimal variant")
    common.add_argument("--strict-alpha", action="store_true", help="bump collapsed loop directions to the next winding")
    common.add_argument("--n-main", type=int, help="main-array qubits (embed)")
    common.add_argument("--targets", type=_ints, help="comma-separated 1-based target qubits (embed)")
    common.add_argument("--wilson-steps", type=int)
    common.add_argument("--T", type=_floats, dest="T", help="comma-separated total times")
    common.add_argument("--sim-steps", type=int, help="fixed integration steps per run")
    common.add_argument("--grid", type=int, help="t-grid size for samples and isospectral checks")
    common.add_argument("--terms", type=int, help="recursion length for coeffs")
    common.add_argument("--samples", help="write H(t) samples CSV here (synth)")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=FORMATS)
    common.add_argument("--tol-closure", type=float)
    common.add_argument("--tol-wilson", type=float)
    common.add_argument("--tol-fidelity", type=float)
    common.add_argument("--tol-leakage", type=float)

    parser = _Parser(prog="hololoop", description="Closed adiabatic loops for holonomic gates.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS + ("run",):
        sub.add_parser(name, parents=[common])
    return parser


_FLAG_PATHS = {
    "gate": ("gate",),
    "variant": ("variant",),
    "windings": ("windings",),
    "eigvec": ("eigvec_index",),
    "strict_alpha": ("strict_alpha",),
    "wilson_steps": ("numeric", "wilson_steps"),
    "T": ("numeric", "T_list"),
    "sim_steps": ("numeric", "sim_steps"),
    "grid": ("numeric", "grid"),
    "terms": ("numeric", "coeff_terms"),
    "samples": ("output", "samples"),
    "out": ("output", "path"),
    "format": ("output", "format"),
    "tol_closure": ("numeric", "tolerances", "closure"),
    "tol_wilson": ("numeric", "tolerances", "wilson"),
    "tol_fidelity": ("numeric", "tolerances", "fidelity"),
    "tol_leakage": ("numeric", "tolerances", "leakage"),
}


def config_from_args(args: argparse.Namespace) -> JobConfig:
    opts = vars(args)
    data = {}
    if "config" in opts:
        try:
            data = json.loads(Path(opts["config"]).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config: {exc}") from None
        if not isinstance(data, dict):
            raise ValidationError("config must be a JSON object")
    if args.command != "run":
        if data.get("command", args.command) != args.command:
            raise ValidationError(f"config command {data['command']!r} conflicts with {args.command!r}")
        data["command"] = args.command
    for flag, path in _FLAG_PATHS.items():
        if flag in opts:
            node = data
            for key in path[:-1]:
                node = node.setdefault(key, {})
            node[path[-1]] = opts[flag]
    if "matrix_file" in opts:
        try:
            data["gate"] = json.loads(Path(opts["matrix_file"]).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read matrix file: {exc}") from None
    if "n_main" in opts or "targets" in opts:
        lay = data.setdefault("layout", {}) or {}
        data["layout"] = lay
        if "n_main" in opts:
            lay["n_main"] = opts["n_main"]
        if "targets" in opts:
            lay["targets"] = opts["targets"]
    if "command" not in data:
        raise ValidationError("run needs a config with a command")
    data.setdefault("gate", None)
    return JobConfig.from_dict(data)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return exc.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        code, report = run(cfg)
        text = render(report, cfg.output.format)
        if cfg.output.path:
            Path(cfg.output.path).write_text(text)
        else:
            sys.stdout.write(text)
        if code != EXIT_OK:
            failed = [k for k, c in report["checks"].items() if not c["passed"]]
            print(f"hololoop: check(s) failed: {', '.join(failed)}", file=sys.stderr)
        return code
    except ValidationError as exc:
        print(f"hololoop: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"hololoop: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except LocalityViolation as exc:
        print(f"hololoop: check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    raise SystemExit(main())
