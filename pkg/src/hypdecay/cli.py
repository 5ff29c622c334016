"""Command-line front end: system ingestion, pipeline orchestration,
report serialization.

System definitions are small JSON documents::

    {"name": "damped_wave", "n": 2,
     "A": [[0, 1], [1, 0]], "B": [[0, 0], [0, 1]],
     "S": [[1, 0], [0, -1]]}          # S optional

Commands: ``check``, ``reduce``, ``curves``, ``solve``, ``rates``,
``kernels``. Each writes ``report.json`` (and CSV tables when the format
includes csv) into the output directory. Exit codes: 0 success, 1
structural-condition failure, 2 I/O or numerical error. Diagnostics go to
stderr; data goes to files only.

CSV files start with one ``#`` metadata header line (the only place a
timestamp appears); the data section is deterministic for a fixed
configuration, with floats in shortest round-trip decimal form.
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import sys as _sys
from dataclasses import asdict
from importlib import resources
from pathlib import Path

import numpy as np

from . import rates as rates_mod
from . import reduction as reduction_mod
from . import structure as structure_mod
from .errors import (
    ConditionViolation,
    HypdecayError,
    ParseError,
    ShapeError,
)
from .profiles import GridSpec, InitialData, ProfileSolver
from .structure import SystemDef

__all__ = [
    "load_system",
    "system_to_jsonable",
    "bundled_system_path",
    "load_bundled_system",
    "build_parser",
    "run",
    "main",
]

_BUNDLED = ("damped_wave", "goldstein_kac", "nonsymmetric")


def bundled_system_path(name: str) -> Path:
    """Filesystem path of a bundled example system."""
    if name not in _BUNDLED:
        raise KeyError(f"unknown bundled system {name!r}; available: {_BUNDLED}")
    return Path(str(resources.files("hypdecay").joinpath("systems", f"{name}.json")))


def load_bundled_system(name: str) -> SystemDef:
    return load_system(bundled_system_path(name))


def load_system(path) -> SystemDef:
    """Parse and validate a system-definition JSON file."""
    path = Path(path)
    try:
        raw = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: expected a JSON object")
    for key in ("name", "n", "A", "B"):
        if key not in doc:
            raise ParseError(f"{path}: missing required key {key!r}")
    name = doc["name"]
    n = doc["n"]
    if not isinstance(name, str) or not isinstance(n, int):
        raise ParseError(f"{path}: 'name' must be a string and 'n' an integer")

    def matrix(key):
        value = doc[key]
        try:
            arr = np.array(value, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{path}: {key} is not a numeric matrix: {exc}") from exc
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ShapeError(f"{path}: {key} must be square, got shape {arr.shape}")
        if arr.shape != (n, n):
            raise ShapeError(f"{path}: {key} has shape {arr.shape}, expected ({n}, {n})")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"{path}: {key} contains NaN or Inf")
        return arr

    a = matrix("A")
    b = matrix("B")
    s = matrix("S") if "S" in doc and doc["S"] is not None else None
    return SystemDef(name=name, A=a, B=b, S=s)


def system_to_jsonable(sys: SystemDef) -> dict:
    doc = {
        "name": sys.name,
        "n": sys.n,
        "A": np.asarray(sys.A, dtype=float).tolist(),
        "B": np.asarray(sys.B, dtype=float).tolist(),
    }
    if sys.S is not None:
        doc["S"] = np.asarray(sys.S, dtype=float).tolist()
    return doc


def _jsonable(obj):
    """Recursively convert report objects to JSON-serializable values."""
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, complex):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": obj.real.tolist(), "im": obj.imag.tolist()}
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return _jsonable(float(obj))
    if isinstance(obj, np.complexfloating):
        return _jsonable(complex(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "__dataclass_fields__"):
        return {k: _jsonable(v) for k, v in asdict(obj).items()}
    return str(obj)


def _fmt(value) -> str:
    """Shortest round-trip decimal for CSV cells."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def _write_csv(path: Path, command: str, header: list[str], rows) -> None:
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    lines = [f"# hypdecay {command} generated={stamp}"]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _write_report(out: Path, payload: dict) -> None:
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    payload = dict(payload)
    payload["metadata"] = {**payload.get("metadata", {}), "generated": stamp}
    out.joinpath("report.json").write_text(
        json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    )


def _parse_pq(tokens: list[str]) -> list[tuple[float, float]]:
    out = []
    for token in tokens:
        parts = token.split(",")
        if len(parts) != 2:
            raise ParseError(f"--pq expects 'p,q', got {token!r}")
        vals = []
        for part in parts:
            part = part.strip().lower()
            vals.append(math.inf if part == "inf" else float(part))
        out.append((vals[0], vals[1]))
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypdecay",
        description="Spectral reductions, wave profiles and decay-rate "
        "verification for 1-D partially dissipative hyperbolic systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("check", "verify the structural conditions"),
        ("reduce", "compute all reduction data"),
        ("curves", "sample eigenvalue curves and expansion orders"),
        ("solve", "evolve the datum and the wave profiles"),
        ("rates", "measure decay rates against the theoretical envelopes"),
        ("kernels", "frequency-space kernel estimate scans"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("system", help="path to a system-definition JSON file")
        p.add_argument("--grid-n", type=int, default=2**14, help="grid points (power of two)")
        p.add_argument("--grid-l", type=float, default=2200.0, help="half-length of the domain")
        p.add_argument("--sigma", type=float, default=1.0, help="gaussian datum width")
        p.add_argument("--pq", action="append", default=None,
                       metavar="P,Q", help="norm pair, e.g. 'inf,1' (repeatable)")
        p.add_argument("--times", type=str, default=None,
                       help="comma-separated time values")
        p.add_argument("--refined", action="store_true",
                       help="use the refined diffusion profile")
        p.add_argument("--tol", type=float, default=None,
                       help="tolerance override for condition checks")
        p.add_argument("--out", type=str, default="hypdecay-out", help="output directory")
        p.add_argument("--format", type=str, default="json,csv",
                       help="comma list of output formats (json, csv)")
    return parser


def _times_from(args, default):
    if args.times:
        return tuple(float(t) for t in args.times.split(","))
    return default


def _gaussian_datum(sys: SystemDef, sigma: float) -> InitialData:
    amp = np.zeros(sys.n)
    amp[0] = 1.0
    return InitialData.gaussian(amp, sigma=sigma)


def _cmd_check(sys_def, args, out, formats):
    tol = args.tol if args.tol is not None else 1e-8
    report = structure_mod.check_all(sys_def, tol=tol)
    payload = {
        "command": "check",
        "system": system_to_jsonable(sys_def),
        "conditions": {
            "A": report.condA,
            "B": report.condB,
            "C": report.condC,
            "Cprime": report.condCprime,
            "D": report.condD,
            "S": report.condS,
        },
        "theta_est": report.theta_est,
        "m": report.m,
    }
    _write_report(out, payload)
    if "csv" in formats:
        rows = [
            (name, str(res.holds))
            for name, res in (
                ("A", report.condA), ("B", report.condB), ("C", report.condC),
                ("Cprime", report.condCprime), ("D", report.condD), ("S", report.condS),
            )
        ]
        rows.append(("theta_est", _fmt(report.theta_est)))
        _write_csv(out / "conditions.csv", "check", ["condition", "value"], rows)
    core = (report.condA, report.condB, report.condC, report.condD)
    return 0 if all(r.holds for r in core) else 1


def _cmd_reduce(sys_def, args, out, formats):
    red = reduction_mod.reduce_low(sys_def)
    hf = reduction_mod.reduce_high(sys_def)
    fast = reduction_mod.fast_groups(sys_def)
    payload = {
        "command": "reduce",
        "system": system_to_jsonable(sys_def),
        "chapman_enskog": red,
        "high_frequency": hf,
        "fast_groups": fast,
    }
    _write_report(out, payload)
    if "csv" in formats:
        rows = []
        for j, br in enumerate(red.branches):
            for l, sub in enumerate(br.sub):
                rows.append(("diffusion", j, l, br.c, sub.d.real, sub.d.imag))
        for j, br in enumerate(hf.branches):
            for l, sub in enumerate(br.sub):
                rows.append(("expwave", j, l, br.alpha, sub.beta.real, sub.beta.imag))
        for grp in fast:
            rows.append(("relaxation", grp.k_index, 0, 0.0, grp.e.real, grp.e.imag))
        _write_csv(
            out / "branches.csv", "reduce",
            ["family", "j", "l", "speed", "rate_re", "rate_im"], rows,
        )
    return 0


def _cmd_curves(sys_def, args, out, formats):
    red = reduction_mod.reduce_low(sys_def)
    hf = reduction_mod.reduce_high(sys_def)
    xi = structure_mod.default_xi_grid()
    samples = reduction_mod.sample_eigencurves(sys_def, xi)
    orders = reduction_mod.expansion_order_check(sys_def, red, hf)
    payload = {
        "command": "curves",
        "system": system_to_jsonable(sys_def),
        "expansion_orders": orders,
        "coalescence_flags": [
            {"xi": s.xi, "pairs": list(s.close_pairs)} for s in samples if s.close_pairs
        ],
    }
    _write_report(out, payload)
    if "csv" in formats:
        n = sys_def.n
        header = ["xi"]
        for i in range(n):
            header += [f"re_{i}", f"im_{i}"]
        header.append("coalesced")
        rows = []
        for s in samples:
            row = [s.xi]
            for lam in s.eigenvalues:
                row += [lam.real, lam.imag]
            row.append(int(bool(s.close_pairs)))
            rows.append(row)
        _write_csv(out / "eigencurves.csv", "curves", header, rows)
    return 0


def _cmd_solve(sys_def, args, out, formats):
    grid = GridSpec(L=args.grid_l, N=args.grid_n)
    u0 = _gaussian_datum(sys_def, args.sigma)
    times = _times_from(args, (8.0,))
    solver = ProfileSolver(sys_def, grid)
    kinds = ["exact", "diffusion", "expwave"]
    if args.refined:
        kinds.append("diffusion_refined")
    summary = []
    for t in times:
        for kind in kinds:
            sol = solver.solve(u0, t, kind)
            summary.append({
                "t": t, "kind": kind,
                "max_abs": float(np.max(np.abs(sol.values))),
                "max_imag": float(np.max(np.abs(sol.values.imag))),
            })
            if "csv" in formats:
                header = ["x"]
                for i in range(sys_def.n):
                    header += [f"re_{i}", f"im_{i}"]
                x = grid.x
                rows = []
                for k in range(grid.N):
                    row = [x[k]]
                    for i in range(sys_def.n):
                        row += [sol.values[k, i].real, sol.values[k, i].imag]
                    rows.append(row)
                _write_csv(out / f"solve_{kind}_t{t:g}.csv", "solve", header, rows)
    payload = {
        "command": "solve",
        "system": system_to_jsonable(sys_def),
        "grid": {"L": grid.L, "N": grid.N},
        "snapshots": summary,
    }
    _write_report(out, payload)
    return 0


def _cmd_rates(sys_def, args, out, formats):
    grid = GridSpec(L=args.grid_l, N=args.grid_n)
    u0 = _gaussian_datum(sys_def, args.sigma)
    pq = _parse_pq(args.pq) if args.pq else [(math.inf, 1.0), (2.0, 2.0)]
    times = _times_from(args, rates_mod.default_time_ladder())
    report = rates_mod.verify_theorem(sys_def, grid, u0, pq, refined=args.refined, times=times)
    payload = {"command": "rates", "system": system_to_jsonable(sys_def), "report": report}
    _write_report(out, payload)
    if "csv" in formats:
        rows = [
            (
                "inf" if math.isinf(e.p) else e.p,
                "" if e.q is None else ("inf" if math.isinf(e.q) else e.q),
                e.kind,
                e.fitted_slope,
                "" if e.theorem_slope is None else e.theorem_slope,
                e.margin,
                str(e.passed),
            )
            for e in report.entries
        ]
        _write_csv(
            out / "rates.csv", "rates",
            ["p", "q", "kind", "fitted_slope", "theorem_slope", "margin", "passed"], rows,
        )
        long_rows = []
        for e in report.entries:
            for t, norm in zip(e.times, e.norms):
                long_rows.append(
                    ("inf" if math.isinf(e.p) else e.p,
                     "" if e.q is None else ("inf" if math.isinf(e.q) else e.q),
                     e.kind, t, norm)
                )
        _write_csv(out / "rates_norms.csv", "rates", ["p", "q", "kind", "t", "norm"], long_rows)
    return 0 if all(e.passed for e in report.entries) else 1


def _cmd_kernels(sys_def, args, out, formats):
    red = reduction_mod.reduce_low(sys_def)
    hf = reduction_mod.reduce_high(sys_def)
    times = _times_from(args, rates_mod.default_time_ladder(7))
    tables = [
        rates_mod.kernel_norm_scan(sys_def, red, hf, t_list=times, r=1.0,
                                   regime=regime, refined=args.refined)
        for regime in ("low", "mid", "high")
    ]
    payload = {"command": "kernels", "system": system_to_jsonable(sys_def), "scans": tables}
    _write_report(out, payload)
    if "csv" in formats:
        rows = []
        for table in tables:
            for row in table.rows:
                for t, norm in zip(row.times, row.norms):
                    rows.append((row.regime, row.quantity, row.fit_kind, t, norm))
        _write_csv(out / "kernel_scans.csv", "kernels",
                   ["regime", "quantity", "fit_kind", "t", "norm"], rows)
    return 0


_COMMANDS = {
    "check": _cmd_check,
    "reduce": _cmd_reduce,
    "curves": _cmd_curves,
    "solve": _cmd_solve,
    "rates": _cmd_rates,
    "kernels": _cmd_kernels,
}


def run(args) -> int:
    """Execute a parsed command; returns the process exit code."""
    out = Path(args.out)
    try:
        sys_def = load_system(args.system)
        out.mkdir(parents=True, exist_ok=True)
        formats = {f.strip() for f in args.format.split(",") if f.strip()}
        if not formats <= {"json", "csv"}:
            raise ParseError(f"unknown output format in {args.format!r}")
        return _COMMANDS[args.command](sys_def, args, out, formats)
    except ConditionViolation as exc:
        print(f"hypdecay: {exc}", file=_sys.stderr)
        return 1
    except (HypdecayError, ValueError, OSError) as exc:
        print(f"hypdecay: error: {exc}", file=_sys.stderr)
        return 2


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return run(args)


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
