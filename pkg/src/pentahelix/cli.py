"""Command line front end: ``pentahelix synth|analyze|verify|plotdata``.

Exit codes: 0 success, 1 an expectation or verification failed, 2 bad
arguments or an unreadable input file, 3 a numerical error (the message
names the error type and the stage that raised it).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .classify import (
    DEFAULT_TOL,
    Tolerances,
    classify_all,
    report_to_dict,
    v1_axis,
    v3_axis,
    v5_axis,
)
from .errors import PentahelixError
from .frenet import CurveSamples, check_unit_speed, extract_frames, reparametrize_arclength
from .numkit import Grid, ScalarSeries
from .synthesis import CurvatureSpec, WCurveSpec, synthesize_from_curvatures, synthesize_w_curve

TOL_ENV = "PENTAHELIX_TOL"
REPORT_VERSION = 1

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    """Bad command line values or a malformed input file (exit code 2)."""


# ---------------------------------------------------------------- curve files

@dataclass
class CurveFile:
    s: np.ndarray
    points: np.ndarray
    parametrization: str
    header: dict
    sha256: str


def write_curve_file(path: str, curve: CurveSamples, source: str) -> None:
    """Write ``s x1..x5`` rows with 17 significant digits and a '#' header."""
    resid = check_unit_speed(curve).residual
    header = "\n".join([
        "pentahelix curve",
        "dimension: 5",
        f"parametrization: {'arclength'}",
        f"source: {source}",
        f"samples: {len(curve)}",
        f"unit_speed_residual: {resid:.3e}",
        "columns: s x1 x2 x3 x4 x5",
    ])
    data = np.column_stack([curve.grid.s_values, curve.points])
    if path == "-":
        np.savetxt(sys.stdout, data, fmt="%.17g", header=header)
    else:
        np.savetxt(path, data, fmt="%.17g", header=header)


def read_curve_file(path: str) -> CurveFile:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    header = {}
    for line in raw.decode("utf-8", errors="replace").splitlines():
        if not line.startswith("#"):
            continue
        key, sep, val = line[1:].partition(":")
        if sep:
            header[key.strip().lower()] = val.strip()
    if header.get("dimension", "5") != "5":
        raise UsageError(f"{path}: dimension must be 5, got {header['dimension']}")
    param = header.get("parametrization", "arclength")
    if param not in ("arclength", "raw"):
        raise UsageError(f"{path}: parametrization must be 'arclength' or 'raw', got {param!r}")
    try:
        data = np.loadtxt(path, comments="#", ndmin=2)
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None
    if data.shape[1] != 6:
        raise UsageError(f"{path}: expected 6 columns (s x1..x5), got {data.shape[1]}")
    if not np.all(np.isfinite(data)):
        raise UsageError(f"{path}: non-finite values")
    if data.shape[0] < 2 or np.any(np.diff(data[:, 0]) <= 0):
        raise UsageError(f"{path}: first column must be strictly increasing")
    return CurveFile(data[:, 0], data[:, 1:], param, header, hashlib.sha256(raw).hexdigest())


def curve_from_file(cf: CurveFile) -> CurveSamples:
    if cf.parametrization == "raw":
        return reparametrize_arclength(cf.points, cf.s)
    return CurveSamples(Grid.from_values(cf.s), cf.points)


# ------------------------------------------------------------------- json out

def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return "null"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(f"{float(x):.17g}"))
    return json.dumps(x)


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON with floats at 17 significant digits; NaN and inf become null."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_fmt(v) for v in seq) + "]"
        items = [inner + dumps(v, indent, _level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return _fmt(obj)


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


# ------------------------------------------------------------------ commands

def _positive(name: str, value: float) -> float:
    if not (math.isfinite(value) and value > 0):
        raise UsageError(f"{name} must be positive and finite, got {value}")
    return value


def _check_range(lo: float, hi: float, step: float) -> None:
    _positive("step", step)
    if not hi > lo:
        raise UsageError(f"range must satisfy s0 < s1, got {lo} {hi}")
    if (hi - lo) / step + 1 < 7:
        raise UsageError("range/step gives fewer than 7 samples")


_EXPR_NAMES = {name: getattr(np, name) for name in
               ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "sinh", "cosh", "tanh",
                "arctan", "pi", "e")}


def _compile_expr(text: str, previous: dict):
    """Vectorized function of s from an arithmetic expression.

    Names available: s, numpy's elementary functions, pi, e, and the
    curvatures defined before this one (``k2 = 2*k1``).
    """
    try:
        code = compile(text, "<curvature>", "eval")
    except SyntaxError as exc:
        raise UsageError(f"bad expression {text!r}: {exc.msg}") from None
    allowed = set(_EXPR_NAMES) | {"s"} | set(previous)
    unknown = set(code.co_names) - allowed
    if unknown:
        raise UsageError(f"unknown name(s) in {text!r}: {', '.join(sorted(unknown))}")

    earlier = dict(previous)

    def f(s):
        s = np.asarray(s, dtype=float)
        env = dict(_EXPR_NAMES, s=s, **{k: g(s) for k, g in earlier.items()})
        try:
            val = eval(code, {"__builtins__": {}}, env)
            return np.broadcast_to(np.asarray(val, dtype=float), s.shape)
        except (TypeError, ValueError, ArithmeticError) as exc:
            raise UsageError(f"cannot evaluate {text!r}: {exc}") from None

    return f


def _load_sampled_profile(path: str) -> tuple:
    try:
        data = np.loadtxt(path, comments="#", ndmin=2)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read curvature samples {path}: {exc}") from None
    if data.shape[1] != 5:
        raise UsageError(f"{path}: expected 5 columns (s k1 k2 k3 k4), got {data.shape[1]}")
    grid = Grid.from_values(data[:, 0])
    return tuple(ScalarSeries(grid, data[:, i]) for i in range(1, 5)), (grid.s_values[0], grid.s_values[-1])


def cmd_synth(args) -> int:
    lo, hi = args.range
    _check_range(lo, hi, args.step)
    if args.kind == "w":
        if len(args.params) != 4:
            raise UsageError("synth w needs four curvatures k1 k2 k3 k4")
        try:
            k = [float(x) for x in args.params]
        except ValueError:
            raise UsageError(f"curvatures must be numbers, got {args.params}") from None
        if not all(math.isfinite(x) for x in k):
            raise UsageError("curvatures must be finite")
        grid = Grid.uniform(lo, hi, args.step)
        curve = synthesize_w_curve(WCurveSpec(k), grid)
        source = "w-curve k=(" + ", ".join(f"{x:g}" for x in k) + ")"
    else:
        if args.samples:
            funcs, (lo, hi) = _load_sampled_profile(args.samples)
            source = f"sampled curvatures {os.path.basename(args.samples)}"
        else:
            exprs = [args.k1, args.k2, args.k3, args.k4]
            if any(e is None for e in exprs):
                raise UsageError("synth profile needs --k1 .. --k4 expressions or --samples FILE")
            funcs, prev = [], {}
            for i, text in enumerate(exprs, 1):
                f = _compile_expr(text, prev)
                prev[f"k{i}"] = f
                funcs.append(f)
            source = "profile " + "; ".join(f"k{i}={e}" for i, e in enumerate(exprs, 1))
        curve = synthesize_from_curvatures(CurvatureSpec(tuple(funcs), (lo, hi), args.step))
    write_curve_file(args.out, curve, source)
    return EXIT_OK


def _resolve_tol(arg: Optional[float]) -> float:
    if arg is not None:
        return _positive("--tol", arg)
    env = os.environ.get(TOL_ENV)
    if env:
        try:
            return _positive(TOL_ENV, float(env))
        except ValueError:
            raise UsageError(f"{TOL_ENV} must be a number, got {env!r}") from None
    return DEFAULT_TOL


def _parse_expect(text: Optional[str]) -> dict:
    if not text:
        return {}
    out = {}
    for item in text.split(","):
        item = item.strip().lower()
        want = not item.startswith("!")
        name = item.lstrip("!")
        if name not in ("v1", "v3", "v5"):
            raise UsageError(f"--expect entries must be v1, v3, v5 (optionally prefixed by !), got {item!r}")
        out[name] = want
    return out


def analyze_file(path: str, tol: float) -> dict:
    """Full report document for one curve file."""
    cf = read_curve_file(path)
    curve = curve_from_file(cf)
    report = classify_all(curve, Tolerances(constancy=tol))
    return {
        "report_version": REPORT_VERSION,
        "input": {"file": os.path.basename(path), "sha256": cf.sha256,
                  "parametrization": cf.parametrization, "samples": int(cf.s.size)},
        **report_to_dict(report),
    }


def cmd_analyze(args) -> int:
    tol = _resolve_tol(args.tol)
    expect = _parse_expect(args.expect)
    doc = analyze_file(args.input, tol)
    if args.json:
        _write_text(args.json, dumps(doc) + "\n")
    flags = doc["flags"]
    summary = "  ".join(f"{name}={'yes' if flags[name] else 'no'}" for name in ("v1", "v3", "v5"))
    out = sys.stderr if args.json == "-" else sys.stdout
    print(f"{os.path.basename(args.input)}: {summary}", file=out)
    mismatched = [n for n, want in expect.items() if flags[n] != want]
    if mismatched:
        print("expectation failed for " + ", ".join(mismatched), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_verify(args) -> int:
    from .suite import DEFAULT_SEED, run_with_determinism

    if args.suite != "default":
        raise UsageError(f"unknown suite {args.suite!r} (available: default)")
    tol = _resolve_tol(args.tol)
    seed = DEFAULT_SEED if args.seed is None else args.seed
    results, text = run_with_determinism(seed=seed, tol=tol)
    header = f"pentahelix verify: suite=default seed={seed} tol={tol:.1e}\n"
    _write_text(args.out, header + text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


PLOT_SERIES = ("k1", "k2", "k3", "k4", "ratio21", "ratio43", "F", "G",
               "v1_axis", "v3_axis", "v5_axis")


def _plot_columns(fd, name: str) -> tuple[dict, int]:
    """Columns for one series name and the margin (nodes per end) to drop."""
    from .classify import _v1_pieces, _v5_pieces

    k1, k2, k3, k4 = fd.curvatures
    spacing = Tolerances().spacing(fd.jet_source)
    if name in ("k1", "k2", "k3", "k4"):
        series = fd.curvatures[int(name[1]) - 1]
    elif name == "ratio21":
        series = k2 / k1
    elif name == "ratio43":
        series = k4 / k3
    elif name == "F":
        rho, g, f, _ = _v1_pieces(fd, spacing)
        series = rho * rho + g * g + f * f
    elif name == "G":
        series = _v5_pieces(fd, spacing)[3]
    else:
        # plotted as computed: constancy is not enforced here
        axis = {"v1_axis": v1_axis, "v3_axis": v3_axis, "v5_axis": v5_axis}[name](fd, math.inf, spacing)
        margin = {"v1_axis": _v1_pieces, "v5_axis": _v5_pieces}.get(name)
        m = margin(fd, spacing)[1].margin if margin else fd.margin
        return {f"{name}_{i + 1}": axis.per_node_axis[:, i] for i in range(5)}, m
    return {name: series.values}, series.margin


def cmd_plotdata(args) -> int:
    names = [n.strip() for n in args.series.split(",") if n.strip()]
    unknown = [n for n in names if n not in PLOT_SERIES]
    if unknown or not names:
        raise UsageError(f"unknown series {', '.join(unknown) or '(none)'}; "
                         f"choose from {', '.join(PLOT_SERIES)}")
    cf = read_curve_file(args.input)
    fd = extract_frames(curve_from_file(cf))
    cols, margin = {"s": fd.grid.s_values}, fd.margin
    for n in names:
        c, m = _plot_columns(fd, n)
        cols.update(c)
        margin = max(margin, m, 2)
    sl = slice(margin, len(fd.grid) - margin)
    data = np.column_stack([np.asarray(v)[sl] for v in cols.values()])
    header = f"pentahelix plotdata from {os.path.basename(args.input)}\n" + " ".join(cols)
    if args.out == "-":
        np.savetxt(sys.stdout, data, fmt="%.17g", header=header)
    else:
        np.savetxt(args.out, data, fmt="%.17g", header=header)
    return EXIT_OK


# -------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pentahelix",
                                description="Frenet analysis and helix classification of curves in E^5.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write a synthetic unit-speed curve file")
    s.add_argument("kind", choices=("w", "profile"))
    s.add_argument("params", nargs="*", help="k1 k2 k3 k4 for a W-curve")
    s.add_argument("--k1"), s.add_argument("--k2"), s.add_argument("--k3"), s.add_argument("--k4")
    s.add_argument("--samples", help="file with columns s k1 k2 k3 k4")
    s.add_argument("--range", nargs=2, type=float, default=(0.0, 10.0), metavar=("S0", "S1"))
    s.add_argument("--step", type=float, default=1e-3)
    s.add_argument("--out", "-o", default="-")
    s.set_defaults(func=cmd_synth)

    a = sub.add_parser("analyze", help="classify a curve file")
    a.add_argument("input")
    a.add_argument("--tol", type=float)
    a.add_argument("--json", help="write the full report here ('-' for stdout)")
    a.add_argument("--expect", help="comma list such as v1,v3,!v5")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="run the built-in property suite")
    v.add_argument("--suite", default="default")
    v.add_argument("--tol", type=float)
    v.add_argument("--seed", type=int)
    v.add_argument("--out", "-o", default="-")
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("plotdata", help="columnar series for plotting")
    d.add_argument("input")
    d.add_argument("--series", default="k1,k2,k3,k4")
    d.add_argument("--out", "-o", default="-")
    d.set_defaults(func=cmd_plotdata)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"pentahelix: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PentahelixError as exc:
        print(f"pentahelix: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
