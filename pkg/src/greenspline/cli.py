"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 verification
failure. CSV files are comma separated with a header row, ``.`` decimals and
LF line endings; floats are written in shortest round-trip form.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import gp, kernels, series, spline, verify
from .errors import GreensplineError, NumericalError, ValidationError
from .numerics import RandomSource

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_VERIFY = 0, 1, 2, 3
SEED_ENV = "GREENSPLINE_SEED"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def parse_grid(spec: str) -> np.ndarray:
    """Parse ``start:stop:step``; ``stop`` is included when ``(stop - start) /
    step`` is an integer to within ``1e-9``."""
    try:
        start, stop, step = (float(x) for x in spec.split(":"))
    except ValueError:
        raise ValidationError(f"grid must look like start:stop:step, got {spec!r}") from None
    if not step > 0:
        raise ValidationError(f"grid step must be positive, got {step}")
    if stop < start:
        raise ValidationError("grid stop must not precede start")
    if start < 0.0 or stop > 1.0:
        raise ValidationError("grid must lie within [0, 1]")
    ratio = (stop - start) / step
    n = round(ratio)
    if abs(ratio - n) <= 1e-9:
        grid = start + step * np.arange(n + 1)
        grid[-1] = stop
    else:
        grid = start + step * np.arange(int(np.floor(ratio)) + 1)
    return grid


def _fmt(x: float) -> str:
    return repr(float(x))


def read_data_csv(path: str) -> spline.DataSet:
    """Read a ``t,y`` CSV into a :class:`DataSet`; errors name the row."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["t", "y"]:
        raise ValidationError(f"{path}: row 1: expected header 't,y'")
    times, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise ValidationError(f"{path}: row {lineno}: expected 2 fields, got {len(row)}")
        try:
            t, y = float(row[0]), float(row[1])
        except ValueError:
            raise ValidationError(f"{path}: row {lineno}: not a number: {row}") from None
        if not (np.isfinite(t) and np.isfinite(y)):
            raise ValidationError(f"{path}: row {lineno}: values must be finite")
        times.append(t)
        values.append(y)
    try:
        return spline.DataSet(np.array(times), np.array(values))
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def write_csv(header: list[str], columns: list[np.ndarray], out: str | None) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*columns):
        w.writerow([_fmt(x) for x in row])
    _emit(buf.getvalue(), out)


def read_csv_columns(path: str) -> tuple[list[str], np.ndarray]:
    """Read a numeric CSV written by this tool: header and a float matrix."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(x) for x in r] for r in rows[1:]], dtype=float)


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _smoothing(args) -> float:
    """Lambda from exactly one of ``--lambda`` / ``--tau-sq``."""
    if (args.lam is None) == (args.tau_sq is None):
        raise ValidationError("give exactly one of --lambda and --tau-sq")
    if args.lam is not None:
        return args.lam
    if not args.tau_sq > 0:
        raise ValidationError("--tau-sq must be positive")
    return 1.0 / args.tau_sq


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ValidationError(f"{SEED_ENV} must be an integer, got {env!r}") from None


# --- subcommands -------------------------------------------------------------


def cmd_list_kernels(args) -> int:
    rows = [
        {
            "id": k.id,
            "formula": k.formula,
            "constraints": [str(c) for c in k.constraints],
            "compensation": k.compensation_formula,
            "symmetric": k.symmetric,
            "description": k.description,
        }
        for k in kernels.CATALOG.values()
    ]
    if args.format == "json":
        _emit(json.dumps(rows, indent=2) + "\n", None)
        return EXIT_OK
    width = max(len(r["id"]) for r in rows)
    lines = [f"{'id':<{width}}  formula  |  constraints"]
    for r in rows:
        cons = "; ".join(r["constraints"]) or "-"
        lines.append(f"{r['id']:<{width}}  {r['formula']}  |  {cons}")
    _emit("\n".join(lines) + "\n", None)
    return EXIT_OK


def cmd_eval(args) -> int:
    k = kernels.get_kernel(args.kernel)
    _emit(_fmt(k.eval(args.s, args.t)) + "\n", None)
    return EXIT_OK


def cmd_gram(args) -> int:
    g = parse_grid(args.grid)
    mat = kernels.gram(args.kernel, g)
    write_csv(["t", *[f"G_{i + 1}" for i in range(g.size)]], [g, *mat.T], args.out)
    return EXIT_OK


def cmd_fit(args) -> int:
    data = read_data_csv(args.input)
    lam = _smoothing(args)
    grid = parse_grid(args.grid)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        fitted = spline.fit(args.kernel, data, lam)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    write_csv(["t", "theta_hat"], [grid, fitted.evaluate_grid(grid)], args.out)
    if args.json:
        _emit(fitted.to_json() + "\n", args.json)
    return EXIT_OK


def cmd_map(args) -> int:
    data = read_data_csv(args.input)
    lam = _smoothing(args)
    if not lam > 0:
        raise ValidationError("the MAP estimate needs lambda > 0 (finite tau_sq)")
    grid = parse_grid(args.grid)
    est = gp.map_estimate(gp.GpPrior(args.kernel, args.scale), data, 1.0 / lam, grid)
    write_csv(["t", "theta_map"], [grid, est], args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    if args.n < 1:
        raise ValidationError(f"--n must be positive, got {args.n}")
    grid = parse_grid(args.grid)
    paths = gp.sample_paths(args.kernel, grid, args.n, RandomSource(_seed(args)), args.scale)
    header = ["t", *[f"path_{i + 1}" for i in range(args.n)]]
    write_csv(header, [grid, *paths], args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    suites = verify.SUITES if args.suite == "all" else (args.suite,)
    start = time.perf_counter()
    if args.N < 1:
        raise ValidationError("--N must be positive")
    results = verify.run(suites, n=args.N, seed=_seed(args))
    if args.tol is not None:
        results = [verify.CheckResult(r.suite, r.name, r.residual, args.tol) for r in results]
    for r in results:
        print(r.line())
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} checks passed in {time.perf_counter() - start:.1f}s")
    return EXIT_OK if passed == len(results) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="greenspline", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def kernel_arg(sp, default=None):
        sp.add_argument("--kernel", required=default is None, default=default,
                        help="catalog id (see list-kernels)")

    sp = sub.add_parser("list-kernels", help="print the kernel catalog")
    sp.add_argument("--format", default="table", help="table or json")
    sp.set_defaults(func=cmd_list_kernels)

    sp = sub.add_parser("eval", help="evaluate G(s, t)")
    kernel_arg(sp)
    sp.add_argument("s", type=float)
    sp.add_argument("t", type=float)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("gram", help="Gram matrix on a grid")
    kernel_arg(sp)
    sp.add_argument("--grid", required=True, help="start:stop:step")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_gram)

    for name, func, help_ in (
        ("fit", cmd_fit, "fit a smoothing spline to a t,y CSV"),
        ("map", cmd_map, "MAP estimate under a Green's-function GP prior"),
    ):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("input", help="CSV with header t,y")
        kernel_arg(sp)
        sp.add_argument("--lambda", dest="lam", type=float)
        sp.add_argument("--tau-sq", dest="tau_sq", type=float)
        sp.add_argument("--grid", default="0:1:0.01", help="start:stop:step (default 0:1:0.01)")
        sp.add_argument("--out", help="output CSV (default stdout)")
        if name == "fit":
            sp.add_argument("--json", help="write the fitted coefficients as JSON here")
        else:
            sp.add_argument("--scale", type=float, default=1.0, help="prior scale sigma^2 tau^2")
        sp.set_defaults(func=func)

    sp = sub.add_parser("sample", help="sample Gaussian-process paths")
    kernel_arg(sp)
    sp.add_argument("--grid", default="0:1:0.01")
    sp.add_argument("--n", type=int, default=1, help="number of paths")
    sp.add_argument("--seed", type=int, help=f"RNG seed (falls back to ${SEED_ENV}, then 0)")
    sp.add_argument("--scale", type=float, default=1.0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("verify", help="run the built-in verification suites")
    sp.add_argument("--suite", default="all", choices=("all", *verify.SUITES))
    sp.add_argument("--N", type=int, default=series.DEFAULT_N, help="series truncation order")
    sp.add_argument("--tol", type=float, help="override every tolerance")
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "format", "table") not in ("table", "json"):
            raise ValidationError(f"unknown format {args.format!r}; use table or json")
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValidationError, GreensplineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
