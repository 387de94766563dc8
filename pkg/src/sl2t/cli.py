"""Command-line front end.

Subcommands load a JSON problem config, run one pipeline, and emit
comma-separated tables with ``#``-prefixed header lines.  Tables go to
``--out`` (or stdout); diagnostics and wall time go to stderr, so identical
invocations produce byte-identical table output.

Exit codes: 0 success, 1 usage problem, 2 config validation failure,
3 numerical failure or a failed verification verdict.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__
from .asymptotics import case_of, decay_check, mu_asymptotic, phase_coherent
from .charfn import char_value
from .hilbert import (
    QuadratureGrid,
    apply_operator,
    element_from_solution,
    interface_wronskian_residuals,
    norm,
    sample_domain_element,
    symmetry_residual,
)
from .problem import ConfigError, NumericalError, ProblemSpec, parse_config, piece_bounds, spec_digest
from .shooting import build_left, build_right
from .spectrum import eigenfunction, locate_eigenvalues, orthogonality_matrix

_SOLVER_KEYS = ("rk_tol", "root_tol", "quad_nodes", "bracket_subdiv", "scan_floor_factor")
_SOLVER_INT_KEYS = ("quad_nodes", "bracket_subdiv")


@dataclass(frozen=True)
class RunReport:
    """What a finished command did, for the stderr diagnostics."""

    digest: str
    command: str
    params: str
    outputs: tuple[str, ...]
    verdicts: tuple[tuple[str, str, str], ...] = ()
    notes: tuple[str, ...] = ()

    def render(self) -> list[str]:
        lines = [f"sl2t {self.command}: digest {self.digest} ({self.params})"]
        lines += [f"  wrote {path}" for path in self.outputs]
        lines += [f"  note: {note}" for note in self.notes]
        return lines


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage problems; we reserve 2 for
    config validation, so remap to 1."""

    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _header(spec: ProblemSpec, command: str, params: str, columns: str) -> list[str]:
    return [
        f"# sl2t {__version__}",
        f"# digest: {spec_digest(spec)}",
        f"# command: {command}",
        f"# params: {params}",
        f"# columns: {columns}",
    ]


def _emit(lines: list[str], out: Optional[str]) -> tuple[str, ...]:
    text = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(text)
        return ()
    Path(out).write_text(text)
    return (out,)


def _report(rep: RunReport) -> None:
    for line in rep.render():
        print(line, file=sys.stderr)


def _parse_overrides(pairs: Optional[Sequence[str]]) -> dict:
    out = {}
    for item in pairs or ():
        key, sep, value = item.partition("=")
        if not sep or key not in _SOLVER_KEYS:
            raise ValueError(
                f"--tol-override expects KEY=VALUE with KEY in {_SOLVER_KEYS}; got {item!r}"
            )
        try:
            out[key] = int(value) if key in _SOLVER_INT_KEYS else float(value)
        except ValueError:
            raise ValueError(f"--tol-override value is not numeric: {item!r}") from None
    return out


def _load_spec(path: str, overrides: dict) -> ProblemSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read config {path!r}: {exc}"]) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config is not valid JSON: {exc}"]) from exc
    if overrides:
        if not isinstance(data, dict):
            raise ConfigError(["config root must be an object"])
        solver = dict(data.get("solver") or {})
        solver.update(overrides)
        data["solver"] = solver
    return parse_config(data)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_solve(spec: ProblemSpec, args) -> int:
    res = locate_eigenvalues(spec, args.n_max)
    lines = _header(
        spec, "solve", f"n_max={args.n_max}",
        "n,lambda_n,mu_n,bracket_lo,bracket_hi,abs_delta",
    )
    for r in res.records:
        mu = _fmt(r.mu_n) if r.mu_n is not None else ""
        lines.append(",".join(
            [str(r.n), _fmt(r.lambda_n), mu, _fmt(r.bracket[0]), _fmt(r.bracket[1]), _fmt(r.abs_delta)]
        ))
    outputs = _emit(lines, args.out)
    notes = ()
    if res.exhausted:
        notes = (f"partial scan: {len(res.records)} of {args.n_max} roots, "
                 f"stopped at lambda={_fmt(res.scanned_to)}",)
    _report(RunReport(spec_digest(spec), "solve", f"n_max={args.n_max}", outputs, notes=notes))
    return 0


def _cmd_asym(spec: ProblemSpec, args) -> int:
    which = case_of(spec).name
    lines = _header(spec, "asym", f"n_max={args.n_max}", "n,case,mu_asym")
    for n in range(1, args.n_max + 1):
        lines.append(f"{n},{which},{_fmt(mu_asymptotic(spec, n))}")
    outputs = _emit(lines, args.out)
    _report(RunReport(spec_digest(spec), "asym", f"n_max={args.n_max}", outputs))
    return 0


def _cmd_compare(spec: ProblemSpec, args) -> int:
    res = locate_eigenvalues(spec, args.n_hi + 6)
    try:
        report = decay_check(
            res.records, spec, args.n_lo, args.n_hi, args.bound,
            phase_total=args.phase_override,
        )
    except ValueError as exc:
        raise NumericalError(str(exc)) from exc
    by_index = {rec.n: rec for rec in res.records}
    params = f"n_lo={args.n_lo} n_hi={args.n_hi} bound={_fmt(args.bound)}"
    if args.phase_override is not None:
        params += f" phase_override={_fmt(args.phase_override)}"
    lines = _header(spec, "compare", params, "n,mu_computed,mu_asym,err,n_times_err")
    for n, err, prod in zip(report.ns, report.errors, report.products):
        rec = by_index[n - report.offset]
        asym = mu_asymptotic(spec, n, phase_total=args.phase_override)
        lines.append(f"{n},{_fmt(rec.mu_n)},{_fmt(asym)},{_fmt(err)},{_fmt(prod)}")
    verdict = "PASS" if report.verdict else "FAIL"
    lines.append(f"# verdict: {verdict}")
    outputs = _emit(lines, args.out)
    _report(RunReport(
        spec_digest(spec), "compare", params, outputs,
        notes=(f"verdict {verdict}: max n*err {_fmt(report.max_product)} vs bound {_fmt(args.bound)}",),
    ))
    return 0 if report.verdict else 3


def _cmd_eigenfunction(spec: ProblemSpec, args) -> int:
    res = locate_eigenvalues(spec, args.index)
    if len(res.records) < args.index:
        raise NumericalError(
            f"scan found only {len(res.records)} eigenvalues before exhausting its budget"
        )
    rec = res.records[args.index - 1]
    ef = eigenfunction(spec, rec, samples_per_piece=args.samples)
    lines = _header(
        spec, "eigenfunction", f"index={args.index} samples={args.samples}",
        "x,piece,u,u_prime",
    )
    lines.insert(4, f"# lambda_n: {_fmt(rec.lambda_n)}")
    lines.insert(5, f"# normalization: {_fmt(ef.normalization)}")

    def row(x, piece, u, v):
        return f"{_fmt(x)},{piece},{_fmt(u)},{_fmt(v)}"

    e = ef.ends
    for piece, samples in enumerate(ef.pieces, start=1):
        if piece == 2:
            lines.append(row(spec.h1, 1, e.h1_minus.u, e.h1_minus.v))
            lines.append(row(spec.h1, 2, e.h1_plus.u, e.h1_plus.v))
        if piece == 3:
            lines.append(row(spec.h2, 2, e.h2_minus.u, e.h2_minus.v))
            lines.append(row(spec.h2, 3, e.h2_plus.u, e.h2_plus.v))
        for x, u, v in zip(samples.xs[1:-1], samples.u[1:-1], samples.du[1:-1]):
            lines.append(row(x, piece, u, v))
    outputs = _emit(lines, args.out)
    _report(RunReport(
        spec_digest(spec), "eigenfunction",
        f"index={args.index} lambda_n={_fmt(rec.lambda_n)}", outputs,
    ))
    return 0


# ---------------------------------------------------------------------------
# verify


def _stage_consistency(spec: ProblemSpec):
    rng = np.random.default_rng(93)
    worst = 0.0
    for lam in rng.uniform(-20.0, 200.0, size=24):
        cv = char_value(spec, float(lam))
        worst = max(worst, cv.consistency_residual / (1.0 + abs(cv.value)))
    return worst <= 1e-7, f"max scaled residual {worst:.2e} over 24 random lam (tol 1e-07)"


def _stage_wronskian_constancy(spec: ProblemSpec):
    worst = 0.0
    for lam in (-7.5, 3.7, 61.3):
        left, right = build_left(spec, lam), build_right(spec, lam)
        for i in (1, 2, 3):
            a, b = piece_bounds(spec, i)
            xs = np.linspace(a, b, 100)
            uf, vf = left.pieces[i - 1].eval(xs)
            ug, vg = right.pieces[i - 1].eval(xs)
            w = uf * vg - vf * ug
            spread = float((w.max() - w.min()) / (1.0 + np.abs(w).max()))
            worst = max(worst, spread)
    return worst <= 1e-8, f"max relative drift {worst:.2e} over 3 lam x 3 pieces x 100 pts (tol 1e-08)"


def _stage_symmetry(spec: ProblemSpec):
    if not spec.is_definite:
        return None, "indefinite form: symmetry certification not applicable"
    grid = QuadratureGrid.build(spec)
    worst = 0.0
    for s in range(6):
        F = sample_domain_element(spec, 2 * s, grid=grid)
        G = sample_domain_element(spec, 2 * s + 1, grid=grid)
        AF, AG = apply_operator(spec, F), apply_operator(spec, G)
        scale = 1.0 + norm(spec, AF) * norm(spec, G) + norm(spec, F) * norm(spec, AG)
        worst = max(worst, symmetry_residual(spec, F, G) / scale)
    return worst <= 1e-7, f"max scaled residual {worst:.2e} over 6 seeded pairs (tol 1e-07)"


def _stage_interface_wronskians(spec: ProblemSpec):
    worst = 0.0
    for s in (1, 2, 3, 4):
        F = sample_domain_element(spec, s)
        G = sample_domain_element(spec, s + 50)
        worst = max(worst, max(interface_wronskian_residuals(spec, F, G)))
    return worst <= 1e-10, f"max identity residual {worst:.2e} over 4 seeded pairs (tol 1e-10)"


def _stage_orthogonality(spec: ProblemSpec):
    if not spec.is_definite:
        return None, "indefinite form: orthogonality certification not applicable"
    grid = QuadratureGrid.build(spec)
    recs = locate_eigenvalues(spec, 5).records
    fns = [eigenfunction(spec, rec, samples_per_piece=4, grid=grid) for rec in recs]
    gram = orthogonality_matrix(spec, fns, grid=grid)
    off = float(np.max(np.abs(gram - np.diag(np.diag(gram)))))
    diag = float(np.max(np.abs(np.diag(gram) - 1.0)))
    ok = off <= 1e-6 and diag <= 1e-8
    return ok, f"off-diagonal {off:.2e} (tol 1e-06), diagonal defect {diag:.2e} (tol 1e-08)"


def _stage_decay(spec: ProblemSpec):
    if not phase_coherent(spec):
        return None, "interfaces reflect (mismatched jump/weight ratios): single-phase asymptotics not applicable"
    res = locate_eigenvalues(spec, 46)
    report = decay_check(res.records, spec, 5, 40, 1.0)
    return report.verdict, f"max n*err {report.max_product:.3f} for n in [5, 40] (bound 1.0)"


_STAGES: tuple[tuple[str, Callable], ...] = (
    ("consistency", _stage_consistency),
    ("wronskian-constancy", _stage_wronskian_constancy),
    ("symmetry", _stage_symmetry),
    ("interface-wronskians", _stage_interface_wronskians),
    ("orthogonality", _stage_orthogonality),
    ("decay", _stage_decay),
)


def _cmd_verify(spec: ProblemSpec, args) -> int:
    print(f"# sl2t {__version__}")
    print(f"# digest: {spec_digest(spec)}")
    verdicts = []
    failed = False
    for name, stage in _STAGES:
        try:
            ok, detail = stage(spec)
        except (NumericalError, ValueError) as exc:
            ok, detail = False, f"stage raised: {exc}"
        status = "SKIPPED" if ok is None else ("PASS" if ok else "FAIL")
        failed = failed or status == "FAIL"
        verdicts.append((name, status, detail))
        print(f"{name}: {status} ({detail})")
    overall = "FAIL" if failed else "PASS"
    print(f"verify: {overall}")
    _report(RunReport(spec_digest(spec), "verify", "", (), verdicts=tuple(verdicts)))
    return 3 if failed else 0


# ---------------------------------------------------------------------------
# argument plumbing


def _build_parser() -> _Parser:
    parser = _Parser(prog="sl2t", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"sl2t {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("config", help="path to a JSON problem config")
        p.add_argument("--tol-override", action="append", metavar="KEY=VALUE",
                       help="override a solver setting (repeatable)")

    p = sub.add_parser("solve", help="locate eigenvalues and write the table")
    common(p)
    p.add_argument("--n-max", type=int, required=True, help="how many eigenvalues")
    p.add_argument("--out", help="output file (default stdout)")

    p = sub.add_parser("asym", help="tabulate the asymptotic frequencies")
    common(p)
    p.add_argument("--n-max", type=int, required=True, help="how many indices")
    p.add_argument("--out", help="output file (default stdout)")

    p = sub.add_parser("compare", help="computed vs asymptotic frequencies with a decay verdict")
    common(p)
    p.add_argument("--n-lo", type=int, required=True, help="first asymptotic index")
    p.add_argument("--n-hi", type=int, required=True, help="last asymptotic index")
    p.add_argument("--bound", type=float, default=1.0, help="bound on n*|err| (default 1.0)")
    p.add_argument("--phase-override", type=float, default=None,
                   help="replace the accumulated-phase denominator (negative control)")
    p.add_argument("--out", help="output file (default stdout)")

    p = sub.add_parser("eigenfunction", help="sample one normalized eigenfunction")
    common(p)
    p.add_argument("--index", type=int, required=True, help="eigenvalue index (1-based)")
    p.add_argument("--samples", type=int, default=40, help="interior samples per piece")
    p.add_argument("--out", help="output file (default stdout)")

    p = sub.add_parser("verify", help="run the whole verification suite")
    common(p)
    return parser


def _flag_problem(args) -> Optional[str]:
    if args.command in ("solve", "asym") and args.n_max < 1:
        return "--n-max must be >= 1"
    if args.command == "eigenfunction":
        if args.index < 1:
            return "--index must be >= 1"
        if args.samples < 1:
            return "--samples must be >= 1"
    if args.command == "compare":
        if args.n_lo < 1:
            return "--n-lo must be >= 1"
        if args.n_hi < args.n_lo:
            return "--n-hi must be >= --n-lo"
        if args.bound <= 0.0:
            return "--bound must be positive"
        if args.phase_override is not None and args.phase_override <= 0.0:
            return "--phase-override must be positive"
    return None


_DISPATCH = {
    "solve": _cmd_solve,
    "asym": _cmd_asym,
    "compare": _cmd_compare,
    "eigenfunction": _cmd_eigenfunction,
    "verify": _cmd_verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    t0 = time.perf_counter()
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    problem = _flag_problem(args)
    if problem is not None:
        print(f"sl2t {args.command}: error: {problem}", file=sys.stderr)
        return 1
    try:
        overrides = _parse_overrides(args.tol_override)
    except ValueError as exc:
        print(f"sl2t: error: {exc}", file=sys.stderr)
        return 1
    try:
        spec = _load_spec(args.config, overrides)
    except ConfigError as exc:
        for line in exc.errors:
            print(f"config error: {line}", file=sys.stderr)
        return 2
    try:
        code = _DISPATCH[args.command](spec, args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    print(f"wall time: {time.perf_counter() - t0:.2f} s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
