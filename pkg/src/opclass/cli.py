"""Command-line interface.

Exit codes: 0 when every requested expectation holds, 1 on a verdict
mismatch, 2 on input errors.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import classes, extensions, registry, schemas, shifts, toeplitz
from .errors import OpclassError, SpecParseError
from .linalg import mpow
from .report import ClassReportDocument, dumps
from .verdicts import Certificate, ClassVerdict
from . import verdicts as V

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT = 0, 1, 2
DEFAULT_TOL = 1e-9


def default_tol() -> float:
    raw = os.environ.get("OPCLASS_TOL")
    if not raw:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError as exc:
        raise SpecParseError(f"OPCLASS_TOL is not a number: {raw!r}") from exc
    if not tol > 0:
        raise SpecParseError("OPCLASS_TOL must be positive")
    return tol


def _csv(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _renamed(v: ClassVerdict, name: str) -> ClassVerdict:
    return ClassVerdict(name, v.holds, v.residual, v.certificate, v.note)


# -- shift analyze --------------------------------------------------------------


def _weights_from_args(args) -> shifts.WeightSequence:
    if args.file:
        if args.prefix is not None or args.tail_const is not None or args.tail_periodic is not None:
            raise SpecParseError("give either a weights file or inline --prefix/--tail-* flags")
        return schemas.parse_weights(schemas.load_json(args.file), args.exact)
    if args.tail_const is not None and args.tail_periodic is not None:
        raise SpecParseError("--tail-const and --tail-periodic are exclusive")
    if args.tail_const is None and args.tail_periodic is None and args.prefix is None:
        raise SpecParseError("no weights given")
    doc = {"prefix": _csv(args.prefix or "")}
    if args.tail_periodic is not None:
        doc["tail"] = {"periodic": _csv(args.tail_periodic)}
    else:
        doc["tail"] = {"constant": (args.tail_const or "1").strip()}
    return schemas.parse_weights(doc, args.exact)


def analyze_shift(w: shifts.WeightSequence, n: int, k_max: int, tol: float,
                  trunc_n: int = 40) -> ClassReportDocument:
    out = [shifts.is_hyponormal_shift(w)]
    out += [shifts.is_k_hyponormal_shift(w, k, tol=tol) for k in range(2, k_max + 1)]
    out += [
        shifts.is_subnormal_shift(w),
        shifts.is_n_subnormal_shift(w, n),
        shifts.is_quasinormal_shift(w),
        shifts.is_n_quasinormal_shift(w, n),
        shifts.is_quasi_n_normal_shift(w, n),
        shifts.quadratic_hyponormality_probe(w, trunc_N=trunc_n, tol=max(tol, 1e-8)),
    ]
    dec = shifts.decompose_power(w, n)
    extras = {
        "weights": str(w),
        "moments": list(shifts.moments(w, 8).gammas),
        "power_decomposition": dec.to_json(),
    }
    return ClassReportDocument(
        "shift analyze",
        {"weights": w.to_json(), "n": n, "kmax": k_max, "trunc": trunc_n},
        {"tol": tol, "quadratic_probe_tol": max(tol, 1e-8)},
        out, extras,
    )


def _cmd_shift_analyze(args) -> ClassReportDocument:
    w = _weights_from_args(args)
    return analyze_shift(w, args.n, args.kmax, args.tol, args.trunc)


# -- shift derive-quasinormal ---------------------------------------------------


def _seed_values(text: str, exact: bool) -> list:
    vals = []
    for tok in _csv(text):
        x = shifts.parse_scalar(tok, True)
        vals.append(x if exact else float(x))
    return vals


def derive_quasinormal(n: int, seed: Sequence, steps: int, bound: float, horizon: int,
                       tol: float) -> ClassReportDocument:
    cont = shifts.derive_quasinormal_continuation(n, seed, steps)
    probe = shifts.boundedness_forces_periodicity_probe(n, seed, bound, horizon)
    if probe.escaped_at is not None:
        verdict = ClassVerdict(
            "bounded_periodic", False, 0.0,
            Certificate(V.VIOLATION, {"escaped_at": probe.escaped_at, "bound": bound}),
            "continuation leaves the bound, so no bounded quasinormal power",
        )
    else:
        period, res = probe.periodic_within
        holds = res <= tol
        verdict = ClassVerdict(
            "bounded_periodic", holds, res,
            Certificate(V.PERIODICITY, {"period": period, "horizon": horizon,
                                        "max_residual": res}),
            f"period {period}" if holds else "bounded but not periodic on the horizon",
        )
    return ClassReportDocument(
        "shift derive-quasinormal",
        {"n": n, "seed": list(seed), "steps": steps, "bound": bound, "horizon": horizon},
        {"tol": tol},
        [verdict],
        {"continuation": cont, "probe": probe.to_dict()},
    )


def _cmd_derive(args) -> ClassReportDocument:
    seed = _seed_values(args.seed, args.exact)
    return derive_quasinormal(args.n, seed, args.steps, args.bound, args.horizon, args.tol)


def _continuation_line(doc: ClassReportDocument) -> str:
    def fmt(x):
        return str(x) if isinstance(x, Fraction) else f"{x:.12g}"

    return ", ".join(fmt(x) for x in doc.extras["continuation"])


# -- matrix analyze -------------------------------------------------------------


def analyze_matrix(t: np.ndarray, n: int, k_max: int, tol: float) -> ClassReportDocument:
    out = [
        classes.is_normal(t, tol),
        classes.is_n_normal(t, n, tol),
        classes.is_hyponormal(t, tol),
        classes.is_quasinormal(t, tol),
        classes.is_quasi_n_normal(t, n, tol),
        classes.is_n_quasinormal(t, n, tol),
        classes.power_identity_check(t, n, k_max, tol),
    ]
    out += [
        _renamed(classes.bram_halmos_block_psd(t, n, k, tol), f"{n}_subnormal_certificate_k{k}")
        for k in range(1, k_max + 1)
    ]
    return ClassReportDocument(
        "matrix analyze", {"matrix": t, "n": n, "kmax": k_max}, {"tol": tol}, out,
    )


def _cmd_matrix(args) -> ClassReportDocument:
    t = schemas.parse_matrix(schemas.load_json(args.file))
    if t.shape[0] != t.shape[1]:
        raise SpecParseError(f"matrix must be square, got {t.shape[0]}x{t.shape[1]}", "/rows")
    return analyze_matrix(t, args.n, args.kmax, args.tol)


# -- toeplitz analyze -----------------------------------------------------------


def analyze_toeplitz(sym: toeplitz.MatrixSymbol, order: int, n: int, tol: float,
                     grid: int = toeplitz.DEFAULT_GRID) -> ClassReportDocument:
    tr = toeplitz.assemble(sym, order)
    out = [
        toeplitz.symbol_is_normal_ae(sym, grid, tol),
        toeplitz.truncated_class_probe(tr, "hyponormal", tol),
        toeplitz.truncated_class_probe(tr, ("n_normal", n), tol),
        toeplitz.truncated_class_probe(tr, ("n_quasinormal", n), tol),
    ]
    extras = {"dimension": tr.matrix.shape[0], "power_is_zero": not np.any(mpow(tr.matrix, n))}
    return ClassReportDocument(
        "toeplitz analyze", {"symbol": sym.to_json(), "order": order, "n": n, "grid": grid},
        {"tol": tol}, out, extras,
    )


def _cmd_toeplitz(args) -> ClassReportDocument:
    sym = schemas.parse_symbol(schemas.load_json(args.file))
    return analyze_toeplitz(sym, args.order, args.n, args.tol, args.grid)


# -- extend analyze -------------------------------------------------------------


def extension_checks(spec: extensions.ExtensionSpec, rng: np.random.Generator, m: int,
                     k_max: int, tol: float, poly: Sequence[complex]) -> tuple[list, dict]:
    ext = extensions.minimal_extension(spec)
    again = extensions.minimal_extension(ext.as_spec(spec.n))
    idem = again.dimension == ext.dimension
    spectral = extensions.spectral_inclusions_check(ext.as_spec(spec.n))
    povm = extensions.povm_moment_check(spec, k_max, tol)
    forms = extensions.form_inequality_check(spec, rng, tol=tol)
    harness = extensions.subn_power_quasinormal_theorem_harness(spec, m, k_max, tol)
    sset = extensions.spectral_set_check(spec, poly, tol)
    out = [
        ClassVerdict("minimal_extension_contains_H", ext.contains_H, 0.0,
                     Certificate(V.RESIDUAL, {"dimension": ext.dimension,
                                              "invariance_defect": ext.invariance_defect})),
        ClassVerdict("minimal_extension_idempotent", idem, 0.0,
                     Certificate(V.RULE, {"dimension": ext.dimension,
                                          "dimension_again": again.dimension})),
        ClassVerdict("spectral_inclusion", spectral["within_tolerance"],
                     spectral["hausdorff_defect"],
                     Certificate(V.RESIDUAL, {"hausdorff_defect": spectral["hausdorff_defect"]})),
        ClassVerdict("povm_moments", max(povm) <= tol, max(povm),
                     Certificate(V.RESIDUAL, {"relative_residuals": povm})),
        ClassVerdict("form_inequality", forms["holds"], max(forms["worst_excess"], 0.0),
                     Certificate(V.RESIDUAL, forms)),
        ClassVerdict("power_quasinormal_harness", not harness["flag"],
                     harness["conclusion_residual"],
                     Certificate(V.RULE, {k: v for k, v in harness.items()})),
    ]
    extras = {"minimal_extension_dimension": ext.dimension, "spectral_set": sset}
    return out, extras


def _combine(per_sample: list) -> list:
    """Fold verdict lists from many samples into one list (all must hold)."""
    out = []
    for i, first in enumerate(per_sample[0]):
        vs = [sample[i] for sample in per_sample]
        failing = [j for j, v in enumerate(vs) if not v.holds]
        out.append(ClassVerdict(
            first.class_name, not failing, max(v.residual for v in vs),
            Certificate(V.RESIDUAL, {"samples": len(vs), "failing_samples": failing}),
        ))
    return out


def _cmd_extend(args) -> ClassReportDocument:
    rng = np.random.default_rng(args.seed)
    poly = [complex(c) for c in _csv(args.poly)]
    if not poly:
        raise SpecParseError("--poly needs at least one coefficient")
    if args.generate:
        if args.file:
            raise SpecParseError("give either a file or --generate, not both")
        specs = [extensions.random_rr_spec(rng) for _ in range(args.generate)]
        source = {"generate": args.generate, "seed": args.seed}
    elif args.file:
        specs = [schemas.parse_extension(schemas.load_json(args.file))]
        source = {"spec": specs[0].to_json(), "seed": args.seed}
    else:
        raise SpecParseError("give an extension spec file or --generate N")
    samples, extras = [], {}
    for spec in specs:
        verdicts, ex = extension_checks(spec, rng, args.m, args.kmax, args.tol, poly)
        samples.append(verdicts)
        extras.setdefault("minimal_extension_dimensions", []).append(ex["minimal_extension_dimension"])
        extras.setdefault("spectral_set", []).append(ex["spectral_set"])
    out = samples[0] if len(samples) == 1 else _combine(samples)
    source.update({"m": args.m, "kmax": args.kmax, "poly": poly})
    return ClassReportDocument("extend analyze", source, {"tol": args.tol}, out, extras)


# -- registry run ---------------------------------------------------------------


def _cmd_registry(args) -> int:
    entries = registry.select(args.filter, registry.REGISTRY)
    if not entries:
        print(f"no registry entry matches {args.filter!r}", file=sys.stderr)
        return EXIT_INPUT
    start = time.perf_counter()
    results = registry.run(entries, workers=args.workers)
    elapsed = time.perf_counter() - start
    ok = all(r.passed for r in results)
    print(registry.format_table(results))
    print(f"{sum(r.passed for r in results)}/{len(results)} claims reproduced "
          f"across {len(entries)} entries in {elapsed:.2f}s")
    if args.json:
        doc = {"command": "registry run", "filter": args.filter,
               "results": [r.to_dict() for r in results], "all_passed": ok}
        _write(args.json, dumps(doc))
    return EXIT_OK if ok else EXIT_MISMATCH


# -- plumbing -------------------------------------------------------------------


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w") as fh:
        fh.write(text)


def _parse_expectations(items: Sequence[str]) -> dict:
    out = {}
    for item in items or ():
        name, sep, val = item.partition("=")
        if not sep or val not in ("holds", "fails"):
            raise SpecParseError(f"--expect wants NAME=holds|fails, got {item!r}")
        out[name] = val == "holds"
    return out


def _check_expectations(doc: ClassReportDocument, expected: dict) -> list[str]:
    got = {v.class_name: v.holds for v in doc.verdicts}
    problems = []
    for name, want in expected.items():
        if name not in got:
            problems.append(f"{name}: no such verdict")
        elif got[name] != want:
            problems.append(f"{name}: expected {'holds' if want else 'fails'}, "
                            f"got {'holds' if got[name] else 'fails'}")
    return problems


def _common(p: argparse.ArgumentParser, tol: float, kmax: bool = True) -> None:
    p.add_argument("--tol", type=float, default=tol, help="relative tolerance (env OPCLASS_TOL)")
    if kmax:
        p.add_argument("--kmax", type=int, default=3, help="largest k for k-indexed tests")
    p.add_argument("--json", metavar="OUT", help="write the JSON report to OUT ('-' for stdout)")
    p.add_argument("--format", choices=("markdown", "json"), default="markdown",
                   help="what to print on stdout")
    p.add_argument("--expect", action="append", metavar="NAME=holds|fails",
                   help="exit 1 unless the named verdict matches")


def build_parser(tol: float = DEFAULT_TOL) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opclass", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="group", required=True)

    shift = sub.add_parser("shift", help="weighted shifts").add_subparsers(dest="action", required=True)
    sa = shift.add_parser("analyze", help="classify a weighted shift")
    sa.add_argument("file", nargs="?", help="weights JSON file")
    sa.add_argument("--prefix", help="comma-separated leading weights")
    sa.add_argument("--tail-const", help="constant tail value")
    sa.add_argument("--tail-periodic", help="comma-separated tail cycle")
    sa.add_argument("--n", type=int, default=2)
    sa.add_argument("--exact", action="store_true", help="read float literals as exact rationals")
    sa.add_argument("--trunc", type=int, default=40, help="truncation size for the quadratic probe")
    _common(sa, tol)
    sa.set_defaults(run=_cmd_shift_analyze)

    sd = shift.add_parser("derive-quasinormal", help="continue a seed under n-quasinormality")
    sd.add_argument("--n", type=int, required=True)
    sd.add_argument("--seed", required=True, help="comma-separated 2n-1 seed weights")
    sd.add_argument("--steps", type=int, default=8)
    sd.add_argument("--exact", action="store_true", help="exact rational arithmetic")
    sd.add_argument("--bound", type=float, default=1e6, help="escape bound M for [1/M, M]")
    sd.add_argument("--horizon", type=int, default=500)
    _common(sd, tol, kmax=False)
    sd.set_defaults(run=_cmd_derive)

    mat = sub.add_parser("matrix", help="dense matrices").add_subparsers(dest="action", required=True)
    ma = mat.add_parser("analyze", help="classify a matrix")
    ma.add_argument("file")
    ma.add_argument("--n", type=int, default=2)
    _common(ma, tol)
    ma.set_defaults(run=_cmd_matrix)

    top = sub.add_parser("toeplitz", help="block Toeplitz truncations").add_subparsers(
        dest="action", required=True)
    ta = top.add_parser("analyze", help="classify a block Toeplitz truncation")
    ta.add_argument("file")
    ta.add_argument("--order", type=int, default=16)
    ta.add_argument("--n", type=int, default=2)
    ta.add_argument("--grid", type=int, default=toeplitz.DEFAULT_GRID)
    _common(ta, tol)
    ta.set_defaults(run=_cmd_toeplitz)

    ext = sub.add_parser("extend", help="sub-n-normal extensions").add_subparsers(
        dest="action", required=True)
    ea = ext.add_parser("analyze", help="minimal extension and related checks")
    ea.add_argument("file", nargs="?")
    ea.add_argument("--generate", type=int, default=0, metavar="N",
                    help="check N random square-root-of-normal specs instead of a file")
    ea.add_argument("--seed", type=int, default=0, help="RNG seed for random vectors and specs")
    ea.add_argument("--m", type=int, default=2, help="power used by the quasinormal harness")
    ea.add_argument("--poly", default="0,1", help="ascending coefficients for the spectral-set probe")
    _common(ea, tol)
    ea.set_defaults(run=_cmd_extend)

    reg = sub.add_parser("registry", help="counterexample registry").add_subparsers(
        dest="action", required=True)
    rr = reg.add_parser("run", help="check every catalogued claim")
    rr.add_argument("--filter", help="substring of entry names to run")
    rr.add_argument("--workers", type=int, default=4)
    rr.add_argument("--json", metavar="OUT")
    rr.set_defaults(run=None)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        tol = default_tol()
    except SpecParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    parser = build_parser(tol)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.group == "registry":
        return _cmd_registry(args)
    try:
        if not args.tol > 0:
            raise SpecParseError("--tol must be positive")
        expected = _parse_expectations(args.expect)
        doc = args.run(args)
        text = doc.to_json()
    except (OpclassError, ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.json:
        _write(args.json, text)
    if args.format == "json":
        if args.json != "-":
            sys.stdout.write(text)
    else:
        if doc.command == "shift derive-quasinormal":
            print(_continuation_line(doc))
        sys.stdout.write(doc.to_markdown())
    problems = _check_expectations(doc, expected)
    for p in problems:
        print(f"mismatch: {p}", file=sys.stderr)
    return EXIT_MISMATCH if problems else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
