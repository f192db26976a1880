"""Command-line front end.

Exit codes: 0 success, 1 a verification found a counterexample, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import core_revision as cr
from .errors import InputError, NotRanked
from .inheritance import derive_specificity, explain, infer, parse_diagram
from .prefstruct import (
    PreferentialStructure,
    is_ranked,
    parse_structure,
    ranks,
    rankedness_violation,
    smoothness_violation,
    transitivity_violation,
)
from .size_algebra import (
    ALL_FACTS,
    FactId,
    check_coh1,
    check_coh2,
    check_muCUM,
    check_muEQ,
    check_muPR,
    classify,
    less,
    less_prime,
    run_sweep,
    sweep_corpus,
)

MAX_SWEEP_SIZE = 8
DEFAULT_SEED = 42
DEFAULT_SAMPLES = 1000


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit(args, payload: dict, lines: Sequence[str]) -> None:
    if args.json:
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n")
    else:
        sys.stdout.write("\n".join(lines) + "\n")


def _fmt_set(names) -> str:
    return "{" + ", ".join(names) + "}"


# -- structure ----------------------------------------------------------------


def cmd_structure(args) -> int:
    S = parse_structure(_read(args.path))
    checks = {}
    t = transitivity_violation(S)
    checks["transitive"] = {"holds": t is None}
    if t:
        checks["transitive"]["witness"] = {"x": S.elements[t[0]], "y": S.elements[t[1]], "z": S.elements[t[2]]}
    sm = smoothness_violation(S)
    checks["smooth"] = {"holds": sm is None}
    if sm:
        checks["smooth"]["witness"] = {"A": S.names(sm[0]), "x": S.elements[sm[1]]}
    rv = rankedness_violation(S)
    checks["ranked"] = {"holds": rv is None}
    if rv:
        checks["ranked"]["witness"] = {"x": S.elements[rv[0]], "x'": S.elements[rv[1]], "y": S.elements[rv[2]]}
    for label, fn in (("coh1", check_coh1), ("coh2", check_coh2), ("mu_pr", check_muPR),
                      ("mu_cum", check_muCUM), ("mu_eq", check_muEQ)):
        verdict = fn(S)
        checks[label] = {"holds": verdict.holds}
        if verdict.witness:
            checks[label]["witness"] = {k: S.names(v) for k, v in verdict.witness.items()}
    payload = {"elements": list(S.elements), "checks": checks}
    if rv is None:
        payload["ranks"] = ranks(S)
    lines = [f"elements: {' '.join(S.elements)}"]
    for label, entry in checks.items():
        line = f"{label}: {str(entry['holds']).lower()}"
        if "witness" in entry:
            parts = []
            for k, v in entry["witness"].items():
                parts.append(f"{k}={_fmt_set(v) if isinstance(v, list) else v}")
            line += "  (witness " + ", ".join(parts) + ")"
        lines.append(line)
    if "ranks" in payload:
        lines.append("ranks: " + ", ".join(f"{k}:{v}" for k, v in payload["ranks"].items()))
    _emit(args, payload, lines)
    return 0


# -- size ---------------------------------------------------------------------


def _parse_set(S: PreferentialStructure, text: str) -> int:
    names = [t.strip() for t in text.split(",") if t.strip()]
    return S.subset(names)


def cmd_size(args) -> int:
    S = parse_structure(_read(args.path))
    A = _parse_set(S, args.A)
    if args.mode == "classify":
        X = _parse_set(S, args.ref) if args.ref is not None else S.universe
        result = classify(S, X, A).value
        payload = {"mode": "classify", "A": S.names(A), "reference": S.names(X), "result": result}
        _emit(args, payload, [f"{_fmt_set(S.names(A))} is {result} in {_fmt_set(S.names(X))}"])
        return 0
    if args.B is None:
        raise InputError(f"mode {args.mode} needs two sets")
    B = _parse_set(S, args.B)
    X = _parse_set(S, args.ref) if args.ref is not None else A | B
    fn = less if args.mode == "less" else less_prime
    result = fn(S, A, B, X)
    symbol = "<" if args.mode == "less" else "<'"
    payload = {"mode": args.mode, "A": S.names(A), "B": S.names(B),
               "reference": S.names(X), "result": result}
    _emit(args, payload, [
        f"{_fmt_set(S.names(A))} {symbol} {_fmt_set(S.names(B))} in {_fmt_set(S.names(X))}: "
        f"{str(result).lower()}"
    ])
    return 0


# -- verify -------------------------------------------------------------------


def cmd_verify(args) -> int:
    if not 1 <= args.max_size <= MAX_SWEEP_SIZE:
        raise InputError(f"--max-size must be between 1 and {MAX_SWEEP_SIZE}")
    names = args.facts or ["all"]
    if "all" in names:
        facts = list(ALL_FACTS)
    else:
        try:
            facts = [FactId(f.upper()) for f in names]
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    tallies = run_sweep(sweep_corpus(args.max_size, args.samples, args.seed), facts,
                        unconditional=args.unconditional)
    failing = [t for t in tallies.values() if t.counterexamples]
    payload = {
        "max_size": args.max_size,
        "seed": args.seed,
        "samples": args.samples,
        "unconditional": args.unconditional,
        "facts": [t.to_dict() for t in tallies.values()],
    }
    lines = [f"sweep: max_size={args.max_size} seed={args.seed} samples={args.samples}"
             + (" (hypotheses ignored)" if args.unconditional else "")]
    for t in tallies.values():
        verdict = "COUNTEREXAMPLES" if t.counterexamples else "ok"
        lines.append(
            f"{t.fact:20s} {verdict:15s} checked={t.checked} vacuous={t.vacuous} "
            f"not_applicable={t.not_applicable} counterexamples={len(t.counterexamples)}"
        )
        if t.counterexamples:
            first = t.counterexamples[0]
            lines.append(f"    e.g. {first['structure']} witness {first.get('witness')}")
    _emit(args, payload, lines)
    if not failing:
        return 0
    if args.unconditional:
        # failures outside a fact's hypothesis class are expected
        on_class = any(c.get("hypothesis_holds") for t in failing for c in t.counterexamples)
        return 1 if (args.strict or on_class) else 0
    return 1


# -- infer --------------------------------------------------------------------


def cmd_infer(args) -> int:
    D = parse_diagram(_read(args.path))
    result = infer(D, args.source, propagate_split=not args.no_split_propagation)
    targets = [args.target] if args.target else list(result.targets)
    if args.target:
        D.check_node(args.target)
    payload = {"source": args.source}
    records = []
    lines = [f"source: {args.source}"]
    for t in targets:
        if t == args.source:
            records.append({"target": t, "status": "SOURCE"})
            lines.append(f"{t}: source")
            continue
        rec = result.targets[t].to_dict()
        records.append(rec)
        lines.append(f"{t}: {rec['status']} in={rec['in_fraction']} out={rec['out_fraction']} "
                     f"unknown={rec['unknown_fraction']}")
    payload["targets"] = records
    payload["cells"] = result.to_dict()["cells"]
    lines.append(f"cells: {len(result.cells)}")
    for c in result.cells:
        ins = [n for n, m in c.membership.items() if m.value == "IN" and n != args.source]
        outs = [n for n, m in c.membership.items() if m.value == "OUT"]
        lines.append(f"  [{c.label or 'root'}] {c.fraction.numerator}/{c.fraction.denominator}"
                     f" in {_fmt_set(ins)} out {_fmt_set(outs)}")
    if args.explain:
        specs = derive_specificity(D)
        payload["specificity"] = [
            {"smaller": s.smaller, "larger": s.larger, "conflict": s.conflict,
             "kind": s.kind, "path": list(s.path)} for s in specs
        ]
        lines.append("specificity:")
        lines += [f"  {s.smaller} < {s.larger} via {s.conflict} ({s.kind})" for s in specs] or ["  none"]
        trace_targets = targets
        events = []
        for t in trace_targets:
            events += [str(e) for e in explain(D, args.source, t,
                                               propagate_split=not args.no_split_propagation)]
        payload["explain"] = events
        lines.append("trace:")
        lines += ["  " + e for e in events]
    _emit(args, payload, lines)
    return 0


# -- core ---------------------------------------------------------------------


def cmd_core(args) -> int:
    variables = cr.check_variables([v.strip() for v in args.vars.split(",") if v.strip()])
    phi = cr.parse_formula(args.formula, variables)
    X = cr.models(phi, variables)
    if not X:
        raise cr.UnsatisfiableInput("formula has no models")
    d = cr.hamming(len(variables))
    payload: dict = {"variables": list(variables), "formula": args.formula, "models": X.strings()}
    lines = [f"models ({len(X)}): " + " ".join(X.strings())]
    if args.method in ("depth", "both"):
        core_m = cr.core(X, args.m, d)
        dep = cr.depths(X, d)
        top = cr.depth_set(X, d)
        payload["depth"] = {
            "depths": {cr.format_assignment(x, X.n): _num(v) for x, v in dep.items()},
            "depth_set": _num(top),
            "m": args.m,
            "core": core_m.strings(),
        }
        lines.append(f"depth(X) = {_num(top)}")
        lines.append(f"core_{args.m}: " + " ".join(core_m.strings()))
    if args.method in ("peel", "both"):
        set_version = cr.peel(X, d)
        formula_version = cr.peel_formula(phi, variables, d)
        agree = set_version == formula_version
        payload["peel"] = {
            "layers": [z.strings() for z in set_version.layers],
            "core": set_version.core.strings(),
            "formula_version_agrees": agree,
        }
        for i, z in enumerate(set_version.layers):
            lines.append(f"layer {i}: " + " ".join(z.strings()))
        lines.append("peel core: " + " ".join(set_version.core.strings()))
        lines.append("formula version " + ("agrees" if agree else "DISAGREES"))
    if args.method == "both":
        same = payload["depth"]["core"] == payload["peel"]["core"]
        payload["cores_agree"] = same
        lines.append(f"peel core {'equals' if same else 'differs from'} core_{args.m}")
    _emit(args, payload, lines)
    return 0


def _num(v):
    return "inf" if v == cr.INF else int(v)


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")

    parser = argparse.ArgumentParser(prog="sizereason", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("structure", parents=[common], help="check properties of a preferential structure")
    p.add_argument("path", help="structure file, or - for stdin")
    p.set_defaults(func=cmd_structure)

    p = sub.add_parser("size", parents=[common], help="size queries on a structure")
    p.add_argument("path")
    p.add_argument("mode", choices=["classify", "less", "less_prime"])
    p.add_argument("A", help="comma-separated element names")
    p.add_argument("B", nargs="?", help="comma-separated element names")
    p.add_argument("--ref", help="reference set (default: A ∪ B, or everything for classify)")
    p.set_defaults(func=cmd_size)

    p = sub.add_parser("verify", parents=[common], help="exhaustive/random fact sweep")
    p.add_argument("facts", nargs="*", metavar="FACT",
                   help="fact ids (" + ", ".join(f.value for f in ALL_FACTS) + ") or all")
    p.add_argument("--max-size", type=int, default=5)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    p.add_argument("--unconditional", action="store_true",
                   help="check conclusions on every structure, ignoring hypotheses")
    p.add_argument("--strict", action="store_true",
                   help="exit 1 on any counterexample, even outside the hypothesis class")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("infer", parents=[common], help="inheritance inference from a source node")
    p.add_argument("path", help="diagram file, or - for stdin")
    p.add_argument("source")
    p.add_argument("--target")
    p.add_argument("--explain", action="store_true")
    p.add_argument("--no-split-propagation", action="store_true",
                   help="nodes decided by a split pass nothing further down")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("core", parents=[common], help="depth-based core and peeling of a formula")
    p.add_argument("--vars", required=True, help="comma-separated variables, first is leftmost")
    p.add_argument("formula")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--method", choices=["depth", "peel", "both"], default="both")
    p.set_defaults(func=cmd_core)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, NotRanked, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
