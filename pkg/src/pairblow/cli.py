"""Command-line frontend: verify theorems, solve standalone gates, inspect the oracle.

Exit codes: 0 = verified / solved, 1 = derivation mismatch or refused
certificate, 2 = invalid input.  Everything is randomness-free; output
ordering is fixed by theorem id.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from . import theorems
from .degen import (
    OracleEntry,
    default_oracle_table,
    oracle_check,
    oracle_table_from_json,
    oracle_table_to_json,
)
from .dimsolve import DominanceFails, GateProblem, check_certificate, solve_gate

ORACLE_ENV = "PAIRBLOW_ORACLE"


def _load_oracle_table() -> tuple[OracleEntry, ...]:
    path = os.environ.get(ORACLE_ENV)
    if not path:
        return default_oracle_table()
    with open(path, "r", encoding="utf-8") as fh:
        return oracle_table_from_json(json.load(fh))


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _parse_k_range(spec: str) -> range:
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        return range(int(lo), int(hi) + 1)
    value = int(spec)
    return range(value, value + 1)


# -- text rendering of traces ----------------------------------------------------------

def _render_lemma_lines(lemma: dict, indent: str = "  ") -> list[str]:
    lines = [f"{indent}gate {lemma['label']}: {lemma['gate']}"]
    adm = ", ".join(_render_entry(e) for e in lemma["admissible"]) or "(none)"
    exp = ", ".join(_render_entry(e) for e in lemma["expected"]) or "(none)"
    lines.append(f"{indent}  admissible: {adm}")
    lines.append(f"{indent}  expected:   {exp}")
    lines.append(
        f"{indent}  brute-force cross-check: {lemma['cross_check']}; "
        f"term audits: {lemma['term_audits']}"
    )
    return lines


def _render_entry(entry: Sequence) -> str:
    eta, d, c = entry
    extras = [x for x in (f"d={d}" if d is not None else None,
                          f"c={c}" if c is not None else None) if x]
    return eta + (f" [{', '.join(extras)}]" if extras else "")


def render_trace_text(trace: dict) -> str:
    kind = trace.get("kind")
    lines = [f"{trace['theorem']} [{kind}]"]
    if kind == "vanishing":
        sym = trace["symbolic"]
        lines.append(
            f"  symbolic gate: {sym['gate']} -> empty for all k >= 1 "
            f"(cross-check {sym['cross_check']})"
        )
        for case in trace["k_cases"]:
            lines.append(
                f"  k={case['k']}: {case['verdict']} (cross-check {case['cross_check']})"
            )
    elif kind == "comparison":
        for lemma in trace["lemmas"]:
            lines.extend(_render_lemma_lines(lemma))
        if trace.get("probe"):
            probe = trace["probe"]
            lines.append(
                f"  divisor probe {probe['insertion']}: pairing {probe['divisor_pairing']}"
            )
        if trace.get("ratio"):
            ratio = trace["ratio"]
            lines.append(f"  ratio: {ratio['numerator']} / {ratio['denominator']}")
            lines.append(f"  oracle route: {trace['oracle']['route']}")
    else:  # lemma
        lines.extend(_render_lemma_lines({**trace, "label": trace["theorem"]}))
    result = trace.get("result")
    if result is not None:
        lines.append(f"  result: {result} (expected {trace['expected']})")
    for note in trace.get("notes", ()):
        lines.append(f"  note: {note}")
    lines.append(f"  status: {trace['status'].upper()}")
    return "\n".join(lines)


# -- subcommands -------------------------------------------------------------------------

def cmd_verify(args: argparse.Namespace) -> int:
    try:
        k_range = _parse_k_range(args.k)
        if len(k_range) == 0:
            raise ValueError("empty k range")
    except ValueError as exc:
        print(f"error: bad --k value: {exc}", file=sys.stderr)
        return 2
    if args.enum_bound < 1:
        print("error: --enum-bound must be >= 1", file=sys.stderr)
        return 2
    try:
        table = _load_oracle_table()
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: cannot load oracle table: {exc}", file=sys.stderr)
        return 2

    if args.all:
        ids = list(theorems.ALL_IDS)
    elif args.theorem:
        if args.theorem not in theorems.ALL_IDS:
            print(
                f"error: unknown theorem {args.theorem!r}; choose from "
                f"{', '.join(theorems.ALL_IDS)}",
                file=sys.stderr,
            )
            return 2
        ids = [args.theorem]
    else:
        print("error: give a theorem id or --all", file=sys.stderr)
        return 2

    traces = [
        theorems.run(
            tid,
            k_range=k_range,
            c_min=args.c_bound,
            enum_bound=args.enum_bound,
            table=table,
        )
        for tid in ids
    ]
    if args.format == "json":
        payload = traces[0] if len(traces) == 1 and not args.all else traces
        _emit(json.dumps(payload, indent=2, sort_keys=True), args.out)
    else:
        _emit("\n\n".join(render_trace_text(t) for t in traces), args.out)
    return 0 if all(t["status"] == "verified" for t in traces) else 1


def cmd_solve_gate(args: argparse.Namespace) -> int:
    try:
        with open(args.file, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        problem = GateProblem.from_json(data)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: cannot read gate problem: {exc}", file=sys.stderr)
        return 2
    try:
        cert = solve_gate(problem, args.enum_bound)
    except DominanceFails as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 1
    assert check_certificate(cert), "internal error: certificate fails re-validation"
    if args.format == "json":
        _emit(json.dumps(cert.to_json(), indent=2, sort_keys=True), args.out)
    else:
        lines = [f"gate: {problem.render()}", f"verdict: {cert.verdict}"]
        for sol in cert.solutions:
            lines.append(f"  solution: {sol.render()}")
        lines.extend(f"  {step}" for step in cert.chain)
        _emit("\n".join(lines), args.out)
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    try:
        table = _load_oracle_table()
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: cannot load oracle table: {exc}", file=sys.stderr)
        return 2
    if args.action == "list":
        if args.format == "json":
            _emit(json.dumps(oracle_table_to_json(table), indent=2, sort_keys=True), args.out)
        else:
            lines = []
            for entry in table:
                lines.append(f"{entry.symbol} = {entry.value.render()}")
                lines.append(f"    provenance: {entry.provenance}")
                if entry.note:
                    lines.append(f"    note: {entry.note}")
            _emit("\n".join(lines), args.out)
        return 0
    # action == "check"
    results = oracle_check(table)
    ok = all(good for _, _, good in results)
    if args.format == "json":
        payload = [
            {
                "symbol": entry.symbol,
                "stored": entry.value.render(),
                "derived": derived.render(),
                "match": good,
            }
            for entry, derived, good in results
        ]
        _emit(json.dumps(payload, indent=2, sort_keys=True), args.out)
    else:
        lines = [
            f"{'ok ' if good else 'FAIL'} {entry.symbol}: stored {entry.value.render()}"
            f" / derived {derived.render()}"
            for entry, derived, good in results
        ]
        lines.append("all cross-checks passed" if ok else "cross-check failures found")
        _emit("\n".join(lines), args.out)
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pairblow",
        description="Verify blow-up identities for stable-pair partition functions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run a theorem or lemma verification")
    verify.add_argument("theorem", nargs="?", help=f"one of: {', '.join(theorems.ALL_IDS)}")
    verify.add_argument("--all", action="store_true", help="verify everything")
    verify.add_argument("--k", default="1..5", help="k range for vanishing theorems, e.g. 1..5")
    verify.add_argument("--c-bound", type=int, default=None, dest="c_bound",
                        help="override the lower bound on the curve-degree parameter c")
    verify.add_argument("--enum-bound", type=int, default=theorems.DEFAULT_ENUM_BOUND,
                        dest="enum_bound", help="partition-size bound for cross-checks")
    verify.add_argument("--format", choices=("text", "json"), default="text")
    verify.add_argument("--out", default=None, help="write the report to a file")
    verify.set_defaults(func=cmd_verify)

    solve = sub.add_parser("solve-gate", help="solve a gate problem from a JSON file")
    solve.add_argument("file")
    solve.add_argument("--enum-bound", type=int, default=theorems.DEFAULT_ENUM_BOUND,
                       dest="enum_bound")
    solve.add_argument("--format", choices=("text", "json"), default="text")
    solve.add_argument("--out", default=None)
    solve.set_defaults(func=cmd_solve_gate)

    oracle = sub.add_parser("oracle", help="inspect or re-validate the oracle table")
    oracle.add_argument("action", choices=("list", "check"))
    oracle.add_argument("--format", choices=("text", "json"), default="text")
    oracle.add_argument("--out", default=None)
    oracle.set_defaults(func=cmd_oracle)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
