"""Command-line front end.

    galcohom cohomology SPEC --degree P
    galcohom verify SUITE [--seed N] [--trials N] [--places inf,2,3,17]

Exit codes: 0 pass, 1 check failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .cohom import Cohomology
from .gmod import SpecError, load_module_spec
from .suites import SUITES, Config, run_suite

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def render_factors(factors: Sequence[int]) -> str:
    if not factors:
        return "0"
    return " + ".join("Z" if f == 0 else f"Z/{f}" for f in factors)


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2)


def cohomology_report(path: str, degree: int) -> dict:
    M = load_module_spec(path)
    H = Cohomology(M.group, M, degree)
    gens = H.generators()
    return {
        "module": M.label,
        "group_order": M.group.order,
        "ring": "Z" if M.modulus == 0 else M.modulus,
        "rank": M.rank,
        "degree": degree,
        "invariant_factors": list(H.invariant_factors),
        "group": render_factors(H.invariant_factors),
        "representatives": [[[int(x) for x in row] for row in g.cocycle.reshape(len(g.cocycle), -1)]
                             for g in gens],
    }


def _render_cohomology(rep: dict) -> str:
    lines = [f"H^{rep['degree']}({rep['module'] or 'M'}) = {rep['group']}"]
    for k, tab in enumerate(rep["representatives"]):
        lines.append(f"  generator {k + 1}: cocycle rows {tab}")
    return "\n".join(lines)


def _render_suite(doc: dict) -> str:
    lines = [f"{doc['suite']}: {'PASS' if doc['passed'] else 'FAIL'} "
             f"({doc['summary'].get('passed', 0)}/{doc['summary'].get('checks', 0)} checks)"]
    if "sum" in doc["summary"]:
        lines.append(f"  sum = {doc['summary']['sum']}")
    for c in doc["checks"]:
        if not c["passed"]:
            lines.append(f"  FAIL {c['name']}: {json.dumps(c['detail'], sort_keys=True)}")
    return "\n".join(lines)


def _emit(doc: dict, text: str, args) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(dumps(doc) + "\n")
    print(dumps(doc) if args.format == "json" else text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="galcohom", description="Group cohomology of Galois-module models.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="write the JSON report to this file")
        p.add_argument("--format", choices=["text", "json"], default="text")
        p.add_argument("--degree-cap", type=int, default=None)
        p.add_argument("--precision", type=int, default=None)
        p.add_argument("--seed", type=int, default=0)

    c = sub.add_parser("cohomology", help="invariant factors of H^p(G, M) for a module-spec file")
    c.add_argument("spec")
    c.add_argument("--degree", type=int, required=True)
    common(c)

    v = sub.add_parser("verify", help="run a named verification suite")
    v.add_argument("suite", choices=SUITES)
    v.add_argument("--trials", type=int, default=None)
    v.add_argument("--places", default=None, help="comma-separated places, e.g. inf,2,3,17")
    common(v)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "cohomology":
        cap = 4 if args.degree_cap is None else args.degree_cap
        if args.degree < 0 or args.degree > cap:
            print(f"error: degree {args.degree} outside 0..{cap}", file=sys.stderr)
            return EXIT_INPUT
        try:
            rep = cohomology_report(args.spec, args.degree)
        except SpecError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_INPUT
        _emit(rep, _render_cohomology(rep), args)
        return EXIT_OK

    try:
        places = [p for p in args.places.split(",") if p.strip()] if args.places else None
        if places:
            from .localarith import Place
            for p in places:
                Place.parse(p)
    except ValueError as e:
        print(f"error: --places: {e}", file=sys.stderr)
        return EXIT_INPUT
    cfg = Config(seed=args.seed, trials=args.trials,
                 degree_cap=2 if args.degree_cap is None else args.degree_cap,
                 precision=args.precision, places=places)
    try:
        res = run_suite(args.suite, cfg)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    doc = res.to_dict()
    _emit(doc, _render_suite(doc), args)
    return EXIT_OK if res.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
