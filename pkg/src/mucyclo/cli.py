"""Command-line front end.

Exit codes: 0 accept / found / valid so far, 1 reject / exhausted /
countermodel found, 2 usage or resource error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .clo import CloError, check_clo, translate_clo_to_nw
from .corpus import ARTIFACT_NAMES, formula_alias, get_artifact, sequent_alias, write_corpus
from .errors import ResourceError
from .formula import (FormulaError, check_clean, closure, disjunction, is_adisjunctive,
                      parse_formula, parse_sequent, pretty)
from .nw import check_nw
from .proof import ProofFormatError, dump_proof, proof_to_dict, read_proof
from .search import BUDGET, FOUND, SearchBounds, SearchError, search_clo, search_nw
from .semantics import search_countermodel

OK, NO, ERROR = 0, 1, 2


class UsageError(Exception):
    pass


def _formula(text: str):
    alias = formula_alias(text)
    if alias is not None:
        return alias
    seq = sequent_alias(text)
    if seq is not None:
        return disjunction(seq)
    return parse_formula(text)


def _sequent(text: str):
    seq = sequent_alias(text)
    return seq if seq is not None else parse_sequent(text)


def _proof(source: str):
    try:
        art = get_artifact(source)
    except KeyError:
        art = None
    if art is not None and art.kind in ("nw-proof", "clo-derivation"):
        return art.payload
    if not Path(source).exists():
        raise UsageError(f"no such proof file or corpus proof: {source}")
    return read_proof(source)


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=True))
    else:
        print(text)


# -- subcommands ------------------------------------------------------------------


def cmd_parse(args) -> int:
    f = _formula(args.formula)
    clean = check_clean([f])
    _emit(args, {"formula": f.text, "pretty": pretty(f), "clean": bool(clean)},
          f"{f.text}\n{pretty(f)}\nclean: {bool(clean)}")
    return OK


def _diagnostics_payload(result):
    return [{"node": d.node, "kind": d.kind, "message": d.message} for d in result.diagnostics]


def cmd_check(args) -> int:
    proof = _proof(args.proof)
    if proof.system != args.system:
        raise UsageError(f"proof is a {proof.system} proof, not {args.system}")
    if args.system == "nw":
        result = check_nw(proof, method=args.method)
    else:
        result = check_clo(proof, allow_cut=args.allow_cut)
    verdict = "accepted" if result.ok else "rejected"
    lines = [f"{verdict}: {args.system} proof with {len(proof)} nodes"]
    lines += [f"  {d}" for d in result.diagnostics]
    payload = {"verdict": verdict, "system": args.system, "nodes": len(proof),
               "diagnostics": _diagnostics_payload(result)}
    if result.trace is not None:
        payload["trace"] = {"method": result.trace.method, "stats": result.trace.stats}
    _emit(args, payload, "\n".join(lines))
    return OK if result.ok else NO


def cmd_translate(args) -> int:
    proof = _proof(args.proof)
    if proof.system != "clo":
        raise UsageError("translate expects a clo derivation")
    try:
        nw = translate_clo_to_nw(proof)
    except CloError as e:
        _emit(args, {"verdict": "rejected", "error": str(e)}, f"rejected: {e}")
        return NO
    if args.output:
        Path(args.output).write_text(dump_proof(nw), encoding="utf-8")
        _emit(args, {"verdict": "translated", "output": args.output, "nodes": len(nw)},
              f"wrote {args.output} ({len(nw)} nodes)")
    elif args.json:
        print(json.dumps({"verdict": "translated", "proof": proof_to_dict(nw)}, indent=2,
                         ensure_ascii=False, sort_keys=True))
    else:
        sys.stdout.write(dump_proof(nw))
    return OK


def cmd_search(args) -> int:
    seq = _sequent(args.sequent)
    defaults = SearchBounds()
    bounds = SearchBounds(
        max_depth=args.max_depth or defaults.max_depth,
        max_clo=args.max_clo or defaults.max_clo,
        max_sequent=args.max_sequent or defaults.max_sequent,
        node_budget=args.budget or defaults.node_budget,
    )
    outcome = (search_nw if args.system == "nw" else search_clo)(seq, bounds)
    if outcome.proof is not None and args.output:
        Path(args.output).write_text(dump_proof(outcome.proof), encoding="utf-8")
    _emit(args, outcome.as_dict(), outcome.summary())
    if outcome.status == FOUND:
        return OK
    return ERROR if outcome.status == BUDGET else NO


def _countermodel(args):
    f = _formula(args.formula)
    return f, search_countermodel(f, args.max_states)


def cmd_valid(args) -> int:
    f, cm = _countermodel(args)
    if cm is None:
        _emit(args, {"formula": f.text, "valid_up_to": args.max_states, "countermodel": None},
              f"no countermodel with at most {args.max_states} states")
        return OK
    _emit(args, {"formula": f.text, "countermodel": {"model": cm.model.to_text(), "state": cm.state}},
          f"not valid: fails at state {cm.state} of {cm.model.to_text()}")
    return NO


def cmd_countermodel(args) -> int:
    return cmd_valid(args)


def cmd_adisjunctive(args) -> int:
    seq = _sequent(args.sequent)
    verdict = is_adisjunctive(seq)
    if verdict:
        _emit(args, {"adisjunctive": True}, "adisjunctive")
        return OK
    payload = {"adisjunctive": False, "nu_formula": verdict.nu_formula.text,
               "disjunction": verdict.disjunction.text}
    _emit(args, payload, f"not adisjunctive: {verdict.nu_formula.text} re-enters both disjuncts "
                         f"of {verdict.disjunction.text}")
    return NO


def cmd_closure(args) -> int:
    seq = _sequent(args.sequent)
    members = sorted(closure(seq).members)
    _emit(args, {"size": len(members), "members": [f.text for f in members]},
          "\n".join([f"{len(members)} formulas"] + [f"  {f.text}" for f in members]))
    return OK


def cmd_paper(args) -> int:
    from .suite import run_paper_suite
    report = run_paper_suite(scale=args.scale, battery=not args.no_battery)
    _emit(args, report.as_dict(), report.render())
    return OK if report.ok else NO


def cmd_corpus(args) -> int:
    if args.write:
        paths = write_corpus(args.write)
        _emit(args, {"written": [str(p) for p in paths]}, "\n".join(str(p) for p in paths))
        return OK
    rows = [(n, get_artifact(n).kind, get_artifact(n).description) for n in ARTIFACT_NAMES]
    _emit(args, {"artifacts": [{"name": n, "kind": k, "description": d} for n, k, d in rows]},
          "\n".join(f"{n:18} {k:15} {d}" for n, k, d in rows))
    return OK


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mucyclo",
                                     description="Cyclic and annotated proofs for the modal mu-calculus")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    # SUPPRESS keeps a subcommand from resetting a --json given before it
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", parents=[common], help="parse and print a formula")
    p.add_argument("formula")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("check", parents=[common], help="check an NW proof or Clo derivation")
    p.add_argument("--system", choices=("nw", "clo"), required=True)
    p.add_argument("--allow-cut", action="store_true")
    p.add_argument("--method", choices=("ramsey", "rank"), default="ramsey")
    p.add_argument("proof", help="proof JSON file or corpus proof name")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("translate", parents=[common], help="translate a Clo derivation to NW")
    p.add_argument("proof")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("search", parents=[common], help="bounded proof search")
    p.add_argument("--system", choices=("nw", "clo"), required=True)
    p.add_argument("--max-depth", type=_positive)
    p.add_argument("--max-clo", type=_positive)
    p.add_argument("--max-sequent", type=_positive)
    p.add_argument("--budget", type=_positive)
    p.add_argument("-o", "--output", help="write a found proof here")
    p.add_argument("sequent")
    p.set_defaults(func=cmd_search)

    for name, func in (("valid", cmd_valid), ("countermodel", cmd_countermodel)):
        p = sub.add_parser(name, parents=[common], help="bounded countermodel search")
        p.add_argument("--max-states", type=_positive, default=3)
        p.add_argument("formula")
        p.set_defaults(func=func)

    p = sub.add_parser("adisjunctive", parents=[common], help="adisjunctivity test")
    p.add_argument("sequent")
    p.set_defaults(func=cmd_adisjunctive)

    p = sub.add_parser("closure", parents=[common], help="closure of a sequent")
    p.add_argument("sequent")
    p.set_defaults(func=cmd_closure)

    p = sub.add_parser("paper", parents=[common], help="run the corpus suite")
    p.add_argument("--scale", choices=("quick", "full"), default="quick")
    p.add_argument("--no-battery", action="store_true", help="artifact items only")
    p.set_defaults(func=cmd_paper)

    p = sub.add_parser("corpus", parents=[common], help="list or write the corpus")
    p.add_argument("--write", metavar="DIR")
    p.set_defaults(func=cmd_corpus)
    return parser


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {n}")
    return n


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return ERROR if e.code else OK
    try:
        return args.func(args)
    except (UsageError, FormulaError, ProofFormatError, SearchError, ResourceError,
            CloError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
