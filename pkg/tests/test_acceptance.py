"""The eleven acceptance criteria at full scale, one test each.

Each test records a PASS/FAIL line that is printed at the end of the run.
"""

import random
import time
from dataclasses import fields, replace
from pathlib import Path

from conftest import CRITERIA
from oracles import naive_closure

from mucyclo.cli import main
from mucyclo.clo import (ALL_CHECKS, CloChecks, check_clo, classify_unfolding_child,
                         translate_clo_to_nw, unfolding_tree, verify_children_lemma)
from mucyclo.corpus import (ARTIFACT_NAMES, BOX_X, CHI, DIA_Y, NP, NPCHI, P, PCHI, PHI, PHI_X,
                            PSI_Y, UNF_X, UNF_Y, get_artifact)
from mucyclo.formula import closure, disjunction, is_adisjunctive, parse_sequent
from mucyclo.generators import random_priorities, random_trace_graph, search_graph_cases
from mucyclo.nw import check_nw
from mucyclo.proof import read_proof
from mucyclo.search import EXHAUSTED, search_nw
from mucyclo.semantics import holds_everywhere, random_model, search_countermodel
from mucyclo.suite import ADISJUNCTIVE_CONTROLS, artifact_items, searched_clo_proofs
from mucyclo.traces import check_global_trace_condition, lasso_oracle, trace_graph

PI_JSON = Path(__file__).resolve().parent.parent / "corpus" / "pi.json"


def record(n, ok, detail, seconds):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail} ({seconds:.2f} s)"
    CRITERIA[n] = line
    print(line)
    assert ok, line


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def test_criterion_1_pi_accepted(capsys):
    with Timer() as t:
        code = main(["check", "--system", "nw", str(PI_JSON)])
        result = check_nw(read_proof(PI_JSON))
    capsys.readouterr()
    # both variables of Phi are nu-variables, so every good trace is a nu-trace
    graph = trace_graph(read_proof(PI_JSON))
    only_nu = graph.variables() <= {"x", "y"}
    ok = code == 0 and result.ok and only_nu and t.seconds < 1
    record(1, ok, f"pi accepted, exit {code}, trace method {result.trace.method}", t.seconds)


def test_criterion_2_rho0_completion_rejected():
    proof = get_artifact("rho0_completed").payload
    with Timer() as t:
        result = check_clo(proof)
    at = [proof.nodes[d.node].label for d in result.diagnostics if d.kind == "discharge-mismatch"]
    ok = not result.ok and at == ["C_leaf"] and t.seconds < 1
    record(2, ok, f"rejected with discharge mismatch at {at}", t.seconds)


def test_criterion_3_clo_search_exhausted(capsys):
    with Timer() as t:
        code = main(["search", "--system", "clo", "Phi"])
    out = capsys.readouterr().out
    ok = (code == 1 and EXHAUSTED in out and "fragment:" in out and "Weak" in out
          and "Exp" in out and "'max_clo': 4" in out and "'max_depth': 50" in out
          and t.seconds < 300)
    record(3, ok, f"exit {code}, {out.splitlines()[0]}", t.seconds)


def test_criterion_4_nw_search_proves_phi(capsys):
    with Timer() as t:
        code = main(["search", "--system", "nw", "Phi"])
        outcome = search_nw(PHI)
        accepted = outcome.found and bool(check_nw(outcome.proof))
        lemma = verify_children_lemma(outcome.proof) if outcome.found else None
    capsys.readouterr()
    ok = code == 0 and accepted and lemma is not None and lemma.ok and t.seconds < 30
    record(4, ok, f"{outcome.status}, {len(outcome.proof)} nodes, children lemma {bool(lemma)}",
           t.seconds)


def test_criterion_5_classification():
    proof = get_artifact("pi").payload
    with Timer() as t:
        root = proof.root
        got = {proof.nodes[v].label: classify_unfolding_child(root, v, proof)
               for v in unfolding_tree(proof, PHI).children[root]}
    ok = got == {"B": "x-node", "C": "y-node", "D": "neither"}
    record(5, ok, f"{got}", t.seconds)


def test_criterion_6_validity():
    big = disjunction(PHI)
    rng = random.Random(2024)
    with Timer() as t:
        none_small = search_countermodel(big, 3) is None
        models = [random_model(rng, ["p"], 6) for _ in range(1000)]
        all_true = all(holds_everywhere(big, m) for m in models)
        cx, cy = search_countermodel(PHI_X, 1), search_countermodel(PSI_Y, 1)
    ok = (none_small and all_true and cx is not None and cy is not None
          and cx.model.size == cy.model.size == 1 and max(m.size for m in models) <= 6
          and t.seconds < 120)
    record(6, ok, f"no countermodel up to 3 states: {none_small}; 1000 random models: {all_true}; "
                  f"1-state countermodels for nu x and nu y: {cx is not None and cy is not None}",
           t.seconds)


def test_criterion_7_soundness_pipeline():
    with Timer() as t:
        corpus = [get_artifact(n).payload for n in ARTIFACT_NAMES
                  if get_artifact(n).kind == "clo-derivation" and check_clo(get_artifact(n).payload)]
        searched = searched_clo_proofs(100, seed=7)
        proofs = corpus + searched
        good = sum(bool(check_nw(translate_clo_to_nw(p))) for p in proofs)
    ok = len(searched) >= 100 and good == len(proofs)
    record(7, ok, f"{good}/{len(proofs)} translations accepted ({len(corpus)} corpus, "
                  f"{len(searched)} searched)", t.seconds)


def test_criterion_8_adisjunctivity():
    with Timer() as t:
        verdict = is_adisjunctive(PHI)
        controls = [bool(is_adisjunctive(parse_sequent(s))) for s in ADISJUNCTIVE_CONTROLS]
    ok = not verdict and verdict.disjunction == CHI and sum(controls) >= 3
    record(8, ok, f"witness {verdict.disjunction}; {sum(controls)}/{len(controls)} controls accept",
           t.seconds)


def test_criterion_9_oracle_equivalence():
    rng = random.Random(9)
    with Timer() as t:
        cases = search_graph_cases(rng, 500)
        synthetic = [(random_trace_graph(rng, max_nodes=8), random_priorities(rng)) for _ in range(500)]
        agree = sum(check_global_trace_condition(g, pr).accepted == lasso_oracle(g, pr).accepted
                    for g, pr in cases + synthetic)
    small = all(len(g.reachable()) <= 8 for g, _ in cases)
    ok = len(cases) >= 500 and small and agree == len(cases) + len(synthetic)
    record(9, ok, f"{agree}/{len(cases) + len(synthetic)} verdicts agree ({len(cases)} graphs "
                  f"from proof search, {len(synthetic)} synthetic)", t.seconds)


def test_criterion_10_closure_exactness():
    derived = {PHI_X, UNF_X, NPCHI, NP, CHI, BOX_X, DIA_Y, PSI_Y, UNF_Y, PCHI, P}
    trivial = parse_sequent("nu x. x")
    with Timer() as t:
        got = closure(PHI).members
        ok = (len(got) == 11 and got == derived == naive_closure(PHI)
              and len(closure(trivial)) == 1 and naive_closure(trivial) == closure(trivial).members)
    record(10, ok, f"|closure(Phi)| = {len(got)}, |closure(nu x. x)| = {len(closure(trivial))}",
           t.seconds)


def test_criterion_11_mutation_sensitivity():
    skip = ("search_clo", "search_nw")
    with Timer() as t:
        baseline = {(i.name, i.operation): i.actual for i in artifact_items(skip=skip)}
        flips = {}
        for f in fields(CloChecks):
            items = artifact_items(replace(ALL_CHECKS, **{f.name: False}), skip=skip)
            flips[f.name] = sorted({i.name for i in items if i.actual != baseline[(i.name, i.operation)]})
    ok = all(flips.values())
    record(11, ok, "; ".join(f"{k} flips {', '.join(v) or 'nothing'}" for k, v in flips.items()),
           t.seconds)
