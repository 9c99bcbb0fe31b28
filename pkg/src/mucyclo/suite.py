"""The corpus suite: every artifact's expected verdicts plus a criteria battery."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, fields, replace
from typing import Any, Callable

from .clo import ALL_CHECKS, CloChecks, CloError, check_clo, classify_unfolding_child
from .clo import translate_clo_to_nw, unfolding_tree, verify_children_lemma
from .corpus import ARTIFACT_NAMES, CHI, PHI, PHI_X, PSI_Y, Artifact, get_artifact
from .formula import closure, disjunction, is_adisjunctive, parse_sequent, unfold
from .generators import excluded_middle, random_priorities, random_trace_graph, search_graph_cases
from .nw import check_nw, check_nw_local
from .search import EXHAUSTED, SearchBounds, search_clo, search_nw
from .semantics import holds_everywhere, random_model, search_countermodel
from .traces import check_global_trace_condition, lasso_oracle

ADISJUNCTIVE_CONTROLS = ("nu x. <>x", "p | ~p", "nu x. []x", "nu x. p | <>x", "mu x. p | <>x")

SCALES = {
    "quick": {"random_models": 200, "searched_proofs": 20, "random_graphs": 100},
    "full": {"random_models": 1000, "searched_proofs": 100, "random_graphs": 500},
}


@dataclass
class SuiteItem:
    name: str
    operation: str
    expected: Any
    actual: Any
    seconds: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.expected == self.actual

    def as_dict(self):
        return {"name": self.name, "operation": self.operation, "expected": _jsonable(self.expected),
                "actual": _jsonable(self.actual), "passed": self.passed,
                "seconds": round(self.seconds, 4), "detail": self.detail}


def _jsonable(v):
    if isinstance(v, (bool, int, float, str)) or v is None:
        return v
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return str(v)


@dataclass
class SuiteReport:
    items: list[SuiteItem]

    @property
    def ok(self) -> bool:
        return all(i.passed for i in self.items)

    def failed(self) -> list[SuiteItem]:
        return [i for i in self.items if not i.passed]

    def as_dict(self):
        return {"ok": self.ok, "passed": sum(i.passed for i in self.items),
                "total": len(self.items), "items": [i.as_dict() for i in self.items]}

    def render(self) -> str:
        lines = []
        for i in self.items:
            mark = "PASS" if i.passed else "FAIL"
            line = f"{mark}  {i.name}: {i.operation} expected {_jsonable(i.expected)} got {_jsonable(i.actual)}"
            if i.detail:
                line += f" ({i.detail})"
            lines.append(line)
        lines.append(f"{sum(i.passed for i in self.items)}/{len(self.items)} items passed")
        return "\n".join(lines)


# -- artifact operations ------------------------------------------------------------


def _check_nw(proof, trace_stub: bool) -> bool:
    return bool(check_nw_local(proof) if trace_stub else check_nw(proof))


def evaluate(artifact: Artifact, operation: str, checks: CloChecks = ALL_CHECKS,
             trace_stub: bool = False):
    """Run one expected operation on an artifact and return the observed verdict."""
    x = artifact.payload
    if operation == "unfold":
        return unfold(x)
    if operation == "closure_size":
        return len(closure(x))
    if operation == "adisjunctive":
        return bool(is_adisjunctive(x))
    if operation.startswith("countermodel_"):
        states = int(operation.rsplit("_", 1)[1])
        target = disjunction(x) if isinstance(x, frozenset) else x
        cm = search_countermodel(target, states)
        return None if cm is None else cm.model.size
    if operation == "check_nw":
        return _check_nw(x, trace_stub)
    if operation == "children_lemma":
        return bool(verify_children_lemma(x))
    if operation == "classify":
        tree = unfolding_tree(x, PHI)
        root = tree.roots[0]
        return {x.nodes[v].label: classify_unfolding_child(root, v, x) for v in tree.children[root]}
    if operation == "check_clo":
        return bool(check_clo(x, checks=checks))
    if operation == "translate":
        try:
            return _check_nw(translate_clo_to_nw(x, checks), trace_stub)
        except CloError:
            return False
    if operation == "discharge_mismatch_at":
        result = check_clo(x, checks=checks)
        return sorted(x.nodes[d.node].label or str(d.node)
                      for d in result.diagnostics if d.kind == "discharge-mismatch")
    if operation == "diagnostic_kinds":
        return sorted(check_clo(x, checks=checks).kinds())
    if operation not in ("search_clo", "search_nw"):
        raise ValueError(f"unknown operation {operation!r}")
    seq = x if isinstance(x, frozenset) else frozenset([x])
    if operation == "search_clo":
        return search_clo(seq).status
    outcome = search_nw(seq)
    return outcome.status if outcome.proof is None or _check_nw(outcome.proof, trace_stub) else "Rejected"


def artifact_items(checks: CloChecks = ALL_CHECKS, trace_stub: bool = False,
                   skip: tuple[str, ...] = ()) -> list[SuiteItem]:
    items = []
    for name in ARTIFACT_NAMES:
        art = get_artifact(name)
        for operation, expected in art.expected:
            if operation in skip:
                continue
            t = time.perf_counter()
            actual = evaluate(art, operation, checks, trace_stub)
            items.append(SuiteItem(name, operation, expected, actual, time.perf_counter() - t))
    return items


# -- criteria battery ---------------------------------------------------------------


def _timed(name: str, operation: str, fn: Callable[[], tuple[bool, str]]) -> SuiteItem:
    t = time.perf_counter()
    ok, detail = fn()
    return SuiteItem(name, operation, True, ok, time.perf_counter() - t, detail)


def validity_battery(random_models: int, seed: int = 0) -> tuple[bool, str]:
    big = disjunction(PHI)
    none_small = search_countermodel(big, 3) is None
    rng = random.Random(seed)
    all_true = all(holds_everywhere(big, random_model(rng, ["p"], 6)) for _ in range(random_models))
    cx = search_countermodel(PHI_X, 1)
    cy = search_countermodel(PSI_Y, 1)
    ok = none_small and all_true and cx is not None and cy is not None
    return ok, (f"no countermodel <=3 states: {none_small}; {random_models} random models: "
                f"{all_true}; 1-state countermodels: {cx is not None}, {cy is not None}")


def searched_clo_proofs(count: int, seed: int = 0, max_tries: int = 2000):
    """Clo proofs found by search for random excluded-middle sequents."""
    rng = random.Random(seed)
    bounds = SearchBounds(max_depth=30, max_clo=2, node_budget=20_000)
    out = []
    for _ in range(max_tries):
        if len(out) >= count:
            break
        outcome = search_clo(excluded_middle(rng, depth=rng.randint(1, 3)), bounds)
        if outcome.found:
            out.append(outcome.proof)
    return out


def soundness_battery(searched: int, seed: int = 0) -> tuple[bool, str]:
    corpus = [get_artifact(n).payload for n in ARTIFACT_NAMES
              if get_artifact(n).kind == "clo-derivation" and check_clo(get_artifact(n).payload)]
    proofs = corpus + searched_clo_proofs(searched, seed)
    good = sum(bool(check_nw(translate_clo_to_nw(p))) for p in proofs)
    enough = len(proofs) - len(corpus) >= searched
    return good == len(proofs) and enough, f"{good}/{len(proofs)} translations accepted ({len(corpus)} from the corpus)"


def oracle_battery(graphs: int, seed: int = 0) -> tuple[bool, str]:
    """Search-derived proof graphs, then as many synthetic ones."""
    rng = random.Random(seed)
    cases = search_graph_cases(rng, graphs)
    cases += [(random_trace_graph(rng, max_nodes=8), random_priorities(rng)) for _ in range(graphs)]
    agree = rejected = 0
    for g, pr in cases:
        verdict = check_global_trace_condition(g, pr).accepted
        agree += verdict == lasso_oracle(g, pr).accepted
        rejected += not verdict
    enough = len(cases) >= 2 * graphs
    return agree == len(cases) and enough, (f"{agree}/{len(cases)} verdicts agree ({graphs} graphs "
                                            f"from proof search, {rejected} rejected overall)")


def adisjunctivity_battery() -> tuple[bool, str]:
    verdict = is_adisjunctive(PHI)
    controls = [bool(is_adisjunctive(parse_sequent(s))) for s in ADISJUNCTIVE_CONTROLS]
    ok = not verdict and verdict.disjunction == CHI and sum(controls) >= 3
    witness = None if verdict.disjunction is None else verdict.disjunction.text
    return ok, f"witness {witness}; controls accepted {sum(controls)}/{len(controls)}"


def mutation_battery() -> tuple[bool, str]:
    baseline = {(i.name, i.operation): i.actual for i in artifact_items(skip=("search_clo", "search_nw"))}
    flips = {}
    for f in fields(CloChecks):
        mutated = replace(ALL_CHECKS, **{f.name: False})
        items = artifact_items(mutated, skip=("search_clo", "search_nw"))
        flips[f.name] = [i.name for i in items if i.actual != baseline[(i.name, i.operation)]]
    ok = all(flips.values())
    return ok, "; ".join(f"{k}: {','.join(v) or 'none'}" for k, v in flips.items())


def battery_items(scale: str = "quick", seed: int = 0) -> list[SuiteItem]:
    sizes = SCALES[scale]
    pi = get_artifact("pi").payload
    rho = get_artifact("rho0_completed").payload

    def rho_reject():
        r = check_clo(rho)
        at = [rho.nodes[d.node].label for d in r.diagnostics if d.kind == "discharge-mismatch"]
        return (not r.ok and at == ["C_leaf"]), f"discharge mismatch at {at}"

    def nw_provable():
        o = search_nw(PHI)
        ok = o.found and bool(check_nw(o.proof)) and bool(verify_children_lemma(o.proof))
        return ok, f"{o.status}, {len(o.proof) if o.proof else 0} nodes"

    def classification():
        got = evaluate(get_artifact("pi"), "classify")
        return got == {"B": "x-node", "C": "y-node", "D": "neither"}, str(got)

    def closure_exact():
        return (len(closure(PHI)) == 11 and len(closure(parse_sequent("nu x. x"))) == 1,
                f"|Clos(Phi)| = {len(closure(PHI))}")

    return [
        _timed("criterion 1", "pi accepted", lambda: (bool(check_nw(pi)), "")),
        _timed("criterion 2", "rho0 completion rejected", rho_reject),
        _timed("criterion 3", "Clo search on Phi exhausted",
               lambda: ((o := search_clo(PHI)).status == EXHAUSTED, o.fragment)),
        _timed("criterion 4", "NW search on Phi", nw_provable),
        _timed("criterion 5", "classification of B, C, D", classification),
        _timed("criterion 6", "validity", lambda: validity_battery(sizes["random_models"], seed)),
        _timed("criterion 7", "soundness pipeline", lambda: soundness_battery(sizes["searched_proofs"], seed)),
        _timed("criterion 8", "adisjunctivity", adisjunctivity_battery),
        _timed("criterion 9", "trace oracle agreement", lambda: oracle_battery(sizes["random_graphs"], seed)),
        _timed("criterion 10", "closure exactness", closure_exact),
        _timed("criterion 11", "mutation sensitivity", mutation_battery),
    ]


def run_paper_suite(checks: CloChecks = ALL_CHECKS, trace_stub: bool = False,
                    battery: bool = True, scale: str = "quick", seed: int = 0) -> SuiteReport:
    """Artifact items under the given checks, then (optionally) the battery.

    ``checks`` switches Clo side conditions off and ``trace_stub`` replaces
    the global trace condition by an always-accepting stub; both exist to
    show which items depend on which check.
    """
    if scale not in SCALES:
        raise ValueError(f"unknown scale {scale!r}; choose from {sorted(SCALES)}")
    items = artifact_items(checks, trace_stub)
    if battery:
        items += battery_items(scale, seed)
    return SuiteReport(items)
