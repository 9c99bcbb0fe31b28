"""Cyclic NW proofs: local rule checking and the global trace condition."""

from __future__ import annotations

from dataclasses import dataclass, field

from .formula import (And, Box, Dia, Formula, Mu, Nu, Or, PropLit, check_clean,
                      closure, unfold)
from .proof import Proof, bare, format_entry
from .traces import (TraceVerdict, check_global_trace_condition,
                     priority_assignment, trace_graph, _sccs)


@dataclass(frozen=True)
class Diagnostic:
    node: int | None
    kind: str
    message: str

    def __str__(self):
        where = "proof" if self.node is None else f"node {self.node}"
        return f"{where}: [{self.kind}] {self.message}"


@dataclass
class CheckResult:
    ok: bool
    diagnostics: list[Diagnostic] = field(default_factory=list)
    trace: TraceVerdict | None = None

    def __bool__(self):
        return self.ok

    def kinds(self) -> set[str]:
        return {d.kind for d in self.diagnostics}

    def at(self, node: int) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.node == node]


def _formula_of(entry) -> Formula:
    return entry if isinstance(entry, Formula) else entry[0]


def _ann_of(entry):
    return None if isinstance(entry, Formula) else entry[1]


def _lift(entry, f: Formula):
    """A new entry for ``f`` carrying the annotation of ``entry``."""
    return f if isinstance(entry, Formula) else (f, entry[1])


def check_structure(proof: Proof, leaf_rules: tuple[str, ...]) -> list[Diagnostic]:
    """Tree shape: single parent per node, everything reachable, no cycles."""
    out = []
    parent_count: dict[int, int] = {}
    for n in proof.nodes.values():
        for c in n.children:
            parent_count[c] = parent_count.get(c, 0) + 1
    for nid, cnt in sorted(parent_count.items()):
        if cnt > 1:
            out.append(Diagnostic(nid, "structure", f"node has {cnt} parents"))
    if proof.root in parent_count:
        out.append(Diagnostic(proof.root, "structure", "root has a parent"))
    succ = {nid: i for i, nid in enumerate(sorted(proof.nodes))}
    adj = [[succ[c] for c in proof.nodes[nid].children] for nid in sorted(proof.nodes)]
    for comp in _sccs(len(adj), adj):
        if len(comp) > 1 or comp[0] in adj[comp[0]]:
            out.append(Diagnostic(None, "structure", "child links contain a cycle"))
            return out
    reached = {n.id for n in proof.preorder()}
    for nid in sorted(set(proof.nodes) - reached):
        out.append(Diagnostic(nid, "structure", "node unreachable from the root"))
    for n in proof.nodes.values():
        if not n.children and n.rule not in leaf_rules:
            out.append(Diagnostic(n.id, "leaf", f"leaf labelled {n.rule}; leaves must be {'/'.join(leaf_rules)}"))
    return out


def check_basic_rule(proof: Proof, node, diags: list[Diagnostic]) -> bool:
    """Shape check for Ax/Or/And/Weak/Box/Mu/Nu, shared by NW and Clo.

    The principal may be retained in the premise (set semantics). For Clo
    sequents annotations are copied unchanged to the descendants. Returns
    True iff the rule was recognized (not necessarily valid).
    """
    rule = node.rule
    concl = node.sequent
    prems = [proof.nodes[c].sequent for c in node.children]

    def bad(msg):
        diags.append(Diagnostic(node.id, rule, msg))

    def arity(k):
        if len(prems) != k:
            bad(f"expects {k} premise(s), has {len(prems)}")
            return False
        return True

    if rule == "Ax":
        if not arity(0):
            return True
        fs = sorted(bare(concl))
        ok = (len(concl) == 2 and len(fs) == 2 and all(isinstance(f, PropLit) for f in fs)
              and fs[0].name == fs[1].name and fs[0].negated != fs[1].negated)
        if not ok:
            bad("axiom sequent must be exactly p, ~p")
        return True
    if rule not in ("Or", "And", "Weak", "Box", "Mu", "Nu"):
        return False
    p = node.principal
    if p is None or p not in concl:
        bad("principal formula missing from the conclusion")
        return True
    pf = _formula_of(p)
    rest = concl - {p}

    def matches(premise, new):
        return premise == rest | new or premise == concl | new

    if rule == "Or":
        if not isinstance(pf, Or):
            bad(f"principal {format_entry(p)} is not a disjunction")
        elif arity(1) and not matches(prems[0], {_lift(p, pf.left), _lift(p, pf.right)}):
            bad("premise is not Γ, φ, ψ")
    elif rule == "And":
        if not isinstance(pf, And):
            bad(f"principal {format_entry(p)} is not a conjunction")
        elif arity(2):
            if not matches(prems[0], {_lift(p, pf.left)}):
                bad("left premise is not Γ, φ")
            if not matches(prems[1], {_lift(p, pf.right)}):
                bad("right premise is not Γ, ψ")
    elif rule == "Weak":
        if arity(1) and not (prems[0] == rest or prems[0] == concl):
            bad("premise is not the conclusion minus the weakened formula")
    elif rule == "Box":
        if not isinstance(pf, Box):
            bad(f"principal {format_entry(p)} is not a box formula")
        elif any(not isinstance(_formula_of(e), Dia) for e in rest):
            bad("conclusion is not of the shape ◇Γ, □φ")
        elif arity(1):
            expected = {_lift(e, _formula_of(e).sub) for e in rest} | {_lift(p, pf.sub)}
            if prems[0] != expected:
                bad("premise is not Γ, φ for conclusion ◇Γ, □φ")
    else:
        kind = Mu if rule == "Mu" else Nu
        if not isinstance(pf, kind):
            bad(f"principal {format_entry(p)} is not a {rule.lower()}-formula")
        elif arity(1) and not matches(prems[0], {_lift(p, unfold(pf))}):
            bad("premise is not Γ with the principal unfolded")
    return True


def check_closure_membership(proof: Proof, diags: list[Diagnostic]):
    root = bare(proof.root_sequent)
    verdict = check_clean(root)
    if not verdict:
        diags.append(Diagnostic(proof.root, "clean", f"root sequent is not clean (variable {verdict.variable})"))
        return None
    clos = closure(root)
    for n in proof.nodes.values():
        for f in sorted(bare(n.sequent) - clos.members):
            diags.append(Diagnostic(n.id, "closure", f"{f.text} is not in the closure of the root"))
    return clos


def check_nw_local(proof: Proof) -> CheckResult:
    diags: list[Diagnostic] = []
    if proof.system != "nw":
        diags.append(Diagnostic(None, "system", f"expected an nw proof, got {proof.system}"))
        return CheckResult(False, diags)
    diags += check_structure(proof, ("Ax", "Backedge"))
    if any(d.kind == "structure" for d in diags):
        return CheckResult(False, diags)
    check_closure_membership(proof, diags)
    for node in sorted(proof.nodes.values(), key=lambda n: n.id):
        if node.rule == "Backedge":
            if node.children:
                diags.append(Diagnostic(node.id, "Backedge", "back-edge leaf has children"))
            if node.target is None:
                diags.append(Diagnostic(node.id, "Backedge", "missing target"))
            elif not proof.is_strict_ancestor(node.target, node.id):
                diags.append(Diagnostic(node.id, "Backedge", f"target {node.target} is not a strict ancestor"))
            elif proof.nodes[node.target].sequent != node.sequent:
                diags.append(Diagnostic(node.id, "Backedge", "target sequent differs"))
            continue
        if not check_basic_rule(proof, node, diags):
            diags.append(Diagnostic(node.id, "rule", f"unknown rule {node.rule}"))
    return CheckResult(not diags, diags)


def check_nw(proof: Proof, method: str = "ramsey", priorities: dict[str, int] | None = None) -> CheckResult:
    local = check_nw_local(proof)
    if not local:
        return local
    graph = trace_graph(proof)
    prios = priorities or priority_assignment(bare(proof.root_sequent))
    verdict = check_global_trace_condition(graph, prios, method=method)
    diags = []
    if not verdict:
        stem, cycle = verdict.counterexample
        diags.append(Diagnostic(None, "trace",
                                f"infinite branch without a good trace: stem {stem}, cycle {cycle}"))
    return CheckResult(verdict.accepted, diags, verdict)


@dataclass(frozen=True)
class BranchStats:
    nodes: int
    back_edges: int
    nontrivial_sccs: int
    scc_sizes: tuple[int, ...]
    traces_per_back_edge: tuple[tuple[int, int], ...]

    def as_dict(self):
        return {"nodes": self.nodes, "back_edges": self.back_edges,
                "nontrivial_sccs": self.nontrivial_sccs, "scc_sizes": list(self.scc_sizes),
                "traces_per_back_edge": [list(t) for t in self.traces_per_back_edge]}


def branch_language_stats(proof: Proof) -> BranchStats:
    graph = trace_graph(proof)
    ids = {n: i for i, n in enumerate(graph.nodes)}
    adj = [[ids[m] for m in graph.successors(n)] for n in graph.nodes]
    sizes = []
    for comp in _sccs(len(adj), adj):
        if len(comp) > 1 or comp[0] in adj[comp[0]]:
            sizes.append(len(comp))
    back = sorted(n.id for n in proof.nodes.values() if n.rule in ("Backedge", "Discharge"))
    per = tuple((b, len(graph.relation[(b, proof.nodes[b].target)])) for b in back)
    return BranchStats(len(proof.nodes), len(back), len(sizes), tuple(sorted(sizes)), per)
