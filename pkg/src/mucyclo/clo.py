"""Annotated Clo derivations: rule checking, translation to NW, analyses.

Annotations are tuples of ``Name``. A Clo node with token ``x#k`` may be the
companion of Discharge leaves above it whose sequent is exactly
``Γ, νx.φ^{a x#k}`` for the Clo conclusion ``Γ, νx.φ^a``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import permutations

from .formula import (Formula, Nu, SubsumptionOrder, check_clean, closure, negate,
                      subsumption_order, unfold)
from .nw import (CheckResult, Diagnostic, _formula_of, check_basic_rule,
                 check_structure)
from .proof import EPS, Node, Proof, bare, format_annotation, format_sequent
from .traces import descendants


class CloError(ValueError):
    pass


def subword(a, b) -> bool:
    """True iff ``a`` is a (scattered) subword of ``b``."""
    it = iter(b)
    return all(any(x == y for y in it) for x in a)


def annotation_leq_var(a, x: str, order: SubsumptionOrder) -> bool:
    return all(order.leq(name.var, x) for name in a)


@dataclass(frozen=True)
class CloChecks:
    """Side conditions that can be switched off for mutation testing."""
    eta_annotation: bool = True
    exp_subword: bool = True
    clo_freshness: bool = True
    discharge_equality: bool = True


ALL_CHECKS = CloChecks()


def _exp_matching(premise, conclusion) -> bool | None:
    """None if bare formula multisets differ; else whether a subword matching exists."""
    prem = Counter(f for f, _ in premise)
    conc = Counter(f for f, _ in conclusion)
    if prem != conc:
        return None
    for f in prem:
        pa = sorted((a for g, a in premise if g == f), key=lambda a: [str(n) for n in a])
        ca = [a for g, a in conclusion if g == f]
        if not any(all(subword(x, y) for x, y in zip(pa, perm)) for perm in permutations(ca)):
            return False
    return True


def _side_order(proof: Proof, allow_cut: bool, diags) -> tuple[SubsumptionOrder | None, frozenset]:
    seeds = set(bare(proof.root_sequent))
    if allow_cut:
        for n in proof.nodes.values():
            if n.rule == "Cut" and n.children:
                extra = bare(proof.nodes[n.children[0]].sequent) - bare(n.sequent)
                for f in extra:
                    seeds |= {f, negate(f)}
    verdict = check_clean(seeds)
    if not verdict:
        diags.append(Diagnostic(proof.root, "clean", f"sequent is not clean (variable {verdict.variable})"))
        return None, frozenset()
    clos = closure(seeds).members
    for n in proof.nodes.values():
        for f in sorted(bare(n.sequent) - clos):
            diags.append(Diagnostic(n.id, "closure", f"{f.text} is not in the closure of the root"))
    return subsumption_order(clos), clos


def check_clo(proof: Proof, allow_cut: bool = False, checks: CloChecks = ALL_CHECKS) -> CheckResult:
    """Check every node; all violated conditions are reported."""
    diags: list[Diagnostic] = []
    if proof.system != "clo":
        return CheckResult(False, [Diagnostic(None, "system", f"expected a clo proof, got {proof.system}")])
    diags += [d for d in check_structure(proof, ("Ax", "Discharge"))
              if not (d.kind == "leaf" and proof.nodes[d.node].rule == "Open")]
    if any(d.kind == "structure" for d in diags):
        return CheckResult(False, diags)
    order, _clos = _side_order(proof, allow_cut, diags)
    if order is None:
        return CheckResult(False, diags)

    def leq(a, x, node_id, kind):
        try:
            return annotation_leq_var(a, x, order)
        except KeyError as e:
            diags.append(Diagnostic(node_id, kind, f"annotation mentions unknown variable: {e}"))
            return True

    tokens: dict = {}
    for node in proof.nodes.values():
        if node.rule == "Clo" and node.token is not None:
            tokens.setdefault(node.token, []).append(node.id)
    for tok, ids in sorted(tokens.items()):
        if len(ids) > 1:
            for nid in ids:
                diags.append(Diagnostic(nid, "token", f"token {tok} labels {len(ids)} Clo nodes"))

    for node in sorted(proof.nodes.values(), key=lambda n: n.id):
        rule = node.rule
        if rule == "Open":
            diags.append(Diagnostic(node.id, "open", "open leaf (unproven branch)"))
            continue
        if rule == "Ax":
            check_basic_rule(proof, node, diags)
            if any(a != EPS for _, a in node.sequent):
                diags.append(Diagnostic(node.id, "Ax-annotation", "axiom formulas must carry ε"))
            continue
        if rule in ("Or", "And", "Weak", "Box"):
            check_basic_rule(proof, node, diags)
            continue
        if rule in ("Mu", "Nu"):
            check_basic_rule(proof, node, diags)
            p = node.principal
            if p is not None and p in node.sequent and checks.eta_annotation:
                f, a = p
                if hasattr(f, "var") and not leq(a, f.var, node.id, "eta"):
                    diags.append(Diagnostic(node.id, "eta",
                                            f"annotation {format_annotation(a)} is not ≤ {f.var}"))
            continue
        if rule == "Exp":
            _check_exp(proof, node, diags, checks)
            continue
        if rule == "Clo":
            _check_clo_node(proof, node, diags, checks, leq)
            continue
        if rule == "Discharge":
            _check_discharge(proof, node, diags, checks)
            continue
        if rule == "Cut":
            if not allow_cut:
                diags.append(Diagnostic(node.id, "Cut", "Cut is not allowed (use allow_cut)"))
            else:
                _check_cut(proof, node, diags)
            continue
        diags.append(Diagnostic(node.id, "rule", f"unknown rule {rule}"))
    return CheckResult(not diags, diags)


def _check_exp(proof, node, diags, checks):
    if len(node.children) != 1:
        diags.append(Diagnostic(node.id, "Exp", f"expects 1 premise, has {len(node.children)}"))
        return
    premise = proof.nodes[node.children[0]].sequent
    verdict = _exp_matching(premise, node.sequent)
    if verdict is None:
        diags.append(Diagnostic(node.id, "Exp", "premise and conclusion list different formulas"))
    elif not verdict and checks.exp_subword:
        diags.append(Diagnostic(node.id, "exp-subword",
                                "premise annotations are not subwords of the conclusion annotations"))


def _check_clo_node(proof, node, diags, checks, leq):
    p = node.principal
    tok = node.token

    def bad(kind, msg):
        diags.append(Diagnostic(node.id, kind, msg))

    if tok is None:
        bad("Clo", "Clo node without a token")
        return
    if p is None or p not in node.sequent:
        bad("Clo", "principal formula missing from the conclusion")
        return
    f, a = p
    if not isinstance(f, Nu):
        bad("Clo", f"principal {f.text} is not a ν-formula")
        return
    if tok.var != f.var:
        bad("Clo", f"token {tok} is not a name for {f.var}")
    if checks.eta_annotation and not leq(a, f.var, node.id, "clo-annotation"):
        bad("clo-annotation", f"annotation {format_annotation(a)} is not ≤ {tok}")
    rest = node.sequent - {p}
    if checks.clo_freshness:
        if any(tok in b for _, b in rest):
            bad("clo-fresh", f"{tok} already occurs in the context")
        if tok in a:
            bad("clo-fresh-principal", f"{tok} already occurs in the principal's annotation")
    if len(node.children) != 1:
        bad("Clo", f"expects 1 premise, has {len(node.children)}")
        return
    premise = proof.nodes[node.children[0]].sequent
    new = (unfold(f), a + (tok,))
    if premise != rest | {new} and premise != node.sequent | {new}:
        bad("Clo", "premise is not Γ, φ[νx.φ]^{a·token}")


def discharge_requirement(companion: Node):
    f, a = companion.principal
    return (companion.sequent - {companion.principal}) | {(f, a + (companion.token,))}


def _check_discharge(proof, node, diags, checks):
    def bad(kind, msg):
        diags.append(Diagnostic(node.id, kind, msg))

    if node.children:
        bad("discharge", "discharged leaf has children")
    if node.token is None or node.target is None:
        bad("discharge", "discharged leaf needs a token and a companion")
        return
    if not proof.is_strict_ancestor(node.target, node.id):
        bad("discharge", f"companion {node.target} is not a strict ancestor")
        return
    comp = proof.nodes[node.target]
    if comp.rule != "Clo" or comp.token != node.token:
        bad("discharge", f"companion {comp.id} is not a Clo node with token {node.token}")
        return
    if comp.principal is None or comp.principal not in comp.sequent:
        return
    required = discharge_requirement(comp)
    if checks.discharge_equality and node.sequent != required:
        extra = format_sequent(node.sequent - required) or "nothing"
        missing = format_sequent(required - node.sequent) or "nothing"
        bad("discharge-mismatch",
            f"sequent differs from the assumption of companion {comp.id}: "
            f"has {extra} where it needs {missing}")


def _check_cut(proof, node, diags):
    def bad(msg):
        diags.append(Diagnostic(node.id, "Cut", msg))

    if len(node.children) != 2:
        bad(f"expects 2 premises, has {len(node.children)}")
        return
    left, right = (proof.nodes[c].sequent for c in node.children)
    extra = left - node.sequent
    if len(extra) != 1:
        bad("left premise must add exactly one cut formula")
        return
    (cut_f, cut_a), = extra
    if cut_a != EPS:
        bad("cut formula must carry ε")
    if left != node.sequent | {(cut_f, EPS)}:
        bad("left premise is not Γ, A^ε")
    if right != node.sequent | {(negate(cut_f), EPS)}:
        bad("right premise is not Γ, Ā^ε")


# -- translation --------------------------------------------------------------


def translate_clo_to_nw(proof: Proof, checks: CloChecks = ALL_CHECKS) -> Proof:
    """Cyclic NW proof: Clo becomes Nu, Exp is contracted, Discharge becomes
    a back-edge to its companion, annotations are dropped."""
    result = check_clo(proof, checks=checks)
    if not result:
        raise CloError("cannot translate a derivation that does not check: "
                       + "; ".join(str(d) for d in result.diagnostics[:5]))

    def skip_exp(nid):
        while proof.nodes[nid].rule == "Exp":
            nid = proof.nodes[nid].children[0]
        return nid

    nodes = {}
    for node in proof.preorder(skip_exp(proof.root)):
        if node.rule == "Exp":
            continue
        principal = None if node.principal is None else _formula_of(node.principal)
        rule = {"Clo": "Nu", "Discharge": "Backedge"}.get(node.rule, node.rule)
        nodes[node.id] = Node(
            id=node.id,
            sequent=bare(node.sequent),
            rule=rule,
            principal=principal,
            children=tuple(skip_exp(c) for c in node.children),
            target=node.target if node.rule == "Discharge" else None,
            label=node.label,
        )
    reachable = {n.id for n in Proof("nw", skip_exp(proof.root), nodes).preorder()}
    nodes = {k: v for k, v in nodes.items() if k in reachable}
    return Proof("nw", skip_exp(proof.root), nodes).renumbered()


# -- unfolding trees and classification ----------------------------------------


@dataclass
class UnfoldingTree:
    roots: list[int]
    children: dict[int, list[int]] = field(default_factory=dict)

    @property
    def nodes(self) -> list[int]:
        return sorted(self.children)

    def parent(self, v: int) -> int | None:
        for u, cs in self.children.items():
            if v in cs:
                return u
        return None


def unfolding_tree(proof: Proof, target) -> UnfoldingTree:
    target = bare(target)
    members = [n.id for n in proof.preorder()
               if n.rule != "Exp" and bare(n.sequent) == target]
    member_set = set(members)
    tree = UnfoldingTree([], {m: [] for m in members})
    for m in members:
        parent = next((a for a in proof.ancestors(m) if a in member_set), None)
        if parent is None:
            tree.roots.append(m)
        else:
            tree.children[parent].append(m)
    return tree


def _reach(proof: Proof, path: list[int], start: Formula) -> frozenset[Formula]:
    current = {start}
    for a, b in zip(path, path[1:]):
        node = proof.nodes[a]
        rel = descendants(node.rule, node.sequent, node.principal, proof.nodes[b].sequent,
                          node.children.index(b))
        current = {g for f, g, _ in rel if f in current}
    return frozenset(current)


def classify_unfolding_child(u: int, v: int, proof: Proof, x_formula: Formula | None = None,
                             y_formula: Formula | None = None) -> str:
    """'x-node', 'y-node', 'neither', or 'both' for tree child ``v`` of ``u``."""
    if x_formula is None or y_formula is None:
        from .corpus import PHI_X, PSI_Y
        x_formula, y_formula = PHI_X, PSI_Y
    target = {x_formula, y_formula}
    tree = unfolding_tree(proof, target)
    if v not in tree.children.get(u, []):
        raise ValueError(f"node {v} is not a child of {u} in the unfolding tree")
    path = proof.path(u, v)
    from_y = _reach(proof, path, y_formula) & target
    from_x = _reach(proof, path, x_formula) & target
    is_x = not from_y
    is_y = not from_x
    if is_x and is_y:
        return "both"
    return "x-node" if is_x else "y-node" if is_y else "neither"


def is_root_like(u: int, proof: Proof) -> bool:
    above = set(proof.ancestors(u))
    return not any(proof.nodes[n].rule == "Discharge" and proof.nodes[n].target in above
                   for n in proof.subtree(u))


@dataclass
class LemmaReport:
    ok: bool
    checked: list[tuple[int, dict[int, str]]]
    failures: list[str]

    def __bool__(self):
        return self.ok


def verify_children_lemma(proof: Proof, target=None, x_formula=None, y_formula=None,
                          exact: bool = True) -> LemmaReport:
    """Every checked unfolding node has two or three tree children with one
    x-node and one y-node among them; ``exact=False`` asks for at least one of each."""
    if target is None:
        from .corpus import PHI, PHI_X, PSI_Y
        target, x_formula, y_formula = PHI, PHI_X, PSI_Y
    tree = unfolding_tree(proof, target)
    checked = []
    failures = []
    for u in tree.nodes:
        kids = tree.children[u]
        if not kids:
            continue
        if proof.system == "clo" and not is_root_like(u, proof):
            continue
        classes = {v: classify_unfolding_child(u, v, proof, x_formula, y_formula) for v in kids}
        checked.append((u, classes))
        xs = sum(c in ("x-node", "both") for c in classes.values())
        ys = sum(c in ("y-node", "both") for c in classes.values())
        if len(kids) not in (2, 3):
            failures.append(f"node {u} has {len(kids)} children in the unfolding tree")
        if (xs != 1 or ys != 1) if exact else (xs < 1 or ys < 1):
            failures.append(f"node {u} has {xs} x-node and {ys} y-node children")
    return LemmaReport(not failures, checked, failures)


def names_introduced_below(proof: Proof) -> list[str]:
    """Names that occur at a node without a Clo node introducing them below it."""
    problems = []
    for node in proof.nodes.values():
        below = {proof.nodes[a].token for a in proof.ancestors(node.id)
                 if proof.nodes[a].rule == "Clo"}
        for _, a in node.sequent:
            for name in a:
                if name not in below:
                    problems.append(f"node {node.id}: {name} not introduced below")
    return problems


__all__ = [
    "CloChecks", "CloError", "LemmaReport", "UnfoldingTree", "annotation_leq_var", "check_clo",
    "classify_unfolding_child", "discharge_requirement", "is_root_like", "names_introduced_below",
    "subword", "translate_clo_to_nw", "unfolding_tree", "verify_children_lemma",
]
