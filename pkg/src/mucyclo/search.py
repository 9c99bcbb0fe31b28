"""Bounded, deterministic backward proof search for NW and Clo.

``MUCYCLO_THREADS`` is read and validated, but the searches run in one
thread, so outcomes and statistics never depend on it.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Iterator

from .clo import _exp_matching, annotation_leq_var, check_clo
from .formula import (And, Box, Dia, Formula, Or, PropLit, check_clean, closure,
                      is_fixpoint, subsumption_order, unfold)
from .nw import check_nw
from .proof import EPS, Name, Proof, ProofBuilder, entry_key
from .traces import check_global_trace_condition, priority_assignment, trace_graph

FOUND = "Found"
EXHAUSTED = "ExhaustedWithinBounds"
BUDGET = "BudgetExceeded"


class SearchError(ValueError):
    pass


@dataclass(frozen=True)
class SearchBounds:
    max_depth: int = 50
    max_clo: int = 4
    max_sequent: int = 8
    node_budget: int = 10**7

    def __post_init__(self):
        for name in ("max_depth", "max_clo", "max_sequent", "node_budget"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise SearchError(f"{name} must be a positive integer, got {value!r}")

    def as_dict(self):
        return {"max_depth": self.max_depth, "max_clo": self.max_clo,
                "max_sequent": self.max_sequent, "node_budget": self.node_budget}


@dataclass
class SearchStats:
    expansions: int = 0
    distinct_states: int = 0
    memo_hits: int = 0
    candidates: int = 0

    def as_dict(self):
        return {"expansions": self.expansions, "distinct_states": self.distinct_states,
                "memo_hits": self.memo_hits, "candidates": self.candidates}


@dataclass
class SearchOutcome:
    status: str
    system: str
    bounds: SearchBounds
    fragment: str
    stats: SearchStats = field(default_factory=SearchStats)
    proof: Proof | None = None

    @property
    def found(self) -> bool:
        return self.status == FOUND

    def as_dict(self):
        from .proof import proof_to_dict
        return {"status": self.status, "system": self.system, "bounds": self.bounds.as_dict(),
                "fragment": self.fragment, "stats": self.stats.as_dict(),
                "proof": None if self.proof is None else proof_to_dict(self.proof)}

    def summary(self) -> str:
        s = self.stats
        lines = [f"{self.status} ({self.system} search)",
                 f"  expansions {s.expansions}, distinct states {s.distinct_states}, "
                 f"memo hits {s.memo_hits}, candidates checked {s.candidates}",
                 f"  fragment: {self.fragment}"]
        if self.proof is not None:
            lines.append(f"  proof with {len(self.proof)} nodes")
        return "\n".join(lines)


def worker_count() -> int:
    """Worker count requested through MUCYCLO_THREADS (0 or unset means auto)."""
    raw = os.environ.get("MUCYCLO_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise SearchError(f"MUCYCLO_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise SearchError("MUCYCLO_THREADS must be non-negative")
    return n or (os.cpu_count() or 1)


class _BudgetHit(Exception):
    pass


@dataclass(frozen=True, eq=False)
class _T:
    """Search-side proof tree. ``target`` is an ancestor depth (NW) or a
    companion index (Clo)."""
    seq: frozenset
    rule: str
    principal: object = None
    children: tuple = ()
    target: int | None = None
    token: Name | None = None

    @cached_property
    def size(self) -> int:
        return 1 + sum(c.size for c in self.children)

    @cached_property
    def height(self) -> int:
        return 1 + max((c.height for c in self.children), default=0)

    @cached_property
    def targets(self) -> frozenset:
        own = {self.target} if self.rule in ("Backedge", "Discharge") else set()
        return frozenset(own).union(*(c.targets for c in self.children))


def _materialize(tree: _T, system: str, base_depth: int = 0) -> Proof:
    """Build a Proof; back-edges to depths above ``base_depth`` become Open leaves."""
    b = ProofBuilder(system)
    stack: list[int] = []
    companions: list[int] = []

    def go(t: _T) -> int:
        rule, target = t.rule, None
        if rule == "Backedge":
            idx = t.target - base_depth
            if idx < 0:
                rule = "Open"
            else:
                target = stack[idx]
        elif rule == "Discharge":
            target = companions[t.target]
        nid = b.add(t.seq, rule, t.principal, (), target, t.token)
        stack.append(nid)
        if rule == "Clo":
            companions.append(nid)
        kids = [go(c) for c in t.children]
        if rule == "Clo":
            companions.pop()
        stack.pop()
        b.set_children(nid, kids)
        return nid

    root = go(tree)
    return b.build(root)


def _chain(seq: frozenset, steps: list, top_rule: str, top_principal, top_children) -> _T:
    """Weak/Exp steps (given top-down as (rule, principal, premise)) ending in a rule."""
    sequents = [seq] + [prem for _, _, prem in steps]
    node = _T(sequents[-1], top_rule, top_principal, tuple(top_children))
    for (rule, principal, _), concl in reversed(list(zip(steps, sequents))):
        node = _T(concl, rule, principal, (node,))
    return node


class _Lazy:
    """Memoizing wrapper so a generator can be iterated several times."""

    def __init__(self, it: Iterator):
        self._it = it
        self._items: list = []
        self._done = False

    def __iter__(self):
        i = 0
        while True:
            if i < len(self._items):
                yield self._items[i]
                i += 1
            elif self._done:
                return
            else:
                try:
                    self._items.append(next(self._it))
                except StopIteration:
                    self._done = True


def _prepare(sequent: Iterable) -> frozenset:
    seq = frozenset(sequent)
    if not seq:
        raise SearchError("cannot search for a proof of the empty sequent")
    verdict = check_clean(seq)
    if not verdict:
        raise SearchError(f"sequent is not clean (variable {verdict.variable})")
    return seq


def _complementary(seq) -> tuple | None:
    lits = sorted(f for f in seq if isinstance(f, PropLit))
    for f in lits:
        if not f.negated and PropLit(f.name, True) in seq:
            return f, PropLit(f.name, True)
    return None


# -- NW ---------------------------------------------------------------------------

NW_FRAGMENT = ("cut-free NW; a sequent repeating an ancestor is closed by a back-edge; "
               "Ax whenever p, ~p occur (other formulas weakened first); Or and And on the "
               "least principal; Box over every box principal after weakening the "
               "non-diamond formulas; Nu/Mu over every fixpoint principal; no other Weak")


class _NWSearch:
    def __init__(self, root: frozenset, bounds: SearchBounds, stats: SearchStats):
        self.bounds = bounds
        self.stats = stats
        self.priorities = priority_assignment(root)
        self.seen: set = set()
        self.observed: list | None = None

    def tick(self, seq):
        self.stats.expansions += 1
        if seq not in self.seen:
            self.seen.add(seq)
            self.stats.distinct_states = len(self.seen)
        if self.stats.expansions > self.bounds.node_budget:
            raise _BudgetHit

    def internal_ok(self, t: _T, depth: int) -> bool:
        """Cycles closing at this node must carry a good trace."""
        proof = _materialize(t, "nw", depth)
        graph = trace_graph(proof)
        if self.observed is not None:
            self.observed.append(graph)
        return bool(check_global_trace_condition(graph, self.priorities))

    def solve(self, seq: frozenset, path: tuple, plan: tuple = ()) -> Iterator[_T]:
        d = len(path)
        if d >= self.bounds.max_depth or len(seq) > self.bounds.max_sequent:
            return
        self.tick(seq)
        for i in range(d - 1, -1, -1):
            if path[i] == seq:
                yield _T(seq, "Backedge", target=i)
                return
        for t in self._expand(seq, path, plan):
            if d in t.targets and not self.internal_ok(t, d):
                continue
            yield t

    def _expand(self, seq, path, plan):
        below = path + (seq,)
        if plan:
            (rule, principal), rest = plan[0], plan[1:]
            if rule == "Ax":
                yield _T(seq, "Ax")
            elif rule == "Weak":
                for sub in self.solve(seq - {principal}, below, rest):
                    yield _T(seq, "Weak", principal, (sub,))
            else:
                prem = frozenset(f.sub for f in seq)
                for sub in self.solve(prem, below, rest):
                    yield _T(seq, "Box", principal, (sub,))
            return
        pair = _complementary(seq)
        if pair is not None:
            steps = tuple(("Weak", f) for f in sorted(seq - set(pair))) + (("Ax", None),)
            yield from self._expand(seq, path, steps)
            return
        ors = sorted(f for f in seq if isinstance(f, Or))
        if ors:
            f = ors[0]
            for sub in self.solve(seq - {f} | {f.left, f.right}, below):
                yield _T(seq, "Or", f, (sub,))
            return
        ands = sorted(f for f in seq if isinstance(f, And))
        if ands:
            f = ands[0]
            rights = _Lazy(self.solve(seq - {f} | {f.right}, below))
            for left in self.solve(seq - {f} | {f.left}, below):
                for right in rights:
                    yield _T(seq, "And", f, (left, right))
            return
        for f in sorted(g for g in seq if isinstance(g, Box)):
            weak = tuple(("Weak", g) for g in sorted(seq - {f}) if not isinstance(g, Dia))
            yield from self._expand(seq, path, weak + (("Box", f),))
        for f in sorted(g for g in seq if is_fixpoint(g)):
            rule = "Nu" if type(f).__name__ == "Nu" else "Mu"
            for sub in self.solve(seq - {f} | {unfold(f)}, below):
                yield _T(seq, rule, f, (sub,))


def search_nw(sequent: Iterable[Formula], bounds: SearchBounds | None = None) -> SearchOutcome:
    """First NW proof in the deterministic enumeration order, validated by check_nw."""
    bounds = bounds or SearchBounds()
    worker_count()
    seq = _prepare(sequent)
    stats = SearchStats()
    fragment = f"{NW_FRAGMENT}; bounds {bounds.as_dict()}"
    engine = _NWSearch(seq, bounds, stats)
    try:
        for cand in engine.solve(seq, ()):
            stats.candidates += 1
            proof = _materialize(cand, "nw")
            if check_nw(proof):
                return SearchOutcome(FOUND, "nw", bounds, fragment, stats, proof)
    except _BudgetHit:
        return SearchOutcome(BUDGET, "nw", bounds, fragment, stats)
    return SearchOutcome(EXHAUSTED, "nw", bounds, fragment, stats)


def search_trace_graphs(sequent: Iterable[Formula], bounds: SearchBounds | None = None):
    """Trace graphs of the cyclic candidates that NW search checks, with priorities.

    These are the subtrees closed by back-edges to their own root, accepted
    or not; they give realistic inputs for cross-checking trace deciders.
    """
    bounds = bounds or SearchBounds()
    seq = _prepare(sequent)
    engine = _NWSearch(seq, bounds, SearchStats())
    engine.observed = []
    try:
        for cand in engine.solve(seq, ()):
            if check_nw(_materialize(cand, "nw")):
                break
    except _BudgetHit:
        pass
    return engine.observed, engine.priorities


# -- Clo --------------------------------------------------------------------------

CLO_FRAGMENT = ("cut-free Clo; Discharge whenever the sequent equals a companion's assumption "
                "after the unique shrinking Exp; Ax whenever p, ~p occur (others weakened, "
                "annotations cleared by Exp); Or and And on the least principal; Box over every "
                "box principal after weakening the non-diamond formulas; Nu, Mu and Clo over "
                "every fixpoint principal, preceded by an Exp dropping names that violate the "
                "annotation side condition (a Weak when that copy already occurs); tokens per "
                "branch at most max_clo; no other Weak or Exp; a state repeating an ancestor "
                "state fails")


class _CloSearch:
    def __init__(self, root: frozenset, bounds: SearchBounds, stats: SearchStats):
        self.bounds = bounds
        self.stats = stats
        self.order = subsumption_order(closure(root).members)
        self.memo_ok: dict = {}
        self.memo_fail: dict = {}
        self.onpath: set = set()
        self.seen: set = set()

    def solve(self, seq, comps, used, depth) -> tuple[_T | None, bool]:
        """Proof of ``seq`` or None; the flag marks failures caused by the loop check."""
        remaining = self.bounds.max_depth - depth
        if remaining <= 0 or len(seq) > self.bounds.max_sequent:
            return None, False
        key = (seq, comps, used)
        hit = self.memo_ok.get(key)
        if hit is not None and hit.height <= remaining:
            self.stats.memo_hits += 1
            return hit, False
        if self.memo_fail.get(key, -1) >= remaining:
            self.stats.memo_hits += 1
            return None, False
        if key in self.onpath:
            return None, True
        self.stats.expansions += 1
        if key not in self.seen:
            self.seen.add(key)
            self.stats.distinct_states = len(self.seen)
        if self.stats.expansions > self.bounds.node_budget:
            raise _BudgetHit
        self.onpath.add(key)
        try:
            tree, dep = self._expand(seq, comps, used, depth, remaining)
        finally:
            self.onpath.discard(key)
        if tree is not None:
            old = self.memo_ok.get(key)
            if old is None or tree.height < old.height:
                self.memo_ok[key] = tree
        elif not dep:
            self.memo_fail[key] = max(self.memo_fail.get(key, -1), remaining)
        return tree, dep

    def _expand(self, seq, comps, used, depth, remaining):
        for ci in range(len(comps) - 1, -1, -1):
            _, required = comps[ci]
            if seq == required:
                return _T(seq, "Discharge", target=ci, token=comps[ci][0]), False
            if remaining >= 2 and _exp_matching(required, seq):
                leaf = _T(required, "Discharge", target=ci, token=comps[ci][0])
                return _T(seq, "Exp", children=(leaf,)), False
        pair = _complementary(frozenset(f for f, _ in seq))
        if pair is not None:
            keep = {e for e in seq if e[0] in pair}
            steps = []
            cur = seq
            for e in sorted(seq - keep, key=entry_key):
                cur = cur - {e}
                steps.append(("Weak", e, cur))
            if len(keep) > 2:
                # the same literal under several annotations: weaken extras
                for lit in pair:
                    extras = sorted((e for e in keep if e[0] == lit), key=entry_key)[1:]
                    for e in extras:
                        cur = cur - {e}
                        steps.append(("Weak", e, cur))
            if any(a for _, a in cur):
                cur = frozenset((f, EPS) for f, _ in cur)
                steps.append(("Exp", None, cur))
            if len(steps) + 1 <= remaining:
                return _chain(seq, steps, "Ax", None, ()), False
            return None, False
        entries = sorted(seq, key=entry_key)
        ors = [e for e in entries if isinstance(e[0], Or)]
        if ors:
            e = ors[0]
            f, a = e
            sub, dep = self.solve(seq - {e} | {(f.left, a), (f.right, a)}, comps, used, depth + 1)
            return (None if sub is None else _T(seq, "Or", e, (sub,))), dep
        ands = [e for e in entries if isinstance(e[0], And)]
        if ands:
            e = ands[0]
            f, a = e
            rest = seq - {e}
            left, dep = self.solve(rest | {(f.left, a)}, comps, used, depth + 1)
            if left is None:
                return None, dep
            right, dep2 = self.solve(rest | {(f.right, a)}, comps, used, depth + 1)
            if right is None:
                return None, dep2
            return _T(seq, "And", e, (left, right)), False
        dep_any = False
        for e in (e for e in entries if isinstance(e[0], Box)):
            weak = [g for g in entries if g != e and not isinstance(g[0], Dia)]
            steps = []
            cur = seq
            for g in weak:
                cur = cur - {g}
                steps.append(("Weak", g, cur))
            prem = frozenset((f.sub, a) for f, a in cur)
            sub, dep = self.solve(prem, comps, used, depth + len(steps) + 1)
            dep_any |= dep
            if sub is not None:
                return _chain(seq, steps, "Box", e, (sub,)), False
        for e in (e for e in entries if is_fixpoint(e[0])):
            f, a = e
            steps = []
            cur = seq
            if not annotation_leq_var(a, f.var, self.order):
                a = tuple(n for n in a if self.order.leq(n.var, f.var))
                cur = seq - {e} | {(f, a)}
                # Exp cannot merge two entries; drop the offending copy instead
                steps.append(("Weak", e, cur) if (f, a) in seq else ("Exp", None, cur))
            principal = (f, a)
            rest = cur - {principal}
            rules = ["Mu"] if type(f).__name__ == "Mu" else ["Nu", "Clo"]
            for rule in rules:
                if rule == "Clo":
                    if used >= self.bounds.max_clo:
                        continue
                    tok = Name(f.var, used)
                    ann = a + (tok,)
                    required = rest | {(f, ann)}
                    sub, dep = self.solve(rest | {(unfold(f), ann)}, comps + ((tok, required),),
                                          used + 1, depth + len(steps) + 1)
                else:
                    tok = None
                    sub, dep = self.solve(rest | {(unfold(f), a)}, comps, used,
                                          depth + len(steps) + 1)
                dep_any |= dep
                if sub is not None:
                    top = _chain(seq, steps, rule, principal, (sub,))
                    if tok is not None:
                        node = top
                        while node.rule != "Clo":
                            node = node.children[0]
                        top = _replace_token(top, node, tok)
                    return top, False
        return None, dep_any


def _replace_token(top: _T, clo_node: _T, tok: Name) -> _T:
    if top is clo_node:
        return replace(top, token=tok)
    return replace(top, children=(_replace_token(top.children[0], clo_node, tok),))


def _rename_tokens(proof: Proof) -> Proof:
    """Branch-local tokens become var#id of their Clo node."""
    nodes = {}

    def ren(a, mapping):
        return tuple(mapping.get(n, n) for n in a)

    def go(nid, mapping):
        node = proof.nodes[nid]
        if node.rule == "Clo":
            mapping = {**mapping, node.token: Name(node.token.var, nid)}
        seq = frozenset((f, ren(a, mapping)) for f, a in node.sequent)
        principal = None if node.principal is None else (node.principal[0],
                                                         ren(node.principal[1], mapping))
        token = None if node.token is None else mapping[node.token]
        nodes[nid] = replace(node, sequent=seq, principal=principal, token=token)
        for c in node.children:
            go(c, mapping)

    go(proof.root, {})
    return Proof(proof.system, proof.root, nodes)


def search_clo(sequent: Iterable[Formula], bounds: SearchBounds | None = None) -> SearchOutcome:
    """Cut-free Clo proof search over annotated sequents (root annotations ε)."""
    bounds = bounds or SearchBounds()
    worker_count()
    seq = _prepare(sequent)
    stats = SearchStats()
    fragment = f"{CLO_FRAGMENT}; bounds {bounds.as_dict()}"
    engine = _CloSearch(seq, bounds, stats)
    root = frozenset((f, EPS) for f in seq)
    try:
        tree, _ = engine.solve(root, (), 0, 0)
    except _BudgetHit:
        return SearchOutcome(BUDGET, "clo", bounds, fragment, stats)
    if tree is None:
        return SearchOutcome(EXHAUSTED, "clo", bounds, fragment, stats)
    stats.candidates = 1
    proof = _rename_tokens(_materialize(tree, "clo"))
    result = check_clo(proof)
    if not result:
        raise SearchError("internal error: search produced a derivation that does not check: "
                          + "; ".join(map(str, result.diagnostics[:3])))
    return SearchOutcome(FOUND, "clo", bounds, fragment, stats, proof)


# -- exhaustive NW enumeration ------------------------------------------------------

ENUM_FRAGMENT = ("cut-free NW proofs up to the size cap; every rule on every principal, Weak on "
                 "any single formula (consecutive Weak steps in increasing formula order); a "
                 "sequent repeating an ancestor is closed by a back-edge; Ax only on exactly "
                 "p, ~p; sequents with a countermodel of at most 2 states are not expanded")


class ProofStream:
    """Iterable over the accepted proofs; ``truncated`` is set once the size
    cap or the expansion budget cut off part of the space."""

    def __init__(self, sequent: Iterable[Formula], size_cap: int, node_budget: int = 10**6,
                 countermodel_states: int = 2):
        if size_cap < 1:
            raise SearchError("size_cap must be positive")
        self.sequent = _prepare(sequent)
        self.size_cap = size_cap
        self.node_budget = node_budget
        self.countermodel_states = countermodel_states
        self.truncated = False
        self.stats = SearchStats()
        self.fragment = ENUM_FRAGMENT
        self._priorities = priority_assignment(self.sequent)
        self._valid: dict = {}
        self._cache: dict = {}

    def __iter__(self) -> Iterator[Proof]:
        from .proof import proof_signature
        seen = set()
        try:
            for cand in self._gen(self.sequent, (), self.size_cap, None):
                self.stats.candidates += 1
                proof = _materialize(cand, "nw")
                sig = proof_signature(proof)
                if sig in seen or not check_nw(proof):
                    continue
                seen.add(sig)
                yield proof
        except _BudgetHit:
            self.truncated = True

    def _plausible(self, seq) -> bool:
        if seq not in self._valid:
            from .formula import disjunction
            from .semantics import search_countermodel
            cm = search_countermodel(disjunction(seq), self.countermodel_states)
            self._valid[seq] = cm is None
        return self._valid[seq]

    def _gen(self, seq, path, cap, last_weak) -> Iterator[_T]:
        if cap < 1:
            self.truncated = True
            return
        for i in range(len(path) - 1, -1, -1):
            if path[i] == seq:
                yield _T(seq, "Backedge", target=i)
                return
        if not self._plausible(seq):
            return
        self.stats.expansions += 1
        self.stats.distinct_states = len(self._valid)
        if self.stats.expansions > self.node_budget:
            raise _BudgetHit
        d = len(path)
        for t in self._options(seq, path, cap, last_weak):
            if d in t.targets:
                proof = _materialize(t, "nw", d)
                if not check_global_trace_condition(trace_graph(proof), self._priorities):
                    continue
            yield t

    def _sub(self, seq, path, cap, last_weak=None):
        key = (seq, path, cap, last_weak)
        if key not in self._cache:
            self._cache[key] = _Lazy(self._gen(seq, path, cap, last_weak))
        return self._cache[key]

    def _options(self, seq, path, cap, last_weak):
        below = path + (seq,)
        pair = _complementary(seq)
        if pair is not None and len(seq) == 2:
            yield _T(seq, "Ax")
        for f in sorted(g for g in seq if isinstance(g, Or)):
            for sub in self._sub(seq - {f} | {f.left, f.right}, below, cap - 1):
                yield _T(seq, "Or", f, (sub,))
        for f in sorted(g for g in seq if isinstance(g, And)):
            if cap < 3:
                self.truncated = True
                continue
            for left in self._sub(seq - {f} | {f.left}, below, cap - 2):
                for right in self._sub(seq - {f} | {f.right}, below, cap - 1 - left.size):
                    yield _T(seq, "And", f, (left, right))
        for f in sorted(g for g in seq if isinstance(g, Box)):
            if all(isinstance(g, Dia) for g in seq - {f}):
                prem = frozenset(g.sub for g in seq)
                for sub in self._sub(prem, below, cap - 1):
                    yield _T(seq, "Box", f, (sub,))
        for f in sorted(g for g in seq if is_fixpoint(g)):
            rule = "Nu" if type(f).__name__ == "Nu" else "Mu"
            for sub in self._sub(seq - {f} | {unfold(f)}, below, cap - 1):
                yield _T(seq, rule, f, (sub,))
        if len(seq) >= 2:
            for f in sorted(seq):
                if last_weak is not None and not last_weak < f:
                    continue
                for sub in self._sub(seq - {f}, below, cap - 1, f):
                    yield _T(seq, "Weak", f, (sub,))


def enumerate_nw_proofs(sequent: Iterable[Formula], size_cap: int, node_budget: int = 10**6) -> ProofStream:
    """All accepted NW proofs of at most ``size_cap`` nodes in the enumerated fragment."""
    return ProofStream(sequent, size_cap, node_budget)
