"""Traces through cyclic proof graphs and the global trace condition.

A trace step is a triple ``(f, g, var)``: formula ``f`` at the source node
has descendant ``g`` at the target node, and ``var`` names the fixpoint
variable unfolded by the step (``None`` otherwise).

The global trace condition asks that every infinite path from the root
carries a trace whose least infinitely often unfolded priority is even.
Priorities use the min-parity convention: even for nu-variables, and
``x <= y`` in the subsumption order implies ``priority[x] <= priority[y]``.
A trace that stops unfolding is never good.

Three deciders live here:

* ``check_global_trace_condition`` with ``method="ramsey"`` (default):
  inclusion of the branch automaton in the good-trace automaton, decided by
  saturating path summaries and testing every idempotent loop summary.
* ``method="rank"``: rank-based complementation of the good-trace Büchi
  automaton, product with the branch automaton, emptiness by SCC analysis.
  Exponential in the number of trace states per node; for small graphs.
* ``lasso_oracle``: exploration of closed walks with walks of equal trace
  effect merged, kept independent of both.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from .formula import (And, Box, Dia, Formula, Nu, Or, SubsumptionOrder,
                      binder_map, closure, is_fixpoint, subsumption_order, unfold)
from .errors import ResourceError
from .proof import Proof, bare


class TraceError(ValueError):
    pass


Triple = tuple  # (Formula, Formula, str | None)


def descendants(rule: str, conclusion, principal, premise, index: int = 0) -> frozenset:
    """Trace relation from ``conclusion`` to the ``index``-th premise.

    Works on bare formulas; Clo is treated as the nu-rule, Exp, Backedge and
    Discharge as the identity. Raises TraceError when a descendant the rule
    prescribes is missing from the premise.
    """
    conclusion = bare(conclusion)
    premise = bare(premise)
    if principal is not None and not isinstance(principal, Formula):
        principal = principal[0]
    out = set()

    def add(f, g, var=None):
        if g not in premise:
            raise TraceError(f"{rule}: descendant {g.text} missing from premise")
        out.add((f, g, var))

    if rule in ("Backedge", "Discharge", "Exp"):
        for f in conclusion:
            add(f, f)
        return frozenset(out)
    if rule == "Ax" or rule == "Open":
        return frozenset()
    if rule == "Cut":
        for f in conclusion:
            add(f, f)
        return frozenset(out)
    if principal is None or principal not in conclusion:
        raise TraceError(f"{rule}: principal formula missing from conclusion")
    side = conclusion - {principal}
    if rule == "Box":
        if not isinstance(principal, Box):
            raise TraceError("Box: principal is not a box formula")
        add(principal, principal.sub)
        for f in side:
            if not isinstance(f, Dia):
                raise TraceError(f"Box: side formula {f.text} is not a diamond")
            add(f, f.sub)
        return frozenset(out)
    for f in side:
        if f in premise:
            out.add((f, f, None))
    if principal in premise and rule != "Weak":
        out.add((principal, principal, None))
    if rule == "Weak":
        if principal in premise:
            out.add((principal, principal, None))
    elif rule == "Or":
        if not isinstance(principal, Or):
            raise TraceError("Or: principal is not a disjunction")
        add(principal, principal.left)
        add(principal, principal.right)
    elif rule == "And":
        if not isinstance(principal, And):
            raise TraceError("And: principal is not a conjunction")
        add(principal, principal.left if index == 0 else principal.right)
    elif rule in ("Mu", "Nu", "Clo"):
        if not is_fixpoint(principal):
            raise TraceError(f"{rule}: principal is not a fixpoint formula")
        add(principal, unfold(principal), principal.var)
    else:
        raise TraceError(f"unknown rule {rule!r}")
    return frozenset(out)


@dataclass
class TraceGraph:
    root: int
    formulas: dict[int, frozenset]
    edges: dict[int, list[int]]
    relation: dict[tuple[int, int], frozenset]

    @property
    def nodes(self) -> list[int]:
        return sorted(self.formulas)

    def successors(self, n: int) -> list[int]:
        return self.edges.get(n, [])

    def reachable(self) -> list[int]:
        seen = {self.root}
        stack = [self.root]
        while stack:
            n = stack.pop()
            for m in self.successors(n):
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        return sorted(seen)

    def variables(self) -> set[str]:
        return {t[2] for rel in self.relation.values() for t in rel if t[2] is not None}

    def dump(self) -> str:
        """Plain node/edge listing for diagnostics."""
        lines = []
        for n in self.nodes:
            lines.append(f"node {n}: " + " ; ".join(f.text for f in sorted(self.formulas[n])))
        for (a, b), rel in sorted(self.relation.items()):
            steps = ", ".join(f"{f.text} -> {g.text}" + (f" [{v}]" if v else "")
                              for f, g, v in sorted(rel, key=lambda t: (t[0].text, t[1].text)))
            lines.append(f"edge {a} -> {b}: {steps}")
        return "\n".join(lines)


def trace_graph(proof: Proof) -> TraceGraph:
    """Trace graph of an NW proof or a Clo proof (read with bare sequents).

    Backedge and Discharge leaves get a single edge to their target.
    """
    formulas = {}
    edges: dict[int, list[int]] = defaultdict(list)
    relation = {}
    for node in proof.nodes.values():
        formulas[node.id] = bare(node.sequent)
    for node in proof.nodes.values():
        if node.rule in ("Backedge", "Discharge"):
            if node.target is None:
                raise TraceError(f"node {node.id}: {node.rule} without target")
            tgt = proof.nodes[node.target]
            edges[node.id].append(tgt.id)
            relation[(node.id, tgt.id)] = descendants(node.rule, node.sequent, None, tgt.sequent)
            continue
        for i, c in enumerate(node.children):
            edges[node.id].append(c)
            relation[(node.id, c)] = descendants(node.rule, node.sequent, node.principal,
                                                 proof.nodes[c].sequent, i)
    return TraceGraph(proof.root, formulas, dict(edges), relation)


# -- priorities -------------------------------------------------------------


def priority_assignment(seq: Iterable[Formula], order: SubsumptionOrder | None = None) -> dict[str, int]:
    """Gap-inserted priorities along a linearization of the subsumption order."""
    seq = list(seq)
    binders = binder_map(closure(seq).members)
    if order is None:
        order = subsumption_order(seq)
    out = {}
    prev = -1
    for v in order.linearize():
        want = 0 if isinstance(binders[v], Nu) else 1
        p = prev + 1
        if p % 2 != want:
            p += 1
        out[v] = p
        prev = p
    for v, b in binders.items():
        # variables only reachable through unfolding, absent from the raw scan
        if v not in out:
            prev += 1
            if prev % 2 != (0 if isinstance(b, Nu) else 1):
                prev += 1
            out[v] = prev
    return out


def validate_priorities(priorities: dict[str, int], seq: Iterable[Formula],
                        order: SubsumptionOrder | None = None) -> None:
    seq = list(seq)
    binders = binder_map(closure(seq).members)
    order = order or subsumption_order(seq)
    for v, b in binders.items():
        if v not in priorities:
            raise TraceError(f"no priority for variable {v!r}")
        if (priorities[v] % 2 == 0) != isinstance(b, Nu):
            raise TraceError(f"priority of {v!r} has the wrong parity")
    for x, y in order.pairs:
        if priorities[x] > priorities[y]:
            raise TraceError(f"{x} <= {y} but priority {priorities[x]} > {priorities[y]}")


def _prioritized(graph: TraceGraph, priorities: dict[str, int]):
    top = max(priorities.values(), default=0) + 1
    if top % 2 == 0:
        top += 1
    rel = {}
    for e, triples in graph.relation.items():
        items = set()
        for f, g, v in triples:
            if v is not None and v not in priorities:
                raise TraceError(f"no priority for variable {v!r}")
            items.add((f, g, top if v is None else priorities[v]))
        rel[e] = frozenset(items)
    return rel, top


@dataclass
class TraceVerdict:
    accepted: bool
    method: str
    # (stem, cycle): stem runs from the root up to cycle[0], exclusive, and
    # the cycle returns from cycle[-1] to cycle[0]
    counterexample: tuple[list[int], list[int]] | None = None
    stats: dict = field(default_factory=dict)

    def __bool__(self):
        return self.accepted


# -- Ramsey-based inclusion -------------------------------------------------


def _compose(m1: frozenset, m2: frozenset) -> frozenset:
    by_src = defaultdict(list)
    for g, h, k in m2:
        by_src[g].append((h, k))
    return frozenset((f, h, min(k1, k2)) for f, g, k1 in m1 for h, k2 in by_src.get(g, ()))


def _ramsey(graph: TraceGraph, priorities, max_summaries: int) -> TraceVerdict:
    rel, _top = _prioritized(graph, priorities)
    reachable = graph.reachable()
    seen = {}
    work = []
    for a in reachable:
        for b in graph.successors(a):
            key = (a, b, rel[(a, b)])
            if key not in seen:
                seen[key] = None
                work.append(key)
    while work:
        a, b, m = work.pop()
        for c in graph.successors(b):
            key = (a, c, _compose(m, rel[(b, c)]))
            if key not in seen:
                if len(seen) >= max_summaries:
                    raise ResourceError(f"more than {max_summaries} path summaries")
                seen[key] = (a, b, m)
                work.append(key)
    for key in seen:
        a, b, m = key
        if a != b or _compose(m, m) != m:
            continue
        if not any(f == g and k % 2 == 0 for f, g, k in m):
            cycle = _witness_path(seen, key)
            stem = _stem(graph, a)
            return TraceVerdict(False, "ramsey", (stem, cycle), {"summaries": len(seen)})
    return TraceVerdict(True, "ramsey", None, {"summaries": len(seen)})


def _witness_path(seen, key) -> list[int]:
    path = []
    while key is not None:
        a, b, _m = key
        path.append(b)
        prev = seen[key]
        if prev is None:
            path.append(a)
        key = prev
    return list(reversed(path))[:-1]


def _stem(graph: TraceGraph, target: int) -> list[int]:
    prev = {graph.root: None}
    queue = [graph.root]
    for n in queue:
        if n == target:
            break
        for m in graph.successors(n):
            if m not in prev:
                prev[m] = n
                queue.append(m)
    path = []
    n = target
    while n is not None:
        path.append(n)
        n = prev[n]
    return list(reversed(path))[:-1]


# -- rank-based complementation --------------------------------------------

_WAIT = ("wait",)


def _rank_based(graph: TraceGraph, priorities, rank_cap, max_states) -> TraceVerdict:
    rel, top = _prioritized(graph, priorities)
    evens = sorted({p for p in priorities.values() if p % 2 == 0})

    def gstates(n):
        return [_WAIT] + [(f, k, acc) for f in sorted(graph.formulas[n]) for k in evens
                          for acc in (False, True)]

    width = max((len(gstates(n)) for n in graph.reachable()), default=1)
    needed = 2 * width
    cap = 2 * width + 2 if rank_cap is None else rank_cap
    if cap < needed:
        raise ResourceError(f"rank cap {cap} below the complementation bound {needed}")
    max_rank = needed

    def accepting(q):
        return q is not _WAIT and q[2]

    def gsucc(q, e, n_to):
        if q is _WAIT:
            yield _WAIT
            for g in sorted(graph.formulas[n_to]):
                for k in evens:
                    yield (g, k, False)
            return
        f, k, _ = q
        for f2, g, p in rel[e]:
            if f2 == f and p >= k:
                yield (g, k, p == k)

    def rankings(states, bounds):
        choices = []
        for q in states:
            hi = bounds[q]
            opts = [r for r in range(hi + 1) if not (accepting(q) and r % 2)]
            if not opts:
                return
            choices.append(opts)
        for combo in itertools.product(*choices):
            yield tuple(zip(states, combo))

    # successors may lower any rank, so the all-maximal ranking is the only
    # initial ranking needed
    start_states = [_WAIT] + [(f, k, False) for f in sorted(graph.formulas[graph.root]) for k in evens]
    init = [(graph.root, tuple((q, max_rank) for q in start_states), frozenset())]

    index = {}
    succ_lists = []
    work = []

    def intern(s):
        if s not in index:
            if len(index) >= max_states:
                raise ResourceError(f"complement product exceeded {max_states} states")
            index[s] = len(index)
            succ_lists.append([])
            work.append(s)
        return index[s]

    for s in init:
        intern(s)
    while work:
        s = work.pop()
        sid = index[s]
        node, ranking, obligations = s
        for nxt in graph.successors(node):
            e = (node, nxt)
            bounds = {}
            from_o = set()
            for q, r in ranking:
                for q2 in gsucc(q, e, nxt):
                    bounds[q2] = min(bounds.get(q2, max_rank), r)
                    if q in obligations:
                        from_o.add(q2)
            states = sorted(bounds, key=_gkey)
            for r2 in rankings(states, bounds):
                if obligations:
                    o2 = frozenset(q for q, v in r2 if v % 2 == 0 and q in from_o)
                else:
                    o2 = frozenset(q for q, v in r2 if v % 2 == 0)
                succ_lists[sid].append(intern((nxt, r2, o2)))
    states = list(index)
    accepting_ids = {index[s] for s in states if not s[2]}
    for comp in _sccs(len(states), succ_lists):
        if len(comp) == 1:
            (v,) = comp
            if v not in succ_lists[v]:
                continue
        if accepting_ids & set(comp):
            lasso = _product_lasso(succ_lists, set(comp), min(accepting_ids & set(comp)))
            stem, cycle = ([states[i][0] for i in part] for part in lasso)
            return TraceVerdict(False, "rank", (stem, cycle), {"product_states": len(states),
                                                               "max_rank": max_rank})
    return TraceVerdict(True, "rank", None, {"product_states": len(states), "max_rank": max_rank})


def _bfs_path(succ_lists, start: int, goal, allowed=None) -> list[int]:
    """Shortest path of product ids from ``start`` to a successor in ``goal``."""
    prev = {start: None}
    queue = [start]
    for u in queue:
        for w in succ_lists[u]:
            if allowed is not None and w not in allowed:
                continue
            if w in goal:
                path = [w]
                while u is not None:
                    path.append(u)
                    u = prev[u]
                return list(reversed(path))
            if w not in prev:
                prev[w] = u
                queue.append(w)
    raise AssertionError("no path in product")


def _product_lasso(succ_lists, comp: set[int], state: int) -> tuple[list[int], list[int]]:
    # product state 0 is the initial state; the stem ends just before ``state``
    stem = [] if state == 0 else _bfs_path(succ_lists, 0, {state})[:-1]
    cycle = _bfs_path(succ_lists, state, {state}, comp)[:-1]
    return stem, cycle


def _gkey(q):
    if q is _WAIT:
        return ("",)
    f, k, acc = q
    return (f.text, k, acc)


def _sccs(n: int, succ: list[list[int]]) -> list[list[int]]:
    """Tarjan, iterative."""
    index = [None] * n
    low = [0] * n
    on_stack = [False] * n
    stack = []
    out = []
    counter = 0
    for start in range(n):
        if index[start] is not None:
            continue
        call = [(start, 0)]
        index[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack[start] = True
        while call:
            v, i = call[-1]
            if i < len(succ[v]):
                call[-1] = (v, i + 1)
                w = succ[v][i]
                if index[w] is None:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    call.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
            else:
                call.pop()
                if call:
                    u = call[-1][0]
                    low[u] = min(low[u], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        comp.append(w)
                        if w == v:
                            break
                    out.append(comp)
    return out


def check_global_trace_condition(graph: TraceGraph, priorities: dict[str, int],
                                 method: str = "ramsey", rank_cap: int | None = None,
                                 max_summaries: int = 200_000,
                                 max_states: int = 200_000) -> TraceVerdict:
    if method == "ramsey":
        return _ramsey(graph, priorities, max_summaries)
    if method == "rank":
        return _rank_based(graph, priorities, rank_cap, max_states)
    raise ValueError(f"unknown method {method!r}")


# -- lasso oracle -----------------------------------------------------------


def _has_good_cycle(edges) -> bool:
    """``edges``: list of (u, v, priority) over hashable states."""
    for k in sorted({p for _, _, p in edges if p % 2 == 0}):
        kept = [(u, v, p) for u, v, p in edges if p >= k]
        ids = {}
        for u, v, _ in kept:
            ids.setdefault(u, len(ids))
            ids.setdefault(v, len(ids))
        succ = [[] for _ in ids]
        for u, v, _ in kept:
            succ[ids[u]].append(ids[v])
        comp_of = {}
        for ci, comp in enumerate(_sccs(len(ids), succ)):
            for x in comp:
                comp_of[x] = ci
        for u, v, p in kept:
            if p == k and comp_of[ids[u]] == comp_of[ids[v]]:
                return True
    return False


def lasso_oracle(graph: TraceGraph, priorities: dict[str, int], max_nodes: int = 200,
                 max_states: int = 500_000) -> TraceVerdict:
    """Accept iff every cycle reachable from the root carries a good trace.

    Every reachable cycle can be read as a closed walk through its least node
    ``v`` that visits only nodes ``>= v``. Traces may start anywhere on the
    lasso, so only the cycle matters, and whether the cycle repeated forever
    has a good trace depends only on its effect: the set of triples
    ``(f, g, k)`` saying a trace goes from ``f`` to ``g`` along the walk with
    least priority ``k``. Walks from ``v`` are explored breadth first with
    equal (node, effect) pairs merged, which covers every cycle and
    terminates. This shares only the priority map with the Ramsey decider.
    """
    reachable = graph.reachable()
    if len(reachable) > max_nodes:
        raise ResourceError(f"graph has {len(reachable)} reachable nodes, cap {max_nodes}")
    rel, _top = _prioritized(graph, priorities)
    checked = 0
    explored = 0
    for v in reachable:
        parent: dict = {}
        queue = []
        for w in graph.successors(v):
            if w >= v:
                state = (w, rel[(v, w)])
                if state not in parent:
                    parent[state] = None
                    queue.append(state)
        head = 0
        while head < len(queue):
            state = queue[head]
            head += 1
            explored += 1
            if explored > max_states:
                raise ResourceError(f"lasso oracle explored more than {max_states} states")
            u, effect = state
            if u == v:
                checked += 1
                if not _has_good_cycle(list(effect)):
                    walk = [v]
                    s = state
                    while parent[s] is not None:
                        s = parent[s]
                        walk.append(s[0])
                    walk.reverse()
                    cycle = [v] + walk[:-1]
                    return TraceVerdict(False, "lasso", (_stem(graph, v), cycle),
                                        {"cycles": checked, "states": explored})
            for w in graph.successors(u):
                if w < v:
                    continue
                nxt = (w, _extend(effect, rel[(u, w)]))
                if nxt not in parent:
                    parent[nxt] = state
                    queue.append(nxt)
    return TraceVerdict(True, "lasso", None, {"cycles": checked, "states": explored})


def _extend(effect: frozenset, step: frozenset) -> frozenset:
    out = set()
    for f, g, k in effect:
        for g2, h, k2 in step:
            if g2 == g:
                out.add((f, h, k if k < k2 else k2))
    return frozenset(out)
