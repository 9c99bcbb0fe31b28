"""Seeded random formulas, sequents and trace graphs for tests and the suite."""

from __future__ import annotations

import random

from .formula import (And, Box, Dia, Formula, Mu, Nu, Or, PropLit, Var, negate)
from .search import SearchBounds, search_trace_graphs
from .traces import TraceGraph

LETTERS = ("p", "q")


def rename_vars(f: Formula, mapping: dict[str, str]) -> Formula:
    """Rename bound variables (binders and occurrences) through ``mapping``."""
    if isinstance(f, Var):
        return Var(mapping.get(f.name, f.name))
    if isinstance(f, PropLit):
        return f
    if isinstance(f, (Or, And)):
        return type(f)(rename_vars(f.left, mapping), rename_vars(f.right, mapping))
    if isinstance(f, (Dia, Box)):
        return type(f)(rename_vars(f.sub, mapping))
    return type(f)(mapping.get(f.var, f.var), rename_vars(f.body, mapping))


def random_formula(rng: random.Random, depth: int = 3, letters=LETTERS,
                   prefix: str = "v", _bound: tuple = (), _counter=None) -> Formula:
    """A closed clean formula; binder variables are ``prefix`` plus a counter."""
    counter = _counter if _counter is not None else [0]
    choices = ["lit"]
    if _bound:
        choices += ["var"] * 2
    if depth > 0:
        choices += ["or", "and", "dia", "box", "fix", "fix"]
    kind = rng.choice(choices)
    if kind == "lit":
        return PropLit(rng.choice(letters), rng.random() < 0.5)
    if kind == "var":
        return Var(rng.choice(_bound))
    sub = lambda b=_bound: random_formula(rng, depth - 1, letters, prefix, b, counter)
    if kind in ("or", "and"):
        return (Or if kind == "or" else And)(sub(), sub())
    if kind in ("dia", "box"):
        return (Dia if kind == "dia" else Box)(sub())
    var = f"{prefix}{counter[0]}"
    counter[0] += 1
    body = sub(_bound + (var,))
    return (Nu if rng.random() < 0.5 else Mu)(var, body)


def excluded_middle(rng: random.Random, depth: int = 2, letters=LETTERS) -> frozenset[Formula]:
    """{A, not A} with the two copies' variables renamed apart: always valid."""
    a = random_formula(rng, depth, letters, prefix="a")
    b = negate(a)
    mapping = {f"a{i}": f"b{i}" for i in range(64)}
    return frozenset([a, rename_vars(b, mapping)])


def random_sequent(rng: random.Random, size: int = 2, depth: int = 2, letters=LETTERS) -> frozenset[Formula]:
    out = []
    for i in range(size):
        out.append(random_formula(rng, depth, letters, prefix=f"s{i}_"))
    return frozenset(out)


def random_trace_graph(rng: random.Random, max_nodes: int = 8, slots: int = 3,
                       variables=("x", "y", "z", "w")) -> TraceGraph:
    """Random graph whose trace relation is drawn directly, not from a proof.

    Each node carries ``slots`` formula positions (variables named s0, s1, ...);
    every edge relates some positions, optionally unfolding a variable.
    """
    n = rng.randint(1, max_nodes)
    pool = [Var(f"s{i}") for i in range(slots)]
    formulas = {v: frozenset(pool) for v in range(n)}
    edges: dict[int, list[int]] = {}
    relation = {}
    for v in range(n):
        outs = sorted(set(rng.randrange(n) for _ in range(rng.randint(0, 2))))
        if v == 0 and not outs:
            outs = [rng.randrange(n)]
        edges[v] = outs
        for w in outs:
            triples = set()
            for f in pool:
                for g in pool:
                    if rng.random() < 0.35:
                        var = rng.choice(variables) if rng.random() < 0.7 else None
                        triples.add((f, g, var))
            relation[(v, w)] = frozenset(triples)
    return TraceGraph(0, formulas, edges, relation)


def random_priorities(rng: random.Random, variables=("x", "y", "z", "w")) -> dict[str, int]:
    return {v: rng.randint(0, 5) for v in variables}



def search_graph_cases(rng: random.Random, count: int, max_nodes: int = 8,
                       max_tries: int = 20_000) -> list[tuple[TraceGraph, dict[str, int]]]:
    """Distinct trace graphs met by NW search on random sequents, with priorities.

    Only graphs with at most ``max_nodes`` reachable nodes are kept; both
    accepted and rejected candidates occur.
    """
    bounds = SearchBounds(max_depth=20, node_budget=2000)
    seen = set()
    out = []
    for _ in range(max_tries):
        if len(out) >= count:
            break
        seq = random_sequent(rng, size=rng.randint(1, 2), depth=rng.randint(2, 3), letters=("p",))
        graphs, priorities = search_trace_graphs(seq, bounds)
        for g in graphs:
            key = g.dump()
            if len(g.reachable()) <= max_nodes and key not in seen:
                seen.add(key)
                out.append((g, priorities))
    return out[:count]
