"""Finite Kripke semantics and bounded countermodel search.

State sets are handled internally as int bitmasks; the public functions take
and return frozensets of state indices.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass, field
from typing import Mapping

from .errors import ResourceError
from .formula import (And, Box, Dia, Formula, Mu, Or, PropLit, Var,
                      proposition_letters)


class SemanticsError(ValueError):
    pass


@dataclass(frozen=True)
class KripkeModel:
    size: int
    edges: frozenset[tuple[int, int]] = frozenset()
    valuation: Mapping[str, frozenset[int]] = field(default_factory=dict)

    def __post_init__(self):
        if self.size < 1:
            raise SemanticsError("a model needs at least one state")
        for i, j in self.edges:
            if not (0 <= i < self.size and 0 <= j < self.size):
                raise SemanticsError(f"edge {i}->{j} refers to an undeclared state")
        for p, states in self.valuation.items():
            if any(not 0 <= s < self.size for s in states):
                raise SemanticsError(f"valuation of {p!r} refers to an undeclared state")

    @property
    def states(self) -> frozenset[int]:
        return frozenset(range(self.size))

    def successors(self, s: int) -> frozenset[int]:
        return frozenset(j for i, j in self.edges if i == s)

    def to_text(self) -> str:
        edges = ", ".join(f"{i}->{j}" for i, j in sorted(self.edges))
        parts = [f"states {self.size}", f"edges {edges}"]
        for p in sorted(self.valuation):
            members = ", ".join(str(s) for s in sorted(self.valuation[p]))
            parts.append(f"val {p} = {{{members}}}")
        return "; ".join(parts) + ";"


_STATEMENT = re.compile(r"\s*(states|edges|val)\b(.*)", re.S)


def parse_model(text: str) -> KripkeModel:
    """Read ``states N; edges i->j, ...; val p = {i, ...};``."""
    size = None
    edges = set()
    valuation = {}
    for stmt in text.split(";"):
        if not stmt.strip():
            continue
        m = _STATEMENT.match(stmt)
        if not m:
            raise SemanticsError(f"cannot parse model statement {stmt.strip()!r}")
        key, rest = m.group(1), m.group(2).strip()
        if key == "states":
            size = int(rest)
        elif key == "edges":
            for item in filter(None, (s.strip() for s in rest.split(","))):
                a, _, b = item.partition("->")
                edges.add((int(a), int(b)))
        else:
            name, _, members = rest.partition("=")
            members = members.strip().strip("{}")
            valuation[name.strip()] = frozenset(
                int(s) for s in members.split(",") if s.strip())
    if size is None:
        raise SemanticsError("model text lacks a 'states N' statement")
    return KripkeModel(size, frozenset(edges), valuation)


class _Evaluator:
    def __init__(self, model: KripkeModel):
        self.n = model.size
        self.full = (1 << self.n) - 1
        self.succ = [0] * self.n
        for i, j in model.edges:
            self.succ[i] |= 1 << j
        self.val = {p: sum(1 << s for s in states) for p, states in model.valuation.items()}
        self.iterations = 0

    def dia(self, target: int) -> int:
        return sum(1 << s for s in range(self.n) if self.succ[s] & target)

    def box(self, target: int) -> int:
        return sum(1 << s for s in range(self.n) if not self.succ[s] & ~target)

    def eval(self, f: Formula, env: dict[str, int]) -> int:
        if isinstance(f, PropLit):
            v = self.val.get(f.name, 0)
            return self.full & ~v if f.negated else v
        if isinstance(f, Var):
            if f.name not in env:
                raise SemanticsError(f"unbound variable {f.name!r}")
            return env[f.name]
        if isinstance(f, Or):
            return self.eval(f.left, env) | self.eval(f.right, env)
        if isinstance(f, And):
            return self.eval(f.left, env) & self.eval(f.right, env)
        if isinstance(f, Dia):
            return self.dia(self.eval(f.sub, env))
        if isinstance(f, Box):
            return self.box(self.eval(f.sub, env))
        current = 0 if isinstance(f, Mu) else self.full
        while True:
            self.iterations += 1
            nxt = self.eval(f.body, {**env, f.var: current})
            if nxt == current:
                return current
            current = nxt


def _mask(states) -> int:
    return sum(1 << s for s in states)


def _unmask(mask: int, n: int) -> frozenset[int]:
    return frozenset(s for s in range(n) if mask >> s & 1)


def eval_formula(formula: Formula, model: KripkeModel,
                 env: Mapping[str, frozenset[int]] | None = None) -> frozenset[int]:
    ev = _Evaluator(model)
    masks = {k: _mask(v) for k, v in (env or {}).items()}
    return _unmask(ev.eval(formula, masks), model.size)


def holds_everywhere(formula: Formula, model: KripkeModel) -> bool:
    return eval_formula(formula, model) == model.states


def random_model(rng: random.Random, letters, max_states: int = 6,
                 edge_prob: float | None = None) -> KripkeModel:
    n = rng.randint(1, max_states)
    prob = rng.random() if edge_prob is None else edge_prob
    edges = frozenset((i, j) for i in range(n) for j in range(n) if rng.random() < prob)
    valuation = {p: frozenset(s for s in range(n) if rng.random() < 0.5) for p in letters}
    return KripkeModel(n, edges, valuation)


def _model_from_bits(n: int, edge_bits: int, val_bits: int, letters) -> KripkeModel:
    edges = frozenset((i, j) for i in range(n) for j in range(n) if edge_bits >> (i * n + j) & 1)
    valuation = {p: frozenset(s for s in range(n) if val_bits >> (k * n + s) & 1)
                 for k, p in enumerate(letters)}
    return KripkeModel(n, edges, valuation)


def _permute_bits(n, edge_bits, val_bits, nletters, perm):
    e = 0
    for i in range(n):
        for j in range(n):
            if edge_bits >> (i * n + j) & 1:
                e |= 1 << (perm[i] * n + perm[j])
    v = 0
    for k in range(nletters):
        for s in range(n):
            if val_bits >> (k * n + s) & 1:
                v |= 1 << (k * n + perm[s])
    return e, v


@dataclass(frozen=True)
class Countermodel:
    model: KripkeModel
    state: int


def search_countermodel(formula: Formula, max_states: int,
                        max_models: int = 2_000_000) -> Countermodel | None:
    """Return the first pointed model falsifying ``formula`` or None.

    Models are enumerated by state count, then transition bitmask, then
    valuation bitmask; a model is skipped unless its encoding is the least
    among all state permutations. Raises ResourceError after ``max_models``
    candidates.
    """
    if max_states < 1:
        raise SemanticsError("max_states must be at least 1")
    letters = proposition_letters(formula)
    seen = 0
    for n in range(1, max_states + 1):
        perms = [p for p in itertools.permutations(range(n)) if list(p) != list(range(n))]
        for edge_bits in range(1 << (n * n)):
            for val_bits in range(1 << (n * len(letters))):
                if any(_permute_bits(n, edge_bits, val_bits, len(letters), p) < (edge_bits, val_bits)
                       for p in perms):
                    continue
                seen += 1
                if seen > max_models:
                    raise ResourceError(f"countermodel search exceeded {max_models} models")
                model = _model_from_bits(n, edge_bits, val_bits, letters)
                ev = _Evaluator(model)
                sat = ev.eval(formula, {})
                if sat != ev.full:
                    state = next(s for s in range(n) if not sat >> s & 1)
                    return Countermodel(model, state)
    return None
