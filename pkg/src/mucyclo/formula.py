"""Modal mu-calculus formulas: syntax, parsing, printing and closure.

Formulas are immutable trees. Equality, hashing and ordering go through the
canonical ASCII rendering (``Formula.text``), which the parser reads back.

Concrete syntax::

    p  ~p  x  a | b  a & b  <>a  []a  mu x. a  nu x. a

Modalities bind tighter than ``&``, which binds tighter than ``|``. A binder
extends as far to the right as possible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator


class FormulaError(ValueError):
    pass


class ParseError(FormulaError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UncleanError(FormulaError):
    def __init__(self, variable: str, message: str):
        super().__init__(message)
        self.variable = variable


class Formula:
    """Base class. Subclasses are frozen dataclasses with ``eq=False``."""

    @cached_property
    def text(self) -> str:
        return _render(self)

    def __str__(self) -> str:
        return self.text

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Formula):
            return NotImplemented
        return self.text == other.text

    def __hash__(self):
        return hash(self.text)

    def __lt__(self, other: Formula) -> bool:
        return self.text < other.text

    def children(self) -> tuple[Formula, ...]:
        return ()


@dataclass(frozen=True, eq=False)
class PropLit(Formula):
    name: str
    negated: bool = False

    def __repr__(self):
        return f"PropLit({self.name!r}, negated={self.negated})"


@dataclass(frozen=True, eq=False)
class Var(Formula):
    name: str

    def __repr__(self):
        return f"Var({self.name!r})"


@dataclass(frozen=True, eq=False)
class Or(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)

    def __repr__(self):
        return f"Or({self.left!r}, {self.right!r})"


@dataclass(frozen=True, eq=False)
class And(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)

    def __repr__(self):
        return f"And({self.left!r}, {self.right!r})"


@dataclass(frozen=True, eq=False)
class Dia(Formula):
    sub: Formula

    def children(self):
        return (self.sub,)

    def __repr__(self):
        return f"Dia({self.sub!r})"


@dataclass(frozen=True, eq=False)
class Box(Formula):
    sub: Formula

    def children(self):
        return (self.sub,)

    def __repr__(self):
        return f"Box({self.sub!r})"


@dataclass(frozen=True, eq=False)
class Mu(Formula):
    var: str
    body: Formula

    def children(self):
        return (self.body,)

    def __repr__(self):
        return f"Mu({self.var!r}, {self.body!r})"


@dataclass(frozen=True, eq=False)
class Nu(Formula):
    var: str
    body: Formula

    def children(self):
        return (self.body,)

    def __repr__(self):
        return f"Nu({self.var!r}, {self.body!r})"


Fixpoint = (Mu, Nu)
Sequent = frozenset  # frozenset[Formula]


def is_fixpoint(f: Formula) -> bool:
    return isinstance(f, Fixpoint)


# -- printing ---------------------------------------------------------------

_PREC = {Or: 1, And: 2}


def _open_right(f: Formula) -> bool:
    """True when the rendering of ``f`` ends in a binder scope."""
    while True:
        if isinstance(f, Fixpoint):
            return True
        if isinstance(f, (Or, And)):
            f = f.right
        elif isinstance(f, (Dia, Box)):
            f = f.sub
        else:
            return False


def _render(f: Formula) -> str:
    if isinstance(f, PropLit):
        return ("~" if f.negated else "") + f.name
    if isinstance(f, Var):
        return f.name
    if isinstance(f, (Or, And)):
        op = " | " if isinstance(f, Or) else " & "
        prec = _PREC[type(f)]
        left = f.left.text
        if (type(f.left) in _PREC and _PREC[type(f.left)] < prec) or _open_right(f.left):
            left = f"({left})"
        right = f.right.text
        # binary operators associate to the left
        if type(f.right) in _PREC and _PREC[type(f.right)] <= prec:
            right = f"({right})"
        return left + op + right
    if isinstance(f, (Dia, Box)):
        op = "<>" if isinstance(f, Dia) else "[]"
        sub = f.sub.text
        if isinstance(f.sub, (Or, And)):
            return f"{op}({sub})"
        if isinstance(f.sub, Fixpoint):
            return f"{op} {sub}"
        return op + sub
    if isinstance(f, Mu):
        return f"mu {f.var}. {f.body.text}"
    if isinstance(f, Nu):
        return f"nu {f.var}. {f.body.text}"
    raise TypeError(f"not a formula: {f!r}")


_UNICODE = [("<>", "◇"), ("[]", "□"), ("&", "∧"), ("|", "∨"), ("mu ", "μ"), ("nu ", "ν")]


def pretty(f: Formula) -> str:
    """Unicode rendering for human-facing output (not parseable)."""
    s = f.text
    s = re.sub(r"~([a-z][a-z0-9_]*)", lambda m: m.group(1) + "̄", s)
    for a, b in _UNICODE:
        s = s.replace(a, b)
    return s


def format_sequent(seq: Iterable[Formula]) -> str:
    return ", ".join(f.text for f in sorted(seq))


# -- parsing ----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(<>|\[\]|[()&|~.,])|([a-z][a-z0-9_]*))")
_KEYWORDS = {"mu", "nu"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(1) if m.group(1) else m.start(2)
        if m.group(1):
            tokens.append(("op", m.group(1), start))
        else:
            word = m.group(2)
            tokens.append(("kw" if word in _KEYWORDS else "id", word, start))
        pos = m.end()
    tokens.append(("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.next()
        if val != value or kind == "eof":
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", pos)

    def formula(self, bound: tuple[str, ...]) -> Formula:
        left = self.conj(bound)
        while self.peek()[1] == "|" and self.peek()[0] == "op":
            self.next()
            left = Or(left, self.conj(bound))
        return left

    def conj(self, bound):
        left = self.unary(bound)
        while self.peek()[1] == "&" and self.peek()[0] == "op":
            self.next()
            left = And(left, self.unary(bound))
        return left

    def unary(self, bound):
        kind, val, pos = self.next()
        if kind == "op":
            if val == "<>":
                return Dia(self.unary(bound))
            if val == "[]":
                return Box(self.unary(bound))
            if val == "(":
                f = self.formula(bound)
                self.expect(")")
                return f
            if val == "~":
                k2, name, p2 = self.next()
                if k2 != "id":
                    raise ParseError("expected proposition letter after '~'", p2)
                if name in bound:
                    raise ParseError(f"cannot negate bound variable {name!r}", p2)
                return PropLit(name, True)
        elif kind == "kw":
            k2, var, p2 = self.next()
            if k2 != "id":
                raise ParseError("expected variable after binder", p2)
            self.expect(".")
            body = self.formula(bound + (var,))
            return Mu(var, body) if val == "mu" else Nu(var, body)
        elif kind == "id":
            return Var(val) if val in bound else PropLit(val)
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos)


def parse_formula(text: str) -> Formula:
    """Parse one formula. Identifiers not bound by an enclosing binder are
    proposition letters, so the result is always closed."""
    p = _Parser(text)
    f = p.formula(())
    kind, val, pos = p.peek()
    if kind != "eof":
        raise ParseError(f"unexpected {val!r}", pos)
    return f


def parse_sequent(text: str) -> frozenset[Formula]:
    """Comma-separated formulas; the empty string is the empty sequent."""
    p = _Parser(text)
    out = []
    if p.peek()[0] == "eof":
        return frozenset()
    while True:
        out.append(p.formula(()))
        kind, val, pos = p.next()
        if kind == "eof":
            break
        if val != ",":
            raise ParseError(f"unexpected {val!r}", pos)
    return frozenset(out)


# -- structural operations --------------------------------------------------


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Var):
        return frozenset([f.name])
    if isinstance(f, Fixpoint):
        return free_vars(f.body) - {f.var}
    out = frozenset()
    for c in f.children():
        out |= free_vars(c)
    return out


def is_closed(f: Formula) -> bool:
    return not free_vars(f)


def substitute(f: Formula, env: dict[str, Formula]) -> Formula:
    """Replace free variables by closed formulas (no capture possible)."""
    if not env:
        return f
    if isinstance(f, Var):
        return env.get(f.name, f)
    if isinstance(f, PropLit):
        return f
    if isinstance(f, Or):
        return Or(substitute(f.left, env), substitute(f.right, env))
    if isinstance(f, And):
        return And(substitute(f.left, env), substitute(f.right, env))
    if isinstance(f, Dia):
        return Dia(substitute(f.sub, env))
    if isinstance(f, Box):
        return Box(substitute(f.sub, env))
    if f.var in env:
        env = {k: v for k, v in env.items() if k != f.var}
    return type(f)(f.var, substitute(f.body, env))


def unfold(f: Formula) -> Formula:
    if not isinstance(f, Fixpoint):
        raise FormulaError(f"not a fixpoint formula: {f.text}")
    return substitute(f.body, {f.var: f})


def tracestep(f: Formula) -> tuple[Formula, ...]:
    """Direct successors of ``f`` in the closure relation."""
    if isinstance(f, Fixpoint):
        return (unfold(f),)
    return f.children()


def negate(f: Formula) -> Formula:
    if isinstance(f, PropLit):
        return PropLit(f.name, not f.negated)
    if isinstance(f, Var):
        return f
    if isinstance(f, Or):
        return And(negate(f.left), negate(f.right))
    if isinstance(f, And):
        return Or(negate(f.left), negate(f.right))
    if isinstance(f, Dia):
        return Box(negate(f.sub))
    if isinstance(f, Box):
        return Dia(negate(f.sub))
    if isinstance(f, Mu):
        return Nu(f.var, negate(f.body))
    return Mu(f.var, negate(f.body))


def diamond_sequent(seq: Iterable[Formula]) -> frozenset[Formula]:
    return frozenset(Dia(f) for f in seq)


def disjunction(seq: Iterable[Formula]) -> Formula:
    """Left-nested disjunction of a nonempty sequent in canonical order."""
    items = sorted(seq)
    if not items:
        raise FormulaError("empty sequent has no disjunction")
    out = items[0]
    for f in items[1:]:
        out = Or(out, f)
    return out


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    for c in f.children():
        yield from subformulas(c)


def proposition_letters(f: Formula) -> list[str]:
    return sorted({g.name for g in subformulas(f) if isinstance(g, PropLit)})


# -- cleanliness and subsumption -------------------------------------------


def _binder_occurrences(f: Formula, env: dict[str, Formula]):
    """Yield ``(raw_binder, closed_binder)`` for each binder occurrence.

    ``env`` maps variables bound above the current position to the closed
    form of their binder.
    """
    if isinstance(f, Fixpoint):
        closed = substitute(f, env)
        yield f, closed
        yield from _binder_occurrences(f.body, {**env, f.var: closed})
    else:
        for c in f.children():
            yield from _binder_occurrences(c, env)


@dataclass(frozen=True)
class CleanVerdict:
    clean: bool
    variable: str | None = None
    binders: tuple[Formula, ...] = ()

    def __bool__(self):
        return self.clean


def binder_map(seq: Iterable[Formula]) -> dict[str, Formula]:
    """Map each variable to its unique closed binder; raise if unclean."""
    found: dict[str, set[Formula]] = {}
    for f in sorted(seq):
        if not is_closed(f):
            raise FormulaError(f"formula is not closed: {f.text}")
        for _raw, closed in _binder_occurrences(f, {}):
            found.setdefault(closed.var, set()).add(closed)
    out = {}
    for var in sorted(found):
        binders = found[var]
        if len(binders) > 1:
            raise UncleanError(var, f"variable {var!r} has {len(binders)} distinct binders")
        out[var] = next(iter(binders))
    return out


def check_clean(seq: Iterable[Formula]) -> CleanVerdict:
    seq = list(seq)
    found: dict[str, set[Formula]] = {}
    for f in sorted(seq):
        for _raw, closed in _binder_occurrences(f, {}):
            found.setdefault(closed.var, set()).add(closed)
    for var in sorted(found):
        if len(found[var]) > 1:
            return CleanVerdict(False, var, tuple(sorted(found[var])))
    try:
        subsumption_order(seq)
    except UncleanError as e:
        return CleanVerdict(False, e.variable)
    return CleanVerdict(True)


@dataclass(frozen=True)
class SubsumptionOrder:
    variables: frozenset[str]
    pairs: frozenset[tuple[str, str]]  # (x, y) means x <= y

    def leq(self, x: str, y: str) -> bool:
        if x not in self.variables or y not in self.variables:
            raise KeyError(f"unknown variable {x if x not in self.variables else y!r}")
        return (x, y) in self.pairs

    def linearize(self) -> list[str]:
        """Variables with every x placed before each y it lies below."""
        remaining = set(self.variables)
        out = []
        while remaining:
            ready = sorted(v for v in remaining
                           if not any((u, v) in self.pairs for u in remaining if u != v))
            v = ready[0]
            out.append(v)
            remaining.remove(v)
        return out


def subsumption_order(seq: Iterable[Formula]) -> SubsumptionOrder:
    seq = list(seq)
    binder_map(seq)  # raises on unclean input
    variables = set()
    pairs = set()
    for f in seq:
        for raw, _closed in _binder_occurrences(f, {}):
            variables.add(raw.var)
            for x in free_vars(raw):
                pairs.add((x, raw.var))
    pairs |= {(v, v) for v in variables}
    changed = True
    while changed:
        changed = False
        for (a, b) in list(pairs):
            for (c, d) in list(pairs):
                if b == c and (a, d) not in pairs:
                    pairs.add((a, d))
                    changed = True
    for (a, b) in pairs:
        if a != b and (b, a) in pairs:
            raise UncleanError(a, f"variables {a!r} and {b!r} subsume each other")
    return SubsumptionOrder(frozenset(variables), frozenset(pairs))


# -- closure ----------------------------------------------------------------


@dataclass(frozen=True)
class ClosureSet:
    members: frozenset[Formula]
    edges: frozenset[tuple[Formula, Formula]]

    def __len__(self):
        return len(self.members)

    def __contains__(self, f):
        return f in self.members

    def __iter__(self):
        return iter(sorted(self.members))


def closure(seq: Iterable[Formula]) -> ClosureSet:
    members = set()
    edges = set()
    work = list(seq)
    while work:
        f = work.pop()
        if f in members:
            continue
        members.add(f)
        for g in tracestep(f):
            edges.add((f, g))
            if g not in members:
                work.append(g)
    return ClosureSet(frozenset(members), frozenset(edges))


def closure_members(f: Formula) -> frozenset[Formula]:
    return closure([f]).members


@dataclass(frozen=True)
class AdisjunctivityVerdict:
    adisjunctive: bool
    nu_formula: Formula | None = None
    disjunction: Formula | None = None

    def __bool__(self):
        return self.adisjunctive


def is_adisjunctive(seq: Iterable[Formula]) -> AdisjunctivityVerdict:
    cache: dict[Formula, frozenset[Formula]] = {}

    def clos(f):
        if f not in cache:
            cache[f] = closure_members(f)
        return cache[f]

    for nu in sorted(g for g in closure(seq).members if isinstance(g, Nu)):
        for d in sorted(g for g in clos(nu) if isinstance(g, Or)):
            if nu in clos(d.left) and nu in clos(d.right):
                return AdisjunctivityVerdict(False, nu, d)
    return AdisjunctivityVerdict(True)
