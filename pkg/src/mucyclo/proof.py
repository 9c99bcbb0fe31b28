"""Proof graphs shared by NW and Clo, plus the JSON interchange format.

An NW sequent is a frozenset of formulas. A Clo sequent is a frozenset of
``(formula, annotation)`` pairs where an annotation is a tuple of ``Name``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Iterator

from .formula import Formula, parse_formula


class ProofFormatError(ValueError):
    pass


NW_RULES = ("Ax", "Or", "And", "Weak", "Box", "Mu", "Nu", "Backedge")
CLO_RULES = ("Ax", "Or", "And", "Weak", "Box", "Mu", "Nu", "Exp", "Clo", "Cut", "Discharge", "Open")

_NAME = re.compile(r"([a-z][a-z0-9_]*)#(\d+)$")


@dataclass(frozen=True, order=True)
class Name:
    var: str
    index: int

    def __str__(self):
        return f"{self.var}#{self.index}"

    @classmethod
    def parse(cls, text: str) -> Name:
        m = _NAME.match(text)
        if not m:
            raise ProofFormatError(f"bad name {text!r}; expected <var>#<index>")
        return cls(m.group(1), int(m.group(2)))


Annotation = tuple  # tuple[Name, ...]
EPS: Annotation = ()


def format_annotation(a: Annotation) -> str:
    return "".join(str(n) for n in a) if a else "ε"


def entry_key(entry) -> tuple:
    if isinstance(entry, Formula):
        return (entry.text,)
    f, a = entry
    return (f.text, tuple((n.var, n.index) for n in a))


def sorted_entries(sequent) -> list:
    return sorted(sequent, key=entry_key)


def bare(sequent) -> frozenset[Formula]:
    return frozenset(e if isinstance(e, Formula) else e[0] for e in sequent)


def format_entry(entry) -> str:
    if isinstance(entry, Formula):
        return entry.text
    f, a = entry
    return f"{f.text} ^{format_annotation(a)}"


def format_sequent(sequent) -> str:
    return ", ".join(format_entry(e) for e in sorted_entries(sequent))


@dataclass(frozen=True)
class Node:
    id: int
    sequent: frozenset
    rule: str
    principal: Any = None
    children: tuple[int, ...] = ()
    target: int | None = None
    token: Name | None = None
    label: str | None = None


@dataclass
class Proof:
    system: str  # "nw" or "clo"
    root: int
    nodes: dict[int, Node] = field(default_factory=dict)

    def __post_init__(self):
        self._parents = None

    def __getitem__(self, node_id: int) -> Node:
        return self.nodes[node_id]

    def __len__(self):
        return len(self.nodes)

    @property
    def parents(self) -> dict[int, int]:
        if self._parents is None:
            self._parents = {c: n.id for n in self.nodes.values() for c in n.children}
        return self._parents

    def preorder(self, start: int | None = None) -> Iterator[Node]:
        stack = [self.root if start is None else start]
        seen = set()
        while stack:
            nid = stack.pop()
            if nid in seen:
                continue
            seen.add(nid)
            node = self.nodes[nid]
            yield node
            stack.extend(reversed(node.children))

    def ancestors(self, node_id: int) -> list[int]:
        """Strict ancestors, nearest first."""
        out = []
        parents = self.parents
        while node_id in parents:
            node_id = parents[node_id]
            out.append(node_id)
        return out

    def is_strict_ancestor(self, a: int, b: int) -> bool:
        return a in self.ancestors(b)

    def path(self, top: int, bottom: int) -> list[int]:
        """Tree path from ``top`` down to ``bottom`` inclusive."""
        chain = [bottom] + self.ancestors(bottom)
        if top not in chain:
            raise ValueError(f"node {top} is not an ancestor of {bottom}")
        return list(reversed(chain[: chain.index(top) + 1]))

    def subtree(self, node_id: int) -> list[int]:
        return [n.id for n in self.preorder(node_id)]

    def by_label(self, label: str) -> Node:
        for n in self.nodes.values():
            if n.label == label:
                return n
        raise KeyError(label)

    @property
    def root_sequent(self):
        return self.nodes[self.root].sequent

    def relabel(self, mapping: dict[int, int]) -> Proof:
        nodes = {}
        for n in self.nodes.values():
            nid = mapping[n.id]
            nodes[nid] = replace(n, id=nid, children=tuple(mapping[c] for c in n.children),
                                 target=None if n.target is None else mapping[n.target])
        return Proof(self.system, mapping[self.root], nodes)

    def renumbered(self) -> Proof:
        """Ids in preorder starting at 0."""
        return self.relabel({n.id: i for i, n in enumerate(self.preorder())})


# -- JSON -------------------------------------------------------------------


def _entry_to_json(entry, system):
    if system == "nw":
        return {"formula": entry.text}
    f, a = entry
    return {"formula": f.text, "annotation": [str(n) for n in a]}


def proof_to_dict(proof: Proof) -> dict:
    out_nodes = []
    for nid in sorted(proof.nodes):
        n = proof.nodes[nid]
        entries = sorted_entries(n.sequent)
        d: dict[str, Any] = {
            "id": n.id,
            "sequent": [_entry_to_json(e, proof.system) for e in entries],
            "rule": n.rule,
        }
        if n.principal is not None:
            d["principal"] = entries.index(n.principal)
        d["children"] = list(n.children)
        if n.target is not None:
            d["target"] = n.target
        if n.token is not None:
            d["token"] = str(n.token)
        if n.label is not None:
            d["label"] = n.label
        out_nodes.append(d)
    return {"system": proof.system, "root": proof.root, "nodes": out_nodes}


def dump_proof(proof: Proof) -> str:
    return json.dumps(proof_to_dict(proof), indent=2, ensure_ascii=False) + "\n"


def proof_from_dict(data: dict) -> Proof:
    try:
        system = data["system"]
        if system not in ("nw", "clo"):
            raise ProofFormatError(f"unknown system {system!r}")
        rules = NW_RULES if system == "nw" else CLO_RULES
        nodes = {}
        cache: dict[str, Formula] = {}
        for raw in data["nodes"]:
            entries = []
            for e in raw["sequent"]:
                text = e["formula"]
                if text not in cache:
                    cache[text] = parse_formula(text)
                f = cache[text]
                if system == "nw":
                    if e.get("annotation"):
                        raise ProofFormatError("NW sequents carry no annotations")
                    entries.append(f)
                else:
                    entries.append((f, tuple(Name.parse(s) for s in e.get("annotation", []))))
            rule = raw["rule"]
            if rule not in rules:
                raise ProofFormatError(f"node {raw['id']}: rule {rule!r} not in {system}")
            principal = None
            if raw.get("principal") is not None:
                idx = raw["principal"]
                if not 0 <= idx < len(entries):
                    raise ProofFormatError(f"node {raw['id']}: principal index out of range")
                # indices refer to the sequent array as written
                principal = entries[idx]
            nid = int(raw["id"])
            if nid in nodes:
                raise ProofFormatError(f"duplicate node id {nid}")
            nodes[nid] = Node(
                id=nid,
                sequent=frozenset(entries),
                rule=rule,
                principal=principal,
                children=tuple(int(c) for c in raw.get("children", [])),
                target=raw.get("target"),
                token=Name.parse(raw["token"]) if raw.get("token") else None,
                label=raw.get("label"),
            )
        root = int(data["root"])
    except ProofFormatError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ProofFormatError(f"malformed proof JSON: {e}") from e
    if root not in nodes:
        raise ProofFormatError(f"root {root} is not a node")
    for n in nodes.values():
        for c in n.children:
            if c not in nodes:
                raise ProofFormatError(f"node {n.id}: unknown child {c}")
        if n.target is not None and n.target not in nodes:
            raise ProofFormatError(f"node {n.id}: unknown target {n.target}")
    return Proof(system, root, nodes)


def load_proof(text: str) -> Proof:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProofFormatError(f"not JSON: {e}") from e
    if not isinstance(data, dict):
        raise ProofFormatError("proof JSON must be an object")
    return proof_from_dict(data)


def read_proof(path) -> Proof:
    with open(path, encoding="utf-8") as fh:
        return load_proof(fh.read())


def write_proof(proof: Proof, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_proof(proof))


class ProofBuilder:
    """Incremental construction of proofs, children before or after parents."""

    def __init__(self, system: str):
        self.system = system
        self.nodes: dict[int, Node] = {}
        self._next = 0

    def add(self, sequent: Iterable, rule: str, principal=None, children=(),
            target=None, token=None, label=None) -> int:
        nid = self._next
        self._next += 1
        self.nodes[nid] = Node(nid, frozenset(sequent), rule, principal,
                               tuple(children), target, token, label)
        return nid

    def set_children(self, nid: int, children) -> None:
        self.nodes[nid] = replace(self.nodes[nid], children=tuple(children))

    def set_target(self, nid: int, target: int) -> None:
        self.nodes[nid] = replace(self.nodes[nid], target=target)

    def build(self, root: int) -> Proof:
        return Proof(self.system, root, dict(self.nodes)).renumbered()


def proof_signature(proof: Proof):
    """Shape of a proof independent of node ids and labels."""
    index = {n.id: i for i, n in enumerate(proof.preorder())}

    def sig(nid):
        n = proof.nodes[nid]
        principal = None if n.principal is None else format_entry(n.principal)
        target = None if n.target is None else index[n.target]
        token = None if n.token is None else str(n.token)
        return (format_sequent(n.sequent), n.rule, principal, target, token,
                tuple(sig(c) for c in n.children))

    return sig(proof.root)
