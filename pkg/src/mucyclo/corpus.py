"""Pinned encodings of the formulas, sequents and derivations of the Φ example.

    νx.φ = nu x. <>(~p & ([]x | <> nu y. [](p & ([]x | <>y))))
    νy.ψ = the closed y-binder inside νx.φ, with x replaced by νx.φ
    χ    = []νx.φ | <>νy.ψ
    Φ    = {νx.φ, νy.ψ}
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any

from .formula import (And, Box, Dia, Formula, Or, PropLit, parse_formula,
                      unfold)
from .proof import EPS, Name, Proof, ProofBuilder, dump_proof

PHI_X_TEXT = "nu x. <>(~p & ([]x | <> nu y. [](p & ([]x | <>y))))"

PHI_X: Formula = parse_formula(PHI_X_TEXT)
PSI_Y: Formula = unfold(PHI_X).sub.right.right.sub
CHI: Formula = Or(Box(PHI_X), Dia(PSI_Y))
PHI = frozenset([PHI_X, PSI_Y])

P = PropLit("p")
NP = PropLit("p", True)
UNF_X = unfold(PHI_X)  # <>(~p & chi)
UNF_Y = unfold(PSI_Y)  # [](p & chi)
NPCHI = And(NP, CHI)
PCHI = And(P, CHI)
BOX_X = Box(PHI_X)
DIA_Y = Dia(PSI_Y)


def _s(*fs):
    return frozenset(fs)


def _nw_branch_to_phi(b: ProofBuilder, with_weak: Formula | None, label: str) -> int:
    """Or on χ, optional Weak, Box on □νx.φ, back-edge leaf {νx.φ, νy.ψ}.

    Returns the id of the Or node. The back-edge target is filled in later.
    """
    leaf = b.add(PHI, "Backedge", label=label)
    box = b.add(_s(BOX_X, DIA_Y), "Box", principal=BOX_X, children=[leaf], label=label + "_box")
    top = box
    if with_weak is not None:
        top = b.add(_s(BOX_X, DIA_Y, with_weak), "Weak", principal=with_weak, children=[box])
        ctx = _s(with_weak)
    else:
        ctx = _s()
    return b.add(ctx | {CHI}, "Or", principal=CHI, children=[top])


def _nw_base(b: ProofBuilder, top: int) -> int:
    """Nu νx.φ, Nu νy.ψ, Box on ψ-unfolding, above ``top``."""
    box = b.add(_s(UNF_X, UNF_Y), "Box", principal=UNF_Y, children=[top])
    nu_y = b.add(_s(UNF_X, PSI_Y), "Nu", principal=PSI_Y, children=[box])
    return b.add(PHI, "Nu", principal=PHI_X, children=[nu_y], label="root")


def _close_backedges(b: ProofBuilder, root: int) -> Proof:
    for nid, n in list(b.nodes.items()):
        if n.rule == "Backedge":
            b.set_target(nid, root)
    return b.build(root)


def build_pi() -> Proof:
    b = ProofBuilder("nw")
    ax = b.add(_s(NP, P), "Ax")
    br_b = _nw_branch_to_phi(b, P, "B")
    node_a = b.add(_s(NPCHI, P), "And", principal=NPCHI, children=[ax, br_b], label="A")
    br_c = _nw_branch_to_phi(b, NP, "C")
    br_d = _nw_branch_to_phi(b, None, "D")
    right = b.add(_s(NPCHI, CHI), "And", principal=NPCHI, children=[br_c, br_d])
    top = b.add(_s(NPCHI, PCHI), "And", principal=PCHI, children=[node_a, right])
    return _close_backedges(b, _nw_base(b, top))


def build_pi_weak_1() -> Proof:
    b = ProofBuilder("nw")
    ax = b.add(_s(NP, P), "Ax")
    br_b = _nw_branch_to_phi(b, P, "B")
    node_a = b.add(_s(NPCHI, P), "And", principal=NPCHI, children=[ax, br_b], label="A")
    br_c = _nw_branch_to_phi(b, None, "C")
    weak = b.add(_s(NPCHI, CHI), "Weak", principal=NPCHI, children=[br_c])
    top = b.add(_s(NPCHI, PCHI), "And", principal=PCHI, children=[node_a, weak])
    return _close_backedges(b, _nw_base(b, top))


def build_pi_weak_2() -> Proof:
    b = ProofBuilder("nw")
    ax = b.add(_s(NP, P), "Ax")
    br_c = _nw_branch_to_phi(b, NP, "C")
    node_a = b.add(_s(NP, PCHI), "And", principal=PCHI, children=[ax, br_c], label="A")
    br_b = _nw_branch_to_phi(b, None, "B")
    weak = b.add(_s(CHI, PCHI), "Weak", principal=PCHI, children=[br_b])
    top = b.add(_s(NPCHI, PCHI), "And", principal=NPCHI, children=[node_a, weak])
    return _close_backedges(b, _nw_base(b, top))


def build_nw_self(kind: str) -> Proof:
    """Self-loop derivation of {νx.x} or {μx.x}."""
    f = parse_formula(f"{kind} x. x")
    b = ProofBuilder("nw")
    leaf = b.add(_s(f), "Backedge")
    root = b.add(_s(f), kind.capitalize(), principal=f, children=[leaf])
    b.set_target(leaf, root)
    return b.build(root)


def build_weak_kill() -> Proof:
    """Loop {νx.<>x, μz.(z | νx.<>x)} that weakens νx.<>x away each round.

    νx.<>x is re-created only from the μ-formula and then weakened, so the
    one infinite trace is the μ-trace.
    """
    nx = parse_formula("nu x. <>x")
    mz = parse_formula("mu z. z | nu x. <>x")
    seq = _s(nx, mz)
    b = ProofBuilder("nw")
    leaf = b.add(seq, "Backedge")
    orn = b.add(_s(unfold(mz)), "Or", principal=unfold(mz), children=[leaf])
    mu = b.add(_s(mz), "Mu", principal=mz, children=[orn])
    root = b.add(seq, "Weak", principal=nx, children=[mu])
    b.set_target(leaf, root)
    return b.build(root)


def build_dead_loop() -> Proof:
    """Loop whose only formula is weakened and re-derived by nothing.

    {νx.<>x, μz.z}: unfold μz.z (self-unfolding) and back-edge. The only trace
    through the cycle is the μ-trace on μz.z plus the idle νx.<>x, which never
    unfolds; so the branch has no good trace.
    """
    nx = parse_formula("nu x. <>x")
    mz = parse_formula("mu z. z")
    seq = _s(nx, mz)
    b = ProofBuilder("nw")
    leaf = b.add(seq, "Backedge")
    root = b.add(seq, "Mu", principal=mz, children=[leaf])
    b.set_target(leaf, root)
    return b.build(root)


# -- Clo derivations ------------------------------------------------------------


def _a(*names: Name):
    return tuple(names)


def build_nu_self_clo() -> Proof:
    f = parse_formula("nu x. x")
    tok = Name("x", 0)
    b = ProofBuilder("clo")
    leaf = b.add(_s((f, _a(tok))), "Discharge", token=tok)
    root = b.add(_s((f, EPS)), "Clo", principal=(f, EPS), children=[leaf], token=tok)
    b.set_target(leaf, root)
    return b.build(root)


def build_lem_clo() -> Proof:
    """Or then Ax for {p | ~p}."""
    f = Or(P, NP)
    b = ProofBuilder("clo")
    ax = b.add(_s((P, EPS), (NP, EPS)), "Ax")
    root = b.add(_s((f, EPS)), "Or", principal=(f, EPS), children=[ax])
    return b.build(root)


def _rho0(complete: bool) -> Proof:
    """ρ₀ as displayed; optionally discharge leaf C against the Clo_ḏy node."""
    dx = Name("x", 0)
    dy = Name("y", 1)
    ax_ = _a(dx)
    ay_ = _a(dy)
    b = ProofBuilder("clo")
    # left-most leaf p̄^ḏx, p^ḏy, cleared by Exp before the axiom
    ax = b.add(_s((NP, EPS), (P, EPS)), "Ax")
    lit = b.add(_s((NP, ax_), (P, ay_)), "Exp", children=[ax])
    # branch through B
    b_leaf = b.add(_s((PHI_X, ax_), (PSI_Y, EPS)), "Discharge", token=dx, label="B_leaf")
    b_exp = b.add(_s((PHI_X, ax_), (PSI_Y, ax_)), "Exp", children=[b_leaf], label="B")
    b_box = b.add(_s((BOX_X, ax_), (DIA_Y, ax_)), "Box", principal=(BOX_X, ax_), children=[b_exp])
    b_weak = b.add(_s((BOX_X, ax_), (DIA_Y, ax_), (P, ay_)), "Weak", principal=(P, ay_),
                   children=[b_box])
    b_or = b.add(_s((CHI, ax_), (P, ay_)), "Or", principal=(CHI, ax_), children=[b_weak])
    left = b.add(_s((NPCHI, ax_), (P, ay_)), "And", principal=(NPCHI, ax_), children=[lit, b_or])
    # branch through C
    if complete:
        c_leaf = b.add(_s((UNF_X, EPS), (PSI_Y, ay_)), "Discharge", token=dy, label="C_leaf")
    else:
        c_leaf = b.add(_s((UNF_X, EPS), (PSI_Y, ay_)), "Open", label="C_leaf")
    c_exp = b.add(_s((UNF_X, ay_), (PSI_Y, ay_)), "Exp", children=[c_leaf], label="C")
    c_nu = b.add(_s((PHI_X, ay_), (PSI_Y, ay_)), "Nu", principal=(PHI_X, ay_), children=[c_exp])
    c_box = b.add(_s((BOX_X, ay_), (DIA_Y, ay_)), "Box", principal=(BOX_X, ay_), children=[c_nu])
    c_weak = b.add(_s((NP, ax_), (BOX_X, ay_), (DIA_Y, ay_)), "Weak", principal=(NP, ax_),
                   children=[c_box])
    c_or = b.add(_s((NP, ax_), (CHI, ay_)), "Or", principal=(CHI, ay_), children=[c_weak])
    elided = b.add(_s((CHI, ax_), (CHI, ay_)), "Open", label="elided")
    right = b.add(_s((NPCHI, ax_), (CHI, ay_)), "And", principal=(NPCHI, ax_), children=[c_or, elided])
    top = b.add(_s((NPCHI, ax_), (PCHI, ay_)), "And", principal=(PCHI, ay_), children=[left, right])
    box = b.add(_s((UNF_X, ax_), (UNF_Y, ay_)), "Box", principal=(UNF_Y, ay_), children=[top])
    clo_y = b.add(_s((UNF_X, ax_), (PSI_Y, EPS)), "Clo", principal=(PSI_Y, EPS), children=[box],
                  token=dy, label="clo_y")
    root = b.add(_s((PHI_X, EPS), (PSI_Y, EPS)), "Clo", principal=(PHI_X, EPS), children=[clo_y],
                 token=dx, label="root")
    b.set_target(b_leaf, root)
    if complete:
        b.set_target(c_leaf, clo_y)
    return b.build(root)


def build_eta_witness() -> Proof:
    """Valid except for one Mu step whose annotation is not below its variable."""
    f = parse_formula("nu y. (mu z. p | ~p | z) | y")
    m = f.body.left  # mu z. p | ~p | z, y is not free in it
    lem = Or(P, NP)
    a = _a(Name("y", 0))
    b = ProofBuilder("clo")
    ax = b.add(_s((P, EPS), (NP, EPS)), "Ax")
    exp = b.add(_s((P, a), (NP, a)), "Exp", children=[ax])
    or3 = b.add(_s((lem, a)), "Or", principal=(lem, a), children=[exp])
    weak2 = b.add(_s((lem, a), (m, a)), "Weak", principal=(m, a), children=[or3])
    or2 = b.add(_s((unfold(m), a)), "Or", principal=(unfold(m), a), children=[weak2])
    mu = b.add(_s((m, a)), "Mu", principal=(m, a), children=[or2], label="eta")
    weak1 = b.add(_s((m, a), (f, a)), "Weak", principal=(f, a), children=[mu])
    or1 = b.add(_s((unfold(f), a)), "Or", principal=(unfold(f), a), children=[weak1])
    root = b.add(_s((f, EPS)), "Clo", principal=(f, EPS), children=[or1], token=Name("y", 0))
    return b.build(root)


def build_exp_witness() -> Proof:
    """Valid except for one Exp step that grows an annotation."""
    f = parse_formula("nu x. x")
    tok = Name("x", 0)
    b = ProofBuilder("clo")
    leaf = b.add(_s((f, _a(tok))), "Discharge", token=tok)
    grow = b.add(_s((f, EPS)), "Exp", children=[leaf], label="exp")
    shrink = b.add(_s((f, _a(tok))), "Exp", children=[grow])
    root = b.add(_s((f, EPS)), "Clo", principal=(f, EPS), children=[shrink], token=tok)
    b.set_target(leaf, root)
    return b.build(root)


def build_fresh_witness() -> Proof:
    """Valid except that the Clo token already occurs in the context."""
    f = parse_formula("nu x. x")
    g = parse_formula("nu z. z")
    tok = Name("x", 0)
    b = ProofBuilder("clo")
    leaf = b.add(_s((f, _a(tok)), (g, _a(tok))), "Discharge", token=tok)
    root = b.add(_s((f, EPS), (g, _a(tok))), "Clo", principal=(f, EPS), children=[leaf],
                 token=tok, label="fresh")
    b.set_target(leaf, root)
    return b.build(root)


def build_discharge_witness() -> Proof:
    """Valid except that the discharged leaf drops a context formula."""
    f = parse_formula("nu x. x")
    tok = Name("x", 0)
    b = ProofBuilder("clo")
    leaf = b.add(_s((f, _a(tok))), "Discharge", token=tok, label="leaf")
    weak = b.add(_s((f, _a(tok)), (P, EPS)), "Weak", principal=(P, EPS), children=[leaf])
    root = b.add(_s((f, EPS), (P, EPS)), "Clo", principal=(f, EPS), children=[weak], token=tok)
    b.set_target(leaf, root)
    return b.build(root)


# -- registry -----------------------------------------------------------------


@dataclass
class Artifact:
    name: str
    kind: str  # formula | sequent | nw-proof | clo-derivation
    payload: Any
    expected: list[tuple[str, Any]] = field(default_factory=list)
    description: str = ""


def _artifacts() -> dict[str, Artifact]:
    arts = [
        Artifact("phi_x", "formula", PHI_X, [("unfold", Dia(NPCHI)), ("countermodel_1", 1),
                                             ("search_nw", "ExhaustedWithinBounds")],
                 "the x-binder νx.φ"),
        Artifact("psi_y", "formula", PSI_Y, [("unfold", Box(PCHI)), ("countermodel_1", 1)], "the closed y-binder νy.ψ"),
        Artifact("chi", "formula", CHI, [], "χ = □νx.φ ∨ ◇νy.ψ"),
        Artifact("Phi", "sequent", PHI, [("closure_size", 11), ("adisjunctive", False),
                                         ("countermodel_3", None), ("search_nw", "Found"),
                                         ("search_clo", "ExhaustedWithinBounds")],
                 "Φ = νx.φ, νy.ψ"),
        Artifact("pi", "nw-proof", build_pi(),
                 [("check_nw", True), ("children_lemma", True),
                  ("classify", {"B": "x-node", "C": "y-node", "D": "neither"})],
                 "the cyclic NW proof π of Φ"),
        Artifact("pi_weak_1", "nw-proof", build_pi_weak_1(), [("check_nw", True), ("children_lemma", True)],
                 "first Weak variant"),
        Artifact("pi_weak_2", "nw-proof", build_pi_weak_2(), [("check_nw", True), ("children_lemma", True)],
                 "second Weak variant"),
        Artifact("nu_self", "clo-derivation", build_nu_self_clo(), [("check_clo", True), ("translate", True)],
                 "one-Clo-node proof of νx.x"),
        Artifact("nu_self_nw", "nw-proof", build_nw_self("nu"), [("check_nw", True)],
                 "self-loop NW proof of νx.x"),
        Artifact("mu_self", "nw-proof", build_nw_self("mu"), [("check_nw", False)],
                 "self-loop derivation of μx.x (μ-trace only)"),
        Artifact("dead_loop", "nw-proof", build_dead_loop(), [("check_nw", False)],
                 "loop carrying only a μ-trace and an idle ν-formula"),
        Artifact("weak_kill", "nw-proof", build_weak_kill(), [("check_nw", False)],
                 "loop whose ν-formula is weakened away every round"),
        Artifact("lem", "clo-derivation", build_lem_clo(), [("check_clo", True), ("translate", True)],
                 "Or then Ax for p ∨ p̄"),
        Artifact("rho0", "clo-derivation", _rho0(False),
                 [("check_clo", False), ("diagnostic_kinds", ["eta", "open"])],
                 "ρ₀ as displayed, C and the elided branch left open"),
        Artifact("rho0_completed", "clo-derivation", _rho0(True),
                 [("check_clo", False), ("discharge_mismatch_at", ["C_leaf"]),
                  ("diagnostic_kinds", ["discharge-mismatch", "eta", "open"])],
                 "ρ₀ with leaf C discharged against Clo_ḏy"),
        Artifact("eta_witness", "clo-derivation", build_eta_witness(), [("check_clo", False)],
                 "only flaw: η annotation condition"),
        Artifact("exp_witness", "clo-derivation", build_exp_witness(), [("check_clo", False)],
                 "only flaw: Exp subword condition"),
        Artifact("fresh_witness", "clo-derivation", build_fresh_witness(), [("check_clo", False)],
                 "only flaw: Clo freshness"),
        Artifact("discharge_witness", "clo-derivation", build_discharge_witness(), [("check_clo", False)],
                 "only flaw: discharge sequent equality"),
    ]
    return {a.name: a for a in arts}


@lru_cache(maxsize=1)
def _registry() -> dict[str, Artifact]:
    return _artifacts()


ARTIFACT_NAMES = ("phi_x", "psi_y", "chi", "Phi", "pi", "rho0", "rho0_completed", "pi_weak_1",
                  "pi_weak_2", "nu_self", "nu_self_nw", "mu_self", "dead_loop", "weak_kill", "lem",
                  "eta_witness", "exp_witness", "fresh_witness", "discharge_witness")


def get_artifact(name: str) -> Artifact:
    try:
        return _registry()[name]
    except KeyError:
        raise KeyError(f"unknown artifact {name!r}; known: {', '.join(ARTIFACT_NAMES)}") from None


def formula_alias(name: str) -> Formula | None:
    art = _registry().get(name)
    return art.payload if art is not None and art.kind == "formula" else None


def sequent_alias(name: str) -> frozenset | None:
    art = _registry().get(name)
    if art is None:
        return None
    if art.kind == "sequent":
        return art.payload
    if art.kind == "formula":
        return frozenset([art.payload])
    return None


def write_corpus(directory) -> list[Path]:
    """Golden files: proofs as JSON, formulas and sequents as text."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name in ARTIFACT_NAMES:
        art = get_artifact(name)
        if art.kind in ("nw-proof", "clo-derivation"):
            path = directory / f"{name}.json"
            path.write_text(dump_proof(art.payload), encoding="utf-8")
        elif art.kind == "formula":
            path = directory / f"{name}.txt"
            path.write_text(art.payload.text + "\n", encoding="utf-8")
        else:
            path = directory / f"{name}.txt"
            path.write_text(", ".join(f.text for f in sorted(art.payload)) + "\n", encoding="utf-8")
        written.append(path)
    return written


def run_paper_suite(**kwargs):
    """See ``mucyclo.suite.run_paper_suite``."""
    from .suite import run_paper_suite as run
    return run(**kwargs)
