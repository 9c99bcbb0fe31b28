from dataclasses import fields, replace

import pytest

from mucyclo.clo import (ALL_CHECKS, CloChecks, CloError, annotation_leq_var, check_clo,
                         classify_unfolding_child, discharge_requirement, is_root_like,
                         names_introduced_below, subword, translate_clo_to_nw, unfolding_tree,
                         verify_children_lemma)
from mucyclo.corpus import NP, P, PHI, PHI_X, PSI_Y, get_artifact
from mucyclo.formula import PropLit, subsumption_order
from mucyclo.nw import check_nw
from mucyclo.proof import EPS, Name, ProofBuilder

X0, Y1 = Name("x", 0), Name("y", 1)
WITNESSES = {
    "eta_witness": ("eta_annotation", "eta"),
    "exp_witness": ("exp_subword", "exp-subword"),
    "fresh_witness": ("clo_freshness", "clo-fresh"),
    "discharge_witness": ("discharge_equality", "discharge-mismatch"),
}


def art(name):
    return get_artifact(name).payload


def test_subword():
    assert subword("", "abc")
    assert subword("ac", "abc")
    assert not subword("ca", "abc")
    assert not subword("abcd", "abc")
    assert subword((X0,), (Y1, X0))


def test_annotation_leq_var():
    order = subsumption_order(PHI)
    assert annotation_leq_var(EPS, "x", order)
    assert annotation_leq_var((X0,), "y", order)
    assert annotation_leq_var((X0, Y1), "y", order)
    assert not annotation_leq_var((Y1,), "x", order)


@pytest.mark.parametrize("name", ["nu_self", "lem"])
def test_valid_derivations(name):
    result = check_clo(art(name))
    assert result.ok, result.diagnostics


def test_rho0_is_incomplete_and_breaks_eta():
    result = check_clo(art("rho0"))
    assert not result
    assert result.kinds() == {"eta", "open"}


def test_rho0_completed_mismatch_at_c():
    proof = art("rho0_completed")
    result = check_clo(proof)
    assert result.kinds() == {"discharge-mismatch", "eta", "open"}
    (mismatch,) = [d for d in result.diagnostics if d.kind == "discharge-mismatch"]
    assert proof.nodes[mismatch.node].label == "C_leaf"
    assert "needs" in mismatch.message


def test_discharge_requirement_of_companion():
    proof = art("rho0_completed")
    companion = proof.by_label("clo_y")
    required = discharge_requirement(companion)
    assert (PSI_Y, (Y1,)) in required


@pytest.mark.parametrize("name", sorted(WITNESSES))
def test_witness_fails_only_its_check(name):
    flag, kind = WITNESSES[name]
    proof = art(name)
    result = check_clo(proof)
    assert not result and kind in result.kinds()
    assert check_clo(proof, checks=replace(ALL_CHECKS, **{flag: False}))
    for other in fields(CloChecks):
        if other.name != flag:
            assert not check_clo(proof, checks=replace(ALL_CHECKS, **{other.name: False}))


def test_eta_witness_points_at_mu():
    proof = art("eta_witness")
    (d,) = [d for d in check_clo(proof).diagnostics if d.kind == "eta"]
    assert proof.nodes[d.node].label == "eta"


def test_cut_needs_permission():
    q, nq = PropLit("q"), PropLit("q", True)
    b = ProofBuilder("clo")
    lits = {(P, EPS), (NP, EPS)}
    left = b.add(lits | {(q, EPS)}, "Weak", principal=(q, EPS), children=[b.add(lits, "Ax")])
    right = b.add(lits | {(nq, EPS)}, "Weak", principal=(nq, EPS), children=[b.add(lits, "Ax")])
    proof = b.build(b.add(lits, "Cut", children=[left, right]))
    assert "Cut" in check_clo(proof).kinds()
    assert check_clo(proof, allow_cut=True)


def test_translation_of_valid_derivations():
    for name in ("nu_self", "lem"):
        nw = translate_clo_to_nw(art(name))
        assert nw.system == "nw"
        assert check_nw(nw)
        assert all(n.rule not in ("Exp", "Clo", "Discharge") for n in nw.nodes.values())


def test_translation_of_nu_self_matches_nw_corpus():
    nw = translate_clo_to_nw(art("nu_self"))
    assert [n.rule for n in nw.preorder()] == [n.rule for n in art("nu_self_nw").preorder()]


@pytest.mark.parametrize("name", ["rho0", "rho0_completed", "eta_witness"])
def test_translation_refuses_bad_derivations(name):
    with pytest.raises(CloError):
        translate_clo_to_nw(art(name))


def test_names_introduced_below():
    assert names_introduced_below(art("nu_self")) == []
    assert names_introduced_below(art("fresh_witness"))


def test_unfolding_tree_of_pi():
    proof = art("pi")
    tree = unfolding_tree(proof, PHI)
    assert tree.roots == [proof.root]
    assert len(tree.children[proof.root]) == 3
    assert all(tree.parent(v) == proof.root for v in tree.children[proof.root])


def test_unfolding_tree_of_nu_self():
    proof = art("nu_self_nw")
    tree = unfolding_tree(proof, proof.root_sequent)
    assert len(tree.nodes) == 2
    assert tree.children[proof.root] != []


def test_unfolding_tree_without_target():
    b = ProofBuilder("nw")
    proof = b.build(b.add({P, NP}, "Ax"))
    tree = unfolding_tree(proof, PHI)
    assert tree.roots == [] and tree.nodes == []


def test_classification_of_pi():
    proof = art("pi")
    root = proof.root
    got = {proof.nodes[v].label: classify_unfolding_child(root, v, proof)
           for v in unfolding_tree(proof, PHI).children[root]}
    assert got == {"B": "x-node", "C": "y-node", "D": "neither"}


def test_classification_rejects_non_child():
    proof = art("pi")
    with pytest.raises(ValueError):
        classify_unfolding_child(proof.root, proof.root, proof)


def test_classification_swapped_roles():
    proof = art("pi")
    root = proof.root
    leaf_b = proof.by_label("B").id
    assert classify_unfolding_child(root, leaf_b, proof, PSI_Y, PHI_X) == "y-node"


def test_root_like_nodes_of_rho0():
    proof = art("rho0")
    assert is_root_like(proof.root, proof)
    assert not is_root_like(proof.by_label("B").id, proof)


def test_children_lemma_on_clo_skips_non_root_like():
    report = verify_children_lemma(art("rho0_completed"))
    assert all(is_root_like(u, art("rho0_completed")) for u, _ in report.checked)


def test_system_mismatch():
    assert check_clo(art("pi")).kinds() == {"system"}
