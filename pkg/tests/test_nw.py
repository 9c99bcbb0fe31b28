from dataclasses import replace

import pytest

from mucyclo.clo import verify_children_lemma
from mucyclo.corpus import CHI, NP, P, PHI, get_artifact
from mucyclo.formula import parse_sequent
from mucyclo.nw import branch_language_stats, check_nw, check_nw_local
from mucyclo.proof import Proof, ProofBuilder


def pi():
    return get_artifact("pi").payload


def mutate(proof, nid, **changes):
    nodes = dict(proof.nodes)
    nodes[nid] = replace(nodes[nid], **changes)
    return Proof(proof.system, proof.root, nodes)


def prune(proof, nid, rule="Open"):
    """Cut the subtree above ``nid`` and keep only reachable nodes."""
    cut = mutate(proof, nid, rule=rule, children=(), principal=None)
    reached = {n.id for n in cut.preorder()}
    return Proof(cut.system, cut.root, {k: v for k, v in cut.nodes.items() if k in reached})


def or_above(proof, label):
    """The Or node whose branch carries ``label``."""
    box = proof.by_label(label + "_box")
    return next(a for a in proof.ancestors(box.id) if proof.nodes[a].rule == "Or")


@pytest.mark.parametrize("name", ["pi", "pi_weak_1", "pi_weak_2", "nu_self_nw"])
def test_corpus_proofs_accepted(name):
    result = check_nw(get_artifact(name).payload)
    assert result.ok, result.diagnostics


@pytest.mark.parametrize("name", ["mu_self", "dead_loop", "weak_kill"])
def test_trace_failures(name):
    proof = get_artifact(name).payload
    assert check_nw_local(proof)
    result = check_nw(proof)
    assert not result
    assert result.kinds() == {"trace"}
    stem, cycle = result.trace.counterexample
    assert cycle


def test_pi_shape():
    proof = pi()
    assert proof.root_sequent == PHI
    assert len(proof) == 18
    assert {proof.by_label(x).rule for x in ("B", "C", "D")} == {"Backedge"}


def test_axiom_proof():
    b = ProofBuilder("nw")
    proof = b.build(b.add({P, NP}, "Ax"))
    assert check_nw(proof)


def test_bad_axiom():
    b = ProofBuilder("nw")
    proof = b.build(b.add({P, CHI}, "Ax"))
    assert check_nw(proof).kinds() == {"Ax"}


def test_wrong_principal_reported():
    proof = pi()
    root = proof.nodes[proof.root]
    bad = mutate(proof, root.id, principal=CHI)
    result = check_nw(bad)
    assert not result and result.at(root.id)


def test_backedge_to_non_ancestor():
    proof = pi()
    leaf_b, leaf_c = proof.by_label("B"), proof.by_label("C")
    bad = mutate(proof, leaf_b.id, target=leaf_c.id)
    assert "Backedge" in check_nw(bad).kinds()


def test_backedge_sequent_must_match():
    proof = pi()
    leaf = proof.by_label("D")
    bad = mutate(proof, leaf.id, target=proof.nodes[proof.root].children[0])
    assert "Backedge" in check_nw(bad).kinds()


def test_open_leaf_rejected():
    proof = prune(pi(), or_above(pi(), "B"))
    assert "leaf" in check_nw(proof).kinds()


def test_clo_proof_is_not_nw():
    assert check_nw(get_artifact("lem").payload).kinds() == {"system"}


def test_weakening():
    q = next(iter(parse_sequent("q")))
    b = ProofBuilder("nw")
    ax = b.add(parse_sequent("p, ~p"), "Ax")
    assert check_nw(b.build(b.add(parse_sequent("p, ~p, q"), "Weak", principal=q, children=[ax])))


def test_weak_principal_must_occur():
    q = next(iter(parse_sequent("q")))
    b = ProofBuilder("nw")
    ax = b.add(parse_sequent("p, ~p"), "Ax")
    proof = b.build(b.add(parse_sequent("p, ~p"), "Weak", principal=q, children=[ax]))
    assert check_nw(proof).kinds() == {"Weak"}


def test_branch_stats_of_pi():
    stats = branch_language_stats(pi())
    assert stats.nodes == 18
    assert stats.back_edges == 3
    assert stats.nontrivial_sccs == 1


def test_rho0_completed_graph_has_cycle():
    stats = branch_language_stats(get_artifact("rho0_completed").payload)
    assert stats.back_edges >= 1
    assert stats.nontrivial_sccs >= 1


@pytest.mark.parametrize("name", ["pi", "pi_weak_1", "pi_weak_2"])
def test_children_lemma_holds(name):
    report = verify_children_lemma(get_artifact(name).payload)
    assert report.ok, report.failures
    assert report.checked


def test_children_lemma_fails_without_x_branch():
    proof = prune(pi(), or_above(pi(), "B"))
    report = verify_children_lemma(proof)
    assert not report.ok
