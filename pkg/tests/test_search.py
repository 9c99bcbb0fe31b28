import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mucyclo.clo import check_clo, translate_clo_to_nw, verify_children_lemma
from mucyclo.corpus import PHI, PHI_X, get_artifact
from mucyclo.formula import parse_sequent
from mucyclo.generators import excluded_middle
from mucyclo.nw import check_nw
from mucyclo.proof import proof_signature
from mucyclo.search import (BUDGET, EXHAUSTED, FOUND, SearchBounds, SearchError,
                            enumerate_nw_proofs, search_clo, search_nw, worker_count)


def test_nw_search_finds_phi():
    outcome = search_nw(PHI)
    assert outcome.status == FOUND
    assert check_nw(outcome.proof)
    assert verify_children_lemma(outcome.proof)


def test_nw_search_cannot_prove_phi_x_alone():
    assert search_nw([PHI_X]).status == EXHAUSTED


def test_clo_search_exhausts_phi():
    outcome = search_clo(PHI)
    assert outcome.status == EXHAUSTED
    assert outcome.proof is None
    assert "Exp" in outcome.fragment and "Weak" in outcome.fragment
    assert "max_clo" in outcome.summary()


@pytest.mark.parametrize("text, status", [
    ("p, ~p", FOUND),
    ("p | ~p", FOUND),
    ("nu x. x", FOUND),
    ("mu x. x", EXHAUSTED),
    ("p", EXHAUSTED),
    ("nu x. <>x", EXHAUSTED),
])
@pytest.mark.parametrize("search", [search_nw, search_clo])
def test_small_sequents(search, text, status):
    outcome = search(parse_sequent(text))
    assert outcome.status == status
    if outcome.found:
        checker = check_nw if outcome.system == "nw" else check_clo
        assert checker(outcome.proof)


def test_budget_exceeded():
    outcome = search_clo(PHI, SearchBounds(node_budget=10))
    assert outcome.status == BUDGET
    assert search_nw(PHI, SearchBounds(node_budget=3)).status == BUDGET


@pytest.mark.parametrize("field", ["max_depth", "max_clo", "max_sequent", "node_budget"])
def test_bounds_must_be_positive(field):
    with pytest.raises(SearchError):
        SearchBounds(**{field: 0})


def test_deterministic_across_runs_and_workers(monkeypatch):
    outcomes = []
    for threads in ("1", "4", "0"):
        monkeypatch.setenv("MUCYCLO_THREADS", threads)
        outcomes.append((search_nw(PHI).as_dict(), search_clo(PHI).as_dict()))
    assert outcomes[0] == outcomes[1] == outcomes[2]


@pytest.mark.parametrize("raw", ["many", "-1"])
def test_bad_thread_count(monkeypatch, raw):
    monkeypatch.setenv("MUCYCLO_THREADS", raw)
    with pytest.raises(SearchError):
        worker_count()


def test_larger_bounds_keep_found_proofs():
    rng = random.Random(11)
    small = SearchBounds(max_depth=20, max_clo=2, node_budget=20_000)
    large = SearchBounds(max_depth=30, max_clo=3, node_budget=200_000)
    found = 0
    for _ in range(15):
        seq = excluded_middle(rng, depth=2)
        if search_clo(seq, small).found:
            found += 1
            assert search_clo(seq, large).found
    assert found


def test_clo_tokens_named_by_preorder():
    outcome = search_clo(parse_sequent("nu x. x"))
    order = {n.id: i for i, n in enumerate(outcome.proof.preorder())}
    for node in outcome.proof.nodes.values():
        if node.rule == "Clo":
            assert node.token.index == order[node.id]
            assert node.token.var == "x"


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_searched_clo_proofs_translate(seed):
    seq = excluded_middle(random.Random(seed), depth=2)
    outcome = search_clo(seq, SearchBounds(max_depth=30, max_clo=2, node_budget=20_000))
    if outcome.found:
        proof = outcome.proof
        assert check_clo(proof)
        assert all(n.rule != "Cut" for n in proof.nodes.values())
        assert check_nw(translate_clo_to_nw(proof))


@pytest.mark.parametrize("text, count", [("p, ~p", 1), ("mu x. x", 0), ("nu x. x", 1)])
def test_enumeration_small(text, count):
    assert len(list(enumerate_nw_proofs(parse_sequent(text), 3))) == count


def test_enumeration_of_phi_contains_corpus_proofs():
    stream = enumerate_nw_proofs(PHI, 40)
    proofs = list(stream)
    sigs = [proof_signature(p) for p in proofs]
    assert len(set(sigs)) == len(sigs)
    assert all(check_nw(p) and len(p) <= 40 for p in proofs)
    for name in ("pi", "pi_weak_1", "pi_weak_2"):
        assert proof_signature(get_artifact(name).payload) in sigs


def test_enumeration_deterministic():
    first = [proof_signature(p) for p in enumerate_nw_proofs(PHI, 24)]
    second = [proof_signature(p) for p in enumerate_nw_proofs(PHI, 24)]
    assert first == second and first


def test_enumeration_truncation_flagged():
    stream = enumerate_nw_proofs(PHI, 40, node_budget=50)
    list(stream)
    assert stream.truncated


def test_enumeration_cap_validated():
    with pytest.raises(SearchError):
        enumerate_nw_proofs(PHI, 0)


def _enumerated_phi():
    return list(enumerate_nw_proofs(PHI, 40))


def test_enumerated_phi_proofs_satisfy_weak_children_property():
    proofs = _enumerated_phi()
    assert len(proofs) == 72
    for proof in proofs:
        report = verify_children_lemma(proof, exact=False)
        assert report.ok, report.failures


def test_some_enumerated_phi_proof_has_two_y_children():
    # Or on the y-side chi before the And on ~p & chi keeps the x-side chi
    # apart; weakening it leaves a second y-node child
    failing = [p for p in _enumerated_phi() if not verify_children_lemma(p)]
    assert len(failing) == 16
    for proof in failing:
        assert check_nw(proof)
        assert verify_children_lemma(proof, exact=False)
