import json
from pathlib import Path

import pytest

from mucyclo.corpus import ARTIFACT_NAMES, PHI, get_artifact, write_corpus
from mucyclo.proof import (Name, ProofFormatError, dump_proof, load_proof, proof_signature,
                           proof_to_dict, read_proof, write_proof)
from mucyclo.search import enumerate_nw_proofs

GOLDEN = Path(__file__).resolve().parent.parent / "corpus"
PROOFS = [n for n in ARTIFACT_NAMES if get_artifact(n).kind in ("nw-proof", "clo-derivation")]


@pytest.mark.parametrize("name", PROOFS)
def test_json_round_trip(name):
    proof = get_artifact(name).payload
    text = dump_proof(proof)
    again = load_proof(text)
    assert again.nodes == proof.nodes
    assert dump_proof(again) == text


@pytest.mark.parametrize("name", PROOFS)
def test_golden_file_matches(name):
    assert (GOLDEN / f"{name}.json").read_text(encoding="utf-8") == dump_proof(get_artifact(name).payload)


def test_write_corpus_is_byte_identical(tmp_path):
    paths = write_corpus(tmp_path)
    assert sorted(p.name for p in paths) == sorted(p.name for p in GOLDEN.iterdir())
    for p in paths:
        assert p.read_bytes() == (GOLDEN / p.name).read_bytes()


def test_file_helpers(tmp_path):
    proof = get_artifact("pi").payload
    path = tmp_path / "pi.json"
    write_proof(proof, path)
    assert proof_signature(read_proof(path)) == proof_signature(proof)


def test_signature_ignores_ids_and_labels():
    proof = get_artifact("pi").payload
    shifted = proof.relabel({nid: nid + 100 for nid in proof.nodes})
    assert proof_signature(shifted) == proof_signature(proof)


def test_enumerated_proofs_round_trip():
    for proof in list(enumerate_nw_proofs(PHI, 24))[:5]:
        assert proof_signature(load_proof(dump_proof(proof))) == proof_signature(proof)


def test_clo_names_serialized():
    data = proof_to_dict(get_artifact("rho0").payload)
    annotations = [a for n in data["nodes"] for e in n["sequent"] for a in e["annotation"]]
    assert annotations
    assert all("#" in a for a in annotations)


def test_name_parse():
    assert Name.parse("x#3") == Name("x", 3)
    with pytest.raises(ProofFormatError):
        Name.parse("x3")


def _pi_dict():
    return proof_to_dict(get_artifact("pi").payload)


def _broken(edit):
    data = _pi_dict()
    edit(data)
    return json.dumps(data)


@pytest.mark.parametrize("text", [
    "not json",
    "[]",
    json.dumps({"system": "hilbert", "root": 0, "nodes": []}),
    _broken(lambda d: d.pop("root")),
    _broken(lambda d: d.update(root=999)),
    _broken(lambda d: d["nodes"][0].update(rule="Cut")),
    _broken(lambda d: d["nodes"][0].update(principal=57)),
    _broken(lambda d: d["nodes"][0].update(children=[999])),
    _broken(lambda d: d["nodes"][1].update(id=0)),
    _broken(lambda d: d["nodes"][0]["sequent"][0].update(formula="p &")),
    _broken(lambda d: d["nodes"][0]["sequent"][0].update(annotation=["x#0"])),
    _broken(lambda d: d["nodes"][0].update(id="zero")),
])
def test_malformed_json_rejected(text):
    with pytest.raises(ProofFormatError):
        load_proof(text)
