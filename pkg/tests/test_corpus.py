from dataclasses import fields, replace

import pytest

from mucyclo.clo import ALL_CHECKS, CloChecks
from mucyclo.corpus import (ARTIFACT_NAMES, CHI, PHI, formula_alias, get_artifact,
                            run_paper_suite, sequent_alias)
from mucyclo.formula import Box, Dia, Or
from mucyclo.suite import SCALES, artifact_items, evaluate


def test_registry_names_are_unique_and_known():
    assert len(set(ARTIFACT_NAMES)) == len(ARTIFACT_NAMES)
    for name in ARTIFACT_NAMES:
        art = get_artifact(name)
        assert art.name == name
        assert art.kind in ("formula", "sequent", "nw-proof", "clo-derivation")


def test_unknown_artifact():
    with pytest.raises(KeyError):
        get_artifact("sigma")


def test_aliases():
    assert sequent_alias("Phi") == PHI
    assert formula_alias("chi") == CHI
    assert formula_alias("Phi") is None
    assert sequent_alias("pi") is None
    assert sequent_alias("phi_x") == frozenset([get_artifact("phi_x").payload])


def test_chi_shape():
    phi_x, psi_y = get_artifact("phi_x").payload, get_artifact("psi_y").payload
    assert CHI == Or(Box(phi_x), Dia(psi_y))


@pytest.mark.parametrize("item", artifact_items(skip=("search_clo", "search_nw")),
                         ids=lambda i: f"{i.name}-{i.operation}")
def test_artifact_item(item):
    assert item.passed, (item.expected, item.actual)


def test_suite_without_battery():
    report = run_paper_suite(battery=False)
    assert report.ok, report.render()
    assert report.as_dict()["passed"] == report.as_dict()["total"]


def test_suite_quick_battery():
    report = run_paper_suite(scale="quick")
    assert report.ok, report.render()
    criteria = [i for i in report.items if i.name.startswith("criterion")]
    assert len(criteria) == 11


def test_unknown_scale():
    with pytest.raises(ValueError):
        run_paper_suite(scale="huge")
    assert set(SCALES) == {"quick", "full"}


@pytest.mark.parametrize("flag", [f.name for f in fields(CloChecks)])
def test_each_check_is_load_bearing(flag):
    report = run_paper_suite(checks=replace(ALL_CHECKS, **{flag: False}), battery=False)
    assert not report.ok
    assert all(i.name in ARTIFACT_NAMES for i in report.failed())


def test_eta_flips_rho0_items():
    report = run_paper_suite(checks=replace(ALL_CHECKS, eta_annotation=False), battery=False)
    flipped = {(i.name, i.operation) for i in report.failed()}
    assert flipped == {("rho0", "diagnostic_kinds"), ("rho0_completed", "diagnostic_kinds"),
                       ("eta_witness", "check_clo")}


def test_trace_stub_flips_trace_items():
    report = run_paper_suite(trace_stub=True, battery=False)
    assert {i.name for i in report.failed()} == {"mu_self", "dead_loop", "weak_kill"}


def test_unknown_operation():
    with pytest.raises(ValueError):
        evaluate(get_artifact("pi"), "compile")


def test_render_lists_every_item():
    report = run_paper_suite(battery=False)
    lines = report.render().splitlines()
    assert len(lines) == len(report.items) + 1
    assert lines[-1].endswith("items passed")
