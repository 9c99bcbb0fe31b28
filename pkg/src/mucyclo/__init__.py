"""Cyclic (NW) and annotated (Clo) proofs for the modal mu-calculus."""

from .clo import CloChecks, check_clo, translate_clo_to_nw, verify_children_lemma
from .corpus import get_artifact, run_paper_suite
from .formula import closure, is_adisjunctive, parse_formula, parse_sequent, unfold
from .nw import check_nw
from .proof import dump_proof, load_proof, read_proof
from .search import SearchBounds, enumerate_nw_proofs, search_clo, search_nw
from .semantics import eval_formula, search_countermodel
from .traces import check_global_trace_condition, lasso_oracle

__version__ = "0.1.0"

__all__ = [
    "CloChecks", "SearchBounds", "check_clo", "check_global_trace_condition", "check_nw",
    "closure", "dump_proof", "enumerate_nw_proofs", "eval_formula", "get_artifact",
    "is_adisjunctive", "lasso_oracle", "load_proof", "parse_formula", "parse_sequent",
    "read_proof", "run_paper_suite", "search_clo", "search_countermodel", "search_nw",
    "translate_clo_to_nw", "unfold", "verify_children_lemma",
]
