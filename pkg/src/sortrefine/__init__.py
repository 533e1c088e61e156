"""Structuredness rules over RDF property matrices and exact sort refinement."""

from .evaluate import StructurednessValue, build_count_table, sigma_fast, sigma_naive, sigma_subset
from .ilp import add_symmetry_breaking, build_model, export_lp, verify_solution
from .ingest import Dataset, Triple, filter_by_sort, parse_ntriples
from .refine import (
    UndirectedGraph, build_coloring_gadget, decide_3colorable_via_refinement, search_highest_theta,
    search_lowest_k,
)
from .rules import Rule, builtin_rule, cov_rule, gadget_rule_r0, parse_rule, print_rule, sim_rule
from .solver import Outcome, solve_native
from .view import StructureView, build_view, load_view, make_view, save_view

__all__ = [
    "Dataset", "Outcome", "Rule", "StructureView", "StructurednessValue", "Triple", "UndirectedGraph",
    "add_symmetry_breaking", "build_coloring_gadget", "build_count_table", "build_model", "build_view",
    "builtin_rule", "cov_rule", "decide_3colorable_via_refinement", "export_lp", "filter_by_sort",
    "gadget_rule_r0", "load_view", "make_view", "parse_ntriples", "parse_rule", "print_rule", "save_view",
    "search_highest_theta", "search_lowest_k", "sigma_fast", "sigma_naive", "sigma_subset", "sim_rule",
    "solve_native", "verify_solution",
]
