"""Compilers: machine tableaux, sorting networks, restrictions and decision trees."""

from .batcher import SortingNetwork, batcher, check_zero_one, cut_accounting
from .decision_tree import EXCEEDS, Restriction, canonical_dt_depth, restriction_family, select_good_restriction
from .dtm import DtmSpec, Tableau, compile_dtm, simulate, solutions
from .profiles import profile_count

__all__ = [
    "EXCEEDS",
    "DtmSpec",
    "Restriction",
    "SortingNetwork",
    "Tableau",
    "batcher",
    "canonical_dt_depth",
    "check_zero_one",
    "compile_dtm",
    "cut_accounting",
    "profile_count",
    "restriction_family",
    "select_good_restriction",
    "simulate",
    "solutions",
]
