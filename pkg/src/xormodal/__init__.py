"""Reduction from 3SAT to affine (xor-only) two-modal satisfiability over S5
frames, with a model checker, verified witness models and brute-force
oracles."""

from .cnf import Assignment, Clause, Cnf, Literal, brute_force_sat, evaluate, pad, parse_dimacs
from .formula import BOT, TOP, Box, Dia, Formula, Prop, Xor, lower_boxes, metrics, parse_formula, print_formula
from .kripke import FrameClass, KripkeStructure, close, eq_class, frame_properties
from .modelcheck import check, label_worlds
from .reduction import reduce, translate_clause, translate_conj, translate_literal
from .solver import SearchBudget, bounded_modal_sat
from .witness import build_witness, extract_assignment

__version__ = "0.1.0"
