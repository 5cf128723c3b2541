"""Translation of bracketed 3CNF formulas into affine 2-modal formulas whose
S5-satisfiability coincides with satisfiability of the input."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .cnf import (
    Clause,
    Cnf,
    CnfError,
    Leaf,
    Literal,
    PaddedCnf,
    bracket_balanced,
    normalize,
    pad,
)
from .formula import Box, Dia, Formula, Prop, Xor, metrics, neg, print_formula, xor


def translate_literal(l: Literal) -> Formula:
    """``[1] a + [2][1] a``, with ``a`` replaced by ``a + top`` for a negative literal."""
    atom = Prop(l.variable) if l.positive else neg(Prop(l.variable))
    return Xor(Box(1, atom), Box(2, Box(1, atom)))


def translate_clause(c: Clause) -> Formula:
    # slot order and repetitions are kept: the xor parity of the slots matters
    return Dia(1, xor(*(translate_literal(l) for l in c.literals)))


def psi(phi: Formula) -> Formula:
    """``phi + [2] phi``, the local form of a conjunct."""
    return Xor(phi, Box(2, phi))


def conj_template(phi_g: Formula, phi_h: Formula) -> Formula:
    psi_g, psi_h = psi(phi_g), psi(phi_h)
    return xor(Dia(1, Xor(psi_g, psi_h)), Dia(1, psi_g), Dia(1, psi_h))


class SubformulaMap:
    """Tree node -> translation, keyed by node identity.

    Equal clauses in different leaves are different nodes and keep separate
    entries.
    """

    def __init__(self):
        self._items: dict[int, tuple[object, Formula]] = {}

    def __setitem__(self, node, f: Formula):
        self._items[id(node)] = (node, f)

    def __getitem__(self, node) -> Formula:
        try:
            return self._items[id(node)][1]
        except KeyError:
            raise KeyError(node) from None

    def __contains__(self, node):
        return id(node) in self._items

    def __len__(self):
        return len(self._items)

    def items(self):
        return list(self._items.values())


def translate_conj(t, rmap: SubformulaMap | None = None) -> Formula:
    """Translate a conjunction tree, recording every node in ``rmap``."""
    rmap = SubformulaMap() if rmap is None else rmap
    if isinstance(t, Leaf):
        f = translate_clause(t.clause)
    else:
        f = conj_template(translate_conj(t.left, rmap), translate_conj(t.right, rmap))
    rmap[t] = f
    return f


@dataclass
class ReductionOutput:
    formula: Formula
    tree: object
    padding_vars: tuple[str, ...]
    subformula_map: SubformulaMap
    origin: Cnf
    stats: dict = field(default_factory=dict)

    @property
    def variables(self) -> tuple[str, ...]:
        return self.origin.variables + self.padding_vars

    @property
    def padded(self) -> PaddedCnf:
        return PaddedCnf(self.tree, self.padding_vars, self.origin)


def reduce(f: Cnf, pad_clauses: bool = True) -> ReductionOutput:
    """Normalise, pad, bracket and translate ``f``.

    Clauses that repeat a literal in exactly two slots are rewritten first
    (see ``cnf.normalize``); ``origin`` of the result is the normalised CNF.
    """
    if not f.clauses:
        raise CnfError("cannot reduce an empty clause list")
    f = normalize(f)
    if pad_clauses:
        padded = pad(f)
        tree, padding = padded.tree, padded.padding_vars
    else:
        tree, padding = bracket_balanced([Leaf(c) for c in f.clauses]), ()
    rmap = SubformulaMap()
    formula = translate_conj(tree, rmap)
    m = metrics(formula)
    stats = {
        "clauses": len(f.clauses),
        "variables": len(f.variables),
        "padding_vars": len(padding),
        "tree_depth": tree.depth,
        "formula_size": m.size,
        "modal_depth": m.modal_depth,
        "max_index": m.max_index,
    }
    return ReductionOutput(formula, tree, padding, rmap, f, stats)


def write_reduction(out: ReductionOutput, formula_path, stats_path=None) -> None:
    with open(formula_path, "w", encoding="utf-8") as fh:
        fh.write(f"# {out.stats['clauses']} clauses, size {out.stats['formula_size']}\n")
        fh.write(print_formula(out.formula))
        fh.write("\n")
    if stats_path is not None:
        with open(stats_path, "w", encoding="utf-8") as fh:
            json.dump({"stats": out.stats, "padding_vars": list(out.padding_vars)}, fh, indent=1)
            fh.write("\n")
