"""Witness models for reduced formulas, and assignment extraction.

``build_nice`` follows the tree of the padded formula bottom-up.  A leaf is
a two-world gadget; an ``And`` node glues the nice models of both children,
two falsified copies and four fresh worlds into one model whose core is a
single relation-1 class.  Every node model is model-checked before it is
returned.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

from .cnf import (
    Assignment,
    Clause,
    Cnf,
    Leaf,
    PAD_PREFIX,
    brute_force_sat,
    clauses_of,
    evaluate,
    variables_of,
)
from .formula import Formula
from .kripke import KripkeStructure, NiceModel, in_frame_class, nice_model_problems
from .modelcheck import check, truth_vectors
from .reduction import ReductionOutput, SubformulaMap, psi, reduce, translate_conj


class WitnessError(RuntimeError):
    """The constructed model does not satisfy what it was built for."""

    def __init__(self, message, model=None, world=None, subformula=None, node=None):
        super().__init__(message)
        self.model = model
        self.world = world
        self.subformula = subformula
        self.node = node


class UnsatisfiableError(ValueError):
    pass


# truth of psi_g / psi_h at the two fresh core worlds of every And node
LOCAL_FACTS = {"psi_g@w_g": True, "psi_h@w_g": False, "psi_g@w_h": False, "psi_h@w_h": True}


@dataclass
class Joint:
    """The two fresh core worlds of one ``And`` node and the facts checked there."""

    path: str
    w_g: str
    w_h: str
    psi_g: Formula
    psi_h: Formula
    facts: dict


@dataclass
class WitnessCertificate:
    model: KripkeStructure
    start_world: str
    formula: Formula
    verified: bool
    core: tuple[str, ...]
    assignment: Assignment
    reduction: ReductionOutput
    joints: list = field(default_factory=list)

    def to_json_dict(self, formula_file=None) -> dict:
        return {
            "start_world": self.start_world,
            "formula_file": formula_file,
            "verified": self.verified,
            "core": list(self.core),
            "stats": {
                **self.reduction.stats,
                "worlds": len(self.model.worlds),
                "core_size": len(self.core),
            },
        }


def _slot_parity(c: Clause, a: Assignment, a2: Assignment) -> int:
    return sum(l.holds(a.true_set) and not l.holds(a2.true_set) for l in c.literals)


def gadget_assignment(c: Clause, a: Assignment) -> Assignment:
    """An assignment ``a2`` agreeing with ``a`` off the clause such that an odd
    number of slots are satisfied by ``a`` and falsified by ``a2``.

    Among all such ``a2`` the one satisfying the most slots is chosen (ties:
    first in enumeration order), which reproduces the textbook choice of
    keeping every other literal true.
    """
    if not c.holds(a.true_set):
        raise ValueError(f"assignment does not satisfy {c}")
    variables = sorted(c.variables)
    best = None
    for values in itertools.product((True, False), repeat=len(variables)):
        a2 = a.update(dict(zip(variables, values)))
        if _slot_parity(c, a, a2) % 2 == 1:
            score = sum(l.holds(a2.true_set) for l in c.literals)
            if best is None or score > best[0]:
                best = (score, a2)
    if best is None:
        raise WitnessError(f"no odd-parity gadget assignment for {c} under {sorted(a.true_set)}")
    return best[1]


def build_base(c: Clause, a: Assignment, path: str = "") -> NiceModel:
    """Two-world gadget: core ``w`` labelled ``a``, ``v`` labelled by the gadget
    assignment, relation 1 the identity, relation 2 one class."""
    a2 = gadget_assignment(c, a)
    w, v = path + "w", path + "v"
    m = KripkeStructure.from_partitions(
        (w, v), {1: ((w,), (v,)), 2: ((w, v),)}, {w: a.true_set, v: a2.true_set}
    )
    return NiceModel(m, (w,), a)


def _is_padding_clause(c: Clause) -> bool:
    return all(l.variable.startswith(PAD_PREFIX) for l in c.literals)


def falsifying_assignment(a: Assignment, keep, falsify) -> Assignment:
    """Flip the variables of one clause of ``falsify`` that shares no variable
    with ``keep`` so that all its slots are false.  Padding clauses are
    preferred."""
    keep_vars = set(variables_of(keep))
    eligible = [
        c for c in clauses_of(falsify) if c.variables.isdisjoint(keep_vars) and not c.is_tautology()
    ]
    if not eligible:
        raise WitnessError("no clause of the sibling can be falsified independently")
    eligible.sort(key=lambda c: not _is_padding_clause(c))
    chosen = eligible[0]
    result = a.update({l.variable: not l.positive for l in chosen.literals})
    assert evaluate(keep, result) and not evaluate(falsify, result)
    return result


def _copy_assignment(a: Assignment, keep, falsify) -> Assignment:
    """Labels for the copy of ``keep`` whose relay must refute ``falsify``.

    A tautological leaf cannot be falsified by relabelling, but its
    translation is already false at a relay whose relation-2 neighbours do
    not touch its variables, so ``a`` itself is used there.
    """
    try:
        return falsifying_assignment(a, keep, falsify)
    except WitnessError:
        if isinstance(falsify, Leaf) and falsify.clause.is_tautology():
            return a
        raise


def _merge(parts, extra_worlds, valuation, r1_groups, r2_groups) -> KripkeStructure:
    """Union of nice-model structures plus fresh worlds, with the listed groups
    of relation-1 / relation-2 classes fused."""
    worlds = [w for p in parts for w in p.worlds] + list(extra_worlds)
    val = {w: m.valuation[w] for m in parts for w in m.worlds}
    val.update(valuation)
    partitions = {}
    for i, groups in ((1, r1_groups), (2, r2_groups)):
        cls_of = {}
        classes = []
        for m in parts:
            for c in m.partition(i):
                cls_of.update((w, len(classes)) for w in c)
                classes.append(list(c))
        for w in extra_worlds:
            cls_of[w] = len(classes)
            classes.append([w])
        for group in groups:
            ids = sorted({cls_of[w] for w in group})
            target = ids[0]
            for k in ids[1:]:
                for w in classes[k]:
                    cls_of[w] = target
                classes[target].extend(classes[k])
                classes[k] = []
        partitions[i] = [c for c in classes if c]
    return KripkeStructure.from_partitions(worlds, partitions, val)


def build_nice(t, a: Assignment, rmap: SubformulaMap | None = None, path: str = "",
               validate: bool = True, debug: bool = False) -> NiceModel:
    """Nice model for tree ``t`` under assignment ``a`` (which must satisfy ``t``).

    World names are prefixed with the node's path: ``L``/``R`` for the
    children, ``L~``/``R~`` for their falsified copies.
    """
    if rmap is None:
        rmap = SubformulaMap()
        translate_conj(t, rmap)
    if not evaluate(t, a):
        raise ValueError("assignment does not satisfy the subtree")
    if isinstance(t, Leaf):
        nice = build_base(t.clause, a, path)
        vectors = None
    else:
        g, h = t.left, t.right
        m_g = build_nice(g, a, rmap, path + "L.", validate, debug)
        m_h = build_nice(h, a, rmap, path + "R.", validate, debug)
        a_h = _copy_assignment(a, keep=h, falsify=g)
        a_g = _copy_assignment(a, keep=g, falsify=h)
        bar_h = build_nice(h, a_h, rmap, path + "R~.", validate, debug)
        bar_g = build_nice(g, a_g, rmap, path + "L~.", validate, debug)

        w_g, w_h, v_g, v_h = (path + s for s in ("wg", "wh", "vg", "vh"))
        core = (w_g, w_h) + m_g.core + m_h.core
        m = _merge(
            [m_g.structure, m_h.structure, bar_h.structure, bar_g.structure],
            [w_g, w_h, v_h, v_g],
            {w_g: a.true_set, w_h: a.true_set, v_h: a_h.true_set, v_g: a_g.true_set},
            r1_groups=[core, (v_h,) + bar_h.core, (v_g,) + bar_g.core],
            r2_groups=[(w_g, v_h), (w_h, v_g)],
        )
        psi_g, psi_h = psi(rmap[g]), psi(rmap[h])
        vectors = truth_vectors(m, rmap[t])
        at = m.index
        facts = {
            "psi_g@w_g": bool(vectors[psi_g][at[w_g]]),
            "psi_h@w_g": bool(vectors[psi_h][at[w_g]]),
            "psi_g@w_h": bool(vectors[psi_g][at[w_h]]),
            "psi_h@w_h": bool(vectors[psi_h][at[w_h]]),
        }
        if validate and facts != LOCAL_FACTS:
            bad = [k for k in LOCAL_FACTS if facts[k] != LOCAL_FACTS[k]]
            raise WitnessError(f"local conjunction facts fail at node {path or 'root'}: {bad}",
                               model=m, world=w_g, subformula=psi_g, node=t)
        joints = m_g.joints + m_h.joints + bar_h.joints + bar_g.joints
        joints.append(Joint(path, w_g, w_h, psi_g, psi_h, facts))
        nice = NiceModel(m, core, a, joints)

    if validate:
        _validate_node(nice, rmap[t], t, path, debug, vectors)
    return nice


def _validate_node(nice: NiceModel, phi: Formula, t, path: str, debug: bool, vectors=None) -> None:
    m = nice.structure
    vec = truth_vectors(m, phi, vectors)[phi]
    for w in nice.core:
        if not vec[m.index[w]]:
            raise WitnessError(f"core world {w} does not satisfy the translation of node {path or 'root'}",
                               model=m, world=w, subformula=phi, node=t)
    if debug:
        problems = nice_model_problems(nice)
        if problems:
            raise WitnessError(f"nice-model invariants fail at node {path or 'root'}: {problems}",
                               model=m, node=t)


def world_count(t) -> int:
    """Worlds produced by ``build_nice`` for tree ``t``."""
    if isinstance(t, Leaf):
        return 2
    return 2 * world_count(t.left) + 2 * world_count(t.right) + 4


def extract_assignment(m: KripkeStructure, w: str, variables) -> Assignment:
    """Truth values of ``variables`` read off the labels of world ``w``."""
    if w not in m.index:
        raise KeyError(f"unknown world {w!r}")
    variables = frozenset(variables)
    return Assignment(m.valuation[w] & variables, variables)


def build_witness(f: Cnf, assignment=None, reduction: ReductionOutput | None = None,
                  debug: bool = False) -> WitnessCertificate:
    """Verified S5 model of the reduced formula of ``f``.

    ``assignment`` may be an Assignment or an iterable of true variables of
    ``f``; without it one is found by brute force.
    """
    red = reduction if reduction is not None else reduce(f)
    if not red.padding_vars:
        raise ValueError("witness construction needs a padded reduction")
    base = red.origin
    if assignment is None:
        found = brute_force_sat(base)
        if found is None:
            raise UnsatisfiableError("unsatisfiable input")
        true = found.true_set
    else:
        true = assignment.true_set if isinstance(assignment, Assignment) else frozenset(assignment)
        unknown = true - set(base.variables)
        if unknown:
            raise ValueError(f"assignment names unknown variables {sorted(unknown)}")
        if not evaluate(base, Assignment(true, frozenset(base.variables))):
            raise UnsatisfiableError("the given assignment does not satisfy the input")
    full = Assignment(true | frozenset(red.padding_vars), frozenset(red.variables))
    nice = build_nice(red.tree, full, red.subformula_map, debug=debug)
    m = nice.structure
    start = nice.core[0]
    verified = check(m, start, red.formula)
    cert = WitnessCertificate(m, start, red.formula, verified, nice.core, full, red, nice.joints)
    if not verified:
        raise WitnessError("witness does not satisfy the reduced formula", model=m, world=start,
                           subformula=red.formula)
    if not in_frame_class(m, "s5"):
        raise WitnessError("witness model is not an S5 structure", model=m)
    return cert


def write_certificate(cert: WitnessCertificate, path, formula_file=None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(cert.to_json_dict(formula_file), fh, indent=1)
        fh.write("\n")
