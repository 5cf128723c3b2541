"""Bounded exhaustive model search over frame classes, plus random model
generation and mutation for property tests.

Enumeration order (fixed, so results are reproducible):

1. number of worlds ``n = 1 .. max_worlds``;
2. relations ``R_1 .. R_k`` as a product, ``R_1`` varying slowest.  For S5
   each relation is a set partition in restricted-growth-string order; for
   K/T/S4 it is a successor-mask tuple in binary counting order, filtered
   by the frame class;
3. valuation as a binary counter over (world, proposition) pairs, world 0
   and the first proposition (sorted) most significant;
4. the first world satisfying the formula.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import lru_cache

from .formula import Bot, Box, Dia, Formula, Prop, Top, Xor, metrics
from .kripke import FrameClass, KripkeStructure, close, in_frame_class
from .modelcheck import check

ENUMERATION_GUARD = 10**8


class BudgetExceeded(ValueError):
    pass


@dataclass(frozen=True)
class SearchBudget:
    max_worlds: int = 4
    max_props: int = 3
    frame: FrameClass = FrameClass.S5
    arity: int = 2

    def __post_init__(self):
        if self.max_worlds < 1:
            raise ValueError("max_worlds must be >= 1")
        if self.arity < 1:
            raise ValueError("arity must be >= 1")
        object.__setattr__(self, "frame", FrameClass.parse(self.frame))


def restricted_growth_strings(n: int):
    """Set partitions of range(n) as block labels, lexicographic order."""
    if n == 0:
        yield ()
        return

    def rec(prefix, top):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for b in range(top + 2):
            prefix.append(b)
            yield from rec(prefix, max(top, b))
            prefix.pop()

    yield from rec([0], 0)


@lru_cache(maxsize=None)
def _relations(n: int, frame: FrameClass) -> tuple[tuple[int, ...], ...]:
    """All admissible relations on n worlds as per-world successor bitmasks."""
    if frame is FrameClass.S5:
        out = []
        for rgs in restricted_growth_strings(n):
            blocks = {}
            for w, b in enumerate(rgs):
                blocks[b] = blocks.get(b, 0) | (1 << w)
            out.append(tuple(blocks[rgs[w]] for w in range(n)))
        return tuple(out)
    out = []
    full = 1 << (n * n)
    for code in range(full):
        succ = tuple((code >> (w * n)) & ((1 << n) - 1) for w in range(n))
        if frame is not FrameClass.K and any(not succ[w] >> w & 1 for w in range(n)):
            continue
        if frame is FrameClass.S4 and not _transitive(succ):
            continue
        out.append(succ)
    return tuple(out)


def _transitive(succ) -> bool:
    for u, su in enumerate(succ):
        for v in range(len(succ)):
            if su >> v & 1 and succ[v] & ~su:
                return False
    return True


def _count_relations(n: int, frame: FrameClass) -> int:
    if frame is FrameClass.S5:
        return _bell(n)
    if frame is FrameClass.K:
        return 2 ** (n * n)
    if frame is FrameClass.T:
        return 2 ** (n * n - n)
    return len(_relations(n, frame)) if n <= 4 else 2 ** (n * n - n)


def _bell(n: int) -> int:
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def projected_structures(budget: SearchBudget, n_props: int) -> int:
    return sum(
        _count_relations(n, budget.frame) ** budget.arity * 2 ** (n * n_props)
        for n in range(1, budget.max_worlds + 1)
    )


def _eval(f: Formula, n: int, rels, props, memo) -> int:
    v = memo.get(f)
    if v is not None:
        return v
    match f:
        case Top():
            v = (1 << n) - 1
        case Bot():
            v = 0
        case Prop(name):
            v = props[name]
        case Xor(left, right):
            v = _eval(left, n, rels, props, memo) ^ _eval(right, n, rels, props, memo)
        case Dia(index, body):
            x = _eval(body, n, rels, props, memo)
            succ = rels[index - 1]
            v = 0
            for w in range(n):
                if succ[w] & x:
                    v |= 1 << w
        case Box(index, body):
            x = _eval(body, n, rels, props, memo)
            succ = rels[index - 1]
            v = 0
            for w in range(n):
                if succ[w] & ~x == 0:
                    v |= 1 << w
    memo[f] = v
    return v


@lru_cache(maxsize=64)
def _valuations(n: int, props: tuple[str, ...]) -> tuple[dict, ...]:
    bits = n * len(props)
    out = []
    for code in range(1 << bits):
        masks = {}
        for j, p in enumerate(props):
            mask = 0
            for w in range(n):
                if code >> (bits - 1 - (w * len(props) + j)) & 1:
                    mask |= 1 << w
            masks[p] = mask
        out.append(masks)
    return tuple(out)


def _structure(n, rels, prop_masks, frame) -> KripkeStructure:
    worlds = [f"w{k}" for k in range(n)]
    relations = {
        i + 1: [(worlds[u], worlds[v]) for u in range(n) for v in range(n) if succ[u] >> v & 1]
        for i, succ in enumerate(rels)
    }
    valuation = {worlds[w]: [p for p, m in prop_masks.items() if m >> w & 1] for w in range(n)}
    return KripkeStructure(worlds, relations, valuation, arity=len(rels), closed_as=frame)


def bounded_modal_sat(f: Formula, budget: SearchBudget = SearchBudget()):
    """First ``(structure, world)`` of the budget satisfying ``f``, else None.

    None means no model within the budget; it is not a proof of
    unsatisfiability.
    """
    m = metrics(f)
    props = sorted(m.props)
    if len(props) > budget.max_props:
        raise BudgetExceeded(f"{len(props)} propositions exceed max_props={budget.max_props}")
    if m.max_index > budget.arity:
        raise BudgetExceeded(f"modality index {m.max_index} exceeds arity {budget.arity}")
    projected = projected_structures(budget, len(props))
    if projected > ENUMERATION_GUARD:
        raise BudgetExceeded(f"projected enumeration of {projected} structures exceeds {ENUMERATION_GUARD}")
    for n in range(1, budget.max_worlds + 1):
        rel_choices = _relations(n, budget.frame)
        valuations = _valuations(n, tuple(props))
        for rels in itertools.product(rel_choices, repeat=budget.arity):
            for masks in valuations:
                sat = _eval(f, n, rels, masks, {})
                if sat:
                    w = (sat & -sat).bit_length() - 1
                    return _structure(n, rels, masks, budget.frame), f"w{w}"
    return None


# -- random models ------------------------------------------------------------------


def random_model(seed, n_worlds: int, props, frame: FrameClass | str = FrameClass.S5,
                 arity: int = 2) -> KripkeStructure:
    """Random structure closed to ``frame``; deterministic in ``seed``.

    Each relation draws its own edge density, so sparse and dense shapes
    (down to the identity) all occur.
    """
    if n_worlds < 1:
        raise ValueError("n_worlds must be >= 1")
    rng = random.Random(seed)
    worlds = [f"w{k}" for k in range(n_worlds)]
    relations = {}
    for i in range(1, arity + 1):
        density = rng.random()
        relations[i] = [(u, v) for u in worlds for v in worlds if u != v and rng.random() < density]
    props = sorted(props)
    valuation = {w: [p for p in props if rng.random() < 0.5] for w in worlds}
    m = KripkeStructure(worlds, relations, valuation, arity)
    return close(m, frame)


def mutate_model(m: KripkeStructure, seed, kind: str | None = None) -> KripkeStructure:
    """One random mutation of an S5 structure, re-closed to S5.

    ``kind`` is ``"flip"`` (one proposition at one world), ``"merge"`` (two
    classes of a relation) or ``"split"`` (one class in two); random if None.
    The relation is drawn among those where the mutation is possible; when
    there is none the mutation falls back to a flip.
    """
    rng = random.Random(seed)
    kind = kind or rng.choice(("flip", "merge", "split"))
    partitions = {i: [list(c) for c in m.partition(i) or close(m, "s5").partition(i)] for i in m.relations}
    valuation = {w: set(m.valuation[w]) for w in m.worlds}
    mergeable = [i for i, cs in partitions.items() if len(cs) >= 2]
    splittable = [i for i, cs in partitions.items() if any(len(c) >= 2 for c in cs)]
    if kind == "merge" and mergeable:
        classes = partitions[rng.choice(mergeable)]
        a, b = sorted(rng.sample(range(len(classes)), 2))
        classes[a].extend(classes.pop(b))
    elif kind == "split" and splittable:
        classes = partitions[rng.choice(splittable)]
        big = [k for k, c in enumerate(classes) if len(c) >= 2]
        c = classes[rng.choice(big)]
        rng.shuffle(c)
        cut = rng.randint(1, len(c) - 1)
        classes.append(c[cut:])
        del c[cut:]
    else:
        props = sorted(m.props) or ["p"]
        w = rng.choice(m.worlds)
        p = rng.choice(props)
        valuation[w] ^= {p}
    return KripkeStructure.from_partitions(m.worlds, partitions, valuation)


def certifies(m: KripkeStructure, w: str, f: Formula, frame: FrameClass | str) -> bool:
    """``m`` lies in ``frame`` and satisfies ``f`` at ``w``."""
    return in_frame_class(m, frame) and check(m, w, f)
