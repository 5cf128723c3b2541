"""Satisfaction of affine multi-modal formulas over finite Kripke structures.

Every distinct subformula is evaluated once for all worlds at the same
time, as a boolean vector over ``M.worlds``.
"""

from __future__ import annotations

import numpy as np

from .formula import Bot, Box, Dia, Formula, Prop, Top, Xor, postorder
from .kripke import KripkeError, KripkeStructure


class ModelCheckError(KripkeError):
    pass


def _diamond(m: KripkeStructure, i: int, x: np.ndarray) -> np.ndarray:
    ids = m.class_ids(i)
    if ids is not None:
        hit = np.bincount(ids, weights=x, minlength=len(m.partition(i))) > 0
        return hit[ids]
    src, dst = m.edge_arrays(i)
    out = np.zeros(len(m.worlds), dtype=bool)
    out[src[x[dst]]] = True
    return out


def truth_vectors(m: KripkeStructure, f: Formula, memo: dict | None = None) -> dict:
    """Map every subformula of ``f`` to its truth vector over ``m.worlds``.

    ``memo`` may carry vectors from a previous call on the same structure.
    """
    memo = {} if memo is None else memo
    n = len(m.worlds)
    for node in postorder(f):
        if node in memo:
            continue
        match node:
            case Top():
                v = np.ones(n, dtype=bool)
            case Bot():
                v = np.zeros(n, dtype=bool)
            case Prop(name):
                v = m.prop_mask(name)
            case Xor(left, right):
                v = memo[left] ^ memo[right]
            case Dia(index, body) | Box(index, body):
                if index > m.arity:
                    raise ModelCheckError(f"modality index {index} exceeds arity {m.arity}")
                if isinstance(node, Dia):
                    v = _diamond(m, index, memo[body])
                else:
                    v = ~_diamond(m, index, ~memo[body])
        memo[node] = v
    return memo


def label_worlds(m: KripkeStructure, f: Formula) -> set[str]:
    """All worlds of ``m`` at which ``f`` holds."""
    v = truth_vectors(m, f)[f]
    return {m.worlds[k] for k in np.flatnonzero(v)}


def check(m: KripkeStructure, w: str, f: Formula) -> bool:
    """``M, w |= f``."""
    if w not in m.index:
        raise ModelCheckError(f"unknown world {w!r}")
    return bool(truth_vectors(m, f)[f][m.index[w]])
