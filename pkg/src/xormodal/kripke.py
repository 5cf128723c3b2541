"""Finite Kripke structures with indexed relations, frame classes and the
structural operations the witness builder needs (closure, unions,
substructures)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .cnf import Assignment


class KripkeError(ValueError):
    pass


class NotEquivalenceError(KripkeError):
    def __init__(self, index: int, failing: Sequence[str]):
        super().__init__(f"relation {index} is not an equivalence relation; fails: {', '.join(failing)}")
        self.index = index
        self.failing = tuple(failing)


class FrameClass(str, Enum):
    K = "k"
    T = "t"
    S4 = "s4"
    S5 = "s5"

    @classmethod
    def parse(cls, value) -> "FrameClass":
        return value if isinstance(value, cls) else cls(str(value).lower())


@dataclass(frozen=True)
class FrameProperties:
    reflexive: bool
    transitive: bool
    symmetric: bool

    def satisfies(self, c: FrameClass) -> bool:
        c = FrameClass.parse(c)
        if c is FrameClass.K:
            return True
        if c is FrameClass.T:
            return self.reflexive
        if c is FrameClass.S4:
            return self.reflexive and self.transitive
        return self.reflexive and self.transitive and self.symmetric


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if ra < rb:
                ra, rb = rb, ra
            self.parent[ra] = rb


class KripkeStructure:
    """Worlds, one binary relation per modality index 1..arity, and a valuation.

    Immutable after construction.  Index arrays used by the model checker are
    built lazily and cached.
    """

    def __init__(
        self,
        worlds: Iterable[str],
        relations: Mapping[int, Iterable[tuple[str, str]]],
        valuation: Mapping[str, Iterable[str]] | None = None,
        arity: int | None = None,
        closed_as: FrameClass | str | None = None,
    ):
        self.worlds = tuple(worlds)
        if len(set(self.worlds)) != len(self.worlds):
            raise KripkeError("duplicate world names")
        relations = {int(i): frozenset((u, v) for u, v in pairs) for i, pairs in relations.items()}
        if arity is None:
            arity = max(relations, default=1)
        if arity < 1:
            raise KripkeError("arity must be >= 1")
        if any(i < 1 or i > arity for i in relations):
            raise KripkeError(f"relation index outside 1..{arity}")
        self.arity = arity
        self.relations = {i: relations.get(i, frozenset()) for i in range(1, arity + 1)}
        known = set(self.worlds)
        for i, pairs in self.relations.items():
            for u, v in pairs:
                if u not in known or v not in known:
                    raise KripkeError(f"relation {i} edge ({u}, {v}) uses an undeclared world")
        valuation = valuation or {}
        stray = set(valuation) - known
        if stray:
            raise KripkeError(f"valuation for undeclared worlds {sorted(stray)}")
        self.valuation = {w: frozenset(valuation.get(w, ())) for w in self.worlds}
        self.closed_as = FrameClass.parse(closed_as) if closed_as is not None else None
        self._cache: dict = {}

    # -- basic access --------------------------------------------------------

    def __len__(self):
        return len(self.worlds)

    def __eq__(self, other):
        if not isinstance(other, KripkeStructure):
            return NotImplemented
        return (
            self.worlds == other.worlds
            and self.arity == other.arity
            and self.relations == other.relations
            and self.valuation == other.valuation
        )

    def __repr__(self):
        sizes = ", ".join(f"R{i}:{len(p)}" for i, p in self.relations.items())
        return f"KripkeStructure({len(self.worlds)} worlds, {sizes})"

    @property
    def index(self) -> dict[str, int]:
        if "index" not in self._cache:
            self._cache["index"] = {w: k for k, w in enumerate(self.worlds)}
        return self._cache["index"]

    @property
    def props(self) -> frozenset:
        return frozenset().union(*self.valuation.values()) if self.worlds else frozenset()

    def successors(self, i: int, w: str) -> frozenset:
        key = ("succ", i)
        if key not in self._cache:
            succ = {u: set() for u in self.worlds}
            for u, v in self.relations[i]:
                succ[u].add(v)
            self._cache[key] = {u: frozenset(s) for u, s in succ.items()}
        return self._cache[key][w]

    def edge_arrays(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        key = ("edges", i)
        if key not in self._cache:
            idx = self.index
            pairs = self.relations[i]
            src = np.fromiter((idx[u] for u, _ in pairs), dtype=np.int64, count=len(pairs))
            dst = np.fromiter((idx[v] for _, v in pairs), dtype=np.int64, count=len(pairs))
            self._cache[key] = (src, dst)
        return self._cache[key]

    def prop_mask(self, p: str) -> np.ndarray:
        key = ("prop", p)
        if key not in self._cache:
            self._cache[key] = np.fromiter(
                (p in self.valuation[w] for w in self.worlds), dtype=bool, count=len(self.worlds)
            )
        return self._cache[key]

    def partition(self, i: int) -> tuple[tuple[str, ...], ...] | None:
        """Classes of relation ``i`` if it is an equivalence relation, else None."""
        key = ("partition", i)
        if key not in self._cache:
            self._cache[key] = _equivalence_classes(self.worlds, self.relations[i])
        return self._cache[key]

    def class_ids(self, i: int) -> np.ndarray | None:
        key = ("class_ids", i)
        if key not in self._cache:
            part = self.partition(i)
            if part is None:
                ids = None
            else:
                idx = self.index
                ids = np.empty(len(self.worlds), dtype=np.int64)
                for k, cls in enumerate(part):
                    for w in cls:
                        ids[idx[w]] = k
            self._cache[key] = ids
        return self._cache[key]

    @classmethod
    def from_partitions(
        cls,
        worlds: Sequence[str],
        partitions: Mapping[int, Iterable[Iterable[str]]],
        valuation: Mapping[str, Iterable[str]] | None = None,
    ) -> "KripkeStructure":
        """S5 structure whose relation ``i`` has exactly the given classes."""
        worlds = tuple(worlds)
        relations, parts = {}, {}
        for i, classes in partitions.items():
            classes = tuple(tuple(c) for c in classes)
            covered = [w for c in classes for w in c]
            if sorted(covered) != sorted(worlds):
                raise KripkeError(f"partition {i} does not cover the worlds exactly once")
            relations[i] = [(u, v) for c in classes for u in c for v in c]
            parts[i] = _sorted_classes(classes, worlds)
        m = cls(worlds, relations, valuation, arity=max(partitions), closed_as=FrameClass.S5)
        for i, p in parts.items():
            m._cache[("partition", i)] = p
        return m


def _sorted_classes(classes, worlds):
    order = {w: k for k, w in enumerate(worlds)}
    out = [tuple(sorted(c, key=order.__getitem__)) for c in classes]
    out.sort(key=lambda c: order[c[0]])
    return tuple(out)


def _components(worlds, pairs):
    idx = {w: k for k, w in enumerate(worlds)}
    uf = _UnionFind(len(worlds))
    for u, v in pairs:
        uf.union(idx[u], idx[v])
    groups: dict[int, list[str]] = {}
    for w in worlds:
        groups.setdefault(uf.find(idx[w]), []).append(w)
    return tuple(tuple(g) for g in groups.values())


def _equivalence_classes(worlds, pairs):
    comps = _components(worlds, pairs)
    if len(pairs) != sum(len(c) ** 2 for c in comps):
        return None
    comp_of = {w: k for k, c in enumerate(comps) for w in c}
    if any(comp_of[u] != comp_of[v] for u, v in pairs):
        return None
    return comps


# -- frame properties ---------------------------------------------------------


def _succ_masks(m: KripkeStructure, i: int) -> list[int]:
    idx = m.index
    masks = [0] * len(m.worlds)
    for u, v in m.relations[i]:
        masks[idx[u]] |= 1 << idx[v]
    return masks


def relation_properties(m: KripkeStructure, i: int) -> FrameProperties:
    pairs = m.relations[i]
    reflexive = all((w, w) in pairs for w in m.worlds)
    symmetric = all((v, u) in pairs for u, v in pairs)
    if m.partition(i) is not None:
        transitive = True
    else:
        succ = _succ_masks(m, i)
        idx = m.index
        transitive = all(succ[idx[v]] & ~succ[idx[u]] == 0 for u, v in pairs)
    return FrameProperties(reflexive, transitive, symmetric)


def frame_properties(m: KripkeStructure) -> dict[int, FrameProperties]:
    """Reflexivity, transitivity and symmetry of each relation."""
    return {i: relation_properties(m, i) for i in m.relations}


def in_frame_class(m: KripkeStructure, c: FrameClass | str) -> bool:
    return all(p.satisfies(c) for p in frame_properties(m).values())


def _transitive_closure(m: KripkeStructure, i: int, pairs) -> set:
    idx = m.index
    n = len(m.worlds)
    succ = [0] * n
    for u, v in pairs:
        succ[idx[u]] |= 1 << idx[v]
    # Warshall over bitsets
    for k in range(n):
        bit = 1 << k
        row = succ[k]
        for u in range(n):
            if succ[u] & bit:
                succ[u] |= row
    worlds = m.worlds
    return {(worlds[u], worlds[v]) for u in range(n) for v in range(n) if succ[u] >> v & 1}


def close(m: KripkeStructure, c: FrameClass | str) -> KripkeStructure:
    """Smallest extension of every relation that lies in frame class ``c``."""
    c = FrameClass.parse(c)
    if c is FrameClass.K:
        return KripkeStructure(m.worlds, m.relations, m.valuation, m.arity, closed_as=FrameClass.K)
    if c is FrameClass.S5:
        partitions = {i: _components(m.worlds, m.relations[i]) for i in m.relations}
        return KripkeStructure.from_partitions(m.worlds, partitions, m.valuation)
    loops = {(w, w) for w in m.worlds}
    relations = {}
    for i, pairs in m.relations.items():
        pairs = set(pairs) | loops
        if c is FrameClass.S4:
            pairs = _transitive_closure(m, i, pairs)
        relations[i] = pairs
    return KripkeStructure(m.worlds, relations, m.valuation, m.arity, closed_as=c)


def eq_class(m: KripkeStructure, i: int, w: str) -> frozenset:
    """The class of ``w`` under relation ``i``; the relation must be an equivalence."""
    if i not in m.relations:
        raise KripkeError(f"no relation {i} (arity {m.arity})")
    if w not in m.index:
        raise KripkeError(f"unknown world {w!r}")
    part = m.partition(i)
    if part is None:
        props = relation_properties(m, i)
        failing = [name for name in ("reflexive", "transitive", "symmetric") if not getattr(props, name)]
        raise NotEquivalenceError(i, failing)
    ids = m.class_ids(i)
    return frozenset(part[ids[m.index[w]]])


def disjoint_union(
    structures: Sequence[KripkeStructure], rename: bool = True
) -> tuple[KripkeStructure, list[dict[str, str]]]:
    """Side-by-side union without cross edges.

    With ``rename`` world ``w`` of the k-th structure becomes ``"k.w"``;
    without it names must already be disjoint.  Returns the union and one
    old-to-new name map per input.
    """
    if not structures:
        raise KripkeError("disjoint union of zero structures")
    arity = structures[0].arity
    if any(m.arity != arity for m in structures):
        raise KripkeError("arity mismatch in disjoint union")
    worlds, maps = [], []
    relations = {i: [] for i in range(1, arity + 1)}
    valuation = {}
    all_equivalence = all(m.partition(i) is not None for m in structures for i in range(1, arity + 1))
    partitions = {i: [] for i in range(1, arity + 1)}
    for k, m in enumerate(structures):
        name = {w: f"{k}.{w}" if rename else w for w in m.worlds}
        maps.append(name)
        worlds.extend(name[w] for w in m.worlds)
        for w in m.worlds:
            valuation[name[w]] = m.valuation[w]
        for i in range(1, arity + 1):
            if all_equivalence:
                partitions[i].extend(tuple(name[w] for w in c) for c in m.partition(i))
            else:
                relations[i].extend((name[u], name[v]) for u, v in m.relations[i])
    if len(set(worlds)) != len(worlds):
        raise KripkeError("world names collide; use rename=True")
    if all_equivalence:
        return KripkeStructure.from_partitions(worlds, partitions, valuation), maps
    return KripkeStructure(worlds, relations, valuation, arity), maps


def substructure(m: KripkeStructure, keep: Iterable[str]) -> KripkeStructure:
    """Restriction to ``keep``; world order of ``m`` is preserved."""
    keep = set(keep)
    unknown = keep - set(m.worlds)
    if unknown:
        raise KripkeError(f"unknown worlds {sorted(unknown)}")
    worlds = [w for w in m.worlds if w in keep]
    relations = {i: [(u, v) for u, v in p if u in keep and v in keep] for i, p in m.relations.items()}
    valuation = {w: m.valuation[w] for w in worlds}
    return KripkeStructure(worlds, relations, valuation, m.arity, closed_as=m.closed_as)


# -- nice models ---------------------------------------------------------------


@dataclass
class NiceModel:
    """Arity-2 S5 structure with a relation-1 class (the core) whose worlds are
    labelled exactly by ``core_assignment`` on its universe."""

    structure: KripkeStructure
    core: tuple[str, ...]
    core_assignment: Assignment
    joints: list = field(default_factory=list)


def nice_model_problems(nm: NiceModel) -> list[str]:
    """Violated NiceModel invariants, empty when all hold."""
    m = nm.structure
    problems = []
    if m.arity != 2:
        problems.append(f"arity is {m.arity}, expected 2")
    for i in m.relations:
        if m.partition(i) is None:
            problems.append(f"relation {i} is not an equivalence relation")
    if not nm.core:
        return problems + ["core is empty"]
    unknown = set(nm.core) - set(m.worlds)
    if unknown:
        return problems + [f"core worlds not in structure: {sorted(unknown)}"]
    if m.partition(1) is not None and eq_class(m, 1, nm.core[0]) != frozenset(nm.core):
        problems.append("core is not exactly one relation-1 class")
    universe = nm.core_assignment.universe
    for w in nm.core:
        if m.valuation[w] & universe != nm.core_assignment.true_set:
            problems.append(f"core world {w} disagrees with the core assignment")
    return problems


# -- JSON ------------------------------------------------------------------------


def to_json_dict(m: KripkeStructure) -> dict:
    order = m.index
    rels = {}
    for i, pairs in m.relations.items():
        rels[str(i)] = [[u, v] for u, v in sorted(pairs, key=lambda p: (order[p[0]], order[p[1]]))]
    return {
        "arity": m.arity,
        "worlds": list(m.worlds),
        "relations": rels,
        "valuation": {w: sorted(m.valuation[w]) for w in m.worlds},
        "closed_as": m.closed_as.value if m.closed_as is not None else None,
    }


def from_json_dict(data: dict) -> KripkeStructure:
    try:
        arity = int(data.get("arity", 1))
        relations = {int(i): [tuple(p) for p in pairs] for i, pairs in data.get("relations", {}).items()}
        m = KripkeStructure(data["worlds"], relations, data.get("valuation", {}), arity)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, KripkeError):
            raise
        raise KripkeError(f"malformed model JSON: {exc}") from exc
    closed_as = data.get("closed_as")
    if closed_as:
        m = close(m, closed_as)
    return m


def dump_model(m: KripkeStructure, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_json_dict(m), fh, indent=1)
        fh.write("\n")


def load_model(path) -> KripkeStructure:
    with open(path, encoding="utf-8") as fh:
        return from_json_dict(json.load(fh))
