"""3CNF data model, DIMACS input, padding, balanced bracketing, independence
and an exhaustive propositional oracle."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

PAD_PREFIX = "_pad"
DEFAULT_VAR_LIMIT = 24


class CnfError(ValueError):
    pass


class DimacsError(CnfError):
    pass


@dataclass(frozen=True)
class Literal:
    variable: str
    positive: bool = True

    def __neg__(self) -> "Literal":
        return Literal(self.variable, not self.positive)

    def holds(self, true_set) -> bool:
        return (self.variable in true_set) == self.positive

    def __str__(self):
        return self.variable if self.positive else f"~{self.variable}"


def lit(text: str) -> Literal:
    """``"a"`` or ``"~a"`` / ``"-a"`` to a Literal."""
    if text[:1] in ("~", "-", "!"):
        return Literal(text[1:], False)
    return Literal(text, True)


@dataclass(frozen=True)
class Clause:
    literals: tuple[Literal, Literal, Literal]

    def __post_init__(self):
        if len(self.literals) != 3:
            raise CnfError(f"a clause has exactly 3 slots, got {len(self.literals)}")

    @classmethod
    def of(cls, *items) -> "Clause":
        return cls(tuple(lit(x) if isinstance(x, str) else x for x in items))

    @property
    def variables(self) -> frozenset:
        return frozenset(l.variable for l in self.literals)

    def holds(self, true_set) -> bool:
        return any(l.holds(true_set) for l in self.literals)

    def is_tautology(self) -> bool:
        return any(-l in self.literals for l in self.literals)

    def __str__(self):
        return "(" + " | ".join(map(str, self.literals)) + ")"


@dataclass(frozen=True)
class Cnf:
    variables: tuple[str, ...]
    clauses: tuple[Clause, ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(dict.fromkeys(self.variables)))
        object.__setattr__(self, "clauses", tuple(self.clauses))
        declared = set(self.variables)
        for c in self.clauses:
            missing = c.variables - declared
            if missing:
                raise CnfError(f"undeclared variables {sorted(missing)} in clause {c}")

    @classmethod
    def from_clauses(cls, clauses: Iterable) -> "Cnf":
        """Build from clauses, declaring variables in order of first appearance."""
        cs = [c if isinstance(c, Clause) else Clause.of(*c) for c in clauses]
        names = [l.variable for c in cs for l in c.literals]
        return cls(tuple(dict.fromkeys(names)), tuple(cs))

    def __str__(self):
        return " & ".join(map(str, self.clauses))


@dataclass(frozen=True)
class Assignment:
    true_set: frozenset
    universe: frozenset

    def __post_init__(self):
        object.__setattr__(self, "true_set", frozenset(self.true_set))
        object.__setattr__(self, "universe", frozenset(self.universe))
        extra = self.true_set - self.universe
        if extra:
            raise CnfError(f"true variables outside the universe: {sorted(extra)}")

    def __contains__(self, var) -> bool:
        return var in self.true_set

    def update(self, values: dict) -> "Assignment":
        true = set(self.true_set)
        for var, value in values.items():
            (true.add if value else true.discard)(var)
        return Assignment(frozenset(true), self.universe | frozenset(values))

    def restrict(self, variables) -> "Assignment":
        variables = frozenset(variables)
        return Assignment(self.true_set & variables, variables)


# -- conjunction trees ----------------------------------------------------------


@dataclass(frozen=True)
class Leaf:
    clause: Clause

    def leaves(self):
        yield self

    @property
    def depth(self) -> int:
        return 0


@dataclass(frozen=True)
class And:
    left: "ConjTree"
    right: "ConjTree"

    def leaves(self):
        yield from self.left.leaves()
        yield from self.right.leaves()

    @property
    def depth(self) -> int:
        return 1 + max(self.left.depth, self.right.depth)


ConjTree = Union[Leaf, And]


def clauses_of(t) -> list[Clause]:
    if isinstance(t, Cnf):
        return list(t.clauses)
    return [leaf.clause for leaf in t.leaves()]


def variables_of(t) -> tuple[str, ...]:
    if isinstance(t, Cnf):
        return t.variables
    return tuple(dict.fromkeys(l.variable for c in clauses_of(t) for l in c.literals))


def internal_nodes(t):
    """All And nodes of a tree, parents first."""
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, And):
            yield node
            stack.append(node.right)
            stack.append(node.left)


@dataclass(frozen=True)
class PaddedCnf:
    tree: ConjTree
    padding_vars: tuple[str, ...]
    origin: Cnf

    @property
    def variables(self) -> tuple[str, ...]:
        return self.origin.variables + self.padding_vars


def evaluate(t, a: Assignment) -> bool:
    """Propositional value of a Cnf or ConjTree under ``a``."""
    missing = set(variables_of(t)) - a.universe
    if missing:
        raise CnfError(f"assignment does not cover {sorted(missing)}")
    return all(c.holds(a.true_set) for c in clauses_of(t))


def bracket_balanced(leaves: Sequence) -> ConjTree:
    """Binary conjunction tree of depth ceil(log2 n), left half gets the extra leaf."""
    leaves = list(leaves)
    if not leaves:
        raise CnfError("cannot bracket an empty list")
    if len(leaves) == 1:
        return leaves[0]
    mid = (len(leaves) + 1) // 2
    return And(bracket_balanced(leaves[:mid]), bracket_balanced(leaves[mid:]))


def fresh_names(prefix: str, taken, count: int) -> list[str]:
    taken = set(taken)
    out, i = [], 1
    while len(out) < count:
        name = f"{prefix}{i}"
        if name not in taken:
            out.append(name)
        i += 1
    return out


def pad(f: Cnf) -> PaddedCnf:
    """Conjoin every clause with its own fresh ``(b | b | b)`` and bracket the pairs."""
    if not f.clauses:
        raise CnfError("cannot pad an empty clause list")
    names = fresh_names(PAD_PREFIX, f.variables, len(f.clauses))
    units = [And(Leaf(c), Leaf(Clause((Literal(b),) * 3))) for c, b in zip(f.clauses, names)]
    return PaddedCnf(bracket_balanced(units), tuple(names), f)


def independence(g, h) -> tuple[bool, bool]:
    """(g independent from h, h independent from g).

    ``g`` is independent from ``h`` when some clause of ``g`` uses only
    variables absent from ``h``.
    """
    gv, hv = set(variables_of(g)), set(variables_of(h))
    g_indep = any(c.variables.isdisjoint(hv) for c in clauses_of(g))
    h_indep = any(c.variables.isdisjoint(gv) for c in clauses_of(h))
    return g_indep, h_indep


def strongly_independent(g, h) -> bool:
    return all(independence(g, h))


# -- clause normalisation ---------------------------------------------------------


def normalize_clause(literals: Sequence[Literal], fresh: str) -> list[Clause]:
    """Turn 1..3 literals into parity-safe 3-slot clauses.

    A literal occupying exactly two slots cancels itself under the xor
    encoding, so such clauses are rewritten through their distinct literals.
    One distinct literal is triplicated; two distinct literals get a fresh
    variable ``fresh`` that is forced false by an extra clause.
    """
    literals = list(literals)
    if not 1 <= len(literals) <= 3:
        raise CnfError(f"clause must have 1 to 3 literals, got {len(literals)}")
    counts = Counter(literals)
    if len(literals) == 3 and all(n % 2 for n in counts.values()):
        return [Clause(tuple(literals))]
    distinct = list(counts)
    if len(distinct) == 1:
        return [Clause((distinct[0],) * 3)]
    if len(distinct) == 2:
        z = Literal(fresh)
        return [Clause((distinct[0], distinct[1], z)), Clause((-z,) * 3)]
    raise AssertionError("unreachable")


def needs_normalization(c: Clause) -> bool:
    return any(n == 2 for n in Counter(c.literals).values())


def normalize(f: Cnf, prefix: str = "_z") -> Cnf:
    """Rewrite clauses whose slots repeat a literal exactly twice; identity otherwise."""
    if not any(needs_normalization(c) for c in f.clauses):
        return f
    taken = set(f.variables)
    clauses, variables = [], list(f.variables)
    for c in f.clauses:
        if needs_normalization(c):
            (z,) = fresh_names(prefix, taken, 1)
            taken.add(z)
            new = normalize_clause(c.literals, z)
            if len(new) > 1:
                variables.append(z)
            clauses.extend(new)
        else:
            clauses.append(c)
    return Cnf(tuple(variables), tuple(clauses))


def parse_dimacs(text: str) -> Cnf:
    """Read DIMACS CNF; clauses of 1 or 2 literals are widened to 3 slots."""
    header = None
    ints: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if header is not None or len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"malformed header on line {lineno}: {raw!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise DimacsError(f"malformed header on line {lineno}: {raw!r}") from None
            continue
        if header is None:
            raise DimacsError(f"clause before 'p cnf' header on line {lineno}")
        try:
            ints.extend(int(tok) for tok in line.split())
        except ValueError:
            raise DimacsError(f"non-integer token on line {lineno}: {raw!r}") from None
    if header is None:
        raise DimacsError("missing 'p cnf' header")
    nvars, _ = header

    raw_clauses, current = [], []
    for x in ints:
        if x == 0:
            raw_clauses.append(current)
            current = []
        else:
            if abs(x) > nvars:
                raise DimacsError(f"variable {abs(x)} out of range 1..{nvars}")
            current.append(x)
    if current:
        raw_clauses.append(current)

    variables = [f"x{i}" for i in range(1, nvars + 1)]
    taken = set(variables)
    clauses = []
    for raw in raw_clauses:
        if not raw:
            raise DimacsError("empty clause")
        if len(raw) > 3:
            raise DimacsError(f"clause longer than 3 literals: {raw}")
        lits = [Literal(f"x{abs(x)}", x > 0) for x in raw]
        fresh = None
        if len(raw) < 3 or needs_normalization(Clause(tuple(lits))):
            (fresh,) = fresh_names("z", taken, 1)
        new = normalize_clause(lits, fresh or "")
        if len(new) > 1:
            taken.add(fresh)
            variables.append(fresh)
        clauses.extend(new)
    return Cnf(tuple(variables), tuple(clauses))


def to_dimacs(f: Cnf) -> str:
    index = {v: i for i, v in enumerate(f.variables, 1)}
    lines = [f"p cnf {len(f.variables)} {len(f.clauses)}"]
    for c in f.clauses:
        lits = [index[l.variable] * (1 if l.positive else -1) for l in c.literals]
        lines.append(" ".join(map(str, lits)) + " 0")
    return "\n".join(lines) + "\n"


# -- brute force -------------------------------------------------------------------

_CHUNK_BITS = 20


def brute_force_sat(f, var_limit: int = DEFAULT_VAR_LIMIT) -> Assignment | None:
    """First satisfying assignment in lexicographic order, or None.

    Order: variables in declaration order, first variable most significant,
    false before true.  The search space is scanned in numpy chunks.
    """
    variables = list(variables_of(f))
    n = len(variables)
    if n > var_limit:
        raise CnfError(f"{n} variables exceed the brute-force limit of {var_limit}")
    clauses = clauses_of(f)
    pos = {v: i for i, v in enumerate(variables)}
    encoded = [[(n - 1 - pos[l.variable], l.positive) for l in c.literals] for c in clauses]
    total = 1 << n
    step = 1 << min(n, _CHUNK_BITS)
    for start in range(0, total, step):
        idx = np.arange(start, min(start + step, total), dtype=np.int64)
        ok = np.ones(idx.shape, dtype=bool)
        for lits in encoded:
            sat = np.zeros(idx.shape, dtype=bool)
            for shift, positive in lits:
                bit = ((idx >> shift) & 1).astype(bool)
                sat |= bit if positive else ~bit
            ok &= sat
        hits = np.flatnonzero(ok)
        if hits.size:
            code = int(idx[hits[0]])
            true = {v for v in variables if (code >> (n - 1 - pos[v])) & 1}
            return Assignment(frozenset(true), frozenset(variables))
    return None
