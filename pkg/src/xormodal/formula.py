"""Affine multi-modal formulas: AST, concrete syntax, box lowering and metrics.

Formulas are hash-consed: building the same tree twice yields the same
object, so structural equality is identity and shared subterms are stored
once.  All size figures still report *tree* size.
"""

from __future__ import annotations

import re
import weakref
from dataclasses import dataclass
from typing import Iterator

KEYWORDS = frozenset({"top", "bot"})
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

_TABLE: "weakref.WeakValueDictionary[tuple, Formula]" = weakref.WeakValueDictionary()


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class Formula:
    """Base class of all formula nodes. Instances are interned and immutable."""

    __slots__ = ("__weakref__",)
    _fields: tuple[str, ...] = ()

    def __new__(cls, *args):
        cls._validate(*args)
        key = (cls, *args)
        node = _TABLE.get(key)
        if node is None:
            node = object.__new__(cls)
            for name, value in zip(cls._fields, args):
                object.__setattr__(node, name, value)
            _TABLE[key] = node
        return node

    @classmethod
    def _validate(cls, *args):
        if len(args) != len(cls._fields):
            raise TypeError(f"{cls.__name__} takes {len(cls._fields)} arguments")

    def __setattr__(self, name, value):
        raise AttributeError("formulas are immutable")

    def __reduce__(self):
        return type(self), tuple(getattr(self, f) for f in self._fields)

    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    def children(self) -> tuple["Formula", ...]:
        return ()

    def __repr__(self):
        args = ", ".join(repr(getattr(self, f)) for f in self._fields)
        return f"{type(self).__name__}({args})"

    def __str__(self):
        return print_formula(self)

    def __add__(self, other: "Formula") -> "Formula":
        return Xor(self, other)


class Top(Formula):
    __slots__ = ()
    __match_args__ = ()


class Bot(Formula):
    __slots__ = ()
    __match_args__ = ()


class Prop(Formula):
    __slots__ = ("name",)
    _fields = ("name",)
    __match_args__ = ("name",)

    @classmethod
    def _validate(cls, *args):
        super()._validate(*args)
        name = args[0]
        if not isinstance(name, str) or not _IDENT.match(name) or name in KEYWORDS:
            raise ValueError(f"invalid proposition name {name!r}")


class Xor(Formula):
    __slots__ = ("left", "right")
    _fields = ("left", "right")
    __match_args__ = ("left", "right")

    @classmethod
    def _validate(cls, *args):
        super()._validate(*args)
        if not all(isinstance(a, Formula) for a in args):
            raise TypeError("Xor operands must be formulas")

    def children(self):
        return (self.left, self.right)


class _Modal(Formula):
    __slots__ = ("index", "body")
    _fields = ("index", "body")
    __match_args__ = ("index", "body")

    @classmethod
    def _validate(cls, *args):
        super()._validate(*args)
        index, body = args
        if type(index) is not int or index < 1:
            raise ValueError(f"modality index must be an integer >= 1, got {index!r}")
        if not isinstance(body, Formula):
            raise TypeError("modal body must be a formula")

    def children(self):
        return (self.body,)


class Dia(_Modal):
    __slots__ = ()


class Box(_Modal):
    __slots__ = ()


TOP = Top()
BOT = Bot()


def xor(*operands: Formula) -> Formula:
    """Left-associated exclusive-or of one or more formulas."""
    if not operands:
        raise ValueError("xor needs at least one operand")
    result = operands[0]
    for f in operands[1:]:
        result = Xor(result, f)
    return result


def neg(f: Formula) -> Formula:
    """Negation in the affine fragment, ``f + top``."""
    return Xor(f, TOP)


def postorder(f: Formula) -> Iterator[Formula]:
    """Yield every distinct node of ``f`` once, children before parents."""
    seen = set()
    stack = [(f, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            yield node
            continue
        if node in seen:
            continue
        seen.add(node)
        stack.append((node, True))
        for child in reversed(node.children()):
            if child not in seen:
                stack.append((child, False))


# -- printing ---------------------------------------------------------------


def print_formula(f: Formula) -> str:
    """Canonical text with minimal parentheses; ``parse_formula`` inverts it."""
    text: dict[Formula, str] = {}
    for node in postorder(f):
        match node:
            case Top():
                s = "top"
            case Bot():
                s = "bot"
            case Prop(name):
                s = name
            case Xor(left, right):
                r = text[right]
                if isinstance(right, Xor):
                    r = f"({r})"
                s = f"{text[left]} + {r}"
            case _Modal(index, body):
                op = f"<{index}>" if isinstance(node, Dia) else f"[{index}]"
                b = text[body]
                if isinstance(body, Xor):
                    s = f"{op}({b})"
                elif isinstance(body, _Modal):
                    s = op + b
                else:
                    s = f"{op} {b}"
        text[node] = s
    return text[f]


# -- parsing ----------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\f\v]+)|(?P<nl>\n)|(?P<comment>\#[^\n]*)"
    r"|(?P<int>[0-9]+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct>[<>\[\]()+])"
)


def _tokenize(text: str):
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            yield kind, m.group(), line, pos - line_start + 1
        pos = m.end()
    yield "eof", "", line, pos - line_start + 1


class _Parser:
    def __init__(self, text: str):
        self.tokens = list(_tokenize(text))
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, line, col = self.take()
        if text != value or kind == "eof":
            found = "end of input" if kind == "eof" else repr(text)
            raise FormulaSyntaxError(f"expected {value!r}, found {found}", line, col)

    def formula(self):
        f = self.unary()
        while self.peek()[1] == "+" and self.peek()[0] == "punct":
            self.take()
            f = Xor(f, self.unary())
        return f

    def unary(self):
        # modal prefixes are collected iteratively so long chains do not recurse
        prefixes = []
        while self.peek()[0] == "punct" and self.peek()[1] in "<[":
            _, opener, _, _ = self.take()
            kind, text, line, col = self.take()
            if kind != "int":
                raise FormulaSyntaxError("expected modality index", line, col)
            index = int(text)
            if index < 1:
                raise FormulaSyntaxError("modality index must be >= 1", line, col)
            self.expect(">" if opener == "<" else "]")
            prefixes.append((Dia if opener == "<" else Box, index))
        f = self.atom()
        for cls, index in reversed(prefixes):
            f = cls(index, f)
        return f

    def atom(self):
        kind, text, line, col = self.take()
        if kind == "ident":
            if text == "top":
                return TOP
            if text == "bot":
                return BOT
            return Prop(text)
        if kind == "punct" and text == "(":
            f = self.formula()
            self.expect(")")
            return f
        found = "end of input" if kind == "eof" else repr(text)
        raise FormulaSyntaxError(f"expected a formula, found {found}", line, col)


def parse_formula(text: str) -> Formula:
    """Parse the concrete syntax: ``+`` is xor, ``<i>``/``[i]`` are diamond/box."""
    p = _Parser(text)
    f = p.formula()
    kind, tok, line, col = p.peek()
    if kind != "eof":
        raise FormulaSyntaxError(f"unexpected {tok!r}", line, col)
    return f


# -- transformations and metrics ----------------------------------------------


def lower_boxes(f: Formula) -> Formula:
    """Rewrite every ``[i] g`` as ``<i>(g + top) + top``."""
    out: dict[Formula, Formula] = {}
    for node in postorder(f):
        match node:
            case Xor(left, right):
                new = Xor(out[left], out[right])
            case Box(index, body):
                new = Xor(Dia(index, Xor(out[body], TOP)), TOP)
            case Dia(index, body):
                new = Dia(index, out[body])
            case _:
                new = node
        out[node] = new
    return out[f]


@dataclass(frozen=True)
class FormulaMetrics:
    size: int
    modal_depth: int
    props: frozenset
    max_index: int


def metrics(f: Formula) -> FormulaMetrics:
    size: dict[Formula, int] = {}
    depth: dict[Formula, int] = {}
    props = set()
    max_index = 0
    for node in postorder(f):
        kids = node.children()
        size[node] = 1 + sum(size[c] for c in kids)
        d = max((depth[c] for c in kids), default=0)
        if isinstance(node, _Modal):
            d += 1
            max_index = max(max_index, node.index)
        elif isinstance(node, Prop):
            props.add(node.name)
        depth[node] = d
    return FormulaMetrics(size[f], depth[f], frozenset(props), max_index)


def size(f: Formula) -> int:
    return metrics(f).size


def count_boxes(f: Formula) -> int:
    """Number of Box nodes in the tree (not the DAG)."""
    count: dict[Formula, int] = {}
    for node in postorder(f):
        count[node] = isinstance(node, Box) + sum(count[c] for c in node.children())
    return count[f]


def read_formula_file(path) -> Formula:
    with open(path, encoding="utf-8") as fh:
        return parse_formula(fh.read())


def write_formula_file(path, f: Formula) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(print_formula(f))
        fh.write("\n")
