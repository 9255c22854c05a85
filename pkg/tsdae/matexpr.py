"""Scalar expressions in ``t`` and the matrix functions built from them.

Grammar (no implicit multiplication, '^' takes a non-negative integer literal
and binds tighter than unary minus)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-'? atom ('^' integer)?
    atom   := number | 't' | '(' expr ')'
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, List, Protocol, Sequence, Tuple, Union, runtime_checkable

import numpy as np

from .errors import DimensionMismatch, EvalError, ParseError
from .timescale import GridMatrixSamples, TimeScale


# --- AST ---------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float
    text: str


@dataclass(frozen=True)
class Var:
    name: str = "t"


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


Node = Union[Num, Var, Neg, BinOp, Pow]


# --- tokenizer ---------------------------------------------------------------

_NUMBER = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_INTEGER = re.compile(r"\d+")


@dataclass(frozen=True)
class _Token:
    kind: str  # num, t, op, end
    text: str
    offset: int


def _tokenize(src: str, location: str) -> List[_Token]:
    tokens: List[_Token] = []
    i = 0
    n = len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "+-*/^()":
            tokens.append(_Token("op", ch, i))
            i += 1
            continue
        if ch == "t":
            tokens.append(_Token("t", ch, i))
            i += 1
            continue
        m = _NUMBER.match(src, i)
        if m:
            tokens.append(_Token("num", m.group(0), i))
            i = m.end()
            continue
        raise ParseError(f"unexpected character {ch!r}", offset=_byte_offset(src, i), location=location)
    tokens.append(_Token("end", "", n))
    return tokens


def _byte_offset(src: str, i: int) -> int:
    return len(src[:i].encode("utf-8"))


class _Parser:
    def __init__(self, src: str, location: str = "") -> None:
        self.src = src
        self.location = location
        self.tokens = _tokenize(src, location)
        self.pos = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def _fail(self, expected: str) -> ParseError:
        tok = self.tok
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        return ParseError(
            f"unexpected {found}",
            offset=_byte_offset(self.src, tok.offset),
            expected=expected,
            location=self.location,
        )

    def _accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.pos += 1
            return True
        return False

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            raise self._fail("operator or end of input")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.pos += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.pos += 1
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Node:
        negate = self._accept("-")
        node = self.atom()
        if self._accept("^"):
            tok = self.tok
            if tok.kind != "num" or not _INTEGER.fullmatch(tok.text):
                raise self._fail("non-negative integer exponent")
            self.pos += 1
            node = Pow(node, int(tok.text))
        return Neg(node) if negate else node

    def atom(self) -> Node:
        tok = self.tok
        if tok.kind == "num":
            self.pos += 1
            return Num(float(tok.text), tok.text)
        if tok.kind == "t":
            self.pos += 1
            return Var()
        if self._accept("("):
            node = self.expr()
            if not self._accept(")"):
                raise self._fail("')'")
            return node
        raise self._fail("number, 't' or '('")


# --- evaluation / printing ---------------------------------------------------


def _eval(node: Node, t: float) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return t
    if isinstance(node, Neg):
        return -_eval(node.operand, t)
    if isinstance(node, Pow):
        return _eval(node.base, t) ** node.exponent
    left = _eval(node.left, t)
    right = _eval(node.right, t)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if right == 0.0:
        raise ZeroDivisionError
    return left / right


def _print(node: Node) -> str:
    if isinstance(node, Num):
        return node.text
    if isinstance(node, Var):
        return "t"
    if isinstance(node, Neg):
        return f"(-{_print(node.operand)})"
    if isinstance(node, Pow):
        return f"({_print(node.base)}^{node.exponent})"
    return f"({_print(node.left)} {node.op} {_print(node.right)})"


@dataclass(frozen=True)
class ScalarExpr:
    node: Node
    source: str

    def evaluate(self, t: float) -> float:
        try:
            value = _eval(self.node, float(t))
        except ZeroDivisionError:
            raise EvalError(f"DivisionByZero in {self.source!r}", t=t) from None
        except OverflowError:
            raise EvalError(f"overflow in {self.source!r}", t=t) from None
        if not math.isfinite(value):
            raise EvalError(f"non-finite value in {self.source!r}", t=t)
        return value

    __call__ = evaluate

    def to_source(self) -> str:
        return _print(self.node)


def parse_expr(src: str, *, location: str = "") -> ScalarExpr:
    if src is None or not str(src).strip():
        raise ParseError("empty expression", offset=0, expected="expression", location=location)
    src = str(src)
    return ScalarExpr(_Parser(src, location).parse(), src)


def constant_expr(value: float) -> ScalarExpr:
    value = float(value)
    text = repr(abs(value))
    node: Node = Num(abs(value), text)
    if value < 0 or (value == 0 and math.copysign(1.0, value) < 0):
        node = Neg(node)
    return ScalarExpr(node, _print(node))


# --- matrix functions --------------------------------------------------------


@runtime_checkable
class TimeVaryingMatrix(Protocol):
    """Anything that maps a time point to a matrix of fixed shape."""

    shape: Tuple[int, int]

    def evaluate(self, t: float) -> np.ndarray:
        ...


@dataclass(frozen=True)
class MatrixFunction:
    rows: int
    cols: int
    entries: Tuple[Tuple[ScalarExpr, ...], ...]

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise DimensionMismatch(f"matrix function needs positive shape, got {self.rows}x{self.cols}")
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise DimensionMismatch(f"entries do not form a {self.rows}x{self.cols} grid")

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    @classmethod
    def from_sources(cls, sources: Sequence[Sequence[str]], *, name: str = "M") -> "MatrixFunction":
        rows = [list(r) for r in sources]
        if not rows or not rows[0]:
            raise DimensionMismatch(f"{name} is empty")
        width = len(rows[0])
        for i, r in enumerate(rows):
            if len(r) != width:
                raise DimensionMismatch(f"{name} row {i + 1} has {len(r)} entries, expected {width}")
        entries = tuple(
            tuple(parse_expr(str(src), location=f"{name}[{i + 1},{j + 1}]") for j, src in enumerate(r))
            for i, r in enumerate(rows)
        )
        return cls(len(rows), width, entries)

    @classmethod
    def from_vector_sources(cls, sources: Sequence[str], *, name: str = "f") -> "MatrixFunction":
        return cls.from_sources([[s] for s in sources], name=name)

    @classmethod
    def constant(cls, matrix: np.ndarray) -> "MatrixFunction":
        arr = np.atleast_2d(np.asarray(matrix, dtype=float))
        entries = tuple(tuple(constant_expr(v) for v in row) for row in arr)
        return cls(arr.shape[0], arr.shape[1], entries)

    def evaluate(self, t: float) -> np.ndarray:
        out = np.empty(self.shape)
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                try:
                    out[i, j] = e.evaluate(t)
                except EvalError as exc:
                    raise EvalError(exc.reason, t=t, entry=(i, j)) from None
        return out

    __call__ = evaluate

    def to_sources(self) -> List[List[str]]:
        return [[e.to_source() for e in row] for row in self.entries]


@dataclass(frozen=True)
class CallableMatrixFunction:
    """Matrix function backed by a numpy callable."""

    shape: Tuple[int, int]
    fn: Callable[[float], np.ndarray]

    def evaluate(self, t: float) -> np.ndarray:
        out = np.asarray(self.fn(float(t)), dtype=float).reshape(self.shape)
        if not np.all(np.isfinite(out)):
            raise EvalError("non-finite value", t=t)
        return out

    __call__ = evaluate


@dataclass(frozen=True)
class SampledMatrixFunction:
    """Exact lookup in tabulated samples; defined only on grid points."""

    samples: GridMatrixSamples

    @property
    def shape(self) -> Tuple[int, int]:
        return self.samples.shape  # type: ignore[return-value]

    def evaluate(self, t: float) -> np.ndarray:
        return np.array(self.samples.at(t))

    __call__ = evaluate


def eval_matrix(mf: TimeVaryingMatrix, t: float) -> np.ndarray:
    return mf.evaluate(t)


def tabulate(mf: TimeVaryingMatrix, ts: TimeScale) -> GridMatrixSamples:
    return GridMatrixSamples(ts, np.stack([mf.evaluate(float(t)) for t in ts.points]))


def tabulate_sigma(mf: TimeVaryingMatrix, ts: TimeScale) -> GridMatrixSamples:
    """mf(sigma(t)) at every grid point (sigma of the last point is itself)."""
    return GridMatrixSamples(ts, np.stack([mf.evaluate(ts.sigma(float(t))) for t in ts.points]))


def identity_function(n: int) -> CallableMatrixFunction:
    eye = np.eye(n)
    return CallableMatrixFunction((n, n), lambda t: eye)


def zero_vector_function(n: int) -> CallableMatrixFunction:
    zeros = np.zeros((n, 1))
    return CallableMatrixFunction((n, 1), lambda t: zeros)
