"""A small expression language for defining f(x) and p(x) on the command line.

Grammar (EBNF)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = "-" unary | power ;
    power   = atom [ "^" unary ] ;              (* right associative *)
    atom    = number | name | name "(" args ")" | "(" expr ")" ;
    args    = expr { "," expr } ;

Names: variables x1, x2, x3 and r (= |x|); constants pi, e; functions sin,
cos, exp, log, abs, min, max (two or more arguments) and step(a, b, t),
which is a where t < 0 and b otherwise. ``-2^2`` is ``-(2^2)``; write
``(-2)^2`` for the other reading. Error positions are 1-based columns.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import VexError
from .grid import Grid, SampledField


class ExprError(VexError, ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, position: int, expected: str, found: str = ""):
        self.position = position
        self.expected = expected
        msg = f"column {position}: expected {expected}"
        if found:
            msg += f", found {found!r}"
        super().__init__(msg)


class UnknownIdentifier(ExprError):
    def __init__(self, name: str, position: int):
        self.name = name
        self.position = position
        super().__init__(f"column {position}: unknown identifier {name!r}")


class DimensionError(ExprError):
    def __init__(self, name: str, dim: int, position: int):
        self.position = position
        super().__init__(f"column {position}: {name} is not defined in dimension {dim}")


class EvalError(ExprError):
    def __init__(self, node, cause: str):
        self.node = node
        self.cause = cause
        super().__init__(f"evaluation failed at node {node}: {cause}")


# ---------------------------------------------------------------- AST

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


CONSTANTS = {"pi": math.pi, "e": math.e}
VARIABLES = ("x1", "x2", "x3", "r")
# name -> (min args, max args or None)
FUNCTIONS = {
    "sin": (1, 1), "cos": (1, 1), "exp": (1, 1), "log": (1, 1), "abs": (1, 1),
    "min": (2, None), "max": (2, None), "step": (3, 3),
}


# ---------------------------------------------------------------- lexer

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int  # 1-based column


def _tokenize(source: str) -> list[_Tok]:
    toks, i = [], 0
    while i < len(source):
        m = _TOKEN.match(source, i)
        if not m:
            raise ExprSyntaxError(i + 1, "a number, name or operator", source[i])
        if m.lastgroup != "ws":
            toks.append(_Tok(m.lastgroup, m.group(), i + 1))
        i = m.end()
    toks.append(_Tok("end", "", len(source) + 1))
    return toks


# ---------------------------------------------------------------- parser

class _Parser:
    def __init__(self, source: str, dim: int):
        self.toks = _tokenize(source)
        self.i = 0
        self.dim = dim

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def accept(self, text: str) -> bool:
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            raise ExprSyntaxError(self.tok.pos, repr(text), self.tok.text or "end of input")

    def parse(self):
        node = self.expr()
        if self.tok.kind != "end":
            raise ExprSyntaxError(self.tok.pos, "an operator or end of input", self.tok.text)
        return node

    def expr(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.accept("-"):
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.accept("^"):
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        tok = self.tok
        if tok.kind == "num":
            value = float(tok.text)
            if not math.isfinite(value):
                raise ExprSyntaxError(tok.pos, "a finite number", tok.text)
            self.i += 1
            return Num(value)
        if tok.kind == "name":
            self.i += 1
            return self.name(tok)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        raise ExprSyntaxError(tok.pos, "a number, name or '('", tok.text or "end of input")

    def name(self, tok: _Tok):
        name = tok.text
        if name in FUNCTIONS:
            self.expect("(")
            args = [self.expr()]
            while self.accept(","):
                args.append(self.expr())
            self.expect(")")
            lo, hi = FUNCTIONS[name]
            if len(args) < lo or (hi is not None and len(args) > hi):
                want = str(lo) if lo == hi else f"at least {lo}"
                raise ExprSyntaxError(tok.pos, f"{want} argument(s) to {name}", f"{len(args)} given")
            return Call(name, tuple(args))
        if name in CONSTANTS:
            return Const(name)
        if name in VARIABLES:
            if name != "r" and int(name[1]) > self.dim:
                raise DimensionError(name, self.dim, tok.pos)
            return Var(name)
        raise UnknownIdentifier(name, tok.pos)


def parse(source: str, dim: int):
    """Parse ``source`` into an expression tree valid on ``dim``-dimensional grids."""
    if dim not in (1, 2, 3):
        raise ExprError(f"dimension must be 1, 2 or 3, got {dim}")
    return _Parser(source, dim).parse()


def to_source(node) -> str:
    """Fully parenthesised source text; ``parse(to_source(t))`` rebuilds ``t``."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    if isinstance(node, Call):
        return f"{node.name}({', '.join(to_source(a) for a in node.args)})"
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------- evaluation

class _DomainFailure(Exception):
    def __init__(self, mask, cause):
        self.mask = mask
        self.cause = cause


def _eval(node, env):
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Const):
        return CONSTANTS[node.name]
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, BinOp):
        a, b = _eval(node.left, env), _eval(node.right, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            zero = np.asarray(b) == 0
            if np.any(zero):
                raise _DomainFailure(zero, "division by zero")
            return a / b
        with np.errstate(invalid="ignore", over="ignore", divide="ignore"):
            out = np.power(a, b)
        bad = ~np.isfinite(out) & np.isfinite(a) & np.isfinite(b)
        if np.any(bad):
            raise _DomainFailure(bad, "power is undefined or overflows")
        return out
    if isinstance(node, Call):
        args = [_eval(a, env) for a in node.args]
        name = node.name
        if name == "log":
            bad = np.asarray(args[0]) <= 0
            if np.any(bad):
                raise _DomainFailure(bad, "log of a nonpositive number")
            return np.log(args[0])
        if name == "step":
            a, b, t = args
            return np.where(np.asarray(t) < 0, a, b)
        if name == "min":
            return np.minimum.reduce(np.broadcast_arrays(*args))
        if name == "max":
            return np.maximum.reduce(np.broadcast_arrays(*args))
        with np.errstate(over="ignore"):
            return {"sin": np.sin, "cos": np.cos, "exp": np.exp, "abs": np.abs}[name](args[0])
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(node, **variables):
    """Evaluate at scalar or array coordinates, e.g. ``evaluate(t, x1=0.5)``.

    ``r`` defaults to the Euclidean norm of the supplied x-variables.
    """
    env = dict(variables)
    if "r" not in env:
        xs = [np.asarray(v, dtype=float) for k, v in env.items() if k in ("x1", "x2", "x3")]
        env["r"] = np.sqrt(sum(x * x for x in xs)) if xs else 0.0
    try:
        out = _eval(node, env)
    except _DomainFailure as exc:
        idx = int(np.flatnonzero(np.broadcast_to(exc.mask, np.shape(exc.mask)))[0]) if np.ndim(exc.mask) else 0
        raise EvalError(idx, exc.cause) from None
    return out


def sample_to_field(node, grid: Grid) -> SampledField:
    """Evaluate the expression at every node of ``grid``."""
    coords = grid.mesh()
    env = {f"x{k + 1}": c for k, c in enumerate(coords)}
    env["r"] = np.sqrt(sum(c * c for c in coords))
    try:
        vals = _eval(node, env)
    except _DomainFailure as exc:
        mask = np.broadcast_to(exc.mask, grid.shape)
        flat = int(np.flatnonzero(mask)[0])
        raise EvalError(grid.node_coords(flat), exc.cause) from None
    vals = np.broadcast_to(np.asarray(vals, dtype=float), grid.shape)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        flat = int(np.flatnonzero(bad)[0])
        raise EvalError(grid.node_coords(flat), "non-finite value")
    return SampledField(grid, vals)
