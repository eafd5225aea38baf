"""Expression language for Lagrangians and symmetry generators.

Grammar (EBNF)::

    expr    = term { ("+" | "-") term } ;
    term    = unary { ("*" | "/") unary } ;
    unary   = "-" unary | power ;
    power   = atom [ "^" unary ] ;
    atom    = number | name | func "(" expr ")" | "(" expr ")" ;
    func    = "sin" | "cos" | "exp" | "ln" | "sqrt" | "abs" ;
    name    = "t" | "q" | "v" | "q" digits | "v" digits ;
    number  = digits [ "." [ digits ] ] [ exponent ] | "." digits [ exponent ] ;

``^`` binds tighter than unary minus and associates to the right, so
``-v^2`` is ``-(v^2)`` and ``2^3^2`` is ``2^(3^2)``. The bare names ``q``
and ``v`` are aliases of ``q1`` and ``v1`` and only exist when ``n = 1``.

Evaluation runs on :class:`Dual` numbers, which gives exact first
derivatives by forward-mode differentiation.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping, Union

from .errors import DomainError, ExpressionSyntaxError, UnknownVariable

FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt", "abs")


class Dual:
    """Dual number ``val + der * eps`` with ``eps**2 = 0``."""

    __slots__ = ("val", "der")

    def __init__(self, val: float, der: float = 0.0):
        self.val = val
        self.der = der

    def __add__(self, other: "Dual") -> "Dual":
        return Dual(self.val + other.val, self.der + other.der)

    def __sub__(self, other: "Dual") -> "Dual":
        return Dual(self.val - other.val, self.der - other.der)

    def __mul__(self, other: "Dual") -> "Dual":
        return Dual(self.val * other.val, self.val * other.der + self.der * other.val)

    def __truediv__(self, other: "Dual") -> "Dual":
        q = self.val / other.val
        return Dual(q, (self.der - q * other.der) / other.val)

    def __neg__(self) -> "Dual":
        return Dual(-self.val, -self.der)

    def __repr__(self) -> str:
        return f"Dual({self.val!r}, {self.der!r})"


# ---------------------------------------------------------------- AST nodes
# Precedence levels drive minimal parenthesisation in ``unparse``.
_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4, "atom": 5}


@dataclass(frozen=True)
class Num:
    value: float

    def ev(self, env):
        return Dual(self.value)


@dataclass(frozen=True)
class Var:
    name: str

    def ev(self, env):
        return env[self.name]


@dataclass(frozen=True)
class Neg:
    arg: "Node"

    def ev(self, env):
        return -self.arg.ev(env)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"

    def ev(self, env):
        a = self.left.ev(env)
        b = self.right.ev(env)
        op = self.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if b.val == 0.0:
                raise DomainError("division by zero", unparse(self))
            return a / b
        return _power(a, b, self)


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "Node"

    def ev(self, env):
        x = self.arg.ev(env)
        fn = self.fn
        try:
            if fn == "sin":
                return Dual(math.sin(x.val), math.cos(x.val) * x.der)
            if fn == "cos":
                return Dual(math.cos(x.val), -math.sin(x.val) * x.der)
            if fn == "exp":
                e = math.exp(x.val)
                return Dual(e, e * x.der)
            if fn == "ln":
                if x.val <= 0.0:
                    raise DomainError("logarithm of a non-positive number", unparse(self))
                return Dual(math.log(x.val), x.der / x.val)
            if fn == "sqrt":
                if x.val < 0.0:
                    raise DomainError("square root of a negative number", unparse(self))
                r = math.sqrt(x.val)
                if r == 0.0:
                    if x.der != 0.0:
                        raise DomainError("square root is not differentiable at 0", unparse(self))
                    return Dual(0.0, 0.0)
                return Dual(r, x.der / (2.0 * r))
            # abs: right-derivative convention at 0
            return Dual(abs(x.val), x.der if x.val >= 0.0 else -x.der)
        except OverflowError:
            raise DomainError("overflow", unparse(self)) from None


Node = Union[Num, Var, Neg, BinOp, Call]


def _power(a: Dual, b: Dual, node: BinOp) -> Dual:
    try:
        if b.der == 0.0 and float(b.val).is_integer():
            k = int(b.val)
            if a.val == 0.0 and k < 0:
                raise DomainError("zero raised to a negative power", unparse(node))
            if k == 0:
                return Dual(1.0, 0.0)
            return Dual(a.val**k, k * a.val ** (k - 1) * a.der)
        if a.val > 0.0:
            p = a.val**b.val
            return Dual(p, p * (b.der * math.log(a.val) + b.val * a.der / a.val))
        if a.val == 0.0 and b.der == 0.0 and b.val > 1.0:
            return Dual(0.0, 0.0)
        raise DomainError("non-integer power of a non-positive base", unparse(node))
    except OverflowError:
        raise DomainError("overflow", unparse(node)) from None


# ---------------------------------------------------------------- parsing
_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(src: str):
    tokens = []
    pos = 0
    while True:
        while pos < len(src) and src[pos].isspace():
            pos += 1
        if pos >= len(src):
            break
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            raise ExpressionSyntaxError(f"unexpected character {src[pos]!r}", pos, src)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


class _Parser:
    def __init__(self, src: str, names: Mapping[str, str]):
        self.src = src
        self.names = names
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, message: str, tok=None):
        tok = tok or self.peek()
        raise ExpressionSyntaxError(message, tok[2], self.src)

    def expect(self, text: str):
        tok = self.peek()
        if tok[0] != "op" or tok[1] != text:
            found = "end of input" if tok[0] == "end" else repr(tok[1])
            self.fail(f"expected {text!r}, found {found}")
        self.take()

    def parse(self) -> Node:
        node = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected {self.peek()[1]!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        tok = self.take()
        kind, text, pos = tok
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            if text not in self.names:
                raise UnknownVariable(f"unknown variable {text!r}", pos, self.src)
            return Var(self.names[text])
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        self.fail(f"expected a number, variable or '(', found {found}", tok)


def variable_names(n: int, with_velocity: bool = True) -> dict:
    """Map accepted spellings to canonical variable names for dimension ``n``."""
    names = {"t": "t"}
    prefixes = ("q", "v") if with_velocity else ("q",)
    for p in prefixes:
        for i in range(1, n + 1):
            names[f"{p}{i}"] = f"{p}{i}"
        if n == 1:
            names[p] = f"{p}1"
    return names


def parse_expression(src: str, n: int, with_velocity: bool = True) -> Node:
    """Parse ``src`` into an AST over ``t``, ``q1..qn`` and optionally ``v1..vn``."""
    if n < 1:
        raise ValueError(f"state dimension must be positive, got {n}")
    return _Parser(src, variable_names(n, with_velocity)).parse()


# ---------------------------------------------------------------- printing
def _render(node: Node):
    if isinstance(node, Num):
        x = node.value
        text = str(int(x)) if x.is_integer() and abs(x) < 1e15 else repr(x)
        # a negative literal reads back as a negation
        return text, _PREC["neg"] if text.startswith("-") else _PREC["atom"]
    if isinstance(node, Var):
        return node.name, _PREC["atom"]
    if isinstance(node, Call):
        return f"{node.fn}({_render(node.arg)[0]})", _PREC["atom"]
    if isinstance(node, Neg):
        text, p = _render(node.arg)
        if p < _PREC["neg"]:
            text = f"({text})"
        return f"-{text}", _PREC["neg"]
    p = _PREC[node.op]
    lt, lp = _render(node.left)
    rt, rp = _render(node.right)
    if node.op == "^":
        if lp <= p:
            lt = f"({lt})"
        if rp < _PREC["neg"]:
            rt = f"({rt})"
        return f"{lt}^{rt}", p
    if lp < p:
        lt = f"({lt})"
    if rp <= p:
        rt = f"({rt})"
    return f"{lt} {node.op} {rt}", p


def unparse(node: Node) -> str:
    """Text that parses back to a structurally identical tree."""
    return _render(node)[0]


# ---------------------------------------------------------------- rewriting
def substitute(node: Node, mapping: Mapping[str, Node]) -> Node:
    """Replace variables by subtrees.

    A chain of ``k`` negations over a variable mapped to ``-y`` becomes
    ``k + 1`` negations of ``y`` for even ``k`` and ``k - 1`` for odd ``k``.
    The value is the same, and substituting ``x -> -x`` twice restores the
    original tree exactly.
    """
    if isinstance(node, Var):
        return mapping.get(node.name, node)
    if isinstance(node, Num):
        return node
    if isinstance(node, Neg):
        k, base = 0, node
        while isinstance(base, Neg):
            k, base = k + 1, base.arg
        inner = substitute(base, mapping)
        if isinstance(base, Var) and isinstance(inner, Neg):
            k, inner = (k - 1, inner.arg) if k % 2 else (k + 1, inner.arg)
        for _ in range(k):
            inner = Neg(inner)
        return inner
    if isinstance(node, Call):
        return Call(node.fn, substitute(node.arg, mapping))
    return BinOp(node.op, substitute(node.left, mapping), substitute(node.right, mapping))


def free_variables(node: Node) -> set:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, (Neg, Call)):
        return free_variables(node.arg)
    return free_variables(node.left) | free_variables(node.right)


def evaluate(node: Node, env: Mapping[str, float]) -> float:
    """Plain numeric value of ``node`` with variables bound by ``env``."""
    return node.ev({k: Dual(float(x)) for k, x in env.items()}).val
