"""Initial-data expressions: parsing, evaluation, symbolic derivatives.

Profiles are one-variable expressions in ``x`` built from decimal literals,
``+ - * /``, integer powers ``^``, unary minus and the functions
``sin cos exp ln sqrt atan tanh sinh cosh``. Unary minus binds looser than
``^`` so ``-x^2`` means ``-(x^2)``.

Evaluation raises :class:`DomainError` instead of returning NaN so that a
threshold verdict is never computed from a poisoned value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .numerics import QuadratureError, quad

__all__ = [
    "ProfileSyntaxError",
    "DomainError",
    "Num",
    "Var",
    "Neg",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Pow",
    "Call",
    "ScalarProfile",
    "InitialData",
    "WeightedMass",
    "parse_profile",
    "evaluate",
    "evaluate_derivative",
    "weighted_mass",
    "FUNCTIONS",
]


class ProfileSyntaxError(ValueError):
    """Malformed expression; ``offset`` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class DomainError(ArithmeticError):
    """Expression evaluated outside its mathematical domain."""


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    arg: "Node"


@dataclass(frozen=True)
class Add:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Sub:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Mul:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Div:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Node"


Node = Union[Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call]


def _ln(v: float) -> float:
    if v <= 0.0:
        raise DomainError(f"ln of nonpositive value {v!r}")
    return math.log(v)


def _sqrt(v: float) -> float:
    if v < 0.0:
        raise DomainError(f"sqrt of negative value {v!r}")
    return math.sqrt(v)


FUNCTIONS: dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
    "ln": _ln,
    "sqrt": _sqrt,
    "atan": math.atan,
    "tanh": math.tanh,
    "sinh": math.sinh,
    "cosh": math.cosh,
}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Tok:
    kind: str  # num, ident, op, end
    text: str
    offset: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == ".":
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    while k < n and text[k].isdigit():
                        k += 1
                    j = k
            toks.append(_Tok("num", text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(_Tok("ident", text[i:j], i))
            i = j
            continue
        if ch in "+-*/^()":
            toks.append(_Tok("op", ch, i))
            i += 1
            continue
        raise ProfileSyntaxError(f"unexpected character {ch!r}", i)
    toks.append(_Tok("end", "", n))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.pos = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def take(self) -> _Tok:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def expect(self, text: str) -> None:
        tok = self.peek()
        if tok.kind != "op" or tok.text != text:
            found = "end of input" if tok.kind == "end" else repr(tok.text)
            raise ProfileSyntaxError(f"expected {text!r}, found {found}", tok.offset)
        self.pos += 1

    def parse(self) -> Node:
        if self.peek().kind == "end":
            raise ProfileSyntaxError("empty expression", 0)
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ProfileSyntaxError(f"unexpected {tok.text!r}", tok.offset)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.take().text
            rhs = self.factor()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def factor(self) -> Node:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.take()
            return Neg(self.factor())
        node = self.base()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.take()
            sign = 1
            if self.peek().kind == "op" and self.peek().text == "-":
                self.take()
                sign = -1
            etok = self.peek()
            if etok.kind != "num" or not etok.text.isdigit():
                raise ProfileSyntaxError("exponent must be an integer literal", etok.offset)
            self.take()
            node = Pow(node, sign * int(etok.text))
        return node

    def base(self) -> Node:
        tok = self.take()
        if tok.kind == "num":
            return Num(float(tok.text))
        if tok.kind == "ident":
            if tok.text == "x":
                return Var()
            if tok.text not in FUNCTIONS:
                raise ProfileSyntaxError(f"unknown function {tok.text!r}", tok.offset)
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return Call(tok.text, arg)
        if tok.kind == "op" and tok.text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ProfileSyntaxError(f"expected a value, found {found}", tok.offset)


# ---------------------------------------------------------------------------
# Evaluation, differentiation, printing
# ---------------------------------------------------------------------------


def _eval(node: Node, x: float) -> float:
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Neg):
        return -_eval(node.arg, x)
    if isinstance(node, Add):
        return _eval(node.left, x) + _eval(node.right, x)
    if isinstance(node, Sub):
        return _eval(node.left, x) - _eval(node.right, x)
    if isinstance(node, Mul):
        return _eval(node.left, x) * _eval(node.right, x)
    if isinstance(node, Div):
        den = _eval(node.right, x)
        if den == 0.0:
            raise DomainError(f"division by zero at x={x!r}")
        return _eval(node.left, x) / den
    if isinstance(node, Pow):
        b = _eval(node.base, x)
        if node.exponent < 0 and b == 0.0:
            raise DomainError(f"zero raised to a negative power at x={x!r}")
        try:
            return b**node.exponent
        except OverflowError as exc:
            raise DomainError(f"overflow in power at x={x!r}") from exc
    if isinstance(node, Call):
        arg = _eval(node.arg, x)
        try:
            return FUNCTIONS[node.name](arg)
        except OverflowError as exc:
            raise DomainError(f"overflow in {node.name} at x={x!r}") from exc
    raise TypeError(f"not an expression node: {node!r}")


def _is_num(node: Node, value: float | None = None) -> bool:
    return isinstance(node, Num) and (value is None or node.value == value)


def _add(a: Node, b: Node) -> Node:
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    if _is_num(a) and _is_num(b):
        return Num(a.value + b.value)
    return Add(a, b)


def _sub(a: Node, b: Node) -> Node:
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return _neg(b)
    if _is_num(a) and _is_num(b):
        return Num(a.value - b.value)
    return Sub(a, b)


def _mul(a: Node, b: Node) -> Node:
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return Num(0.0)
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    if _is_num(a) and _is_num(b):
        return Num(a.value * b.value)
    return Mul(a, b)


def _div(a: Node, b: Node) -> Node:
    if _is_num(a, 0.0):
        return Num(0.0)
    if _is_num(b, 1.0):
        return a
    return Div(a, b)


def _neg(a: Node) -> Node:
    if _is_num(a):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _pow(a: Node, n: int) -> Node:
    if n == 0:
        return Num(1.0)
    if n == 1:
        return a
    return Pow(a, n)


def _diff(node: Node) -> Node:
    if isinstance(node, Num):
        return Num(0.0)
    if isinstance(node, Var):
        return Num(1.0)
    if isinstance(node, Neg):
        return _neg(_diff(node.arg))
    if isinstance(node, Add):
        return _add(_diff(node.left), _diff(node.right))
    if isinstance(node, Sub):
        return _sub(_diff(node.left), _diff(node.right))
    if isinstance(node, Mul):
        return _add(_mul(_diff(node.left), node.right), _mul(node.left, _diff(node.right)))
    if isinstance(node, Div):
        u, v = node.left, node.right
        num = _sub(_mul(_diff(u), v), _mul(u, _diff(v)))
        return _div(num, _pow(v, 2))
    if isinstance(node, Pow):
        n = node.exponent
        return _mul(_mul(Num(float(n)), _pow(node.base, n - 1)), _diff(node.base))
    if isinstance(node, Call):
        g, dg = node.arg, _diff(node.arg)
        name = node.name
        if name == "sin":
            outer: Node = Call("cos", g)
        elif name == "cos":
            outer = _neg(Call("sin", g))
        elif name == "exp":
            outer = node
        elif name == "ln":
            outer = _div(Num(1.0), g)
        elif name == "sqrt":
            outer = _div(Num(0.5), node)
        elif name == "atan":
            outer = _div(Num(1.0), _add(Num(1.0), _pow(g, 2)))
        elif name == "tanh":
            outer = _sub(Num(1.0), _pow(node, 2))
        elif name == "sinh":
            outer = Call("cosh", g)
        elif name == "cosh":
            outer = Call("sinh", g)
        else:  # pragma: no cover - FUNCTIONS and this table move together
            raise KeyError(name)
        return _mul(outer, dg)
    raise TypeError(f"not an expression node: {node!r}")


def _fmt_num(v: float) -> str:
    text = repr(float(v))
    if text in ("inf", "-inf", "nan"):
        raise ValueError(f"cannot print non-finite literal {v!r}")
    return text


def to_text(node: Node) -> str:
    """Fully parenthesised text that re-parses to an equivalent tree."""
    if isinstance(node, Num):
        text = _fmt_num(node.value)
        return f"({text})" if node.value < 0 or text.startswith("-") else text
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Neg):
        return f"(-{to_text(node.arg)})"
    if isinstance(node, Add):
        return f"({to_text(node.left)}+{to_text(node.right)})"
    if isinstance(node, Sub):
        return f"({to_text(node.left)}-{to_text(node.right)})"
    if isinstance(node, Mul):
        return f"({to_text(node.left)}*{to_text(node.right)})"
    if isinstance(node, Div):
        return f"({to_text(node.left)}/{to_text(node.right)})"
    if isinstance(node, Pow):
        return f"({to_text(node.base)}^{node.exponent})"
    if isinstance(node, Call):
        return f"{node.name}({to_text(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")


# ---------------------------------------------------------------------------
# Public profile types
# ---------------------------------------------------------------------------

FULL_LINE = "full-line"
HALF_LINE = "half-line"


@dataclass(frozen=True)
class ScalarProfile:
    """A parsed one-variable expression together with its domain.

    Attributes:
        ast: Expression tree.
        domain: ``"full-line"`` (x in R) or ``"half-line"`` (x >= 0).
        text: Source text, kept for reports.
    """

    ast: Node
    domain: str = FULL_LINE
    text: str = ""

    def __post_init__(self):
        if self.domain not in (FULL_LINE, HALF_LINE):
            raise ValueError(f"unknown domain {self.domain!r}")
        object.__setattr__(self, "_dast", _diff(self.ast))

    @property
    def derivative_ast(self) -> Node:
        return self._dast  # type: ignore[attr-defined]

    def _check(self, x: float) -> None:
        if not math.isfinite(x):
            raise DomainError(f"non-finite evaluation point {x!r}")
        if self.domain == HALF_LINE and x < 0.0:
            raise DomainError(f"x={x!r} outside the half-line domain")

    def __call__(self, x: float) -> float:
        self._check(x)
        return _eval(self.ast, float(x))

    def derivative(self, x: float) -> float:
        self._check(x)
        return _eval(self.derivative_ast, float(x))

    def on_grid(self, xs) -> np.ndarray:
        return np.array([self(x) for x in np.asarray(xs, dtype=float)])

    def derivative_on_grid(self, xs) -> np.ndarray:
        return np.array([self.derivative(x) for x in np.asarray(xs, dtype=float)])

    def to_text(self) -> str:
        return to_text(self.ast)

    def with_domain(self, domain: str) -> "ScalarProfile":
        return ScalarProfile(self.ast, domain, self.text)


def parse_profile(text: str, domain: str = FULL_LINE) -> ScalarProfile:
    """Parse ``text`` into a :class:`ScalarProfile`.

    Raises:
        ProfileSyntaxError: malformed input, unknown function or empty text.
    """
    return ScalarProfile(_Parser(text).parse(), domain, text)


def constant_profile(value: float, domain: str = FULL_LINE) -> ScalarProfile:
    return ScalarProfile(Num(float(value)), domain, repr(float(value)))


def linear_profile(slope: float, intercept: float = 0.0, domain: str = FULL_LINE) -> ScalarProfile:
    """``intercept + slope*x``, handy for pinning u'0 at a point."""
    ast = _add(Num(float(intercept)), _mul(Num(float(slope)), Var()))
    return ScalarProfile(ast, domain, to_text(ast))


def evaluate(p: ScalarProfile, x: float) -> float:
    return p(x)


def evaluate_derivative(p: ScalarProfile, x: float) -> float:
    return p.derivative(x)


@dataclass(frozen=True)
class InitialData:
    """Density (or number density for isotropic models) and velocity profiles.

    Attributes:
        rho0: Density profile, nonnegative on its domain.
        u0: Velocity profile on the same domain.
    """

    rho0: ScalarProfile
    u0: ScalarProfile

    def __post_init__(self):
        if self.rho0.domain != self.u0.domain:
            raise ValueError("rho0 and u0 must share a domain")

    @property
    def domain(self) -> str:
        return self.rho0.domain

    @classmethod
    def from_text(cls, rho0: str, u0: str, domain: str = FULL_LINE) -> "InitialData":
        return cls(parse_profile(rho0, domain), parse_profile(u0, domain))

    def validate(self, xs) -> None:
        """Check the density is nonnegative and both profiles evaluate on ``xs``.

        Raises:
            DomainError: a profile cannot be evaluated at some point.
            ValueError: the density is negative somewhere.
        """
        for x in np.asarray(xs, dtype=float):
            r = self.rho0(x)
            if r < 0.0:
                raise ValueError(f"rho0({x!r}) = {r!r} is negative")
            self.u0(x)
            self.u0.derivative(x)


def weighted_mass(
    n0: ScalarProfile | Callable[[float], float], nu: int, alpha: float, rel_tol: float = 1e-10
) -> float:
    """``e0(alpha)``: the integral of ``n0(xi) * xi**nu`` over ``[0, alpha]``.

    Raises:
        ValueError: ``alpha < 0`` or ``nu < 0``.
        QuadratureError: quadrature did not converge.
    """
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha!r}")
    if nu < 0:
        raise ValueError(f"nu must be nonnegative, got {nu!r}")
    if alpha == 0.0:
        return 0.0
    return quad(lambda s: n0(s) * s**nu, 0.0, alpha, rel_tol=rel_tol, abs_tol=1e-14)


@dataclass(frozen=True)
class WeightedMass:
    """Weighted mass accessors for an isotropic density profile."""

    n0: ScalarProfile
    nu: int

    def e0(self, alpha: float) -> float:
        return weighted_mass(self.n0, self.nu, alpha)

    def E0(self, alpha: float) -> float:
        if alpha <= 0.0:
            raise ValueError("E0 is defined for alpha > 0")
        return self.e0(alpha) / alpha**self.nu


__all__ += ["constant_profile", "linear_profile", "to_text", "FULL_LINE", "HALF_LINE", "QuadratureError"]
