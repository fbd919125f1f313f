"""A small language for immersions (u, v) -> R^N.

Example::

    let a = 2;
    domain u in [-1, 1], v in [-1, 1];
    exclude (0, 0) radius 0.1;
    [u, v, a*sin(u), cos(v)]

``^`` binds tightest and is right associative; ``-u^2`` is ``-(u^2)``.
Integer exponents are expanded by repeated multiplication, any other
exponent is ``exp(e*log(b))`` and needs a positive base.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import taylor as tl
from .errors import (
    ArityError,
    DomainError,
    DivisionNearZero,
    ParseError,
    PointOutsideDomain,
    UnknownIdentifier,
)

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt", "atan")
KEYWORDS = ("let", "domain", "exclude", "in", "radius")


# --------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
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
    func: str
    arg: object


@dataclass(frozen=True)
class Domain:
    u_range: tuple[float, float] = (-1.0, 1.0)
    v_range: tuple[float, float] = (-1.0, 1.0)
    exclusions: tuple[tuple[float, float, float], ...] = ()

    def contains(self, point) -> bool:
        u, v = point
        (u0, u1), (v0, v1) = self.u_range, self.v_range
        if not (u0 <= u <= u1 and v0 <= v <= v1):
            return False
        return all(math.hypot(u - cu, v - cv) >= r for cu, cv, r in self.exclusions)

    def grid(self, nu: int, nv: int) -> list[tuple[float, float]]:
        """Cell centres of an nu x nv subdivision, minus excluded disks."""
        (u0, u1), (v0, v1) = self.u_range, self.v_range
        us = u0 + (np.arange(nu) + 0.5) * (u1 - u0) / nu
        vs = v0 + (np.arange(nv) + 0.5) * (v1 - v0) / nv
        return [(float(u), float(v)) for v in vs for u in us if self.contains((u, v))]

    def full_grid(self, nu: int, nv: int) -> list[tuple[float, float]]:
        (u0, u1), (v0, v1) = self.u_range, self.v_range
        us = u0 + (np.arange(nu) + 0.5) * (u1 - u0) / nu
        vs = v0 + (np.arange(nv) + 0.5) * (v1 - v0) / nv
        return [(float(u), float(v)) for v in vs for u in us]

    def with_exclusions(self, extra) -> "Domain":
        return Domain(self.u_range, self.v_range, self.exclusions + tuple(extra))


@dataclass(frozen=True)
class SurfaceAst:
    components: tuple
    params: tuple[tuple[str, float], ...] = ()
    domain: Domain = field(default_factory=Domain)

    @property
    def param_dict(self) -> dict[str, float]:
        return dict(self.params)

    @property
    def ambient_dim(self) -> int:
        return len(self.components)


# --------------------------------------------------------------------------
# lexer

_TOKEN = re.compile(
    r"(?P<ws>\s+|#[^\n]*)"
    r"|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()\[\],;=])"
)


@dataclass
class _Tok:
    kind: str  # num, ident, op, eof
    text: str
    offset: int


def _lex(source: str) -> list[_Tok]:
    toks, pos = [], 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", pos, source)
        if m.lastgroup != "ws":
            toks.append(_Tok(m.lastgroup, m.group(), pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(source)))
    return toks


# --------------------------------------------------------------------------
# parser

class _Parser:
    def __init__(self, source: str):
        self.src = source
        self.toks = _lex(source)
        self.i = 0
        self.params: dict[str, float] = {}

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, message, expected=(), tok=None, cls=ParseError):
        tok = tok or self.tok
        raise cls(message, tok.offset, self.src, expected)

    def accept(self, text) -> bool:
        if self.tok.kind in ("op", "ident") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            found = self.tok.text or "end of input"
            self.fail(f"expected {text!r}, found {found!r}", (text,))

    def ident(self) -> _Tok:
        tok = self.tok
        if tok.kind != "ident" or tok.text in KEYWORDS:
            self.fail("expected identifier", ("identifier",))
        self.i += 1
        return tok

    # statements
    def program(self) -> SurfaceAst:
        domain = Domain()
        exclusions = []
        while True:
            if self.accept("let"):
                name_tok = self.ident()
                name = name_tok.text
                if name in ("u", "v") or name in FUNCTIONS:
                    self.fail(f"cannot bind reserved name {name!r}", tok=name_tok)
                if name in self.params:
                    self.fail(f"parameter {name!r} declared twice", tok=name_tok)
                self.expect("=")
                self.params[name] = self.constant()
                self.expect(";")
            elif self.accept("domain"):
                ranges = {}
                for k in range(2):
                    if k:
                        self.expect(",")
                    var = self.ident()
                    if var.text not in ("u", "v") or var.text in ranges:
                        self.fail("domain names u and v once each", ("u", "v"), tok=var)
                    self.expect("in")
                    self.expect("[")
                    lo = self.constant()
                    self.expect(",")
                    start = self.tok
                    hi = self.constant()
                    if not hi > lo:
                        self.fail("empty interval", tok=start)
                    self.expect("]")
                    ranges[var.text] = (lo, hi)
                self.expect(";")
                domain = Domain(ranges["u"], ranges["v"])
            elif self.accept("exclude"):
                self.expect("(")
                cu = self.constant()
                self.expect(",")
                cv = self.constant()
                self.expect(")")
                self.expect("radius")
                start = self.tok
                r = self.constant()
                if not r > 0:
                    self.fail("exclusion radius must be positive", tok=start)
                self.expect(";")
                exclusions.append((cu, cv, r))
            else:
                break
        start = self.tok
        comps = self.vector()
        if self.tok.kind != "eof":
            self.fail(f"unexpected {self.tok.text!r} after vector", ("end of input",))
        if len(comps) < 4:
            self.fail(f"need at least 4 components, got {len(comps)}", tok=start)
        domain = Domain(domain.u_range, domain.v_range, tuple(exclusions))
        return SurfaceAst(tuple(comps), tuple(self.params.items()), domain)

    def constant(self) -> float:
        start = self.tok
        node = self.expr(allow_uv=False)
        try:
            return float(evaluate(node, self.params))
        except (DomainError, DivisionNearZero, ZeroDivisionError, ValueError, OverflowError) as exc:
            self.fail(f"bad constant expression: {exc}", tok=start)

    def vector(self) -> list:
        self.expect("[")
        comps = [self.expr()]
        while self.accept(","):
            comps.append(self.expr())
        if not self.accept("]"):
            found = self.tok.text or "end of input"
            self.fail(f"expected ',' or ']', found {found!r}", (",", "]"))
        return comps

    # expressions
    def expr(self, allow_uv=True):
        node = self.term(allow_uv)
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.term(allow_uv))
        return node

    def term(self, allow_uv):
        node = self.unary(allow_uv)
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            node = BinOp(op, node, self.unary(allow_uv))
        return node

    def unary(self, allow_uv):
        if self.accept("-"):
            return Neg(self.unary(allow_uv))
        return self.power(allow_uv)

    def power(self, allow_uv):
        base = self.atom(allow_uv)
        if self.accept("^"):
            return BinOp("^", base, self.unary(allow_uv))
        return base

    def atom(self, allow_uv):
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Num(float(tok.text))
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            self.i += 1
            name = tok.text
            if name in FUNCTIONS:
                if not self.accept("("):
                    self.fail(f"function {name} needs an argument", ("(",), cls=ArityError)
                arg = self.expr(allow_uv)
                if self.tok.text == ",":
                    self.fail(f"function {name} takes exactly one argument", (")",), cls=ArityError)
                self.expect(")")
                return Call(name, arg)
            if name in ("u", "v"):
                if not allow_uv:
                    self.fail(f"{name} not allowed in a constant expression", tok=tok, cls=UnknownIdentifier)
                return Var(name)
            if name in self.params:
                return Var(name)
            self.fail(f"unknown identifier {name!r}", tok=tok, cls=UnknownIdentifier)
        if self.accept("("):
            node = self.expr(allow_uv)
            self.expect(")")
            return node
        found = tok.text or "end of input"
        self.fail(f"expected expression, found {found!r}", ("number", "identifier", "(", "-"))


def parse(source: str) -> SurfaceAst:
    """Parse DSL text into a :class:`SurfaceAst` (raises :class:`ParseError`)."""
    return _Parser(source).program()


# --------------------------------------------------------------------------
# printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _fmt_num(x: float) -> str:
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def format_expr(node, parent=0) -> str:
    if isinstance(node, Num):
        return _fmt_num(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({format_expr(node.arg)})"
    if isinstance(node, Neg):
        text = "-" + format_expr(node.operand, 3)
        return f"({text})" if parent > 3 else text
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        if node.op == "^":
            left, right = format_expr(node.left, 5), format_expr(node.right, 3)
        else:
            left, right = format_expr(node.left, p), format_expr(node.right, p + 1)
        text = f"{left} {node.op} {right}" if p < 4 else f"{left}^{right}"
        return f"({text})" if p < parent else text
    raise TypeError(f"not an expression node: {node!r}")


def pretty(ast: SurfaceAst) -> str:
    lines = [f"let {k} = {_fmt_num(v)};" for k, v in ast.params]
    d = ast.domain
    lines.append(
        f"domain u in [{_fmt_num(d.u_range[0])}, {_fmt_num(d.u_range[1])}], "
        f"v in [{_fmt_num(d.v_range[0])}, {_fmt_num(d.v_range[1])}];"
    )
    for cu, cv, r in d.exclusions:
        lines.append(f"exclude ({_fmt_num(cu)}, {_fmt_num(cv)}) radius {_fmt_num(r)};")
    lines.append("[" + ", ".join(format_expr(c) for c in ast.components) + "]")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# evaluation

def _pow(base, expo):
    if isinstance(expo, tl.Taylor):
        return tl.exp(expo * tl.log(base))
    expo = float(expo)
    if isinstance(base, tl.Taylor):
        return tl.power(base, expo)
    if expo.is_integer():
        if base == 0 and expo < 0:
            raise DivisionNearZero("0 to a negative power")
        return float(base) ** int(expo)
    if base <= 0:
        raise DomainError(f"pow(., {expo})", base)
    return math.exp(expo * math.log(base))


def _div(a, b):
    if isinstance(b, tl.Taylor):
        return a * tl.recip(b)
    if abs(b) <= tl.SINGULAR_THRESHOLD:
        raise DivisionNearZero(f"division by {b!r}")
    return a / b


def _float_funcs():
    def log(x):
        if x <= 0:
            raise DomainError("log", x)
        return math.log(x)

    def sqrt(x):
        if x < 0:
            raise DomainError("sqrt", x)
        return math.sqrt(x)

    return {"sin": math.sin, "cos": math.cos, "exp": math.exp, "log": log,
            "sqrt": sqrt, "atan": math.atan}


_FLOAT_FUNCS = _float_funcs()
_TAYLOR_FUNCS = {name: getattr(tl, name) for name in FUNCTIONS}


def evaluate(node, env: dict):
    """Evaluate an expression over floats or Taylor values bound in ``env``."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -evaluate(node.operand, env)
    if isinstance(node, Call):
        arg = evaluate(node.arg, env)
        table = _TAYLOR_FUNCS if isinstance(arg, tl.Taylor) else _FLOAT_FUNCS
        return table[node.func](arg)
    if isinstance(node, BinOp):
        a = evaluate(node.left, env)
        b = evaluate(node.right, env)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return _div(a, b)
        return _pow(a, b)
    raise TypeError(f"not an expression node: {node!r}")


def _check_point(ast: SurfaceAst, point) -> None:
    if not ast.domain.contains(point):
        raise PointOutsideDomain(f"{point} outside the chart domain")


def eval_ast(ast: SurfaceAst, point, order: int) -> tl.Jet:
    """Jet of the defined immersion at ``point``, computed in Taylor arithmetic."""
    if not isinstance(order, (int, np.integer)) or not 1 <= order <= tl.MAX_ORDER:
        from .errors import OrderError
        raise OrderError(f"order {order!r} outside 1..{tl.MAX_ORDER}")
    _check_point(ast, point)
    return jet_unchecked(ast, point, order)


def jet_unchecked(ast: SurfaceAst, point, order: int) -> tl.Jet:
    u, v = float(point[0]), float(point[1])
    env = dict(ast.params)
    env["u"] = tl.Taylor.variable(u, 0, order)
    env["v"] = tl.Taylor.variable(v, 1, order)
    comps = [evaluate(c, env) for c in ast.components]
    return tl.Jet(tl.stack(comps, order), (u, v))


def eval_value(ast: SurfaceAst, point) -> np.ndarray:
    """Plain floating-point value of the immersion (no Taylor arithmetic)."""
    _check_point(ast, point)
    env = dict(ast.params)
    env["u"], env["v"] = float(point[0]), float(point[1])
    return np.array([float(evaluate(c, env)) for c in ast.components])
