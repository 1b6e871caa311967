"""Parser, exact symbolic derivative and evaluator for one-variable potentials.

Grammar (standard infix precedence, '^' binds tighter than unary minus):

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | power
    power  := atom ('^' unary)?          right associative
    atom   := NUMBER | 'x' | FUNC '(' expr ')' | '(' expr ')'
    FUNC   := 'sin' | 'cos' | 'exp' | 'log'

Exponents of '^' must be constant (must not contain 'x').  All numbers are
IEEE-754 doubles.  Trees are immutable; parsing applies one constant-folding
normalization pass, after which print -> parse is structurally idempotent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class ParseError(ValueError):
    """Malformed expression text; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"parse error at position {position}: {message}")
        self.position = position


class UnknownSymbol(ParseError):
    """An identifier other than the variable 'x' or a known function."""

    def __init__(self, name: str, position: int):
        ParseError.__init__(self, f"unknown symbol {name!r}", position)
        self.name = name


class DomainError(ArithmeticError):
    """log of a non-positive argument, division by zero, or an invalid power."""


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Unary:
    op: str  # 'neg' | 'sin' | 'cos' | 'exp' | 'log'
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # '+' | '-' | '*' | '/' | '^'
    left: "Expr"
    right: "Expr"


Expr = Const | Var | Unary | Binary

_FUNCS = ("sin", "cos", "exp", "log")


def _tokenize(src: str) -> list[tuple[str, str, int]]:
    tokens = []
    i, n = 0, len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and src[i + 1].isdigit()):
            j = i
            while j < n and (src[j].isdigit() or src[j] == "."):
                j += 1
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k < n and src[k].isdigit():
                    j = k
                    while j < n and src[j].isdigit():
                        j += 1
            text = src[i:j]
            try:
                float(text)
            except ValueError:
                raise ParseError(f"bad number literal {text!r}", i) from None
            tokens.append(("num", text, i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            tokens.append(("ident", src[i:j], i))
            i = j
            continue
        if ch in "+-*/^()":
            tokens.append(("op", ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, symbol):
        kind, text, pos = self.peek()
        if kind != "op" or text != symbol:
            raise ParseError(f"expected {symbol!r}", pos)
        return self.take()

    def expr(self) -> Expr:
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.take()
                node = Binary(text, node, self.term())
            else:
                return node

    def term(self) -> Expr:
        node = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.take()
                node = Binary(text, node, self.unary())
            else:
                return node

    def unary(self) -> Expr:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.take()
            return Unary("neg", self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, text, pos = self.peek()
        if kind == "op" and text == "^":
            self.take()
            exponent = self.unary()
            if _contains_var(exponent):
                raise ParseError("exponent of '^' must be constant", pos)
            return Binary("^", base, exponent)
        return base

    def atom(self) -> Expr:
        kind, text, pos = self.take()
        if kind == "num":
            return Const(float(text))
        if kind == "ident":
            if text == "x":
                return Var()
            if text in _FUNCS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Unary(text, arg)
            raise UnknownSymbol(text, pos)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ParseError(f"unexpected token {text!r}" if text else "unexpected end of input", pos)


def _contains_var(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    if isinstance(e, Unary):
        return _contains_var(e.arg)
    if isinstance(e, Binary):
        return _contains_var(e.left) or _contains_var(e.right)
    return False


def parse(source: str) -> Expr:
    """Parse and constant-fold an expression in the single variable x."""
    parser = _Parser(_tokenize(source))
    node = parser.expr()
    kind, text, pos = parser.peek()
    if kind != "end":
        raise ParseError(f"trailing input {text!r}", pos)
    return fold(node)


def fold(e: Expr) -> Expr:
    """One bottom-up constant-folding pass; no algebraic rewriting beyond it."""
    if isinstance(e, (Const, Var)):
        return e
    if isinstance(e, Unary):
        arg = fold(e.arg)
        if e.op == "neg":
            if isinstance(arg, Const):
                return Const(-arg.value)
            if isinstance(arg, Unary) and arg.op == "neg":
                return arg.arg
            return Unary("neg", arg)
        if isinstance(arg, Const):
            folded = _try_const(Unary(e.op, arg))
            if folded is not None:
                return folded
        return Unary(e.op, arg)
    left, right = fold(e.left), fold(e.right)
    if isinstance(left, Const) and isinstance(right, Const):
        folded = _try_const(Binary(e.op, left, right))
        if folded is not None:
            return folded
    if e.op == "+":
        if _is_const(left, 0.0):
            return right
        if _is_const(right, 0.0):
            return left
    elif e.op == "-":
        if _is_const(right, 0.0):
            return left
        if _is_const(left, 0.0):
            return fold(Unary("neg", right))
    elif e.op == "*":
        if _is_const(left, 0.0) or _is_const(right, 0.0):
            return Const(0.0)
        if _is_const(left, 1.0):
            return right
        if _is_const(right, 1.0):
            return left
        if isinstance(left, Const) and isinstance(right, Binary) and right.op == "*" \
                and isinstance(right.left, Const):
            return fold(Binary("*", Const(left.value * right.left.value), right.right))
    elif e.op == "/":
        if _is_const(right, 1.0):
            return left
    elif e.op == "^":
        if _is_const(right, 1.0):
            return left
        if _is_const(right, 0.0):
            return Const(1.0)
    return Binary(e.op, left, right)


def _is_const(e: Expr, value: float) -> bool:
    return isinstance(e, Const) and e.value == value


def _try_const(e: Expr) -> Const | None:
    try:
        value = eval_expr(e, 0.0)
    except DomainError:
        return None
    if not math.isfinite(value):
        return None
    return Const(value)


def differentiate(e: Expr) -> Expr:
    """Exact symbolic derivative with respect to x, constant-folded."""
    return fold(_d(fold(e)))


def _d(e: Expr) -> Expr:
    if isinstance(e, Const):
        return Const(0.0)
    if isinstance(e, Var):
        return Const(1.0)
    if isinstance(e, Unary):
        da = _d(e.arg)
        if e.op == "neg":
            return Unary("neg", da)
        if e.op == "sin":
            return Binary("*", Unary("cos", e.arg), da)
        if e.op == "cos":
            return Unary("neg", Binary("*", Unary("sin", e.arg), da))
        if e.op == "exp":
            return Binary("*", Unary("exp", e.arg), da)
        return Binary("/", da, e.arg)  # log
    if e.op == "+":
        return Binary("+", _d(e.left), _d(e.right))
    if e.op == "-":
        return Binary("-", _d(e.left), _d(e.right))
    if e.op == "*":
        return Binary("+", Binary("*", _d(e.left), e.right),
                      Binary("*", e.left, _d(e.right)))
    if e.op == "/":
        num = Binary("-", Binary("*", _d(e.left), e.right),
                     Binary("*", e.left, _d(e.right)))
        return Binary("/", num, Binary("^", e.right, Const(2.0)))
    # power: exponent constant by construction
    if not isinstance(e.right, Const):
        raise ValueError("cannot differentiate a power with non-constant exponent")
    c = e.right.value
    scaled = Binary("*", Const(c), Binary("^", e.left, Const(c - 1.0)))
    return Binary("*", scaled, _d(e.left))


def eval_expr(e: Expr, x: float) -> float:
    """IEEE-754 evaluation at x; NaN/Inf propagate, poles raise DomainError."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return float(x)
    if isinstance(e, Unary):
        a = eval_expr(e.arg, x)
        if e.op == "neg":
            return -a
        if e.op == "sin":
            try:
                return math.sin(a)
            except ValueError:
                return math.nan
        if e.op == "cos":
            try:
                return math.cos(a)
            except ValueError:
                return math.nan
        if e.op == "exp":
            try:
                return math.exp(a)
            except OverflowError:
                return math.inf
        if a <= 0.0:
            raise DomainError(f"log of non-positive argument {a!r}")
        return math.log(a)
    left = eval_expr(e.left, x)
    right = eval_expr(e.right, x)
    if e.op == "+":
        return left + right
    if e.op == "-":
        return left - right
    if e.op == "*":
        return left * right
    if e.op == "/":
        if right == 0.0:
            raise DomainError("division by zero")
        return left / right
    try:
        return math.pow(left, right)
    except OverflowError:
        return math.inf
    except ValueError as exc:
        raise DomainError(f"invalid power: base {left!r}, exponent {right!r}") from exc


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary) and e.op == "neg":
        return 3
    return 5


def to_source(e: Expr) -> str:
    """Print with the minimal parentheses that preserve the tree structure."""
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Unary):
        if e.op == "neg":
            inner = to_source(e.arg)
            return "-" + (inner if _prec(e.arg) >= 3 else f"({inner})")
        return f"{e.op}({to_source(e.arg)})"
    p = _PREC[e.op]
    ls, rs = to_source(e.left), to_source(e.right)
    if e.op == "^":
        if _prec(e.left) <= 4:
            ls = f"({ls})"
        if _prec(e.right) < 4:
            rs = f"({rs})"
    else:
        if _prec(e.left) < p:
            ls = f"({ls})"
        if _prec(e.right) <= p:
            rs = f"({rs})"
    return f"{ls}{e.op}{rs}"


@dataclass(frozen=True)
class Potential:
    """V(x) together with its symbolic derivative; immutable and shareable."""

    v: Expr
    dv: Expr
    source: str = ""

    def value(self, x: float) -> float:
        return eval_expr(self.v, x)

    def gradient(self, x: float) -> float:
        return eval_expr(self.dv, x)


def parse_potential(source: str) -> Potential:
    """Parse V(x) and attach its symbolic derivative."""
    v = parse(source)
    return Potential(v=v, dv=differentiate(v), source=source)
