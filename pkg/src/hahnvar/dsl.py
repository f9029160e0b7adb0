"""A small expression language for integrands and Lagrangians.

Grammar (whitespace-insensitive)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := base ('^' factor)?          # right-associative
    base   := number | var | fn '(' expr ')' | '(' expr ')' | '-' base

Variables are ``t`` and the slot values ``u0`` .. ``u9``; functions are
sin, cos, exp, ln, sqrt and abs.  Note that unary minus binds tighter
than '^', so ``-u0^2`` means ``(-u0)^2``.

Powers with an integer literal exponent are evaluated by repeated
multiplication, which keeps negative bases legal; any other exponent g
uses exp(g*ln(f)) and requires a positive base.

Partial derivatives are computed by forward-mode dual numbers, walking
the same tree as plain evaluation.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .errors import (
    ArityError,
    DomainError,
    ExprSyntaxError,
    NotDifferentiable,
    UnboundVariable,
    UnknownIdentifier,
)

FUNCTIONS = ("sin", "cos", "exp", "ln", "sqrt", "abs")

_VAR_RE = re.compile(r"^(t|u[0-9])$")


# ---------------------------------------------------------------------------
# Syntax tree
# ---------------------------------------------------------------------------

class Expr:
    """Base class for expression nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Number(Expr):
    value: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise ValueError("numeric literals must be finite")


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * / ^
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Call(Expr):
    fn: str
    operand: Expr


# ---------------------------------------------------------------------------
# Tokenizer and parser
# ---------------------------------------------------------------------------

_NUMBER_RE = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_OPS = set("+-*/^()")


@dataclass(frozen=True)
class _Token:
    kind: str  # "num", "ident", one of _OPS, or "end"
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    toks: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _OPS:
            toks.append(_Token(c, c, i))
            i += 1
            continue
        m = _NUMBER_RE.match(text, i)
        if m:
            toks.append(_Token("num", m.group(), i))
            i = m.end()
            continue
        m = _IDENT_RE.match(text, i)
        if m:
            toks.append(_Token("ident", m.group(), i))
            i = m.end()
            continue
        raise ExprSyntaxError(i, {"number", "identifier", "operator", "parenthesis"}, c)
    toks.append(_Token("end", "", n))
    return toks


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def take(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected: set[str]) -> None:
        tok = self.peek()
        raise ExprSyntaxError(tok.pos, expected, tok.text or "end of input")

    def expr(self) -> Expr:
        node = self.term()
        while self.peek().kind in ("+", "-"):
            op = self.take().kind
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek().kind in ("*", "/"):
            op = self.take().kind
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        node = self.base()
        if self.peek().kind == "^":
            self.take()
            node = BinOp("^", node, self.factor())
        return node

    def base(self) -> Expr:
        tok = self.peek()
        if tok.kind == "num":
            self.take()
            return Number(float(tok.text))
        if tok.kind == "ident":
            self.take()
            if self.peek().kind == "(":
                if tok.text not in FUNCTIONS:
                    raise UnknownIdentifier(tok.text, tok.pos)
                self.take()
                inner = self.expr()
                if self.peek().kind != ")":
                    self.fail({"')'"})
                self.take()
                return Call(tok.text, inner)
            if not _VAR_RE.match(tok.text):
                raise UnknownIdentifier(tok.text, tok.pos)
            return Var(tok.text)
        if tok.kind == "(":
            self.take()
            inner = self.expr()
            if self.peek().kind != ")":
                self.fail({"')'"})
            self.take()
            return inner
        if tok.kind == "-":
            self.take()
            return Neg(self.base())
        self.fail({"number", "identifier", "'('", "'-'"})
        raise AssertionError("unreachable")


def parse(text: str) -> Expr:
    parser = _Parser(_tokenize(text))
    node = parser.expr()
    if parser.peek().kind != "end":
        parser.fail({"end of input", "operator"})
    return node


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

# Binding strength used to decide parenthesization; mirrors the grammar.
_LEVEL_ADD, _LEVEL_MUL, _LEVEL_POW, _LEVEL_BASE = 1, 2, 3, 4


def _level(e: Expr) -> int:
    if isinstance(e, BinOp):
        if e.op in "+-":
            return _LEVEL_ADD
        if e.op in "*/":
            return _LEVEL_MUL
        return _LEVEL_POW
    return _LEVEL_BASE  # numbers, vars, calls and unary minus all parse as a base


def _wrap(e: Expr, minimum: int) -> str:
    s = to_string(e)
    return f"({s})" if _level(e) < minimum else s


def to_string(e: Expr) -> str:
    """Render with the fewest parentheses that preserve the parse tree."""
    if isinstance(e, Number):
        v = e.value
        if v.is_integer() and abs(v) < 1e16:
            return str(int(v))
        return repr(v)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return "-" + _wrap(e.operand, _LEVEL_BASE)
    if isinstance(e, Call):
        return f"{e.fn}({to_string(e.operand)})"
    if isinstance(e, BinOp):
        if e.op in "+-":
            return f"{_wrap(e.left, _LEVEL_ADD)} {e.op} {_wrap(e.right, _LEVEL_MUL)}"
        if e.op in "*/":
            return f"{_wrap(e.left, _LEVEL_MUL)}{e.op}{_wrap(e.right, _LEVEL_POW)}"
        # '^': the left slot of the grammar is a bare base, the right a factor.
        return f"{_wrap(e.left, _LEVEL_BASE)}^{_wrap(e.right, _LEVEL_POW)}"
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _literal_int_exponent(e: Expr) -> int | None:
    """Integer value of a literal (possibly negated) exponent, else None."""
    if isinstance(e, Number):
        if float(e.value).is_integer() and abs(e.value) <= 2**31:
            return int(e.value)
        return None
    if isinstance(e, Neg):
        inner = _literal_int_exponent(e.operand)
        return None if inner is None else -inner
    return None


def _finite(x: float) -> float:
    if not math.isfinite(x):
        raise DomainError("evaluation overflowed the finite range")
    return x


def _ipow(x, k: int):
    """x**k by repeated multiplication; works for floats and duals."""
    if k < 0:
        return _one_like(x) / _ipow(x, -k)
    result = _one_like(x)
    base = x
    while k:
        if k & 1:
            result = result * base
        k >>= 1
        if k:
            base = base * base
    return result


def _one_like(x):
    return Dual(1.0, 0.0) if isinstance(x, Dual) else 1.0


def evaluate(e: Expr, bindings: Mapping[str, float]) -> float:
    """Plain real evaluation under the given variable bindings."""
    if isinstance(e, Number):
        return e.value
    if isinstance(e, Var):
        try:
            return bindings[e.name]
        except KeyError:
            raise UnboundVariable(e.name) from None
    if isinstance(e, Neg):
        return -evaluate(e.operand, bindings)
    if isinstance(e, Call):
        return _call_real(e.fn, evaluate(e.operand, bindings))
    if isinstance(e, BinOp):
        left = evaluate(e.left, bindings)
        if e.op == "^":
            k = _literal_int_exponent(e.right)
            if k is not None:
                return _finite(_ipow(left, k))
            right = evaluate(e.right, bindings)
            if left <= 0.0:
                raise DomainError(
                    f"base {left!r} must be positive for a non-integer exponent"
                )
            return _call_real("exp", right * math.log(left))
        right = evaluate(e.right, bindings)
        if e.op == "+":
            return _finite(left + right)
        if e.op == "-":
            return _finite(left - right)
        if e.op == "*":
            return _finite(left * right)
        if right == 0.0:
            raise DomainError("division by zero")
        return _finite(left / right)
    raise TypeError(f"not an expression node: {e!r}")


def _call_real(fn: str, x: float) -> float:
    if fn == "sin":
        return math.sin(x)
    if fn == "cos":
        return math.cos(x)
    if fn == "exp":
        try:
            return math.exp(x)
        except OverflowError:
            raise DomainError(f"exp({x!r}) overflows") from None
    if fn == "ln":
        if x <= 0.0:
            raise DomainError(f"ln needs a positive argument, got {x!r}")
        return math.log(x)
    if fn == "sqrt":
        if x < 0.0:
            raise DomainError(f"sqrt needs a non-negative argument, got {x!r}")
        return math.sqrt(x)
    if fn == "abs":
        return abs(x)
    raise UnknownIdentifier(fn)


class Dual:
    """Value together with the derivative along one seed direction."""

    __slots__ = ("val", "dot")

    def __init__(self, val: float, dot: float):
        self.val = val
        self.dot = dot

    def __add__(self, other: "Dual") -> "Dual":
        return Dual(self.val + other.val, self.dot + other.dot)

    def __sub__(self, other: "Dual") -> "Dual":
        return Dual(self.val - other.val, self.dot - other.dot)

    def __mul__(self, other: "Dual") -> "Dual":
        return Dual(self.val * other.val, self.dot * other.val + self.val * other.dot)

    def __truediv__(self, other: "Dual") -> "Dual":
        if other.val == 0.0:
            raise DomainError("division by zero")
        v = self.val / other.val
        return Dual(v, (self.dot - v * other.dot) / other.val)

    def __neg__(self) -> "Dual":
        return Dual(-self.val, -self.dot)


def _eval_dual(e: Expr, bindings: Mapping[str, float], seed: str) -> Dual:
    if isinstance(e, Number):
        return Dual(e.value, 0.0)
    if isinstance(e, Var):
        try:
            v = bindings[e.name]
        except KeyError:
            raise UnboundVariable(e.name) from None
        return Dual(v, 1.0 if e.name == seed else 0.0)
    if isinstance(e, Neg):
        return -_eval_dual(e.operand, bindings, seed)
    if isinstance(e, Call):
        return _call_dual(e.fn, _eval_dual(e.operand, bindings, seed))
    if isinstance(e, BinOp):
        left = _eval_dual(e.left, bindings, seed)
        if e.op == "^":
            k = _literal_int_exponent(e.right)
            if k is not None:
                return _ipow(left, k)
            right = _eval_dual(e.right, bindings, seed)
            if left.val <= 0.0:
                raise DomainError(
                    f"base {left.val!r} must be positive for a non-integer exponent"
                )
            return _call_dual("exp", right * _call_dual("ln", left))
        right = _eval_dual(e.right, bindings, seed)
        if e.op == "+":
            return left + right
        if e.op == "-":
            return left - right
        if e.op == "*":
            return left * right
        return left / right
    raise TypeError(f"not an expression node: {e!r}")


def _call_dual(fn: str, x: Dual) -> Dual:
    if fn == "sin":
        return Dual(math.sin(x.val), math.cos(x.val) * x.dot)
    if fn == "cos":
        return Dual(math.cos(x.val), -math.sin(x.val) * x.dot)
    if fn == "exp":
        v = _call_real("exp", x.val)
        return Dual(v, v * x.dot)
    if fn == "ln":
        v = _call_real("ln", x.val)
        return Dual(v, x.dot / x.val)
    if fn == "sqrt":
        if x.val < 0.0:
            raise DomainError(f"sqrt needs a non-negative argument, got {x.val!r}")
        if x.val == 0.0:
            raise NotDifferentiable("sqrt has an infinite slope at 0")
        v = math.sqrt(x.val)
        return Dual(v, x.dot / (2.0 * v))
    if fn == "abs":
        if x.val == 0.0:
            raise NotDifferentiable("abs is not differentiable at 0")
        return Dual(abs(x.val), x.dot if x.val > 0.0 else -x.dot)
    raise UnknownIdentifier(fn)


def partial_eval(e: Expr, bindings: Mapping[str, float], var: str) -> float:
    """Forward-mode partial derivative of the expression with respect to var."""
    return _eval_dual(e, bindings, var).dot


# ---------------------------------------------------------------------------
# Compiled Lagrangians
# ---------------------------------------------------------------------------

def _emit(e: Expr) -> str:
    """Python source for the unchecked fast evaluation path."""
    if isinstance(e, Number):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{_emit(e.operand)})"
    if isinstance(e, Call):
        table = {
            "sin": "math.sin",
            "cos": "math.cos",
            "exp": "math.exp",
            "ln": "math.log",
            "sqrt": "math.sqrt",
            "abs": "abs",
        }
        return f"{table[e.fn]}({_emit(e.operand)})"
    if isinstance(e, BinOp):
        if e.op == "^":
            k = _literal_int_exponent(e.right)
            if k is not None:
                return f"({_emit(e.left)})**({k})"
            return f"math.exp(({_emit(e.right)})*math.log({_emit(e.left)}))"
        return f"({_emit(e.left)} {e.op} {_emit(e.right)})"
    raise TypeError(f"not an expression node: {e!r}")


def _max_slot_index(e: Expr) -> int:
    """Largest i with u<i> appearing in the expression, or -1."""
    if isinstance(e, Var):
        return int(e.name[1]) if e.name.startswith("u") else -1
    if isinstance(e, Neg):
        return _max_slot_index(e.operand)
    if isinstance(e, Call):
        return _max_slot_index(e.operand)
    if isinstance(e, BinOp):
        return max(_max_slot_index(e.left), _max_slot_index(e.right))
    return -1


@dataclass
class Lagrangian:
    """An expression read as L(t, u0, ..., ur) with the slot count fixed.

    Slot i holds the i-th operator iterate of the trajectory, so r is
    the problem order.  ``value`` prefers a compiled arithmetic path and
    falls back to the checked tree walk to produce precise errors.
    """

    expr: Expr
    order: int
    _fast: Callable | None = field(default=None, repr=False, compare=False)

    def arg_names(self) -> tuple[str, ...]:
        return ("t",) + tuple(f"u{i}" for i in range(self.order + 1))

    def _bindings(self, t: float, us) -> dict[str, float]:
        env = {"t": t}
        for i, u in enumerate(us):
            env[f"u{i}"] = u
        return env

    def value(self, t: float, us) -> float:
        if self._fast is None:
            src = f"lambda {', '.join(self.arg_names())}: {_emit(self.expr)}"
            self._fast = eval(src, {"math": math})
        try:
            v = self._fast(t, *us)
            if math.isfinite(v):
                return v
        except (ValueError, ZeroDivisionError, OverflowError):
            pass
        return evaluate(self.expr, self._bindings(t, us))

    def partial(self, i: int, t: float, us) -> float:
        """dL/du_i at (t, u0..ur)."""
        if not 0 <= i <= self.order:
            raise ArityError(f"slot u{i} is outside order {self.order}")
        return partial_eval(self.expr, self._bindings(t, us), f"u{i}")

    def __str__(self) -> str:
        return to_string(self.expr)


def compile_lagrangian(source: Expr | str, r: int) -> Lagrangian:
    """Check slot usage against the declared order and wrap the expression."""
    if not 1 <= r <= 9:
        raise ArityError(f"order r must be between 1 and 9, got {r!r}")
    expr = parse(source) if isinstance(source, str) else source
    top = _max_slot_index(expr)
    if top > r:
        raise ArityError(f"expression uses slot u{top} but the order is {r}")
    return Lagrangian(expr, r)
