"""Exact symbolic kernel: expressions over the (u, v, U, V) chart.

Expressions are sympy objects built from four chart coordinates, named
constants, declared function symbols (with unevaluated partial-derivative
atoms) and the special forms exp, log, tanh, sqrt, abs.  Function-symbol
instances and their distinct derivatives are treated as independent
indeterminates over Q(constants); canonicalization over this ring decides
every identity needed here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import sympy as sp
from sympy.printing.str import StrPrinter

Expr = sp.Expr


class ExprError(Exception):
    pass


class SyntaxError_(ExprError):
    """Bad input text; carries the byte offset of the failure."""

    def __init__(self, message, offset):
        super().__init__("at offset %d: %s" % (offset, message))
        self.offset = offset


class UndeclaredSymbolError(ExprError):
    def __init__(self, name, offset=-1):
        super().__init__("undeclared symbol %r" % name)
        self.name = name
        self.offset = offset


class BindingCycleError(ExprError):
    pass


class UnboundAtomError(ExprError):
    pass


class EvalDomainError(ExprError):
    pass


@dataclass(frozen=True)
class Coordinate:
    name: str
    index: int  # 1..4

    @property
    def symbol(self) -> sp.Symbol:
        return _COORD_SYMBOLS[self.name]

    def __str__(self):
        return self.name


_COORD_SYMBOLS = {n: sp.Symbol(n, real=True) for n in ("u", "v", "U", "V")}

u = Coordinate("u", 1)
v = Coordinate("v", 2)
U = Coordinate("U", 3)
V = Coordinate("V", 4)

COORDS = (u, v, U, V)
COORD_SYMS = tuple(c.symbol for c in COORDS)


def coordinate(name: str) -> Coordinate:
    for c in COORDS:
        if c.name == name:
            return c
    raise KeyError(name)


def constant(name: str) -> sp.Symbol:
    """A named exact constant (never a float)."""
    return sp.Symbol(name, real=True)


class LogAbs(sp.Function):
    """log|x| with d/dx log|x| = 1/x."""

    nargs = 1

    def fdiff(self, argindex=1):
        return 1 / self.args[0]

    @classmethod
    def eval(cls, arg):
        if arg is sp.S.One:
            return sp.S.Zero
        return None


@dataclass(frozen=True)
class FunctionSymbol:
    """A declared arbitrary analytic function of a subset of the chart."""

    name: str
    args: tuple  # tuple of Coordinate

    def __post_init__(self):
        if len(set(a.name for a in self.args)) != len(self.args):
            raise ExprError("repeated argument in declaration of %s" % self.name)

    @property
    def head(self):
        return sp.Function(self.name, real=True)

    def __call__(self) -> Expr:
        return self.head(*[a.symbol for a in self.args])

    # convenience: F.d(u, U) -> unevaluated partial derivative atom
    def d(self, *coords) -> Expr:
        syms = []
        for c in coords:
            c = coordinate(c) if isinstance(c, str) else c
            if c not in self.args:
                return sp.S.Zero
            syms.append(c.symbol)
        return sp.Derivative(self(), *syms)


def diff(e: Expr, x) -> Expr:
    """Partial derivative with respect to a chart coordinate."""
    x = coordinate(x) if isinstance(x, str) else x
    sym = x.symbol if isinstance(x, Coordinate) else x
    return canonicalize(sp.diff(sp.sympify(e), sym))


def canonicalize(e: Expr) -> Expr:
    """Flatten to a sum of monomials with exact rational coefficients."""
    e = sp.sympify(e)
    return sp.powsimp(sp.expand(e))


@lru_cache(maxsize=None)
def _is_zero_cached(e: Expr) -> bool:
    c = canonicalize(e)
    if c is sp.S.Zero or c == 0:
        return True
    r = sp.cancel(sp.together(c))
    if r == 0:
        return True
    r = sp.simplify(r)
    if r == 0:
        return True
    # tanh / exp / log closure: rewrite hyperbolics through exp and retry
    r = sp.simplify(sp.cancel(sp.together(r.rewrite(sp.exp))))
    return r == 0


def is_zero(e) -> bool:
    """True iff e is identically zero over the indeterminate ring."""
    return _is_zero_cached(sp.sympify(e))


def equal(a, b) -> bool:
    return is_zero(sp.sympify(a) - sp.sympify(b))


def substitute(e: Expr, bindings: dict) -> Expr:
    """Substitute and re-canonicalize.

    Keys may be coordinates, constants, or function-symbol instances;
    substituting for a function symbol rewrites its derivative atoms by
    differentiating the replacement.
    """
    e = sp.sympify(e)
    norm = {}
    for k, val in bindings.items():
        if isinstance(k, Coordinate):
            k = k.symbol
        elif isinstance(k, FunctionSymbol):
            k = k()
        k = sp.sympify(k)
        val = sp.sympify(val)
        if k.is_Symbol and k in _COORD_SYMBOLS.values() and k in val.free_symbols:
            raise BindingCycleError("coordinate %s bound to expression containing it" % k)
        norm[k] = val
    if not norm:
        return canonicalize(e)
    return canonicalize(e.subs(norm, simultaneous=True).doit())


def _normalize_point(point):
    out = {}
    for k, val in (point or {}).items():
        if isinstance(k, Coordinate):
            k = k.symbol
        elif isinstance(k, FunctionSymbol):
            k = k()
        elif isinstance(k, str):
            k = _COORD_SYMBOLS.get(k, sp.Symbol(k, real=True))
        out[sp.sympify(k)] = sp.Float(val) if not isinstance(val, sp.Expr) else val
    return out


def eval_numeric(e: Expr, point: dict, funcs: dict | None = None) -> float:
    """IEEE-double evaluation; every atom of e must be bound.

    `point` binds coordinates and named constants; `funcs` binds
    function-symbol instances and their derivative atoms.
    """
    e = sp.sympify(e)
    repl = _normalize_point(funcs)
    if repl:
        # derivative atoms first so they are not differentiated away
        derivs = {k: v for k, v in repl.items() if isinstance(k, sp.Derivative)}
        others = {k: v for k, v in repl.items() if not isinstance(k, sp.Derivative)}
        e = e.xreplace(derivs).xreplace(others)
    e = e.xreplace(_normalize_point(point))
    from sympy.core.function import AppliedUndef

    if e.atoms(sp.Derivative) or e.atoms(AppliedUndef):
        raise UnboundAtomError("unbound function atoms in %s" % e)
    val = e.evalf()
    if val.free_symbols:
        raise UnboundAtomError("unbound symbols %s" % val.free_symbols)
    cval = complex(val)
    if cval != cval or abs(cval) == float("inf"):
        raise EvalDomainError("evaluation produced %s" % val)
    if abs(cval.imag) > 1e-12 * max(1.0, abs(cval.real)):
        raise EvalDomainError("evaluation left the real line: %s" % val)
    return cval.real


# ---------------------------------------------------------------------------
# parsing


_SPECIAL = {"exp": sp.exp, "log": sp.log, "tanh": sp.tanh, "sqrt": sp.sqrt, "abs": sp.Abs}


class _Parser:
    def __init__(self, text, functions, constants):
        self.text = text
        self.pos = 0
        self.functions = functions  # name -> FunctionSymbol
        self.constants = constants  # name -> Symbol

    def error(self, msg):
        raise SyntaxError_(msg, self.pos)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def accept(self, ch):
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def expect(self, ch):
        if not self.accept(ch):
            self.error("expected %r" % ch)

    def parse(self):
        e = self.expr()
        self.skip_ws()
        if self.pos != len(self.text):
            self.error("trailing input")
        return e

    def expr(self):
        e = self.term()
        while True:
            if self.accept("+"):
                e = e + self.term()
            elif self.accept("-"):
                e = e - self.term()
            else:
                return e

    def term(self):
        e = self.factor()
        while True:
            if self.accept("*"):
                e = e * self.factor()
            elif self.accept("/"):
                e = e / self.factor()
            else:
                return e

    def factor(self):
        if self.accept("-"):
            return -self.factor()
        if self.accept("+"):
            return self.factor()
        return self.power()

    def power(self):
        base = self.atom()
        if self.accept("^"):
            return base ** self.factor()
        return base

    def atom(self):
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            e = self.expr()
            self.expect(")")
            return e
        if ch.isdigit():
            return self.number()
        if ch.isalpha():
            return self.identifier()
        self.error("unexpected character %r" % ch)

    def number(self):
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        return sp.Integer(int(self.text[start : self.pos]))

    def _ident(self):
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
            if self.text[self.pos] == "_" and self.pos + 1 < len(self.text) and self.text[self.pos + 1] == "{":
                break
            self.pos += 1
        return self.text[start : self.pos], start

    def _coord_list(self):
        coords = []
        while True:
            name, off = self._ident()
            if name not in _COORD_SYMBOLS:
                self.pos = off
                self.error("expected coordinate name, got %r" % name)
            coords.append(coordinate(name))
            if not self.accept(","):
                return coords

    def identifier(self):
        name, start = self._ident()
        if not name:
            self.error("expected identifier")
        nxt = self.peek()
        if name == "diff" and nxt == "(":
            self.pos += 1
            inner = self.expr()
            self.expect(",")
            coords = self._coord_list()
            self.expect(")")
            e = inner
            for c in coords:
                e = sp.diff(e, c.symbol)
            return e
        if name in _SPECIAL:
            if nxt != "(":
                self.error("special form %s requires an argument" % name)
            self.pos += 1
            arg = self.expr()
            self.expect(")")
            if name == "log" and isinstance(arg, sp.Abs):
                return LogAbs(arg.args[0])
            return _SPECIAL[name](arg)
        if name in _COORD_SYMBOLS:
            return _COORD_SYMBOLS[name]
        fs = self.functions.get(name)
        if fs is not None:
            if self.pos < len(self.text) and self.text[self.pos : self.pos + 2] == "_{":
                self.pos += 2
                coords = self._coord_list()
                self.expect("}")
                return fs.d(*coords)
            if nxt == "(":
                self.pos += 1
                coords = self._coord_list()
                self.expect(")")
                if tuple(coords) != fs.args:
                    self.pos = start
                    self.error("function %s declared with arguments (%s)" % (name, ",".join(a.name for a in fs.args)))
                return fs()
            return fs()
        if name in self.constants:
            return self.constants[name]
        raise UndeclaredSymbolError(name, start)


def parse(text: str, declared=(), constants=()) -> Expr:
    """Parse the ASCII expression grammar.

    `declared` is an iterable of FunctionSymbol; `constants` an iterable of
    constant names or Symbols.
    """
    funcs = {f.name: f for f in declared}
    consts = {}
    for c in constants:
        if isinstance(c, str):
            consts[c] = constant(c)
        else:
            consts[str(c)] = c
    return canonicalize(_Parser(text, funcs, consts).parse())


# ---------------------------------------------------------------------------
# rendering (round-trips through parse)


class _Renderer(StrPrinter):
    def _print_Pow(self, expr, rational=False):
        b, e = expr.base, expr.exp
        if e is sp.S.Half:
            return "sqrt(%s)" % self._print(b)
        return "(%s)^(%s)" % (self._print(b), self._print(e))

    def _print_LogAbs(self, expr):
        return "log(abs(%s))" % self._print(expr.args[0])

    def _print_Abs(self, expr):
        return "abs(%s)" % self._print(expr.args[0])

    def _print_Derivative(self, expr):
        f = expr.expr
        from sympy.core.function import AppliedUndef

        if isinstance(f, AppliedUndef):
            coords = []
            for var, count in expr.variable_count:
                coords.extend([str(var)] * int(count))
            return "%s_{%s}" % (f.func.__name__, ",".join(coords))
        coords = []
        for var, count in expr.variable_count:
            coords.extend([str(var)] * int(count))
        return "diff(%s,%s)" % (self._print(f), ",".join(coords))

    def _print_Function(self, expr):
        from sympy.core.function import AppliedUndef

        if isinstance(expr, AppliedUndef):
            return "%s(%s)" % (expr.func.__name__, ",".join(self._print(a) for a in expr.args))
        return super()._print_Function(expr)

    def _print_ExpBase(self, expr):
        return "exp(%s)" % self._print(expr.args[0])


def render(e: Expr) -> str:
    """Grammar-conformant text for e; parse(render(e)) == canonicalize(e)."""
    return _Renderer().doprint(sp.sympify(e))


def rational(p, q=1):
    return sp.Rational(p, q)


def as_fraction(e) -> Fraction:
    e = sp.sympify(e)
    if not e.is_Rational:
        raise ExprError("not an exact rational: %s" % e)
    return Fraction(int(e.p), int(e.q))
