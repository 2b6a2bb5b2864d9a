import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from walkervsi import expr as ex

u, v, U, V = ex.COORD_SYMS

W = ex.FunctionSymbol("W", (ex.coordinate("u"),))
f = ex.FunctionSymbol("f", (ex.coordinate("u"), ex.coordinate("U")))
DECLARED = (W, f)
CONSTS = ("a", "c1")


# ---------------------------------------------------------------------------
# strategies: small expressions built from the grammar's atoms

atoms = st.sampled_from([
    sp.S.One, sp.S(2), sp.Rational(1, 3), u, v, U, V,
    ex.constant("a"), ex.constant("c1"), W(), f(), f.d("u"),
])


@st.composite
def exprs(draw, depth=2):
    if depth == 0:
        return draw(atoms)
    kind = draw(st.integers(0, 4))
    if kind == 0:
        return draw(atoms)
    a = draw(exprs(depth=depth - 1))
    b = draw(exprs(depth=depth - 1))
    if kind == 1:
        return a + b
    if kind == 2:
        return a * b
    if kind == 3:
        return a - b
    return a ** draw(st.integers(1, 2))


@settings(max_examples=60, deadline=None)
@given(exprs())
def test_canonicalize_idempotent(e):
    c = ex.canonicalize(e)
    assert ex.canonicalize(c) == c


@settings(max_examples=60, deadline=None)
@given(exprs())
def test_render_parse_round_trip(e):
    text = ex.render(ex.canonicalize(e))
    back = ex.parse(text, DECLARED, CONSTS)
    assert ex.is_zero(back - e)


@settings(max_examples=40, deadline=None)
@given(exprs(), exprs())
def test_is_zero_sound(a, b):
    assert ex.is_zero(ex.canonicalize(a + b) - a - b)


def test_parse_rejects_unknown_names():
    with pytest.raises(ex.ExprError):
        ex.parse("q + 1")


def test_substitute_function_rewrites_derivatives():
    h = ex.FunctionSymbol("h", (ex.coordinate("U"),))
    e = f.d("u") + f()
    out = ex.substitute(e, {f: h()})
    assert ex.is_zero(out - h())


def test_substitute_coordinate_cycle_rejected():
    with pytest.raises(ex.BindingCycleError):
        ex.substitute(u + 1, {ex.coordinate("u"): u + 1})


def test_eval_numeric():
    e = u**2 + 3 * v
    val = ex.eval_numeric(e, {"u": 2, "v": 1, "U": 1, "V": 1})
    assert abs(val - 7.0) < 1e-12


def test_logabs_derivative():
    e = ex.LogAbs(u)
    assert sp.simplify(sp.diff(e, u) - 1 / u) == 0
