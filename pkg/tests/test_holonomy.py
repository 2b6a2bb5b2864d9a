import random

import pytest
import sympy as sp

from walkervsi import expr as ex
from walkervsi import frame as fr
from walkervsi import holonomy as ho
from walkervsi import tensor as tn
from walkervsi import walker as wk

from conftest import bundled

_u, _v, _U, _V = ex.COORD_SYMS


def _rf_consts():
    """Ricci-flat constants with positivity (needed to cancel nested roots)."""
    al, c1, c2, d = [sp.Symbol(s, positive=True) for s in ("alpha", "c1", "c2", "d")]
    return wk.Example1Constants(a=al * d / c1, alpha=al, beta=2 * al * c2 / c1,
                                c1=c1, c2=c2, d=d)


def _frame(spec):
    return fr.NullFrame.from_walker(spec)


def _span_contains(alg, biv):
    """True if the bivector lies in the span of the algebra basis."""
    cols = [ho._vectorize(b) for b in alg.basis]
    M = sp.Matrix.hstack(*cols)
    target = ho._vectorize(biv)
    aug = sp.Matrix.hstack(M, target)
    r = M.rank(iszerofunc=lambda e: ex.is_zero(e))
    return aug.rank(iszerofunc=lambda e: ex.is_zero(e)) == r


# ---------------------------------------------------------------------------
# bivector machinery


def test_bivector_duality_split():
    spec = bundled("flat")
    g = spec.metric()
    basis = ho.fg_basis(_frame(spec), g)
    for b in basis.values():
        sd, asd = ho.self_dual_split(b, g)
        assert b.equal(sd.add(asd))
        assert ho.dual(sd, g).equal(sd)
        assert ho.dual(asd, g).equal(asd.scale(-1))


def test_flat_holonomy_trivial():
    spec = bundled("flat")
    alg = ho.infinitesimal_holonomy(spec.metric(), _frame(spec))
    assert alg.dimension == 0


# ---------------------------------------------------------------------------
# the non-Kundt example


def test_example1_closure_dim2_and_span():
    spec = bundled("example1-ricciflat")
    g = spec.metric()
    frame = _frame(spec)
    alg = ho.infinitesimal_holonomy(g, frame)
    assert alg.dimension == 2
    basis = ho.fg_basis(frame, g)
    plus = basis["G1"]       # (l1^n1 + l2^n2)/2
    minus = basis["F1"]      # (l1^n1 - l2^n2)/2
    null_elt = basis["G2"]   # (l1^l2)/2
    assert _span_contains(alg, plus)
    assert _span_contains(alg, null_elt)
    # the opposite-relative-sign combination is NOT in the algebra; with it
    # the algebra would be abelian, and the computed bracket is not
    assert not _span_contains(alg, minus)
    br = ho._commutator(plus, null_elt)
    assert not br.is_zero()
    assert ho._proportional(br, null_elt)


def test_example1_classification():
    spec = bundled("example1-ricciflat")
    alg = ho.infinitesimal_holonomy(spec.metric(), _frame(spec))
    label, cert = ho.classify(alg)
    assert label == "WH-2(d)/A10"
    assert ex.is_zero(cert["S_norm"])
    assert not ex.is_zero(cert["K_norm"])


def test_example1_derivatives_add_nothing():
    spec = bundled("example1-ricciflat")
    g = spec.metric()
    frame = _frame(spec)
    alg0 = ho.infinitesimal_holonomy(g, frame, include_derivatives=0)
    alg1 = ho.infinitesimal_holonomy(g, frame, include_derivatives=1)
    assert alg1.dimension == alg0.dimension == 2


def test_example1_common_eigenvectors():
    spec = bundled("example1-ricciflat")
    alg = ho.infinitesimal_holonomy(spec.metric(), _frame(spec))
    evs = ho.common_eigenvectors(alg)
    got = {tuple(sorted(dict(v.items()))) for v in evs}
    assert got == {((1,),), ((3,),)}  # exactly d/dv and d/dV


def test_xi_scalar_factor():
    consts = _rf_consts()
    spec = wk.build_example1(consts)
    g = spec.metric()
    frame = _frame(spec)
    xi = ho.xi_example1(consts)
    basis = ho.fg_basis(frame, g)
    endos = {e.label: e for e in ho.curvature_endomorphisms(g, frame)}
    # R(.,.,l1,n1) = -xi l1^l2 = -2 xi G2
    assert endos["R(l1,n1)"].equal(basis["G2"].scale(-2 * xi))


# ---------------------------------------------------------------------------
# the Kundt example branches


def test_example2_generic_branch_a26():
    spec = bundled("example2-generic")
    alg = ho.infinitesimal_holonomy(spec.metric(), _frame(spec))
    label, _ = ho.classify(alg)
    assert alg.dimension == 3
    assert label == "A26"


def test_example2_b10u_branch_a17():
    h = ex.FunctionSymbol("h", (ex.coordinate("U"),))
    W = ex.FunctionSymbol("W", (ex.coordinate("u"),))
    Z = ex.FunctionSymbol("Z", (ex.coordinate("U"),))
    spec = wk.build_example2(W=W, Z=Z, f=h())
    alg = ho.infinitesimal_holonomy(spec.metric(), _frame(spec))
    label, _ = ho.classify(alg)
    assert alg.dimension == 2
    assert label == "A17"


def test_example2_psi_zero_branch_a9():
    spec = wk.build_example2(B02=sp.S.One)
    alg = ho.infinitesimal_holonomy(spec.metric(), _frame(spec))
    label, _ = ho.classify(alg)
    assert alg.dimension == 1
    assert label == "A9"


# ---------------------------------------------------------------------------
# recurrence


def test_dv_recurrent_kundt_form():
    spec = bundled("example2-generic")
    d_V = tn.TensorField("u", {(3,): sp.S.One})
    om = ho.verify_recurrent(d_V, spec.metric())
    # nabla d/dV = B10 d/dV (x) dU
    assert ex.is_zero(om[(2,)] - spec.B10)
    assert all(ex.is_zero(om[(a,)]) for a in (0, 1, 3))


def test_dv_parallel_iff_b10_zero():
    W = ex.FunctionSymbol("W", (ex.coordinate("u"),))
    Z = ex.FunctionSymbol("Z", (ex.coordinate("U"),))
    spec = wk.build_example2(W=W, Z=Z)  # B10 = 0
    d_V = tn.TensorField("u", {(3,): sp.S.One})
    om = ho.verify_recurrent(d_V, spec.metric())
    assert om.is_zero()
    spec2 = bundled("example2-generic")
    assert not ho.verify_recurrent(d_V, spec2.metric()).is_zero()


def test_dv_not_recurrent_example1():
    spec = bundled("example1-generic")
    d_V = tn.TensorField("u", {(3,): sp.S.One})
    with pytest.raises(ho.HolonomyError):
        ho.verify_recurrent(d_V, spec.metric())


def test_recurrence_pdes_tanh_branch():
    consts = _rf_consts()
    fam = ho.recurrent_family_example1(ex.constant("k1"), consts)
    assert fam.branch == "tanh"
    r0, r1 = ho.recurrence_pde_residuals(fam.f, consts)
    assert ex.is_zero(r0) and ex.is_zero(r1)
    # reciprocal identification and raw form
    assert ex.is_zero(sp.simplify(fam.h - 1 / fam.f))
    assert ex.is_zero(sp.simplify(
        fam.h_raw - 2 * sp.sympify(consts.alpha) / sp.sympify(consts.c1) * fam.f))


def test_recurrence_pdes_log_branch():
    consts = wk.Example1Constants(
        a=sp.S.Zero, alpha=sp.S.Zero, beta=sp.S.Zero)
    fam = ho.recurrent_family_example1(ex.constant("k1"), consts)
    assert fam.branch == "log"
    r0, r1 = ho.recurrence_pde_residuals(fam.f, consts)
    assert ex.is_zero(r0) and ex.is_zero(r1)


def test_log_branch_is_alpha_to_zero_limit():
    consts = _rf_consts()
    fam = ho.recurrent_family_example1(ex.constant("k1"), consts, branch="tanh")
    lim = sp.limit(fam.f, sp.sympify(consts.alpha), 0, "+")
    logc = wk.Example1Constants(a=sp.S.Zero, alpha=sp.S.Zero, beta=sp.S.Zero,
                                c1=consts.c1, c2=consts.c2, d=consts.d)
    flog = ho.recurrent_family_example1(ex.constant("k1"), logc).f
    assert ex.is_zero(sp.simplify(lim - flog))


def test_family_vectors_recurrent_on_metric():
    consts = _rf_consts()
    g = wk.build_example1(consts).metric()
    fam = ho.recurrent_family_example1(ex.constant("k1"), consts)
    ho.verify_recurrent(fam.vector_l1(), g)
    ho.verify_recurrent(fam.vector_l2(), g)


def test_distinct_parameters_give_independent_vectors():
    consts = _rf_consts()
    f1 = ho.recurrent_family_example1(ex.constant("k1"), consts).f
    f2 = ho.recurrent_family_example1(ex.constant("k2"), consts).f
    det = sp.simplify(f2 - f1)  # det of [[1, f1], [1, f2]]
    assert not ex.is_zero(det)


# ---------------------------------------------------------------------------
# frame components of the curvature


def test_example2_frame_components_and_psi():
    spec = bundled("example2-generic")
    comps = ho.riemann_frame_components(spec.metric(), _frame(spec))
    psi = ho.psi_example2(spec)
    b10u = sp.diff(sp.sympify(spec.B10), _u)
    vals = {("l1", "n2", "l1", "n2"): 2 * spec.B02,
            ("l1", "n1", "n1", "n2"): b10u,
            ("n1", "n2", "l2", "n2"): b10u,
            ("n1", "n2", "n1", "n2"): psi}
    assert set(comps) == set(vals)
    for slot, want in vals.items():
        assert ex.is_zero(ex.canonicalize(comps[slot] - want)), slot


def test_psi_vv_dependence_tracks_b10u():
    spec = bundled("example2-generic")
    dv, dV = ho.psi_vV_dependence(spec)
    assert not ex.is_zero(dv) or not ex.is_zero(dV)
    h = ex.FunctionSymbol("h", (ex.coordinate("U"),))
    fsym = next(f for f in spec.functions if f.name == "f")
    fixed = spec.substitute({fsym: h()})
    dv0, dV0 = ho.psi_vV_dependence(fixed)
    assert ex.is_zero(dv0) and ex.is_zero(dV0)
