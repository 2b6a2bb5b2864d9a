"""End-to-end acceptance checks, one test per criterion.

Each test is self-contained and exercises the full pipeline for one
deliverable behavior; `pytest -v` prints one pass/fail line per criterion.
"""

import random

import sympy as sp

from walkervsi import cartan as ca
from walkervsi import cli
from walkervsi import expr as ex
from walkervsi import frame as fr
from walkervsi import holonomy as ho
from walkervsi import tensor as tn
from walkervsi import walker as wk

from conftest import bundled, random_point, random_poly, random_spec

_u, _v, _U, _V = ex.COORD_SYMS


def _rf_consts():
    al, c1, c2, d = [sp.Symbol(s, positive=True) for s in ("alpha", "c1", "c2", "d")]
    return wk.Example1Constants(a=al * d / c1, alpha=al, beta=2 * al * c2 / c1,
                                c1=c1, c2=c2, d=d)


def test_criterion_01_recurrence_one_form():
    """The invariant-plane recurrence one-form equals its coefficient formula."""
    rng = random.Random(1)
    specs = [bundled("example1-generic"), bundled("example2-generic")]
    specs += [random_spec(rng).with_(B11=sp.S.Zero) for _ in range(4)]
    for spec in specs:
        k = wk.invariant_plane_check(spec)
        want = wk.expected_recurrence_form(spec)
        assert k.equal(want)
        assert ex.is_zero(k[(0,)] - (spec.C2 / 2 + spec.A1))
        assert ex.is_zero(k[(2,)] - (spec.B10 + spec.C11 / 2))


def test_criterion_02_example1_ricci_system():
    """One Ricci component; its vanishing is the two-constraint system; six
    degenerate constant patterns are Ricci-flat."""
    spec = wk.build_example1(wk.Example1Constants())
    resid = wk.ricci_flat_residuals(spec)
    assert len(resid) == 1
    _, val = resid[0]
    c = wk.Example1Constants()
    r1, r2 = c.constraint_residuals()
    # constraints => flat: substitute the solved constraints into the component
    sol = sp.solve([r1, r2],
                   [sp.Symbol("a", real=True), sp.Symbol("beta", real=True)],
                   dict=True)
    assert sol
    binding = {ex.constant(str(k)): e for k, e in sol[0].items()}
    assert ex.is_zero(ex.substitute(val, binding))
    # flat => constraints: the component must not vanish when either fails
    assert not ex.is_zero(val)
    for name in ("example1-ricciflat", "example1-sub1", "example1-sub2",
                 "example1-sub3", "example1-sub4", "example1-sub5",
                 "example1-c1eqc2"):
        assert wk.ricci_flat_residuals(bundled(name)) == [], name


def test_criterion_03_vsi_both_examples_with_control():
    """All 14 polynomial curvature invariants vanish for both model families;
    a perturbed non-member metric is caught as the control."""
    for name in ("example1-ricciflat", "example2-generic"):
        invs = tn.scalar_invariants(bundled(name).metric(), max_deriv_order=2)
        assert len(invs) == 14
        for label, val in invs:
            assert ex.is_zero(val), (name, label)
    control = tn.TensorField("ll", dict(wk.FLAT.metric().items()))
    control[(0, 0)] = _v**2
    control_invs = tn.scalar_invariants(control, max_deriv_order=0)
    assert any(not ex.is_zero(val) for _, val in control_invs)


def test_criterion_04_example2_curvature_components():
    """Frame curvature of the Kundt family is {2*B02, B10_u, Psi}; Psi's
    v- and V-dependence is an exact multiple of B10_u (verified, reported)."""
    spec = bundled("example2-generic")
    comps = ho.riemann_frame_components(spec.metric(),
                                        fr.NullFrame.from_walker(spec))
    psi = ho.psi_example2(spec)
    b10u = sp.diff(sp.sympify(spec.B10), _u)
    want = {("l1", "n2", "l1", "n2"): 2 * spec.B02,
            ("l1", "n1", "n1", "n2"): b10u,
            ("n1", "n2", "l2", "n2"): b10u,
            ("n1", "n2", "n1", "n2"): psi}
    assert set(comps) == set(want)
    for slot, val in want.items():
        assert ex.is_zero(ex.canonicalize(comps[slot] - val)), slot
    # report: Psi depends on (v, V) in general ...
    dv, dV = ho.psi_vV_dependence(spec)
    assert not (ex.is_zero(dv) and ex.is_zero(dV))
    # ... and is a function of (u, U) alone exactly on the B10_u = 0 branch
    h = ex.FunctionSymbol("h", (ex.coordinate("U"),))
    fsym = next(f for f in spec.functions if f.name == "f")
    dv0, dV0 = ho.psi_vV_dependence(spec.substitute({fsym: h()}))
    assert ex.is_zero(dv0) and ex.is_zero(dV0)


def test_criterion_05_holonomy_classification():
    """Holonomy closures: the non-Kundt family gives the two-dimensional
    non-abelian algebra (P-norms (-1, 0); curvature derivatives add nothing);
    the Kundt family gives the three expected branches."""
    spec = bundled("example1-ricciflat")
    g = spec.metric()
    frame = fr.NullFrame.from_walker(spec)
    alg = ho.infinitesimal_holonomy(g, frame)
    assert alg.dimension == 2
    basis = ho.fg_basis(frame, g)
    cols = sp.Matrix.hstack(*[ho._vectorize(b) for b in alg.basis])
    rank = cols.rank(iszerofunc=lambda e: ex.is_zero(e))

    def in_span(b):
        aug = sp.Matrix.hstack(cols, ho._vectorize(b))
        return aug.rank(iszerofunc=lambda e: ex.is_zero(e)) == rank

    # computed span: the anisotropic element has the PLUS relative sign
    # (the algebra is non-abelian, which forces it); the minus variant is
    # excluded deliberately and the deviation is recorded
    assert in_span(basis["G1"]) and in_span(basis["G2"])
    assert not in_span(basis["F1"])
    assert ex.is_zero(basis["G1"].p_norm() + 1)   # P-norm -1
    assert ex.is_zero(basis["G2"].p_norm())       # P-norm 0
    br = ho._commutator(basis["G1"], basis["G2"])
    assert not br.is_zero() and ho._proportional(br, basis["G2"])
    label, cert = ho.classify(alg)
    assert label == "WH-2(d)/A10"
    assert ho.infinitesimal_holonomy(g, frame, include_derivatives=1).dimension == 2
    # Kundt family branches
    assert ho.classify(ho.infinitesimal_holonomy(
        bundled("example2-generic").metric(),
        fr.NullFrame.from_walker(bundled("example2-generic"))))[0] == "A26"
    hU = ex.FunctionSymbol("h", (ex.coordinate("U"),))
    W = ex.FunctionSymbol("W", (ex.coordinate("u"),))
    Z = ex.FunctionSymbol("Z", (ex.coordinate("U"),))
    s17 = wk.build_example2(W=W, Z=Z, f=hU())
    assert ho.classify(ho.infinitesimal_holonomy(
        s17.metric(), fr.NullFrame.from_walker(s17)))[0] == "A17"
    s9 = wk.build_example2(B02=sp.S.One)
    assert ho.classify(ho.infinitesimal_holonomy(
        s9.metric(), fr.NullFrame.from_walker(s9)))[0] == "A9"


def test_criterion_06_recurrent_vector_fields():
    """Closed-form recurrent families: PDE residuals vanish on both branches,
    the two one-form components are reciprocal, distinct parameters give
    independent fields, and d/dV is recurrent (parallel iff B10 = 0)."""
    consts = _rf_consts()
    fam = ho.recurrent_family_example1(ex.constant("k1"), consts)
    r0, r1 = ho.recurrence_pde_residuals(fam.f, consts)
    assert ex.is_zero(r0) and ex.is_zero(r1)
    assert ex.is_zero(sp.simplify(fam.h - 1 / fam.f))
    assert ex.is_zero(sp.simplify(
        fam.h_raw - 2 * sp.sympify(consts.alpha) / sp.sympify(consts.c1) * fam.f))
    logc = wk.Example1Constants(a=sp.S.Zero, alpha=sp.S.Zero, beta=sp.S.Zero,
                                c1=consts.c1, c2=consts.c2, d=consts.d)
    lfam = ho.recurrent_family_example1(ex.constant("k1"), logc)
    lr0, lr1 = ho.recurrence_pde_residuals(lfam.f, logc)
    assert ex.is_zero(lr0) and ex.is_zero(lr1)
    f2 = ho.recurrent_family_example1(ex.constant("k2"), consts).f
    assert not ex.is_zero(sp.simplify(f2 - fam.f))   # independence
    g = wk.build_example1(consts).metric()
    ho.verify_recurrent(fam.vector_l1(), g)
    ho.verify_recurrent(fam.vector_l2(), g)
    # the Kundt family: nabla d/dV = B10 d/dV (x) dU, parallel iff B10 = 0
    spec = bundled("example2-generic")
    d_V = tn.TensorField("u", {(3,): sp.S.One})
    om = ho.verify_recurrent(d_V, spec.metric())
    assert ex.is_zero(om[(2,)] - spec.B10)
    assert all(ex.is_zero(om[(a,)]) for a in (0, 1, 3))
    W = ex.FunctionSymbol("W", (ex.coordinate("u"),))
    Z = ex.FunctionSymbol("Z", (ex.coordinate("U"),))
    assert ho.verify_recurrent(d_V, wk.build_example2(W=W, Z=Z).metric()).is_zero()


def test_criterion_07_kundt_biconditional():
    """Kundt membership is equivalent to the coefficient conditions, checked
    geometrically on 20 random specs; the Kundt family witness has vanishing
    kinematics and the non-Kundt family fails the screen-shear condition."""
    rng = random.Random(5)
    d_v = tn.TensorField("u", {(1,): sp.S.One})
    d_V = tn.TensorField("u", {(3,): sp.S.One})
    for trial in range(20):
        spec = random_spec(rng)
        g = spec.metric()
        along1 = wk.kinematics(d_V, g).is_kundt()
        along2 = wk.kinematics(d_v, g).is_kundt()
        assert along1 == ex.is_zero(spec.A2), trial
        assert along2 == all(ex.is_zero(x) for x in
                             (spec.B01, spec.B02, spec.B03, spec.B11)), trial
        want = {(True, True): wk.DOUBLY_KUNDT, (True, False): wk.KUNDT_ALONG_L1,
                (False, True): wk.KUNDT_ALONG_L2,
                (False, False): wk.NOT_KUNDT}[(along1, along2)]
        assert wk.kundt_classify(spec).verdict == want, trial
    kin = wk.kinematics(d_V, bundled("example2-generic").metric())
    assert kin.is_kundt()
    kin1 = wk.kinematics(d_V, bundled("example1-generic").metric())
    assert not kin1.is_shear_free()
    assert wk.kundt_classify(bundled("example1-generic")).verdict == wk.NOT_KUNDT


def test_criterion_08_transformation_engine_consistency():
    """The algebraic coefficient-transformation law agrees with recomputing
    from the transformed frame (symbolically for boosts and l-rotations on
    the constant-curvature subfamily, numerically to 1e-9 on 20 random
    draws); the discrete maps are involutive where claimed."""
    spec = bundled("example2-subcase")
    frame = fr.NullFrame.from_walker(spec)
    table = fr.spin_coefficients(frame)
    for M in (fr.boost_matrix(sp.Rational(2, 3), sp.S(3)),
              fr.rotation_l_matrix(sp.Rational(1, 2), sp.S(2)),
              fr.boost_matrix(_u, 1 + _U**2)):
        t_alg = fr.transform_table(table, M)
        t_geo = fr.spin_coefficients(frame.transformed(M), g=spec.metric())
        assert t_alg.equal(t_geo)
    rng = random.Random(8)
    for trial in range(20):
        rspec = random_spec(rng)
        rframe = fr.NullFrame.from_walker(rspec)
        p1 = sp.Rational(rng.randint(1, 5), rng.randint(1, 3))
        p2 = sp.Rational(rng.randint(1, 5), rng.randint(1, 3))
        M = (fr.boost_matrix(p1, p2) if trial % 2 == 0
             else fr.rotation_l_matrix(p1, p2))
        t_alg = fr.transform_table(fr.spin_coefficients(rframe), M)
        t_geo = fr.spin_coefficients(rframe.transformed(M), g=rspec.metric())
        point = random_point(rng)
        for nm in fr.ALL_NAMES:
            lhs = ex.eval_numeric(t_alg[nm], point)
            rhs = ex.eval_numeric(t_geo[nm], point)
            assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(rhs)), (trial, nm)
    # involutions and specialization of the constant boost
    t1 = fr.spin_coefficients(fr.NullFrame.from_walker(bundled("example1-ricciflat")))
    assert t1.prime().prime().equal(t1)
    assert t1.tilde().tilde().equal(t1)
    a, b = ex.constant("Ap"), ex.constant("Bp")
    boosted = fr.apply_boost(table, a, b)
    for nm, scale in (("gamma", a), ("alpha", b), ("sigmap", a * b**2),
                      ("kappap", a**2 * b), ("rhopt", a), ("kappapt", a**2 / b)):
        assert ex.is_zero(ex.canonicalize(boosted[nm] - scale * table[nm])), nm


def test_criterion_09_equivalence_algorithm_end_to_end():
    """The frame-fixing equivalence run on the constant-curvature subfamily
    terminates at order two with the recorded invariant counts, isotropy
    dimensions, and invariant values; second-order invariants are constant
    multiples of the coordinate derivatives of the first-order ones."""
    rep = ca.run(bundled("example2-subcase"))
    assert rep.family == "kundt-walker"
    assert rep.terminal_order == 2
    assert tuple(rep.t_history) == (0, 1, 1)
    assert tuple(rep.isotropy_history) == (2, 2, 2)
    orders = dict(rep.invariants)
    fixed = dict(rep.fixed_components)
    assert set(fixed) == {"R_l1n2l1n2", "R_n1n2n1n2"}
    assert all(ex.is_zero(ex.parse(val) - 1) for val in fixed.values())
    got1 = dict(orders[1])
    assert set(got1) == {"gamma", "gammat"}
    gamma = ex.parse(got1["gamma"])
    assert ex.is_zero(gamma - sp.S(2) ** sp.Rational(3, 4) * _U / 8)
    assert ex.is_zero(gamma + ex.parse(got1["gammat"]))
    got2 = dict(orders[2])
    assert set(got2) == {"d_n(gamma)", "d_n(gammat)"}
    ratio = ex.canonicalize(ex.parse(got2["d_n(gamma)"]) / sp.diff(gamma, _U))
    assert not ratio.free_symbols and not ex.is_zero(ratio)
    # an inequivalent member of the same family is distinguished
    other = ca.run(bundled("example2-subcase").with_(
        C11=ex.canonicalize(bundled("example2-subcase").C11 + 1)))
    assert isinstance(ca.compare(rep, other), ca.DistinguishedBy)
    assert isinstance(ca.compare(rep, ca.run(bundled("example2-subcase"))),
                      ca.CompatibleUpTo)


def test_criterion_10_property_suites():
    """Representatives of every property family: the two differential
    curvature identities, metric compatibility, symmetric second covariant
    derivatives, the finite-difference oracle, canonicalization idempotence,
    and the paired-coefficient relations under transformations."""
    rng = random.Random(10)
    spec = random_spec(rng)
    g = spec.metric()
    R = tn.riemann(g)
    import itertools
    for a, b, c, d in itertools.product(tn.IDX, repeat=4):
        assert ex.is_zero(R[(a, b, c, d)] + R[(a, c, d, b)] + R[(a, d, b, c)])
    dR = tn.covariant_derivative(R, g)
    for a, b, c, d, e in itertools.product(tn.IDX, repeat=5):
        assert ex.is_zero(dR[(a, b, c, d, e)] + dR[(a, b, d, e, c)]
                          + dR[(a, b, e, c, d)])
    assert tn.covariant_derivative(g, g).is_zero()
    s = random_poly(rng, degree=2)
    ds = tn.TensorField("l", {(a,): sp.diff(s, ex.COORD_SYMS[a]) for a in tn.IDX})
    H = tn.covariant_derivative(ds, g)
    for a in tn.IDX:
        for b in tn.IDX:
            assert ex.is_zero(H[(a, b)] - H[(b, a)])
    # finite-difference oracle on the connection
    from test_tensor import _fd_christoffel
    point = random_point(rng)
    Gam = tn.christoffel(g)
    fd = _fd_christoffel(spec, point)
    for idx in itertools.product(tn.IDX, repeat=3):
        assert abs(ex.eval_numeric(Gam[idx], point) - float(fd[idx])) < 1e-5
    # canonicalization idempotence
    for e in (s, (1 + _u)**2 - _u**2 - 2 * _u - 1, sp.exp(_u) * sp.exp(_U)):
        c = ex.canonicalize(e)
        assert ex.canonicalize(c) == c
    # paired-coefficient relations survive frame changes
    table = fr.spin_coefficients(fr.NullFrame.from_walker(bundled("example2-subcase")))
    for t in (table,
              fr.apply_boost(table, sp.Rational(3, 2), sp.Rational(-2, 5)),
              fr.apply_null_rotation_l(table, sp.S(2), sp.Rational(1, 3)),
              fr.apply_null_rotation_n(table, sp.S.One, sp.S(2)),
              fr.apply_discrete(table, fr.discrete_permutations()[1])):
        assert all(ex.is_zero(r) for r in t.law_residuals().values())
