"""The Walker metric family

    ds^2 = 2du(dv + A du + C dU) + 2dU(dV + B dU)

with A = v*A1 + V*A2 + A0, B = V*B10 + v^3*B03 + v^2*B02 + v*B01 + B00
(+ v*V*B11 for the general Kundt proposition shape) and
C = v*C11 + V*C2 + C0; Ricci-flat model families, the invariant-plane
recurrence, kinematic scalars and the Kundt classification.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, replace

import sympy as sp

from . import expr as ex
from . import tensor as tn

_u, _v, _U, _V = ex.COORD_SYMS


class WalkerError(Exception):
    pass


@dataclass(frozen=True)
class WalkerSpec:
    """Coefficient functions of the Walker family, as symbolic expressions."""

    A0: sp.Expr = sp.S.Zero
    A1: sp.Expr = sp.S.Zero
    A2: sp.Expr = sp.S.Zero
    B00: sp.Expr = sp.S.Zero
    B01: sp.Expr = sp.S.Zero
    B02: sp.Expr = sp.S.Zero
    B03: sp.Expr = sp.S.Zero
    B10: sp.Expr = sp.S.Zero
    B11: sp.Expr = sp.S.Zero
    C0: sp.Expr = sp.S.Zero
    C11: sp.Expr = sp.S.Zero
    C2: sp.Expr = sp.S.Zero
    family: str = "general"  # general | example1 | example2 | flat
    functions: tuple = ()  # declared FunctionSymbols (for parsing/rendering)
    constants: tuple = ()  # declared constant names

    def __post_init__(self):
        for name in COEFF_KEYS:
            e = sp.sympify(getattr(self, name))
            bad = e.free_symbols & {_v, _V}
            if bad:
                raise WalkerError("coefficient %s may not depend on %s" % (name, bad))
            object.__setattr__(self, name, e)

    @property
    def A(self):
        return ex.canonicalize(_v * self.A1 + _V * self.A2 + self.A0)

    @property
    def B(self):
        return ex.canonicalize(
            _V * self.B10 + _v * _V * self.B11 + _v**3 * self.B03 + _v**2 * self.B02 + _v * self.B01 + self.B00
        )

    @property
    def C(self):
        return ex.canonicalize(_v * self.C11 + _V * self.C2 + self.C0)

    def metric(self) -> tn.TensorField:
        A, B, C = self.A, self.B, self.C
        comps = {
            (0, 0): 2 * A,
            (0, 1): sp.S.One,
            (1, 0): sp.S.One,
            (0, 2): C,
            (2, 0): C,
            (2, 2): 2 * B,
            (2, 3): sp.S.One,
            (3, 2): sp.S.One,
        }
        return tn.TensorField("ll", comps)

    def with_(self, **kw):
        return replace(self, **kw)

    def substitute(self, bindings) -> "WalkerSpec":
        kw = {k: ex.substitute(getattr(self, k), bindings) for k in COEFF_KEYS}
        return replace(self, **kw)


COEFF_KEYS = ("A0", "A1", "A2", "B00", "B01", "B02", "B03", "B10", "B11", "C0", "C11", "C2")

FLAT = WalkerSpec(family="flat")


@dataclass(frozen=True)
class Example1Constants:
    a: sp.Expr = ex.constant("a")
    alpha: sp.Expr = ex.constant("alpha")
    beta: sp.Expr = ex.constant("beta")
    c1: sp.Expr = ex.constant("c1")
    c2: sp.Expr = ex.constant("c2")
    d: sp.Expr = ex.constant("d")

    def constraint_residuals(self):
        """The two algebraic Ricci-flatness constraints."""
        a, al, be, c1, c2, d = self.a, self.alpha, self.beta, self.c1, self.c2, self.d
        return (
            ex.canonicalize(be * c1 - 2 * al * c2),
            ex.canonicalize(2 * a * c1 + be * d - 2 * c2 * a - 2 * al * d),
        )

    def is_ricci_flat(self) -> bool:
        return all(ex.is_zero(r) for r in self.constraint_residuals())

    def names(self):
        out = set()
        for val in (self.a, self.alpha, self.beta, self.c1, self.c2, self.d):
            out |= {str(s) for s in sp.sympify(val).free_symbols}
        return tuple(sorted(out))


def build_example1(c: Example1Constants) -> WalkerSpec:
    """The B02 = 0 family with the simple closed-form coefficient functions."""
    a, al, be, c1, c2, d = c.a, c.alpha, c.beta, c.c1, c.c2, c.d
    C2 = 2 * a * _u + be / _U
    C11 = c1 / _u + d * _U
    return WalkerSpec(
        A1=C2 / 2,
        A2=a * _U + al / _u,
        B10=C11 / 2,
        B01=(c2 / _U + d * _u) / 2,
        C2=C2,
        C11=C11,
        family="example1",
        constants=c.names(),
    )


def build_example2(W=None, Z=None, G=sp.S.Zero, f=None, B01=sp.S.Zero, B00=sp.S.Zero, C0=sp.S.Zero, B02=None, B10=None) -> WalkerSpec:
    """The Kundt family: B02 != 0, A2 = C2 = 0, Ricci-flat by construction.

    B02 defaults to exp(W(u))*exp(Z(U)); B10 defaults to f.  W, Z, G, f may
    be FunctionSymbols or expressions.
    """

    def val(x):
        if isinstance(x, ex.FunctionSymbol):
            return x()
        return sp.sympify(x) if x is not None else None

    W, Z, G, f, B01, B00, C0, B02, B10 = map(val, (W, Z, G, f, B01, B00, C0, B02, B10))
    if B02 is None:
        if W is None or Z is None:
            raise WalkerError("need either B02 or the pair (W, Z)")
        B02 = sp.exp(W) * sp.exp(Z)
    if ex.is_zero(B02):
        raise WalkerError("example 2 requires B02 != 0")
    if B10 is None:
        B10 = f if f is not None else sp.S.Zero
    A1 = ex.canonicalize(sp.diff(sp.log(B02), _u) / 2)
    C11 = ex.canonicalize(2 * B10 + sp.diff(sp.log(B02), _U) + G)
    A0 = ex.canonicalize(
        (-2 * B10 * C11 - 4 * A1 * B01 + 4 * sp.diff(B01, _u) - 2 * sp.diff(C11, _U) + C11**2) / (8 * B02)
    )
    fns = set()
    for e in (B02, B10, B01, B00, C0, G):
        for f_ in e.atoms(sp.Function):
            if isinstance(f_, sp.core.function.AppliedUndef):
                fns.add(ex.FunctionSymbol(f_.func.__name__, tuple(ex.coordinate(str(a)) for a in f_.args)))
    return WalkerSpec(
        A0=A0,
        A1=A1,
        B00=B00,
        B01=B01,
        B02=B02,
        B10=B10,
        C0=C0,
        C11=C11,
        family="example2",
        functions=tuple(sorted(fns, key=lambda s: s.name)),
    )


def ricci_flat_residuals(spec: WalkerSpec):
    """Nonzero Ricci components, as named residuals of the Ricci-flat system."""
    names = ("u", "v", "U", "V")
    ric = tn.ricci(spec.metric())
    out = []
    for (a, b), val in sorted(ric.items()):
        if a <= b:
            out.append(("R_%s%s" % (names[a], names[b]), val))
    return out


def invariant_plane_check(spec: WalkerSpec):
    """Factor nabla(l1 ^ l2) = (l1 ^ l2) (x) k; returns the one-form k."""
    g = spec.metric()
    w = tn.TensorField("ll", {(0, 2): sp.S.One, (2, 0): sp.S.NegativeOne})
    dw = tn.covariant_derivative(w, g)
    k = tn.TensorField("l", {(c,): dw[(0, 2, c)] for c in tn.IDX})
    # residual check: dw must equal w (x) k
    resid = dw - tn.tensor_product(w, k)
    if not resid.is_zero():
        raise WalkerError("nabla(l1 ^ l2) does not factor through l1 ^ l2")
    return k


def expected_recurrence_form(spec: WalkerSpec) -> tn.TensorField:
    return tn.TensorField(
        "l",
        {
            (0,): ex.canonicalize(spec.C2 / 2 + spec.A1),
            (2,): ex.canonicalize(spec.B10 + spec.C11 / 2),
        },
    )


@dataclass
class KinematicScalars:
    expansion: sp.Expr
    shear: tuple             # residual entries of the trace-free symmetric
                             # screen part (component-wise, not a contraction:
                             # squared norms can cancel in split signature)
    twist: sp.Expr
    geodesic_residual: tn.TensorField

    def is_geodesic(self):
        return self.geodesic_residual.is_zero()

    def is_expansion_free(self):
        return ex.is_zero(self.expansion)

    def is_shear_free(self):
        return all(ex.is_zero(s) for s in self.shear)

    def is_twist_free(self):
        return ex.is_zero(self.twist)

    def is_kundt(self):
        return (
            self.is_geodesic()
            and self.is_expansion_free()
            and self.is_shear_free()
            and self.is_twist_free()
        )


def _screen_basis(Xl):
    """Two vectors spanning the screen space of a null one-form.

    The kernel of the one-form is three-dimensional and contains the null
    direction itself; any kernel pair with an invertible Gram block spans
    the two-dimensional screen quotient.
    """
    row = sp.Matrix([[sp.sympify(Xl[(a,)]) for a in tn.IDX]])
    null = row.nullspace(iszerofunc=lambda e: ex.is_zero(e))
    if len(null) != 3:
        raise WalkerError("degenerate null direction")
    return [tn.TensorField("u", {(a,): tn._clean(vec[a]) for a in tn.IDX
                                 if not ex.is_zero(vec[a])})
            for vec in null]


def kinematics(X: tn.TensorField, g: tn.TensorField) -> KinematicScalars:
    """Expansion, shear and twist of a null vector field X.

    All three are computed from the screen-projected deformation tensor,
    component-wise; squared-norm scalars are avoided because they can vanish
    on nonzero tensors in split signature.
    """
    ginv = tn.inverse_metric(g)
    Xl = tn.lower_index(X, g, 0)
    norm = sum(X[(a,)] * Xl[(a,)] for a in tn.IDX)
    if not ex.is_zero(norm):
        raise WalkerError("kinematics requires a null vector field")
    dX = tn.covariant_derivative(Xl, g)  # X_{a;b}

    def deform(x, y):
        return tn._clean(sum(x[(a,)] * dX[(a, b)] * y[(b,)]
                             for a in tn.IDX for b in tn.IDX
                             if x[(a,)] != 0 and y[(b,)] != 0))

    # pick a kernel pair with invertible Gram block: the screen space
    kernel = _screen_basis(Xl)
    pair = None
    for i in range(3):
        for j in range(i + 1, 3):
            x, y = kernel[i], kernel[j]
            gram = sp.Matrix([[tn.full_contraction(tn.lower_index(x, g, 0), x),
                               tn.full_contraction(tn.lower_index(x, g, 0), y)],
                              [tn.full_contraction(tn.lower_index(y, g, 0), x),
                               tn.full_contraction(tn.lower_index(y, g, 0), y)]])
            if not ex.is_zero(gram.det()):
                pair = (x, y, gram)
                break
        if pair:
            break
    if pair is None:
        raise WalkerError("no nondegenerate screen block for this direction")
    x, y, gram = pair
    S = sp.Matrix([[deform(x, x), deform(x, y)],
                   [deform(y, x), deform(y, y)]])
    sym = (S + S.T) / 2
    hinv = gram.inv()
    theta = tn._clean(sum(hinv[i, j] * sym[i, j] for i in range(2) for j in range(2)))
    shear_m = sym - theta / 2 * gram
    shear = tuple(tn._clean(shear_m[i, j]) for i in range(2) for j in range(i, 2))
    twist = tn._clean((S[0, 1] - S[1, 0]) / 2)
    # geodesic residual: (X^b nabla_b X^a) wedge X
    acc = tn.TensorField("u", clean=False)
    dXv = tn.raise_index(dX, ginv, 0)  # X^a_{;b}
    for a in tn.IDX:
        acc[(a,)] = tn._clean(sum(dXv[(a, b)] * X[(b,)] for b in tn.IDX))
    resid = tn.TensorField("uu", clean=False)
    for a in tn.IDX:
        for b in tn.IDX:
            resid[(a, b)] = tn._clean(acc[(a,)] * X[(b,)] - acc[(b,)] * X[(a,)])
    return KinematicScalars(theta, shear, twist, resid)


KUNDT_ALONG_L1 = "KundtAlongL1"
KUNDT_ALONG_L2 = "KundtAlongL2"
DOUBLY_KUNDT = "DoublyKundt"
NOT_KUNDT = "NotKundt"


@dataclass
class KundtVerdict:
    verdict: str
    witnesses: tuple  # vector fields (TensorField 'u')

    def __str__(self):
        return self.verdict


def kundt_classify(spec: WalkerSpec) -> KundtVerdict:
    """Kundt dichotomy for the Walker family.

    Along the v-plane the obstruction is A_{,V} (= A2); along the V-plane it
    is B_{,v} = B_{,vv} = B_{,vvv} = 0 (= B01, B02, B03).  Every verdict is
    re-validated by running the kinematic scalars on the witness.
    """
    g = spec.metric()
    d_v = tn.TensorField("u", {(1,): sp.S.One})
    d_V = tn.TensorField("u", {(3,): sp.S.One})
    # calibrated witness map: A2 = 0  <=>  d/dV is Kundt;
    # B01 = B02 = B03 = 0 (and B11 = 0)  <=>  d/dv is Kundt.
    along1 = ex.is_zero(spec.A2)
    along2 = all(ex.is_zero(x) for x in (spec.B01, spec.B02, spec.B03, spec.B11))
    witnesses = []
    if along1:
        witnesses.append(d_V)
    if along2:
        witnesses.append(d_v)
    if along1 and along2:
        verdict = DOUBLY_KUNDT
    elif along1:
        verdict = KUNDT_ALONG_L1
    elif along2:
        verdict = KUNDT_ALONG_L2
    else:
        verdict = NOT_KUNDT
    for w in witnesses:
        if not kinematics(w, g).is_kundt():
            raise WalkerError("internal: Kundt witness failed kinematic check")
    return KundtVerdict(verdict, tuple(witnesses))


# ---------------------------------------------------------------------------
# metric-spec text files


def load_spec(path_or_text, is_text=False) -> WalkerSpec:
    cp = configparser.ConfigParser(allow_no_value=True)
    cp.optionxform = str
    if is_text:
        cp.read_string(path_or_text)
    else:
        with open(path_or_text) as fh:
            cp.read_string(fh.read())
    if cp.has_section("coordinates"):
        declared = [k for k in cp["coordinates"]]
        if declared and declared != ["u", "v", "U", "V"]:
            raise WalkerError("chart must declare coordinates u, v, U, V")
    funcs = []
    if cp.has_section("functions"):
        for name, args in cp["functions"].items():
            coords = tuple(ex.coordinate(a.strip()) for a in args.split(",") if a.strip())
            funcs.append(ex.FunctionSymbol(name, coords))
    consts = []
    if cp.has_section("constants"):
        consts = [k for k in cp["constants"]]
    kw = {}
    if cp.has_section("metric"):
        for key, text in cp["metric"].items():
            if key not in COEFF_KEYS:
                raise WalkerError("unknown metric key %r" % key)
            kw[key] = ex.parse(text, funcs, consts)
    family = "general"
    if cp.has_section("flags"):
        family = cp["flags"].get("family", "general")
    return WalkerSpec(family=family, functions=tuple(funcs), constants=tuple(consts), **kw)


def dump_spec(spec: WalkerSpec) -> str:
    out = io.StringIO()
    out.write("[coordinates]\nu\nv\nU\nV\n\n")
    if spec.functions:
        out.write("[functions]\n")
        for f in spec.functions:
            out.write("%s = %s\n" % (f.name, ",".join(a.name for a in f.args)))
        out.write("\n")
    if spec.constants:
        out.write("[constants]\n")
        for c in spec.constants:
            out.write("%s\n" % c)
        out.write("\n")
    out.write("[metric]\n")
    for k in COEFF_KEYS:
        out.write("%s = %s\n" % (k, ex.render(getattr(spec, k))))
    out.write("\n[flags]\nfamily = %s\n" % spec.family)
    return out.getvalue()
