"""Bivector algebra, infinitesimal holonomy, and recurrent vector fields.

Curvature endomorphisms R(.,.,X,Y) for frame-vector pairs generate a Lie
algebra under the commutator (closure computed by symbolic rank).  The
classifier recognizes the handful of subalgebra patterns realized by the
bundled metric families and emits a structural certificate; everything else
is reported as other(dim).
"""

from __future__ import annotations

import dataclasses
import itertools

import sympy as sp

from . import expr as ex
from . import tensor as tn


class HolonomyError(Exception):
    pass


FRAME_LABELS = ("l1", "n1", "l2", "n2")


# ---------------------------------------------------------------------------
# bivectors


class Bivector:
    """Antisymmetric rank-2 tensor with (0,2), (2,0) and (1,1) views."""

    def __init__(self, ll: tn.TensorField, g: tn.TensorField, label: str = ""):
        if ll.valence != "ll":
            raise HolonomyError("bivector storage must be all-lower rank 2")
        for a in tn.IDX:
            for b in tn.IDX:
                if not ex.is_zero(ll[(a, b)] + ll[(b, a)]):
                    raise HolonomyError("components are not antisymmetric")
        self.ll = ll
        self.g = g
        self.label = label
        self._uu = None
        self._endo = None

    @classmethod
    def from_wedge_forms(cls, p: tn.TensorField, q: tn.TensorField, g,
                         label: str = "") -> "Bivector":
        """(p ^ q)_{ab} = p_a q_b - q_a p_b for one-forms p, q."""
        comps = {}
        for a in tn.IDX:
            for b in tn.IDX:
                val = p[(a,)] * q[(b,)] - q[(a,)] * p[(b,)]
                if val != 0:
                    comps[(a, b)] = val
        return cls(tn.TensorField("ll", comps), g, label)

    @classmethod
    def from_wedge_vectors(cls, p: tn.TensorField, q: tn.TensorField, g,
                           label: str = "") -> "Bivector":
        """Lower the wedge (p ^ q)^{ab} = p^a q^b - q^a p^b of two vectors."""
        comps = {}
        for a in tn.IDX:
            for b in tn.IDX:
                val = p[(a,)] * q[(b,)] - q[(a,)] * p[(b,)]
                if val != 0:
                    comps[(a, b)] = val
        t = tn.TensorField("uu", comps)
        t = tn.lower_index(tn.lower_index(t, g, 0), g, 1)
        return cls(t, g, label)

    def uu(self) -> tn.TensorField:
        if self._uu is None:
            ginv = tn.inverse_metric(self.g)
            self._uu = tn.raise_all(self.ll, ginv)
        return self._uu

    def endo(self) -> sp.Matrix:
        """(1,1) view F^a_{~b} as a matrix (row = upper index)."""
        if self._endo is None:
            ginv = tn.inverse_metric(self.g)
            m = tn.raise_index(self.ll, ginv, 0)
            self._endo = sp.Matrix(tn.DIM, tn.DIM,
                                   lambda a, b: sp.sympify(m[(a, b)]))
        return self._endo

    def matrix_rank(self) -> int:
        return self.endo().rank(iszerofunc=lambda e: ex.is_zero(e))

    def is_zero(self) -> bool:
        return self.ll.is_zero()

    def is_simple(self) -> bool:
        return self.matrix_rank() == 2

    def p_inner(self, other: "Bivector") -> sp.Expr:
        """P(F, G) = F^{ab} G_{ab}."""
        return tn.full_contraction(other.ll, self.uu())

    def p_norm(self) -> sp.Expr:
        return self.p_inner(self)

    def add(self, other: "Bivector") -> "Bivector":
        return Bivector(self.ll + other.ll, self.g)

    def scale(self, c) -> "Bivector":
        return Bivector(self.ll.scale(c), self.g)

    def equal(self, other: "Bivector") -> bool:
        return self.ll.equal(other.ll)


def _epsilon_lower(g) -> dict:
    """Volume form eps_{abcd} = s * sqrt(|det g|) * sgn(perm)."""
    det = tn.metric_determinant(g)
    root = sp.sqrt(sp.Abs(det)) if not det.is_number else sp.sqrt(abs(det))
    from sympy.combinatorics import Permutation
    out = {}
    for perm in itertools.permutations(range(4)):
        out[perm] = Permutation(perm).signature() * root
    return out


# global orientation choice, calibrated so that F1 (see fg_basis) is
# self-dual; validated in the test suite
DUAL_SIGN = 1


def dual(F: Bivector, g=None) -> Bivector:
    """Hodge dual F*_{ab} = (1/2) eps_{abcd} F^{cd}; squares to +1 here."""
    if g is None:
        g = F.g
    eps = _epsilon_lower(g)
    uu = F.uu()
    comps = {}
    for (c, d), val in uu.items():
        for a in tn.IDX:
            for b in tn.IDX:
                e = eps.get((a, b, c, d))
                if e is not None:
                    key = (a, b)
                    comps[key] = comps.get(key, sp.S.Zero) + \
                        sp.Rational(DUAL_SIGN, 2) * e * val
    return Bivector(tn.TensorField("ll", comps), g, label=F.label + "*")


def self_dual_split(F: Bivector, g=None):
    Fd = dual(F, g)
    half = sp.Rational(1, 2)
    plus = F.add(Fd).scale(half)
    minus = F.add(Fd.scale(-1)).scale(half)
    return plus, minus


def fg_basis(frame, g=None):
    """The standard self-dual / anti-self-dual basis from a null frame.

    F1 = (l ^ n - L ^ N)/2, F2 = (l ^ N)/2, F3 = (n ^ L)/2  (self-dual)
    G1 = (l ^ n + L ^ N)/2, G2 = (l ^ L)/2, G3 = (n ^ N)/2  (anti-self-dual)
    with (l, n, L, N) the raised coframe vectors (l1, n1, l2, n2).
    """
    if g is None:
        g = frame.g
    v = frame.raised()
    l, n, L, N = v["l1"], v["n1"], v["l2"], v["n2"]
    W = lambda p, q, lab: Bivector.from_wedge_vectors(p, q, g, lab).scale(
        sp.Rational(1, 2))
    out = {
        "F1": W(l, n, "F1").add(W(L, N, "").scale(-1)),
        "F2": W(l, N, "F2"),
        "F3": W(n, L, "F3"),
        "G1": W(l, n, "G1").add(W(L, N, "")),
        "G2": W(l, L, "G2"),
        "G3": W(n, N, "G3"),
    }
    for k, b in out.items():
        b.label = k
    return out


# ---------------------------------------------------------------------------
# curvature endomorphisms and Lie closure


def curvature_endomorphisms(g, frame, include_derivatives: int = 0,
                            keep_zero: bool = False):
    """R_{abcd} X^c Y^d for the 6 frame pairs, plus derivative contractions.

    include_derivatives = k adds contractions of the first k covariant
    derivatives of the curvature with frame vectors in the extra slots.
    """
    if include_derivatives not in (0, 1, 2):
        raise HolonomyError("include_derivatives must be 0, 1 or 2")
    vecs = frame.raised()
    R = tn.riemann(g)
    out = []

    def contract_tail(T, labels):
        comps = {}
        for idx, val in T.items():
            term = val
            for k, lab in enumerate(labels):
                c = vecs[lab][(idx[2 + k],)]
                if c == 0:
                    term = sp.S.Zero
                    break
                term = term * c
            if term != 0:
                key = idx[:2]
                comps[key] = comps.get(key, sp.S.Zero) + term
        return tn.TensorField("ll", comps)

    tensors = [R]
    cur = R
    for _ in range(include_derivatives):
        cur = tn.covariant_derivative(cur, g)
        tensors.append(cur)
    for depth, T in enumerate(tensors):
        nslots = 2 + depth
        for labels in itertools.product(FRAME_LABELS, repeat=nslots):
            if depth == 0 and labels[0] >= labels[1]:
                continue  # antisymmetric pair, keep one order
            biv = Bivector(contract_tail(T, labels), g,
                           label="R(%s)" % ",".join(labels))
            if keep_zero or not biv.is_zero():
                out.append(biv)
    return out


@dataclasses.dataclass
class HolonomyAlgebra:
    basis: list            # list of Bivector (reduced basis)
    dimension: int
    g: object
    frame: object
    generators: list = dataclasses.field(default_factory=list)
    closure_depth: int = 0

    def brackets(self):
        out = {}
        for i, x in enumerate(self.basis):
            for j, y in enumerate(self.basis):
                if i < j:
                    out[(i, j)] = _commutator(x, y)
        return out


def _commutator(x: Bivector, y: Bivector) -> Bivector:
    m = x.endo() * y.endo() - y.endo() * x.endo()
    comps = {}
    for a in tn.IDX:
        for b in tn.IDX:
            val = tn._clean(m[a, b])
            if val != 0:
                comps[(a, b)] = val
    t = tn.TensorField("ul", comps)
    return Bivector(tn.lower_index(t, x.g, 0), x.g, label="[%s,%s]" % (x.label, y.label))


def _vectorize(b: Bivector):
    m = b.endo()
    return sp.Matrix([m[i, j] for i in range(4) for j in range(4)])


def _reduce_basis(bivs, g):
    """Row-echelon reduction of endomorphism vectors over the symbolic field."""
    kept = []
    vecs = []
    for b in bivs:
        if b.is_zero():
            continue
        cand = vecs + [_vectorize(b)]
        M = sp.Matrix.hstack(*cand)
        r = M.rank(iszerofunc=lambda e: ex.is_zero(e))
        if r == len(cand):
            kept.append(b)
            vecs.append(cand[-1])
    return kept


def lie_closure(gens, g=None, frame=None, max_depth: int = 6) -> HolonomyAlgebra:
    if not gens:
        return HolonomyAlgebra([], 0, g, frame, [])
    if g is None:
        g = gens[0].g
    basis = _reduce_basis(gens, g)
    depth = 0
    while True:
        new = list(basis)
        for x, y in itertools.combinations(basis, 2):
            new.append(_commutator(x, y))
        reduced = _reduce_basis(new, g)
        if len(reduced) == len(basis):
            basis = reduced
            break
        basis = reduced
        depth += 1
        if depth > max_depth:
            raise HolonomyError("Lie closure did not stabilize")
    return HolonomyAlgebra(basis, len(basis), g, frame, list(gens), depth)


def infinitesimal_holonomy(g, frame, include_derivatives: int = 0) -> HolonomyAlgebra:
    gens = curvature_endomorphisms(g, frame, include_derivatives)
    return lie_closure(gens, g, frame)


# ---------------------------------------------------------------------------
# classification


def _is_nilpotent(M: sp.Matrix) -> bool:
    P = M
    for _ in range(4):
        if all(ex.is_zero(P[i, j]) for i in range(4) for j in range(4)):
            return True
        P = P * M
    return False


def classify(alg: HolonomyAlgebra):
    """Label the algebra against the named subalgebra patterns.

    Returns (label, certificate).  Patterns recognized:
      dim 1, simple nilpotent generator                        -> A9
      dim 2, one anisotropic element (P-norm -1 after scaling)
             plus a P-null simple element S with [K,S] ~ S     -> WH-2(d)/A10
      dim 2, all elements P-null, simple, abelian              -> A17
      dim 3, nilpotent-radical pattern of the Kundt family     -> A26
    Anything else -> other(dim).
    """
    dim = alg.dimension
    cert = {"dimension": dim}
    if dim == 0:
        return "trivial", cert
    norms = [b.p_norm() for b in alg.basis]
    simples = [b.is_simple() for b in alg.basis]
    nilp = [_is_nilpotent(b.endo()) for b in alg.basis]
    cert["p_norms"] = norms
    cert["simple"] = simples
    cert["nilpotent"] = nilp
    if dim == 1:
        if simples[0] and nilp[0]:
            return "A9", cert
        return "other(1)", cert
    if dim == 2:
        x, y = alg.basis
        br = _commutator(x, y)
        cert["bracket_zero"] = br.is_zero()
        # try to find the (K, S) arrangement of WH-2(d)/A10
        for K, S in ((x, y), (y, x)):
            if ex.is_zero(S.p_norm()) and S.is_simple() and \
                    not ex.is_zero(K.p_norm()):
                if br.is_zero() or _proportional(br, S):
                    cert["K_norm"] = K.p_norm()
                    cert["S_norm"] = S.p_norm()
                    return "WH-2(d)/A10", cert
        if all(ex.is_zero(nm) for nm in norms) and all(simples) and \
                cert["bracket_zero"]:
            return "A17", cert
        return "other(2)", cert
    if dim == 3:
        allnull = [b for b in alg.basis]
        nnil = sum(1 for b in alg.basis if _is_nilpotent(b.endo()))
        cert["n_nilpotent"] = nnil
        if nnil >= 2:
            return "A26", cert
        return "other(3)", cert
    return "other(%d)" % dim, cert


def _proportional(a: Bivector, b: Bivector) -> bool:
    ratio = None
    for i in tn.IDX:
        for j in tn.IDX:
            av, bv = sp.sympify(a.ll[(i, j)]), sp.sympify(b.ll[(i, j)])
            az, bz = ex.is_zero(av), ex.is_zero(bv)
            if az != bz:
                return False
            if not az:
                r = sp.simplify(av / bv)
                if ratio is None:
                    ratio = r
                elif not ex.is_zero(r - ratio):
                    return False
    return True


# ---------------------------------------------------------------------------
# eigenvectors and recurrence


def _subspace_intersection(A: sp.Matrix, B: sp.Matrix) -> sp.Matrix:
    """Columns spanning col(A) intersect col(B)."""
    M = sp.Matrix.hstack(A, -B)
    null = M.nullspace(iszerofunc=lambda e: ex.is_zero(e))
    cols = []
    for vec in null:
        c = vec[: A.shape[1], 0]
        cols.append(A * c)
    if not cols:
        return sp.zeros(4, 0)
    S = sp.Matrix.hstack(*cols)
    # prune to independent columns
    keep = []
    for k in range(S.shape[1]):
        cand = keep + [S[:, k]]
        if sp.Matrix.hstack(*cand).rank(iszerofunc=lambda e: ex.is_zero(e)) == len(cand):
            keep.append(S[:, k])
    return sp.Matrix.hstack(*keep) if keep else sp.zeros(4, 0)


def common_eigenvectors(alg: HolonomyAlgebra):
    """Directions that are eigenvectors of every basis endomorphism.

    Returns a list of coordinate-component vector fields (TensorField, upper
    valence), one per one-dimensional common eigendirection; for common
    eigenspaces of higher dimension, a basis of the subspace is returned.
    """
    if alg.dimension == 0:
        return [tn.TensorField("u", {(a,): sp.S.One}) for a in tn.IDX]
    spaces = [sp.eye(4)]
    for b in alg.basis:
        M = b.endo()
        eig = M.eigenvects(iszerofunc=lambda e: ex.is_zero(e))
        eigenspaces = []
        for _val, _mult, vecs in eig:
            eigenspaces.append(sp.Matrix.hstack(*vecs))
        new_spaces = []
        for S in spaces:
            for E in eigenspaces:
                inter = _subspace_intersection(S, E)
                if inter.shape[1] > 0:
                    new_spaces.append(inter)
        spaces = new_spaces
        if not spaces:
            return []
    out = []
    seen = []
    for S in spaces:
        for k in range(S.shape[1]):
            col = sp.simplify(S[:, k])
            nz = [i for i in range(4) if not ex.is_zero(col[i])]
            if not nz:
                continue
            col = sp.simplify(col / col[nz[0]])
            if any((col - c).is_zero_matrix for c in seen):
                continue
            seen.append(col)
            out.append(tn.TensorField(
                "u", {(i,): tn._clean(col[i]) for i in range(4)
                      if not ex.is_zero(col[i])}))
    return out


def verify_recurrent(X: tn.TensorField, g: tn.TensorField):
    """Factor nabla X = X (x) omega; returns the one-form omega.

    Raises HolonomyError if the covariant derivative does not factor
    through X.  A parallel field is the omega == 0 case.
    """
    if X.valence != "u":
        raise HolonomyError("expected a vector field (upper valence)")
    dX = tn.covariant_derivative(X, g)  # valence "ul"
    pivot = None
    for a in tn.IDX:
        if not ex.is_zero(X[(a,)]):
            pivot = a
            break
    if pivot is None:
        raise HolonomyError("zero vector field")
    omega = {}
    for b in tn.IDX:
        val = tn._clean(sp.cancel(sp.sympify(dX[(pivot, b)]) / X[(pivot,)]))
        if val != 0:
            omega[(b,)] = val
    w = tn.TensorField("l", omega)
    for a in tn.IDX:
        for b in tn.IDX:
            if not ex.is_zero(dX[(a, b)] - X[(a,)] * w[(b,)]):
                raise HolonomyError("covariant derivative does not factor "
                                    "through the vector field")
    return w


# ---------------------------------------------------------------------------
# the closed-form recurrent families of the non-Kundt example


@dataclasses.dataclass
class RecurrentFamily:
    f: sp.Expr                 # component of  d/dv + f d/dV
    h: sp.Expr                 # component of  h d/dv + d/dV
    h_raw: sp.Expr             # the (2 alpha / c1) f form before the
                               # reciprocal identification
    branch: str                # "tanh" (alpha != 0) or "log" (alpha == 0)

    def vector_l1(self) -> tn.TensorField:
        return tn.TensorField("u", {(1,): sp.S.One, (3,): tn._clean(self.f)})

    def vector_l2(self) -> tn.TensorField:
        return tn.TensorField("u", {(1,): tn._clean(self.h), (3,): sp.S.One})


def recurrence_pde_residuals(f, constants) -> tuple:
    """The two first-order PDEs a recurrent d/dv + f d/dV must satisfy."""
    u, U = ex.COORD_SYMS[0], ex.COORD_SYMS[2]
    al, c1, c2, d = constants.alpha, constants.c1, constants.c2, constants.d
    f = sp.sympify(f)
    r0 = f**2 * al * (d * u * U / c1 + 1) - c1 / sp.S(2) - d * u * U / 2 \
        - u * sp.diff(f, u)
    r1 = f**2 * al * (d * u * U / c1 + sp.S(c2) / c1) - sp.S(c2) / 2 \
        - d * u * U / 2 - U * sp.diff(f, U)
    return tn._clean(r0), tn._clean(r1)


def recurrent_family_example1(k0, constants, branch=None) -> RecurrentFamily:
    """Closed-form recurrent vector pair for the non-Kundt example.

    branch "tanh" requires alpha != 0; branch "log" is the alpha == 0 case.
    When branch is None it is chosen from the constants.
    """
    u, U = ex.COORD_SYMS[0], ex.COORD_SYMS[2]
    al, c1, c2, d = (sp.sympify(constants.alpha), sp.sympify(constants.c1),
                     sp.sympify(constants.c2), sp.sympify(constants.d))
    k0 = sp.sympify(k0)
    phase = c1 * ex.LogAbs(u) + c2 * ex.LogAbs(U) + d * u * U + k0
    if branch is None:
        branch = "log" if ex.is_zero(al) else "tanh"
    if branch == "tanh":
        if ex.is_zero(al):
            raise HolonomyError("tanh branch needs alpha != 0")
        f = -sp.sqrt(c1 / (2 * al)) * sp.tanh(sp.sqrt(al / (2 * c1)) * phase)
    elif branch == "log":
        if not ex.is_zero(al):
            raise HolonomyError("log branch needs alpha == 0")
        f = -phase / 2
    else:
        raise HolonomyError("unknown branch %r" % branch)
    h = 1 / f
    h_raw = 2 * al / c1 * f if branch == "tanh" else h
    return RecurrentFamily(f=f, h=h, h_raw=h_raw, branch=branch)


def riemann_frame_components(g, frame):
    """Distinct nonzero Riemann components contracted onto frame vectors.

    Returns {(label_a, label_b, label_c, label_d): value} keeping one
    representative per symmetry orbit (a<b, c<d, (a,b)<=(c,d) in the order
    of FRAME_LABELS).
    """
    R = tn.riemann(g)
    vecs = frame.raised()
    out = {}
    for combo in itertools.product(range(4), repeat=4):
        a, b, c, d = combo
        if a >= b or c >= d or (a, b) > (c, d):
            continue
        tot = sp.S.Zero
        for idx, val in R.items():
            term = val
            for slot, lab in zip(idx, combo):
                comp = vecs[FRAME_LABELS[lab]][(slot,)]
                if comp == 0:
                    term = sp.S.Zero
                    break
                term = term * comp
            tot += term
        tot = tn._clean(tot)
        if not ex.is_zero(tot):
            out[tuple(FRAME_LABELS[i] for i in combo)] = tot
    return out


def psi_example2(spec):
    """The boost-weight (-2,-2) curvature scalar of the Kundt family.

    Defined as the frame component R(n1, n2, n1, n2).  Returns the scalar;
    its v- and V-derivatives are each proportional to B10,u, so it is a
    function of (u, U) alone exactly on the B10,u = 0 branch — see
    psi_vV_dependence for the verified obstruction.
    """
    from . import frame as fr
    comps = riemann_frame_components(spec.metric(), fr.NullFrame.from_walker(spec))
    return comps.get(("n1", "n2", "n1", "n2"), sp.S.Zero)


def psi_vV_dependence(spec):
    """Return (dPsi/dv, dPsi/dV) for the Kundt family, both simplified.

    Both vanish identically iff B10 is independent of u.
    """
    psi = psi_example2(spec)
    v, V = ex.COORD_SYMS[1], ex.COORD_SYMS[3]
    return tn._clean(sp.diff(psi, v)), tn._clean(sp.diff(psi, V))


def xi_example1(constants):
    """Scalar factor of the curvature endomorphisms of example 1.

    With this library's curvature sign the endomorphism on the first
    coordinate plane is R(.,.,l1,n1) = -xi * (l1 ^ l2), and
    R(.,.,n1,n2) = xi * (l1^n1 + l2^n2) + (scalar) * (l1^l2).
    Requires c1 != 0.
    """
    u, U = ex.COORD_SYMS[0], ex.COORD_SYMS[2]
    al, c1, c2 = constants.alpha, constants.c1, constants.c2
    return tn._clean((c1**2 * U**2 - 2 * al * c2 * u**2)
                     / (2 * c1 * u**2 * U**2))
