"""Null frames and the 32 Ricci rotation coefficients.

The tetrad {l, n, m, mt} is built from the coframe one-forms l1, n1, l2, n2
as l = l2, n = n2, m = l1, mt = -n1, with pairings l.n = 1 and m.mt = -1.
Each named coefficient is a fixed contraction W^a (nabla P)_{ab} X^b of
tetrad elements; the naming/sign convention is pinned by the calibration
data below, which were fixed once against the closed-form coefficient table
of the Kundt model family and are validated in the test suite.

Transformations (boosts, null rotations, discrete signed reorderings) act on
coefficient tables through a single engine: the connection components of the
transformed tetrad are expanded back onto the original tetrad, so every
table-level law is derived exactly rather than hand-copied, and each one is
cross-checked against direct recomputation from the transformed frame.
"""

from __future__ import annotations

import itertools

import sympy as sp

from . import expr as ex
from . import tensor as tn


class FrameError(Exception):
    pass


TETRAD = ("l", "n", "m", "mt")

# nonzero tetrad pairings: l.n = 1, m.mt = -1
_PAIR = {("l", "n"): sp.S.One, ("n", "l"): sp.S.One,
         ("m", "mt"): sp.S.NegativeOne, ("mt", "m"): sp.S.NegativeOne}


def pairing(p, q):
    return _PAIR.get((p, q), sp.S.Zero)


# ---------------------------------------------------------------------------
# Calibrated naming convention.
#
# The tetrad attaches the (l, n) pair to the SECOND coordinate null plane:
#   l = l2, n = n2, m = l1, mt = -n1.
# Core coefficient names: 16 of "kappa type", stored as (W, P, X, sign)
# meaning the value  sign * W^a (nabla P)_{ab} X^b.  The signs are the
# calibration constants matching the Kundt-family closed-form table and the
# cross-swap relations.
KAPPA_META = {
    "kappa": ("m", "l", "l", -1), "sigma": ("m", "l", "m", 1),
    "rho": ("m", "l", "mt", -1), "tau": ("m", "l", "n", 1),
    "kappat": ("mt", "l", "l", -1), "sigmat": ("mt", "l", "mt", 1),
    "rhot": ("mt", "l", "m", -1), "taut": ("mt", "l", "n", 1),
    "kappap": ("mt", "n", "n", -1), "sigmap": ("mt", "n", "mt", 1),
    "rhop": ("mt", "n", "m", -1), "taup": ("mt", "n", "l", 1),
    "kappapt": ("m", "n", "n", -1), "sigmapt": ("m", "n", "m", 1),
    "rhopt": ("m", "n", "mt", -1), "taupt": ("m", "n", "l", 1),
}

# 8 of "gamma type": value = (p*a(X) + q*b(X))/2 with the boost parts
# a(X) = n^a (nabla l)_{ab} X^b  and  b(X) = mt^a (nabla m)_{ab} X^b;
# the tilded partner of each name flips the sign of the b part.
GAMMA_META = {
    "gammap": ("l", -1, 1), "gammapt": ("l", -1, -1),
    "epsilonp": ("n", -1, 1), "epsilonpt": ("n", -1, -1),
    "alphap": ("m", -1, 1), "betapt": ("m", -1, -1),
    "betap": ("mt", -1, 1), "alphapt": ("mt", -1, -1),
}

# the remaining 8 are fixed by the pairing identities l.n = 1, m.mt = -1
LAW_RELATIONS = {
    "epsilon": ("gammap", -1), "alpha": ("betap", 1),
    "beta": ("alphap", 1), "gamma": ("epsilonp", -1),
    "epsilont": ("gammapt", -1), "alphat": ("betapt", 1),
    "betat": ("alphapt", 1), "gammat": ("epsilonpt", -1),
}

CORE_NAMES = tuple(KAPPA_META) + tuple(GAMMA_META)
ALL_NAMES = CORE_NAMES + tuple(LAW_RELATIONS)

_PRIME_PARTNER = {}
for _nm in ALL_NAMES:
    _bare = _nm[:-1] if _nm.endswith("t") else _nm
    _tail = "t" if _nm.endswith("t") else ""
    if _bare.endswith("p"):
        _PRIME_PARTNER[_nm] = _bare[:-1] + _tail
    else:
        _PRIME_PARTNER[_nm] = _bare + "p" + _tail

_TILDE_PARTNER = {n: (n[:-1] if n.endswith("t") else n + "t") for n in ALL_NAMES}


class NullFrame:
    """A null coframe {l1, n1, l2, n2} with g = 2 l1 (.) n1 + 2 l2 (.) n2."""

    def __init__(self, l1, n1, l2, n2):
        self.l1, self.n1, self.l2, self.n2 = l1, n1, l2, n2
        comps = {}
        for p, q in ((l1, n1), (l2, n2)):
            for a in tn.IDX:
                for b in tn.IDX:
                    val = p[(a,)] * q[(b,)] + q[(a,)] * p[(b,)]
                    if val != 0:
                        comps[(a, b)] = comps.get((a, b), sp.S.Zero) + val
        self.g = tn.TensorField("ll", comps)
        self._vectors = None

    @classmethod
    def from_walker(cls, spec):
        A, B, C = spec.A, spec.B, spec.C
        one = sp.S.One
        l1 = tn.TensorField("l", {(0,): one})
        n1 = tn.TensorField("l", {(1,): one, (0,): A, (2,): C / 2})
        l2 = tn.TensorField("l", {(2,): one})
        n2 = tn.TensorField("l", {(3,): one, (0,): C / 2, (2,): B})
        return cls(l1, n1, l2, n2)

    def coframe(self):
        return {"l1": self.l1, "n1": self.n1, "l2": self.l2, "n2": self.n2}

    def tetrad_forms(self):
        return {"l": self.l2, "n": self.n2, "m": self.l1,
                "mt": self.n1.scale(-1)}

    def raised(self):
        """Raised coframe members, as vector fields."""
        if self._vectors is None:
            ginv = tn.inverse_metric(self.g)
            self._vectors = {k: tn.raise_index(f, ginv, 0)
                             for k, f in self.coframe().items()}
        return self._vectors

    def tetrad_vectors(self):
        v = self.raised()
        return {"l": v["l2"], "n": v["n2"], "m": v["l1"],
                "mt": v["n1"].scale(-1)}

    def pairing_check(self):
        """All eight distinct coframe pairings, as (label, residual) pairs."""
        out = []
        forms = self.coframe()
        vecs = self.raised()
        want = {("l1", "n1"): 1, ("l2", "n2"): 1}
        keys = list(forms)
        for i, p in enumerate(keys):
            for q in keys[i:]:
                val = sum(forms[p][(a,)] * vecs[q][(a,)] for a in tn.IDX)
                out.append((p + "." + q, ex.canonicalize(val - want.get((p, q), 0))))
        return out

    def is_null_frame_for(self, g) -> bool:
        return self.g.equal(g)

    def transformed(self, M) -> "NullFrame":
        """New frame with tetrad P' = sum_Q M[P][Q] Q (one-forms)."""
        forms = self.tetrad_forms()
        new = {}
        for p in TETRAD:
            acc = tn.TensorField("l", clean=False)
            for q in TETRAD:
                coef = M[p].get(q, sp.S.Zero)
                if coef == 0:
                    continue
                for (a,), val in forms[q].items():
                    acc[(a,)] = tn._clean(acc[(a,)] + coef * val)
            new[p] = acc
        return NullFrame(new["m"], new["mt"].scale(-1), new["l"], new["n"])

    def direction(self, op) -> tn.TensorField:
        v = self.raised()
        try:
            return {"D": v["l1"], "Delta": v["n1"],
                    "delta": v["l2"], "Dp": v["n2"]}[op]
        except KeyError:
            raise FrameError("unknown frame derivative operator %r" % op)


def frame_derivative(op, e, frame: NullFrame):
    """Directional derivative of e along the frame vector named by op."""
    vec = op if isinstance(op, tn.TensorField) else frame.direction(op)
    acc = sp.S.Zero
    for (a,), val in vec.items():
        acc += val * sp.diff(sp.sympify(e), ex.COORD_SYMS[a])
    return ex.canonicalize(acc)


def coframe_from_walker(spec) -> NullFrame:
    return NullFrame.from_walker(spec)


class SpinCoefficientTable:
    """The 32 named rotation coefficients of a null frame."""

    def __init__(self, entries, frame: NullFrame, g=None):
        self.entries = dict(entries)
        self.frame = frame
        self.g = g if g is not None else frame.g
        missing = set(ALL_NAMES) - set(self.entries)
        if missing:
            raise FrameError("missing table entries: %s" % sorted(missing))

    def __getitem__(self, name):
        return self.entries[name]

    def nonzero(self):
        return {k: v for k, v in self.entries.items() if not ex.is_zero(v)}

    def law_residuals(self):
        return {
            name: ex.canonicalize(self.entries[name] - s * self.entries[src])
            for name, (src, s) in LAW_RELATIONS.items()
        }

    def equal(self, other) -> bool:
        return all(ex.is_zero(ex.canonicalize(self.entries[k] - other.entries[k]))
                   for k in ALL_NAMES)

    def map(self, fn):
        return SpinCoefficientTable({k: fn(v) for k, v in self.entries.items()},
                                    self.frame, self.g)

    def prime(self):
        ents = {k: self.entries[_PRIME_PARTNER[k]] for k in ALL_NAMES}
        fr = NullFrame(self.frame.n1.scale(-1), self.frame.l1.scale(-1),
                       self.frame.n2, self.frame.l2)
        return SpinCoefficientTable(ents, fr, self.g)

    def tilde(self):
        ents = {k: self.entries[_TILDE_PARTNER[k]] for k in ALL_NAMES}
        fr = NullFrame(self.frame.n1.scale(-1), self.frame.l1.scale(-1),
                       self.frame.l2, self.frame.n2)
        return SpinCoefficientTable(ents, fr, self.g)


def _rot(W, dP, X):
    """W^a (nabla P)_{ab} X^b for vector fields W, X and a rank-2 dP."""
    acc = sp.S.Zero
    for (a, b), val in dP.items():
        wa = W[(a,)]
        xb = X[(b,)]
        if wa != 0 and xb != 0:
            acc += wa * val * xb
    return tn._clean(acc)


def spin_coefficients(frame: NullFrame, g=None) -> SpinCoefficientTable:
    if g is None:
        g = frame.g
    elif not frame.is_null_frame_for(g):
        raise FrameError("frame does not reconstruct the supplied metric")
    forms = frame.tetrad_forms()
    vecs = frame.tetrad_vectors()
    grads = {p: tn.covariant_derivative(forms[p], g) for p in TETRAD}
    ents = {}
    for name, (w, p, x, sgn) in KAPPA_META.items():
        ents[name] = tn._clean(sgn * _rot(vecs[w], grads[p], vecs[x]))
    for name, (x, pp, qq) in GAMMA_META.items():
        a = _rot(vecs["n"], grads["l"], vecs[x])
        b = _rot(vecs["mt"], grads["m"], vecs[x])
        ents[name] = tn._clean((pp * a + qq * b) / 2)
    for name, (src, s) in LAW_RELATIONS.items():
        ents[name] = tn._clean(s * ents[src])
    return SpinCoefficientTable(ents, frame, g)


# ---------------------------------------------------------------------------
# the transformation engine


def _base_connection(entries):
    """conn[(p, w)](x) -> W^a (nabla P)_{ab} X^b expressed in table entries."""
    e = entries

    def fam(keymap):
        # each table entry is sign * rot, so rot = sign * entry
        return {x: KAPPA_META[keymap[x]][3] * e[keymap[x]] for x in TETRAD}

    fml = fam({"l": "kappa", "m": "sigma", "mt": "rho", "n": "tau"})
    fmtl = fam({"l": "kappat", "mt": "sigmat", "m": "rhot", "n": "taut"})
    fmtn = fam({"n": "kappap", "mt": "sigmap", "m": "rhop", "l": "taup"})
    fmn = fam({"n": "kappapt", "m": "sigmapt", "mt": "rhopt", "l": "taupt"})
    # untilded gamma-type entry = (-a + b)/2, tilded = (-a - b)/2
    a = {"l": -(e["gammap"] + e["gammapt"]),
         "n": -(e["epsilonp"] + e["epsilonpt"]),
         "m": -(e["alphap"] + e["betapt"]),
         "mt": -(e["betap"] + e["alphapt"])}
    b = {"l": e["gammap"] - e["gammapt"],
         "n": e["epsilonp"] - e["epsilonpt"],
         "m": e["alphap"] - e["betapt"],
         "mt": e["betap"] - e["alphapt"]}
    zero = {x: sp.S.Zero for x in TETRAD}
    neg = lambda d: {x: -d[x] for x in TETRAD}
    return {
        ("l", "n"): a, ("l", "l"): zero, ("l", "m"): fml, ("l", "mt"): fmtl,
        ("n", "l"): neg(a), ("n", "n"): zero, ("n", "mt"): fmtn, ("n", "m"): fmn,
        ("m", "mt"): b, ("m", "m"): zero, ("m", "l"): neg(fml), ("m", "n"): neg(fmn),
        ("mt", "m"): neg(b), ("mt", "mt"): zero, ("mt", "l"): neg(fmtl), ("mt", "n"): neg(fmtn),
    }


def transform_table(table: SpinCoefficientTable, M) -> SpinCoefficientTable:
    """Table after replacing the tetrad by P' = sum_Q M[P][Q] Q.

    M entries may be coordinate-dependent expressions; the derivative terms
    they generate are taken along the original frame directions.
    """
    conn = _base_connection(table.entries)
    vecs = table.frame.tetrad_vectors()

    def mcoef(p, q):
        return sp.sympify(M[p].get(q, sp.S.Zero))

    def deriv(coef, s):
        if coef.free_symbols & set(ex.COORD_SYMS):
            return frame_derivative(vecs[s], coef, table.frame)
        return sp.S.Zero

    def rot_new(w, p, x):
        acc = sp.S.Zero
        for r in TETRAD:
            mr = mcoef(w, r)
            if mr == 0:
                continue
            for s in TETRAD:
                ms = mcoef(x, s)
                if ms == 0:
                    continue
                for q in TETRAD:
                    mq = mcoef(p, q)
                    if mq != 0:
                        val = conn[(q, r)][s]
                        if val != 0:
                            acc += mr * mq * ms * val
                    pr = pairing(r, q)
                    if pr != 0:
                        d = deriv(mcoef(p, q), s)
                        if d != 0:
                            acc += mr * ms * pr * d
        return tn._clean(acc)

    ents = {}
    for name, (w, p, x, sgn) in KAPPA_META.items():
        ents[name] = tn._clean(sgn * rot_new(w, p, x))
    for name, (x, pp, qq) in GAMMA_META.items():
        a = rot_new("n", "l", x)
        b = rot_new("mt", "m", x)
        ents[name] = tn._clean((pp * a + qq * b) / 2)
    for name, (src, s) in LAW_RELATIONS.items():
        ents[name] = tn._clean(s * ents[src])
    return SpinCoefficientTable(ents, table.frame.transformed(M), table.g)


def boost_matrix(Ap, Bp):
    Ap, Bp = sp.sympify(Ap), sp.sympify(Bp)
    return {"l": {"l": 1 / Ap}, "n": {"n": Ap},
            "m": {"m": 1 / Bp}, "mt": {"mt": Bp}}


def rotation_l_matrix(mu, mut):
    mu, mut = sp.sympify(mu), sp.sympify(mut)
    return {"l": {"l": sp.S.One},
            "n": {"n": sp.S.One, "mt": mut, "m": -mu, "l": -mu * mut},
            "m": {"m": sp.S.One, "l": mut},
            "mt": {"mt": sp.S.One, "l": -mu}}


def apply_boost(table: SpinCoefficientTable, Ap, Bp) -> SpinCoefficientTable:
    if ex.is_zero(Ap) or ex.is_zero(Bp):
        raise FrameError("boost parameters must be nonzero")
    return transform_table(table, boost_matrix(Ap, Bp))


def apply_null_rotation_l(table, mu, mut) -> SpinCoefficientTable:
    return transform_table(table, rotation_l_matrix(mu, mut))


def apply_null_rotation_n(table, mu, mut) -> SpinCoefficientTable:
    return apply_null_rotation_l(table.prime(), -sp.sympify(mu), -sp.sympify(mut)).prime()


def discrete_permutations():
    """All signed tetrad reorderings preserving the pairing structure.

    Direct enumeration yields 32 such maps: 8 underlying label permutations
    (the two null planes may swap, and each pair may reverse) times 4
    admissible sign assignments.
    """
    out = []
    for perm in itertools.permutations(TETRAD):
        for signs in itertools.product((1, -1), repeat=4):
            M = {p: {q: sp.S(s)} for p, (q, s) in zip(TETRAD, zip(perm, signs))}
            ok = all(
                ex.is_zero(_new_pairing(M, p, q) - pairing(p, q))
                for p in TETRAD for q in TETRAD
            )
            if ok:
                out.append(M)
    return out


def _new_pairing(M, p, q):
    acc = sp.S.Zero
    for r, cr in M[p].items():
        for s, cs in M[q].items():
            acc += cr * cs * pairing(r, s)
    return acc


def apply_discrete(table: SpinCoefficientTable, perm) -> SpinCoefficientTable:
    """Apply a signed tetrad reordering given as {new: (sign, old)} or a matrix."""
    if all(isinstance(v, dict) for v in perm.values()):
        M = perm
    else:
        M = {p: {q: sp.S(s)} for p, (s, q) in perm.items()}
    for p in TETRAD:
        for q in TETRAD:
            if not ex.is_zero(_new_pairing(M, p, q) - pairing(p, q)):
                raise FrameError("permutation does not preserve the null pairings")
    return transform_table(table, M)


CROSS_SWAP = {"l": (1, "m"), "m": (1, "l"), "n": (-1, "mt"), "mt": (-1, "n")}
