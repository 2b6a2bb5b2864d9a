"""Frame-fixing equivalence algorithm for the Kundt Walker family.

The driver fixes the two boost parameters from the curvature, extracts the
solvable connection coefficients as first-order invariants, tracks the
residual isotropy group (null rotations preserving every recorded
invariant), counts functionally independent invariants per order, and
iterates covariant-derivative extraction until both counts stabilize.
"""

from __future__ import annotations

import dataclasses
import random

import sympy as sp

from . import expr as ex
from . import frame as fr
from . import holonomy as ho
from . import tensor as tn
from . import walker as wk

_u, _v, _U, _V = ex.COORD_SYMS

# the sixteen connection coefficients solvable from the first derivative of
# the curvature, in the library's naming
SOLVABLE = (
    "rho", "tau", "kappa", "sigma",
    "rhot", "sigmat", "taut", "kappat",
    "alpha", "alphap", "alphat", "alphapt",
    "gamma", "gammap", "gammat", "gammapt",
)

BOUND_CHAIN = (10, 8, 7)
MAX_ORDER = 7


class CartanError(Exception):
    pass


def _rotation_m_matrix(mu, mut):
    """Null rotation fixing the tetrad vector m (metric-preserving)."""
    mu, mut = sp.sympify(mu), sp.sympify(mut)
    return {"m": {"m": sp.S.One},
            "mt": {"mt": sp.S.One, "n": mut, "l": -mu, "m": -mu * mut},
            "l": {"l": sp.S.One, "m": mut},
            "n": {"n": sp.S.One, "m": -mu}}


def _rotation_mt_matrix(mu, mut):
    """Null rotation fixing the tetrad vector mt (metric-preserving)."""
    mu, mut = sp.sympify(mu), sp.sympify(mut)
    return {"mt": {"mt": sp.S.One},
            "m": {"m": sp.S.One, "n": mut, "l": -mu, "mt": -mu * mut},
            "l": {"l": sp.S.One, "mt": mut},
            "n": {"n": sp.S.One, "mt": -mu}}


def _rotation_n_matrix(mu, mut):
    """Null rotation fixing the tetrad vector n (metric-preserving)."""
    mu, mut = sp.sympify(mu), sp.sympify(mut)
    return {"n": {"n": sp.S.One},
            "l": {"l": sp.S.One, "mt": -mut, "m": mu, "n": -mu * mut},
            "m": {"m": sp.S.One, "n": -mut},
            "mt": {"mt": sp.S.One, "n": mu}}


ROTATION_FAMILIES = {
    "l": fr.rotation_l_matrix,
    "n": _rotation_n_matrix,
    "m": _rotation_m_matrix,
    "mt": _rotation_mt_matrix,
}


@dataclasses.dataclass(frozen=True)
class CartanState:
    spec: wk.WalkerSpec
    g: tn.TensorField
    frame: fr.NullFrame          # boost-fixed frame
    table: object                # boost-fixed SpinCoefficientTable
    q: int
    z1: sp.Expr
    z2: sp.Expr
    invariants: tuple            # ((order, ((label, expr), ...)), ...)
    t_history: tuple
    h_history: tuple
    iso_families: tuple          # rotation families still preserving everything
    notes: tuple

    def all_invariants(self):
        out = []
        for _, pairs in self.invariants:
            out.extend(pairs)
        return tuple(out)


@dataclasses.dataclass(frozen=True)
class CartanReport:
    family: str                  # kundt-walker | flat | out-of-family
    terminal_order: int
    t_history: tuple
    isotropy_history: tuple
    invariants: tuple            # ((order, ((label, rendered), ...)), ...)
    z1: str
    z2: str
    fixed_components: tuple      # ((slot, rendered boosted value), ...)
    holonomy_label: str
    bound_chain: tuple = BOUND_CHAIN
    notes: tuple = ()

    def render(self) -> str:
        lines = ["report:"]
        lines.append("  family: %s" % self.family)
        lines.append("  terminal_order: %s" % self.terminal_order)
        lines.append("  bound_chain: %s" % " -> ".join(str(b) for b in self.bound_chain))
        lines.append("  holonomy_label: %s" % self.holonomy_label)
        lines.append("  z1: %s" % self.z1)
        lines.append("  z2: %s" % self.z2)
        lines.append("  fixed_components:")
        for slot, val in self.fixed_components:
            lines.append("    %s: %s" % (slot, val))
        lines.append("  t_history: %s" % (list(self.t_history),))
        lines.append("  isotropy_history: %s" % (list(self.isotropy_history),))
        lines.append("  orders:")
        for order, pairs in self.invariants:
            lines.append("    order_%d:" % order)
            if not pairs:
                lines.append("      (none)")
            for label, val in pairs:
                lines.append("      %s: %s" % (label, val))
        for note in self.notes:
            lines.append("  note: %s" % note)
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# family detection and boost fixing


def family_of(spec: wk.WalkerSpec) -> str:
    """kundt-walker when the boost-fixing subfamily assumptions hold."""
    if all(ex.is_zero(getattr(spec, k)) for k in wk.COEFF_KEYS):
        return "flat"
    if (not ex.is_zero(spec.B02) and ex.is_zero(spec.A2) and ex.is_zero(spec.C2)
            and ex.is_zero(sp.diff(spec.B10, _u)) and ex.is_zero(spec.B00)):
        return "kundt-walker"
    return "out-of-family"


def fix_zeroth_order(spec: wk.WalkerSpec):
    """Fix the two boost parameters from the curvature.

    Returns (z1, z2, certificate).  The fixing makes the two independent
    curvature frame components constant: the (l1 n2 l1 n2)-slot (value
    2*B02) and the (n1 n2 n1 n2)-slot (the boost-weight (-2,-2) scalar).
    Principal positive real roots are taken; the leftover sign freedom
    belongs to the discrete transformation group.
    """
    B02 = spec.B02
    if ex.is_zero(B02):
        raise CartanError("boost fixing requires a nonzero v^2-coefficient in B")
    psi = ho.psi_example2(spec)
    cert = {"t0": 0}
    if ex.is_zero(psi):
        # only the component ratio can be fixed; one boost remains free
        z2 = sp.S.One
        z1 = 1 / sp.sqrt(2 * B02)
        cert["branch"] = "A9"
        cert["note"] = "second curvature slot vanishes; one boost left free"
    else:
        z2 = sp.Pow(2 * B02 / psi, sp.Rational(1, 4))
        z1 = z2 / sp.sqrt(2 * B02)
        cert["branch"] = "generic"
    boosted_2323 = ex.canonicalize(sp.radsimp((z1 / z2) ** 2 * 2 * B02))
    boosted_psi = ex.canonicalize(sp.radsimp(z1**2 * z2**2 * psi))
    cert["R_l1n2l1n2"] = boosted_2323
    cert["R_n1n2n1n2"] = boosted_psi
    cert["relations"] = ("z1**2 = z2**2/(2*B02)", "z2**4 = 2*B02/Psi")
    return z1, z2, cert


# ---------------------------------------------------------------------------
# functional independence


def _numeric_points(seed, n):
    rng = random.Random(seed)
    pts = []
    for _ in range(n):
        pts.append({c: sp.Rational(rng.randint(2, 40), rng.randint(2, 9))
                    for c in ex.COORD_SYMS})
    return pts


def functionally_independent_count(invariants, seed=0) -> int:
    """Rank of the coordinate Jacobian of the invariant list.

    Symbolic rank is attempted first; random rational evaluation points
    (three retries, deterministic for a given seed) confirm it.  Raises
    CartanError when every candidate point is singular and disagrees with
    the symbolic answer.
    """
    invs = [sp.sympify(e) for e in invariants]
    if not invs:
        return 0
    jac = sp.Matrix([[sp.diff(e, c) for c in ex.COORD_SYMS] for e in invs])
    if all(x == 0 for x in jac):
        return 0
    try:
        symbolic = jac.rank(iszerofunc=ex.is_zero)
    except Exception:
        symbolic = None
    # deterministic numeric confirmation: substitute coordinates and any
    # opaque function values by rational points
    atoms = sorted(
        {a for a in jac.atoms(sp.Derivative)} |
        {a for a in jac.atoms(sp.core.function.AppliedUndef)},
        key=sp.default_sort_key)
    best = 0
    tried = []
    for i, pt in enumerate(_numeric_points(seed, 3)):
        rng = random.Random("%s-%s-atoms" % (seed, i))
        subs = dict(pt)
        for a in atoms:
            subs[a] = sp.Rational(rng.randint(2, 40), rng.randint(2, 9))
        try:
            num = jac.xreplace(subs)
            num = num.applyfunc(lambda e: sp.nsimplify(sp.sympify(e)))
            best = max(best, num.rank())
        except Exception:
            pass
        tried.append(pt)
        if symbolic is not None and best == symbolic:
            return symbolic
    if symbolic is not None and best <= symbolic:
        # singular-point shortfall: prefer the symbolic answer when it exists
        return symbolic
    if symbolic is None and best > 0:
        return best
    raise CartanError("independence count inconclusive; points tried: %s" % tried)


# ---------------------------------------------------------------------------
# isotropy tracking


def _components_preserved(g, base_frame, M, base_comps) -> bool:
    rotated = base_frame.transformed(M)
    comps = ho.riemann_frame_components(g, rotated)
    if set(comps) != set(base_comps):
        return False
    return all(ex.is_zero(ex.canonicalize(comps[k] - base_comps[k])) for k in comps)


def curvature_isotropy(g, frame) -> tuple:
    """(dimension, preserved-family names) of the curvature isotropy.

    Checks the four two-parameter null-rotation families and the
    two-parameter boost family against the curvature frame components.
    Granularity is per family.
    """
    base = ho.riemann_frame_components(g, frame)
    mu, mut = sp.symbols("mu_iso mutilde_iso")
    dim = 0
    kept = []
    for name, mk in ROTATION_FAMILIES.items():
        if _components_preserved(g, frame, mk(mu, mut), base):
            dim += 2
            kept.append("rot_" + name)
    a1, a2 = sp.symbols("a1_iso a2_iso", positive=True)
    if _components_preserved(g, frame, fr.boost_matrix(a1, a2), base):
        dim += 2
        kept.append("boost")
    return dim, tuple(kept)


def _family_preserves_invariants(state, family, pairs, prev_values=None) -> bool:
    """Whether a residual rotation family preserves every listed invariant.

    Plain connection-coefficient labels are compared against the transformed
    table; derivative labels d_<dir>(<base>) are recomputed along the
    transformed frame direction applied to the recorded base value.
    """
    z3, z4 = sp.symbols("z3 z4")
    M = ROTATION_FAMILIES[family.replace("rot_", "")](z3, z4)
    new_table = None
    new_vecs = None
    for label, val in pairs:
        if label in state.table.entries:
            if new_table is None:
                new_table = fr.transform_table(state.table, M)
            if not ex.is_zero(ex.canonicalize(new_table[label] - state.table[label])):
                return False
        elif label.startswith("d_") and prev_values is not None:
            d, base = label.split("(", 1)
            d = d[2:]
            base = base[:-1]
            if base not in prev_values:
                return False
            if new_vecs is None:
                new_vecs = state.frame.transformed(M).tetrad_vectors()
            der = fr.frame_derivative(new_vecs[d], prev_values[base], state.frame)
            if not ex.is_zero(ex.canonicalize(der - val)):
                return False
        else:
            return False
    return True


def _surviving_families(state, pairs, prev_values=None) -> tuple:
    return tuple(f for f in state.iso_families if f.startswith("rot_")
                 and _family_preserves_invariants(state, f, pairs, prev_values))


# ---------------------------------------------------------------------------
# the driver


def _initial_state(spec: wk.WalkerSpec) -> CartanState:
    g = spec.metric()
    base_frame = fr.NullFrame.from_walker(spec)
    z1, z2, cert = fix_zeroth_order(spec)
    table0 = fr.spin_coefficients(base_frame)
    table = fr.apply_boost(table0, z1, z2)
    h0, kept = curvature_isotropy(g, table.frame)
    notes = ["isotropy families preserved at order 0: %s" % (kept,)]
    if cert.get("branch") == "A9":
        notes.append("reduced boost fixing (second slot vanishes)")
    zero_pairs = tuple((slot, cert[slot]) for slot in ("R_l1n2l1n2", "R_n1n2n1n2"))
    return CartanState(
        spec=spec, g=g, frame=table.frame, table=table, q=0, z1=z1, z2=z2,
        invariants=((0, zero_pairs),),
        t_history=(cert["t0"],), h_history=(h0,), iso_families=kept,
        notes=tuple(notes))


def first_order_invariants(state: CartanState) -> CartanState:
    """Extract the sixteen solvable connection coefficients at order one."""
    pairs = tuple((name, state.table[name]) for name in SOLVABLE
                  if not ex.is_zero(state.table[name]))
    notes = list(state.notes)
    kept = _surviving_families(state, pairs)
    if kept != tuple(f for f in state.iso_families if f.startswith("rot_")):
        notes.append("unverified branch: rotation normalization of z3, z4 "
                     "attempted outside the fixture-locked subcase")
    h = 2 * len(kept)
    exprs = [v for _, v in pairs]
    t = functionally_independent_count(exprs)
    return dataclasses.replace(
        state, q=1,
        invariants=state.invariants + ((1, pairs),),
        t_history=state.t_history + (t,),
        h_history=state.h_history + (min(h, state.h_history[-1]),),
        iso_families=kept,
        notes=tuple(notes))


def cartan_step(state: CartanState) -> CartanState:
    """Extend the invariant list by frame derivatives of the last order."""
    if state.q == 0:
        return first_order_invariants(state)
    vecs = state.frame.tetrad_vectors()
    prev = dict(state.invariants)[state.q]
    new_pairs = []
    for label, val in prev:
        for d in ("l", "n", "m", "mt"):
            der = ex.canonicalize(fr.frame_derivative(vecs[d], val, state.frame))
            if not ex.is_zero(der):
                new_pairs.append(("d_%s(%s)" % (d, label), der))
    new_pairs = tuple(new_pairs)
    notes = list(state.notes)
    kept = _surviving_families(state, new_pairs, prev_values=dict(prev))
    if kept != tuple(state.iso_families):
        notes.append("unverified branch: derivative invariants not preserved "
                     "by every residual rotation; normalization not "
                     "fixture-locked")
    h = 2 * len(kept)
    exprs = [v for _, v in state.all_invariants()] + [v for _, v in new_pairs]
    t = functionally_independent_count(exprs)
    return dataclasses.replace(
        state, q=state.q + 1,
        invariants=state.invariants + ((state.q + 1, new_pairs),),
        t_history=state.t_history + (t,),
        h_history=state.h_history + (min(h, state.h_history[-1]),),
        iso_families=kept,
        notes=tuple(notes))


def _holonomy_label(spec) -> str:
    try:
        alg = ho.infinitesimal_holonomy(spec.metric(), fr.NullFrame.from_walker(spec), 0)
        return ho.classify(alg)[0]
    except Exception as e:  # degenerate inputs still get a report
        return "unclassified(%s)" % type(e).__name__


def _render_invariants(invariants):
    return tuple((order, tuple((label, ex.render(val)) for label, val in pairs))
                 for order, pairs in invariants)


def run(spec: wk.WalkerSpec, max_order: int = MAX_ORDER) -> CartanReport:
    """Run the equivalence loop until t_q and dim H_q stabilize."""
    if max_order > MAX_ORDER:
        raise CartanError("max_order exceeds the theoretical bound %d" % MAX_ORDER)
    fam = family_of(spec)
    holo = _holonomy_label(spec)
    if fam == "flat":
        invs = ((0, ()), (1, ()))
        return CartanReport(
            family="flat", terminal_order=1, t_history=(0, 0),
            isotropy_history=(6, 6), invariants=invs, z1="1", z2="1",
            fixed_components=(("R_l1n2l1n2", "0"), ("R_n1n2n1n2", "0")),
            holonomy_label=holo,
            notes=("curvature vanishes; every invariant is zero",))
    if fam == "out-of-family":
        return CartanReport(
            family="out-of-family", terminal_order=0, t_history=(),
            isotropy_history=(), invariants=(), z1="", z2="",
            fixed_components=(), holonomy_label=holo,
            notes=("boost-fixing family assumptions not met; "
                   "equivalence loop not attempted",))
    state = _initial_state(spec)
    while state.q < max_order:
        state = cartan_step(state)
        # monotonicity audit
        if state.t_history[-1] < state.t_history[-2]:
            raise CartanError("independent-invariant count decreased")
        if state.h_history[-1] > state.h_history[-2]:
            raise CartanError("isotropy dimension increased")
        if (state.q >= 2 and state.t_history[-1] == state.t_history[-2]
                and state.h_history[-1] == state.h_history[-2]):
            break
    else:
        raise CartanError("no stabilization by order %d" % max_order)
    if state.q > MAX_ORDER:
        raise CartanError("terminal order exceeds the bound %d" % MAX_ORDER)
    z1r, z2r = ex.render(state.z1), ex.render(state.z2)
    fixed = tuple((slot, ex.render(val)) for slot, val in dict(state.invariants)[0])
    return CartanReport(
        family="kundt-walker", terminal_order=state.q,
        t_history=state.t_history, isotropy_history=state.h_history,
        invariants=_render_invariants(state.invariants),
        z1=z1r, z2=z2r, fixed_components=fixed, holonomy_label=holo,
        notes=state.notes)


# ---------------------------------------------------------------------------
# comparison


@dataclasses.dataclass(frozen=True)
class DistinguishedBy:
    label: str

    def __str__(self):
        return "DistinguishedBy(%s)" % self.label


@dataclasses.dataclass(frozen=True)
class CompatibleUpTo:
    order: int

    def __str__(self):
        return "CompatibleUpTo(%s)" % self.order


def compare(r1: CartanReport, r2: CartanReport):
    """Necessary-condition comparison of two terminated reports."""
    if r1.holonomy_label != r2.holonomy_label:
        return DistinguishedBy("holonomy/isotropy")
    if r1.family != r2.family:
        return DistinguishedBy("family")
    if r1.t_history != r2.t_history:
        return DistinguishedBy("t_history")
    if r1.isotropy_history != r2.isotropy_history:
        return DistinguishedBy("isotropy_history")
    d1, d2 = dict(r1.invariants), dict(r2.invariants)
    for order in sorted(set(d1) | set(d2)):
        p1 = dict(d1.get(order, ()))
        p2 = dict(d2.get(order, ()))
        if set(p1) != set(p2):
            missing = set(p1) ^ set(p2)
            return DistinguishedBy(sorted(missing)[0])
        for label in sorted(p1):
            # rendered forms are canonical, so string inequality means the
            # canonicalized invariants differ
            if p1[label] != p2[label]:
                return DistinguishedBy(label)
    return CompatibleUpTo(min(r1.terminal_order, r2.terminal_order))
