"""Command-line interface.

    walkervsi <command> <spec-file> [<spec-file-2>] [options]

Commands: curvature, vsi, spin, holonomy, kundt, recurrent, cartan, compare.
Options: --order N, --branch KEY=VALUE (repeatable), --format text|structured,
--seed N, --out PATH.

Exit codes: 0 success, 1 analysis-level negative verdict (non-vanishing
invariant, no Kundt vector, metrics distinguished), 2 input error.

Structured output is a deterministic key-value rendering: the same input and
seed produce byte-identical bytes.  Rendered expressions reuse the input
grammar and parse back to the same canonical form.
"""

from __future__ import annotations

import argparse
import importlib.resources
import sys

import sympy as sp

from . import cartan as ca
from . import expr as ex
from . import frame as fr
from . import holonomy as ho
from . import tensor as tn
from . import walker as wk

COORD_NAMES = ("u", "v", "U", "V")


class InputError(Exception):
    pass


def _load(path: str) -> wk.WalkerSpec:
    if path.startswith("bundled:"):
        name = path.split(":", 1)[1]
        ref = importlib.resources.files("walkervsi") / "specs" / (name + ".wspec")
        try:
            text = ref.read_text()
        except (FileNotFoundError, OSError):
            raise InputError("no bundled spec named %r" % name)
        return wk.load_spec(text, is_text=True)
    try:
        return wk.load_spec(path)
    except FileNotFoundError:
        raise InputError("no such spec file: %s" % path)
    except (wk.WalkerError, ex.ExprError) as e:
        raise InputError("cannot parse %s: %s" % (path, e))


def _apply_branches(spec: wk.WalkerSpec, branches) -> wk.WalkerSpec:
    """Branch selections.

    KEY may be a metric coefficient (replaced by the parsed value), a declared
    constant (substituted), or the special key B10u (B10u=0 replaces B10 by an
    opaque function of U alone).
    """
    for key, text in branches:
        if key == "B10u":
            if text.strip() != "0":
                raise InputError("only B10u=0 is meaningful")
            # kill the u-dependence of B10 everywhere the same function
            # occurs, so derived coefficients follow along
            u_sym = ex.coordinate("u").symbol
            atoms = sp.sympify(spec.B10).atoms(sp.core.function.AppliedUndef)
            fs = [f for f in spec.functions
                  if any(a.func.__name__ == f.name for a in atoms)
                  and u_sym in {c.symbol for c in f.args}]
            if len(fs) == 1 and ex.is_zero(spec.B10 - fs[0]()):
                h = ex.FunctionSymbol(fs[0].name + "0", (ex.coordinate("U"),))
                spec = spec.substitute({fs[0]: h()}).with_(
                    functions=tuple(f for f in spec.functions
                                    if f is not fs[0]) + (h,))
            elif ex.is_zero(sp.diff(sp.sympify(spec.B10), u_sym)):
                pass  # already independent of u
            else:
                raise InputError("cannot impose B10u=0 on this spec")
        elif key in wk.COEFF_KEYS:
            val = ex.parse(text, spec.functions, spec.constants)
            spec = spec.with_(**{key: val})
        elif key in spec.constants:
            val = ex.parse(text, spec.functions, spec.constants)
            spec = spec.substitute({ex.constant(key): val})
        elif key in {f.name for f in spec.functions}:
            fsym = next(f for f in spec.functions if f.name == key)
            val = ex.parse(text, spec.functions, spec.constants)
            spec = spec.substitute({fsym: val})
        else:
            raise InputError("unknown branch key %r" % key)
    return spec


def _kv(lines, key, val, indent=0):
    lines.append("%s%s: %s" % ("  " * indent, key, val))


def _render(e):
    return ex.render(ex.canonicalize(e))


# ---------------------------------------------------------------------------
# commands: each returns (lines, exit_code)


def cmd_curvature(spec, args):
    g = spec.metric()
    R = tn.riemann(g)
    ric = tn.ricci(g)
    lines = ["curvature:"]
    seen = []
    for idx in sorted(R.nonzero_indices()):
        a, b, c, d = idx
        if a < b and c < d and (a, b) <= (c, d):
            seen.append(idx)
    _kv(lines, "riemann_nonzero_count", len(seen), 1)
    for idx in seen:
        name = "R_" + "".join(COORD_NAMES[i] for i in idx)
        _kv(lines, name, _render(R[idx]), 1)
    ric_nz = [(a, b) for (a, b) in sorted(ric.nonzero_indices()) if a <= b]
    _kv(lines, "ricci_nonzero_count", len(ric_nz), 1)
    for a, b in ric_nz:
        _kv(lines, "Ric_%s%s" % (COORD_NAMES[a], COORD_NAMES[b]), _render(ric[(a, b)]), 1)
    _kv(lines, "ricci_scalar", _render(tn.ricci_scalar(g)), 1)
    return lines, 0


def cmd_vsi(spec, args):
    order = 2 if args.order is None else args.order
    invs = tn.scalar_invariants(spec.metric(), max_deriv_order=order)
    lines = ["vsi:"]
    bad = []
    for label, val in invs:
        zero = ex.is_zero(val)
        _kv(lines, label, "0" if zero else _render(val), 1)
        if not zero:
            bad.append(label)
    n = len(invs)
    if bad:
        _kv(lines, "verdict", "FAIL (%d/%d invariants nonzero: %s)"
            % (len(bad), n, ", ".join(bad)), 1)
        return lines, 1
    _kv(lines, "verdict", "PASS (%d/%d invariants zero)" % (n, n), 1)
    return lines, 0


def cmd_spin(spec, args):
    table = fr.spin_coefficients(fr.NullFrame.from_walker(spec))
    lines = ["spin_coefficients:"]
    nz = table.nonzero()
    for name in sorted(nz):
        _kv(lines, name, _render(nz[name]), 1)
    resid = {k: v for k, v in table.law_residuals().items() if not ex.is_zero(v)}
    _kv(lines, "pairing_law_residuals", "none" if not resid else sorted(resid), 1)
    return lines, 0


def cmd_holonomy(spec, args):
    order = 0 if args.order is None else min(args.order, 2)
    g = spec.metric()
    frame = fr.NullFrame.from_walker(spec)
    alg = ho.infinitesimal_holonomy(g, frame, order)
    label, cert = ho.classify(alg)
    lines = ["holonomy:"]
    _kv(lines, "dimension", alg.dimension, 1)
    _kv(lines, "label", label, 1)
    _kv(lines, "derivative_order", order, 1)
    for key in sorted(cert):
        _kv(lines, "certificate_%s" % key, cert[key], 1)
    evs = ho.common_eigenvectors(alg)
    _kv(lines, "invariant_directions", len(evs), 1)
    parallel = []
    for i, v in enumerate(evs):
        comps = {COORD_NAMES[a]: _render(val) for (a,), val in v.items()}
        _kv(lines, "direction_%d" % i, comps, 1)
        try:
            om = ho.verify_recurrent(v, g)
            if not list(om.items()):
                parallel.append(i)
        except ho.HolonomyError:
            pass
    _kv(lines, "parallel_directions", parallel, 1)
    return lines, 0


def cmd_kundt(spec, args):
    verdict = wk.kundt_classify(spec)
    lines = ["kundt:"]
    _kv(lines, "verdict", verdict.verdict, 1)
    for i, w in enumerate(verdict.witnesses):
        kin = wk.kinematics(w, spec.metric())
        name = "d_" + COORD_NAMES[max(idx for (idx,), val in w.items() if val != 0)]
        _kv(lines, "witness_%d" % i, name, 1)
        _kv(lines, "witness_%d_expansion" % i, _render(kin.expansion), 1)
        _kv(lines, "witness_%d_shear" % i,
            "[" + ", ".join(_render(s) for s in kin.shear) + "]", 1)
        _kv(lines, "witness_%d_twist" % i, _render(kin.twist), 1)
        _kv(lines, "witness_%d_geodesic" % i, kin.is_geodesic(), 1)
    code = 0 if verdict.witnesses else 1
    return lines, code


def cmd_recurrent(spec, args):
    lines = ["recurrent:"]
    k = wk.invariant_plane_check(spec)
    expected = wk.expected_recurrence_form(spec)
    match = k.equal(expected)
    _kv(lines, "plane_recurrence_form",
        {COORD_NAMES[a]: _render(val) for (a,), val in k.items()}, 1)
    _kv(lines, "matches_coefficient_formula", match, 1)
    g = spec.metric()
    for name, vec in (("d_v", tn.TensorField("u", {(1,): sp.S.One})),
                      ("d_V", tn.TensorField("u", {(3,): sp.S.One}))):
        try:
            om = ho.verify_recurrent(vec, g)
            comps = {COORD_NAMES[a]: _render(val) for (a,), val in om.items()}
            _kv(lines, "%s_recurrent" % name, True, 1)
            _kv(lines, "%s_form" % name, comps if comps else "0 (parallel)", 1)
        except ho.HolonomyError:
            _kv(lines, "%s_recurrent" % name, False, 1)
    return lines, (0 if match else 1)


def cmd_cartan(spec, args):
    order = ca.MAX_ORDER if args.order is None else args.order
    rep = ca.run(spec, max_order=order)
    return rep.render().rstrip("\n").split("\n"), 0


def cmd_compare(spec, args):
    spec2 = _apply_branches(_load(args.spec2), args.branch)
    order = ca.MAX_ORDER if args.order is None else args.order
    r1 = ca.run(spec, max_order=order)
    r2 = ca.run(spec2, max_order=order)
    verdict = ca.compare(r1, r2)
    lines = ["compare:"]
    _kv(lines, "left_holonomy", r1.holonomy_label, 1)
    _kv(lines, "right_holonomy", r2.holonomy_label, 1)
    _kv(lines, "verdict", str(verdict), 1)
    return lines, (0 if isinstance(verdict, ca.CompatibleUpTo) else 1)


COMMANDS = {
    "curvature": cmd_curvature,
    "vsi": cmd_vsi,
    "spin": cmd_spin,
    "holonomy": cmd_holonomy,
    "kundt": cmd_kundt,
    "recurrent": cmd_recurrent,
    "cartan": cmd_cartan,
    "compare": cmd_compare,
}


def _parse_args(argv):
    p = argparse.ArgumentParser(prog="walkervsi", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("spec", help="spec file path, or bundled:<name>")
    p.add_argument("spec2", nargs="?", help="second spec (compare only)")
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--branch", action="append", default=[],
                   metavar="KEY=VALUE")
    p.add_argument("--format", choices=("text", "structured"), default="text")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    return p.parse_args(argv)


def main(argv=None) -> int:
    args = _parse_args(sys.argv[1:] if argv is None else argv)
    try:
        branches = []
        for b in args.branch:
            if "=" not in b:
                raise InputError("branch must look like KEY=VALUE: %r" % b)
            key, val = b.split("=", 1)
            branches.append((key.strip(), val))
        args.branch = branches
        if args.command == "compare" and not args.spec2:
            raise InputError("compare needs two spec files")
        if args.command != "compare" and args.spec2:
            raise InputError("only compare accepts two spec files")
        spec = _apply_branches(_load(args.spec), args.branch)
        lines, code = COMMANDS[args.command](spec, args)
    except InputError as e:
        print("input error: %s" % e, file=sys.stderr)
        return 2
    except (wk.WalkerError, ex.ExprError, ca.CartanError, ho.HolonomyError,
            fr.FrameError) as e:
        print("input error: %s" % e, file=sys.stderr)
        return 2
    body = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)
    return code


if __name__ == "__main__":
    sys.exit(main())
