"""Command-line front end.

Exit codes: 0 the check passed, 1 the check failed, 2 the input was invalid.
Every subcommand prints a plain-text report, or a JSON report with ``--json``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
from scipy.linalg import expm

from . import __version__
from .ainfty import AInftyError, check_ainfty, em_transfer
from .complexes import ComplexError, format_homology, homology
from .io import InputError, dumps, load_entity, read_json
from .simplicial import chain_complex_of
from .superconn import (
    STANDARD_TRIANGLE,
    TransportError,
    check_chain_map,
    check_flatness,
    homotopy_convergence,
    make_family,
    parse_params,
    table_csv,
    tilde_check,
    transport,
    transport_convergence,
)
from .superconn.forms import FormError
from .superconn.transport import check_homotopy, format_matrix
from .twisting import (
    TwistError,
    check_twisting,
    euler_class,
    fiber_degree_spectral_sequence,
    total_complex,
)
from .volodin import (
    VolodinError,
    canonical_twisting_cochain,
    check_volodin_morphism,
    check_whitehead_morphism,
    check_whitehead_object,
    forget_partial_orders,
)

__all__ = ["main", "run", "build_parser"]

PASS, FAIL, INVALID = 0, 1, 2


class Outcome:
    """Report text, machine form and exit code of one command."""

    def __init__(self, code: int, text: str, data: dict):
        self.code, self.text, self.data = code, text, data


def _ring(value: str | None) -> str | None:
    return None if value is None else value.upper()


def _homology_json(h: dict, ring: str) -> dict:
    return {str(n): {"betti": g.betti, "torsion": list(g.torsion), "text": g.format(ring)}
            for n, g in sorted(h.items())}


# ---------------------------------------------------------------- subcommands


def cmd_homology(args) -> Outcome:
    kind, value = load_entity(args.file, ("complex", "simplicial"))
    C = chain_complex_of(value) if kind == "simplicial" else value
    ring = _ring(args.ring) or C.ring
    h = homology(C, ring)
    text = format_homology(h, ring)
    return Outcome(PASS, text, {"command": "homology", "ring": ring, "homology": _homology_json(h, ring),
                                "text": text})


def cmd_check_ainfty(args) -> Outcome:
    _, Phi = load_entity(args.file, ("ainfty",))
    rep = check_ainfty(Phi, args.max_p)
    return Outcome(PASS if rep.ok else FAIL, rep.summary(), {"command": "check-ainfty", **rep.to_json()})


def cmd_em_transfer(args) -> Outcome:
    _, F = load_entity(args.file, ("ainfty",))
    out = em_transfer(F, max_p=args.max_p)
    rep = check_ainfty(out)
    text_out = dumps(out.to_json())
    if args.out:
        Path(args.out).write_text(text_out)
        where = f"wrote {args.out}"
    else:
        where = "transferred functor:\n" + text_out.rstrip()
    ranks = ", ".join(f"{o}: {C.module.ranks}" for o, C in sorted(out.objects.items()))
    text = f"{where}\nsmall complexes: {ranks}\ncheck: {rep.summary()}"
    data = {"command": "em-transfer", "check": rep.to_json(), "out": args.out}
    if not args.out:
        data["functor"] = out.to_json()
    return Outcome(PASS if rep.ok else FAIL, text, data)


def cmd_check_twisting(args) -> Outcome:
    _, psi = load_entity(args.file, ("twisting",))
    rep = check_twisting(psi)
    return Outcome(PASS if rep.ok else FAIL, rep.summary(), {"command": "check-twisting", **rep.to_json()})


def cmd_ttp(args) -> Outcome:
    _, psi = load_entity(args.file, ("twisting",))
    rep = check_twisting(psi)
    if not rep.ok:
        return Outcome(FAIL, "twisting condition fails; no twisted tensor product\n" + rep.summary(),
                       {"command": "ttp", "ok": False, "twisting": rep.to_json()})
    T = total_complex(psi)
    lines = []
    data = {"command": "ttp", "ok": True, "ranks": {str(k): v for k, v in T.complex.module.ranks.items()}}
    if args.homology or not args.ss:
        ring = _ring(args.ring) or T.complex.ring
        h = T.homology(ring)
        text = format_homology(h, ring)
        lines.append(text)
        data["homology"] = _homology_json(h, ring)
        data["text"] = text
    if args.ss:
        ss = fiber_degree_spectral_sequence(T)
        for r in sorted(ss.pages):
            lines.append(f"E{r} page (ranks over Q):")
            lines.append(ss.table(r))
            if ss.differentials.get(r):
                lines.append(f"  rank d{r} = {ss.d_rank(r)}")
        lines.append("E_inf page:")
        lines.append(ss.table())
        lines.append("csv:")
        lines.append(ss.csv())
        data["spectral_sequence"] = ss.to_json()
    return Outcome(PASS, "\n".join(lines), data)


def cmd_euler(args) -> Outcome:
    _, psi = load_entity(args.file, ("twisting",))
    degs = psi.nonzero_degrees()
    n = args.n
    if n is None:
        top = [p for p in sorted(psi.fiber.ranks) if p > 0] if hasattr(psi.fiber, "ranks") else []
        n = (top[-1] + 1) if top else (degs[-1] if degs else None)
    if n is None:
        raise InputError("cannot infer the sphere dimension; pass --n", args.file)
    z = None
    if args.cycle != "auto":
        z = {str(k).replace(" ", ""): int(v) for k, v in read_json(args.cycle).items()}
    k = euler_class(psi, n, z)
    text = f"pass: d psi_{n} = 0; <psi_{n}, z> = {k}"
    return Outcome(PASS, text, {"command": "euler", "n": n, "pairing": str(k), "cycle": args.cycle})


def cmd_volodin(args) -> Outcome:
    kind, value = load_entity(args.file, ("volodin-object", "volodin-morphism", "volodin-chain",
                                          "volodin-fragment"))
    if kind == "volodin-object":
        order = sorted(value.order)
        text = f"pass: valid Volodin object (n={value.n}, ring {value.ring}, order {order})"
        return Outcome(PASS, text, {"command": "volodin", "kind": kind, "ok": True, "object": value.to_json()})
    if kind == "volodin-morphism":
        src, dst = value
        r = check_volodin_morphism(src, dst)
        text = f"{'pass' if r.ok else 'fail'}: {r.reason}"
        if r.T is not None:
            text += f"\nT = {r.T.to_json()}"
        return Outcome(PASS if r.ok else FAIL, text, {"command": "volodin", "kind": kind, **r.to_json()})
    if kind == "volodin-chain":
        chain, admissible = value
        try:
            res = forget_partial_orders(chain, admissible)
        except VolodinError as e:
            return Outcome(FAIL, f"fail: {e}", {"command": "volodin", "kind": kind, "ok": False,
                                                "reason": str(e)})
        order = sorted(res.minimal_order)
        text = f"pass: minimal admissible order {order} for a {len(res.simplex) - 1}-simplex"
        return Outcome(PASS, text, {"command": "volodin", "kind": kind, "ok": True, **res.to_json()})
    objects, morphisms, max_p = value
    psi = canonical_twisting_cochain(objects, morphisms, max_p)
    rep = check_twisting(psi)
    T = total_complex(psi)
    acyclic = all(g.is_zero() for g in T.homology("Q").values())
    text = (f"canonical twisting cochain on {len(objects)} objects: {rep.summary()}\n"
            f"total complex (chains up to length {psi.max_p}) acyclic over Q: {'yes' if acyclic else 'no'}")
    return Outcome(PASS if rep.ok else FAIL, text,
                   {"command": "volodin", "kind": kind, "twisting": rep.to_json(), "acyclic": acyclic,
                    "max_p": psi.max_p})


def cmd_whitehead(args) -> Outcome:
    kind, value = load_entity(args.file, ("whitehead-object", "whitehead-morphism"))
    if kind == "whitehead-object":
        rep = check_whitehead_object(value)
    else:
        rep = check_whitehead_morphism(*value)
    return Outcome(PASS if rep.ok else FAIL, rep.summary(), {"command": "whitehead", "kind": kind, **rep.to_json()})


def _points(text: str | None, default):
    if text is None:
        return default
    try:
        return [[float(c) for c in p.split(",")] for p in text.split(";") if p.strip()]
    except ValueError:
        raise InputError(f"cannot parse point list {text!r}; use 'x,y;x,y'") from None


def _family(args):
    return make_family(args.family, parse_params(args.params))


def cmd_flatness(args) -> Outcome:
    fam = _family(args)
    if fam.exact is None:
        raise InputError(f"family {fam.name!r} has no exact polynomial form; use transport or homotopy")
    rep = check_flatness(fam.exact)
    tildes = {p: tilde_check(A) for p, A in sorted(fam.exact.components.items())}
    ok = rep.ok and all(t.ok for t in tildes.values())
    lines = [f"family {fam.describe()}: {fam.description}", rep.summary()]
    for p, t in tildes.items():
        lines.append(f"tilde check A_{p}: {t.summary()}")
    data = {"command": "superconn flatness", "family": fam.describe(), "ok": ok, "flatness": rep.to_json(),
            "tilde": {str(p): t.to_json() for p, t in tildes.items()}}
    return Outcome(PASS if ok else FAIL, "\n".join(lines), data)


def cmd_transport(args) -> Outcome:
    fam = _family(args)
    path = _points(args.path, [[0.0] * fam.m, [1.0] * fam.m])
    res = transport(fam, path, args.steps, args.method)
    cm = check_chain_map(fam, path, args.steps, args.method)
    lines = [f"family {fam.describe()}: transport along {path} with N={args.steps} ({args.method})",
             "Phi = " + json.dumps(format_matrix(res.matrix, args.digits)),
             f"|Phi(N) - Phi(2N)| = {res.change:.3e}",
             "richardson = " + json.dumps(format_matrix(res.richardson, args.digits)),
             cm.summary()]
    data = {"command": "superconn transport", "family": fam.describe(), "path": path,
            "transport": res.to_json(args.digits), "chain_map": cm.to_json()}
    reference = _constant_reference(fam, path)
    if reference is not None:
        err = float(np.max(np.abs(res.matrix - reference)))
        lines.append(f"constant A1: |Phi - expm| = {err:.3e}")
        data["expm_error"] = err
    if args.levels > 1:
        rows = transport_convergence(fam, path, [args.steps * 2 ** i for i in range(args.levels)],
                                     args.method, reference)
        lines.append(table_csv(rows).rstrip())
        data["table"] = rows
    return Outcome(PASS if cm.consistent else FAIL, "\n".join(lines), data)


def _constant_reference(fam, path):
    pts = np.asarray(path, dtype=float)
    grid = np.concatenate([a + np.linspace(0, 1, 5)[:, None] * (b - a) for a, b in zip(pts[:-1], pts[1:])])
    A1 = fam.A1(grid)
    if not np.all(A1 == A1[0]):
        return None
    out = np.eye(fam.rank)
    for a, b in zip(pts[:-1], pts[1:]):
        out = expm(np.einsum("kij,k->ij", A1[0], b - a)) @ out
    return out


def cmd_homotopy(args) -> Outcome:
    fam = _family(args)
    simplex = _points(args.simplex, [list(v) + [0.0] * (fam.m - 2) for v in STANDARD_TRIANGLE])
    if len(simplex) != 3:
        raise InputError("a 2-simplex needs exactly three vertices")
    rep = check_homotopy(fam, simplex, args.grid, args.steps, args.method)
    lines = [f"family {fam.describe()} on simplex {simplex}", rep.summary(args.digits)]
    data = {"command": "superconn homotopy", "family": fam.describe(), "simplex": simplex,
            "report": rep.to_json(args.digits)}
    final = rep.residual
    if args.levels > 1:
        levels = [(args.grid * 2 ** i, args.steps * 2 ** i) for i in range(args.levels)]
        rows = homotopy_convergence(fam, levels, simplex, args.method)
        lines.append(table_csv(rows).rstrip())
        data["table"] = rows
        final = rows[-1]["residual"]
    ok = final <= args.tol
    lines.append(f"{'pass' if ok else 'fail'}: residual {final:.3e} {'<=' if ok else '>'} {args.tol:g}")
    data["ok"] = ok
    return Outcome(PASS if ok else FAIL, "\n".join(lines), data)


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the machine-readable report")

    p = argparse.ArgumentParser(prog="twistkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"twistkit {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("homology", parents=[common], help="homology of a complex or simplicial complex")
    s.add_argument("file")
    s.add_argument("--ring", choices=["z", "q", "Z", "Q"])
    s.set_defaults(fn=cmd_homology)

    s = sub.add_parser("check-ainfty", parents=[common], help="check the A-infinity cocycle condition")
    s.add_argument("file")
    s.add_argument("--max-p", type=int)
    s.set_defaults(fn=cmd_check_ainfty)

    s = sub.add_parser("em-transfer", parents=[common], help="transfer a strict functor to homology")
    s.add_argument("file")
    s.add_argument("--out", help="write the transferred functor here (default: print it)")
    s.add_argument("--max-p", type=int)
    s.set_defaults(fn=cmd_em_transfer)

    s = sub.add_parser("check-twisting", parents=[common], help="check the twisting condition")
    s.add_argument("file")
    s.set_defaults(fn=cmd_check_twisting)

    s = sub.add_parser("ttp", parents=[common], help="twisted tensor product")
    s.add_argument("file")
    s.add_argument("--homology", action="store_true", help="print the homology (default)")
    s.add_argument("--ss", action="store_true", help="print spectral sequence page ranks")
    s.add_argument("--ring", choices=["z", "q", "Z", "Q"])
    s.set_defaults(fn=cmd_ttp)

    s = sub.add_parser("euler", parents=[common], help="Euler class pairing of a sphere-bundle cochain")
    s.add_argument("file")
    s.add_argument("--cycle", default="auto", help="'auto' or a JSON file {simplex: coefficient}")
    s.add_argument("--n", type=int, help="degree of the Euler cocycle (default: fiber top degree + 1)")
    s.set_defaults(fn=cmd_euler)

    for name, fn, hlp in (("volodin", cmd_volodin, "Volodin category validators"),
                          ("whitehead", cmd_whitehead, "Whitehead category validators")):
        s = sub.add_parser(name, help=hlp)
        ss = s.add_subparsers(dest="action", required=True)
        c = ss.add_parser("check", parents=[common], help="validate an object, morphism, chain or fragment")
        c.add_argument("file")
        c.set_defaults(fn=fn)

    s = sub.add_parser("superconn", help="flat superconnection checks")
    ss = s.add_subparsers(dest="action", required=True)
    fam = argparse.ArgumentParser(add_help=False)
    fam.add_argument("--family", required=True)
    fam.add_argument("--params", nargs="*", default=[], help="name=value rationals, e.g. lam=1/2")
    num = argparse.ArgumentParser(add_help=False)
    num.add_argument("--method", choices=["expm", "euler"], default="expm")
    num.add_argument("--digits", type=int, default=10)
    num.add_argument("--levels", type=int, default=1, help="convergence table with this many doublings")

    c = ss.add_parser("flatness", parents=[common, fam], help="exact flatness and tilde checks")
    c.set_defaults(fn=cmd_flatness)
    c = ss.add_parser("transport", parents=[common, fam, num], help="parallel transport along a path")
    c.add_argument("--steps", type=int, required=True)
    c.add_argument("--path", help="points 'x,y;x,y;...' (default: origin to all-ones)")
    c.set_defaults(fn=cmd_transport)
    c = ss.add_parser("homotopy", parents=[common, fam, num], help="psi_2 chain homotopy check")
    c.add_argument("--grid", type=int, required=True)
    c.add_argument("--steps", type=int, required=True)
    c.add_argument("--simplex", help="three points 'x,y;x,y;x,y' (default: standard triangle)")
    c.add_argument("--tol", type=float, default=1e-4)
    c.set_defaults(fn=cmd_homotopy)
    return p


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = args.fn(args)
    except (InputError, VolodinError, AInftyError, TwistError, ComplexError, FormError, TransportError,
            ValueError, KeyError, TypeError) as e:
        msg = str(e) if not isinstance(e, KeyError) else f"missing field {e.args[0]!r}"
        if getattr(args, "json", False):
            stdout.write(dumps({"command": args.command, "error": msg, "exit": INVALID}))
        else:
            stdout.write(f"error: {msg}\n")
        return INVALID
    if args.json:
        stdout.write(dumps({**out.data, "exit": out.code}))
    else:
        stdout.write(out.text.rstrip("\n") + "\n")
    return out.code


def main(argv=None) -> int:
    try:
        return run(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else INVALID


if __name__ == "__main__":
    sys.exit(main())
