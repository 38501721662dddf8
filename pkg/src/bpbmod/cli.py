"""Command-line front end.

Results go to stdout, diagnostics to stderr.  Exit codes: 0 success, 1 failed
verification, 2 unreadable or invalid space / bad arguments, 3 unsupported
space for the requested computation, 4 vacuous certificate.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .attainment import dist_to_pi, l1_sum_witness, linf_sum_witness
from .errors import (
    BadParameter,
    BpbError,
    InvalidPolytope,
    MeshTooCoarse,
    OutOfDomain,
    SpecParseError,
    UnsupportedSpace,
)
from .geometry import SymmetricPolytope, polar
from .modulus import (
    MAX_CERT_DELTA,
    ModulusEstimate,
    can_certify,
    has_exact_distance,
    estimate_phi,
    phi_curve,
    reference_name,
    reference_phi,
)
from .plotting import CurveRow, curve_csv, curve_svg, parse_range
from .records import make_record
from .spaces import Diamond, catalog, diamond_points
from .specfile import build_space, dual_spec, format_spec, load_space, parse_spec
from .squareness import containment_check, squareness_defect

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_UNSUPPORTED, EXIT_VACUOUS = 0, 1, 2, 3, 4
DEFAULT_DIAMOND_EPS = 0.6


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _vec(v) -> str:
    return "(" + ", ".join(f"{float(c):.10g}" for c in np.asarray(v)) + ")"


def _save(record, args) -> None:
    if args.no_record:
        return
    path = record.write(args.out)
    _err(f"record written to {path}")


# ---------------------------------------------------------------- modulus


def _print_estimate(est: ModulusEstimate) -> None:
    print(f"delta      {est.delta!r}")
    print(f"spherical  {'yes' if est.spherical else 'no'}")
    print(f"lower      {est.lower:.10f}")
    print(f"upper      {est.upper:.10f}")
    print(f"cap        {est.cap:.10f}")
    if est.certified:
        print(f"grid_upper {est.grid_upper:.10f}")
        print(f"mesh       {est.mesh!r}")
        print(f"margin     {est.margin:.10f}")
    print(f"certified  {'yes' if est.certified else 'no'}")
    if est.witness is not None:
        print(f"witness x  {_vec(est.witness.x)}")
        print(f"witness f  {_vec(est.witness.f)}")
        print(f"pairing    {float(est.witness.f @ est.witness.x):.10f}")
    if est.nearest is not None:
        print(f"nearest x  {_vec(est.nearest.x)}")
        print(f"nearest f  {_vec(est.nearest.f)}")


def _estimate_outputs(est: ModulusEstimate) -> dict:
    out = {
        "lower": est.lower,
        "upper": est.upper,
        "cap": est.cap,
        "certified": est.certified,
        "grid_upper": est.grid_upper,
        "margin": est.margin if est.certified else None,
        "vacuous": est.vacuous,
        "witness_distance": est.witness_distance,
        "stats": est.stats,
    }
    if est.witness is not None:
        out["witness"] = {"x": est.witness.x, "f": est.witness.f}
    if est.nearest is not None:
        out["nearest"] = {"x": est.nearest.x, "f": est.nearest.f}
    return out


def cmd_modulus(args) -> int:
    S, spec, text = load_space(args.space)
    delta = args.delta
    if not 0 < delta < 2:
        raise OutOfDomain(f"delta must lie in (0, 2), got {delta}")
    status = EXIT_OK
    if S.dim > 3:
        # exact distances above dimension 3 cost one LP per face per evaluation
        raise UnsupportedSpace(f"modulus runs need dimension at most 3, got {S.dim}")
    if not can_certify(S, delta):
        if not has_exact_distance(S):
            _err(f"no certified covering for {S!r}; reporting the search bound and the universal cap")
            status = EXIT_UNSUPPORTED
        else:
            _err(f"certified runs are limited to delta <= {MAX_CERT_DELTA}; upper is the universal cap")
    t0 = time.perf_counter()
    est = estimate_phi(S, delta, args.spherical, certify=True, mesh=args.mesh, budget=args.budget, seed=args.seed)
    _err(f"elapsed {time.perf_counter() - t0:.2f}s")
    _print_estimate(est)
    if est.vacuous:
        _err(f"certificate is vacuous at mesh {est.mesh}: grid bound {est.grid_upper:.6f} >= cap {est.cap:.6f}")
        status = EXIT_VACUOUS
    params = {"delta": delta, "spherical": args.spherical, "mesh": est.mesh, "budget": args.budget, "seed": args.seed}
    _save(make_record("modulus", text, params, _estimate_outputs(est)), args)
    return status


# ---------------------------------------------------------------- verify


@dataclass
class Check:
    suite: str
    name: str
    expected: str
    computed: str
    ok: bool

    def line(self) -> str:
        return f"{'PASS' if self.ok else 'FAIL'}  {self.suite}/{self.name}: expected {self.expected}, computed {self.computed}"


def _close(suite, name, computed, expected, tol) -> Check:
    return Check(suite, name, f"{expected:.8f} ± {tol:g}", f"{computed:.8f}", abs(computed - expected) <= tol)


def _suite_line(seed: int) -> list[Check]:
    S = catalog("line")
    out = []
    for d in (0.2, 0.7, 1.0, 1.2, 1.8):
        est = estimate_phi(S, d, seed=seed)
        out.append(_close("line", f"phi({d})", est.lower, reference_phi("line", d), 1e-6))
    for d in (0.3, 1.5):
        est = estimate_phi(S, d, spherical=True, seed=seed)
        out.append(_close("line", f"spherical({d})", est.lower, 0.0, 0.0))
    return out


def _suite_hilbert(seed: int) -> list[Check]:
    S = catalog("euclidean", n=2)
    out = []
    for d in (0.2, 0.5, 0.9):
        est = estimate_phi(S, d, spherical=True, seed=seed)
        out.append(_close("hilbert", f"spherical({d})", est.lower, reference_phi("euclidean", d, True), 5e-3))
    for d in (0.2, 0.5, 0.9, 1.2, 1.6):
        est = estimate_phi(S, d, seed=seed)
        out.append(_close("hilbert", f"phi({d})", est.lower, reference_phi("euclidean", d), 5e-3))
    return out


def _suite_linf2(seed: int) -> list[Check]:
    S = catalog("linf2")
    out = []
    for spherical in (False, True):
        tag = "spherical" if spherical else "phi"
        for d in (0.1, 0.5, 1.0, 1.5):
            h = 0.02 if d <= 1 else 0.05
            est = estimate_phi(S, d, spherical, mesh=h, seed=seed)
            cap = math.sqrt(2 * d)
            out.append(Check("linf2", f"{tag}_lower({d})", f">= {cap - 1e-3:.8f}", f"{est.lower:.8f}", est.lower >= cap - 1e-3))
            out.append(
                Check("linf2", f"{tag}_upper({d})", f"<= {cap + h + 1e-6:.8f}", f"{est.grid_upper:.8f}",
                      est.grid_upper <= cap + h + 1e-6)
            )
    return out


def _suite_l1sum(seed: int) -> list[Check]:
    out = []
    cases = [
        ("l1sum", ["line", "line"], l1_sum_witness),
        ("l1sum", ["line", "l1-2"], l1_sum_witness),
        ("linfsum", ["line", "line"], linf_sum_witness),
        ("linfsum", ["line", "linf2"], linf_sum_witness),
    ]
    for name, parts, make in cases:
        S = catalog(name, parts=parts)
        for d in (0.1, 0.3, 0.5):
            w = make(S, d)
            dist, _ = dist_to_pi(S, w.x, w.f)
            cap = math.sqrt(2 * d)
            label = f"{name}{S.dim}({d})"
            ok = w.check(S) and dist >= cap - 1e-8
            out.append(Check("l1sum", label, f">= {cap - 1e-8:.10f}", f"{dist:.10f}", ok))
    return out


def _diamond_eps(space_arg: str | None) -> tuple[float | None, object, str]:
    if space_arg is None:
        return DEFAULT_DIAMOND_EPS, Diamond(DEFAULT_DIAMOND_EPS), "built-in"
    S, spec, _ = load_space(space_arg)
    eps = spec.param_dict.get("eps")
    return eps, S, space_arg


def _suite_diamond(seed: int, space_arg: str | None) -> list[Check]:
    suite = "diamond"
    try:
        eps, S, source = _diamond_eps(space_arg)
    except (BpbError, OSError) as exc:
        return [Check(suite, "spec-valid", "a valid polytope", f"{type(exc).__name__}: {exc}", False)]
    out = [Check(suite, "spec-valid", "a valid polytope", source, True)]
    if eps is None or S.dim != 3 or S.poly is None:
        out.append(Check(suite, "eps-label", "a 3-dimensional diamond with eps", repr(S), False))
        return out
    ref = SymmetricPolytope(diamond_points(eps), symmetrize=True)
    B = S.poly.ball
    same = B.same_vertex_set(ref)
    out.append(Check(suite, "vertex-set", f"the {len(ref.vertices)} diamond vertices",
                     f"{len(B.vertices)} vertices, {'same set' if same else 'different set'}", same))
    rt = polar(polar(B))
    out.append(Check(suite, "polar-round-trip", "same vertex set", "same" if rt.same_vertex_set(B) else "different",
                     rt.same_vertex_set(B)))
    W = S.poly.polar
    for label, T in (("swap-12", np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1.0]])),
                     ("negate-2", np.diag([1.0, -1.0, 1.0]))):
        ok = B.same_vertex_set(SymmetricPolytope(B.vertices @ T.T)) and W.same_vertex_set(SymmetricPolytope(W.vertices @ T.T))
        out.append(Check(suite, f"isometry-{label}", "vertex sets permuted", "yes" if ok else "no", ok))
    g = np.linspace(-1.5, 1.5, 31)
    A, Bg = np.meshgrid(g, g)
    P = np.stack([A.ravel(), Bg.ravel(), np.zeros(A.size)], axis=1)
    err = float(np.max(np.abs(S.norms(P) - np.max(np.abs(P[:, :2]), axis=1))))
    out.append(Check(suite, "plane-x3=0", "max(|a|,|b|) to 1e-9", f"max error {err:.2e}", err <= 1e-9))
    n1 = S.norm([0, 0, eps / 2])
    out.append(_close(suite, "norm(0,0,eps/2)", n1, 2 * eps / 3, 1e-9))
    n2 = S.dual_norm([0, 0, eps])
    out.append(_close(suite, "dualnorm(0,0,eps)", n2, 0.75 * eps, 1e-9))
    d = eps * eps / 2
    est = estimate_phi(S, d, seed=seed, mesh=0.05)
    cap = math.sqrt(2 * d)
    out.append(Check(suite, f"strict-gap({d:g})", f"< {cap:.8f}",
                     f"{est.grid_upper:.8f} (margin {est.margin:.6f})", est.certified and est.grid_upper < cap))
    return out


def _suite_duality(seed: int) -> list[Check]:
    out = []
    pairs = [("linf2", "l1-2"), ("l1sum", "linfsum")]
    for a, b in pairs:
        SA, SB = catalog(a), catalog(b)
        for d in (0.3, 1.0):
            ea = estimate_phi(SA, d, seed=seed)
            eb = estimate_phi(SB, d, seed=seed)
            # each certified interval must overlap the other
            ok = ea.lower <= eb.upper + 1e-9 and eb.lower <= ea.upper + 1e-9
            out.append(Check("duality", f"{a}~{b}({d})", f"[{ea.lower:.6f}, {ea.upper:.6f}]",
                             f"[{eb.lower:.6f}, {eb.upper:.6f}]", ok))
    D = Diamond(DEFAULT_DIAMOND_EPS)
    d = DEFAULT_DIAMOND_EPS**2 / 2
    ea = estimate_phi(D, d, seed=seed, mesh=0.05)
    eb = estimate_phi(D.dual(), d, seed=seed, mesh=0.05)
    ok = ea.lower <= eb.upper + 1e-9 and eb.lower <= ea.upper + 1e-9
    out.append(Check("duality", f"diamond~dual({d:g})", f"[{ea.lower:.6f}, {ea.upper:.6f}]",
                     f"[{eb.lower:.6f}, {eb.upper:.6f}]", ok))
    back = build_space(dual_spec(build_space(dual_spec(D))))
    ok = back.poly.ball.same_vertex_set(D.poly.ball)
    out.append(Check("duality", "diamond-dual-dual", "same vertex set", "same" if ok else "different", ok))
    for name in ("linf2", "l1sum"):
        S = catalog(name)
        again = parse_spec(format_spec(dual_spec(S)))
        ok = build_space(again).dual().norm([0.3, -0.7]) == S.norm([0.3, -0.7])
        out.append(Check("duality", f"{name}-dual-spec", "dual of dual has the same norm", "same" if ok else "different", ok))
    return out


SUITES = ("line", "hilbert", "linf2", "l1sum", "diamond", "duality")


def run_suite(name: str, seed: int = 0, space: str | None = None) -> list[Check]:
    if name == "all":
        return [c for s in SUITES for c in run_suite(s, seed, space)]
    if name == "diamond":
        return _suite_diamond(seed, space)
    return {
        "line": _suite_line,
        "hilbert": _suite_hilbert,
        "linf2": _suite_linf2,
        "l1sum": _suite_l1sum,
        "duality": _suite_duality,
    }[name](seed)


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    checks = run_suite(args.suite, args.seed, args.space)
    for c in checks:
        print(c.line())
    failed = [c for c in checks if not c.ok]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    _err(f"elapsed {time.perf_counter() - t0:.2f}s")
    if failed:
        _err("failed: " + ", ".join(f"{c.suite}/{c.name}" for c in failed))
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------- plot


def curve_rows(S, deltas, spherical: bool, certify: bool, mesh, budget, seed) -> list[CurveRow]:
    ref = reference_name(S)
    ests = phi_curve(S, deltas, spherical, certify=certify, mesh=mesh, budget=budget, seed=seed)
    rows = []
    for d, e in zip(deltas, ests):
        r = reference_phi(ref, d, spherical) if ref is not None else None
        rows.append(CurveRow(d, e.lower, e.upper, r))
    return rows


def cmd_plot(args) -> int:
    S, spec, text = load_space(args.space)
    deltas = parse_range(args.range, args.step)
    certify = args.certify and S.dim <= 3 and has_exact_distance(S)
    if args.certify and not certify:
        _err("no certified covering for this space; upper column is the universal cap")
    rows = curve_rows(S, deltas, args.spherical, certify, args.mesh, args.budget, args.seed)
    if args.format == "csv":
        body = curve_csv(rows)
    else:
        ref = reference_name(S)
        fn = (lambda d: reference_phi(ref, d, args.spherical)) if ref is not None else None
        title = f"{'spherical ' if args.spherical else ''}modulus, {spec.kind}"
        body = curve_svg(rows, title, fn)
    if args.out:
        Path(args.out).write_text(body)
        _err(f"wrote {args.out}")
    else:
        sys.stdout.write(body)
    return EXIT_OK


# ---------------------------------------------------------------- squareness / dual


def cmd_squareness(args) -> int:
    S, spec, text = load_space(args.space)
    if S.dim < 2:
        raise BadParameter("squareness needs dimension at least 2")
    w = squareness_defect(S, budget=args.budget, seed=args.seed)
    print(f"defect     {w.defect:.12f}")
    print(f"u          {_vec(w.u)}")
    print(f"v          {_vec(w.v)}")
    print(f"|u+v|      {S.norm(w.u + w.v):.12f}")
    print(f"|u-v|      {S.norm(w.u - w.v):.12f}")
    outputs = {"defect": w.defect, "u": w.u, "v": w.v}
    if w.defect <= 1e-12:
        a, b = w.basis()
        print(f"square basis a = {_vec(a)}")
        print(f"square basis b = {_vec(b)}")
        outputs["basis"] = [a, b]
    if args.containment:
        rep = containment_check(S, seed=args.seed)
        print(f"dual defect {rep.dual_defect:.12f}")
        print(f"implication applies: {'yes' if rep.asserted else 'no'}")
        for d, up, cap in rep.entries:
            print(f"  delta {d!r}: certified upper {up:.8f} vs cap {cap:.8f}")
        if rep.strict_despite_square:
            print("strict bound despite a square in the dual at delta " + ", ".join(map(repr, rep.strict_despite_square)))
        outputs["containment"] = {"dual_defect": rep.dual_defect, "asserted": rep.asserted, "entries": rep.entries,
                                  "violations": rep.violations, "strict_despite_square": rep.strict_despite_square}
    params = {"budget": args.budget, "seed": args.seed, "containment": args.containment}
    _save(make_record("squareness", text, params, outputs), args)
    if args.containment and not rep.passed:
        return EXIT_FAIL
    return EXIT_OK


def cmd_dual(args) -> int:
    S, spec, text = load_space(args.space)
    out = dual_spec(S, spec.param_dict.get("eps"))
    body = format_spec(out)
    if args.out:
        Path(args.out).write_text(body)
        _err(f"wrote {args.out}")
    else:
        sys.stdout.write(body)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _delta(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bpbmod", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def space_arg(sp):
        sp.add_argument("space", help="space file (.space) or catalog name such as linf2, diamond:eps=0.6, lp:p=3,n=2")

    def record_args(sp):
        sp.add_argument("--out", help="record path (default bpb-records/<command>-<hash>.json)")
        sp.add_argument("--no-record", action="store_true", help="do not write a result record")

    m = sub.add_parser("modulus", help="lower and certified upper bounds at one delta")
    space_arg(m)
    m.add_argument("delta", type=_delta)
    m.add_argument("--spherical", action="store_true")
    m.add_argument("--mesh", type=float, default=None, help="certification tolerance h")
    m.add_argument("--budget", type=int, default=None, help="search evaluations")
    m.add_argument("--seed", type=int, default=0)
    record_args(m)
    m.set_defaults(func=cmd_modulus)

    v = sub.add_parser("verify", help="run a named verification suite")
    v.add_argument("suite", choices=SUITES + ("all",))
    v.add_argument("--space", help="space file used by the diamond checks")
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    pl = sub.add_parser("plot", help="curve export as CSV or SVG")
    space_arg(pl)
    pl.add_argument("range", nargs="?", default="0.05..1.95", help="delta range a..b")
    pl.add_argument("--step", type=float, default=0.05)
    pl.add_argument("--spherical", action="store_true")
    pl.add_argument("--format", choices=("csv", "svg"), default="csv")
    pl.add_argument("--out", help="output file (default stdout)")
    pl.add_argument("--mesh", type=float, default=None)
    pl.add_argument("--budget", type=int, default=None)
    pl.add_argument("--seed", type=int, default=0)
    pl.add_argument("--no-certify", dest="certify", action="store_false", help="skip the covering; upper is the cap")
    pl.set_defaults(func=cmd_plot)

    s = sub.add_parser("squareness", help="search for an isometric copy of the l-infinity plane")
    space_arg(s)
    s.add_argument("--budget", type=int, default=60_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--containment", action="store_true", help="also test the dual-square criterion")
    record_args(s)
    s.set_defaults(func=cmd_squareness)

    d = sub.add_parser("dual", help="write the dual space as a spec")
    space_arg(d)
    d.add_argument("--out", help="output file (default stdout)")
    d.set_defaults(func=cmd_dual)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except (SpecParseError, InvalidPolytope, BadParameter, OutOfDomain, OSError) as exc:
        _err(f"error: {exc}")
        return EXIT_PARSE
    except UnsupportedSpace as exc:
        _err(f"unsupported: {exc}")
        return EXIT_UNSUPPORTED
    except MeshTooCoarse as exc:
        _err(f"vacuous certificate: {exc}")
        return EXIT_VACUOUS
    except BpbError as exc:
        _err(f"error: {exc}")
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
