"""Plain-text space declarations.

A space file is line oriented::

    bpb-space 1
    kind diamond
    eps 0.6

Recognized keys are ``kind``, ``eps``, ``p``, ``n``, ``part`` (one line per
summand, ``part <kind> key=value ...``) and ``vertex`` (one line per vertex
of a ``polytopal`` ball).  Blank lines and ``#`` comments are ignored.
Floats are written with ``repr`` so a round trip is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import BadParameter, SpecParseError, UnknownSpace, UnsupportedSpace
from .geometry import SymmetricPolytope
from .spaces import (
    CATALOG_NAMES,
    Diamond,
    DirectSum,
    Euclidean,
    Line,
    LpSpace,
    NormedSpace,
    Polytopal,
    catalog,
)

HEADER = "bpb-space"
VERSION = 1
KINDS = CATALOG_NAMES + ("polytopal",)
PARAM_KEYS = ("eps", "p", "n")
ALIASES = {
    "euclidean2": ("euclidean", {"n": 2}),
    "hilbert": ("euclidean", {"n": 2}),
    "l1-3": ("lp", {"p": 1.0, "n": 3}),
    "linf3": ("lp", {"p": math.inf, "n": 3}),
}


@dataclass(frozen=True)
class SpaceSpec:
    kind: str
    params: tuple[tuple[str, float | int], ...] = ()
    parts: tuple["SpaceSpec", ...] = ()
    vertices: tuple[tuple[float, ...], ...] | None = None

    @property
    def param_dict(self) -> dict:
        return dict(self.params)


def _fmt_float(v: float) -> str:
    v = float(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def _parse_float(tok: str, where: str) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise SpecParseError(f"{where}: not a number: {tok!r}") from None
    if math.isnan(v):
        raise SpecParseError(f"{where}: NaN is not allowed")
    return v


def _convert_param(key: str, tok: str, where: str) -> float | int:
    if key not in PARAM_KEYS:
        raise SpecParseError(f"{where}: unknown parameter {key!r}")
    if key == "n":
        try:
            return int(tok)
        except ValueError:
            raise SpecParseError(f"{where}: n must be an integer, got {tok!r}") from None
    return _parse_float(tok, where)


def _normalize_params(params: dict) -> tuple[tuple[str, float | int], ...]:
    return tuple((k, params[k]) for k in PARAM_KEYS if k in params)


def _make(kind: str, params: dict, parts=(), vertices=None, where: str = "spec") -> SpaceSpec:
    if kind in ALIASES:
        base, extra = ALIASES[kind]
        kind, params = base, {**extra, **params}
    if kind not in KINDS:
        raise SpecParseError(f"{where}: unknown kind {kind!r}")
    return SpaceSpec(kind, _normalize_params(params), tuple(parts), vertices)


def parse_spec(text: str) -> SpaceSpec:
    lines = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((no, line.split()))
    if not lines or lines[0][1][0] != HEADER:
        raise SpecParseError(f"first line must be '{HEADER} {VERSION}'")
    no, head = lines[0]
    if len(head) != 2 or head[1] != str(VERSION):
        raise SpecParseError(f"line {no}: unsupported schema version {' '.join(head[1:])!r}")
    kind = None
    params: dict = {}
    parts: list[SpaceSpec] = []
    vertices: list[tuple[float, ...]] = []
    for no, toks in lines[1:]:
        where = f"line {no}"
        key, args = toks[0], toks[1:]
        if key == "kind":
            if kind is not None or len(args) != 1:
                raise SpecParseError(f"{where}: exactly one 'kind <name>' line is required")
            kind = args[0]
        elif key in PARAM_KEYS:
            if key in params or len(args) != 1:
                raise SpecParseError(f"{where}: '{key}' takes one value and may appear once")
            params[key] = _convert_param(key, args[0], where)
        elif key == "part":
            if not args:
                raise SpecParseError(f"{where}: 'part' needs a kind")
            sub = {}
            for item in args[1:]:
                k, sep, v = item.partition("=")
                if not sep:
                    raise SpecParseError(f"{where}: expected key=value, got {item!r}")
                sub[k] = _convert_param(k, v, where)
            if args[0] in ("polytopal", "l1sum", "linfsum"):
                raise SpecParseError(f"{where}: parts must be simple catalog spaces")
            parts.append(_make(args[0], sub, where=where))
        elif key == "vertex":
            if not args:
                raise SpecParseError(f"{where}: empty vertex")
            vertices.append(tuple(_parse_float(t, where) for t in args))
        else:
            raise SpecParseError(f"{where}: unknown key {key!r}")
    if kind is None:
        raise SpecParseError("missing 'kind' line")
    if kind == "polytopal":
        if not vertices:
            raise SpecParseError("a polytopal space needs vertex lines")
        if len({len(v) for v in vertices}) != 1:
            raise SpecParseError("vertices have different lengths")
        if set(params) - {"eps"}:
            raise SpecParseError("a polytopal space only accepts an 'eps' label")
    elif vertices:
        raise SpecParseError(f"vertex lines are only valid for polytopal spaces, not {kind!r}")
    if parts and kind not in ("l1sum", "linfsum"):
        raise SpecParseError(f"part lines are only valid for sums, not {kind!r}")
    return _make(kind, params, parts, tuple(vertices) if vertices else None)


def format_spec(spec: SpaceSpec) -> str:
    out = [f"{HEADER} {VERSION}", f"kind {spec.kind}"]
    for k, v in spec.params:
        out.append(f"{k} {v}" if k == "n" else f"{k} {_fmt_float(v)}")
    for part in spec.parts:
        items = [f"{k}={v if k == 'n' else _fmt_float(v)}" for k, v in part.params]
        out.append(" ".join(["part", part.kind, *items]))
    for vert in spec.vertices or ():
        out.append(" ".join(["vertex", *(_fmt_float(c) for c in vert)]))
    return "\n".join(out) + "\n"


def build_space(spec: SpaceSpec) -> NormedSpace:
    """Instantiate the space; validation errors surface as library exceptions."""
    params = spec.param_dict
    if spec.kind == "polytopal":
        return Polytopal(SymmetricPolytope(np.array(spec.vertices, dtype=float)))
    if spec.kind in ("l1sum", "linfsum"):
        parts = [build_space(p) for p in spec.parts] if spec.parts else ["line", "line"]
        return catalog(spec.kind, parts=parts)
    return catalog(spec.kind, **params)


def spec_for(S: NormedSpace) -> SpaceSpec:
    """A spec that rebuilds ``S``."""
    if isinstance(S, Line):
        return SpaceSpec("line")
    if isinstance(S, Euclidean):
        return _make("euclidean", {"n": S.dim})
    if isinstance(S, LpSpace):
        if S.dim == 2 and math.isinf(S.p):
            return SpaceSpec("linf2")
        if S.dim == 2 and S.p == 1:
            return SpaceSpec("l1-2")
        return _make("lp", {"p": S.p, "n": S.dim})
    if isinstance(S, Diamond):
        return _make("diamond", {"eps": S.eps})
    if isinstance(S, DirectSum):
        parts = []
        for part in S.parts:
            sub = spec_for(part)
            if sub.kind in ("polytopal", "l1sum", "linfsum"):
                raise UnsupportedSpace("sums of polytopal or nested sums cannot be written as a spec")
            parts.append(sub)
        return SpaceSpec("l1sum" if S.combiner == "l1" else "linfsum", (), tuple(parts))
    if isinstance(S, Polytopal):
        return vertex_spec(S)
    raise UnsupportedSpace(f"no spec form for {S!r}")


def vertex_spec(S: NormedSpace, label: float | None = None) -> SpaceSpec:
    """The unit ball of a polyhedral space as an explicit vertex list."""
    if S.poly is None:
        raise UnsupportedSpace(f"{S!r} has no polytope unit ball")
    V = S.poly.ball.vertices
    # flush rounding noise and signed zeros so written files stay readable
    V = np.where(np.abs(V) < 1e-12, 0.0, V) + 0.0
    verts = tuple(tuple(float(c) for c in row) for row in V)
    params = {"eps": float(label)} if label is not None else {}
    return SpaceSpec("polytopal", _normalize_params(params), (), verts)


def dual_spec(S: NormedSpace, label: float | None = None) -> SpaceSpec:
    """Spec of the dual space: vertex lists for polyhedral balls, sums part by part.

    ``label`` (default: the diamond parameter of ``S``) is carried along as
    the ``eps`` line of a vertex-list result.
    """
    D = S.dual()
    if isinstance(S, DirectSum):
        return spec_for(D)
    if D.poly is not None and not isinstance(D, Line):
        if label is None:
            label = getattr(S, "eps", None)
        return vertex_spec(D, label)
    return spec_for(D)


def parse_inline(arg: str) -> SpaceSpec:
    """``name`` or ``name:key=value,key=value`` as a catalog spec."""
    name, _, rest = arg.partition(":")
    params = {}
    if rest:
        for item in rest.split(","):
            k, sep, v = item.partition("=")
            if not sep:
                raise SpecParseError(f"expected key=value in {arg!r}, got {item!r}")
            params[k.strip()] = _convert_param(k.strip(), v.strip(), arg)
    if name == "polytopal":
        raise SpecParseError("polytopal spaces need a spec file with vertex lines")
    return _make(name, params, where=arg)


def load_spec(arg: str) -> tuple[SpaceSpec, str]:
    """Read a spec from a file path or an inline catalog name; returns the spec and its text."""
    path = Path(arg)
    if path.exists() and not path.is_dir():
        text = path.read_text()
        return parse_spec(text), text
    if arg.endswith(".space"):
        raise SpecParseError(f"no such spec file: {arg}")
    spec = parse_inline(arg)
    return spec, format_spec(spec)


def load_space(arg: str) -> tuple[NormedSpace, SpaceSpec, str]:
    spec, text = load_spec(arg)
    try:
        S = build_space(spec)
    except (UnknownSpace, BadParameter) as exc:
        raise SpecParseError(str(exc)) from exc
    return S, spec, text
