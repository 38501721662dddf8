"""CSV and SVG export of modulus curves."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

from .errors import BadParameter


@dataclass(frozen=True)
class CurveRow:
    delta: float
    lower: float
    upper: float
    reference: float | None = None


def _num(v: float | None) -> str:
    if v is None:
        return ""
    if math.isinf(v):
        return "inf"
    return repr(float(v))


def parse_range(text: str, step: float) -> list[float]:
    """``a..b`` with the given step, endpoints included; values must lie in (0, 2)."""
    lo, sep, hi = text.partition("..")
    if not sep:
        raise BadParameter(f"range must look like a..b, got {text!r}")
    try:
        a, b, step = float(lo), float(hi), float(step)
    except ValueError:
        raise BadParameter(f"bad range {text!r}") from None
    if not (0 < a <= b < 2) or not step > 0:
        raise BadParameter(f"range must satisfy 0 < a <= b < 2 with a positive step, got {text!r}")
    count = int(math.floor((b - a) / step + 1e-9)) + 1
    # round to the step's decimals so 0.05 + 3*0.05 prints as 0.2
    digits = max(0, -math.floor(math.log10(step)) + 6)
    return [round(a + i * step, digits) for i in range(count)]


def curve_csv(rows: list[CurveRow]) -> str:
    buf = io.StringIO()
    buf.write("delta,lower,upper,reference\n")
    for r in rows:
        buf.write(f"{_num(r.delta)},{_num(r.lower)},{_num(r.upper)},{_num(r.reference)}\n")
    return buf.getvalue()


def curve_svg(rows: list[CurveRow], title: str, reference=None) -> str:
    """Static plot on [0, 2]²; ``reference`` is an optional callable δ ↦ value."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    matplotlib.rcParams["svg.hashsalt"] = "bpbmod"
    fig, ax = plt.subplots(figsize=(5, 5))
    if reference is not None:
        grid = np.linspace(1e-3, 2 - 1e-3, 400)
        ax.plot(grid, [reference(d) for d in grid], color="0.6", lw=1.5, label="reference")
    ds = [r.delta for r in rows]
    ax.plot(ds, [r.lower for r in rows], "o", ms=3, color="tab:blue", label="lower")
    ups = [r.upper for r in rows]
    if any(math.isfinite(u) for u in ups):
        ax.plot(ds, ups, "v", ms=3, color="tab:red", label="upper")
    ax.set_xlim(0, 2)
    ax.set_ylim(0, 2)
    ax.set_aspect("equal")
    ax.set_xlabel("delta")
    ax.set_title(title)
    ax.legend(loc="upper left")
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return buf.getvalue()
