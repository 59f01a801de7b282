"""Locate the antidegradability threshold of a one-parameter channel family by bisection."""

from __future__ import annotations

from typing import Callable

from .. import channels as ch
from ..comparison import WitnessConfig, is_antidegradable

FAMILIES = {
    "erasure": ch.erasure,
    "amplitude_damping": ch.amplitude_damping,
    "depolarizing": ch.depolarizing,
}


def _key(v: float) -> float:
    return round(float(v), 12)


def find_threshold(
    verdict_at: Callable[[float], str],
    lo: float,
    hi: float,
    width: float = 0.02,
    grid: int = 5,
) -> dict:
    """Bisect on a verdict that switches once between ``Degradable`` and ``NotDegradable``.

    ``verdict_at`` maps a parameter to a verdict name.  A coarse grid is
    evaluated first so a non-monotone family is detected before bisecting.
    """
    if not lo < hi:
        raise ValueError("range must satisfy lo < hi")
    seen: dict[float, str] = {}

    def at(v):
        k = _key(v)
        if k not in seen:
            seen[k] = verdict_at(k)
        return seen[k]

    for i in range(grid):
        at(lo + (hi - lo) * i / (grid - 1))

    def bracket():
        pts = sorted(seen.items())
        if any(v == "Inconclusive" for _, v in pts):
            return None, "inconclusive verdict inside the range"
        changes = [i for i in range(1, len(pts)) if pts[i][1] != pts[i - 1][1]]
        if len(changes) > 1:
            return None, "verdict sequence is not monotone"
        if not changes:
            return (), pts[0][1]
        i = changes[0]
        return (pts[i - 1][0], pts[i][0]), None

    while True:
        br, note = bracket()
        if br is None:
            return {"estimate": None, "bracket": None, "monotone": False, "note": note, "points": _points(seen)}
        if br == ():
            edge = lo if note == "Degradable" else hi
            return {
                "estimate": None,
                "bracket": [edge, edge],
                "monotone": True,
                "note": f"all points {note}; threshold lies at or beyond the range edge {edge}",
                "points": _points(seen),
            }
        a, b = br
        if b - a <= width + 1e-12:
            return {
                "estimate": 0.5 * (a + b),
                "bracket": [a, b],
                "monotone": True,
                "below": seen[a],
                "above": seen[b],
                "note": None,
                "points": _points(seen),
            }
        at(0.5 * (a + b))


def _points(seen):
    return [{"param": k, "verdict": v} for k, v in sorted(seen.items())]


def family_threshold(family: str, lo: float, hi: float, cfg: WitnessConfig = WitnessConfig(), width: float = 0.02) -> dict:
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; known: {sorted(FAMILIES)}")
    make = FAMILIES[family]
    out = find_threshold(lambda v: is_antidegradable(make(v), cfg).name, lo, hi, width)
    out["family"] = family
    out["range"] = [lo, hi]
    return out
