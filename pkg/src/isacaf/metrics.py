"""Cut-based sensing metrics: 3 dB mainlobe width, PSLR and ISLR.

The mainlobe of a cut runs between the first strict local minima on either
side of its anchor. Where a side has no local minimum the cut edge is used and
that side contributes no sidelobe samples.

The anchor is the axis origin (where an AF cut peaks in theory) if the cut
has a sample at exactly 0 whose value is within 3 dB of the cut maximum;
otherwise it is the largest sample. Interpolation overshoot a fraction of a
sample away from the origin therefore cannot displace the mainlobe.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ambiguity import AfCut

HALF_POWER = 1.0 / np.sqrt(2.0)
_TOL = 1e-12


@dataclass(frozen=True)
class CutMetrics:
    """Metrics of one cut. ``pslr_db``/``islr_db`` are ``None`` without sidelobes."""

    width_3db: float
    pslr_db: float | None
    islr_db: float | None
    mainlobe_lo: float
    mainlobe_hi: float
    flags: frozenset[str] = field(default_factory=frozenset)

    def as_dict(self) -> dict:
        return {
            "width_3db": self.width_3db,
            "pslr_db": self.pslr_db,
            "islr_db": self.islr_db,
            "mainlobe_lo": self.mainlobe_lo,
            "mainlobe_hi": self.mainlobe_hi,
            "flags": sorted(self.flags),
        }


def _peak_index(cut: AfCut) -> int:
    v = cut.values
    i = cut.origin
    if cut.axis[i] == 0.0 and v[i] >= HALF_POWER * v.max():
        return i
    return int(np.argmax(v))


def mainlobe_indices(cut: AfCut) -> tuple[int, int]:
    """Sample indices ``(lo, hi)`` of the mainlobe boundary (inclusive)."""
    v = cut.values
    c = _peak_index(cut)
    tol = _TOL * v.max()  # relative, so bounds do not depend on cut scaling
    lo, hi = 0, v.size - 1
    for i in range(c - 1, 0, -1):
        if v[i] < v[i - 1] - tol and v[i] < v[i + 1] - tol:
            lo = i
            break
    for i in range(c + 1, v.size - 1):
        if v[i] < v[i - 1] - tol and v[i] < v[i + 1] - tol:
            hi = i
            break
    return lo, hi


def mainlobe_bounds(cut: AfCut) -> tuple[float, float]:
    lo, hi = mainlobe_indices(cut)
    return float(cut.axis[lo]), float(cut.axis[hi])


def _is_flat(v: np.ndarray) -> bool:
    return bool(np.ptp(v) <= 1e-9 * max(np.max(v), _TOL))


def _crossing(cut: AfCut, step: int, threshold: float) -> tuple[float, bool]:
    """First downward crossing of ``threshold`` walking from the peak by ``step``.

    Returns ``(coordinate, clamped)``; ``clamped`` means the edge was reached.
    """
    v, x = cut.values, cut.axis
    i = _peak_index(cut)
    end = v.size - 1 if step > 0 else 0
    while i != end and v[i + step] >= threshold:
        i += step
    if i == end:
        return float(x[end]), True
    # v[i] >= threshold > v[i + step]
    frac = (v[i] - threshold) / (v[i] - v[i + step])
    return float(x[i] + frac * (x[i + step] - x[i])), False


def width_3db(cut: AfCut) -> float:
    """Width between the ``1/sqrt(2)`` amplitude crossings around the anchor."""
    return _width(cut)[0]


def _width(cut: AfCut) -> tuple[float, set[str]]:
    threshold = HALF_POWER * cut.values[_peak_index(cut)]
    hi, clamp_hi = _crossing(cut, +1, threshold)
    lo, clamp_lo = _crossing(cut, -1, threshold)
    flags = {"width_clamped"} if (clamp_hi or clamp_lo) else set()
    return hi - lo, flags


def _split(cut: AfCut) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = mainlobe_indices(cut)
    v = cut.values
    return v[lo:hi + 1], np.concatenate([v[:lo], v[hi + 1:]])


def pslr(cut: AfCut) -> float | None:
    """Highest sidelobe relative to the mainlobe maximum, dB; ``None`` if no sidelobes."""
    main, side = _split(cut)
    if side.size == 0:
        return None
    return float(20.0 * np.log10(side.max() / main.max()))


def islr(cut: AfCut) -> float | None:
    """Sidelobe-to-mainlobe energy over cut samples, dB.

    ``None`` when the sidelobe region is empty; ``-inf`` when it holds no energy.
    """
    main, side = _split(cut)
    if side.size == 0:
        return None
    energy = float(np.sum(side**2))
    if energy == 0.0:
        return float("-inf")
    return float(10.0 * np.log10(energy / np.sum(main**2)))


def sidelobe_floor_db(cut: AfCut) -> float | None:
    """Mean sidelobe power relative to the peak, dB (``None`` if no sidelobes)."""
    main, side = _split(cut)
    if side.size == 0:
        return None
    return float(10.0 * np.log10(np.mean(side**2) / main.max() ** 2))


def cut_metrics(cut: AfCut) -> CutMetrics:
    v = cut.values
    width, flags = _width(cut)
    if _is_flat(v):
        flags |= {"flat_cut", "width_clamped"}
    lo, hi = mainlobe_bounds(cut)
    p, i = pslr(cut), islr(cut)
    if p is None:
        flags.add("no_sidelobes")
    return CutMetrics(width, p, i, lo, hi, frozenset(flags))
