"""Cumulative counters over twist sweeps and their comparator ratios.

Counts are taken on a geometric conductor grid: n(x; l) tracks exact
normalised norm values (l = 0 marks vanishing central values), s(x; L)
the non-zero norms of absolute value at most L, and m(x; c) the records
with |A| <= f^c (zero included; a strictly-positive variant is emitted
alongside for the growth-regime comparisons, which exclude vanishing).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lvalue import TwistRecord
from .model import comparator

__all__ = [
    "StatConfig",
    "StatSeries",
    "RatioTable",
    "accumulate",
    "ratio_series",
    "norm_form_representable",
    "quadratic_norm_values",
]

DEFAULT_VALUES = {3: list(range(-9, 10)), 5: [0] + [s * v for v in (1, 4, 5, 9, 11, 16, 19, 20, 25) for s in (1, -1)]}
DEFAULT_THRESHOLDS = {3: list(range(1, 10)), 5: [1, 4, 5, 9, 11, 16, 19, 20, 25]}
DEFAULT_EXPONENTS = {3: [0.1, 0.2, 0.3, 0.4, 0.5], 5: [round(0.1 * i, 1) for i in range(1, 11)]}


@dataclass(frozen=True)
class StatConfig:
    """Value sets tracked by the counters, plus the grid growth factor."""

    values: tuple[int, ...]
    thresholds: tuple[int, ...]
    exponents: tuple[float, ...]
    grid_factor: float = 1.05

    @classmethod
    def for_order(cls, k: int) -> "StatConfig":
        if k not in DEFAULT_VALUES:
            raise ValueError(f"no default counter config for order {k}")
        return cls(
            values=tuple(DEFAULT_VALUES[k]),
            thresholds=tuple(DEFAULT_THRESHOLDS[k]),
            exponents=tuple(DEFAULT_EXPONENTS[k]),
        )


@dataclass
class StatSeries:
    """Counters of one (curve, order) sweep on a shared conductor grid."""

    curve: str
    k: int
    grid: np.ndarray
    n_counts: dict[int, np.ndarray] = field(default_factory=dict)
    s_counts: dict[int, np.ndarray] = field(default_factory=dict)
    m_counts: dict[float, np.ndarray] = field(default_factory=dict)
    m_counts_positive: dict[float, np.ndarray] = field(default_factory=dict)


def _geometric_grid(lo: float, hi: float, factor: float) -> np.ndarray:
    if lo <= 1:
        raise ValueError("grid must start above 1 (comparators vanish at x = 1)")
    pts = [float(lo)]
    while pts[-1] < hi:
        pts.append(pts[-1] * factor)
    pts[-1] = float(hi)
    return np.array(pts)


def _cumulative_on_grid(conductors: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Number of conductors <= x for each grid point (conductors sorted)."""
    return np.searchsorted(conductors, grid, side="right").astype(np.int64)


def accumulate(records: list[TwistRecord], config: StatConfig) -> StatSeries:
    """Fold a gcd-normalised sweep into cumulative counters.

    The stream must come from a single (curve, order) sweep; the s-counter
    identity s(x; L) = sum of n(x; l) over 0 < |l| <= L holds by
    construction and is re-checked by the verification suite.
    """
    if not records:
        raise ValueError("empty record stream")
    curves = {r.curve for r in records}
    orders = {r.order for r in records}
    if len(curves) > 1 or len(orders) > 1:
        raise ValueError(f"mixed streams not allowed: curves={curves}, orders={orders}")
    curve = curves.pop()
    k = orders.pop()
    recs = sorted(records, key=lambda r: (r.conductor, r.label))
    f = np.array([r.conductor for r in recs], dtype=np.int64)
    A = np.array([r.A for r in recs], dtype=np.int64)
    grid = _geometric_grid(max(2.0, float(f[0])), float(f[-1]), config.grid_factor)
    series = StatSeries(curve=curve, k=k, grid=grid)
    for l in config.values:
        series.n_counts[l] = _cumulative_on_grid(f[A == l], grid)
    absA = np.abs(A)
    for L in config.thresholds:
        series.s_counts[L] = _cumulative_on_grid(f[(absA > 0) & (absA <= L)], grid)
    for c in config.exponents:
        small = absA <= f.astype(float) ** c
        series.m_counts[c] = _cumulative_on_grid(f[small], grid)
        series.m_counts_positive[c] = _cumulative_on_grid(f[small & (absA > 0)], grid)
    return series


@dataclass
class RatioTable:
    """Pointwise counter / comparator values, one column per tracked key."""

    kind: str
    x: np.ndarray
    columns: dict[str, np.ndarray]


def ratio_series(series: StatSeries, kind: str) -> RatioTable:
    """Counter-to-comparator ratios for one counter family.

    "vanishing": n(x;0) against the curve/order growth shape; "n": the
    signed non-zero values against the small-value comparator; "s": the
    cumulative small-norm counts against the same; "m": the f^c counters
    against their power-log denominators (strictly-positive variant
    included as m_pos columns).
    """
    x = series.grid
    cols: dict[str, np.ndarray] = {}
    if kind == "vanishing":
        comp = comparator("vanishing", series.curve, series.k, x)
        cols["l=0"] = series.n_counts[0] / comp
    elif kind == "n":
        comp = comparator("smallvalue", series.curve, series.k, x)
        for l in sorted(series.n_counts):
            if l != 0:
                cols[f"l={l}"] = series.n_counts[l] / comp
    elif kind == "s":
        comp = comparator("smallvalue", series.curve, series.k, x)
        for L in sorted(series.s_counts):
            cols[f"L={L}"] = series.s_counts[L] / comp
    elif kind == "m":
        for c in sorted(series.m_counts):
            comp = comparator("mratio", series.curve, series.k, x, c=c)
            cols[f"c={c}"] = series.m_counts[c] / comp
            cols[f"m_pos,c={c}"] = series.m_counts_positive[c] / comp
    else:
        raise ValueError("kind must be 'vanishing', 'n', 's' or 'm'")
    return RatioTable(kind=kind, x=x, columns=cols)


# ---------------------------------------------------------------------------
# Norm-form membership for quintic datasets
# ---------------------------------------------------------------------------


def norm_form_representable(n: int, bound: int | None = None) -> bool:
    """Whether |n| is a value of |a^2 + ab - b^2| (the golden-ratio norm form).

    Brute-force search: for each b, a solves a quadratic, so a^2+ab-b^2 = m
    needs 5b^2 + 4m to be a perfect square.  Any represented value has a
    representation with |b| <= ~1.14 sqrt(|n|) (scale by units until both
    embeddings lie within a factor of the fundamental unit), so the search
    bound 2 sqrt(|n|) + 2 is exhaustive.
    """
    n = abs(n)
    if n == 0:
        return True
    if bound is None:
        bound = math.isqrt(4 * n) + 2
    for m in (n, -n):
        for b in range(bound + 1):
            d = 5 * b * b + 4 * m
            if d < 0:
                continue
            r = math.isqrt(d)
            if r * r == d and (r - b) % 2 == 0:
                return True
    return False


def quadratic_norm_values(count: int) -> list[int]:
    """The first `count` absolute values taken by |a^2 + ab - b^2|, ascending."""
    out = []
    v = 0
    while len(out) < count:
        v += 1
        if norm_form_representable(v):
            out.append(v)
    return out
