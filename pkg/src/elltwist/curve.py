"""Elliptic-curve arithmetic inputs: a_n coefficients, conductor data, periods.

Good-reduction a_p come from naive point counts over F_p (quadratic-residue
table per prime, vectorised); bad-prime a_p are part of the curve config
since they are fixed by the reduction type.  The full coefficient table is
filled by the prime-power recurrence plus multiplicativity.  The real
period is computed by AGM iteration on the roots of the associated cubic,
with an independent tanh-sinh quadrature of the invariant differential as
cross-check.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import mpmath as mp
import numpy as np

__all__ = [
    "CurveData",
    "CoefficientTable",
    "BadReductionError",
    "PeriodConvergenceError",
    "ap_good",
    "coefficient_table",
    "real_period",
    "real_period_quadrature",
    "load_curve",
    "from_config",
    "fixture",
    "FIXTURE_LABELS",
]

# Naive point counting is O(p) per prime; this cap bounds a coefficient
# request to roughly a minute of sieving.  Raise it for longer series.
POINT_COUNT_LIMIT = 4_000_000

_AGM_MAX_ITER = 200

AInvariants = tuple[int, int, int, int, int]


class BadReductionError(ValueError):
    """a_p requested through the good-reduction route at a bad prime."""


class PeriodConvergenceError(RuntimeError):
    """AGM iteration failed to converge within the iteration budget."""


def _b_invariants(ai: AInvariants) -> tuple[int, int, int, int]:
    a1, a2, a3, a4, a6 = ai
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return b2, b4, b6, b8


def _discriminant(ai: AInvariants) -> int:
    b2, b4, b6, b8 = _b_invariants(ai)
    return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


@dataclass(frozen=True)
class CurveData:
    """A rational elliptic curve with the data the twist sweeps consume."""

    label: str
    a_invariants: AInvariants
    conductor: int
    root_number: int
    bad_primes: dict[int, int]
    real_period: float
    imag_period_component: float

    def __post_init__(self):
        if self.discriminant() == 0:
            raise ValueError("singular Weierstrass model")
        if self.root_number not in (1, -1):
            raise ValueError("root number must be +1 or -1")
        if self.real_period <= 0:
            raise ValueError("real period must be positive")
        bad = {p for p, _ in _factor_small(self.conductor)}
        if set(self.bad_primes) != bad:
            raise ValueError("bad_primes keys must be exactly the primes dividing the conductor")

    def b_invariants(self) -> tuple[int, int, int, int]:
        return _b_invariants(self.a_invariants)

    def discriminant(self) -> int:
        return _discriminant(self.a_invariants)

    def to_config(self) -> dict:
        """The JSON-serialisable config that reconstructs this curve."""
        return {
            "label": self.label,
            "a_invariants": list(self.a_invariants),
            "conductor": self.conductor,
            "root_number": self.root_number,
            "bad_primes": {str(p): a for p, a in sorted(self.bad_primes.items())},
        }


@dataclass
class CoefficientTable:
    """L-series coefficients a_1..a_T of a curve, a_n at index n."""

    label: str
    length: int
    an: np.ndarray  # int64, index 0 unused

    def __getitem__(self, n: int) -> int:
        return int(self.an[n])


def _factor_small(n: int) -> list[tuple[int, int]]:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


# Above this prime the cubic must be reduced between Horner steps to stay
# inside int64; below it a single final reduction suffices (5 p^3 < 2^63).
_SINGLE_MOD_LIMIT = 1_200_000


def ap_good(E: CurveData, p: int) -> int:
    """a_p = p + 1 - #E(F_p) at a prime of good reduction.

    Counts affine points through the Legendre symbol of the completed
    square 4x^3 + b2 x^2 + 2 b4 x + b6; p = 2 is enumerated directly on
    the original model.
    """
    if E.conductor % p == 0:
        raise BadReductionError(f"{p} divides the conductor of {E.label}; use bad_primes")
    a1, a2, a3, a4, a6 = E.a_invariants
    if p == 2:
        count = 1  # point at infinity
        for x in range(2):
            for y in range(2):
                lhs = y * y + a1 * x * y + a3 * y
                rhs = x**3 + a2 * x * x + a4 * x + a6
                if (lhs - rhs) % 2 == 0:
                    count += 1
        return 2 + 1 - count
    b2, b4, b6, _ = E.b_invariants()
    x = np.arange(p, dtype=np.int64)
    if p <= _SINGLE_MOD_LIMIT:
        g = ((4 * x + b2 % p) * x + 2 * b4 % p) * x + b6 % p
        g %= p
    else:
        g = (4 * x + b2 % p) % p
        g = (g * x + 2 * b4 % p) % p
        g = (g * x + b6 % p) % p
    qr = np.zeros(p, dtype=bool)
    half = x[1 : p // 2 + 1]
    qr[half * half % p] = True  # x and p-x share a square; 0 is masked below
    nonzero = g != 0
    hits = int(np.count_nonzero(qr[g] & nonzero))
    zeros = p - int(np.count_nonzero(nonzero))
    # sum over x of legendre(g(x)) = hits - (p - hits - zeros)
    return -(2 * hits + zeros - p)


def _primes_up_to(n: int) -> np.ndarray:
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, int(n**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = False
    return np.nonzero(sieve)[0]


def coefficient_table(E: CurveData, T: int) -> CoefficientTable:
    """a_n for n <= T via point counts, the prime-power recurrence
    a_{p^r} = a_p a_{p^{r-1}} - p a_{p^{r-2}} (good p), a_{p^r} = a_p^r
    (bad p), and multiplicativity."""
    if T < 1:
        raise ValueError("T >= 1 required")
    if T > POINT_COUNT_LIMIT:
        raise ValueError(
            f"coefficient request {T} exceeds POINT_COUNT_LIMIT={POINT_COUNT_LIMIT}"
        )
    an = np.zeros(T + 1, dtype=np.int64)
    an[1] = 1
    if T == 1:
        return CoefficientTable(E.label, T, an)
    primes = _primes_up_to(T)
    spf = np.zeros(T + 1, dtype=np.int32)
    for p in primes:
        sl = spf[p::p]
        sl[sl == 0] = p
    # point counts parallelise over prime blocks (numpy releases the GIL)
    ap_by_prime = {}
    workers = min(4, os.cpu_count() or 1)
    good_primes = [int(p) for p in primes if p not in E.bad_primes]
    if workers > 1 and len(good_primes) > 64:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for p, ap in zip(good_primes, pool.map(lambda q: ap_good(E, q), good_primes, chunksize=64)):
                ap_by_prime[p] = ap
    else:
        for p in good_primes:
            ap_by_prime[p] = ap_good(E, p)
    for p in primes:
        p = int(p)
        bad = p in E.bad_primes
        ap = E.bad_primes[p] if bad else ap_by_prime[p]
        q = p
        prev2, prev1 = 0, 1  # a_{p^{-1}}, a_{p^0}
        r = 1
        while q <= T:
            if bad:
                an[q] = ap**r
            else:
                an[q] = ap * prev1 - (p * prev2 if r >= 2 else 0)
            prev2, prev1 = prev1, int(an[q])
            q *= p
            r += 1
    for n in range(2, T + 1):
        p = int(spf[n])
        q, m = p, n // p
        while m % p == 0:
            m //= p
            q *= p
        if m > 1:
            an[n] = an[q] * an[m]
    return CoefficientTable(E.label, T, an)


# ---------------------------------------------------------------------------
# Periods
# ---------------------------------------------------------------------------


def _depressed_cubic(ai: AInvariants) -> tuple[float, float]:
    """(g2, g3) with the curve's periods those of y^2 = 4x^3 - g2 x - g3."""
    b2, b4, b6, _ = _b_invariants(ai)
    g2 = (b2 * b2 - 24 * b4) / 12.0
    g3 = (36 * b2 * b4 - b2**3 - 216 * b6) / 216.0
    return g2, g3


def _agm(a: float, b: float, tol: float) -> float:
    for _ in range(_AGM_MAX_ITER):
        if abs(a - b) <= tol * abs(a):
            return (a + b) / 2.0
        a, b = (a + b) / 2.0, math.sqrt(a * b)
    raise PeriodConvergenceError("AGM did not converge within the iteration budget")


def _refine_cubic_root(g2: float, g3: float, x: float) -> float:
    for _ in range(4):  # Newton polish of np.roots output
        fx = 4 * x**3 - g2 * x - g3
        dfx = 12 * x * x - g2
        if dfx == 0:
            break
        x -= fx / dfx
    return x


def _real_root(g2: float, g3: float) -> float:
    roots = np.roots([4.0, 0.0, -g2, -g3])
    mask = np.abs(roots.imag) <= 1e-9 * np.maximum(np.abs(roots.real), 1.0)
    return _refine_cubic_root(g2, g3, float(roots[mask].real[0]))


def _period_pair(ai: AInvariants, tol: float) -> tuple[float, float]:
    """(least positive real period, |Im| of the companion generator)."""
    g2, g3 = _depressed_cubic(ai)
    if _discriminant(ai) > 0:
        roots = np.roots([4.0, 0.0, -g2, -g3])
        e1, e2, e3 = np.sort(roots.real)[::-1]
        w_re = math.pi / _agm(math.sqrt(e1 - e3), math.sqrt(e1 - e2), tol)
        w_im = math.pi / _agm(math.sqrt(e1 - e3), math.sqrt(e2 - e3), tol)
        return w_re, w_im
    e1 = _real_root(g2, g3)
    A = math.sqrt(3 * e1 * e1 - g2 / 4.0)
    w_re = 2.0 * math.pi / _agm(2.0 * math.sqrt(A), math.sqrt(2.0 * A + 3.0 * e1), tol)
    w_im = math.pi / _agm(2.0 * math.sqrt(A), math.sqrt(2.0 * A - 3.0 * e1), tol)
    return w_re, w_im


def real_period(E: CurveData, tol: float = 1e-14) -> float:
    """Least positive real period of the invariant differential, doubled
    when the real locus has two components (positive discriminant).

    One real root e1: with A = sqrt(3 e1^2 - g2/4) the period is
    2 pi / AGM(2 sqrt(A), sqrt(2A + 3 e1)).  Three real roots e1 > e2 > e3:
    pi / AGM(sqrt(e1-e3), sqrt(e1-e2)), doubled for the two components.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    w_re, _ = _period_pair(E.a_invariants, tol)
    return 2.0 * w_re if E.discriminant() > 0 else w_re


def real_period_quadrature(E: CurveData, dps: int = 30) -> float:
    """Independent period computation: 2 * integral of dx / (2y + a1 x + a3)
    over the unbounded real branch, doubled again on two-component curves.

    The integrand is regularised by x = x0 + u^2 near the branch point and
    x = x0 + 1/v^2 at infinity, then integrated by tanh-sinh quadrature.
    """
    b2, b4, b6, _ = (mp.mpf(v) for v in E.b_invariants())
    with mp.workdps(dps):
        coeffs = [mp.mpf(4), b2, 2 * b4, b6]
        rts = mp.polyroots(coeffs, maxsteps=100, extraprec=60)
        reals = sorted(r.real for r in rts if abs(r.imag) < mp.mpf(10) ** (-dps // 2))
        x0 = reals[-1]
        # synthetic division: quartic(x) = (x - x0) * (h2 x^2 + h1 x + h0)
        h2 = coeffs[0]
        h1 = coeffs[1] + h2 * x0
        h0 = coeffs[2] + h1 * x0
        h = lambda x: (h2 * x + h1) * x + h0

        def near(u):
            return 4 / mp.sqrt(h(x0 + u * u))

        def far(v):
            x = x0 + 1 / (v * v)
            return 4 / (v**3 * mp.sqrt((x - x0) * h(x)))

        period = mp.quad(near, [0, 1]) + mp.quad(far, [0, 1])
        if E.discriminant() > 0:
            period *= 2
        return float(period)


# ---------------------------------------------------------------------------
# Curve configuration
# ---------------------------------------------------------------------------

# The two bundled curves: conductor-11 and conductor-14 optimal curves,
# both rank 0 with root number +1 (the sign is re-verified empirically by
# the integrality test in the twist engine, not assumed).
_FIXTURES = {
    "11a1": {
        "label": "11a1",
        "a_invariants": [0, -1, 1, -10, -20],
        "conductor": 11,
        "root_number": 1,
        "bad_primes": {"11": 1},
    },
    "14a1": {
        "label": "14a1",
        "a_invariants": [1, 0, 1, 4, -6],
        "conductor": 14,
        "root_number": 1,
        "bad_primes": {"2": -1, "7": 1},
    },
}

FIXTURE_LABELS = tuple(sorted(_FIXTURES))

_curve_cache: dict[str, CurveData] = {}


def from_config(cfg: dict) -> CurveData:
    """Build a curve from an in-memory config mapping (see load_curve)."""
    return _build_curve(cfg)


def _build_curve(cfg: dict) -> CurveData:
    ai = tuple(int(a) for a in cfg["a_invariants"])
    if len(ai) != 5:
        raise ValueError("a_invariants must have five entries (a1,a2,a3,a4,a6)")
    if _discriminant(ai) == 0:
        raise ValueError("singular Weierstrass model")
    w_re, w_im = _period_pair(ai, 1e-14)
    if _discriminant(ai) > 0:
        w_re *= 2
    return CurveData(
        label=str(cfg["label"]),
        a_invariants=ai,
        conductor=int(cfg["conductor"]),
        root_number=int(cfg["root_number"]),
        bad_primes={int(p): int(a) for p, a in cfg["bad_primes"].items()},
        real_period=w_re,
        imag_period_component=w_im,
    )


def fixture(label: str) -> CurveData:
    """One of the bundled curves, by label."""
    if label not in _FIXTURES:
        raise KeyError(f"unknown fixture {label!r}; bundled: {', '.join(FIXTURE_LABELS)}")
    if label not in _curve_cache:
        _curve_cache[label] = _build_curve(_FIXTURES[label])
    return _curve_cache[label]


def load_curve(source: str | Path) -> CurveData:
    """Load a curve from a fixture label or a JSON config file.

    Config schema: {"label": str, "a_invariants": [a1,a2,a3,a4,a6],
    "conductor": int, "root_number": +1|-1, "bad_primes": {"p": a_p}}.
    """
    if isinstance(source, str) and source in _FIXTURES:
        return fixture(source)
    path = Path(source)
    if not path.exists():
        raise FileNotFoundError(
            f"curve source {source!r} is neither a bundled label nor a config file"
        )
    with open(path) as fh:
        return _build_curve(json.load(fh))
