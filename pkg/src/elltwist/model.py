"""Closed-form model evaluation: volume ratios, small-norm probabilities,
growth regimes, and Brauer-Siegel-type quotients.

The geometric core: inside the box [0, M]^n, the region where the
coordinate product stays below L occupies the exact volume fraction
C * P_{n-1}(log(1/C)) with C = L / M^n and P_m the degree-m Taylor
polynomial of exp.  A norm bounded by L therefore has probability given
by that fraction with M = sqrt(f) and n = phi(k)/2, and summing against
the conductor counts b_k(f) yields the growth regimes: bounded when
phi(k) > 4(1+c), a log power at equality, a power of X below it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

__all__ = [
    "ModelParams",
    "RegionSpec",
    "taylor_exp_poly",
    "volume_ratio",
    "volume_ratio_asymptotic",
    "monte_carlo_volume_ratio",
    "prob_small",
    "classify_regime",
    "predicted_count",
    "fit_growth_constants",
    "comparator",
    "brauer_siegel_quotient",
]


def _euler_phi(k: int) -> int:
    phi, n, p = 1, k, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            phi *= p - 1
            while n % p == 0:
                n //= p
                phi *= p
        p += 1
    if n > 1:
        phi *= n - 1
    return phi


def _sigma0(k: int) -> int:
    return sum(1 for d in range(1, k + 1) if k % d == 0)


@dataclass(frozen=True)
class ModelParams:
    """Parameters of one model evaluation for order-k characters."""

    k: int
    X: float
    c: float = 0.0  # norm bound grows like f^c
    L: float | None = None  # fixed norm bound (the c = 0 reading)
    N: int = 1

    def __post_init__(self):
        phi = _euler_phi(self.k)
        if self.k < 3:
            raise ValueError("order k >= 3 required")
        if not 0 <= self.c <= phi / 4:
            raise ValueError(f"need 0 <= c <= phi(k)/4 = {phi / 4}")

    @property
    def n(self) -> int:
        return _euler_phi(self.k) // 2

    @property
    def B(self) -> int:
        return _sigma0(self.k) + _euler_phi(self.k) // 2 - 3


@dataclass(frozen=True)
class RegionSpec:
    """Box [0,M]^n intersected with {x1*...*xn <= L}."""

    n: int
    M: float
    L: float

    def __post_init__(self):
        if self.n < 1 or self.M <= 0 or self.L <= 0:
            raise ValueError("need n >= 1, M > 0, L > 0")
        if self.L > self.M**self.n * (1 + 1e-12):
            raise ValueError("product bound L must not exceed M^n")

    @property
    def C(self) -> float:
        return min(self.L / self.M**self.n, 1.0)


def taylor_exp_poly(m: int, x: float) -> float:
    """P_m(x) = sum_{j<=m} x^j / j!, the degree-m Taylor polynomial of exp."""
    if m < 0:
        raise ValueError("degree must be non-negative")
    total, term = 1.0, 1.0
    for j in range(1, m + 1):
        term *= x / j
        total += term
    return total


def volume_ratio(region: RegionSpec) -> float:
    """Exact relative volume C * P_{n-1}(log(1/C)) of the product region."""
    C = region.C
    if C >= 1.0:
        return 1.0
    return C * taylor_exp_poly(region.n - 1, -math.log(C))


def volume_ratio_asymptotic(region: RegionSpec) -> float:
    """Leading-order form L n^{n-1} log^{n-1}(M) / ((n-1)! M^n) for large M."""
    n, M, L = region.n, region.M, region.L
    if M < 10:
        warnings.warn("asymptotic volume ratio is advisory below M = 10", stacklevel=2)
    return L * n ** (n - 1) * math.log(M) ** (n - 1) / (math.factorial(n - 1) * M**n)


def monte_carlo_volume_ratio(
    n: int, C: float, samples: int = 10**7, seed: int = 0, chunk: int = 1_000_000
) -> tuple[float, float]:
    """Monte Carlo estimate of Prob(x1*...*xn <= C) on the unit cube.

    Returns (estimate, standard error).  Sampling splits into independent
    child streams spawned from the seed, so the estimate is reproducible
    for a fixed (seed, chunk) and parallelisable by stream.
    """
    if not 0 < C:
        raise ValueError("C must be positive")
    streams = np.random.SeedSequence(seed).spawn(math.ceil(samples / chunk))
    hits = 0
    done = 0
    for ss in streams:
        m = min(chunk, samples - done)
        rng = np.random.default_rng(ss)
        u = rng.random((m, n))
        hits += int(np.count_nonzero(u.prod(axis=1) <= C))
        done += m
    p = hits / samples
    se = math.sqrt(max(p * (1 - p), 1e-300) / samples)
    return p, se


def prob_small(f: int, k: int, L: float) -> float:
    """Model probability that 0 < |A| <= L at conductor f, order k.

    Box half-width M = sqrt(f) (epsilon = 0), dimension n = phi(k)/2; the
    value is the exact volume ratio, approximately
    L log^{n-1}(sqrt(f)) / f^{phi(k)/4}.
    """
    if f < 2:
        raise ValueError("conductor >= 2 required")
    n = _euler_phi(k) // 2
    M = math.sqrt(f)
    if L > M**n:
        warnings.warn("norm bound exceeds M^n; probability clamped to 1", stacklevel=2)
        return 1.0
    return volume_ratio(RegionSpec(n=n, M=M, L=L))


def classify_regime(k: int, c: float = 0.0) -> str:
    """Growth regime of the expected count of small norms up to X.

    "bounded" when phi(k) > 4(1+c); "log_power" (log^{B+1} X) at equality;
    "power" (X^{c - phi(k)/4 + 1} log^B X) when phi(k) < 4(1+c).
    """
    phi = _euler_phi(k)
    gap = phi - 4.0 * (1.0 + c)
    if gap > 1e-12:
        return "bounded"
    if gap < -1e-12:
        return "power"
    return "log_power"


def growth_exponents(k: int, c: float = 0.0) -> tuple[float, float]:
    """(power of X, power of log X) of the predicted growth."""
    phi = _euler_phi(k)
    B = _sigma0(k) + phi // 2 - 3
    regime = classify_regime(k, c)
    if regime == "bounded":
        return 0.0, 0.0
    if regime == "log_power":
        return 0.0, float(B + 1)
    return c - phi / 4.0 + 1.0, float(B)


def predicted_count(
    params: ModelParams, X=None, C: float = 1.0, D: float = 1.0
) -> tuple[np.ndarray, str]:
    """Two-term growth expression for the expected number of small norms.

    Evaluates C X log^B(X) / X^{phi/4 - c} + D * integral_1^X u log^B(u) /
    u^{1 + phi/4 - c} du (adaptive quadrature, relative tolerance 1e-8) on
    the given grid, together with the regime classification.  The constants
    C, D are unit by default; fitted values come from fit_growth_constants
    and are reported, never asserted.
    """
    xs = np.atleast_1d(np.asarray(params.X if X is None else X, dtype=float))
    if np.any(xs <= 1):
        raise ValueError("grid must stay above 1")
    phi = _euler_phi(params.k)
    B = params.B
    expo = phi / 4.0 - params.c

    def integrand(u):
        return u * math.log(u) ** B / u ** (1.0 + expo)

    vals = np.empty_like(xs)
    prev_x, prev_i = 1.0, 0.0
    for i, x in enumerate(xs):
        piece, _ = integrate.quad(integrand, prev_x, x, epsrel=1e-8, limit=200)
        prev_i += piece
        prev_x = x
        vals[i] = C * x * math.log(x) ** B / x**expo + D * prev_i
    return vals, classify_regime(params.k, params.c)


def fit_growth_constants(
    params: ModelParams, xs: np.ndarray, empirical: np.ndarray
) -> tuple[float, float]:
    """Least-squares (C, D) against empirical counts on the final decade."""
    xs = np.asarray(xs, dtype=float)
    empirical = np.asarray(empirical, dtype=float)
    term1, _ = predicted_count(params, xs, C=1.0, D=0.0)
    term2, _ = predicted_count(params, xs, C=0.0, D=1.0)
    window = xs >= xs[-1] / 10.0
    design = np.column_stack([term1[window], term2[window]])
    sol, *_ = np.linalg.lstsq(design, empirical[window], rcond=None)
    return float(sol[0]), float(sol[1])


# Appendix comparator shapes: (power of x, power of log x), keyed by counter
# family and, for the vanishing family, by (curve, order).  The heavier log
# powers ride on the curves with k-torsion.
_VANISHING = {
    ("11a1", 3): (0.5, 0.25),
    ("14a1", 3): (0.5, 2.25),
    ("11a1", 5): (0.0, 4.25),
    ("14a1", 5): (0.0, 1.5),
}
_SMALLVALUE = {3: (0.5, 0.0), 5: (0.0, 2.0)}


def comparator(kind: str, curve_label: str, k: int, x, c: float | None = None):
    """Reference growth comparator for the ratio plots.

    kind "vanishing": curve/order-specific power-log shape; "smallvalue":
    x^{1/2} for k = 3 and log^2 x for k = 5; "mratio": x^{1/2+c} for k = 3
    and x^c log x for k = 5 (requires c).
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 1):
        raise ValueError("comparators need x > 1")
    if kind == "vanishing":
        key = (curve_label, k)
        if key not in _VANISHING:
            raise ValueError(
                f"no vanishing comparator for {key}; supported: {sorted(_VANISHING)}"
            )
        a, b = _VANISHING[key]
    elif kind == "smallvalue":
        if k not in _SMALLVALUE:
            raise ValueError(f"no small-value comparator for k={k}; supported: {sorted(_SMALLVALUE)}")
        a, b = _SMALLVALUE[k]
    elif kind == "mratio":
        if c is None:
            raise ValueError("mratio comparator needs the exponent c")
        if k == 3:
            a, b = 0.5 + c, 0.0
        elif k == 5:
            a, b = c, 1.0
        else:
            raise ValueError(f"no m-ratio comparator for k={k}; supported: [3, 5]")
    else:
        raise ValueError("kind must be 'vanishing', 'smallvalue' or 'mratio'")
    return x**a * np.log(x) ** b


def brauer_siegel_quotient(A: int, f: int, k: int) -> float:
    """log(A^2) / ((phi(k)/2) log f) = 4 log|A| / (phi(k) log f).

    The numerator stands in for log of the Tate-Shafarevich order times the
    regulator, the denominator for log of the square root of the twist
    discriminant f^{phi(k)/2}.  Bounded by 4c/phi(k) whenever |A| <= f^c.
    """
    if A == 0:
        raise ValueError("quotient undefined at A = 0; vanishing is tracked separately")
    if f < 2:
        raise ValueError("conductor >= 2 required")
    return 4.0 * math.log(abs(A)) / (_euler_phi(k) * math.log(f))
