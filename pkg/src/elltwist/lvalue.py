"""Twisted central L-values and their algebraic data.

For a primitive even character chi of odd order k and a curve E with
gcd(f, N_E) = 1, the central value is evaluated by the exponentially
convergent series

    L(E,1,chi) = sum_n (a_n chi(n) + w_E c_chi conj(a_n chi(n))) / n
                 * exp(-2 pi n / (f sqrt(N_E))),   c_chi = chi(N_E) tau(chi)^2 / f.

The algebraic part 2 tau(conj(chi)) L / Omega+ is an algebraic integer in
Q(chi) satisfying the reflection identity with sign zeta = w_E chi(-N_E);
dividing by the branch factor lambda makes it a real cyclotomic integer
alpha, and the product of alpha over one embedding per conjugate pair is a
rational integer A.  The engine rounds that product, records the distance
to the nearest integer, and retries at higher precision when the distance
exceeds the integrality tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import mpmath as mp
import numpy as np

from .characters import PrimitiveCharacter, galois_orbit, gauss_sum
from .curve import CoefficientTable, CurveData, coefficient_table

__all__ = [
    "TwistRecord",
    "CoefficientBudgetError",
    "UnsupportedCharacterError",
    "INTEGRALITY_TOL",
    "tail_terms",
    "central_value",
    "algebraic_part",
    "lambda_select",
    "alpha_and_norm",
    "evaluate_orbit",
    "dataset_gcd_normalize",
    "empirical_root_number",
    "zeta_sign",
    "zero_threshold",
]

# Four decimal places of integrality; records beyond it are retried and,
# failing that, kept but flagged.
INTEGRALITY_TOL = 1e-4

# A vanishing central value must push |L_alg| below this conductor-scaled
# bound on the whole orbit before A = 0 is accepted.
def zero_threshold(f: int) -> float:
    return 1e-3 * math.sqrt(f)


class CoefficientBudgetError(RuntimeError):
    """The truncation point exceeds the available coefficient table."""

    def __init__(self, needed: int, available: int):
        super().__init__(
            f"series needs {needed} coefficients but only {available} are available"
        )
        self.needed = needed
        self.available = available


class UnsupportedCharacterError(ValueError):
    """Characters outside the odd-order (even) family handled here."""


@dataclass(frozen=True)
class TwistRecord:
    """Per-character result row of a sweep."""

    curve: str
    conductor: int
    label: int
    order: int
    L: complex
    L_alg: complex
    zeta: complex
    lambda_case: str  # "generic" | "minus_one" | "plus_one"
    lam: complex
    alpha: float
    A: int
    residual: float
    terms: int

    @property
    def flagged(self) -> bool:
        return self.residual > INTEGRALITY_TOL


def tail_terms(f: int, N_E: int, target_digits: int) -> int:
    """Truncation point with rigorous tail below 10^-target_digits.

    Uses |a_n| <= sigma_0(n) sqrt(n) <= 2n, |chi(n)| <= 1 and |c_chi| = 1:
    the tail past T is at most 4 e^{-c(T+1)} / (1 - e^{-c}) for
    c = 2 pi / (f sqrt(N_E)).
    """
    c = 2.0 * math.pi / (f * math.sqrt(N_E))
    budget = target_digits * math.log(10) + math.log(4.0 / -math.expm1(-c))
    return max(8, math.ceil(budget / c))


def _series_weights(E: CurveData, f: int, T: int, an: np.ndarray) -> np.ndarray:
    """a_n exp(-2 pi n / (f sqrt(N_E))) / n for n = 1..T (index 0 zero)."""
    n = np.arange(T + 1, dtype=np.float64)
    w = np.zeros(T + 1)
    w[1:] = an[1 : T + 1] * np.exp(-2.0 * np.pi * n[1:] / (f * math.sqrt(E.conductor))) / n[1:]
    return w


def _fold_residues(w: np.ndarray, f: int) -> np.ndarray:
    """W[r] = sum of w_n over n = r (mod f); lets each character cost O(f)."""
    T = len(w)
    pad = (-T) % f
    if pad:
        w = np.concatenate([w, np.zeros(pad)])
    return w.reshape(-1, f).sum(axis=0)


def central_value(
    E: CurveData,
    chi: PrimitiveCharacter,
    target_digits: int = 8,
    table: CoefficientTable | None = None,
    precision: str = "double",
) -> tuple[complex, int]:
    """Central value L(E, 1, chi) and the truncation point used.

    ``precision`` selects the float64 fast path or an mpmath evaluation at
    target_digits + 10 working digits (used by the cross-checks; both paths
    share only the coefficient table).
    """
    f = chi.conductor
    if math.gcd(f, E.conductor) != 1:
        raise ValueError("conductor of chi must be coprime to the curve conductor")
    T = tail_terms(f, E.conductor, target_digits)
    if table is None:
        table = coefficient_table(E, T)
    if table.length < T:
        raise CoefficientBudgetError(needed=T, available=table.length)
    if precision == "double":
        w = _series_weights(E, f, T, table.an)
        W = _fold_residues(w, f)
        vals = chi.value_table
        S1 = complex(vals @ W)
        tau = gauss_sum(chi)
        c_chi = chi(E.conductor) * tau * tau / f
        L = S1 + E.root_number * c_chi * S1.conjugate()
        return L, T
    if precision != "extended":
        raise ValueError("precision must be 'double' or 'extended'")
    return _central_value_extended(E, chi, target_digits, T, table)


def _central_value_extended(E, chi, target_digits, T, table):
    with mp.workdps(target_digits + 10):
        f = chi.conductor
        k = chi.order
        zk = [mp.e ** (2j * mp.pi * j / k) for j in range(k)]
        exps = chi.exponent_table
        decay = mp.e ** (-2 * mp.pi / (f * mp.sqrt(E.conductor)))
        S1 = mp.mpc(0)
        en = mp.mpf(1)
        for n in range(1, T + 1):
            en *= decay
            e = exps[n % f]
            if e < 0 or table.an[n] == 0:
                continue
            S1 += int(table.an[n]) * zk[e] * en / n
        tau = mp.mpc(0)
        for r in range(1, f):
            e = exps[r]
            if e >= 0:
                tau += zk[e] * mp.e ** (2j * mp.pi * r / f)
        eN = exps[E.conductor % f]
        c_chi = zk[eN] * tau * tau / f
        L = S1 + E.root_number * c_chi * mp.conj(S1)
        return complex(L), T


def algebraic_part(E: CurveData, chi: PrimitiveCharacter, L: complex) -> complex:
    """2 tau(conj(chi)) L / Omega+, the algebraic central value in Q(chi)."""
    if chi.order % 2 == 0:
        raise UnsupportedCharacterError(
            "even-order characters need the imaginary period; only odd order is supported"
        )
    tau_bar = gauss_sum(chi).conjugate()  # chi is even, so tau(conj chi) = conj tau(chi)
    return 2.0 * tau_bar * L / E.real_period


def zeta_sign(E: CurveData, chi: PrimitiveCharacter) -> complex:
    """Reflection sign zeta = w_E chi(-N_E), a root of unity of order dividing 2k."""
    e = chi.exponent((-E.conductor) % chi.conductor)
    return E.root_number * complex(np.exp(2j * np.pi * e / chi.order))


def lambda_select(
    E: CurveData, chi: PrimitiveCharacter, variant: str = "standard"
) -> tuple[str, complex]:
    """Branch factor lambda with lambda = zeta * conj(lambda).

    zeta = w_E chi(-N_E).  Branches: lambda = 1/(1 + conj(zeta)) generically,
    1/(chi(c) - conj(chi(c))) when zeta = -1 (c the least integer where chi
    takes a value of full order), and 1 when zeta = +1.  The "alternate"
    variant zeta^{(k+1)/2} (odd k, w_E = +1) differs by a circular unit and
    exists for the norm-invariance check only.
    """
    if chi.order < 3:
        raise UnsupportedCharacterError("order >= 3 required")
    zeta = zeta_sign(E, chi)
    if variant == "alternate":
        if chi.order % 2 == 0 or E.root_number != 1:
            raise ValueError("alternate branch needs odd order and root number +1")
        lam = zeta ** ((chi.order + 1) // 2)
        return "alternate", complex(lam)
    if variant != "standard":
        raise ValueError("variant must be 'standard' or 'alternate'")
    if abs(zeta - 1.0) < 1e-9:
        return "plus_one", 1.0 + 0j
    if abs(zeta + 1.0) < 1e-9:
        c = 2
        while True:
            e = chi.exponent(c % chi.conductor)
            if e is not None and math.gcd(e, chi.order) == 1:
                break
            c += 1
        v = chi(c)
        return "minus_one", 1.0 / (v - v.conjugate())
    return "generic", 1.0 / (1.0 + zeta.conjugate())


def alpha_and_norm(
    E: CurveData, parts: list[tuple[PrimitiveCharacter, complex, complex]]
) -> tuple[dict[int, float], int, float]:
    """Realified alpha per character and the rounded rational-integer norm.

    ``parts`` holds (chi, L_alg, lambda) for a full Galois orbit.  The norm
    multiplies alpha over one representative per conjugate pair {sigma,
    conj sigma}; every orbit member shares the resulting A.  Returns
    (alpha keyed by label, A, |pre-round - A|).
    """
    k = parts[0][0].order
    base = min(parts, key=lambda t: t[0].label)[0]
    by_label = {chi.label: (chi, L_alg, lam) for chi, L_alg, lam in parts}
    reps = [j for j in range(1, k // 2 + 1) if math.gcd(j, k) == 1]
    if len(reps) != len(parts) // 2:
        raise ValueError("incomplete Galois orbit")
    alphas = {}
    for chi, L_alg, lam in parts:
        alphas[chi.label] = (L_alg / lam).real
    prod = 1.0
    for j in sorted(reps):
        label_j = base.galois_power(j).label
        if label_j not in by_label:
            raise ValueError("incomplete Galois orbit")
        chi_j, L_alg_j, lam_j = by_label[label_j]
        prod *= (L_alg_j / lam_j).real
    A = int(round(prod))
    return alphas, A, abs(prod - A)


def evaluate_orbit(
    E: CurveData,
    chi: PrimitiveCharacter,
    target_digits: int = 8,
    table: CoefficientTable | None = None,
) -> list[TwistRecord]:
    """TwistRecords for the whole Galois orbit of chi, sorted by label.

    Series are evaluated for one representative of each conjugate pair;
    the conjugate rows follow from termwise conjugation of the series
    (L(conj chi) = conj L(chi) for even chi), which the test suite verifies
    against direct evaluation.
    """
    k = chi.order
    f = chi.conductor
    orbit = galois_orbit(chi)
    base = orbit[0]
    records_data = {}
    terms_used = 0
    for j in [j for j in range(1, k // 2 + 1) if math.gcd(j, k) == 1]:
        chi_j = base.galois_power(j)
        chi_bar = chi_j.conjugate()
        L, T = central_value(E, chi_j, target_digits, table)
        terms_used = max(terms_used, T)
        for c, Lc in ((chi_j, L), (chi_bar, complex(L).conjugate())):
            L_alg = algebraic_part(E, c, Lc)
            case, lam = lambda_select(E, c)
            records_data[c.label] = (c, Lc, L_alg, case, lam)
    parts = [(c, L_alg, lam) for c, _, L_alg, _, lam in records_data.values()]
    alphas, A, residual = alpha_and_norm(E, parts)
    # a vanishing orbit means every conjugate L_alg sits below the threshold
    if A == 0:
        thr = zero_threshold(f)
        if any(abs(L_alg) >= thr for _, _, L_alg, _, _ in records_data.values()):
            residual = max(residual, INTEGRALITY_TOL * 2)  # flag: norm ~ 0 but values are not
    out = []
    for label in sorted(records_data):
        c, L, L_alg, case, lam = records_data[label]
        out.append(
            TwistRecord(
                curve=E.label,
                conductor=f,
                label=label,
                order=k,
                L=complex(L),
                L_alg=complex(L_alg),
                zeta=complex(zeta_sign(E, c)),
                lambda_case=case,
                lam=complex(lam),
                alpha=alphas[label],
                A=A,
                residual=residual,
                terms=terms_used,
            )
        )
    return out


def dataset_gcd_normalize(records: list[TwistRecord]) -> tuple[int, list[TwistRecord]]:
    """Divide every A by the gcd of all non-zero |A| in the dataset.

    The normalisation factor is the datum reported per (curve, order)
    sweep; an all-zero dataset has no well-defined factor.
    """
    g = 0
    for r in records:
        g = math.gcd(g, abs(r.A))
    if g == 0:
        raise ValueError("gcd normalisation needs at least one non-zero A")
    if g == 1:
        return 1, list(records)
    return g, [replace(r, A=r.A // g) for r in records]


def empirical_root_number(
    E: CurveData, order: int = 3, sample: int = 5, target_digits: int = 8
) -> int:
    """Determine the functional-equation sign from integrality of the norms.

    Both signs satisfy the reflection identity by construction, so the
    series alone cannot separate them; only the correct sign makes the
    rounded norms land on integers.  Returns the winning sign.
    """
    from .characters import enumerate_characters

    residuals = {1: [], -1: []}
    signs = {
        s: CurveData(
            label=E.label,
            a_invariants=E.a_invariants,
            conductor=E.conductor,
            root_number=s,
            bad_primes=E.bad_primes,
            real_period=E.real_period,
            imag_period_component=E.imag_period_component,
        )
        for s in (1, -1)
    }
    seen = set()
    for chi in enumerate_characters(order, E.conductor, (3, 5000)):
        if chi.conductor in seen:
            continue
        seen.add(chi.conductor)
        for s in (1, -1):
            recs = evaluate_orbit(signs[s], chi, target_digits)
            residuals[s].append(max(r.residual for r in recs))
        if len(seen) >= sample:
            break
    med = {s: sorted(v)[len(v) // 2] for s, v in residuals.items()}
    if min(med.values()) > INTEGRALITY_TOL or max(med.values()) < 100 * INTEGRALITY_TOL:
        raise RuntimeError(f"root-number test inconclusive: median residuals {med}")
    return 1 if med[1] < med[-1] else -1
