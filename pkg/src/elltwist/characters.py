"""Primitive Dirichlet characters of fixed order: construction, counting, enumeration.

A character is stored through its local components at the prime powers
dividing the conductor.  Each local component is a tuple of exponents on a
fixed generator set of (Z/p^b Z)^*: the least primitive root for odd p^b,
the class of -1 for modulus 4, and the pair (-1, 5) for 2^b with b >= 3.
Values are kept as integer exponents modulo the character order; complex
numbers appear only at evaluation boundaries (series, Gauss sums).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

__all__ = [
    "PrimitiveCharacter",
    "CharacterCountReport",
    "CountOverflowError",
    "local_count",
    "conductor_count_array",
    "count_characters",
    "enumerate_characters",
    "gauss_sum",
    "galois_orbit",
]

# Largest modulus for which discrete-log tables are materialised.  Counting
# sweeps never build tables; only enumeration/evaluation does, at sweep scale.
_DLOG_LIMIT = 2_000_000


class CountOverflowError(OverflowError):
    """Cumulative character count exceeded the safe integer range."""


def _factorize(n: int) -> list[tuple[int, int]]:
    """Prime factorization by trial division, as (p, exponent) pairs."""
    out = []
    for p in (2, 3):
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    p = 5
    step = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += step
        step = 6 - step
    if n > 1:
        out.append((n, 1))
    return out


@lru_cache(maxsize=None)
def _least_primitive_root(q: int) -> int:
    """Least primitive root modulo an odd prime power q."""
    (p, b), = _factorize(q)
    phi = q // p * (p - 1)
    prime_divs = [r for r, _ in _factorize(phi)]
    for g in range(2, q):
        if g % p == 0:
            continue
        if all(pow(g, phi // r, q) != 1 for r in prime_divs):
            return g
    raise ValueError(f"no primitive root mod {q}")


@lru_cache(maxsize=None)
def local_generators(p: int, b: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Canonical generators of (Z/p^b)^* and their orders.

    Odd p: the least primitive root mod p^b.  p=2: the class of -1 for b=2,
    the pair (-1, 5) for b >= 3.  Modulus 2 carries no primitive character.
    """
    if p == 2:
        if b == 1:
            raise ValueError("modulus 2 has a trivial unit group")
        if b == 2:
            return (3,), (2,)
        return (2**b - 1, 5), (2, 2 ** (b - 2))
    q = p**b
    return (_least_primitive_root(q),), (q // p * (p - 1),)


@lru_cache(maxsize=None)
def _dlog_tables(p: int, b: int) -> tuple[np.ndarray, ...]:
    """Discrete-log tables mod p^b, one int32 array per canonical generator.

    Entry -1 marks residues not generated (non-coprime, or the other coset
    for the two-generator 2-adic case, where the tables jointly cover all
    odd residues).
    """
    q = p**b
    if q > _DLOG_LIMIT:
        raise ValueError(f"modulus {q} above discrete-log table limit {_DLOG_LIMIT}")
    gens, orders = local_generators(p, b)
    if len(gens) == 1:
        g, n = gens[0], orders[0]
        table = np.full(q, -1, dtype=np.int32)
        x = 1
        for j in range(n):
            table[x] = j
            x = x * g % q
        return (table,)
    # p = 2, b >= 3: every odd residue is (-1)^s * 5^t uniquely
    s_table = np.full(q, -1, dtype=np.int32)
    t_table = np.full(q, -1, dtype=np.int32)
    n5 = orders[1]
    x = 1
    for t in range(n5):
        s_table[x] = 0
        t_table[x] = t
        s_table[q - x] = 1
        t_table[q - x] = t
        x = x * 5 % q
    return (s_table, t_table)


def _crt_combine(residues: list[tuple[int, int]]) -> int:
    """Solve x = r (mod m) for pairwise coprime moduli."""
    x, m = 0, 1
    for r, mod in residues:
        x += m * ((r - x) * pow(m, -1, mod) % mod)
        m *= mod
    return x % m


@dataclass(frozen=True)
class PrimitiveCharacter:
    """A primitive Dirichlet character, held as local generator exponents.

    ``local_parts`` is a tuple of (p, b, exps) triples where ``exps`` gives
    the exponents of the character on the canonical generators of
    (Z/p^b)^*.  ``label`` is the Conrey-style index: the unique residue m
    coprime to the conductor with m = prod g_i^{c_i} locally.
    """

    conductor: int
    order: int
    local_parts: tuple[tuple[int, int, tuple[int, ...]], ...]
    label: int

    @classmethod
    def from_local_exponents(
        cls, parts: list[tuple[int, int, tuple[int, ...]]]
    ) -> "PrimitiveCharacter":
        conductor = 1
        order = 1
        residues = []
        for p, b, exps in parts:
            q = p**b
            conductor *= q
            gens, gen_orders = local_generators(p, b)
            m_local = 1
            for g, n, c in zip(gens, gen_orders, exps):
                if not 0 <= c < n:
                    raise ValueError(f"exponent {c} out of range for generator order {n}")
                order = math.lcm(order, n // math.gcd(c, n))
                m_local = m_local * pow(g, c, q) % q
            residues.append((m_local, q))
        chi = cls(
            conductor=conductor,
            order=order,
            local_parts=tuple((p, b, tuple(exps)) for p, b, exps in parts),
            label=_crt_combine(residues) if residues else 1,
        )
        if chi._local_conductor() != conductor:
            raise ValueError("local exponents are not primitive at every prime power")
        return chi

    @classmethod
    def from_label(cls, conductor: int, label: int) -> "PrimitiveCharacter":
        """Reconstruct the character of given conductor from its label."""
        if conductor == 1:
            return cls(1, 1, (), 1)
        if math.gcd(label, conductor) != 1:
            raise ValueError("label must be coprime to the conductor")
        parts = []
        for p, b in _factorize(conductor):
            q = p**b
            tables = _dlog_tables(p, b)
            exps = tuple(int(t[label % q]) for t in tables)
            if any(e < 0 for e in exps):
                raise ValueError("label residue outside the generated subgroup")
            parts.append((p, b, exps))
        return cls.from_local_exponents(parts)

    def _local_conductor(self) -> int:
        """Conductor implied by the stored exponents (primitivity check)."""
        cond = 1
        for p, b, exps in self.local_parts:
            _, gen_orders = local_generators(p, b)
            if p == 2 and b >= 3:
                t_ord = gen_orders[1] // math.gcd(exps[1], gen_orders[1])
                if t_ord > 1:
                    cond *= 4 * t_ord
                elif exps[0] % 2:
                    cond *= 4
            else:
                n = gen_orders[0]
                o = n // math.gcd(exps[0], n)
                if o > 1:
                    v = 0
                    while o % p == 0:
                        o //= p
                        v += 1
                    cond *= p ** (1 + v)
        return cond

    # -- evaluation ---------------------------------------------------

    @cached_property
    def _multipliers(self) -> tuple[tuple[int, int, tuple[int, ...]], ...]:
        # per local generator: exponent contribution as a multiple of 1/order
        out = []
        for p, b, exps in self.local_parts:
            _, gen_orders = local_generators(p, b)
            mults = []
            for c, n in zip(exps, gen_orders):
                num = self.order * c
                if num % n:
                    raise AssertionError("local order does not divide character order")
                mults.append(num // n % self.order)
            out.append((p, b, tuple(mults)))
        return tuple(out)

    def exponent(self, a: int) -> int | None:
        """Exponent e with chi(a) = exp(2*pi*i*e/order); None when gcd(a,f)>1."""
        if self.conductor == 1:
            return 0
        total = 0
        for (p, b, _), (_, _, mults) in zip(self.local_parts, self._multipliers):
            q = p**b
            r = a % q
            tables = _dlog_tables(p, b)
            for t, mu in zip(tables, mults):
                d = int(t[r])
                if d < 0:
                    return None
                total += mu * d
        return total % self.order

    @cached_property
    def exponent_table(self) -> np.ndarray:
        """Exponents mod order for all residues mod f; -1 where gcd(a,f)>1."""
        f = self.conductor
        r = np.arange(f, dtype=np.int64)
        total = np.zeros(f, dtype=np.int64)
        bad = np.zeros(f, dtype=bool)
        if f == 1:
            return np.zeros(1, dtype=np.int64)
        for (p, b, _), (_, _, mults) in zip(self.local_parts, self._multipliers):
            q = p**b
            rq = r % q
            for t, mu in zip(_dlog_tables(p, b), mults):
                d = t[rq].astype(np.int64)
                bad |= d < 0
                total += mu * np.where(d < 0, 0, d)
        total %= self.order
        total[bad] = -1
        return total

    @cached_property
    def value_table(self) -> np.ndarray:
        """chi(a) for a = 0..f-1 as complex128 (0 on non-coprime residues)."""
        roots = np.exp(2j * np.pi * np.arange(self.order) / self.order)
        e = self.exponent_table
        vals = np.where(e >= 0, roots[np.maximum(e, 0)], 0.0)
        return vals

    def __call__(self, a: int) -> complex:
        e = self.exponent(int(a) % self.conductor) if self.conductor > 1 else 0
        if e is None:
            return 0j
        return complex(np.exp(2j * np.pi * e / self.order))

    def is_even(self) -> bool:
        e = self.exponent(self.conductor - 1) if self.conductor > 1 else 0
        return e == 0

    # -- Galois action ------------------------------------------------

    def galois_power(self, j: int) -> "PrimitiveCharacter":
        """chi^j for j coprime to the order; same conductor and order."""
        if math.gcd(j, self.order) != 1:
            raise ValueError("power must be coprime to the order")
        parts = []
        for p, b, exps in self.local_parts:
            _, gen_orders = local_generators(p, b)
            parts.append((p, b, tuple(c * j % n for c, n in zip(exps, gen_orders))))
        return PrimitiveCharacter.from_local_exponents(parts)

    def conjugate(self) -> "PrimitiveCharacter":
        return self.galois_power(self.order - 1) if self.order > 1 else self


def galois_orbit(chi: PrimitiveCharacter) -> tuple[PrimitiveCharacter, ...]:
    """The conjugate characters chi^j, j in (Z/kZ)^*, sorted by label."""
    k = chi.order
    orbit = [chi.galois_power(j) for j in range(1, k + 1) if math.gcd(j, k) == 1]
    return tuple(sorted(orbit, key=lambda c: c.label))


def gauss_sum(chi: PrimitiveCharacter) -> complex:
    """tau(chi) = sum_a chi(a) e^{2 pi i a / f}; |tau| = sqrt(f) for primitive chi."""
    f = chi.conductor
    if f == 1:
        return 1 + 0j
    e = np.exp(2j * np.pi * np.arange(f) / f)
    return complex(chi.value_table @ e)


# ---------------------------------------------------------------------------
# Local counts and the conductor-count sieve
# ---------------------------------------------------------------------------


def local_count(p: int, b: int, k: int) -> int:
    """Number of primitive characters mod p^b whose order divides k.

    For p = 2 a nontrivial primitive character needs b >= 2; for odd p not
    dividing k only b = 1 occurs.  When p | k and 2 <= b <= v_p(k)+1 the
    count is (p^{b-1} - p^{b-2}) * gcd(p-1, k): the wild part contributes
    phi(p^{b-1}) faithful choices and the tame part gcd(p-1, k) choices,
    none of which is the trivial character once b >= 2.
    """
    if p == 2:
        a2 = (k & -k).bit_length() - 1  # v_2(k)
        if a2 == 0 or b == 1:
            return 0
        if b == 2:
            return 1
        if b <= a2 + 2:
            return 2 ** (b - 2)
        return 0
    d = math.gcd(p - 1, k)
    if b == 1:
        return d - 1
    ap = 0
    kk = k
    while kk % p == 0:
        kk //= p
        ap += 1
    if ap and 2 <= b <= ap + 1:
        return (p ** (b - 1) - p ** (b - 2)) * d
    return 0


_spf_cache: np.ndarray | None = None


def _spf(limit: int) -> np.ndarray:
    """Smallest-prime-factor table up to limit (grown on demand, cached)."""
    global _spf_cache
    if _spf_cache is not None and len(_spf_cache) > limit:
        return _spf_cache
    spf = np.zeros(limit + 1, dtype=np.int32)
    for p in range(2, int(limit**0.5) + 1):
        if spf[p] == 0:
            sl = spf[p * p :: p]
            sl[sl == 0] = p
    idx = np.arange(limit + 1, dtype=np.int32)
    rest = (spf == 0) & (idx >= 2)
    spf[rest] = idx[rest]
    spf[1] = 1
    _spf_cache = spf
    return spf


def _divisors_mu(k: int) -> list[tuple[int, int]]:
    """(d, mu(d)) for the squarefree divisors d of k."""
    primes = [p for p, _ in _factorize(k)]
    out = []
    for r in range(len(primes) + 1):
        for combo in itertools.combinations(primes, r):
            out.append((math.prod(combo), (-1) ** r))
    return out


def _a_count_array(k: int, X: int) -> np.ndarray:
    """a_k(f) for f = 0..X: primitive characters of conductor f, order dividing k."""
    spf = _spf(X)[: X + 1].astype(np.int64)
    f = np.arange(X + 1, dtype=np.int64)
    # pbk[f] = p^b where p = spf(f) and p^b || f;  cof[f] = f / pbk[f]
    pbk = np.ones(X + 1, dtype=np.int64)
    pb = np.where(f >= 2, spf, 1)
    cur = f.copy()
    cur[0] = 1
    mask = f >= 2
    while mask.any():
        div = mask & (cur % pb == 0)
        cur[div] //= pb[div]
        pbk[div] *= pb[div]
        mask = div
    cof = np.where(f >= 2, f // pbk, 1)
    # local values on prime powers; primes vectorised, higher powers are few
    lv = np.zeros(X + 1, dtype=np.int64)
    is_prime = (spf == f) & (f >= 2)
    pr = f[is_prime]
    lv[pr] = np.gcd(pr - 1, k) - 1
    if X >= 4:
        lv[2] = 0
        lv[4] = local_count(2, 2, k)
        q, b = 8, 3
        while q <= X:
            lv[q] = local_count(2, b, k)
            q, b = 2 * q, b + 1
    for p, _ in _factorize(k):
        if p == 2:
            continue
        q, b = p * p, 2
        while q <= X:
            lv[q] = local_count(p, b, k)
            q, b = q * p, b + 1
    # multiplicative fill: a[f] = lv[pbk[f]] * a[cof[f]]; the dependency chain
    # has length omega(f) <= log2(X), so a few gather rounds converge
    a = np.zeros(X + 1, dtype=np.int64)
    a[1] = 1
    for _ in range(10):  # f <= 3e6 has at most 8 distinct primes
        new = lv[pbk] * a[cof]
        new[0] = 0
        new[1] = 1
        if np.array_equal(new, a):
            break
        a = new
    return a


def conductor_count_array(k: int, N: int, X: int) -> np.ndarray:
    """b_k(f) for f = 0..X with the gcd(f, N) = 1 filter applied.

    b_k counts primitive characters of conductor f and order exactly k,
    obtained from the order-dividing counts by Moebius inversion over the
    divisors of k.
    """
    if k < 2 or N < 1 or X < 1:
        raise ValueError("require k >= 2, N >= 1, X >= 1")
    b = np.zeros(X + 1, dtype=np.int64)
    for d, mu in _divisors_mu(k):
        b += mu * _a_count_array(k // d, X)
    b[:2] = 0
    if N > 1:
        f = np.arange(X + 1, dtype=np.int64)
        b[np.gcd(f, N) != 1] = 0
    return b


@dataclass
class CharacterCountReport:
    """Counts of order-k primitive characters with conductor up to X."""

    k: int
    N: int
    X: int
    per_conductor: np.ndarray = field(repr=False)  # b_k(f), index = conductor
    cumulative_total: int = 0
    fitted_constant: float = 0.0

    def comparator(self, x) -> np.ndarray:
        """Fitted c * x * log^{sigma0(k)-2}(x), the expected growth shape."""
        power = len([d for d in range(1, self.k + 1) if self.k % d == 0]) - 2
        x = np.asarray(x, dtype=float)
        return self.fitted_constant * x * np.log(np.maximum(x, 2.0)) ** power

    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.per_conductor)


def count_characters(k: int, N: int, X: int) -> CharacterCountReport:
    """Count primitive characters of order k, conductor <= X, gcd(f, N) = 1."""
    b = conductor_count_array(k, N, X)
    cum = np.cumsum(b)
    total = int(cum[-1])
    if total < 0 or int(b.sum()) != total:
        raise CountOverflowError("cumulative character count overflowed int64")
    sigma0 = len([d for d in range(1, k + 1) if k % d == 0])
    denom = X * math.log(X) ** (sigma0 - 2) if X > 1 else 1.0
    return CharacterCountReport(
        k=k,
        N=N,
        X=X,
        per_conductor=b,
        cumulative_total=total,
        fitted_constant=total / denom,
    )


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------


def _local_choices(p: int, b: int, k: int) -> list[tuple[tuple[int, ...], int]]:
    """Primitive local characters mod p^b with order dividing k.

    Returns (generator exponents, local order) pairs.  Scanning only the
    multiples of n/gcd(n, k) keeps this O(k) per generator rather than
    O(p^b).
    """
    out = []
    if p == 2:
        if k % 2 or b == 1:
            return []
        if b == 2:
            return [((1,), 2)]
        n5 = 2 ** (b - 2)
        if k % n5:
            return []  # the faithful 5-part has order n5, which must divide k
        for s in (0, 1):
            for t in range(1, n5, 2):  # odd t: the 5-part is faithful
                out.append(((s, t), n5))
        return out
    n = p ** (b - 1) * (p - 1)
    d = math.gcd(n, k)
    step = n // d
    for t in range(1, d):
        c = step * t
        o = n // math.gcd(c, n)
        v = 0
        oo = o
        while oo % p == 0:
            oo //= p
            v += 1
        if v == b - 1:
            out.append(((c,), o))
    return out


def enumerate_characters(k: int, N: int, f_range: tuple[int, int]):
    """Yield primitive characters of order exactly k with conductor in range.

    Conductors run ascending and characters at a fixed conductor ascend by
    label, so two enumerations of the same range are identical streams.
    Conductors sharing a factor with N are skipped.
    """
    lo, hi = f_range
    for f in range(max(lo, 3), hi + 1):
        if f % 4 == 2 or (N > 1 and math.gcd(f, N) != 1):
            continue
        factors = _factorize(f)
        choice_lists = []
        ok = True
        for p, b in factors:
            choices = _local_choices(p, b, k)
            if not choices:
                ok = False
                break
            choice_lists.append((p, b, choices))
        if not ok:
            continue
        found = []
        for combo in itertools.product(*(c for _, _, c in choice_lists)):
            order = math.lcm(*(o for _, o in combo))
            if order != k:
                continue
            parts = [
                (p, b, exps)
                for (p, b, _), (exps, _) in zip(choice_lists, combo)
            ]
            found.append(PrimitiveCharacter.from_local_exponents(parts))
        found.sort(key=lambda c: c.label)
        yield from found
