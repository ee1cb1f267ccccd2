"""Sweep orchestration: resumable conductor scans and store verification.

Work splits into block-aligned conductor ranges; every Galois orbit is
computed inside a single task so the norm is formed without cross-task
communication, and blocks are written back in ascending order by the
single writer.  Records whose norm misses an integer by more than the
tolerance are retried at +4 and +8 digits before being kept flagged.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .characters import (
    PrimitiveCharacter,
    conductor_count_array,
    enumerate_characters,
    galois_orbit,
)
from .curve import CoefficientTable, CurveData, coefficient_table, from_config, load_curve
from .lvalue import (
    INTEGRALITY_TOL,
    TwistRecord,
    evaluate_orbit,
    tail_terms,
    zero_threshold,
    zeta_sign,
)
from .store import ResultStore, StoreCorruptionError, SweepManifest, record_to_row
from .stats import norm_form_representable

__all__ = ["run_sweep", "verify_store", "VerifyReport", "DEFAULT_BLOCK"]

DEFAULT_BLOCK = 1000

_RETRY_STEPS = (0, 4, 8)


def _records_for_orbit(
    E: CurveData, chi: PrimitiveCharacter, digits: int, table: CoefficientTable
) -> list[TwistRecord]:
    recs = None
    for extra in _RETRY_STEPS:
        d = digits + extra
        use = table
        if tail_terms(chi.conductor, E.conductor, d) > table.length:
            # retry needs more coefficients than the shared table holds
            use = coefficient_table(E, tail_terms(chi.conductor, E.conductor, d))
        recs = evaluate_orbit(E, chi, d, use)
        if not recs[0].flagged:
            return recs
    return recs


def compute_block(
    E: CurveData, k: int, f_lo: int, f_hi: int, digits: int, an: np.ndarray
) -> list[str]:
    """Rows for all conductors in [f_lo, f_hi], in (f, label) order."""
    table = CoefficientTable(E.label, len(an) - 1, an)
    rows: list[str] = []
    for f in range(f_lo, f_hi + 1):
        chars = list(enumerate_characters(k, E.conductor, (f, f)))
        if not chars:
            continue
        done = set()
        records = []
        for chi in chars:
            orbit_key = min(c.label for c in galois_orbit(chi))
            if orbit_key in done:
                continue
            done.add(orbit_key)
            records.extend(_records_for_orbit(E, chi, digits, table))
        records.sort(key=lambda r: r.label)
        rows.extend(record_to_row(r) for r in records)
    return rows


def run_sweep(
    store_dir,
    curve: str | CurveData,
    order: int,
    f_min: int = 3,
    f_max: int = 1000,
    digits: int = 8,
    jobs: int = 1,
    resume: bool = False,
    block_size: int = DEFAULT_BLOCK,
) -> ResultStore:
    """Run (or resume) a sweep into an append-only store.

    Re-running a completed range is a no-op; resuming after an interrupt
    discards any partial shard and continues from the watermark, which
    yields a store byte-identical to an uninterrupted run.
    """
    E = load_curve(curve) if isinstance(curve, str) else curve
    if f_min > f_max:
        f_min = f_max + 1  # empty range: no-op below
    store = ResultStore(store_dir)
    if store.manifest is None:
        store.initialise(
            SweepManifest(
                curve=E.label,
                order=order,
                f_min=f_min,
                f_max=f_max,
                digits=digits,
                block_size=block_size,
                tool_version=__version__,
                curve_config=E.to_config(),
            )
        )
    else:
        if not resume:
            raise FileExistsError(f"store {store_dir} exists; pass resume=True to continue")
        m = store.manifest
        if (m.curve, m.order, m.digits, m.block_size) != (E.label, order, digits, block_size):
            raise ValueError("resume parameters differ from the stored manifest")
        bad = store.verify_checksums()
        if bad:
            raise StoreCorruptionError(f"refusing to resume; corrupted shards: {bad}")
        store.drop_orphan_shards()
        if f_max > m.f_max:
            m.f_max = f_max
    m = store.manifest
    start = max(m.watermark + 1, m.f_min)
    if start > m.f_max:
        return store
    # shared coefficient table sized for the largest conductor of the run
    T = tail_terms(m.f_max, E.conductor, digits)
    an = coefficient_table(E, T).an
    blocks = []
    f = start
    while f <= m.f_max:
        lo, hi = store.block_bounds(f)
        blocks.append((max(lo, f), min(hi, m.f_max)))
        f = hi + 1
    if jobs <= 1:
        for lo, hi in blocks:
            store.append_block(lo, hi, compute_block(E, order, lo, hi, digits, an))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(compute_block, E, order, lo, hi, digits, an) for lo, hi in blocks
            ]
            for (lo, hi), fut in zip(blocks, futures):
                store.append_block(lo, hi, fut.result())
    _finalize_normalization(store)
    return store


def _finalize_normalization(store: ResultStore) -> None:
    g = 0
    for row in store.iter_rows():
        g = math.gcd(g, abs(int(row.split(",")[9])))
    store.update_normalization(g if g > 0 else None)


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


@dataclass
class VerifyReport:
    """Failure lists from the store-wide invariant checks."""

    store: str
    rows: int = 0
    checksum_failures: list[str] = field(default_factory=list)
    count_mismatches: list[tuple[int, int, int]] = field(default_factory=list)  # (f, got, want)
    reflection_failures: list[tuple[int, int, float]] = field(default_factory=list)
    integrality_failures: list[tuple[int, int, float]] = field(default_factory=list)
    orbit_failures: list[tuple[int, tuple]] = field(default_factory=list)
    zero_set_failures: list[tuple[int, int]] = field(default_factory=list)
    norm_set_failures: list[tuple[int, int, int]] = field(default_factory=list)
    watermark_failures: list[str] = field(default_factory=list)
    normalization_g: int | None = None

    @property
    def ok(self) -> bool:
        return not (
            self.checksum_failures
            or self.count_mismatches
            or self.reflection_failures
            or self.integrality_failures
            or self.orbit_failures
            or self.zero_set_failures
            or self.norm_set_failures
            or self.watermark_failures
        )

    def summary(self) -> str:
        lines = [f"store {self.store}: {self.rows} rows"]
        for name in (
            "checksum_failures",
            "count_mismatches",
            "reflection_failures",
            "integrality_failures",
            "orbit_failures",
            "zero_set_failures",
            "norm_set_failures",
            "watermark_failures",
        ):
            items = getattr(self, name)
            status = "ok" if not items else f"{len(items)} FAILED (first: {items[0]})"
            lines.append(f"  {name:22s} {status}")
        lines.append(f"  normalization_g        {self.normalization_g}")
        lines.append("RESULT " + ("PASS" if self.ok else "FAIL"))
        return "\n".join(lines)


def verify_store(store_dir, reflection_tol: float = 1e-8) -> VerifyReport:
    """Run the cross-module invariants over a finished or partial store."""
    store = ResultStore(store_dir)
    if store.manifest is None:
        raise FileNotFoundError(f"no manifest under {store_dir}")
    m = store.manifest
    E = from_config(m.curve_config) if m.curve_config else load_curve(m.curve)
    report = VerifyReport(store=str(store_dir), normalization_g=m.normalization_g)
    report.checksum_failures = store.verify_checksums()
    if report.checksum_failures:
        return report
    records = store.load_records()
    report.rows = len(records)

    # watermark coverage: block shards must tile [f_min, watermark]
    covered = sorted((s["f_lo"], s["f_hi"]) for s in m.shards)
    expect = max(m.f_min, 1)
    for lo, hi in covered:
        if lo > expect:
            report.watermark_failures.append(f"gap before shard at {lo}")
        expect = max(expect, hi + 1)
    if m.watermark > 0 and expect <= m.watermark:
        report.watermark_failures.append(f"watermark {m.watermark} beyond shard coverage {expect - 1}")

    # per-conductor multiplicity against the closed-form counts
    upto = min(m.watermark, m.f_max)
    if upto >= 2:
        want = conductor_count_array(m.order, E.conductor, upto)
        got = np.zeros(upto + 1, dtype=np.int64)
        for r in records:
            if r.conductor <= upto:
                got[r.conductor] += 1
        for f in np.nonzero(want - got)[0]:
            if f >= m.f_min:
                report.count_mismatches.append((int(f), int(got[f]), int(want[f])))

    by_orbit: dict[tuple[int, int], list[TwistRecord]] = {}
    for r in records:
        chi = PrimitiveCharacter.from_label(r.conductor, r.label)
        zeta = zeta_sign(E, chi)
        # reflection identity, skipped for vanishing values
        if abs(r.L_alg) >= zero_threshold(r.conductor):
            resid = abs(r.L_alg - zeta * r.L_alg.conjugate()) / abs(r.L_alg)
            if resid > reflection_tol:
                report.reflection_failures.append((r.conductor, r.label, resid))
        if r.residual > INTEGRALITY_TOL:
            report.integrality_failures.append((r.conductor, r.label, r.residual))
        orbit_key = (r.conductor, min(c.label for c in galois_orbit(chi)))
        by_orbit.setdefault(orbit_key, []).append(r)

    g = m.normalization_g or 1
    for (f, key), recs in by_orbit.items():
        As = {r.A for r in recs}
        if len(As) != 1:
            report.orbit_failures.append((f, tuple(sorted(As))))
            continue
        A = As.pop()
        small = [abs(r.L_alg) < zero_threshold(f) for r in recs]
        if (A == 0) != all(small):
            report.zero_set_failures.append((f, key))
        if m.order == 5 and A != 0 and g and not norm_form_representable(abs(A) // g):
            report.norm_set_failures.append((f, key, A))
    return report
