"""Command-line front end.

Subcommands: count (character counting CSV), sweep (resumable twist
sweep into a store), stats (counter/ratio CSVs from a store), model
(closed-form growth series), verify (store invariants), export (merged
CSV).  Exit codes: 0 success, 1 verification failures present, 2
usage or configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .characters import count_characters
from .curve import load_curve
from .lvalue import dataset_gcd_normalize
from .model import ModelParams, comparator as growth_comparator, predicted_count
from .stats import StatConfig, accumulate, ratio_series
from .store import ResultStore
from .sweep import run_sweep, verify_store


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _open_out(path: str | None):
    return open(path, "w") if path else sys.stdout


def cmd_count(args) -> int:
    report = count_characters(args.order, args.coprime_to, args.max_conductor)
    b = report.per_conductor
    cum = report.cumulative()
    fs = np.nonzero(b)[0]
    out = _open_out(args.output)
    try:
        out.write("f,b_k,cumulative,comparator\n")
        for f in fs:
            out.write(
                f"{f},{b[f]},{cum[f]},{_fmt(float(report.comparator(float(f))))}\n"
            )
    finally:
        if out is not sys.stdout:
            out.close()
    print(
        f"order {args.order}, coprime to {args.coprime_to}, X = {args.max_conductor}: "
        f"{report.cumulative_total} characters (fitted constant {report.fitted_constant:.6f})",
        file=sys.stderr,
    )
    return 0


def cmd_sweep(args) -> int:
    try:
        curve = load_curve(args.curve)
    except (FileNotFoundError, KeyError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    store = _run_sweep_checked(args, curve)
    if store is None:
        return 2
    m = store.manifest
    print(
        f"sweep {m.curve} k={m.order} complete to f = {m.watermark} "
        f"({sum(s['rows'] for s in m.shards)} rows, g = {m.normalization_g})",
        file=sys.stderr,
    )
    return 0


def _run_sweep_checked(args, curve):
    from .store import StoreCorruptionError

    try:
        return run_sweep(
            args.store,
            curve,
            args.order,
            f_min=args.min_f,
            f_max=args.max_f,
            digits=args.digits,
            jobs=args.jobs,
            resume=args.resume,
            block_size=args.block_size,
        )
    except StoreCorruptionError as e:
        print(f"error: {e}", file=sys.stderr)
        return None


def cmd_stats(args) -> int:
    store = ResultStore(args.store)
    if store.manifest is None:
        print(f"error: no manifest under {args.store}", file=sys.stderr)
        return 2
    records = store.load_records()
    if not records:
        print("error: empty store", file=sys.stderr)
        return 2
    g, records = dataset_gcd_normalize(records)
    k = store.manifest.order
    base = StatConfig.for_order(k)
    cfg = StatConfig(
        values=tuple(int(v) for v in args.values.split(",")) if args.values else base.values,
        thresholds=tuple(int(v) for v in args.thresholds.split(","))
        if args.thresholds
        else base.thresholds,
        exponents=tuple(float(v) for v in args.exponents.split(","))
        if args.exponents
        else base.exponents,
        grid_factor=args.grid_factor,
    )
    series = accumulate(records, cfg)
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    x = series.grid
    van = ratio_series(series, "vanishing")
    nrat = ratio_series(series, "n")
    srat = ratio_series(series, "s")
    mrat = ratio_series(series, "m")
    # one CSV per counter family; the ratio column is count / comparator
    with open(outdir / "n_counts.csv", "w") as fh:
        fh.write("x,l,count,comparator,ratio\n")
        for l in sorted(series.n_counts):
            ratio = van.columns["l=0"] if l == 0 else nrat.columns[f"l={l}"]
            counts = series.n_counts[l]
            comp = growth_comparator(
                "vanishing" if l == 0 else "smallvalue", series.curve, k, x
            )
            for xi, ci, pi, ri in zip(x, counts, comp, ratio):
                fh.write(f"{_fmt(float(xi))},{l},{ci},{_fmt(float(pi))},{_fmt(float(ri))}\n")
    with open(outdir / "s_counts.csv", "w") as fh:
        fh.write("x,L,count,comparator,ratio\n")
        comp = growth_comparator("smallvalue", series.curve, k, x)
        for L in sorted(series.s_counts):
            ratio = srat.columns[f"L={L}"]
            for xi, ci, pi, ri in zip(x, series.s_counts[L], comp, ratio):
                fh.write(f"{_fmt(float(xi))},{L},{ci},{_fmt(float(pi))},{_fmt(float(ri))}\n")
    with open(outdir / "m_counts.csv", "w") as fh:
        fh.write("x,c,count,count_pos,comparator,ratio,ratio_pos\n")
        for c in sorted(series.m_counts):
            comp = growth_comparator("mratio", series.curve, k, x, c=c)
            ratio = mrat.columns[f"c={c}"]
            ratio_pos = mrat.columns[f"m_pos,c={c}"]
            rows = zip(x, series.m_counts[c], series.m_counts_positive[c], comp, ratio, ratio_pos)
            for xi, ci, cpi, pi, ri, rpi in rows:
                fh.write(
                    f"{_fmt(float(xi))},{c},{ci},{cpi},{_fmt(float(pi))},"
                    f"{_fmt(float(ri))},{_fmt(float(rpi))}\n"
                )
    print(
        f"normalisation g = {g}; wrote n_counts.csv, s_counts.csv, m_counts.csv under {outdir}",
        file=sys.stderr,
    )
    return 0


def cmd_model(args) -> int:
    if args.exponent is not None and args.bound is not None:
        print("error: choose either --bound or --exponent", file=sys.stderr)
        return 2
    c = args.exponent if args.exponent is not None else 0.0
    try:
        params = ModelParams(k=args.order, X=args.max_conductor, c=c, L=args.bound)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    xs = np.unique(np.geomspace(10.0, args.max_conductor, num=args.points).round()).astype(float)
    vals, regime = predicted_count(params, xs)
    out = _open_out(args.output)
    try:
        out.write("X,predicted,regime\n")
        for x, v in zip(xs, vals):
            out.write(f"{_fmt(float(x))},{_fmt(float(v))},{regime}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def cmd_verify(args) -> int:
    try:
        report = verify_store(args.store)
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(report.summary())
    return 0 if report.ok else 1


def cmd_export(args) -> int:
    store = ResultStore(args.store)
    if store.manifest is None:
        print(f"error: no manifest under {args.store}", file=sys.stderr)
        return 2
    path = store.export(args.output)
    print(f"exported {path}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="elltwist", description=__doc__)
    p.add_argument("--version", action="version", version=f"elltwist {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("count", help="count primitive characters by conductor")
    c.add_argument("--order", type=int, required=True)
    c.add_argument("--coprime-to", type=int, default=1)
    c.add_argument("--max-conductor", type=int, required=True)
    c.add_argument("--output", default=None)
    c.set_defaults(func=cmd_count)

    s = sub.add_parser("sweep", help="run or resume a twist sweep")
    s.add_argument("--curve", required=True, help="fixture label or JSON config path")
    s.add_argument("--order", type=int, required=True)
    s.add_argument("--min-f", type=int, default=3)
    s.add_argument("--max-f", type=int, required=True)
    s.add_argument("--digits", type=int, default=8)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--resume", action="store_true")
    s.add_argument("--store", required=True)
    s.add_argument("--block-size", type=int, default=1000)
    s.set_defaults(func=cmd_sweep)

    st = sub.add_parser("stats", help="counter and ratio CSVs from a store")
    st.add_argument("--store", required=True)
    st.add_argument("--values", default=None, help="comma list of tracked A values")
    st.add_argument("--thresholds", default=None, help="comma list of s-thresholds")
    st.add_argument("--exponents", default=None, help="comma list of m-exponents")
    st.add_argument("--grid-factor", type=float, default=1.05)
    st.add_argument("--outdir", required=True)
    st.set_defaults(func=cmd_stats)

    mo = sub.add_parser("model", help="closed-form growth series")
    mo.add_argument("--order", type=int, required=True)
    mo.add_argument("--bound", type=float, default=None)
    mo.add_argument("--exponent", type=float, default=None)
    mo.add_argument("--max-conductor", type=float, required=True)
    mo.add_argument("--points", type=int, default=50)
    mo.add_argument("--output", default=None)
    mo.set_defaults(func=cmd_model)

    v = sub.add_parser("verify", help="run store invariants")
    v.add_argument("--store", required=True)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("export", help="merge shards into one CSV")
    e.add_argument("--store", required=True)
    e.add_argument("--output", required=True)
    e.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FileExistsError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
