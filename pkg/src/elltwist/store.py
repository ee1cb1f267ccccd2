"""Append-only result store for twist sweeps.

Layout: one directory holding ``manifest.json`` plus CSV shards under
``shards/``, one shard per fixed-width conductor block.  The manifest
carries the sweep parameters, a completion watermark (largest conductor
whose block is fully written), and a sha256 checksum per shard; floats are
printed with 17 significant digits so exports round-trip bit-exactly.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .lvalue import TwistRecord

__all__ = ["SweepManifest", "ResultStore", "StoreCorruptionError", "CSV_HEADER"]

CSV_HEADER = "f,label,k,L_re,L_im,Lalg_re,Lalg_im,case,alpha,A,residual,terms"

MANIFEST_NAME = "manifest.json"
SHARD_DIR = "shards"


class StoreCorruptionError(RuntimeError):
    """A completed shard no longer matches its recorded checksum."""


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def record_to_row(r: TwistRecord) -> str:
    return ",".join(
        [
            str(r.conductor),
            str(r.label),
            str(r.order),
            _fmt(r.L.real),
            _fmt(r.L.imag),
            _fmt(r.L_alg.real),
            _fmt(r.L_alg.imag),
            r.lambda_case,
            _fmt(r.alpha),
            str(r.A),
            _fmt(r.residual),
            str(r.terms),
        ]
    )


def row_to_record(row: str, curve: str, zeta=None, lam=None) -> TwistRecord:
    parts = row.split(",")
    f, label, k = int(parts[0]), int(parts[1]), int(parts[2])
    return TwistRecord(
        curve=curve,
        conductor=f,
        label=label,
        order=k,
        L=complex(float(parts[3]), float(parts[4])),
        L_alg=complex(float(parts[5]), float(parts[6])),
        zeta=zeta if zeta is not None else complex("nan"),
        lambda_case=parts[7],
        lam=lam if lam is not None else complex("nan"),
        alpha=float(parts[8]),
        A=int(parts[9]),
        residual=float(parts[10]),
        terms=int(parts[11]),
    )


@dataclass
class SweepManifest:
    """Sweep configuration plus completion state."""

    curve: str
    order: int
    f_min: int
    f_max: int
    digits: int
    block_size: int
    tool_version: str
    curve_config: dict | None = None  # reconstructs the curve without fixtures
    watermark: int = 0  # every conductor <= watermark is fully present
    normalization_g: int | None = None
    seeds: list[int] = field(default_factory=list)  # unused by sweeps; schema slot
    shards: list[dict] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SweepManifest":
        return cls(**json.loads(text))


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class ResultStore:
    """Filesystem-backed sweep store with block-aligned shards."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.shard_dir = self.root / SHARD_DIR
        self.manifest: SweepManifest | None = None
        if (self.root / MANIFEST_NAME).exists():
            self.manifest = SweepManifest.from_json((self.root / MANIFEST_NAME).read_text())

    # -- lifecycle ------------------------------------------------------

    def initialise(self, manifest: SweepManifest) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        self.shard_dir.mkdir(exist_ok=True)
        self.manifest = manifest
        self._write_manifest()

    def _write_manifest(self) -> None:
        tmp = self.root / (MANIFEST_NAME + ".tmp")
        tmp.write_text(self.manifest.to_json())
        os.replace(tmp, self.root / MANIFEST_NAME)

    @staticmethod
    def shard_name(f_lo: int, f_hi: int) -> str:
        return f"records_{f_lo:08d}_{f_hi:08d}.csv"

    def block_bounds(self, f: int) -> tuple[int, int]:
        """The absolute block [lo, hi] containing conductor f; blocks are
        aligned to multiples of block_size so resumed and fresh runs shard
        identically."""
        size = self.manifest.block_size
        lo = (f - 1) // size * size + 1
        return lo, lo + size - 1

    # -- writing --------------------------------------------------------

    def append_block(self, f_lo: int, f_hi: int, rows: list[str]) -> None:
        """Write one completed block shard and advance the watermark."""
        if self.manifest is None:
            raise RuntimeError("store not initialised")
        name = self.shard_name(f_lo, f_hi)
        path = self.shard_dir / name
        text = CSV_HEADER + "\n" + "".join(r + "\n" for r in rows)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(text)
        os.replace(tmp, path)
        self.manifest.shards.append(
            {
                "name": name,
                "f_lo": f_lo,
                "f_hi": f_hi,
                "rows": len(rows),
                "sha256": _sha256_file(path),
            }
        )
        self.manifest.watermark = max(self.manifest.watermark, f_hi)
        self._write_manifest()

    def drop_orphan_shards(self) -> list[str]:
        """Delete shard files not recorded in the manifest (interrupted writes)."""
        known = {s["name"] for s in self.manifest.shards} if self.manifest else set()
        dropped = []
        if self.shard_dir.exists():
            for p in sorted(self.shard_dir.iterdir()):
                if p.suffix == ".tmp" or (p.name.startswith("records_") and p.name not in known):
                    p.unlink()
                    dropped.append(p.name)
        return dropped

    # -- reading --------------------------------------------------------

    def verify_checksums(self) -> list[str]:
        """Names of recorded shards whose bytes no longer match the manifest."""
        bad = []
        for s in self.manifest.shards if self.manifest else []:
            path = self.shard_dir / s["name"]
            if not path.exists() or _sha256_file(path) != s["sha256"]:
                bad.append(s["name"])
        return bad

    def iter_rows(self):
        """All data rows, shards in ascending conductor order."""
        for s in sorted(self.manifest.shards, key=lambda s: s["f_lo"]):
            with open(self.shard_dir / s["name"]) as fh:
                header = fh.readline().strip()
                if header != CSV_HEADER:
                    raise StoreCorruptionError(f"unexpected header in {s['name']}")
                for line in fh:
                    line = line.strip()
                    if line:
                        yield line

    def load_records(self) -> list[TwistRecord]:
        curve = self.manifest.curve
        return [row_to_record(row, curve) for row in self.iter_rows()]

    def export(self, path: str | Path) -> Path:
        """Merge all shards into a single CSV (same schema, one header)."""
        path = Path(path)
        with open(path, "w") as out:
            out.write(CSV_HEADER + "\n")
            for row in self.iter_rows():
                out.write(row + "\n")
        return path

    @staticmethod
    def import_csv(path: str | Path, curve: str) -> list[TwistRecord]:
        """Read an exported CSV back into records (curve from the caller,
        matching the manifest that produced the export)."""
        out = []
        with open(path) as fh:
            header = fh.readline().strip()
            if header != CSV_HEADER:
                raise ValueError(f"unexpected CSV header: {header!r}")
            for line in fh:
                line = line.strip()
                if line:
                    out.append(row_to_record(line, curve))
        return out

    def update_normalization(self, g: int | None) -> None:
        self.manifest.normalization_g = g
        self._write_manifest()
