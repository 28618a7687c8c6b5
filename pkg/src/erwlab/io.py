"""Table writers and the run manifest."""
from __future__ import annotations

import hashlib
import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .rng import RNG_FAMILY

FORMATS = ("csv", "jsonl")
SCHEMA_VERSION = 1


def fmt_value(v) -> str:
    """17 significant digits for floats so values round-trip exactly."""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    if hasattr(v, "item"):  # numpy scalar
        return fmt_value(v.item())
    return str(v)


def _json_value(v):
    if hasattr(v, "item"):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return fmt_value(v)
    if isinstance(v, float):
        return float(format(v, ".17g"))
    return v


def write_table(out_dir: Path, name: str, columns: Sequence[str], rows: Iterable[Sequence], fmt: str = "csv") -> Path:
    """Write ``rows`` as ``name.csv`` (header + rows) or ``name.jsonl`` (one object per row)."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}")
    path = Path(out_dir) / f"{name}.{fmt}"
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        if fmt == "csv":
            fh.write(",".join(columns) + "\n")
            for row in rows:
                fh.write(",".join(fmt_value(v) for v in row) + "\n")
        else:
            for row in rows:
                fh.write(json.dumps({c: _json_value(v) for c, v in zip(columns, row)}, separators=(",", ":")) + "\n")
    return path


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def write_manifest(out_dir: Path, command: str, config: dict, outputs: Sequence[Path], started: str, extra: dict | None = None) -> Path:
    manifest = {
        "tool": "erwlab",
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "rng_family": RNG_FAMILY,
        "started": started,
        "finished": utc_now(),
        "outputs": {Path(p).name: sha256_file(p) for p in outputs},
    }
    if extra:
        manifest["extra"] = extra
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_manifest(path: Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
