"""File formats: diagnostics CSV, JSON documents, binary frame dumps, run manifests.

Every output except the manifest is a pure function of its inputs, so
repeated runs produce identical bytes.
"""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .grid import ComplexField, GridSpec

SCHEMA_VERSION = 1
MANIFEST_NAME = "manifest.json"
FRAME_MAGIC = "dnls-lab-frames"


def format_float(value: float) -> str:
    """17 significant digits: round-trips every binary64 value."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.17g}"


def csv_text(columns: Sequence[str], rows: Iterable[Sequence[float]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_float(v) for v in row])
    return buf.getvalue()


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence[float]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(csv_text(columns, rows).encode("utf-8"))
    return path


def read_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) for v in row] for row in reader]
    arr = np.array(data, dtype=np.float64).reshape(-1, len(header))
    return {name: arr[:, j] for j, name in enumerate(header)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        # JSON has no inf/nan; keep them readable and lossless as strings
        return value if math.isfinite(value) else format_float(value)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Path):
        return obj.as_posix()
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def json_text(doc: Any) -> str:
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, doc: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(json_text(doc).encode("utf-8"))
    return path


# --- frame dumps ------------------------------------------------------------


def write_frames(path, frames: Sequence[tuple[float, ComplexField]]) -> Path:
    """JSON header line, then per frame: float64 t followed by interleaved re/im samples, little-endian."""
    if not frames:
        raise ValueError("no frames to write")
    grid = frames[0][1].grid
    header = {
        "format": FRAME_MAGIC,
        "schema_version": SCHEMA_VERSION,
        "grid": grid.to_dict(),
        "n_frames": len(frames),
        "layout": "per frame: t, then re/im pairs; float64 little-endian",
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode("utf-8"))
        for t, field in frames:
            if field.grid != grid:
                raise ValueError("all frames must share one grid")
            block = np.empty(1 + 2 * grid.n_points, dtype="<f8")
            block[0] = t
            block[1::2] = field.values.real
            block[2::2] = field.values.imag
            fh.write(block.tobytes())
    return path


def read_frames(path) -> tuple[dict, list[tuple[float, ComplexField]]]:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        if header.get("format") != FRAME_MAGIC:
            raise ValueError(f"{path} is not a frame dump")
        raw = np.frombuffer(fh.read(), dtype="<f8")
    grid = GridSpec.from_dict(header["grid"])
    width = 1 + 2 * grid.n_points
    if raw.size % width:
        raise ValueError("truncated frame dump")
    frames = []
    for block in raw.reshape(-1, width):
        frames.append((float(block[0]), ComplexField(grid, block[1::2] + 1j * block[2::2])))
    return header, frames


# --- manifest ---------------------------------------------------------------


def content_hash(paths: Sequence[Path], root: Path) -> str:
    """sha256 over (relative path, bytes) of each file, in sorted path order."""
    h = hashlib.sha256()
    for p in sorted(paths, key=lambda q: q.relative_to(root).as_posix()):
        rel = p.relative_to(root).as_posix()
        h.update(rel.encode("utf-8") + b"\0")
        h.update(p.read_bytes())
        h.update(b"\0")
    return h.hexdigest()


def now_iso() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def write_manifest(out_dir, config: Any, started: str, tool_version: str) -> Path:
    """Manifest over every file under ``out_dir`` except manifests."""
    root = Path(out_dir)
    artifacts = [p for p in root.rglob("*") if p.is_file() and p.name != MANIFEST_NAME]
    doc = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": tool_version,
        "config_echo": json.dumps(_jsonable(config), sort_keys=True),
        "started": started,
        "finished": now_iso(),
        "artifact_paths": sorted(p.relative_to(root).as_posix() for p in artifacts),
        "git_like_content_hash": content_hash(artifacts, root),
    }
    return write_json(root / MANIFEST_NAME, doc)
