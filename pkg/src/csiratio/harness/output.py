"""CSV and manifest writers shared by the experiment runners."""

from __future__ import annotations

import csv
import hashlib
import json
import platform
from pathlib import Path as FsPath

import numpy as np


def config_hash(spec) -> str:
    """SHA-256 of the canonical JSON form of ``spec``."""
    text = json.dumps(spec, sort_keys=True, default=_jsonable)
    return hashlib.sha256(text.encode()).hexdigest()


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer, np.floating)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (set, tuple)):
        return list(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def write_rows(path, header, rows) -> FsPath:
    path = FsPath(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def write_manifest(path, *, spec, seed, wall_time, outputs=(), extra=None) -> FsPath:
    from .. import __version__

    path = FsPath(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    manifest = {
        "spec": spec,
        "config_hash": config_hash(spec),
        "seed": seed,
        "software_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "wall_time_s": round(float(wall_time), 3),
        "outputs": [str(o) for o in outputs],
    }
    if extra:
        manifest.update(extra)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path
