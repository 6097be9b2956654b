"""CSI tensor serialization.

Binary container layout (all little-endian)::

    b"CSIT" | version: uint8 | M, G, N: uint64 | M*G*N complex128 samples

Samples are stored m-major, then g, then n, each as a (re, im) pair of
64-bit floats.  The :class:`SystemConfig` travels in a JSON sidecar next to
the container (``<file>.json``).
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path as FsPath

import numpy as np

from .exceptions import FormatError, InvalidConfigError
from .signal_model import CsiTensor, SystemConfig

MAGIC = b"CSIT"
VERSION = 1
_HEADER = struct.Struct("<4sBQQQ")


def sidecar_path(path) -> FsPath:
    path = FsPath(path)
    return path.with_name(path.name + ".json")


def encode_tensor(Y: CsiTensor) -> bytes:
    M, G, N = Y.shape
    body = np.ascontiguousarray(Y.samples, dtype="<c16").tobytes()
    return _HEADER.pack(MAGIC, VERSION, M, G, N) + body


def decode_tensor(data: bytes, config: SystemConfig | None = None) -> CsiTensor:
    """Parse a container; ``config`` defaults to one matching the stored dims."""
    if len(data) < _HEADER.size:
        raise FormatError(f"file too short for a CSIT header ({len(data)} bytes)")
    magic, version, M, G, N = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic bytes {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"unsupported CSIT version {version}")
    expected = _HEADER.size + 16 * M * G * N
    if len(data) != expected:
        raise FormatError(f"payload size {len(data)} does not match dims {(M, G, N)} ({expected} bytes)")
    samples = np.frombuffer(data, dtype="<c16", offset=_HEADER.size).reshape(M, G, N)
    if config is None:
        config = SystemConfig(packet_count=M, subcarrier_count=G, antenna_count=N)
    elif config.shape != (M, G, N):
        raise InvalidConfigError(f"tensor dims {(M, G, N)} do not match config {config.shape}")
    try:
        return CsiTensor(samples, config)
    except InvalidConfigError as exc:
        raise FormatError(str(exc)) from exc


def write_tensor(Y: CsiTensor, path, *, sidecar: bool = True) -> FsPath:
    """Write the container and (by default) its config sidecar."""
    path = FsPath(path)
    path.write_bytes(encode_tensor(Y))
    if sidecar:
        sidecar_path(path).write_text(json.dumps(Y.config.to_dict(), indent=2, sort_keys=True) + "\n")
    return path


def read_config(path) -> SystemConfig:
    try:
        data = json.loads(FsPath(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise FormatError(f"{path}: sidecar must hold a JSON object")
    return SystemConfig.from_dict(data)


def read_tensor(path, config: SystemConfig | None = None) -> CsiTensor:
    """Read a container.  Without ``config`` the sidecar is used when present."""
    path = FsPath(path)
    if config is None and sidecar_path(path).exists():
        config = read_config(sidecar_path(path))
    return decode_tensor(path.read_bytes(), config)


def write_csv(Y: CsiTensor, path) -> FsPath:
    """Long-format CSV with columns ``m,g,n,re,im``."""
    path = FsPath(path)
    M, G, N = Y.shape
    m, g, n = (a.ravel() for a in np.meshgrid(np.arange(M), np.arange(G), np.arange(N), indexing="ij"))
    y = Y.samples.ravel()
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "g", "n", "re", "im"])
        for row in zip(m, g, n, y.real, y.imag):
            writer.writerow([int(row[0]), int(row[1]), int(row[2]), repr(float(row[3])), repr(float(row[4]))])
    return path


def read_csv(path, config: SystemConfig | None = None) -> CsiTensor:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 5:
        raise FormatError(f"{path}: expected columns m,g,n,re,im")
    idx = data[:, :3].astype(int)
    M, G, N = (int(v) + 1 for v in idx.max(axis=0))
    y = np.full((M, G, N), np.nan + 0j)
    y[idx[:, 0], idx[:, 1], idx[:, 2]] = data[:, 3] + 1j * data[:, 4]
    if np.isnan(y).any():
        raise FormatError(f"{path}: missing samples")
    if config is None:
        config = SystemConfig(packet_count=M, subcarrier_count=G, antenna_count=N)
    return CsiTensor(y, config)
