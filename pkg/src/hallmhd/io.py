"""Binary field snapshots, CSV streams and JSON manifests.

Snapshot layout (little-endian)::

    offset  size  field
    0       4     magic b"HMHD"
    4       4     u32 format version (1)
    8       4     u32 M, samples per axis
    12      4     u32 rank, 1 scalar or 3 vector
    16      8     f64 L, box side
    24      8     f64 t, snapshot time
    32      ...   f64 samples, row-major (i, j, k[, component])
"""
from __future__ import annotations

import csv
import json
import os
import struct
import subprocess
from pathlib import Path

import numpy as np

from .spectral_basis import GridField, TorusDomain

MAGIC = b"HMHD"
VERSION = 1
_HEADER = struct.Struct("<4sIIIdd")
OUTPUT_ROOT_ENV = "HMHD_OUTPUT_ROOT"

LEDGER_COLUMNS = ("t", "E_kin", "E_mag", "D_visc_cum", "D_resist_cum", "residual")
LEVELSET_COLUMNS = ("t", "bin_lo", "bin_hi", "volume")


def output_root(default="hmhd_runs") -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, default))


def write_snapshot(path, field: GridField, t: float = 0.0):
    """Write a scalar or vector field; vectors go to disk as (M, M, M, 3)."""
    d = field.domain
    if field.rank == "scalar":
        rank, body = 1, field.samples
    elif field.rank == "vector3":
        rank, body = 3, np.moveaxis(field.samples, 0, -1)
    else:
        raise ValueError("only scalar and vector fields can be written")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, d.M, rank, float(d.L), float(t)))
        fh.write(np.ascontiguousarray(body, dtype="<f8").tobytes())


def read_snapshot(path, domain: TorusDomain | None = None):
    """Return (samples, domain, t) with vectors stored component-first."""
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, ver, M, rank, L, t = _HEADER.unpack(head)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        if ver != VERSION:
            raise ValueError(f"{path}: unsupported format version {ver}")
        if rank not in (1, 3):
            raise ValueError(f"{path}: rank must be 1 or 3, got {rank}")
        count = M ** 3 * rank
        body = np.frombuffer(fh.read(), dtype="<f8")
    if body.size != count:
        raise ValueError(f"{path}: expected {count} samples, found {body.size}")
    d = TorusDomain(L, M)
    if domain is not None and (domain.M != M or not np.isclose(domain.L, L, rtol=1e-14)):
        raise ValueError(f"{path}: snapshot domain (L={L}, M={M}) does not match the run")
    a = body.reshape((M, M, M) if rank == 1 else (M, M, M, 3)).astype(np.float64)
    if rank == 3:
        a = np.moveaxis(a, -1, 0)
    return a, d, t


def read_field(path, domain: TorusDomain | None = None) -> GridField:
    a, d, _ = read_snapshot(path, domain)
    return GridField(domain or d, a)


def write_csv(path, columns, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], [[float(x) for x in r] for r in rows[1:]]


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    if isinstance(o, (np.floating, float)):
        v = float(o)
        return v if np.isfinite(v) else str(v)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    return o


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def version_string() -> str:
    """git-describe style version, falling back to the package version."""
    from . import __version__
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"], cwd=here,
                             capture_output=True, text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__
