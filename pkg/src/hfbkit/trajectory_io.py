"""HFB1 trajectory files.

Layout: the 4 magic bytes ``HFB1``; an unsigned 64-bit little-endian header
length; a UTF-8 JSON header; then one payload per frame holding ``φ``,
``Λ_p`` and ``Γ_p`` as little-endian complex128 (re, im) values, row-major
with ``x`` outermost.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .evolution import StateHFB, Trajectory
from .grid import make_grid

MAGIC = b"HFB1"
SCHEMA_VERSION = 1
_CDTYPE = np.dtype("<c16")


def _header(traj: Trajectory) -> dict:
    g = traj.grid
    head = {
        "schema_version": SCHEMA_VERSION,
        "d": g.d,
        "n": g.n,
        "L": g.L,
        "dt": traj.dt,
        "stride": traj.stride,
        "steps": (traj.nframes - 1) * traj.stride,
        "frames": traj.nframes,
        "times": [float(t) for t in traj.times],
    }
    head.update(traj.meta)
    return head


def write_trajectory(path, traj: Trajectory) -> Path:
    """Write ``traj`` atomically (to a temporary name, then renamed)."""
    path = Path(path)
    if any(f.phi is None for f in traj.frames):
        raise ValueError("only condensate-carrying trajectories can be written")
    head = json.dumps(_header(traj), sort_keys=True).encode("utf-8")
    tmp = path.with_suffix(path.suffix + ".part")
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(head)))
        fh.write(head)
        for f in traj.frames:
            for a in (f.phi, f.lam_p, f.gam_p):
                fh.write(np.ascontiguousarray(a, dtype=_CDTYPE).tobytes())
    tmp.replace(path)
    return path


def read_header(path) -> dict:
    with open(path, "rb") as fh:
        return _read_head(fh)


def _read_head(fh) -> dict:
    if fh.read(4) != MAGIC:
        raise ValueError("not an HFB1 trajectory file (bad magic)")
    (size,) = struct.unpack("<Q", fh.read(8))
    head = json.loads(fh.read(size).decode("utf-8"))
    version = head.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported trajectory schema version {version!r}")
    return head


def read_trajectory(path) -> Trajectory:
    with open(path, "rb") as fh:
        head = _read_head(fh)
        payload = fh.read()
    g = make_grid(head["d"], head["n"], head["L"])
    m = g.npts
    per = m + 2 * m * m
    nf = head["frames"]
    data = np.frombuffer(payload, dtype=_CDTYPE)
    if data.size != nf * per:
        raise ValueError(f"truncated trajectory: expected {nf * per} values, found {data.size}")
    data = data.reshape(nf, per).astype(complex)
    meta = {k: v for k, v in head.items()
            if k not in ("schema_version", "d", "n", "L", "dt", "stride", "steps", "frames", "times")}
    traj = Trajectory(g, head["dt"], head["stride"], meta)
    for t, row in zip(head["times"], data):
        phi = row[:m].reshape(g.field_shape)
        lam_p = row[m:m + m * m].reshape(m, m)
        gam_p = row[m + m * m:].reshape(m, m)
        traj.append(StateHFB(t, phi, lam_p, gam_p))
    return traj
