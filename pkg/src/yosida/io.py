"""Text formats, report writers and the point-set cache.

Every file starts with a versioned header line.  PointSet and Trajectory
files carry a sha256 checksum of their header and record lines so that a damaged cache
entry is detected rather than silently reused.  All writes go to a temporary
file that is renamed into place.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .locate import AnnulusSector, Disc, LocatedPoint, PointSet, Rect, Region
from .painleve import PoleRecord, Trajectory

__all__ = [
    "POINTSET_HEADER",
    "TRAJECTORY_HEADER",
    "FormatError",
    "ChecksumError",
    "atomic_write",
    "encode_region",
    "decode_region",
    "pointset_text",
    "parse_pointset",
    "write_pointset",
    "read_pointset",
    "trajectory_text",
    "parse_trajectory",
    "write_trajectory",
    "read_trajectory",
    "csv_text",
    "json_text",
    "write_csv",
    "write_json",
    "PointSetCache",
]

POINTSET_HEADER = "# yosida-pointset v1"
TRAJECTORY_HEADER = "# yosida-trajectory v1"


class FormatError(ValueError):
    pass


class ChecksumError(FormatError):
    pass


def _f(x: float) -> str:
    return "%.17g" % x


def _c(z: complex) -> str:
    return f"{_f(z.real)} {_f(z.imag)}"


def atomic_write(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _digest(lines: Sequence[str]) -> str:
    return hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------- regions

def encode_region(region: Region) -> str:
    if isinstance(region, Disc):
        return f"disc {_c(region.center)} {_f(region.radius)}"
    if isinstance(region, Rect):
        return f"rect {_c(region.center)} {_f(region.hw)} {_f(region.hh)}"
    if isinstance(region, AnnulusSector):
        return f"annulus {_f(region.r1)} {_f(region.r2)} {_f(region.th1)} {_f(region.th2)} {_c(region.center)}"
    raise TypeError(region)


def decode_region(text: str) -> Region:
    parts = text.split()
    kind, v = parts[0], [float(x) for x in parts[1:]]
    if kind == "disc" and len(v) == 3:
        return Disc(complex(v[0], v[1]), v[2])
    if kind == "rect" and len(v) == 4:
        return Rect(complex(v[0], v[1]), v[2], v[3])
    if kind == "annulus" and len(v) == 6:
        return AnnulusSector(v[0], v[1], v[2], v[3], complex(v[4], v[5]))
    raise FormatError(f"bad region {text!r}")


# ---------------------------------------------------------------- headers

def _header_block(header: str, meta: list[tuple[str, str]], body: list[str]) -> str:
    lines = [header] + [f"# {k}: {v}" for k, v in meta]
    lines.append(f"# checksum: {_digest(lines + body)}")
    return "\n".join(lines + body) + "\n"


def _split(text: str, header: str) -> tuple[dict[str, str], list[str]]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != header:
        raise FormatError(f"expected header {header!r}")
    meta: dict[str, str] = {}
    covered = [lines[0]]
    body: list[str] = []
    for ln in lines[1:]:
        if ln.startswith("# "):
            if ":" not in ln:
                raise FormatError(f"bad metadata line {ln!r}")
            k, v = ln[2:].split(":", 1)
            meta[k.strip()] = v.strip()
            if k.strip() != "checksum":
                covered.append(ln)
        elif ln.strip():
            body.append(ln)
    if "checksum" not in meta:
        raise FormatError("missing checksum")
    # the digest covers the header and metadata as well as the records
    if meta["checksum"] != _digest(covered + body):
        raise ChecksumError("checksum mismatch")
    return meta, body


# ---------------------------------------------------------------- point sets

def pointset_text(ps: PointSet) -> str:
    body = [
        f"{p.kind} {p.multiplicity} {_c(p.position)} {_f(p.residual)} {encode_region(p.cell)}"
        for p in ps.points
    ]
    meta = [
        ("function", ps.function_id),
        ("region", encode_region(ps.region)),
        ("tol", _f(ps.tol)),
        ("complete", "true" if ps.complete else "false"),
        ("count", str(len(body))),
        ("columns", "kind multiplicity re im residual cell"),
    ]
    return _header_block(POINTSET_HEADER, meta, body)


def parse_pointset(text: str) -> PointSet:
    meta, body = _split(text, POINTSET_HEADER)
    pts = []
    for ln in body:
        parts = ln.split()
        if len(parts) < 6:
            raise FormatError(f"bad point record {ln!r}")
        pts.append(
            LocatedPoint(
                complex(float(parts[2]), float(parts[3])),
                parts[0],
                int(parts[1]),
                decode_region(" ".join(parts[5:])),
                float(parts[4]),
            )
        )
    if int(meta.get("count", len(pts))) != len(pts):
        raise FormatError("record count mismatch")
    return PointSet(meta["function"], decode_region(meta["region"]), float(meta["tol"]), pts, meta["complete"] == "true")


def write_pointset(path, ps: PointSet) -> None:
    atomic_write(path, pointset_text(ps))


def read_pointset(path) -> PointSet:
    return parse_pointset(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------- trajectories

def trajectory_text(traj: Trajectory) -> str:
    body = [
        f"checkpoint {_f(t)} {_c(z)} {_c(w)} {_c(wp)}"
        for t, z, w, wp in zip(traj.t, traj.z, traj.w, traj.wp)
    ]
    body += [
        f"pole {_c(p.p)} {_c(p.h)} {_f(p.incoming_residual)} {_f(p.outgoing_residual)} {_f(p.t_entry)} {_f(p.t_exit)}"
        for p in traj.poles
    ]
    meta = [
        ("origin", _c(traj.origin)),
        ("direction", _c(traj.direction)),
        ("span", f"{_f(traj.span[0])} {_f(traj.span[1])}"),
        ("forcing", f"{_f(traj.forcing[0])} {_f(traj.forcing[1])}"),
        ("tol", _f(traj.tol)),
        ("W0", _c(traj.W0)),
        ("checkpoints", str(len(traj.t))),
        ("poles", str(len(traj.poles))),
        ("columns", "checkpoint t z w w' | pole p h incoming outgoing t_entry t_exit"),
    ]
    return _header_block(TRAJECTORY_HEADER, meta, body)


def _cx(a: str, b: str) -> complex:
    return complex(float(a), float(b))


def parse_trajectory(text: str) -> Trajectory:
    """Checkpoints and pole records; the dense interpolants are not stored, so
    the result serves inspection and statistics rather than re-evaluation."""
    meta, body = _split(text, TRAJECTORY_HEADER)
    t, z, w, wp, poles = [], [], [], [], []
    for ln in body:
        p = ln.split()
        if p[0] == "checkpoint" and len(p) == 8:
            t.append(float(p[1]))
            z.append(_cx(p[2], p[3]))
            w.append(_cx(p[4], p[5]))
            wp.append(_cx(p[6], p[7]))
        elif p[0] == "pole" and len(p) == 9:
            poles.append(PoleRecord(_cx(p[1], p[2]), _cx(p[3], p[4]), float(p[5]), float(p[6]), float(p[7]), float(p[8])))
        else:
            raise FormatError(f"bad trajectory record {ln!r}")
    s0, s1 = (float(x) for x in meta["span"].split())
    c0, c1 = (float(x) for x in meta["forcing"].split())
    return Trajectory(
        _cx(*meta["origin"].split()),
        _cx(*meta["direction"].split()),
        (s0, s1),
        np.array(t),
        np.array(z, dtype=complex),
        np.array(w, dtype=complex),
        np.array(wp, dtype=complex),
        poles,
        _cx(*meta["W0"].split()),
        (c0, c1),
        float(meta["tol"]),
    )


def write_trajectory(path, traj: Trajectory) -> None:
    atomic_write(path, trajectory_text(traj))


def read_trajectory(path) -> Trajectory:
    return parse_trajectory(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------- reports

def _plain(x):
    """JSON-ready copy: complex -> [re, im], numpy scalars -> Python, NaN -> null."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [_plain(float(x.real)), _plain(float(x.imag))]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else None
    return x


def json_text(payload: dict, schema: str) -> str:
    doc = {"schema": schema}
    doc.update(_plain(payload))
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def csv_text(columns: Sequence[str], rows: Iterable[Sequence], schema: str) -> str:
    buf = io.StringIO()
    buf.write(f"# {schema}\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(columns)
    for row in rows:
        wr.writerow([_f(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def write_csv(path, columns, rows, schema: str) -> None:
    atomic_write(path, csv_text(columns, rows, schema))


def write_json(path, payload: dict, schema: str) -> None:
    atomic_write(path, json_text(payload, schema))


# ---------------------------------------------------------------- cache

class PointSetCache:
    """PointSet files keyed by function id, region, tolerance and seed."""

    def __init__(self, directory: str | os.PathLike):
        self.directory = Path(directory)

    @staticmethod
    def key(function_id: str, region: Region, tol: float, seed: int = 0, extra: str = "") -> str:
        text = "|".join([function_id, encode_region(region), _f(tol), str(seed), extra])
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:32]

    def path(self, key: str) -> Path:
        return self.directory / f"{key}.pointset"

    def get(self, key: str) -> Optional[PointSet]:
        p = self.path(key)
        if not p.exists():
            return None
        try:
            return read_pointset(p)
        except FormatError:
            return None  # damaged entry: recompute

    def put(self, key: str, ps: PointSet) -> Path:
        p = self.path(key)
        write_pointset(p, ps)
        return p

    def fetch(self, key: str, compute: Callable[[], PointSet]) -> tuple[PointSet, bool]:
        """(point set, served_from_cache)."""
        hit = self.get(key)
        if hit is not None:
            return hit, True
        ps = compute()
        self.put(key, ps)
        return ps, False
