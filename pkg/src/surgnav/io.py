"""File formats shared by the CLI commands.

- Cloud files: ASCII PLY subset (x y z, optionally nx ny nz; nothing else).
- Landmark files: JSON object mapping label -> [x, y, z] mm.
- Plan files: JSON list of {id, skin_entry, bone_entry, target}.
- Trace streams: JSON Lines, {"t": seconds, "p": [x, y, z]}.
- Transforms: JSON with a row-major rotation and a translation.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ParseError
from .geometry import Line3, PointCloud, RigidTransform
from .guidance import TrajectoryPlan
from .landmarks import LandmarkSet
from .metrics import PlacementResult


def _vec(value, what: str) -> list[float]:
    try:
        x, y, z = (float(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{what} must be a 3-vector") from exc
    return [x, y, z]


# ---------------------------------------------------------------- PLY clouds

def write_ply(path, cloud: PointCloud) -> None:
    with_normals = cloud.normals is not None
    lines = ["ply", "format ascii 1.0", f"element vertex {len(cloud)}",
             "property float x", "property float y", "property float z"]
    if with_normals:
        lines += ["property float nx", "property float ny", "property float nz"]
    lines.append("end_header")
    rows = (np.hstack([cloud.points, cloud.normals]) if with_normals else cloud.points)
    body = "\n".join(" ".join(repr(float(v)) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n" + body + "\n")


def read_ply(path) -> PointCloud:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    lines = text.splitlines()
    if not lines or lines[0].strip() != "ply":
        raise ParseError(f"{path}: not a PLY file")
    n_vertices = None
    properties: list[str] = []
    body_start = None
    for i, raw in enumerate(lines[1:], start=1):
        tokens = raw.split()
        if not tokens or tokens[0] == "comment":
            continue
        if tokens[0] == "format":
            if tokens[1] != "ascii":
                raise ParseError(f"{path}: only ASCII PLY is supported")
        elif tokens[0] == "element":
            if tokens[1] != "vertex" or n_vertices is not None:
                raise ParseError(f"{path}: only a single vertex element is supported")
            n_vertices = int(tokens[2])
        elif tokens[0] == "property":
            if tokens[1] not in ("float", "double") or len(tokens) != 3:
                raise ParseError(f"{path}: unsupported property {raw.strip()!r}")
            properties.append(tokens[2])
        elif tokens[0] == "end_header":
            body_start = i + 1
            break
        else:
            raise ParseError(f"{path}: unsupported header line {raw.strip()!r}")
    if n_vertices is None or body_start is None:
        raise ParseError(f"{path}: incomplete PLY header")
    if properties not in (["x", "y", "z"], ["x", "y", "z", "nx", "ny", "nz"]):
        raise ParseError(f"{path}: vertex properties must be x y z [nx ny nz]")
    try:
        data = np.array([[float(v) for v in line.split()]
                         for line in lines[body_start:body_start + n_vertices]])
    except ValueError as exc:
        raise ParseError(f"{path}: malformed vertex data") from exc
    if data.shape != (n_vertices, len(properties)):
        raise ParseError(f"{path}: vertex count does not match header")
    normals = data[:, 3:6] if len(properties) == 6 else None
    try:
        return PointCloud(data[:, :3], normals)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


# ----------------------------------------------------------------- landmarks

def write_landmarks(path, landmarks: LandmarkSet) -> None:
    obj = {lab: _vec(pos, lab) for lab, pos in zip(landmarks.labels, landmarks.positions)}
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_landmarks(path) -> LandmarkSet:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot parse landmarks {path}: {exc}") from exc
    if not isinstance(obj, dict) or not obj:
        raise ParseError(f"{path}: expected a label -> [x, y, z] object")
    labels = sorted(obj)
    positions = np.array([_vec(obj[lab], lab) for lab in labels])
    return LandmarkSet(tuple(labels), positions)


# --------------------------------------------------------------------- plans

def write_plans(path, plans, ids=None) -> None:
    if ids is None:
        ids = [f"T{i + 1:02d}" for i in range(len(plans))]
    records = [{"id": pid,
                "skin_entry": _vec(p.skin_entry, "skin_entry"),
                "bone_entry": _vec(p.bone_entry, "bone_entry"),
                "target": _vec(p.target, "target")}
               for pid, p in zip(ids, plans)]
    Path(path).write_text(json.dumps(records, indent=2) + "\n")


def read_plans(path) -> dict[str, TrajectoryPlan]:
    try:
        records = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot parse plans {path}: {exc}") from exc
    if not isinstance(records, list):
        raise ParseError(f"{path}: expected a list of plans")
    plans = {}
    for rec in records:
        try:
            plans[str(rec["id"])] = TrajectoryPlan(
                _vec(rec["skin_entry"], "skin_entry"),
                _vec(rec["bone_entry"], "bone_entry"),
                _vec(rec["target"], "target"))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"{path}: bad plan record: {exc}") from exc
    return plans


# -------------------------------------------------------------- trace stream

def write_trace(path, times, points) -> None:
    with open(path, "w") as fh:
        for t, p in zip(times, points):
            fh.write(json.dumps({"t": round(float(t), 6), "p": _vec(p, "p")}) + "\n")


def read_trace(path) -> tuple[np.ndarray, np.ndarray]:
    times, points = [], []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read trace {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            times.append(float(rec["t"]))
            points.append(_vec(rec["p"], "p"))
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise ParseError(f"{path}:{lineno}: bad trace record: {exc}") from exc
    return np.array(times), np.array(points).reshape(-1, 3)


# ---------------------------------------------------------------- transforms

def transform_to_dict(T: RigidTransform) -> dict:
    return {"rotation": [float(v) for v in T.rotation.ravel()],
            "translation": _vec(T.translation, "translation")}


def transform_from_dict(obj) -> RigidTransform:
    try:
        R = np.array(obj["rotation"], dtype=np.float64).reshape(3, 3)
        t = np.array(obj["translation"], dtype=np.float64)
        return RigidTransform(R, t)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad transform: {exc}") from exc


def read_transform(path) -> RigidTransform:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot parse transform {path}: {exc}") from exc
    return transform_from_dict(obj)


# ---------------------------------------------------------------- placements

def placement_to_dict(result: PlacementResult) -> dict:
    return {"line": {"origin": _vec(result.fitted_line.origin, "origin"),
                     "direction": _vec(result.fitted_line.direction, "direction")},
            "tip": _vec(result.tip, "tip"),
            "skin_intersection": _vec(result.skin_intersection, "skin_intersection"),
            "bone_intersection": _vec(result.bone_intersection, "bone_intersection")}


def placement_from_dict(obj) -> PlacementResult:
    try:
        line = Line3(np.array(obj["line"]["origin"], dtype=np.float64),
                     np.array(obj["line"]["direction"], dtype=np.float64))
        return PlacementResult(line, _vec(obj["tip"], "tip"),
                               _vec(obj["skin_intersection"], "skin_intersection"),
                               _vec(obj["bone_intersection"], "bone_intersection"))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad placement: {exc}") from exc


def read_placements(path) -> list[dict]:
    """Trial records: {plan_id, user, condition, placement, [times]}."""
    try:
        records = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot parse placements {path}: {exc}") from exc
    if not isinstance(records, list):
        raise ParseError(f"{path}: expected a list of trial records")
    out = []
    for rec in records:
        try:
            out.append({"plan_id": str(rec["plan_id"]),
                        "user": str(rec["user"]),
                        "condition": str(rec["condition"]),
                        "placement": placement_from_dict(rec["placement"]),
                        "marking_time": rec.get("marking_time"),
                        "insertion_time": rec.get("insertion_time")})
        except (KeyError, TypeError) as exc:
            raise ParseError(f"{path}: bad trial record: {exc}") from exc
    return out
