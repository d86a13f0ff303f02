"""Readers and writers: OBJ/PLY meshes, PLY point clouds, JSON scenes."""
from __future__ import annotations

import json
import logging
import os
from pathlib import Path

import numpy as np

from .geometry import GeometryError, PointCloud, RigidTransform, SceneDescription, SceneObject, TriangleMesh

log = logging.getLogger(__name__)


class MeshFormatError(ValueError):
    pass


_PLY_TYPES = {
    "char": "i1", "int8": "i1", "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2", "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4", "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4", "double": "f8", "float64": "f8",
}


def load_mesh(path) -> TriangleMesh:
    """Read an OBJ or PLY (ASCII / binary little-endian) triangle mesh.

    Polygons are fan-triangulated. Zero-area faces are dropped and the count
    is logged and stored on ``mesh.dropped_faces``.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise MeshFormatError(f"unreadable file: {path}") from exc
    suffix = path.suffix.lower()
    if suffix == ".obj":
        V, F = _parse_obj(raw.decode("utf-8", errors="replace"))
    elif suffix == ".ply":
        elements = read_ply(raw)
        V, F = _ply_mesh(elements)
    else:
        raise MeshFormatError(f"unsupported format: {suffix or path.name}")
    if len(F) == 0 or len(V) == 0:
        raise MeshFormatError(f"empty mesh: {path}")
    try:
        mesh = TriangleMesh.from_arrays(V, F)
    except GeometryError as exc:
        raise MeshFormatError(f"{path}: {exc}") from exc
    if mesh.dropped_faces:
        log.warning("%s: dropped %d degenerate faces", path, mesh.dropped_faces)
    return mesh


def _fan(poly):
    return [(poly[0], poly[i], poly[i + 1]) for i in range(1, len(poly) - 1)]


def _parse_obj(text: str):
    V, F = [], []
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            V.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            idx = []
            for tok in parts[1:]:
                i = int(tok.split("/")[0])
                idx.append(i - 1 if i > 0 else len(V) + i)
            F.extend(_fan(idx))
    return np.array(V, dtype=np.float64).reshape(-1, 3), np.array(F, dtype=np.int64).reshape(-1, 3)


def read_ply(data: bytes) -> dict:
    """Parse a PLY file into ``{element_name: {property: array | list of arrays}}``."""
    end = data.find(b"end_header")
    if not data.startswith(b"ply") or end < 0:
        raise MeshFormatError("not a PLY file")
    nl = data.find(b"\n", end)
    header = data[:end].decode("ascii", errors="replace").splitlines()
    body = data[nl + 1:]
    fmt = None
    elements = []
    for line in header[1:]:
        parts = line.split()
        if not parts or parts[0] in ("comment", "obj_info"):
            continue
        if parts[0] == "format":
            fmt = parts[1]
        elif parts[0] == "element":
            elements.append((parts[1], int(parts[2]), []))
        elif parts[0] == "property":
            if not elements:
                raise MeshFormatError("property before element")
            if parts[1] == "list":
                elements[-1][2].append((parts[4], "list", _ply_type(parts[3]), _ply_type(parts[2])))
            else:
                elements[-1][2].append((parts[2], "scalar", _ply_type(parts[1]), None))
    if fmt == "ascii":
        return _ply_ascii(body, elements)
    if fmt == "binary_little_endian":
        return _ply_binary(body, elements)
    raise MeshFormatError(f"unsupported PLY format: {fmt}")


def _ply_type(name):
    try:
        return _PLY_TYPES[name]
    except KeyError:
        raise MeshFormatError(f"unknown PLY type {name}") from None


def _ply_ascii(body: bytes, elements):
    tokens = body.split()
    pos = 0
    out = {}
    for name, count, props in elements:
        if all(kind == "scalar" for _, kind, _, _ in props):
            n = len(props)
            block = np.array(tokens[pos:pos + n * count], dtype=np.float64).reshape(count, n)
            pos += n * count
            out[name] = {p[0]: block[:, i].astype(p[2]) for i, p in enumerate(props)}
            continue
        cols = {p[0]: [] for p in props}
        for _ in range(count):
            for pname, kind, t, _ in props:
                if kind == "scalar":
                    cols[pname].append(float(tokens[pos]))
                    pos += 1
                else:
                    k = int(tokens[pos])
                    cols[pname].append(np.array(tokens[pos + 1:pos + 1 + k], dtype=np.float64).astype(t))
                    pos += 1 + k
        out[name] = {p[0]: (np.array(cols[p[0]], dtype=p[2]) if p[1] == "scalar" else cols[p[0]]) for p in props}
    return out


def _ply_binary(body: bytes, elements):
    pos = 0
    out = {}
    for name, count, props in elements:
        if all(kind == "scalar" for _, kind, _, _ in props):
            dt = np.dtype([(p[0], "<" + p[2]) for p in props])
            arr = np.frombuffer(body, dtype=dt, count=count, offset=pos)
            pos += dt.itemsize * count
            out[name] = {p[0]: arr[p[0]].copy() for p in props}
            continue
        cols = {p[0]: [] for p in props}
        for _ in range(count):
            for pname, kind, t, ct in props:
                if kind == "scalar":
                    dt = np.dtype("<" + t)
                    cols[pname].append(np.frombuffer(body, dt, 1, pos)[0])
                    pos += dt.itemsize
                else:
                    cdt = np.dtype("<" + ct)
                    k = int(np.frombuffer(body, cdt, 1, pos)[0])
                    pos += cdt.itemsize
                    dt = np.dtype("<" + t)
                    cols[pname].append(np.frombuffer(body, dt, k, pos).copy())
                    pos += dt.itemsize * k
        out[name] = {p[0]: (np.array(cols[p[0]], dtype=p[2]) if p[1] == "scalar" else cols[p[0]]) for p in props}
    return out


def _ply_mesh(elements):
    vert = elements.get("vertex")
    if vert is None:
        raise MeshFormatError("PLY has no vertex element")
    V = np.column_stack([vert["x"], vert["y"], vert["z"]]).astype(np.float64)
    face = elements.get("face", {})
    lists = face.get("vertex_indices", face.get("vertex_index", []))
    F = [tri for poly in lists for tri in _fan([int(i) for i in poly])]
    return V, np.array(F, dtype=np.int64).reshape(-1, 3)


def write_obj(mesh: TriangleMesh, path) -> None:
    lines = [f"v {x!r} {y!r} {z!r}" for x, y, z in mesh.vertices.tolist()]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


def write_ply_mesh(mesh: TriangleMesh, path, binary: bool = False) -> None:
    header = [
        "ply", f"format {'binary_little_endian' if binary else 'ascii'} 1.0",
        f"element vertex {len(mesh.vertices)}",
        "property double x", "property double y", "property double z",
        f"element face {len(mesh.faces)}",
        "property list uchar int vertex_indices", "end_header",
    ]
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        if binary:
            fh.write(mesh.vertices.astype("<f8").tobytes())
            rec = np.zeros(len(mesh.faces), dtype=[("n", "u1"), ("idx", "<i4", (3,))])
            rec["n"] = 3
            rec["idx"] = mesh.faces
            fh.write(rec.tobytes())
        else:
            for x, y, z in mesh.vertices.tolist():
                fh.write(f"{x!r} {y!r} {z!r}\n".encode())
            for a, b, c in mesh.faces.tolist():
                fh.write(f"3 {a} {b} {c}\n".encode())


# --------------------------------------------------------------------------
# point clouds


def write_cloud_ply(cloud: PointCloud, path, binary: bool = True) -> None:
    """Write x,y,z[,nx,ny,nz][,instance_id] vertices."""
    fields = [("x", "<f8"), ("y", "<f8"), ("z", "<f8")]
    if cloud.normals is not None:
        fields += [("nx", "<f8"), ("ny", "<f8"), ("nz", "<f8")]
    if cloud.instance_labels is not None:
        fields += [("instance_id", "<u4")]
    rec = np.zeros(len(cloud), dtype=fields)
    rec["x"], rec["y"], rec["z"] = cloud.points.T
    if cloud.normals is not None:
        rec["nx"], rec["ny"], rec["nz"] = cloud.normals.T
    if cloud.instance_labels is not None:
        rec["instance_id"] = cloud.instance_labels
    names = {"<f8": "double", "<u4": "uint"}
    header = ["ply", f"format {'binary_little_endian' if binary else 'ascii'} 1.0",
              f"element vertex {len(cloud)}"]
    header += [f"property {names[t]} {n}" for n, t in fields]
    header.append("end_header")
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        if binary:
            fh.write(rec.tobytes())
        else:
            for row in rec.tolist():
                fh.write((" ".join(repr(v) for v in row) + "\n").encode())


def read_cloud_ply(path) -> PointCloud:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise MeshFormatError(f"unreadable file: {path}") from exc
    vert = read_ply(raw).get("vertex")
    if vert is None:
        raise MeshFormatError(f"{path}: no vertex element")
    P = np.column_stack([vert["x"], vert["y"], vert["z"]]).astype(np.float64)
    N = None
    if all(k in vert for k in ("nx", "ny", "nz")):
        N = np.column_stack([vert["nx"], vert["ny"], vert["nz"]]).astype(np.float64)
    L = vert["instance_id"].astype(np.int64) if "instance_id" in vert else None
    return PointCloud(P, N, L)


# --------------------------------------------------------------------------
# scenes


def load_scene(path) -> SceneDescription:
    """Read a scene JSON document; mesh paths resolve relative to the file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise MeshFormatError(f"unreadable file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise MeshFormatError(f"{path}: invalid JSON ({exc})") from exc
    return scene_from_json(doc, base_dir=path.parent)


def scene_from_json(doc: dict, base_dir=".") -> SceneDescription:
    if not isinstance(doc, dict) or "objects" not in doc:
        raise MeshFormatError("scene document needs an 'objects' list")
    cache = {}
    objects = []
    for i, entry in enumerate(doc["objects"]):
        try:
            mpath = entry["mesh"]
        except (KeyError, TypeError):
            raise MeshFormatError(f"objects[{i}].mesh missing") from None
        full = os.path.join(base_dir, mpath)
        if full not in cache:
            cache[full] = load_mesh(full)
        try:
            pose = RigidTransform.from_json(entry.get("pose", {}))
            objects.append(SceneObject(cache[full], pose, float(entry.get("scale", 1.0)),
                                       int(entry.get("instance_id", i)), mpath))
        except GeometryError as exc:
            raise MeshFormatError(f"objects[{i}]: {exc}") from exc
    try:
        return SceneDescription(tuple(objects))
    except GeometryError as exc:
        raise MeshFormatError(str(exc)) from exc


def scene_to_json(scene: SceneDescription) -> dict:
    return {"objects": [
        {"mesh": o.mesh_path, "pose": o.pose.to_json(), "scale": o.scale, "instance_id": o.instance_id}
        for o in scene.objects
    ]}


def save_scene(scene: SceneDescription, path) -> None:
    Path(path).write_text(json.dumps(scene_to_json(scene), indent=2) + "\n")
