"""Geometric primitives and queries: rigid transforms, meshes, point clouds,
oriented boxes, ray casting and Monte-Carlo box/mesh overlap.

All arrays are float64 and all types are immutable after construction.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.stats import qmc

ORTHO_TOL = 1e-9
UNIT_TOL = 1e-9
# barycentric slack for ray/triangle tests; shared edges resolve by lowest face index
BARY_EPS = 1e-12
# parity hits closer than this (in barycentric units) to an edge trigger a jittered restart
EDGE_EPS = 1e-9
# cap on points x triangles per vectorized block
_BLOCK = 2_000_000


class GeometryError(ValueError):
    pass


def as_vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=np.float64).reshape(3)
    return a


def as_unit(v) -> np.ndarray:
    a = as_vec3(v)
    n = np.linalg.norm(a)
    if n == 0.0:
        raise GeometryError("zero-length direction")
    return a / n


def check_unit(v, tol: float = UNIT_TOL) -> np.ndarray:
    a = as_vec3(v)
    if abs(np.linalg.norm(a) - 1.0) > tol:
        raise GeometryError(f"vector {a.tolist()} is not unit length")
    return a


def check_rotation(R: np.ndarray, tol: float = ORTHO_TOL) -> None:
    if R.shape != (3, 3):
        raise GeometryError("rotation must be 3x3")
    if not np.allclose(R.T @ R, np.eye(3), atol=tol, rtol=0.0):
        raise GeometryError("rotation is not orthonormal")
    if abs(np.linalg.det(R) - 1.0) > tol:
        raise GeometryError("rotation determinant is not +1")


def rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_from_axis_angle(axis, angle: float) -> np.ndarray:
    k = as_unit(axis)
    K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


@dataclass(frozen=True)
class RigidTransform:
    """Rotation followed by translation: ``x -> R x + t``."""

    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        R = np.array(self.rotation, dtype=np.float64).reshape(3, 3)
        t = as_vec3(self.translation).copy()
        check_rotation(R)
        R.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls()

    def apply(self, points) -> np.ndarray:
        """Map points (N, 3) or (3,) from the local frame into the parent frame."""
        p = np.asarray(points, dtype=np.float64)
        return p @ self.rotation.T + self.translation

    def apply_inverse(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=np.float64)
        return (p - self.translation) @ self.rotation

    def rotate(self, vectors) -> np.ndarray:
        return np.asarray(vectors, dtype=np.float64) @ self.rotation.T

    def inverse(self) -> "RigidTransform":
        Rt = self.rotation.T
        return RigidTransform(Rt, -Rt @ self.translation)

    def __matmul__(self, other: "RigidTransform") -> "RigidTransform":
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def as_matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.rotation
        T[:3, 3] = self.translation
        return T

    def to_json(self) -> dict:
        return {
            "rotation": [float(x) for x in self.rotation.reshape(-1)],
            "translation": [float(x) for x in self.translation],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "RigidTransform":
        rot = obj.get("rotation", np.eye(3).reshape(-1).tolist())
        if len(rot) != 9:
            raise GeometryError("pose.rotation must have 9 entries (row-major)")
        trans = obj.get("translation", [0.0, 0.0, 0.0])
        if len(trans) != 3:
            raise GeometryError("pose.translation must have 3 entries")
        return cls(np.asarray(rot, dtype=np.float64).reshape(3, 3), trans)


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    vertices: np.ndarray
    faces: np.ndarray
    dropped_faces: int = 0

    def __post_init__(self):
        V = np.array(self.vertices, dtype=np.float64).reshape(-1, 3)
        F = np.array(self.faces, dtype=np.int64).reshape(-1, 3)
        if len(F) == 0:
            raise GeometryError("empty mesh")
        if F.min() < 0 or F.max() >= len(V):
            raise GeometryError("face index out of range")
        V.flags.writeable = False
        F.flags.writeable = False
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "faces", F)

    @classmethod
    def from_arrays(cls, vertices, faces, area_tol: float = 0.0) -> "TriangleMesh":
        """Build a mesh, dropping zero-area faces and recording how many were dropped."""
        V = np.asarray(vertices, dtype=np.float64).reshape(-1, 3)
        F = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
        if len(F) == 0:
            raise GeometryError("empty mesh")
        if F.min() < 0 or F.max() >= len(V):
            raise GeometryError("face index out of range")
        tri = V[F]
        area2 = np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)
        keep = area2 > area_tol
        return cls(V, F[keep], dropped_faces=int((~keep).sum()))

    @property
    def triangles(self) -> np.ndarray:
        return self.vertices[self.faces]

    @functools.cached_property
    def face_normals(self) -> np.ndarray:
        tri = self.triangles
        n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        return n / np.linalg.norm(n, axis=1, keepdims=True)

    @functools.cached_property
    def face_areas(self) -> np.ndarray:
        tri = self.triangles
        return 0.5 * np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)

    @functools.cached_property
    def bounds(self) -> np.ndarray:
        used = self.vertices[np.unique(self.faces)]
        return np.stack([used.min(axis=0), used.max(axis=0)])

    @functools.cached_property
    def is_watertight(self) -> bool:
        """Every directed edge is matched by exactly one opposite edge."""
        F = self.faces
        directed = np.concatenate([F[:, [0, 1]], F[:, [1, 2]], F[:, [2, 0]]])
        und = np.sort(directed, axis=1)
        _, counts = np.unique(und, axis=0, return_counts=True)
        if not np.all(counts == 2):
            return False
        _, dcounts = np.unique(directed, axis=0, return_counts=True)
        return bool(np.all(dcounts == 1))

    @functools.cached_property
    def volume(self) -> float:
        """Enclosed volume by the signed-tetrahedron (divergence theorem) sum."""
        tri = self.triangles
        signed = np.einsum("ij,ij->i", tri[:, 0], np.cross(tri[:, 1], tri[:, 2])).sum() / 6.0
        return float(abs(signed))

    def transformed(self, pose: RigidTransform, scale: float = 1.0) -> "TriangleMesh":
        return TriangleMesh(pose.apply(self.vertices * scale), self.faces, self.dropped_faces)

    @functools.cached_property
    def _parity_index(self):
        return _ParityIndex(self.triangles)

    def contains(self, points) -> np.ndarray:
        """Inside test by +x ray parity, with jittered restarts near edges."""
        return points_inside_mesh(self, points)


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray
    normals: Optional[np.ndarray] = None
    instance_labels: Optional[np.ndarray] = None

    def __post_init__(self):
        P = np.array(self.points, dtype=np.float64).reshape(-1, 3)
        object.__setattr__(self, "points", P)
        if self.normals is not None:
            N = np.array(self.normals, dtype=np.float64).reshape(-1, 3)
            if len(N) != len(P):
                raise GeometryError("normal count does not match point count")
            object.__setattr__(self, "normals", N)
        if self.instance_labels is not None:
            L = np.array(self.instance_labels, dtype=np.int64).reshape(-1)
            if len(L) != len(P):
                raise GeometryError("label count does not match point count")
            if len(L) and L.min() < 0:
                raise GeometryError("instance ids must be non-negative")
            object.__setattr__(self, "instance_labels", L)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class OrientedBox:
    pose: RigidTransform
    half_extents: np.ndarray

    def __post_init__(self):
        h = as_vec3(self.half_extents).copy()
        if np.any(h <= 0):
            raise GeometryError("box half extents must be strictly positive")
        h.flags.writeable = False
        object.__setattr__(self, "half_extents", h)

    @classmethod
    def axis_aligned(cls, center, half_extents) -> "OrientedBox":
        return cls(RigidTransform(np.eye(3), center), half_extents)

    @property
    def center(self) -> np.ndarray:
        return self.pose.translation

    @property
    def volume(self) -> float:
        return float(8.0 * np.prod(self.half_extents))

    def transformed(self, pose: RigidTransform) -> "OrientedBox":
        return OrientedBox(pose @ self.pose, self.half_extents)

    def dilated(self, amount: float) -> "OrientedBox":
        return OrientedBox(self.pose, self.half_extents + amount)

    def corners(self) -> np.ndarray:
        signs = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)], float)
        return self.pose.apply(signs * self.half_extents)

    def contains(self, points, tol: float = 1e-12) -> np.ndarray:
        local = self.pose.apply_inverse(np.asarray(points, dtype=np.float64).reshape(-1, 3))
        return np.all(np.abs(local) <= self.half_extents + tol, axis=1)

    def aabb(self) -> np.ndarray:
        ext = np.abs(self.pose.rotation) @ self.half_extents
        return np.stack([self.center - ext, self.center + ext])

    def to_mesh(self) -> TriangleMesh:
        from .primitives import box_mesh

        return box_mesh(2.0 * self.half_extents).transformed(self.pose)


@dataclass(frozen=True, eq=False)
class SceneObject:
    mesh: TriangleMesh
    pose: RigidTransform = field(default_factory=RigidTransform)
    scale: float = 1.0
    instance_id: int = 0
    mesh_path: Optional[str] = None

    def __post_init__(self):
        if not self.scale > 0:
            raise GeometryError("object scale must be > 0")
        if self.instance_id < 0:
            raise GeometryError("instance ids must be non-negative")

    @functools.cached_property
    def local_mesh(self) -> TriangleMesh:
        """Mesh with scale applied, still in object coordinates."""
        if self.scale == 1.0:
            return self.mesh
        return TriangleMesh(self.mesh.vertices * self.scale, self.mesh.faces, self.mesh.dropped_faces)

    @functools.cached_property
    def world_mesh(self) -> TriangleMesh:
        return self.local_mesh.transformed(self.pose)

    @property
    def world_bounds(self) -> np.ndarray:
        return self.world_mesh.bounds

    def moved(self, pose: RigidTransform) -> "SceneObject":
        """Same object with ``pose`` applied on top of its current pose."""
        return SceneObject(self.mesh, pose @ self.pose, self.scale, self.instance_id, self.mesh_path)


@dataclass(frozen=True, eq=False)
class SceneDescription:
    objects: tuple = ()

    def __post_init__(self):
        objs = tuple(self.objects)
        ids = [o.instance_id for o in objs]
        if len(set(ids)) != len(ids):
            raise GeometryError("instance ids must be unique within a scene")
        object.__setattr__(self, "objects", objs)

    def __len__(self) -> int:
        return len(self.objects)

    def get(self, instance_id: int) -> SceneObject:
        for o in self.objects:
            if o.instance_id == instance_id:
                return o
        raise KeyError(f"instance {instance_id} not in scene")

    @property
    def instance_ids(self) -> list:
        return [o.instance_id for o in self.objects]

    @functools.cached_property
    def _world_triangles(self):
        if not self.objects:
            return np.zeros((0, 3, 3)), np.zeros(0, np.int64), np.zeros(0, np.int64)
        tris = [o.world_mesh.triangles for o in self.objects]
        owner = np.concatenate([np.full(len(t), i) for i, t in enumerate(tris)])
        local = np.concatenate([np.arange(len(t)) for t in tris])
        return np.concatenate(tris), owner, local

    def transformed(self, pose: RigidTransform) -> "SceneDescription":
        return SceneDescription(tuple(o.moved(pose) for o in self.objects))


class Hit(NamedTuple):
    distance: float
    instance_id: int
    face_index: int
    normal: np.ndarray


class OverlapResult(NamedTuple):
    overlap_volume: float
    iou: float
    volume_reliable: bool


# --------------------------------------------------------------------------
# ray casting


def ray_triangle_distances(triangles: np.ndarray, origins, directions, max_dist=np.inf):
    """Möller-Trumbore for R rays against F triangles.

    Returns ``(t, face)`` of shape (R,): the nearest hit distance (``inf`` on a
    miss) and its face index (-1 on a miss). Equal distances resolve to the
    lowest face index.
    """
    O = np.asarray(origins, dtype=np.float64).reshape(-1, 3)
    D = np.asarray(directions, dtype=np.float64).reshape(-1, 3)
    if D.shape[0] == 1 and O.shape[0] > 1:
        D = np.broadcast_to(D, O.shape)
    R = O.shape[0]
    best_t = np.full(R, np.inf)
    best_f = np.full(R, -1, dtype=np.int64)
    F = len(triangles)
    if F == 0 or R == 0:
        return best_t, best_f
    v0 = triangles[:, 0]
    e1 = triangles[:, 1] - v0
    e2 = triangles[:, 2] - v0
    step = max(1, _BLOCK // F)
    for s in range(0, R, step):
        o = O[s:s + step, None, :]
        d = D[s:s + step, None, :]
        p = np.cross(d, e2[None])
        det = np.einsum("rfk,fk->rf", p, e1)
        parallel = np.abs(det) < 1e-300
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / det
            tvec = o - v0[None]
            u = np.einsum("rfk,rfk->rf", tvec, p) * inv
            q = np.cross(tvec, e1[None])
            v = np.einsum("rfk,rfk->rf", np.broadcast_to(d, q.shape), q) * inv
            t = np.einsum("rfk,fk->rf", q, e2) * inv
            ok = (~parallel) & (u >= -BARY_EPS) & (v >= -BARY_EPS) & (u + v <= 1.0 + BARY_EPS)
            ok &= (t >= 0.0) & (t <= max_dist)
        t = np.where(ok, t, np.inf)
        f = np.argmin(t, axis=1)
        tb = t[np.arange(len(f)), f]
        best_t[s:s + step] = tb
        best_f[s:s + step] = np.where(np.isfinite(tb), f, -1)
    return best_t, best_f


def ray_cast(scene: SceneDescription, origin, direction, max_dist: float) -> Optional[Hit]:
    """Nearest intersection of a ray with any scene mesh, or None."""
    if not max_dist > 0:
        raise GeometryError("max_dist must be > 0")
    d = check_unit(direction)
    tris, owner, local = scene._world_triangles
    t, f = ray_triangle_distances(tris, as_vec3(origin), d, max_dist)
    if f[0] < 0:
        return None
    g = int(f[0])
    obj = scene.objects[int(owner[g])]
    face = int(local[g])
    return Hit(float(t[0]), obj.instance_id, face, obj.world_mesh.face_normals[face].copy())


def ray_cast_many(scene: SceneDescription, origins, directions, max_dist: float):
    """Batched variant of :func:`ray_cast`; returns distances (inf on miss) and instance ids (-1)."""
    tris, owner, _ = scene._world_triangles
    t, f = ray_triangle_distances(tris, origins, directions, max_dist)
    ids = np.array([o.instance_id for o in scene.objects], dtype=np.int64)
    inst = np.where(f >= 0, ids[owner[np.maximum(f, 0)]] if len(ids) else -1, -1)
    return t, inst


# --------------------------------------------------------------------------
# inside test


class _ParityIndex:
    """Triangles binned on a yz grid for +x ray-parity queries.

    Each usable triangle stores the affine forms of its yz-projected
    barycentrics and of the x coordinate where a +x ray meets its plane.
    """

    def __init__(self, tri: np.ndarray):
        y, z = tri[:, :, 1], tri[:, :, 2]
        area = (y[:, 1] - y[:, 0]) * (z[:, 2] - z[:, 0]) - (y[:, 2] - y[:, 0]) * (z[:, 1] - z[:, 0])
        scale = np.maximum(np.abs(tri[:, :, 1:]).max(axis=(1, 2)), 1e-300)
        usable = np.abs(area) > 1e-14 * scale * scale
        tri, area = tri[usable], area[usable]
        y0, z0 = tri[:, 0, 1], tri[:, 0, 2]
        y1, z1 = tri[:, 1, 1], tri[:, 1, 2]
        y2, z2 = tri[:, 2, 1], tri[:, 2, 2]
        # w1 = a1*y + b1*z + c1, w2 = a2*y + b2*z + c2
        self.a1, self.b1 = (z2 - z0) / area, -(y2 - y0) / area
        self.c1 = -(self.a1 * y0 + self.b1 * z0)
        self.a2, self.b2 = -(z1 - z0) / area, (y1 - y0) / area
        self.c2 = -(self.a2 * y0 + self.b2 * z0)
        self.x0 = tri[:, 0, 0]
        self.dx1 = tri[:, 1, 0] - self.x0
        self.dx2 = tri[:, 2, 0] - self.x0

        F = len(tri)
        self.n_tri = F
        if F == 0:
            return
        lo = tri[:, :, 1:].min(axis=1)
        hi = tri[:, :, 1:].max(axis=1)
        self.origin = lo.min(axis=0)
        span = np.maximum(hi.max(axis=0) - self.origin, 1e-12)
        self.G = int(np.clip(np.sqrt(F), 1, 128))
        self.cell = span / self.G
        c_lo = self._cells(lo)
        c_hi = self._cells(hi)
        ny = c_hi[:, 0] - c_lo[:, 0] + 1
        nz = c_hi[:, 1] - c_lo[:, 1] + 1
        cnt = ny * nz
        tri_id = np.repeat(np.arange(F), cnt)
        k = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        cy = np.repeat(c_lo[:, 0], cnt) + k // np.repeat(nz, cnt)
        cz = np.repeat(c_lo[:, 1], cnt) + k % np.repeat(nz, cnt)
        cell_id = cy * self.G + cz
        order = np.argsort(cell_id, kind="stable")
        self.cell_tris = tri_id[order]
        self.cell_start = np.searchsorted(cell_id[order], np.arange(self.G * self.G + 1))

    def _cells(self, yz):
        return np.clip(np.floor((yz - self.origin) / self.cell).astype(np.int64), 0, self.G - 1)

    def crossings(self, P: np.ndarray):
        """Crossing counts along +x and a flag for crossings that land on an edge."""
        n = len(P)
        counts = np.zeros(n, dtype=np.int64)
        degenerate = np.zeros(n, dtype=bool)
        if self.n_tri == 0 or n == 0:
            return counts, degenerate
        yz = P[:, 1:]
        inside_grid = np.all((yz >= self.origin) & (yz <= self.origin + self.cell * self.G), axis=1)
        c = self._cells(yz)
        cid = c[:, 0] * self.G + c[:, 1]
        start = self.cell_start[cid]
        length = np.where(inside_grid, self.cell_start[cid + 1] - start, 0)
        total = int(length.sum())
        if total == 0:
            return counts, degenerate
        pt = np.repeat(np.arange(n), length)
        pos = np.arange(total) - np.repeat(np.cumsum(length) - length, length) + np.repeat(start, length)
        t = self.cell_tris[pos]
        y, z = yz[pt, 0], yz[pt, 1]
        w1 = self.a1[t] * y + self.b1[t] * z + self.c1[t]
        w2 = self.a2[t] * y + self.b2[t] * z + self.c2[t]
        wmin = np.minimum(np.minimum(1.0 - w1 - w2, w1), w2)
        ahead = self.x0[t] + w1 * self.dx1[t] + w2 * self.dx2[t] > P[pt, 0]
        counts = np.bincount(pt[(wmin >= 0.0) & ahead], minlength=n)
        degenerate = np.bincount(pt[(np.abs(wmin) <= EDGE_EPS) & ahead], minlength=n) > 0
        return counts, degenerate


# fixed, irrational-looking restart rotations
_JITTER = [
    rotation_from_axis_angle([0.267, 0.535, 0.802], 0.6180339887),
    rotation_from_axis_angle([0.832, -0.277, 0.480], 1.4142135623),
    rotation_from_axis_angle([-0.408, 0.816, 0.408], 2.2360679775),
]


def points_inside_mesh(mesh: TriangleMesh, points) -> np.ndarray:
    """Boolean inside mask for points given in the mesh frame."""
    P = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    result = np.zeros(len(P), dtype=bool)
    lo, hi = mesh.bounds
    cand = np.flatnonzero(np.all((P >= lo) & (P <= hi), axis=1))
    if len(cand) == 0:
        return result
    counts, degenerate = mesh._parity_index.crossings(P[cand])
    result[cand] = counts % 2 == 1
    pending = cand[degenerate]
    for R in _JITTER:
        if len(pending) == 0:
            break
        counts, degenerate = _ParityIndex(mesh.triangles @ R.T).crossings(P[pending] @ R.T)
        result[pending] = counts % 2 == 1
        pending = pending[degenerate]
    return result


# --------------------------------------------------------------------------
# box queries


def points_in_box(box: OrientedBox, cloud) -> np.ndarray:
    """Indices of points inside the box, boundary inclusive."""
    P = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=np.float64)
    return np.flatnonzero(box.contains(P.reshape(-1, 3)))


def triangles_intersect_box(triangles: np.ndarray, half_extents) -> np.ndarray:
    """Separating-axis test of triangles (in the box frame) against a centred box.

    Touching counts as intersecting.
    """
    h = as_vec3(half_extents)
    v = np.asarray(triangles, dtype=np.float64)
    sep = np.any(v.min(axis=1) > h, axis=1) | np.any(v.max(axis=1) < -h, axis=1)
    keep = np.flatnonzero(~sep)
    out = np.zeros(len(v), dtype=bool)
    if len(keep) == 0:
        return out
    v = v[keep]
    x, y, z = v[:, :, 0], v[:, :, 1], v[:, :, 2]  # (F, 3) each
    e = np.roll(v, -1, axis=1) - v  # edges v1-v0, v2-v1, v0-v2
    ex, ey, ez = e[:, :, 0], e[:, :, 1], e[:, :, 2]
    n = np.cross(e[:, 0], e[:, 1])
    sep = np.abs(np.einsum("ij,ij->i", n, v[:, 0])) > np.abs(n) @ h
    # axes u_k x e_j, projected onto all three vertices at once
    for ay, az, ry, rz, py, pz in (
        (-ez, ey, h[1], h[2], y, z),   # x-axis cross edge: (0, -ez, ey)
        (ez, -ex, h[0], h[2], x, z),   # y-axis cross edge: (ez, 0, -ex)
        (-ey, ex, h[0], h[1], x, y),   # z-axis cross edge: (-ey, ex, 0)
    ):
        for j in range(3):
            p = py * ay[:, j:j + 1] + pz * az[:, j:j + 1]
            r = np.abs(ay[:, j]) * ry + np.abs(az[:, j]) * rz
            sep |= (p.min(axis=1) > r) | (p.max(axis=1) < -r)
    out[keep] = ~sep
    return out


@functools.lru_cache(maxsize=64)
def _unit_samples(n: int, seed: int) -> np.ndarray:
    s = qmc.Halton(d=3, scramble=True, seed=np.random.default_rng(seed)).random(n)
    s.flags.writeable = False
    return s


def box_samples(box: OrientedBox, n: int, seed: int) -> np.ndarray:
    """Deterministic scrambled-Halton samples inside the box, in the parent frame."""
    u = _unit_samples(int(n), int(seed) & 0xFFFFFFFFFFFFFFFF)
    return box.pose.apply((2.0 * u - 1.0) * box.half_extents)


def box_mesh_overlap(box: OrientedBox, mesh: TriangleMesh, mesh_pose: RigidTransform = None,
                     n_samples: int = 1024, seed: int = 0) -> OverlapResult:
    """Overlap volume and IOU of a box with a mesh.

    The overlap is a quasi Monte-Carlo estimate; disjoint configurations are
    detected exactly by a separating-axis test and report zero directly.
    ``volume_reliable`` is False when the mesh is not watertight.
    """
    if n_samples < 1000:
        raise GeometryError("n_samples must be >= 1000")
    mesh_pose = mesh_pose or RigidTransform()
    reliable = mesh.is_watertight
    vbox = box.volume
    vmesh = mesh.volume
    local_box = box.transformed(mesh_pose.inverse())

    lo, hi = local_box.aabb()
    mlo, mhi = mesh.bounds
    if np.any(lo > mhi) or np.any(hi < mlo):
        return OverlapResult(0.0, 0.0, reliable)

    tri_box = local_box.pose.apply_inverse(mesh.triangles.reshape(-1, 3)).reshape(-1, 3, 3)
    if not np.any(triangles_intersect_box(tri_box, local_box.half_extents)):
        if points_inside_mesh(mesh, local_box.center[None])[0]:
            overlap = vbox
        else:
            return OverlapResult(0.0, 0.0, reliable)
    else:
        samples = box_samples(local_box, n_samples, seed)
        overlap = vbox * np.count_nonzero(points_inside_mesh(mesh, samples)) / n_samples
    union = vbox + vmesh - overlap
    iou = overlap / union if union > 0 else 0.0
    return OverlapResult(float(overlap), float(min(max(iou, 0.0), 1.0)), reliable)


def mesh_mesh_overlap(a: TriangleMesh, b: TriangleMesh, n_samples: int = 1024, seed: int = 0) -> float:
    """Quasi Monte-Carlo overlap volume of two meshes given in the same frame.

    Samples fill the intersection of their bounding boxes.
    """
    lo = np.maximum(a.bounds[0], b.bounds[0])
    hi = np.minimum(a.bounds[1], b.bounds[1])
    if np.any(hi <= lo):
        return 0.0
    region = OrientedBox.axis_aligned(0.5 * (lo + hi), 0.5 * (hi - lo))
    s = box_samples(region, n_samples, seed)
    inside = points_inside_mesh(a, s)
    if not inside.any():
        return 0.0
    inside[inside] = points_inside_mesh(b, s[inside])
    return float(region.volume * np.count_nonzero(inside) / n_samples)


def surface_samples(mesh: TriangleMesh, n: int, rng: np.random.Generator):
    """Area-weighted uniform samples on the mesh surface with their face normals."""
    areas = mesh.face_areas
    faces = rng.choice(len(areas), size=n, p=areas / areas.sum())
    r1 = np.sqrt(rng.random(n))
    r2 = rng.random(n)
    tri = mesh.triangles[faces]
    pts = (1 - r1)[:, None] * tri[:, 0] + (r1 * (1 - r2))[:, None] * tri[:, 1] + (r1 * r2)[:, None] * tri[:, 2]
    return pts, mesh.face_normals[faces], faces


def scene_cloud(scene: SceneDescription, points_per_object: int, seed: int) -> PointCloud:
    """Labelled surface point cloud of every object in the scene."""
    rng = np.random.default_rng(seed)
    pts, nrm, lab = [], [], []
    for obj in scene.objects:
        p, n, _ = surface_samples(obj.world_mesh, points_per_object, rng)
        pts.append(p)
        nrm.append(n)
        lab.append(np.full(len(p), obj.instance_id))
    if not pts:
        return PointCloud(np.zeros((0, 3)), np.zeros((0, 3)), np.zeros(0, np.int64))
    return PointCloud(np.concatenate(pts), np.concatenate(nrm), np.concatenate(lab))
