"""Approach-based grasp candidate sampling.

Per object: farthest point sampling of surface points, normal estimation,
cone of approach directions around each inward normal, retreat-corridor ray
check, then an in-plane angle x standoff grid gated by box/mesh overlap.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np
from scipy.spatial import cKDTree

from .codec import compose_grasp_pose, frame_from_approach
from .geometry import (
    GeometryError,
    PointCloud,
    RigidTransform,
    SceneDescription,
    SceneObject,
    as_unit,
    as_vec3,
    box_mesh_overlap,
    ray_cast_many,
    surface_samples,
)
from .gripper import GripperModel

log = logging.getLogger(__name__)


class SamplerError(ValueError):
    pass


def _default_inplane():
    return tuple(float(x) for x in np.pi * np.arange(12) / 12)


@dataclass(frozen=True)
class SamplerParams:
    num_fps_points: int = 50
    normal_k: int = 16
    alpha_levels: tuple = (0.0, np.pi / 6, np.pi / 3)
    azimuth_steps: int = 6
    inplane_angles: tuple = field(default_factory=_default_inplane)
    standoffs: tuple = (0.01, 0.02, 0.03, 0.04)
    iou_pass_threshold: float = 0.05
    body_clearance_epsilon: float = 1e-8
    approach_ray_margin: float = 0.05
    surface_points: int = 2048
    overlap_samples: int = 1024

    def __post_init__(self):
        object.__setattr__(self, "alpha_levels", tuple(float(a) for a in self.alpha_levels))
        object.__setattr__(self, "inplane_angles", tuple(float(a) for a in self.inplane_angles))
        object.__setattr__(self, "standoffs", tuple(float(d) for d in self.standoffs))
        if self.num_fps_points < 1:
            raise SamplerError("num_fps_points must be >= 1")
        if self.normal_k < 3:
            raise SamplerError("normal_k must be >= 3")
        if not all(0.0 <= a < np.pi / 2 for a in self.alpha_levels) or not self.alpha_levels:
            raise SamplerError("alpha_levels must be non-empty and lie in [0, pi/2)")
        if self.azimuth_steps < 1:
            raise SamplerError("azimuth_steps must be >= 1")
        if not self.inplane_angles:
            raise SamplerError("need at least one in-plane angle")
        if not self.standoffs or min(self.standoffs) < 0:
            raise SamplerError("standoffs must be non-empty and >= 0")
        if not 0.0 <= self.iou_pass_threshold <= 1.0:
            raise SamplerError("iou_pass_threshold must be in [0, 1]")
        if self.body_clearance_epsilon < 0 or self.approach_ray_margin < 0:
            raise SamplerError("body_clearance_epsilon and approach_ray_margin must be >= 0")
        if self.overlap_samples < 1000:
            raise SamplerError("overlap_samples must be >= 1000")
        if self.surface_points < self.normal_k:
            raise SamplerError("surface_points must be >= normal_k")


@dataclass(frozen=True, eq=False)
class GraspCandidate:
    center: np.ndarray
    approach: np.ndarray
    inplane_angle: float
    depth: float
    pose: RigidTransform
    collision_score: float
    instance_id: int
    sim_score: Optional[int] = None

    def with_sim(self, score: int) -> "GraspCandidate":
        return replace(self, sim_score=int(score))

    def to_json(self) -> dict:
        return {
            "instance_id": int(self.instance_id),
            "center": [float(x) for x in self.center],
            "approach": [float(x) for x in self.approach],
            "a": float(self.inplane_angle),
            "d": float(self.depth),
            "pose": self.pose.to_json(),
            "collision": float(self.collision_score),
            "sim": self.sim_score,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GraspCandidate":
        sim = obj.get("sim")
        return cls(
            center=as_vec3(obj["center"]),
            approach=as_vec3(obj["approach"]),
            inplane_angle=float(obj["a"]),
            depth=float(obj["d"]),
            pose=RigidTransform.from_json(obj["pose"]),
            collision_score=float(obj["collision"]),
            instance_id=int(obj["instance_id"]),
            sim_score=None if sim is None else int(sim),
        )


class GateResult(NamedTuple):
    passed: bool
    collision_score: float


# --------------------------------------------------------------------------


def farthest_point_sample(points, m: int, start_index: int = 0) -> np.ndarray:
    """Greedy max-min selection; ties go to the lowest index."""
    P = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    n = len(P)
    if m > n:
        raise SamplerError(f"cannot pick {m} points from {n}")
    if not 0 <= start_index < n:
        raise SamplerError("start_index out of range")
    chosen = np.empty(m, dtype=np.int64)
    if m == 0:
        return chosen
    chosen[0] = start_index
    dist = np.sum((P - P[start_index]) ** 2, axis=1)
    for i in range(1, m):
        nxt = int(np.argmax(dist))
        chosen[i] = nxt
        dist = np.minimum(dist, np.sum((P - P[nxt]) ** 2, axis=1))
    return chosen


def _pca_normals(points: np.ndarray, k: int, query: Optional[np.ndarray] = None) -> np.ndarray:
    tree = cKDTree(points)
    q = points if query is None else points[query]
    _, nn = tree.query(q, k=k)
    nbr = points[nn]
    nbr = nbr - nbr.mean(axis=1, keepdims=True)
    cov = np.einsum("nki,nkj->nij", nbr, nbr)
    _, vecs = np.linalg.eigh(cov)
    n = vecs[:, :, 0]
    return n / np.linalg.norm(n, axis=1, keepdims=True)


def estimate_normals(cloud: PointCloud, k: int, viewpoint) -> PointCloud:
    """Smallest-eigenvector normals of the k-NN covariance, flipped toward ``viewpoint``."""
    if k < 3:
        raise SamplerError("k must be >= 3")
    if len(cloud) < k:
        raise SamplerError(f"cloud has {len(cloud)} points, fewer than k={k}")
    n = _pca_normals(cloud.points, k)
    flip = np.einsum("ij,ij->i", n, as_vec3(viewpoint) - cloud.points) < 0
    n[flip] *= -1
    return PointCloud(cloud.points, n, cloud.instance_labels)


def cone_directions(normal, params: SamplerParams) -> np.ndarray:
    """Approach directions around the inward normal, one ring per cone angle."""
    base = -as_unit(normal)
    F = frame_from_approach(base)
    u, w = F[:, 0], F[:, 1]
    out = []
    for alpha in params.alpha_levels:
        if alpha == 0.0:
            out.append(base)
            continue
        theta = 2 * np.pi * np.arange(params.azimuth_steps) / params.azimuth_steps
        ring = np.cos(alpha) * base + np.sin(alpha) * (np.cos(theta)[:, None] * u + np.sin(theta)[:, None] * w)
        out.extend(ring / np.linalg.norm(ring, axis=1, keepdims=True))
    return np.array(out).reshape(-1, 3)


def approach_clear(scene: SceneDescription, center, approach, gripper: GripperModel,
                   standoff: float, margin: float = 0.05) -> bool:
    """Retreat-corridor check with a 3x3 ray grid over the base footprint.

    Rays start at ``center - approach * L`` (``L = standoff + margin``) and
    travel ``L`` along ``-approach``; any hit blocks the approach.
    """
    if standoff < 0:
        raise SamplerError("standoff must be >= 0")
    length = standoff + margin
    if length <= 0:
        return True
    z = as_unit(approach)
    F = frame_from_approach(z)
    h = gripper.footprint_half
    s = np.array([-h, 0.0, h])
    gx, gy = np.meshgrid(s, s, indexing="ij")
    origins = as_vec3(center) - z * length + gx.reshape(-1, 1) * F[:, 0] + gy.reshape(-1, 1) * F[:, 1]
    t, _ = ray_cast_many(scene, origins, -z, length)
    return not np.any(np.isfinite(t))


def overlap_gate(pose: RigidTransform, target: SceneObject, scene: SceneDescription,
                 gripper: GripperModel, params: SamplerParams, seed: int = 0) -> GateResult:
    """Closing-region IOU against the target plus body-box clearance against every mesh."""
    bodies, closing = gripper.posed(pose)
    res = box_mesh_overlap(closing, target.local_mesh, target.pose, params.overlap_samples, seed)
    score = min(max(res.iou, 0.0), 1.0)
    if score < params.iou_pass_threshold:
        return GateResult(False, score)
    for obj in scene.objects:
        lo, hi = obj.world_bounds
        for box in bodies:
            blo, bhi = box.aabb()
            if np.any(blo > hi) or np.any(bhi < lo):
                continue
            r = box_mesh_overlap(box, obj.local_mesh, obj.pose, params.overlap_samples, seed)
            if r.overlap_volume > params.body_clearance_epsilon:
                return GateResult(False, score)
    return GateResult(True, score)


# --------------------------------------------------------------------------


def sample_centers(target: SceneObject, params: SamplerParams, seed: int):
    """FPS centers on the target surface and their outward normals."""
    rng = np.random.default_rng(seed)
    mesh = target.world_mesh
    pts, face_n, _ = surface_samples(mesh, params.surface_points, rng)
    m = min(params.num_fps_points, len(pts))
    idx = farthest_point_sample(pts, m, 0)
    normals = _pca_normals(pts, params.normal_k, idx)
    # PCA sign is arbitrary; orient outward using the sampled face
    flip = np.einsum("ij,ij->i", normals, face_n[idx]) < 0
    normals[flip] *= -1
    return pts[idx], normals


def _candidates_for_centers(args):
    scene, target_id, gripper, params, seed, centers, normals = args
    target = scene.get(target_id)
    reach = max(params.standoffs)
    out = []
    for c, n in zip(centers, normals):
        for v in cone_directions(n, params):
            if not approach_clear(scene, c, v, gripper, reach, params.approach_ray_margin):
                continue
            for a in params.inplane_angles:
                for d in params.standoffs:
                    pose = compose_grasp_pose(c, v, a, d)
                    gate = overlap_gate(pose, target, scene, gripper, params, seed)
                    if gate.passed:
                        out.append(GraspCandidate(c.copy(), v.copy(), a, d, pose, gate.collision_score, target_id))
    return out


def generate_candidates(scene: SceneDescription, target_id: int, gripper: GripperModel,
                        params: SamplerParams, seed: int, workers: int = 1) -> list:
    """Collision-gated candidates for one object, ordered by (center, direction, a, d)."""
    try:
        target = scene.get(target_id)
    except KeyError:
        raise SamplerError(f"target id {target_id} not found in scene") from None
    centers, normals = sample_centers(target, params, seed)
    if workers <= 1 or len(centers) < 2:
        return _candidates_for_centers((scene, target_id, gripper, params, seed, centers, normals))
    chunks = np.array_split(np.arange(len(centers)), min(workers, len(centers)))
    jobs = [(scene, target_id, gripper, params, seed, centers[c], normals[c]) for c in chunks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_candidates_for_centers, jobs))
    return [c for part in parts for c in part]
