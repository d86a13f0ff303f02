"""Quasi-static grasp evaluation.

A deterministic stand-in for rigid-body simulation: a grasp scores 1 when
both fingers find front-facing contacts, the contact normals sit inside the
friction cone of the closing axis, and lifting the object straight up with
the gripper does not push through any neighbouring object.

Other evaluators (e.g. a physics engine bridge) plug in through
:func:`register_evaluator`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Protocol

import numpy as np

from .geometry import (
    GeometryError,
    RigidTransform,
    SceneDescription,
    SceneObject,
    box_mesh_overlap,
    mesh_mesh_overlap,
    ray_triangle_distances,
)
from .gripper import GripperModel

UP = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class EvalParams:
    friction_mu: float = 0.6
    lift_height: float = 0.10
    sweep_steps: int = 10
    contact_tolerance: float = 1e-4
    fan_rays: int = 5
    body_clearance_epsilon: float = 1e-8
    overlap_samples: int = 1024
    seed: int = 0

    def __post_init__(self):
        if not self.friction_mu > 0:
            raise GeometryError("friction_mu must be > 0")
        if self.sweep_steps < 2:
            raise GeometryError("sweep_steps must be >= 2")
        if not self.lift_height > 0:
            raise GeometryError("lift_height must be > 0")
        if self.contact_tolerance < 0:
            raise GeometryError("contact_tolerance must be >= 0")
        if self.fan_rays < 1:
            raise GeometryError("fan_rays must be >= 1")
        if self.overlap_samples < 1000:
            raise GeometryError("overlap_samples must be >= 1000")


class Contacts(NamedTuple):
    contact_a: np.ndarray
    contact_b: np.ndarray
    normal_a: np.ndarray
    normal_b: np.ndarray
    width: float


def _finger_contact(tris, normals, origins, direction, max_dist, tol):
    t, f = ray_triangle_distances(tris, origins, direction, max_dist + tol)
    hit = f >= 0
    # a ray whose first hit is back-facing started inside the object
    front = np.zeros_like(hit)
    front[hit] = normals[f[hit]] @ direction < 0
    if not front.any():
        return None
    t = np.where(front, t, np.inf)
    i = int(np.argmin(t))
    return origins[i] + direction * t[i], normals[f[i]].copy(), t[i] - tol


def close_fingers(pose: RigidTransform, target: SceneObject, gripper: GripperModel,
                  contact_tolerance: float = 1e-4, fan_rays: int = 5) -> Optional[Contacts]:
    """First contacts of both fingers closing through the closing region.

    Finger a sits on +closing axis and closes along -closing axis, finger b
    the reverse. Each finger casts an ``fan_rays`` x ``fan_rays`` grid from
    its inner face. Returns None unless both fingers touch a front face of
    the target within ``max_opening``.
    """
    mesh = target.world_mesh
    cr = gripper.closing_region
    half = cr.half_extents
    c = cr.center
    s = (2.0 * (np.arange(fan_rays) + 0.5) / fan_rays - 1.0)
    gy, gz = np.meshgrid(c[1] + s * half[1], c[2] + s * half[2], indexing="ij")
    gy, gz = gy.reshape(-1), gz.reshape(-1)
    axis = pose.rotate(gripper.closing_axis)
    sides = []
    for sign in (1.0, -1.0):
        x = c[0] + sign * (half[0] + contact_tolerance)
        local = np.column_stack([np.full_like(gy, x), gy, gz])
        origins = pose.apply(local)
        hit = _finger_contact(mesh.triangles, mesh.face_normals, origins, -sign * axis,
                              gripper.max_opening, contact_tolerance)
        if hit is None:
            return None
        sides.append(hit)
    (pa, na, _), (pb, nb, _) = sides
    width = float((pa - pb) @ axis)
    if width < -contact_tolerance:
        return None
    return Contacts(pa, pb, na, nb, max(width, 0.0))


def _angle(u, v) -> float:
    return float(np.arctan2(np.linalg.norm(np.cross(u, v)), u @ v))


def antipodal_check(contacts: Contacts, closing_axis, mu: float) -> bool:
    """Both outward contact normals within the friction cone of the closing line."""
    if contacts is None:
        return False
    axis = np.asarray(closing_axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    cone = np.arctan(mu)
    return _angle(contacts.normal_a, axis) <= cone + 1e-12 and _angle(contacts.normal_b, -axis) <= cone + 1e-12


def lift_sweep_check(pose: RigidTransform, target: SceneObject, scene: SceneDescription,
                     gripper: GripperModel, lift_height: float, sweep_steps: int,
                     clearance_epsilon: float = 1e-8, n_samples: int = 1024, seed: int = 0) -> bool:
    """Lift target and gripper body along world +z; fail on any overlap with other objects."""
    if not lift_height > 0:
        raise GeometryError("lift_height must be > 0")
    others = [o for o in scene.objects if o.instance_id != target.instance_id]
    if not others:
        return True
    bodies, _ = gripper.posed(pose)
    for i in range(1, sweep_steps + 1):
        shift = RigidTransform(np.eye(3), UP * (lift_height * i / sweep_steps))
        lifted = target.moved(shift).world_mesh
        lifted_bodies = [b.transformed(shift) for b in bodies]
        for obj in others:
            lo, hi = obj.world_bounds
            for box in lifted_bodies:
                blo, bhi = box.aabb()
                if np.any(blo > hi) or np.any(bhi < lo):
                    continue
                r = box_mesh_overlap(box, obj.local_mesh, obj.pose, n_samples, seed)
                if r.overlap_volume > clearance_epsilon:
                    return False
            if mesh_mesh_overlap(lifted, obj.world_mesh, n_samples, seed) > clearance_epsilon:
                return False
    return True


class CheckReport(NamedTuple):
    contacts: Optional[Contacts]
    antipodal: bool
    lift: bool
    score: int


def explain_grasp(candidate, target: SceneObject, scene: SceneDescription, params: EvalParams,
                  gripper: GripperModel) -> CheckReport:
    """All three sub-checks with short-circuiting disabled."""
    contacts = close_fingers(candidate.pose, target, gripper, params.contact_tolerance, params.fan_rays)
    axis = candidate.pose.rotate(gripper.closing_axis)
    anti = antipodal_check(contacts, axis, params.friction_mu) if contacts is not None else False
    lift = lift_sweep_check(candidate.pose, target, scene, gripper, params.lift_height, params.sweep_steps,
                            params.body_clearance_epsilon, params.overlap_samples, params.seed)
    return CheckReport(contacts, anti, lift, int(contacts is not None and anti and lift))


def evaluate_grasp(candidate, target: SceneObject, scene: SceneDescription, params: EvalParams,
                   gripper: GripperModel) -> int:
    """1 iff fingers close on the target, the contacts are antipodal and the lift is clear."""
    contacts = close_fingers(candidate.pose, target, gripper, params.contact_tolerance, params.fan_rays)
    if contacts is None:
        return 0
    if not antipodal_check(contacts, candidate.pose.rotate(gripper.closing_axis), params.friction_mu):
        return 0
    ok = lift_sweep_check(candidate.pose, target, scene, gripper, params.lift_height, params.sweep_steps,
                          params.body_clearance_epsilon, params.overlap_samples, params.seed)
    return int(ok)


class GraspEvaluator(Protocol):
    def __call__(self, candidate, target: SceneObject, scene: SceneDescription,
                 params: EvalParams, gripper: GripperModel) -> int: ...


_EVALUATORS: dict = {"quasi-static": evaluate_grasp}


def register_evaluator(name: str, fn: Callable) -> None:
    _EVALUATORS[name] = fn


def get_evaluator(name: str) -> GraspEvaluator:
    try:
        return _EVALUATORS[name]
    except KeyError:
        raise KeyError(f"unknown evaluator {name!r}; known: {sorted(_EVALUATORS)}") from None
