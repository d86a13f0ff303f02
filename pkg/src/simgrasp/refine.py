"""Grasp refinement: instance assignment from per-point labels, point-cloud
collision filtering, pose NMS, top-percent selection and AP.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .geometry import GeometryError, PointCloud, RigidTransform, TriangleMesh, points_in_box
from .gripper import GripperModel


class RefineError(ValueError):
    pass


@dataclass(frozen=True)
class RefineParams:
    nms_translation: float = 0.02
    nms_angle: float = math.pi / 6
    top_percent: float = 10.0
    collision_dilation: float = 0.005

    def __post_init__(self):
        if not (self.nms_translation > 0 and self.nms_angle > 0):
            raise RefineError("NMS thresholds must be > 0")
        if not 0 < self.top_percent <= 100:
            raise RefineError("top_percent must be in (0, 100]")
        if self.collision_dilation < 0:
            raise RefineError("collision_dilation must be >= 0")


@dataclass(frozen=True, eq=False)
class RefinedGrasp:
    pose: RigidTransform
    confidence: float
    instance_id: Optional[int] = None
    source: int = 0

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise RefineError(f"confidence {self.confidence} outside [0, 1]")

    @property
    def approach(self) -> np.ndarray:
        return self.pose.rotation[:, 2]

    def to_json(self) -> dict:
        return {"pose": self.pose.to_json(), "confidence": float(self.confidence),
                "instance_id": self.instance_id, "source": int(self.source)}


def grasp_from_json(obj: dict, source: int) -> RefinedGrasp:
    """Accepts refined-grasp lines or evaluated candidate lines.

    Candidate lines carry no confidence; they get ``sim * collision``.
    """
    if "confidence" in obj:
        conf = float(obj["confidence"])
    elif "sim" in obj and "collision" in obj:
        conf = float(obj["sim"] or 0) * float(obj["collision"])
    else:
        raise RefineError("grasp line needs 'confidence'")
    return RefinedGrasp(RigidTransform.from_json(obj["pose"]), conf, obj.get("instance_id"),
                        int(obj.get("source", source)))


def read_grasps(path) -> list:
    out = []
    for n, line in enumerate(Path(path).read_text().splitlines()):
        if line.strip():
            out.append(grasp_from_json(json.loads(line), n))
    return out


def write_grasps(grasps, path) -> None:
    Path(path).write_text("".join(json.dumps(g.to_json()) + "\n" for g in grasps))


# --------------------------------------------------------------------------


def assign_instances(grasps, cloud: PointCloud, gripper: GripperModel) -> list:
    """Majority instance label inside each closing region; empty regions are dropped.

    Ties go to the lower id.
    """
    if cloud.instance_labels is None:
        raise RefineError("cloud has no instance labels")
    out = []
    for g in grasps:
        idx = points_in_box(gripper.closing_region.transformed(g.pose), cloud)
        if len(idx) == 0:
            continue
        labels, counts = np.unique(cloud.instance_labels[idx], return_counts=True)
        out.append(replace(g, instance_id=int(labels[np.argmax(counts)])))
    return out


def collision_filter(grasp: RefinedGrasp, cloud: PointCloud, gripper: GripperModel, dilation: float) -> bool:
    """True (keep) when no cloud point falls in any dilated body box."""
    for box in gripper.body_boxes:
        if len(points_in_box(box.dilated(dilation).transformed(grasp.pose), cloud)):
            return False
    return True


def _angle(u, v) -> float:
    return float(np.arctan2(np.linalg.norm(np.cross(u, v)), u @ v))


def _ranked(grasps) -> list:
    order = sorted(range(len(grasps)), key=lambda i: (-grasps[i].confidence, grasps[i].source, i))
    return [grasps[i] for i in order]


def nms(grasps, params: RefineParams) -> list:
    """Greedy suppression of same-instance grasps that are close in position and approach."""
    kept = []
    for g in _ranked(grasps):
        suppressed = False
        for k in kept:
            if k.instance_id != g.instance_id:
                continue
            if (np.linalg.norm(k.pose.translation - g.pose.translation) < params.nms_translation
                    and _angle(k.approach, g.approach) < params.nms_angle):
                suppressed = True
                break
        if not suppressed:
            kept.append(g)
    return kept


def top_percent(grasps, p: float) -> list:
    """The ``ceil(p/100 * n)`` most confident grasps, highest first."""
    if not 0 < p <= 100:
        raise RefineError("p must be in (0, 100]")
    # p * n first keeps integral products exact (10% of 30 is 3, not 4)
    n = math.ceil(p * len(grasps) / 100.0 - 1e-12)
    return _ranked(grasps)[:n]


def average_precision(outcomes) -> float:
    """Successful grasps over attempted grasps."""
    flags = [bool(o["success"]) if isinstance(o, dict) else bool(o) for o in outcomes]
    if not flags:
        raise RefineError("no outcomes")
    return sum(flags) / len(flags)


def refine(grasps, cloud: PointCloud, gripper: GripperModel, params: RefineParams) -> list:
    grasps = assign_instances(grasps, cloud, gripper)
    grasps = [g for g in grasps if collision_filter(g, cloud, gripper, params.collision_dilation)]
    return top_percent(nms(grasps, params), params.top_percent) if grasps else []


def grasp_markers(grasps, gripper: GripperModel) -> TriangleMesh:
    """All body boxes of all grasps merged into one mesh, for viewing."""
    verts, faces = [], []
    offset = 0
    for g in grasps:
        for box in gripper.body_boxes:
            m = box.transformed(g.pose).to_mesh()
            verts.append(m.vertices)
            faces.append(m.faces + offset)
            offset += len(m.vertices)
    if not verts:
        raise GeometryError("no grasps to draw")
    return TriangleMesh(np.concatenate(verts), np.concatenate(faces))
