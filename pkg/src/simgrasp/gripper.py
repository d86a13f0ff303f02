"""Four-box parallel-jaw gripper.

Gripper frame: +z is the approach axis (pointing at the object), +x is the
closing axis, the origin sits on the palm between the finger roots. Fingers
extend from z=0 to z=finger_length; base and tail sit behind the palm.
"""
from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .geometry import GeometryError, OrientedBox, RigidTransform


@dataclass(frozen=True)
class GripperSpec:
    max_opening: float = 0.10
    finger_length: float = 0.05
    finger_thickness: float = 0.015
    finger_width: float = 0.02
    base_thickness: float = 0.01
    tail_length: float = 0.04
    tail_width: float = 0.02

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise GeometryError(f"gripper.{f.name} must be > 0")

    def build(self) -> "GripperModel":
        return GripperModel.from_spec(self)


@dataclass(frozen=True)
class GripperModel:
    fingers: tuple
    base: OrientedBox
    tail: OrientedBox
    closing_region: OrientedBox
    max_opening: float
    closing_axis: np.ndarray = None
    approach_axis: np.ndarray = None

    def __post_init__(self):
        cx = np.array([1.0, 0.0, 0.0]) if self.closing_axis is None else np.asarray(self.closing_axis, float)
        az = np.array([0.0, 0.0, 1.0]) if self.approach_axis is None else np.asarray(self.approach_axis, float)
        object.__setattr__(self, "closing_axis", cx)
        object.__setattr__(self, "approach_axis", az)
        if abs(cx @ az) > 1e-9:
            raise GeometryError("approach axis must be perpendicular to the closing axis")
        if len(self.fingers) != 2:
            raise GeometryError("gripper needs exactly two fingers")
        # closing region must sit inside the finger gap along the closing axis
        proj = lambda b: (b.center @ cx, np.abs(b.pose.rotation.T @ cx) @ b.half_extents)
        c, r = proj(self.closing_region)
        (f0, r0), (f1, r1) = proj(self.fingers[0]), proj(self.fingers[1])
        lo_f, hi_f = sorted([(f0, r0), (f1, r1)])
        if c - r < lo_f[0] + lo_f[1] - 1e-12 or c + r > hi_f[0] - hi_f[1] + 1e-12:
            raise GeometryError("closing region is not between the fingers")

    @classmethod
    def from_spec(cls, spec: GripperSpec) -> "GripperModel":
        w, L, t, wy = spec.max_opening, spec.finger_length, spec.finger_thickness, spec.finger_width
        box = lambda c, h: OrientedBox.axis_aligned(c, h)
        fingers = (
            box([0.5 * (w + t), 0.0, 0.5 * L], [0.5 * t, 0.5 * wy, 0.5 * L]),
            box([-0.5 * (w + t), 0.0, 0.5 * L], [0.5 * t, 0.5 * wy, 0.5 * L]),
        )
        base = box([0.0, 0.0, -0.5 * spec.base_thickness], [0.5 * w + t, 0.5 * wy, 0.5 * spec.base_thickness])
        tail = box([0.0, 0.0, -spec.base_thickness - 0.5 * spec.tail_length],
                   [0.5 * spec.tail_width, 0.5 * spec.tail_width, 0.5 * spec.tail_length])
        closing = box([0.0, 0.0, 0.5 * L], [0.5 * w, 0.5 * wy, 0.5 * L])
        return cls(fingers, base, tail, closing, w)

    @classmethod
    def default(cls) -> "GripperModel":
        return cls.from_spec(GripperSpec())

    @property
    def body_boxes(self) -> tuple:
        return (*self.fingers, self.base, self.tail)

    def posed(self, pose: RigidTransform):
        """Body boxes and closing region in the parent frame of ``pose``."""
        return (tuple(b.transformed(pose) for b in self.body_boxes), self.closing_region.transformed(pose))

    @property
    def footprint_half(self) -> float:
        return float(max(self.base.half_extents[0], self.base.half_extents[1]))
