"""Fibonacci-lattice direction classes and grasp pose composition."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import GeometryError, RigidTransform, as_unit, as_vec3, rot_z

GOLDEN = (1.0 + 5.0 ** 0.5) / 2.0
UREF_SWITCH = 0.999


@dataclass(frozen=True, eq=False)
class DirectionLattice:
    V: int
    vectors: np.ndarray

    def __len__(self) -> int:
        return self.V


def build_lattice(V: int) -> DirectionLattice:
    """Fibonacci sphere with ``V`` points.

    Point ``i`` has ``z = 1 - 2(i + 0.5)/V`` and azimuth
    ``2*pi*i*(1 - 1/golden)``. The ordering is part of the contract: class
    indices must stay stable.
    """
    if int(V) != V or V < 2:
        raise GeometryError("lattice needs V >= 2")
    i = np.arange(V, dtype=np.float64)
    z = 1.0 - 2.0 * (i + 0.5) / V
    phi = 2.0 * np.pi * i * (1.0 - 1.0 / GOLDEN)
    r = np.sqrt(1.0 - z * z)
    vecs = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    vecs.flags.writeable = False
    return DirectionLattice(int(V), vecs)


def encode_direction(lattice: DirectionLattice, v) -> int | np.ndarray:
    """Class of the lattice vector with the largest dot product (lowest index on ties).

    Accepts a single vector or an (N, 3) array.
    """
    a = np.asarray(v, dtype=np.float64)
    if a.ndim == 1:
        return int(np.argmax(lattice.vectors @ a))
    return np.argmax(a @ lattice.vectors.T, axis=1)


def decode_class(lattice: DirectionLattice, k: int) -> np.ndarray:
    if not 0 <= k < lattice.V:
        raise IndexError(f"class {k} out of range [0, {lattice.V})")
    return lattice.vectors[k].copy()


def frame_from_approach(approach) -> np.ndarray:
    """Rotation whose z column is ``approach``.

    x = approach x u_ref with u_ref = +z, switching to +x when the approach is
    within ~2.6 degrees of vertical.
    """
    z = as_unit(approach)
    u_ref = np.array([1.0, 0.0, 0.0]) if abs(z[2]) > UREF_SWITCH else np.array([0.0, 0.0, 1.0])
    x = np.cross(z, u_ref)
    x /= np.linalg.norm(x)
    y = np.cross(z, x)
    return np.column_stack([x, y, z])


def compose_grasp_pose(center, approach, a: float, d: float, gripper=None) -> RigidTransform:
    """Gripper pose for grasp center, approach, in-plane angle ``a`` and depth ``d``.

    The gripper origin stands ``d`` behind the center along the approach.
    ``gripper`` is accepted for signature symmetry; the gripper frame
    convention is fixed (z approach, x closing).
    """
    if d < 0:
        raise GeometryError("grasp depth must be >= 0")
    z = as_unit(approach)
    R = frame_from_approach(z) @ rot_z(a)
    return RigidTransform(R, as_vec3(center) - z * d)


def decompose_grasp_pose(pose: RigidTransform, center) -> tuple:
    """Inverse of :func:`compose_grasp_pose` given the grasp center: (approach, a, d)."""
    z = pose.rotation[:, 2]
    F = frame_from_approach(z)
    Rz = F.T @ pose.rotation
    a = float(np.arctan2(Rz[1, 0], Rz[0, 0])) % (2 * np.pi)
    d = float((as_vec3(center) - pose.translation) @ z)
    return z.copy(), a, d
