"""Closed, consistently wound primitive meshes used for desk-scale scenes."""
from __future__ import annotations

import numpy as np

from .geometry import TriangleMesh


def box_mesh(size=(1.0, 1.0, 1.0)) -> TriangleMesh:
    """Axis-aligned box centred on the origin, 8 vertices and 12 outward-wound faces."""
    sx, sy, sz = 0.5 * np.asarray(size, dtype=np.float64)
    V = np.array([
        [-sx, -sy, -sz], [sx, -sy, -sz], [sx, sy, -sz], [-sx, sy, -sz],
        [-sx, -sy, sz], [sx, -sy, sz], [sx, sy, sz], [-sx, sy, sz],
    ])
    F = np.array([
        [0, 2, 1], [0, 3, 2],  # -z
        [4, 5, 6], [4, 6, 7],  # +z
        [0, 1, 5], [0, 5, 4],  # -y
        [2, 3, 7], [2, 7, 6],  # +y
        [1, 2, 6], [1, 6, 5],  # +x
        [0, 4, 7], [0, 7, 3],  # -x
    ])
    return TriangleMesh(V, F)


def cylinder_mesh(radius: float, height: float, segments: int = 32) -> TriangleMesh:
    """Capped cylinder along z, centred on the origin."""
    ang = 2 * np.pi * np.arange(segments) / segments
    ring = np.stack([radius * np.cos(ang), radius * np.sin(ang)], axis=1)
    h = 0.5 * height
    bottom = np.column_stack([ring, np.full(segments, -h)])
    top = np.column_stack([ring, np.full(segments, h)])
    V = np.vstack([bottom, top, [[0, 0, -h], [0, 0, h]]])
    cb, ct = 2 * segments, 2 * segments + 1
    F = []
    for i in range(segments):
        j = (i + 1) % segments
        F.append([i, j, segments + j])
        F.append([i, segments + j, segments + i])
        F.append([cb, j, i])
        F.append([ct, segments + i, segments + j])
    return TriangleMesh(V, np.array(F))


def icosphere_mesh(radius: float, subdivisions: int = 2) -> TriangleMesh:
    """Geodesic sphere from a subdivided icosahedron (20 * 4**subdivisions faces)."""
    t = (1.0 + 5 ** 0.5) / 2.0
    V = [[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
         [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
         [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]]
    F = [[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
         [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
         [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
         [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]]
    V = [np.asarray(v, float) / np.linalg.norm(v) for v in V]
    for _ in range(subdivisions):
        cache = {}

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            if key not in cache:
                m = V[a] + V[b]
                V.append(m / np.linalg.norm(m))
                cache[key] = len(V) - 1
            return cache[key]

        new = []
        for a, b, c in F:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        F = new
    return TriangleMesh(radius * np.array(V), np.array(F))


def write_desk_scene(directory, spacing: float = 0.12) -> "Path":
    """Box, cylinder and sphere resting on z=0 in a row; returns the scene JSON path."""
    from pathlib import Path

    from .geometry import RigidTransform, SceneDescription, SceneObject
    from .meshio import save_scene, write_obj, write_ply_mesh

    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    parts = [
        ("box.obj", box_mesh((0.06, 0.05, 0.07)), 0.035),
        ("cylinder.ply", cylinder_mesh(0.025, 0.08), 0.04),
        ("sphere.ply", icosphere_mesh(0.03, 2), 0.03),
    ]
    objects = []
    for i, (name, mesh, lift) in enumerate(parts):
        if name.endswith(".obj"):
            write_obj(mesh, d / name)
        else:
            write_ply_mesh(mesh, d / name, binary=True)
        pose = RigidTransform(np.eye(3), [i * spacing, 0.0, lift])
        objects.append(SceneObject(mesh, pose, 1.0, i, name))
    path = d / "scene.json"
    save_scene(SceneDescription(tuple(objects)), path)
    return path
