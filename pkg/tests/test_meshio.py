import json

import numpy as np
import pytest

from simgrasp.geometry import PointCloud
from simgrasp.meshio import (
    MeshFormatError,
    load_mesh,
    load_scene,
    read_cloud_ply,
    save_scene,
    write_cloud_ply,
    write_obj,
    write_ply_mesh,
)
from simgrasp.primitives import box_mesh, icosphere_mesh

CUBE_OBJ = """\
v -0.5 -0.5 -0.5
v 0.5 -0.5 -0.5
v 0.5 0.5 -0.5
v -0.5 0.5 -0.5
v -0.5 -0.5 0.5
v 0.5 -0.5 0.5
v 0.5 0.5 0.5
v -0.5 0.5 0.5
f 1 3 2
f 1 4 3
f 5 6 7
f 5 7 8
f 1 2 6
f 1 6 5
f 3 4 8
f 3 8 7
f 2 3 7
f 2 7 6
f 1 5 8
f {last}
"""


def test_unit_cube_obj(tmp_path):
    p = tmp_path / "cube.obj"
    p.write_text(CUBE_OBJ.format(last="1 8 4"))
    mesh = load_mesh(p)
    assert mesh.vertices.shape == (8, 3)
    assert mesh.faces.shape == (12, 3)
    assert mesh.dropped_faces == 0
    assert mesh.is_watertight
    assert mesh.volume == pytest.approx(1.0)


def test_zero_area_face_is_dropped(tmp_path):
    p = tmp_path / "cube.obj"
    p.write_text(CUBE_OBJ.format(last="1 5 5"))
    mesh = load_mesh(p)
    assert len(mesh.faces) == 11
    assert mesh.dropped_faces == 1


def test_quads_are_fan_triangulated(tmp_path):
    p = tmp_path / "quad.obj"
    p.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1/1/1 2/2/1 3/3/1 4/4/1\n")
    mesh = load_mesh(p)
    np.testing.assert_array_equal(mesh.faces, [[0, 1, 2], [0, 2, 3]])


def test_nonexistent_path(tmp_path):
    with pytest.raises(MeshFormatError, match="unreadable file"):
        load_mesh(tmp_path / "missing.obj")


def test_unsupported_suffix(tmp_path):
    p = tmp_path / "mesh.stl"
    p.write_bytes(b"solid")
    with pytest.raises(MeshFormatError, match="unsupported format"):
        load_mesh(p)


@pytest.mark.parametrize("binary", [False, True])
def test_ply_mesh_round_trip(tmp_path, binary):
    mesh = icosphere_mesh(0.3, 1)
    p = tmp_path / "s.ply"
    write_ply_mesh(mesh, p, binary=binary)
    back = load_mesh(p)
    np.testing.assert_array_equal(back.vertices, mesh.vertices)
    np.testing.assert_array_equal(back.faces, mesh.faces)


def test_obj_round_trip_is_exact(tmp_path):
    mesh = icosphere_mesh(0.037, 1)
    write_obj(mesh, tmp_path / "s.obj")
    back = load_mesh(tmp_path / "s.obj")
    np.testing.assert_array_equal(back.vertices, mesh.vertices)


@pytest.mark.parametrize("binary", [False, True])
def test_cloud_round_trip(tmp_path, rng, binary):
    P = rng.normal(size=(50, 3))
    N = P / np.linalg.norm(P, axis=1, keepdims=True)
    L = rng.integers(0, 4, size=50)
    write_cloud_ply(PointCloud(P, N, L), tmp_path / "c.ply", binary=binary)
    back = read_cloud_ply(tmp_path / "c.ply")
    np.testing.assert_array_equal(back.points, P)
    np.testing.assert_array_equal(back.normals, N)
    np.testing.assert_array_equal(back.instance_labels, L)


def test_scene_round_trip(desk_dir, tmp_path):
    scene = load_scene(desk_dir / "scene.json")
    assert scene.instance_ids == [0, 1, 2]
    assert all(o.local_mesh.is_watertight for o in scene.objects)
    doc = json.loads((desk_dir / "scene.json").read_text())
    assert [o["mesh"] for o in doc["objects"]] == ["box.obj", "cylinder.ply", "sphere.ply"]
    # bottoms rest on the desk plane
    for o in scene.objects:
        assert o.world_bounds[0][2] == pytest.approx(0.0, abs=1e-12)


def test_scene_missing_mesh_field(tmp_path):
    p = tmp_path / "scene.json"
    p.write_text(json.dumps({"objects": [{"pose": {}}]}))
    with pytest.raises(MeshFormatError, match=r"objects\[0\].mesh"):
        load_scene(p)


def test_scene_duplicate_ids_rejected(tmp_path):
    from simgrasp.meshio import write_obj
    write_obj(box_mesh(), tmp_path / "b.obj")
    p = tmp_path / "scene.json"
    p.write_text(json.dumps({"objects": [{"mesh": "b.obj", "instance_id": 1},
                                         {"mesh": "b.obj", "instance_id": 1}]}))
    with pytest.raises(MeshFormatError):
        load_scene(p)
