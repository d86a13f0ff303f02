import json
import math

import numpy as np
import pytest

from simgrasp.codec import compose_grasp_pose
from simgrasp.geometry import PointCloud, RigidTransform
from simgrasp.refine import (
    RefinedGrasp,
    RefineError,
    RefineParams,
    assign_instances,
    average_precision,
    collision_filter,
    grasp_from_json,
    grasp_markers,
    nms,
    read_grasps,
    refine,
    top_percent,
    write_grasps,
)

from oracles import brute_collides

IDENTITY = RigidTransform.identity()
PARAMS = RefineParams()


def labelled(points, labels):
    P = np.asarray(points, float).reshape(-1, 3)
    return PointCloud(P, None, np.asarray(labels, dtype=np.int64))


def random_grasps(rng, n, n_instances=3, spread=0.05):
    out = []
    for i in range(n):
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        pose = compose_grasp_pose(rng.uniform(-spread, spread, size=3), v, rng.uniform(0, math.pi), 0.01)
        conf = float(rng.choice([0.25, 0.5, 0.75, 1.0])) if rng.random() < 0.3 else float(rng.random())
        out.append(RefinedGrasp(pose, conf, int(rng.integers(n_instances)), i))
    return out


def _close(a, b, params):
    return (np.linalg.norm(a.pose.translation - b.pose.translation) < params.nms_translation
            and math.acos(np.clip(a.approach @ b.approach, -1, 1)) < params.nms_angle - 1e-9)


# ---------------------------------------------------------------- instances


def test_single_instance_region(gripper):
    cloud = labelled([[0, 0, 0.02], [0.01, 0, 0.03]], [3, 3])
    out = assign_instances([RefinedGrasp(IDENTITY, 0.5)], cloud, gripper)
    assert out[0].instance_id == 3


def test_empty_region_drops_grasp(gripper):
    cloud = labelled([[1, 1, 1]], [3])
    assert assign_instances([RefinedGrasp(IDENTITY, 0.5)], cloud, gripper) == []


def test_majority_and_tie(gripper):
    P = np.column_stack([np.linspace(-0.04, 0.04, 10), np.zeros(10), np.full(10, 0.02)])
    out = assign_instances([RefinedGrasp(IDENTITY, 0.5)], labelled(P, [5] * 4 + [2] * 6), gripper)
    assert out[0].instance_id == 2
    out = assign_instances([RefinedGrasp(IDENTITY, 0.5)], labelled(P, [5] * 5 + [2] * 5), gripper)
    assert out[0].instance_id == 2
    out = assign_instances([RefinedGrasp(IDENTITY, 0.5)], labelled(P, [1] * 5 + [7] * 5), gripper)
    assert out[0].instance_id == 1


def test_unlabelled_cloud_rejected(gripper):
    with pytest.raises(RefineError):
        assign_instances([RefinedGrasp(IDENTITY, 0.5)], PointCloud(np.zeros((1, 3))), gripper)


# ---------------------------------------------------------------- collision filter


def test_points_in_closing_region_keep(gripper):
    cloud = labelled([[0, 0, 0.025], [0.04, 0.005, 0.045]], [0, 0])
    assert collision_filter(RefinedGrasp(IDENTITY, 0.5), cloud, gripper, 0.005)


def test_point_in_finger_rejects(gripper):
    cloud = labelled([[0, 0, 0.025], [0.0575, 0.0, 0.02]], [0, 0])
    assert not collision_filter(RefinedGrasp(IDENTITY, 0.5), cloud, gripper, 0.0)


def test_collision_filter_matches_brute_force(gripper, rng):
    agree = hits = 0
    for _ in range(1000):
        g = random_grasps(rng, 1, spread=0.02)[0]
        P = rng.uniform(-0.09, 0.09, size=(6, 3))
        expected = not brute_collides(g.pose, P, gripper, 0.005)
        got = collision_filter(g, labelled(P, [0] * 6), gripper, 0.005)
        agree += got == expected
        hits += not expected
    assert agree == 1000
    assert 50 < hits < 950


# ---------------------------------------------------------------- NMS


def test_identical_poses_same_instance():
    a, b = RefinedGrasp(IDENTITY, 0.4, 1, 0), RefinedGrasp(IDENTITY, 0.9, 1, 1)
    assert nms([a, b], PARAMS) == [b]
    c, d = RefinedGrasp(IDENTITY, 0.5, 1, 0), RefinedGrasp(IDENTITY, 0.5, 1, 1)
    assert nms([d, c], PARAMS) == [c]


def test_identical_poses_different_instances():
    a, b = RefinedGrasp(IDENTITY, 0.4, 1, 0), RefinedGrasp(IDENTITY, 0.9, 2, 1)
    assert nms([a, b], PARAMS) == [b, a]


def test_nms_properties_on_random_sets(rng):
    for _ in range(100):
        grasps = random_grasps(rng, int(rng.integers(1, 40)))
        kept = nms(grasps, PARAMS)
        ids = {id(g) for g in grasps}
        assert all(id(k) in ids for k in kept)
        # idempotence
        assert nms(kept, PARAMS) == kept
        # no two kept grasps of one instance are close
        for i, a in enumerate(kept):
            for b in kept[i + 1:]:
                assert a.instance_id != b.instance_id or not _close(a, b, PARAMS)
        # every dropped grasp has a kept, at-least-as-confident neighbour of its instance
        kept_ids = {id(k) for k in kept}
        for g in grasps:
            if id(g) not in kept_ids:
                assert any(k.instance_id == g.instance_id and k.confidence >= g.confidence
                           and _close(k, g, PARAMS) for k in kept)
        # instance scoping: per-instance NMS composes to the joint result
        per = [k for inst in sorted({g.instance_id for g in grasps})
               for k in nms([g for g in grasps if g.instance_id == inst], PARAMS)]
        assert {id(k) for k in per} == kept_ids
        # top percent selects a prefix: smaller p gives a subset
        small, large = top_percent(kept, 25), top_percent(kept, 60)
        assert large[:len(small)] == small
        assert all(id(k) in kept_ids for k in large)


# ---------------------------------------------------------------- top percent / AP


@pytest.mark.parametrize("p, n, expected", [(100, 7, 7), (50, 4, 2), (1, 1, 1), (10, 30, 3), (10, 31, 4)])
def test_top_percent_counts(p, n, expected):
    grasps = [RefinedGrasp(IDENTITY, i / max(n, 1), 0, i) for i in range(n)]
    out = top_percent(grasps, p)
    assert len(out) == expected
    assert [g.confidence for g in out] == sorted((g.confidence for g in grasps), reverse=True)[:expected]


def test_top_percent_range():
    with pytest.raises(RefineError):
        top_percent([], 0)


@pytest.mark.parametrize("outcomes, expected", [
    ([1, 1, 0, 1], 0.75),
    ([True] * 5, 1.0),
    ([0, 0, 0], 0.0),
    ([{"success": 1}, {"success": 0}], 0.5),
])
def test_average_precision(outcomes, expected):
    assert average_precision(outcomes) == expected


def test_average_precision_empty():
    with pytest.raises(RefineError):
        average_precision([])


# ---------------------------------------------------------------- io and pipeline


def test_confidence_bounds():
    with pytest.raises(RefineError):
        RefinedGrasp(IDENTITY, 1.5)


def test_candidate_lines_get_product_confidence():
    g = grasp_from_json({"pose": IDENTITY.to_json(), "sim": 1, "collision": 0.4, "instance_id": 2}, 7)
    assert g.confidence == 0.4 and g.source == 7 and g.instance_id == 2
    with pytest.raises(RefineError):
        grasp_from_json({"pose": IDENTITY.to_json()}, 0)


def test_grasp_file_round_trip(tmp_path, rng):
    grasps = random_grasps(rng, 5)
    write_grasps(grasps, tmp_path / "g.jsonl")
    back = read_grasps(tmp_path / "g.jsonl")
    assert [g.to_json() for g in back] == [json.loads(json.dumps(g.to_json())) for g in grasps]


def test_refine_pipeline(gripper):
    # a 2 cm slab of points in the closing region of three nearly identical grasps
    rng = np.random.default_rng(4)
    P = np.column_stack([rng.uniform(-0.01, 0.01, 400), rng.uniform(-0.008, 0.008, 400), rng.uniform(0.01, 0.04, 400)])
    cloud = labelled(P, [4] * 400)
    shifted = RigidTransform(np.eye(3), [0.001, 0, 0])
    grasps = [RefinedGrasp(IDENTITY, 0.6, None, 0), RefinedGrasp(shifted, 0.8, None, 1),
              RefinedGrasp(RigidTransform(np.eye(3), [0, 0, 0.05]), 0.9, None, 2)]
    out = refine(grasps, cloud, gripper, RefineParams(top_percent=100))
    # the third grasp's base sits inside the slab; the first is suppressed by the second
    assert [g.source for g in out] == [1]
    assert out[0].instance_id == 4
    markers = grasp_markers(out, gripper)
    assert len(markers.faces) == 12 * len(gripper.body_boxes)
