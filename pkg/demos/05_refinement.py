"""
Refining predicted grasps on a labelled point cloud
===================================================

Predicted grasps are cleaned up in four steps: each grasp takes the
majority instance label of the cloud points in its closing region, grasps
whose gripper body would touch the cloud are dropped, near duplicates on
the same instance are suppressed, and the most confident share is kept.
Average precision is then the fraction of executed grasps that succeeded.
"""
import math
import tempfile

import numpy as np

from simgrasp.evaluate import EvalParams, evaluate_grasp
from simgrasp.geometry import scene_cloud
from simgrasp.gripper import GripperModel
from simgrasp.meshio import load_scene
from simgrasp.primitives import write_desk_scene
from simgrasp.refine import RefinedGrasp, RefineParams, average_precision, refine
from simgrasp.sampler import SamplerParams, generate_candidates

scene = load_scene(write_desk_scene(tempfile.mkdtemp()))
gripper = GripperModel.default()
cloud = scene_cloud(scene, points_per_object=2048, seed=0)
print(f"cloud: {len(cloud)} points, instances {sorted(set(cloud.instance_labels.tolist()))}")

# Candidates stand in for network predictions; confidence is the
# closing-region IOU, jittered so that ranks are not all tied.
params = SamplerParams(num_fps_points=10, alpha_levels=(0.0, math.pi / 6), azimuth_steps=6,
                       inplane_angles=(0.0, math.pi / 2), standoffs=(0.01, 0.03))
rng = np.random.default_rng(3)
predicted, truth = [], {}
for obj in scene.objects:
    for c in generate_candidates(scene, obj.instance_id, gripper, params, seed=3):
        conf = float(np.clip(c.collision_score + rng.normal(scale=0.05), 0, 1))
        predicted.append(RefinedGrasp(c.pose, conf, None, len(predicted)))
        truth[len(predicted) - 1] = c
print(f"{len(predicted)} predicted grasps")

for p in (100, 30, 10):
    kept = refine(predicted, cloud, gripper, RefineParams(top_percent=p))
    outcomes = [evaluate_grasp(truth[g.source], scene.get(g.instance_id), scene, EvalParams(), gripper)
                for g in kept]
    per_obj = {i: sum(g.instance_id == i for g in kept) for i in scene.instance_ids}
    print(f"top {p:>3}%: {len(kept):>3} grasps {per_obj}, AP {average_precision(outcomes):.3f}")
