"""
From evaluated grasps to training targets
=========================================

Evaluated candidates become three kinds of labels. Grasp centers get a
score from how many of their grasps succeed, each (center, direction class)
cell gets the same kind of count, and every candidate keeps its own 0/1
outcome. The two counts are min-max normalised over the scene. The loss
helpers then compare network outputs against these targets.
"""
import math
import tempfile
from pathlib import Path

import numpy as np

from simgrasp.codec import build_lattice
from simgrasp.evaluate import EvalParams, evaluate_grasp
from simgrasp.gripper import GripperModel
from simgrasp.losses import LossWeights, bce_with_logits, sample_top_directions, select_seeds, smooth_l1, total_loss
from simgrasp.meshio import load_scene
from simgrasp.primitives import write_desk_scene
from simgrasp.sampler import SamplerParams, generate_candidates
from simgrasp.scores import assemble_and_write, read_labels

workdir = Path(tempfile.mkdtemp())
scene = load_scene(write_desk_scene(workdir))
gripper = GripperModel.default()
params = SamplerParams(num_fps_points=8, alpha_levels=(0.0, math.pi / 6), azimuth_steps=6,
                       inplane_angles=(0.0, math.pi / 2), standoffs=(0.01, 0.03))

# Sample and evaluate the cylinder only, to keep the run short.
target = scene.get(1)
cands = [c.with_sim(evaluate_grasp(c, target, scene, EvalParams(), gripper))
         for c in generate_candidates(scene, 1, gripper, params, seed=1)]
print(f"{len(cands)} candidates, {sum(c.sim_score for c in cands)} succeed")

# Assemble, validate and write the label record, then read it back.
lattice = build_lattice(800)
assemble_and_write("cylinder", "cloud.ply", cands, lattice, workdir / "labels.jsonl")
rec = read_labels(workdir / "labels.jsonl")[0]
for g in rec.groups:
    print(f"center {g['k']}: raw {g['gcs_raw']:.0f}, normalised {g['gcs']:.2f}")
print(f"{len(rec.ads)} populated direction cells")

# A stand-in prediction: the true center scores plus noise, neutral logits.
rng = np.random.default_rng(0)
gcs = np.array([g["gcs"] for g in rec.groups])
pred_aff = np.clip(gcs + rng.normal(scale=0.1, size=gcs.size), 0, 1)
l_aff = smooth_l1(pred_aff, gcs)
l_dir = bce_with_logits(np.zeros(len(rec.ads)), [a["norm"] for a in rec.ads])
l_score = bce_with_logits(np.zeros(len(rec.candidates)), [c["igs"] for c in rec.candidates])
print(f"losses: affordance {l_aff:.4f}, direction {l_dir:.4f}, score {l_score:.4f}, "
      f"total {total_loss(l_aff, l_dir, l_score, LossWeights()):.4f}")

# At inference the seeds above a threshold are kept and, per seed, a few
# direction classes are drawn in proportion to their scores.
seeds = select_seeds(pred_aff, 0.5)
print("seed centers above 0.5:", seeds.tolist())
ads = np.zeros(800)
for a in rec.ads:
    if a["k"] == int(np.argmax(gcs)):
        ads[a["v"]] = a["norm"]
n = min(3, int(np.count_nonzero(ads)))
print(f"directions drawn for the best center: {sample_top_directions(ads, n, seed=0).tolist()}")
