"""
Scoring grasps with the quasi-static evaluator
==============================================

A grasp scores 1 when three checks hold: both fingers touch the object, the
contact normals lie inside the friction cone around the closing axis, and
lifting the object straight up does not push it or the gripper into a
neighbour. This script walks through one passing and two failing grasps.
"""
import numpy as np

from simgrasp.codec import compose_grasp_pose
from simgrasp.evaluate import EvalParams, explain_grasp
from simgrasp.geometry import RigidTransform, SceneDescription, SceneObject
from simgrasp.gripper import GripperModel
from simgrasp.primitives import box_mesh, icosphere_mesh
from simgrasp.sampler import GraspCandidate

gripper = GripperModel.default()
params = EvalParams()


def obj(mesh, xyz, iid=0):
    return SceneObject(mesh, RigidTransform(np.eye(3), xyz), 1.0, iid)


def side_grasp(center, iid=0):
    pose = compose_grasp_pose(center, (0, 1, 0), 0.0, 0.01)
    return GraspCandidate(pose.translation, pose.rotation[:, 2], 0.0, 0.01, pose, 0.5, iid)


def show(title, report):
    width = "none" if report.contacts is None else f"{report.contacts.width:.4f} m"
    print(f"{title:<28} contacts {width:<10} antipodal {report.antipodal!s:<5} "
          f"lift {report.lift!s:<5} -> score {report.score}")


# A 4 cm cube grasped from the side: flat faces, nothing above.
cube = SceneDescription((obj(box_mesh((0.04, 0.04, 0.04)), (0, 0, 0.02)),))
show("isolated cube", explain_grasp(side_grasp((0, -0.02, 0.02)), cube.get(0), cube, params, gripper))

# The same cube with a second one stacked on top: lifting collides.
stack = SceneDescription((obj(box_mesh((0.04, 0.04, 0.04)), (0, 0, 0.02), 0),
                          obj(box_mesh((0.04, 0.04, 0.04)), (0, 0, 0.06), 1)))
show("bottom of a stack", explain_grasp(side_grasp((0, -0.02, 0.02)), stack.get(0), stack, params, gripper))
show("top of a stack", explain_grasp(side_grasp((0, -0.02, 0.06), 1), stack.get(1), stack, params, gripper))

# Only the cap of a sphere reaches between the fingers: the contact normals
# are steep, far outside the 31 degree cone of friction coefficient 0.6.
cap = SceneDescription((obj(icosphere_mesh(0.03, 3), (0, 0.035, 0.025)),))
pose = RigidTransform.identity()
c = GraspCandidate(pose.translation, pose.rotation[:, 2], 0.0, 0.0, pose, 0.5, 0)
show("sphere cap, mu 0.6", explain_grasp(c, cap.get(0), cap, params, gripper))
show("sphere cap, mu 10", explain_grasp(c, cap.get(0), cap, EvalParams(friction_mu=10.0), gripper))
