"""Damped-attractor motion: converge to a grasp, then deliver to the user.

Run: python demos/06_handover_motion.py
"""
import numpy as np

from handover_sim.arm import fk, home_configuration, jacobian, cobot_arm
from handover_sim.motion import (RMPParams, attractor_potential, handover_plan,
                                 pose_error, sample_task_pose, save_trajectory)

arm = cobot_arm()
params = RMPParams()
home = home_configuration()
print(f"arm '{arm.name}', home end effector at "
      f"{fk(arm, home).position.round(3)} m")

rng = np.random.default_rng(12)
grasp = sample_task_pose(rng)
user = sample_task_pose(rng, x_range=(-0.05, 0.05), y_range=(0.3, 0.4),
                        z_range=(0.25, 0.3))
motion = handover_plan(arm, home, grasp, user, pregrasp_offset=0.08,
                       params=params)
print(f"approach: {len(motion.approach)} samples, converged "
      f"{motion.approach.converged}")
print(f"deliver:  {len(motion.deliver)} samples, converged "
      f"{motion.deliver.converged}")
print("gripper events:", motion.events)

# energy along the approach is non-increasing (damped attractor)
energies = []
for q, qd in zip(motion.deliver.positions[::20], motion.deliver.velocities[::20]):
    err = pose_error(user, fk(arm, q))
    xd = jacobian(arm, q) @ qd
    energies.append(0.5 * xd @ xd
                    + params.kappa * attractor_potential(np.linalg.norm(err),
                                                         params))
print("delivery-phase energy samples:",
      " -> ".join(f"{e:.2f}" for e in energies[:8]))

save_trajectory(motion.approach, "demos/out_approach.traj", params)
print("wrote demos/out_approach.traj")
