"""Smooth handover motion from a damped task-space attractor.

A second-order policy accelerates the end effector toward a goal pose:
the acceleration is a soft-normalized (bounded) pull toward the goal minus a
velocity damping term. Task accelerations are mapped to joint space through
the Jacobian pseudoinverse together with the pulled-back metric, and a
semi-implicit Euler loop emits the joint trajectory.

Task vectors are 6-D: position (m) stacked with an orientation
rotation-vector (rad), expressed in a goal-centered chart so the goal sits at
the origin and the orientation entry is the principal (magnitude <= pi)
rotation error.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial.transform import Rotation

from .arm import ArmModel, _fk_matrix, _jacobian_unchecked, reachable
from .geometry import RigidTransform


class MotionError(Exception):
    """Raised for invalid motion requests (unreachable targets, bad params)."""


# singular values below this fraction of the largest are cut while
# integrating; keeps joint accelerations bounded near kinematic singularities
_INTEGRATOR_RCOND = 5e-3

# gains of the null-space posture policy that pulls the arm back toward its
# starting posture; the projector is zero at full task rank, so this only
# engages where the task direction is lost (stretch/wrist singularities)
_POSTURE_KP = 9.0
_POSTURE_KD = 6.0


@dataclass(frozen=True)
class RMPParams:
    """Attractor gains and integrator settings."""

    kappa: float = 40.0         # pull gain, 1/s^2
    omega: float = 12.0         # damping gain, 1/s
    soft_norm_c: float = 1.0    # softening length, m
    dt: float = 0.01            # integrator step, s
    max_steps: int = 3000
    pos_tol: float = 0.005      # goal tolerance on the 6-D error norm
    vel_tol: float = 0.01       # task speed tolerance at the goal

    def __post_init__(self):
        for name in ("kappa", "omega", "soft_norm_c", "dt", "pos_tol", "vel_tol"):
            if getattr(self, name) <= 0:
                raise MotionError(f"{name} must be positive")
        if self.max_steps < 1:
            raise MotionError("max_steps must be >= 1")

    @property
    def strongly_underdamped(self) -> bool:
        # damping ratio at the stiffest point of the soft-normalized pull
        zeta = self.omega / (2.0 * np.sqrt(self.kappa / self.soft_norm_c))
        return zeta < 0.5


@dataclass(frozen=True)
class TaskState:
    """6-D task vector and velocity (position m + rotation-vector rad)."""

    x: np.ndarray
    x_dot: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).reshape(6)
        xd = np.asarray(self.x_dot, dtype=float).reshape(6)
        if not (np.isfinite(x).all() and np.isfinite(xd).all()):
            raise MotionError("task state must be finite")
        if np.linalg.norm(x[3:]) > np.pi + 1e-9:
            raise MotionError("orientation rotation-vector must have magnitude <= pi")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "x_dot", xd)


@dataclass(frozen=True)
class JointTrajectory:
    """Timestamped joint samples from the integrator."""

    times: np.ndarray           # (N,)
    positions: np.ndarray       # (N, 6)
    velocities: np.ndarray      # (N, 6)
    converged: bool = True
    singular_steps: int = 0
    task_velocities: np.ndarray | None = None   # tracked J q_dot per sample

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if len(t) > 1 and np.any(np.diff(t) <= 0):
            raise MotionError("trajectory timestamps must strictly increase")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "positions",
                           np.asarray(self.positions, dtype=float))
        object.__setattr__(self, "velocities",
                           np.asarray(self.velocities, dtype=float))
        if self.task_velocities is not None:
            object.__setattr__(self, "task_velocities",
                               np.asarray(self.task_velocities, dtype=float))

    def __len__(self) -> int:
        return len(self.times)

    def final_configuration(self) -> np.ndarray:
        return self.positions[-1]

    def shifted(self, dt_offset: float) -> "JointTrajectory":
        return JointTrajectory(self.times + dt_offset, self.positions,
                               self.velocities, self.converged,
                               self.singular_steps, self.task_velocities)


def soft_normalized_step(x: np.ndarray, x_goal: np.ndarray,
                         soft_norm_c: float) -> np.ndarray:
    """Bounded, direction-preserving pull (x_goal - x)/(|x_goal - x| + c)."""
    e = np.asarray(x_goal, dtype=float) - np.asarray(x, dtype=float)
    return e / (np.linalg.norm(e) + soft_norm_c)


def attractor(state: TaskState, x_goal, params: RMPParams) -> np.ndarray:
    """Damped goal-pull acceleration: kappa * s(x, x_g) - omega * x_dot."""
    s = soft_normalized_step(state.x, x_goal, params.soft_norm_c)
    return params.kappa * s - params.omega * state.x_dot


def attractor_potential(dist: float, params: RMPParams) -> float:
    """Potential whose gradient matches the soft-normalized pull.

    Phi(r) = r - c*log(1 + r/c); the task energy 0.5*|x_dot|^2 +
    kappa*Phi(|x - x_g|) is non-increasing along the damped dynamics.
    """
    c = params.soft_norm_c
    return dist - c * np.log1p(dist / c)


def pseudoinverse(J: np.ndarray, rcond: float = 1e-6):
    """SVD pseudoinverse with singular-value cutoff; reports the rank."""
    u, s, vt = np.linalg.svd(J)
    cutoff = rcond * s[0] if s[0] > 0 else 0.0
    inv = np.where(s > cutoff, 1.0 / np.where(s > cutoff, s, 1.0), 0.0)
    rank = int(np.sum(s > cutoff))
    return (vt.T * inv) @ u.T, rank


def pull(f: np.ndarray, A: np.ndarray, J: np.ndarray):
    """Map a task-space policy (f, A) to joint space: (J^+ f, J^T A J)."""
    J = np.asarray(J, dtype=float)
    if not np.isfinite(J).all():
        raise MotionError("Jacobian must be finite")
    J_pinv, _ = pseudoinverse(J)
    q_ddot = J_pinv @ np.asarray(f, dtype=float)
    A_q = J.T @ np.asarray(A, dtype=float) @ J
    return q_ddot, A_q


def pose_error(target: RigidTransform, current: RigidTransform) -> np.ndarray:
    """6-D error [p_t - p; rotvec(R_t R^T)] with principal orientation part."""
    return _pose_error_mat(target.matrix(), current.matrix())


def _pose_error_mat(target_m: np.ndarray, current_m: np.ndarray) -> np.ndarray:
    e = np.empty(6)
    e[:3] = target_m[:3, 3] - current_m[:3, 3]
    r_err = Rotation.from_matrix(target_m[:3, :3] @ current_m[:3, :3].T)
    e[3:] = r_err.as_rotvec()
    return e


@dataclass(frozen=True)
class _RepulsorConfig:
    enabled: bool = False
    gain: float = 0.02          # m^3/s^2 over squared clearance
    clearance: float = 0.03     # activation distance above the plane, m
    plane_z: float = 0.0


def integrate(arm: ArmModel, q0, target: RigidTransform, params: RMPParams,
              *, table_repulsor: bool = False,
              repulsor_plane_z: float = 0.0) -> JointTrajectory:
    """Drive the end effector to the target pose with the damped attractor.

    Semi-implicit Euler in joint space: velocities integrate accelerations
    pulled back through the Jacobian, positions integrate velocities, joint
    limits clamp with velocity zeroing. Terminates when the 6-D pose error
    and task speed fall under tolerance; hitting max_steps is flagged on the
    returned trajectory rather than raised.
    """
    q = np.asarray(q0, dtype=float).copy()
    arm.check_limits(q)
    if not reachable(arm, target.position):
        raise MotionError(
            f"target position {target.position} outside the arm workspace")

    rep = _RepulsorConfig(enabled=table_repulsor, plane_z=repulsor_plane_z)
    dt = params.dt
    target_m = target.matrix()
    q_rest = q.copy()
    qd = np.zeros(6)
    pose_m = _fk_matrix(arm, q)
    err = _pose_error_mat(target_m, pose_m)
    J = _jacobian_unchecked(arm, q)
    xd = np.zeros(6)
    times = [0.0]
    positions = [q.copy()]
    velocities = [qd.copy()]
    task_velocities = [xd.copy()]
    singular_steps = 0
    converged = bool(np.linalg.norm(err) < params.pos_tol
                     and np.linalg.norm(xd) < params.vel_tol)

    step = 0
    while not converged and step < params.max_steps:
        step += 1
        state = TaskState(-err, xd)  # goal-centered chart: x_g = 0
        f = attractor(state, np.zeros(6), params)
        if rep.enabled:
            gap = max(pose_m[2, 3] - rep.plane_z, 1e-3)
            if gap < rep.clearance:
                f[2] += rep.gain / gap ** 2
        J_pinv, rank = pseudoinverse(J, rcond=_INTEGRATOR_RCOND)
        if rank < 6:
            singular_steps += 1
        qdd = J_pinv @ f
        if rank < 6:
            null_proj = np.eye(6) - J_pinv @ J
            qdd = qdd + null_proj @ (_POSTURE_KP * (q_rest - q)
                                     - _POSTURE_KD * qd)

        qd = qd + qdd * dt
        peak = np.abs(qd).max()
        if peak > arm.velocity_limit:
            # scale, don't clip: per-joint clipping bends the motion direction
            qd = qd * (arm.velocity_limit / peak)
        q_next = arm.clamp(q + qd * dt)
        qd = (q_next - q) / dt  # keeps q/qd consistent through limit clamps
        q = q_next

        pose_m = _fk_matrix(arm, q)
        err = _pose_error_mat(target_m, pose_m)
        J = _jacobian_unchecked(arm, q)
        xd = J @ qd
        times.append(step * dt)
        positions.append(q.copy())
        velocities.append(qd.copy())
        task_velocities.append(xd.copy())
        converged = bool(np.linalg.norm(err) < params.pos_tol
                         and np.linalg.norm(xd) < params.vel_tol)

    return JointTrajectory(np.asarray(times), np.asarray(positions),
                           np.asarray(velocities), converged=converged,
                           singular_steps=singular_steps,
                           task_velocities=np.asarray(task_velocities))


@dataclass(frozen=True)
class HandoverMotion:
    """Approach-and-deliver trajectory pair with gripper events."""

    approach: JointTrajectory
    deliver: JointTrajectory
    events: tuple = ()

    def combined(self):
        """(times, positions) over both phases on one clock."""
        offset = self.approach.times[-1] + 1e-9
        d = self.deliver.shifted(offset)
        return (np.concatenate([self.approach.times, d.times]),
                np.vstack([self.approach.positions, d.positions]))


def handover_plan(arm: ArmModel, q0, grasp_pose: RigidTransform,
                  user_pose: RigidTransform, pregrasp_offset: float,
                  params: RMPParams, **integrate_kwargs) -> HandoverMotion:
    """Plan the grasp approach then the delivery to the user-side pose.

    Phase one visits a pre-grasp pose backed off along the grasp approach
    axis (the gripper z) before closing in; phase two carries the object to
    the user pose. Gripper events mark the phase boundary.
    """
    if pregrasp_offset < 0:
        raise MotionError("pregrasp_offset must be non-negative")
    segments = []
    q = np.asarray(q0, dtype=float)
    if pregrasp_offset > 0:
        approach_axis = grasp_pose.rotation()[:, 2]
        pre = RigidTransform(grasp_pose.position - approach_axis * pregrasp_offset,
                             grasp_pose.quaternion)
        seg = integrate(arm, q, pre, params, **integrate_kwargs)
        segments.append(seg)
        q = seg.final_configuration()
    seg = integrate(arm, q, grasp_pose, params, **integrate_kwargs)
    segments.append(seg)
    q = seg.final_configuration()

    if len(segments) == 2:
        first, second = segments
        tv = None
        if first.task_velocities is not None and second.task_velocities is not None:
            tv = np.vstack([first.task_velocities, second.task_velocities])
        approach = JointTrajectory(
            np.concatenate([first.times, second.times + first.times[-1] + params.dt]),
            np.vstack([first.positions, second.positions]),
            np.vstack([first.velocities, second.velocities]),
            converged=first.converged and second.converged,
            singular_steps=first.singular_steps + second.singular_steps,
            task_velocities=tv)
    else:
        approach = segments[0]

    deliver = integrate(arm, q, user_pose, params, **integrate_kwargs)
    events = (("close_gripper", float(approach.times[-1])),
              ("open_gripper", float(approach.times[-1] + params.dt
                                     + deliver.times[-1])))
    return HandoverMotion(approach=approach, deliver=deliver, events=events)


def sample_task_pose(rng: np.random.Generator, *,
                     x_range=(-0.2, 0.2), y_range=(-0.2, 0.2),
                     z_range=(0.05, 0.35), max_tilt: float = 0.6) -> RigidTransform:
    """Random grasp-like pose over the table: downward gripper, bounded tilt."""
    pos = np.array([rng.uniform(*x_range), rng.uniform(*y_range),
                    rng.uniform(*z_range)])
    yaw = rng.uniform(0, 2 * np.pi)
    tilt = rng.uniform(0, max_tilt)
    tilt_azimuth = rng.uniform(0, 2 * np.pi)
    rot = (Rotation.from_euler("z", yaw)
           * Rotation.from_euler("x", np.pi)
           * Rotation.from_euler("zx", [tilt_azimuth, tilt]))
    m = np.eye(4)
    m[:3, :3] = rot.as_matrix()
    m[:3, 3] = pos
    return RigidTransform.from_matrix(m)


# ---------------------------------------------------------------------------
# trajectory persistence: "# key=value" header, then "t q[6] qd[6]" per line

def save_trajectory(traj: JointTrajectory, path, params: RMPParams | None = None) -> None:
    lines = []
    if params is not None:
        for key in ("kappa", "omega", "soft_norm_c", "dt", "max_steps",
                    "pos_tol", "vel_tol"):
            lines.append(f"# {key}={getattr(params, key)!r}")
    lines.append(f"# converged={traj.converged}")
    for t, q, qd in zip(traj.times, traj.positions, traj.velocities):
        vals = [t, *q, *qd]
        lines.append(" ".join(repr(float(v)) for v in vals))
    Path(path).write_text("\n".join(lines) + "\n")


def load_trajectory(path) -> JointTrajectory:
    times, qs, qds = [], [], []
    converged = True
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line.startswith("# converged="):
                converged = line.split("=", 1)[1] == "True"
            continue
        vals = [float(tok) for tok in line.split()]
        if len(vals) != 13:
            raise MotionError("trajectory line must hold t, q[6], qd[6]")
        times.append(vals[0])
        qs.append(vals[1:7])
        qds.append(vals[7:13])
    if not times:
        raise MotionError("trajectory file is empty")
    return JointTrajectory(np.asarray(times), np.asarray(qs), np.asarray(qds),
                           converged=converged)
