"""Serial-arm kinematics: forward kinematics and the geometric Jacobian.

The arm is a chain of six revolute joints, each a rotation about the local z
axis followed by a fixed link transform (standard DH composition). The
shipped parameter table matches a common 6-DOF cobot geometry; everything is
parameterized so other arms drop in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import RigidTransform, quat_from_axis_angle


class KinematicsError(Exception):
    """Raised for out-of-limit configurations or unreachable targets."""


def _dh_link(d: float, a: float, alpha: float) -> RigidTransform:
    """Constant part of a standard DH link: Tz(d) Tx(a) Rx(alpha)."""
    q = quat_from_axis_angle([1.0, 0.0, 0.0], alpha)
    # Tz(d) then Tx(a) then Rx(alpha): position is (a, 0, d) since the
    # rotation applies after the translations in this composition
    return RigidTransform(np.array([a, 0.0, d]), q)


@dataclass(frozen=True)
class ArmModel:
    """Six-revolute-joint chain with limits and a cached zero-pose."""

    links: tuple                    # per-joint fixed transforms after the rotation
    joint_limits: np.ndarray        # (6, 2) radians
    velocity_limit: float           # rad/s, per joint
    base: RigidTransform = field(default_factory=RigidTransform.identity)
    name: str = "arm"

    def __post_init__(self):
        if len(self.links) != 6:
            raise KinematicsError("arm must have exactly 6 joints")
        limits = np.asarray(self.joint_limits, dtype=float)
        if limits.shape != (6, 2) or np.any(limits[:, 0] >= limits[:, 1]):
            raise KinematicsError("joint limits must be 6 well-ordered pairs")
        object.__setattr__(self, "joint_limits", limits)
        # cache 4x4 matrices: the kinematics inner loops run thousands of
        # times per trajectory and quaternion conversion dominates otherwise
        object.__setattr__(self, "_base_mat", self.base.matrix())
        object.__setattr__(self, "_link_mats",
                           tuple(link.matrix() for link in self.links))

    def check_limits(self, q: np.ndarray) -> None:
        q = np.asarray(q, dtype=float)
        if q.shape != (6,):
            raise KinematicsError("configuration must have 6 joints")
        lo, hi = self.joint_limits[:, 0], self.joint_limits[:, 1]
        if np.any(q < lo - 1e-9) or np.any(q > hi + 1e-9):
            raise KinematicsError(f"configuration {q} outside joint limits")

    def clamp(self, q: np.ndarray) -> np.ndarray:
        return np.clip(q, self.joint_limits[:, 0], self.joint_limits[:, 1])

    @property
    def reference_pose(self) -> RigidTransform:
        return _fk_unchecked(self, np.zeros(6))

    def shoulder_position(self) -> np.ndarray:
        return (self.base @ self.links[0]).position

    def max_reach(self) -> float:
        # conservative: links 2..6 set the envelope around the shoulder
        reach = 0.0
        for link in self.links[1:]:
            reach += float(np.linalg.norm(link.position))
        return reach


def cobot_arm(base: RigidTransform | None = None) -> ArmModel:
    """Default 6-DOF arm with a 0.85 m class reach, mounted beside the table."""
    d = [0.1625, 0.0, 0.0, 0.1333, 0.0997, 0.0996]
    a = [0.0, -0.425, -0.3922, 0.0, 0.0, 0.0]
    alpha = [np.pi / 2, 0.0, 0.0, np.pi / 2, -np.pi / 2, 0.0]
    links = tuple(_dh_link(d[i], a[i], alpha[i]) for i in range(6))
    limits = np.array([[-2 * np.pi, 2 * np.pi]] * 6)
    limits[2] = [-np.pi, np.pi]
    if base is None:
        base = RigidTransform(np.array([-0.45, 0.0, 0.0]))
    return ArmModel(links=links, joint_limits=limits,
                    velocity_limit=np.pi, base=base, name="desk-cobot-6dof")


def _joint_matrix(q_i: float) -> np.ndarray:
    c, s = np.cos(q_i), np.sin(q_i)
    m = np.eye(4)
    m[0, 0] = c
    m[0, 1] = -s
    m[1, 0] = s
    m[1, 1] = c
    return m


def _frame_matrices(arm: ArmModel, q: np.ndarray) -> tuple:
    """Per-joint pre-rotation frames and the end-effector matrix."""
    frames = []
    m = arm._base_mat
    for i in range(6):
        frames.append(m)
        m = m @ _joint_matrix(q[i]) @ arm._link_mats[i]
    return frames, m


def _fk_matrix(arm: ArmModel, q: np.ndarray) -> np.ndarray:
    m = arm._base_mat
    for i in range(6):
        m = m @ _joint_matrix(q[i]) @ arm._link_mats[i]
    return m


def _fk_unchecked(arm: ArmModel, q: np.ndarray) -> RigidTransform:
    return RigidTransform.from_matrix(_fk_matrix(arm, q))


def fk(arm: ArmModel, q) -> RigidTransform:
    """End-effector pose for configuration q (radians)."""
    q = np.asarray(q, dtype=float)
    arm.check_limits(q)
    return _fk_unchecked(arm, q)


def joint_frames(arm: ArmModel, q) -> list:
    """World frame before each joint's rotation (axis = that frame's z)."""
    q = np.asarray(q, dtype=float)
    frames, _ = _frame_matrices(arm, q)
    return [RigidTransform.from_matrix(m) for m in frames]


def _jacobian_unchecked(arm: ArmModel, q: np.ndarray) -> np.ndarray:
    frames, ee = _frame_matrices(arm, q)
    p_ee = ee[:3, 3]
    J = np.empty((6, 6))
    for i, m in enumerate(frames):
        axis = m[:3, 2]
        J[:3, i] = np.cross(axis, p_ee - m[:3, 3])
        J[3:, i] = axis
    return J


def jacobian(arm: ArmModel, q) -> np.ndarray:
    """Geometric Jacobian, rows [linear; angular], columns per joint."""
    q = np.asarray(q, dtype=float)
    arm.check_limits(q)
    return _jacobian_unchecked(arm, q)


def home_configuration() -> np.ndarray:
    """Bent-elbow ready pose above the table edge, gripper pointing down.

    The stretched zero configuration is singular; this one keeps the Jacobian
    well conditioned (cond ~ 7) over the whole table service area.
    """
    return np.array([0.6, -1.5, -2.0, -1.7, 1.4, 0.0])


def reachable(arm: ArmModel, position, margin: float = 0.02) -> bool:
    """Cheap workspace test: inside the reach sphere around the shoulder."""
    p = np.asarray(position, dtype=float)
    r = np.linalg.norm(p - arm.shoulder_position())
    return 0.05 <= r <= arm.max_reach() - margin
