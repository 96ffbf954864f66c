"""Euler-angle rotations shared by the geometry kernels and the box losses.

Convention: intrinsic yaw -> pitch -> roll, i.e. R = Rz(yaw) @ Ry(pitch) @ Rx(roll).
Angles are radians; matrices map box-local coordinates to world coordinates.
"""

from __future__ import annotations

import math

import numpy as np


def euler_to_matrix(yaw: float, pitch: float, roll: float) -> np.ndarray:
    """3x3 rotation matrix for intrinsic yaw->pitch->roll angles."""
    cy, sy = math.cos(yaw), math.sin(yaw)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cr, sr = math.cos(roll), math.sin(roll)
    return np.array(
        [
            [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
            [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
            [-sp, cp * sr, cp * cr],
        ]
    )


def euler_to_matrix_batch(eulers: np.ndarray) -> np.ndarray:
    """Vectorized ``euler_to_matrix`` for an (n, 3) array of angle triples."""
    eulers = np.asarray(eulers, dtype=np.float64)
    cy, sy = np.cos(eulers[:, 0]), np.sin(eulers[:, 0])
    cp, sp = np.cos(eulers[:, 1]), np.sin(eulers[:, 1])
    cr, sr = np.cos(eulers[:, 2]), np.sin(eulers[:, 2])
    out = np.empty((len(eulers), 3, 3))
    out[:, 0, 0] = cy * cp
    out[:, 0, 1] = cy * sp * sr - sy * cr
    out[:, 0, 2] = cy * sp * cr + sy * sr
    out[:, 1, 0] = sy * cp
    out[:, 1, 1] = sy * sp * sr + cy * cr
    out[:, 1, 2] = sy * sp * cr - cy * sr
    out[:, 2, 0] = -sp
    out[:, 2, 1] = cp * sr
    out[:, 2, 2] = cp * cr
    return out


def euler_matrix_derivatives(
    yaw: float, pitch: float, roll: float
) -> tuple[np.ndarray, np.ndarray]:
    """Rotation matrix and its partial derivatives w.r.t. the three angles.

    Returns ``(R, dR)`` where ``dR`` has shape (3, 3, 3) and ``dR[k]`` is the
    elementwise derivative of R w.r.t. angle k (0=yaw, 1=pitch, 2=roll).
    """
    cy, sy = math.cos(yaw), math.sin(yaw)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cr, sr = math.cos(roll), math.sin(roll)

    rz = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]])

    drz = np.array([[-sy, -cy, 0.0], [cy, -sy, 0.0], [0.0, 0.0, 0.0]])
    dry = np.array([[-sp, 0.0, cp], [0.0, 0.0, 0.0], [-cp, 0.0, -sp]])
    drx = np.array([[0.0, 0.0, 0.0], [0.0, -sr, -cr], [0.0, cr, -sr]])

    r = rz @ ry @ rx
    dr = np.stack([drz @ ry @ rx, rz @ dry @ rx, rz @ ry @ drx])
    return r, dr


def normalize_angle(angle: float) -> float:
    """Map an angle to the half-open interval (-pi, pi]."""
    r = math.remainder(angle, 2.0 * math.pi)
    if r <= -math.pi:
        r = math.pi
    return r
