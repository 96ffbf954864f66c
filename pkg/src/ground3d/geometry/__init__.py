"""Exact oriented-box geometry: volumes, IoU, and spatial relations.

All functions here are pure; callers may evaluate box pairs in parallel with
no shared state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rotation import euler_to_matrix, euler_to_matrix_batch
from ..scene import Box3D
from . import kernel
from ._clip_py import FACES, SIGNS, corners_from_params, intersection_faces
from .relations import center_distance, contains, is_above, is_near, nearest, nearest_point

__all__ = [
    "ConvexPolytope",
    "HalfSpace",
    "box_params",
    "box_params_batch",
    "center_distance",
    "contains",
    "corners",
    "intersection_polytope",
    "intersection_volume",
    "iou",
    "iou_axis_aligned",
    "iou_matrix",
    "is_above",
    "is_near",
    "kernel_backend",
    "nearest",
    "nearest_point",
]


def kernel_backend() -> str:
    """Name of the active intersection kernel ("compiled" or "pure-python")."""
    return kernel.BACKEND


def box_params(box: Box3D) -> list[float]:
    """Flatten a box into the 15-float kernel parameter layout."""
    r = euler_to_matrix(*box.euler)
    return [*box.center, *box.size, *r.reshape(9).tolist()]


def box_params_batch(boxes) -> np.ndarray:
    """(n, 15) float64 parameter array for a sequence of boxes."""
    n = len(boxes)
    out = np.empty((n, 15))
    if n == 0:
        return out
    out[:, 0:3] = [b.center for b in boxes]
    out[:, 3:6] = [b.size for b in boxes]
    out[:, 6:15] = euler_to_matrix_batch(np.array([b.euler for b in boxes])).reshape(n, 9)
    return out


def corners(box: Box3D) -> np.ndarray:
    """The 8 world-space corners, shape (8, 3), in the fixed sign order.

    Corner i is ``center + R(euler) @ (signs[i] * size / 2)`` with the sign
    order published as ``geometry.CORNER_SIGNS``.
    """
    return np.array(corners_from_params(box_params(box)))


CORNER_SIGNS = SIGNS


def intersection_volume(a: Box3D, b: Box3D) -> float:
    """Exact intersection volume in m^3 (0.0 when disjoint or degenerate)."""
    return kernel.box_intersection_volume(box_params(a), box_params(b))


def iou(a: Box3D, b: Box3D) -> float:
    """Oriented IoU in [0, 1]: intersection / (vol(a) + vol(b) - intersection)."""
    return kernel.box_iou(box_params(a), box_params(b))


def iou_matrix(preds, gts) -> np.ndarray:
    """Pairwise IoU matrix, entry (i, j) = iou(preds[i], gts[j])."""
    out = np.zeros((len(preds), len(gts)))
    if len(preds) == 0 or len(gts) == 0:
        return out
    kernel.iou_matrix(box_params_batch(preds), box_params_batch(gts), out)
    return out


def axis_aligned_hull(box: Box3D) -> tuple[np.ndarray, np.ndarray]:
    """(min, max) corners of the axis-aligned hull of an oriented box.

    The hull half-extent along world axis i is ``sum_j |R_ij| * size_j / 2``,
    which equals size/2 for an unrotated box.
    """
    r = euler_to_matrix(*box.euler)
    half = 0.5 * np.abs(r) @ np.asarray(box.size)
    center = np.asarray(box.center)
    return center - half, center + half


def iou_axis_aligned(a: Box3D, b: Box3D) -> float:
    """Interval-arithmetic IoU of the axis-aligned hulls of two boxes.

    For euler = 0 boxes this is the classic axis-aligned box IoU and agrees
    with the polytope kernel to float precision.
    """
    amin, amax = axis_aligned_hull(a)
    bmin, bmax = axis_aligned_hull(b)
    overlap = np.minimum(amax, bmax) - np.maximum(amin, bmin)
    if np.any(overlap <= 0.0):
        return 0.0
    inter = float(np.prod(overlap))
    union = float(np.prod(amax - amin) + np.prod(bmax - bmin)) - inter
    if union <= 0.0:
        return 0.0
    return min(inter / union, 1.0)


@dataclass(frozen=True)
class HalfSpace:
    """The region ``normal . x <= offset`` with a unit outward normal."""

    normal: tuple[float, float, float]
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        if abs(float(np.linalg.norm(n)) - 1.0) > 1e-12:
            raise ValueError(f"half-space normal must be unit length, got {self.normal}")
        object.__setattr__(self, "normal", tuple(float(v) for v in n))
        object.__setattr__(self, "offset", float(self.offset))

    def signed_distance(self, point) -> float:
        return float(np.dot(self.normal, point) - self.offset)


@dataclass(frozen=True)
class ConvexPolytope:
    """A convex solid bounded by outward-oriented planar face loops."""

    vertices: tuple[tuple[float, float, float], ...]
    faces: tuple[tuple[int, ...], ...]

    def volume(self) -> float:
        """Signed-tetrahedron fan volume around the vertex centroid."""
        if not self.faces:
            return 0.0
        verts = np.asarray(self.vertices)
        c = verts.mean(axis=0)
        total = 0.0
        for loop in self.faces:
            p0 = verts[loop[0]] - c
            for t in range(1, len(loop) - 1):
                p1 = verts[loop[t]] - c
                p2 = verts[loop[t + 1]] - c
                total += float(np.dot(p0, np.cross(p1, p2)))
        return total / 6.0

    def validate(self, tol: float = 1e-9) -> list[str]:
        """Convexity and face-planarity violations, empty when sound."""
        problems: list[str] = []
        verts = np.asarray(self.vertices)
        for fi, loop in enumerate(self.faces):
            if len(loop) < 3:
                problems.append(f"face {fi} has fewer than 3 vertices")
                continue
            pts = verts[list(loop)]
            normal = _newell_normal(pts)
            if normal is None:
                problems.append(f"face {fi} is degenerate")
                continue
            d = float(np.dot(normal, pts[0]))
            planar = np.abs(pts @ normal - d).max()
            if planar > tol:
                problems.append(f"face {fi} not planar within {tol} (max {planar:.2e})")
            behind = (verts @ normal - d).max()
            if behind > tol:
                problems.append(f"face {fi} has vertices in front of its plane ({behind:.2e})")
        if self.volume() < 0.0:
            problems.append("negative volume (faces not outward-oriented)")
        return problems

    @classmethod
    def from_box(cls, box: Box3D) -> "ConvexPolytope":
        return cls(
            vertices=tuple(tuple(c) for c in corners_from_params(box_params(box))),
            faces=tuple(FACES),
        )


def _newell_normal(pts: np.ndarray):
    n = np.zeros(3)
    for i in range(len(pts)):
        a = pts[i]
        b = pts[(i + 1) % len(pts)]
        n += np.cross(a, b)
    norm = np.linalg.norm(n)
    if norm < 1e-15:
        return None
    return n / norm


def intersection_polytope(a: Box3D, b: Box3D) -> ConvexPolytope:
    """The intersection solid as an inspectable polytope (pure-Python path).

    Vertices shared between faces are merged on exact coordinates; volume
    matches ``intersection_volume`` to float precision.
    """
    raw_faces = intersection_faces(box_params(a), box_params(b))
    index: dict[tuple[float, float, float], int] = {}
    vertices: list[tuple[float, float, float]] = []
    loops = []
    for poly in raw_faces:
        loop = []
        for v in poly:
            if v not in index:
                index[v] = len(vertices)
                vertices.append(v)
            loop.append(index[v])
        # Drop consecutive duplicates produced by on-plane crossings.
        cleaned = [loop[i] for i in range(len(loop)) if loop[i] != loop[i - 1]]
        if len(cleaned) >= 3:
            loops.append(tuple(cleaned))
    return ConvexPolytope(vertices=tuple(vertices), faces=tuple(loops))
