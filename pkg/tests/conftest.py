import numpy as np
import pytest

from ground3d.rotation import euler_to_matrix
from ground3d.scene import AnnotatedObject, Box3D, Scene


def random_box(rng, center_span=2.0, extent_low=0.1, extent_high=3.0):
    return Box3D(
        center=tuple(rng.uniform(-center_span, center_span, 3)),
        size=tuple(rng.uniform(extent_low, extent_high, 3)),
        euler=tuple(rng.uniform(-np.pi, np.pi, 3)),
    )


def monte_carlo_iou(a: Box3D, b: Box3D, n_samples: int, seed: int = 0) -> float:
    """Oracle IoU: uniform samples in box a, containment test against b."""
    rng = np.random.default_rng(seed)
    ra = euler_to_matrix(*a.euler)
    rb = euler_to_matrix(*b.euler)
    local = rng.uniform(-0.5, 0.5, (n_samples, 3)) * np.asarray(a.size)
    points = np.asarray(a.center) + local @ ra.T
    in_b = np.all(np.abs((points - np.asarray(b.center)) @ rb) <= np.asarray(b.size) / 2, axis=1)
    inter = in_b.mean() * a.volume
    union = a.volume + b.volume - inter
    return inter / union


def interval_iou(a: Box3D, b: Box3D) -> float:
    """Oracle axis-aligned IoU for euler = 0 boxes, written independently."""
    inter = 1.0
    for ax in range(3):
        lo = max(a.center[ax] - a.size[ax] / 2, b.center[ax] - b.size[ax] / 2)
        hi = min(a.center[ax] + a.size[ax] / 2, b.center[ax] + b.size[ax] / 2)
        if hi <= lo:
            return 0.0
        inter *= hi - lo
    return inter / (a.volume + b.volume - inter)


@pytest.fixture
def kitchen_scene():
    """Hand-built fixture: stove, two bins at known distances, extras."""
    objs = (
        AnnotatedObject(0, "stove", Box3D((0.0, 0.0, 0.45), (0.6, 0.6, 0.9))),
        AnnotatedObject(1, "trash_can", Box3D((1.0, 0.0, 0.25), (0.35, 0.35, 0.5))),
        AnnotatedObject(2, "trash_can", Box3D((3.0, 0.0, 0.25), (0.35, 0.35, 0.5))),
        AnnotatedObject(3, "refrigerator", Box3D((0.0, 2.0, 0.9), (0.7, 0.7, 1.8))),
        AnnotatedObject(4, "table", Box3D((2.0, 2.0, 0.375), (1.4, 0.9, 0.75))),
        AnnotatedObject(5, "book", Box3D((2.0, 2.0, 0.77), (0.2, 0.28, 0.04))),
        AnnotatedObject(6, "plant", Box3D((-1.5, 1.0, 0.3), (0.35, 0.35, 0.6))),
        AnnotatedObject(7, "shelf", Box3D((-2.0, 0.0, 1.5), (0.8, 0.25, 0.35))),
        AnnotatedObject(8, "shelf", Box3D((-2.0, 1.0, 0.4), (0.8, 0.25, 0.35))),
        AnnotatedObject(9, "knife", Box3D((0.5, 0.5, 0.92), (0.25, 0.04, 0.03))),
    )
    return Scene(scene_id="kitchen0", objects=objs)
