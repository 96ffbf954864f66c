import math

import numpy as np
import pytest

from ground3d.geometry import (
    center_distance,
    contains,
    is_above,
    is_near,
    nearest,
    nearest_point,
)
from ground3d.scene import AnnotatedObject, Box3D, Scene

from conftest import random_box


def test_center_distance():
    a = Box3D((0, 0, 0), (1, 1, 1))
    b = Box3D((3, 4, 0), (1, 1, 1))
    assert center_distance(a, b) == pytest.approx(5.0)


class TestNearest:
    def test_single_candidate(self, kitchen_scene):
        stove = kitchen_scene.object_by_id(0)
        hit = nearest(stove, kitchen_scene, category="refrigerator")
        assert hit.object_id == 3

    def test_picks_geometric_nearest(self, kitchen_scene):
        stove = kitchen_scene.object_by_id(0)
        assert nearest(stove, kitchen_scene, category="trash_can").object_id == 1

    def test_no_candidate(self, kitchen_scene):
        stove = kitchen_scene.object_by_id(0)
        assert nearest(stove, kitchen_scene, category="bathtub") is None

    def test_tie_breaks_to_lowest_id(self):
        box = Box3D((0, 0, 0.5), (1, 1, 1))
        objs = (
            AnnotatedObject(0, "stove", box),
            AnnotatedObject(5, "trash_can", Box3D((2.0, 0, 0.5), (1, 1, 1))),
            AnnotatedObject(2, "trash_can", Box3D((-2.0, 0, 0.5), (1, 1, 1))),
        )
        scene = Scene("tie", objs)
        assert nearest(objs[0], scene, category="trash_can").object_id == 2

    def test_brute_force_oracle(self):
        rng = np.random.default_rng(21)
        objs = tuple(
            AnnotatedObject(i, f"cat{i % 7}", random_box(rng, center_span=5.0))
            for i in range(50)
        )
        scene = Scene("big", objs)
        for anchor in objs[:10]:
            for category in (None, "cat3"):
                hit = nearest(anchor, scene, category=category)
                candidates = [
                    o
                    for o in objs
                    if o.object_id != anchor.object_id
                    and (category is None or o.category == category)
                ]
                best = min(
                    candidates,
                    key=lambda o: (
                        math.dist(anchor.box.center, o.box.center),
                        o.object_id,
                    ),
                )
                assert hit.object_id == best.object_id

    def test_nearest_point(self, kitchen_scene):
        hit = nearest_point((0.9, 0.1, 0.3), kitchen_scene, category="trash_can")
        assert hit.object_id == 1


class TestAbove:
    def test_same_footprint(self):
        low = Box3D((0, 0, 0.0), (1, 1, 1))
        high = Box3D((0, 0, 2.0), (1, 1, 1))
        assert is_above(high, low)
        assert not is_above(low, high)

    def test_resting_contact(self, kitchen_scene):
        book = kitchen_scene.object_by_id(5).box
        table = kitchen_scene.object_by_id(4).box
        assert is_above(book, table)

    def test_disjoint_footprints(self):
        a = Box3D((5, 5, 2.0), (1, 1, 1))
        b = Box3D((0, 0, 0.0), (1, 1, 1))
        assert not is_above(a, b)


def test_is_near():
    a = Box3D((0, 0, 0), (1, 1, 1))
    b = Box3D((2, 0, 0), (1, 1, 1))
    assert is_near(a, b, 2.0)
    assert not is_near(a, b, 1.9)


def test_contains():
    outer = Box3D((0, 0, 0), (2, 2, 2))
    inner = Box3D((0.2, 0, 0), (0.5, 0.5, 0.5), (0.4, 0.1, 0.0))
    assert contains(outer, inner)
    assert not contains(inner, outer)
    assert not contains(outer, Box3D((1.5, 0, 0), (1, 1, 1)))
