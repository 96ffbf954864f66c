import math

import numpy as np
import pytest

from ground3d import geometry
from ground3d.geometry import (
    ConvexPolytope,
    HalfSpace,
    corners,
    intersection_polytope,
    intersection_volume,
    iou,
    iou_axis_aligned,
    iou_matrix,
)
from ground3d.geometry.kernel import available_backends
from ground3d.rotation import euler_to_matrix
from ground3d.scene import Box3D

from conftest import interval_iou, monte_carlo_iou, random_box

UNIT = Box3D((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))
YAWED = Box3D((0.0, 0.0, 0.0), (1.0, 1.0, 1.0), (math.pi / 4, 0.0, 0.0))


class TestCorners:
    def test_unit_cube(self):
        pts = corners(UNIT)
        expected = {(sx / 2, sy / 2, sz / 2) for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)}
        assert {tuple(p) for p in np.round(pts, 12)} == expected

    def test_yaw_quarter_turn_swaps_extents(self):
        box = Box3D((0, 0, 0), (2.0, 1.0, 1.0), (math.pi / 2, 0, 0))
        pts = corners(box)
        spans = pts.max(axis=0) - pts.min(axis=0)
        assert spans == pytest.approx([1.0, 2.0, 1.0], abs=1e-12)

    def test_centroid_is_center(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            box = random_box(rng)
            assert corners(box).mean(axis=0) == pytest.approx(box.center, abs=1e-12)


class TestIntersectionVolume:
    def test_self_intersection_is_volume(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            box = random_box(rng)
            assert intersection_volume(box, box) == pytest.approx(box.volume, rel=1e-12)

    def test_disjoint_is_zero(self):
        far = Box3D((10.0, 0.0, 0.0), (1.0, 1.0, 1.0))
        assert intersection_volume(UNIT, far) == 0.0

    def test_quarter_yaw_octagon_prism(self):
        # Co-centered unit cubes, one yawed pi/4: octagon cross-section of
        # area 2(sqrt(2)-1), prism height 1.
        expected = 2.0 * (math.sqrt(2.0) - 1.0)
        assert intersection_volume(UNIT, YAWED) == pytest.approx(expected, abs=1e-12)
        mc = monte_carlo_iou(UNIT, YAWED, n_samples=10_000_000, seed=1)
        mc_inter = mc * (2 * UNIT.volume) / (1 + mc)  # invert iou -> intersection
        assert mc_inter == pytest.approx(expected, abs=2e-3)

    def test_touching_faces_zero(self):
        kiss = Box3D((1.0, 0.0, 0.0), (1.0, 1.0, 1.0))
        assert intersection_volume(UNIT, kiss) == 0.0

    def test_contained_box(self):
        inner = Box3D((0.1, 0.0, 0.0), (0.2, 0.3, 0.4), (0.3, 0.2, 0.1))
        assert intersection_volume(UNIT, inner) == pytest.approx(inner.volume, rel=1e-12)
        assert intersection_volume(inner, UNIT) == pytest.approx(inner.volume, rel=1e-12)


class TestIoU:
    def test_identical(self):
        assert iou(UNIT, UNIT) == pytest.approx(1.0, abs=1e-12)

    def test_quarter_yaw_fixture(self):
        assert iou(UNIT, YAWED) == pytest.approx(1.0 / math.sqrt(2.0), abs=1e-9)

    def test_half_offset_fixture(self):
        shifted = Box3D((0.5, 0.0, 0.0), (1.0, 1.0, 1.0))
        assert iou(UNIT, shifted) == pytest.approx(1.0 / 3.0, abs=1e-12)
        assert interval_iou(UNIT, shifted) == pytest.approx(1.0 / 3.0, abs=1e-15)

    def test_symmetry(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            a, b = random_box(rng), random_box(rng)
            assert iou(a, b) == pytest.approx(iou(b, a), abs=1e-12)

    def test_rigid_motion_invariance(self):
        # A shared yaw + translation composes cleanly in the euler
        # parameterization, giving an exactly representable rigid motion.
        rng = np.random.default_rng(6)
        for _ in range(25):
            a, b = random_box(rng), random_box(rng)
            base = iou(a, b)
            shift = rng.uniform(-5, 5, 3)
            yaw = rng.uniform(-np.pi, np.pi)
            rz = euler_to_matrix(yaw, 0.0, 0.0)

            def moved(box):
                return Box3D(
                    center=tuple(rz @ np.asarray(box.center) + shift),
                    size=box.size,
                    euler=(box.euler[0] + yaw, box.euler[1], box.euler[2]),
                )

            assert iou(moved(a), moved(b)) == pytest.approx(base, abs=1e-9)

    def test_bounds_and_equality(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            a, b = random_box(rng), random_box(rng)
            v = iou(a, b)
            assert 0.0 <= v <= 1.0
        nudged = Box3D((0.02, 0.0, 0.0), UNIT.size)
        assert iou(UNIT, nudged) < 1.0

    def test_axis_aligned_reduction(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            a = Box3D(rng.uniform(-1, 1, 3), rng.uniform(0.2, 2.5, 3))
            b = Box3D(rng.uniform(-1, 1, 3), rng.uniform(0.2, 2.5, 3))
            assert iou(a, b) == pytest.approx(interval_iou(a, b), abs=1e-9)
            assert iou_axis_aligned(a, b) == pytest.approx(interval_iou(a, b), abs=1e-12)

    def test_monte_carlo_agreement_sample(self):
        # The full 100-pair run is acceptance criterion 1; spot-check here.
        rng = np.random.default_rng(9)
        for i in range(20):
            a, b = random_box(rng), random_box(rng)
            assert iou(a, b) == pytest.approx(
                monte_carlo_iou(a, b, n_samples=200_000, seed=i), abs=1e-2
            )


class TestIoUMatrix:
    def test_empty_shapes(self):
        assert iou_matrix([], [UNIT]).shape == (0, 1)
        assert iou_matrix([UNIT], []).shape == (1, 0)

    def test_single_identity(self):
        mat = iou_matrix([UNIT], [UNIT])
        assert mat.shape == (1, 1)
        assert mat[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_elementwise_oracle(self):
        rng = np.random.default_rng(10)
        preds = [random_box(rng) for _ in range(5)]
        gts = [random_box(rng) for _ in range(7)]
        mat = iou_matrix(preds, gts)
        for i in range(5):
            for j in range(7):
                assert mat[i, j] == pytest.approx(iou(preds[i], gts[j]), abs=1e-12)


class TestBackends:
    def test_backend_reported(self):
        assert geometry.kernel_backend() in ("compiled", "pure-python")

    def test_parity(self):
        backends = available_backends()
        if len(backends) < 2:
            pytest.skip("compiled backend not built")
        rng = np.random.default_rng(11)
        boxes_a = [random_box(rng) for _ in range(200)]
        boxes_b = [random_box(rng) for _ in range(200)]
        a = geometry.box_params_batch(boxes_a)
        b = geometry.box_params_batch(boxes_b)
        outs = {}
        for name, module in backends.items():
            out = np.empty(200)
            module.iou_pairs(a, b, out)
            outs[name] = out
        assert outs["compiled"] == pytest.approx(outs["pure-python"], abs=1e-12)


class TestPolytopes:
    def test_box_polytope_valid(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            poly = ConvexPolytope.from_box(random_box(rng))
            assert poly.validate() == []

    def test_box_polytope_volume(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            box = random_box(rng)
            assert ConvexPolytope.from_box(box).volume() == pytest.approx(box.volume, rel=1e-12)

    def test_intersection_polytope_consistent(self):
        rng = np.random.default_rng(14)
        checked = 0
        for _ in range(40):
            a, b = random_box(rng), random_box(rng)
            vol = intersection_volume(a, b)
            if vol <= 1e-6:
                continue
            poly = intersection_polytope(a, b)
            assert poly.validate() == []
            assert poly.volume() == pytest.approx(vol, rel=1e-9)
            checked += 1
        assert checked >= 5

    def test_halfspace_requires_unit_normal(self):
        HalfSpace((0.0, 0.0, 1.0), 2.0)
        with pytest.raises(ValueError):
            HalfSpace((0.0, 0.0, 2.0), 2.0)
