import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ground3d.scene import (
    DIRECTIVE_TEXT_AND_BOXES,
    DIRECTIVE_TEXT_ONLY,
    AnnotatedObject,
    Box3D,
    GroundedBox,
    PredictionSet,
    QALRecord,
    ReasoningType,
    Scene,
    SchemaError,
)

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
angles = st.floats(-50.0, 50.0, allow_nan=False, allow_infinity=False)
sizes = st.floats(1e-3, 1e3, allow_nan=False, allow_infinity=False)


class TestBox3D:
    def test_rejects_nonpositive_size(self):
        with pytest.raises(SchemaError):
            Box3D((0, 0, 0), (1.0, 0.0, 1.0))
        with pytest.raises(SchemaError):
            Box3D((0, 0, 0), (1.0, -0.5, 1.0))

    def test_volume(self):
        assert Box3D((0, 0, 0), (2.0, 3.0, 0.5)).volume == pytest.approx(3.0)

    @given(st.tuples(angles, angles, angles))
    @settings(max_examples=100, deadline=None)
    def test_normalization_idempotent(self, euler):
        box = Box3D((0, 0, 0), (1, 1, 1), euler)
        renormalized = Box3D((0, 0, 0), (1, 1, 1), box.euler)
        assert renormalized.euler == box.euler
        for angle in box.euler:
            assert -math.pi < angle <= math.pi

    def test_pi_normalizes_to_pi(self):
        box = Box3D((0, 0, 0), (1, 1, 1), (-math.pi, math.pi, 3 * math.pi))
        assert box.euler == (math.pi, math.pi, math.pi)


class TestScene:
    def test_duplicate_object_id_message(self):
        box = Box3D((0, 0, 0), (1, 1, 1))
        objs = (
            AnnotatedObject(3, "chair", box),
            AnnotatedObject(3, "table", box),
        )
        with pytest.raises(SchemaError, match="duplicate object_id 3"):
            Scene("s1", objs)

    def test_center_outside_room_bounds(self):
        bounds = Box3D((0, 0, 1.0), (4.0, 4.0, 2.0))
        inside = AnnotatedObject(0, "chair", Box3D((1.0, 1.0, 0.5), (1, 1, 1)))
        outside = AnnotatedObject(1, "chair", Box3D((5.0, 0.0, 0.5), (1, 1, 1)))
        Scene("ok", (inside,), room_bounds=bounds)
        with pytest.raises(SchemaError, match="object_id 1"):
            Scene("bad", (inside, outside), room_bounds=bounds)

    def test_category_must_be_lowercase_token(self):
        with pytest.raises(SchemaError):
            AnnotatedObject(0, "Trash Can", Box3D((0, 0, 0), (1, 1, 1)))
        with pytest.raises(SchemaError):
            AnnotatedObject(0, "", Box3D((0, 0, 0), (1, 1, 1)))

    def test_object_lookup(self, kitchen_scene):
        assert kitchen_scene.object_by_id(3).category == "refrigerator"
        with pytest.raises(KeyError):
            kitchen_scene.object_by_id(99)


class TestReasoningType:
    def test_exactly_five_stable_names(self):
        assert sorted(t.value for t in ReasoningType) == [
            "emotional",
            "functional",
            "logical",
            "safety",
            "spatial",
        ]

    def test_unknown_name_rejected(self):
        with pytest.raises(SchemaError):
            ReasoningType.from_name("numerical")


class TestQALRecord:
    def _make(self, **kwargs):
        base = dict(
            record_id="r0",
            scene_id="s0",
            question="Where is the stove in this 3D scene?",
            reasoning_type=ReasoningType.SPATIAL,
            answer_text="There.",
            target_object_ids=(1,),
            output_directive=DIRECTIVE_TEXT_AND_BOXES,
        )
        base.update(kwargs)
        return QALRecord(**base)

    def test_valid(self):
        rec = self._make()
        assert rec.target_object_ids == (1,)

    def test_box_directive_requires_targets(self):
        with pytest.raises(SchemaError):
            self._make(target_object_ids=())
        self._make(target_object_ids=(), output_directive=DIRECTIVE_TEXT_ONLY)

    def test_unknown_directive(self):
        with pytest.raises(SchemaError):
            self._make(output_directive="Answer however you like.")


class TestPredictions:
    def test_confidence_range(self):
        box = Box3D((0, 0, 0), (1, 1, 1))
        GroundedBox(box, 0.0)
        GroundedBox(box, 1.0)
        with pytest.raises(SchemaError):
            GroundedBox(box, 1.5)

    def test_serialization_sorts_by_confidence(self):
        box = Box3D((0, 0, 0), (1, 1, 1))
        ps = PredictionSet(
            record_id="r0",
            boxes=(GroundedBox(box, 0.2), GroundedBox(box, 0.9), GroundedBox(box, 0.5)),
        )
        confs = [b["confidence"] for b in ps.to_dict()["boxes"]]
        assert confs == [0.9, 0.5, 0.2]

    def test_record_id_required(self):
        with pytest.raises(SchemaError):
            PredictionSet(record_id="")
