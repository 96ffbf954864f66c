import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ground3d.annotation import GenConfig, generate_dataset, make_scene, make_scenes
from ground3d.io import (
    FormatError,
    load_predictions,
    load_records,
    load_scene,
    load_scene_dir,
    save_predictions,
    save_records,
    save_scene,
)
from ground3d.scene import (
    Box3D,
    GroundedBox,
    PredictionSet,
    QALRecord,
    ReasoningType,
    Scene,
)

vec = st.tuples(
    st.floats(-100, 100, allow_nan=False),
    st.floats(-100, 100, allow_nan=False),
    st.floats(-100, 100, allow_nan=False),
)
pos_vec = st.tuples(st.floats(0.01, 50), st.floats(0.01, 50), st.floats(0.01, 50))
boxes = st.builds(Box3D, center=vec, size=pos_vec, euler=vec)


class TestSceneFiles:
    def test_round_trip_identity(self, tmp_path):
        scene = make_scene("scene0000", seed=42)
        path = tmp_path / "scene0000.json"
        save_scene(scene, path)
        assert load_scene(path) == scene

    def test_round_trip_byte_identical(self, tmp_path):
        scene = make_scene("scene0001", seed=7)
        p1 = tmp_path / "a.json"
        p2 = tmp_path / "b.json"
        save_scene(scene, p1)
        save_scene(load_scene(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_two_object_file(self, tmp_path):
        doc = {
            "scene_id": "s0",
            "objects": [
                {"id": 0, "category": "chair", "box": {"center": [0, 0, 0.4], "size": [1, 1, 0.8]}},
                {"id": 1, "category": "table", "box": {"center": [1, 0, 0.4], "size": [1, 1, 0.8]}},
            ],
        }
        path = tmp_path / "s0.json"
        path.write_text(json.dumps(doc))
        scene = load_scene(path)
        assert len(scene) == 2 and scene.object_by_id(1).category == "table"

    def test_duplicate_id_reports_it(self, tmp_path):
        doc = {
            "scene_id": "s0",
            "objects": [
                {"id": 3, "category": "chair", "box": {"center": [0, 0, 0], "size": [1, 1, 1]}},
                {"id": 3, "category": "table", "box": {"center": [1, 0, 0], "size": [1, 1, 1]}},
            ],
        }
        path = tmp_path / "dup.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(FormatError, match="duplicate object_id 3"):
            load_scene(path)

    def test_malformed_field_contextualized(self, tmp_path):
        doc = {
            "scene_id": "s0",
            "objects": [{"id": 0, "category": "chair", "box": {"center": [0, 0, 0]}}],
        }
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(FormatError, match=r"objects\[0\]"):
            load_scene(path)

    def test_scene_dir(self, tmp_path):
        for i in range(3):
            scene = make_scene(f"scene{i:04d}", seed=1)
            save_scene(scene, tmp_path / f"{scene.scene_id}.json")
        scenes = load_scene_dir(tmp_path)
        assert sorted(scenes) == ["scene0000", "scene0001", "scene0002"]


class TestRecordStreams:
    def test_empty_stream(self, tmp_path):
        path = tmp_path / "records.jsonl"
        save_records([], path)
        assert path.read_text() == ""
        assert load_records(path) == []

    def test_round_trip(self, tmp_path):
        scenes = make_scenes(3, seed=2)
        result = generate_dataset(
            scenes, GenConfig(counts={t: 5 for t in ReasoningType}, seed=2)
        )
        path = tmp_path / "records.jsonl"
        save_records(result.records, path)
        loaded = load_records(path, scenes={s.scene_id: s for s in scenes})
        assert tuple(loaded) == result.records

    def test_dangling_target_rejected(self, tmp_path):
        scene = Scene(
            "s0",
            (
                __import__("ground3d.scene", fromlist=["AnnotatedObject"]).AnnotatedObject(
                    0, "chair", Box3D((0, 0, 0.4), (1, 1, 0.8))
                ),
            ),
        )
        rec = QALRecord(
            record_id="r0",
            scene_id="s0",
            question="Where is the chair in this 3D scene?",
            reasoning_type=ReasoningType.SPATIAL,
            answer_text="x",
            target_object_ids=(7,),
        )
        path = tmp_path / "records.jsonl"
        save_records([rec], path)
        with pytest.raises(FormatError, match="unresolved target object_id 7"):
            load_records(path, scenes={"s0": scene})

    def test_malformed_line_number(self, tmp_path):
        path = tmp_path / "records.jsonl"
        rec = QALRecord(
            record_id="r0",
            scene_id="s0",
            question="q?",
            reasoning_type=ReasoningType.SPATIAL,
            answer_text="a",
            target_object_ids=(0,),
        )
        lines = [json.dumps(rec.to_dict())] * 2 + ["{not json"]
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(FormatError) as err:
            load_records(path)
        assert err.value.line == 3


class TestPredictionStreams:
    @given(
        gboxes=st.lists(
            st.builds(
                GroundedBox,
                box=boxes,
                confidence=st.floats(0, 1, allow_nan=False),
                label=st.one_of(st.none(), st.text(min_size=1, max_size=8)),
            ),
            max_size=4,
        ),
        answer=st.one_of(st.none(), st.text(max_size=20)),
    )
    @settings(max_examples=30, deadline=None)
    def test_round_trip_property(self, gboxes, answer, tmp_path_factory):
        ps = PredictionSet(record_id="r0", boxes=tuple(gboxes), answer_text=answer)
        path = tmp_path_factory.mktemp("preds") / "preds.jsonl"
        save_predictions([ps], path)
        (loaded,) = load_predictions(path)
        assert loaded.record_id == ps.record_id
        assert loaded.answer_text == ps.answer_text
        assert sorted(loaded.boxes, key=lambda g: -g.confidence) == sorted(
            ps.boxes, key=lambda g: -g.confidence
        )
