"""File formats: scene JSON documents and JSON Lines record/prediction streams.

Numbers are written with Python's repr round-trip precision, field order is
canonical, and ``save`` followed by ``load`` is the identity for all four
record kinds.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Iterable, Mapping, Optional

from .scene import (
    AnnotatedObject,
    Box3D,
    PredictionSet,
    QALRecord,
    Scene,
    SchemaError,
)


class FormatError(ValueError):
    """A file failed to parse or violated the schema.

    ``line`` is 1-based for JSONL streams and None for whole-document files.
    """

    def __init__(self, path, message: str, line: Optional[int] = None):
        self.path = str(path)
        self.line = line
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")


def scene_to_dict(scene: Scene) -> dict:
    out: dict = {"scene_id": scene.scene_id}
    if scene.room_bounds is not None:
        out["room_bounds"] = scene.room_bounds.to_dict()
    out["objects"] = [
        {"id": obj.object_id, "category": obj.category, "box": obj.box.to_dict()}
        for obj in scene.objects
    ]
    return out


def scene_from_dict(data: dict, source: str = "<scene>") -> Scene:
    if not isinstance(data, dict):
        raise FormatError(source, f"scene must be a JSON object, got {type(data).__name__}")
    if "scene_id" not in data:
        raise FormatError(source, "scene missing field: scene_id")
    objects = []
    for i, entry in enumerate(data.get("objects", [])):
        try:
            objects.append(
                AnnotatedObject(
                    object_id=entry["id"],
                    category=entry["category"],
                    box=Box3D.from_dict(entry["box"]),
                )
            )
        except (KeyError, TypeError) as exc:
            raise FormatError(source, f"objects[{i}]: missing or malformed field ({exc})")
        except SchemaError as exc:
            raise FormatError(source, f"objects[{i}]: {exc}")
    bounds = None
    if data.get("room_bounds") is not None:
        try:
            bounds = Box3D.from_dict(data["room_bounds"])
        except SchemaError as exc:
            raise FormatError(source, f"room_bounds: {exc}")
    try:
        return Scene(scene_id=data["scene_id"], objects=tuple(objects), room_bounds=bounds)
    except SchemaError as exc:
        raise FormatError(source, str(exc))


def load_scene(path) -> Scene:
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(path, f"invalid JSON: {exc}", line=exc.lineno)
    return scene_from_dict(data, source=str(path))


def save_scene(scene: Scene, path) -> None:
    _atomic_write(path, json.dumps(scene_to_dict(scene), indent=2) + "\n")


def load_scene_dir(path) -> dict[str, Scene]:
    """Load every ``*.json`` scene in a directory, keyed by scene_id."""
    path = Path(path)
    if not path.is_dir():
        raise FormatError(path, "not a directory")
    scenes: dict[str, Scene] = {}
    for entry in sorted(path.glob("*.json")):
        scene = load_scene(entry)
        if scene.scene_id in scenes:
            raise FormatError(entry, f"duplicate scene_id {scene.scene_id}")
        scenes[scene.scene_id] = scene
    return scenes


def _load_jsonl(path, parse, kind: str):
    path = Path(path)
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(path, f"invalid JSON in {kind}: {exc}", line=lineno)
            try:
                out.append(parse(data))
            except SchemaError as exc:
                raise FormatError(path, f"{kind}: {exc}", line=lineno)
    return out


def _save_jsonl(path, dicts: Iterable[dict]) -> None:
    _atomic_write(path, "".join(json.dumps(d) + "\n" for d in dicts))


def load_records(path, scenes: Optional[Mapping[str, Scene]] = None) -> list[QALRecord]:
    """Load a records.jsonl stream.

    When ``scenes`` is given, every record must reference a known scene and
    all of its target ids must resolve there.
    """
    records = _load_jsonl(path, QALRecord.from_dict, "record")
    if scenes is not None:
        for i, rec in enumerate(records, start=1):
            scene = scenes.get(rec.scene_id)
            if scene is None:
                raise FormatError(path, f"record {rec.record_id}: unknown scene_id {rec.scene_id}")
            for oid in rec.target_object_ids:
                if not scene.has_object(oid):
                    raise FormatError(
                        path,
                        f"record {rec.record_id}: unresolved target object_id {oid} "
                        f"in scene {rec.scene_id}",
                    )
    return records


def save_records(records: Iterable[QALRecord], path) -> None:
    _save_jsonl(path, (r.to_dict() for r in records))


def load_predictions(path) -> list[PredictionSet]:
    return _load_jsonl(path, PredictionSet.from_dict, "prediction")


def save_predictions(preds: Iterable[PredictionSet], path) -> None:
    _save_jsonl(path, (p.to_dict() for p in preds))


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)
