"""Core value types: boxes, scenes, question records, and predictions.

All types are immutable after construction and validate their invariants in
``__post_init__``, so any instance in circulation is safe to share between
workers.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .rotation import normalize_angle

# The three output directives a question record may carry.  Generated
# reasoning records always use DIRECTIVE_TEXT_AND_BOXES.
DIRECTIVE_BOXES_ONLY = "Please answer the question only with output 3D box prediction(s)."
DIRECTIVE_TEXT_ONLY = (
    "Please answer the question only with text, do not output 3D box prediction(s)."
)
DIRECTIVE_TEXT_AND_BOXES = "Please answer the question with text and output 3D box prediction(s)."

OUTPUT_DIRECTIVES = frozenset(
    {DIRECTIVE_BOXES_ONLY, DIRECTIVE_TEXT_ONLY, DIRECTIVE_TEXT_AND_BOXES}
)

_CATEGORY_RE = re.compile(r"^[a-z0-9_]+$")


def directive_requires_boxes(directive: str) -> bool:
    return directive != DIRECTIVE_TEXT_ONLY


class SchemaError(ValueError):
    """Raised when a value violates the data-model invariants."""


def _vec3(value, name: str) -> tuple[float, float, float]:
    try:
        x, y, z = value
    except (TypeError, ValueError):
        raise SchemaError(f"{name} must have exactly 3 components, got {value!r}")
    out = (float(x), float(y), float(z))
    if not all(math.isfinite(v) for v in out):
        raise SchemaError(f"{name} must be finite, got {out}")
    return out


@dataclass(frozen=True)
class Box3D:
    """Oriented 3D box: center (m), size (m), intrinsic yaw/pitch/roll (rad).

    Sizes must be strictly positive; angles are normalized to (-pi, pi] at
    construction, which makes normalization idempotent by definition.
    """

    center: tuple[float, float, float]
    size: tuple[float, float, float]
    euler: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "center", _vec3(self.center, "center"))
        size = _vec3(self.size, "size")
        if min(size) <= 0.0:
            raise SchemaError(f"size components must be strictly positive, got {size}")
        object.__setattr__(self, "size", size)
        euler = _vec3(self.euler, "euler")
        object.__setattr__(self, "euler", tuple(normalize_angle(a) for a in euler))

    @property
    def volume(self) -> float:
        sx, sy, sz = self.size
        return sx * sy * sz

    @property
    def is_axis_aligned(self) -> bool:
        return self.euler == (0.0, 0.0, 0.0)

    def to_dict(self) -> dict:
        return {
            "center": list(self.center),
            "size": list(self.size),
            "euler": list(self.euler),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Box3D":
        if not isinstance(data, dict):
            raise SchemaError(f"box must be an object, got {type(data).__name__}")
        missing = {"center", "size"} - data.keys()
        if missing:
            raise SchemaError(f"box missing fields: {sorted(missing)}")
        return cls(
            center=_vec3(data["center"], "box.center"),
            size=_vec3(data["size"], "box.size"),
            euler=_vec3(data.get("euler", (0.0, 0.0, 0.0)), "box.euler"),
        )


@dataclass(frozen=True)
class AnnotatedObject:
    """A labeled object instance inside a scene."""

    object_id: int
    category: str
    box: Box3D

    def __post_init__(self):
        if not isinstance(self.object_id, int) or self.object_id < 0:
            raise SchemaError(f"object_id must be a non-negative integer, got {self.object_id!r}")
        if not self.category or not _CATEGORY_RE.match(self.category):
            raise SchemaError(
                f"category must be a non-empty lowercase token, got {self.category!r}"
            )


@dataclass(frozen=True)
class Scene:
    """An ordered collection of annotated objects, optionally with room bounds."""

    scene_id: str
    objects: tuple[AnnotatedObject, ...]
    room_bounds: Optional[Box3D] = None

    def __post_init__(self):
        if not self.scene_id:
            raise SchemaError("scene_id must be non-empty")
        object.__setattr__(self, "objects", tuple(self.objects))
        seen: set[int] = set()
        for obj in self.objects:
            if obj.object_id in seen:
                raise SchemaError(f"duplicate object_id {obj.object_id} in scene {self.scene_id}")
            seen.add(obj.object_id)
        if self.room_bounds is not None:
            if not self.room_bounds.is_axis_aligned:
                raise SchemaError("room_bounds must be axis-aligned (euler = 0)")
            for obj in self.objects:
                if not _center_inside(obj.box.center, self.room_bounds):
                    raise SchemaError(
                        f"object_id {obj.object_id} center {obj.box.center} "
                        f"outside room_bounds of scene {self.scene_id}"
                    )

    def __iter__(self) -> Iterator[AnnotatedObject]:
        return iter(self.objects)

    def __len__(self) -> int:
        return len(self.objects)

    def object_by_id(self, object_id: int) -> AnnotatedObject:
        for obj in self.objects:
            if obj.object_id == object_id:
                return obj
        raise KeyError(f"object_id {object_id} not in scene {self.scene_id}")

    def has_object(self, object_id: int) -> bool:
        return any(obj.object_id == object_id for obj in self.objects)

    def objects_of_category(self, category: str) -> list[AnnotatedObject]:
        return [obj for obj in self.objects if obj.category == category]


def _center_inside(center: tuple[float, float, float], bounds: Box3D) -> bool:
    for c, bc, bs in zip(center, bounds.center, bounds.size):
        if abs(c - bc) > bs / 2.0 + 1e-9:
            return False
    return True


class ReasoningType(enum.Enum):
    SPATIAL = "spatial"
    FUNCTIONAL = "functional"
    LOGICAL = "logical"
    EMOTIONAL = "emotional"
    SAFETY = "safety"

    @classmethod
    def from_name(cls, name: str) -> "ReasoningType":
        try:
            return cls(name)
        except ValueError:
            raise SchemaError(
                f"unknown reasoning_type {name!r}; expected one of "
                f"{sorted(t.value for t in cls)}"
            )


@dataclass(frozen=True)
class QALRecord:
    """One question-answer-location row of a dataset."""

    record_id: str
    scene_id: str
    question: str
    reasoning_type: ReasoningType
    answer_text: str
    target_object_ids: tuple[int, ...]
    output_directive: str = DIRECTIVE_TEXT_AND_BOXES

    def __post_init__(self):
        if not self.record_id:
            raise SchemaError("record_id must be non-empty")
        if not self.scene_id:
            raise SchemaError("scene_id must be non-empty")
        if not self.question:
            raise SchemaError("question must be non-empty")
        if not isinstance(self.reasoning_type, ReasoningType):
            object.__setattr__(
                self, "reasoning_type", ReasoningType.from_name(self.reasoning_type)
            )
        object.__setattr__(self, "target_object_ids", tuple(int(i) for i in self.target_object_ids))
        if self.output_directive not in OUTPUT_DIRECTIVES:
            raise SchemaError(f"unknown output_directive {self.output_directive!r}")
        if directive_requires_boxes(self.output_directive) and not self.target_object_ids:
            raise SchemaError(
                f"record {self.record_id}: target_object_ids must be non-empty "
                "for a box-producing directive"
            )

    def to_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "scene_id": self.scene_id,
            "question": self.question,
            "reasoning_type": self.reasoning_type.value,
            "answer_text": self.answer_text,
            "target_object_ids": list(self.target_object_ids),
            "output_directive": self.output_directive,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QALRecord":
        missing = {
            "record_id",
            "scene_id",
            "question",
            "reasoning_type",
            "answer_text",
            "target_object_ids",
            "output_directive",
        } - data.keys()
        if missing:
            raise SchemaError(f"record missing fields: {sorted(missing)}")
        return cls(
            record_id=data["record_id"],
            scene_id=data["scene_id"],
            question=data["question"],
            reasoning_type=ReasoningType.from_name(data["reasoning_type"]),
            answer_text=data["answer_text"],
            target_object_ids=tuple(data["target_object_ids"]),
            output_directive=data["output_directive"],
        )


@dataclass(frozen=True)
class GroundedBox:
    """A scored box prediction."""

    box: Box3D
    confidence: float
    label: Optional[str] = None

    def __post_init__(self):
        conf = float(self.confidence)
        if not (0.0 <= conf <= 1.0):
            raise SchemaError(f"confidence must be in [0, 1], got {conf}")
        object.__setattr__(self, "confidence", conf)

    def to_dict(self) -> dict:
        out = {"box": self.box.to_dict(), "confidence": self.confidence}
        if self.label is not None:
            out["label"] = self.label
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "GroundedBox":
        missing = {"box", "confidence"} - data.keys()
        if missing:
            raise SchemaError(f"grounded box missing fields: {sorted(missing)}")
        return cls(
            box=Box3D.from_dict(data["box"]),
            confidence=data["confidence"],
            label=data.get("label"),
        )


@dataclass(frozen=True)
class PredictionSet:
    """All box predictions a system produced for one record."""

    record_id: str
    boxes: tuple[GroundedBox, ...] = field(default_factory=tuple)
    answer_text: Optional[str] = None

    def __post_init__(self):
        if not self.record_id:
            raise SchemaError("record_id must be non-empty")
        object.__setattr__(self, "boxes", tuple(self.boxes))

    def to_dict(self) -> dict:
        # Boxes serialize in descending confidence; ties keep insertion order.
        ordered = sorted(self.boxes, key=lambda gb: -gb.confidence)
        out: dict = {"record_id": self.record_id}
        if self.answer_text is not None:
            out["answer_text"] = self.answer_text
        out["boxes"] = [gb.to_dict() for gb in ordered]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "PredictionSet":
        if "record_id" not in data:
            raise SchemaError("prediction set missing field: record_id")
        return cls(
            record_id=data["record_id"],
            boxes=tuple(GroundedBox.from_dict(b) for b in data.get("boxes", [])),
            answer_text=data.get("answer_text"),
        )
