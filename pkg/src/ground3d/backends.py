"""Grounder and reasoner backends for chained inference.

OracleGrounder answers detection-style questions from scene ground truth;
RuleReasoner turns a reasoning question (plus any Known anchors) into a
detection intent the grounder can resolve.  Both are deterministic, which is
what makes chain runs reproducible and the oracle experiments exact.

The intent grammar is a small set of fixed question templates; the grounder
parses them with the same geometry predicates the dataset generators used.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Protocol, runtime_checkable

from .annotation.affordances import AffordanceTable, load_affordances
from .annotation.templates import ParsedQuestion, parse_question, targets_for
from .chain import DETECT_Q, strip_known
from .geometry import is_above, nearest, nearest_point
from .scene import AnnotatedObject, GroundedBox, Scene


class BackendError(RuntimeError):
    """A backend call failed; the message carries the step context."""


@dataclass(frozen=True)
class ReasonResult:
    answer_text: str
    intent: str


@runtime_checkable
class Grounder(Protocol):
    def ground(self, question: str, scene: Scene) -> list[GroundedBox]: ...


@runtime_checkable
class Reasoner(Protocol):
    def reason(self, question: str, scene_summary: dict) -> ReasonResult: ...


# Intent templates the rule reasoner emits and the oracle grounder parses.
FUNCTION_DETECT_Q = "Where is something to {action} in this 3D scene?"
NEAREST_AT_Q = (
    "Where is the {target} nearest to the {anchor} at center ({x:.2f}, {y:.2f}, {z:.2f}) "
    "in this 3D scene?"
)
FUNCTION_NEAREST_AT_Q = (
    "Where is something to {action} nearest to the {anchor} at center "
    "({x:.2f}, {y:.2f}, {z:.2f}) in this 3D scene?"
)
ABOVE_AT_Q = (
    "Where is the object directly above the {anchor} at center ({x:.2f}, {y:.2f}, {z:.2f}) "
    "in this 3D scene?"
)
HIGH_SURFACE_Q = "Where is a high surface with center height at least {z:.2f} in this 3D scene?"
HAZARD_LOW_Q = "Where is a hazardous item with center height below {z:.2f} in this 3D scene?"

_POINT = r"\((?P<x>-?\d+\.\d+), (?P<y>-?\d+\.\d+), (?P<z>-?\d+\.\d+)\)"
_NEAREST_AT_RE = re.compile(
    rf"^Where is the (?P<target>[a-z0-9_ ]+) nearest to the (?P<anchor>[a-z0-9_ ]+) "
    rf"at center {_POINT} in this 3D scene\?$"
)
_FUNCTION_NEAREST_AT_RE = re.compile(
    rf"^Where is something to (?P<action>.+) nearest to the (?P<anchor>[a-z0-9_ ]+) "
    rf"at center {_POINT} in this 3D scene\?$"
)
_ABOVE_AT_RE = re.compile(
    rf"^Where is the object directly above the (?P<anchor>[a-z0-9_ ]+) "
    rf"at center {_POINT} in this 3D scene\?$"
)
_FUNCTION_DETECT_RE = re.compile(r"^Where is something to (?P<action>.+) in this 3D scene\?$")
_HIGH_SURFACE_RE = re.compile(
    r"^Where is a high surface with center height at least (?P<z>-?\d+\.\d+) in this 3D scene\?$"
)
_HAZARD_LOW_RE = re.compile(
    r"^Where is a hazardous item with center height below (?P<z>-?\d+\.\d+) in this 3D scene\?$"
)
_DETECT_RE = re.compile(r"^Where is the (?P<phrase>[a-z0-9_ ]+) in this 3D scene\?$")


def _boxes(objects) -> list[GroundedBox]:
    return [
        GroundedBox(box=obj.box, confidence=1.0, label=obj.category)
        for obj in sorted(objects, key=lambda o: o.object_id)
    ]


class OracleGrounder:
    """Resolves detection questions and intents against scene ground truth."""

    def __init__(self, table: Optional[AffordanceTable] = None):
        self.table = table or load_affordances()

    def ground(self, question: str, scene: Scene) -> list[GroundedBox]:
        question, _ = strip_known(question)
        table = self.table

        m = _NEAREST_AT_RE.match(question)
        if m:
            anchor = self._anchor_at(scene, m.group("anchor"), m)
            if anchor is None:
                return []
            cats = table.categories_for_phrase(m.group("target"))
            hits = [
                nearest(anchor, scene, category=c) for c in cats
            ]
            return _boxes([h for h in hits if h is not None])

        m = _FUNCTION_NEAREST_AT_RE.match(question)
        if m:
            anchor = self._anchor_at(scene, m.group("anchor"), m)
            tag = table.tag_for_action(m.group("action"))
            if anchor is None or tag is None:
                return []
            carriers = {
                o.object_id for o in scene.objects if tag in table.tags_of(o.category)
            }
            carriers.discard(anchor.object_id)
            if not carriers:
                return []
            hit = nearest(
                anchor,
                scene,
                exclude_ids=tuple(
                    o.object_id for o in scene.objects if o.object_id not in carriers
                ),
            )
            return _boxes([hit] if hit else [])

        m = _ABOVE_AT_RE.match(question)
        if m:
            anchor = self._anchor_at(scene, m.group("anchor"), m)
            if anchor is None:
                return []
            return _boxes(
                o
                for o in scene.objects
                if o.object_id != anchor.object_id and is_above(o.box, anchor.box)
            )

        m = _HIGH_SURFACE_RE.match(question)
        if m:
            z = float(m.group("z"))
            return _boxes(
                o
                for o in scene.objects
                if "high_surface" in table.tags_of(o.category) and o.box.center[2] >= z
            )

        m = _HAZARD_LOW_RE.match(question)
        if m:
            z = float(m.group("z"))
            return _boxes(
                o
                for o in scene.objects
                if "hazard" in table.tags_of(o.category) and o.box.center[2] < z
            )

        m = _FUNCTION_DETECT_RE.match(question)
        if m:
            tag = table.tag_for_action(m.group("action"))
            if tag is None:
                return []
            return _boxes(
                o for o in scene.objects if tag in table.tags_of(o.category)
            )

        m = _DETECT_RE.match(question)
        if m:
            cats = set(table.categories_for_phrase(m.group("phrase")))
            return _boxes(o for o in scene.objects if o.category in cats)

        # Full dataset questions: same machinery as target re-derivation.
        parsed = parse_question(question, table)
        if parsed is not None:
            ids = set(targets_for(parsed, scene, table))
            return _boxes(o for o in scene.objects if o.object_id in ids)
        return []

    def _anchor_at(self, scene: Scene, phrase: str, m) -> Optional[AnnotatedObject]:
        """The anchor object a quoted center refers to: nearest same-category."""
        point = (float(m.group("x")), float(m.group("y")), float(m.group("z")))
        cats = self.table.categories_for_phrase(phrase) or (phrase,)
        best = None
        for cat in cats:
            hit = nearest_point(point, scene, category=cat)
            if hit is not None and (
                best is None
                or _dist(point, hit.box.center) < _dist(point, best.box.center)
            ):
                best = hit
        return best


def _dist(a, b) -> float:
    return sum((x - y) ** 2 for x, y in zip(a, b)) ** 0.5


class RuleReasoner:
    """Deterministic template reasoning over questions and Known anchors.

    With anchors injected it emits spatially qualified intents; without them
    it can only fall back to detecting the mentioned category, which is
    exactly the information gap the chain closes.
    """

    def __init__(self, table: Optional[AffordanceTable] = None):
        self.table = table or load_affordances()

    def reason(self, question: str, scene_summary: dict) -> ReasonResult:
        table = self.table
        core, known = strip_known(question)
        parsed = parse_question(core, table)
        if parsed is None:
            return ReasonResult(
                answer_text="I cannot reduce this question to a grounding rule.",
                intent=core,
            )

        if parsed.kind == "spatial_nearest":
            target_phrase = table.phrase_for(parsed.target_category)
            anchor = _first_known(known, parsed.anchor_category)
            if anchor is not None:
                label, center, _ = anchor
                return ReasonResult(
                    answer_text=f"The {target_phrase} closest to the located {label}.",
                    intent=NEAREST_AT_Q.format(
                        target=target_phrase,
                        anchor=label,
                        x=center[0],
                        y=center[1],
                        z=center[2],
                    ),
                )
            anchor_phrase = table.phrase_for(parsed.anchor_category)
            return ReasonResult(
                answer_text=f"Without the {anchor_phrase} location I cannot rank by "
                f"distance; any {target_phrase} may be it.",
                intent=DETECT_Q.format(phrase=target_phrase),
            )

        if parsed.kind == "spatial_above":
            anchor = _first_known(known, parsed.anchor_category)
            anchor_phrase = table.phrase_for(parsed.anchor_category)
            if anchor is not None:
                label, center, _ = anchor
                return ReasonResult(
                    answer_text=f"Whatever sits directly above the located {label}.",
                    intent=ABOVE_AT_Q.format(
                        anchor=label, x=center[0], y=center[1], z=center[2]
                    ),
                )
            return ReasonResult(
                answer_text=f"Without the {anchor_phrase} location I can only point "
                f"at the {anchor_phrase}.",
                intent=DETECT_Q.format(phrase=anchor_phrase),
            )

        if parsed.kind == "logical":
            action = table.action_for_tag(parsed.tag)
            anchor = _first_known(known, parsed.anchor_category)
            if anchor is not None:
                label, center, _ = anchor
                return ReasonResult(
                    answer_text=f"The nearest place to {action} from the located {label}.",
                    intent=FUNCTION_NEAREST_AT_Q.format(
                        action=action, anchor=label, x=center[0], y=center[1], z=center[2]
                    ),
                )
            return ReasonResult(
                answer_text=f"Anywhere suitable to {action}.",
                intent=FUNCTION_DETECT_Q.format(action=action),
            )

        if parsed.kind in ("functional", "emotional"):
            action = table.action_for_tag(parsed.tag)
            return ReasonResult(
                answer_text=f"Anything that lets you {action}.",
                intent=FUNCTION_DETECT_Q.format(action=action),
            )

        if parsed.kind == "safety_placement":
            return ReasonResult(
                answer_text=f"A storage surface at or above {table.reach_height:.1f} m.",
                intent=HIGH_SURFACE_Q.format(z=table.reach_height),
            )

        if parsed.kind == "safety_hazard":
            return ReasonResult(
                answer_text=f"Hazardous items below {table.reach_height:.1f} m.",
                intent=HAZARD_LOW_Q.format(z=table.reach_height),
            )

        raise BackendError(f"unhandled question kind {parsed.kind!r}")


def _first_known(known, category: str):
    for label, center, size in known:
        if label == category:
            return label, center, size
    return None
