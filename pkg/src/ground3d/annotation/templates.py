"""Question templates and their inverse: parsing a question back to its rule.

Every generated question instantiates one of these fixed templates, so a
record's targets can be re-derived from the question text alone with the
geometry predicates.  ``parse_question`` is that inverse; it returns None for
free-form text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from ..geometry import is_above, nearest
from ..scene import AnnotatedObject, Scene
from .affordances import AffordanceTable

SPATIAL_NEAREST_Q = "Which {target} is nearest to the {anchor}?"
SPATIAL_ABOVE_Q = "What is placed directly above the {anchor}?"
LOGICAL_Q = "If I'm {activity}, where is the nearest place to {action}?"

_NEAREST_RE = re.compile(r"^Which (?P<target>[a-z0-9 ]+) is nearest to the (?P<anchor>[a-z0-9 ]+)\?$")
_ABOVE_RE = re.compile(r"^What is placed directly above the (?P<anchor>[a-z0-9 ]+)\?$")
_LOGICAL_RE = re.compile(
    r"^If I'm (?P<activity>.+), where is the nearest place to (?P<action>.+)\?$"
)


@dataclass(frozen=True)
class ParsedQuestion:
    """A question reduced to its generating rule.

    kind is one of: spatial_nearest, spatial_above, functional, logical,
    emotional, safety_placement, safety_hazard.
    """

    kind: str
    target_category: Optional[str] = None
    anchor_category: Optional[str] = None
    tag: Optional[str] = None


def _single_category(table: AffordanceTable, phrase: str) -> Optional[str]:
    cats = table.categories_for_phrase(phrase)
    return cats[0] if len(cats) == 1 else None


def parse_question(question: str, table: AffordanceTable) -> Optional[ParsedQuestion]:
    m = _NEAREST_RE.match(question)
    if m:
        target = _single_category(table, m.group("target"))
        anchor = _single_category(table, m.group("anchor"))
        if target and anchor:
            return ParsedQuestion("spatial_nearest", target_category=target, anchor_category=anchor)
        return None
    m = _ABOVE_RE.match(question)
    if m:
        anchor = _single_category(table, m.group("anchor"))
        if anchor:
            return ParsedQuestion("spatial_above", anchor_category=anchor)
        return None
    m = _LOGICAL_RE.match(question)
    if m:
        tag = table.tag_for_action(m.group("action"))
        anchor = None
        for setup in table.logical_setups:
            if setup.activity == m.group("activity"):
                anchor = setup.anchor
                break
        if tag and anchor:
            return ParsedQuestion("logical", anchor_category=anchor, tag=tag)
        return None
    for tag, questions in table.tag_questions.items():
        if question in questions:
            return ParsedQuestion("functional", tag=tag)
    if question in table.emotional_questions:
        return ParsedQuestion("emotional", tag="mood_lift")
    if question == table.placement_question:
        return ParsedQuestion("safety_placement", tag="high_surface")
    if question == table.hazard_question:
        return ParsedQuestion("safety_hazard", tag="hazard")
    return None


def anchor_object(scene: Scene, category: str) -> Optional[AnnotatedObject]:
    """The designated anchor instance of a category: the lowest object_id."""
    instances = scene.objects_of_category(category)
    if not instances:
        return None
    return min(instances, key=lambda o: o.object_id)


def targets_for(parsed: ParsedQuestion, scene: Scene, table: AffordanceTable) -> list[int]:
    """Target object ids for a parsed question, via the geometry predicates.

    Returns ids in ascending order; empty when the rule is unsatisfiable in
    the scene.
    """
    if parsed.kind == "spatial_nearest":
        anchor = anchor_object(scene, parsed.anchor_category)
        if anchor is None:
            return []
        hit = nearest(anchor, scene, category=parsed.target_category)
        return [hit.object_id] if hit else []

    if parsed.kind == "spatial_above":
        anchor = anchor_object(scene, parsed.anchor_category)
        if anchor is None:
            return []
        return sorted(
            o.object_id
            for o in scene.objects
            if o.object_id != anchor.object_id and is_above(o.box, anchor.box)
        )

    if parsed.kind == "logical":
        anchor = anchor_object(scene, parsed.anchor_category)
        if anchor is None:
            return []
        carriers = {
            o.object_id for o in scene.objects if parsed.tag in table.tags_of(o.category)
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
        return [hit.object_id] if hit else []

    if parsed.kind in ("functional", "emotional"):
        return sorted(
            o.object_id for o in scene.objects if parsed.tag in table.tags_of(o.category)
        )

    if parsed.kind == "safety_placement":
        return sorted(
            o.object_id
            for o in scene.objects
            if "high_surface" in table.tags_of(o.category)
            and o.box.center[2] >= table.reach_height
        )

    if parsed.kind == "safety_hazard":
        return sorted(
            o.object_id
            for o in scene.objects
            if "hazard" in table.tags_of(o.category) and o.box.center[2] < table.reach_height
        )

    raise ValueError(f"unknown question kind {parsed.kind!r}")
