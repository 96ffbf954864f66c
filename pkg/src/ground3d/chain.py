"""Chained grounding inference.

The chain grounds the objects a question explicitly mentions, injects their
locations back into the question as a ``Known:`` block, and only then runs
the reasoner and the final grounding pass, so location-dependent reasoning
can use real coordinates.  Backends are pluggable; one chain is strictly
sequential but independent chains can run concurrently.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .annotation.affordances import AffordanceTable, load_affordances
from .scene import Box3D, GroundedBox, Scene

# The detection-question template; anchor grounding questions instantiate it.
DETECT_Q = "Where is the {phrase} in this 3D scene?"

KNOWN_CLAUSE = "Known: {label} at center ({cx:.2f}, {cy:.2f}, {cz:.2f}), size ({sx:.2f}, {sy:.2f}, {sz:.2f})."
_KNOWN_RE = re.compile(
    r" Known: (?P<label>[a-z0-9_ ]+) at center \((?P<cx>-?\d+\.\d+), (?P<cy>-?\d+\.\d+), "
    r"(?P<cz>-?\d+\.\d+)\), size \((?P<sx>-?\d+\.\d+), (?P<sy>-?\d+\.\d+), (?P<sz>-?\d+\.\d+)\)\."
)

LOCATION_FORMAT = "center-size-2dp-v1"


@dataclass(frozen=True)
class CoGConfig:
    confidence_threshold: float = 0.5
    max_rounds: int = 2
    inject_all_objects: bool = False
    location_format: str = LOCATION_FORMAT

    def __post_init__(self):
        if not 0.0 <= self.confidence_threshold <= 1.0:
            raise ValueError("confidence_threshold must be in [0, 1]")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if self.location_format != LOCATION_FORMAT:
            raise ValueError(f"unknown location_format {self.location_format!r}")


@dataclass(frozen=True)
class Mention:
    """A category phrase found in a question."""

    phrase: str
    categories: tuple[str, ...]
    start: int
    end: int


@dataclass(frozen=True)
class AnchorResult:
    """One grounded box for a mention, with the threshold verdict."""

    mention: str
    box: GroundedBox
    accepted: bool


@dataclass(frozen=True)
class CoGTrace:
    """Everything one chain did, in order."""

    question: str
    mentions: tuple[Mention, ...]
    grounding_questions: tuple[str, ...]
    anchors: tuple[AnchorResult, ...]
    updated_question: str
    answer_text: Optional[str]
    boxes: tuple[GroundedBox, ...]
    fell_through: bool  # no mentions: grounded the original question directly
    rounds_used: int
    timings: tuple = field(default_factory=tuple)  # (step name, seconds)

    def to_dict(self, include_timings: bool = False) -> dict:
        out = {
            "question": self.question,
            "mentions": [
                {
                    "phrase": m.phrase,
                    "categories": list(m.categories),
                    "start": m.start,
                    "end": m.end,
                }
                for m in self.mentions
            ],
            "grounding_questions": list(self.grounding_questions),
            "anchors": [
                {
                    "mention": a.mention,
                    "box": a.box.to_dict(),
                    "accepted": a.accepted,
                }
                for a in self.anchors
            ],
            "updated_question": self.updated_question,
            "answer_text": self.answer_text,
            "boxes": [b.to_dict() for b in self.boxes],
            "fell_through": self.fell_through,
            "rounds_used": self.rounds_used,
        }
        if include_timings:
            out["timings"] = [[name, seconds] for name, seconds in self.timings]
        return out


def build_mention_pattern(table: AffordanceTable) -> re.Pattern:
    """Alternation of all known phrases, longest first, at word boundaries."""
    phrases = sorted(table.phrases(), key=len, reverse=True)
    return re.compile(
        r"\b(?:" + "|".join(re.escape(p) for p in phrases) + r")\b", re.IGNORECASE
    )


def extract_mentions(question: str, table: AffordanceTable) -> list[Mention]:
    """Longest-match, case-insensitive, non-overlapping left-to-right scan."""
    pattern = build_mention_pattern(table)
    mentions = []
    for m in pattern.finditer(question):
        phrase = m.group(0).lower()
        mentions.append(
            Mention(
                phrase=phrase,
                categories=table.categories_for_phrase(phrase),
                start=m.start(),
                end=m.end(),
            )
        )
    return mentions


def rewrite_to_grounding_question(mention) -> str:
    """The fixed detection question for one mention (or raw phrase)."""
    phrase = mention.phrase if isinstance(mention, Mention) else mention
    if not phrase:
        raise ValueError("cannot rewrite an empty mention")
    return DETECT_Q.format(phrase=phrase)


def rewrite_all(mentions: Sequence[Mention]) -> list[str]:
    if not mentions:
        raise ValueError("rewrite requires at least one mention")
    return [rewrite_to_grounding_question(m) for m in mentions]


def strip_known(question: str) -> tuple[str, list[tuple[str, tuple, tuple]]]:
    """Split a question into its core text and parsed (label, center, size) anchors."""
    anchors = []
    for m in _KNOWN_RE.finditer(question):
        anchors.append(
            (
                m.group("label"),
                (float(m.group("cx")), float(m.group("cy")), float(m.group("cz"))),
                (float(m.group("sx")), float(m.group("sy")), float(m.group("sz"))),
            )
        )
    return _KNOWN_RE.sub("", question), anchors


def inject_locations(
    question: str, anchors: Sequence[tuple[str, Box3D]], cfg: CoGConfig = CoGConfig()
) -> str:
    """Append one Known clause per (label, box) anchor, coordinates at 2 dp.

    Idempotent: any existing Known block is replaced, never duplicated.
    """
    core, _ = strip_known(question)
    parts = [core]
    for label, box in anchors:
        parts.append(
            " "
            + KNOWN_CLAUSE.format(
                label=label,
                cx=box.center[0],
                cy=box.center[1],
                cz=box.center[2],
                sx=box.size[0],
                sy=box.size[1],
                sz=box.size[2],
            )
        )
    return "".join(parts)


def summarize_scene(scene: Scene) -> dict:
    """What the reasoner sees: categories and counts, no geometry."""
    counts: dict[str, int] = {}
    for obj in scene.objects:
        counts[obj.category] = counts.get(obj.category, 0) + 1
    return {"scene_id": scene.scene_id, "category_counts": dict(sorted(counts.items()))}


def run_chain(
    question: str,
    scene: Scene,
    grounder,
    reasoner,
    cfg: CoGConfig = CoGConfig(),
    table: Optional[AffordanceTable] = None,
) -> CoGTrace:
    """Execute one chain: extract, ground anchors, inject, reason, ground.

    With no mentions (and no all-objects injection) the chain degenerates to
    a direct grounding pass on the original question.
    """
    table = table or load_affordances()
    timings = []
    clock = time.perf_counter

    t0 = clock()
    mentions = tuple(extract_mentions(question, table))
    timings.append(("extract_mentions", clock() - t0))

    anchors: list[AnchorResult] = []
    grounding_questions: list[str] = []

    if cfg.inject_all_objects:
        t0 = clock()
        anchors = [
            AnchorResult(
                mention=obj.category,
                box=GroundedBox(box=obj.box, confidence=1.0, label=obj.category),
                accepted=True,
            )
            for obj in scene.objects
        ]
        updated = inject_locations(
            question, [(a.box.label, a.box.box) for a in anchors], cfg
        )
        timings.append(("inject_all_objects", clock() - t0))
    elif mentions:
        t0 = clock()
        for mention in mentions:
            gq = rewrite_to_grounding_question(mention)
            grounding_questions.append(gq)
            boxes = grounder.ground(gq, scene)
            for gb in boxes:
                anchors.append(
                    AnchorResult(
                        mention=mention.phrase,
                        box=gb,
                        accepted=gb.confidence >= cfg.confidence_threshold,
                    )
                )
        timings.append(("ground_anchors", clock() - t0))
        t0 = clock()
        accepted = [
            (a.box.label or a.mention, a.box.box) for a in anchors if a.accepted
        ]
        updated = inject_locations(question, accepted, cfg)
        timings.append(("inject_locations", clock() - t0))
    else:
        # Single-pass fall-through: nothing to anchor on.
        t0 = clock()
        boxes = tuple(grounder.ground(question, scene))
        timings.append(("ground_direct", clock() - t0))
        return CoGTrace(
            question=question,
            mentions=mentions,
            grounding_questions=(),
            anchors=(),
            updated_question=question,
            answer_text=None,
            boxes=boxes,
            fell_through=True,
            rounds_used=1,
            timings=tuple(timings),
        )

    answer_text = None
    final_boxes: tuple[GroundedBox, ...] = ()
    rounds_used = 0
    for _ in range(cfg.max_rounds):
        rounds_used += 1
        t0 = clock()
        result = reasoner.reason(updated, summarize_scene(scene))
        timings.append(("reason", clock() - t0))
        answer_text = result.answer_text
        t0 = clock()
        final_boxes = tuple(grounder.ground(result.intent, scene))
        timings.append(("ground_final", clock() - t0))
        if final_boxes:
            break

    return CoGTrace(
        question=question,
        mentions=mentions,
        grounding_questions=tuple(grounding_questions),
        anchors=tuple(anchors),
        updated_question=updated,
        answer_text=answer_text,
        boxes=final_boxes,
        fell_through=False,
        rounds_used=rounds_used,
        timings=tuple(timings),
    )


def run_single_pass(
    question: str,
    scene: Scene,
    grounder,
    reasoner,
    cfg: CoGConfig = CoGConfig(),
) -> CoGTrace:
    """Baseline: reason on the original question, then ground the intent.

    No anchor grounding and no location injection; this is the comparison
    arm for measuring what the chain adds.
    """
    timings = []
    t0 = time.perf_counter()
    result = reasoner.reason(question, summarize_scene(scene))
    timings.append(("reason", time.perf_counter() - t0))
    t0 = time.perf_counter()
    boxes = tuple(grounder.ground(result.intent, scene))
    timings.append(("ground_final", time.perf_counter() - t0))
    return CoGTrace(
        question=question,
        mentions=(),
        grounding_questions=(),
        anchors=(),
        updated_question=question,
        answer_text=result.answer_text,
        boxes=boxes,
        fell_through=False,
        rounds_used=1,
        timings=tuple(timings),
    )
