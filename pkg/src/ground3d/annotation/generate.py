"""Rule-based question-answer-location generation.

Each generator derives its targets with the shared geometry predicates, so
ground truth is provable: ``rederive_targets`` recomputes a record's targets
from the question text alone and must agree exactly.  Everything is
deterministic given (scenes, config, seed).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from ..scene import DIRECTIVE_TEXT_AND_BOXES, QALRecord, ReasoningType, Scene
from .affordances import AffordanceTable, load_affordances
from .synth import scene_seed
from .templates import (
    LOGICAL_Q,
    SPATIAL_ABOVE_Q,
    SPATIAL_NEAREST_Q,
    ParsedQuestion,
    parse_question,
    targets_for,
)

# Per-type counts of the manually verified validation split; presets scale
# these proportions.
VALIDATION_SPLIT_COUNTS = {
    ReasoningType.SPATIAL: 342,
    ReasoningType.FUNCTIONAL: 287,
    ReasoningType.LOGICAL: 581,
    ReasoningType.EMOTIONAL: 211,
    ReasoningType.SAFETY: 53,
}
FULL_SIZE_TOTAL = 12929

TYPE_ORDER = (
    ReasoningType.SPATIAL,
    ReasoningType.FUNCTIONAL,
    ReasoningType.LOGICAL,
    ReasoningType.EMOTIONAL,
    ReasoningType.SAFETY,
)

PRESETS = ("validation-ratio", "full-size")


@dataclass(frozen=True)
class GenConfig:
    counts: dict = field(default_factory=dict)  # ReasoningType -> requested count
    seed: int = 0
    preset: Optional[str] = None
    total: Optional[int] = None  # overrides a preset's default total

    def __post_init__(self):
        if self.preset is not None and self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}; expected one of {PRESETS}")
        if any(v < 0 for v in self.counts.values()):
            raise ValueError("per-type counts must be >= 0")

    def resolved_counts(self) -> dict:
        if self.preset == "validation-ratio":
            if self.total is None:
                return dict(VALIDATION_SPLIT_COUNTS)
            return scale_counts(VALIDATION_SPLIT_COUNTS, self.total)
        if self.preset == "full-size":
            return scale_counts(VALIDATION_SPLIT_COUNTS, self.total or FULL_SIZE_TOTAL)
        return {t: int(self.counts.get(t, 0)) for t in TYPE_ORDER}


def scale_counts(ratios: dict, total: int) -> dict:
    """Largest-remainder apportionment of ``total`` across the type ratios."""
    weight = sum(ratios.values())
    quotas = {t: total * ratios[t] / weight for t in TYPE_ORDER}
    counts = {t: int(quotas[t]) for t in TYPE_ORDER}
    remainder = total - sum(counts.values())
    by_frac = sorted(TYPE_ORDER, key=lambda t: quotas[t] - counts[t], reverse=True)
    for t in by_frac[:remainder]:
        counts[t] += 1
    return counts


def _record(
    scene: Scene, question: str, rtype: ReasoningType, answer: str, targets: Sequence[int]
) -> QALRecord:
    return QALRecord(
        record_id="pending",
        scene_id=scene.scene_id,
        question=question,
        reasoning_type=rtype,
        answer_text=answer,
        target_object_ids=tuple(targets),
        output_directive=DIRECTIVE_TEXT_AND_BOXES,
    )


def generate_spatial(
    scene: Scene, cfg: GenConfig, rng: random.Random, table: Optional[AffordanceTable] = None
) -> list[QALRecord]:
    """Nearest-category and directly-above questions."""
    if len(scene.objects) < 2:
        return []
    table = table or load_affordances()
    categories = sorted({o.category for o in scene.objects})
    records = []
    for anchor_cat in categories:
        anchor_phrase = table.phrase_for(anchor_cat)
        for target_cat in categories:
            if target_cat == anchor_cat or len(scene.objects_of_category(target_cat)) < 2:
                continue
            question = SPATIAL_NEAREST_Q.format(
                target=table.phrase_for(target_cat), anchor=anchor_phrase
            )
            targets = targets_for(
                ParsedQuestion(
                    "spatial_nearest", target_category=target_cat, anchor_category=anchor_cat
                ),
                scene,
                table,
            )
            if targets:
                answer = f"The nearest {table.phrase_for(target_cat)} to the {anchor_phrase}."
                records.append(_record(scene, question, ReasoningType.SPATIAL, answer, targets))
        question = SPATIAL_ABOVE_Q.format(anchor=anchor_phrase)
        targets = targets_for(
            ParsedQuestion("spatial_above", anchor_category=anchor_cat), scene, table
        )
        if targets:
            names = sorted({table.phrase_for(scene.object_by_id(i).category) for i in targets})
            answer = f"Directly above the {anchor_phrase}: {', '.join(names)}."
            records.append(_record(scene, question, ReasoningType.SPATIAL, answer, targets))
    return records


def generate_functional(
    scene: Scene, table: AffordanceTable, cfg: GenConfig, rng: random.Random
) -> list[QALRecord]:
    """Affordance questions targeting every object carrying the asked tag."""
    records = []
    for tag in sorted(table.tag_questions):
        parsed = ParsedQuestion("functional", tag=tag)
        targets = targets_for(parsed, scene, table)
        if not targets:
            continue
        question = rng.choice(table.tag_questions[tag])
        names = sorted({table.phrase_for(scene.object_by_id(i).category) for i in targets})
        answer = f"You could use the {', or the '.join(names)}."
        records.append(_record(scene, question, ReasoningType.FUNCTIONAL, answer, targets))
    return records


def generate_logical(
    scene: Scene, table: AffordanceTable, cfg: GenConfig, rng: random.Random
) -> list[QALRecord]:
    """Setting + function + nearest compositions from the setup table."""
    records = []
    for setup in table.logical_setups:
        parsed = ParsedQuestion("logical", anchor_category=setup.anchor, tag=setup.tag)
        targets = targets_for(parsed, scene, table)
        if not targets:
            continue
        question = LOGICAL_Q.format(activity=setup.activity, action=table.action_for_tag(setup.tag))
        target_phrase = table.phrase_for(scene.object_by_id(targets[0]).category)
        answer = f"The {target_phrase} nearest to the {table.phrase_for(setup.anchor)}."
        records.append(_record(scene, question, ReasoningType.LOGICAL, answer, targets))
    return records


def generate_emotional(
    scene: Scene, table: AffordanceTable, cfg: GenConfig, rng: random.Random
) -> list[QALRecord]:
    """Mood questions targeting every object in the mood-lifting list."""
    parsed = ParsedQuestion("emotional", tag="mood_lift")
    targets = targets_for(parsed, scene, table)
    if not targets:
        return []
    records = []
    for question in table.emotional_questions:
        names = sorted({table.phrase_for(scene.object_by_id(i).category) for i in targets})
        answer = f"These might lift your mood: {', '.join(names)}."
        records.append(_record(scene, question, ReasoningType.EMOTIONAL, answer, targets))
    return records


def generate_safety(
    scene: Scene, table: AffordanceTable, cfg: GenConfig, rng: random.Random
) -> list[QALRecord]:
    """Out-of-reach placement and hazard-in-reach questions."""
    records = []
    placement = targets_for(ParsedQuestion("safety_placement", tag="high_surface"), scene, table)
    if placement:
        names = sorted({table.phrase_for(scene.object_by_id(i).category) for i in placement})
        answer = (
            f"On the {', or the '.join(names)}, above {table.reach_height:.1f} m and out of reach."
        )
        records.append(
            _record(scene, table.placement_question, ReasoningType.SAFETY, answer, placement)
        )
    hazards = targets_for(ParsedQuestion("safety_hazard", tag="hazard"), scene, table)
    if hazards:
        names = sorted({table.phrase_for(scene.object_by_id(i).category) for i in hazards})
        answer = f"Move these out of reach: {', '.join(names)}."
        records.append(
            _record(scene, table.hazard_question, ReasoningType.SAFETY, answer, hazards)
        )
    return records


@dataclass(frozen=True)
class GenResult:
    records: tuple
    shortfalls: dict  # ReasoningType -> missing count, only types that fell short

    @property
    def complete(self) -> bool:
        return not self.shortfalls


def generate_dataset(
    scenes: Sequence[Scene], cfg: GenConfig, table: Optional[AffordanceTable] = None
) -> GenResult:
    """Generate records across scenes until the per-type counts are met.

    Scenes are consumed in scene_id order with per-scene rng streams, so the
    output is byte-stable under re-runs and independent of input ordering.
    Types whose pools exhaust early are reported in ``shortfalls``.
    """
    if not scenes:
        raise ValueError("generate_dataset requires at least one scene")
    table = table or load_affordances()
    counts = cfg.resolved_counts()

    pools: dict[ReasoningType, list[QALRecord]] = {t: [] for t in TYPE_ORDER}
    for scene in sorted(scenes, key=lambda s: s.scene_id):
        rng = random.Random(scene_seed(cfg.seed, scene.scene_id))
        pools[ReasoningType.SPATIAL].extend(generate_spatial(scene, cfg, rng, table))
        pools[ReasoningType.FUNCTIONAL].extend(generate_functional(scene, table, cfg, rng))
        pools[ReasoningType.LOGICAL].extend(generate_logical(scene, table, cfg, rng))
        pools[ReasoningType.EMOTIONAL].extend(generate_emotional(scene, table, cfg, rng))
        pools[ReasoningType.SAFETY].extend(generate_safety(scene, table, cfg, rng))
        if all(len(pools[t]) >= counts[t] for t in TYPE_ORDER):
            break

    records = []
    shortfalls = {}
    queues = {t: iter(pools[t][: counts[t]]) for t in TYPE_ORDER}
    taken = {t: min(len(pools[t]), counts[t]) for t in TYPE_ORDER}
    for t in TYPE_ORDER:
        if taken[t] < counts[t]:
            shortfalls[t] = counts[t] - taken[t]
    remaining = dict(taken)
    while any(remaining.values()):
        for t in TYPE_ORDER:
            if remaining[t]:
                records.append(next(queues[t]))
                remaining[t] -= 1
    records = tuple(
        replace(rec, record_id=f"qal-{i:06d}") for i, rec in enumerate(records)
    )
    return GenResult(records=records, shortfalls=shortfalls)


def validate_record(
    record: QALRecord, scene: Scene, table: Optional[AffordanceTable] = None
) -> list[str]:
    """Schema-level violations of a record against its scene, as data."""
    violations = []
    if record.scene_id != scene.scene_id:
        violations.append(
            f"record {record.record_id} references scene {record.scene_id}, "
            f"not {scene.scene_id}"
        )
    for oid in record.target_object_ids:
        if not scene.has_object(oid):
            violations.append(f"unresolved id {oid}")
    # Construction enforces directive membership and non-empty targets for
    # box directives; re-check here so dict-built records can be audited too.
    from ..scene import OUTPUT_DIRECTIVES, directive_requires_boxes

    if record.output_directive not in OUTPUT_DIRECTIVES:
        violations.append(f"unknown output_directive {record.output_directive!r}")
    elif directive_requires_boxes(record.output_directive) and not record.target_object_ids:
        violations.append("box-producing record has no targets")
    return violations


def rederive_targets(
    record: QALRecord, scene: Scene, table: Optional[AffordanceTable] = None
) -> Optional[list[int]]:
    """Recompute a record's targets from its question text, or None if free-form."""
    table = table or load_affordances()
    parsed = parse_question(record.question, table)
    if parsed is None:
        return None
    return targets_for(parsed, scene, table)
