"""Deterministic question-answer-location generation and validation."""

from .affordances import AffordanceTable, LogicalSetup, load_affordances
from .generate import (
    FULL_SIZE_TOTAL,
    GenConfig,
    GenResult,
    VALIDATION_SPLIT_COUNTS,
    generate_dataset,
    generate_emotional,
    generate_functional,
    generate_logical,
    generate_safety,
    generate_spatial,
    rederive_targets,
    scale_counts,
    validate_record,
)
from .synth import make_scene, make_scenes, scene_seed
from .templates import (
    LOGICAL_Q,
    SPATIAL_ABOVE_Q,
    SPATIAL_NEAREST_Q,
    ParsedQuestion,
    anchor_object,
    parse_question,
    targets_for,
)

__all__ = [
    "AffordanceTable",
    "FULL_SIZE_TOTAL",
    "GenConfig",
    "GenResult",
    "LOGICAL_Q",
    "LogicalSetup",
    "ParsedQuestion",
    "SPATIAL_ABOVE_Q",
    "SPATIAL_NEAREST_Q",
    "VALIDATION_SPLIT_COUNTS",
    "anchor_object",
    "generate_dataset",
    "generate_emotional",
    "generate_functional",
    "generate_logical",
    "generate_safety",
    "generate_spatial",
    "load_affordances",
    "make_scene",
    "make_scenes",
    "parse_question",
    "rederive_targets",
    "scale_counts",
    "scene_seed",
    "targets_for",
    "validate_record",
]
