"""3D reasoning-grounding toolkit.

Subpackages:
  scene       core value types and their (de)serialization
  geometry    exact oriented-box IoU (compiled kernel + pure fallback) and
              spatial relations
  metrics     Acc@kIoU evaluation with hungarian/greedy matching
  annotation  deterministic question-answer-location generators
  grounding   numerical grounding head, losses, and a toy box optimizer
  chain       chained grounding inference over pluggable backends
  cli         the ``ground3d`` command-line front end
"""

__version__ = "0.1.0"

from .scene import (
    AnnotatedObject,
    Box3D,
    GroundedBox,
    PredictionSet,
    QALRecord,
    ReasoningType,
    Scene,
)

__all__ = [
    "AnnotatedObject",
    "Box3D",
    "GroundedBox",
    "PredictionSet",
    "QALRecord",
    "ReasoningType",
    "Scene",
    "__version__",
]
