"""Acc@kIoU evaluation for flexible-cardinality grounding predictions.

A record is scored as per-ground-truth-box recall: the fraction of its target
boxes recovered by a one-to-one matching at IoU >= k.  ``strict_record_acc``
(all targets recovered) is reported alongside.  False-positive predictions do
not reduce the score.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import geometry
from .scene import Box3D, GroundedBox, PredictionSet, QALRecord, ReasoningType, Scene

IOU_MODES = ("oriented", "axis_aligned")
MATCHING_MODES = ("hungarian", "greedy")

# Table column order for report emission.
TYPE_ORDER = (
    ReasoningType.SPATIAL,
    ReasoningType.FUNCTIONAL,
    ReasoningType.LOGICAL,
    ReasoningType.EMOTIONAL,
    ReasoningType.SAFETY,
)


@dataclass(frozen=True)
class EvalConfig:
    k_iou: float = 0.25
    iou_mode: str = "oriented"
    matching: str = "hungarian"
    confidence_floor: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.k_iou < 1.0:
            raise ValueError(f"k_iou must be in (0, 1), got {self.k_iou}")
        if self.iou_mode not in IOU_MODES:
            raise ValueError(f"iou_mode must be one of {IOU_MODES}, got {self.iou_mode!r}")
        if self.matching not in MATCHING_MODES:
            raise ValueError(f"matching must be one of {MATCHING_MODES}, got {self.matching!r}")

    def to_dict(self) -> dict:
        return {
            "k_iou": self.k_iou,
            "iou_mode": self.iou_mode,
            "matching": self.matching,
            "confidence_floor": self.confidence_floor,
        }


def pairwise_iou(pred_boxes: Sequence[Box3D], gt_boxes: Sequence[Box3D], iou_mode: str):
    if iou_mode == "oriented":
        return geometry.iou_matrix(pred_boxes, gt_boxes)
    mat = np.zeros((len(pred_boxes), len(gt_boxes)))
    for i, p in enumerate(pred_boxes):
        for j, g in enumerate(gt_boxes):
            mat[i, j] = geometry.iou_axis_aligned(p, g)
    return mat


def match_boxes(
    ious: np.ndarray,
    threshold: float,
    mode: str = "hungarian",
    confidences: Optional[Sequence[float]] = None,
) -> list[tuple[int, int]]:
    """One-to-one matching over pairs with iou >= threshold.

    hungarian: maximizes matched-pair count, then total IoU; remaining ties
    resolve to the lexicographically smallest (pred_index, gt_index) pairing.
    greedy: predictions in descending confidence order each claim their best
    unclaimed ground truth.  Returned pairs are sorted by pred index.
    """
    n, m = ious.shape
    if n == 0 or m == 0:
        return []
    eligible = ious >= threshold
    if not eligible.any():
        return []

    if mode == "greedy":
        if confidences is None:
            confidences = [1.0] * n
        order = sorted(range(n), key=lambda i: (-confidences[i], i))
        taken: set[int] = set()
        pairs = []
        for i in order:
            best_j = -1
            best_iou = -1.0
            for j in range(m):
                if j in taken or not eligible[i, j]:
                    continue
                if ious[i, j] > best_iou:
                    best_iou = ious[i, j]
                    best_j = j
            if best_j >= 0:
                taken.add(best_j)
                pairs.append((i, best_j))
        return sorted(pairs)

    # Scalarized assignment: a weight of BIG per eligible pair makes match
    # count dominate total IoU, and a sub-1e-11 index bias makes the optimum
    # unique so the solver's tie-handling cannot leak through.
    big = 2.0 * (min(n, m) + 1.0)
    idx = np.arange(n)[:, None] * m + np.arange(m)[None, :]
    weights = np.where(eligible, big + ious - 1e-12 * idx / (n * m), 0.0)
    rows, cols = linear_sum_assignment(weights, maximize=True)
    return sorted((int(i), int(j)) for i, j in zip(rows, cols) if eligible[i, j])


def match(
    preds: Sequence[GroundedBox], gts: Sequence[Box3D], cfg: EvalConfig
) -> list[tuple[int, int]]:
    """Match scored predictions to ground-truth boxes under ``cfg``.

    Pred indices refer to positions in ``preds``; predictions below the
    confidence floor never match.
    """
    kept = [i for i, p in enumerate(preds) if p.confidence >= cfg.confidence_floor]
    if not kept or not gts:
        return []
    ious = pairwise_iou([preds[i].box for i in kept], gts, cfg.iou_mode)
    pairs = match_boxes(
        ious, cfg.k_iou, mode=cfg.matching, confidences=[preds[i].confidence for i in kept]
    )
    return sorted((kept[i], j) for i, j in pairs)


def record_accuracy(
    preds: Optional[PredictionSet], record: QALRecord, scene: Scene, cfg: EvalConfig
) -> float:
    """Fraction of the record's target boxes recovered at IoU >= k."""
    if scene.scene_id != record.scene_id:
        raise ValueError(
            f"record {record.record_id} references scene {record.scene_id}, "
            f"got scene {scene.scene_id}"
        )
    gts = [scene.object_by_id(oid).box for oid in record.target_object_ids]
    if not gts:
        return 1.0
    if preds is None or not preds.boxes:
        return 0.0
    pairs = match(preds.boxes, gts, cfg)
    return len(pairs) / len(gts)


@dataclass(frozen=True)
class EvalReport:
    overall_acc: float
    per_type_acc: dict
    per_type_counts: dict
    strict_record_acc: float
    n_records: int
    config: EvalConfig = field(default_factory=EvalConfig)

    def to_dict(self) -> dict:
        return {
            "overall_acc": self.overall_acc,
            "per_type_acc": {
                t.value: self.per_type_acc.get(t) for t in TYPE_ORDER
            },
            "per_type_counts": {t.value: self.per_type_counts.get(t, 0) for t in TYPE_ORDER},
            "strict_record_acc": self.strict_record_acc,
            "n_records": self.n_records,
            "config": self.config.to_dict(),
        }

    def format_table(self) -> str:
        """Aligned text table in the fixed column order, accuracies in %."""
        headers = [t.value.capitalize() for t in TYPE_ORDER] + ["Overall"]
        accs = [self.per_type_acc.get(t) for t in TYPE_ORDER] + [self.overall_acc]
        counts = [str(self.per_type_counts.get(t, 0)) for t in TYPE_ORDER] + [str(self.n_records)]
        cells = ["-" if a is None else f"{100.0 * a:.2f}" for a in accs]
        widths = [max(len(h), len(c), len(k)) for h, c, k in zip(headers, cells, counts)]
        fmt = "  ".join(f"{{:>{w}}}" for w in widths)
        lines = [
            fmt.format(*headers),
            fmt.format(*cells),
            fmt.format(*counts),
            f"Acc@{self.config.k_iou:g}IoU | strict {100.0 * self.strict_record_acc:.2f} "
            f"| {self.n_records} records",
        ]
        return "\n".join(lines)


def evaluate(
    records: Sequence[QALRecord],
    scenes: Mapping[str, Scene],
    preds: Iterable[PredictionSet],
    cfg: EvalConfig = EvalConfig(),
    jobs: int = 1,
) -> EvalReport:
    """Score a prediction stream against records; unpredicted records score 0.

    ``jobs`` fans record scoring out over threads; the reduction is
    order-independent so results are identical at any parallelism.
    """
    by_record: dict[str, PredictionSet] = {}
    known = {r.record_id for r in records}
    for ps in preds:
        if ps.record_id not in known:
            raise ValueError(f"prediction references unknown record_id {ps.record_id}")
        by_record[ps.record_id] = ps

    def score(rec: QALRecord) -> float:
        scene = scenes.get(rec.scene_id)
        if scene is None:
            raise ValueError(f"record {rec.record_id}: missing scene {rec.scene_id}")
        return record_accuracy(by_record.get(rec.record_id), rec, scene, cfg)

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            scores = list(pool.map(score, records))
    else:
        scores = [score(rec) for rec in records]

    per_type_scores: dict[ReasoningType, list[float]] = {t: [] for t in TYPE_ORDER}
    for rec, acc in zip(records, scores):
        per_type_scores[rec.reasoning_type].append(acc)

    n = len(scores)
    return EvalReport(
        overall_acc=float(np.mean(scores)) if n else 0.0,
        per_type_acc={
            t: (float(np.mean(v)) if v else None) for t, v in per_type_scores.items()
        },
        per_type_counts={t: len(v) for t, v in per_type_scores.items()},
        strict_record_acc=(sum(1 for s in scores if s >= 1.0) / n) if n else 0.0,
        n_records=n,
        config=cfg,
    )


def evaluate_at_thresholds(
    records: Sequence[QALRecord],
    scenes: Mapping[str, Scene],
    preds: Sequence[PredictionSet],
    cfg: EvalConfig,
    thresholds: Sequence[float],
) -> dict[float, EvalReport]:
    """Re-evaluate the same predictions at several IoU thresholds."""
    return {k: evaluate(records, scenes, preds, replace(cfg, k_iou=k)) for k in thresholds}
