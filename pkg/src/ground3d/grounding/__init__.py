"""Numerical grounding head, featurization, losses, and the box optimizer."""

from .features import (
    DEFAULT_SALT,
    LocEmbedding,
    SceneFeatures,
    category_embedding,
    featurize_scene,
    positional_encoding,
)
from .fit import FitDiverged, FitResult, fit_box
from .head import (
    DecoderLayer,
    GroundingHead,
    QuerySet,
    decode,
    ground,
    head_from_dict,
    head_to_dict,
    init_head,
    load_head,
    predict_boxes,
    relevance_scores,
    save_head,
    select_queries,
)
from .losses import (
    LossWeights,
    TotalLoss,
    box_from_vector,
    box_params_vector,
    loss_contrast,
    loss_contrast_grad,
    loss_iou,
    loss_iou_grad,
    total_loss,
)

__all__ = [
    "DEFAULT_SALT",
    "DecoderLayer",
    "FitDiverged",
    "FitResult",
    "GroundingHead",
    "LocEmbedding",
    "LossWeights",
    "QuerySet",
    "SceneFeatures",
    "TotalLoss",
    "box_from_vector",
    "box_params_vector",
    "category_embedding",
    "decode",
    "featurize_scene",
    "fit_box",
    "ground",
    "head_from_dict",
    "head_to_dict",
    "init_head",
    "load_head",
    "loss_contrast",
    "loss_contrast_grad",
    "loss_iou",
    "loss_iou_grad",
    "positional_encoding",
    "predict_boxes",
    "relevance_scores",
    "save_head",
    "select_queries",
    "total_loss",
]
