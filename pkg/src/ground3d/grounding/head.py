"""The numerical grounding head.

Forward path: score every scene feature against the conditioning embedding
(scaled dot-product logits of the look-back attention), keep the top-k rows
as object queries, refine them through M decoder layers (text cross-attention,
scene cross-attention, feed-forward, each with a residual), then decode a box
and a matching score per query.

Plain numpy, no autodiff: the computation graph is small and fixed.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..scene import Box3D, GroundedBox
from .features import LocEmbedding, SceneFeatures

DEFAULT_QUERIES = 256

# Box head output layout: 3 center offsets, 3 log-sizes, 2 yaw components.
BOX_RAW_DIM = 8
CENTER_OFFSET_LIMIT = 2.0  # m, tanh-bounded
SIZE_CLAMP = (0.01, 10.0)  # m


@dataclass(frozen=True)
class DecoderLayer:
    """Parameters of one decoder layer."""

    text_v: np.ndarray  # (d, d) value projection of the single-token block
    scene_q: np.ndarray  # (d, d)
    scene_k: np.ndarray  # (d, d)
    scene_v: np.ndarray  # (d, d)
    ff_w1: np.ndarray  # (d_ff, d)
    ff_b1: np.ndarray  # (d_ff,)
    ff_w2: np.ndarray  # (d, d_ff)
    ff_b2: np.ndarray  # (d,)


@dataclass(frozen=True)
class GroundingHead:
    """All parameters plus the (d, k_queries, M) configuration."""

    w_q: np.ndarray  # (d, d) relevance query projection
    w_k: np.ndarray  # (d, d) relevance key projection
    w_v: np.ndarray  # (d, d) text value projection shared with decode
    layers: tuple
    box_w: np.ndarray  # (8, d)
    box_b: np.ndarray  # (8,)
    score_w: np.ndarray  # (d,)
    score_b: float
    k_queries: int = DEFAULT_QUERIES

    def __post_init__(self):
        arrays = [self.w_q, self.w_k, self.w_v, self.box_w, self.box_b, self.score_w]
        for layer in self.layers:
            arrays += [
                layer.text_v,
                layer.scene_q,
                layer.scene_k,
                layer.scene_v,
                layer.ff_w1,
                layer.ff_b1,
                layer.ff_w2,
                layer.ff_b2,
            ]
        if not all(np.isfinite(a).all() for a in arrays) or not math.isfinite(self.score_b):
            raise ValueError("head parameters must be finite")
        if self.k_queries < 1:
            raise ValueError("k_queries must be >= 1")

    @property
    def dim(self) -> int:
        return self.w_q.shape[0]

    @property
    def depth(self) -> int:
        return len(self.layers)


def init_head(
    d: int = 64,
    k_queries: int = DEFAULT_QUERIES,
    depth: int = 2,
    d_ff: int = 0,
    seed: int = 0,
    scale: float = 0.1,
) -> GroundingHead:
    """Gaussian-initialized head; ``d_ff`` defaults to 2 * d."""
    rng = np.random.default_rng(seed)
    d_ff = d_ff or 2 * d
    s = scale / math.sqrt(d)

    def mat(rows, cols):
        return rng.normal(0.0, s, (rows, cols))

    layers = tuple(
        DecoderLayer(
            text_v=mat(d, d),
            scene_q=mat(d, d),
            scene_k=mat(d, d),
            scene_v=mat(d, d),
            ff_w1=mat(d_ff, d),
            ff_b1=np.zeros(d_ff),
            ff_w2=mat(d, d_ff),
            ff_b2=np.zeros(d),
        )
        for _ in range(depth)
    )
    return GroundingHead(
        w_q=mat(d, d),
        w_k=mat(d, d),
        w_v=mat(d, d),
        layers=layers,
        box_w=mat(BOX_RAW_DIM, d),
        box_b=np.zeros(BOX_RAW_DIM),
        score_w=rng.normal(0.0, s, d),
        score_b=0.0,
        k_queries=k_queries,
    )


def relevance_scores(fs: SceneFeatures, h: LocEmbedding, head: GroundingHead) -> np.ndarray:
    """Pre-softmax look-back logits: s_i = (W_q f_i) . (W_k h) / sqrt(d).

    With a single conditioning token the softmax itself would be the constant
    1, so the logits are the meaningful relevance signal.
    """
    if fs.dim != head.dim or h.dim != head.dim:
        raise ValueError(f"dimension mismatch: features {fs.dim}, h {h.dim}, head {head.dim}")
    key = head.w_k @ h.vector
    return (fs.features @ head.w_q.T) @ key / math.sqrt(head.dim)


@dataclass(frozen=True)
class QuerySet:
    """Selected object queries with their seed positions and source rows."""

    indices: np.ndarray  # (k,) into the scene feature rows
    features: np.ndarray  # (k, d)
    positions: np.ndarray  # (k, 3)


def select_queries(scores: np.ndarray, fs: SceneFeatures, k: int) -> QuerySet:
    """Indices of the k largest scores; ties resolve to the lower index.

    k is capped at N, and the selection is ordered by descending score.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = len(scores)
    k = min(k, n)
    order = np.argsort(-scores, kind="stable")[:k]
    return QuerySet(
        indices=order,
        features=fs.features[order],
        positions=fs.positions[order],
    )


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def decode(
    queries: QuerySet,
    h: LocEmbedding,
    fs: SceneFeatures,
    head: GroundingHead,
    return_attention: bool = False,
):
    """Run the query features through the decoder stack.

    Per layer: (a) cross-attention to the single conditioning token, whose
    softmax weight is identically 1, so the block reduces to adding the
    projected value; (b) softmax cross-attention over all scene rows;
    (c) a two-layer feed-forward.  Residual connections wrap each block.

    Returns the (k, d) refined features, plus the per-layer scene-attention
    matrices when ``return_attention`` is set.
    """
    if fs.dim != head.dim or h.dim != head.dim:
        raise ValueError(f"dimension mismatch: features {fs.dim}, h {h.dim}, head {head.dim}")
    x = queries.features.copy()
    scale = 1.0 / math.sqrt(head.dim)
    attentions = []
    text_value = head.w_v @ h.vector
    for layer in head.layers:
        x = x + (layer.text_v @ text_value)[None, :]
        logits = (x @ layer.scene_q.T) @ (fs.features @ layer.scene_k.T).T * scale
        attn = _softmax_rows(logits)
        if return_attention:
            attentions.append(attn)
        x = x + attn @ (fs.features @ layer.scene_v.T)
        hidden = np.maximum(x @ layer.ff_w1.T + layer.ff_b1, 0.0)
        x = x + hidden @ layer.ff_w2.T + layer.ff_b2
    if return_attention:
        return x, attentions
    return x


def predict_boxes(decoded: np.ndarray, queries: QuerySet, head: GroundingHead) -> list[GroundedBox]:
    """Decode each refined query into a scored oriented box.

    center = seed position + tanh-bounded offset; size = clamped exp of the
    raw log-size; yaw from an atan2 pair; pitch = roll = 0; confidence from a
    sigmoid score head.  Zero parameters therefore decode to a unit box at the
    seed with confidence 0.5.
    """
    raw = decoded @ head.box_w.T + head.box_b
    scores = decoded @ head.score_w + head.score_b
    out = []
    for row, seed_pos, score in zip(raw, queries.positions, scores):
        center = seed_pos + CENTER_OFFSET_LIMIT * np.tanh(row[0:3])
        size = np.clip(np.exp(row[3:6]), *SIZE_CLAMP)
        yaw = math.atan2(row[7], row[6])
        confidence = 1.0 / (1.0 + math.exp(-score))
        out.append(
            GroundedBox(
                box=Box3D(center=tuple(center), size=tuple(size), euler=(yaw, 0.0, 0.0)),
                confidence=confidence,
            )
        )
    return out


def ground(fs: SceneFeatures, h: LocEmbedding, head: GroundingHead) -> list[GroundedBox]:
    """Full forward pass: score, select, decode, predict."""
    scores = relevance_scores(fs, h, head)
    queries = select_queries(scores, fs, head.k_queries)
    decoded = decode(queries, h, fs, head)
    return predict_boxes(decoded, queries, head)


def _encode_array(a: np.ndarray) -> dict:
    return {"shape": list(a.shape), "data": a.reshape(-1).tolist()}


def _decode_array(d: dict) -> np.ndarray:
    return np.array(d["data"], dtype=np.float64).reshape(d["shape"])


def head_to_dict(head: GroundingHead) -> dict:
    return {
        "d": head.dim,
        "k_queries": head.k_queries,
        "depth": head.depth,
        "w_q": _encode_array(head.w_q),
        "w_k": _encode_array(head.w_k),
        "w_v": _encode_array(head.w_v),
        "layers": [
            {
                "text_v": _encode_array(l.text_v),
                "scene_q": _encode_array(l.scene_q),
                "scene_k": _encode_array(l.scene_k),
                "scene_v": _encode_array(l.scene_v),
                "ff_w1": _encode_array(l.ff_w1),
                "ff_b1": _encode_array(l.ff_b1),
                "ff_w2": _encode_array(l.ff_w2),
                "ff_b2": _encode_array(l.ff_b2),
            }
            for l in head.layers
        ],
        "box_w": _encode_array(head.box_w),
        "box_b": _encode_array(head.box_b),
        "score_w": _encode_array(head.score_w),
        "score_b": head.score_b,
    }


def head_from_dict(data: dict) -> GroundingHead:
    layers = tuple(
        DecoderLayer(**{k: _decode_array(v) for k, v in layer.items()})
        for layer in data["layers"]
    )
    return GroundingHead(
        w_q=_decode_array(data["w_q"]),
        w_k=_decode_array(data["w_k"]),
        w_v=_decode_array(data["w_v"]),
        layers=layers,
        box_w=_decode_array(data["box_w"]),
        box_b=_decode_array(data["box_b"]),
        score_w=_decode_array(data["score_w"]),
        score_b=float(data["score_b"]),
        k_queries=int(data["k_queries"]),
    )


def save_head(head: GroundingHead, path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(head_to_dict(head), fh)
    os.replace(tmp, path)


def load_head(path) -> GroundingHead:
    with open(path, encoding="utf-8") as fh:
        return head_from_dict(json.load(fh))
