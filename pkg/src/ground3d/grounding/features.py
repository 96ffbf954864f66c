"""Deterministic scene featurization.

Stands in for a frozen point-cloud encoder: each object contributes one
feature row per (possibly jittered) seed position, built from a sinusoidal
encoding of the position concatenated with a hash-seeded category embedding.
Downstream code relies only on this contract: deterministic, and informative
about position and category.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from ..scene import Scene

# Salt for the category-embedding hash.  Chosen so that all distinct
# categories of the shipped affordance table stay below 0.5 cosine
# similarity at d=64 (measured max 0.478); regenerate if the table changes
# dramatically.
DEFAULT_SALT = "ground3d-cat-v1.374"


@dataclass(frozen=True)
class SceneFeatures:
    """Per-seed-point features: rows of ``features`` align with ``positions``."""

    features: np.ndarray  # (N, d)
    positions: np.ndarray  # (N, 3)
    scene_id: str

    def __post_init__(self):
        if self.features.ndim != 2 or self.positions.shape != (len(self.features), 3):
            raise ValueError(
                f"features {self.features.shape} and positions {self.positions.shape} disagree"
            )
        if len(self.features) < 1:
            raise ValueError("scene features need at least one row")
        if not (np.isfinite(self.features).all() and np.isfinite(self.positions).all()):
            raise ValueError("scene features must be finite")
        self.features.flags.writeable = False
        self.positions.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class LocEmbedding:
    """The reasoning-side embedding that conditions the grounding head."""

    vector: np.ndarray  # (d,)

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=np.float64)
        if vec.ndim != 1:
            raise ValueError(f"embedding must be 1-D, got shape {vec.shape}")
        if not np.isfinite(vec).all():
            raise ValueError("embedding must be finite")
        vec.flags.writeable = False
        object.__setattr__(self, "vector", vec)

    @property
    def dim(self) -> int:
        return len(self.vector)


def category_embedding(category: str, dim: int, salt: str = DEFAULT_SALT) -> np.ndarray:
    """Unit-norm embedding drawn from an rng seeded by hash(category, salt)."""
    digest = hashlib.blake2b(f"{salt}:{category}".encode(), digest_size=8).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "big"))
    vec = rng.standard_normal(dim)
    return vec / np.linalg.norm(vec)


def positional_encoding(point, dim: int) -> np.ndarray:
    """Sinusoidal encoding of a 3D point into ``dim`` slots.

    Slots cycle through (axis, frequency, sin/cos) lexicographically with
    frequencies 0.5 * 2^k, so any dim is fillable.
    """
    point = np.asarray(point, dtype=np.float64)
    out = np.empty(dim)
    n_freq = (dim + 5) // 6
    freqs = 0.5 * np.exp2(np.arange(n_freq))
    angles = point[None, :] * freqs[:, None]  # (n_freq, 3)
    table = np.stack([np.sin(angles), np.cos(angles)], axis=-1).reshape(-1)
    out[:] = table[:dim]
    return out


def featurize_scene(
    scene: Scene,
    d: int = 64,
    seed: int = 0,
    jitter: int = 3,
    jitter_sigma: float = 0.1,
    salt: str = DEFAULT_SALT,
) -> SceneFeatures:
    """One feature row per object plus ``jitter`` jittered duplicates each.

    The first half of each row encodes the (jittered) seed position, the
    second half the object category.
    """
    if d < 8:
        raise ValueError(f"feature dimension must be >= 8, got {d}")
    rng = np.random.default_rng(seed)
    d_pos = d // 2
    d_cat = d - d_pos
    rows = []
    positions = []
    for obj in scene.objects:
        cat_vec = category_embedding(obj.category, d_cat, salt)
        center = np.asarray(obj.box.center)
        seeds = [center]
        for _ in range(jitter):
            seeds.append(center + rng.normal(0.0, jitter_sigma, 3))
        for pos in seeds:
            rows.append(np.concatenate([positional_encoding(pos, d_pos), cat_vec]))
            positions.append(pos)
    return SceneFeatures(
        features=np.array(rows), positions=np.array(positions), scene_id=scene.scene_id
    )
