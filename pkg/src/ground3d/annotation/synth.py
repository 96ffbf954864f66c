"""Synthetic indoor scenes with the same schema as real annotated scans.

Every scene carries a guaranteed kit of objects so that all five question
generators find material, plus a random assortment for variety.  Generation
is fully determined by (scene_id, seed).
"""

from __future__ import annotations

import hashlib
import random

from ..scene import AnnotatedObject, Box3D, Scene

# Nominal (w, l, h) meters per category; jittered +-10% at placement.
CATEGORY_SIZES = {
    "armchair": (0.8, 0.8, 0.9),
    "bed": (1.6, 2.0, 0.55),
    "bench": (1.2, 0.4, 0.45),
    "board_game": (0.4, 0.4, 0.08),
    "book": (0.2, 0.28, 0.04),
    "bookshelf": (0.9, 0.3, 1.8),
    "cabinet": (0.9, 0.45, 0.8),
    "ceiling_light": (0.4, 0.4, 0.15),
    "chair": (0.5, 0.5, 0.9),
    "cleaning_supplies": (0.25, 0.18, 0.3),
    "clock": (0.3, 0.08, 0.3),
    "coffee_maker": (0.25, 0.35, 0.4),
    "coffee_table": (1.0, 0.6, 0.45),
    "desk": (1.3, 0.7, 0.75),
    "dresser": (1.1, 0.5, 0.9),
    "first_aid_kit": (0.3, 0.2, 0.15),
    "floor_lamp": (0.35, 0.35, 1.6),
    "kettle": (0.22, 0.22, 0.25),
    "kitchen_cabinet": (0.8, 0.35, 0.7),
    "knife": (0.25, 0.04, 0.03),
    "lamp": (0.3, 0.3, 0.5),
    "laptop": (0.33, 0.23, 0.03),
    "lighter": (0.08, 0.03, 0.02),
    "medicine_bottle": (0.07, 0.07, 0.12),
    "microwave": (0.5, 0.35, 0.3),
    "mirror": (0.6, 0.05, 0.9),
    "monitor": (0.55, 0.08, 0.35),
    "nightstand": (0.5, 0.4, 0.55),
    "oven": (0.6, 0.6, 0.9),
    "picture": (0.5, 0.04, 0.4),
    "pillow": (0.5, 0.35, 0.15),
    "plant": (0.35, 0.35, 0.6),
    "recycling_bin": (0.35, 0.35, 0.5),
    "refrigerator": (0.7, 0.7, 1.8),
    "rug": (2.0, 1.4, 0.02),
    "scissors": (0.18, 0.07, 0.02),
    "shelf": (0.8, 0.25, 0.35),
    "sink": (0.55, 0.45, 0.25),
    "sofa": (2.0, 0.9, 0.85),
    "speaker": (0.2, 0.2, 0.35),
    "stove": (0.6, 0.6, 0.9),
    "table": (1.4, 0.9, 0.75),
    "toy": (0.25, 0.25, 0.2),
    "trash_can": (0.35, 0.35, 0.5),
    "tv": (1.2, 0.1, 0.7),
    "washing_machine": (0.6, 0.6, 0.85),
    "water_bottle": (0.08, 0.08, 0.25),
    "window": (1.2, 0.1, 1.2),
}

# Always placed: covers nearest/above relations, every functional tag used by
# the default question pools, mood and hazard lists, and both safety rules.
GUARANTEED = [
    "stove",
    "refrigerator",
    "sink",
    "trash_can",
    "trash_can",
    "recycling_bin",
    "table",
    "chair",
    "chair",
    "desk",
    "bed",
    "sofa",
    "lamp",
    "floor_lamp",
    "plant",
    "tv",
    "clock",
    "knife",
    "medicine_bottle",
]

OPTIONAL = sorted(set(CATEGORY_SIZES) - set(GUARANTEED))

# Wall-mounted or elevated categories get a (min, max) center height; others
# rest on the floor.
MOUNTED_HEIGHTS = {
    "ceiling_light": (2.2, 2.4),
    "clock": (1.4, 1.8),
    "kitchen_cabinet": (1.3, 1.7),
    "mirror": (1.2, 1.6),
    "picture": (1.2, 1.7),
    "shelf": (0.3, 1.9),
    "tv": (0.9, 1.3),
    "window": (1.2, 1.6),
}


def scene_seed(master_seed: int, scene_id: str) -> int:
    """Stable per-scene seed derived from the master seed and scene id."""
    digest = hashlib.blake2b(f"{master_seed}:{scene_id}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def make_scene(scene_id: str, seed: int = 0) -> Scene:
    rng = random.Random(scene_seed(seed, scene_id))
    room_w = rng.uniform(4.5, 8.0)
    room_l = rng.uniform(4.5, 8.0)
    room_h = rng.uniform(2.5, 3.0)

    objects: list[AnnotatedObject] = []
    placed: list[tuple[str, float, float]] = []  # (category, x, y)

    def place(category: str, z_center=None, xy=None, yaw=None):
        w, l, h = CATEGORY_SIZES[category]
        scale = rng.uniform(0.9, 1.1)
        w, l, h = w * scale, l * scale, h * scale
        if xy is None:
            for _ in range(20):
                x = rng.uniform(-room_w / 2 + 0.5, room_w / 2 - 0.5)
                y = rng.uniform(-room_l / 2 + 0.5, room_l / 2 - 0.5)
                # Same-category centers must stay resolvable as anchors.
                if all(
                    c != category or (x - px) ** 2 + (y - py) ** 2 > 0.25**2
                    for c, px, py in placed
                ):
                    break
            xy = (x, y)
        if z_center is None:
            if category in MOUNTED_HEIGHTS:
                lo, hi = MOUNTED_HEIGHTS[category]
                z_center = rng.uniform(lo, min(hi, room_h - h / 2))
            else:
                z_center = h / 2
        if yaw is None:
            yaw = rng.uniform(-3.14159, 3.14159)
        obj = AnnotatedObject(
            object_id=len(objects),
            category=category,
            box=Box3D(center=(xy[0], xy[1], z_center), size=(w, l, h), euler=(yaw, 0.0, 0.0)),
        )
        objects.append(obj)
        placed.append((category, xy[0], xy[1]))
        return obj

    for category in GUARANTEED:
        place(category)

    # Stack a readable object on the table and light the spot from above:
    # guarantees above-relations for the spatial generator.
    table = next(o for o in objects if o.category == "table")
    tx, ty, tz = table.box.center
    table_top = tz + table.box.size[2] / 2
    book_h = CATEGORY_SIZES["book"][2]
    place("book", z_center=table_top + book_h / 2, xy=(tx, ty))
    place("ceiling_light", xy=(tx, ty))

    # Shelving at both reach levels so either safety rule can fire.
    place("shelf", z_center=rng.uniform(1.3, 1.9))
    place("shelf", z_center=rng.uniform(0.3, 0.8))

    for category in rng.sample(OPTIONAL, k=rng.randint(3, 7)):
        place(category)

    bounds = Box3D(center=(0.0, 0.0, room_h / 2), size=(room_w + 2.0, room_l + 2.0, room_h))
    return Scene(scene_id=scene_id, objects=tuple(objects), room_bounds=bounds)


def make_scenes(count: int, seed: int = 0) -> list[Scene]:
    return [make_scene(f"scene{i:04d}", seed=seed) for i in range(count)]
