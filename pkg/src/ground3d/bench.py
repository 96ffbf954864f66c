"""Throughput benchmark for the intersection kernels.

Generates seeded random box pairs and times every importable kernel backend
on the same batch, so the compiled/pure gap is directly visible.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .geometry import box_params_batch
from .geometry.kernel import available_backends
from .scene import Box3D


@dataclass(frozen=True)
class BenchResult:
    backend: str
    n_pairs: int
    seconds: float
    pairs_per_second: float
    mean_iou: float


def random_boxes(n: int, rng: np.random.Generator, extent_low=0.1, extent_high=3.0):
    """Boxes with extents in [extent_low, extent_high] m and nearby centers."""
    centers = rng.uniform(-2.0, 2.0, (n, 3))
    sizes = rng.uniform(extent_low, extent_high, (n, 3))
    eulers = rng.uniform(-np.pi, np.pi, (n, 3))
    return [
        Box3D(center=tuple(c), size=tuple(s), euler=tuple(e))
        for c, s, e in zip(centers, sizes, eulers)
    ]


def run_bench(n_pairs: int = 100_000, seed: int = 0, max_pure_pairs: int = 20_000):
    """Time each backend on the same seeded pairs.

    The pure-Python backend is orders of magnitude slower, so it runs on a
    capped subset and its rate is reported from that subset.
    """
    rng = np.random.default_rng(seed)
    a = box_params_batch(random_boxes(n_pairs, rng))
    b = box_params_batch(random_boxes(n_pairs, rng))

    results = []
    for name, module in sorted(available_backends().items()):
        n = n_pairs if name == "compiled" else min(n_pairs, max_pure_pairs)
        out = np.empty(n)
        t0 = time.perf_counter()
        module.iou_pairs(a[:n], b[:n], out)
        seconds = time.perf_counter() - t0
        results.append(
            BenchResult(
                backend=name,
                n_pairs=n,
                seconds=seconds,
                pairs_per_second=n / seconds if seconds > 0 else float("inf"),
                mean_iou=float(out.mean()),
            )
        )
    return results
