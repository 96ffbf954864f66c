"""Plain gradient descent on the box loss.

A trainability probe for the loss surface, not a production optimizer: start
from some box, descend ``loss_iou`` toward a target, and report the loss
trajectory.  The loss is piecewise-smooth with non-vanishing slope at the
optimum, so constant-step descent ends in a small oscillation band; the
best-loss iterate is therefore tracked and returned as the fit result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..scene import Box3D
from .losses import box_from_vector, box_params_vector, loss_iou_grad

MIN_SIZE = 1e-3


class FitDiverged(RuntimeError):
    def __init__(self, step: int, loss: float, initial: float):
        self.step = step
        self.loss = loss
        super().__init__(
            f"fit diverged at step {step}: loss {loss:.4g} exceeds 10x initial {initial:.4g}"
        )


@dataclass(frozen=True)
class FitResult:
    losses: tuple  # loss recorded before each step, then the final loss
    box: Box3D  # best-loss iterate of the run
    last_box: Box3D  # parameters after the final step

    @property
    def best_loss(self) -> float:
        return min(self.losses)


def fit_box(initial: Box3D, target: Box3D, steps: int = 500, lr: float = 0.05) -> FitResult:
    """Descend the box loss from ``initial`` toward ``target``.

    Sizes are clamped to stay positive after each step.  Raises FitDiverged
    when the loss exceeds 10x its initial value.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    params = box_params_vector(initial)
    losses = []
    initial_loss = None
    best_loss = np.inf
    best_params = params
    for step in range(steps):
        loss, grad = loss_iou_grad(params, target)
        if initial_loss is None:
            initial_loss = loss
        elif initial_loss > 0.0 and loss > 10.0 * initial_loss:
            raise FitDiverged(step, loss, initial_loss)
        if loss < best_loss:
            best_loss = loss
            best_params = params
        losses.append(loss)
        params = params - lr * grad
        params[3:6] = np.maximum(params[3:6], MIN_SIZE)
    final_loss, _ = loss_iou_grad(params, target)
    losses.append(final_loss)
    if final_loss < best_loss:
        best_params = params
    return FitResult(
        losses=tuple(losses), box=box_from_vector(best_params), last_box=box_from_vector(params)
    )
