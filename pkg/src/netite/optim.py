"""ADAM over the flattened parameter vector."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import NumericError, ShapeError


@dataclass
class AdamState:
    size: int
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: np.ndarray = field(default=None)
    v: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.m is None:
            self.m = np.zeros(self.size)
        if self.v is None:
            self.v = np.zeros(self.size)


def adam_step(state: AdamState, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """One update with bias correction; mutates `state`, returns new theta."""
    if theta.shape != (state.size,) or grad.shape != (state.size,):
        raise ShapeError(f"adam_step expects vectors of size {state.size}")
    if not np.all(np.isfinite(grad)):
        bad = int(np.flatnonzero(~np.isfinite(grad))[0])
        raise NumericError(f"non-finite gradient at coordinate {bad}")
    state.step += 1
    state.m = state.beta1 * state.m + (1 - state.beta1) * grad
    state.v = state.beta2 * state.v + (1 - state.beta2) * grad * grad
    m_hat = state.m / (1 - state.beta1 ** state.step)
    v_hat = state.v / (1 - state.beta2 ** state.step)
    return theta - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
