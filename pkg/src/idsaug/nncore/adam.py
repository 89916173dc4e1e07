"""Adam optimizer with bias correction."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, ShapeError


class Adam:
    """Holds per-parameter first/second moment accumulators.

    ``step`` updates the given parameter arrays in place; their shapes must
    match the list the optimizer was built from.
    """

    def __init__(self, params: list[np.ndarray], lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, epsilon: float = 1e-8):
        if lr <= 0.0:
            raise ConfigError("learning rate must be positive")
        if not (0.0 < beta1 < 1.0 and 0.0 < beta2 < 1.0):
            raise ConfigError("betas must lie in (0, 1)")
        if epsilon <= 0.0:
            raise ConfigError("epsilon must be positive")
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.epsilon = float(epsilon)
        self.step_count = 0
        self._shapes = [p.shape for p in params]
        self.first = [np.zeros_like(p) for p in params]
        self.second = [np.zeros_like(p) for p in params]

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]):
        if len(params) != len(self._shapes) or len(grads) != len(self._shapes):
            raise ShapeError("parameter/gradient list length does not match optimizer state")
        for p, g, shape in zip(params, grads, self._shapes):
            if p.shape != shape or g.shape != shape:
                raise ShapeError(f"shape mismatch: expected {shape}, got {p.shape}/{g.shape}")
        self.step_count += 1
        t = self.step_count
        correct1 = 1.0 - self.beta1**t
        correct2 = 1.0 - self.beta2**t
        for p, g, m, v in zip(params, grads, self.first, self.second):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            m_hat = m / correct1
            v_hat = v / correct2
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.epsilon)
