"""Adaptive moment estimation with decoupled weight decay.

Decay multiplies each parameter by (1 - decay_schedule * weight_decay) every
step, independently of the learning rate (at learning_rate = 0 a step is a
pure shrink). The gradient step is the usual bias-corrected moment update.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError


class AdamW:
    def __init__(
        self,
        arrays,
        learning_rate: float,
        weight_decay: float = 0.0,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
        decay_schedule: float = 1.0,
    ):
        if learning_rate < 0.0:
            raise InvalidInputError("learning_rate must be >= 0")
        if weight_decay < 0.0:
            raise InvalidInputError("weight_decay must be >= 0")
        if not (0.0 <= beta1 < 1.0 and 0.0 <= beta2 < 1.0):
            raise InvalidInputError("moment decays must lie in [0, 1)")
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.decay_schedule = decay_schedule
        self.step_count = 0
        self._m = [np.zeros_like(a) for a in arrays]
        self._v = [np.zeros_like(a) for a in arrays]

    def step(self, arrays, grads) -> None:
        """Update ``arrays`` in place to descend along ``grads``."""
        if len(arrays) != len(self._m) or len(grads) != len(self._m):
            raise InvalidInputError("arrays/grads do not match the optimizer state")
        self.step_count += 1
        t = self.step_count
        shrink = 1.0 - self.decay_schedule * self.weight_decay
        bc1 = 1.0 - self.beta1**t
        bc2 = 1.0 - self.beta2**t
        for a, g, m, v in zip(arrays, grads, self._m, self._v):
            if self.weight_decay:
                a *= shrink
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            a -= self.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
