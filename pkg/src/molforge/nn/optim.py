"""Adam and a reduce-on-plateau learning-rate schedule."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor, TensorError


class Adam:
    def __init__(
        self,
        params: list[Tensor],
        lr: float = 1e-4,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None

    def step(self) -> None:
        self.t += 1
        for i, p in enumerate(self.params):
            if p.grad is None:
                continue  # parameter untouched this pass; zero gradient
            if p.grad.shape != p.data.shape:
                raise TensorError(
                    f"gradient shape {p.grad.shape} does not match parameter shape {p.data.shape}"
                )
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * p.grad
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * p.grad**2
            m_hat = self.m[i] / (1.0 - self.beta1**self.t)
            v_hat = self.v[i] / (1.0 - self.beta2**self.t)
            p.data = p.data - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def state_arrays(self) -> dict[str, np.ndarray]:
        state = {"t": np.array([self.t], dtype=np.int64), "lr": np.array([self.lr])}
        for i in range(len(self.params)):
            state[f"m.{i}"] = self.m[i]
            state[f"v.{i}"] = self.v[i]
        return state

    def load_state_arrays(self, state: dict[str, np.ndarray]) -> None:
        self.t = int(state["t"][0])
        self.lr = float(state["lr"][0])
        for i in range(len(self.params)):
            self.m[i] = np.array(state[f"m.{i}"])
            self.v[i] = np.array(state[f"v.{i}"])


class PlateauScheduler:
    """Halve the learning rate after `patience` epochs without improvement.

    Improvement means a strictly lower validation metric than the best
    seen so far. The rate never drops below `min_lr`.
    """

    def __init__(
        self,
        optimizer: Adam,
        patience: int = 10,
        decay: float = 0.5,
        min_lr: float = 1e-6,
    ):
        self.optimizer = optimizer
        self.patience = patience
        self.decay = decay
        self.min_lr = min_lr
        self.best = np.inf
        self.stagnant = 0

    def step(self, metric: float) -> bool:
        """Record one validation metric; returns True if the rate decayed."""
        if metric < self.best:
            self.best = metric
            self.stagnant = 0
            return False
        self.stagnant += 1
        if self.stagnant >= self.patience:
            self.stagnant = 0
            new_lr = max(self.optimizer.lr * self.decay, self.min_lr)
            decayed = new_lr < self.optimizer.lr
            self.optimizer.lr = new_lr
            return decayed
        return False
