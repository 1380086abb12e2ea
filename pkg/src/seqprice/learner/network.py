"""Small feedforward networks with explicit backprop.

Two shapes: a 2-hidden-layer tanh MLP and a bare affine map (the "linear"
architecture).  Parameters live in plain numpy arrays; ``flat``/``set_flat``
expose them as one vector so finite-difference tests can perturb any single
coordinate.
"""

from __future__ import annotations

import numpy as np


class FeedForward:
    """input -> [hidden tanh x2] -> output, or input -> output when linear."""

    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        hidden: int,
        linear: bool,
        rng: np.random.Generator,
    ):
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.hidden = hidden
        self.linear = linear
        dims = [in_dim, out_dim] if linear else [in_dim, hidden, hidden, out_dim]
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for d_in, d_out in zip(dims, dims[1:]):
            scale = 1.0 / np.sqrt(max(1, d_in))
            self.weights.append(rng.uniform(-scale, scale, size=(d_in, d_out)))
            self.biases.append(np.zeros(d_out))
        self._cache: list[np.ndarray] = []

    def forward(self, x: np.ndarray) -> np.ndarray:
        """x: (B, in_dim) -> (B, out_dim); caches activations for backward."""
        self._cache = [x]
        h = x
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if k < last:
                h = np.tanh(h)
            self._cache.append(h)
        return h

    def backward(self, grad_out: np.ndarray) -> list[np.ndarray]:
        """Gradients of sum(forward(x) * grad_out) in ``flat`` order."""
        grads_w = [np.empty(0)] * len(self.weights)
        grads_b = [np.empty(0)] * len(self.biases)
        g = grad_out
        for k in range(len(self.weights) - 1, -1, -1):
            h_in = self._cache[k]
            if k < len(self.weights) - 1:
                # cached activation is already tanh'd
                act = self._cache[k + 1]
                g = g * (1.0 - act * act)
            grads_w[k] = h_in.T @ g
            grads_b[k] = g.sum(axis=0)
            g = g @ self.weights[k].T
        out = []
        for gw, gb in zip(grads_w, grads_b):
            out.append(gw.ravel())
            out.append(gb.ravel())
        return out

    # ------------------------------------------------------------- params

    def flat(self) -> np.ndarray:
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts.append(w.ravel())
            parts.append(b.ravel())
        return np.concatenate(parts) if parts else np.empty(0)

    def set_flat(self, vec: np.ndarray) -> None:
        pos = 0
        for k in range(len(self.weights)):
            w, b = self.weights[k], self.biases[k]
            self.weights[k] = vec[pos : pos + w.size].reshape(w.shape).copy()
            pos += w.size
            self.biases[k] = vec[pos : pos + b.size].copy()
            pos += b.size

    def copy(self) -> "FeedForward":
        clone = object.__new__(FeedForward)
        clone.in_dim = self.in_dim
        clone.out_dim = self.out_dim
        clone.hidden = self.hidden
        clone.linear = self.linear
        clone.weights = [w.copy() for w in self.weights]
        clone.biases = [b.copy() for b in self.biases]
        clone._cache = []
        return clone


class RMSProp:
    """Momentum-free adaptive step: theta -= lr * g / sqrt(avg(g^2) + eps)."""

    def __init__(self, size: int, lr: float, rho: float = 0.99, eps: float = 1e-8):
        self.lr = lr
        self.rho = rho
        self.eps = eps
        self.cache = np.zeros(size)

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.cache = self.rho * self.cache + (1.0 - self.rho) * grad * grad
        return params - self.lr * grad / np.sqrt(self.cache + self.eps)
