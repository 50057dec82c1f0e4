"""Fully convolutional Q-Map approximator in plain numpy.

One small network per reward component: two 3x3 same-padding convolutions
(ReLU) followed by a 1x1 linear head, so the output map always has the input
grid's dimensions. Parameters are 64-bit floats; gradients are computed
analytically (im2col) and updated with SGD + momentum. Keeping the backward
pass by hand lets tests compare it against central finite differences.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import ContractViolationError
from .qmaps import Approximator, FitSample, QMapSet
from .scenes import Observation

_OFFSETS = [(dv, du) for dv in range(3) for du in range(3)]

PARAM_KEYS = ("w1", "b1", "w2", "b2", "w3", "b3")


def _patches3x3(x: np.ndarray) -> np.ndarray:
    """im2col for a 3x3 kernel with zero same-padding: (B,H,W,C) -> (B,H,W,9C)."""
    B, H, W, _ = x.shape
    p = np.pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
    return np.concatenate([p[:, dv : dv + H, du : du + W, :] for dv, du in _OFFSETS], axis=3)


def _fold3x3(dpatches: np.ndarray, channels: int) -> np.ndarray:
    """Adjoint of _patches3x3: scatter-add patch gradients back to the input."""
    B, H, W, _ = dpatches.shape
    dpad = np.zeros((B, H + 2, W + 2, channels))
    for i, (dv, du) in enumerate(_OFFSETS):
        dpad[:, dv : dv + H, du : du + W, :] += dpatches[..., i * channels : (i + 1) * channels]
    return dpad[:, 1 : H + 1, 1 : W + 1, :]


def _conv3x3(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    patches = _patches3x3(x)
    c_out = w.shape[3]
    out = patches.reshape(-1, w.shape[0] * w.shape[1] * w.shape[2]) @ w.reshape(-1, c_out)
    return out.reshape(x.shape[0], x.shape[1], x.shape[2], c_out) + b, patches


class ConvApproximator(Approximator):
    """K per-component convolutional networks over a shared input layout."""

    kind = "conv"

    def __init__(
        self,
        num_channels: int,
        component_names: Sequence[str],
        weights: Sequence[float] | None = None,
        hidden: int = 16,
        learning_rate: float = 1e-3,
        momentum: float = 0.9,
        seed: int = 0,
    ):
        self.num_channels = int(num_channels)
        self.component_names = tuple(component_names)
        K = len(self.component_names)
        self.weights = np.ones(K) if weights is None else np.asarray(weights, dtype=np.float64)
        self.hidden = int(hidden)
        self.learning_rate = float(learning_rate)
        self.momentum = float(momentum)
        rng = np.random.default_rng(seed)
        self.params = [self._init_params(rng) for _ in range(K)]
        self.velocity = [{k: np.zeros_like(v) for k, v in p.items()} for p in self.params]

    def _init_params(self, rng: np.random.Generator) -> dict[str, np.ndarray]:
        f, h = self.num_channels, self.hidden
        return {
            "w1": rng.normal(0.0, np.sqrt(2.0 / (9 * f)), size=(3, 3, f, h)),
            "b1": np.zeros(h),
            "w2": rng.normal(0.0, np.sqrt(2.0 / (9 * h)), size=(3, 3, h, h)),
            "b2": np.zeros(h),
            "w3": rng.normal(0.0, np.sqrt(1.0 / h), size=(h,)),
            "b3": np.zeros(1),
        }

    # -- forward / backward -------------------------------------------------

    def _forward(self, x: np.ndarray, p: dict[str, np.ndarray]):
        z1, patches1 = _conv3x3(x, p["w1"], p["b1"])
        h1 = np.maximum(z1, 0.0)
        z2, patches2 = _conv3x3(h1, p["w2"], p["b2"])
        h2 = np.maximum(z2, 0.0)
        q = np.einsum("bhwc,c->bhw", h2, p["w3"]) + p["b3"][0]
        cache = (patches1, z1, patches2, z2, h2)
        return q, cache

    def _backward(self, dq: np.ndarray, p: dict[str, np.ndarray], cache) -> dict[str, np.ndarray]:
        patches1, z1, patches2, z2, h2 = cache
        grads: dict[str, np.ndarray] = {}
        grads["w3"] = np.einsum("bhwc,bhw->c", h2, dq)
        grads["b3"] = np.array([dq.sum()])
        dh2 = dq[..., None] * p["w3"]
        dz2 = dh2 * (z2 > 0.0)
        flat2 = dz2.reshape(-1, self.hidden)
        grads["w2"] = (patches2.reshape(-1, 9 * self.hidden).T @ flat2).reshape(p["w2"].shape)
        grads["b2"] = flat2.sum(axis=0)
        dpatches2 = (flat2 @ p["w2"].reshape(-1, self.hidden).T).reshape(
            dz2.shape[0], dz2.shape[1], dz2.shape[2], 9 * self.hidden
        )
        dh1 = _fold3x3(dpatches2, self.hidden)
        dz1 = dh1 * (z1 > 0.0)
        flat1 = dz1.reshape(-1, self.hidden)
        grads["w1"] = (patches1.reshape(-1, 9 * self.num_channels).T @ flat1).reshape(p["w1"].shape)
        grads["b1"] = flat1.sum(axis=0)
        return grads

    # -- Approximator interface ---------------------------------------------

    def _check_channels(self, features: np.ndarray):
        if features.shape[-1] != self.num_channels:
            raise ContractViolationError(
                f"expected {self.num_channels} input channels, got {features.shape[-1]}"
            )

    def predict(self, obs: Observation) -> QMapSet:
        self._check_channels(obs.features)
        x = obs.features[None]
        maps = np.stack([self._forward(x, p)[0][0] for p in self.params])
        return QMapSet(maps, self.component_names, self.weights.copy())

    def predict_batch(self, observations: Sequence[Observation]) -> np.ndarray:
        x = np.stack([o.features for o in observations])
        self._check_channels(x)
        return np.stack([self._forward(x, p)[0] for p in self.params], axis=1)

    def loss_and_grads(
        self, x: np.ndarray, pixels: np.ndarray, targets: np.ndarray
    ) -> tuple[float, list[dict[str, np.ndarray]]]:
        """Squared TD-error loss and its parameter gradients.

        loss = sum over components of mean_b (q_k(x_b)[pixel_b] - target_bk)^2;
        the gradient map is zero except at each sample's action pixel.
        """
        B = x.shape[0]
        rows = np.arange(B)
        us, vs = pixels[:, 0], pixels[:, 1]
        loss = 0.0
        grads = []
        for k, p in enumerate(self.params):
            q, cache = self._forward(x, p)
            err = q[rows, vs, us] - targets[:, k]
            loss += float(np.mean(err**2))
            dq = np.zeros_like(q)
            dq[rows, vs, us] = 2.0 * err / B
            grads.append(self._backward(dq, p, cache))
        return loss, grads

    def fit(self, batch: Sequence[FitSample]) -> float:
        if not batch:
            raise ContractViolationError("fit on an empty batch")
        x = np.stack([obs.features for obs, _, _ in batch])
        self._check_channels(x)
        pixels = np.array([pix for _, pix, _ in batch], dtype=np.int64)
        targets = np.stack([np.asarray(t, dtype=np.float64) for _, _, t in batch])
        if targets.shape[1] != self.num_components:
            raise ContractViolationError("target vector length must equal K")
        loss, grads = self.loss_and_grads(x, pixels, targets)
        for p, vel, g in zip(self.params, self.velocity, grads):
            for key in PARAM_KEYS:
                vel[key] = self.momentum * vel[key] - self.learning_rate * g[key]
                p[key] = p[key] + vel[key]
        return loss

    def snapshot(self) -> "ConvApproximator":
        copy = ConvApproximator(
            self.num_channels,
            self.component_names,
            self.weights.copy(),
            hidden=self.hidden,
            learning_rate=self.learning_rate,
            momentum=self.momentum,
        )
        copy.set_params(self.get_params())
        return copy

    def get_params(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        for k, p in enumerate(self.params):
            for key in PARAM_KEYS:
                out[f"c{k}.{key}"] = p[key].copy()
        return out

    def set_params(self, params: dict[str, np.ndarray]) -> None:
        for k, p in enumerate(self.params):
            for key in PARAM_KEYS:
                name = f"c{k}.{key}"
                if name not in params:
                    raise ContractViolationError(f"missing parameter {name}")
                arr = np.asarray(params[name], dtype=np.float64)
                if arr.shape != p[key].shape:
                    raise ContractViolationError(f"parameter {name} has shape {arr.shape}")
                p[key] = arr.copy()
        self.velocity = [{k: np.zeros_like(v) for k, v in p.items()} for p in self.params]
