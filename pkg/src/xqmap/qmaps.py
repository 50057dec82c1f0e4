"""Q-Map sets, composite action selection and the exact tabular approximator.

A Q-Map is a (height, width) grid of action values, one value per pixel.
A QMapSet carries one map per reward component plus preference weights; the
greedy global action is the argmax of the weighted sum of all maps.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BoundsError, ContractViolationError, SelectionError
from .scenes import Action, Observation


@dataclass
class QMapSet:
    maps: np.ndarray  # (K, H, W) float64
    component_names: tuple[str, ...]
    weights: np.ndarray | None = None  # (K,) non-negative; defaults to all ones

    def __post_init__(self):
        self.maps = np.asarray(self.maps, dtype=np.float64)
        if self.maps.ndim != 3 or self.maps.shape[0] < 1:
            raise ContractViolationError("maps must have shape (K, H, W) with K >= 1")
        if not np.all(np.isfinite(self.maps)):
            raise ContractViolationError("Q-Map values must be finite")
        self.component_names = tuple(self.component_names)
        if len(self.component_names) != self.maps.shape[0]:
            raise ContractViolationError("component_names length must equal K")
        if self.weights is None:
            self.weights = np.ones(self.maps.shape[0])
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.shape != (self.maps.shape[0],) or np.any(self.weights < 0):
            raise ContractViolationError("weights must be K non-negative reals")

    @property
    def num_components(self) -> int:
        return self.maps.shape[0]

    @property
    def height(self) -> int:
        return self.maps.shape[1]

    @property
    def width(self) -> int:
        return self.maps.shape[2]


def composite(q: QMapSet) -> np.ndarray:
    """Weighted elementwise sum of the component maps, shape (H, W)."""
    return np.tensordot(q.weights, q.maps, axes=1)


def _allowed_mask(q: QMapSet, mask) -> np.ndarray | None:
    if mask is None:
        return None
    allowed = np.zeros((q.height, q.width), dtype=bool)
    if isinstance(mask, np.ndarray) and mask.dtype == bool:
        if mask.shape != (q.height, q.width):
            raise SelectionError("boolean mask shape must match the maps")
        allowed = mask
    else:
        for (u, v) in mask:
            if not (0 <= u < q.width and 0 <= v < q.height):
                raise BoundsError(f"mask pixel {(u, v)} outside the grid")
            allowed[v, u] = True
    if not allowed.any():
        raise SelectionError("action mask is empty")
    return allowed


def _argmax_pixel(values: np.ndarray, allowed: np.ndarray | None) -> tuple[int, int]:
    # np.argmax returns the first occurrence, i.e. the lowest row-major index,
    # which is the documented tie-break.
    if allowed is not None:
        values = np.where(allowed, values, -np.inf)
    flat = int(np.argmax(values))
    v, u = divmod(flat, values.shape[1])
    return (u, v)


def select_global(q: QMapSet, mask=None, *, primitive: str = "pick_up") -> Action:
    """Greedy global action: argmax pixel of the weighted composite map."""
    pixel = _argmax_pixel(composite(q), _allowed_mask(q, mask))
    return Action(primitive, pixel)


def select_component(q: QMapSet, k: int, mask=None, *, primitive: str = "pick_up") -> Action:
    """Argmax pixel of a single component map (a biased, sub-optimal pick)."""
    if not (0 <= k < q.num_components):
        raise BoundsError(f"component index {k} out of range")
    pixel = _argmax_pixel(q.maps[k], _allowed_mask(q, mask))
    return Action(primitive, pixel)


def q_at(q: QMapSet, a: Action) -> np.ndarray:
    """Weighted per-component values at the action's pixel, shape (K,)."""
    u, v = a.pixel
    if not (0 <= u < q.width and 0 <= v < q.height):
        raise BoundsError(f"pixel {a.pixel} outside {q.width}x{q.height} maps")
    return q.weights * q.maps[:, v, u]


# --------------------------------------------------------------------------
# function approximators
# --------------------------------------------------------------------------

FitSample = tuple[Observation, tuple[int, int], np.ndarray]


class Approximator(ABC):
    """Maps observations to QMapSets and learns from per-pixel targets.

    predict is deterministic given the parameters; fit performs one update
    on a batch of (observation, pixel, per-component targets) samples and
    returns the pre-update batch loss.
    """

    component_names: tuple[str, ...]
    weights: np.ndarray

    @property
    def num_components(self) -> int:
        return len(self.component_names)

    @abstractmethod
    def predict(self, obs: Observation) -> QMapSet: ...

    def predict_batch(self, observations: Sequence[Observation]) -> np.ndarray:
        """Stacked raw maps for a batch, shape (B, K, H, W)."""
        return np.stack([self.predict(o).maps for o in observations])

    @abstractmethod
    def fit(self, batch: Sequence[FitSample]) -> float: ...

    @abstractmethod
    def snapshot(self) -> "Approximator":
        """Independent copy of the predictive state (for target networks)."""

    @abstractmethod
    def get_params(self) -> dict[str, np.ndarray]: ...

    @abstractmethod
    def set_params(self, params: dict[str, np.ndarray]) -> None: ...


class TabularApproximator(Approximator):
    """Exact lookup-table oracle keyed by (observation digest, pixel, component).

    fit applies the plain TD update v <- v + lr * (target - v) without any
    approximation error; with lr=1 the stored value becomes the target
    exactly. Unseen entries default to zero.
    """

    kind = "tabular"

    def __init__(
        self,
        component_names: Sequence[str],
        weights: Sequence[float] | None = None,
        learning_rate: float = 1.0,
    ):
        self.component_names = tuple(component_names)
        K = len(self.component_names)
        self.weights = (
            np.ones(K) if weights is None else np.asarray(weights, dtype=np.float64)
        )
        self.learning_rate = float(learning_rate)
        self._tables: dict[str, np.ndarray] = {}  # digest -> (K, H, W)

    def _table_for(self, obs: Observation) -> np.ndarray:
        key = obs.digest()
        table = self._tables.get(key)
        if table is None:
            table = np.zeros((self.num_components, obs.height, obs.width))
            self._tables[key] = table
        return table

    def predict(self, obs: Observation) -> QMapSet:
        return QMapSet(self._table_for(obs).copy(), self.component_names, self.weights.copy())

    def fit(self, batch: Sequence[FitSample]) -> float:
        if not batch:
            raise ContractViolationError("fit on an empty batch")
        sq_err = 0.0
        for obs, (u, v), targets in batch:
            table = self._table_for(obs)
            targets = np.asarray(targets, dtype=np.float64)
            delta = targets - table[:, v, u]
            sq_err += float(np.sum(delta**2))
            table[:, v, u] += self.learning_rate * delta
        return sq_err / len(batch)

    def snapshot(self) -> "TabularApproximator":
        copy = TabularApproximator(self.component_names, self.weights.copy(), self.learning_rate)
        copy._tables = {k: t.copy() for k, t in self._tables.items()}
        return copy

    def get_params(self) -> dict[str, np.ndarray]:
        return {k: t.copy() for k, t in sorted(self._tables.items())}

    def set_params(self, params: dict[str, np.ndarray]) -> None:
        self._tables = {k: np.asarray(t, dtype=np.float64).copy() for k, t in params.items()}
