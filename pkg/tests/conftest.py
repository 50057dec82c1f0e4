"""Shared fixtures: the worked two-component example and an enumerable toy MDP."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pytest

from xqmap.qmaps import QMapSet, TabularApproximator
from xqmap.scenes import (
    Action,
    ColorId,
    GraspConfig,
    GridScene,
    Observation,
    SceneObject,
)
from xqmap.training import Transition, td_targets

# Reference decision used across explainer/chat tests: three grasp candidates
# with known component values, overalls and pairwise differences.
TABLE1 = {
    "A": {"pixel": (2, 1), "color": 0.577, "shape": 0.426, "overall": 1.003, "label": "blue cube"},
    "B": {"pixel": (5, 2), "color": 0.017, "shape": 0.745, "overall": 0.762, "label": "red cube"},
    "Selected": {
        "pixel": (4, 4),
        "color": 0.557,
        "shape": 0.516,
        "overall": 1.073,
        "label": "blue cube",
    },
}
TABLE1_RDX = {
    ("Selected", "A"): {"color": -0.02, "shape": 0.09},
    ("Selected", "B"): {"color": 0.54, "shape": -0.229},
}

_BLUE = 4
_RED = 0


def make_table1_qmaps(width: int = 8, height: int = 8) -> QMapSet:
    maps = np.zeros((2, height, width))
    for entry in TABLE1.values():
        u, v = entry["pixel"]
        maps[0, v, u] = entry["color"]
        maps[1, v, u] = entry["shape"]
    return QMapSet(maps, ("color", "shape"))


def make_table1_scene(width: int = 8, height: int = 8) -> GridScene:
    heights = np.zeros((height, width))
    normals = np.zeros((height, width, 3))
    normals[..., 2] = 1.0
    ranks = np.full((height, width), -1, dtype=np.int16)
    objects = []
    colors = {"A": _BLUE, "B": _RED, "Selected": _BLUE}
    for i, (name, entry) in enumerate(TABLE1.items()):
        u, v = entry["pixel"]
        ranks[v, u] = colors[name]
        heights[v, u] = 1.0
        objects.append(SceneObject(i, "cube", ColorId(colors[name]), frozenset({(u, v)})))
    return GridScene(
        scenario="grasp",
        width=width,
        height=height,
        palette=GraspConfig().palette,
        properties=GraspConfig().properties(),
        heights=heights,
        normals=normals,
        color_ranks=ranks,
        objects=objects,
        step_limit=50,
    )


@pytest.fixture
def table1_qmaps() -> QMapSet:
    return make_table1_qmaps()


@pytest.fixture
def table1_scene() -> GridScene:
    return make_table1_scene()


# ---------------------------------------------------------------------------
# enumerable toy MDP (states as observations, actions as pixels on a 1-row grid)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ToyMDP:
    next_state: np.ndarray  # (n_states, n_actions) int
    rewards: np.ndarray     # (n_states, n_actions, K) float
    terminal: frozenset[int]
    component_names: tuple[str, ...] = ("first", "second")

    @property
    def n_states(self) -> int:
        return self.next_state.shape[0]

    @property
    def n_actions(self) -> int:
        return self.next_state.shape[1]

    def observation(self, state: int) -> Observation:
        feats = np.zeros((1, self.n_actions, self.n_states))
        feats[0, :, state] = 1.0
        return Observation(feats)


def random_toy_mdp(seed: int, n_states: int = 8, n_actions: int = 4) -> ToyMDP:
    rng = np.random.default_rng(seed)
    nxt = rng.integers(0, n_states, size=(n_states, n_actions))
    rewards = np.round(rng.uniform(0.0, 1.0, size=(n_states, n_actions, 2)), 3)
    return ToyMDP(nxt, rewards, terminal=frozenset({n_states - 1}))


def enumerate_transitions(mdp: ToyMDP, monolithic: bool = False) -> list[Transition]:
    out = []
    for s in range(mdp.n_states):
        if s in mdp.terminal:
            continue
        for a in range(mdp.n_actions):
            s2 = int(mdp.next_state[s, a])
            reward = mdp.rewards[s, a].copy()
            if monolithic:
                reward = np.array([reward.sum()])
            out.append(
                Transition(
                    observation=mdp.observation(s),
                    action=Action("pick_up", (a, 0)),
                    reward=reward,
                    next_observation=mdp.observation(s2),
                    done=s2 in mdp.terminal,
                )
            )
    return out


def sweep_train_tabular(
    mdp: ToyMDP, gamma: float, monolithic: bool = False, sweeps: int = 600, tol: float = 1e-13
) -> TabularApproximator:
    """Synchronous full-batch TD sweeps with lr=1 until the table stops moving."""
    names = ("total",) if monolithic else mdp.component_names
    transitions = enumerate_transitions(mdp, monolithic)
    online = TabularApproximator(names, learning_rate=1.0)
    for _ in range(sweeps):
        target = online.snapshot()
        targets = td_targets(transitions, online, target, gamma)
        before = {k: v.copy() for k, v in online.get_params().items()}
        online.fit(
            [(t.observation, t.action.pixel, targets[i]) for i, t in enumerate(transitions)]
        )
        after = online.get_params()
        delta = max(
            (np.max(np.abs(after[k] - before.get(k, np.zeros_like(after[k])))) for k in after),
            default=0.0,
        )
        if delta < tol:
            break
    return online


def tabular_q(mdp: ToyMDP, approx: TabularApproximator) -> np.ndarray:
    """Q values as (n_states, n_actions, K)."""
    K = approx.num_components
    q = np.zeros((mdp.n_states, mdp.n_actions, K))
    for s in range(mdp.n_states):
        q[s] = approx.predict(mdp.observation(s)).maps[:, 0, :].T
    return q


def value_iteration_decomposed(mdp: ToyMDP, gamma: float, iters: int = 4000) -> np.ndarray:
    """Exact per-component value iteration bootstrapped at the composite argmax."""
    K = mdp.rewards.shape[2]
    q = np.zeros((mdp.n_states, mdp.n_actions, K))
    for _ in range(iters):
        astar = q.sum(axis=2).argmax(axis=1)
        new_q = np.zeros_like(q)
        for s in range(mdp.n_states):
            if s in mdp.terminal:
                continue
            for a in range(mdp.n_actions):
                s2 = int(mdp.next_state[s, a])
                new_q[s, a] = mdp.rewards[s, a]
                if s2 not in mdp.terminal:
                    new_q[s, a] += gamma * q[s2, astar[s2]]
        if np.max(np.abs(new_q - q)) < 1e-14:
            q = new_q
            break
        q = new_q
    return q


def value_iteration_monolithic(mdp: ToyMDP, gamma: float, iters: int = 4000) -> np.ndarray:
    q = np.zeros((mdp.n_states, mdp.n_actions))
    totals = mdp.rewards.sum(axis=2)
    for _ in range(iters):
        new_q = np.zeros_like(q)
        for s in range(mdp.n_states):
            if s in mdp.terminal:
                continue
            for a in range(mdp.n_actions):
                s2 = int(mdp.next_state[s, a])
                new_q[s, a] = totals[s, a]
                if s2 not in mdp.terminal:
                    new_q[s, a] += gamma * q[s2].max()
        if np.max(np.abs(new_q - q)) < 1e-14:
            q = new_q
            break
        q = new_q
    return q
