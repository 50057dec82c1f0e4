"""Off-policy training with decomposed rewards and global-action bootstrapping.

Each reward component supervises its own Q-Map. TD targets bootstrap every
component at the *global* next-state action (argmax of the weighted sum of
the online maps), with the bootstrap value read from a periodically copied
target network; this keeps the summed component maps equivalent to a single
monolithic map trained on the summed reward. A monolithic trainer is
provided as the comparison baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Callable, Sequence

import numpy as np

from .convnet import ConvApproximator
from .errors import ConfigError, ContractViolationError, TrainingDivergedError
from .qmaps import Approximator, TabularApproximator, select_global
from .scenes import Action, GridScene, Observation, StepOutcome, observe
from .scenes import step as scene_step
from .scenes import total_reward_grid, generate_scene, ScenarioConfig

MONOLITHIC_COMPONENT = "total"

DECOMPOSED = "decomposed"
MONOLITHIC = "monolithic"


# --------------------------------------------------------------------------
# config, schedule, replay
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EpsilonSchedule:
    start: float = 1.0
    end: float = 0.05
    decay_steps: int = 1


def epsilon_at(schedule: EpsilonSchedule, step: int) -> float:
    """Linear interpolation start -> end over decay_steps, clamped at end."""
    if step < 0:
        raise ContractViolationError("step must be >= 0")
    if step >= schedule.decay_steps:
        return schedule.end
    frac = step / schedule.decay_steps
    return schedule.start + (schedule.end - schedule.start) * frac


@dataclass(frozen=True)
class TrainConfig:
    total_steps: int = 2000
    seed: int = 0
    mode: str = DECOMPOSED
    approximator: str = "conv"  # "conv" or "tabular"
    gamma: float = 0.9
    learning_rate: float = 1e-3
    momentum: float = 0.9
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_steps: int | None = None  # None -> 60% of total_steps
    batch_size: int = 32
    target_copy_period: int = 250
    replay_capacity: int = 10_000
    hidden: int = 16
    train_every: int = 1

    def validate(self):
        if self.total_steps < 0:
            raise ConfigError("total_steps must be >= 0")
        if self.mode not in (DECOMPOSED, MONOLITHIC):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.approximator not in ("conv", "tabular"):
            raise ConfigError(f"unknown approximator {self.approximator!r}")
        if not (0.0 <= self.gamma < 1.0):
            raise ConfigError("gamma must lie in [0, 1)")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if not (0.0 <= self.momentum < 1.0):
            raise ConfigError("momentum must lie in [0, 1)")
        for name in ("epsilon_start", "epsilon_end"):
            if not (0.0 <= getattr(self, name) <= 1.0):
                raise ConfigError(f"{name} must lie in [0, 1]")
        if self.epsilon_decay_steps is not None and self.epsilon_decay_steps < 1:
            raise ConfigError("epsilon_decay_steps must be >= 1")
        if self.batch_size < 1 or self.replay_capacity < self.batch_size:
            raise ConfigError("need replay_capacity >= batch_size >= 1")
        if self.target_copy_period < 1 or self.train_every < 1 or self.hidden < 1:
            raise ConfigError("periods and widths must be >= 1")

    def epsilon_schedule(self) -> EpsilonSchedule:
        decay = self.epsilon_decay_steps
        if decay is None:
            decay = max(1, int(0.6 * self.total_steps))
        return EpsilonSchedule(self.epsilon_start, self.epsilon_end, decay)


@dataclass(frozen=True)
class Transition:
    observation: Observation
    action: Action
    reward: np.ndarray  # (K,) per-component rewards (K=1 in monolithic mode)
    next_observation: Observation
    done: bool


class ReplayBuffer:
    """Fixed-capacity ring with a seeded uniform sampler."""

    def __init__(self, capacity: int, seed: int = 0):
        if capacity < 1:
            raise ConfigError("replay capacity must be >= 1")
        self.capacity = capacity
        self._items: list[Transition] = []
        self._next = 0
        self._rng = np.random.default_rng(seed)

    def add(self, transition: Transition) -> None:
        if len(self._items) < self.capacity:
            self._items.append(transition)
        else:
            self._items[self._next] = transition  # evict oldest first
        self._next = (self._next + 1) % self.capacity

    def sample(self, batch_size: int) -> list[Transition]:
        if not self._items:
            raise ContractViolationError("cannot sample from an empty buffer")
        idx = self._rng.integers(len(self._items), size=batch_size)
        return [self._items[i] for i in idx]

    def __len__(self) -> int:
        return len(self._items)


# --------------------------------------------------------------------------
# environment adapter
# --------------------------------------------------------------------------


class SceneEnv:
    """Uniform episode interface over a GridScene (and over test MDPs)."""

    def __init__(self, scene: GridScene):
        self.scene = scene

    @property
    def width(self) -> int:
        return self.scene.width

    @property
    def height(self) -> int:
        return self.scene.height

    @property
    def primitive(self) -> str:
        return self.scene.primitive

    @property
    def done(self) -> bool:
        return self.scene.done

    @property
    def component_names(self) -> tuple[str, ...]:
        return self.scene.component_names

    def observe(self) -> Observation:
        return observe(self.scene)

    def step(self, action: Action) -> StepOutcome:
        return scene_step(self.scene, action)

    def best_immediate_total(self) -> float:
        return float(total_reward_grid(self.scene).max())


EnvFactory = Callable[[int], SceneEnv]


def make_env_factory(cfg: ScenarioConfig) -> EnvFactory:
    def factory(seed: int) -> SceneEnv:
        return SceneEnv(generate_scene(cfg, seed))

    return factory


# --------------------------------------------------------------------------
# TD targets
# --------------------------------------------------------------------------


def td_targets(
    batch: Sequence[Transition],
    online: Approximator,
    target: Approximator,
    gamma: float,
) -> np.ndarray:
    """Per-component regression targets for a batch, shape (B, K).

    y_k = r_k + gamma * Q_target_k(s', a*) where a* is the argmax of the
    weighted composite of the *online* maps at s'; terminal transitions get
    y_k = r_k with no bootstrap term.
    """
    if not batch:
        raise ContractViolationError("td_targets on an empty batch")
    K = online.num_components
    rewards = np.stack([np.asarray(t.reward, dtype=np.float64) for t in batch])
    if rewards.shape[1] != K:
        raise ContractViolationError(
            f"reward vectors have {rewards.shape[1]} components, approximator has {K}"
        )
    targets = rewards.copy()
    live = [i for i, t in enumerate(batch) if not t.done]
    if not live:
        return targets
    next_obs = [batch[i].next_observation for i in live]
    online_maps = online.predict_batch(next_obs)  # (B', K, H, W)
    comp = np.tensordot(online_maps, online.weights, axes=([1], [0]))  # (B', H, W)
    flat = comp.reshape(len(live), -1)
    best = flat.argmax(axis=1)  # first occurrence = lowest row-major index
    width = comp.shape[2]
    vs, us = best // width, best % width
    target_maps = target.predict_batch(next_obs)  # (B', K, H, W)
    rows = np.arange(len(live))
    bootstrap = target_maps[rows, :, vs, us]  # (B', K) raw component values
    targets[live] += gamma * bootstrap
    return targets


# --------------------------------------------------------------------------
# training loops
# --------------------------------------------------------------------------


@dataclass
class Checkpoint:
    approximator: Approximator
    mode: str
    training_step: int
    config: dict
    metrics: list[dict] = field(default_factory=list)


def _build_approximator(cfg: TrainConfig, names: tuple[str, ...], num_channels: int, seed: int):
    if cfg.approximator == "tabular":
        return TabularApproximator(names, learning_rate=cfg.learning_rate)
    return ConvApproximator(
        num_channels,
        names,
        hidden=cfg.hidden,
        learning_rate=cfg.learning_rate,
        momentum=cfg.momentum,
        seed=seed,
    )


def _train_loop(
    env_factory: EnvFactory,
    cfg: TrainConfig,
    decomposed: bool,
    scenario_doc: dict | None,
    step_hook: Callable | None,
) -> Checkpoint:
    cfg.validate()
    master = np.random.default_rng(cfg.seed)
    init_seed, explore_seed, replay_seed, scene_seed_root = (
        int(s) for s in master.integers(2**63, size=4)
    )
    scene_rng = np.random.default_rng(scene_seed_root)
    explore_rng = np.random.default_rng(explore_seed)

    env = env_factory(int(scene_rng.integers(2**63)))
    obs = env.observe()
    names = env.component_names if decomposed else (MONOLITHIC_COMPONENT,)
    online = _build_approximator(cfg, names, obs.num_channels, init_seed)
    target = online.snapshot()
    buffer = ReplayBuffer(cfg.replay_capacity, replay_seed)
    schedule = cfg.epsilon_schedule()

    metrics: list[dict] = []
    episode = 0
    ep_steps = 0
    ep_rewards = np.zeros(len(env.component_names))
    ep_losses: list[float] = []

    for t in range(cfg.total_steps):
        eps = epsilon_at(schedule, t)
        if explore_rng.random() < eps:
            flat = int(explore_rng.integers(env.width * env.height))
            pixel = (flat % env.width, flat // env.width)
            action = Action(env.primitive, pixel)
        else:
            action = select_global(online.predict(obs), primitive=env.primitive)
        outcome = env.step(action)
        reward = outcome.reward.values if decomposed else np.array([outcome.reward.total()])
        buffer.add(Transition(obs, action, reward, outcome.next_observation, outcome.done))
        ep_rewards += outcome.reward.values
        ep_steps += 1

        if len(buffer) >= cfg.batch_size and (t + 1) % cfg.train_every == 0:
            batch = buffer.sample(cfg.batch_size)
            targets = td_targets(batch, online, target, cfg.gamma)
            loss = online.fit(
                [(tr.observation, tr.action.pixel, targets[i]) for i, tr in enumerate(batch)]
            )
            if not math.isfinite(loss):
                raise TrainingDivergedError(
                    f"non-finite loss at step {t} (episode {episode}); "
                    "lower the learning rate or check reward scaling"
                )
            ep_losses.append(loss)

        if (t + 1) % cfg.target_copy_period == 0:
            target = online.snapshot()

        if step_hook is not None:
            step_hook(t, online, target)

        if outcome.done:
            metrics.append(
                {
                    "episode": episode,
                    "steps": ep_steps,
                    "total_reward": float(ep_rewards.sum()),
                    "per_component_reward": {
                        n: float(r) for n, r in zip(env.component_names, ep_rewards)
                    },
                    "epsilon": eps,
                    "loss_mean": float(np.mean(ep_losses)) if ep_losses else None,
                }
            )
            episode += 1
            ep_steps = 0
            ep_rewards = np.zeros(len(env.component_names))
            ep_losses = []
            env = env_factory(int(scene_rng.integers(2**63)))
            obs = env.observe()
        else:
            obs = outcome.next_observation

    config_doc = {"train": asdict(cfg)}
    if scenario_doc is not None:
        config_doc["scenario"] = scenario_doc
    return Checkpoint(
        approximator=online,
        mode=cfg.mode,
        training_step=cfg.total_steps,
        config=config_doc,
        metrics=metrics,
    )


def train(
    env_factory: EnvFactory,
    cfg: TrainConfig,
    scenario_doc: dict | None = None,
    step_hook: Callable | None = None,
) -> Checkpoint:
    """Decomposed training: one Q-Map per reward component."""
    if cfg.mode != DECOMPOSED:
        raise ConfigError("train() requires mode='decomposed'; use train_monolithic()")
    return _train_loop(env_factory, cfg, True, scenario_doc, step_hook)


def train_monolithic(
    env_factory: EnvFactory,
    cfg: TrainConfig,
    scenario_doc: dict | None = None,
    step_hook: Callable | None = None,
) -> Checkpoint:
    """Baseline: a single Q-Map supervised by the summed reward."""
    if cfg.mode != MONOLITHIC:
        raise ConfigError("train_monolithic() requires mode='monolithic'")
    return _train_loop(env_factory, cfg, False, scenario_doc, step_hook)


def run_training(env_factory: EnvFactory, cfg: TrainConfig, scenario_doc: dict | None = None):
    return (train if cfg.mode == DECOMPOSED else train_monolithic)(env_factory, cfg, scenario_doc)


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalResult:
    rates: tuple[float, ...]
    decisions_per_run: int

    @property
    def mean(self) -> float:
        return float(np.mean(self.rates))

    @property
    def std(self) -> float:
        return float(np.std(self.rates))

    def to_doc(self) -> dict:
        return {
            "runs": len(self.rates),
            "decisions_per_run": self.decisions_per_run,
            "rates": list(self.rates),
            "mean": self.mean,
            "std": self.std,
        }


def evaluate(
    checkpoint: Checkpoint,
    env_factory: EnvFactory,
    runs: int = 10,
    decisions_per_run: int = 20,
    seed: int = 9000,
) -> EvalResult:
    """Greedy correct-choice rate, mean +- std over evaluation runs.

    A choice is correct iff its immediate total reward equals the maximum
    achievable total reward over all pixels of the current state. Episodes
    are rolled greedily (epsilon = 0); finished episodes are replaced by
    freshly generated ones until each run has made its quota of decisions.
    """
    if runs < 1 or decisions_per_run < 1:
        raise ConfigError("runs and decisions_per_run must be >= 1")
    approx = checkpoint.approximator
    rates = []
    for run in range(runs):
        rng = np.random.default_rng([seed, run])
        env = env_factory(int(rng.integers(2**63)))
        correct = 0
        for _ in range(decisions_per_run):
            while env.done:
                env = env_factory(int(rng.integers(2**63)))
            action = select_global(approx.predict(env.observe()), primitive=env.primitive)
            best = env.best_immediate_total()
            outcome = env.step(action)
            if abs(outcome.reward.total() - best) <= 1e-12:
                correct += 1
        rates.append(correct / decisions_per_run)
    return EvalResult(tuple(rates), decisions_per_run)
