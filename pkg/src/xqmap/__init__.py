"""xqmap: decomposed pixel-wise Q-learning with built-in explanations.

Train one Q-Map per reward component on grid scenes, act on the summed
composite map, and explain decisions through candidate comparisons,
per-component value differences, charts, templated text and chat.
"""

from .scenes import (
    Action,
    GraspConfig,
    GridScene,
    LandConfig,
    Observation,
    PropertySpec,
    RewardVector,
    StepOutcome,
    flatness_angle,
    generate_grasp_scene,
    generate_land_scene,
    generate_scene,
    observe,
    step,
    sub_rewards,
)
from .qmaps import Approximator, QMapSet, TabularApproximator, composite, q_at, select_component, select_global
from .convnet import ConvApproximator
from .training import (
    Checkpoint,
    EvalResult,
    ReplayBuffer,
    SceneEnv,
    TrainConfig,
    Transition,
    epsilon_at,
    evaluate,
    make_env_factory,
    td_targets,
    train,
    train_monolithic,
)
from .explain import ExplanationBundle, build_bundle, bundle_to_doc, candidates, rdx, render_chart, shallow
from .checkpoint import load_checkpoint, save_checkpoint

__version__ = "0.1.0"
