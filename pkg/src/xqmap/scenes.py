"""Grid-world scenarios with property-linked sub-rewards.

Two desk-scale scenarios are provided: grasping (pick coloured cubes with a
suction primitive, bowls fail) and landing (touch down on flat and/or
coloured ground). Scenes are deterministic functions of (seed, config); they
expose feature-grid observations, decomposed reward vectors and episode
dynamics. Actions are motion primitives executed at a grid pixel.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    BoundsError,
    ConfigError,
    ContractViolationError,
    EpisodeFinishedError,
    PlacementError,
    SceneFormatError,
)
from .jsonutil import canonical_dumps

SCENE_FORMAT_VERSION = 1

# Rainbow ordering: rank 0 is lowest-valued, rank C-1 highest.
DEFAULT_PALETTE: tuple[str, ...] = ("red", "orange", "yellow", "green", "blue", "purple")

GRASP = "grasp"
LAND = "land"
SCENARIOS = (GRASP, LAND)

# Primitive executed at the chosen pixel, per scenario.
PRIMITIVES = {GRASP: "pick_up", LAND: "land"}

CUBE = "cube"
BOWL = "bowl"

# Surfaces tilted at most this many degrees count as flat.
FLAT_ANGLE_DEG = 5.0

GREY_RANK = -1  # cell colour code for uncoloured surfaces

_UP = np.array([0.0, 0.0, 1.0])


# --------------------------------------------------------------------------
# domain types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PropertySpec:
    """One reward component: a named task property with a scaling weight."""

    name: str
    kind: str = "binary"  # "binary" or "continuous"; continuous rewards lie in [0, 1] before weighting
    weight: float = 1.0

    def __post_init__(self):
        if self.kind not in ("binary", "continuous"):
            raise ConfigError(f"unknown property kind {self.kind!r}")
        if not (self.weight >= 0.0):
            raise ConfigError(f"property {self.name!r} has negative weight {self.weight}")


@dataclass(frozen=True)
class ColorId:
    """Colour of a surface or object: a palette rank, or grey (no rank)."""

    rank: int | None = None

    @property
    def grey(self) -> bool:
        return self.rank is None

    def name(self, palette: Sequence[str]) -> str:
        if self.rank is None:
            return "grey"
        return palette[self.rank]


@dataclass
class SceneObject:
    id: int
    shape: str  # CUBE or BOWL
    color: ColorId
    footprint: frozenset[tuple[int, int]]
    removed: bool = False

    def __post_init__(self):
        if self.shape not in (CUBE, BOWL):
            raise SceneFormatError(f"unknown object shape {self.shape!r}")


@dataclass(frozen=True)
class SurfaceCell:
    height: float
    normal: np.ndarray
    color: ColorId


@dataclass(frozen=True)
class Action:
    primitive: str
    pixel: tuple[int, int]  # (u, v) = (column, row)


@dataclass(frozen=True)
class RewardVector:
    names: tuple[str, ...]
    values: np.ndarray  # shape (K,), float64

    def total(self) -> float:
        return float(self.values.sum())

    def as_dict(self) -> dict[str, float]:
        return {n: float(v) for n, v in zip(self.names, self.values)}


class Observation:
    """Feature grid of shape (height, width, F).

    Channel layout: 0 height, 1 grey flag, 2..2+C-1 one-hot colour rank,
    and (grasping only) 2+C cube flag. The array is read-only; a content
    digest is cached for exact tabular lookups.
    """

    __slots__ = ("features", "_digest")

    def __init__(self, features: np.ndarray):
        features = np.ascontiguousarray(features, dtype=np.float64)
        if features.ndim != 3:
            raise ContractViolationError("observation features must be (H, W, F)")
        if not np.all(np.isfinite(features)):
            raise ContractViolationError("observation contains non-finite values")
        features.flags.writeable = False
        self.features = features
        self._digest: str | None = None

    @property
    def height(self) -> int:
        return self.features.shape[0]

    @property
    def width(self) -> int:
        return self.features.shape[1]

    @property
    def num_channels(self) -> int:
        return self.features.shape[2]

    def digest(self) -> str:
        if self._digest is None:
            h = hashlib.sha1()
            h.update(repr(self.features.shape).encode())
            h.update(self.features.tobytes())
            self._digest = h.hexdigest()
        return self._digest


@dataclass(frozen=True)
class StepOutcome:
    reward: RewardVector
    next_observation: Observation
    done: bool
    info: dict


# --------------------------------------------------------------------------
# scenario configs
# --------------------------------------------------------------------------

MIN_GRID = 12


def _check_grid(width: int, height: int):
    if width < MIN_GRID or height < MIN_GRID:
        raise ConfigError(f"grid must be at least {MIN_GRID}x{MIN_GRID}, got {width}x{height}")


@dataclass(frozen=True)
class GraspConfig:
    width: int = 16
    height: int = 16
    num_objects: int = 7
    cube_fraction: float = 0.5
    palette: tuple[str, ...] = DEFAULT_PALETTE
    step_limit: int = 50
    color_weight: float = 1.0
    shape_weight: float = 1.0

    kind = GRASP

    def validate(self):
        _check_grid(self.width, self.height)
        if self.num_objects < 1:
            raise ConfigError("num_objects must be >= 1")
        if len(self.palette) < 2:
            raise ConfigError("palette needs at least 2 colours")
        if not (0.0 <= self.cube_fraction <= 1.0):
            raise ConfigError("cube_fraction must lie in [0, 1]")
        if self.step_limit < 1:
            raise ConfigError("step_limit must be >= 1")
        if self.color_weight < 0 or self.shape_weight < 0:
            raise ConfigError("component weights must be non-negative")

    def properties(self) -> tuple[PropertySpec, ...]:
        return (
            PropertySpec("color", "continuous", self.color_weight),
            PropertySpec("shape", "binary", self.shape_weight),
        )


@dataclass(frozen=True)
class LandConfig:
    width: int = 16
    height: int = 16
    num_blocks: int = 5
    grey_fraction: float = 0.3
    incline_angle_deg: float = 20.0
    palette: tuple[str, ...] = DEFAULT_PALETTE
    flat_weight: float = 1.0
    colored_weight: float = 1.0

    kind = LAND

    def validate(self):
        _check_grid(self.width, self.height)
        if self.num_blocks < 1:
            raise ConfigError("num_blocks must be >= 1")
        if len(self.palette) < 2:
            raise ConfigError("palette needs at least 2 colours")
        if not (0.0 <= self.grey_fraction <= 1.0):
            raise ConfigError("grey_fraction must lie in [0, 1]")
        if not (FLAT_ANGLE_DEG < self.incline_angle_deg < 90.0):
            raise ConfigError(
                f"incline_angle_deg must lie in ({FLAT_ANGLE_DEG}, 90), got {self.incline_angle_deg}"
            )
        if self.flat_weight < 0 or self.colored_weight < 0:
            raise ConfigError("component weights must be non-negative")

    def properties(self) -> tuple[PropertySpec, ...]:
        return (
            PropertySpec("flat", "binary", self.flat_weight),
            PropertySpec("colored", "binary", self.colored_weight),
        )


ScenarioConfig = GraspConfig | LandConfig

_SCENARIO_CONFIGS: dict[str, type] = {GRASP: GraspConfig, LAND: LandConfig}


def scenario_config_from_doc(doc: dict) -> ScenarioConfig:
    doc = dict(doc)
    kind = doc.pop("kind", None)
    if kind not in _SCENARIO_CONFIGS:
        raise ConfigError(f"unknown scenario kind {kind!r}")
    cls = _SCENARIO_CONFIGS[kind]
    valid = set(cls.__dataclass_fields__)
    unknown = set(doc) - valid
    if unknown:
        raise ConfigError(f"unknown scenario config keys: {sorted(unknown)}")
    if "palette" in doc:
        doc["palette"] = tuple(doc["palette"])
    cfg = cls(**doc)
    cfg.validate()
    return cfg


def scenario_config_to_doc(cfg: ScenarioConfig) -> dict:
    doc = {"kind": cfg.kind}
    for name in cfg.__dataclass_fields__:
        value = getattr(cfg, name)
        doc[name] = list(value) if isinstance(value, tuple) else value
    return doc


# --------------------------------------------------------------------------
# the scene itself
# --------------------------------------------------------------------------


@dataclass(eq=False)
class GridScene:
    scenario: str
    width: int
    height: int
    palette: tuple[str, ...]
    properties: tuple[PropertySpec, ...]
    heights: np.ndarray      # (H, W) float64
    normals: np.ndarray      # (H, W, 3) float64, unit length, z > 0
    color_ranks: np.ndarray  # (H, W) int16, GREY_RANK for grey
    objects: list[SceneObject] = field(default_factory=list)
    step_limit: int = 50
    steps_elapsed: int = 0

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise SceneFormatError(f"unknown scenario {self.scenario!r}")
        self.heights = np.asarray(self.heights, dtype=np.float64)
        self.normals = np.asarray(self.normals, dtype=np.float64)
        self.color_ranks = np.asarray(self.color_ranks, dtype=np.int16)
        if self.heights.shape != (self.height, self.width):
            raise SceneFormatError("heights shape does not match grid dimensions")
        if self.normals.shape != (self.height, self.width, 3):
            raise SceneFormatError("normals shape does not match grid dimensions")
        if self.color_ranks.shape != (self.height, self.width):
            raise SceneFormatError("color_ranks shape does not match grid dimensions")
        norms = np.linalg.norm(self.normals, axis=-1)
        if not np.allclose(norms, 1.0, atol=1e-9):
            raise SceneFormatError("cell normals must have unit length")
        if np.any(self.normals[..., 2] <= 0):
            raise SceneFormatError("cell normals must face upwards")
        if np.any(self.color_ranks >= len(self.palette)):
            raise SceneFormatError("cell colour rank outside the palette")
        seen: set[tuple[int, int]] = set()
        for obj in self.objects:
            for (u, v) in obj.footprint:
                if not (0 <= u < self.width and 0 <= v < self.height):
                    raise SceneFormatError(f"object {obj.id} footprint leaves the grid")
                if not obj.removed:
                    if (u, v) in seen:
                        raise SceneFormatError("live object footprints overlap")
                    seen.add((u, v))
        if self.steps_elapsed > self.step_limit:
            raise SceneFormatError("steps_elapsed exceeds step_limit")

    # -- views ------------------------------------------------------------

    @property
    def palette_size(self) -> int:
        return len(self.palette)

    @property
    def component_names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.properties)

    @property
    def component_weights(self) -> np.ndarray:
        return np.array([p.weight for p in self.properties], dtype=np.float64)

    @property
    def primitive(self) -> str:
        return PRIMITIVES[self.scenario]

    @property
    def done(self) -> bool:
        if self.scenario == LAND:
            return self.steps_elapsed >= 1
        if self.steps_elapsed >= self.step_limit:
            return True
        return not any(o.shape == CUBE for o in self.live_objects())

    def live_objects(self) -> list[SceneObject]:
        return [o for o in self.objects if not o.removed]

    def object_at(self, pixel: tuple[int, int]) -> SceneObject | None:
        for obj in self.objects:
            if not obj.removed and tuple(pixel) in obj.footprint:
                return obj
        return None

    def cell_at(self, pixel: tuple[int, int]) -> SurfaceCell:
        u, v = self._check_pixel(pixel)
        rank = int(self.color_ranks[v, u])
        return SurfaceCell(
            height=float(self.heights[v, u]),
            normal=self.normals[v, u].copy(),
            color=ColorId(None if rank == GREY_RANK else rank),
        )

    def _check_pixel(self, pixel: tuple[int, int]) -> tuple[int, int]:
        u, v = int(pixel[0]), int(pixel[1])
        if not (0 <= u < self.width and 0 <= v < self.height):
            raise BoundsError(f"pixel {(u, v)} outside {self.width}x{self.height} grid")
        return u, v

    def clone(self) -> "GridScene":
        return GridScene(
            scenario=self.scenario,
            width=self.width,
            height=self.height,
            palette=self.palette,
            properties=self.properties,
            heights=self.heights.copy(),
            normals=self.normals.copy(),
            color_ranks=self.color_ranks.copy(),
            objects=[
                SceneObject(o.id, o.shape, o.color, o.footprint, o.removed) for o in self.objects
            ],
            step_limit=self.step_limit,
            steps_elapsed=self.steps_elapsed,
        )

    def digest(self) -> str:
        return hashlib.sha256(canonical_dumps(scene_to_doc(self)).encode()).hexdigest()


# --------------------------------------------------------------------------
# geometry
# --------------------------------------------------------------------------


def flatness_angle(normal: Sequence[float]) -> float:
    """Tilt of a unit surface normal against vertical, in degrees."""
    n = np.asarray(normal, dtype=np.float64)
    if n.shape != (3,):
        raise ContractViolationError("normal must be a 3-vector")
    length = float(np.linalg.norm(n))
    if abs(length - 1.0) > 1e-6:
        raise ContractViolationError(f"normal must have unit length, got |n|={length}")
    cos_theta = float(np.clip(np.dot(n, _UP), -1.0, 1.0))
    return math.degrees(math.acos(cos_theta))


def is_flat(normal: Sequence[float]) -> bool:
    return flatness_angle(normal) <= FLAT_ANGLE_DEG


def _tilted_normal(angle_deg: float, direction: tuple[float, float]) -> np.ndarray:
    """Unit normal tilted by angle_deg towards the (unit) 2-D direction."""
    dx, dy = direction
    s = math.sin(math.radians(angle_deg))
    return np.array([s * dx, s * dy, math.cos(math.radians(angle_deg))])


# --------------------------------------------------------------------------
# generation
# --------------------------------------------------------------------------

_FOOTPRINT_SHAPES = ((1, 1), (1, 2), (2, 1), (2, 2))  # (w, h), 1-4 cells
_SCENE_ATTEMPTS = 32
_PLACE_ATTEMPTS = 128


def _place_rect(
    rng: np.random.Generator,
    width: int,
    height: int,
    rect_w: int,
    rect_h: int,
    blocked: set[tuple[int, int]],
    margin: int = 0,
) -> frozenset[tuple[int, int]] | None:
    """Try to place a rect whose margin-inflated envelope avoids blocked cells."""
    for _ in range(_PLACE_ATTEMPTS):
        u0 = int(rng.integers(margin, width - rect_w - margin + 1))
        v0 = int(rng.integers(margin, height - rect_h - margin + 1))
        cells = frozenset(
            (u, v) for u in range(u0, u0 + rect_w) for v in range(v0, v0 + rect_h)
        )
        envelope = {
            (u, v)
            for u in range(u0 - margin, u0 + rect_w + margin)
            for v in range(v0 - margin, v0 + rect_h + margin)
        }
        if envelope & blocked:
            continue
        return cells
    return None


def _flat_ground(width: int, height: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    heights = np.zeros((height, width))
    normals = np.zeros((height, width, 3))
    normals[..., 2] = 1.0
    ranks = np.full((height, width), GREY_RANK, dtype=np.int16)
    return heights, normals, ranks


def generate_grasp_scene(seed: int, cfg: GraspConfig | None = None) -> GridScene:
    """Clutter a tabletop with cubes and bowls in rainbow colours.

    Deterministic in (seed, cfg). Scenes without a single cube are redrawn,
    mirroring the filtering of unusable initializations; if the requested
    objects cannot be placed disjointly within bounded retries a
    PlacementError is raised.
    """
    cfg = cfg or GraspConfig()
    cfg.validate()
    rng = np.random.default_rng(seed)
    C = len(cfg.palette)

    for _ in range(_SCENE_ATTEMPTS):
        blocked: set[tuple[int, int]] = set()
        objects: list[SceneObject] = []
        failed = False
        for obj_id in range(cfg.num_objects):
            rect_w, rect_h = _FOOTPRINT_SHAPES[int(rng.integers(len(_FOOTPRINT_SHAPES)))]
            cells = _place_rect(rng, cfg.width, cfg.height, rect_w, rect_h, blocked)
            if cells is None:
                failed = True
                break
            blocked |= cells
            shape = CUBE if rng.random() < cfg.cube_fraction else BOWL
            rank = int(rng.integers(C))
            objects.append(SceneObject(obj_id, shape, ColorId(rank), cells))
        if failed:
            continue
        if not any(o.shape == CUBE for o in objects):
            continue  # redraw: a grasp scene needs at least one pickable cube

        heights, normals, ranks = _flat_ground(cfg.width, cfg.height)
        for obj in objects:
            h = 1.0 if obj.shape == CUBE else 0.5
            for (u, v) in obj.footprint:
                heights[v, u] = h
                ranks[v, u] = obj.color.rank
        return GridScene(
            scenario=GRASP,
            width=cfg.width,
            height=cfg.height,
            palette=cfg.palette,
            properties=cfg.properties(),
            heights=heights,
            normals=normals,
            color_ranks=ranks,
            objects=objects,
            step_limit=cfg.step_limit,
        )
    raise PlacementError(
        f"could not place {cfg.num_objects} disjoint objects on a "
        f"{cfg.width}x{cfg.height} grid after {_SCENE_ATTEMPTS} attempts"
    )


_RING_OFFSETS = [(du, dv) for du in (-1, 0, 1) for dv in (-1, 0, 1) if (du, dv) != (0, 0)]


def generate_land_scene(seed: int, cfg: LandConfig | None = None) -> GridScene:
    """Grey flat ground with raised blocks: flat tops, inclined side rings.

    Block tops are flat (tilt 0) and either coloured or grey (per
    grey_fraction); the one-cell ring around each block is inclined at
    cfg.incline_angle_deg and shares the block's colour. At least one block
    is forced to be coloured so every scene exhibits all three surface
    kinds (flat+coloured, flat+grey, inclined).
    """
    cfg = cfg or LandConfig()
    cfg.validate()
    rng = np.random.default_rng(seed)
    C = len(cfg.palette)

    for _ in range(_SCENE_ATTEMPTS):
        blocked: set[tuple[int, int]] = set()
        tops: list[frozenset[tuple[int, int]]] = []
        failed = False
        for _ in range(cfg.num_blocks):
            side_w = int(rng.integers(2, 4))
            side_h = int(rng.integers(2, 4))
            # margin 1 keeps the inclined ring inside the grid and off other blocks
            cells = _place_rect(rng, cfg.width, cfg.height, side_w, side_h, blocked, margin=1)
            if cells is None:
                failed = True
                break
            ring = {
                (u + du, v + dv) for (u, v) in cells for du, dv in _RING_OFFSETS
            } - set(cells)
            blocked |= cells | ring
            tops.append(cells)
        if failed:
            continue

        colors = [
            ColorId(None) if rng.random() < cfg.grey_fraction else ColorId(int(rng.integers(C)))
            for _ in tops
        ]
        if all(c.grey for c in colors):
            colors[0] = ColorId(int(rng.integers(C)))

        heights, normals, ranks = _flat_ground(cfg.width, cfg.height)
        objects: list[SceneObject] = []
        for obj_id, (cells, color) in enumerate(zip(tops, colors)):
            us = [u for u, _ in cells]
            vs = [v for _, v in cells]
            u_min, u_max, v_min, v_max = min(us), max(us), min(vs), max(vs)
            for (u, v) in cells:
                heights[v, u] = 1.0
                ranks[v, u] = GREY_RANK if color.grey else color.rank
            ring = {(u + du, v + dv) for (u, v) in cells for du, dv in _RING_OFFSETS} - set(cells)
            for (u, v) in ring:
                dx = -1.0 if u < u_min else (1.0 if u > u_max else 0.0)
                dy = -1.0 if v < v_min else (1.0 if v > v_max else 0.0)
                scale = math.hypot(dx, dy)
                direction = (dx / scale, dy / scale)
                heights[v, u] = 0.5
                normals[v, u] = _tilted_normal(cfg.incline_angle_deg, direction)
                ranks[v, u] = GREY_RANK if color.grey else color.rank
            objects.append(SceneObject(obj_id, CUBE, color, cells))
        return GridScene(
            scenario=LAND,
            width=cfg.width,
            height=cfg.height,
            palette=cfg.palette,
            properties=cfg.properties(),
            heights=heights,
            normals=normals,
            color_ranks=ranks,
            objects=objects,
            step_limit=1,
        )
    raise PlacementError(
        f"could not place {cfg.num_blocks} blocks on a {cfg.width}x{cfg.height} grid"
    )


def generate_scene(cfg: ScenarioConfig, seed: int) -> GridScene:
    if cfg.kind == GRASP:
        return generate_grasp_scene(seed, cfg)
    return generate_land_scene(seed, cfg)


# --------------------------------------------------------------------------
# observation, rewards, dynamics
# --------------------------------------------------------------------------


def num_observation_channels(scenario: str, palette_size: int) -> int:
    base = 2 + palette_size
    return base + 1 if scenario == GRASP else base


def observe(scene: GridScene) -> Observation:
    """Render the scene into its feature-grid state representation."""
    C = scene.palette_size
    F = num_observation_channels(scene.scenario, C)
    feats = np.zeros((scene.height, scene.width, F))
    feats[..., 0] = scene.heights
    feats[..., 1] = (scene.color_ranks == GREY_RANK).astype(np.float64)
    for rank in range(C):
        feats[..., 2 + rank] = (scene.color_ranks == rank).astype(np.float64)
    if scene.scenario == GRASP:
        for obj in scene.live_objects():
            if obj.shape == CUBE:
                for (u, v) in obj.footprint:
                    feats[v, u, 2 + C] = 1.0
    return Observation(feats)


def color_rank_reward(rank: int, palette_size: int) -> float:
    """Rainbow-rank score in [0, 1]: 0 for the lowest rank, 1 for the highest."""
    return rank / (palette_size - 1)


def _require_active(scene: GridScene, action: Action):
    if scene.done:
        raise EpisodeFinishedError("episode is finished; no further actions accepted")
    if action.primitive != scene.primitive:
        raise ContractViolationError(
            f"primitive {action.primitive!r} does not match scenario {scene.scenario!r}"
        )


def sub_rewards(scene: GridScene, action: Action) -> RewardVector:
    """Decomposed reward of executing the action's primitive at its pixel.

    Grasping: a live cube scores shape=1 and colour=rank/(C-1), both scaled by
    their component weights; a bowl is a failed grasp and scores zero in every
    component, as does an empty cell. Landing: independent flat / coloured
    indicators for the surface under the pixel.
    """
    _require_active(scene, action)
    u, v = scene._check_pixel(action.pixel)
    weights = scene.component_weights
    values = np.zeros(len(weights))
    if scene.scenario == GRASP:
        obj = scene.object_at((u, v))
        if obj is not None and obj.shape == CUBE:
            values[0] = color_rank_reward(obj.color.rank, scene.palette_size) * weights[0]
            values[1] = 1.0 * weights[1]
    else:
        if flatness_angle(scene.normals[v, u]) <= FLAT_ANGLE_DEG:
            values[0] = 1.0 * weights[0]
        if scene.color_ranks[v, u] != GREY_RANK:
            values[1] = 1.0 * weights[1]
    return RewardVector(scene.component_names, values)


def total_reward_grid(scene: GridScene) -> np.ndarray:
    """Total immediate reward of every pixel, as an (H, W) grid."""
    weights = scene.component_weights
    grid = np.zeros((scene.height, scene.width))
    if scene.scenario == GRASP:
        for obj in scene.live_objects():
            if obj.shape != CUBE:
                continue
            value = (
                color_rank_reward(obj.color.rank, scene.palette_size) * weights[0] + weights[1]
            )
            for (u, v) in obj.footprint:
                grid[v, u] = value
    else:
        angles = np.degrees(
            np.arccos(np.clip(scene.normals[..., 2], -1.0, 1.0))
        )
        grid += (angles <= FLAT_ANGLE_DEG) * weights[0]
        grid += (scene.color_ranks != GREY_RANK) * weights[1]
    return grid


def describe_surface(scene: GridScene, pixel: tuple[int, int]) -> str:
    """Human label of what sits at a pixel ("blue cube", "flat grey surface", ...)."""
    u, v = scene._check_pixel(pixel)
    if scene.scenario == GRASP:
        obj = scene.object_at((u, v))
        if obj is None:
            return "empty cell"
        return f"{obj.color.name(scene.palette)} {obj.shape}"
    slope = "flat" if flatness_angle(scene.normals[v, u]) <= FLAT_ANGLE_DEG else "inclined"
    rank = int(scene.color_ranks[v, u])
    color = "grey" if rank == GREY_RANK else scene.palette[rank]
    return f"{slope} {color} surface"


def _clear_footprint(scene: GridScene, obj: SceneObject):
    for (u, v) in obj.footprint:
        scene.heights[v, u] = 0.0
        scene.normals[v, u] = _UP
        scene.color_ranks[v, u] = GREY_RANK


def step(scene: GridScene, action: Action) -> StepOutcome:
    """Execute the action, mutating the scene.

    Grasping: picking a live cube removes it (cells revert to bare ground);
    a bowl or empty pick is a rewardless no-op on the world but still spends
    a step. Landing episodes are a single terminal touchdown. The reward is
    always the pre-step sub_rewards of the chosen pixel.
    """
    reward = sub_rewards(scene, action)  # also validates bounds/primitive/liveness
    info: dict = {}
    if scene.scenario == GRASP:
        obj = scene.object_at(action.pixel)
        if obj is not None and obj.shape == CUBE:
            obj.removed = True
            _clear_footprint(scene, obj)
            info["grasped"] = obj.id
        else:
            info["grasped"] = None
    else:
        info["verdict"] = describe_surface(scene, action.pixel)
    scene.steps_elapsed += 1
    return StepOutcome(
        reward=reward,
        next_observation=observe(scene),
        done=scene.done,
        info=info,
    )


# --------------------------------------------------------------------------
# scene files
# --------------------------------------------------------------------------


def scene_to_doc(scene: GridScene) -> dict:
    cells = []
    for v in range(scene.height):
        for u in range(scene.width):
            rank = int(scene.color_ranks[v, u])
            cells.append(
                {
                    "height": float(scene.heights[v, u]),
                    "normal": [float(x) for x in scene.normals[v, u]],
                    "color": None if rank == GREY_RANK else rank,
                }
            )
    return {
        "format_version": SCENE_FORMAT_VERSION,
        "scenario": scene.scenario,
        "width": scene.width,
        "height": scene.height,
        "palette": list(scene.palette),
        "properties": [
            {"name": p.name, "kind": p.kind, "weight": p.weight} for p in scene.properties
        ],
        "step_limit": scene.step_limit,
        "steps_elapsed": scene.steps_elapsed,
        "cells": cells,
        "objects": [
            {
                "id": o.id,
                "shape": o.shape,
                "color_rank": o.color.rank,
                "footprint": sorted([u, v] for (u, v) in o.footprint),
                "removed": o.removed,
            }
            for o in scene.objects
        ],
    }


def scene_from_doc(doc: dict) -> GridScene:
    if not isinstance(doc, dict):
        raise SceneFormatError("scene document must be a JSON object")
    version = doc.get("format_version")
    if version != SCENE_FORMAT_VERSION:
        raise SceneFormatError(f"unsupported scene format_version {version!r}")
    required = {"scenario", "width", "height", "palette", "properties", "cells", "objects"}
    missing = required - set(doc)
    if missing:
        raise SceneFormatError(f"scene document missing keys: {sorted(missing)}")
    width, height = int(doc["width"]), int(doc["height"])
    cells = doc["cells"]
    if len(cells) != width * height:
        raise SceneFormatError("cell list length does not match grid dimensions")
    heights = np.zeros((height, width))
    normals = np.zeros((height, width, 3))
    ranks = np.full((height, width), GREY_RANK, dtype=np.int16)
    for i, cell in enumerate(cells):
        v, u = divmod(i, width)
        heights[v, u] = cell["height"]
        normals[v, u] = cell["normal"]
        if cell["color"] is not None:
            ranks[v, u] = int(cell["color"])
    objects = [
        SceneObject(
            id=int(o["id"]),
            shape=o["shape"],
            color=ColorId(None if o["color_rank"] is None else int(o["color_rank"])),
            footprint=frozenset((int(u), int(v)) for u, v in o["footprint"]),
            removed=bool(o.get("removed", False)),
        )
        for o in doc["objects"]
    ]
    return GridScene(
        scenario=doc["scenario"],
        width=width,
        height=height,
        palette=tuple(doc["palette"]),
        properties=tuple(
            PropertySpec(p["name"], p["kind"], float(p["weight"])) for p in doc["properties"]
        ),
        heights=heights,
        normals=normals,
        color_ranks=ranks,
        objects=objects,
        step_limit=int(doc.get("step_limit", 50)),
        steps_elapsed=int(doc.get("steps_elapsed", 0)),
    )


def save_scene(scene: GridScene, path) -> None:
    from .jsonutil import write_json

    write_json(path, scene_to_doc(scene))


def load_scene(path) -> GridScene:
    from .jsonutil import read_json

    return scene_from_doc(read_json(path))
