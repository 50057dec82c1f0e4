"""Shallow and contrastive explanations of a Q-Map decision.

Given a QMapSet and the scene it scored, this module derives the K+1
candidate actions (the global pick plus each component's own argmax), the
dominant component behind the pick, per-component value differences between
action pairs, grouped-bar chart data with a deterministic SVG rendering, and
templated natural-language claims. All values are taken from one QMapSet
snapshot, so every artifact in a bundle is internally consistent.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .charts import ChartData, build_chart_data, render_svg
from .errors import ContractViolationError, MissingPairError
from .qmaps import QMapSet, q_at, select_component, select_global
from .scenes import Action, GridScene, describe_surface

BUNDLE_FORMAT_VERSION = 1

SELECTED = "Selected"


@dataclass(frozen=True)
class Candidate:
    name: str
    action: Action
    values: np.ndarray  # (K,) weighted component values
    overall: float
    label: str


@dataclass(frozen=True)
class CandidateSet:
    selected: Candidate
    per_component: tuple[Candidate, ...]
    component_names: tuple[str, ...]

    def in_display_order(self) -> tuple[Candidate, ...]:
        """Sub-optimal candidates first (A, B, ...), the selected action last."""
        return (*self.per_component, self.selected)

    def by_name(self, name: str) -> Candidate:
        for c in self.in_display_order():
            if c.name == name:
                return c
        raise MissingPairError(f"no candidate named {name!r}")


@dataclass(frozen=True)
class ShallowExplanation:
    action: Action
    component_values: np.ndarray
    dominant_index: int
    dominant: str


@dataclass(frozen=True)
class RDX:
    """Per-component Q-value differences between two actions."""

    pair: tuple[str, str]
    actions: tuple[Action, Action]
    deltas: np.ndarray  # (K,)


@dataclass(frozen=True)
class ExplanationBundle:
    scene_id: str
    scenario: str
    palette: tuple[str, ...]
    component_names: tuple[str, ...]
    weights: np.ndarray
    candidates: CandidateSet
    shallow: ShallowExplanation
    rdx: tuple[RDX, ...]
    chart: ChartData
    texts: dict


def _candidate_name(k: int) -> str:
    if k >= len(string.ascii_uppercase):
        raise ContractViolationError("too many components for letter naming")
    return string.ascii_uppercase[k]


def candidates(q: QMapSet, scene: GridScene) -> CandidateSet:
    """The K+1 actions of interest: the global pick and each component's argmax."""
    if (q.height, q.width) != (scene.height, scene.width):
        raise ContractViolationError("QMapSet dimensions do not match the scene")

    def make(name: str, action: Action) -> Candidate:
        values = q_at(q, action)
        return Candidate(
            name=name,
            action=action,
            values=values,
            overall=float(values.sum()),
            label=describe_surface(scene, action.pixel),
        )

    selected = make(SELECTED, select_global(q, primitive=scene.primitive))
    per_component = tuple(
        make(_candidate_name(k), select_component(q, k, primitive=scene.primitive))
        for k in range(q.num_components)
    )
    return CandidateSet(selected, per_component, q.component_names)


def shallow(q: QMapSet, a: Action) -> ShallowExplanation:
    """Which component contributes most to the action's value (ties: lowest index)."""
    values = q_at(q, a)
    k = int(np.argmax(values))
    return ShallowExplanation(a, values, k, q.component_names[k])


def rdx(q: QMapSet, a_i: Action, a_j: Action, pair: tuple[str, str] = ("a_i", "a_j")) -> RDX:
    """Componentwise advantage (or disadvantage) of a_i over a_j."""
    return RDX(pair=pair, actions=(a_i, a_j), deltas=q_at(q, a_i) - q_at(q, a_j))


def default_pairs(cand: CandidateSet) -> list[tuple[str, str]]:
    """Selected versus each sub-optimal candidate, then all sub-optimal pairs."""
    names = [c.name for c in cand.per_component]
    pairs = [(SELECTED, n) for n in names]
    pairs += [(names[i], names[j]) for i in range(len(names)) for j in range(i + 1, len(names))]
    return pairs


def pair_key(pair: tuple[str, str]) -> str:
    return f"({pair[0]}, {pair[1]})"


# --------------------------------------------------------------------------
# language templates
# --------------------------------------------------------------------------


def template_shallow(cand: CandidateSet, sh: ShallowExplanation) -> str:
    return (
        f"{cand.selected.label} owns the highest Q-value in the current scene, "
        f"with {sh.dominant} component contributing most to the selection"
    )


def template_contrastive(cand: CandidateSet, r: RDX) -> str:
    """Features with a positive difference justify the pick; the rest do not."""
    i_name, j_name = r.pair
    i_label = cand.by_name(i_name).label
    j_label = cand.by_name(j_name).label
    names = cand.component_names
    due = [names[k] for k in range(len(names)) if r.deltas[k] > 0]
    not_due = [names[k] for k in range(len(names)) if r.deltas[k] <= 0]
    if np.all(r.deltas == 0):
        return (
            f"No component distinguishes action {i_name} ({i_label}) "
            f"from action {j_name} ({j_label})"
        )
    if due and not_due:
        return (
            f"In contrast to action {j_name} ({j_label}), {i_label} is chosen "
            f"due to its {', '.join(due)}, not due to its {', '.join(not_due)}"
        )
    if due:
        return (
            f"In contrast to action {j_name} ({j_label}), {i_label} is chosen "
            f"due to its {', '.join(due)}"
        )
    return (
        f"In contrast to action {j_name} ({j_label}), {i_label} has no advantage: "
        f"not due to its {', '.join(not_due)}"
    )


# --------------------------------------------------------------------------
# bundle assembly and serialization
# --------------------------------------------------------------------------


def build_bundle(
    q: QMapSet, scene: GridScene, pairs: Sequence[tuple[str, str]] | None = None
) -> ExplanationBundle:
    cand = candidates(q, scene)
    if pairs is None:
        pairs = default_pairs(cand)
    rdx_list = tuple(
        rdx(q, cand.by_name(i).action, cand.by_name(j).action, (i, j)) for i, j in pairs
    )
    sh = shallow(q, cand.selected.action)
    chart = build_chart_data(cand, rdx_list)
    texts = {
        "shallow": template_shallow(cand, sh),
        "contrastive": {pair_key(r.pair): template_contrastive(cand, r) for r in rdx_list},
    }
    return ExplanationBundle(
        scene_id=scene.digest(),
        scenario=scene.scenario,
        palette=scene.palette,
        component_names=q.component_names,
        weights=q.weights.copy(),
        candidates=cand,
        shallow=sh,
        rdx=rdx_list,
        chart=chart,
        texts=texts,
    )


def render_chart(bundle: ExplanationBundle) -> tuple[ChartData, str]:
    """The bundle's chart data together with its deterministic SVG document."""
    return bundle.chart, render_svg(bundle.chart)


def _candidate_doc(c: Candidate, names: tuple[str, ...]) -> dict:
    return {
        "name": c.name,
        "label": c.label,
        "pixel": [c.action.pixel[0], c.action.pixel[1]],
        "primitive": c.action.primitive,
        "values": {n: float(v) for n, v in zip(names, c.values)},
        "overall": c.overall,
    }


def bundle_to_doc(bundle: ExplanationBundle) -> dict:
    names = bundle.component_names
    return {
        "format_version": BUNDLE_FORMAT_VERSION,
        "scene_id": bundle.scene_id,
        "scenario": bundle.scenario,
        "palette": list(bundle.palette),
        "component_names": list(names),
        "weights": [float(w) for w in bundle.weights],
        "selected": _candidate_doc(bundle.candidates.selected, names),
        "candidates": [_candidate_doc(c, names) for c in bundle.candidates.per_component],
        "shallow": {
            "pixel": list(bundle.shallow.action.pixel),
            "component_values": {
                n: float(v) for n, v in zip(names, bundle.shallow.component_values)
            },
            "dominant": bundle.shallow.dominant,
        },
        "rdx": [
            {
                "pair": list(r.pair),
                "pixels": [list(r.actions[0].pixel), list(r.actions[1].pixel)],
                "deltas": {n: float(d) for n, d in zip(names, r.deltas)},
            }
            for r in bundle.rdx
        ],
        "chart": bundle.chart.to_doc(),
        "texts": bundle.texts,
    }
