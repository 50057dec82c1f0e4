"""Prompting and chat around explanation bundles.

Builds a system prompt that frames the task, enumerates the question
taxonomy and describes the scene's candidate values in plain text, then
answers questions either through a chat-completion HTTP endpoint or through
a deterministic offline stub whose claims are backed verbatim by the bundle.

All functions operate on the serialized bundle document (the JSON artifact
written by the explainer), so file-based and in-process callers share one
path. Scene-description numbers are rounded to three decimals.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, replace

from .errors import (
    ChatCredentialError,
    ChatHTTPError,
    ChatNetworkError,
    ChatProtocolError,
    ConfigError,
)

STUB = "stub"
REMOTE = "remote"

ROLE_SYSTEM = "system"
ROLE_HUMAN = "human"
ROLE_AI = "ai"

# wire-protocol role names for generic chat-completion endpoints
_WIRE_ROLES = {ROLE_SYSTEM: "system", ROLE_HUMAN: "user", ROLE_AI: "assistant"}

_COUNT_WORDS = (
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
)


@dataclass(frozen=True)
class ChatClientConfig:
    mode: str = STUB
    endpoint: str = ""
    model: str = ""
    credential_env: str = "XQMAP_API_KEY"
    timeout_s: float = 30.0

    def validate(self):
        if self.mode not in (STUB, REMOTE):
            raise ConfigError(f"unknown chat mode {self.mode!r}")
        if self.mode == REMOTE:
            if not self.endpoint:
                raise ConfigError("remote chat requires an endpoint URL")
            if not self.credential_env:
                raise ConfigError("remote chat requires a credential environment variable name")
        if self.timeout_s <= 0:
            raise ConfigError("timeout_s must be positive")


@dataclass(frozen=True)
class PromptBundle:
    """An ordered conversation: one system message first, then the dialogue."""

    system_text: str
    messages: tuple[dict, ...] = ()
    bundle: dict | None = None  # source explanation bundle, used by the stub

    def appended(self, role: str, text: str) -> "PromptBundle":
        return replace(self, messages=self.messages + ({"role": role, "text": text},))


def _fmt(x: float) -> str:
    return f"{float(x):.3f}"


def _count_word(n: int, capital: bool = False) -> str:
    word = _COUNT_WORDS[n] if 0 <= n < len(_COUNT_WORDS) else str(n)
    return word.capitalize() if capital else word


def _with_article(label: str) -> str:
    article = "an" if label[:1].lower() in "aeiou" else "a"
    return f"{article} {label}"


def _ordered_candidates(bundle: dict) -> list[dict]:
    return list(bundle["candidates"]) + [bundle["selected"]]


def _values_clause(candidate: dict, names: list[str]) -> str:
    parts = [f"{n}: {_fmt(candidate['values'][n])}" for n in names]
    parts.append(f"overall: {_fmt(candidate['overall'])}")
    return "{" + ", ".join(parts) + "}"


def describe_scene_values(bundle: dict) -> str:
    """Scene description listing each candidate's values and the RDX lines."""
    names = list(bundle["component_names"])
    cands = _ordered_candidates(bundle)
    fragments = []
    for c in cands:
        noun = "value" if c["name"] == "Selected" else "values"
        fragments.append(f"{c['name']} = {_with_article(c['label'])}, its {noun} = "
                         f"{_values_clause(c, names)}")
    text = (
        f"{_count_word(len(cands), capital=True)} pixels "
        f"{', '.join(c['name'] for c in cands)} are given, where "
        + ", ".join(fragments)
        + "."
    )
    if bundle.get("rdx"):
        rdx_parts = []
        for r in bundle["rdx"]:
            deltas = ", ".join(f"{n}: {_fmt(r['deltas'][n])}" for n in names)
            rdx_parts.append(f"({r['pair'][0]}, {r['pair'][1]}) = {{{deltas}}}")
        text += (
            " The value difference RDX for action pairs in each component: "
            + ", ".join(rdx_parts)
            + "."
        )
    return text


def _component_clauses(bundle: dict) -> str:
    names = list(bundle["component_names"])
    palette = bundle.get("palette", [])
    ranking = " < ".join(palette)
    if bundle["scenario"] == "grasp" and names == ["color", "shape"]:
        return (
            "one evaluating its score in being a cube (not a bowl) and the other "
            f"being in which color ranking ({ranking})"
        )
    if bundle["scenario"] == "land" and names == ["flat", "colored"]:
        return (
            "one evaluating its score in being on a flat surface and the other "
            "in being on a coloured (not grey) surface"
        )
    return ", ".join(f"one evaluating its score in the {n} component" for n in names)


def build_prompt(scenario_kind: str, bundle: dict) -> PromptBundle:
    """Fixed task context + question taxonomy + scene description."""
    k = len(bundle["component_names"])
    if scenario_kind == "grasp":
        opening = (
            "Context: Imagine there is a visual pick-up task that a robotic arm needs "
            "to learn to solve. The objective of the task is to pick up objects with "
            "task-specific properties."
        )
        primitive_clause = "executing the pick-up primitive at a 3D position mapped from that pixel"
        subject = "object"
    else:
        opening = (
            "Context: Imagine there is a visual landing task that a flying agent needs "
            "to learn to solve. The objective of the task is to land on spots with "
            "task-specific properties."
        )
        primitive_clause = "executing the landing primitive at a 3D position mapped from that pixel"
        subject = "landing spot"
    system_text = (
        f"{opening} We train an agent to achieve this using Q-learning which outputs a "
        "2D matrix of Q-values of the same size as the input image. The Q-values "
        "quantitatively describe the utility of action (pixel) choices, each "
        f"corresponding to {primitive_clause}. The Q-value of every action (and its "
        f"associated {subject}) is further decomposed into {_count_word(k)} component "
        f"values, {_component_clauses(bundle)}, summing up to its overall Q-value.\n"
        "\n"
        "You are helping humans understand the action choices of the trained Q-agent "
        "given a scene of the task. In each turn, you are provided with "
        f"{_count_word(k + 1)} action choices along with their component values and "
        "overall values of the scene.\n"
        "The user will ask you two types of questions:\n"
        "1) shallow question - why is an action chosen?\n"
        "2) contrastive question - why is one action preferred over another?\n"
        "Please answer those questions by text and keep the text simple and clear.\n"
        "\n"
        f"Scene Description: {describe_scene_values(bundle)}"
    )
    return PromptBundle(
        system_text=system_text,
        messages=({"role": ROLE_SYSTEM, "text": system_text},),
        bundle=bundle,
    )


def prompt_to_doc(prompt: PromptBundle) -> dict:
    return {"system_text": prompt.system_text, "messages": list(prompt.messages)}


def prompt_from_doc(doc: dict, bundle: dict | None = None) -> PromptBundle:
    return PromptBundle(
        system_text=doc["system_text"],
        messages=tuple(dict(m) for m in doc["messages"]),
        bundle=bundle,
    )


# --------------------------------------------------------------------------
# offline stub
# --------------------------------------------------------------------------

SHALLOW_QUESTION = "shallow"
CONTRASTIVE_QUESTION = "contrastive"
UNKNOWN_QUESTION = "unknown"


def classify_question(question: str) -> str:
    """Keyword heuristic: 'preferred over'/'why ... over' is contrastive,
    'why ... chosen/picked/selected' is shallow, anything else unknown."""
    q = question.lower()
    if "preferred over" in q or re.search(r"why\b.*\bover\b", q):
        return CONTRASTIVE_QUESTION
    if re.search(r"why\b.*\b(chosen|choose|picked|pick|selected|select)\b", q):
        return SHALLOW_QUESTION
    return UNKNOWN_QUESTION


def _mentioned_candidates(question: str, bundle: dict) -> list[str]:
    names = [c["name"] for c in _ordered_candidates(bundle)]
    found = []
    for token in re.findall(r"[A-Za-z]+", question):
        if token in names and token not in found:
            found.append(token)
    return found


def _stub_shallow(bundle: dict) -> str:
    sel = bundle["selected"]
    dominant = bundle["shallow"]["dominant"]
    dom_value = bundle["shallow"]["component_values"][dominant]
    others = ", ".join(c["name"] for c in bundle["candidates"])
    return (
        f"Pixel Selected is chosen because it has the highest overall Q-value "
        f"({_fmt(sel['overall'])}) among the candidate pixels ({others} and Selected); "
        f"its {dominant} component contributes most ({_fmt(dom_value)})."
    )


def _stub_contrastive(bundle: dict, question: str) -> str:
    mentioned = _mentioned_candidates(question, bundle)
    if len(mentioned) >= 2:
        i_name, j_name = mentioned[0], mentioned[1]
    elif len(mentioned) == 1 and mentioned[0] != "Selected":
        i_name, j_name = "Selected", mentioned[0]
    else:
        i_name, j_name = "Selected", bundle["candidates"][0]["name"]
    lookup = {c["name"]: c for c in _ordered_candidates(bundle)}
    ci, cj = lookup[i_name], lookup[j_name]
    names = list(bundle["component_names"])
    higher = [n for n in names if ci["values"][n] > cj["values"][n]]
    lower = [n for n in names if ci["values"][n] < cj["values"][n]]
    if not higher and not lower:
        return (
            f"Pixel {i_name} and pixel {j_name} are indistinguishable here: "
            f"every component value is equal."
        )
    parts = []
    if higher:
        detail = "; ".join(
            f"{n}: {_fmt(ci['values'][n])} versus {_fmt(cj['values'][n])}" for n in higher
        )
        parts.append(
            f"Pixel {i_name} is preferred over pixel {j_name} because it has a higher "
            f"Q-value for {', '.join(higher)} ({detail})."
        )
    else:
        parts.append(
            f"Pixel {i_name} has no component advantage over pixel {j_name}."
        )
    if lower:
        detail = "; ".join(
            f"{n}: {_fmt(cj['values'][n])} versus {_fmt(ci['values'][n])}" for n in lower
        )
        parts.append(
            f"Although pixel {j_name} has a higher {', '.join(lower)} value ({detail}), "
            f"the overall Q-value of {i_name} is {_fmt(ci['overall'])} versus "
            f"{_fmt(cj['overall'])} for {j_name}."
        )
    else:
        parts.append(
            f"Overall, {i_name} scores {_fmt(ci['overall'])} versus "
            f"{_fmt(cj['overall'])} for {j_name}."
        )
    return " ".join(parts)


_STUB_INABILITY = (
    "I can answer shallow questions (why an action is chosen) and contrastive "
    "questions (why one action is preferred over another); please rephrase your "
    "question in one of those forms."
)


def stub_answer(bundle: dict, question: str) -> str:
    kind = classify_question(question)
    if kind == SHALLOW_QUESTION:
        return _stub_shallow(bundle)
    if kind == CONTRASTIVE_QUESTION:
        return _stub_contrastive(bundle, question)
    return _STUB_INABILITY


# --------------------------------------------------------------------------
# remote client
# --------------------------------------------------------------------------


def _remote_answer(cfg: ChatClientConfig, messages: tuple[dict, ...]) -> str:
    credential = os.environ.get(cfg.credential_env, "")
    if not credential:
        raise ChatCredentialError(
            f"environment variable {cfg.credential_env!r} is unset or empty"
        )
    import requests

    payload = {
        "model": cfg.model,
        "messages": [{"role": _WIRE_ROLES[m["role"]], "content": m["text"]} for m in messages],
    }
    try:
        response = requests.post(
            cfg.endpoint,
            json=payload,
            headers={"Authorization": f"Bearer {credential}"},
            timeout=cfg.timeout_s,
        )
    except requests.RequestException as exc:
        raise ChatNetworkError(f"chat endpoint unreachable: {exc}") from exc
    if not (200 <= response.status_code < 300):
        raise ChatHTTPError(response.status_code, response.text[:500])
    try:
        body = response.json()
        content = body["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise ChatProtocolError(f"malformed chat response: {exc}") from exc
    if not isinstance(content, str):
        raise ChatProtocolError("chat response content is not text")
    return content


def chat(cfg: ChatClientConfig, prompt: PromptBundle, question: str) -> tuple[str, PromptBundle]:
    """Ask one question; returns the answer and the grown conversation."""
    cfg.validate()
    asked = prompt.appended(ROLE_HUMAN, question)
    if cfg.mode == STUB:
        if asked.bundle is None:
            raise ConfigError("stub chat needs the explanation bundle attached to the prompt")
        answer = stub_answer(asked.bundle, question)
    else:
        answer = _remote_answer(cfg, asked.messages)
    return answer, asked.appended(ROLE_AI, answer)
