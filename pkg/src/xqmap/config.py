"""Repository configuration: scenario, training, chat, paths, service.

Configuration files are JSON; unknown keys are rejected at every level and
all sub-configs run their own validation on load, so a config that would
fail later in training or generation fails here first.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError
from .jsonutil import read_json
from .llm import ChatClientConfig
from .scenes import ScenarioConfig, scenario_config_from_doc, scenario_config_to_doc, GraspConfig
from .training import TrainConfig


def _from_doc(cls, doc: dict, where: str):
    if not isinstance(doc, dict):
        raise ConfigError(f"{where} section must be an object")
    valid = {f.name for f in fields(cls)}
    unknown = set(doc) - valid
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")
    return cls(**doc)


@dataclass(frozen=True)
class PathsConfig:
    checkpoints_dir: str = "checkpoints"
    logs_dir: str = "logs"


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000

    def validate(self):
        if not (0 < self.port < 65536):
            raise ConfigError(f"service port {self.port} out of range")


@dataclass(frozen=True)
class RepoConfig:
    scenario: ScenarioConfig
    train: TrainConfig
    chat: ChatClientConfig
    paths: PathsConfig
    service: ServiceConfig

    def to_doc(self) -> dict:
        from dataclasses import asdict

        return {
            "scenario": scenario_config_to_doc(self.scenario),
            "train": asdict(self.train),
            "chat": asdict(self.chat),
            "paths": asdict(self.paths),
            "service": asdict(self.service),
        }


def default_config() -> RepoConfig:
    return RepoConfig(
        scenario=GraspConfig(),
        train=TrainConfig(),
        chat=ChatClientConfig(),
        paths=PathsConfig(),
        service=ServiceConfig(),
    )


def config_from_doc(doc: dict) -> RepoConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    known = {"scenario", "train", "chat", "paths", "service"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    scenario = scenario_config_from_doc(doc.get("scenario", {"kind": "grasp"}))
    train = _from_doc(TrainConfig, doc.get("train", {}), "train")
    train.validate()
    chat = _from_doc(ChatClientConfig, doc.get("chat", {}), "chat")
    chat.validate()
    paths = _from_doc(PathsConfig, doc.get("paths", {}), "paths")
    service = _from_doc(ServiceConfig, doc.get("service", {}), "service")
    service.validate()
    return RepoConfig(scenario, train, chat, paths, service)


def load_config(path: str | Path) -> RepoConfig:
    return config_from_doc(read_json(path))
