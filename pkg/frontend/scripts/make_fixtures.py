"""Record scripted inspector sessions against the real HTTP API.

Trains two small checkpoints (one per scenario), then replays ten scripted
sessions through the FastAPI app and stores every payload the UI would see.
The vitest suite asserts the rendered view-model against these recordings.

Run from frontend/:  python3 scripts/make_fixtures.py
"""

import json
import sys
from pathlib import Path

from fastapi.testclient import TestClient

from xqmap.llm import ChatClientConfig
from xqmap.scenes import GraspConfig, LandConfig, scenario_config_to_doc
from xqmap.service import ServiceSession, create_app
from xqmap.training import TrainConfig, make_env_factory, train

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "sessions.json"

SHALLOW_Q = "why is pixel Selected chosen?"
CONTRASTIVE_Q = "why is pixel Selected preferred over pixel A?"


def _checkpoint(scene_cfg, steps, seed):
    cfg = TrainConfig(
        total_steps=steps, seed=seed, hidden=8, batch_size=8, learning_rate=3e-3,
        target_copy_period=50,
    )
    return train(make_env_factory(scene_cfg), cfg, scenario_config_to_doc(scene_cfg))


def record_session(client: TestClient, scenario: str, seed: int) -> dict:
    session = {"scenario": scenario, "seed": seed}
    session["scene"] = client.post("/scene", json={"seed": seed}).json()
    session["qmaps"] = client.get("/qmaps").json()
    session["explain"] = client.post("/explain", json={}).json()
    session["chat"] = [
        {"question": q, "answer": client.post("/chat", json={"question": q}).json()["answer"]}
        for q in (SHALLOW_Q, CONTRASTIVE_Q)
    ]
    act = client.post("/act", json={})
    session["act"] = act.json()
    session["scene_after"] = client.get("/scene").json()
    session["qmaps_after"] = client.get("/qmaps").json()
    return session


def main() -> int:
    sessions = []
    scenarios = [
        (LandConfig(width=12, height=12, num_blocks=3), 120, range(100, 105)),
        (GraspConfig(width=12, height=12, num_objects=5), 200, range(200, 205)),
    ]
    for scene_cfg, steps, seeds in scenarios:
        ckpt = _checkpoint(scene_cfg, steps, seed=1)
        app = create_app(ServiceSession(ckpt, chat_cfg=ChatClientConfig(mode="stub")))
        client = TestClient(app)
        for seed in seeds:
            sessions.append(record_session(client, scene_cfg.kind, seed))
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(sessions, sort_keys=True, indent=1) + "\n")
    print(f"wrote {OUT} ({len(sessions)} sessions)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
