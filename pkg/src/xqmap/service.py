"""HTTP API over a loaded checkpoint: scenes, Q-Maps, actions, explanations, chat.

One session serves one checkpoint and at most one scene at a time. Mutating
requests (/scene, /act) are serialized behind a lock; read endpoints work
from caches keyed by the scene digest, so identical session state yields
identical payloads. The /explain payload uses the same canonical
serialization as the CLI artifact.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .errors import (
    BoundsError,
    ChatError,
    ConfigError,
    ContractViolationError,
    EpisodeFinishedError,
    MissingPairError,
    SceneFormatError,
    XQMapError,
)
from .explain import build_bundle, bundle_to_doc
from .jsonutil import canonical_dumps
from .llm import ChatClientConfig, build_prompt, chat as llm_chat
from .qmaps import composite, select_global
from .scenes import Action, ScenarioConfig, generate_scene, observe, scene_to_doc
from .scenes import step as scene_step
from .scenes import scenario_config_from_doc
from .training import Checkpoint


class NoSceneError(XQMapError, LookupError):
    code = "no_scene"


class ServiceSession:
    """Mutable service state: the checkpoint, the current scene and caches."""

    def __init__(
        self,
        checkpoint: Checkpoint,
        scenario_cfg: ScenarioConfig | None = None,
        chat_cfg: ChatClientConfig | None = None,
    ):
        self.checkpoint = checkpoint
        if scenario_cfg is None:
            scenario_doc = checkpoint.config.get("scenario")
            if scenario_doc is None:
                raise ConfigError(
                    "checkpoint carries no scenario config; pass one explicitly"
                )
            scenario_cfg = scenario_config_from_doc(scenario_doc)
        self.scenario_cfg = scenario_cfg
        self.chat_cfg = chat_cfg or ChatClientConfig()
        self.scene = None
        self.history: list[dict] = []
        self.transcript = None
        self.lock = threading.Lock()
        self._qmaps = None  # cached QMapSet for the current scene state
        self._bundles: dict[tuple, dict] = {}  # (digest, pairs) -> bundle doc

    # -- helpers -----------------------------------------------------------

    def _require_scene(self):
        if self.scene is None:
            raise NoSceneError("no scene loaded; POST /scene first")
        return self.scene

    def _invalidate(self):
        self._qmaps = None
        self._bundles.clear()

    def qmaps(self):
        scene = self._require_scene()
        if self._qmaps is None:
            self._qmaps = self.checkpoint.approximator.predict(observe(scene))
        return self._qmaps

    # -- endpoint bodies -----------------------------------------------------

    def set_scene(self, seed: int, scenario: str | None) -> dict:
        if scenario is not None and scenario != self.scenario_cfg.kind:
            raise ConfigError(
                f"service is configured for scenario {self.scenario_cfg.kind!r}, "
                f"got {scenario!r}"
            )
        with self.lock:
            self.scene = generate_scene(self.scenario_cfg, seed)
            self.history.clear()
            self.transcript = None
            self._invalidate()
            return scene_to_doc(self.scene)

    def scene_doc(self) -> dict:
        return scene_to_doc(self._require_scene())

    def qmaps_doc(self) -> dict:
        scene = self._require_scene()
        q = self.qmaps()
        selected = select_global(q, primitive=scene.primitive)
        return {
            "component_names": list(q.component_names),
            "weights": [float(w) for w in q.weights],
            "maps": q.maps.tolist(),
            "composite": composite(q).tolist(),
            "selected": {
                "u": selected.pixel[0],
                "v": selected.pixel[1],
                "primitive": selected.primitive,
            },
        }

    def act(self, pixel: tuple[int, int] | None) -> dict:
        scene = self._require_scene()
        with self.lock:
            if pixel is None:
                action = select_global(self.qmaps(), primitive=scene.primitive)
            else:
                action = Action(scene.primitive, pixel)
            outcome = scene_step(scene, action)
            self._invalidate()
            doc = {
                "pixel": [action.pixel[0], action.pixel[1]],
                "primitive": action.primitive,
                "reward": outcome.reward.as_dict(),
                "total": outcome.reward.total(),
                "done": outcome.done,
                "info": outcome.info,
            }
            self.history.append(doc)
            return doc

    def explain_doc(self, pairs: list[tuple[str, str]] | None) -> dict:
        scene = self._require_scene()
        key = (scene.digest(), tuple(pairs) if pairs is not None else None)
        if key not in self._bundles:
            bundle = build_bundle(self.qmaps(), scene, pairs)
            self._bundles[key] = bundle_to_doc(bundle)
        return self._bundles[key]

    def answer(self, question: str) -> str:
        bundle = self.explain_doc(None)
        # one conversation per session: serialize turns with the writer lock
        # (remote mode holds it for the request's duration, which is fine for
        # the single-user inspector)
        with self.lock:
            if self.transcript is None or self.transcript.bundle is not bundle:
                self.transcript = build_prompt(self.scenario_cfg.kind, bundle)
            reply, self.transcript = llm_chat(self.chat_cfg, self.transcript, question)
            return reply


_STATUS_BY_ERROR: list[tuple[type, int]] = [
    (NoSceneError, 404),
    (EpisodeFinishedError, 409),
    (ChatError, 502),
    (MissingPairError, 400),
    (BoundsError, 400),
    (ConfigError, 400),
    (SceneFormatError, 400),
    (ContractViolationError, 400),
    (XQMapError, 400),
]


def _error_response(exc: XQMapError) -> JSONResponse:
    for cls, status in _STATUS_BY_ERROR:
        if isinstance(exc, cls):
            return JSONResponse(
                status_code=status, content={"error": exc.code, "message": str(exc)}
            )
    raise exc  # pragma: no cover


def create_app(session: ServiceSession, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="xqmap inspector API")

    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    @app.exception_handler(XQMapError)
    async def domain_error(request: Request, exc: XQMapError):
        return _error_response(exc)

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": "malformed", "message": str(exc)})

    def canonical(doc: dict) -> Response:
        return Response(content=canonical_dumps(doc), media_type="application/json")

    @app.get("/health")
    def health():
        return {"status": "ok", "scenario": session.scenario_cfg.kind}

    @app.get("/scene")
    def get_scene():
        return canonical(session.scene_doc())

    @app.post("/scene")
    def post_scene(body: dict):
        if not isinstance(body.get("seed"), int):
            raise ConfigError("body must carry an integer 'seed'")
        scenario = body.get("scenario")
        if scenario is not None and not isinstance(scenario, str):
            raise ConfigError("'scenario' must be a string")
        return canonical(session.set_scene(body["seed"], scenario))

    @app.get("/qmaps")
    def get_qmaps():
        return canonical(session.qmaps_doc())

    @app.post("/act")
    def post_act(body: dict | None = None):
        body = body or {}
        pixel = None
        if body.get("action") is not None:
            action = body["action"]
            if (
                not isinstance(action, dict)
                or not isinstance(action.get("u"), int)
                or not isinstance(action.get("v"), int)
            ):
                raise ConfigError("'action' must be {\"u\": int, \"v\": int}")
            pixel = (action["u"], action["v"])
        return canonical(session.act(pixel))

    @app.post("/explain")
    def post_explain(body: dict | None = None):
        body = body or {}
        pairs = None
        if body.get("pairs") is not None:
            raw = body["pairs"]
            if not isinstance(raw, list) or not all(
                isinstance(p, list) and len(p) == 2 and all(isinstance(x, str) for x in p)
                for p in raw
            ):
                raise ConfigError("'pairs' must be a list of [name, name] pairs")
            pairs = [tuple(p) for p in raw]
        return canonical(session.explain_doc(pairs))

    @app.post("/chat")
    def post_chat(body: dict):
        question = body.get("question")
        if not isinstance(question, str) or not question.strip():
            raise ConfigError("body must carry a non-empty 'question'")
        return {"answer": session.answer(question)}

    return app
