import { InspectorApi, ApiFailure } from "./api.js";
import { sceneDone, OverlayMode, Pixel } from "./model.js";
import {
  ViewState,
  afterAct,
  appendChat,
  initialState,
  togglePixel,
  withBundle,
  withNotice,
  withOverlay,
  withScene,
} from "./state.js";
import {
  renderExplanation,
  renderGrid,
  renderHover,
  renderNotice,
  renderTranscript,
} from "./render.js";

const params = new URLSearchParams(window.location.search);
const api = new InspectorApi(params.get("api") ?? "");

let state: ViewState = initialState();

const el = (id: string) => document.getElementById(id)!;

function setState(next: ViewState): void {
  state = next;
  renderGrid(el("grid"), state, {
    onCellClick: (pixel) => setState(togglePixel(state, pixel)),
    onCellHover: (pixel) => renderHover(el("hover"), state, pixel),
  });
  renderExplanation(el("explanation"), state);
  renderTranscript(el("transcript"), state);
  renderNotice(el("notice"), state);
  const done = state.scene !== null && sceneDone(state.scene);
  (el("step") as HTMLButtonElement).disabled = state.scene === null || done;
  (el("explain") as HTMLButtonElement).disabled = state.scene === null;
  (el("send") as HTMLButtonElement).disabled =
    state.scene === null || (el("question") as HTMLInputElement).value.trim() === "";
  el("status").textContent = state.scene
    ? `${state.scene.scenario} scene, step ${state.scene.steps_elapsed}/${state.scene.step_limit}` +
      (done ? " — episode finished" : "")
    : "no scene loaded";
}

function describeFailure(err: unknown): string {
  if (err instanceof ApiFailure) {
    if (err.status === 409) return "episode finished — generate a new scene";
    if (err.status === 502) return `chat backend failed: ${err.body.message} (retry?)`;
    return `${err.body.error}: ${err.body.message}`;
  }
  return String(err);
}

async function guarded(work: () => Promise<ViewState>): Promise<void> {
  try {
    setState(await work());
  } catch (err) {
    setState(withNotice(state, describeFailure(err)));
  }
}

async function refreshScene(base: ViewState, fresh: boolean): Promise<ViewState> {
  const scene = await api.scene();
  const qmaps = await api.qmaps();
  return fresh ? withScene(base, scene, qmaps) : afterAct(base, scene, qmaps);
}

function wire(): void {
  el("new-scene").addEventListener("click", () =>
    guarded(async () => {
      const seed = Number((el("seed") as HTMLInputElement).value) || 0;
      await api.newScene(seed);
      return refreshScene(state, true);
    })
  );

  el("overlay").addEventListener("change", () => {
    const raw = (el("overlay") as HTMLSelectElement).value;
    const overlay: OverlayMode =
      raw === "none" || raw === "composite" ? raw : (Number(raw) as OverlayMode);
    setState(withOverlay(state, overlay));
  });

  el("explain").addEventListener("click", () =>
    guarded(async () => withBundle(state, await api.explain()))
  );

  el("step").addEventListener("click", () =>
    guarded(async () => {
      await api.actGreedy();
      return refreshScene(state, false);
    })
  );

  const ask = () =>
    guarded(async () => {
      const input = el("question") as HTMLInputElement;
      const question = input.value.trim();
      if (!question) return state;
      const reply = await api.chat(question);
      input.value = "";
      return appendChat(state, question, reply.answer);
    });
  el("send").addEventListener("click", ask);
  (el("question") as HTMLInputElement).addEventListener("keydown", (ev) => {
    if (ev.key === "Enter") ask();
  });
  (el("question") as HTMLInputElement).addEventListener("input", () => setState(state));

  guarded(async () => {
    const health = await api.health();
    const select = el("overlay") as HTMLSelectElement;
    select.replaceChildren();
    for (const option of ["composite", "none"]) {
      const opt = document.createElement("option");
      opt.value = option;
      opt.textContent = option;
      select.appendChild(opt);
    }
    el("scenario").textContent = health.scenario;
    try {
      return await refreshScene(state, true);
    } catch {
      return state; // no scene yet; the user generates one
    }
  }).then(() => {
    // component overlay options appear once qmaps are known
    if (state.qmaps) {
      const select = el("overlay") as HTMLSelectElement;
      state.qmaps.component_names.forEach((name, k) => {
        const opt = document.createElement("option");
        opt.value = String(k);
        opt.textContent = `component: ${name}`;
        select.appendChild(opt);
      });
    }
  });
}

wire();
