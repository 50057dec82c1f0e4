// Single-page view state and its (pure) transitions.

import type { BundleDoc, QMapsPayload, SceneDoc } from "./types.js";
import type { OverlayMode, Pixel } from "./model.js";

export interface ChatTurn {
  role: "human" | "ai";
  text: string;
}

export interface ViewState {
  scene: SceneDoc | null;
  qmaps: QMapsPayload | null;
  bundle: BundleDoc | null;
  overlay: OverlayMode;
  selected: Pixel[]; // up to 2, for contrastive pairs
  transcript: ChatTurn[];
  notice: string | null;
}

export function initialState(): ViewState {
  return {
    scene: null,
    qmaps: null,
    bundle: null,
    overlay: "composite",
    selected: [],
    transcript: [],
    notice: null,
  };
}

/** A fresh scene invalidates overlays, bundle and pixel selection but keeps
 * the chat transcript. */
export function withScene(state: ViewState, scene: SceneDoc, qmaps: QMapsPayload): ViewState {
  return { ...state, scene, qmaps, bundle: null, selected: [], notice: null };
}

/** After an action the scene/qmaps payloads are refetched; the cached bundle
 * is stale and dropped. Selection and transcript survive the refresh. */
export function afterAct(state: ViewState, scene: SceneDoc, qmaps: QMapsPayload): ViewState {
  const inBounds = state.selected.filter(([u, v]) => u < scene.width && v < scene.height);
  return { ...state, scene, qmaps, bundle: null, selected: inBounds };
}

export function withBundle(state: ViewState, bundle: BundleDoc): ViewState {
  return { ...state, bundle };
}

export function withOverlay(state: ViewState, overlay: OverlayMode): ViewState {
  return { ...state, overlay }; // selection intentionally untouched
}

/** Toggle a pixel in the contrast selection; at most two stay selected
 * (oldest dropped first). */
export function togglePixel(state: ViewState, pixel: Pixel): ViewState {
  const same = (p: Pixel) => p[0] === pixel[0] && p[1] === pixel[1];
  let selected: Pixel[];
  if (state.selected.some(same)) {
    selected = state.selected.filter((p) => !same(p));
  } else {
    selected = [...state.selected, pixel].slice(-2);
  }
  return { ...state, selected };
}

export function appendChat(state: ViewState, question: string, answer: string): ViewState {
  return {
    ...state,
    transcript: [
      ...state.transcript,
      { role: "human", text: question },
      { role: "ai", text: answer },
    ],
  };
}

export function withNotice(state: ViewState, notice: string | null): ViewState {
  return { ...state, notice };
}
