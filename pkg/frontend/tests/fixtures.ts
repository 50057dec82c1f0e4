import { readFileSync } from "node:fs";

import type { ActOutcome, BundleDoc, QMapsPayload, SceneDoc } from "../src/types.js";

export interface SessionFixture {
  scenario: string;
  seed: number;
  scene: SceneDoc;
  qmaps: QMapsPayload;
  explain: BundleDoc;
  chat: { question: string; answer: string }[];
  act: ActOutcome;
  scene_after: SceneDoc;
  qmaps_after: QMapsPayload;
}

export function loadSessions(): SessionFixture[] {
  const url = new URL("./fixtures/sessions.json", import.meta.url);
  return JSON.parse(readFileSync(url, "utf8")) as SessionFixture[];
}
