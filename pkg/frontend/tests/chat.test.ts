// The chat pane round-trips the stub backend: posting a recorded question
// must surface the recorded answer in the transcript, via the real client
// code with fetch stubbed to replay the recorded HTTP exchange.

import { afterEach, describe, expect, it, vi } from "vitest";

import { InspectorApi, ApiFailure } from "../src/api.js";
import { appendChat, initialState, withScene } from "../src/state.js";
import { loadSessions } from "./fixtures.js";

const sessions = loadSessions();

function stubFetch(handler: (url: string, init?: RequestInit) => { status: number; body: unknown }) {
  vi.stubGlobal("fetch", async (url: string, init?: RequestInit) => {
    const { status, body } = handler(url, init);
    return {
      ok: status >= 200 && status < 300,
      status,
      statusText: String(status),
      json: async () => body,
    } as Response;
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("chat round-trip", () => {
  it.each(sessions.map((s, i) => [i, s] as const))(
    "session %i: recorded stub answers land in the transcript",
    async (_i, session) => {
      stubFetch((url, init) => {
        expect(url).toBe("/chat");
        const question = JSON.parse(String(init?.body)).question as string;
        const turn = session.chat.find((c) => c.question === question);
        if (!turn) return { status: 400, body: { error: "config", message: "unknown question" } };
        return { status: 200, body: { answer: turn.answer } };
      });
      const api = new InspectorApi("");
      let state = withScene(initialState(), session.scene, session.qmaps);
      for (const turn of session.chat) {
        const reply = await api.chat(turn.question);
        state = appendChat(state, turn.question, reply.answer);
      }
      expect(state.transcript.map((t) => t.text)).toEqual(
        session.chat.flatMap((t) => [t.question, t.answer])
      );
      expect(state.transcript.map((t) => t.role)).toEqual(
        session.chat.flatMap(() => ["human", "ai"])
      );
    }
  );

  it("surfaces backend failures as typed errors with retry info", async () => {
    stubFetch(() => ({ status: 502, body: { error: "chat_network", message: "unreachable" } }));
    const api = new InspectorApi("");
    await expect(api.chat("why?")).rejects.toSatisfy((err: unknown) => {
      return err instanceof ApiFailure && err.status === 502 && err.body.error === "chat_network";
    });
  });

  it("stub answers quote only bundle numbers at display rounding", () => {
    for (const session of sessions) {
      const allowed = new Set<string>();
      for (const cand of [...session.explain.candidates, session.explain.selected]) {
        Object.values(cand.values).forEach((v) => allowed.add(v.toFixed(3)));
        allowed.add(cand.overall.toFixed(3));
      }
      for (const r of session.explain.rdx) {
        Object.values(r.deltas).forEach((d) => allowed.add(d.toFixed(3)));
      }
      for (const turn of session.chat) {
        for (const token of turn.answer.match(/-?\d+\.\d+/g) ?? []) {
          expect(allowed.has(token), `${token} in "${turn.answer}"`).toBe(true);
        }
      }
    }
  });
});
