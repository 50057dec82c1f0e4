// Rendered numbers must equal the /explain and /qmaps payload values
// (after the declared 3-decimal display rounding), across all recorded
// sessions. The UI performs no value computation of its own.

import { describe, expect, it } from "vitest";

import {
  candidateGroups,
  displayValue,
  gridRange,
  hoverInfo,
  overlayGrid,
  rdxBars,
  rdxForPixels,
} from "../src/model.js";
import { loadSessions } from "./fixtures.js";

const sessions = loadSessions();

describe("candidate bar parity", () => {
  it("covers ten scripted sessions across both scenarios", () => {
    expect(sessions.length).toBe(10);
    expect(new Set(sessions.map((s) => s.scenario))).toEqual(new Set(["grasp", "land"]));
  });

  it.each(sessions.map((s, i) => [i, s] as const))(
    "session %i: bar values equal payload values",
    (_i, session) => {
      const bundle = session.explain;
      const groups = candidateGroups(bundle);
      expect(groups.length).toBe(bundle.candidates.length + 1);
      const payloadOrder = [...bundle.candidates, bundle.selected];
      groups.forEach((group, gi) => {
        const candidate = payloadOrder[gi];
        expect(group.name).toBe(candidate.name);
        bundle.component_names.forEach((name, k) => {
          expect(group.bars[k].value).toBe(candidate.values[name]);
          expect(group.bars[k].display).toBe(displayValue(candidate.values[name]));
        });
        const overallBar = group.bars[group.bars.length - 1];
        expect(overallBar.label).toBe("overall");
        expect(overallBar.value).toBe(candidate.overall);
      });
    }
  );

  it.each(sessions.map((s, i) => [i, s] as const))(
    "session %i: RDX bar signs equal payload delta signs",
    (_i, session) => {
      const bundle = session.explain;
      for (const rdx of bundle.rdx) {
        const bars = rdxBars(rdx, bundle.component_names);
        bundle.component_names.forEach((name, k) => {
          const delta = rdx.deltas[name];
          expect(bars[k].value).toBe(delta);
          expect(bars[k].sign).toBe(delta > 0 ? 1 : delta < 0 ? -1 : 0);
        });
      }
    }
  );

  it.each(sessions.map((s, i) => [i, s] as const))(
    "session %i: pixel-pair lookup returns a payload RDX entry for those pixels",
    (_i, session) => {
      // Candidates may collide on one pixel (several maps sharing an argmax),
      // so a pixel pair can belong to several payload entries; the lookup must
      // return the first such entry and never synthesize values.
      const bundle = session.explain;
      const unordered = (a: [number, number], b: [number, number]) =>
        JSON.stringify([a, b].slice().sort((p, q) => p[0] - q[0] || p[1] - q[1]));
      for (const rdx of bundle.rdx) {
        for (const [a, b] of [
          [rdx.pixels[0], rdx.pixels[1]],
          [rdx.pixels[1], rdx.pixels[0]],
        ] as const) {
          const found = rdxForPixels(bundle, a, b);
          expect(found).not.toBeNull();
          expect(bundle.rdx).toContain(found);
          expect(unordered(found!.pixels[0], found!.pixels[1])).toBe(
            unordered(rdx.pixels[0], rdx.pixels[1])
          );
        }
      }
      expect(rdxForPixels(bundle, [998, 0], [0, 999])).toBeNull();
    }
  );
});

describe("overlay parity", () => {
  it.each(sessions.map((s, i) => [i, s] as const))(
    "session %i: overlays and hover expose payload values verbatim",
    (_i, session) => {
      const qmaps = session.qmaps;
      expect(overlayGrid(qmaps, "composite")).toBe(qmaps.composite);
      qmaps.component_names.forEach((_name, k) => {
        expect(overlayGrid(qmaps, k)).toBe(qmaps.maps[k]);
      });
      expect(overlayGrid(qmaps, "none")).toBeNull();
      const { u, v } = qmaps.selected;
      const info = hoverInfo(qmaps, [u, v]);
      expect(info.composite).toBe(qmaps.composite[v][u]);
      info.components.forEach((c, k) => {
        expect(c.value).toBe(qmaps.maps[k][v][u]);
        expect(c.display).toBe(c.value.toFixed(3));
      });
      // the selected marker sits on the composite maximum
      const { max } = gridRange(qmaps.composite);
      expect(qmaps.composite[v][u]).toBe(max);
    }
  );
});

describe("display rounding", () => {
  it("rounds to exactly three decimals", () => {
    expect(displayValue(1.0734999)).toBe("1.073");
    expect(displayValue(-0.02)).toBe("-0.020");
    expect(displayValue(0)).toBe("0.000");
  });
});
