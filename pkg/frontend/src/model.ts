// Pure view-model helpers. Every number shown in the UI comes out of these
// functions, which only reorganize API payload values (display rounding: 3
// decimals; full precision stays available for tooltips).

import type { BundleDoc, CandidateDoc, QMapsPayload, RdxDoc, SceneDoc } from "./types.js";

export type Pixel = [number, number];

export function displayValue(x: number): string {
  return x.toFixed(3);
}

export interface BarSpec {
  label: string;
  value: number; // verbatim payload value
  display: string;
  sign: -1 | 0 | 1;
}

export interface CandidateGroup {
  name: string;
  label: string;
  pixel: Pixel;
  bars: BarSpec[]; // K component bars then the overall bar
}

function bar(label: string, value: number): BarSpec {
  return {
    label,
    value,
    display: displayValue(value),
    sign: value > 0 ? 1 : value < 0 ? -1 : 0,
  };
}

export function candidateGroups(bundle: BundleDoc): CandidateGroup[] {
  const order: CandidateDoc[] = [...bundle.candidates, bundle.selected];
  return order.map((c) => ({
    name: c.name,
    label: c.label,
    pixel: c.pixel,
    bars: [
      ...bundle.component_names.map((n) => bar(n, c.values[n])),
      bar("overall", c.overall),
    ],
  }));
}

export function rdxBars(rdx: RdxDoc, componentNames: string[]): BarSpec[] {
  return componentNames.map((n) => bar(n, rdx.deltas[n]));
}

function samePixel(a: Pixel, b: Pixel): boolean {
  return a[0] === b[0] && a[1] === b[1];
}

export function candidateAt(bundle: BundleDoc, pixel: Pixel): CandidateDoc | null {
  for (const c of [bundle.selected, ...bundle.candidates]) {
    if (samePixel(c.pixel, pixel)) return c;
  }
  return null;
}

/** The payload RDX entry whose action pixels match the two selected pixels
 * (in either order); the UI never computes differences itself. */
export function rdxForPixels(bundle: BundleDoc, a: Pixel, b: Pixel): RdxDoc | null {
  for (const r of bundle.rdx) {
    if (samePixel(r.pixels[0], a) && samePixel(r.pixels[1], b)) return r;
    if (samePixel(r.pixels[0], b) && samePixel(r.pixels[1], a)) return r;
  }
  return null;
}

export type OverlayMode = "none" | "composite" | number;

export function overlayGrid(qmaps: QMapsPayload, mode: OverlayMode): number[][] | null {
  if (mode === "none") return null;
  if (mode === "composite") return qmaps.composite;
  return qmaps.maps[mode] ?? null;
}

export interface HoverInfo {
  pixel: Pixel;
  components: { name: string; value: number; display: string }[];
  composite: number;
  compositeDisplay: string;
}

export function hoverInfo(qmaps: QMapsPayload, pixel: Pixel): HoverInfo {
  const [u, v] = pixel;
  return {
    pixel,
    components: qmaps.component_names.map((name, k) => ({
      name,
      value: qmaps.maps[k][v][u],
      display: displayValue(qmaps.maps[k][v][u]),
    })),
    composite: qmaps.composite[v][u],
    compositeDisplay: displayValue(qmaps.composite[v][u]),
  };
}

/** Linear heat shade over the grid's own range; constant grids shade flat. */
export function heatColor(value: number, min: number, max: number): string {
  const t = max > min ? (value - min) / (max - min) : 0.5;
  const hue = 240 - 240 * t; // blue (low) -> red (high)
  return `hsl(${hue.toFixed(0)}, 80%, ${(85 - 35 * t).toFixed(0)}%)`;
}

export function gridRange(grid: number[][]): { min: number; max: number } {
  let min = Infinity;
  let max = -Infinity;
  for (const row of grid) {
    for (const v of row) {
      if (v < min) min = v;
      if (v > max) max = v;
    }
  }
  return { min, max };
}

/** Episode state derived from the scene document alone. */
export function sceneDone(scene: SceneDoc): boolean {
  if (scene.scenario === "land") return scene.steps_elapsed >= 1;
  if (scene.steps_elapsed >= scene.step_limit) return true;
  return !scene.objects.some((o) => !o.removed && o.shape === "cube");
}

export function cellAt(scene: SceneDoc, pixel: Pixel) {
  return scene.cells[pixel[1] * scene.width + pixel[0]];
}

export function cellColorName(scene: SceneDoc, pixel: Pixel): string {
  const cell = cellAt(scene, pixel);
  return cell.color === null ? "grey" : scene.palette[cell.color];
}
