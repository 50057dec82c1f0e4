// DOM rendering. Everything here draws payload values through the
// view-model helpers; no Q-value arithmetic happens in the UI.

import {
  BarSpec,
  CandidateGroup,
  candidateAt,
  candidateGroups,
  cellAt,
  cellColorName,
  displayValue,
  gridRange,
  heatColor,
  hoverInfo,
  overlayGrid,
  rdxBars,
  rdxForPixels,
  Pixel,
} from "./model.js";
import type { ViewState } from "./state.js";
import type { BundleDoc } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const CELL = 26;

export interface GridCallbacks {
  onCellClick(pixel: Pixel): void;
  onCellHover(pixel: Pixel | null): void;
}

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {}
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, String(v));
  return el;
}

function baseCellFill(state: ViewState, pixel: Pixel): string {
  const scene = state.scene!;
  const cell = cellAt(scene, pixel);
  if (cell.color === null) {
    const shade = 235 - Math.min(60, Math.round(cell.height * 40));
    return `rgb(${shade}, ${shade}, ${shade})`;
  }
  const palette: Record<string, string> = {
    red: "#d64545",
    orange: "#e08b3c",
    yellow: "#d9c23a",
    green: "#57a457",
    blue: "#4f74c9",
    purple: "#9a5fc2",
  };
  return palette[cellColorName(scene, pixel)] ?? "#888888";
}

export function renderGrid(
  container: HTMLElement,
  state: ViewState,
  callbacks: GridCallbacks
): void {
  container.replaceChildren();
  if (!state.scene || !state.qmaps) return;
  const { width, height } = state.scene;
  const svg = svgEl("svg", {
    width: width * CELL,
    height: height * CELL,
    viewBox: `0 0 ${width * CELL} ${height * CELL}`,
    class: "scene-grid",
  });
  const overlay = overlayGrid(state.qmaps, state.overlay);
  const range = overlay ? gridRange(overlay) : null;
  for (let v = 0; v < height; v++) {
    for (let u = 0; u < width; u++) {
      const rect = svgEl("rect", {
        x: u * CELL,
        y: v * CELL,
        width: CELL - 1,
        height: CELL - 1,
        fill: overlay ? heatColor(overlay[v][u], range!.min, range!.max) : baseCellFill(state, [u, v]),
        "data-u": u,
        "data-v": v,
      });
      rect.addEventListener("click", () => callbacks.onCellClick([u, v]));
      rect.addEventListener("mouseenter", () => callbacks.onCellHover([u, v]));
      svg.appendChild(rect);
    }
  }
  svg.addEventListener("mouseleave", () => callbacks.onCellHover(null));

  // candidate markers from the explanation payload
  if (state.bundle) {
    for (const group of candidateGroups(state.bundle)) {
      const [u, v] = group.pixel;
      const marker = svgEl("g", { class: "candidate-marker" });
      marker.appendChild(
        svgEl("circle", {
          cx: u * CELL + CELL / 2,
          cy: v * CELL + CELL / 2,
          r: CELL / 2 - 3,
          fill: "none",
          stroke: group.name === "Selected" ? "#111111" : "#f5f5f5",
          "stroke-width": 2.5,
        })
      );
      const text = svgEl("text", {
        x: u * CELL + CELL / 2,
        y: v * CELL + CELL / 2 + 4,
        "text-anchor": "middle",
        "font-size": 11,
        "font-weight": "bold",
        fill: group.name === "Selected" ? "#111111" : "#f5f5f5",
      });
      text.textContent = group.name === "Selected" ? "S" : group.name;
      marker.appendChild(text);
      svg.appendChild(marker);
    }
  }

  // selection outlines
  for (const [u, v] of state.selected) {
    svg.appendChild(
      svgEl("rect", {
        x: u * CELL + 1,
        y: v * CELL + 1,
        width: CELL - 3,
        height: CELL - 3,
        fill: "none",
        stroke: "#ffd400",
        "stroke-width": 3,
      })
    );
  }
  container.appendChild(svg);
}

export function renderHover(container: HTMLElement, state: ViewState, pixel: Pixel | null): void {
  if (!pixel || !state.qmaps) {
    container.textContent = "";
    return;
  }
  const info = hoverInfo(state.qmaps, pixel);
  const parts = info.components.map((c) => `${c.name} ${c.display}`);
  container.textContent =
    `(${pixel[0]}, ${pixel[1]})  ${parts.join("  ")}  composite ${info.compositeDisplay}`;
  container.title = `full precision: ${info.components
    .map((c) => `${c.name}=${c.value}`)
    .join(", ")}, composite=${info.composite}`;
}

function barChart(groups: { label: string; bars: BarSpec[] }[], heightPx = 150): SVGSVGElement {
  const values = groups.flatMap((g) => g.bars.map((b) => b.value));
  const vmax = Math.max(0, ...values);
  const vmin = Math.min(0, ...values);
  const span = Math.max(vmax - vmin, 1e-9);
  const plotH = heightPx - 30;
  const scale = plotH / span;
  const baseline = 5 + vmax * scale;
  const barW = 18;
  const gap = 5;
  const groupGap = 26;
  let x = 10;
  const svg = svgEl("svg", { class: "bar-chart" });
  const colors = ["#e07b39", "#5471ab", "#3b9e6d", "#b85fa0", "#c9b037", "#707070"];
  for (const group of groups) {
    group.bars.forEach((b, i) => {
      const h = Math.abs(b.value) * scale;
      const y = b.value >= 0 ? baseline - h : baseline;
      const color = b.label === "overall" ? colors[5] : colors[i % 5];
      const rect = svgEl("rect", {
        x,
        y,
        width: barW,
        height: Math.max(h, 0.5),
        fill: color,
        "data-label": b.label,
        "data-value": b.value,
      });
      const title = svgEl("title");
      title.textContent = `${group.label} / ${b.label}: ${b.value}`;
      rect.appendChild(title);
      svg.appendChild(rect);
      const valueText = svgEl("text", {
        x: x + barW / 2,
        y: b.value >= 0 ? y - 3 : y + h + 10,
        "text-anchor": "middle",
        "font-size": 8,
      });
      valueText.textContent = b.display;
      svg.appendChild(valueText);
      x += barW + gap;
    });
    const labelText = svgEl("text", {
      x: x - (group.bars.length * (barW + gap)) / 2 - gap,
      y: heightPx - 6,
      "text-anchor": "middle",
      "font-size": 10,
    });
    labelText.textContent = group.label;
    svg.appendChild(labelText);
    x += groupGap;
  }
  svg.appendChild(
    svgEl("line", { x1: 4, y1: baseline, x2: x - groupGap + 6, y2: baseline, stroke: "#333" })
  );
  svg.setAttribute("width", String(x));
  svg.setAttribute("height", String(heightPx));
  svg.setAttribute("viewBox", `0 0 ${x} ${heightPx}`);
  return svg;
}

function pairHeading(bundle: BundleDoc, pair: [string, string]): string {
  return bundle.texts.contrastive[`(${pair[0]}, ${pair[1]})`] ?? "";
}

export function renderExplanation(container: HTMLElement, state: ViewState): void {
  container.replaceChildren();
  if (!state.bundle) {
    const hint = document.createElement("p");
    hint.className = "hint";
    hint.textContent = "Request an explanation to see candidate values.";
    container.appendChild(hint);
    return;
  }
  const bundle = state.bundle;

  const candidatesTitle = document.createElement("h3");
  candidatesTitle.textContent = "Candidate Q-values";
  container.appendChild(candidatesTitle);
  container.appendChild(
    barChart(candidateGroups(bundle).map((g) => ({ label: `${g.name} (${g.label})`, bars: g.bars })))
  );

  const shallowText = document.createElement("p");
  shallowText.className = "template-text";
  shallowText.textContent = bundle.texts.shallow;
  container.appendChild(shallowText);

  if (state.selected.length === 2) {
    const rdx = rdxForPixels(bundle, state.selected[0], state.selected[1]);
    const rdxTitle = document.createElement("h3");
    container.appendChild(rdxTitle);
    if (rdx) {
      rdxTitle.textContent = `Contrast (${rdx.pair[0]}, ${rdx.pair[1]})`;
      container.appendChild(
        barChart([{ label: `(${rdx.pair[0]}, ${rdx.pair[1]})`, bars: rdxBars(rdx, bundle.component_names) }])
      );
      const text = document.createElement("p");
      text.className = "template-text";
      text.textContent = pairHeading(bundle, rdx.pair);
      container.appendChild(text);
    } else {
      rdxTitle.textContent = "Contrast";
      const note = document.createElement("p");
      note.className = "hint";
      note.textContent = "Select two marked candidate pixels to compare them.";
      container.appendChild(note);
    }
  } else if (state.selected.length === 1) {
    const cand = candidateAt(bundle, state.selected[0]);
    if (cand) {
      const note = document.createElement("p");
      note.className = "hint";
      note.textContent =
        `${cand.name}: ${cand.label}, overall ${displayValue(cand.overall)}. ` +
        "Select a second candidate for a contrastive view.";
      container.appendChild(note);
    }
  }
}

export function renderTranscript(container: HTMLElement, state: ViewState): void {
  container.replaceChildren();
  for (const turn of state.transcript) {
    const div = document.createElement("div");
    div.className = `chat-turn chat-${turn.role}`;
    div.textContent = (turn.role === "human" ? "you: " : "agent: ") + turn.text;
    container.appendChild(div);
  }
  container.scrollTop = container.scrollHeight;
}

export function renderNotice(container: HTMLElement, state: ViewState): void {
  container.textContent = state.notice ?? "";
  container.classList.toggle("visible", state.notice !== null);
}
