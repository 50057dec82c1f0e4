"""Grouped-bar chart data and a deterministic SVG renderer.

The SVG output is a pure function of the chart data: element order, ids and
coordinate formatting are fixed, so identical inputs produce byte-identical
documents. Negative bars hang below the zero axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:  # pragma: no cover
    from .explain import CandidateSet, RDX

# colour per component index, then grey for the overall bar
_SERIES_COLORS = ("#e07b39", "#5471ab", "#3b9e6d", "#b85fa0", "#c9b037", "#7a7a3b")
_OVERALL_COLOR = "#707070"

_PANEL_W = 560
_PANEL_H = 170
_MARGIN_L = 46
_MARGIN_TOP = 34
_LABEL_H = 34
_BAR_W = 22
_BAR_GAP = 6
_GROUP_GAP = 34


@dataclass(frozen=True)
class Bar:
    label: str
    value: float


@dataclass(frozen=True)
class ChartGroup:
    label: str
    bars: tuple[Bar, ...]


@dataclass(frozen=True)
class ChartData:
    candidate_groups: tuple[ChartGroup, ...]
    rdx_groups: tuple[ChartGroup, ...]

    def to_doc(self) -> dict:
        def group_doc(g: ChartGroup) -> dict:
            return {
                "label": g.label,
                "bars": [{"label": b.label, "value": float(b.value)} for b in g.bars],
            }

        return {
            "candidate_groups": [group_doc(g) for g in self.candidate_groups],
            "rdx_groups": [group_doc(g) for g in self.rdx_groups],
        }


def build_chart_data(cand: "CandidateSet", rdx_list: Sequence["RDX"]) -> ChartData:
    names = cand.component_names
    candidate_groups = tuple(
        ChartGroup(
            label=f"{c.name} ({c.label})",
            bars=tuple(Bar(n, float(v)) for n, v in zip(names, c.values))
            + (Bar("overall", c.overall),),
        )
        for c in cand.in_display_order()
    )
    rdx_groups = tuple(
        ChartGroup(
            label=f"({r.pair[0]}, {r.pair[1]})",
            bars=tuple(Bar(n, float(d)) for n, d in zip(names, r.deltas)),
        )
        for r in rdx_list
    )
    return ChartData(candidate_groups, rdx_groups)


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _series_color(bar_label: str, series_order: list[str]) -> str:
    if bar_label == "overall":
        return _OVERALL_COLOR
    return _SERIES_COLORS[series_order.index(bar_label) % len(_SERIES_COLORS)]


def _render_panel(
    out: list[str], panel_id: str, title: str, groups: Sequence[ChartGroup], y_offset: float
) -> None:
    values = [b.value for g in groups for b in g.bars]
    vmax = max((v for v in values if v > 0), default=0.0)
    vmin = min((v for v in values if v < 0), default=0.0)
    span = max(vmax - vmin, 1e-9)
    plot_h = _PANEL_H - _LABEL_H
    scale = plot_h / span
    baseline = y_offset + _MARGIN_TOP + vmax * scale

    out.append(f'<g id="{panel_id}">')
    out.append(
        f'<text id="{panel_id}-title" x="{_MARGIN_L}" y="{_fmt(y_offset + 18)}" '
        f'font-size="13" font-weight="bold">{title}</text>'
    )
    x = float(_MARGIN_L)
    x_end = x
    for gi, group in enumerate(groups):
        group_w = len(group.bars) * (_BAR_W + _BAR_GAP) - _BAR_GAP
        for bi, bar in enumerate(group.bars):
            bx = x + bi * (_BAR_W + _BAR_GAP)
            h = abs(bar.value) * scale
            by = baseline - h if bar.value >= 0 else baseline
            series = [b.label for b in group.bars if b.label != "overall"]
            color = _series_color(bar.label, series)
            out.append(
                f'<rect id="{panel_id}-bar-{gi}-{bi}" x="{_fmt(bx)}" y="{_fmt(by)}" '
                f'width="{_BAR_W}" height="{_fmt(h)}" fill="{color}">'
                f"<title>{group.label} / {bar.label}: {bar.value!r}</title></rect>"
            )
            out.append(
                f'<text id="{panel_id}-val-{gi}-{bi}" x="{_fmt(bx + _BAR_W / 2)}" '
                f'y="{_fmt(by - 3 if bar.value >= 0 else by + h + 11)}" font-size="8" '
                f'text-anchor="middle">{bar.value:.3f}</text>'
            )
        out.append(
            f'<text id="{panel_id}-label-{gi}" x="{_fmt(x + group_w / 2)}" '
            f'y="{_fmt(y_offset + _MARGIN_TOP + plot_h + 16)}" font-size="11" '
            f'text-anchor="middle">{group.label}</text>'
        )
        x += group_w + _GROUP_GAP
        x_end = x - _GROUP_GAP
    out.append(
        f'<line id="{panel_id}-axis" x1="{_MARGIN_L - 6}" y1="{_fmt(baseline)}" '
        f'x2="{_fmt(max(x_end, _MARGIN_L) + 6)}" y2="{_fmt(baseline)}" '
        f'stroke="#222222" stroke-width="1"/>'
    )
    out.append("</g>")


def render_svg(chart: ChartData) -> str:
    """One SVG document with a candidate-value panel and an RDX panel."""
    panels = [("candidates", "Candidate Q-values", chart.candidate_groups)]
    if chart.rdx_groups:
        panels.append(("rdx", "Q-value differences (RDX)", chart.rdx_groups))
    total_h = len(panels) * (_PANEL_H + _MARGIN_TOP) + 10
    bar_span = max(
        (
            sum(len(g.bars) * (_BAR_W + _BAR_GAP) - _BAR_GAP + _GROUP_GAP for g in groups)
            for _, _, groups in panels
        ),
        default=0,
    )
    total_w = max(_PANEL_W, _MARGIN_L * 2 + bar_span)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{total_h}" '
        f'viewBox="0 0 {total_w} {total_h}" font-family="sans-serif">',
        f'<rect id="background" x="0" y="0" width="{total_w}" height="{total_h}" fill="#ffffff"/>',
    ]
    y = 0.0
    for panel_id, title, groups in panels:
        _render_panel(out, panel_id, title, groups, y)
        y += _PANEL_H + _MARGIN_TOP
    out.append("</svg>")
    return "\n".join(out) + "\n"
