import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import TABLE1, TABLE1_RDX, make_table1_qmaps, make_table1_scene
from xqmap.errors import MissingPairError
from xqmap.explain import (
    build_bundle,
    bundle_to_doc,
    candidates,
    default_pairs,
    rdx,
    render_chart,
    shallow,
)
from xqmap.qmaps import QMapSet
from xqmap.scenes import Action


def _random_qmaps(seed, k=2, h=6, w=6, names=("color", "shape", "mass")):
    rng = np.random.default_rng(seed)
    return QMapSet(rng.uniform(-1, 1, size=(k, h, w)), names[:k])


# ---------------------------------------------------------------------------
# candidates
# ---------------------------------------------------------------------------


def test_candidates_k_plus_one(table1_qmaps, table1_scene):
    cand = candidates(table1_qmaps, table1_scene)
    assert len(cand.in_display_order()) == 3
    assert [c.name for c in cand.in_display_order()] == ["A", "B", "Selected"]


def test_candidates_reference_decision(table1_qmaps, table1_scene):
    cand = candidates(table1_qmaps, table1_scene)
    for c in cand.in_display_order():
        expected = TABLE1[c.name]
        assert c.action.pixel == expected["pixel"]
        assert c.label == expected["label"]
        assert c.overall == pytest.approx(expected["overall"], abs=1e-9)
        assert c.values == pytest.approx([expected["color"], expected["shape"]], abs=1e-12)
    assert cand.selected.overall >= max(c.overall for c in cand.per_component)


def test_candidates_degenerate_collapse(table1_scene):
    maps = np.zeros((2, 8, 8))
    maps[:, 4, 4] = 1.0
    cand = candidates(QMapSet(maps, ("color", "shape")), table1_scene)
    assert {c.action.pixel for c in cand.in_display_order()} == {(4, 4)}


def test_candidates_label_empty_cell(table1_scene):
    maps = np.zeros((2, 8, 8))
    maps[:, 0, 0] = 1.0  # nothing sits at (0, 0)
    cand = candidates(QMapSet(maps, ("color", "shape")), table1_scene)
    assert cand.selected.label == "empty cell"


# ---------------------------------------------------------------------------
# shallow explanation
# ---------------------------------------------------------------------------


def test_shallow_reference_dominant(table1_qmaps):
    sh = shallow(table1_qmaps, Action("pick_up", TABLE1["Selected"]["pixel"]))
    assert sh.dominant == "color"  # 0.557 > 0.516


def test_shallow_tie_breaks_to_lowest_index():
    maps = np.full((2, 3, 3), 0.5)
    sh = shallow(QMapSet(maps, ("color", "shape")), Action("pick_up", (1, 1)))
    assert sh.dominant_index == 0


def test_shallow_respects_weights(table1_qmaps):
    table1_qmaps.weights = np.array([0.0, 1.0])
    sh = shallow(table1_qmaps, Action("pick_up", TABLE1["Selected"]["pixel"]))
    assert sh.dominant == "shape"


# ---------------------------------------------------------------------------
# RDX
# ---------------------------------------------------------------------------


def test_rdx_reference_values(table1_qmaps):
    sel = Action("pick_up", TABLE1["Selected"]["pixel"])
    a = Action("pick_up", TABLE1["A"]["pixel"])
    b = Action("pick_up", TABLE1["B"]["pixel"])
    r_a = rdx(table1_qmaps, sel, a)
    assert r_a.deltas == pytest.approx([-0.02, 0.09], abs=1e-9)
    r_b = rdx(table1_qmaps, sel, b)
    assert r_b.deltas == pytest.approx([0.54, -0.229], abs=1e-9)
    r_self = rdx(table1_qmaps, sel, sel)
    assert np.all(r_self.deltas == 0.0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_rdx_antisymmetry_and_additivity(seed):
    q = _random_qmaps(seed)
    rng = np.random.default_rng(seed + 1)
    pix = [
        Action("pick_up", (int(rng.integers(q.width)), int(rng.integers(q.height))))
        for _ in range(3)
    ]
    ab = rdx(q, pix[0], pix[1]).deltas
    ba = rdx(q, pix[1], pix[0]).deltas
    bc = rdx(q, pix[1], pix[2]).deltas
    ac = rdx(q, pix[0], pix[2]).deltas
    assert np.allclose(ab, -ba, atol=1e-12)
    assert np.allclose(ac, ab + bc, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_selected_dominates_every_pixel(seed):
    q = _random_qmaps(seed)
    scene = make_table1_scene(q.width, q.height)
    cand = candidates(q, scene)
    for u in range(q.width):
        for v in range(q.height):
            deltas = rdx(q, cand.selected.action, Action("pick_up", (u, v))).deltas
            assert deltas.sum() >= -1e-12


# ---------------------------------------------------------------------------
# bundle, chart and templates
# ---------------------------------------------------------------------------


def test_default_pairs_layout(table1_qmaps, table1_scene):
    cand = candidates(table1_qmaps, table1_scene)
    assert default_pairs(cand) == [("Selected", "A"), ("Selected", "B"), ("A", "B")]


def test_bundle_reference_docs(table1_qmaps, table1_scene):
    bundle = build_bundle(table1_qmaps, table1_scene)
    doc = bundle_to_doc(bundle)
    assert doc["selected"]["values"] == pytest.approx(
        {"color": 0.557, "shape": 0.516}, abs=1e-12
    )
    by_pair = {tuple(r["pair"]): r["deltas"] for r in doc["rdx"]}
    for pair, expected in TABLE1_RDX.items():
        assert by_pair[pair]["color"] == pytest.approx(expected["color"], abs=1e-9)
        assert by_pair[pair]["shape"] == pytest.approx(expected["shape"], abs=1e-9)
    assert doc["scene_id"] == table1_scene.digest()


def test_bundle_pair_filter_and_missing_pair(table1_qmaps, table1_scene):
    bundle = build_bundle(table1_qmaps, table1_scene, pairs=[("Selected", "B")])
    assert [r.pair for r in bundle.rdx] == [("Selected", "B")]
    with pytest.raises(MissingPairError):
        build_bundle(table1_qmaps, table1_scene, pairs=[("Selected", "Z")])


def test_chart_values_equal_bundle_values(table1_qmaps, table1_scene):
    bundle = build_bundle(table1_qmaps, table1_scene)
    chart = bundle.chart
    cands = bundle.candidates.in_display_order()
    assert len(chart.candidate_groups) == len(cands)
    for group, cand in zip(chart.candidate_groups, cands):
        values = [bar.value for bar in group.bars]
        assert values[:-1] == pytest.approx(list(cand.values), abs=0)
        assert group.bars[-1].label == "overall"
        assert values[-1] == pytest.approx(sum(values[:-1]), abs=1e-9)
    assert [g.label for g in chart.rdx_groups] == [
        "(Selected, A)",
        "(Selected, B)",
        "(A, B)",
    ]
    for group, r in zip(chart.rdx_groups, bundle.rdx):
        assert [bar.value for bar in group.bars] == pytest.approx(list(r.deltas), abs=0)


def test_svg_is_deterministic_and_handles_zero_bundle(table1_scene):
    zero = QMapSet(np.zeros((2, 8, 8)), ("color", "shape"))
    bundle = build_bundle(zero, table1_scene)
    _, svg_a = render_chart(bundle)
    _, svg_b = render_chart(build_bundle(zero, table1_scene))
    assert svg_a == svg_b
    assert svg_a.startswith("<svg")
    assert "candidates-bar-0-0" in svg_a and "rdx-bar-0-0" in svg_a


def test_svg_reference_bundle_bytes_stable(table1_qmaps, table1_scene):
    a = render_chart(build_bundle(table1_qmaps, table1_scene))[1].encode()
    b = render_chart(build_bundle(make_table1_qmaps(), make_table1_scene()))[1].encode()
    assert a == b
    assert b"1.073" in a  # the selected overall appears as a bar label


def test_negative_rdx_bars_hang_below_axis(table1_qmaps, table1_scene):
    import re

    _, svg = render_chart(build_bundle(table1_qmaps, table1_scene))
    axis_y = float(re.search(r'id="rdx-axis"[^/]*y1="([\d.]+)"', svg).group(1))

    def bar_box(gi, bi):
        m = re.search(
            rf'id="rdx-bar-{gi}-{bi}" x="[\d.]+" y="([\d.]+)" width="\d+" height="([\d.]+)"',
            svg,
        )
        return float(m.group(1)), float(m.group(2))

    # group 0 = (Selected, A): color delta -0.02 (below axis), shape +0.09 (above)
    neg_y, neg_h = bar_box(0, 0)
    pos_y, pos_h = bar_box(0, 1)
    assert neg_y == pytest.approx(axis_y, abs=0.02)  # starts at the axis, extends down
    assert pos_y + pos_h == pytest.approx(axis_y, abs=0.02)  # ends at the axis from above


def test_template_shallow_reference(table1_qmaps, table1_scene):
    bundle = build_bundle(table1_qmaps, table1_scene)
    assert bundle.texts["shallow"] == (
        "blue cube owns the highest Q-value in the current scene, "
        "with color component contributing most to the selection"
    )


def test_template_contrastive_reference(table1_qmaps, table1_scene):
    bundle = build_bundle(table1_qmaps, table1_scene)
    text_b = bundle.texts["contrastive"]["(Selected, B)"]
    assert "chosen due to its color" in text_b
    assert "not due to its shape" in text_b
    text_a = bundle.texts["contrastive"]["(Selected, A)"]
    assert "chosen due to its shape" in text_a
    assert "not due to its color" in text_a


def test_template_contrastive_all_zero(table1_scene):
    zero = QMapSet(np.zeros((2, 8, 8)), ("color", "shape"))
    bundle = build_bundle(zero, table1_scene)
    text = bundle.texts["contrastive"]["(Selected, A)"]
    assert text.startswith("No component distinguishes")


def test_template_due_list_matches_positive_deltas():
    for seed in range(20):
        q = _random_qmaps(seed)
        scene = make_table1_scene(q.width, q.height)
        bundle = build_bundle(q, scene)
        for r in bundle.rdx:
            text = bundle.texts["contrastive"][f"({r.pair[0]}, {r.pair[1]})"]
            due = [n for n, d in zip(bundle.component_names, r.deltas) if d > 0]
            not_due = [n for n, d in zip(bundle.component_names, r.deltas) if d <= 0]
            if np.all(r.deltas == 0):
                assert text.startswith("No component distinguishes")
                continue
            if due:
                head, _, tail = text.partition("not due to its")
                assert "due to its " + ", ".join(due) in head
                if not_due:
                    assert ", ".join(not_due) in tail
            else:
                assert "not due to its " + ", ".join(not_due) in text
