from __future__ import annotations

import math

import pytest
from hypothesis import given, settings, strategies as st

from unitcanvas.dataset import load_csv
from unitcanvas.layout import (
    HistogramSpec,
    LayoutError,
    apply_color_by,
    apply_layout,
    apply_size_by,
    assign_axis,
    initial_cluster,
    move_points,
    order_by,
    region_anchor,
    serpentine_order,
    summarize,
)
from unitcanvas.view_state import ViewState, check_invariants, snapshot_json
from conftest import load_fixture


def bbox_of(state, ids):
    xs = [state.points[r].x for r in ids]
    ys = [state.points[r].y for r in ids]
    return min(xs), min(ys), max(xs), max(ys)


# ------------------------------------------------------------------- cluster


def test_single_point_sits_exactly_at_canvas_center():
    ds = load_csv("a\n1\n")
    state = ViewState.initial(ds, canvas=(1280.0, 800.0))
    res = initial_cluster(state)
    assert res.positions[0] == (640.0, 400.0)


def test_cluster_diameter_bound_for_100_points():
    ds = load_csv("a\n" + "\n".join(str(i) for i in range(100)) + "\n")
    state = ViewState.initial(ds, canvas=(1280.0, 800.0))
    res = initial_cluster(state)
    pts = list(res.positions.values())
    # numeric bound derived from the spiral: max pairwise center distance
    worst = max(
        math.dist(a, b) for i, a in enumerate(pts) for b in pts[i + 1 :]
    )
    assert worst <= 0.5 * 800.0


def test_cluster_deterministic_and_collision_free(state):
    a = initial_cluster(state).positions
    b = initial_cluster(state).positions
    assert a == b
    assert len(set(a.values())) == len(a)


def test_points_stay_inside_canvas(state):
    res = initial_cluster(state)
    w, h = state.canvas
    for x, y in res.positions.values():
        assert 0 <= x <= w and 0 <= y <= h


# ---------------------------------------------------------------------- axes


def band_oracle(scale, category):
    """Brute-force band bounds: equal widths in domain order."""
    cats = scale.domain
    r0, r1 = scale.range
    width = (r1 - r0) / len(cats)
    i = cats.index(category)
    return r0 + i * width, r0 + (i + 1) * width


def test_band_chart_groups_and_stacks():
    ds = load_csv("Region\nFar West\nNew England\nFar West\n")
    state = ViewState.initial(ds, canvas=(1000.0, 600.0))
    apply_layout(state, initial_cluster(state))
    res = assign_axis(state, ds, "horizontal", "Region", [0, 1, 2])
    apply_layout(state, res)
    scale = res.scale_used
    assert scale.kind == "band"
    assert scale.domain == ["Far West", "New England"]
    for rid, cat in ((0, "Far West"), (1, "New England"), (2, "Far West")):
        lo, hi = band_oracle(scale, cat)
        assert lo <= state.points[rid].x <= hi
    # the two Far West points stack in one band: same x, different y
    assert state.points[0].x == state.points[2].x
    assert state.points[0].y != state.points[2].y


def test_band_disjointness_and_coverage(dataset, state):
    res = assign_axis(state, dataset, "horizontal", "Region", sorted(state.visible_ids()))
    scale = res.scale_used
    bounds = [scale.band_bounds(c) for c in scale.domain]
    for (a0, a1), (b0, b1) in zip(bounds, bounds[1:]):
        assert a1 == pytest.approx(b0)
        assert a0 < a1
    assert bounds[0][0] == pytest.approx(scale.range[0])
    assert bounds[-1][1] == pytest.approx(scale.range[1])


def test_linear_axis_maps_within_half_pixel(dataset, state):
    ids = sorted(state.visible_ids())
    res = assign_axis(state, dataset, "horizontal", "SAT Average", ids)
    apply_layout(state, res)
    scale = res.scale_used
    for rid in ids:
        v = dataset.records[rid]["SAT Average"]
        if v is None:
            continue
        assert abs(state.points[rid].x - scale.map(v)) <= 0.5


def test_degenerate_domain_maps_to_midpoint():
    ds = load_csv("q\n5\n5\n5\n")
    state = ViewState.initial(ds, canvas=(1000.0, 600.0))
    apply_layout(state, initial_cluster(state))
    res = assign_axis(state, ds, "vertical", "q", [0, 1, 2])
    apply_layout(state, res)
    lo, hi = res.scale_used.range
    mid = (lo + hi) / 2
    for rid in (0, 1, 2):
        assert state.points[rid].y == pytest.approx(mid)


def test_fresh_single_axis_jitters_other_dimension(dataset, state):
    ids = sorted(state.visible_ids())
    res = assign_axis(state, dataset, "horizontal", "SAT Average", ids)
    apply_layout(state, res)
    ys = [state.points[r].y for r in ids if dataset.records[r]["SAT Average"] is not None]
    assert len(set(ys)) == len(ys), "jitter lanes must not overlap"


def test_second_axis_preserves_first(dataset, state):
    ids = sorted(state.visible_ids())
    apply_layout(state, assign_axis(state, dataset, "horizontal", "SAT Average", ids))
    xs_before = {r: state.points[r].x for r in ids}
    apply_layout(state, assign_axis(state, dataset, "vertical", "Average Cost", ids))
    for r in ids:
        assert state.points[r].x == xs_before[r]


def test_local_axis_moves_only_targets(dataset, state):
    ids = sorted(state.visible_ids())
    targets = ids[:5]
    others = ids[5:]
    before = {r: (state.points[r].x, state.points[r].y) for r in others}
    res = assign_axis(state, dataset, "horizontal", "SAT Average", targets)
    apply_layout(state, res)
    assert res.new_local is not None
    for r in others:
        assert (state.points[r].x, state.points[r].y) == before[r]
    binding = state.locals[-1]
    assert binding.member_ids == set(targets)
    x0, y0, x1, y1 = binding.region
    for r in targets:
        assert x0 - 1e-6 <= state.points[r].x <= x1 + 1e-6
        assert y0 - 1e-6 <= state.points[r].y <= y1 + 1e-6


def test_local_members_ignore_global_axis_on_same_dimension(dataset, state):
    ids = sorted(state.visible_ids())
    targets = ids[:5]
    apply_layout(state, assign_axis(state, dataset, "horizontal", "SAT Average", targets))
    pos = {r: state.points[r].x for r in targets}
    apply_layout(state, assign_axis(state, dataset, "horizontal", "Average Cost", ids))
    for r in targets:
        assert state.points[r].x == pos[r]


def test_axis_errors(dataset, state):
    ids = sorted(state.visible_ids())
    with pytest.raises(KeyError):
        assign_axis(state, dataset, "horizontal", "No Such Attribute", ids)
    with pytest.raises(LayoutError):
        assign_axis(state, dataset, "diagonal", "SAT Average", ids)
    ds = load_csv("q,c\nNA,a\nNA,b\n")
    s2 = ViewState.initial(ds)
    apply_layout(s2, initial_cluster(s2))
    with pytest.raises(LayoutError, match="missing"):
        assign_axis(s2, ds, "horizontal", "q", [0, 1])


# ------------------------------------------------------------------ order_by


def test_order_by_sorts_ascending():
    ds = load_csv("v\n30\n10\n20\n")
    state = ViewState.initial(ds, canvas=(1000.0, 600.0))
    apply_layout(state, initial_cluster(state))
    res = order_by(state, ds, [0, 1, 2], "v")
    apply_layout(state, res)
    assert serpentine_order(res) == [1, 2, 0]


def test_order_monotone_in_serpentine_order(dataset, state):
    ids = sorted(state.visible_ids())[:40]
    res = order_by(state, dataset, ids, "Average Cost")
    apply_layout(state, res)
    reading = serpentine_order(res)
    values = [dataset.records[r]["Average Cost"] for r in reading]
    present = [v for v in values if v is not None]
    assert present == sorted(present)
    # missing values land at the end
    tail = values[len(present):]
    assert all(v is None for v in tail)


def test_order_by_is_a_fixed_point_after_one_pass(dataset, state):
    ids = sorted(state.visible_ids())[:24]
    apply_layout(state, order_by(state, dataset, ids, "SAT Average"))
    once = {r: (state.points[r].x, state.points[r].y) for r in ids}
    apply_layout(state, order_by(state, dataset, ids, "SAT Average"))
    twice = {r: (state.points[r].x, state.points[r].y) for r in ids}
    assert once == twice


def test_order_by_ties_break_by_row_id():
    ds = load_csv("v\n7\n7\n7\n")
    state = ViewState.initial(ds)
    apply_layout(state, initial_cluster(state))
    res = order_by(state, ds, [2, 0, 1], "v")
    assert serpentine_order(res) == [0, 1, 2]


def test_order_by_clears_pins(dataset, state):
    ids = sorted(state.visible_ids())[:6]
    apply_layout(state, move_points(state, ids, (300.0, 300.0)))
    assert all(state.points[r].pinned for r in ids)
    apply_layout(state, order_by(state, dataset, ids, "SAT Average"))
    assert not any(state.points[r].pinned for r in ids)
    check_invariants(state)


# ---------------------------------------------------------------------- move


def test_move_cluster_centroid_lands_on_destination(state):
    ids = sorted(state.visible_ids())[:10]
    w, h = state.canvas
    res = move_points(state, ids, "top left corner")
    apply_layout(state, res)
    cx = sum(state.points[r].x for r in ids) / len(ids)
    cy = sum(state.points[r].y for r in ids) / len(ids)
    assert math.dist((cx, cy), (0.125 * w, 0.125 * h)) <= 5.0
    assert all(state.points[r].pinned for r in ids)


def test_move_single_point_exact(state):
    rid = sorted(state.visible_ids())[0]
    apply_layout(state, move_points(state, [rid], (222.0, 333.0)))
    p = state.points[rid]
    assert (p.x, p.y) == (222.0, 333.0)
    assert p.pinned


def test_moved_points_ignore_subsequent_axis(dataset, state):
    ids = sorted(state.visible_ids())
    moved = ids[:7]
    apply_layout(state, move_points(state, moved, (150.0, 150.0)))
    before = {r: (state.points[r].x, state.points[r].y) for r in moved}
    apply_layout(state, assign_axis(state, dataset, "horizontal", "SAT Average", ids))
    for r in moved:
        assert (state.points[r].x, state.points[r].y) == before[r]
    # global bindings still update: axes stay drawn
    assert state.bindings.x_axis is not None


def test_region_keywords_and_corners_error(state):
    w, h = state.canvas
    assert region_anchor("center", state.canvas) == (w / 2, h / 2)
    assert region_anchor("top left corner", state.canvas) == (0.125 * w, 0.125 * h)
    assert region_anchor("right", state.canvas) == (0.875 * w, h / 2)
    with pytest.raises(LayoutError):
        region_anchor("corners", state.canvas)
    with pytest.raises(LayoutError):
        move_points(state, [0], "nowhere")


# ---------------------------------------------------------------- color/size


def test_color_by_categorical_palette(dataset, state):
    binding, assigned, legend = apply_color_by(state, dataset, "Control")
    cats = dataset.attribute("Control").categories
    assert len({binding.palette[c] for c in cats}) == len(cats)
    for rid, color in assigned.items():
        v = dataset.records[rid]["Control"]
        assert color == binding.color_for(v)
    assert [label for label, _ in legend] == cats


def test_explicit_overrides_survive_color_by(dataset, state):
    rid = sorted(state.points)[0]
    state.points[rid].color = "#123456"
    state.points[rid].color_explicit = True
    _, assigned, _ = apply_color_by(state, dataset, "Region")
    assert rid not in assigned


def test_size_by_boundaries_and_sqrt_interpolation(dataset, state):
    binding, sized = apply_size_by(state, dataset, "Average Cost")
    lo, hi = binding.domain
    rows = {dataset.records[r]["Average Cost"]: r for r in sized}
    assert sized[rows[lo]] == pytest.approx(3.0)
    assert sized[rows[hi]] == pytest.approx(12.0)
    # closed-form oracle evaluated independently per point
    for rid, r in sized.items():
        v = dataset.records[rid]["Average Cost"]
        if v is None:
            continue
        t = (v - lo) / (hi - lo)
        assert r == pytest.approx(3.0 + math.sqrt(t) * 9.0)


def test_size_by_categorical_is_an_error(dataset, state):
    with pytest.raises(LayoutError, match="quantitative"):
        apply_size_by(state, dataset, "Region")


# ----------------------------------------------------------------- summarize


def brute_force_bins(values, lo, hi, n=10):
    counts = [0] * n
    width = (hi - lo) / n
    for v in values:
        idx = min(n - 1, int((v - lo) / width))
        counts[idx] += 1
    return counts


def test_summarize_uniform_values_one_per_bin():
    ds = load_csv("v\n" + "\n".join(str(i) for i in range(10)) + "\n")
    state = ViewState.initial(ds)
    specs = summarize(ds, list(range(10)))
    assert [n for _, _, n in specs[0].bins] == [1] * 10


def test_summarize_single_point_single_bin(dataset):
    specs = summarize(dataset, [0])
    for spec in specs:
        if spec.bins:
            assert sum(n for _, _, n in spec.bins) == 1
        elif spec.categories:
            assert sum(spec.categories.values()) == 1


def test_summarize_counts_match_brute_force(dataset, state):
    ids = sorted(state.visible_ids())[:37]
    specs = {s.attribute: s for s in summarize(dataset, ids)}
    for attr in dataset.schema:
        values = [dataset.records[r][attr.name] for r in ids]
        values = [v for v in values if v is not None]
        spec = specs[attr.name]
        if attr.is_quantitative and values and min(values) != max(values):
            expected = brute_force_bins(values, min(values), max(values))
            assert [n for _, _, n in spec.bins] == expected
        elif not attr.is_quantitative:
            table = {}
            for v in values:
                table[v] = table.get(v, 0) + 1
            assert spec.categories == table


# ---------------------------------------------------------------- properties


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_local_operations_leave_non_targets_bit_identical(data):
    dataset = load_fixture()
    state = ViewState.initial(dataset)
    apply_layout(state, initial_cluster(state))
    ids = sorted(state.visible_ids())
    k = data.draw(st.integers(2, 30))
    targets = data.draw(st.sets(st.sampled_from(ids), min_size=k, max_size=k))
    op = data.draw(st.sampled_from(["move", "order", "local_axis"]))
    others = [r for r in ids if r not in targets]
    before = {r: state.points[r].to_dict() for r in others}
    if op == "move":
        apply_layout(state, move_points(state, sorted(targets), (400.0, 300.0)))
    elif op == "order":
        apply_layout(state, order_by(state, dataset, sorted(targets), "SAT Average"))
    else:
        apply_layout(
            state, assign_axis(state, dataset, "vertical", "Average Cost", sorted(targets))
        )
    after = {r: state.points[r].to_dict() for r in others}
    assert before == after


def test_layout_determinism(dataset):
    snaps = []
    for _ in range(2):
        state = ViewState.initial(dataset)
        apply_layout(state, initial_cluster(state))
        apply_layout(
            state, assign_axis(state, dataset, "horizontal", "Region", sorted(state.visible_ids()))
        )
        apply_layout(state, move_points(state, sorted(state.visible_ids())[:9], "top"))
        snaps.append(snapshot_json(state))
    assert snaps[0] == snaps[1]
