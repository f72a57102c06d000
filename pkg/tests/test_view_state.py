from __future__ import annotations

import json

import pytest
from hypothesis import given, settings, strategies as st
from shapely.geometry import Point, Polygon

from unitcanvas import colors as colorlib
from unitcanvas.commands import (
    AllVisible,
    AttributePredicate,
    ColorIs,
    Conjunction,
    Negation,
    PinnedIs,
    SelectionReference,
    TagReference,
)
from unitcanvas.layout import apply_color_by, apply_layout, initial_cluster, move_points
from unitcanvas.view_state import (
    SnapshotError,
    ViewState,
    apply_filter,
    check_invariants,
    point_in_polygon,
    resolve_tag,
    resolve_targets,
    restore,
    restore_from_bin,
    select_by_lasso,
    set_selection,
    snapshot,
    snapshot_json,
    tag_points,
)


def shapely_inside(state, polygon):
    """Independent point-in-polygon oracle."""
    poly = Polygon(polygon)
    return {
        rid
        for rid, p in state.points.items()
        if not p.filtered_out and poly.contains(Point(p.x, p.y))
    }


def test_lasso_square_matches_brute_force_oracle(state):
    pts = sorted(state.points)[:10]
    chosen = pts[:3]
    xs = [state.points[r].x for r in chosen]
    ys = [state.points[r].y for r in chosen]
    # a square that surrounds exactly the three chosen points
    grow = 1.0
    while True:
        poly = [
            (min(xs) - grow, min(ys) - grow),
            (max(xs) + grow, min(ys) - grow),
            (max(xs) + grow, max(ys) + grow),
            (min(xs) - grow, max(ys) + grow),
        ]
        if shapely_inside(state, poly) >= set(chosen):
            break
        grow += 1.0
    expected = shapely_inside(state, poly)
    got = select_by_lasso(state, poly)
    assert got == expected
    assert set(state.selection) == expected


def test_lasso_replaces_prior_selection(state):
    ids = sorted(state.points)
    set_selection(state, ids[:5])
    p = state.points[ids[10]]
    poly = [(p.x - 3, p.y - 3), (p.x + 3, p.y - 3), (p.x + 3, p.y + 3), (p.x - 3, p.y + 3)]
    got = select_by_lasso(state, poly)
    assert set(state.selection) == got


def test_lasso_degenerate_polygon_empty_no_error(state):
    assert select_by_lasso(state, [(10, 10), (10, 10), (10, 10)]) == set()
    assert select_by_lasso(state, [(10, 10)]) == set()


def test_lasso_excludes_filtered_points(state):
    rid = sorted(state.points)[0]
    p = state.points[rid]
    poly = [(p.x - 5, p.y - 5), (p.x + 5, p.y - 5), (p.x + 5, p.y + 5), (p.x - 5, p.y + 5)]
    assert rid in select_by_lasso(state, poly)
    apply_filter(state, {rid}, "remove")
    assert rid not in select_by_lasso(state, poly)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.tuples(st.floats(0, 1280, allow_nan=False), st.floats(0, 800, allow_nan=False)),
        min_size=3,
        max_size=9,
    )
)
def test_point_in_polygon_matches_shapely(vertices):
    poly = Polygon(vertices)
    if not poly.is_valid or poly.area == 0:
        return
    probes = [(x, y) for x in (100.0, 500.0, 900.0) for y in (100.0, 400.0, 700.0)]
    for x, y in probes:
        pt = Point(x, y)
        if poly.boundary.distance(pt) < 1e-6:
            continue  # boundary points are tie-breaker territory
        assert point_in_polygon(x, y, vertices) == poly.contains(pt)


def row_scan(dataset, predicate):
    """Hand-rolled oracle: scan rows with a plain Python predicate."""
    return {i for i, rec in enumerate(dataset.records) if predicate(rec)}


def test_resolve_predicate_conjunction_matches_row_scan(dataset, state):
    spec = Conjunction(
        (
            AttributePredicate("Control", "eq", "Private"),
            AttributePredicate("Average Cost", "gt", 30000),
        )
    )
    got = resolve_targets(spec, state, dataset).ids
    expected = row_scan(
        dataset,
        lambda r: r["Control"] == "Private"
        and r["Average Cost"] is not None
        and r["Average Cost"] > 30000,
    )
    assert got == expected
    assert expected  # fixture guarantees a nonempty answer


def test_resolve_membership_and_negation(dataset, state):
    spec = Negation(AttributePredicate("Locale", "in", ("Large City", "Large Suburb")))
    got = resolve_targets(spec, state, dataset).ids
    expected = row_scan(dataset, lambda r: r["Locale"] not in ("Large City", "Large Suburb"))
    assert got == expected


def test_blue_points_match_palette_assigned_colors(dataset, state):
    binding, assigned, _legend = apply_color_by(state, dataset, "Region")
    state.bindings.color_by = binding
    for rid, color in assigned.items():
        state.points[rid].color = color
    blue_categories = {
        cat
        for cat, hexcolor in binding.palette.items()
        if colorlib.nearest_named_color(hexcolor) == "blue"
    }
    assert blue_categories, "palette must map some category to a blue-reading color"
    got = resolve_targets(ColorIs(("blue",)), state, dataset).ids
    expected = row_scan(dataset, lambda r: r["Region"] in blue_categories)
    assert got == expected


def test_explicit_color_matches_named_query(dataset, state):
    ids = sorted(state.points)[:4]
    for rid in ids:
        state.points[rid].color = colorlib.named_color_hex("green")
        state.points[rid].color_explicit = True
    got = resolve_targets(ColorIs(("green",)), state, dataset).ids
    assert got == set(ids)


def test_all_visible_and_pinned_specs(dataset, state):
    assert resolve_targets(AllVisible(), state, dataset).ids == state.visible_ids()
    ids = sorted(state.points)[:6]
    apply_layout(state, move_points(state, ids, (100.0, 100.0)))
    assert resolve_targets(PinnedIs(True), state, dataset).ids == set(ids)


def test_unknown_tag_resolves_empty_with_warning(dataset, state):
    res = resolve_targets(TagReference("nope"), state, dataset)
    assert res.ids == set()
    assert any("nope" in w for w in res.warnings)


def test_filter_remove_and_keep_only(dataset, state):
    visible = state.visible_ids()
    targets = set(sorted(visible)[:47])
    binned = apply_filter(state, targets, "remove")
    assert binned == targets
    assert len(state.visible_ids()) == len(visible) - 47
    assert state.bin_ids == targets
    check_invariants(state)

    restore_from_bin(state)
    keep = set(sorted(state.visible_ids())[:10])
    binned = apply_filter(state, keep, "keep_only")
    assert state.visible_ids() == keep
    assert binned == visible - keep


def test_filter_identity_cases(dataset, state):
    before = snapshot_json(state)
    assert apply_filter(state, set(), "remove") == set()
    assert snapshot_json(state) == before
    assert apply_filter(state, state.visible_ids(), "keep_only") == set()
    assert snapshot_json(state) == before


def test_filter_prunes_selection_and_respects_visibility(dataset, state):
    ids = sorted(state.points)[:8]
    set_selection(state, ids)
    apply_filter(state, set(ids[:3]), "remove")
    assert set(state.selection) == set(ids[3:])
    check_invariants(state)


def test_tag_roundtrip_and_visibility(dataset, state):
    ids = set(sorted(state.points)[:5])
    tag_points(state, ids, "favorites")
    assert resolve_tag(state, "favorites").ids == ids
    apply_filter(state, set(sorted(ids)[:2]), "remove")
    assert resolve_tag(state, "favorites").ids == set(sorted(ids)[2:])
    res = resolve_tag(state, "unknown")
    assert res.ids == set() and res.warnings


def test_tag_persists_through_filter_and_restore(dataset, state):
    ids = set(sorted(state.points)[:5])
    tag_points(state, ids, "keepers")
    apply_filter(state, ids, "remove")
    restore_from_bin(state)
    assert resolve_tag(state, "keepers").ids == ids


def test_snapshot_roundtrip_initial(state):
    snap = snapshot(state)
    again = snapshot(restore(snap))
    assert snap == again


def test_snapshot_roundtrip_after_mutations(dataset, state):
    # ten mutations of different kinds, then a structural-diff oracle
    ids = sorted(state.points)
    apply_layout(state, move_points(state, ids[:5], (200.0, 160.0)))
    tag_points(state, set(ids[:5]), "a")
    set_selection(state, ids[5:9])
    apply_filter(state, set(ids[9:12]), "remove")
    binding, assigned, _ = apply_color_by(state, dataset, "Control")
    state.bindings.color_by = binding
    for rid, c in assigned.items():
        state.points[rid].color = c
    state.points[ids[20]].label_visible = True
    state.points[ids[21]].size = 9.5
    state.points[ids[21]].size_explicit = True
    restore_from_bin(state, {ids[9]})
    tag_points(state, {ids[30]}, "b")

    snap = snapshot(state)
    rebuilt = restore(json.dumps(snap))
    assert snapshot(rebuilt) == snap
    assert snapshot_json(rebuilt) == snapshot_json(state)


def test_restore_rejects_malformed_input():
    with pytest.raises(SnapshotError):
        restore(b'{"version": 1, "points": [')
    with pytest.raises(SnapshotError):
        restore('{"version": 99}')
    with pytest.raises(SnapshotError):
        restore('{"version": 1}')
    with pytest.raises(SnapshotError):
        restore("[1, 2, 3]")


def test_bin_equals_filtered_out_after_every_mutation(dataset, state):
    ids = sorted(state.points)
    steps = [
        lambda: apply_filter(state, set(ids[:10]), "remove"),
        lambda: restore_from_bin(state, {ids[0]}),
        lambda: apply_filter(state, {ids[20]}, "remove"),
        lambda: restore_from_bin(state),
    ]
    for step in steps:
        step()
        assert state.bin_ids == {r for r, p in state.points.items() if p.filtered_out}
        check_invariants(state)
