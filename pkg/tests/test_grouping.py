import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from advteacher.grouping import (GroupingKind, GroupingSpec, GroupingWarning, MAX_DISTANCE_PX,
                                 assign_group, build_min_distance_spec, build_pitch_spec, min_distances)


def edge_scan(spec, v):
    """Oracle: explicit edge list, linear scan, clamping at both ends."""
    edges = [spec.lower + k * (spec.upper - spec.lower) / spec.num_groups for k in range(spec.num_groups + 1)]
    g = 0
    for k in range(spec.num_groups):
        if v >= edges[k]:
            g = k
    return g


def all_pairs_min_distance(points):
    out = []
    for i, p in enumerate(points):
        best = math.inf
        for j, q in enumerate(points):
            if i != j:
                best = min(best, math.hypot(p[0] - q[0], p[1] - q[1]))
        out.append(MAX_DISTANCE_PX if best == math.inf else best)
    return out


@pytest.mark.parametrize("n, edges", [
    (10, [64.0 * k for k in range(11)]),
    (2, [0.0, 320.0, 640.0]),
    (5, [0.0, 128.0, 256.0, 384.0, 512.0, 640.0]),
])
def test_min_distance_edges(n, edges):
    spec = build_min_distance_spec(n)
    assert spec.kind is GroupingKind.MIN_DISTANCE
    assert (spec.lower, spec.upper) == (0.0, 640.0)
    np.testing.assert_allclose(spec.edges, edges)
    # brute-force enumeration of edges
    assert [0.0 + k * 640.0 / n for k in range(n + 1)] == pytest.approx(edges)


@pytest.mark.parametrize("n", [1, 0, -3])
def test_min_distance_spec_rejects_few_groups(n):
    with pytest.raises(ValueError):
        build_min_distance_spec(n)


def test_pitch_two_points_falls_back():
    # Var({0, 45}) = 506.25 swamps the range
    assert np.var([0.0, 45.0]) == 506.25
    with pytest.warns(GroupingWarning):
        spec = build_pitch_spec([0.0, 45.0], 10)
    assert (spec.lower, spec.upper) == (0.0, 45.0)


def test_pitch_uniform_samples_fall_back():
    x = np.random.default_rng(0).uniform(0, 45, 10**6)
    assert np.var(x) == pytest.approx(45**2 / 12, rel=0.01)
    with pytest.warns(GroupingWarning):
        spec = build_pitch_spec(x, 10)
    assert spec.lower == x.min() and spec.upper == x.max()


def test_pitch_narrow_spread_uses_variance_interval():
    x = [10.0] + [15.0] * 1000 + [20.0]
    var = float(np.var(x))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        spec = build_pitch_spec(x, 4)
    assert spec.lower == pytest.approx(10.0 + var)
    assert spec.upper == pytest.approx(20.0 - var)


@pytest.mark.parametrize("values", [[10.0, 10.0, 10.0], []])
def test_pitch_degenerate_inputs(values):
    with pytest.raises(ValueError), warnings.catch_warnings():
        warnings.simplefilter("ignore")
        build_pitch_spec(values, 10)


@pytest.mark.parametrize("v, g", [(130, 2), (0, 0), (900, 9), (-5, 0), (639.999, 9), (640, 9), (64, 1), (63.99, 0)])
def test_assign_group_examples(v, g):
    spec = build_min_distance_spec(10)
    assert assign_group(spec, v) == g == edge_scan(spec, v)


def test_assign_group_rejects_nan():
    with pytest.raises(ValueError):
        assign_group(build_min_distance_spec(10), float("nan"))


def test_spec_roundtrip():
    spec = GroupingSpec(GroupingKind.CAMERA_PITCH, 7, 3.5, 41.25)
    assert GroupingSpec.from_dict(spec.to_dict()) == spec


def test_brute_force_equivalence_1000_cases():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        n = int(rng.integers(2, 30))
        lo = float(rng.uniform(-100, 100))
        hi = lo + float(rng.uniform(1e-3, 500))
        spec = GroupingSpec(GroupingKind.MIN_DISTANCE, n, lo, hi)
        # include exact edges, which are where floor() can be off by one
        v = float(spec.edges[rng.integers(n + 1)]) if rng.random() < 0.3 else float(rng.uniform(lo - 50, hi + 50))
        assert assign_group(spec, v) == edge_scan(spec, v)


specs = st.builds(
    lambda n, lo, w: GroupingSpec(GroupingKind.CAMERA_PITCH, n, lo, lo + w),
    st.integers(2, 40), st.floats(-1e3, 1e3), st.floats(1e-2, 1e3),
)
finite = st.floats(-1e4, 1e4, allow_nan=False)


@given(specs)
def test_partition_on_midpoints(spec):
    e = spec.edges
    mids = (e[:-1] + e[1:]) / 2
    assert [assign_group(spec, m) for m in mids] == list(range(spec.num_groups))


@given(specs, finite, finite)
def test_monotone(spec, a, b):
    a, b = min(a, b), max(a, b)
    assert assign_group(spec, a) <= assign_group(spec, b)


@given(specs, finite)
def test_total_and_in_range(spec, v):
    assert 0 <= assign_group(spec, v) < spec.num_groups


def test_min_distances_match_all_pairs_oracle(rng):
    for n in (1, 2, 3, 7, 20):
        pts = rng.uniform(0, 640, (n, 2))
        np.testing.assert_allclose(min_distances(pts), all_pairs_min_distance(pts.tolist()), rtol=1e-12)


def test_single_person_is_maximally_isolated():
    assert min_distances([[100.0, 100.0]]).tolist() == [MAX_DISTANCE_PX]
    assert assign_group(build_min_distance_spec(10), MAX_DISTANCE_PX) == 9
