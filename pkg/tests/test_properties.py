import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shapeflow.geometry import (
    ConvexBody,
    MetricKind,
    RadialDomain,
    area,
    distance,
    minkowski_combine,
    polygon_to_support,
    radial_interpolate,
    rescale_to_area,
)

N = 64
coef = st.floats(-0.08, 0.08, allow_nan=False)


@st.composite
def radial(draw):
    c = [draw(st.floats(0.7, 1.4))] + [draw(coef) for _ in range(8)]
    return RadialDomain.from_fourier(c, N)


@st.composite
def convex(draw):
    # points on a perturbed circle around the origin; their hull contains it
    k = draw(st.integers(3, 9))
    th = np.sort(np.array(draw(st.lists(st.floats(0, 2 * np.pi, exclude_max=True), min_size=k, max_size=k, unique=True))))
    th = np.r_[th, th[0] + np.array([2, 4]) * np.pi / 3]  # guarantee a spread
    r = draw(st.floats(0.5, 1.5))
    return polygon_to_support(np.column_stack([r * np.cos(th), r * np.sin(th)]), N)


RADIAL_METRICS = [MetricKind.parse(m) for m in ("sobolev", "char", "hausdorff")]
CONVEX_METRICS = [MetricKind.parse(m) for m in ("l2", "linf", "lp3", "hausdorff")]
fast = settings(max_examples=40, deadline=None)


@fast
@given(radial(), radial(), radial())
def test_radial_metric_axioms(a, b, c):
    for m in RADIAL_METRICS:
        ab, ba = distance(a, b, m), distance(b, a, m)
        assert ab == pytest.approx(ba, rel=1e-12, abs=1e-14)
        assert distance(a, a, m) <= 1e-12
        assert ab <= distance(a, c, m) + distance(c, b, m) + 1e-10


@fast
@given(convex(), convex(), convex())
def test_convex_metric_axioms(a, b, c):
    for m in CONVEX_METRICS:
        ab = distance(a, b, m)
        assert ab == pytest.approx(distance(b, a, m), rel=1e-12, abs=1e-14)
        assert ab <= distance(a, c, m) + distance(c, b, m) + 1e-10


@fast
@given(convex(), convex(), st.floats(0, 1), st.floats(0, 1))
def test_minkowski_support_affine(a, b, s, t):
    ms, mt = minkowski_combine(a, b, s), minkowski_combine(a, b, t)
    assert np.allclose(ms.support, (1 - s) * a.support + s * b.support, atol=1e-13)
    # the L2 distance along the path is |s - t| times the end-to-end distance
    l2 = MetricKind.parse("l2")
    assert distance(ms, mt, l2) == pytest.approx(abs(s - t) * distance(a, b, l2), rel=1e-9, abs=1e-12)


@fast
@given(convex(), convex(), st.floats(0.05, 0.95))
def test_area_brunn_minkowski(a, b, t):
    mid = minkowski_combine(a, b, t)
    assert np.sqrt(area(mid)) >= (1 - t) * np.sqrt(area(a)) + t * np.sqrt(area(b)) - 1e-10


@fast
@given(radial(), st.floats(0.5, 5.0))
def test_rescale_hits_target_area(d, target):
    out = rescale_to_area(d, target)
    assert area(out) == pytest.approx(target, rel=1e-12)
    ratio = np.asarray(out.samples) / np.asarray(d.samples)
    assert np.ptp(ratio) < 1e-12


@fast
@given(convex())
def test_polygon_support_round_trip(k):
    again = polygon_to_support(k.vertices(), N)
    assert np.allclose(again.support, k.support, atol=1e-12)


@fast
@given(radial(), radial(), st.floats(0, 1))
def test_radial_path_is_linear_in_samples(a, b, t):
    mid = radial_interpolate(a, b, t)
    assert np.allclose(mid.samples, (1 - t) * np.asarray(a.samples) + t * np.asarray(b.samples), atol=1e-13)


@fast
@given(st.floats(0.3, 2.0), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_ball_support_and_area(r, x, y):
    b = ConvexBody.ball(r, (x, y), N)
    # support samples cut out the circumscribed N-gon, of area N r^2 tan(pi/N)
    assert area(b) == pytest.approx(N * r * r * np.tan(np.pi / N), rel=1e-10)
    assert np.allclose(b.centered().support, r, atol=1e-12)
