import numpy as np
import pytest

from shapeflow.catalog import make_shape
from shapeflow.errors import DegenerateTriangle, TargetTooCoarse
from shapeflow.geometry import ConvexBody, RadialDomain, area, polygon_to_support
from shapeflow.meshing import (
    mesh_quality,
    polygon_mesh,
    read_off,
    refine,
    triangulate,
    write_off,
)


def loop_is_closed(mesh):
    e = mesh.boundary_edges
    return np.array_equal(e[:, 1], np.roll(e[:, 0], -1)) and len(set(e[:, 0])) == len(e)


def test_unit_disk_mesh():
    m = triangulate(RadialDomain.disk(1.0), 0.1)
    r = np.hypot(*m.vertices.T)
    assert r.max() <= 1.0 + 1e-12
    assert np.allclose(r[m.boundary_vertices], 1.0, atol=1e-12)
    assert np.all(m.signed_areas() > 0)
    assert loop_is_closed(m)
    assert np.all(np.einsum("ij,ij->i", m.boundary_normals(), m.vertices[m.boundary_vertices]) > 0)


def test_mesh_area_converges_at_second_order():
    dom = RadialDomain.from_function(lambda t: 1.0 + 0.1 * np.cos(3 * t), 256)
    errs = []
    for h in (0.1, 0.05):
        m = triangulate(dom, h)
        errs.append(abs(m.area() - 1.005 * np.pi))
    # halving h should cut the error about fourfold
    assert errs[1] < errs[0] / 3.0


def test_boundary_on_curve_and_quality():
    dom = RadialDomain.from_function(lambda t: 1.0 + 0.15 * np.cos(2 * t) + 0.05 * np.sin(5 * t), 256)
    m = triangulate(dom, 0.05)
    th = m.boundary_theta
    pts = m.vertices[m.boundary_vertices]
    assert np.allclose(np.hypot(*pts.T), dom.evaluate(th), atol=1e-12)
    assert mesh_quality(m) >= 20.0


def test_too_coarse():
    with pytest.raises(TargetTooCoarse):
        triangulate(RadialDomain.disk(1.0), 0.6)


def test_refine_bookkeeping():
    dom = RadialDomain.from_function(lambda t: 1.0 + 0.1 * np.cos(3 * t), 256)
    m = triangulate(dom, 0.1)
    f = refine(m, dom)
    assert f.n_vertices == m.n_vertices + m.edges().shape[0]
    assert f.triangles.shape[0] == 4 * m.triangles.shape[0]
    pts = f.vertices[f.boundary_vertices]
    assert np.allclose(np.hypot(*pts.T), dom.evaluate(f.boundary_theta), atol=1e-12)
    assert f.h_max == pytest.approx(m.h_max / 2.0, rel=0.1)
    assert loop_is_closed(f)


def test_off_round_trip():
    m = triangulate(RadialDomain.disk(1.0), 0.2)
    text = write_off(m)
    back = read_off(text)
    assert np.array_equal(back.vertices, m.vertices)
    assert np.array_equal(back.triangles, m.triangles)
    assert np.array_equal(back.boundary_edges, m.boundary_edges)
    assert np.array_equal(back.boundary_theta, m.boundary_theta)
    assert write_off(back) == text


@pytest.mark.parametrize("spec", ["square", "rot-square", "ellipse(1.3,0.8)"])
def test_polygon_mesh_of_convex_bodies(spec):
    body = make_shape(spec, "convex")
    m = polygon_mesh(body, 0.05)
    assert np.all(m.signed_areas() > 0)
    assert loop_is_closed(m)
    assert m.area() == pytest.approx(area(body), rel=1e-10)
    assert m.h_max < 0.1


def test_polygon_mesh_with_collapsed_facets():
    # the hull of five points: most support samples share a vertex
    pts = np.array([[1.0, 0.1], [0.2, 1.1], [-1.0, 0.3], [-0.4, -0.9], [0.7, -0.8]])
    body = polygon_to_support(pts, 64)
    assert np.sum(body.facet_lengths() < 1e-9) > 10
    m = polygon_mesh(body, 0.08)
    assert m.area() == pytest.approx(area(body), rel=1e-10)


def test_polygon_mesh_rejects_flat_body():
    t = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    flat = ConvexBody(np.abs(np.cos(t)))  # a segment
    with pytest.raises(DegenerateTriangle):
        polygon_mesh(flat, 0.1)


def test_sharp_radius_does_not_fold_the_centre():
    from shapeflow.verify import alpha_pairs

    # a random pair whose radius more than doubles within one central sector
    for dom in alpha_pairs(10, seed=12)[9][:2]:
        for h in (0.08, 0.04):
            assert np.all(triangulate(dom, h).signed_areas() > 0)
