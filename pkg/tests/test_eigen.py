import mpmath
import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.special import i0, i1, j0, j1, jn_zeros

from shapeflow.catalog import make_shape
from shapeflow.eigen import (
    BoundaryCondition,
    assemble,
    disk_oracle,
    rayleigh,
    solve,
    trace_ratio,
)
from shapeflow.errors import InvalidInput, ZeroVector
from shapeflow.geometry import RadialDomain, support_to_radial
from shapeflow.meshing import TriMesh, polygon_mesh, refine, triangulate

D = BoundaryCondition.dirichlet()
J01 = float(mpmath.besseljzero(0, 1))
J11 = float(mpmath.besseljzero(1, 1))


def robin_disk(beta, radius=1.0):
    """Root of sqrt(l) J1(sqrt(l) R) = beta J0(sqrt(l) R) below the Dirichlet value."""
    f = lambda k: k * j1(k * radius) - beta * j0(k * radius)
    k = brentq(f, 1e-9, J01 / radius - 1e-12, xtol=1e-15)
    return k * k


@pytest.fixture(scope="module")
def disk_mesh():
    return triangulate(RadialDomain.disk(1.0), 0.04)


def test_mpmath_and_scipy_agree_on_bessel_zero():
    assert J01 == pytest.approx(jn_zeros(0, 1)[0], rel=1e-15)
    assert mpmath.mpf(J01) ** 2 == pytest.approx(5.78318596294679, rel=1e-13)


@pytest.mark.parametrize("beta", [0.5, 1.0, 10.0])
def test_disk_oracle_against_bessel(beta):
    assert disk_oracle(1.0, D) == pytest.approx(J01**2, rel=1e-10)
    assert disk_oracle(1.0, BoundaryCondition.robin(beta)) == pytest.approx(robin_disk(beta), rel=1e-9)
    assert disk_oracle(2.0, D) == pytest.approx(J01**2 / 4.0, rel=1e-10)
    assert robin_disk(1.0) == pytest.approx(1.5770, abs=1e-3)


def test_oracle_robin_limit():
    assert disk_oracle(1.0, BoundaryCondition.robin(1e4)) == pytest.approx(J01**2, rel=1e-3)


def one_triangle():
    return TriMesh(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]), np.array([[0, 1, 2]]),
                   np.array([[0, 1], [1, 2], [2, 0]]), np.zeros(3))


def test_reference_element_matrices():
    k, m, b = assemble(one_triangle())
    assert np.allclose(k.toarray(), 0.5 * np.array([[2, -1, -1], [-1, 1, 0], [-1, 0, 1]]))
    assert np.allclose(m.toarray(), (np.ones((3, 3)) + np.eye(3)) / 24.0)
    # boundary mass of a unit-length edge is [[2, 1], [1, 2]] / 6
    assert b.toarray()[0, 1] == pytest.approx(1.0 / 6.0)
    assert b.toarray().sum() == pytest.approx(2.0 + np.sqrt(2.0))


def test_assembled_matrices(disk_mesh):
    k, m, b = assemble(disk_mesh)
    assert np.allclose(np.asarray(k.sum(axis=1)).ravel(), 0.0, atol=1e-12)
    assert m.sum() == pytest.approx(disk_mesh.area(), rel=1e-12)
    assert b.sum() == pytest.approx(disk_mesh.boundary_lengths().sum(), rel=1e-12)
    for a in (k, m, b):
        assert abs(a - a.T).max() < 1e-14
    inner = np.setdiff1d(np.arange(disk_mesh.n_vertices), disk_mesh.boundary_vertices)
    assert b.tocsr()[inner].count_nonzero() == 0


def test_disk_dirichlet(disk_mesh):
    res = solve(disk_mesh, D, k=2)
    assert res.lambda1 == pytest.approx(J01**2, rel=1e-2)
    assert res.lambda2 == pytest.approx(J11**2, rel=2e-2)
    assert res.residual <= 1e-8
    assert res.u.min() >= -1e-8
    _, m, _ = assemble(disk_mesh)
    assert res.u @ (m @ res.u) == pytest.approx(1.0, rel=1e-10)
    assert rayleigh(disk_mesh, res.u, D) == pytest.approx(res.lambda1, rel=1e-8)


@pytest.mark.parametrize("beta", [0.5, 1.0, 10.0])
def test_disk_robin(disk_mesh, beta):
    res = solve(disk_mesh, BoundaryCondition.robin(beta))
    assert res.lambda1 == pytest.approx(robin_disk(beta), rel=1e-2)


def test_unit_square():
    sq = make_shape("square", "convex")
    lam = solve(polygon_mesh(sq, 0.04), D).lambda1
    assert lam == pytest.approx(2 * np.pi**2, rel=5e-3)
    # the same square as a radial domain about its centre
    dom = support_to_radial(sq, 512)
    lam_r = solve(triangulate(dom, 0.03), D).lambda1
    assert lam_r == pytest.approx(2 * np.pi**2, rel=2e-2)


def test_homogeneity_exact_on_scaled_mesh(disk_mesh):
    dom = RadialDomain.from_function(lambda t: 1.0 + 0.2 * np.cos(2 * t), 256)
    m = triangulate(dom, 0.05)
    l1 = solve(m, D).lambda1
    l2 = solve(m.scaled(2.0), D).lambda1
    assert 4.0 * l2 == pytest.approx(l1, rel=1e-9)


def test_robin_scaling_and_beta_monotonicity():
    dom = RadialDomain.from_function(lambda t: 1.0 + 0.15 * np.cos(3 * t), 256)
    m = triangulate(dom, 0.05)
    rob = BoundaryCondition.robin(1.0)
    base = solve(m, rob).lambda1
    for r in (1.5, 2.0):
        assert solve(m.scaled(r), rob).lambda1 <= base / r
    lams = [solve(m, BoundaryCondition.robin(b)).lambda1 for b in (0.1, 1.0, 10.0, 100.0)]
    assert np.all(np.diff(lams) > 0)
    assert lams[-1] <= solve(m, D).lambda1


def test_dirichlet_inclusion_monotonicity():
    dom = RadialDomain.from_function(lambda t: 1.0 + 0.2 * np.cos(2 * t), 256)
    lam = solve(triangulate(dom, 0.04), D).lambda1
    assert J01**2 / 1.2**2 <= lam <= J01**2 / 0.8**2


def test_second_order_convergence_on_disk():
    disk = RadialDomain.disk(1.0)
    m = triangulate(disk, 0.1)
    errs = []
    for _ in range(3):
        errs.append(abs(solve(m, D).lambda1 - J01**2))
        m = refine(m, disk)
    slopes = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(slopes - 2.0) <= 0.3), slopes


def test_rayleigh_bounds(disk_mesh):
    rob = BoundaryCondition.robin(2.0)
    res = solve(disk_mesh, rob)
    ones = np.ones(disk_mesh.n_vertices)
    expected = 2.0 * disk_mesh.boundary_lengths().sum() / disk_mesh.area()
    assert rayleigh(disk_mesh, ones, rob) == pytest.approx(expected, rel=1e-12)
    rng = np.random.default_rng(0)
    for _ in range(5):
        assert rayleigh(disk_mesh, rng.normal(size=disk_mesh.n_vertices), rob) >= res.lambda1 - 1e-9
    with pytest.raises(ZeroVector):
        rayleigh(disk_mesh, np.zeros(disk_mesh.n_vertices), rob)


def test_boundary_condition_validation():
    with pytest.raises(InvalidInput):
        BoundaryCondition("dirichlet", 1.0)
    with pytest.raises(InvalidInput):
        BoundaryCondition.robin(np.inf)
    with pytest.raises(InvalidInput):
        BoundaryCondition("neumann")


@pytest.mark.parametrize("beta", [-1.0, -5.0])
def test_negative_beta(beta):
    # lambda = -k^2 with k I1(k) = -beta I0(k)
    k = brentq(lambda k: k * i1(k) + beta * i0(k), 1e-6, 50.0, xtol=1e-15)
    bc = BoundaryCondition.robin(beta)
    assert disk_oracle(1.0, bc) == pytest.approx(-k * k, rel=1e-9)
    m = triangulate(RadialDomain.disk(1.0), 0.05)
    assert solve(m, bc).lambda1 == pytest.approx(-k * k, rel=1e-2)


def test_neumann_limit_of_oracle():
    assert disk_oracle(1.0, BoundaryCondition.robin(0.0)) == pytest.approx(0.0, abs=1e-9)


def test_trace_ratio(disk_mesh):
    ones = np.ones(disk_mesh.n_vertices)
    # K 1 = 0, so the ratio of a constant is perimeter / area of the mesh
    expected = disk_mesh.boundary_lengths().sum() / disk_mesh.area()
    assert trace_ratio(disk_mesh, ones) == pytest.approx(expected, rel=1e-12)
    assert trace_ratio(disk_mesh, solve(disk_mesh, D).u) == 0.0
    rob = solve(disk_mesh, BoundaryCondition.robin(1.0)).u
    assert 0.0 < trace_ratio(disk_mesh, rob) < expected
