import numpy as np
import pytest
from scipy.special import jn_zeros

import shapeflow.variation.first as first_mod
from shapeflow import verify
from shapeflow.eigen import BoundaryCondition, disk_oracle
from shapeflow.errors import InvalidInput, InvalidSigma
from shapeflow.geometry import ConvexBody, RadialDomain, polygon_to_support
from shapeflow.meshing import template_for
from shapeflow.variation import (
    PerturbationField,
    alpha_convexity_check,
    brunn_minkowski_check,
    chord_margins,
    finite_diff_variation,
    first_variation,
    general_sigma_check,
    negbeta_demo,
    random_normal_field,
    random_radial_domain,
    sawtooth_domain,
    second_variation_bound,
    sigma_margins,
)

D = BoundaryCondition.dirichlet()
R1 = BoundaryCondition.robin(1.0)
J2 = jn_zeros(0, 1)[0] ** 2
DISK = RadialDomain.disk(1.0, 256)


def robin_radius_derivative(beta, e=1e-4):
    bc = BoundaryCondition.robin(beta)
    return (disk_oracle(1.0 + e, bc) - disk_oracle(1.0 - e, bc)) / (2 * e)


@pytest.fixture(scope="module")
def pair():
    rng = np.random.default_rng(42)
    dom = random_radial_domain(rng, n_modes=8, amplitude=0.04)
    return dom, random_normal_field(rng, dom)


def test_dilation_of_dirichlet_disk():
    dil = PerturbationField.dilation(DISK)
    # lambda(r B) = J2 / r^2, so the derivative at r = 1 is -2 J2
    assert first_variation(DISK, D, dil) == pytest.approx(-2 * J2, rel=1e-4)
    assert finite_diff_variation(DISK, D, dil) == pytest.approx(-2 * J2, rel=1e-4)


def test_second_variation_of_dilation():
    dil = PerturbationField.dilation(DISK)
    # lambda((1 + t) B) = J2 (1 + t)^-2 has second derivative 6 J2 at 0
    assert finite_diff_variation(DISK, D, dil, order=2, levels=1) == pytest.approx(6 * J2, rel=1e-3)


def test_dilation_of_robin_disk():
    dil = PerturbationField.dilation(DISK)
    ref = robin_radius_derivative(1.0)
    assert first_variation(DISK, R1, dil) == pytest.approx(ref, rel=1e-3)
    # Robin is not homogeneous, so this is not -2 lambda
    assert abs(ref + 2 * disk_oracle(1.0, R1)) > 0.1


def test_translation_is_zero():
    tr = PerturbationField.translation(DISK, (1.0, 0.3))
    for bc in (D, R1):
        lam = disk_oracle(1.0, bc)
        assert abs(first_variation(DISK, bc, tr)) < 1e-6 * lam
        # interior template nodes do not move rigidly, which costs O(mesh_h^2)
        assert abs(finite_diff_variation(DISK, bc, tr, levels=1)) < 2e-5 * lam


@pytest.mark.parametrize("bc", [R1, D], ids=["robin", "dirichlet"])
def test_boundary_integral_matches_finite_differences(pair, bc):
    dom, fld = pair
    bw = first_variation(dom, bc, fld)
    fd = finite_diff_variation(dom, bc, fld)
    assert bw == pytest.approx(fd, rel=1e-3)


def test_linearity_at_fixed_mesh(pair):
    dom, fld = pair
    mesh = template_for(dom, 0.05).map(dom)
    other = PerturbationField.dilation(dom)
    a = first_variation(dom, R1, fld, mesh=mesh)
    b = first_variation(dom, R1, other, mesh=mesh)
    both = PerturbationField(fld.normal + 2.0 * other.normal)
    assert first_variation(dom, R1, both, mesh=mesh) == pytest.approx(a + 2.0 * b, rel=1e-8)
    assert first_variation(dom, R1, fld.scaled(-3.0), mesh=mesh) == pytest.approx(-3.0 * a, rel=1e-12)


def test_second_order_field_adds_first_variation(pair):
    dom, fld = pair
    w = np.cos(2 * dom.angles)
    tmpl = template_for(dom, 0.05)
    with_w = finite_diff_variation(dom, R1, fld.with_w(w), order=2, template=tmpl)
    without = finite_diff_variation(dom, R1, fld, order=2, template=tmpl)
    dw = finite_diff_variation(dom, R1, PerturbationField(w), template=tmpl)
    assert with_w - without == pytest.approx(dw, rel=1e-3, abs=1e-3 * abs(without))


def test_second_variation_ratio_invariant_under_doubling(pair):
    dom, fld = pair
    rep = second_variation_bound([(dom, fld)], R1)
    rep2 = second_variation_bound([(dom, fld.scaled(2.0))], R1)
    assert rep.finite and rep.max_ratio > 0
    assert rep2.norms[0] == pytest.approx(4.0 * rep.norms[0], rel=1e-12)
    assert rep2.ratios[0] == pytest.approx(rep.ratios[0], rel=1e-6)


def test_field_norm_of_constant_on_unit_circle():
    # g = 1 on the unit circle: integral of 1 over arclength
    assert PerturbationField(np.ones(256)).norm_sq(DISK) == pytest.approx(2 * np.pi, rel=1e-12)
    g = np.cos(3 * DISK.angles)
    assert PerturbationField(g).norm_sq(DISK) == pytest.approx(np.pi * (1 + 9), rel=1e-12)


def test_field_sample_mismatch():
    with pytest.raises(InvalidInput):
        first_variation(DISK, D, PerturbationField(np.ones(128)))


# -- convexity along paths -------------------------------------------------------
def test_alpha_check_with_equal_endpoints():
    eta = RadialDomain.from_function(lambda t: 1.0 + 0.1 * np.cos(3 * t), 256)
    rep = alpha_convexity_check(eta, eta, R1, t_points=5, verify_points=0)
    assert rep.d2 == 0.0 and rep.alpha_estimate == 0.0
    assert np.ptp(rep.values) < 1e-12 * rep.values[0]
    assert rep.verdict == "PASS"


def test_alpha_check_on_concentric_disks():
    a, b = RadialDomain.disk(1.0, 256), RadialDomain.disk(1.5, 256)
    rep = alpha_convexity_check(a, b, D, t_points=5, verify_points=9)
    t = rep.t_grid
    exact = J2 / (1 + 0.5 * t) ** 2
    assert np.allclose(rep.values, exact, rtol=5e-3)
    assert rep.d2 == pytest.approx(2 * np.pi * 0.25, rel=1e-12)
    # the second differences are close to 6 J2 * 0.25 / (1 + 0.5 t)^4
    sd_exact = 1.5 * J2 / (1 + 0.5 * t[1:-1]) ** 4
    assert np.allclose(rep.second_differences, sd_exact, rtol=3e-2)
    assert rep.alpha_estimate > 0
    assert rep.verdict == "PASS"


def test_chord_margins():
    t = np.linspace(0, 1, 5)
    assert np.allclose(chord_margins(t, 2 + 3 * t, 0.0, 1.0), 0.0)
    # h = t^2 has h'' = 2, so alpha = 2 / d2 makes every margin vanish
    assert np.allclose(chord_margins(t, t**2, 2.0 / 0.5, 0.5), 0.0, atol=1e-15)


def test_brunn_minkowski_equal_bodies():
    k = ConvexBody.ellipse(1.2, 0.8, 256)
    rep = brunn_minkowski_check(k, k, t_points=5)
    assert np.max(np.abs(rep.strong_margins)) < 1e-10
    assert rep.verdict == "PASS"


def test_brunn_minkowski_balls_and_joint_scaling():
    rep = brunn_minkowski_check(ConvexBody.ball(1.0, n_samples=256), ConvexBody.ball(1.5, (0.2, 0.0), 256), t_points=5)
    assert np.max(np.abs(rep.strong_margins)) <= rep.strong_slack
    assert np.all(rep.weak_margins >= -rep.weak_slack)
    sq = polygon_to_support([(-1, -1), (1, -1), (1, 1), (-1, 1)], 256)
    rot = polygon_to_support([(1.4, 0), (0, 1.4), (-1.4, 0), (0, -1.4)], 256)
    one = brunn_minkowski_check(sq, rot, t_points=5, target_h=0.05)
    two = brunn_minkowski_check(sq.scaled(2.0), rot.scaled(2.0), t_points=5, target_h=0.1)
    assert one.verdict == two.verdict == "PASS"
    # the margins of lambda^(-1/2) scale linearly with the bodies
    assert np.allclose(two.strong_margins, 2.0 * one.strong_margins, atol=2 * one.strong_slack)


def test_brunn_minkowski_robin_only_reports():
    k = ConvexBody.ball(1.0, n_samples=128)
    rep = brunn_minkowski_check(k, ConvexBody.ellipse(1.2, 0.9, 128), t_points=3, bc=R1, target_h=0.08)
    assert rep.verdict == "REPORT"


def test_general_sigma():
    t = np.linspace(0, 1, 11)
    const = np.full(11, 3.0)
    for s in (-2.0, 0.5, 1.0, 2.0):
        assert general_sigma_check(const, s, t)
    # F^(-1/2) linear: the power form is an equality for sigma = -2
    f = 1.0 / (1.0 + 0.5 * t) ** 2
    power, lin = sigma_margins(f, -2.0, t)
    assert np.allclose(power, 0.0, atol=1e-15)
    assert np.all(lin >= 0)
    assert general_sigma_check(f, -2.0, t)
    bump = 1.0 + t * (1 - t)
    assert not general_sigma_check(bump, -2.0, t)
    assert sigma_margins(bump, 3.0, t)[1] is None
    with pytest.raises(InvalidSigma):
        general_sigma_check(const, 0.0, t)


# -- negative beta ---------------------------------------------------------------
def test_sawtooth_family():
    a, b = sawtooth_domain(8), sawtooth_domain(32)
    assert np.max(a.samples) == pytest.approx(np.max(b.samples), rel=1e-3)
    assert np.min(a.samples) == pytest.approx(np.min(b.samples), rel=1e-3)


def test_negbeta_demo_decreases():
    rep = negbeta_demo(levels=(8, 16, 32, 64))
    assert rep.strictly_decreasing
    assert np.all(np.diff(rep.perimeters) > 0)
    assert np.all(np.asarray(rep.lambdas) < 0)
    assert np.ptp(rep.hausdorff) < 1e-2


# -- a sign error in the boundary integral is caught ------------------------------
def test_flipped_hadamard_sign_fails_the_check(monkeypatch):
    orig = first_mod._first_variation_on
    monkeypatch.setattr(first_mod, "_first_variation_on", lambda *a, **k: -orig(*a, **k))
    res = verify.run_criterion(5, "quick")
    assert not res.passed
    assert min(r["rel"] for r in res.data["rows"]) > 1.0
