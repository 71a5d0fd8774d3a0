import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.special import jn_zeros

from shapeflow.eigen import BoundaryCondition, disk_oracle
from shapeflow.errors import InvalidInput
from shapeflow.flow import (
    FlowConfig,
    apriori_check,
    contraction_check,
    euler_step,
    evi_residual,
    gmm_diagnostic,
    make_space,
    mesh_slack,
    phi,
    run_flow,
)
from shapeflow.geometry import (
    AdmissibilityConfig,
    ConvexBody,
    MetricKind,
    RadialDomain,
    is_admissible,
    rescale_to_area,
)

D = BoundaryCondition.dirichlet()
J2 = jn_zeros(0, 1)[0] ** 2
L2 = MetricKind.parse("l2")
SOB = MetricKind.parse("sobolev")


def ball_recursion(r0, h, n):
    """Radii of the exact implicit Euler scheme for Dirichlet balls in the L2 support metric.

    phi(B_s) = J2 / s^2 and d(B_r, B_s)^2 = 2 pi (s - r)^2, so each step solves
    s - r = h J2 / (pi s^3).
    """
    out = [r0]
    for _ in range(n):
        r = out[-1]
        out.append(brentq(lambda s: s - r - h * J2 / (np.pi * s**3), r, r + 10.0, xtol=1e-15))
    return np.array(out)


@pytest.fixture(scope="module")
def ball_flow():
    cfg = FlowConfig(h=0.1, T=0.5, metric=L2, bc=D)
    u0 = ConvexBody.ball(1.0, n_samples=64)
    space = make_space(u0, cfg)
    return cfg, space, run_flow(u0, cfg, space=space, refine_final=False)


@pytest.fixture(scope="module")
def still_disk():
    cfg = FlowConfig(h=0.1, T=0.3, metric=SOB, bc=D, volume=np.pi)
    return cfg, run_flow(RadialDomain.disk(1.0, 256), cfg, refine_final=False)


def test_phi_ball_example():
    cfg = FlowConfig(h=1.0, T=1.0, metric=L2, bc=D)
    b1, b2 = ConvexBody.ball(1.0, n_samples=64), ConvexBody.ball(2.0, n_samples=64)
    val = phi(1.0, b1, b2, cfg)
    exact = J2 / 4.0 + np.pi
    # the 64-gon sits inside the ball, so its eigenvalue is a little higher
    assert val == pytest.approx(exact, rel=5e-3)
    assert val > exact
    assert phi(np.inf, b1, b2, cfg) == pytest.approx(J2 / 4.0, rel=1e-2)


def test_phi_rejects_mixed_kinds():
    cfg = FlowConfig(h=1.0, T=1.0, metric=L2, bc=D)
    with pytest.raises(InvalidInput):
        phi(1.0, ConvexBody.ball(), RadialDomain.disk(), cfg)


def test_ball_flow_matches_recursion(ball_flow):
    cfg, space, tr = ball_flow
    radii = np.array([np.mean(s.support) for s in tr.shapes])
    ref = ball_recursion(1.0, cfg.h, cfg.n_steps)
    assert np.allclose(radii, ref, rtol=1e-3)
    # and stays round
    assert max(np.std(s.support) for s in tr.shapes) < 1e-3
    assert not any(tr.stagnated)


def test_small_ball_grows(ball_flow):
    _, _, tr = ball_flow
    radii = np.array([np.mean(s.support) for s in tr.shapes])
    assert np.all(np.diff(radii) > 0)
    assert np.all(np.diff(tr.phi_values) < 0)


def test_step_inequality_and_telescoping(ball_flow):
    _, _, tr = ball_flow
    assert np.all(tr.step_margins() >= -1e-10)
    f = np.asarray(tr.phi_values)
    d = np.asarray(tr.step_distances)
    assert np.sum(d**2) / (2 * tr.h) <= f[0] - f[-1] + 1e-10 * tr.n_steps
    assert np.allclose(tr.big_phi_values, f[1:] + d**2 / (2 * tr.h), rtol=1e-12)


def test_stationary_ball_under_volume_constraint(still_disk):
    cfg, tr = still_disk
    assert np.max(np.abs(tr.areas() - np.pi)) <= 1e-8
    assert max(tr.step_distances) < 1e-4
    assert tr.phi_values[-1] == pytest.approx(J2, rel=mesh_slack(tr.mesh_h))
    assert all(is_admissible(s, cfg.admissibility) for s in tr.shapes)


def test_volume_and_admissibility_along_flow():
    u0 = RadialDomain.from_function(lambda t: 1.0 + 0.2 * np.cos(2 * t), 256)
    cfg = FlowConfig(h=0.05, T=0.2, metric=SOB, bc=BoundaryCondition.robin(1.0), volume=np.pi)
    tr = run_flow(u0, cfg)
    assert np.max(np.abs(tr.areas() - np.pi)) <= 1e-8
    assert all(is_admissible(s, cfg.admissibility) for s in tr.shapes)
    assert np.all(np.diff(tr.phi_values) <= 0)
    assert np.all(tr.step_margins() >= -1e-10)
    assert tr.refined_lambda == pytest.approx(tr.phi_values[-1], rel=2e-3)
    assert tr.refined_lambda >= disk_oracle(1.0, cfg.bc) * (1 - 5 * mesh_slack(tr.mesh_h))


def test_determinism():
    u0 = RadialDomain.from_function(lambda t: 1.0 + 0.1 * np.cos(3 * t), 128)
    cfg = FlowConfig(h=0.1, T=0.2, metric=SOB, bc=D, volume=np.pi)
    a = run_flow(u0, cfg, refine_final=False)
    b = run_flow(u0, cfg, refine_final=False)
    for p, q in zip(a.params, b.params):
        assert np.array_equal(p, q)
    assert a.phi_values == b.phi_values


def test_euler_step_never_increases_phi():
    u0 = rescale_to_area(RadialDomain.from_function(lambda t: 1.0 + 0.1 * np.cos(3 * t), 128), np.pi)
    for solver in ("nelder_mead", "gradient_assisted"):
        cfg = FlowConfig(h=0.05, T=0.05, metric=SOB, bc=D, volume=np.pi, inner_solver=solver, max_inner_evals=60)
        space = make_space(u0, cfg)
        out = euler_step(u0, cfg, space=space, return_info=True)
        lam0 = phi(np.inf, u0, u0, cfg, space)
        assert out.big_phi <= lam0
        assert out.n_evals <= 60 + 5


def test_flow_config_validation():
    with pytest.raises(InvalidInput, match="beta > 0"):
        FlowConfig(h=0.1, T=1.0, metric=SOB, bc=BoundaryCondition.robin(-1.0))
    with pytest.raises(InvalidInput):
        FlowConfig(h=0.1, T=1.0, metric=SOB, bc=BoundaryCondition.robin(0.0))
    with pytest.raises(InvalidInput):
        FlowConfig(h=0.0, T=1.0, metric=SOB, bc=D)
    with pytest.raises(InvalidInput):
        FlowConfig(h=0.5, T=0.1, metric=SOB, bc=D)
    with pytest.raises(InvalidInput):
        FlowConfig(h=0.1, T=1.0, metric=SOB, bc=D, inner_solver="bfgs")
    assert FlowConfig(h=0.3, T=1.0, metric=SOB, bc=D).n_steps == 4


def test_inadmissible_start_rejected():
    cfg = FlowConfig(h=0.1, T=0.1, metric=SOB, bc=D, admissibility=AdmissibilityConfig(r_min=0.5))
    with pytest.raises(InvalidInput):
        run_flow(RadialDomain.disk(0.3, 64), cfg)


def test_gmm_on_stationary_flow():
    cfg = FlowConfig(h=0.1, T=0.2, metric=SOB, bc=D, volume=np.pi)
    rep = gmm_diagnostic(RadialDomain.disk(1.0, 128), cfg, [0.1, 0.05], times=[0.1, 0.2])
    assert len(rep.rows) == 2
    assert max(r["distance"] for r in rep.rows) < 1e-4
    with pytest.raises(ValueError):
        gmm_diagnostic(RadialDomain.disk(1.0, 128), cfg, [0.05, 0.1])


def test_gmm_cauchy_on_ball_flow():
    cfg = FlowConfig(h=0.2, T=0.4, metric=L2, bc=D)
    rep = gmm_diagnostic(ConvexBody.ball(1.0, n_samples=64), cfg, [0.2, 0.1], times=[0.4])
    # the exact schemes differ by the same amount
    exact = np.sqrt(2 * np.pi) * abs(ball_recursion(1.0, 0.2, 2)[-1] - ball_recursion(1.0, 0.1, 4)[-1])
    assert rep.cross(0.4, 0.2, 0.1) == pytest.approx(exact, rel=0.05)


def test_contraction_identical_starts(ball_flow):
    cfg, space, tr = ball_flow
    rep = contraction_check(None, None, cfg, space=space, trajectories=(tr, tr))
    assert rep.d0 == 0.0 and np.all(rep.distances == 0.0)
    assert rep.passed


def test_contraction_two_balls_and_overclaimed_rate(ball_flow):
    cfg, space, tr = ball_flow
    v0 = ConvexBody.ball(1.1, n_samples=64)
    tv = run_flow(v0, cfg, space=space, refine_final=False)
    rep = contraction_check(None, None, cfg, alpha=0.0, space=space, trajectories=(tr, tv))
    # exact scheme: the larger ball grows more slowly, so the gap closes
    gap = np.sqrt(2 * np.pi) * np.abs(ball_recursion(1.1, 0.1, 5) - ball_recursion(1.0, 0.1, 5))
    assert np.allclose(rep.distances, gap, rtol=2e-2)
    assert rep.passed
    rate = -np.log(rep.distances[-1] / rep.d0) / 0.5
    bad = contraction_check(None, None, cfg, alpha=2.0 * rate, space=space, trajectories=(tr, tv))
    assert not bad.passed


def test_evi_at_the_stationary_point(still_disk):
    cfg, tr = still_disk
    rep = evi_residual(tr, RadialDomain.disk(1.0, 256), 0.0, cfg)
    assert rep.max_positive <= cfg.slack(cfg.h, tr.mesh_h) * tr.phi_values[0]
    assert np.allclose(rep.residuals, 0.0, atol=1e-6)


def test_evi_against_far_point(ball_flow):
    cfg, space, tr = ball_flow
    # phi(z) is large for a small ball, so the residual is strongly negative
    rep = evi_residual(tr, ConvexBody.ball(0.6, n_samples=64), 0.0, cfg)
    assert rep.phi_z == pytest.approx(J2 / 0.36, rel=1e-2)
    assert np.all(rep.residuals < 0)


def test_apriori_rows():
    cfg = FlowConfig(h=0.1, T=0.4, metric=L2, bc=D)
    rep = apriori_check(ConvexBody.ball(1.0, n_samples=64), 0.4, [2, 4, 8], cfg)
    assert rep.n_ref == 8 and [r["n"] for r in rep.rows] == [2, 4]
    for r in rep.rows:
        assert r["rhs"] >= 0.0 and r["lhs"] >= 0.0
    assert rep.passed
    # coarser steps sit further from the reference
    assert rep.rows[0]["lhs"] > rep.rows[1]["lhs"]


@pytest.mark.parametrize("kind", ["radial", "convex"])
def test_parameter_gradient_matches_differences(kind):
    from shapeflow.flow.space import ConvexSpace, RadialSpace

    kw = dict(bc=BoundaryCondition.robin(1.0), metric=SOB, admissibility=AdmissibilityConfig(), mesh_rel_h=0.05)
    if kind == "radial":
        # sharp enough that the core blend of the mesh map is exercised
        shape = RadialDomain.from_fourier([1.0, 0.0, 0.25, 0.0, 0.0, 0.1, 0.0], 128)
        space = RadialSpace(shape, 3, **kw)
    else:
        kw["metric"] = MetricKind.parse("l2")
        shape = ConvexBody.ellipse(1.2, 0.8, 64)
        space = ConvexSpace(shape, **kw)
    p = space.params(shape)
    g = space.evaluate(p, need_grad=True).grad
    d = np.random.default_rng(3).standard_normal(p.size)
    e = 1e-5
    fd = (space.evaluate(p + e * d).lam - space.evaluate(p - e * d).lam) / (2 * e)
    assert float(g @ d) == pytest.approx(fd, rel=1e-5)
