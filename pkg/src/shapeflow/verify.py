"""The acceptance suite as callable checks, shared by the CLI and the tests.

Each check returns a :class:`Criterion` with the raw numbers it judged, so a
caller can re-derive the verdict against its own oracles.  ``level="full"``
uses the sample sizes of the acceptance list; ``"quick"`` shrinks samples and
horizons to stay within a few minutes.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .catalog import ellipse_radial, perturbed_ball
from .eigen.oracle import disk_oracle
from .eigen.solver import BoundaryCondition, solve
from .errors import InvalidInput
from .flow.checks import apriori_check, contraction_check, evi_residual
from .flow.config import FlowConfig, mesh_slack
from .flow.engine import run_flow
from .flow.space import make_space
from .geometry.admissibility import AdmissibilityConfig, is_admissible
from .geometry.metrics import MetricKind, distance
from .geometry.shapes import ConvexBody, RadialDomain, rescale_to_area
from .meshing import refine, triangulate
from .variation.convexity import (
    alpha_convexity_check,
    brunn_minkowski_check,
    chord_margins,
)
from .variation.fields import PerturbationField
from .variation.first import (
    finite_diff_variation,
    first_variation,
    second_variation_bound,
)
from .variation.negbeta import negbeta_demo
from .variation.samples import (
    random_convex_body,
    random_normal_field,
    random_radial_domain,
)

__all__ = ["CRITERIA", "LEVELS", "Criterion", "SuiteCache", "run_criterion", "run_suite", "suite_summary"]

logger = logging.getLogger(__name__)

LEVELS = ("quick", "full")

# per-level sample sizes; "full" is the acceptance list verbatim
_SIZES = {
    "quick": dict(fk=10, fv=3, bmi=3, alpha=4, second=8, apriori=(4, 8, 16, 32), flow_T=2.0),
    "full": dict(fk=50, fv=20, bmi=10, alpha=10, second=30, apriori=(4, 8, 16, 64), flow_T=2.0),
}

DIRICHLET = BoundaryCondition.dirichlet()
ROBIN1 = BoundaryCondition.robin(1.0)


@dataclass
class Criterion:
    number: int
    title: str
    passed: bool
    summary: str
    data: dict = field(default_factory=dict)
    seconds: float = 0.0
    # set when the failure is understood and analysed rather than a defect
    known_failure: str = ""

    @property
    def verdict(self):
        return "PASS" if self.passed else "FAIL"

    def line(self):
        return f"[{self.verdict}] criterion {self.number:2d} {self.title}: {self.summary}"


def _rel(a, b):
    return abs(a - b) / abs(b)


class SuiteCache:
    """Flows shared between criteria within one suite run."""

    def __init__(self, level):
        self.level = level
        self.store = {}

    def get(self, key, make):
        if key not in self.store:
            self.store[key] = make()
        return self.store[key]


# -- 1 ---------------------------------------------------------------------
def c01_eigensolver(level, cache):
    disk = RadialDomain.disk(1.0)
    rows, ok, worst_t = [], True, 0.0
    for bc in (DIRICHLET, BoundaryCondition.robin(0.5), ROBIN1, BoundaryCondition.robin(10.0)):
        ref = disk_oracle(1.0, bc)
        t0 = time.perf_counter()
        mesh = triangulate(disk, 0.04)
        lam = solve(mesh, bc).lambda1
        worst_t = max(worst_t, time.perf_counter() - t0)
        fine = refine(mesh, disk)
        t0 = time.perf_counter()
        lam_f = solve(fine, bc).lambda1
        worst_t = max(worst_t, time.perf_counter() - t0)
        e0, e1 = _rel(lam, ref), _rel(lam_f, ref)
        ok &= e0 <= 0.01 and e1 <= 0.0025
        rows.append(dict(bc=bc.label, oracle=ref, lam=lam, lam_refined=lam_f, err=e0, err_refined=e1))
    ok &= worst_t < 2.0
    worst = max(r["err"] for r in rows)
    worst_f = max(r["err_refined"] for r in rows)
    return Criterion(
        1, "eigensolver accuracy", ok,
        f"max rel err {worst:.2e} (<= 1e-2), refined {worst_f:.2e} (<= 2.5e-3), slowest solve {worst_t:.2f}s",
        dict(rows=rows, slowest_solve=worst_t),
    )


# -- 2 ---------------------------------------------------------------------
def c02_homogeneity(level, cache):
    shapes = {
        "disk": RadialDomain.disk(1.0),
        "ellipse(1.3,0.8)": ellipse_radial(1.3, 0.8),
        "perturbed-ball(3,0.1)": perturbed_ball(3, 0.1),
    }
    rows, ok = [], True
    for name, dom in shapes.items():
        m1 = triangulate(dom, 0.04)
        m2 = triangulate(dom.scaled(2.0), 0.04)
        l1 = solve(m1, DIRICHLET).lambda1
        l2 = solve(m2, DIRICHLET).lambda1
        dev = abs(4.0 * l2 - l1) / l1
        tol = 2.0 * mesh_slack(max(m1.h_max, m2.h_max / 2.0))
        good = dev <= tol
        lr1 = solve(m1, ROBIN1).lambda1
        for r in (1.5, 2.0):
            mr = triangulate(dom.scaled(r), 0.04)
            lr = solve(mr, ROBIN1).lambda1
            rtol = mesh_slack(max(m1.h_max, mr.h_max))
            rows.append(dict(shape=name, kind="robin", r=r, lam=lr, bound=lr1 / r * (1 + rtol)))
            good &= lr <= lr1 / r * (1.0 + rtol)
        rows.append(dict(shape=name, kind="dirichlet", deviation=dev, tol=tol))
        ok &= good
    worst = max(r["deviation"] / r["tol"] for r in rows if r["kind"] == "dirichlet")
    return Criterion(2, "homogeneity and Robin scaling", ok, f"worst Dirichlet deviation / tolerance {worst:.3f}", dict(rows=rows))


# -- 3 ---------------------------------------------------------------------
def c03_faber_krahn(level, cache):
    n = _SIZES[level]["fk"]
    rng = np.random.default_rng(3)
    adm = AdmissibilityConfig()
    rows, ok = [], True
    for bc in (DIRICHLET, ROBIN1):
        ball = disk_oracle(1.0, bc)
        for i in range(n):
            dom = rescale_to_area(random_radial_domain(rng, amplitude=0.08, admissibility=adm), np.pi)
            mesh = triangulate(dom, 0.04)
            lam = solve(mesh, bc).lambda1
            bound = ball * (1.0 - 5.0 * mesh_slack(mesh.h_max))
            ok &= lam >= bound
            rows.append(dict(bc=bc.label, i=i, lam=lam, bound=bound, ratio=lam / ball))
    worst = min(r["ratio"] for r in rows)
    return Criterion(3, "Faber-Krahn", ok, f"{len(rows)} domains, min lambda/lambda(B1) = {worst:.5f}", dict(rows=rows))


# -- 4 ---------------------------------------------------------------------
def c04_robin_limit(level, cache):
    mesh = triangulate(RadialDomain.disk(1.0), 0.04)
    ld = solve(mesh, DIRICHLET).lambda1
    lr = solve(mesh, BoundaryCondition.robin(1e4)).lambda1
    gap = abs(lr - ld) / ld
    return Criterion(4, "Robin to Dirichlet limit", gap <= 0.02, f"|lambda_R(1e4) - lambda_D| / lambda_D = {gap:.2e} (<= 2e-2)",
                     dict(lambda_dirichlet=ld, lambda_robin=lr, gap=gap))


# -- 5 ---------------------------------------------------------------------
def _variation_pairs(n, seed):
    rng = np.random.default_rng(seed)
    adm = AdmissibilityConfig()
    out = []
    for _ in range(n):
        dom = random_radial_domain(rng, n_modes=8, amplitude=0.04, admissibility=adm)
        out.append((dom, random_normal_field(rng, dom)))
    return out


def c05_first_variation(level, cache):
    n = _SIZES[level]["fv"]
    rows, ok = [], True
    for bc in (ROBIN1, DIRICHLET):
        for i, (dom, fld) in enumerate(_variation_pairs(n, 5)):
            bw = first_variation(dom, bc, fld)
            fd = finite_diff_variation(dom, bc, fld)
            rel = abs(bw - fd) / abs(fd)
            ok &= rel <= 1e-3
            rows.append(dict(bc=bc.label, i=i, boundary_integral=bw, finite_difference=fd, rel=rel))
    disk = RadialDomain.disk(1.0)
    dil = PerturbationField.dilation(disk)
    ld = disk_oracle(1.0, DIRICHLET)
    bw_d = first_variation(disk, DIRICHLET, dil)
    dil_err = abs(bw_d + 2.0 * ld) / (2.0 * ld)
    ok &= dil_err <= 5e-3
    # Robin is not homogeneous: compare with the radius derivative of the oracle
    e = 1e-4
    ref_r = (disk_oracle(1.0 + e, ROBIN1) - disk_oracle(1.0 - e, ROBIN1)) / (2.0 * e)
    bw_r = first_variation(disk, ROBIN1, dil)
    dil_r = abs(bw_r - ref_r) / abs(ref_r)
    ok &= dil_r <= 5e-3
    worst = max(r["rel"] for r in rows)
    return Criterion(
        5, "first variation formula", ok,
        f"{len(rows)} pairs, max rel diff {worst:.2e} (<= 1e-3); ball dilation vs -2 lambda1 {dil_err:.2e}, Robin vs oracle {dil_r:.2e} (<= 5e-3)",
        dict(rows=rows, dilation_dirichlet=bw_d, minus_two_lambda=-2.0 * ld, dilation_robin=bw_r, robin_oracle=ref_r),
    )


# -- 6 ---------------------------------------------------------------------
def c06_brunn_minkowski(level, cache):
    n = _SIZES[level]["bmi"]
    rng = np.random.default_rng(6)
    rows, ok = [], True
    for i in range(n):
        rep = brunn_minkowski_check(random_convex_body(rng), random_convex_body(rng))
        ok &= rep.verdict == "PASS"
        rows.append(dict(i=i, strong=float(rep.strong_margins[1:-1].min()), weak=float(rep.weak_margins[1:-1].min()),
                         strong_slack=rep.strong_slack, weak_slack=rep.weak_slack))
    balls = brunn_minkowski_check(ConvexBody.ball(1.0), ConvexBody.ball(1.5, (0.2, -0.1)))
    eq = float(np.max(np.abs(balls.strong_margins)))
    ok &= eq <= balls.strong_slack
    worst = min(r["strong"] / r["strong_slack"] for r in rows)
    return Criterion(
        6, "Brunn-Minkowski", ok,
        f"{n} pairs, min strong margin / slack {worst:.2f} (>= -1); ball-ball strong deviation {eq:.2e} (slack {balls.strong_slack:.2e})",
        dict(rows=rows, ball_deviation=eq, ball_slack=balls.strong_slack),
    )


# -- flows shared by 7-11 -----------------------------------------------------
def _flow8(cache):
    def make():
        u0 = perturbed_ball(2, 0.3, area_target=np.pi)
        cfg = FlowConfig(h=0.05, T=_SIZES[cache.level]["flow_T"], metric=MetricKind.parse("sobolev"), bc=ROBIN1, volume=np.pi)
        return u0, cfg, run_flow(u0, cfg, refine_final=False)

    return cache.get("flow8", make)


def _convex_cfg(h=0.1, T=1.0):
    return FlowConfig(h=h, T=T, metric=MetricKind.parse("l2"), bc=DIRICHLET)


def _ellipse64():
    return ConvexBody.ellipse(1.3, 0.8, 64)


def _flow9(cache):
    def make():
        u0, v0 = _ellipse64(), ConvexBody.ball(1.0, (0.1, 0.05), 64)
        cfg = _convex_cfg()
        space = make_space(u0, cfg)
        return cfg, space, (run_flow(u0, cfg, space=space, refine_final=False), run_flow(v0, cfg, space=space, refine_final=False))

    return cache.get("flow9", make)


def c07_step_inequality(level, cache):
    trajs = [_flow8(cache)[2], *_flow9(cache)[2]]
    worst_step, worst_tel, ok = -np.inf, -np.inf, True
    for tr in trajs:
        f = np.asarray(tr.phi_values)
        d = np.asarray(tr.step_distances)
        excess = f[1:] + d**2 / (2.0 * tr.h) - f[:-1]
        tel = np.sum(d**2) / (2.0 * tr.h) - (f[0] - f[-1])
        worst_step = max(worst_step, float(excess.max()))
        worst_tel = max(worst_tel, float(tel))
        ok &= bool(np.all(excess <= 1e-10)) and tel <= 1e-10 * tr.n_steps
    return Criterion(7, "minimizing-movement step inequality", ok,
                     f"max step excess {worst_step:.2e}, telescoping excess {worst_tel:.2e} (<= 1e-10 per step)",
                     dict(max_step_excess=worst_step, telescoping_excess=worst_tel))


KNOWN_FAILURE_8 = (
    "the volume-constrained Robin flow in the Sobolev radial metric relaxes the mode-2 perturbation "
    "at a linear rate of about 0.17 per unit time, so d_char shrinks to about 72% by T=2; "
    "a 25% ratio would need T of about 8 (see the decisions ledger)"
)


def c08_flow_descent(level, cache):
    u0, cfg, tr = _flow8(cache)
    phi = np.asarray(tr.phi_values)
    mono = bool(np.all(np.diff(phi) <= 0.0))
    disk = RadialDomain.disk(1.0, u0.n_samples)
    char = MetricKind.parse("char")
    d0 = distance(tr.shapes[0], disk, char)
    d1 = distance(tr.shapes[-1], disk, char)
    ratio = d1 / d0
    ok = mono and ratio <= 0.25
    return Criterion(
        8, "flow descent", ok,
        f"lambda monotone: {mono}; d_char ratio {ratio:.3f} (<= 0.25); lambda {phi[0]:.6f} -> {phi[-1]:.6f}",
        dict(monotone=mono, ratio=ratio, d_char_initial=d0, d_char_final=d1, phi=phi.tolist()),
        known_failure="" if ok else KNOWN_FAILURE_8,
    )


def c09_contraction(level, cache):
    cfg, space, trajs = _flow9(cache)
    rep = contraction_check(None, None, cfg, alpha=0.0, space=space, trajectories=trajs)
    return Criterion(9, "contraction", rep.passed,
                     f"d: {rep.distances[0]:.4f} -> {rep.distances[-1]:.4f}, max excess {rep.max_excess:.2e} (<= {rep.slack * rep.d0:.2e})",
                     dict(distances=rep.distances.tolist(), slack=rep.slack, d0=rep.d0))


def _evi_points(n=5, seed=10):
    rng = np.random.default_rng(seed)
    adm = AdmissibilityConfig()
    out = []
    while len(out) < n:
        z = random_convex_body(rng, n_samples=64)
        if is_admissible(z, adm):
            out.append(z)
    return out


def c10_evi(level, cache):
    zs = _evi_points()
    u0 = _ellipse64()
    rows, ok = [], True
    for h in (0.1, 0.05):
        cfg = _convex_cfg(h=h)
        if h == 0.1:
            _, space, (tr, _) = _flow9(cache)
        else:
            space = make_space(u0, cfg)
            tr = run_flow(u0, cfg, space=space, refine_final=False)
        tol = cfg.slack(h, tr.mesh_h) * tr.phi_values[0]
        reps = [evi_residual(tr, z, 0.0, cfg, space) for z in zs]
        mp = max(r.max_positive for r in reps)
        signed = max(float(r.residuals.max()) for r in reps)
        ok &= mp <= tol
        rows.append(dict(h=h, max_positive=mp, max_signed=signed, tolerance=tol))
    txt = ", ".join(f"h={r['h']}: max+ {r['max_positive']:.2e} (<= {r['tolerance']:.2e}), signed max {r['max_signed']:.3f}" for r in rows)
    return Criterion(10, "discrete EVI", ok, txt, dict(rows=rows))


def c11_apriori(level, cache):
    cfg = _convex_cfg()
    rep = apriori_check(_ellipse64(), 1.0, _SIZES[level]["apriori"], cfg)
    txt = "; ".join(f"n={r['n']}: {r['lhs']:.2e} vs {r['rhs']:.2e}" for r in rep.rows)
    return Criterion(11, "a priori estimate", rep.passed, txt + f" (reference n={rep.n_ref})", dict(rows=rep.rows))


# -- 12 --------------------------------------------------------------------
def alpha_pairs(n, seed=12):
    """Pairs whose amplitude grows toward the admissibility limits."""
    rng = np.random.default_rng(seed)
    adm = AdmissibilityConfig()
    out = []
    for i in range(n):
        amp = 0.02 + 0.18 * i / max(n - 1, 1)
        out.append((random_radial_domain(rng, amplitude=amp, admissibility=adm),
                    random_radial_domain(rng, amplitude=amp, admissibility=adm)))
    return out


ALPHA_FLOOR = -10.0


def c12_alpha_convexity(level, cache):
    pairs = alpha_pairs(_SIZES[level]["alpha"])
    reps = [alpha_convexity_check(a, b, ROBIN1, t_points=11, verify_points=21) for a, b in pairs]
    alphas = np.array([r.alpha_estimate for r in reps])
    a_min = float(alphas.min())
    ok = bool(np.all(np.isfinite(alphas))) and a_min >= ALPHA_FLOOR
    worst = np.inf
    for r in reps:
        # the sample-wide alpha is below each estimate, so the grid check is implied
        grid = chord_margins(r.t_grid, r.values, a_min, r.d2)
        fine = chord_margins(r.verify_grid, r.verify_values, a_min, r.d2)
        ok &= bool(grid.min() >= -1e-12 * np.max(r.values)) and bool(fine.min() >= -r.slack)
        worst = min(worst, float(fine[1:-1].min() / r.slack))
    adm = AdmissibilityConfig()
    closeness = [min(is_admissible(d, adm).values["inradius"]["margin"] for d in pair) for pair in pairs]
    return Criterion(
        12, "alpha-convexity", ok,
        f"alpha estimates in [{a_min:.3f}, {alphas.max():.3f}] (floor {ALPHA_FLOOR}); worst interior 21-point margin / slack {worst:.2f} (>= -1)",
        dict(alphas=alphas.tolist(), alpha_min=a_min, inradius_margins=closeness),
    )


# -- 13 --------------------------------------------------------------------
def c13_second_variation(level, cache):
    pairs = _variation_pairs(_SIZES[level]["second"], 13)
    rep = second_variation_bound(pairs, ROBIN1)
    rep2 = second_variation_bound([(d, f.scaled(2.0)) for d, f in pairs], ROBIN1)
    inv = max(abs(a - b) / a for a, b in zip(rep.ratios, rep2.ratios))
    ok = rep.finite and inv <= 1e-6
    return Criterion(13, "second-variation bound", ok,
                     f"{len(pairs)} pairs, max ratio {rep.max_ratio:.3f}, doubling changes ratios by {inv:.1e} (<= 1e-6)",
                     dict(ratios=rep.ratios, max_ratio=rep.max_ratio, doubling=inv))


# -- 14 --------------------------------------------------------------------
def c14_negative_beta(level, cache):
    rep = negbeta_demo()
    rejected = ""
    try:
        FlowConfig(h=0.1, T=1.0, metric=MetricKind.parse("sobolev"), bc=BoundaryCondition.robin(-1.0))
    except InvalidInput as exc:
        rejected = str(exc)
    ok = rep.strictly_decreasing and len(rep.levels) >= 4 and bool(rejected)
    lam = ", ".join(f"{x:.3f}" for x in rep.lambdas)
    return Criterion(14, "negative-beta demo", ok,
                     f"lambda over m={rep.levels}: {lam}; flow rejects beta<0: {bool(rejected)}",
                     dict(rows=rep.rows(), rejection=rejected))


CRITERIA = {
    1: c01_eigensolver,
    2: c02_homogeneity,
    3: c03_faber_krahn,
    4: c04_robin_limit,
    5: c05_first_variation,
    6: c06_brunn_minkowski,
    7: c07_step_inequality,
    8: c08_flow_descent,
    9: c09_contraction,
    10: c10_evi,
    11: c11_apriori,
    12: c12_alpha_convexity,
    13: c13_second_variation,
    14: c14_negative_beta,
}


def run_criterion(number, level="full", cache=None):
    if level not in LEVELS:
        raise InvalidInput(f"level must be one of {LEVELS}")
    cache = SuiteCache(level) if cache is None else cache
    t0 = time.perf_counter()
    res = CRITERIA[number](level, cache)
    res.seconds = time.perf_counter() - t0
    logger.info("%s (%.1fs)", res.line(), res.seconds)
    return res


def run_suite(level="quick", only=None):
    cache = SuiteCache(level)
    numbers = sorted(CRITERIA) if only is None else sorted(set(only))
    unknown = [n for n in numbers if n not in CRITERIA]
    if unknown:
        raise InvalidInput(f"no such criteria: {unknown}; valid numbers are 1..{len(CRITERIA)}")
    return [run_criterion(n, level, cache) for n in numbers]


def suite_summary(results):
    return dict(
        passed=sum(r.passed for r in results),
        failed=[r.number for r in results if not r.passed],
        known_failures={r.number: r.known_failure for r in results if r.known_failure},
        all_passed=all(r.passed for r in results),
        total_seconds=math.fsum(r.seconds for r in results),
    )
