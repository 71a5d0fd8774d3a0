"""``shapeflow`` command line: experiments, reports and the verification suite.

Exit codes: 0 when a run completes (and any property it checks holds), 2 when
a checked property fails, 1 on errors.  Artifacts are buffered and written
only after the command succeeds, so a failed run leaves nothing behind.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import CONVEX, RADIAL, make_shape, shape_oracle
from .eigen.solver import BoundaryCondition, solve, trace_ratio
from .errors import ConfigError, InvalidInput, ShapeFlowError
from .flow.checks import apriori_check, contraction_check, evi_residual, gmm_diagnostic
from .flow.config import GRADIENT_ASSISTED, NELDER_MEAD, FlowConfig
from .flow.engine import run_flow
from .flow.space import make_space
from .geometry.admissibility import AdmissibilityConfig, is_admissible
from .geometry.io import shape_to_dict
from .geometry.metrics import MetricKind, distance
from .geometry.shapes import ConvexBody, RadialDomain
from .meshing import polygon_mesh, refine, template_for, write_off
from .variation.convexity import alpha_convexity_check, brunn_minkowski_check
from .variation.fields import PerturbationField
from .variation.first import finite_diff_variation, first_variation
from .variation.negbeta import negbeta_demo
from .variation.samples import (
    random_convex_body,
    random_normal_field,
    random_radial_domain,
)

logger = logging.getLogger("shapeflow")

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2
PASS, FAIL, DONE, REPORT = "PASS", "FAIL", "DONE", "REPORT"
COMMANDS = ("eigen", "flow", "gmm", "contraction", "evi", "apriori", "bmi", "alpha", "variation", "negbeta-demo", "verify")


# -- output ----------------------------------------------------------------
def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "" if v is None else str(v)


def _clean(obj):
    """JSON-safe copy with plain floats; non-finite values become strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    return obj


class Artifacts:
    """In-memory artifact set, committed atomically at the end of a run.

    ``out`` ending in ``.json`` names the primary JSON file and siblings share
    its stem; any other ``out`` is a directory holding ``<command>.*`` files.
    """

    def __init__(self, out, command, name=None):
        p = Path(out)
        if p.suffix == ".json":
            self.dir, self.stem, self.primary = p.parent, p.stem, p.name
        else:
            self.dir, self.stem, self.primary = p, (name or command).replace("-", "_"), None
        self.files = {}

    def _name(self, suffix):
        if suffix == ".json" and self.primary:
            return self.primary
        return self.stem + suffix

    def csv(self, suffix, rows, columns=None):
        columns = columns or (list(rows[0]) if rows else [])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in columns])
        self.files[self._name(suffix)] = buf.getvalue()

    def json(self, suffix, obj):
        self.files[self._name(suffix)] = json.dumps(_clean(obj), indent=1, sort_keys=True) + "\n"

    def text(self, suffix, text):
        self.files[self._name(suffix)] = text

    def commit(self):
        self.dir.mkdir(parents=True, exist_ok=True)
        for name, text in sorted(self.files.items()):
            fd, tmp = tempfile.mkstemp(dir=self.dir, prefix=".tmp-")
            with os.fdopen(fd, "w") as fh:
                fh.write(text)
            os.replace(tmp, self.dir / name)
        return [self.dir / n for n in sorted(self.files)]


# -- argument parsing ------------------------------------------------------
class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _floats(text):
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text):
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    return [int(v) for v in vals]


def _add_common(p):
    p.add_argument("--config", help="flat key=value file; command-line flags override it")
    p.add_argument("--name", default=None, help="experiment name; used as the artifact stem")
    p.add_argument("--out", default="shapeflow-out", help="output directory, or a .json path for the primary artifact")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-samples", type=int, default=None, help="boundary samples per shape")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_bc(p, bc="dirichlet", beta=None):
    p.add_argument("--bc", choices=("dirichlet", "robin"), default=bc)
    p.add_argument("--beta", type=float, default=None, help="Robin parameter" + (f" (default {beta:g})" if beta is not None else ""))
    p.set_defaults(robin_beta=beta)


def _add_flow(p, metric="sobolev", h=0.05, T=1.0, bc="dirichlet", beta=None):
    _add_bc(p, bc, beta)
    p.add_argument("--metric", default=metric, help="l2, l1, linf, lpP, hausdorff, hausdorff-open, char, sobolev")
    p.add_argument("--h", type=float, default=h)
    p.add_argument("--T", type=float, default=T)
    p.add_argument("--volume", type=float, default=None)
    p.add_argument("--inner-solver", choices=(GRADIENT_ASSISTED, NELDER_MEAD), default=GRADIENT_ASSISTED)
    p.add_argument("--inner-tol", type=float, default=1e-10)
    p.add_argument("--max-inner-evals", type=int, default=400)
    p.add_argument("--n-modes", type=int, default=8)
    p.add_argument("--mesh-rel-h", type=float, default=0.04)


def build_parser():
    parser = _Parser(
        prog="shapeflow",
        description=__doc__.splitlines()[0],
        epilog="shapeflow run SPEC_FILE [flags] reads the command and its parameters from a key=value file.",
    )
    parser.add_argument("--version", action="version", version=f"shapeflow {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    subs = {}

    p = subs["eigen"] = sub.add_parser("eigen", help="first eigenvalues of a shape")
    _add_common(p)
    p.add_argument("--shape")
    p.add_argument("--kind", choices=(RADIAL, CONVEX), default=None)
    _add_bc(p)
    p.add_argument("--target-h", type=float, default=0.04)
    p.add_argument("--refine", type=int, default=0)
    p.add_argument("--k", type=int, choices=(1, 2), default=2)
    p.add_argument("--mesh", action="store_true", help="also write the mesh as OFF")

    p = subs["flow"] = sub.add_parser("flow", help="run a minimizing-movement flow")
    p.add_argument("action", nargs="?", choices=("run",), default="run")
    _add_common(p)
    p.add_argument("--init", "--shape", dest="init")
    p.add_argument("--kind", choices=(RADIAL, CONVEX), default=None)
    _add_flow(p)

    p = subs["gmm"] = sub.add_parser("gmm", help="Cauchy table over time steps")
    _add_common(p)
    p.add_argument("--init", "--shape", dest="init")
    p.add_argument("--kind", choices=(RADIAL, CONVEX), default=None)
    _add_flow(p)
    p.add_argument("--h-list", type=_floats, default=[0.1, 0.05, 0.025])
    p.add_argument("--times", type=_floats, default=None)

    p = subs["contraction"] = sub.add_parser("contraction", help="distance between two flows")
    _add_common(p)
    p.add_argument("--u0", default="ellipse(1.3,0.8)")
    p.add_argument("--v0", default="disk")
    p.add_argument("--alpha", type=float, default=0.0)
    _add_flow(p, metric="l2", h=0.1)

    p = subs["evi"] = sub.add_parser("evi", help="discrete EVI residuals against random test shapes")
    _add_common(p)
    p.add_argument("--init", "--shape", dest="init", default="ellipse(1.3,0.8)")
    p.add_argument("--kind", choices=(RADIAL, CONVEX), default=None)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--n-test", type=int, default=5)
    _add_flow(p, metric="l2", h=0.1)

    p = subs["apriori"] = sub.add_parser("apriori", help="a priori estimate against a fine reference")
    _add_common(p)
    p.add_argument("--init", "--shape", dest="init", default="ellipse(1.3,0.8)")
    p.add_argument("--kind", choices=(RADIAL, CONVEX), default=None)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--n-list", type=_ints, default=[4, 8, 16, 64])
    _add_flow(p, metric="l2", h=0.1)

    p = subs["bmi"] = sub.add_parser("bmi", help="Brunn-Minkowski margins along a Minkowski path")
    _add_common(p)
    p.add_argument("--k0", default="square")
    p.add_argument("--k1", default="rot-square")
    _add_bc(p)
    p.add_argument("--t-points", type=int, default=11)
    p.add_argument("--target-h", type=float, default=0.04)

    p = subs["alpha"] = sub.add_parser("alpha", help="alpha-convexity along a radial interpolation")
    _add_common(p)
    p.add_argument("--eta0", default="disk")
    p.add_argument("--eta1", default="perturbed-ball(3,0.1)")
    _add_bc(p, "robin", 1.0)
    p.add_argument("--t-points", type=int, default=11)
    p.add_argument("--verify-points", type=int, default=21)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--target-h", type=float, default=0.04)

    p = subs["variation"] = sub.add_parser("variation", help="domain variation: boundary integral vs finite differences")
    _add_common(p)
    p.add_argument("--shape", default="disk")
    p.add_argument("--field", choices=("dilation", "translation", "random"), default="dilation")
    _add_bc(p, "robin", 1.0)
    p.add_argument("--order", type=int, choices=(1, 2), default=1)
    p.add_argument("--target-h", type=float, default=0.04)
    p.add_argument("--tol", type=float, default=1e-3)

    p = subs["negbeta-demo"] = sub.add_parser("negbeta-demo", help="Robin eigenvalue with beta < 0 on sawtooth boundaries")
    _add_common(p)
    p.add_argument("--levels", type=_ints, default=[8, 16, 32, 64, 128])
    p.add_argument("--amplitude", type=float, default=0.05)
    p.add_argument("--beta", type=float, default=-1.0)

    p = subs["verify"] = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("level", nargs="?", choices=("quick", "full"), default="quick")
    _add_common(p)
    p.add_argument("--only", type=_ints, default=None)
    return parser, subs


def read_config(path):
    """``key = value`` lines; ``#`` starts a comment.  Returns ``{key: (value, line)}``."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    out = {}
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {raw.strip()!r}", i)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", i)
        key = key.lstrip("-").replace("-", "_")
        if key in out:
            raise ConfigError(f"duplicate key {key!r}", i)
        out[key] = (value, i)
    return out


def _config_defaults(sub, entries, command):
    actions = {}
    for a in sub._actions:
        if a.dest in ("help", "config", "version"):
            continue
        actions[a.dest] = a
        for opt in a.option_strings:
            actions.setdefault(opt.lstrip("-").replace("-", "_"), a)
    values = {}
    for key, (raw, line) in entries.items():
        if key == "command":
            if raw != command:
                raise ConfigError(f"config is for command {raw!r}, not {command!r}", line)
            continue
        act = actions.get(key)
        if act is None or not (act.option_strings or act.nargs == "?"):
            raise ConfigError(f"unknown key {key!r} for this command", line)
        key = act.dest
        if act.nargs == 0:  # store_true flags
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ConfigError(f"{key} expects true/false, got {raw!r}", line)
            values[key] = raw.lower() in ("true", "1", "yes")
            continue
        try:
            v = act.type(raw) if act.type else raw
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {exc}", line) from exc
        if act.choices is not None and v not in act.choices:
            raise ConfigError(f"{key} must be one of {list(act.choices)}", line)
        values[key] = v
    return values


def parse_args(argv):
    """Parse ``argv``; ``run SPEC [flags]`` takes the command from the job file's ``command`` key."""
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv[:1] == ["run"]:
        if argv[1:2] in (["-h"], ["--help"]):
            print("usage: shapeflow run SPEC_FILE [flags]\n\nRead the command and its parameters from a key = value file;"
                  " flags override the file.")
            raise SystemExit(EXIT_OK)
        if len(argv) < 2:
            raise ConfigError("usage: shapeflow run SPEC_FILE [flags]")
        entries = read_config(argv[1])
        if "command" not in entries:
            raise ConfigError(f"{argv[1]} has no 'command' key")
        command = entries["command"][0]
        if command not in COMMANDS:
            raise ConfigError(f"unknown command {command!r}", entries["command"][1])
        argv = [command, "--config", argv[1]] + argv[2:]
    parser, subs = build_parser()
    ns = parser.parse_args(argv)
    if ns.command is None:
        raise ConfigError(f"missing command; choose from {', '.join(COMMANDS)}")
    if ns.config:
        sub = subs[ns.command]
        sub.set_defaults(**_config_defaults(sub, read_config(ns.config), ns.command))
        ns = parser.parse_args(argv)
    return ns


# -- shared helpers --------------------------------------------------------
def _require(ns, *names):
    missing = [n for n in names if getattr(ns, n, None) is None]
    if missing:
        raise ConfigError("missing required parameter(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _bc(ns):
    if ns.bc == "dirichlet":
        if ns.beta is not None:
            raise ConfigError("--beta only applies to --bc robin")
        return BoundaryCondition.dirichlet()
    beta = ns.beta if ns.beta is not None else getattr(ns, "robin_beta", None)
    if beta is None:
        raise ConfigError("--bc robin needs --beta")
    return BoundaryCondition.robin(beta)


def _flow_kind(metric, kind):
    if metric.tag == "lp":
        if kind == RADIAL:
            raise ConfigError("L^p support metrics need convex bodies")
        return CONVEX
    if metric.tag in ("sobolev", "char"):
        if kind == CONVEX:
            raise ConfigError(f"the {metric.label} metric needs radial domains")
        return RADIAL
    return kind or RADIAL


def _n_samples(ns, kind, flow=False):
    if ns.n_samples is not None:
        return ns.n_samples
    return 64 if (kind == CONVEX and flow) else 256


def _flow_config(ns, bc):
    metric = MetricKind.parse(ns.metric)
    return FlowConfig(
        h=ns.h, T=ns.T, metric=metric, bc=bc, volume=ns.volume, inner_solver=ns.inner_solver,
        inner_tol=ns.inner_tol, max_inner_evals=ns.max_inner_evals, seed=ns.seed, n_modes=ns.n_modes,
        mesh_rel_h=ns.mesh_rel_h,
    )


def _flow_shape(ns, spec, cfg, kind=None):
    kind = _flow_kind(cfg.metric, kind)
    return make_shape(spec, kind, _n_samples(ns, kind, flow=True))


def _mesh_of(shape, target_h):
    if isinstance(shape, ConvexBody):
        return polygon_mesh(shape, target_h)
    return template_for(shape, target_h).map(shape)


def _trajectory_json(traj, cfg, u0_spec):
    return dict(
        init=u0_spec,
        h=traj.h,
        T=cfg.T,
        metric=cfg.metric.label,
        bc=cfg.bc.label,
        volume=cfg.volume,
        seed=cfg.seed,
        phi=traj.phi_values,
        big_phi=traj.big_phi_values,
        step_distances=traj.step_distances,
        inner_evals=traj.inner_eval_counts,
        stagnated=traj.stagnated,
        mesh_h=traj.mesh_h,
        refined_lambda=traj.refined_lambda,
        shapes=[shape_to_dict(s) for s in traj.shapes],
    )


# -- commands --------------------------------------------------------------
def cmd_eigen(ns, art):
    _require(ns, "shape")
    bc = _bc(ns)
    if ns.refine < 0:
        raise ConfigError("--refine must be >= 0")
    shape = make_shape(ns.shape, ns.kind, _n_samples(ns, ns.kind))
    mesh = _mesh_of(shape, ns.target_h)
    for _ in range(ns.refine):
        mesh = refine(mesh, shape if isinstance(shape, RadialDomain) else None)
    res = solve(mesh, bc, k=ns.k)
    oracle = shape_oracle(ns.shape, bc)
    row = dict(
        domain_id=ns.shape, bc=bc.kind, beta=bc.beta, h_max=mesh.h_max, lambda1=res.lambda1,
        lambda2=res.lambda2, residual=res.residual, oracle=oracle,
        rel_error=None if oracle is None else abs(res.lambda1 - oracle) / abs(oracle),
        trace_ratio=trace_ratio(mesh, res.u),
    )
    cols = ["domain_id", "bc", "beta", "h_max", "lambda1", "lambda2", "residual", "oracle", "rel_error", "trace_ratio"]
    art.csv(".csv", [row], cols)
    if ns.mesh:
        art.text(".off", write_off(mesh))
    msg = f"{ns.shape} {bc.label}: lambda1 = {res.lambda1:.6f}"
    if oracle is not None:
        msg += f" (oracle {oracle:.6f}, rel err {row['rel_error']:.2e})"
    return DONE, [msg], row


def cmd_flow(ns, art):
    _require(ns, "init")
    cfg = _flow_config(ns, _bc(ns))
    u0 = _flow_shape(ns, ns.init, cfg, ns.kind)
    space = make_space(u0, cfg)
    traj = run_flow(u0, cfg, space=space)
    margins = traj.step_margins()
    ok = bool(np.all(margins >= -cfg.inner_tol))
    art.json(".json", _trajectory_json(traj, cfg, ns.init))
    art.csv(".csv", traj.summary_rows())
    start = traj.shapes[0]
    plot = [dict(t=t, lam=f, distance_from_start=distance(start, s, cfg.metric))
            for t, f, s in zip(traj.times, traj.phi_values, traj.shapes)]
    art.csv("_plot.csv", plot)
    art.text(".off", write_off(space.shape_mesh(traj.shapes[-1])))
    lines = [
        f"{traj.n_steps} steps, lambda {traj.phi_values[0]:.6f} -> {traj.phi_values[-1]:.6f} "
        f"(refined {traj.refined_lambda:.6f}), stagnated steps {sum(traj.stagnated)}",
        f"step inequality {'holds' if ok else 'VIOLATED'} (min margin {margins.min():.3e})",
    ]
    return (PASS if ok else FAIL), lines, dict(min_margin=float(margins.min()))


def cmd_gmm(ns, art):
    _require(ns, "init")
    cfg = _flow_config(ns, _bc(ns))
    u0 = _flow_shape(ns, ns.init, cfg, ns.kind)
    rep = gmm_diagnostic(u0, cfg, ns.h_list, times=ns.times)
    art.csv(".csv", rep.rows, ["t", "h_a", "h_b", "distance"])
    t_end = rep.times[-1]
    cons = rep.consecutive(t_end)
    lines = [f"t={t_end:g}: consecutive distances " + ", ".join(f"{d:.3e}" for d in cons)]
    art.json("_summary.json", dict(h_list=rep.h_list, times=rep.times, consecutive_at_end=cons))
    return DONE, lines, dict(consecutive=cons)


def cmd_contraction(ns, art):
    cfg = _flow_config(ns, _bc(ns))
    kind = _flow_kind(cfg.metric, None)
    u0 = make_shape(ns.u0, kind, _n_samples(ns, kind, flow=True))
    v0 = make_shape(ns.v0, kind, _n_samples(ns, kind, flow=True))
    space = make_space(u0, cfg)
    trajs = (run_flow(u0, cfg, space=space, refine_final=False), run_flow(v0, cfg, space=space, refine_final=False))
    rep = contraction_check(u0, v0, cfg, alpha=ns.alpha, space=space, trajectories=trajs)
    art.csv(".csv", [dict(t=t, distance=d, bound=b) for t, d, b in zip(rep.times, rep.distances, rep.bound)])
    lines = [f"d(u,v): {rep.d0:.5f} -> {rep.distances[-1]:.5f}; max excess {rep.max_excess:.3e} "
             f"vs slack {rep.slack * rep.d0:.3e}"]
    return (PASS if rep.passed else FAIL), lines, dict(max_excess=rep.max_excess, slack=rep.slack * rep.d0)


def _test_points(kind, n, seed, n_samples):
    rng = np.random.default_rng(seed)
    adm = AdmissibilityConfig()
    out = []
    while len(out) < n:
        if kind == CONVEX:
            z = random_convex_body(rng, n_samples=n_samples)
        else:
            z = random_radial_domain(rng, amplitude=0.08, n_samples=n_samples)
        if is_admissible(z, adm):
            out.append(z)
    return out


def cmd_evi(ns, art):
    cfg = _flow_config(ns, _bc(ns))
    u0 = _flow_shape(ns, ns.init, cfg, ns.kind)
    kind = CONVEX if isinstance(u0, ConvexBody) else RADIAL
    zs = _test_points(kind, ns.n_test, ns.seed, u0.n_samples)
    space = make_space(u0, cfg)
    traj = run_flow(u0, cfg, space=space, refine_final=False)
    tol = cfg.slack(cfg.h, traj.mesh_h) * traj.phi_values[0]
    rows, worst = [], 0.0
    for j, z in enumerate(zs):
        rep = evi_residual(traj, z, ns.alpha, cfg, space)
        worst = max(worst, rep.max_positive)
        rows += [dict(z=j, step=i + 1, residual=r) for i, r in enumerate(rep.residuals)]
    art.csv(".csv", rows, ["z", "step", "residual"])
    ok = worst <= tol
    return (PASS if ok else FAIL), [f"max positive residual {worst:.3e} vs tolerance {tol:.3e}"], dict(max_positive=worst, tolerance=tol)


def cmd_apriori(ns, art):
    cfg = _flow_config(ns, _bc(ns))
    u0 = _flow_shape(ns, ns.init, cfg, ns.kind)
    if len(ns.n_list) < 2:
        raise ConfigError("--n-list needs at least two values")
    rep = apriori_check(u0, ns.t, ns.n_list, cfg)
    art.csv(".csv", rep.rows, ["n", "h", "lhs", "rhs", "reference_error", "slack", "passed"])
    lines = [f"n={r['n']}: LHS {r['lhs']:.3e}, RHS {r['rhs']:.3e} -> {'ok' if r['passed'] else 'FAIL'}" for r in rep.rows]
    return (PASS if rep.passed else FAIL), lines, dict(rows=rep.rows)


def cmd_bmi(ns, art):
    bc = _bc(ns)
    n = _n_samples(ns, CONVEX)
    k0 = make_shape(ns.k0, CONVEX, n)
    k1 = make_shape(ns.k1, CONVEX, n)
    rep = brunn_minkowski_check(k0, k1, ns.t_points, bc, ns.target_h)
    art.csv(".csv", rep.rows(), ["t", "lam", "strong_margin", "weak_margin"])
    mid = len(rep.t) // 2
    lines = [f"strong margin min {rep.strong_margins.min():.3e} (slack {rep.strong_slack:.1e}), "
             f"at t={rep.t[mid]:g}: {rep.strong_margins[mid]:.4e}; weak margin min {rep.weak_margins.min():.3e}"]
    verdict = rep.verdict
    return verdict, lines, dict(verdict=verdict, strong_slack=rep.strong_slack, weak_slack=rep.weak_slack)


def cmd_alpha(ns, art):
    bc = _bc(ns)
    if bc.is_dirichlet or bc.beta <= 0.0:
        raise ConfigError("the alpha check is for Robin conditions with beta > 0")
    n = _n_samples(ns, RADIAL)
    eta0 = make_shape(ns.eta0, RADIAL, n)
    eta1 = make_shape(ns.eta1, RADIAL, n)
    rep = alpha_convexity_check(eta0, eta1, bc, ns.t_points, ns.verify_points, ns.alpha, ns.target_h)
    art.csv(".csv", rep.rows(), ["t", "h", "chord", "margin"])
    art.json("_summary.json", dict(alpha_estimate=rep.alpha_estimate, alpha_used=rep.alpha_used, d2=rep.d2,
                                   verdict=rep.verdict, slack=rep.slack, mesh_h=rep.mesh_h))
    lines = [f"alpha_estimate {rep.alpha_estimate:.5f}, d^2 {rep.d2:.4e}, verdict {rep.verdict}"]
    return rep.verdict, lines, dict(alpha_estimate=rep.alpha_estimate)


def cmd_variation(ns, art):
    bc = _bc(ns)
    dom = make_shape(ns.shape, RADIAL, _n_samples(ns, RADIAL))
    if ns.field == "dilation":
        fld = PerturbationField.dilation(dom)
    elif ns.field == "translation":
        fld = PerturbationField.translation(dom, (1.0, 0.0))
    else:
        fld = random_normal_field(np.random.default_rng(ns.seed), dom)
    if ns.order == 1:
        bw = first_variation(dom, bc, fld, target_h=ns.target_h)
        fd = finite_diff_variation(dom, bc, fld, target_h=ns.target_h)
        scale = max(abs(fd), 1e-12)
        rel = abs(bw - fd) / scale
        # translations have zero derivative; compare against the eigenvalue then
        if ns.field == "translation":
            scale = solve(_mesh_of(dom, ns.target_h), bc).lambda1
            rel = max(abs(bw), abs(fd)) / scale
        row = dict(shape=ns.shape, bc=bc.label, field=ns.field, boundary_integral=bw, finite_difference=fd, rel_diff=rel)
        art.csv(".csv", [row])
        ok = rel <= ns.tol
        return (PASS if ok else FAIL), [f"boundary integral {bw:.8f}, finite difference {fd:.8f}, rel diff {rel:.2e}"], row
    dd = finite_diff_variation(dom, bc, fld, order=2, target_h=ns.target_h, levels=1)
    nrm = fld.norm_sq(dom)
    row = dict(shape=ns.shape, bc=bc.label, field=ns.field, second_variation=dd, norm_sq=nrm, ratio=abs(dd) / nrm)
    art.csv(".csv", [row])
    return DONE, [f"second variation {dd:.6f}, ||v||^2 {nrm:.6f}, ratio {abs(dd) / nrm:.5f}"], row


def cmd_negbeta(ns, art):
    if ns.beta >= 0.0:
        raise ConfigError("negbeta-demo needs --beta < 0")
    if len(ns.levels) < 4:
        raise ConfigError("need at least four refinement levels")
    n = _n_samples(ns, RADIAL) if ns.n_samples is not None else 1024
    rep = negbeta_demo(ns.levels, ns.amplitude, ns.beta, n)
    art.csv(".csv", rep.rows(), ["m", "lam", "perimeter", "hausdorff"])
    try:
        FlowConfig(h=0.1, T=1.0, metric=MetricKind.parse("sobolev"), bc=BoundaryCondition.robin(ns.beta))
        rejected = ""
    except InvalidInput as exc:
        rejected = str(exc)
    ok = rep.strictly_decreasing and bool(rejected)
    lines = [", ".join(f"m={r['m']}: {r['lam']:.4f}" for r in rep.rows()),
             f"strictly decreasing: {rep.strictly_decreasing}; flow refuses beta<0: {bool(rejected)}"]
    return (PASS if ok else FAIL), lines, dict(rows=rep.rows(), rejection=rejected)


def cmd_verify(ns, art):
    from .verify import run_suite, suite_summary

    results = run_suite(ns.level, ns.only)
    rows = [dict(criterion=r.number, title=r.title, verdict=r.verdict, summary=r.summary, known_failure=r.known_failure)
            for r in results]
    art.csv(".csv", rows, ["criterion", "title", "verdict", "summary", "known_failure"])
    summ = suite_summary(results)
    summ.pop("total_seconds")
    art.json(".json", dict(level=ns.level, results=rows, **summ))
    lines = [r.line() for r in results]
    return (PASS if summ["all_passed"] else FAIL), lines, summ


HANDLERS = {
    "eigen": cmd_eigen,
    "flow": cmd_flow,
    "gmm": cmd_gmm,
    "contraction": cmd_contraction,
    "evi": cmd_evi,
    "apriori": cmd_apriori,
    "bmi": cmd_bmi,
    "alpha": cmd_alpha,
    "variation": cmd_variation,
    "negbeta-demo": cmd_negbeta,
    "verify": cmd_verify,
}


def run(argv=None, stdout=None):
    """Parse, dispatch, write artifacts; returns the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    try:
        ns = parse_args(argv)
        logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
        art = Artifacts(ns.out, ns.command, ns.name)
        verdict, lines, _ = HANDLERS[ns.command](ns, art)
        written = art.commit()
    except (ShapeFlowError, ValueError, OSError) as exc:
        print(f"shapeflow: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for line in lines:
        print(line, file=stdout)
    for path in written:
        print(f"wrote {path}", file=stdout)
    print(verdict, file=stdout)
    return EXIT_FAIL if verdict == FAIL else EXIT_OK


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
