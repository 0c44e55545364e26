"""Command-line front end.

Every subcommand builds a :class:`~paneitzlab.output.ResultEnvelope`,
writes it in the requested formats below ``--out`` and prints a one-line
summary.  Exit status: 0 on success, 1 when ``verify`` finds a failing
check or a computation fails, 2 for configuration and usage errors.
"""
import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .output import (ConfigError, ResultEnvelope, load_config, plain, stamp,
                     svg_line_chart, to_csv)


class SpecError(ConfigError):
    """Unknown or malformed factor specification."""


# -- factor specifications ---------------------------------------------------------

def parse_factor_spec(spec, n, normalize=False):
    """Build a factor from ``round``, ``bubble:t``, ``counterexample:eps``,
    ``dumbbell:a`` or ``file:path``.

    ``file:path`` reads a CSV with header ``theta,u`` sampling the factor on
    ``[0, pi]``; it is interpolated by an even cubic spline.
    """
    from .conformal import dumbbell_factor, moebius_factor, normalize_volume, round_factor
    from .counterexample import u_eps
    kind, _, arg = spec.partition(":")
    try:
        if kind == "round" and not arg:
            u = round_factor(n)
        elif kind == "bubble":
            u = moebius_factor(float(arg.removeprefix("t=")), n)
        elif kind == "counterexample":
            u = u_eps(n, float(arg.removeprefix("eps=").removeprefix("ε=")))
        elif kind == "dumbbell":
            u = dumbbell_factor(n, a=float(arg.removeprefix("a=")) if arg else 9.0,
                                normalize=False)
        elif kind == "file" and arg:
            u = _factor_from_file(arg, n)
        else:
            raise SpecError(f"unknown factor specification {spec!r}")
    except (ValueError, OSError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"bad factor specification {spec!r}: {exc}") from exc
    return normalize_volume(u) if normalize else u


def _factor_from_file(path, n):
    from scipy.interpolate import CubicSpline

    from .conformal import ConformalFactor
    data = np.genfromtxt(path, delimiter=",", names=True)
    theta, u = np.asarray(data["theta"], float), np.asarray(data["u"], float)
    spline = CubicSpline(theta, u, bc_type="clamped")
    return ConformalFactor(lambda th: spline(np.clip(np.asarray(th, float), 0, np.pi)), n,
                           label=f"file({Path(path).name})")


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


# -- commands ------------------------------------------------------------------------

def _check(name, value, tol, passed, operation, **extra):
    row = {"check": name, "value": value, "tolerance": tol, "passed": bool(passed)}
    row.update(extra)
    return row, operation


def run_verify(cfg, args):
    """The invariant suite; returns rows, provenance and a summary."""
    import dataclasses

    from .blowup import transfer_check
    from .conformal import (moebius_covariance_residual, moebius_factor, q_curvature,
                            round_factor)
    from .geometry import RadialField, analyze, make_grid, sphere_volume, synthesize, zonal_basis
    from .paneitz import coercivity_constant, green_profile, paneitz_apply, paneitz_constants
    from .spectrum import gradient_n_integral, gradient_n_integral_closed, lambda1_sphere

    n = cfg.n
    out = []
    k = paneitz_constants(n)
    used = dataclasses.replace(k, b=k.b + cfg.perturb_b) if cfg.perturb_b else k
    grid = make_grid(n, cfg.K)
    th = np.asarray(grid.theta, dtype=float)

    # quadrature noise (~1e-19) in high coefficients would be amplified by the
    # degree-4 multipliers; 1 and cos are exact low-degree expansions
    one = analyze(RadialField(grid, np.ones(grid.size))).chopped(1e-16)
    cosf = analyze(RadialField(grid, np.cos(grid.theta))).chopped(1e-16)
    p1 = np.asarray(synthesize(paneitz_apply(one, used), grid).values, float)
    pc = np.asarray(synthesize(paneitz_apply(cosf, used), grid).values, float)
    rel1 = float(np.max(np.abs(p1 - k.b))) / k.b
    relc = float(np.max(np.abs(pc - k.c * np.cos(th)))) / k.c
    out.append(_check("P(1) = b_n", rel1, cfg.tol_identity, rel1 <= cfg.tol_identity,
                      "paneitz.paneitz_apply"))
    out.append(_check("P(cos) = c_n cos", relc, cfg.tol_identity, relc <= cfg.tol_identity,
                      "paneitz.paneitz_apply"))
    q = np.asarray(q_curvature(round_factor(n), grid).values, float)
    rq = float(np.max(np.abs(q - k.q_round)))
    out.append(_check("Q(round) = n(n^2-4)/8", rq, 1e-10, rq <= 1e-10, "conformal.q_curvature"))
    cb = abs(coercivity_constant(n) - k.b) / k.b
    out.append(_check("min spectrum of P = b_n", cb, 1e-12, cb <= 1e-12,
                      "paneitz.coercivity_constant"))

    z3 = np.asarray(zonal_basis(n, 3, grid).values, float)
    for t in (2.0, 5.0, 20.0):
        for name, phi in (("1", np.ones(grid.size)), ("cos", np.cos(th)), ("z3", z3)):
            r = moebius_covariance_residual(t, RadialField(grid, phi))
            out.append(_check(f"covariance t={t:g} phi={name}", r, cfg.tol_covariance,
                              r <= cfg.tol_covariance, "conformal.moebius_covariance_residual"))

    lam = lambda1_sphere(round_factor(n), lmax=cfg.lmax, K=cfg.basis)
    err = abs(lam.lambda1 - n)
    out.append(_check("lambda1(round) = n", err, cfg.tol_eigen,
                      err <= cfg.tol_eigen and lam.sector == 1, "spectrum.lambda1_sphere"))
    lam = lambda1_sphere(moebius_factor(10.0, n), lmax=cfg.lmax, K=cfg.basis)
    err = abs(lam.lambda1 - n)
    out.append(_check("lambda1(bubble t=10) = n", err, 1e-6, err <= 1e-6,
                      "spectrum.lambda1_sphere"))

    for r, R in ((1.0, math.e), (1.0, math.e ** 2), (0.5, 50.0)):
        a, b = gradient_n_integral(r, R, n), gradient_n_integral_closed(r, R, n)
        rel = abs(a - b) / b
        out.append(_check(f"cutoff gradient r={r:g} R={R:.6g}", rel, 1e-6, rel <= 1e-6,
                          "spectrum.gradient_n_integral"))

    for t in (4.0, 16.0):
        for fname, f in (("1", 1.0), ("cos", np.cos)):
            for r in (0.5, 1.0):
                tc = transfer_check(moebius_factor(t, n), f, r)
                out.append(_check(f"transfer t={t:g} f={fname} r={r:g}", tc.residual,
                                  cfg.tol_transfer, tc.residual <= cfg.tol_transfer,
                                  "blowup.transfer_check"))

    gth = np.linspace(0.1, np.pi, 200)
    g1 = green_profile(gth, 256, n)
    g2 = green_profile(gth, 512, n)
    drift = float(np.max(np.abs(g1 - g2)))
    out.append(_check("Green K->2K drift", drift, 1e-6, drift <= 1e-6 and np.all(g1 > 0),
                      "paneitz.green_profile", min_value=float(np.min(g1))))
    rows = [r for r, _ in out]
    prov = [p for _, p in out]
    failed = [r["check"] for r in rows if not r["passed"]]
    return rows, prov, {"passed": not failed, "failed": failed, "checks": len(rows),
                        "sphere_volume": sphere_volume(n)}


def run_lambda1(cfg, args):
    from .spectrum import lambda1_sphere
    u = parse_factor_spec(args.u, cfg.n)
    rep = lambda1_sphere(u, lmax=cfg.lmax, K=cfg.basis)
    row = {"u": args.u, "lambda1": rep.lambda1, "sector": rep.sector,
           "multiplicity": rep.multiplicity, "refinement_delta": rep.refinement_delta,
           "t_star": rep.t_star, "warning": rep.warning,
           "sector_minima": list(rep.sector_minima)}
    profile = {"theta": np.asarray(rep.profile.grid.theta, float),
               "f": np.asarray(rep.profile.values, float)}
    return [row], ["spectrum.lambda1_sphere"], {"profile": profile}


def run_counterexample(cfg, args):
    from .counterexample import (admissible_p_window, limit_lp_norm, sweep,
                                 volume_lower_bound)
    eps = _floats(args.eps)
    rows = [plain(r) for r in sweep(cfg.n, args.p, eps, with_lambda1=args.lambda1,
                                    lmax=cfg.lmax)]
    lo, hi = admissible_p_window(cfg.n)
    summary = {"p": args.p, "window": [lo, hi], "in_window": lo < args.p < hi,
               "volume_lower_bound": volume_lower_bound(cfg.n)}
    summary["limit_lp_norm"] = limit_lp_norm(cfg.n, args.p) if args.p < hi else math.inf
    return rows, ["counterexample.sweep"] * len(rows), summary


def run_volume_inequality(cfg, args):
    from .conformal import normalize_volume
    from .spectrum import lambda1_sphere, volume_inequality_probe
    u = normalize_volume(parse_factor_spec(args.u, cfg.n))
    lam = lambda1_sphere(u, lmax=cfg.lmax, K=cfg.basis).lambda1
    rows = []
    for r in _floats(args.r):
        for R in _floats(args.R):
            if r < R:
                rows.append(plain(volume_inequality_probe(u, r, R, lambda1=lam)))
    ratios = [row["normalized_ratio"] for row in rows]
    summary = {"lambda1": lam, "max_normalized_ratio": max(ratios),
               "bound": rows[0]["bound"] if rows else None,
               "bounded": all(row["normalized_ratio"] <= row["bound"] for row in rows)}
    return rows, ["spectrum.volume_inequality_probe"] * len(rows), summary


def run_hersch(cfg, args):
    from .hersch import hersch_bound_check
    u = parse_factor_spec(args.weight, cfg.n, normalize=True)
    rep = hersch_bound_check(u, lmax=cfg.lmax, K=cfg.basis)
    row = dict(plain(rep), weight=args.weight)
    return [row], ["hersch.hersch_bound_check"], {"bound_satisfied": rep.bound_satisfied}


def run_blowup(cfg, args):
    from .blowup import volume_capture
    from .conformal import moebius_factor, round_factor
    from .geometry import sphere_volume
    if args.family == "bubble":
        family = [moebius_factor(t, cfg.n) for t in _floats(args.t)]
    elif args.family == "round":
        family = [round_factor(cfg.n)]
    else:
        raise SpecError(f"unknown family {args.family!r}")
    rows = volume_capture(family, _floats(args.R))
    sigma = sphere_volume(cfg.n)
    for row in rows:
        row["relative_to_sigma"] = row["captured"] / sigma
    return rows, ["blowup.volume_capture"] * len(rows), {"sigma_n": sigma}


def run_greens(cfg, args):
    from .paneitz import green_paneitz
    rows = []
    for th in np.linspace(args.theta_min, np.pi, args.points):
        g = green_paneitz(float(th), K=cfg.K, n=cfg.n)
        g2 = green_paneitz(float(th), K=2 * cfg.K, n=cfg.n)
        rows.append({"theta": float(th), "green": g.value, "partial_sum": g.partial,
                     "tail": g.tail, "drift_2K": abs(g.value - g2.value)})
    summary = {"positive": all(r["green"] > 0 for r in rows),
               "max_drift_2K": max(r["drift_2K"] for r in rows)}
    return rows, ["paneitz.green_paneitz"] * len(rows), summary


COMMANDS = {
    "verify": (run_verify, {"check": "1", "value": "1", "tolerance": "1", "passed": "bool"},
               None),
    "lambda1": (run_lambda1, {"lambda1": "eigenvalue", "refinement_delta": "eigenvalue",
                              "t_star": "1"}, None),
    "counterexample": (run_counterexample, {"eps": "1", "volume": "volume", "min_u": "1",
                                            "lp_norm_q": "curvature*volume^(1/p)",
                                            "sup_q": "curvature", "lambda1": "eigenvalue"},
                       ("eps", ["lp_norm_q"], "log")),
    "volume-inequality": (run_volume_inequality,
                          {"r": "radian", "R": "radian", "v_r": "volume", "v_R": "volume",
                           "lhs": "volume^3", "normalized_ratio": "volume^3",
                           "bound": "volume^3"}, ("R", ["normalized_ratio"], "log")),
    "hersch": (run_hersch, {"lambda1": "eigenvalue", "quotient": "eigenvalue",
                            "quotient_limit": "eigenvalue", "t_star": "1", "com": "volume",
                            "log_ratio": "1"}, None),
    "blowup": (run_blowup, {"mu": "1", "R": "rescaled length", "captured": "volume",
                            "relative_to_sigma": "1"}, ("R", ["relative_to_sigma"], "lin")),
    "greens": (run_greens, {"theta": "radian", "green": "1/length^(n-4)",
                            "partial_sum": "1/length^(n-4)", "tail": "1/length^(n-4)",
                            "drift_2K": "1/length^(n-4)"}, ("theta", ["green"], "lin")),
}


def build_parser():
    p = argparse.ArgumentParser(prog="paneitzlab",
                                description="Spectral experiments with the Paneitz operator "
                                            "and conformal metrics on spheres.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="sphere dimension (default 5)")
    common.add_argument("--K", type=int, help="spectral truncation degree (default 128)")
    common.add_argument("--lmax", type=int, help="largest harmonic sector (default 8)")
    common.add_argument("--basis", type=int, help="radial basis size per sector (default 64)")
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", dest="formats",
                        help="comma-separated subset of csv,json,svg (default json)")
    common.add_argument("--config", help="key = value configuration file")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    v.add_argument("--perturb-b", dest="perturb_b", type=float, help=argparse.SUPPRESS)
    v.add_argument("--inject-perturbation", action="store_true",
                   help="test hook: perturb b_n by 1e-3 (must fail)")

    s = sub.add_parser("lambda1", parents=[common], help="first eigenvalue of g_u")
    s.add_argument("--u", default="round",
                   help="round | bubble:t | counterexample:eps | dumbbell:a | file:path")

    s = sub.add_parser("counterexample", parents=[common], help="sweep the collapsing family")
    s.add_argument("--p", type=float, default=1.3)
    s.add_argument("--eps", default="0.9,0.99,0.999,0.9999")
    s.add_argument("--lambda1", action="store_true", help="also compute lambda1 per row")

    s = sub.add_parser("volume-inequality", parents=[common], help="volume concentration probe")
    s.add_argument("--u", default="round")
    s.add_argument("--r", default="0.05,0.1,0.2")
    s.add_argument("--R", default="0.5,1,2,3")

    s = sub.add_parser("hersch", parents=[common], help="balanced Hersch bound")
    s.add_argument("--weight", default="round")

    s = sub.add_parser("blowup", parents=[common], help="volume capture along a family")
    s.add_argument("--family", default="bubble", choices=["bubble", "round"])
    s.add_argument("--t", default="4,16,64")
    s.add_argument("--R", default="1,10,100")

    s = sub.add_parser("greens", parents=[common], help="Green's function of P")
    s.add_argument("--points", type=int, default=200)
    s.add_argument("--theta-min", dest="theta_min", type=float, default=0.1)
    return p


def _columns(rows):
    cols = []
    for row in rows:
        for key, value in row.items():
            if key not in cols and not isinstance(value, (dict, list)):
                cols.append(key)
    return cols


def write_outputs(env, cfg, plot):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    name = env.command.replace("-", "_")
    written = []
    if "json" in cfg.formats:
        path = out / f"{name}.json"
        path.write_text(env.to_json(), encoding="utf-8")
        written.append(path)
    if "csv" in cfg.formats:
        units = COMMANDS[env.command][1]
        path = out / f"{name}.csv"
        path.write_text(to_csv(env.rows, _columns(env.rows), units, env.provenance),
                        encoding="utf-8")
        written.append(path)
    if "svg" in cfg.formats:
        svg = None
        if env.command == "lambda1":
            prof = env.summary["profile"]
            svg = svg_line_chart(prof["theta"], {"eigenfunction": prof["f"]},
                                 title="first eigenfunction profile", xlabel="theta",
                                 ylabel="f")
        elif plot is not None:
            xcol, ycols, scale = plot
            xs = [r[xcol] for r in env.rows]
            series = {c: [_num(r.get(c)) for r in env.rows] for c in ycols}
            svg = svg_line_chart(xs, series, title=env.command, xlabel=xcol,
                                 ylabel=", ".join(ycols), logy=scale == "log")
        if svg is not None:
            path = out / f"{name}.svg"
            path.write_text(svg, encoding="utf-8")
            written.append(path)
    return written


def _num(v):
    try:
        return float(v)
    except (TypeError, ValueError):
        return math.nan


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    overrides = {"n": args.n, "K": args.K, "lmax": args.lmax, "basis": args.basis,
                 "out": args.out, "formats": args.formats}
    if args.command == "verify":
        perturb = getattr(args, "perturb_b", None)
        if args.inject_perturbation:
            perturb = 1e-3
        overrides["perturb_b"] = perturb
    try:
        cfg = load_config(args.config, overrides)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    runner, _, plot = COMMANDS[args.command]
    start = time.perf_counter()
    try:
        rows, provenance, summary = runner(cfg, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"{args.command} failed: {exc}", file=sys.stderr)
        return 1
    env = ResultEnvelope(command=args.command, config=cfg.snapshot(), rows=plain(rows),
                         version=__version__, provenance=provenance, summary=plain(summary),
                         timestamp=stamp(start, time.perf_counter()))
    written = write_outputs(env, cfg, plot)
    status = 0
    if args.command == "verify" and not env.summary["passed"]:
        status = 1
        print("verify: FAILED " + ", ".join(env.summary["failed"]))
    else:
        print(f"{args.command}: {len(env.rows)} rows -> " + ", ".join(str(p) for p in written))
    return status


if __name__ == "__main__":
    sys.exit(main())
