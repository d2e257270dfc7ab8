"""Command-line entry point ``pafluid``.

Exit codes: 0 ok, 2 configuration error, 3 numeric error, 4 model error.
The default output directory is read from ``PAFLUID_OUTPUT_DIR``.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time

import numpy as np

from .dynamics import (InitialConfiguration, bounds_check, default_K as phi_default_K,
                       integrate_phi)
from .equilibrium import a_sequence, check_mass_identities, solve, solve_s_star
from .errors import PaFluidError
from .experiments import convergence_study
from .io import (OUTPUT_ENV, RunConfig, RunManifest, parse_config, parse_grid, read_init_csv,
                 read_manifest, write_json, write_outputs)
from .spectral import (adjoint_eigenvector, build_operator, dominant_eigenpair,
                       lambda_from_scalar_equation, pairing_defect)
from .stochastic import simulate_replicas

log = logging.getLogger("pafluid")


def _init_from(cfg: RunConfig) -> InitialConfiguration:
    if cfg.init == "small":
        return InitialConfiguration.small()
    return InitialConfiguration(read_init_csv(cfg.init[4:]))


def cmd_fixed_point(cfg: RunConfig, manifest: RunManifest) -> dict:
    params = cfg.params()
    sol = solve(params, cfg.tol, cfg.kmax)
    mass, size = check_mass_identities(sol, params)
    manifest.K = sol.K
    manifest.tolerances = {"tol": cfg.tol}
    rows = ((k, a) for k, a in enumerate(sol.a, start=1))
    return {"rows": rows, "extra": {"s_star": sol.s_star, "K": sol.K, "tail_bound": sol.tail_bound,
                                    "size_tail_bound": sol.size_tail_bound,
                                    "mass_residual": mass, "size_residual": size}}


def cmd_spectral(cfg: RunConfig, manifest: RunManifest) -> dict:
    params = cfg.params()
    K = cfg.kmax or 400
    s_star = solve_s_star(params, cfg.tol)
    lam_eq = lambda_from_scalar_equation(params, cfg.tol)
    op = build_operator(params, K, tail=cfg.tail)
    pair = dominant_eigenpair(op, params)
    adj = adjoint_eigenvector(params, s_star, K)
    manifest.K = K
    manifest.tolerances = {"tol": cfg.tol}
    a = a_sequence(params, s_star, K).a
    m = min(20, a.size, K)
    direction = np.max(np.abs(pair.x[:m] / pair.x[0] - a[:m] / a[0]) / (a[:m] / a[0]))
    return {"rows": None, "extra": {
        "s_star": s_star, "lambda_scalar_equation": lam_eq, "lambda_power_iteration": pair.lam,
        "power_iterations": pair.iterations, "eigen_residual": pair.residual,
        "boundary_residual": pair.boundary_residual, "eigenvector_direction_error_k20": float(direction),
        "adjoint_max_recursion_residual": float(adj.recursion_residuals.max()),
        "adjoint_min_entry": float(adj.x_star.min()), "adjoint_growth_ok": adj.growth_ok,
        "pairing_defect": pairing_defect(op, adj.x_star, pair.x, s_star), "tail": cfg.tail}}


def cmd_ode(cfg: RunConfig, manifest: RunManifest) -> dict:
    params = cfg.params()
    init = _init_from(cfg)
    s_star = solve_s_star(params, cfg.tol)
    K = cfg.kmax or max(phi_default_K(params, s_star), init.c.size)
    t0 = 0.0 if init.kind == "large" else (cfg.t0 if cfg.t0 is not None else 0.01)
    t_eval = np.linspace(t0, max(cfg.t_end, t0), cfg.points)
    traj = integrate_phi(init, params, max(cfg.t_end, t0), K=K, t0=t0, t_eval=t_eval,
                         rtol=cfg.rtol, tail=cfg.tail, s_star=s_star)
    report = bounds_check(traj, params, init, s_star=s_star)
    manifest.K = K
    manifest.tolerances = {"tol": cfg.tol, "rtol": cfg.rtol}
    manifest.audit = report.to_dict()
    rows = ((t, k, traj.X[i, k - 1]) for i, t in enumerate(traj.t) for k in range(1, K + 1))
    return {"rows": rows, "extra": {"s_star": s_star, "max_tail_register": traj.max_tail,
                                    "init_kind": init.kind, "steps": vars(traj.stats)}}


def cmd_simulate(cfg: RunConfig, manifest: RunManifest) -> dict:
    params = cfg.params()
    init = _init_from(cfg)
    grid = parse_grid(cfg.grid)
    paths = simulate_replicas(init, params, cfg.n, grid, cfg.replicas, cfg.seed,
                              k_record=cfg.k_record, audit=cfg.audit)
    manifest.seeds = {"root": cfg.seed, "streams": "SeedSequence(root).spawn(replicas)"}
    manifest.audit = {"replicas": [p.audit for p in paths]}
    rows = ((r, t, k, p.X[i, k - 1]) for r, p in enumerate(paths) for i, t in enumerate(p.t)
            for k in range(1, p.k_record + 1))
    ok = all(a["units"] and a["total"] and a["nonnegative"] and a["step_checks_failed"] == 0
             for a in manifest.audit["replicas"])
    return {"rows": rows, "extra": {"audit_ok": ok}}


def cmd_study(cfg: RunConfig, manifest: RunManifest) -> dict:
    params = cfg.params()
    table = convergence_study(params, cfg.ns, cfg.replicas, cfg.t_end, cfg.k_cut, cfg.seed,
                              cfg.grid_points)
    manifest.seeds = {"root": cfg.seed, "streams": "SeedSequence([root, n]) -> spawn(replicas)"}
    d = table.to_dict()
    if table.in_band is False:
        log.warning("fitted slope %.3f outside the soft band %s", table.slope, table.band)
    return {"rows": table.rows(), "extra": d}


COMMANDS = {
    "fixed-point": cmd_fixed_point,
    "spectral": cmd_spectral,
    "ode": cmd_ode,
    "simulate": cmd_simulate,
    "study": cmd_study,
}


def _add_common(sp):
    sp.add_argument("--config", help="key=value config file with [model]/[numerics]/[run] sections")
    sp.add_argument("--from-manifest", help="replay the configuration stored in a run manifest")
    sp.add_argument("--model", choices=("graph", "urn"))
    sp.add_argument("--p", type=float)
    sp.add_argument("--kappa", type=float)
    sp.add_argument("--weight-table", dest="weight_table", help="comma-separated w(1),w(2),...")
    sp.add_argument("--tol", type=float)
    sp.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or ./pafluid_out)")
    sp.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pafluid", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("fixed-point", help="s* and the limiting proportions a_k")
    _add_common(sp)
    sp.add_argument("--kmax", type=int)

    sp = sub.add_parser("spectral", help="eigenvalue checks of the truncated generator")
    _add_common(sp)
    sp.add_argument("--kmax", type=int)
    sp.add_argument("--tail", choices=("open", "absorbing"))

    sp = sub.add_parser("ode", help="integrate the truncated nonlinear system")
    _add_common(sp)
    sp.add_argument("--init", help="small | csv:FILE")
    sp.add_argument("--t-end", dest="t_end", type=float)
    sp.add_argument("--t0", type=float, help="seed time for small configurations (default 0.01)")
    sp.add_argument("--kmax", type=int)
    sp.add_argument("--rtol", type=float)
    sp.add_argument("--tail", choices=("open", "absorbing"))
    sp.add_argument("--points", type=int, help="number of output times")

    sp = sub.add_parser("simulate", help="Monte-Carlo paths of the degree-count chain")
    _add_common(sp)
    sp.add_argument("--n", type=int)
    sp.add_argument("--replicas", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--grid", help="start:stop:step in units of n steps")
    sp.add_argument("--init", help="small | csv:FILE")
    sp.add_argument("--k-record", dest="k_record", type=int)
    sp.add_argument("--audit", action="store_const", const=True, default=None,
                    help="check exact count identities after every step")

    sp = sub.add_parser("study", help="deviation of simulated paths from the limit versus n")
    _add_common(sp)
    sp.add_argument("--ns", help="comma-separated increasing n values, e.g. 1e3,1e4,1e5")
    sp.add_argument("--replicas", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--t-end", dest="t_end", type=float)
    sp.add_argument("--k-cut", dest="k_cut", type=int)
    sp.add_argument("--grid-points", dest="grid_points", type=int)
    return ap


_NOT_SETTINGS = {"command", "config", "from_manifest", "verbose"}


def run(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        base = None
        if args.from_manifest:
            m = read_manifest(args.from_manifest)
            if m.command != args.command:
                print(f"pafluid: manifest was written by '{m.command}', not '{args.command}'",
                      file=sys.stderr)
                return 2
            base = {k: v for k, v in m.config.items() if k != "out"}
        overrides = {k: v for k, v in vars(args).items() if k not in _NOT_SETTINGS}
        cfg = parse_config(args.config, overrides, base)
        manifest = RunManifest(command=args.command, config=cfg.to_dict())
        t = time.perf_counter()
        res = COMMANDS[args.command](cfg, manifest)
        manifest.wall_clock = time.perf_counter() - t
        out = cfg.output_dir()
        if res["rows"] is None:
            doc = manifest.to_dict()
            doc["results"] = res["extra"]
            paths = {"json": str(write_json(out / f"{args.command.replace('-', '_')}.json", doc))}
        else:
            paths = write_outputs(args.command, res["rows"], manifest, out, res["extra"])
        for v in paths.values():
            print(v)
        return 0
    except PaFluidError as e:
        print(f"pafluid: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
