"""Command-line interface.

Exit codes: 0 when every requested check passes, 1 when a check fails, 2 on a
configuration or usage error.  Structured results go to stdout as JSON lines
unless an output path is given.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigError, SurfdynError
from .experiments import ExperimentConfig, _jsonable, run_full_report, run_measure_histogram, start_points
from .random_walk import WalkWord

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def packaged_config(name: str) -> Path:
    return Path(str(resources.files("surfdyn") / "data" / f"{name}.yaml"))


def load_config(ref: str) -> ExperimentConfig:
    """A config path, or the name of a packaged config such as ``torus_golden``."""
    path = Path(ref)
    if not path.exists():
        packaged = packaged_config(ref)
        if not packaged.exists():
            raise ConfigError(f"no config file {ref!r} and no packaged config of that name")
        path = packaged
    return ExperimentConfig.load(path)


class Emitter:
    def __init__(self, path=None):
        self.fh = open(path, "w") if path else sys.stdout

    def __call__(self, record: dict):
        self.fh.write(json.dumps(_jsonable(record), sort_keys=True) + "\n")

    def close(self):
        if self.fh is not sys.stdout:
            self.fh.close()


def _status(ok: bool) -> int:
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# subcommands


def cmd_lyapunov(args) -> int:
    from .cocycle import lyapunov_exponents, oseledets_splitting
    cfg = load_config(args.config)
    model, measure = cfg.make_model(), cfg.make_measure()
    seeds = args.seeds if args.seeds else cfg.seeds
    n = args.n or cfg.n_steps
    emit = Emitter(args.out)
    ok = True
    for seed in seeds:
        x0 = start_points(cfg, model, 1, seed)[0]
        res = lyapunov_exponents(model, measure, x0, seed, n, cfg.burn_in)
        angles = []
        for i in range(args.angle_samples):
            xi = start_points(cfg, model, 1, seed + 7919 * (i + 1))[0]
            angles.append(oseledets_splitting(model, WalkWord(measure, seed=seed + i), xi,
                                              200, 200).angle)
        emit({"seed": seed, "n": n, "exponents": res.exponents, "stderr": res.stderr,
              "plus_minus": res.plus_minus, "plus_minus_stderr": res.plus_minus_stderr,
              "converged": not res.nonconvergence_flag,
              "angle_stats": {"min": min(angles), "median": float(np.median(angles)),
                              "max": max(angles)} if angles else None})
        ok &= not res.nonconvergence_flag
    emit.close()
    return _status(ok)


def _leaf_rows(seq, graph):
    pts = graph.points()
    chart = seq.chart(graph.index)
    amb = np.array([chart.from_chart(p) for p in pts])
    param = graph.grid
    if param.shape[1] == 1:
        order = np.argsort(param[:, 0])
        param, amb = param[order], amb[order]
        steps = np.linalg.norm(np.diff(amb, axis=0), axis=1)
        arc = np.concatenate([[0.0], np.cumsum(steps)])
        arc -= np.interp(0.0, param[:, 0], arc)
    else:
        arc = np.full(len(param), np.nan)
    for p, s, a in zip(param, arc, amb):
        yield [*p.tolist(), s, *a.tolist()]


def cmd_oseledets(args) -> int:
    from .charts import graph_transform, orbit_charts
    from .cocycle import oseledets_splitting
    cfg = load_config(args.config)
    model, measure = cfg.make_model(), cfg.make_measure()
    emit = Emitter(args.out)
    ok = True
    for i in range(args.samples):
        seed = cfg.seeds[0] + i
        x = start_points(cfg, model, 1, seed)[0]
        fr = oseledets_splitting(model, WalkWord(measure, seed=seed), x, args.window, args.window)
        res = max(fr.residual_u, fr.residual_s)
        emit({"seed": seed, "angle": fr.angle, "residual": res, "tolerance": args.tol,
              "lambda_plus": fr.lambda_plus, "lambda_minus": fr.lambda_minus, "pass": res < args.tol})
        ok &= res < args.tol
    if args.leaf_csv:
        seed = cfg.seeds[0]
        x = start_points(cfg, model, 1, seed)[0]
        seq = orbit_charts(model, WalkWord(measure, seed=seed), x, 30)
        with open(args.leaf_csv, "w", newline="") as fh:
            w = csv.writer(fh)
            for tag in ("u", "s"):
                g = graph_transform(seq, 0, tag, args.leaf_radius, 20)
                k = g.grid.shape[1]
                if tag == "u":
                    w.writerow(["leaf", *[f"param_{i}" for i in range(k)], "arc_length",
                                *[f"x{i}" for i in range(model.dim)]])
                for row in _leaf_rows(seq, g):
                    w.writerow([tag, *row])
                ok &= g.max_slope() <= 1 / 3 + 1e-12
    emit.close()
    return _status(ok)


def cmd_flow_check(args) -> int:
    from .charts import orbit_charts
    from .suspension import RoofSequence, flow_law_check
    cfg = load_config(args.config)
    model, measure = cfg.make_model(), cfg.make_measure()
    seed = cfg.seeds[0]
    x = start_points(cfg, model, 1, seed)[0]
    emit = Emitter(args.out)
    std = flow_law_check(model, measure, args.pairs, seed, args.t_max, x=x)
    emit({"flow": "standard", "seed": seed, "tolerance": 1e-9, **std})
    seq = orbit_charts(model, WalkWord(measure, seed=seed), x, 40)
    tc = flow_law_check(model, measure, args.pairs, seed, args.t_max, tau=RoofSequence(seq), x=x)
    emit({"flow": "time_changed", "seed": seed, "tolerance": 1e-9, **tc})
    emit.close()
    return _status(std["ok"] and tc["ok"])


def cmd_jets_test(args) -> int:
    from .jets import validation_suite
    emit = Emitter(args.out)
    recs = validation_suite(args.seed)
    for r in recs:
        emit({"seed": args.seed, **r})
    emit.close()
    return _status(all(r["ok"] for r in recs))


def cmd_cohomology(args) -> int:
    from .cohomology import (LatticeAction, boundary_measure_sample, classify_isometry,
                             furstenberg_vector, mass)
    cfg = load_config(args.config)
    model, measure = cfg.make_model(), cfg.make_measure()
    emit = Emitter(args.out)
    ok = True
    if args.action == "classify":
        words = args.words or list(measure.atoms)
        act = LatticeAction.from_model(model, words)
        for w in words:
            M = act.generators[w]
            c = classify_isometry(M, act.gram)
            emit({"word": w, "kind": c.kind, "spectral_radius": c.spectral_radius,
                  "order": c.order, "isometry": True, "matrix": M.astype(int)})
            ok &= c.kind != "undecided"
    elif args.action == "furstenberg":
        act = LatticeAction.from_model(model, list(measure.atoms))
        pc = furstenberg_vector(act, WalkWord(measure, seed=args.seed), n=args.n)
        emit({"seed": args.seed, "vector": pc.vector, "self_pairing": pc.self_pairing,
              "converged": pc.converged, "n_used": pc.n_used, "cauchy": pc.cauchy,
              "mass_of_kappa0": mass(act.kappa0, act), "tolerance": 1e-9})
        ok = pc.converged
    else:
        act = LatticeAction.from_model(model, list(measure.atoms))
        bs = boundary_measure_sample(act, measure, args.samples, args.n, args.seed)
        emit({"seed": args.seed, **bs.record()})
    emit.close()
    return _status(ok)


CHECKS = ("even", "rep", "-2", "null", "isom", "parabolic", "appendix")


def cmd_lattice_verify(args) -> int:
    from . import lattice as lat
    try:
        gram = json.loads(args.gram)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--gram is not a JSON matrix: {exc}") from None
    L = lat.IntegralLattice(gram)
    emit = Emitter(args.out)
    checks = args.check or ["appendix"]
    ok = True
    for chk in checks:
        if chk == "appendix":
            for name, res in lat.verify_appendix(gram, args.bound):
                gating = name != "even"  # evenness is reported, not required
                emit({"check": name, "gating": gating, **res.record()})
                ok &= res.ok or not gating
            continue
        if chk == "even":
            res = lat.is_even(L)
        elif chk == "rep":
            if args.value is None:
                raise ConfigError("--check rep needs --value")
            res = lat.represents(L, args.value, args.bound)
        elif chk == "-2":
            res = lat.weyl_trivial(L, args.bound)
        elif chk == "null":
            res = lat.null_vectors(L, args.bound)
        elif chk == "isom":
            rep = lat.isometry_report(L, args.bound)
            res = lat.CheckResult(len(rep.hyperbolic) >= 2 and rep.distinct_axes >= 2,
                                  f"{len(rep.hyperbolic)} hyperbolic, {rep.distinct_axes} distinct axes",
                                  None, "", rep.record())
        else:
            res = lat.parabolic_absence(L, args.bound)
        emit({"check": chk, "bound": args.bound, **res.record()})
        ok &= res.ok
    emit.close()
    return _status(ok)


def cmd_measure_hist(args) -> int:
    cfg = load_config(args.config)
    h = run_measure_histogram(cfg, args.samples)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["pair", "i", "j", "edge_a", "edge_b", "count"])
            w.writerows(h.rows())
    emit = Emitter(args.out)
    emit({"seed": cfg.seeds[0], "total": h.total, "stationarity_tv": h.stationarity_tv,
          "tolerance": 1.5 * h.noise_tv, "noise_tv": h.noise_tv, "escapes": h.escapes,
          "occupied_cells": h.occupied_cells(), "chi_square": h.chi_square(),
          "pass": h.stationary, **h.scale})
    emit.close()
    return _status(h.stationary)


def cmd_report(args) -> int:
    cfg = load_config(args.config)
    if args.workers is not None:
        cfg.workers = args.workers
    out = run_full_report(cfg, args.out_dir)
    print((Path(args.out_dir or cfg.output.get("dir", "report")) / "manifest.json"))
    return out["exit_code"]


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="surfdyn", description="Random dynamics on complex surfaces: "
                                "numerical experiments and exact verifiers.")
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(sp, default="torus_golden"):
        sp.add_argument("--config", default=default,
                        help="config file, or a packaged config name (torus_golden, torus_pair, "
                             "wehler_golden)")
        sp.add_argument("--out", help="write JSON lines here instead of stdout")
        return sp

    sp = with_config(sub.add_parser("lyapunov", help="Lyapunov exponents per seed"))
    sp.add_argument("--seeds", type=int, nargs="*")
    sp.add_argument("--n", type=int)
    sp.add_argument("--angle-samples", type=int, default=3)
    sp.set_defaults(func=cmd_lyapunov)

    sp = with_config(sub.add_parser("oseledets", help="splitting residuals and leaf dumps"))
    sp.add_argument("--samples", type=int, default=5)
    sp.add_argument("--window", type=int, default=400)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--leaf-csv")
    sp.add_argument("--leaf-radius", type=float, default=1e-3)
    sp.set_defaults(func=cmd_oseledets)

    sp = with_config(sub.add_parser("flow-check", help="suspension flow laws"))
    sp.add_argument("--pairs", type=int, default=1000)
    sp.add_argument("--t-max", type=float, default=3.0)
    sp.set_defaults(func=cmd_flow_check)

    sp = sub.add_parser("jets-test", help="jet algebra validation suite")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_jets_test)

    sp = with_config(sub.add_parser("cohomology", help="action on cohomology"), "wehler_golden")
    sp.add_argument("action", choices=["classify", "furstenberg", "boundary-sample"])
    sp.add_argument("--words", nargs="*")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--n", type=int, default=256)
    sp.add_argument("--samples", type=int, default=200)
    sp.set_defaults(func=cmd_cohomology)

    sp = sub.add_parser("lattice-verify", help="exact checks on an integral lattice")
    sp.add_argument("--gram", required=True, help='JSON matrix, e.g. "[[7,0],[0,-14]]"')
    sp.add_argument("--bound", type=int, default=50)
    sp.add_argument("--check", action="append", choices=CHECKS)
    sp.add_argument("--value", type=int, help="value for --check rep")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_lattice_verify)

    sp = with_config(sub.add_parser("measure-hist", help="empirical stationary measure"))
    sp.add_argument("--samples", type=int)
    sp.add_argument("--csv")
    sp.set_defaults(func=cmd_measure_hist)

    sp = sub.add_parser("report", help="full report bundle")
    sp.add_argument("--config", default="torus_golden")
    sp.add_argument("--out-dir")
    sp.add_argument("--workers", type=int)
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SurfdynError as exc:
        print(f"check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
