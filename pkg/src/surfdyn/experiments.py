"""Reproducible experiments: configs, stationary-measure histograms, local dimension, reports.

A run is driven by an :class:`ExperimentConfig`.  Every output file is a pure
function of the config (no timestamps or timings), so equal configs give
byte-identical outputs, with or without worker processes.
"""

from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import metadata
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError, InsufficientDataError, SurfdynError
from .models import load_model
from .models.loader import read_structured
from .random_walk import FiniteMeasure, WalkWord, worker_seed

STAGES = ("exponents", "splitting", "roof", "birkhoff", "histogram", "dimension", "cohomology")

DEFAULT_THRESHOLDS = {"finite": 0.1, "curve": [0.8, 1.2], "volume": [3.7, 4.3]}


def code_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0.0.0+local"


@dataclass
class ExperimentConfig:
    model: dict
    measure: dict
    seeds: list = field(default_factory=lambda: [0])
    n_steps: int = 10_000
    burn_in: int = 1000
    grid: int = 128
    scales: list = field(default_factory=lambda: [0.05, 0.1, 0.2, 0.4])
    start: list | None = None
    stages: list = field(default_factory=list)
    thresholds: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    exponents: dict = field(default_factory=dict)
    histogram: dict = field(default_factory=dict)
    dimension: dict = field(default_factory=dict)
    birkhoff: dict = field(default_factory=dict)
    splitting: dict = field(default_factory=dict)
    roof: dict = field(default_factory=dict)
    cohomology: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    workers: int = 1

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a mapping")
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("model", "measure"):
            if key not in data:
                raise ConfigError(f"config needs a '{key}' entry")
        d = dict(data)
        if isinstance(d["model"], str):
            path = Path(d["model"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            d["model"] = read_structured(path)
        seeds = d.get("seeds", [0])
        if isinstance(seeds, dict):
            seeds = list(range(int(seeds.get("start", 0)),
                               int(seeds.get("start", 0)) + int(seeds["count"])))
        elif isinstance(seeds, int):
            seeds = [seeds]
        d["seeds"] = [int(s) for s in seeds]
        cfg = cls(**d)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = read_structured(path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(data, path.parent)

    def validate(self):
        if not isinstance(self.measure, dict) or "atoms" not in self.measure:
            raise ConfigError("measure needs 'atoms'")
        bad = [s for s in self.stages if s not in STAGES]
        if bad:
            raise ConfigError(f"unknown stages {bad}; choose from {list(STAGES)}")
        if self.n_steps < 1 or self.burn_in < 0 or self.grid < 2:
            raise ConfigError("n_steps >= 1, burn_in >= 0 and grid >= 2 required")
        if not self.seeds:
            raise ConfigError("at least one seed required")
        if len(self.scales) and any(s <= 0 for s in self.scales):
            raise ConfigError("scales must be positive")
        try:
            self.make_measure()
            model = self.make_model()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        missing = [a for a in self.measure["atoms"] if a not in model.names()
                   and not _known_atom(model, a)]
        if missing:
            raise ConfigError(f"measure atoms not generated by the model: {missing}")

    def make_model(self):
        return load_model(self.model)

    def make_measure(self) -> FiniteMeasure:
        atoms = [str(a) for a in self.measure["atoms"]]
        w = self.measure.get("weights")
        return FiniteMeasure.uniform(atoms) if w is None else FiniteMeasure(tuple(atoms), tuple(w))

    def to_dict(self) -> dict:
        """Everything that determines the results; ``workers`` is left out, since
        parallel and serial runs produce identical output."""
        d = asdict(self)
        d.pop("workers")
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _known_atom(model, name) -> bool:
    try:
        model.jacobian(name, model.sample_points(np.random.default_rng(0), 1)[0])
        return True
    except (KeyError, SurfdynError):
        return False


def start_points(cfg: ExperimentConfig, model, n: int, seed: int) -> np.ndarray:
    if cfg.start is not None:
        return np.tile(np.asarray(cfg.start, dtype=float), (n, 1))
    return np.asarray(model.sample_points(np.random.default_rng(seed), n), dtype=float)


# ---------------------------------------------------------------------------
# sampling the stationary measure


def sample_orbits(model, measure: FiniteMeasure, x0: np.ndarray, seed: int, n_per_walker: int,
                  burn_in: int = 1000, thin: int = 1, denominator: int | None = None):
    """Post-burn-in orbit points of independent walkers, walker ``w`` on word ``worker_seed(seed, w)``.

    Returns ``(points, escapes)``: points have shape ``(n_per_walker, walkers, d)``.
    Walkers that leave the model's domain are frozen and counted.  With
    ``denominator = q`` on a torus model the orbit of a point of ``(1/q) Z^4``
    is computed exactly in integers mod ``q``; floating point would drift off
    the finite orbit at the rate of the largest exponent.
    """
    if denominator is not None:
        return _sample_rational(model, measure, x0, seed, n_per_walker, burn_in, thin,
                                int(denominator)), 0
    from .errors import ChartEscapeError, FiberDegeneracyError
    W = len(x0)
    words = [WalkWord(measure, seed=worker_seed(seed, w)) for w in range(W)]
    total = burn_in + n_per_walker * thin
    syms = np.array([w.symbols(0, total) for w in words])
    pts = np.array(x0, dtype=float)
    alive = np.ones(W, dtype=bool)
    out = np.empty((n_per_walker, W, pts.shape[1]))
    escapes = 0
    for t in range(total):
        for a, name in enumerate(measure.atoms):
            rows = np.flatnonzero((syms[:, t] == a) & alive)
            if not len(rows):
                continue
            try:
                pts[rows] = model.apply(name, pts[rows])
            except (ChartEscapeError, FiberDegeneracyError):
                for r in rows:
                    try:
                        pts[r] = model.apply(name, pts[r])
                    except (ChartEscapeError, FiberDegeneracyError):
                        alive[r] = False
                        escapes += 1
        k = t - burn_in + 1
        if k > 0 and k % thin == 0:
            out[k // thin - 1] = pts
    return out[:, alive], escapes


def _sample_rational(model, measure, x0, seed, n_per_walker, burn_in, thin, q):
    if not getattr(model, "constant_tangent", False):
        raise ConfigError("exact rational orbits need a torus model")
    num = np.asarray(x0, dtype=float) * q
    if np.max(np.abs(num - np.rint(num))) > 1e-9:
        raise ConfigError(f"start point is not in (1/{q}) Z^4")
    pts = np.rint(num).astype(np.int64) % q
    maps = []
    for name in measure.atoms:
        shift = model.apply(name, np.zeros(4)) * q
        if np.max(np.abs(shift - np.rint(shift))) > 1e-9:
            raise ConfigError(f"translation of {name!r} is not in (1/{q}) Z^4")
        maps.append((model.lattice_matrix(name).astype(np.int64), np.rint(shift).astype(np.int64)))
    W = len(pts)
    syms = np.array([WalkWord(measure, seed=worker_seed(seed, w)).symbols(0, burn_in + n_per_walker * thin)
                     for w in range(W)])
    out = np.empty((n_per_walker, W, 4))
    for t in range(syms.shape[1]):
        for a, (L, c) in enumerate(maps):
            rows = syms[:, t] == a
            pts[rows] = (pts[rows] @ L.T + c) % q
        k = t - burn_in + 1
        if k > 0 and k % thin == 0:
            out[k // thin - 1] = pts / q
    return out


def _pairs(d: int) -> list[tuple[int, int]]:
    return [(0, 1), (2, 3)] if d == 4 else [(i, i + 1) for i in range(d - 1)]


@dataclass
class MeasureHistogram:
    pairs: list
    edges: list  # per pair: (edges_a, edges_b)
    counts: list  # per pair: (grid, grid) int arrays
    total: int
    stationarity_tv: float
    noise_tv: float
    escapes: int = 0
    scale: dict = field(default_factory=dict)

    @property
    def stationary(self) -> bool:
        return self.stationarity_tv <= 1.5 * self.noise_tv

    def chi_square(self) -> list[dict]:
        """Uniformity statistic per pair: ``z = (chi2 - df) / sqrt(2 df)``.

        ``|z| <= 3`` is the uniformity criterion.  It presumes roughly
        independent samples, which is why histograms record every ``thin``-th step.
        """
        out = []
        for p, c in zip(self.pairs, self.counts):
            e = self.total / c.size
            chi2 = float(((c - e) ** 2).sum() / e)
            df = c.size - 1
            out.append({"pair": p, "chi2": chi2, "df": df, "z": float((chi2 - df) / np.sqrt(2 * df))})
        return out

    def occupied_cells(self) -> list[int]:
        return [int((c > 0).sum()) for c in self.counts]

    def rows(self):
        for p, (ea, eb), c in zip(self.pairs, self.edges, self.counts):
            for i in range(c.shape[0]):
                for j in range(c.shape[1]):
                    if c[i, j]:
                        yield (f"{p[0]}-{p[1]}", i, j, float(ea[i]), float(eb[j]), int(c[i, j]))


def _hist(points, pairs, edges, weights=None):
    return [np.histogram2d(points[:, a], points[:, b], bins=[ea, eb], weights=weights)[0]
            for (a, b), (ea, eb) in zip(pairs, edges)]


def _tv(h1, h2) -> float:
    return float(max(0.5 * np.abs(a / a.sum() - b / b.sum()).sum() for a, b in zip(h1, h2)))


def histogram_from_samples(model, measure: FiniteMeasure, samples: np.ndarray, grid: int,
                           bounds=None, escapes: int = 0) -> MeasureHistogram:
    """2-D marginal histograms of ``samples`` (shape (steps, walkers, d)) with a stationarity check.

    The stationarity residual is the total-variation distance between the
    sample histogram and the mixture ``sum_i w_i (f_i)_* h``; the noise
    reference is the distance between the histograms of two disjoint halves
    of the walkers.
    """
    steps, W, d = samples.shape
    if W < 2:
        raise InsufficientDataError("need at least two walkers")
    X = samples.reshape(-1, d)
    pairs = _pairs(d)
    if bounds is None:
        lo, hi = X.min(axis=0), X.max(axis=0)
        pad = 1e-9 * np.maximum(hi - lo, 1.0)
        bounds = list(zip(lo - pad, hi + pad))
    edges = [(np.linspace(*bounds[a], grid + 1), np.linspace(*bounds[b], grid + 1))
             for a, b in pairs]
    h = _hist(X, pairs, edges)
    mix = [np.zeros_like(c) for c in h]
    for name, w in zip(measure.atoms, measure.weights):
        img = model.apply(name, X)
        for m, c in zip(mix, _hist(img, pairs, edges)):
            m += w * c
    half = W // 2
    h1 = _hist(samples[:, :half].reshape(-1, d), pairs, edges)
    h2 = _hist(samples[:, half:].reshape(-1, d), pairs, edges)
    return MeasureHistogram(pairs, edges, [c.astype(int) for c in h], len(X), _tv(h, mix),
                            _tv(h1, h2), escapes, {"grid": grid, "bounds": [list(map(float, b)) for b in bounds]})


def run_measure_histogram(cfg: ExperimentConfig, n_samples: int | None = None,
                          seed: int | None = None) -> MeasureHistogram:
    """Empirical stationary measure from the config's model and measure."""
    model = cfg.make_model()
    measure = cfg.make_measure()
    opts = cfg.histogram
    n_samples = int(opts.get("samples", 100_000) if n_samples is None else n_samples)
    walkers = int(opts.get("walkers", 1000))
    thin = int(opts.get("thin", 5))
    seed = cfg.seeds[0] if seed is None else seed
    x0 = start_points(cfg, model, walkers, seed)
    per = max(1, n_samples // walkers)
    samples, esc = sample_orbits(model, measure, x0, seed, per, cfg.burn_in, thin,
                                 opts.get("denominator"))
    bounds = [(0.0, 1.0)] * 4 if getattr(model, "constant_tangent", False) else None
    return histogram_from_samples(model, measure, samples, cfg.grid, bounds, esc)


# ---------------------------------------------------------------------------
# local dimension


@dataclass
class DimensionEstimate:
    per_base: np.ndarray
    pooled: float
    median: float
    band: tuple
    label: str
    nearest: str
    scales: list
    heuristic: bool = True

    def record(self) -> dict:
        return {"pooled_slope": self.pooled, "median_per_base": self.median,
                "band95": list(self.band), "label": self.label, "nearest": self.nearest,
                "scales": list(self.scales), "n_base": int(len(self.per_base)),
                "note": "heuristic classification; no theorem is asserted"}


def classify_dimension(d: float, thresholds=None) -> tuple[str, str]:
    t = {**DEFAULT_THRESHOLDS, **(thresholds or {})}
    alts = {"finitely_supported": 0.0, "curve": 1.0, "absolutely_continuous": 4.0}
    nearest = min(alts, key=lambda k: abs(alts[k] - d))
    if d < t["finite"]:
        return "finitely_supported", nearest
    if t["curve"][0] <= d <= t["curve"][1]:
        return "curve", nearest
    if t["volume"][0] <= d <= t["volume"][1]:
        return "absolutely_continuous", nearest
    return "unclassified", nearest


def local_dimension_estimate(samples, scales, base_points: int = 200, boxsize=None,
                             seed: int = 0, thresholds=None, min_samples: int = 100_000,
                             n_boot: int = 200) -> DimensionEstimate:
    """Slope of ``log N(B(x, r))`` against ``log r`` over the given scales.

    ``N`` counts samples within distance ``r`` of a base point drawn from the
    samples (the base point itself excluded).  ``pooled`` is the slope of the
    log of the counts summed over base points (a correlation-integral
    estimate); ``per_base`` are the individual slopes where all counts are
    positive.  ``band`` is a bootstrap 95% interval for ``pooled`` over base points.
    """
    X = np.asarray(samples, dtype=float)
    scales = sorted(float(s) for s in scales)
    if len(X) < min_samples:
        raise InsufficientDataError(f"{len(X)} samples, need at least {min_samples}")
    if len(scales) < 4 or scales[-1] / scales[0] < 4:
        raise InsufficientDataError("need at least 4 scales spanning a factor of 4")
    rng = np.random.default_rng(seed)
    tree = cKDTree(X, boxsize=boxsize)
    idx = rng.choice(len(X), size=min(base_points, len(X)), replace=False)
    counts = np.column_stack([tree.query_ball_point(X[idx], r, return_length=True) - 1
                              for r in scales]).astype(float)
    logr = np.log(scales)

    def pooled_slope(rows):
        tot = counts[rows].sum(axis=0)
        if np.any(tot <= 0):
            return 0.0
        return float(np.polyfit(logr, np.log(tot), 1)[0])

    pooled = pooled_slope(np.arange(len(idx)))
    per = np.array([np.polyfit(logr, np.log(c), 1)[0] if np.all(c > 0) else 0.0 for c in counts])
    boot = [pooled_slope(rng.integers(0, len(idx), len(idx))) for _ in range(n_boot)]
    band = (float(np.percentile(boot, 2.5)), float(np.percentile(boot, 97.5)))
    label, nearest = classify_dimension(pooled, thresholds)
    return DimensionEstimate(per, pooled, float(np.median(per)), band, label, nearest, scales)


def run_dimension(cfg: ExperimentConfig, seed: int | None = None) -> DimensionEstimate:
    model = cfg.make_model()
    measure = cfg.make_measure()
    opts = cfg.dimension
    n = int(opts.get("samples", 100_000))
    walkers = int(opts.get("walkers", 1000))
    thin = int(opts.get("thin", 1))
    seed = cfg.seeds[0] if seed is None else seed
    x0 = start_points(cfg, model, walkers, seed)
    samples, _ = sample_orbits(model, measure, x0, seed, -(-n // walkers), cfg.burn_in, thin,
                               opts.get("denominator"))
    X = samples.reshape(-1, samples.shape[-1])[:max(n, 0)]
    box = 1.0 if getattr(model, "constant_tangent", False) else None
    return local_dimension_estimate(X, opts.get("scales", cfg.scales),
                                    int(opts.get("base_points", 200)), box, seed, cfg.thresholds,
                                    min_samples=int(opts.get("min_samples", 100_000)))


# ---------------------------------------------------------------------------
# full report


class Recorder:
    """Collects check records; every numeric claim carries its tolerance and seed."""

    def __init__(self):
        self.records = []

    def add(self, stage, check, value, tolerance, seed, passed, acceptance=False, **extra):
        rec = {"stage": stage, "check": check, "value": _jsonable(value), "tolerance": tolerance,
               "seed": seed, "pass": bool(passed), "acceptance": bool(acceptance)}
        rec.update({k: _jsonable(v) for k, v in extra.items()})
        self.records.append(rec)
        return rec

    @property
    def failed_acceptance(self) -> list:
        return [r for r in self.records if r["acceptance"] and not r["pass"]]


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def _splitting_task(args):
    model_spec, measure_d, seed, x, n = args
    from .cocycle import oseledets_splitting
    model = load_model(model_spec)
    atoms = measure_d["atoms"]
    w = measure_d.get("weights")
    mu = FiniteMeasure.uniform(atoms) if w is None else FiniteMeasure(tuple(atoms), tuple(w))
    fr = oseledets_splitting(model, WalkWord(mu, seed=seed), np.asarray(x), n, n)
    return {"seed": seed, "angle": fr.angle, "residual": max(fr.residual_u, fr.residual_s),
            "lambda_plus": fr.lambda_plus, "lambda_minus": fr.lambda_minus}


def _pmap(fn, items, workers: int):
    if workers <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _stage_exponents(cfg, model, measure, rec):
    from .cocycle import lyapunov_exponents
    x0 = start_points(cfg, model, 1, cfg.seeds[0])[0]
    res = lyapunov_exponents(model, measure, x0, cfg.seeds, cfg.n_steps, cfg.burn_in)
    seed = cfg.seeds[0] if len(cfg.seeds) == 1 else cfg.seeds
    rec.add("exponents", "lambda_plus", res.lambda_plus, float(res.stderr[0]), seed, True,
            exponents=res.exponents)
    rec.add("exponents", "lambda_minus", res.lambda_minus, float(res.stderr[-1]), seed, True)
    volume = all(abs(abs(np.linalg.det(model.jacobian(a, x0))) - 1) < 1e-12 for a in measure.atoms)
    if volume:
        tol = 3 * res.plus_minus_stderr
        rec.add("exponents", "sum_lambda_plus_minus", res.plus_minus, tol, seed,
                abs(res.plus_minus) <= tol, acceptance=True)
    expect = cfg.exponents.get("expect_lambda_plus")
    if expect is not None:
        tol = float(cfg.exponents.get("tolerance", 1e-6))
        rec.add("exponents", "expected_lambda_plus", res.lambda_plus, tol, seed,
                abs(res.lambda_plus - float(expect)) <= tol, acceptance=True, expected=float(expect))
    rec.add("exponents", "converged", not res.nonconvergence_flag, None, seed,
            not res.nonconvergence_flag)
    return res


def _stage_splitting(cfg, model, measure, rec):
    opts = cfg.splitting
    n = int(opts.get("window", 400))
    k = int(opts.get("samples", 5))
    tol = float(opts.get("tolerance", 1e-6))
    seeds = [worker_seed(cfg.seeds[0], i) % (2 ** 32) for i in range(k)]
    xs = start_points(cfg, model, k, cfg.seeds[0])
    tasks = [(cfg.model, cfg.measure, s, x.tolist(), n) for s, x in zip(seeds, xs)]
    for out in _pmap(_splitting_task, tasks, cfg.workers):
        rec.add("splitting", "equivariance_residual", out["residual"], tol, out["seed"],
                out["residual"] < tol, acceptance=True, angle=out["angle"])


def _stage_roof(cfg, model, measure, rec):
    from .charts import orbit_charts
    from .suspension import roof
    opts = cfg.roof
    half = int(opts.get("samples", 100)) // 2
    seed = cfg.seeds[0]
    x = start_points(cfg, model, 1, seed)[0]
    seq = orbit_charts(model, WalkWord(measure, seed=seed), x, half + 1)
    rs = [roof(seq, j) for j in range(-half, half)]
    ident = max(r.identity_residual for r in rs)
    rec.add("roof", "cohomology_identity", ident, 1e-10, seed, ident < 1e-10, acceptance=True)
    inside = sum(r.within_bounds for r in rs)
    rec.add("roof", "tau_within_lambda_eps", inside, len(rs), seed, inside == len(rs),
            acceptance=True, lam=seq.lam_u, eps=seq.eps)
    rec.add("roof", "tau_positive", min(r.tau for r in rs), 0.0, seed,
            min(r.tau for r in rs) > 0, acceptance=True)


def _stage_birkhoff(cfg, model, measure, rec, out_dir):
    from .suspension import birkhoff_diagnostic
    opts = cfg.birkhoff
    box = np.asarray(opts.get("box", [[0.0, 0.5]] * model_dim(model)), dtype=float)
    T_list = opts.get("T", [100, 1000, 10000])
    seeds = list(range(int(opts.get("seeds", 100))))
    x0 = start_points(cfg, model, 1, cfg.seeds[0])[0]

    def pred(p):
        return np.all((p >= box[:, 0]) & (p < box[:, 1]), axis=-1)

    ref = opts.get("reference")
    rows, summary = birkhoff_diagnostic(model, measure, x0, pred, T_list, seeds,
                                        tol=float(opts.get("tol", 0.05)),
                                        delta=float(opts.get("delta", 0.1)),
                                        burn_in=cfg.burn_in, reference=ref)
    if out_dir is not None:
        with open(out_dir / "birkhoff.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["seed", "T", "time_avg", "ens_avg", "gap"])
            w.writerows(rows)
    last = summary["per_T"][-1]
    rec.add("birkhoff", "violating_fraction_at_max_T", last["violating_fraction"],
            float(opts.get("delta", 0.1)), seeds, not last["flag"])
    if "clt_slope" in summary:
        rec.add("birkhoff", "clt_slope", summary["clt_slope"], 0.25, seeds,
                abs(summary["clt_slope"] + 0.5) <= 0.25)


def model_dim(model) -> int:
    return 4 if getattr(model, "constant_tangent", False) else 3


def _stage_histogram(cfg, model, measure, rec, out_dir):
    h = run_measure_histogram(cfg)
    seed = cfg.seeds[0]
    rec.add("histogram", "stationarity_tv", h.stationarity_tv, 1.5 * h.noise_tv, seed,
            h.stationary, noise_tv=h.noise_tv, escapes=h.escapes, total=h.total)
    if out_dir is not None:
        with open(out_dir / "histogram.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["pair", "i", "j", "edge_a", "edge_b", "count"])
            w.writerows(h.rows())
    return h


def _stage_dimension(cfg, model, measure, rec):
    d = run_dimension(cfg)
    rec.add("dimension", "local_dimension", d.pooled, cfg.thresholds, cfg.seeds[0],
            d.label != "unclassified", **d.record())
    return d


def _stage_cohomology(cfg, model, measure, rec):
    from .cohomology import LatticeAction, classify_isometry
    words = list(cfg.cohomology.get("words", [])) + list(measure.atoms)
    act = LatticeAction.from_model(model, sorted(set(words), key=words.index))
    for name, M in act.generators.items():
        c = classify_isometry(M, act.gram)
        rec.add("cohomology", f"classify:{name}", c.kind, 1e-9, None, c.kind != "undecided",
                spectral_radius=c.spectral_radius)
    expected = cfg.cohomology.get("expect", {})
    for name, exp in expected.items():
        c = classify_isometry(act.generators[name], act.gram)
        ok = c.kind == exp.get("kind", c.kind)
        if "spectral_radius" in exp:
            ok &= abs(c.spectral_radius - float(exp["spectral_radius"])) < 1e-9
        rec.add("cohomology", f"expect:{name}", [c.kind, c.spectral_radius], 1e-9, None, ok,
                acceptance=True)


def run_full_report(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Run the configured stages; write manifest, JSON lines, CSV tables and a summary.

    A failing stage is recorded and later stages still run.  Returns
    ``{"records", "manifest", "exit_code"}``; the exit code is 1 when any
    acceptance-tagged check fails, else 0.
    """
    out_dir = Path(out_dir if out_dir is not None else cfg.output.get("dir", "report"))
    out_dir.mkdir(parents=True, exist_ok=True)
    model = cfg.make_model()
    measure = cfg.make_measure()
    rec = Recorder()
    stage_fns = {
        "exponents": lambda: _stage_exponents(cfg, model, measure, rec),
        "splitting": lambda: _stage_splitting(cfg, model, measure, rec),
        "roof": lambda: _stage_roof(cfg, model, measure, rec),
        "birkhoff": lambda: _stage_birkhoff(cfg, model, measure, rec, out_dir),
        "histogram": lambda: _stage_histogram(cfg, model, measure, rec, out_dir),
        "dimension": lambda: _stage_dimension(cfg, model, measure, rec),
        "cohomology": lambda: _stage_cohomology(cfg, model, measure, rec),
    }
    for stage in cfg.stages:
        try:
            stage_fns[stage]()
        except SurfdynError as exc:
            rec.add(stage, "stage_error", f"{type(exc).__name__}: {exc}", None, cfg.seeds[0],
                    False, acceptance=True)
    manifest = {"config_hash": cfg.config_hash(), "code_version": code_version(),
                "stages": list(cfg.stages), "seeds": cfg.seeds, "config": cfg.to_dict()}
    (out_dir / "manifest.json").write_text(json.dumps(_jsonable(manifest), indent=2, sort_keys=True))
    if cfg.stages:
        with open(out_dir / "results.jsonl", "w") as fh:
            for r in rec.records:
                fh.write(json.dumps(r, sort_keys=True) + "\n")
        lines = [f"config {manifest['config_hash'][:12]}  version {manifest['code_version']}"]
        for r in rec.records:
            mark = "PASS" if r["pass"] else "FAIL"
            lines.append(f"[{mark}] {r['stage']}/{r['check']}: value={r['value']} "
                         f"tolerance={r['tolerance']} seed={r['seed']}")
        (out_dir / "summary.txt").write_text("\n".join(lines) + "\n")
    code = 1 if rec.failed_acceptance else 0
    return {"records": rec.records, "manifest": manifest, "exit_code": code}


# ---------------------------------------------------------------------------
# fixtures for the classification heuristic


def finite_orbit_config(denominator: int = 5, **kw) -> ExperimentConfig:
    """Golden torus pair started at a rational point: the orbit stays in a finite set."""
    base = {"model": golden_torus_spec(), "measure": {"atoms": ["A", "C"]},
            "start": [1 / denominator, 2 / denominator, 3 / denominator, 4 / denominator],
            "burn_in": 10, "scales": [0.01, 0.02, 0.04, 0.08],
            "dimension": {"samples": 100_000, "walkers": 100, "denominator": denominator},
            "histogram": {"samples": 100_000, "walkers": 100, "denominator": denominator}}
    base.update(kw)
    return ExperimentConfig.from_dict(base)


def lebesgue_torus_config(**kw) -> ExperimentConfig:
    base = {"model": golden_torus_spec(), "measure": {"atoms": ["A", "C"]}, "burn_in": 20,
            "scales": [0.05, 0.1, 0.2, 0.4],
            "dimension": {"samples": 100_000, "walkers": 1000}}
    base.update(kw)
    return ExperimentConfig.from_dict(base)


def invariant_circle_config(alpha: float = (5 ** 0.5 - 1) / 2, **kw) -> ExperimentConfig:
    """Irrational translation along the first lattice direction: orbits fill circles."""
    spec = {"type": "torus", "generators": {"T": [[1, 0], [0, 1]]},
            "translations": {"T": [alpha, 0.0, 0.0, 0.0]}}
    base = {"model": spec, "measure": {"atoms": ["T"]}, "burn_in": 0,
            "start": [0.1, 0.3, 0.5, 0.7], "scales": [0.05, 0.1, 0.2, 0.4],
            "dimension": {"samples": 100_000, "walkers": 10}}
    base.update(kw)
    return ExperimentConfig.from_dict(base)


def golden_torus_spec() -> dict:
    return {"type": "torus",
            "generators": {"A": [[2, 1], [1, 1]], "C": {"re": [[1, 0], [0, 0]],
                                                         "im": [[0, 1], [1, 0]]}}}
