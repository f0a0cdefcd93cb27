"""Suspension flows over the skew product, the roof function and its time change.

A suspension point is ``(x, omega, k)`` with ``k`` in ``[0, 1)``.  The standard
flow moves ``k`` at unit speed and applies one map per crossed cell.  The
time-changed flow spends ``tau_j`` units of time in the cell over orbit index
``j``; ``k`` is then the fraction of that cell already elapsed, so the elapsed
time inside the cell is ``k tau_j``.  Orbit indices are tracked on the point so
that roof values along a realized orbit can be looked up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .charts import ChartSequence, normal_form
from .cocycle import default_epsilon, lyapunov_exponents
from .errors import InsufficientDataError, WindowExhaustedError
from .random_walk import WalkWord, compose


@dataclass(frozen=True)
class SuspensionPoint:
    x: np.ndarray
    omega: WalkWord
    k: float = 0.0
    index: int = 0

    def __post_init__(self):
        if not 0.0 <= self.k < 1.0:
            raise ValueError(f"k = {self.k!r} outside [0, 1)")


def _advance(model, z: SuspensionPoint, n: int) -> SuspensionPoint:
    if n == 0:
        return z
    x = compose(model, z.omega, n, z.x)
    return SuspensionPoint(x, z.omega.shift(n), z.k, z.index + n)


def standard_flow(model, z: SuspensionPoint, t: float) -> SuspensionPoint:
    """Unit-speed suspension flow: ``n = floor(k + t)`` maps, ``k' = k + t - n``.

    A point landing exactly on a cell boundary belongs to the new cell.
    """
    s = z.k + t
    n = math.floor(s)
    k = s - n
    if k >= 1.0:  # rounding of s - n just below an integer
        n, k = n + 1, 0.0
    return replace(_advance(model, z, n), k=k)


# ---------------------------------------------------------------------------
# roof function


@dataclass
class RoofData:
    """Roof value at orbit index ``index`` with its cohomology data.

    ``theta`` is the log expansion of the chart unit vector along ``E^u`` by
    the derivative, ``phi`` and ``phi_next`` are the coboundary at ``index``
    and ``index + 1``, and ``tau`` is the expansion of ``D_0 f~`` on the first chart axis.
    """

    index: int
    tau: float
    theta: float
    phi: float
    phi_next: float
    lam: float
    eps: float

    @property
    def identity_residual(self) -> float:
        return abs(self.tau - (self.theta - self.phi_next + self.phi))

    @property
    def within_bounds(self) -> bool:
        return self.lam - self.eps <= self.tau <= self.lam + self.eps

    def record(self) -> dict:
        return {"index": self.index, "tau": self.tau, "theta": self.theta, "phi": self.phi,
                "phi_next": self.phi_next, "identity_residual": self.identity_residual,
                "within_bounds": self.within_bounds}


def roof(charts: ChartSequence, j: int = 0) -> RoofData:
    """Roof data at orbit index ``j`` of a chart sequence."""
    D = charts.window.segment.mat(j)
    v = charts.chart(j).Phi_inv[:, 0]
    theta = float(np.log(np.linalg.norm(D @ v) / np.linalg.norm(v)))
    tau = float(np.log(np.linalg.norm(charts.derivative(j)[:charts.u, 0])))
    if not tau > 0:
        raise ValueError(f"non-positive roof {tau} at index {j}: exponent estimate not positive")
    return RoofData(j, tau, theta, charts.phi_coboundary(j), charts.phi_coboundary(j + 1),
                    charts.lam_u, charts.eps)


class RoofSequence:
    """Roof values ``tau_j`` for orbit indices ``a <= j < b`` of a chart sequence."""

    def __init__(self, charts: ChartSequence | None = None, values=None, start: int = 0):
        if charts is not None:
            self.start = charts.a
            self.values = np.array([roof(charts, j).tau for j in range(charts.a, charts.b)])
        else:
            self.start = start
            self.values = np.asarray(values, dtype=float)
        if np.any(self.values <= 0):
            raise ValueError("roof values must be positive")

    @property
    def stop(self) -> int:
        return self.start + len(self.values)

    def __call__(self, j: int) -> float:
        if not self.start <= j < self.stop:
            raise WindowExhaustedError(f"roof not realized at index {j}")
        return float(self.values[j - self.start])


class ConstantRoof:
    """Constant roof ``tau0`` at every index (exact constant-derivative case)."""

    def __init__(self, tau0: float):
        if tau0 <= 0:
            raise ValueError("roof must be positive")
        self.tau0 = float(tau0)

    def __call__(self, j: int) -> float:
        return self.tau0


SNAP = 1e-12  # relative distance to a cell end below which a crossing is made


def time_changed_flow(model, z: SuspensionPoint, ell: float, tau) -> SuspensionPoint:
    """Flow for time ``ell`` when the cell over index ``j`` lasts ``tau(j)``.

    Elapsed time within ``SNAP * tau`` of a cell end counts as reaching it, so
    that rounding in the accumulated roof sums does not stop the flow one cell short.
    """
    j = z.index
    e = z.k * tau(j) + ell
    n = 0
    while e >= tau(j + n) * (1 - SNAP):
        e -= tau(j + n)
        n += 1
    while e < -SNAP * tau(j + n - 1):
        n -= 1
        e += tau(j + n)
    t = tau(j + n)
    k = max(e, 0.0) / t
    if k >= 1.0:
        n, k = n + 1, 0.0
    return replace(_advance(model, z, n), k=k)


def elapsed(z: SuspensionPoint, tau) -> float:
    """Total time from cell 0 to ``z`` under roof ``tau`` (for group-law checks)."""
    total = z.k * tau(z.index)
    if z.index >= 0:
        total += sum(tau(i) for i in range(0, z.index))
    else:
        total -= sum(tau(i) for i in range(z.index, 0))
    return total


def modified_leaf_distance(leaf, ref: int, z: SuspensionPoint, p: int, tau) -> float:
    """Distance of leaf point ``p`` from the base orbit in modified coordinates at ``z``.

    ``e^{k tau_j} ||H_new,j(z_j)||`` with ``j = z.index``: the time-changed
    flow multiplies it by exactly ``e^ell``.
    """
    nf = normal_form(leaf, z.index, ref=ref)
    return float(np.exp(z.k * tau(z.index)) * np.linalg.norm(nf.H_new[p]))


# ---------------------------------------------------------------------------
# invariant density


@dataclass
class TCDensity:
    """Density ``C_tau tau`` of the time-changed invariant measure against ``m x dt``."""

    normalizer: float
    lam: float
    eps: float
    pilot_n: int
    pilot_seed: int

    def __call__(self, tau_value: float) -> float:
        return self.normalizer * tau_value

    def bounds(self) -> tuple[float, float]:
        return ((self.lam - self.eps) * self.normalizer, (self.lam + self.eps) * self.normalizer)

    def ratio_bound(self, values) -> float:
        """``Q = max/min`` of the density over a sample (density ratio on a high-mass set)."""
        d = self.normalizer * np.asarray(values, dtype=float)
        return float(d.max() / d.min())


def tc_density(model, measure, x0, seed: int = 0, pilot_n: int = 100_000,
               eps: float | None = None, roof_values=None) -> TCDensity:
    """Normalize ``tau`` by a pilot run.

    The mean of ``tau`` over ``m`` equals the mean of ``theta`` because the two
    differ by a coboundary, and the mean of ``theta`` is ``lambda^+``.  The
    pilot therefore estimates ``lambda^+`` along one long orbit; ``C_tau`` is
    its reciprocal.  A constant roof gives ``C_tau = 1/tau0`` and density 1.
    """
    if roof_values is not None and np.ptp(roof_values) == 0.0:
        t0 = float(np.asarray(roof_values)[0])
        return TCDensity(1.0 / t0, t0, 0.0 if eps is None else eps, 0, seed)
    res = lyapunov_exponents(model, measure, x0, seed, pilot_n)
    lam = res.lambda_plus
    if eps is None:
        eps = default_epsilon(lam, res.lambda_minus)
    return TCDensity(1.0 / lam, lam, eps, pilot_n, seed)


# ---------------------------------------------------------------------------
# Birkhoff averages


def _orbit_indicator(model, measure, x0, seeds, T_max: int, predicate, burn_in: int = 0):
    """Indicator of ``predicate`` along orbits, one row per seed: shape (n_seeds, T_max)."""
    pts = np.array([np.asarray(x0, dtype=float)] * len(seeds))
    words = [WalkWord(measure, seed=s) for s in seeds]
    syms = np.array([w.symbols(0, burn_in + T_max) for w in words])
    out = np.zeros((len(seeds), T_max), dtype=bool)
    batch = getattr(model, "constant_tangent", False)
    for t in range(burn_in + T_max):
        if batch:
            for a, name in enumerate(measure.atoms):
                rows = syms[:, t] == a
                if rows.any():
                    pts[rows] = model.apply(name, pts[rows])
        else:
            for i in range(len(seeds)):
                pts[i] = model.apply(measure.atoms[syms[i, t]], pts[i])
        if t >= burn_in:
            out[:, t - burn_in] = predicate(pts)
    return out


def birkhoff_diagnostic(model, measure, x0, predicate, T_list, seeds, tol: float = 0.05,
                        delta: float = 0.1, burn_in: int = 0, reference: float | None = None):
    """Time averages of an indicator along orbits against the ensemble average.

    Returns ``(rows, summary)``.  Each row is ``(seed, T, time_avg, ens_avg, gap)``.
    The ensemble average is ``reference`` when given (e.g. the volume of a box
    for an invariant volume) and otherwise the pooled mean over seeds at the
    largest ``T``.  ``summary`` reports, per ``T``, the fraction of seeds with
    gap above ``tol`` (flagged when above ``delta``) and the fitted log-log
    slope of the gap spread against ``T`` (about -1/2 under CLT scaling).
    """
    T_list = sorted(int(T) for T in T_list)
    if not T_list or T_list[0] < 1:
        raise InsufficientDataError("need at least one positive T")
    ind = _orbit_indicator(model, measure, x0, seeds, T_list[-1], predicate, burn_in)
    csum = np.cumsum(ind, axis=1)
    ens = float(csum[:, -1].mean() / T_list[-1]) if reference is None else float(reference)
    rows, summary = [], {"ens_avg": ens, "per_T": []}
    spreads = []
    for T in T_list:
        avg = csum[:, T - 1] / T
        gaps = np.abs(avg - ens)
        for s, a, g in zip(seeds, avg, gaps):
            rows.append((int(s), T, float(a), ens, float(g)))
        frac = float(np.mean(gaps > tol))
        spreads.append(float(np.sqrt(np.mean((avg - ens) ** 2))))
        summary["per_T"].append({"T": T, "violating_fraction": frac, "flag": frac > delta,
                                 "rms_gap": spreads[-1]})
    if len(T_list) >= 2 and all(s > 0 for s in spreads):
        summary["clt_slope"] = float(np.polyfit(np.log(T_list), np.log(spreads), 1)[0])
    return rows, summary


def pushforward_ks(model, measure, points, t: float, seed: int = 0) -> list[float]:
    """KS p-values per coordinate between a cloud and its image under the standard flow.

    Each sample point gets its own word (seed ``seed + i``) and uniform ``k``.
    """
    rng = np.random.default_rng(seed)
    out = []
    for i, x in enumerate(points):
        z = SuspensionPoint(np.asarray(x, dtype=float), WalkWord(measure, seed=seed + i),
                            float(rng.random()))
        out.append(standard_flow(model, z, t).x)
    out = np.array(out)
    return [float(stats.ks_2samp(points[:, c], out[:, c]).pvalue) for c in range(points.shape[1])]


def theta_average(charts: ChartSequence, a: int, b: int) -> float:
    """Average of ``theta`` over orbit indices ``[a, b)`` (compare with ``lambda^+``)."""
    return float(np.mean([roof(charts, j).theta for j in range(a, b)]))


# ---------------------------------------------------------------------------
# flow laws


def _gap(model, z1: SuspensionPoint, z2: SuspensionPoint) -> tuple[bool, float]:
    """Symbolic agreement (cell index and word position) and the continuous gap."""
    same = z1.index == z2.index and z1.omega.offset == z2.omega.offset
    dx = float(np.linalg.norm(model.log(z1.x, z2.x))) if same else np.inf
    return same, max(dx, abs(z1.k - z2.k))


def flow_law_check(model, measure, n_pairs: int = 1000, seed: int = 0, t_max: float = 3.0,
                   tau=None, x=None) -> dict:
    """Additivity ``phi_{s+t} = phi_s o phi_t`` and invertibility ``phi_{-t} o phi_t = id``.

    With ``tau`` given the time-changed flow is checked, otherwise the standard
    flow.  Times are uniform in ``[-t_max, t_max]`` and ``k`` uniform in
    ``[0, 1)``; every pair uses the same word (seed ``seed``) and base point
    so that the roof lookups stay inside a realized window.  Returns the number
    of symbolic mismatches and the largest continuous gaps.
    """
    rng = np.random.default_rng(seed)
    omega = WalkWord(measure, seed=seed)
    if x is None:
        x = model.sample_points(rng, 1)[0]
    if tau is None:
        def flow(z, t):
            return standard_flow(model, z, t)
    else:
        def flow(z, t):
            return time_changed_flow(model, z, t, tau)
    out = {"pairs": n_pairs, "symbol_mismatch": 0, "additivity_gap": 0.0, "inverse_gap": 0.0}
    for _ in range(n_pairs):
        z = SuspensionPoint(np.asarray(x, dtype=float), omega, float(rng.random()))
        s, t = rng.uniform(-t_max, t_max, 2)
        same, gap = _gap(model, flow(z, s + t), flow(flow(z, t), s))
        out["symbol_mismatch"] += not same
        out["additivity_gap"] = float(max(out["additivity_gap"], gap))
        same, gap = _gap(model, flow(flow(z, t), -t), z)
        out["symbol_mismatch"] += not same
        out["inverse_gap"] = float(max(out["inverse_gap"], gap))
    out["ok"] = bool(out["symbol_mismatch"] == 0 and out["additivity_gap"] <= 1e-9
                 and out["inverse_gap"] <= 1e-9)
    return out
