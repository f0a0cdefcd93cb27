"""Lyapunov charts, local stable/unstable manifolds and normal-form coordinates.

Charts along an orbit are built from the anchored Lyapunov-norm Grams of
:func:`surfdyn.cocycle.anchored_grams`: the linear part of the chart at
``x_j`` is ``blockdiag(Lu_j, Ls_j) [U_j S_j]^{-1}`` with ``Lu^T Lu = Gu`` (and
likewise for ``s``), so it sends ``E^u`` to the first coordinate block,
``E^s`` to the second, and Lyapunov norms to Euclidean norms.  The chart map
itself is ``phi_j(q) = Phi_j log(x_j, q)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from .cocycle import (CocycleWindow, anchored_grams, default_epsilon, orbit_segment)
from .errors import (GraphTransformDivergence, NonConvergenceError, RadiusCollapseError,
                     WindowExhaustedError)


def _upper_chol(G):
    return np.linalg.cholesky(G).T


@dataclass
class LyapunovChart:
    """Chart at orbit index ``index``: ``phi(q) = Phi log(x, q)`` on the ball of radius ``radius``."""

    model: object
    x: np.ndarray
    index: int
    Phi: np.ndarray
    Phi_inv: np.ndarray
    u: int
    radius: float = np.inf
    lip: float | None = None

    def to_chart(self, q):
        return self.Phi @ self.model.log(self.x, q)

    def from_chart(self, v):
        return self.model.exp(self.x, self.Phi_inv @ np.asarray(v, dtype=float))

    def alignment_residual(self, Eu, Es) -> float:
        """Off-axis components of ``Phi E^u`` and ``Phi E^s``, relative to ``||Phi||``."""
        a = self.Phi @ Eu
        b = self.Phi @ Es
        off = max(np.abs(a[self.u:]).max(), np.abs(b[:self.u]).max())
        return float(off / np.linalg.norm(self.Phi, 2))


class ChartSequence:
    """Lyapunov charts at every orbit index of ``[a, b]``, all anchored to that window."""

    def __init__(self, window: CocycleWindow, a: int, b: int, lam_u: float, lam_s: float,
                 eps: float):
        if a < window.lo or b > window.hi or a > b:
            raise WindowExhaustedError("chart window outside the cocycle window")
        self.window = window
        self.model = window.segment.model
        self.a, self.b = a, b
        self.lam_u, self.lam_s, self.eps = lam_u, lam_s, eps
        self.u = window.u
        self.Gu = anchored_grams(window, "u", lam_u, eps, a, b)
        self.Gs = anchored_grams(window, "s", lam_s, eps, a, b)
        self._charts = {}

    def _check(self, j):
        if not self.a <= j <= self.b:
            raise WindowExhaustedError(f"no chart at index {j} (window [{self.a}, {self.b}])")

    def linear(self, j: int) -> np.ndarray:
        self._check(j)
        k = j - self.a
        Lu, Ls = _upper_chol(self.Gu[k]), _upper_chol(self.Gs[k])
        d = self.window.dim
        L = np.zeros((d, d))
        L[:self.u, :self.u] = Lu
        L[self.u:, self.u:] = Ls
        basis = np.hstack([self.window.Eu(j), self.window.Es(j)])
        return L @ np.linalg.inv(basis)

    def chart(self, j: int) -> LyapunovChart:
        if j not in self._charts:
            Phi = self.linear(j)
            self._charts[j] = LyapunovChart(self.model, self.window.segment.point(j), j, Phi,
                                            np.linalg.inv(Phi), self.u)
        return self._charts[j]

    def symbol(self, j: int) -> str:
        return self.window.segment.omega.atom(j)

    def f_tilde(self, j: int, v):
        """One-step chart map ``phi_{j+1} o f_{omega_j} o phi_j^{-1}``."""
        c0, c1 = self.chart(j), self.chart(j + 1)
        return c1.to_chart(self.model.apply(self.symbol(j), c0.from_chart(v)))

    def f_tilde_inv(self, j: int, v):
        """Inverse one-step map ``phi_j o f_{omega_j}^{-1} o phi_{j+1}^{-1}``."""
        c0, c1 = self.chart(j), self.chart(j + 1)
        name = self.model.inverse(self.symbol(j))
        return c0.to_chart(self.model.apply(name, c1.from_chart(v)))

    def derivative(self, j: int) -> np.ndarray:
        """``D_0 f~_j = Phi_{j+1} D_j Phi_j^{-1}``."""
        return self.chart(j + 1).Phi @ self.window.segment.mat(j) @ self.chart(j).Phi_inv

    def one_step_bounds(self, j: int) -> dict:
        """Singular values of the diagonal blocks of ``D_0 f~_j`` against ``e^{lam +- eps}``."""
        D = self.derivative(j)
        u = self.u
        su = np.linalg.svd(D[:u, :u], compute_uv=False)
        ss = np.linalg.svd(D[u:, u:], compute_uv=False)
        off = max(np.abs(D[:u, u:]).max(), np.abs(D[u:, :u]).max())
        lo_u, hi_u = np.exp(self.lam_u - self.eps), np.exp(self.lam_u + self.eps)
        lo_s, hi_s = np.exp(self.lam_s - self.eps), np.exp(self.lam_s + self.eps)
        excess = max(0.0, lo_u - su.min(), su.max() - hi_u, lo_s - ss.min(), ss.max() - hi_s)
        return {"sv_u": su, "sv_s": ss, "offdiag": float(off), "excess": float(excess)}

    def phi_coboundary(self, j: int) -> float:
        """``log ||Phi_j^{-1} e_1||``: Euclidean length of the unit chart vector along ``E^u``."""
        return float(np.log(np.linalg.norm(self.chart(j).Phi_inv[:, 0])))


def _fd_jacobian(fun, v, h):
    d = len(v)
    cols = []
    for e in np.eye(d):
        cols.append((fun(v + h * e) - fun(v - h * e)) / (2 * h))
    return np.column_stack(cols)


def estimate_lipschitz(charts: ChartSequence, j: int, rho: float, n_samples: int = 12,
                       seed: int = 0) -> float:
    """Estimate of ``Lip(f~_j - D_0 f~_j)`` on the chart ball of radius ``rho``.

    Jacobians are central differences with step ``rho / 4`` at points of the
    ball of radius ``3 rho / 4``, so every stencil point stays in the ball.  A
    small step would let rounding in the chart map (of order the machine
    epsilon times ``||Phi||``) dominate the quotient at small radii.
    """
    rng = np.random.default_rng(seed)
    D0 = charts.derivative(j)
    d = D0.shape[0]
    worst = 0.0
    h = rho / 4
    for _ in range(n_samples):
        g = rng.normal(size=d)
        v = 0.75 * rho * rng.random() ** (1 / d) * g / np.linalg.norm(g)
        Dv = _fd_jacobian(lambda w: charts.f_tilde(j, w), v, h)
        worst = max(worst, np.linalg.norm(Dv - D0, 2))
    return float(worst)


def chart_radius(charts: ChartSequence, j: int, eps: float, rho0: float = 0.5,
                 n_samples: int = 12) -> tuple[float, float]:
    """Largest dyadic radius with ``Lip(f~ - D_0 f~) < eps``; returns ``(radius, lip)``."""
    Phi_inv = charts.chart(j).Phi_inv
    rho = (rho0 / 4) / np.linalg.norm(Phi_inv, 2)
    while rho >= 1e-10:
        lip = estimate_lipschitz(charts, j, rho, n_samples)
        if lip < eps:
            return float(rho), lip
        rho /= 2
    raise RadiusCollapseError(f"chart radius at index {j} fell below 1e-10")


def build_chart(frame, eps: float | None = None, N: int | None = None, rho0: float = 0.5,
                lip_samples: int = 12) -> LyapunovChart:
    """Lyapunov chart at the base point of an Oseledets frame.

    The Gram window is ``[-N, N]``.  The one-step bounds hold exactly for any
    anchored window, and a short one keeps the chart scale moderate: over long
    windows the Grams grow like ``exp(2 max|S_n - n lam|)`` for the partial
    sums ``S_n`` of the log growth, which costs floating-point accuracy in the chart maps.
    """
    win = frame.window
    if eps is None:
        eps = default_epsilon(frame.lambda_plus, frame.lambda_minus)
    if N is None:
        N = min(40, (min(-win.lo, win.hi) * 3) // 4)
    if frame.angle <= 1e-6:
        raise RadiusCollapseError(f"splitting angle {frame.angle:.2e} too small for a chart")
    seq = ChartSequence(win, -N, N, frame.lambda_plus, frame.lambda_minus, eps)
    chart = seq.chart(0)
    chart.radius, chart.lip = chart_radius(seq, 0, eps, rho0, lip_samples)
    chart.sequence = seq
    return chart


def orbit_charts(model, omega, x, half_width: int, margin: int = 300, exponents=None,
                 eps: float | None = None) -> ChartSequence:
    """Realize an orbit window and anchored charts on ``[-half_width, half_width]``."""
    seg = orbit_segment(model, omega, x, -(half_width + margin), half_width + margin)
    win = CocycleWindow(seg)
    if exponents is None:
        exponents = win.exponent_estimates(margin // 2)
    lp, lm = exponents
    if eps is None:
        eps = default_epsilon(lp, lm)
    return ChartSequence(win, -half_width, half_width, lp, lm, eps)


# ---------------------------------------------------------------------------
# local manifolds by graph transform


def _monomials(k: int, degree: int):
    return [m for deg in range(2, degree + 1)
            for m in combinations_with_replacement(range(k), deg)]


def _design(b, monos):
    b = np.atleast_2d(b)
    return np.column_stack([np.prod(b[:, list(m)], axis=1) for m in monos]) if monos else \
        np.zeros((b.shape[0], 0))


def _design_grad(b, monos, k):
    """d(monomial)/d(b_i) at rows of b: shape (n, n_monos, k)."""
    b = np.atleast_2d(b)
    out = np.zeros((b.shape[0], len(monos), k))
    for a, m in enumerate(monos):
        for pos, i in enumerate(m):
            rest = list(m[:pos]) + list(m[pos + 1:])
            out[:, a, i] += np.prod(b[:, rest], axis=1) if rest else 1.0
    return out


@dataclass
class LeafGraph:
    """Graph ``h`` of a local stable (``tag='s'``) or unstable manifold in the chart at ``index``.

    For ``tag='s'`` the graph is ``v_u = h(v_s)`` over the stable axis; for
    ``tag='u'`` it is ``v_s = h(v_u)``.  ``h`` is a polynomial without
    constant or linear terms, so ``h(0) = 0`` and ``Dh(0) = 0`` hold by construction.
    """

    tag: str
    index: int
    q: float
    coef: np.ndarray  # (n_monos, out_dim)
    monos: list
    grid: np.ndarray
    trace: list = field(default_factory=list)
    fit_residual: float = 0.0

    @property
    def in_dim(self) -> int:
        return self.grid.shape[1]

    def h(self, b) -> np.ndarray:
        return _design(b, self.monos) @ self.coef

    def Dh(self, b) -> np.ndarray:
        g = _design_grad(b, self.monos, self.in_dim)
        return np.einsum("nak,ao->nok", g, self.coef)

    def max_slope(self, b=None) -> float:
        b = self.grid if b is None else b
        D = self.Dh(b)
        return float(max(np.linalg.norm(Dk, 2) for Dk in D)) if len(D) else 0.0

    def points(self, b=None) -> np.ndarray:
        """Chart coordinates ``(v_u, v_s)`` of graph points over ``b``."""
        b = self.grid if b is None else np.atleast_2d(b)
        hb = self.h(b)
        return np.hstack([hb, b]) if self.tag == "s" else np.hstack([b, hb])


def _disc_grid(k: int, q: float, n: int) -> np.ndarray:
    if k == 1:
        return np.linspace(-q, q, n)[:, None]
    t = np.linspace(-q, q, int(np.sqrt(n)) + 1)
    g = np.array(np.meshgrid(*([t] * k))).reshape(k, -1).T
    return g[np.linalg.norm(g, axis=1) <= q + 1e-15]


def graph_transform(charts: ChartSequence, j: int, tag: str, q: float, n_iter: int,
                    degree: int = 3, n_grid: int = 41, cap: float = 1 / 3) -> LeafGraph:
    """Graph of ``W^tag_q`` at orbit index ``j`` by ``n_iter`` graph-transform steps.

    Starts from the zero graph ``n_iter`` steps away (ahead for ``s``, behind for
    ``u``) and pulls back with ``f~^{-1}`` (stable) or pushes forward with
    ``f~`` (unstable), refitting the image as a graph each step.  A slope above
    ``cap`` is projected back onto the cap (the fixed point satisfies it; the
    iterates need not), and the projection is recorded in the trace.
    """
    u = charts.u
    d = charts.window.dim
    k_in = d - u if tag == "s" else u
    k_out = u if tag == "s" else d - u
    monos = _monomials(k_in, degree)
    grid = _disc_grid(k_in, q, n_grid)
    coef = np.zeros((len(monos), k_out))
    trace = []
    if tag == "s":
        steps = range(j + n_iter - 1, j - 1, -1)
    else:
        steps = range(j - n_iter, j)
    resid = 0.0
    for i in steps:
        g = LeafGraph(tag, i + 1 if tag == "s" else i, q, coef, monos, grid)
        src = g.points()
        if tag == "s":
            img = np.array([charts.f_tilde_inv(i, v) for v in src])
            b, a = img[:, u:], img[:, :u]
        else:
            img = np.array([charts.f_tilde(i, v) for v in src])
            b, a = img[:, :u], img[:, u:]
        keep = np.linalg.norm(b, axis=1) <= q * (1 + 1e-9)
        if keep.sum() < max(len(monos) + 2, 5):
            raise GraphTransformDivergence("image of the disc no longer covers the domain", trace)
        X = _design(b[keep], monos)
        coef, *_ = np.linalg.lstsq(X, a[keep], rcond=None) if monos else (coef,)
        resid = float(np.abs(X @ coef - a[keep]).max()) if monos else float(np.abs(a[keep]).max())
        new = LeafGraph(tag, i if tag == "s" else i + 1, q, coef, monos, grid)
        slope = new.max_slope()
        projected = slope > cap
        if projected:
            coef = coef * (cap / slope)
        trace.append({"index": new.index, "slope": slope, "projected": projected,
                      "fit_residual": resid})
    if trace and trace[-1]["projected"]:
        raise GraphTransformDivergence(
            f"graph slope {trace[-1]['slope']:.3f} exceeds {cap:.3f} at index {j}", trace)
    return LeafGraph(tag, j, q, coef, monos, grid, trace, resid)


def local_manifold(model, omega, x, tag: str, q: float, n_iter: int = 20, charts=None,
                   j: int = 0, degree: int = 3, margin: int = 300) -> LeafGraph:
    """Local stable/unstable manifold through ``(x, omega)`` as a graph in the Lyapunov chart."""
    if charts is None:
        charts = orbit_charts(model, omega, x, n_iter + 5, margin)
    q = min(q, chart_radius(charts, j, charts.eps)[0])
    return graph_transform(charts, j, tag, q, n_iter, degree)


@dataclass
class ContractionFit:
    rates_chart: np.ndarray  # per-point (1/n) log(|v_n| / |v_0|) in chart norm
    k: float
    delta: float
    rate_ambient: float
    lam: float
    eps: float

    def within(self, width: float = 2.0) -> bool:
        return bool(np.all(np.abs(self.rates_chart - self.lam) <= width * self.eps))


def contraction_check(charts: ChartSequence, graph: LeafGraph, n_steps: int = 10,
                      n_points: int = 8) -> ContractionFit:
    """Forward (stable) or backward (unstable) contraction of points on a local leaf.

    Distances are measured in the Lyapunov charts along the orbit, where one
    step contracts by ``e^{lam +- eps}`` up to the nonlinear error, and in the
    ambient metric, where a fit of ``d_n <= k e^{(lam + delta) n} d_0`` is reported.
    """
    j = graph.index
    model = charts.model
    sign = 1 if graph.tag == "s" else -1
    lam = charts.lam_s if graph.tag == "s" else -charts.lam_u
    b = graph.grid[np.linspace(0, len(graph.grid) - 1, n_points + 2).astype(int)[1:-1]]
    b = b[np.linalg.norm(b, axis=1) > 0]
    pts = graph.points(b)
    rates, amb = [], []
    for v in pts:
        p = charts.chart(j).from_chart(v)
        x = charts.window.segment.point(j)
        d0 = model.distance(x, p)
        c0 = np.linalg.norm(v)
        ds = [d0]
        for n in range(1, n_steps + 1):
            i = j + sign * n
            name = charts.symbol(i - 1) if sign > 0 else model.inverse(charts.symbol(i))
            p = model.apply(name, p)
            ds.append(model.distance(charts.window.segment.point(i), p))
        cn = np.linalg.norm(charts.chart(j + sign * n_steps).to_chart(p))
        rates.append(np.log(cn / c0) / n_steps)
        amb.append(np.log(np.array(ds) / d0))
    amb = np.array(amb)
    n = np.arange(n_steps + 1)
    slope = float(np.polyfit(np.tile(n, len(amb)), amb.ravel(), 1)[0])
    delta = slope - lam
    k = float(np.exp((amb - (lam + delta) * n).max()))
    return ContractionFit(np.array(rates), k, float(delta), slope, float(lam), charts.eps)


def inclusion_check(charts: ChartSequence, graph: LeafGraph, next_graph: LeafGraph) -> dict:
    """``f~(W^s_q) subset W^s_{q'}`` at the next index: distance of images to the next graph."""
    if graph.tag != "s":
        raise ValueError("inclusion check is stated for stable leaves")
    u = charts.u
    img = np.array([charts.f_tilde(graph.index, v) for v in graph.points()])
    a, b = img[:, :u], img[:, u:]
    gap = np.abs(a - next_graph.h(b)).max()
    q_prime = np.linalg.norm(b, axis=1).max()
    return {"max_gap": float(gap), "q_prime": float(q_prime),
            "contained": bool(q_prime <= graph.q)}


# ---------------------------------------------------------------------------
# unstable leaves and normal forms


@dataclass
class UnstableLeaf:
    """Points of the local unstable leaf through the orbit of ``y``, realized from the deep past.

    ``traj[p, m + depth]`` is the ``p``-th leaf point at orbit index ``m``
    (``-depth <= m <= ahead``).  Leaf points are forward images of points
    displaced along ``E^u`` at index ``-depth``, so backward orbits on the
    leaf are known without ever iterating backward.
    """

    charts: ChartSequence
    depth: int
    ahead: int
    params: np.ndarray  # displacements at index -depth in E^u coordinates
    traj: np.ndarray
    mats: list = field(default_factory=list)  # per leaf point: tangent maps along its orbit

    @property
    def model(self):
        return self.charts.model

    def point(self, p: int, m: int):
        return self.traj[p, m + self.depth]


def unstable_leaf(charts: ChartSequence, radius: float = 1e-3, ahead: int = 5,
                  n_points: int = 9, start_scale: float = 1e-8, max_depth: int | None = None,
                  seed: int = 0) -> UnstableLeaf:
    """Sample a local unstable leaf of radius about ``radius`` at index 0.

    The leaf is seeded at the most recent past index where the corresponding
    displacement along ``E^u`` has shrunk to ``start_scale``: deeper seeds would
    fall below the floating-point resolution of the points.
    """
    win = charts.window
    model = charts.model
    seg = win.segment
    if ahead > win.hi:
        raise WindowExhaustedError("leaf extends beyond the realized window")
    limit = -win.lo if max_depth is None else min(max_depth, -win.lo)
    u = win.u
    P = np.eye(u)
    depth = 0
    while True:
        depth += 1
        if depth > limit:
            raise WindowExhaustedError("past expansion too weak to seed the leaf within the window")
        P = P @ win.ru(-depth)
        if radius / np.linalg.svd(P, compute_uv=False).min() <= start_scale:
            break
    if u == 1:
        t = np.linspace(-1, 1, n_points)[:, None]
    else:
        rng = np.random.default_rng(seed)
        g = rng.normal(size=(n_points, u))
        t = g / np.linalg.norm(g, axis=1, keepdims=True) * rng.random((n_points, 1))
    params = (np.linalg.solve(P, radius * t.T)).T
    base = seg.point(-depth)
    Uq = win.Eu(-depth)
    traj = []
    for s in params:
        p = model.exp(base, Uq @ s)
        row = [p]
        for m in range(-depth, ahead):
            p = model.apply(seg.omega.atom(m), p)
            row.append(p)
        traj.append(row)
    return UnstableLeaf(charts, depth, ahead, params, np.array(traj))


@dataclass
class NormalForm:
    """Normal-form coordinate ``H_j`` at orbit index ``index`` evaluated on leaf points.

    ``H`` is in the orthonormal ``E^u`` frame at the base; ``phi`` is the chart
    coboundary, so ``H_new = e^{-phi} H``.
    """

    index: int
    base: int | None  # leaf point used as base (None: the orbit of y itself)
    H: np.ndarray
    depth_used: int
    phi: float | None
    ref: int

    @property
    def H_new(self) -> np.ndarray:
        return np.exp(-self.phi) * self.H


def _leaf_frames(leaf: UnstableLeaf, base: int):
    """Unstable frames and restricted cocycle along a leaf point's own orbit."""
    model = leaf.model
    win = leaf.charts.window
    U = win.Eu(-leaf.depth)
    frames, rs = [U], []
    for m in range(-leaf.depth, leaf.ahead):
        D = model.jacobian(leaf.charts.symbol(m), leaf.point(base, m))
        V = D @ U
        Q, R = np.linalg.qr(V)
        s = np.sign(np.diag(R))
        Q, R = Q * s, R * s[:, None]
        frames.append(Q)
        rs.append(R)
        U = Q
    return frames, rs


def normal_form(leaf: UnstableLeaf, j: int = 0, base: int | None = None, tol: float = 1e-9,
                min_depth: int = 3, ref: int | None = None) -> NormalForm:
    """``H_j(z) = lim_n P_{j <- j-n} (E^u coordinate of log(y_{j-n}, z_{j-n}))``.

    Without ``ref`` the depth grows until successive approximations differ by
    less than ``tol`` on all leaf points.  With ``ref`` the approximation uses
    the fixed reference index ``ref``, so coordinates at different indices or
    base points share one truncation and compare without truncation noise.
    """
    model = leaf.model
    win = leaf.charts.window
    if base is None:
        ys = [win.segment.point(m) for m in range(-leaf.depth, leaf.ahead + 1)]
        frames = [win.Eu(m) for m in range(-leaf.depth, leaf.ahead + 1)]
        rs = [win.ru(m) for m in range(-leaf.depth, leaf.ahead)]
    else:
        ys = list(leaf.traj[base])
        frames, rs = _leaf_frames(leaf, base)
    off = leaf.depth
    u = win.u
    if ref is not None and not -leaf.depth <= ref < j:
        raise WindowExhaustedError(f"reference index {ref} outside the leaf depth")
    P = np.eye(u)
    prev = None
    for n in range(1, j + leaf.depth + 1):
        m = j - n
        P = P @ rs[m + off]
        if ref is not None and m > ref:
            continue
        c = np.array([frames[m + off].T @ model.log(ys[m + off], leaf.point(p, m))
                      for p in range(len(leaf.params))])
        H = c @ P.T
        done = m == ref or (ref is None and prev is not None and n >= min_depth
                            and np.abs(H - prev).max() < tol)
        if done:
            phi = leaf.charts.phi_coboundary(j) if base is None else None
            return NormalForm(j, base, H, n, phi, m)
        prev = H
    raise NonConvergenceError(f"normal form at index {j} did not settle within depth {leaf.depth}")


def affine_residual(H_y: np.ndarray, H_z: np.ndarray) -> float:
    """Residual of the best affine fit ``H_y = A H_z + c`` (relative to the size of ``H_y``)."""
    X = np.hstack([H_z, np.ones((len(H_z), 1))])
    coef, *_ = np.linalg.lstsq(X, H_y, rcond=None)
    return float(np.abs(X @ coef - H_y).max() / max(np.abs(H_y).max(), 1e-300))


def conjugacy_residual(leaf: UnstableLeaf, j: int = 0, tol: float = 1e-9) -> float:
    """``|H_{j+1}(f z) - Ru_j H_j(z)|`` relative to ``|H_{j+1}|`` over leaf points."""
    a = normal_form(leaf, j, tol=tol)
    b = normal_form(leaf, j + 1, ref=a.ref)
    pred = a.H @ leaf.charts.window.ru(j).T
    return float(np.abs(b.H - pred).max() / np.abs(b.H).max())


def modified_scaling_check(nf: NormalForm, nf_next: NormalForm, tau: float, p: int) -> float:
    """``| ||H_new(F z)|| - e^tau ||H_new(z)|| | / ||H_new(z)||`` for leaf point ``p``."""
    a = np.linalg.norm(nf.H_new[p])
    b = np.linalg.norm(nf_next.H_new[p])
    if a == 0.0:
        return abs(b)
    return float(abs(b - np.exp(tau) * a) / a)
