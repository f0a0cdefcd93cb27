import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import GOLDEN_RATIO_EXP
from surfdyn.charts import orbit_charts
from surfdyn.errors import WindowExhaustedError
from surfdyn.random_walk import FiniteMeasure, WalkWord, compose
from surfdyn.suspension import (ConstantRoof, RoofSequence, SuspensionPoint, birkhoff_diagnostic,
                                elapsed, flow_law_check, pushforward_ks, roof, standard_flow,
                                tc_density, theta_average, time_changed_flow)

X0 = np.array([0.1, 0.2, 0.3, 0.4])


@pytest.fixture(scope="module")
def wehler_seq(wehler, wehler_measure, wehler_point):
    return orbit_charts(wehler, WalkWord(wehler_measure, seed=0), wehler_point, 60)


def test_point_validation(pair_ac):
    with pytest.raises(ValueError):
        SuspensionPoint(X0, WalkWord(pair_ac), 1.0)


def test_standard_flow_examples(torus, pair_ac):
    w = WalkWord(pair_ac, seed=3)
    z = SuspensionPoint(X0, w, 0.2)
    z0 = standard_flow(torus, z, 0.0)
    assert z0.index == 0 and z0.k == 0.2 and np.array_equal(z0.x, X0)
    z1 = standard_flow(torus, z, 0.9)
    assert z1.index == 1 and abs(z1.k - 0.1) < 1e-15
    assert np.array_equal(z1.x, compose(torus, w, 1, X0))
    z2 = standard_flow(torus, z, -0.3)
    assert z2.index == -1 and abs(z2.k - 0.9) < 1e-15
    assert np.allclose(z2.x, compose(torus, w, -1, X0), atol=1e-15)


def test_boundary_is_right_continuous(torus, pair_ac):
    z = SuspensionPoint(X0, WalkWord(pair_ac, seed=3), 0.5)
    z1 = standard_flow(torus, z, 0.5)
    assert z1.index == 1 and z1.k == 0.0


def test_constant_roof_counts_maps(torus, pair_ac):
    tau0 = 0.7
    w = WalkWord(pair_ac, seed=1)
    z = SuspensionPoint(X0, w, 0.0)
    z3 = time_changed_flow(torus, z, 3 * tau0, ConstantRoof(tau0))
    assert z3.index == 3 and z3.k < 1e-12
    assert np.array_equal(z3.x, compose(torus, w, 3, X0))
    same = time_changed_flow(torus, z, 0.0, ConstantRoof(tau0))
    assert same.index == 0 and same.k == 0.0


@given(st.floats(0, 0.999), st.floats(-4, 4), st.floats(-4, 4))
def test_time_changed_group_law_elapsed(k, s, t):
    from surfdyn.experiments import golden_torus_spec
    from surfdyn.models import load_model
    model = load_model(golden_torus_spec())
    tau = RoofSequence(values=np.linspace(0.3, 1.7, 80), start=-40)
    z = SuspensionPoint(X0, WalkWord(FiniteMeasure.uniform(["A", "C"]), seed=5), k)
    a = time_changed_flow(model, time_changed_flow(model, z, t, tau), s, tau)
    b = time_changed_flow(model, z, s + t, tau)
    assert abs(elapsed(a, tau) - elapsed(b, tau)) < 1e-9
    assert abs(elapsed(b, tau) - elapsed(z, tau) - (s + t)) < 1e-9


def test_roof_sequence_guard():
    tau = RoofSequence(values=[0.5, 0.6], start=0)
    with pytest.raises(WindowExhaustedError):
        tau(2)
    with pytest.raises(ValueError):
        RoofSequence(values=[0.5, -0.1])


@pytest.mark.parametrize("model_name", ["torus", "wehler"])
def test_flow_laws(request, model_name, pair_ac, wehler_measure):
    model = request.getfixturevalue(model_name)
    mu = pair_ac if model_name == "torus" else wehler_measure
    x = model.sample_points(np.random.default_rng(0), 1)[0]
    std = flow_law_check(model, mu, 300, 0, x=x)
    assert std["ok"], std
    seq = orbit_charts(model, WalkWord(mu, seed=0), x, 40)
    tc = flow_law_check(model, mu, 300, 0, tau=RoofSequence(seq), x=x)
    assert tc["ok"], tc


def test_roof_identity_and_bounds(wehler_seq):
    for j in range(-50, 50):
        r = roof(wehler_seq, j)
        assert r.identity_residual < 1e-10
        assert r.within_bounds and r.tau > 0


def test_theta_average_near_lambda(wehler_seq):
    avg = theta_average(wehler_seq, -60, 60)
    assert abs(avg - wehler_seq.lam_u) < 0.15


def test_constant_roof_density_is_one():
    d = tc_density(None, None, None, roof_values=[0.8, 0.8, 0.8])
    assert d(0.8) == pytest.approx(1.0)


def test_density_normalization_and_bounds(torus, pair_ac):
    d = tc_density(torus, pair_ac, X0, seed=0, pilot_n=20_000)
    seq = orbit_charts(torus, WalkWord(pair_ac, seed=7), X0, 60,
                       exponents=(d.lam, -d.lam), eps=d.eps)
    taus = np.array([roof(seq, j).tau for j in range(-60, 60)])
    vals = d(taus)
    lo, hi = d.bounds()
    assert np.all((vals >= lo * (1 - 1e-12)) & (vals <= hi * (1 + 1e-12)))
    assert abs(vals.mean() - 1) < 0.05
    assert d.ratio_bound(taus) >= 1.0


def test_birkhoff_trivial_sets(torus, pair_ac):
    rows, _ = birkhoff_diagnostic(torus, pair_ac, X0, lambda p: np.ones(len(p), bool), [10, 100],
                                  [0, 1, 2])
    assert all(r[2] == 1.0 for r in rows)
    rows, _ = birkhoff_diagnostic(torus, pair_ac, X0, lambda p: np.zeros(len(p), bool), [10, 100],
                                  [0, 1, 2])
    assert all(r[2] == 0.0 for r in rows)


def test_birkhoff_clt_scaling(torus, pair_ac):
    def box(p):
        return (p[:, 0] < 0.5) & (p[:, 1] < 0.5)
    rows, summary = birkhoff_diagnostic(torus, pair_ac, X0, box, [100, 1000, 10000],
                                        list(range(100)), reference=0.25)
    assert abs(summary["clt_slope"] + 0.5) < 0.15
    assert not summary["per_T"][-1]["flag"]


def test_pushforward_preserves_lebesgue(torus, pair_ac):
    pts = np.random.default_rng(4).random((2000, 4))
    pvals = pushforward_ks(torus, pair_ac, pts, 2.5, seed=1)
    assert min(pvals) > 1e-3
