import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import GOLDEN_RATIO_EXP
from surfdyn.cocycle import (CocycleWindow, default_epsilon, grassmann_distance, holder_diagnostic,
                             lyapunov_exponents, lyapunov_norm, nuh_estimate, orbit_segment,
                             oseledets_splitting, subspace_distance)
from surfdyn.models import load_model
from surfdyn.random_walk import FiniteMeasure, WalkWord

X0 = np.array([0.1, 0.2, 0.3, 0.4])


def test_single_matrix_exponents(torus, single_a):
    r = lyapunov_exponents(torus, single_a, X0, 0, 10_000)
    assert np.allclose(r.exponents, [GOLDEN_RATIO_EXP] * 2 + [-GOLDEN_RATIO_EXP] * 2, atol=1e-6)
    assert abs(r.exponents.sum()) < 1e-9


def test_identity_support_zero_exponents():
    m = load_model({"type": "torus", "generators": {"I": [[1, 0], [0, 1]]}})
    r = lyapunov_exponents(m, FiniteMeasure(("I",), (1.0,)), X0, 0, 1000)
    assert np.array_equal(r.exponents, np.zeros(4))


def test_inverse_pair_sum_within_three_stderr(torus):
    mu = FiniteMeasure.uniform(["A", "A^-1"])
    r = lyapunov_exponents(torus, mu, X0, list(range(10)), 10_000)
    assert abs(r.plus_minus) <= 3 * r.plus_minus_stderr


def test_complex_linear_exponents_come_in_pairs(torus, pair_ac):
    r = lyapunov_exponents(torus, pair_ac, X0, 3, 20_000)
    assert abs(r.exponents[0] - r.exponents[1]) < 1e-9
    assert abs(r.exponents[2] - r.exponents[3]) < 1e-9


def test_wehler_sum_matches_log_det(wehler, wehler_measure, wehler_point):
    r = lyapunov_exponents(wehler, wehler_measure, wehler_point, 0, 5000)
    assert r.sum_check < 1e-9
    assert r.lambda_plus > 0 > r.lambda_minus


def test_reversal_duality(torus, pair_ac):
    fwd = lyapunov_exponents(torus, pair_ac, X0, 4, 20_000)
    rev_measure = WalkWord(pair_ac, seed=4).reversed(torus.inverse).measure
    rev = lyapunov_exponents(torus, rev_measure, X0, 4, 20_000)
    assert np.allclose(rev.exponents, -fwd.exponents[::-1], atol=0.02)


def test_single_matrix_splitting_oracle(torus, single_a):
    fr = oseledets_splitting(torus, WalkWord(single_a, seed=0), X0)
    phi = (1 + np.sqrt(5)) / 2
    vu = np.array([phi, 1.0]) / np.hypot(phi, 1.0)
    vs = np.array([-1.0, phi]) / np.hypot(phi, 1.0)
    Eu = np.zeros((4, 2)); Eu[:2, 0] = vu; Eu[2:, 1] = vu
    Es = np.zeros((4, 2)); Es[:2, 0] = vs; Es[2:, 1] = vs
    assert grassmann_distance(fr.Eu, Eu) < 1e-8
    assert grassmann_distance(fr.Es, Es) < 1e-8
    assert abs(fr.angle - np.pi / 2) < 1e-8
    assert np.allclose(fr.Eu.T @ fr.Eu, np.eye(2), atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_equivariance_residual_random(torus, pair_ac, seed):
    fr = oseledets_splitting(torus, WalkWord(pair_ac, seed=seed), X0)
    assert fr.residual < 1e-6
    assert 0 < fr.angle <= np.pi / 2 + 1e-12


def test_equivariance_residual_many_seeds_wehler(wehler, wehler_measure):
    rng = np.random.default_rng(5)
    res = []
    for seed, p in enumerate(wehler.sample_points(rng, 100)):
        fr = oseledets_splitting(wehler, WalkWord(wehler_measure, seed=seed), p, 200, 200)
        res.append(fr.residual)
    assert max(res) < 1e-6


def test_lyapunov_norm_closed_form(torus, single_a):
    w = WalkWord(single_a, seed=0)
    fr = oseledets_splitting(torus, w, X0)
    v = fr.Eu[:, 0]
    eps = 0.01
    for N in (0, 1, 5, 40):
        got = lyapunov_norm(v, "u", X0, w, eps, N, model=torus, lam=GOLDEN_RATIO_EXP)
        n = np.arange(1, N + 1)
        exact = np.sqrt(1 + 2 * np.exp(-2 * eps * n).sum())
        assert abs(got - exact) < 1e-10


@given(st.integers(0, 1000), st.floats(0.001, 0.05))
def test_lyapunov_norm_monotone_and_dominates(seed, eps):
    model = load_model({"type": "torus", "generators": {"A": [[2, 1], [1, 1]],
                                                          "C": {"re": [[1, 0], [0, 0]],
                                                                "im": [[0, 1], [1, 0]]}}})
    mu = FiniteMeasure.uniform(["A", "C"])
    w = WalkWord(mu, seed=seed)
    seg = orbit_segment(model, w, X0, -200, 200)
    win = CocycleWindow(seg)
    v = win.Eu(0)[:, 0] * 2.5
    vals = [lyapunov_norm(v, "u", X0, w, eps, N, window=win, lam=0.495) for N in (0, 3, 10, 30)]
    assert vals[0] == pytest.approx(2.5, abs=1e-12)
    assert all(a <= b * (1 + 1e-12) for a, b in zip(vals, vals[1:]))
    assert vals[-1] >= np.linalg.norm(v) * (1 - 1e-12)


def test_default_epsilon_rule():
    assert default_epsilon(0.96, -0.96) == pytest.approx(min(1, 0.96 / 200) / 10)
    assert default_epsilon(2e3, -1e3) == pytest.approx(1 / 10)


def test_nuh_single_matrix_bounded(torus, single_a):
    w = WalkWord(single_a, seed=0)
    Ls = [nuh_estimate(torus, w, X0, N, 5).L for N in (10, 40, 80)]
    assert max(Ls) < 2.0


def test_nuh_random_products(torus, pair_ac):
    e = nuh_estimate(torus, WalkWord(pair_ac, seed=4), X0, 30, 30)
    assert e.item3_ok
    assert e.item4_fraction_tempered >= 0.99


def test_holder_constant_field_unconstrained(torus, single_a):
    w = WalkWord(single_a, seed=0)
    rng = np.random.default_rng(0)
    base = rng.random(4)
    samples = []
    for k in range(40):
        p = (base + 0.02 * rng.standard_normal(4)) % 1.0
        samples.append((p, oseledets_splitting(torus, w, p, 100, 100).Es))
    res = holder_diagnostic(samples, -0.9, -0.95, 2.0, model=torus)
    assert res.unconstrained and res.alpha_hat is None


def test_subspace_distance_is_one_far_apart(torus):
    E = np.eye(4)[:, :2]
    assert subspace_distance(torus, np.zeros(4), E, np.full(4, 0.5), E, 0.5) == 1.0
