from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from surfdyn.charts import orbit_charts
from surfdyn.jets import (JetPoly2, basis_size, chain_constant, chain_matrix, compose_chain,
                          homomorphism_error, jet_compose, jet_constant, jet_from_map,
                          lock_ordering, precomposition_matrix, random_jet, scalar_block,
                          second_derivative_bound, taylor_sandwich, validation_suite)
from surfdyn.random_walk import WalkWord

WORKED = np.array([[2, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 2, 4, 0, 0],
                   [0, 0, 0, 1, 0], [0, 0, 0, 0, 2]], dtype=float)


def example_map(v):
    x, y = v
    return np.array([2 * x, x * x + y])


def test_jet_validation():
    with pytest.raises(ValueError):
        JetPoly2(np.eye(3), np.zeros((3, 3, 3)))
    bad = np.zeros((2, 2, 2))
    bad[0, 0, 1] = 1.0
    with pytest.raises(ValueError):
        JetPoly2(np.eye(2), bad)
    with pytest.raises(ValueError):
        jet_from_map(lambda v: np.asarray(v) + 1.0, 2)


def test_hand_differentiated_example():
    j = jet_from_map(example_map, 2)
    assert np.allclose(j.D1, [[2, 0], [0, 1]], atol=1e-10)
    expected = np.zeros((2, 2, 2))
    expected[1, 0, 0] = 2.0
    assert np.allclose(j.D2, expected, atol=1e-8)
    lin = jet_from_map(lambda v: np.array([[1.0, 2.0], [3.0, 4.0]]) @ v, 2)
    assert np.abs(lin.D2).max() < 1e-8


def test_finite_differences_on_random_quadratics():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(20):
        n = int(rng.choice([2, 4]))
        exact = random_jet(rng, n, 1.0)
        fd = jet_from_map(exact, n)
        worst = max(worst, np.abs(fd.D1 - exact.D1).max(), np.abs(fd.D2 - exact.D2).max())
    assert worst < 1e-8


def test_worked_matrix_and_self_composition():
    j = JetPoly2(np.array([[2.0, 0.0], [0.0, 1.0]]),
                 np.array([np.zeros((2, 2)), [[2.0, 0.0], [0.0, 0.0]]]))
    assert np.array_equal(scalar_block(j), WORKED)
    jj = jet_compose(j, j)
    assert jj.D1[0, 0] == 4.0 and jj.D1[0, 1] == 0.0
    assert jj.D2[1, 0, 0] == 10.0
    assert np.array_equal(precomposition_matrix(JetPoly2.identity(2)), np.eye(10))
    assert precomposition_matrix(JetPoly2.identity(4)).shape == (4 * basis_size(4),) * 2


def test_brute_force_composition_oracle():
    import sympy as sp
    x, y = sp.symbols("x y")
    f = sp.Matrix([2 * x, x ** 2 + y])
    ff = f.subs({x: f[0], y: f[1]}, simultaneous=True)
    assert sp.expand(ff[0]) == 4 * x
    assert sp.Poly(sp.expand(ff[1]), x, y).coeff_monomial(x ** 2) == 5  # D2 = 10


@given(st.integers(0, 10**6), st.sampled_from([2, 4]))
def test_identity_is_neutral_and_linear_jets_multiply(seed, n):
    rng = np.random.default_rng(seed)
    j = random_jet(rng, n, 0.7)
    for c in (jet_compose(j, JetPoly2.identity(n)), jet_compose(JetPoly2.identity(n), j)):
        assert np.allclose(c.D1, j.D1) and np.allclose(c.D2, j.D2)
    A, B = rng.normal(size=(n, n)), rng.normal(size=(n, n))
    c = jet_compose(JetPoly2(A, np.zeros((n, n, n))), JetPoly2(B, np.zeros((n, n, n))))
    assert np.allclose(c.D1, A @ B) and np.abs(c.D2).max() == 0.0


@given(st.integers(0, 10**6))
def test_composition_associative(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_jet(rng, 2, 0.6) for _ in range(3))
    l = jet_compose(jet_compose(a, b), c)
    r = jet_compose(a, jet_compose(b, c))
    assert np.allclose(l.D1, r.D1, atol=1e-12) and np.allclose(l.D2, r.D2, atol=1e-12)


def test_ordering_lock():
    lock = lock_ordering(0)
    assert lock["ordering"] == "right_to_left"
    assert lock["errors"]["right_to_left"] < 1e-9 < lock["errors"]["left_to_right"]


@given(st.integers(0, 10**6), st.integers(1, 6), st.sampled_from([2, 4]))
def test_homomorphism(seed, length, n):
    rng = np.random.default_rng(seed)
    jets = [random_jet(rng, n, 0.5) for _ in range(length)]
    assert homomorphism_error(jets, "right_to_left") < 1e-9


def test_entry_bound():
    rng = np.random.default_rng(1)
    for _ in range(30):
        j = random_jet(rng, 2, 0.8)
        assert np.abs(scalar_block(j)).max() <= jet_constant(j)


def test_exact_mode_matches_float():
    rng = np.random.default_rng(2)
    for _ in range(5):
        jets = [random_jet(rng, 2, 0.5) for _ in range(3)]
        ex = chain_matrix([j.to_exact() for j in jets])
        assert isinstance(ex[0, 0], Fraction)
        assert np.abs(ex.astype(float) - chain_matrix(jets)).max() < 1e-12


def test_linear_chain_bound_measures_zero(torus, single_a):
    A = torus.jacobian("A")
    r = second_derivative_bound([lambda v: A @ v] * 3, 4)
    assert r["measured"] < 1e-8 and r["ok"]
    assert chain_constant([jet_from_map(lambda v: A @ v, 4)]) >= 1


def test_wehler_chain_second_derivative_bound(wehler, wehler_measure, wehler_point):
    seq = orbit_charts(wehler, WalkWord(wehler_measure, seed=0), wehler_point, 10)
    zero = np.zeros(2)
    maps = [lambda v, j=j: seq.f_tilde(j, v) - seq.f_tilde(j, zero) for j in range(5)]
    r = second_derivative_bound(maps, 2)
    assert r["n"] == 5 and r["ok"]
    assert second_derivative_bound(maps, 2, t=2.5, k=0.7)["n"] == 3


def test_taylor_sandwich_on_chart_map(wehler, wehler_measure, wehler_point):
    seq = orbit_charts(wehler, WalkWord(wehler_measure, seed=0), wehler_point, 10)
    zero = np.zeros(2)
    rng = np.random.default_rng(3)
    samples = rng.normal(size=(10, 2)) * 1e-3
    out = taylor_sandwich(lambda v: seq.f_tilde(0, v) - seq.f_tilde(0, zero), 2, samples)
    assert out["upper"] and out["lower"]


def test_validation_suite_passes():
    assert all(r["ok"] for r in validation_suite(0))


def test_compose_chain_matches_sequential():
    rng = np.random.default_rng(4)
    jets = [random_jet(rng, 2, 0.5) for _ in range(4)]
    c = compose_chain(jets)
    v = np.array([1e-3, -2e-3])
    w = v
    for j in jets:
        w = j(w)
    assert np.linalg.norm(c(v) - w) < 1e-7
