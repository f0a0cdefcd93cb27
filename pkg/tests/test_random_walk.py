import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from surfdyn.random_walk import (FiniteMeasure, WalkWord, compose, omega_distance, skew_step,
                                 worker_seed)


def test_measure_validation():
    with pytest.raises(ValueError):
        FiniteMeasure(("A", "B"), (0.5, 0.6))
    with pytest.raises(ValueError):
        FiniteMeasure(("A", "B"), (1.0, 0.0))
    mu = FiniteMeasure.uniform(["A", "B", "C"])
    assert abs(sum(mu.weights) - 1) < 1e-12


@given(st.integers(0, 2**63 - 1), st.integers(-500, 500), st.integers(-50, 50))
def test_shift_and_determinism(seed, n, m):
    mu = FiniteMeasure(("A", "B", "C"), (0.2, 0.3, 0.5))
    w = WalkWord(mu, seed=seed)
    assert w.shift(m)[n] == w[n + m]
    assert WalkWord(mu, seed=seed)[n] == w[n]


def test_symbol_frequencies_match_weights():
    mu = FiniteMeasure(("A", "B"), (0.25, 0.75))
    s = WalkWord(mu, seed=11).symbols(0, 200_000)
    assert abs(np.mean(s == 0) - 0.25) < 4 * np.sqrt(0.25 * 0.75 / 200_000)


def test_compose_oracles(torus, single_a):
    w = WalkWord(single_a, seed=0)
    x = np.array([0.3, 0.1, 0.7, 0.2])
    assert np.array_equal(compose(torus, w, 0, x), x)
    L = torus.lattice_matrix("A")
    assert np.allclose(compose(torus, w, 2, x), (L @ L @ x) % 1.0, atol=1e-12)
    n = 7
    assert np.allclose(compose(torus, w, n, x), (np.linalg.matrix_power(L, n) @ x) % 1.0, atol=1e-12)


def test_compose_inverse(torus, pair_ac):
    w = WalkWord(pair_ac, seed=5)
    x = np.array([0.3, 0.1, 0.7, 0.2])
    back = compose(torus, w, -1, compose(torus, w, 1, x))
    assert np.linalg.norm(torus.log(x, back)) < 1e-12


def test_skew_step_inverse_and_semigroup(torus, pair_ac):
    w = WalkWord(pair_ac, seed=9)
    x = np.array([0.13, 0.42, 0.77, 0.05])
    x1, w1 = skew_step(torus, x, w, 1)
    x0, w0 = skew_step(torus, x1, w1, -1)
    assert w0.same_symbols(w, -64, 65)
    assert np.linalg.norm(torus.log(x, x0)) < 1e-12
    y, v = x, w
    for _ in range(5):
        y, v = skew_step(torus, y, v, 1)
    y5, v5 = skew_step(torus, x, w, 5)
    assert np.array_equal(y, y5) and v.same_symbols(v5, -64, 65)


@given(st.integers(-5, 5), st.integers(-5, 5))
def test_skew_additivity(n, m):
    from surfdyn.experiments import golden_torus_spec
    from surfdyn.models import load_model
    model = load_model(golden_torus_spec())
    w = WalkWord(FiniteMeasure.uniform(["A", "C"]), seed=1)
    x = np.array([0.2, 0.4, 0.6, 0.8])
    a, wa = skew_step(model, *skew_step(model, x, w, n), m)
    b, wb = skew_step(model, x, w, n + m)
    assert wa.same_symbols(wb, -64, 65)
    assert np.linalg.norm(model.log(a, b)) < 1e-10


def test_omega_distance_values():
    mu = FiniteMeasure.uniform(["A", "B"])
    w = WalkWord(mu, seed=2)
    assert omega_distance(w, w) == 0.0
    assert omega_distance(w, w.with_symbol(0, 1 - w[0])) == 1.0
    other = WalkWord.periodic(mu, [0])
    comp = WalkWord.periodic(mu, [1])
    d = omega_distance(other, comp, 60)
    assert abs(d - 3.0) < 1e-12


words = st.builds(lambda s: WalkWord(FiniteMeasure.uniform(["A", "B", "C"]), seed=s),
                  st.integers(0, 10**6))


@given(words, words, words)
def test_omega_distance_pseudometric(a, b, c):
    dab, dbc, dac = omega_distance(a, b), omega_distance(b, c), omega_distance(a, c)
    assert dab == omega_distance(b, a)
    assert 0 <= dab <= 3
    assert dac <= dab + dbc + 1e-12


def test_worker_seed_deterministic_and_distinct():
    assert worker_seed(7, 3) == worker_seed(7, 3)
    assert len({worker_seed(7, k) for k in range(100)}) == 100
