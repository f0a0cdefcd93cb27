import mpmath
import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from surfdyn.cohomology import (LatticeAction, NonConvergenceError, boundary_measure_sample,
                                classify_isometry, dominant_axis, furstenberg_step,
                                furstenberg_vector, mass, non_elementary, projective_distance,
                                require_convergence, spectral_radius)
from surfdyn.errors import ConfigError
from surfdyn.models import load_model
from surfdyn.random_walk import FiniteMeasure, WalkWord

RHO = 9 + 4 * np.sqrt(5)


@pytest.fixture(scope="module")
def action(wehler_involutions):
    return LatticeAction.from_model(wehler_involutions)


def test_gram_and_mass(action):
    assert action.signature() == (1, 2)
    assert mass(np.zeros(3, dtype=int), action) == 0
    assert mass(action.kappa0, action) == 12
    a, b = np.array([1, 0, 2]), np.array([0, 3, -1])
    assert mass(2 * a + 3 * b, action) == 2 * mass(a, action) + 3 * mass(b, action)


def test_trichotomy(action):
    n = action.rank
    ident = classify_isometry(np.eye(n, dtype=int), action.gram)
    assert ident.kind == "elliptic" and ident.order == 1
    assert classify_isometry(action.product(["s1"]), action.gram).kind == "elliptic"
    assert classify_isometry(action.product(["s1", "s2"]), action.gram).kind == "parabolic"
    lox = classify_isometry(action.product(["s1", "s2", "s3"]), action.gram)
    assert lox.kind == "loxodromic"
    assert abs(lox.spectral_radius - RHO) < 1e-9
    # independent oracle: the quadratic factor x^2 - 18x + 1 has largest root 9 + 4 sqrt 5
    x = sp.Symbol("x")
    assert sp.factor(sp.Matrix(action.product(["s1", "s2", "s3"])).charpoly(x).as_expr()).has(
        x ** 2 - 18 * x + 1)
    with pytest.raises(ValueError):
        classify_isometry(np.diag([2, 1, 1]), action.gram)


def test_non_isometry_generator_rejected(action):
    with pytest.raises(ConfigError):
        LatticeAction(action.gram, {"bad": np.diag([2, 1, 1])}, action.kappa0)


@pytest.mark.parametrize("word", [["s1"], ["s1", "s2"], ["s1", "s2", "s3"], ["s2", "s3", "s1", "s3"]])
def test_classification_stable_under_powers(action, word):
    base = classify_isometry(action.product(word), action.gram)
    for k in range(2, 6):
        c = classify_isometry(action.product(word * k), action.gram)
        assert c.kind == base.kind
        if base.kind == "loxodromic":
            assert abs(c.spectral_radius - base.spectral_radius ** k) < 1e-6 * base.spectral_radius ** k


def test_spectral_radius_precision(action):
    with mpmath.workdps(50):
        r = spectral_radius(action.product(["s1", "s2", "s3"]), dps=50)
        assert abs(r - (9 + 4 * mpmath.sqrt(5))) < mpmath.mpf(10) ** -40


def test_single_loxodromic_converges_to_eigenvector(action):
    M = action.product(["s1", "s2", "s3"])
    pc = require_convergence(furstenberg_vector(action, ["s1", "s2", "s3"] * 100, n=256))
    attracting, _ = dominant_axis(M)
    assert projective_distance(pc.vector, attracting) < 1e-8
    assert abs(pc.self_pairing) < 1e-8
    assert pc.positive_cone


def test_parabolic_word_does_not_converge(action):
    pc = furstenberg_vector(action, ["s1", "s2"] * 200, n=256)
    assert not pc.converged
    with pytest.raises(NonConvergenceError):
        require_convergence(pc)


def test_elliptic_word_does_not_converge(action):
    pc = furstenberg_vector(action, ["s1"] * 300, n=256)
    assert not pc.converged


def test_start_class_must_be_positive(action):
    with pytest.raises(ValueError):
        furstenberg_vector(action, ["s1"] * 10, a=np.array([1, -1, 0]), n=8)


@given(st.integers(0, 10**6), st.sampled_from(["s1", "s2", "s3"]))
def test_furstenberg_step_equivariance(seed, name):
    model = load_model({"type": "wehler"})
    act = LatticeAction.from_model(model)
    rng = np.random.default_rng(seed)
    names = list(rng.choice(["s1", "s2", "s3"], size=6))
    P = act.product(names).astype(float)
    a = act.kappa0.astype(float)
    P2, v = furstenberg_step(act, P, name, a)
    direct = act.product(names + [name]).astype(float) @ a
    direct = direct / mass(direct, act)
    assert np.abs(v - direct).max() <= 1e-10 * max(1.0, np.abs(direct).max())
    assert abs(mass(v, act) - 1.0) < 1e-10


def test_non_elementary_detection(action):
    assert non_elementary(action)["non_elementary"]
    m = load_model({"type": "wehler", "generators": ["s1s2s3", "s3s2s1"]})
    # the two words are mutually inverse, so they share one axis
    assert not non_elementary(LatticeAction.from_model(m))["non_elementary"]
    assert not non_elementary(LatticeAction.from_model(m, ["s1s2s3"]))["non_elementary"]


def test_boundary_sample_inverse_loxodromic_pair():
    m = load_model({"type": "wehler", "generators": ["s1s2s3", "s3s2s1"]})
    act = LatticeAction.from_model(m)
    bs = boundary_measure_sample(act, FiniteMeasure.uniform(["s1s2s3", "s3s2s1"]), n_samples=60)
    attracting, repelling = dominant_axis(act.product(["s1s2s3"]))
    near_a = np.mean([projective_distance(c.vector, attracting) < 1e-3 for c in bs.classes])
    near_r = np.mean([projective_distance(c.vector, repelling) < 1e-3 for c in bs.classes])
    assert near_a > 0.1 and near_r > 0.1
    assert bs.distinct_directions >= 2 and bs.major_directions >= 2
    assert bs.positive_cone_fraction >= 0.99
    assert bs.elementary


def test_boundary_sample_non_elementary_generators(action):
    bs = boundary_measure_sample(action, FiniteMeasure.uniform(["s1", "s2", "s3"]), n_samples=40,
                                n_iter=1024)
    assert not bs.elementary
    assert bs.positive_cone_fraction >= 0.99
    assert bs.converged_fraction >= 0.9
    assert bs.distinct_directions >= 30


def test_boundary_sample_single_loxodromic_is_elementary():
    m = load_model({"type": "wehler", "generators": ["s1s2s3"]})
    act = LatticeAction.from_model(m)
    bs = boundary_measure_sample(act, FiniteMeasure(("s1s2s3",), (1.0,)), n_samples=10)
    assert bs.elementary and bs.distinct_directions == 1 and not bs.atom_free


def test_walkword_input(action):
    w = WalkWord(FiniteMeasure.uniform(["s1", "s2", "s3"]), seed=3)
    pc = furstenberg_vector(action, w, n=64)
    assert pc.n_used == 64 and np.isfinite(pc.vector).all()
