import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from surfdyn.errors import ConfigError
from surfdyn.models import load_model
from surfdyn.models.torus import real_form
from surfdyn.random_walk import FiniteMeasure, WalkWord
from surfdyn.cocycle import orbit_segment


def test_torus_apply_oracle(torus):
    out = torus.apply("A", np.array([0.25, 0.5, 0.0, 0.0]))
    assert np.allclose(out, [0.0, 0.75, 0.0, 0.0], atol=1e-15)
    assert np.array_equal(torus.apply("A", np.zeros(4)), np.zeros(4))


def test_torus_tangent_constant(torus):
    rng = np.random.default_rng(0)
    for name in ("A", "C", "A^-1"):
        J = torus.jacobian(name, rng.random(4))
        assert np.array_equal(J, torus.jacobian(name, rng.random(4)))
    assert np.array_equal(torus.jacobian("A"), real_form([[2, 1], [1, 1]]))


def test_torus_rejects_non_lattice_map():
    with pytest.raises(ConfigError):
        load_model({"type": "torus", "generators": {"B": [[0.5, 0], [0, 2]]}})


def test_torus_volume_product(torus, pair_ac):
    seg = orbit_segment(torus, WalkWord(pair_ac, seed=1), np.full(4, 0.3), 0, 200)
    dets = np.array([np.linalg.det(m) for m in seg.mats])
    assert np.allclose(np.abs(dets), 1.0, atol=1e-12)
    assert all(torus.is_volume_preserving(n) for n in ("A", "C"))


def test_torus_fd_jacobian(torus):
    x = np.array([0.31, 0.47, 0.11, 0.59])
    assert np.allclose(torus.fd_jacobian("C", x), torus.jacobian("C", x), rtol=1e-5, atol=1e-8)


def test_wehler_involutions_square_to_identity(wehler_involutions):
    m = wehler_involutions
    pts = m.sample_points(np.random.default_rng(1), 1000)
    assert np.max(np.abs(m.phi(pts))) < 1e-9
    for s in ("s1", "s2", "s3"):
        back = m.apply(s, m.apply(s, pts))
        assert np.max(np.abs(back - pts)) < 1e-10


def test_wehler_tangent_chain_rule(wehler_involutions):
    m = wehler_involutions
    rng = np.random.default_rng(2)
    for p in m.sample_points(rng, 20):
        T1 = m.tangent("s1", p)
        T2 = m.tangent("s1", T1.image)
        assert abs(T1.det) > 0
        assert np.allclose((T2 @ T1).matrix, np.eye(2), atol=1e-6)


def test_wehler_fd_cross_check(wehler):
    rng = np.random.default_rng(3)
    for p in wehler.sample_points(rng, 20):
        for name in ("s1s2", "s3s1"):
            J = wehler.jacobian(name, p)
            F = wehler.fd_jacobian(name, p, 1e-6)
            assert np.linalg.norm(J - F) / np.linalg.norm(J) < 1e-5


def test_wehler_cohomology(wehler_involutions):
    m = wehler_involutions
    G = m.cohomology_gram()
    assert G.tolist() == [[0, 2, 2], [2, 0, 2], [2, 2, 0]]
    S1 = m.cohomology_matrix("s1")
    assert S1[:, 0].tolist() == [-1, 2, 2]  # h1 -> -h1 + 2 h2 + 2 h3
    assert S1[:, 1].tolist() == [0, 1, 0] and S1[:, 2].tolist() == [0, 0, 1]
    for w in ("s1", "s2", "s3", "s1s2", "s1s2s3"):
        M = m.cohomology_matrix(w)
        assert (M.T @ G @ M == G).all()
    P = m.cohomology_matrix("s1s2s3")
    rho = max(abs(np.linalg.eigvals(P.astype(float))))
    assert abs(rho - (9 + 4 * np.sqrt(5))) < 1e-9


def test_torus_cohomology_isometries(torus):
    G = torus.cohomology_gram()
    for n in ("A", "C"):
        M = torus.cohomology_matrix(n)
        assert (M.T @ G @ M == G).all()


@given(st.floats(-1.2, 1.2), st.floats(-1.2, 1.2))
def test_wehler_orbits_stay_on_surface(a, b):
    m = load_model({"type": "wehler"})
    rng = np.random.default_rng(abs(hash((a, b))) % 2**32)
    p = m.sample_points(rng, 1)[0]
    w = WalkWord(FiniteMeasure.uniform(["s1", "s2", "s3"]), seed=int(rng.integers(1000)))
    seg = orbit_segment(m, w, p, 0, 50)
    assert max(abs(m.phi(seg.point(j))) for j in range(0, 51)) < 1e-9
