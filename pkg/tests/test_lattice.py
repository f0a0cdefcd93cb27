import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from surfdyn.errors import ConfigError
from surfdyn.lattice import (IntegralLattice, eichler_fixture, is_even, isometries,
                             isometry_report, null_vectors, parabolic_absence, represents,
                             verify_appendix, weyl_trivial)

G7 = [[7, 0], [0, -14]]
G14 = [[14, 0], [0, -28]]
U = [[0, 1], [1, 0]]


def test_lattice_validation():
    with pytest.raises(ConfigError):
        IntegralLattice([[1, 2], [3, 4]])
    assert IntegralLattice(G7).signature() == (1, 1)
    assert IntegralLattice(G7).q([1, 1]) == -7


def test_evenness():
    r = is_even(IntegralLattice(G7))
    assert not r.ok and r.witness == [1, 0] and IntegralLattice(G7).q(r.witness) == 7
    assert is_even(IntegralLattice(G14)).ok
    assert is_even(IntegralLattice(U)).ok


def test_represents():
    r = represents(IntegralLattice(G7), -2)
    assert not r.ok and r.status == "certified_absent"
    r = represents(IntegralLattice([[2, 0], [0, -4]]), -2)
    assert r.ok and r.witness == [1, 1]
    r = represents(IntegralLattice([[1, 0], [0, -2]]), 1)
    assert r.ok and r.witness == [1, 0]
    r = represents(IntegralLattice([[1, 0], [0, 1]]), -1, search_bound=3)
    assert r.status == "absent_within_bound"
    with pytest.raises(ValueError):
        represents(IntegralLattice(G7), 1, search_bound=0)


def test_null_vectors():
    r = null_vectors(IntegralLattice(G7))
    assert r.ok and r.status == "certified_none" and "irrational" in r.certificate
    r = null_vectors(IntegralLattice(U), search_bound=3)
    assert not r.ok and [1, 0] in r.witness
    r = null_vectors(IntegralLattice([[1, 0], [0, -4]]), search_bound=3)
    assert not r.ok and r.witness[0] in ([2, 1], [2, -1])


def test_isometries_small_box():
    L = IntegralLattice(G7)
    Ms = isometries(L, 5)
    assert [[3, 4], [2, 3]] in Ms and [[3, -4], [-2, 3]] in Ms
    assert [[1, 0], [0, 1]] in Ms and [[-1, 0], [0, -1]] in Ms
    P = sp.Matrix([[3, 4], [2, 3]])
    assert P.T * sp.Matrix(G7) * P == sp.Matrix(G7)
    assert set(P.eigenvals()) == {3 + 2 * sp.sqrt(2), 3 - 2 * sp.sqrt(2)}


def test_isometry_report_axes():
    rep = isometry_report(IntegralLattice(G7), 50)
    assert len(rep.hyperbolic) == 8
    assert rep.distinct_axes == 2
    assert rep.kinds["elliptic"] + rep.kinds["loxodromic"] == rep.total


def test_parabolic_absence():
    r = parabolic_absence(IntegralLattice(G7), 10)
    assert r.ok and r.status == "certified"
    r = parabolic_absence(IntegralLattice(U), 5)
    assert r.ok and r.status == "scan_none_within_bound"
    r = parabolic_absence(IntegralLattice([[1, 0], [0, -4]]), 5)
    assert r.status.startswith("scan")


def test_weyl():
    assert weyl_trivial(IntegralLattice(G7)).ok
    assert weyl_trivial(IntegralLattice(G14)).ok
    L, _ = eichler_fixture()
    r = weyl_trivial(L, 3)
    assert not r.ok and L.q(r.witness) == -2


def test_eichler_transvection_is_unipotent_isometry():
    L, M = eichler_fixture()
    assert L.is_isometry(M)
    N = sp.Matrix(M) - sp.eye(3)
    assert N != sp.zeros(3, 3) and (N ** 3).is_zero_matrix


@pytest.mark.parametrize("gram,even", [(G7, False), (G14, True)])
def test_verify_appendix(gram, even):
    res = dict(verify_appendix(gram))
    assert res["even"].ok is even
    for name in ("signature_(1,1)", "no_minus_2", "no_null_vectors",
                 "two_hyperbolic_distinct_axes", "parabolic_absence"):
        assert res[name].ok, name


@given(st.integers(1, 20), st.integers(2, 30).filter(lambda d: int(np.sqrt(d)) ** 2 != d),
       st.integers(-5, 5), st.integers(-5, 5))
def test_diagonal_form_properties(c, d, x, y):
    L = IntegralLattice([[c, 0], [0, -c * d]])
    assert L.q([x, y]) == c * (x * x - d * y * y)
    assert null_vectors(L).status == "certified_none"
    assert is_even(L).ok is (c % 2 == 0)
    if x == 0 and y == 0:
        return
    r = represents(L, L.q([x, y]), search_bound=5)
    assert r.ok and L.q(r.witness) == L.q([x, y])


@given(st.integers(1, 10), st.integers(-60, 60))
def test_congruence_shortcut(c, value):
    L = IntegralLattice([[c, 0], [0, -2 * c]])
    r = represents(L, value, search_bound=4)
    if value % c:
        assert r.status == "certified_absent"
    elif r.ok:
        assert L.q(r.witness) == value
