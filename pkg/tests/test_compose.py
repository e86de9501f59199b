import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from latquant.catalog import get_lattice
from latquant.compose import (g_of_scale, lamination_bound, laminate_generator, optimal_product_nsm,
                              optimal_scale, parse_composition, product_generator, product_lattice)
from latquant.errors import CompositionSyntaxError, DimensionMismatchError, InconsistentMomentsError
from latquant.estimate import estimate_moments, whiteness
from latquant.linalg import volume

from oracles import rectangle_G

A2_G = 0.080187537
A2_V = math.sqrt(3) / 2
pos = st.floats(0.05, 20.0)
dims = st.integers(1, 24)


def test_g_of_scale_examples():
    assert g_of_scale(1, 1, 1 / 12, 1, 1, 1 / 12, 1.0) == pytest.approx(1 / 12)
    assert g_of_scale(1, 1, 1 / 12, 1, 1, 1 / 12, 2.0) == pytest.approx(5 / 48)
    assert g_of_scale(1, 1, 1 / 12, 1, 1, 1 / 12, 2.0) == pytest.approx(rectangle_G(2.0))
    a = optimal_scale(2, A2_V, A2_G, 1, 1, 1 / 12)
    assert g_of_scale(2, A2_V, A2_G, 1, 1, 1 / 12, a) == pytest.approx(0.081222715, abs=5e-10)


def test_optimal_scale_examples():
    assert optimal_scale(3, 2.0, 0.07, 3, 2.0, 0.07) == pytest.approx(1.0)
    assert optimal_scale(2, 1, 1 / 12, 5, 1, 1 / 12) == pytest.approx(1.0)
    assert optimal_scale(2, A2_V, A2_G, 1, 1, 1 / 12) == pytest.approx(0.9129, abs=5e-5)


def test_optimal_scale_inconsistent():
    with pytest.raises(InconsistentMomentsError):
        optimal_scale(1, 1, 1 / 12, 1, 1, 1 / 12, E1=0.1)
    a = optimal_scale(1, 1, 1 / 12, 1, 4, 1 / 12, E1=1 / 12, E2=16 / 12)
    assert a == pytest.approx(0.25)


def test_nonpositive_inputs():
    with pytest.raises(ValueError):
        g_of_scale(1, 1, 1 / 12, 1, 1, 1 / 12, 0.0)
    with pytest.raises(ValueError):
        optimal_product_nsm([])


def test_optimal_product_examples():
    assert optimal_product_nsm([(12, 0.0700956), (1, 1 / 12)]) == pytest.approx(0.071034583, abs=5e-10)
    assert optimal_product_nsm([(24, 0.06577), (24, 0.06577)]) == pytest.approx(0.06577, abs=1e-15)
    assert optimal_product_nsm([(2, 0.080187537), (1, 0.083333333)]) == pytest.approx(0.081222715, abs=5e-10)


def test_product_generator():
    assert np.array_equal(product_generator([(np.eye(2), 1), ([[1.0]], 2)]).rows, np.diag([1.0, 1, 2]))
    B = product_generator([([[1, 0], [0.5, math.sqrt(3) / 2]], 1), ([[1.0]], 1.7)])
    assert volume(B) == pytest.approx(A2_V * 1.7)
    assert np.array_equal(product_generator([([[1.0]], 1), ([[1.0]], 1)]).rows, np.eye(2))


def test_laminate_generator():
    assert np.array_equal(laminate_generator([[1.0]], [0.0], 1.0).rows, np.eye(2))
    B = laminate_generator(get_lattice("A2").basis, [0, 0], 0.9)
    assert volume(B) == pytest.approx(0.9 * A2_V)
    with pytest.raises(DimensionMismatchError):
        laminate_generator([[1.0]], [0.0, 1.0], 1.0)


def test_laminate_hexagonal():
    B = laminate_generator([[1.0]], [0.5], math.sqrt(3) / 2)
    assert np.allclose(B.gram(), [[1, 0.5], [0.5, 1]])
    est = estimate_moments(B, 200_000, seed=3)
    assert abs(est.G_hat - A2_G) < 3 * est.se_G


def test_laminate_prism():
    A2 = get_lattice("A2")
    a = optimal_scale(2, A2.volume, A2.best_nsm, 1, 1, 1 / 12)
    B = laminate_generator(A2.basis, [0, 0], a)
    est = estimate_moments(B, 200_000, seed=4)
    assert abs(est.G_hat - 0.081222715) < 3 * est.se_G


def test_lamination_bound_examples():
    for n in (2, 5, 30):
        assert lamination_bound(1 / 12, n) == pytest.approx(1 / 12)
    assert lamination_bound(0.080187537, 3) == pytest.approx(0.081222715, abs=5e-10)
    assert lamination_bound(0.0700956, 13) == pytest.approx(0.071034583, abs=5e-10)
    assert lamination_bound(0.07, 9) == pytest.approx(optimal_product_nsm([(8, 0.07), (1, 1 / 12)]))


def test_parse_composition():
    assert parse_composition("K12*Z") == [("K12", None), ("Z", None)]
    assert parse_composition("L24*L16*Z") == [("L24", None), ("L16", None), ("Z", None)]
    assert parse_composition("A3**Z") == [("A3*", None), ("Z", None)]
    assert parse_composition("K12*A3*") == [("K12", None), ("A3*", None)]
    assert parse_composition("D4@2*Z") == [("D4", 2.0), ("Z", None)]
    assert parse_composition("A11^3*D10+") == [("A11^3", None), ("D10+", None)]
    assert parse_composition("K12 ⊗ E7*") == [("K12", None), ("E7*", None)]
    assert parse_composition("K12*") == [("K12*", None)]  # a dual name, rejected later by the catalog
    for bad in ("", "*Z", "K12**", "K12@-1*Z", "K12 Z"):
        with pytest.raises(CompositionSyntaxError):
            parse_composition(bad)


def test_product_plan():
    p = product_lattice("K12*Z")
    assert p.predicted_G == pytest.approx(0.071034583, abs=5e-10)
    assert p.scales[0] == 1.0
    e = [s * s * q.n * q.G * q.V ** (2 / q.n) / q.n for q, s in zip(p.parts, p.scales)]
    assert e[0] == pytest.approx(e[1], rel=1e-12)
    p3 = product_lattice("L24*K12*A2")
    e = [s * s * q.G * q.V ** (2 / q.n) for q, s in zip(p3.parts, p3.scales)]
    assert np.allclose(e, e[0], rtol=1e-10)
    assert p3.basis is not None and p3.basis.n == 38


def test_product_plan_explicit_scale():
    p = product_lattice("Z*Z@2")
    assert p.predicted_G == pytest.approx(5 / 48)
    assert not p.optimal


def test_constant_only_plan():
    p = product_lattice("AE9*Z")
    assert p.predicted_G == pytest.approx(optimal_product_nsm([(9, 0.071622594), (1, 1 / 12)]))
    assert p.basis is None


@settings(max_examples=200, deadline=None)
@given(dims, pos, st.floats(0.05, 1 / 12), dims, pos, st.floats(0.05, 1 / 12))
def test_g_of_scale_minimum(n1, V1, G1, n2, V2, G2):
    a = optimal_scale(n1, V1, G1, n2, V2, G2)
    g = g_of_scale(n1, V1, G1, n2, V2, G2, a)
    best = optimal_product_nsm([(n1, G1), (n2, G2)])
    assert g == pytest.approx(best, rel=1e-12)
    assert g_of_scale(n1, V1, G1, n2, V2, G2, a / 10) > g
    assert g_of_scale(n1, V1, G1, n2, V2, G2, a * 10) > g
    for f in (0.9, 1.1):
        assert g_of_scale(n1, V1, G1, n2, V2, G2, a * f) > g
    n = n1 + n2
    assert math.log(best) * n == pytest.approx(n1 * math.log(G1) + n2 * math.log(G2), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(dims, pos, pos, st.floats(0.05, 1 / 12), dims, pos, st.floats(0.05, 1 / 12))
def test_volume_independence(n1, V1, V1b, G1, n2, V2, G2):
    assume(abs(V1 - V1b) > 1e-3)
    a = optimal_scale(n1, V1, G1, n2, V2, G2)
    b = optimal_scale(n1, V1b, G1, n2, V2, G2)
    assert a != pytest.approx(b, rel=1e-6)
    ga = g_of_scale(n1, V1, G1, n2, V2, G2, a)
    gb = g_of_scale(n1, V1b, G1, n2, V2, G2, b)
    assert ga == pytest.approx(gb, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(dims, st.floats(0.05, 1 / 12)), min_size=2, max_size=5), st.randoms())
def test_order_invariance(parts, rnd):
    g = optimal_product_nsm(parts)
    shuffled = parts[:]
    rnd.shuffle(shuffled)
    assert optimal_product_nsm(shuffled) == pytest.approx(g, rel=1e-13)
    # associativity: fold the first two, then the rest
    head = (parts[0][0] + parts[1][0], optimal_product_nsm(parts[:2]))
    assert optimal_product_nsm([head] + parts[2:]) == pytest.approx(g, rel=1e-13)


def test_optimal_product_is_white():
    p = product_lattice("E8*Z")
    w = whiteness(p, 200_000, seed=5)
    assert w.anisotropy < 5 * w.anisotropy_se
