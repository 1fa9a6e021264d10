from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given

from shilov import ChartOverflow, Cone, DomainError, LagModel, LagPoint, rank_one_decompose
from shilov.lag_model import symplectic_form

from conftest import seeds

E22 = np.array([[0.0, 0.0], [0.0, 1.0]])


def test_chart_zero_is_base_point(lag2):
    assert lag2.chart_to_point(np.zeros((2, 2))) == lag2.base_point


def test_chart_identity_frame(lag2):
    x = lag2.chart_to_point(np.eye(2))
    assert x == LagPoint(np.vstack([np.eye(2), np.eye(2)]))


def test_isotropy_of_constructed_points(lag2):
    J = symplectic_form(2)
    f = lag2.chart_to_point(np.array([[1.0, 2.0], [2.0, 5.0]])).frame
    assert np.abs(f.T @ J @ f).max() <= 1e-10


def test_point_to_chart_from_frame(lag2):
    S = np.array([[1.0, 2.0], [2.0, 5.0]])
    x = LagPoint(np.vstack([np.eye(2), S]))
    assert np.allclose(lag2.point_to_chart(x), S, atol=1e-12)


def test_point_to_chart_base(lag2):
    assert np.allclose(lag2.point_to_chart(lag2.base_point), 0)


def test_infinity_overflows(lag2):
    with pytest.raises(ChartOverflow):
        lag2.point_to_chart(lag2.infinity)


def test_non_isotropic_frame_rejected():
    # span(e1, e3) pairs nontrivially under the symplectic form
    frame = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    with pytest.raises(DomainError):
        LagPoint(frame)


def test_round_trip_random(lag2):
    rng = np.random.default_rng(0)
    for _ in range(100):
        X = lag2.random_chart(rng, 2.0)
        assert np.abs(lag2.point_to_chart(lag2.chart_to_point(X)) - X).max() <= 1e-10


def test_pairing_transverse_examples(lag2):
    x = lag2.chart_to_point(np.zeros((2, 2)))
    xi = lag2.chart_to_point(np.eye(2))
    assert abs(lag2.pairing(x, xi)) > 0 and lag2.is_transverse(x, xi)
    assert lag2.pairing(x, x) == pytest.approx(0.0, abs=1e-12)
    assert not lag2.is_transverse(x, x)


def test_rank_one_difference_not_transverse(lag2):
    X = np.array([[0.5, 0.1], [0.1, -0.2]])
    u = np.array([0.6, 0.8])
    a, b = lag2.chart_to_point(X), lag2.chart_to_point(X + np.outer(u, u))
    assert abs(lag2.pairing(a, b)) <= 1e-12
    assert not lag2.is_transverse(a, b)


def test_cone_member_examples(lag2):
    assert lag2.cone_member(np.array([[2.0, 1.0], [1.0, 2.0]])) is Cone.INTERIOR
    assert lag2.cone_member(np.zeros((2, 2))) is Cone.BOUNDARY
    assert lag2.cone_member(np.array([[1.0, 2.0], [2.0, 1.0]])) is Cone.OUTSIDE


def test_group_act_examples(lag2):
    X = np.array([[0.3, -0.2], [-0.2, 1.1]])
    x = lag2.chart_to_point(X)
    assert lag2.act(lag2.identity(), x) == x
    assert np.allclose(lag2.point_to_chart(lag2.act(lag2.dilation(2.5), x)), 2.5 * X)
    B = np.array([[1.0, 0.5], [0.5, -1.0]])
    assert np.allclose(lag2.point_to_chart(lag2.act(lag2.translation(B), x)), X + B)


def test_group_generators(lag2):
    assert np.allclose(lag2.dilation(1.0), np.eye(4))
    B = np.array([[1.0, 0.5], [0.5, -1.0]])
    assert np.allclose(lag2.translation(B) @ lag2.translation(-B), np.eye(4))
    with pytest.raises(DomainError):
        lag2.dilation(0.0)
    with pytest.raises(DomainError):
        lag2.levi(np.zeros((2, 2)))


def test_levi_cholesky(lag2):
    rng = np.random.default_rng(3)
    X = lag2.random_cone(rng)
    A = np.linalg.cholesky(X).T
    assert np.allclose(lag2.act_chart(lag2.levi(A), X), np.eye(2), atol=1e-12)


def test_standard_photon_direction(lag2):
    E = lag2.standard_photon_direction()
    assert np.array_equal(E, E22)
    assert lag2.cone_member(E) is Cone.BOUNDARY
    for t in (-1.0, 0.5, 3.0):
        assert abs(lag2.pairing(lag2.chart_to_point(t * E), lag2.base_point)) <= 1e-12


def test_rank_one_decompose_examples():
    parts = rank_one_decompose(np.eye(2))
    assert sorted(l for l, _ in parts) == [1.0, 1.0]
    (lam, u), = rank_one_decompose(2 * np.outer([1.0, 0.0], [1.0, 0.0]))
    assert lam == pytest.approx(2.0) and abs(abs(u[0]) - 1) < 1e-12


@given(seeds)
def test_rank_one_reconstruction(seed):
    rng = np.random.default_rng(seed)
    X = LagModel(3).random_chart(rng, 3.0)
    R = sum(l * np.outer(u, u) for l, u in rank_one_decompose(X))
    assert np.abs(R - X).max() <= 1e-9


@given(seeds)
def test_isotropy_after_group_action(seed):
    rng = np.random.default_rng(seed)
    m = LagModel(int(rng.integers(1, 5)))
    J = symplectic_form(m.r)
    g = m.random_group(rng)
    assert np.abs(g.T @ J @ g - J).max() <= 1e-9
    x = m.act(g, m.chart_to_point(m.random_chart(rng)))
    assert np.abs(x.frame.T @ J @ x.frame).max() <= 1e-10


@given(seeds)
def test_left_action(seed):
    rng = np.random.default_rng(seed)
    m = LagModel(3)
    g, h = m.random_group(rng), m.random_group(rng)
    x = m.chart_to_point(m.random_chart(rng))
    assert m.act(g @ h, x).distance(m.act(g, m.act(h, x))) <= 1e-9


@given(seeds)
def test_transversality_symmetric(seed):
    rng = np.random.default_rng(seed)
    m = LagModel(2)
    x = m.act(m.random_group(rng), m.chart_to_point(m.random_chart(rng)))
    y = m.chart_to_point(m.random_chart(rng))
    if rng.random() < 0.5:
        u = rng.standard_normal(2)
        y = m.chart_to_point(m.point_to_chart(x) + np.outer(u, u)) if m.in_chart(x) else y
    assert m.is_transverse(x, y) == m.is_transverse(y, x)


@given(seeds)
def test_pairing_proportional_to_det_along_pencil(seed):
    rng = np.random.default_rng(seed)
    m = LagModel(2)
    X0, V, S = m.random_chart(rng), m.random_chart(rng), m.random_chart(rng)
    # canonical frames are orthonormalized, so compare against the raw lifts
    ratios = []
    for t in np.linspace(-1, 1, 7):
        X = X0 + t * V
        d = np.linalg.det(S - X)
        if abs(d) < 1e-3:
            continue
        ratios.append(m.raw_pairing(m.raw_lift(X), m.chart_to_point(S)) / d)
    if len(ratios) >= 2:
        assert np.ptp(ratios) <= 1e-8 * max(1.0, np.abs(ratios).max())
