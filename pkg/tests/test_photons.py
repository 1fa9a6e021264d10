from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given

from shilov import (
    Cone,
    Diamond,
    EinModel,
    LagModel,
    NotConjugate,
    NotConjugateDirection,
    OnPhotonError,
    Photon,
    ProjPoint,
    are_conjugate,
    intersect_Z,
    intersection_poly,
    interval_in_domain,
    is_split,
    mobius_uplus_check,
    param,
    photon_through,
)
from shilov.photons import make_poly, photon_affine_check, random_model_point, random_photon, singleton_check, split_check

from conftest import seeds

E22 = np.diag([0.0, 1.0])
E3 = np.array([0.0, 0.0, 1.0])
SQRT_HALF = 0.7071067811865476


def test_are_conjugate_examples(lag2, ein3):
    D = Diamond(lag2, np.zeros((2, 2)), 2 * np.eye(2))
    x = np.eye(2) / 2
    assert are_conjugate(D, x, x + 0.5 * E22)
    assert not are_conjugate(D, x, x)
    E = Diamond(ein3, -E3, E3)
    assert not are_conjugate(E, np.zeros(3), np.array([0.9, 0.0, 0.9]))


def test_photon_through_examples(lag2, ein3):
    ph = photon_through(lag2, np.zeros((2, 2)), E22)
    assert np.allclose(np.abs(ph.dir), [0.0, 1.0]) and np.allclose(ph.base, 0)
    assert ph.locate(E22) == pytest.approx(1.0)
    ph = photon_through(ein3, np.zeros(3), np.array([1.0, 0.0, 1.0]))
    assert np.allclose(ph.dir, [SQRT_HALF, 0.0, SQRT_HALF])
    assert ph.locate(np.array([1.0, 0, 1.0])) > 0
    with pytest.raises(NotConjugateDirection):
        photon_through(lag2, np.zeros((2, 2)), np.eye(2))


def test_param_examples(lag2):
    std = Photon(lag2, np.zeros((2, 2)), lag2.standard_photon_dir())
    assert param(std, ProjPoint(1, 0)) == lag2.chart_to_point(np.zeros((2, 2)))
    assert param(std, ProjPoint(1, 1)) == lag2.chart_to_point(E22)
    inf = param(std, ProjPoint(0, 1))
    assert abs(lag2.pairing(inf, lag2.infinity)) <= 1e-12


def test_intersect_examples(lag2, ein3):
    std = Photon(lag2, np.zeros((2, 2)), lag2.standard_photon_dir())
    z = intersect_Z(std, lag2.chart_to_point(np.eye(2)))
    assert z.kind == "At" and z.t == ProjPoint(1, 1)
    # frozen: det(S - t E22) = 5 - 2t for S = [[2, 1], [1, 3]]
    z = intersect_Z(std, lag2.chart_to_point(np.array([[2.0, 1.0], [1.0, 3.0]])))
    assert z.t.affine == pytest.approx(2.5, abs=1e-12)
    ph = Photon(ein3, np.zeros(3), np.array([SQRT_HALF, 0, SQRT_HALF]))
    # frozen: root of psi(t d - s) for s = (0.3, -0.2, 0.5) is 3 sqrt(2) / 10
    z = intersect_Z(ph, ein3.chart_to_point(np.array([0.3, -0.2, 0.5])))
    assert z.t.affine == pytest.approx(0.42426406871192851, abs=1e-12)
    assert intersect_Z(ph, ph.infinity_point).kind == "OnPhoton"
    assert intersect_Z(ph, ein3.chart_to_point(np.array([1.0, 0.0, 1.0]))).kind == "OnPhoton"


def test_intersection_at_infinity_of_chart(ein3):
    std = Photon(ein3, np.zeros(3), np.array([SQRT_HALF, 0, SQRT_HALF]))
    z = intersect_Z(std, ein3.infinity)
    assert z.kind == "At" and z.t.is_infinite


def test_intersection_poly_examples(lag2, ein3):
    std = Photon(lag2, np.zeros((2, 2)), lag2.standard_photon_dir())
    Q = intersection_poly(std, lag2.chart_to_point(np.eye(2)), 1)
    assert Q.nxi == 1 and Q.coeffs[0] == 1.0
    assert Q.roots()[0].real == pytest.approx(1.0)
    ph = Photon(ein3, np.zeros(3), np.array([SQRT_HALF, 0, SQRT_HALF]))
    Q2 = intersection_poly(ph, ein3.chart_to_point(np.array([0.3, -0.2, 0.5])), 2)
    a, b, c = Q2.coeffs
    assert Q2.nxi == 2 and abs(b * b - 4 * a * c) <= 1e-8
    Q0 = intersection_poly(std, lag2.infinity, 1)
    assert Q0.nxi == 0
    with pytest.raises(OnPhotonError):
        intersection_poly(std, std.infinity_point, 1)


def test_is_split_examples():
    assert is_split(make_poly([1.0, -2.0, 1.0]))
    assert not is_split(make_poly([1.0, 0.0, 1.0]))


def test_interval_examples(lag2, ein3):
    E = Diamond(ein3, -E3, E3)
    a, b, ph = interval_in_domain(E, np.zeros(3), np.array([0.25, 0.0, 0.25]))
    # frozen: endpoints -sqrt(2)/2 and sqrt(2)/2 along the unit lightlike direction
    assert a.affine == pytest.approx(-SQRT_HALF, abs=1e-10)
    assert b.affine == pytest.approx(SQRT_HALF, abs=1e-10)
    D = Diamond(lag2, np.zeros((2, 2)), 2 * np.eye(2))
    a, b, ph = interval_in_domain(D, np.eye(2), np.eye(2) + 0.5 * E22)
    assert (a.affine, b.affine) == (pytest.approx(-1.0, abs=1e-10), pytest.approx(1.0, abs=1e-10))
    a2, b2, _ = interval_in_domain(D, np.eye(2), np.eye(2), direction=ph.dir)
    assert (a2.affine, b2.affine) == (pytest.approx(a.affine), pytest.approx(b.affine))
    with pytest.raises(NotConjugate):
        interval_in_domain(D, np.eye(2), 1.5 * np.eye(2))


def test_mobius_examples(lag2):
    r = mobius_uplus_check(lag2, np.zeros((2, 2)))
    assert r["lambda"] == 0.0 and r["pass"]
    r = mobius_uplus_check(lag2, 0.7 * E22)
    assert r["lambda"] == pytest.approx(0.7, abs=1e-9)
    r = mobius_uplus_check(lag2, np.array([[1.0, 0.4], [0.4, 0.0]]))
    assert abs(r["lambda"]) <= 1e-12 and r["pass"]


@pytest.mark.parametrize("m", [LagModel(2), LagModel(3), EinModel(3), EinModel(5)], ids=str)
def test_verification_suites(m):
    assert photon_affine_check(m, 300, seed=1)["failures"] == 0
    assert singleton_check(m, 300, seed=2)["failures"] == 0
    assert split_check(m, 300, seed=3)["failures"] == 0


@given(seeds)
def test_photon_in_lightcone(seed):
    rng = np.random.default_rng(seed)
    for m in (LagModel(3), EinModel(4)):
        ph = random_photon(m, rng)
        for t in rng.uniform(-3, 3, 5):
            if abs(t) > 1e-6:
                assert m.cone_member(np.sign(t) * (ph.chart_at(t) - ph.base)) is Cone.BOUNDARY


@given(seeds)
def test_reparametrization_is_mobius(seed):
    rng = np.random.default_rng(seed)
    m = LagModel(2) if seed % 2 else EinModel(3)
    ph = random_photon(m, rng)
    t1, t2 = rng.uniform(-2, 2, 2)
    if abs(t1 - t2) < 0.1:
        return
    other = photon_through(m, ph.chart_at(t1), ph.chart_at(t2))
    ts = rng.uniform(-3, 3, 8)
    ss = np.array([other.locate(ph.chart_at(t)) for t in ts])
    # fit s = (a t + b) / (c t + d) through the homogeneous linear system
    A = np.column_stack([ts, np.ones_like(ts), -ss * ts, -ss])
    _, sv, Vt = np.linalg.svd(A)
    a, b, c, d = Vt[-1]
    fit = (a * ts + b) / (c * ts + d)
    assert np.abs(fit - ss).max() <= 1e-8 * max(1.0, np.abs(ss).max())


@given(seeds)
def test_singleton_intersection(seed):
    rng = np.random.default_rng(seed)
    m = EinModel(3) if seed % 2 else LagModel(3)
    ph = random_photon(m, rng)
    xi = random_model_point(m, rng)
    z = intersect_Z(ph, xi)
    if z.kind == "At" and not z.t.is_infinite:
        assert abs(ph.base_pairing(xi, z.t.affine)) <= 1e-8 * max(1.0, ph.pairing_coeffs(xi)[2])
    assert math.isfinite(ph.pairing_coeffs(xi)[0])
