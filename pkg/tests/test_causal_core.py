from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given

from shilov import (
    ChartOverflow,
    Cone,
    DegeneratePairError,
    Diamond,
    DomainError,
    EinModel,
    LagModel,
    OracleDomain,
    Relation,
    causal_relation,
    diamond_contains,
    domain_from_json,
    dual_sample,
    is_dually_convex_probe,
    model_from_spec,
    order_axioms_check,
    to_standard,
)
from shilov.causal_core import dual_certificate, in_causal_future, in_causal_past

from conftest import random_diamond, seeds

E3 = np.array([0.0, 0.0, 1.0])


def test_model_from_spec():
    assert model_from_spec("lag:3").r == 3
    assert model_from_spec("ein:4", repN=2).repN == 2
    for bad in ("lag", "foo:2", "lag:0", "ein:2"):
        with pytest.raises(DomainError):
            model_from_spec(bad)


def test_relation_examples(lag2, ein3):
    assert causal_relation(ein3, np.zeros(3), E3) is Relation.STRICT_FUTURE
    assert causal_relation(lag2, np.zeros((2, 2)), np.diag([0.0, 1.0])) is Relation.FUTURE_CONE
    assert causal_relation(ein3, E3, E3) is Relation.EQUAL
    assert causal_relation(ein3, E3, np.zeros(3)) is Relation.STRICT_PAST
    assert causal_relation(ein3, np.zeros(3), np.array([1.0, 0, 0])) is Relation.SPACELIKE
    assert causal_relation(ein3, np.zeros(3), np.array([-1.0, 0, -1.0])) is Relation.PAST_CONE


@pytest.mark.parametrize("m", [LagModel(2), EinModel(3)], ids=["lag:2", "ein:3"])
def test_order_axioms(m):
    r = order_axioms_check(m, samples=10_000, seed=0)
    assert r["failures"] == 0


def test_diamond_contains_examples(lag2, ein3):
    D = Diamond(lag2, np.zeros((2, 2)), 2 * np.eye(2))
    assert diamond_contains(D, np.eye(2))
    assert not diamond_contains(D, D.p)
    E = Diamond(ein3, -E3, E3)
    assert diamond_contains(E, np.array([0.5, 0.0, 0.25]))


def test_diamond_requires_order(ein3):
    with pytest.raises(DomainError):
        Diamond(ein3, E3, -E3)


def test_to_standard_examples(lag2, ein3):
    for m, p, q, mid in [
        (lag2, np.zeros((2, 2)), 2 * np.eye(2), np.eye(2)),
        (ein3, -E3, E3, np.zeros(3)),
    ]:
        g = to_standard(m, p, q)
        assert m.act(g, m.chart_to_point(p)) == m.base_point
        assert m.act(g, m.chart_to_point(q)) == m.infinity
        assert m.cone_member(m.act_chart(g, mid)) is Cone.INTERIOR


def test_to_standard_degenerate(ein3):
    with pytest.raises(DegeneratePairError):
        to_standard(ein3, np.zeros(3), np.array([1.0, 0, 1.0]))


def test_dual_sample_examples(lag2):
    D = Diamond(lag2, np.zeros((2, 2)), 2 * np.eye(2))
    duals = dual_sample(D, 20, seed=1)
    labels = [d.label for d in duals]
    assert labels[:2] == ["p", "q"]
    assert duals[0].point == lag2.chart_to_point(D.p) and duals[1].point == lag2.chart_to_point(D.q)
    pts = D.sample(np.random.default_rng(2), 1000)
    assert dual_certificate(lag2, pts, lag2.chart_to_point(-np.eye(2)))
    for d in duals:
        assert dual_certificate(lag2, pts, d.point)
    assert [d.label for d in dual_sample(D, 0)] == ["p", "q"]


def test_dual_sample_includes_infinity_side(ein3):
    D = Diamond(ein3, -E3, E3)
    labels = {d.label for d in dual_sample(D, 30, seed=4)}
    assert "infinity" in labels and "past" in labels


def test_dually_convex_diamond(model):
    D = Diamond(model, -model.cone_unit(), model.cone_unit())
    assert is_dually_convex_probe(D, 20, seed=0)["ratio"] == 1.0


def test_dually_convex_ball_is_report_only(ein3):
    # a Euclidean ball has supporting light cones only where its tangent plane is null
    r = is_dually_convex_probe(OracleDomain.ball(ein3, np.zeros(3), 1.0), 20, seed=0)
    assert 0.0 <= r["ratio"] < 1.0
    assert r["boundary_samples"] == 20


def test_domain_json_round_trip(ein3):
    D = Diamond(ein3, -E3, E3)
    D2 = domain_from_json(ein3, D.to_json())
    assert np.array_equal(D2.p, D.p) and np.array_equal(D2.q, D.q)
    B = domain_from_json(ein3, {"kind": "oracle", "shape": "ball", "center": [0, 0, 0], "radius": 1.0})
    assert B.member(np.zeros(3)) and not B.member(2 * E3)
    with pytest.raises(DomainError):
        domain_from_json(ein3, {"kind": "blob"})


def test_oracle_bbox_spot_check(ein3):
    g = ein3.random_group(np.random.default_rng(5))
    O = OracleDomain.diamond_image(Diamond(ein3, -E3, E3), g)
    assert O.spot_check_bbox(np.random.default_rng(6))


def test_exit_time_closed_form_matches_oracle(model):
    rng = np.random.default_rng(8)
    D = random_diamond(model, rng)
    O = OracleDomain.diamond_image(D, model.identity())
    for _ in range(10):
        x = D.sample(rng, 1)[0]
        d = model.random_chart(rng)
        assert D.exit_time(x, d) == pytest.approx(O.exit_time(x, d), rel=1e-9, abs=1e-11)


@given(seeds)
def test_membership_equivariant(seed):
    rng = np.random.default_rng(seed)
    for m in (LagModel(2), EinModel(3)):
        D = random_diamond(m, rng)
        g = to_standard(m, D.p, D.q)
        for _ in range(25):
            x = D.center + 0.8 * m.random_chart(rng)
            try:
                gx = m.act_chart(g, x)
            except ChartOverflow:
                continue
            # the standard diamond is the open cone I^+(P)
            assert diamond_contains(D, x) == (m.cone_member(gx) is Cone.INTERIOR)


@given(seeds)
def test_relation_invariant_under_affine_maps(seed):
    rng = np.random.default_rng(seed)
    for m in (LagModel(2), EinModel(3)):
        x = m.random_chart(rng)
        y = x + (m.random_cone(rng) if rng.random() < 0.5 else m.random_chart(rng))
        g = m.translation(m.random_chart(rng)) @ m.dilation(float(np.exp(rng.uniform(-1, 1))))
        assert causal_relation(m, x, y) is causal_relation(m, m.act_chart(g, x), m.act_chart(g, y))


@given(seeds)
def test_reflexivity(seed):
    rng = np.random.default_rng(seed)
    for m in (LagModel(3), EinModel(4)):
        x, y = m.random_chart(rng), m.random_chart(rng)
        if rng.random() < 0.5:
            x = y + m.random_cone(rng)
        assert in_causal_future(m, x, y) == in_causal_past(m, y, x)
