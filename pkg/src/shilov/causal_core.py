"""Causal structure in the affine chart: order relations, domains, diamonds and duality."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq, minimize

from .common import Cone, rng_from, unit
from .ein_model import EinModel, EinPoint, mink, psi
from .errors import ChartOverflow, DegeneratePairError, DomainError
from .lag_model import LagModel, LagPoint

# below this fraction of bounding-box hits, sampling switches to hit-and-run
MIN_ACCEPTANCE = 0.02


def model_from_spec(spec: str, repN: int = 1):
    """Parse 'lag:r' or 'ein:n'."""
    try:
        kind, dim = spec.split(":")
        dim = int(dim)
    except ValueError:
        raise DomainError(f"model must look like 'lag:2' or 'ein:3', got {spec!r}") from None
    if kind == "lag":
        return LagModel(dim, repN)
    if kind == "ein":
        return EinModel(dim, repN)
    raise DomainError(f"unknown model kind {kind!r}")


class Relation(str, enum.Enum):
    STRICT_FUTURE = "StrictFuture"
    FUTURE_CONE = "FutureCone"
    STRICT_PAST = "StrictPast"
    PAST_CONE = "PastCone"
    SPACELIKE = "Spacelike"
    EQUAL = "Equal"


def causal_relation(model, x, y) -> Relation:
    """Position of y relative to x."""
    d = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
    if model.chart_norm(d) <= 1e-12:
        return Relation.EQUAL
    fwd = model.cone_member(d)
    if fwd is Cone.INTERIOR:
        return Relation.STRICT_FUTURE
    if fwd is Cone.BOUNDARY:
        return Relation.FUTURE_CONE
    back = model.cone_member(-d)
    if back is Cone.INTERIOR:
        return Relation.STRICT_PAST
    if back is Cone.BOUNDARY:
        return Relation.PAST_CONE
    return Relation.SPACELIKE


def in_causal_future(model, x, y) -> bool:
    """x in J^+(y)."""
    return model.cone_member(np.asarray(x) - y) is not Cone.OUTSIDE


def in_causal_past(model, x, y) -> bool:
    """x in J^-(y)."""
    return model.cone_member(np.asarray(y) - x) is not Cone.OUTSIDE


def order_axioms_check(model, samples: int = 1000, seed=0) -> dict:
    """Sample transitivity, reflexivity and antisymmetry of the causal order."""
    rng = rng_from(seed)
    transitivity = antisymmetry = reflexivity = 0
    for _ in range(samples):
        z = model.random_chart(rng)
        y = z + model.random_cone(rng) * rng.uniform(0, 2)
        if rng.random() < 0.2:
            # boundary increments exercise the closed cone
            u = model.random_photon_dir(rng)
            y = z + rng.uniform(0, 2) * model.dirmat(u)
        x = y + model.random_cone(rng) * rng.uniform(0, 2)
        if in_causal_future(model, x, y) and in_causal_future(model, y, z) and not in_causal_future(model, x, z):
            transitivity += 1
        if in_causal_future(model, x, y) != in_causal_past(model, y, x):
            reflexivity += 1
        w = x + 0.0 * model.random_chart(rng)
        if in_causal_future(model, x, w) and in_causal_future(model, w, x):
            if causal_relation(model, x, w) is not Relation.EQUAL:
                antisymmetry += 1
    return {
        "samples": samples,
        "transitivity_failures": transitivity,
        "reflexivity_failures": reflexivity,
        "antisymmetry_failures": antisymmetry,
        "failures": transitivity + reflexivity + antisymmetry,
    }


# domains


class Domain:
    """A domain of the affine chart given by a membership test.

    Subclasses provide ``member`` and usually ``margin``: a continuous function
    positive inside, zero on the boundary and negative outside.
    """

    proper = True

    def member(self, x) -> bool:
        raise NotImplementedError

    def margin(self, x):
        return None

    @property
    def has_margin(self) -> bool:
        return False

    def member_batch(self, xs) -> np.ndarray:
        return np.array([self.member(x) for x in xs], dtype=bool)

    def margin_batch(self, xs) -> np.ndarray:
        return np.array([self.margin(x) for x in xs], dtype=float)

    def closure_member(self, x, tol: float = 1e-7) -> bool:
        if self.has_margin:
            return self.margin(x) >= -tol
        c = self.center
        return self.member(np.asarray(x) + tol * (c - x) / max(self.model.chart_norm(c - x), 1e-300))

    @property
    def scale(self) -> float:
        lo, hi = self.bbox
        return float(np.linalg.norm(hi - lo))

    def sample(self, rng, count: int) -> list:
        """Rejection sampling in the bounding box; hit-and-run when the domain fills little of it."""
        rng = rng_from(rng)
        lo, hi = self.bbox
        out = []
        tries = 0
        while len(out) < count:
            batch = lo + (hi - lo) * rng.random((max(64, 4 * (count - len(out))), lo.size))
            xs = [self.model.from_coords(c) for c in batch]
            mask = self.member_batch(xs)
            if tries == 0 and mask.mean() < MIN_ACCEPTANCE:
                return self._hit_and_run(rng, count)
            out.extend(x for x, m in zip(xs, mask) if m)
            tries += 1
            if tries > 2000:
                raise DomainError("could not sample the domain inside its bounding box")
        return out[:count]

    def _inside_coords(self, C) -> np.ndarray:
        inside = np.all(np.isfinite(C), axis=1)
        xs = [self.model.from_coords(c) for c in C[inside]]
        if xs:
            inside[inside] = self.member_batch(xs)
        return inside

    def _chord_end(self, C, D, t_max: float, steps: int = 30) -> np.ndarray:
        """Bisection for a crossing of the boundary on each ray C + t D, 0 < t < t_max."""
        a = np.zeros(len(C))
        b = np.full(len(C), t_max)
        for _ in range(steps):
            mid = 0.5 * (a + b)
            ok = self._inside_coords(C + mid[:, None] * D)
            a = np.where(ok, mid, a)
            b = np.where(ok, b, mid)
        return a

    def _hit_and_run(self, rng, count: int, chains: int = 256, burn: int = 30) -> list:
        """Batched hit-and-run from the center with directions adapted to the chain spread.

        Every returned point passes the membership test; chords leaving and
        re-entering the domain only make the walk less uniform.
        """
        lo, hi = self.bbox
        start = self.model.to_coords(self.center)
        if not self._inside_coords(start[None])[0]:
            raise DomainError("could not sample the domain: its center is outside")
        C = np.tile(start, (chains, 1))
        t_max = float(np.linalg.norm(hi - lo))
        cov = np.diag((hi - lo) ** 2)
        out = []
        step = 0
        while len(out) < count:
            L = np.linalg.cholesky(cov + 1e-12 * np.trace(cov) * np.eye(len(start)))
            D = rng.standard_normal(C.shape) @ L.T
            D /= np.linalg.norm(D, axis=1, keepdims=True)
            fwd = self._chord_end(C, D, t_max)
            back = self._chord_end(C, -D, t_max)
            t = -back + (fwd + back) * rng.random(len(C))
            prop = C + t[:, None] * D
            ok = self._inside_coords(prop)
            C = np.where(ok[:, None], prop, C)
            step += 1
            if step == burn:
                cov = np.cov(C.T) if len(C) > 1 else cov
            if step > burn:
                out.extend(self.model.from_coords(c) for c in C)
            if step > burn + 50 * (count // chains + 1):
                raise DomainError("hit-and-run sampling did not produce enough points")
        idx = rng.permutation(len(out))[:count]
        return [out[i] for i in idx]

    def exit_time(self, x, direction, t_max=None, tol: float = 1e-12) -> float:
        """Largest t with x + s*direction inside for all 0 <= s < t (inf if unbounded)."""
        x = np.asarray(x, dtype=float)
        direction = np.asarray(direction, dtype=float)
        dn = self.model.chart_norm(direction)
        if dn == 0:
            return math.inf
        if t_max is None:
            t_max = 4.0 * self.scale / dn + 1.0
        lo, hi = 0.0, self.scale / dn * 1e-3
        inside = self._inside
        while inside(x + hi * direction):
            lo, hi = hi, 2.0 * hi
            if hi > t_max:
                return math.inf
        if self.has_margin and self.margin(x + lo * direction) > 0:
            f = lambda t: self.margin(x + t * direction)
            if f(hi) < 0:
                return brentq(f, lo, hi, xtol=tol * max(1.0, hi), rtol=4 * np.finfo(float).eps)
        # a fixed number of halvings reaches the requested tolerance
        for _ in range(200):
            if hi - lo <= tol * max(1.0, hi):
                break
            mid = 0.5 * (lo + hi)
            if inside(x + mid * direction):
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def _inside(self, x) -> bool:
        if self.has_margin:
            return self.margin(x) > 0
        return self.member(x)

    def photon_interval(self, x, u) -> tuple[float, float]:
        """Parameters (t_lo < 0 < t_hi) where the photon x + t*dirmat(u) leaves the domain."""
        D = self.model.dirmat(u)
        return -self.exit_time(x, -D), self.exit_time(x, D)

    def boundary_points(self, rng, count: int) -> list:
        """Exit points along random rays from the reference interior point."""
        rng = rng_from(rng)
        c = self.center
        out = []
        for _ in range(count):
            d = self.model.random_chart(rng)
            t = self.exit_time(c, d)
            out.append(c + t * d)
        return out

    def transform(self, g) -> Domain:
        return OracleDomain.diamond_image(self, g) if isinstance(self, Diamond) else _ImageDomain(self, g)


@dataclass(eq=False)
class Diamond(Domain):
    """Order interval I^+(p) cap I^-(q) in the chart."""

    model: object
    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        self.p = self.model.chart(self.p)
        self.q = self.model.chart(self.q)
        if self.model.cone_member(self.q - self.p) is not Cone.INTERIOR:
            raise DomainError("diamond endpoints must satisfy q - p in the open cone")

    kind = "diamond"

    @property
    def has_margin(self) -> bool:
        return True

    def margin(self, x) -> float:
        m = self.model
        return min(m.cone_margin(np.asarray(x) - self.p), m.cone_margin(self.q - np.asarray(x)))

    def member(self, x) -> bool:
        return diamond_contains(self, x)

    def member_batch(self, xs) -> np.ndarray:
        return self.margin_batch(xs) > 1e-9

    def margin_batch(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        m = self.model
        return np.minimum(m.cone_margin_batch(xs - self.p), m.cone_margin_batch(self.q - xs))

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.p + self.q)

    @property
    def bbox(self):
        m = self.model
        if m.kind == "lag":
            Q = self.q - self.p
            d = np.sqrt(np.diag(Q))
            half = 0.5 * np.outer(d, d)
            lo = m.to_coords(self.p + np.where(np.eye(m.r, dtype=bool), 0.0, -2 * half))
            hi = m.to_coords(self.p + np.where(np.eye(m.r, dtype=bool), Q, 2 * half))
            return lo, hi
        # Ein: the closed diamond is the convex hull of p, q and the equator sphere
        g = m.normalizer(self.p, self.q)
        ginv = np.linalg.inv(g)
        pts = [self.p, self.q]
        for i in range(m.n - 1):
            for s in (-1, 1):
                e = np.zeros(m.n)
                e[i] = 0.5 * s
                e[-1] = 0.5
                pts.append(m.act_chart(ginv, e))
        pts = np.array(pts)
        # the equator is an ellipsoid; pad generously to contain it
        c = 0.5 * (self.p + self.q)
        r = np.abs(pts - c).max(axis=0) * 1.5
        return c - r, c + r

    def standard_sample(self, rng, count: int) -> np.ndarray:
        """Points of D(0, unit cone vector)."""
        m = self.model
        if m.kind == "lag":
            O = np.linalg.qr(rng.standard_normal((count, m.r, m.r)))[0]
            lam = np.clip(rng.random((count, 1, m.r)), 1e-6, 1 - 1e-6)
            return (O * lam) @ O.transpose(0, 2, 1)
        out = []
        while len(out) < count:
            c = rng.random((4 * count, m.n))
            c[:, :-1] -= 0.5
            t = c[:, -1]
            ok = np.linalg.norm(c[:, :-1], axis=1) < np.minimum(t, 1 - t)
            out.extend(c[ok])
        return np.array(out[:count])

    def sample(self, rng, count: int) -> list:
        rng = rng_from(rng)
        m = self.model
        ginv = np.linalg.inv(m.normalizer(self.p, self.q))
        images, _ = m.act_chart_batch(ginv, self.standard_sample(rng, count))
        return list(images)

    def photon_interval(self, x, u) -> tuple[float, float]:
        m = self.model
        x = np.asarray(x, dtype=float)
        if m.kind == "lag":
            a = float(u @ np.linalg.solve(x - self.p, u))
            b = float(u @ np.linalg.solve(self.q - x, u))
            return -1.0 / a, 1.0 / b

        lo = -psi(x - self.p) / (2.0 * mink(x - self.p, u))
        hi = psi(self.q - x) / (2.0 * mink(self.q - x, u))
        return lo, hi

    def exit_time(self, x, direction, t_max=None, tol: float = 1e-12) -> float:
        """Closed form: first s > 0 where x + s*direction leaves the diamond."""
        m = self.model
        x = np.asarray(x, dtype=float)
        d = np.asarray(direction, dtype=float)
        return min(_cone_exit(m, x - self.p, d), _cone_exit(m, self.q - x, -d))

    def transform(self, g) -> Domain:
        m = self.model
        if m.act(g, m.infinity) == m.infinity:
            p, q = m.act_chart(g, self.p), m.act_chart(g, self.q)
            if m.cone_member(q - p) is Cone.INTERIOR:
                return Diamond(m, p, q)
            if m.cone_member(p - q) is Cone.INTERIOR:
                return Diamond(m, q, p)
        return OracleDomain.diamond_image(self, g)

    def to_json(self) -> dict:
        return {"kind": "diamond", "p": self.model.chart_to_json(self.p), "q": self.model.chart_to_json(self.q)}


def _cone_exit(m, a, d) -> float:
    """First s > 0 with a + s*d on the boundary of the open cone (a inside); 0 if a is not inside."""
    if m.kind == "lag":
        try:
            L = np.linalg.cholesky(a)
        except np.linalg.LinAlgError:
            return 0.0
        Li = np.linalg.inv(L)
        lam = np.linalg.eigvalsh(Li @ d @ Li.T)[0]
        return math.inf if lam >= 0 else -1.0 / lam

    if m.cone_margin(a) <= 0:
        return 0.0
    # psi(a + s d) = psi(a) + 2 s <a,d> + s^2 psi(d) has exactly one positive root or none
    A, B, C = psi(d), 2.0 * mink(a, d), psi(a)
    if abs(A) <= 1e-15 * float(d @ d):
        return -C / B if B > 0 else math.inf
    disc = B * B - 4 * A * C
    if disc < 0:
        # reverse Cauchy-Schwarz makes disc >= 0 for two timelike vectors; absorb round-off
        if disc < -1e-12 * B * B:
            return math.inf
        disc = 0.0
    sq = math.sqrt(disc)
    # numerically stable roots
    qv = -0.5 * (B + math.copysign(sq, B))
    roots = [r for r in (qv / A, C / qv if qv != 0 else math.inf) if r > 0]
    return min(roots) if roots else math.inf


def diamond_contains(D: Diamond, x) -> bool:
    m = D.model
    x = np.asarray(x, dtype=float)
    return m.cone_member(x - D.p) is Cone.INTERIOR and m.cone_member(D.q - x) is Cone.INTERIOR


@dataclass(eq=False)
class OracleDomain(Domain):
    """Domain known through a membership predicate and a bounding box."""

    model: object
    predicate: Callable
    bbox: tuple
    center: np.ndarray
    margin_fn: Callable | None = None
    name: str = "oracle"
    params: dict = field(default_factory=dict)
    proper: bool = True
    margin_batch_fn: Callable | None = None

    kind = "oracle"

    def __post_init__(self):
        self.bbox = (np.asarray(self.bbox[0], dtype=float), np.asarray(self.bbox[1], dtype=float))
        self.center = np.asarray(self.center, dtype=float)
        if not self.member(self.center):
            raise DomainError("reference point of an oracle domain must be a member")

    @property
    def has_margin(self) -> bool:
        return self.margin_fn is not None

    def margin(self, x):
        return None if self.margin_fn is None else float(self.margin_fn(np.asarray(x, dtype=float)))

    def member(self, x) -> bool:
        return bool(self.predicate(np.asarray(x, dtype=float)))

    def margin_batch(self, xs) -> np.ndarray:
        if self.margin_batch_fn is None:
            return super().margin_batch(xs)
        return np.asarray(self.margin_batch_fn(np.asarray(xs, dtype=float)), dtype=float)

    def member_batch(self, xs) -> np.ndarray:
        if self.margin_batch_fn is None:
            return super().member_batch(xs)
        return self.margin_batch(xs) > 0

    def spot_check_bbox(self, rng, count: int = 200) -> bool:
        """Boundary exits along random rays stay inside the bounding box."""
        lo, hi = self.bbox
        pad = 1e-6 * self.scale
        for b in self.boundary_points(rng, count):
            c = self.model.to_coords(b)
            if np.any(c < lo - pad) or np.any(c > hi + pad):
                return False
        return True

    @classmethod
    def ball(cls, model, center, radius: float) -> OracleDomain:
        center = model.chart(center)
        c = model.to_coords(center)
        # coordinates bound matrix entries, which the Frobenius ball controls
        r = np.full(c.size, radius)

        def margin(x):
            return radius - model.chart_norm(x - center)

        def margin_batch(xs):
            d = (xs - center).reshape(len(xs), -1)
            return radius - np.linalg.norm(d, axis=1)

        return cls(
            model,
            lambda x: margin(x) > 0,
            (c - r, c + r),
            center,
            margin,
            "ball",
            {"center": model.chart_to_json(center), "radius": radius},
            margin_batch_fn=margin_batch,
        )

    @classmethod
    def box(cls, model, lo, hi) -> OracleDomain:
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)

        def margin(x):
            c = model.to_coords(x)
            return float(min((c - lo).min(), (hi - c).min()))

        return cls(
            model,
            lambda x: margin(x) > 0,
            (lo, hi),
            model.from_coords(0.5 * (lo + hi)),
            margin,
            "box",
            {"lo": lo.tolist(), "hi": hi.tolist()},
        )

    @classmethod
    def diamond_image(cls, D: Diamond, g, rng=0) -> OracleDomain:
        """g . D(p, q) known only through membership of the preimage."""
        m = D.model
        g = np.asarray(g, dtype=float)
        ginv = np.linalg.inv(g)

        def margin(x):
            try:
                z = m.act_chart(ginv, x)
            except ChartOverflow:
                return -1.0
            return D.margin(z)

        def margin_batch(xs):
            zs, ok = m.act_chart_batch(ginv, xs)
            return np.where(ok, D.margin_batch(zs), -1.0)

        # g.D stays a bounded chart domain exactly when it is the chart diamond of (g.p, g.q)
        try:
            gp, gq = m.act_chart(g, D.p), m.act_chart(g, D.q)
        except ChartOverflow:
            raise DomainError("image of the diamond is not proper in the chart") from None
        if m.cone_member(gq - gp) is not Cone.INTERIOR:
            raise DomainError("image of the diamond passes through infinity")
        pts = []
        rng = rng_from(rng)
        for z in D.boundary_points(rng, 400) + [D.p, D.q]:
            try:
                pts.append(m.to_coords(m.act_chart(g, z)))
            except ChartOverflow:
                raise DomainError("image of the diamond is not proper in the chart") from None
        pts = np.array(pts)
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        pad = 0.1 * (hi - lo) + 1e-9
        center = m.act_chart(g, D.center)
        return cls(
            m,
            lambda x: margin(x) > 0,
            (lo - pad, hi + pad),
            center,
            margin,
            "diamond_image",
            {"p": m.chart_to_json(D.p), "q": m.chart_to_json(D.q), "g": g.tolist()},
            margin_batch_fn=margin_batch,
        )

    def to_json(self) -> dict:
        lo, hi = self.bbox
        return {"kind": "oracle", "shape": self.name, "bbox": [lo.tolist(), hi.tolist()], **self.params}


class _ImageDomain(OracleDomain):
    def __init__(self, base: Domain, g):
        m = base.model
        ginv = np.linalg.inv(np.asarray(g, dtype=float))

        def pre(x):
            try:
                return m.act_chart(ginv, x)
            except ChartOverflow:
                return None

        def predicate(x):
            z = pre(x)
            return z is not None and base.member(z)

        margin_fn = None
        if base.has_margin:

            def margin_fn(x):
                z = pre(x)
                return -1.0 if z is None else base.margin(z)

        pts = np.array([m.to_coords(m.act_chart(g, z)) for z in base.boundary_points(0, 400)])
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        pad = 0.1 * (hi - lo) + 1e-9
        super().__init__(m, predicate, (lo - pad, hi + pad), m.act_chart(g, base.center), margin_fn, "image")


def domain_from_json(model, data: dict) -> Domain:
    kind = data.get("kind")
    if kind == "diamond":
        return Diamond(model, model.chart_from_json(data["p"]), model.chart_from_json(data["q"]))
    if kind == "oracle":
        shape = data.get("shape")
        if shape == "ball":
            return OracleDomain.ball(model, model.chart_from_json(data["center"]), float(data["radius"]))
        if shape == "box":
            lo, hi = data.get("lo"), data.get("hi")
            if lo is None:
                lo, hi = data["bbox"]
            return OracleDomain.box(model, lo, hi)
        if shape == "diamond_image":
            D = Diamond(model, model.chart_from_json(data["p"]), model.chart_from_json(data["q"]))
            return OracleDomain.diamond_image(D, np.asarray(data["g"], dtype=float))
        raise DomainError(f"unknown oracle shape {shape!r}")
    raise DomainError(f"unknown domain kind {kind!r}")


# normalization and duality


def _chart_or_point(model, v):
    if hasattr(v, "frame") or hasattr(v, "rep"):
        return v
    return model.chart_to_point(v)


def to_standard(model, p, q, check: bool = True) -> np.ndarray:
    """Group element g with g.p = P, g.q = P^- and g.D(p, q) = I^+(P).

    p and q may be chart vectors or model points; they must be transverse.
    """
    pp, qq = _chart_or_point(model, p), _chart_or_point(model, q)
    if not model.is_transverse(pp, qq):
        raise DegeneratePairError("p and q are not transverse")
    g0 = model.identity()
    if not (model.in_chart(pp) and model.in_chart(qq)):
        rng = np.random.default_rng(12345)
        for _ in range(100):
            h = model.uplus(model.random_chart(rng))
            if model.in_chart(model.act(h, pp)) and model.in_chart(model.act(h, qq)):
                g0 = h
                break
        else:
            raise DegeneratePairError("could not move the pair into the chart")
    P = model.point_to_chart(model.act(g0, pp))
    Qpt = model.point_to_chart(model.act(g0, qq))
    Q = Qpt - P
    if model.kind == "lag":
        try:
            B = -np.linalg.inv(Q)
        except np.linalg.LinAlgError:
            raise DegeneratePairError("p and q are not transverse") from None
        B = 0.5 * (B + B.T)
    else:
        if abs(psi(Q)) < 1e-14:
            raise DegeneratePairError("p and q are not transverse")
        B = -Q / psi(Q)
    g = model.uplus(B) @ model.translation(-P) @ g0
    if check:
        if model.act(g, pp) != model.base_point or model.act(g, qq) != model.infinity:
            raise DegeneratePairError("normalization failed to fix the endpoints")
        if model.cone_member(Q) is Cone.INTERIOR:
            mid = model.act_chart(g, model.point_to_chart(model.act(g0, pp)) + 0.5 * Q)
            if model.cone_member(mid) is not Cone.INTERIOR:
                raise DegeneratePairError("normalization does not map the diamond onto the standard one")
    return g


@dataclass(frozen=True)
class DualPoint:
    point: object
    label: str = ""


def dual_certificate(model, domain_points, xi, sign_only: bool = True) -> bool:
    """True when pairing(x, xi) has constant nonzero sign over the sampled points."""
    vals = model.raw_pairing_batch(domain_points, xi)
    if np.any(np.abs(vals) <= 1e-12):
        return False
    return bool(np.all(vals > 0) or np.all(vals < 0))


def _standard_dual_points(model, rng, count: int) -> list:
    """Points of the closure of I^-(P) together with infinity-side limit points."""
    pts = [(model.infinity, "P-"), (model.base_point, "P")]
    for i in range(count):
        kind = i % 3
        if kind == 0:
            S = -model.random_cone(rng, scale=float(np.exp(rng.uniform(-2, 2))))
            pts.append((model.chart_to_point(S), "past"))
        elif kind == 1:
            u = model.random_photon_dir(rng)
            S = -float(np.exp(rng.uniform(-2, 2))) * model.dirmat(u)
            if model.kind == "lag" and model.r > 1:
                S = S - float(np.exp(rng.uniform(-2, 1))) * model.dirmat(model.random_photon_dir(rng))
                lam = np.linalg.eigvalsh(S)
                if abs(lam[-1]) > 1e-12:
                    # keep one zero eigenvalue so the point lies on the past light cone
                    w, V = np.linalg.eigh(S)
                    w[-1] = 0.0
                    S = (V * w) @ V.T
            pts.append((model.chart_to_point(S), "past-cone"))
        else:
            pts.append((_infinity_limit(model, rng), "infinity"))
    return pts


def _infinity_limit(model, rng):
    """Limit of chart(-t S) as t -> infinity for a degenerate past-cone vector S."""
    if model.kind == "lag":
        r = model.r
        k = int(rng.integers(1, r + 1))
        O = np.linalg.qr(rng.standard_normal((r, r)))[0]
        V, K = O[:, :k], O[:, k:]
        frame = np.zeros((2 * r, r))
        frame[:r, : r - k] = K
        frame[r:, r - k :] = V
        return LagPoint(frame)

    d = model.random_photon_dir(rng)
    return EinPoint(np.r_[-d, 0.0, 0.0])


def dual_sample(D: Diamond, count: int = 20, seed=0, certify: int = 1000) -> list:
    """Dual points of a diamond: the endpoints plus pulled-back standard dual points."""
    m = D.model
    rng = rng_from(seed)
    out = [DualPoint(m.chart_to_point(D.p), "p"), DualPoint(m.chart_to_point(D.q), "q")]
    if count <= 0:
        return out
    ginv = np.linalg.inv(to_standard(m, D.p, D.q))
    cand = _standard_dual_points(m, rng, count)[2:]
    checks = D.sample(rng, certify) if certify else []
    for xi, label in cand:
        pt = m.act(ginv, xi)
        if not checks or dual_certificate(m, checks, pt):
            out.append(DualPoint(pt, label))
    return out


def normalized_pairing(model, x, xi) -> float:
    if model.kind == "lag":
        return model.pairing(x, xi)
    return model.b(unit(x.rep), unit(xi.rep))


def find_supporting(domain: Domain, b, checks, starts, iters: int = 400):
    """Dual point whose hypersurface passes through the boundary point b, or None.

    Returns (xi, residual); xi is None when no certified point was found.
    """
    m = domain.model
    bp = m.chart_to_point(b)
    best = math.inf
    ordered = sorted(starts, key=lambda d: abs(normalized_pairing(m, bp, d.point)))[:4]
    for d in ordered:
        if abs(normalized_pairing(m, bp, d.point)) <= 1e-6 and dual_certificate(m, checks, d.point):
            return d.point, 0.0
        if not m.in_chart(d.point):
            continue
        c0 = m.to_coords(m.point_to_chart(d.point))

        def objective(c):
            xi = m.chart_to_point(m.from_coords(c))
            vals = m.raw_pairing_batch(checks[:60], xi)
            bad = min(np.sum(vals > 0), np.sum(vals < 0)) / len(vals)
            return abs(normalized_pairing(m, bp, xi)) + bad

        res = minimize(objective, c0, method="Nelder-Mead", options={"maxiter": iters, "xatol": 1e-10, "fatol": 1e-12})
        xi = m.chart_to_point(m.from_coords(res.x))
        val = abs(normalized_pairing(m, bp, xi))
        if val <= 1e-6 and dual_certificate(m, checks, xi):
            return xi, val
        best = min(best, val)
    return None, best


def is_dually_convex_probe(domain: Domain, boundary_samples: int = 20, seed=0, dual=None, certify: int = 300) -> dict:
    """For sampled boundary points, search a dual point whose hypersurface passes through them."""
    rng = rng_from(seed)
    checks = domain.sample(rng, certify)
    if dual is None:
        if isinstance(domain, Diamond):
            dual = dual_sample(domain, 20, rng, certify=0)
        else:
            dual = _oracle_dual_guess(domain, rng)
    bpts = domain.boundary_points(rng, boundary_samples)
    residuals = []
    successes = 0
    for b in bpts:
        xi, res = find_supporting(domain, b, checks, dual)
        residuals.append(res)
        successes += xi is not None
    return {
        "boundary_samples": len(bpts),
        "successes": successes,
        "ratio": successes / max(1, len(bpts)),
        "max_residual": float(max(residuals)) if residuals else 0.0,
    }


def supporting_dual_points(domain: Domain, count: int = 20, seed=0, certify: int = 1000) -> list:
    """Certified dual points of an oracle domain found as supporting points at boundary samples."""
    m = domain.model
    rng = rng_from(seed)
    checks = domain.sample(rng, certify)
    starts = _oracle_dual_guess(domain, rng)
    out = [DualPoint(m.infinity, "P-")] if dual_certificate(m, checks, m.infinity) else []
    for b in domain.boundary_points(rng, count):
        xi, _ = find_supporting(domain, b, checks, starts)
        if xi is not None:
            out.append(DualPoint(xi, "support"))
    return out


def _oracle_dual_guess(domain: Domain, rng) -> list:
    """Chart points outside the domain, used as starting guesses for supporting points."""
    m = domain.model
    out = [DualPoint(m.infinity, "P-")]
    for b in domain.boundary_points(rng, 30):
        for s in (-1.0, 1.0):
            out.append(DualPoint(m.chart_to_point(b + s * 0.1 * domain.scale * m.cone_unit()), "guess"))
    return out
