"""Photons: rank-one lines of the chart, their parametrization and intersections with Z_xi."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .common import Cone, rng_from
from .errors import ChartOverflow, NotConjugate, NotConjugateDirection, OnPhotonError
from .projline import ProjInterval, ProjPoint

SEGMENT_SAMPLES = 64
ZERO_TOL = 1e-10


@dataclass(eq=False)
class Photon:
    """The photon through ``base`` with chart direction ``dir``.

    Chart points are base + t * dirmat(dir); the parameter [0:1] is the single
    point of the photon outside the chart.
    """

    model: object
    base: np.ndarray
    dir: np.ndarray
    infinity_point: object = field(init=False)

    def __post_init__(self):
        m = self.model
        self.base = m.chart(self.base)
        self.dir = np.asarray(self.dir, dtype=float)
        split = m.photon_split(m.dirmat(self.dir), tol=1e-10)
        if split is None or abs(split[1] - 1.0) > 1e-10:
            raise NotConjugateDirection("photon direction must be a unit rank-one / lightlike vector")
        self.infinity_point = m.infinity_point_of(self.base, self.dir)

    @property
    def dirmat(self) -> np.ndarray:
        return self.model.dirmat(self.dir)

    def chart_at(self, t: float) -> np.ndarray:
        return self.base + t * self.dirmat

    def locate(self, y) -> float:
        """Affine parameter of a chart point of the photon."""
        D = np.asarray(y, dtype=float) - self.base
        M = self.dirmat
        t = float(np.sum(D * M) / np.sum(M * M))
        if self.model.chart_norm(D - t * M) > 1e-8 * max(1.0, self.model.chart_norm(D)):
            raise NotConjugateDirection("point is not on the photon")
        return t

    def base_pairing(self, xi, t: float) -> float:
        """Pairing of the raw chart lift at parameter t with xi (affine in t)."""
        return self.model.raw_pairing(self.model.raw_lift(self.chart_at(t)), xi)

    def pairing_coeffs(self, xi) -> tuple[float, float, float]:
        """(f(0), f'(0), scale) for the affine function t -> base_pairing(xi, t)."""
        f0 = self.base_pairing(xi, 0.0)
        f1 = self.base_pairing(xi, 1.0)
        fm = self.base_pairing(xi, -1.0)
        scale = max(abs(f0), abs(f1), abs(fm), _lift_scale(self.model, self.base) * _rep_scale(xi))
        return f0, 0.5 * (f1 - fm), scale

    def to_json(self) -> dict:
        m = self.model
        return {"base": m.chart_to_json(self.base), "dir": self.dir.tolist()}


def _lift_scale(model, X) -> float:
    if model.kind == "lag":
        return float(np.sqrt(np.linalg.det(np.eye(model.r) + X @ X)))
    return float(np.linalg.norm(model.lift(X)))


def _rep_scale(xi) -> float:
    return 1.0 if hasattr(xi, "frame") else float(np.linalg.norm(xi.rep))


def param(photon: Photon, t: ProjPoint):
    m = photon.model
    if t.is_infinite:
        return photon.infinity_point
    return m.chart_to_point(photon.chart_at(t.affine))


def photon_through(model, x, y) -> Photon:
    """Photon containing the chart points x != y; raises unless y - x is rank one / lightlike."""
    x = model.chart(x)
    y = model.chart(y)
    split = model.photon_split(y - x)
    if split is None:
        raise NotConjugateDirection("difference is not a photon direction")
    u, _ = split
    return Photon(model, x, u)


def are_conjugate(domain, x, y) -> bool:
    """x != y on a common photon and joined by a chart segment inside the domain."""
    m = domain.model
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if m.chart_norm(y - x) <= 1e-12:
        return False
    if m.photon_split(y - x) is None:
        return False
    ts = np.linspace(0.0, 1.0, SEGMENT_SAMPLES)
    pts = [x + t * (y - x) for t in ts]
    return bool(np.all(domain.member_batch(pts)))


@dataclass(frozen=True)
class ZIntersection:
    """Result of intersecting a photon with Z_xi.

    kind is "OnPhoton" (xi lies on the photon), "Contained" (the whole photon
    lies in Z_xi without xi being on it) or "At" with parameter t.
    """

    kind: str
    t: ProjPoint | None = None


def on_photon(photon: Photon, xi) -> bool:
    m = photon.model
    if xi == photon.infinity_point:
        return True
    if not m.in_chart(xi):
        return False
    try:
        photon.locate(m.point_to_chart(xi))
    except NotConjugateDirection:
        return False
    return True


def intersect_Z(photon: Photon, xi) -> ZIntersection:
    f0, f1, scale = photon.pairing_coeffs(xi)
    if abs(f1) <= ZERO_TOL * scale:
        if abs(f0) <= ZERO_TOL * scale:
            return ZIntersection("OnPhoton" if on_photon(photon, xi) else "Contained")
        return ZIntersection("At", ProjPoint.infinity())
    return ZIntersection("At", ProjPoint(-f0 / f1))


@dataclass(frozen=True)
class IntersectionPoly:
    """Monic polynomial, coefficients highest degree first; ``nxi`` is its degree."""

    coeffs: tuple
    nxi: int

    def roots(self) -> np.ndarray:
        if self.nxi == 0:
            return np.array([])
        c = np.asarray(self.coeffs, dtype=float)
        # companion matrix of the monic polynomial
        C = np.zeros((self.nxi, self.nxi))
        C[0, :] = -c[1:]
        if self.nxi > 1:
            C[1:, :-1] = np.eye(self.nxi - 1)
        return np.linalg.eigvals(C)

    def __call__(self, t: float) -> float:
        return float(np.polyval(self.coeffs, t))


def make_poly(coeffs, trim: float = ZERO_TOL) -> IntersectionPoly:
    c = np.asarray(coeffs, dtype=float)
    scale = np.abs(c).max() if c.size else 0.0
    if scale == 0.0:
        raise OnPhotonError("the zero polynomial has no degree")
    k = 0
    while k < c.size - 1 and abs(c[k]) <= trim * scale:
        k += 1
    c = c[k:]
    return IntersectionPoly(tuple(float(v) for v in c / c[0]), c.size - 1)


def intersection_poly(photon: Photon, xi, N: int = 1) -> IntersectionPoly:
    """Monic polynomial t -> pairing(param([1:t]), xi)^N, fitted at N+1 nodes."""
    if N < 1:
        raise ValueError("N must be >= 1")
    f0, f1, scale = photon.pairing_coeffs(xi)
    if abs(f0) <= ZERO_TOL * scale and abs(f1) <= ZERO_TOL * scale:
        raise OnPhotonError("the photon lies in Z_xi")
    # nodes centred at the root keep the Vandermonde system well conditioned
    centre = -f0 / f1 if abs(f1) > ZERO_TOL * scale else 0.0
    width = max(1.0, abs(centre))
    nodes = centre + width * np.cos(np.pi * (np.arange(N + 1) + 0.5) / (N + 1))
    vals = np.array([photon.base_pairing(xi, t) ** N for t in nodes])
    V = np.vander(nodes, N + 1)
    coeffs = np.linalg.solve(V, vals)
    return make_poly(coeffs)


def is_split(poly: IntersectionPoly, tol: float = 1e-7) -> bool:
    """All complex roots agree with one real value up to tol * max(1, |root|)."""
    roots = poly.roots()
    if roots.size == 0:
        return True
    ref = float(np.mean(roots.real))
    scale = max(1.0, abs(ref))
    spread = max(np.abs(roots - ref).max(), np.abs(roots.imag).max())
    return bool(spread <= tol * scale)


def interval_in_domain(domain, x, y, direction=None):
    """Endpoints (a, b) of the photon interval through x and y inside the domain.

    Parameters refer to ``photon_through(x, y)``, whose base is x.  When x = y a
    photon direction must be supplied.
    """
    m = domain.model
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if m.chart_norm(y - x) <= 1e-12:
        if direction is None:
            raise NotConjugate("x = y does not determine a photon")
        photon = Photon(m, x, direction)
    else:
        if not are_conjugate(domain, x, y):
            raise NotConjugate("points are not conjugate in the domain")
        photon = photon_through(m, x, y)
    lo, hi = domain.photon_interval(x, photon.dir)
    a = ProjPoint.infinity() if math.isinf(lo) else ProjPoint(lo)
    b = ProjPoint.infinity() if math.isinf(hi) else ProjPoint(hi)
    return a, b, photon


def photon_interval(a: ProjPoint, b: ProjPoint) -> ProjInterval:
    return ProjInterval.between(a.affine if not a.is_infinite else -math.inf, b.affine)


# verification helpers


def random_photon(model, rng, scale: float = 1.0) -> Photon:
    return Photon(model, model.random_chart(rng, scale), model.random_photon_dir(rng))


def random_model_point(model, rng):
    """A random point, occasionally outside the chart."""
    rng = rng_from(rng)
    x = model.chart_to_point(model.random_chart(rng, 2.0))
    if rng.random() < 0.3:
        x = model.act(model.random_group(rng, spread=1.0), x)
    return x


def _unit_pairing(model, x, xi) -> float:
    if model.kind == "lag":
        return model.pairing(x, xi)
    return model.b(x.rep / np.linalg.norm(x.rep), xi.rep / np.linalg.norm(xi.rep))


def photon_affine_check(model, trials: int = 1000, seed=0) -> dict:
    """The base pairing along chart photons is affine with at most one root."""
    rng = rng_from(seed)
    failures = 0
    worst = 0.0
    root_failures = 0
    cone_failures = 0
    for _ in range(trials):
        photon = random_photon(model, rng)
        xi = random_model_point(model, rng)
        ts = rng.uniform(-3, 3, 3)
        vals = np.array([photon.base_pairing(xi, t) for t in ts])
        pred = vals[0] + (vals[1] - vals[0]) * (ts[2] - ts[0]) / (ts[1] - ts[0])
        res = abs(vals[2] - pred) / max(np.abs(vals).max(), 1e-300)
        worst = max(worst, res)
        if res > 1e-9:
            failures += 1
        grid = np.linspace(-50, 50, 101)
        signs = np.sign([photon.base_pairing(xi, t) for t in grid])
        signs = signs[signs != 0]
        if np.count_nonzero(np.diff(signs)) > 1:
            root_failures += 1
        # for r = 1 every nonzero step is timelike
        for t in rng.uniform(-3, 3, 2) if model.rank > 1 else ():
            if model.cone_member(t * photon.dirmat if t > 0 else -t * photon.dirmat) is not Cone.BOUNDARY:
                cone_failures += 1
    return {
        "trials": trials,
        "failures": failures + root_failures + cone_failures,
        "affine_failures": failures,
        "root_failures": root_failures,
        "cone_failures": cone_failures,
        "max_residual": float(worst),
    }


def singleton_check(model, trials: int = 1000, seed=0) -> dict:
    """Each photon meets Z_xi in exactly one parameter, and meets Z_{P^-} only at [0:1]."""
    rng = rng_from(seed)
    failures = 0
    worst = 0.0
    for _ in range(trials):
        photon = random_photon(model, rng)
        xi = random_model_point(model, rng)
        hit = intersect_Z(photon, xi)
        if hit.kind != "At":
            continue
        pt = param(photon, hit.t)
        val = abs(_unit_pairing(model, pt, xi))
        worst = max(worst, val)
        if val > 1e-8:
            failures += 1
        at_inf = intersect_Z(photon, model.infinity)
        if at_inf.kind != "At" or not at_inf.t.is_infinite:
            failures += 1
    return {"trials": trials, "failures": failures, "max_residual": float(worst)}


def split_check(model, trials: int = 1000, seed=0, Ns=(1, 2), tol: float = 1e-7) -> dict:
    rng = rng_from(seed)
    failures = 0
    done = 0
    worst = 0.0
    for _ in range(trials):
        photon = random_photon(model, rng)
        xi = random_model_point(model, rng)
        for N in Ns:
            try:
                poly = intersection_poly(photon, xi, N)
            except OnPhotonError:
                continue
            done += 1
            roots = poly.roots()
            if roots.size:
                ref = float(np.mean(roots.real))
                worst = max(worst, float(np.abs(roots - ref).max()) / max(1.0, abs(ref)))
            if not is_split(poly, tol):
                failures += 1
    return {"trials": done, "failures": failures, "max_residual": worst}


def mobius_uplus_check(model, Y, trials: int = 50, seed=0) -> dict:
    """uplus(Y) acts on the standard photon by t -> t / (1 + lam t); fit lam and report."""
    rng = rng_from(seed)
    g = model.uplus(Y)
    E = model.standard_photon_direction()
    std = Photon(model, model.zero(), model.standard_photon_dir())
    ts, ss = [], []
    off = 0.0
    for t in rng.uniform(-2.0, 2.0, trials):
        try:
            Z = model.act_chart(g, std.chart_at(t))
        except ChartOverflow:
            continue
        s = float(np.sum(Z * E) / np.sum(E * E))
        off = max(off, model.chart_norm(Z - s * E) / (1.0 + model.chart_norm(Z)))
        ts.append(t)
        ss.append(s)
    ts, ss = np.array(ts), np.array(ss)
    # s (1 + lam t) = t is linear in lam
    a = ss * ts
    lam = float(a @ (ts - ss) / (a @ a)) if ts.size and a @ a > 0 else 0.0
    # chordal distance between [1 + lam t : t] and [1 : s] on the projective line
    u = np.column_stack([1.0 + lam * ts, ts])
    v = np.column_stack([np.ones_like(ss), ss])
    chord = np.abs(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]) / (np.linalg.norm(u, axis=1) * np.linalg.norm(v, axis=1))
    residual = max(off, float(chord.max()) if ts.size else 0.0)
    expected = model.uplus_photon_coefficient(Y)
    return {
        "lambda": lam,
        "expected_lambda": expected,
        "lambda_error": abs(lam - expected),
        "max_residual": residual,
        "samples": int(ts.size),
        "pass": residual <= 1e-8 and abs(lam - expected) <= 1e-8 * max(1.0, abs(expected)),
    }
