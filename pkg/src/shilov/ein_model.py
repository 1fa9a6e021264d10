"""Einstein universe Ein^{n-1,1}: isotropic lines of a form of signature (n, 2).

The form is b(v, w) = sum_{i<n} v_i w_i - v_n w_n - (v_{n+1} w_{n+2} + v_{n+2} w_{n+1}) / 2.
A Minkowski vector v lifts to v + psi(v) e_{n+1} + e_{n+2}; the point at
infinity of the chart is [e_{n+1}] and the base point is [e_{n+2}].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .common import Cone, random_orthogonal, rng_from, unit
from .errors import ChartOverflow, DomainError

ISOTROPY_TOL = 1e-10
EQUAL_TOL = 1e-9
TRANSVERSE_TOL = 1e-9
CONE_TOL = 1e-9
GROUP_TOL = 1e-9


def gram(n: int) -> np.ndarray:
    B = np.zeros((n + 2, n + 2))
    B[: n - 1, : n - 1] = np.eye(n - 1)
    B[n - 1, n - 1] = -1.0
    B[n, n + 1] = B[n + 1, n] = -0.5
    return B


def minkowski(n: int) -> np.ndarray:
    eta = np.eye(n)
    eta[-1, -1] = -1.0
    return eta


def psi(v) -> float:
    """Quadratic form sum_{i<n} v_i^2 - v_n^2."""
    v = np.asarray(v, dtype=float)
    return float(v[:-1] @ v[:-1] - v[-1] ** 2)


def mink(u, v) -> float:
    """Polarization of psi."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return float(u[:-1] @ v[:-1] - u[-1] * v[-1])


def _canonical_rep(rep: np.ndarray) -> np.ndarray:
    n = rep.size - 2
    scale = np.abs(rep).max()
    for i in [n + 1, n, *range(n - 1, -1, -1)]:
        if abs(rep[i]) > 1e-9 * scale:
            return rep / rep[i]
    raise DomainError("zero vector")


@dataclass(frozen=True, eq=False)
class EinPoint:
    rep: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.rep, dtype=float).ravel()
        if v.size < 5 or not np.any(v):
            raise DomainError("representative must be a nonzero vector of length n+2 >= 5")
        n = v.size - 2
        u = unit(v)
        if abs(u @ gram(n) @ u) > ISOTROPY_TOL:
            raise DomainError("representative is not isotropic")
        v = _canonical_rep(v)
        v.setflags(write=False)
        object.__setattr__(self, "rep", v)

    @property
    def n(self) -> int:
        return self.rep.size - 2

    def distance(self, other: EinPoint) -> float:
        a, b = unit(self.rep), unit(other.rep)
        return float(min(np.linalg.norm(a - b), np.linalg.norm(a + b)))

    def __eq__(self, other):
        if not isinstance(other, EinPoint):
            return NotImplemented
        return self.n == other.n and self.distance(other) <= EQUAL_TOL

    __hash__ = None

    def to_json(self):
        return {"rep": self.rep.tolist()}


class EinModel:
    """Matrix model of Ein^{n-1,1} for SO(n, 2); chart vectors are n-vectors."""

    kind = "ein"

    def __init__(self, n: int, repN: int = 1):
        if not 3 <= n <= 10:
            raise DomainError("supported dimensions are 3 <= n <= 10")
        if repN < 1:
            raise DomainError("repN must be >= 1")
        self.n = n
        self.rank = 2
        self.repN = repN
        self.B = gram(n)
        self.eta = minkowski(n)
        self.chart_shape = (n,)
        self.chart_dim = n

    def __repr__(self):
        return f"EinModel(n={self.n}, repN={self.repN})"

    @property
    def spec(self) -> str:
        return f"ein:{self.n}"

    @property
    def n_links(self) -> int:
        return 4

    # chart vectors

    def zero(self) -> np.ndarray:
        return np.zeros(self.n)

    def cone_unit(self) -> np.ndarray:
        e = np.zeros(self.n)
        e[-1] = 1.0
        return e

    def chart(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != self.chart_shape or not np.all(np.isfinite(v)):
            raise DomainError(f"expected a finite vector of length {self.n}")
        return v

    def to_coords(self, v) -> np.ndarray:
        return np.asarray(v, dtype=float)

    def from_coords(self, c) -> np.ndarray:
        return np.asarray(c, dtype=float).copy()

    def chart_norm(self, v) -> float:
        return float(np.linalg.norm(v))

    def phi(self, v) -> float:
        return float(v[-1])

    def random_chart(self, rng, scale: float = 1.0) -> np.ndarray:
        return rng_from(rng).standard_normal(self.n) * scale

    def random_cone(self, rng, scale: float = 1.0) -> np.ndarray:
        rng = rng_from(rng)
        s = rng.standard_normal(self.n - 1)
        s *= rng.uniform(0.0, 0.8) / max(np.linalg.norm(s), 1e-300)
        return np.r_[s, 1.0] * rng.uniform(0.2, 1.0) * scale

    # points

    def lift(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return np.r_[v, psi(v), 1.0]

    raw_lift = lift

    @property
    def base_point(self) -> EinPoint:
        return self.chart_to_point(self.zero())

    @property
    def infinity(self) -> EinPoint:
        e = np.zeros(self.n + 2)
        e[self.n] = 1.0
        return EinPoint(e)

    def chart_to_point(self, v) -> EinPoint:
        return EinPoint(self.lift(self.chart(v)))

    def point_to_chart(self, x: EinPoint) -> np.ndarray:
        u = unit(x.rep)
        if abs(u[self.n + 1]) <= TRANSVERSE_TOL:
            raise ChartOverflow("point is not transverse to the point at infinity")
        return x.rep[: self.n] / x.rep[self.n + 1]

    def in_chart(self, x: EinPoint) -> bool:
        return abs(unit(x.rep)[self.n + 1]) > TRANSVERSE_TOL

    def point(self, data) -> EinPoint:
        if isinstance(data, EinPoint):
            return data
        if isinstance(data, dict):
            if "rep" in data:
                return EinPoint(np.asarray(data["rep"], dtype=float))
            if "chart" in data:
                return self.chart_to_point(data["chart"])
            raise DomainError("point object needs 'rep' or 'chart'")
        return self.chart_to_point(data)

    def b(self, v, w) -> float:
        return float(np.asarray(v) @ self.B @ np.asarray(w))

    def pairing(self, x: EinPoint, xi: EinPoint) -> float:
        return self.b(x.rep, xi.rep)

    def raw_pairing(self, lift, xi: EinPoint) -> float:
        return self.b(lift, xi.rep)

    def raw_pairing_batch(self, vs, xi: EinPoint) -> np.ndarray:
        """b of the chart lifts with xi; same signs as the canonical pairings."""
        vs = np.atleast_2d(np.asarray(vs, dtype=float))
        psis = (vs[:, :-1] ** 2).sum(axis=1) - vs[:, -1] ** 2
        lifts = np.c_[vs, psis, np.ones(len(vs))]
        return lifts @ (self.B @ xi.rep)

    def is_transverse(self, x: EinPoint, y: EinPoint) -> bool:
        return abs(self.b(unit(x.rep), unit(y.rep))) > TRANSVERSE_TOL

    def chart_pairing(self, u, v) -> float:
        """b of the chart lifts; equals -psi(u - v) / 2."""
        return self.b(self.lift(u), self.lift(v))

    # cone

    def cone_member(self, v) -> Cone:
        v = np.asarray(v, dtype=float)
        q = psi(v)
        if q < -CONE_TOL and v[-1] > 0:
            return Cone.INTERIOR
        if abs(q) <= CONE_TOL and v[-1] >= 0:
            return Cone.BOUNDARY
        return Cone.OUTSIDE

    def cone_margin(self, v) -> float:
        """v_n - |spatial part|: zero on the future light cone, positive inside."""
        v = np.asarray(v)
        return float(v[-1] - np.linalg.norm(v[:-1]))

    def cone_margin_batch(self, vs: np.ndarray) -> np.ndarray:
        return vs[..., -1] - np.linalg.norm(vs[..., :-1], axis=-1)

    def signature_class(self, v) -> int:
        """0 past timelike, 1 spacelike, 2 future timelike; -1 on the light cone."""
        q = psi(v)
        if abs(q) <= CONE_TOL:
            return -1
        if q > 0:
            return 1
        return 2 if v[-1] > 0 else 0

    def nondegenerate_classes(self) -> int:
        return 3

    # group

    def identity(self) -> np.ndarray:
        return np.eye(self.n + 2)

    def is_group_element(self, g) -> bool:
        g = np.asarray(g, dtype=float)
        return g.shape == (self.n + 2,) * 2 and np.abs(g.T @ self.B @ g - self.B).max() <= GROUP_TOL * max(
            1.0, np.abs(g).max() ** 2
        )

    def translation(self, w) -> np.ndarray:
        """Element acting on the chart by v -> v + w."""
        w = self.chart(w)
        n = self.n
        g = np.eye(n + 2)
        g[:n, n + 1] = w
        g[n, :n] = 2.0 * (self.eta @ w)
        g[n, n + 1] = psi(w)
        return g

    def dilation(self, t: float) -> np.ndarray:
        if not t > 0:
            raise DomainError("dilation factor must be positive")
        g = np.eye(self.n + 2)
        g[self.n, self.n] = t
        g[self.n + 1, self.n + 1] = 1.0 / t
        return g

    def levi(self, L) -> np.ndarray:
        """Lorentz transformation L of the chart, extended trivially."""
        L = np.asarray(L, dtype=float)
        if L.shape != (self.n, self.n) or np.abs(L.T @ self.eta @ L - self.eta).max() > 1e-9 * max(
            1.0, np.abs(L).max() ** 2
        ):
            raise DomainError("levi factor must preserve the Minkowski form")
        g = np.eye(self.n + 2)
        g[: self.n, : self.n] = L
        return g

    def _swap(self) -> np.ndarray:
        s = np.eye(self.n + 2)
        s[[self.n, self.n + 1]] = s[[self.n + 1, self.n]]
        return s

    def uplus(self, w) -> np.ndarray:
        """Unipotent element fixing the point at infinity and the base point's tangent flag."""
        s = self._swap()
        return s @ self.translation(w) @ s

    def uplus_photon_coefficient(self, w) -> float:
        return 2.0 * mink(self.standard_photon_direction(), w)

    def act(self, g, x: EinPoint) -> EinPoint:
        return EinPoint(np.asarray(g) @ x.rep)

    def act_chart(self, g, v) -> np.ndarray:
        w = np.asarray(g) @ self.lift(v)
        if abs(w[self.n + 1]) <= TRANSVERSE_TOL * np.linalg.norm(w):
            raise ChartOverflow("image is not in the affine chart")
        return w[: self.n] / w[self.n + 1]

    def act_chart_batch(self, g, vs) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized act_chart: images and a mask of points that stay in the chart."""
        vs = np.asarray(vs, dtype=float)
        q = np.einsum("ij,ij->i", vs[:, :-1], vs[:, :-1]) - vs[:, -1] ** 2
        lifted = np.column_stack([vs, q, np.ones(len(vs))])
        w = lifted @ np.asarray(g).T
        last = w[:, self.n + 1]
        ok = np.abs(last) > TRANSVERSE_TOL * np.linalg.norm(w, axis=1)
        return w[:, : self.n] / np.where(ok, last, 1.0)[:, None], ok

    def random_lorentz(self, rng, rapidity: float = 0.8) -> np.ndarray:
        rng = rng_from(rng)
        R = np.eye(self.n)
        R[:-1, :-1] = random_orthogonal(rng, self.n - 1)
        beta = unit(rng.standard_normal(self.n - 1)) * np.tanh(rng.uniform(0, rapidity))
        return boost(beta) @ R

    def random_affine(self, rng, spread: float = 1.0) -> np.ndarray:
        rng = rng_from(rng)
        t = float(np.exp(rng.uniform(-0.7, 0.7)))
        return self.translation(self.random_chart(rng, spread)) @ self.dilation(t) @ self.levi(self.random_lorentz(rng))

    def random_group(self, rng, spread: float = 0.3) -> np.ndarray:
        rng = rng_from(rng)
        return self.random_affine(rng) @ self.uplus(self.random_chart(rng, spread))

    # photons

    def standard_photon_direction(self) -> np.ndarray:
        d = np.zeros(self.n)
        d[0] = d[-1] = 1.0
        return d / np.sqrt(2.0)

    standard_photon_dir = standard_photon_direction

    @property
    def n_dir_params(self) -> int:
        return self.n - 1

    def dir_from_params(self, params) -> np.ndarray:
        w = unit(np.asarray(params, dtype=float))
        return np.r_[w, 1.0] / np.sqrt(2.0)

    def dirmat(self, d) -> np.ndarray:
        return np.asarray(d, dtype=float)

    def random_photon_dir(self, rng) -> np.ndarray:
        return self.dir_from_params(rng_from(rng).standard_normal(self.n - 1))

    def photon_split(self, D, tol: float = 1e-8):
        """If D = t d with d a future lightlike unit vector, return (d, t); else None."""
        D = np.asarray(D, dtype=float)
        scale = float(D @ D)
        if scale == 0.0 or abs(psi(D)) > tol * scale:
            return None
        # project onto the exact lightlike direction
        w = D[:-1]
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return None
        sign = 1.0 if D[-1] > 0 else -1.0
        d = np.r_[sign * w / nw, 1.0] / np.sqrt(2.0)
        t = float(np.sqrt(2.0) * 0.5 * (abs(D[-1]) + nw) * sign)
        return d, t

    def infinity_point_of(self, base, d) -> EinPoint:
        d = np.asarray(d, dtype=float)
        return EinPoint(np.r_[d, 2.0 * mink(base, d), 0.0])

    def cone_steps(self, D) -> list:
        """Write a closed-cone vector D as at most two future lightlike steps."""
        D = np.asarray(D, dtype=float)
        split = self.photon_split(D)
        if split is not None:
            return [split] if split[1] > 0 else []
        # two equal steps (a +- h e, 1) s / 2 symmetric about D; well conditioned even when D is nearly null
        s = D[-1]
        a = D[:-1] / s
        h = np.sqrt(max(0.0, 1.0 - float(a @ a)))
        if np.linalg.norm(a) > 1e-12:
            w = unit(a)
            e = np.eye(self.n - 1)[int(np.argmin(np.abs(w)))]
            e = unit(e - (e @ w) * w)
        else:
            e = np.eye(self.n - 1)[0]
        t = s / np.sqrt(2.0)
        return [(np.r_[a + h * e, 1.0] / np.sqrt(2.0), t), (np.r_[a - h * e, 1.0] / np.sqrt(2.0), t)]

    def step_along(self, D, d) -> float:
        """t with D - t d lightlike, for a lightlike direction d."""
        D = np.asarray(D, dtype=float)
        return psi(D) / (2.0 * mink(D, d))

    def reduce_residual(self, D, params):
        """One lightlike step after which the residual D - t d is lightlike."""
        D = np.asarray(D, dtype=float)
        if abs(psi(D)) <= 1e-12 * float(D @ D):
            return None
        d = self.dir_from_params(params[: self.n - 1] if np.any(params[: self.n - 1]) else np.ones(self.n - 1))
        denom = 2.0 * mink(D, d)
        if abs(denom) < 1e-14:
            return None
        t = psi(D) / denom
        return d, t, D - t * d

    def reduce_param_sizes(self, D=None) -> list:
        return [self.n - 1]

    # affine normalization of diamonds

    def normalizer(self, p, q, x=None, y=None):
        """Affine element sending D(p, q) to D(0, e_n), canonically oriented by x, y."""
        Q = np.asarray(q, dtype=float) - p
        tau = np.sqrt(-psi(Q))
        L = boost(Q[:-1] / Q[-1])
        g = self.dilation(1.0 / tau) @ self.levi(L) @ self.translation(-np.asarray(p, dtype=float))
        if x is not None:
            cols = []
            for v in (x, y):
                if v is None:
                    continue
                s = self.act_chart(g, v)[:-1]
                for c in cols:
                    s = s - (s @ c) * c
                if np.linalg.norm(s) > 1e-9:
                    cols.append(unit(s))
            basis = np.column_stack(cols + [np.eye(self.n - 1)]) if cols else np.eye(self.n - 1)
            qmat, rr = np.linalg.qr(basis)
            qmat = qmat * np.sign(np.where(np.diag(rr) == 0, 1.0, np.diag(rr)))[: qmat.shape[1]]
            R = np.eye(self.n)
            R[:-1, :-1] = qmat.T
            g = self.levi(R) @ g
        return g

    def boost_to_unit(self, Q) -> np.ndarray:
        """Element of L sending the future timelike vector Q to e_n."""
        Q = np.asarray(Q, dtype=float)
        tau = np.sqrt(-psi(Q))
        return self.dilation(1.0 / tau) @ self.levi(boost(Q[:-1] / Q[-1]))

    # JSON

    def chart_from_json(self, data) -> np.ndarray:
        return self.chart(np.asarray(data, dtype=float))

    def chart_to_json(self, v) -> list:
        return np.asarray(v).tolist()


def boost(beta) -> np.ndarray:
    """Pure Lorentz boost (time last) sending (beta, 1) to a multiple of e_n."""
    beta = np.asarray(beta, dtype=float)
    k = beta.size
    b2 = float(beta @ beta)
    if b2 >= 1.0:
        raise DomainError("boost velocity must have norm < 1")
    gamma = 1.0 / np.sqrt(1.0 - b2)
    L = np.eye(k + 1)
    if b2 > 0:
        L[:k, :k] += (gamma - 1.0) * np.outer(beta, beta) / b2
    L[:k, k] = -gamma * beta
    L[k, :k] = -gamma * beta
    L[k, k] = gamma
    return L


def lightlike_directions(n: int, seed, count: int) -> np.ndarray:
    """Uniform future lightlike unit vectors in R^{n-1,1}, one per row."""
    if count < 1:
        raise DomainError("count must be >= 1")
    rng = rng_from(seed)
    w = rng.standard_normal((count, n - 1))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    return np.hstack([w, np.ones((count, 1))]) / np.sqrt(2.0)
