"""Lagrangian Grassmannian Lag_r(R^{2r}) acted on by Sp(2r, R).

Points are Lagrangian r-planes stored as 2r x r frames with orthonormal
columns.  The affine chart sends a symmetric matrix X to the column span of
[I; X]; the point at infinity of the chart is Span(e_{r+1}, ..., e_{2r}).
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


def symplectic_form(r: int) -> np.ndarray:
    J = np.zeros((2 * r, 2 * r))
    J[:r, r:] = -np.eye(r)
    J[r:, :r] = np.eye(r)
    return J


def _canonical_frame(frame: np.ndarray) -> np.ndarray:
    q, rr = np.linalg.qr(frame)
    signs = np.sign(np.diag(rr))
    signs[signs == 0] = 1.0
    return q * signs


@dataclass(frozen=True, eq=False)
class LagPoint:
    frame: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frame, dtype=float)
        if f.ndim != 2 or f.shape[0] != 2 * f.shape[1]:
            raise DomainError(f"frame must be 2r x r, got {f.shape}")
        if np.linalg.matrix_rank(f, tol=1e-10 * max(1.0, np.abs(f).max())) < f.shape[1]:
            raise DomainError("frame must have full column rank")
        f = _canonical_frame(f)
        iso = f.T @ symplectic_form(f.shape[1]) @ f
        if np.abs(iso).max() > ISOTROPY_TOL:
            raise DomainError(f"frame is not isotropic (defect {np.abs(iso).max():.2e})")
        f.setflags(write=False)
        object.__setattr__(self, "frame", f)

    @property
    def r(self) -> int:
        return self.frame.shape[1]

    def projector(self) -> np.ndarray:
        return self.frame @ self.frame.T

    def distance(self, other: LagPoint) -> float:
        return float(np.linalg.norm(self.projector() - other.projector(), 2))

    def __eq__(self, other):
        if not isinstance(other, LagPoint):
            return NotImplemented
        return self.r == other.r and self.distance(other) <= EQUAL_TOL

    __hash__ = None

    def to_json(self):
        return {"frame": self.frame.tolist()}


def check_symmetric(X, tol=1e-12) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise DomainError(f"chart matrix must be square, got shape {X.shape}")
    if np.abs(X - X.T).max() > tol * max(1.0, np.abs(X).max()):
        raise DomainError("chart matrix must be symmetric")
    return 0.5 * (X + X.T)


class LagModel:
    """Matrix model of Lag_r(R^{2r}); chart vectors are r x r symmetric arrays."""

    kind = "lag"

    def __init__(self, r: int, repN: int = 1):
        if not 1 <= r <= 8:
            raise DomainError("supported ranks are 1 <= r <= 8")
        if repN < 1:
            raise DomainError("repN must be >= 1")
        self.r = r
        self.rank = r
        self.repN = repN
        self.J = symplectic_form(r)
        self.chart_shape = (r, r)
        self._iu = np.triu_indices(r)
        self.chart_dim = len(self._iu[0])

    def __repr__(self):
        return f"LagModel(r={self.r}, repN={self.repN})"

    @property
    def spec(self) -> str:
        return f"lag:{self.r}"

    @property
    def n_links(self) -> int:
        """Chain length bound used by the constructive chain builder."""
        return 2 * self.r

    # chart vectors

    def zero(self) -> np.ndarray:
        return np.zeros((self.r, self.r))

    def cone_unit(self) -> np.ndarray:
        return np.eye(self.r)

    def chart(self, X) -> np.ndarray:
        X = check_symmetric(X)
        if X.shape != self.chart_shape:
            raise DomainError(f"expected a {self.r}x{self.r} matrix")
        return X

    def to_coords(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X)[self._iu]

    def from_coords(self, c) -> np.ndarray:
        X = np.zeros((self.r, self.r))
        X[self._iu] = c
        return X + np.triu(X, 1).T

    def chart_norm(self, X: np.ndarray) -> float:
        return float(np.linalg.norm(X))

    def phi(self, X: np.ndarray) -> float:
        """Linear functional that is positive on the open cone."""
        return float(np.trace(X))

    def random_chart(self, rng, scale: float = 1.0) -> np.ndarray:
        A = rng_from(rng).standard_normal((self.r, self.r)) * scale
        return 0.5 * (A + A.T)

    def random_cone(self, rng, scale: float = 1.0) -> np.ndarray:
        rng = rng_from(rng)
        O = random_orthogonal(rng, self.r)
        lam = rng.uniform(0.2, 1.0, self.r) * scale
        return (O * lam) @ O.T

    # points

    @property
    def base_point(self) -> LagPoint:
        return self.chart_to_point(self.zero())

    @property
    def infinity(self) -> LagPoint:
        return LagPoint(np.vstack([np.zeros((self.r, self.r)), np.eye(self.r)]))

    def raw_lift(self, X: np.ndarray) -> np.ndarray:
        return np.vstack([np.eye(self.r), X])

    def chart_to_point(self, X) -> LagPoint:
        return LagPoint(self.raw_lift(self.chart(X)))

    def point_to_chart(self, x: LagPoint) -> np.ndarray:
        top, bottom = x.frame[: self.r], x.frame[self.r :]
        # |det(top)| is |pairing(x, infinity)| for orthonormal frames
        if abs(np.linalg.det(top)) <= TRANSVERSE_TOL:
            raise ChartOverflow("point is not transverse to the point at infinity")
        X = np.linalg.solve(top.T, bottom.T).T
        return 0.5 * (X + X.T)

    def in_chart(self, x: LagPoint) -> bool:
        return abs(np.linalg.det(x.frame[: self.r])) > TRANSVERSE_TOL

    def point(self, data) -> LagPoint:
        """Build a point from JSON-like data: a frame dict or a chart matrix."""
        if isinstance(data, LagPoint):
            return data
        if isinstance(data, dict):
            if "frame" in data:
                return LagPoint(np.asarray(data["frame"], dtype=float))
            if "chart" in data:
                return self.chart_to_point(data["chart"])
            raise DomainError("point object needs 'frame' or 'chart'")
        return self.chart_to_point(data)

    def pairing_frames(self, fx: np.ndarray, fxi: np.ndarray) -> float:
        return float(np.linalg.det(fxi.T @ self.J @ fx))

    def pairing(self, x: LagPoint, xi: LagPoint) -> float:
        return self.pairing_frames(x.frame, xi.frame)

    def raw_pairing(self, lift: np.ndarray, xi: LagPoint) -> float:
        return self.pairing_frames(lift, xi.frame)

    def raw_pairing_batch(self, Xs, xi: LagPoint) -> np.ndarray:
        """Pairings of the lifts [I; X] with xi; same signs as the canonical pairings."""
        Xs = np.asarray(Xs, dtype=float)
        top, bottom = xi.frame[: self.r], xi.frame[self.r :]
        return np.linalg.det(bottom.T[None] - top.T[None] @ Xs)

    def is_transverse(self, x: LagPoint, y: LagPoint) -> bool:
        return abs(self.pairing(x, y)) > TRANSVERSE_TOL

    def chart_pairing(self, X: np.ndarray, S: np.ndarray) -> float:
        """Pairing of two chart points computed on the frames [I; X], [I; S]."""
        return float(np.linalg.det(S - X))

    # cone

    def cone_member(self, X) -> Cone:
        lam = np.linalg.eigvalsh(np.asarray(X, dtype=float))
        if lam[0] > CONE_TOL:
            return Cone.INTERIOR
        if abs(lam[0]) <= CONE_TOL:
            return Cone.BOUNDARY
        return Cone.OUTSIDE

    def cone_margin(self, X) -> float:
        """Smallest eigenvalue: a 1-Lipschitz signed distance-like margin."""
        return float(np.linalg.eigvalsh(X)[0])

    def cone_margin_batch(self, Xs: np.ndarray) -> np.ndarray:
        return np.linalg.eigvalsh(Xs)[..., 0]

    def signature_class(self, X) -> int:
        """Number of positive eigenvalues; -1 on the singular locus."""
        lam = np.linalg.eigvalsh(X)
        if np.min(np.abs(lam)) <= CONE_TOL:
            return -1
        return int(np.sum(lam > 0))

    def nondegenerate_classes(self) -> int:
        return self.r + 1

    # group

    def identity(self) -> np.ndarray:
        return np.eye(2 * self.r)

    def is_group_element(self, g) -> bool:
        g = np.asarray(g, dtype=float)
        return g.shape == (2 * self.r,) * 2 and np.abs(g.T @ self.J @ g - self.J).max() <= GROUP_TOL * max(
            1.0, np.abs(g).max() ** 2
        )

    def dilation(self, t: float) -> np.ndarray:
        if not t > 0:
            raise DomainError("dilation factor must be positive")
        s = np.sqrt(t)
        return np.diag(np.r_[np.full(self.r, 1.0 / s), np.full(self.r, s)])

    def translation(self, B) -> np.ndarray:
        B = self.chart(B)
        g = np.eye(2 * self.r)
        g[self.r :, : self.r] = B
        return g

    def levi(self, A) -> np.ndarray:
        """diag(A, A^{-T}); acts on the chart by X -> A^{-T} X A^{-1}."""
        A = np.asarray(A, dtype=float)
        if A.shape != (self.r, self.r) or abs(np.linalg.det(A)) <= 1e-12:
            raise DomainError("levi factor must be an invertible r x r matrix")
        g = np.zeros((2 * self.r, 2 * self.r))
        g[: self.r, : self.r] = A
        g[self.r :, self.r :] = np.linalg.inv(A).T
        return g

    def uplus(self, B) -> np.ndarray:
        """exp of the upper-right block B; fixes the point at infinity."""
        B = self.chart(B)
        g = np.eye(2 * self.r)
        g[: self.r, self.r :] = B
        return g

    def uplus_photon_coefficient(self, B) -> float:
        """Coefficient of the standard photon's Mobius action under uplus(B)."""
        return float(np.asarray(B)[-1, -1])

    def act(self, g, x: LagPoint) -> LagPoint:
        return LagPoint(np.asarray(g) @ x.frame)

    def act_chart(self, g, X) -> np.ndarray:
        g = np.asarray(g)
        r = self.r
        top = g[:r, :r] + g[:r, r:] @ X
        bottom = g[r:, :r] + g[r:, r:] @ X
        if abs(np.linalg.det(top)) <= TRANSVERSE_TOL * max(1.0, np.linalg.norm(top)) ** r:
            raise ChartOverflow("image is not in the affine chart")
        Y = np.linalg.solve(top.T, bottom.T).T
        return 0.5 * (Y + Y.T)

    def act_chart_batch(self, g, Xs) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized act_chart: images and a mask of points that stay in the chart."""
        g = np.asarray(g)
        Xs = np.asarray(Xs, dtype=float)
        r = self.r
        top = g[:r, :r] + g[:r, r:] @ Xs
        bottom = g[r:, :r] + g[r:, r:] @ Xs
        scale = np.maximum(1.0, np.linalg.norm(top, axis=(1, 2))) ** r
        ok = np.abs(np.linalg.det(top)) > TRANSVERSE_TOL * scale
        top[~ok] = np.eye(r)
        Y = np.swapaxes(np.linalg.solve(np.swapaxes(top, 1, 2), np.swapaxes(bottom, 1, 2)), 1, 2)
        return 0.5 * (Y + np.swapaxes(Y, 1, 2)), ok

    def act_affine(self, g, X) -> np.ndarray:
        """Chart action of an element of the affine group (U^- L)."""
        return self.act_chart(g, X)

    def random_affine(self, rng, spread: float = 1.0) -> np.ndarray:
        """Random product translation * dilation * levi."""
        rng = rng_from(rng)
        A = random_orthogonal(rng, self.r) @ np.diag(rng.uniform(0.5, 2.0, self.r)) @ random_orthogonal(rng, self.r)
        t = float(np.exp(rng.uniform(-0.7, 0.7)))
        B = self.random_chart(rng, spread)
        return self.translation(B) @ self.dilation(t) @ self.levi(A)

    def random_group(self, rng, spread: float = 0.3) -> np.ndarray:
        """Random element including a small U^+ factor."""
        rng = rng_from(rng)
        return self.random_affine(rng) @ self.uplus(self.random_chart(rng, spread))

    # photons

    def standard_photon_direction(self) -> np.ndarray:
        E = np.zeros((self.r, self.r))
        E[-1, -1] = 1.0
        return E

    def standard_photon_dir(self) -> np.ndarray:
        e = np.zeros(self.r)
        e[-1] = 1.0
        return e

    @property
    def n_dir_params(self) -> int:
        return self.r

    def dir_from_params(self, params) -> np.ndarray:
        return unit(np.asarray(params, dtype=float))

    def dirmat(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.outer(u, u)

    def random_photon_dir(self, rng) -> np.ndarray:
        return unit(rng_from(rng).standard_normal(self.r))

    def photon_split(self, D, tol: float = 1e-8):
        """If D = t u u^T with u a unit vector, return (u, t); else None."""
        D = np.asarray(D, dtype=float)
        scale = np.linalg.norm(D)
        if scale == 0.0:
            return None
        lam, V = np.linalg.eigh(D)
        k = int(np.argmax(np.abs(lam)))
        rest = np.delete(lam, k)
        if rest.size and np.abs(rest).max() > tol * scale:
            return None
        u = V[:, k]
        # fix the sign of u so that its largest entry is positive
        if u[np.argmax(np.abs(u))] < 0:
            u = -u
        return u, float(lam[k])

    def infinity_point_of(self, base, u) -> LagPoint:
        """The point at infinity of the photon t -> base + t u u^T."""
        u = unit(np.asarray(u, dtype=float))
        r = self.r
        # orthonormal basis of the complement of u
        q, _ = np.linalg.qr(np.column_stack([u, np.eye(r)]))
        W = q[:, 1:r]
        cols = [np.r_[w, base @ w] for w in W.T]
        cols.append(np.r_[np.zeros(r), u])
        return LagPoint(np.column_stack(cols))

    def cone_steps(self, D) -> list:
        """Decompose D in the closed cone into photon steps [(u, t>0), ...]."""
        return [(u, lam) for lam, u in rank_one_decompose(D) if lam > 0]

    def reduce_residual(self, D, params):
        """One step that lowers the rank of D by one along a direction in its range.

        Returns (u, t, D - t u u^T) or None when D is already rank one.
        """
        lam, V = np.linalg.eigh(D)
        scale = max(np.abs(lam).max(), 1e-300)
        keep = np.abs(lam) > 1e-10 * scale
        k = int(keep.sum())
        if k <= 1:
            return None
        Q = V[:, keep]
        c = np.asarray(params[:k], dtype=float)
        if not np.any(c):
            c = np.ones(k)
        c = unit(c)
        # t = 1 / (u^T D^+ u) for u in the range of D
        denom = float(c @ (c / lam[keep]))
        if abs(denom) < 1e-14:
            return None
        t = 1.0 / denom
        u = Q @ c
        return u, t, D - t * np.outer(u, u)

    def step_along(self, D, u) -> float:
        """t with D - t u u^T singular, for u in the range of D in the closed cone."""
        lam, V = np.linalg.eigh(np.asarray(D, dtype=float))
        keep = lam > 1e-10 * max(np.abs(lam).max(), 1e-300)
        c = V[:, keep].T @ u
        return 1.0 / float(c @ (c / lam[keep]))

    def reduce_param_sizes(self, D=None) -> list:
        return list(range(self.r, 1, -1))

    # affine normalization of diamonds

    def normalizer(self, p, q, x=None, y=None):
        """Affine group element sending D(p, q) to D(0, I) in a canonical position.

        When x (and y) are given the residual O(r) freedom is used to make the
        image of x diagonal with ascending eigenvalues and to fix signs using y.
        """
        C = np.linalg.cholesky(q - p)  # q - p = C C^T
        A = C.T  # q - p = A^T A
        g = self.levi(A) @ self.translation(-p)
        if x is not None:
            xs = self.act_chart(g, x)
            lam, O = np.linalg.eigh(xs)
            signs = np.ones(self.r)
            if y is not None:
                ys = O.T @ self.act_chart(g, y) @ O
                for j in range(1, self.r):
                    if ys[0, j] < 0:
                        signs[j] = -1.0
            O = O * signs
            g = self.levi(O.T) @ g
        return g

    def boost_to_unit(self, Q) -> np.ndarray:
        """Levi element sending the cone vector Q to the identity."""
        C = np.linalg.cholesky(Q)
        return self.levi(C.T)

    # JSON

    def chart_from_json(self, data) -> np.ndarray:
        return self.chart(np.asarray(data, dtype=float))

    def chart_to_json(self, X) -> list:
        return np.asarray(X).tolist()


def rank_one_decompose(X) -> list:
    """Spectral decomposition X = sum lam_i u_i u_i^T, dropping zero eigenvalues."""
    X = np.asarray(X, dtype=float)
    lam, V = np.linalg.eigh(X)
    scale = max(1.0, np.abs(lam).max()) if lam.size else 1.0
    return [(float(l), V[:, i]) for i, l in enumerate(lam) if abs(l) > 1e-12 * scale]
