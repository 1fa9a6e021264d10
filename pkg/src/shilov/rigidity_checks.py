"""Extremal boundary points, component counts, visual probes and diamond recovery."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .causal_core import Diamond, dual_certificate, to_standard
from .common import Cone, random_orthogonal, rng_from, unit
from .ein_model import EinPoint, boost
from .errors import BudgetExceeded, DegeneratePairError, DomainError
from .lag_model import LagPoint

BOUNDARY_TOL = 1e-7


class Side(str, enum.Enum):
    PLUS = "Plus"
    MINUS = "Minus"


@dataclass
class ExtremalReport:
    candidates: list
    kind: str
    residuals: list
    iterations: int = 0


# connected components of the complement of Z_p and Z_q


def random_lag_point(model, rng):
    """Point of Lag(R^2r) from a Haar-random unitary U = A + iB: the span of [A; B]."""

    r = model.r
    Z = rng.standard_normal((r, r)) + 1j * rng.standard_normal((r, r))
    U, _ = np.linalg.qr(Z)
    return LagPoint(np.vstack([U.real, U.imag]))


def random_ein_point(model, rng):
    """Isotropic line a + b with a, b unit vectors in the positive and negative eigenspaces of b."""

    lam, Q = np.linalg.eigh(model.B)
    pos, neg = lam > 0, lam < 0
    y = np.zeros(lam.size)
    a = unit(rng.standard_normal(pos.sum()))
    c = unit(rng.standard_normal(neg.sum()))
    y[pos] = a / np.sqrt(lam[pos])
    y[neg] = c / np.sqrt(-lam[neg])
    return EinPoint(Q @ y)


def random_point(model, rng):
    return random_lag_point(model, rng) if model.kind == "lag" else random_ein_point(model, rng)


def count_components(model, p, q, samples: int = 2000, seed=0, cross_check: bool = False):
    """Number of components of the complement of Z_p and Z_q, classified by signature.

    With ``cross_check`` a second count is returned: union-find over nearest
    neighbours joined by chart segments that avoid Z_P and Z_{P^-}.
    """
    rng = rng_from(seed)
    # g carries the components for (p, q) onto those for the standard pair, so
    # sampling happens in the standard frame where no component is squeezed
    to_standard(model, p, q)
    classes = []
    pts = []
    for _ in range(samples):
        x = random_point(model, rng)
        if not model.in_chart(x):
            continue
        c = model.signature_class(model.point_to_chart(x))
        if c < 0:
            continue
        classes.append(c)
        pts.append(x)
    count = len(set(classes))
    if not cross_check:
        return count
    return count, _union_find_count(model, pts)


def _swap_element(model) -> np.ndarray:
    """Element exchanging the base point and the point at infinity."""
    return model.J if model.kind == "lag" else model._swap()


def _embed(x) -> np.ndarray:
    v = x.frame if hasattr(x, "frame") else unit(x.rep)[:, None]
    return (v @ v.T).ravel()


def _union_find_count(model, pts, k: int = 15) -> int:
    n = len(pts)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    sw = _swap_element(model)
    near = [model.point_to_chart(x) for x in pts]
    far = [model.point_to_chart(model.act(sw, x)) for x in pts]
    emb = np.array([_embed(x) for x in pts])
    d2 = ((emb[:, None, :] - emb[None, :, :]) ** 2).sum(axis=2)
    order = np.argsort(d2, axis=1)[:, 1 : k + 1]
    for i in range(n):
        for j in order[i]:
            if find(i) == find(j):
                continue
            # use the chart in which the segment stays bounded
            if max(model.chart_norm(near[i]), model.chart_norm(near[j])) <= max(model.chart_norm(far[i]), model.chart_norm(far[j])):
                X, Y = near[i], near[j]
            else:
                X, Y = far[i], far[j]
            if _segment_clean(model, X, Y):
                parent[find(i)] = find(j)
    return len({find(i) for i in range(n)})


def _segment_clean(model, X, Y, steps: int = 16) -> bool:
    """The chart segment [X, Y] keeps a constant signature, so it avoids both hypersurfaces."""
    cls = model.signature_class(X)
    for s in np.linspace(0, 1, steps)[1:]:
        if model.signature_class(X + s * (Y - X)) != cls:
            return False
    return True


# strongly extremal points


def _direction(model, c, base=None) -> np.ndarray:
    """Open-cone direction w with phi(w) = 1 from free parameters.

    ``base`` is a cone direction returned for c = 0; parameters act as relative
    perturbations of it, which keeps the search scale-free near degenerate cones.
    """
    c = np.asarray(c, dtype=float)
    if model.kind == "lag":
        S = model.from_coords(c)
        lam, V = np.linalg.eigh(S)
        W = (V * np.exp(np.clip(lam, -50, 50))) @ V.T
        if base is not None:
            bl, bV = np.linalg.eigh(base)
            R = (bV * np.sqrt(np.maximum(bl, 0.0))) @ bV.T
            W = R @ W @ R
        return W / np.trace(W)
    v = np.r_[c / math.sqrt(1.0 + float(c @ c)), 1.0]
    if base is not None:
        v = np.linalg.inv(boost(base[:-1] / base[-1])) @ v
    return v / v[-1]


def _n_params(model) -> int:
    return model.r * (model.r + 1) // 2 if model.kind == "lag" else model.n - 1


def _best_ray(domain, x, sign, base, starts, maxiter):
    """Nelder-Mead over directions for the longest ray x + s*sign*w inside the domain."""
    m = domain.model
    k = _n_params(m)

    ref = domain.exit_time(x, sign * _direction(m, np.zeros(k), base))
    if not math.isfinite(ref):
        return _direction(m, np.zeros(k), base), ref
    ref = max(ref, 1e-300)

    def neg_exit(params):
        # relative to the starting ray, so the stopping tolerances are scale-free
        return -domain.exit_time(x, sign * _direction(m, params, base)) / ref

    best = None
    for c0 in starts:
        simplex = np.vstack([c0, c0 + 0.5 * np.eye(k)])
        res = minimize(
            neg_exit,
            c0,
            method="Nelder-Mead",
            options={"maxiter": maxiter, "initial_simplex": simplex, "xatol": 1e-5, "fatol": 1e-8},
        )
        if best is None or res.fun < best.fun:
            best = res
    return _direction(m, best.x, base), -best.fun * ref


def strongly_extremal(
    domain, direction=Side.MINUS, seed=0, x0=None, max_iter: int = 80, tol: float = 1e-9, step: float = 0.99
) -> ExtremalReport:
    """Minimize (Minus) or maximize (Plus) phi over the closure of the domain inside the cone of x0.

    Each round finds the ray from x0 along which phi changes most before leaving
    the domain, then moves x0 most of the way along it; the part of the domain
    inside the cone of x0 shrinks geometrically onto the extremal point.
    """
    m = domain.model
    direction = Side(direction)
    sign = -1.0 if direction is Side.MINUS else 1.0
    rng = rng_from(seed)
    x = np.asarray(domain.center if x0 is None else x0, dtype=float)
    if not domain.member(x):
        raise DomainError("starting point must lie in the domain")
    k = _n_params(m)
    maxiter = 60 * k
    base = None
    best_point, last_s = x, math.inf
    for it in range(1, max_iter + 1):
        starts = [np.zeros(k)] + ([rng.standard_normal(k) for _ in range(2)] if it == 1 else [])
        w, s = _best_ray(domain, x, sign, base, starts, maxiter)
        if s <= tol * max(1.0, domain.scale):
            # confirm with fresh unpreconditioned starts before accepting
            w2, s2 = _best_ray(domain, x, sign, None, [np.zeros(k)] + [rng.standard_normal(k) for _ in range(3)], maxiter)
            if s2 > s:
                w, s = w2, s2
        if not math.isfinite(s):
            raise DomainError("domain is not proper: a cone ray never leaves it")
        best_point = x + sign * s * w
        last_s = s
        if s <= tol * max(1.0, domain.scale):
            return ExtremalReport([best_point], "Strongly" + direction.value, [s], it)
        x = x + sign * step * s * w
        base = w
    raise BudgetExceeded(f"extremal search did not converge (last step {last_s:.3g})", best=best_point)


# extremality tests


def _margin_fn(domain):
    if domain.has_margin:
        return domain.margin
    # membership only: +1 inside the closure, -1 outside
    return lambda z: 1.0 if domain.closure_member(z, 1e-9) else -1.0


def _margin_batch_fn(domain):
    if domain.has_margin:
        return domain.margin_batch
    f = _margin_fn(domain)
    return lambda zs: np.array([f(z) for z in zs])


def is_strongly_extremal(domain, p, rays: int = 64, seed=0, s_min: float = BOUNDARY_TOL) -> bool:
    """One-sided lightcone at p meets the closure only at p, for one of the two orientations."""
    m = domain.model
    p = np.asarray(p, dtype=float)
    margin = _margin_fn(domain)
    if domain.has_margin and abs(margin(p)) > BOUNDARY_TOL:
        return False
    if not domain.has_margin and domain.member(p):
        return False
    rng = rng_from(seed)
    ss = s_min * np.logspace(0, np.log10(max(10.0, 0.5 * domain.scale / s_min)), 24)
    batch = _margin_batch_fn(domain)
    shape = (-1,) + (1,) * p.ndim
    for orient in (-1.0, 1.0):
        # the ray re-enters when the margin is nonnegative somewhere past s_min
        def worst(params):
            D = orient * m.dirmat(m.dir_from_params(params))
            return float(batch(p + ss.reshape(shape) * D).max())

        k = m.n_dir_params
        starts = [rng.standard_normal(k) for _ in range(rays)]
        vals = [worst(c) for c in starts]
        reenters = max(vals) >= -1e-12
        if not reenters:
            for i in np.argsort(vals)[::-1][:3]:
                res = minimize(lambda c: -worst(c), starts[i], method="Nelder-Mead", options={"maxiter": 200, "xatol": 1e-10, "fatol": 1e-15})
                if -res.fun >= -1e-12:
                    reenters = True
                    break
        if not reenters:
            return True
    return False


def is_R_extremal(domain, p, photons: int = 32, seed=0, s: float = 1e-4) -> bool:
    """p is not interior to a photon segment contained in the boundary."""
    m = domain.model
    p = np.asarray(p, dtype=float)
    margin = _margin_fn(domain)
    if domain.member(p) and (not domain.has_margin or margin(p) > BOUNDARY_TOL):
        raise DomainError("point is interior to the domain")
    rng = rng_from(seed)
    ss = s * np.array([1e-2, 1e-1, 1.0])

    batch = _margin_batch_fn(domain)
    tt = np.r_[ss, -ss].reshape((-1,) + (1,) * p.ndim)

    def spread(params):
        D = m.dirmat(m.dir_from_params(params))
        return float(np.abs(batch(p + tt * D)).max())

    k = m.n_dir_params
    starts = [rng.standard_normal(k) for _ in range(photons)]
    vals = [spread(c) for c in starts]
    best = min(vals)
    for i in np.argsort(vals)[:4]:
        res = minimize(spread, starts[i], method="Nelder-Mead", options={"maxiter": 400, "xatol": 1e-12, "fatol": 1e-16})
        best = min(best, res.fun)
    # on a boundary photon segment both sides stay at margin ~0; otherwise the spread is of order s
    return bool(best > 1e-6 * s)


# visual probe


def _step_for_distance(lo, hi, delta, forward: bool) -> float:
    """Signed parameter t whose Hilbert distance from 0 inside (lo, hi) is delta."""
    E = math.exp(delta)
    a, b = -lo, hi
    if not forward:
        a, b = b, a
    if math.isinf(a) and math.isinf(b):
        t = delta
    elif math.isinf(a):
        t = b * (1 - 1 / E)
    elif math.isinf(b):
        t = a * (E - 1)
    else:
        t = a * b * (E - 1) / (b + E * a)
    return t if forward else -t


def visual_probe(domain, p, M: float = 1.0, trials: int = 20, seed=0, K: int = 20, links: int = 3, rho: float = 0.7) -> dict:
    """Companions of bounded chain length of a sequence tending to p, and their distance to p."""
    m = domain.model
    rng = rng_from(seed)
    p = np.asarray(p, dtype=float)
    c = domain.center
    dists = []
    for k in range(1, K + 1):
        x = p + rho**k * (c - p)
        worst = 0.0
        for _ in range(trials if M > 0 else 1):
            y = x.copy()
            budget = M
            for _ in range(links):
                if budget <= 0:
                    break
                u = m.random_photon_dir(rng)
                lo, hi = domain.photon_interval(y, u)
                delta = budget * rng.uniform(0.3, 1.0)
                t = _step_for_distance(lo, hi, delta, rng.random() < 0.5)
                y = y + t * m.dirmat(u)
                budget -= delta
            worst = max(worst, m.chart_norm(y - p))
        dists.append(worst)
    dists = np.array(dists)
    return {
        "distances": dists.tolist(),
        "initial": float(dists[0]),
        "final": float(dists[-1]),
        "ratio": float(dists[-1] / dists[0]) if dists[0] > 0 else 0.0,
        "converged": bool(dists[-1] <= 0.1 * dists[0]) if dists[0] > 0 else True,
    }


# rigidity pipeline


def recover_diamond(domain, seed=0, samples: int = 10_000, slack: float = 1e-6) -> tuple:
    """Locate the two strongly extremal points and test whether the domain is their diamond."""
    m = domain.model
    rng = rng_from(seed)
    p0 = strongly_extremal(domain, Side.MINUS, rng).candidates[0]
    q0 = strongly_extremal(domain, Side.PLUS, rng).candidates[0]
    info = {"p0": p0, "q0": q0}
    if m.cone_member(q0 - p0) is not Cone.INTERIOR:
        info["reason"] = "extremal points are not causally ordered"
        return p0, q0, False, info
    pts = domain.sample(rng, samples)
    info["Z_disjoint"] = bool(
        dual_certificate(m, pts, m.chart_to_point(p0)) and dual_certificate(m, pts, m.chart_to_point(q0))
    )
    e = slack * max(1.0, domain.scale) * m.cone_unit()
    # enlarged and shrunk diamonds absorb the endpoint error
    outer = Diamond(m, p0 - e, q0 + e)
    inner = Diamond(m, p0 + e, q0 - e)
    info["omega_in_diamond"] = bool(np.all(outer.member_batch(pts)))
    dpts = inner.sample(rng, samples)
    info["diamond_in_omega"] = bool(np.all(domain.member_batch(dpts)))
    verdict = info["Z_disjoint"] and info["omega_in_diamond"] and info["diamond_in_omega"]
    return p0, q0, verdict, info


def levi_transitivity_check(model, trials: int = 100, seed=0, samples: int = 20) -> dict:
    """Levi elements built from Cholesky factors (Lag) or boosts (Ein) move any cone point to the unit."""
    rng = rng_from(seed)
    worst = 0.0
    failures = 0
    unit_pt = model.cone_unit()
    for _ in range(trials):
        X = model.random_cone(rng, scale=float(np.exp(rng.uniform(-1, 1))))
        if model.kind == "lag":
            A = np.linalg.cholesky(X).T  # X = A^T A
            g = model.levi(A)
        else:
            R = np.eye(model.n)
            R[:-1, :-1] = random_orthogonal(rng, model.n - 1)
            g = model.levi(R) @ model.boost_to_unit(X)
        res = model.chart_norm(model.act_chart(g, X) - unit_pt)
        worst = max(worst, res)
        for _ in range(samples):
            Y = model.random_cone(rng)
            if model.cone_member(model.act_chart(g, Y)) is not Cone.INTERIOR:
                failures += 1
    return {"trials": trials, "failures": failures + int(worst > 1e-8), "max_residual": float(worst)}


def cholesky_levi(model, X) -> np.ndarray:
    """The factor A with X = A^T A used for the Lag Levi element."""
    if model.kind != "lag":
        raise DegeneratePairError("Cholesky factors apply to the Lagrangian model")
    return np.linalg.cholesky(np.asarray(X, dtype=float)).T
