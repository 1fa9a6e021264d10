"""Invariant metrics: one-chain distance k, Caratheodory estimate C and the Kobayashi bracket."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .causal_core import Diamond, DualPoint, dual_sample, supporting_dual_points
from .common import rng_from
from .errors import DomainError, NonTransverseQuadruple, NotConjugate, ShilovError
from .photons import Photon, are_conjugate, intersect_Z, interval_in_domain, param, photon_interval, random_model_point
from .projline import ProjPoint, cross_ratio, hilbert_dist

PENALTY = 1e6


@dataclass
class Chain:
    points: list

    def __post_init__(self):
        if len(self.points) < 2:
            raise DomainError("a chain needs at least two points")
        self.points = [np.asarray(p, dtype=float) for p in self.points]

    @property
    def links(self) -> int:
        return len(self.points) - 1

    def concat(self, other: Chain) -> Chain:
        return Chain(self.points + other.points[1:])

    def reversed(self) -> Chain:
        return Chain(self.points[::-1])

    def transform(self, model, g) -> Chain:
        return Chain([model.act_chart(g, p) for p in self.points])

    def to_json(self, model) -> list:
        return [model.chart_to_json(p) for p in self.points]


@dataclass
class MetricBracket:
    lower: float
    upper: float
    chain: Chain | None = None

    def __post_init__(self):
        if self.lower < 0 or self.lower > self.upper + 1e-9:
            raise ShilovError(f"invalid bracket: lower {self.lower} > upper {self.upper}")


@dataclass
class DualSet:
    points: list = field(default_factory=list)

    def __post_init__(self):
        if not self.points:
            raise DomainError("a dual set must not be empty")

    @classmethod
    def for_domain(cls, domain, count: int = 20, seed=0) -> DualSet:
        if isinstance(domain, Diamond):
            return cls(dual_sample(domain, count, seed))

        return cls(supporting_dual_points(domain, count, seed))

    def transform(self, model, g) -> DualSet:
        return DualSet([DualPoint(model.act(g, d.point), d.label) for d in self.points])


def _same(model, x, y) -> bool:
    return model.chart_norm(np.asarray(y) - x) <= 1e-12


def k_one_chain(domain, x, y) -> float:
    """Hilbert distance of conjugate points inside their photon interval."""
    m = domain.model
    if _same(m, x, y):
        return 0.0
    if not are_conjugate(domain, x, y):
        raise NotConjugate("points are not conjugate in the domain")
    a, b, photon = interval_in_domain(domain, x, y)
    t = photon.locate(y)
    return hilbert_dist(photon_interval(a, b), ProjPoint(0.0), ProjPoint(t))


def cross_ratio_rho(model, xi, x, y, eta, N: int = 1) -> float:
    """(pairing(x,xi) pairing(y,eta) / (pairing(y,xi) pairing(x,eta)))^N."""
    num = model.pairing(x, xi) * model.pairing(y, eta)
    den = model.pairing(y, xi) * model.pairing(x, eta)
    if abs(den) <= 1e-300 or abs(model.pairing(y, xi)) <= 1e-14 or abs(model.pairing(x, eta)) <= 1e-14:
        raise NonTransverseQuadruple("a pairing in the denominator vanishes")
    return (num / den) ** N


def _log_ratios(model, dual: DualSet, x, y) -> np.ndarray:
    xp, yp = model.chart_to_point(x), model.chart_to_point(y)
    out = []
    for d in dual.points:
        a = model.pairing(xp, d.point)
        b = model.pairing(yp, d.point)
        if a == 0.0 or b == 0.0:
            continue
        out.append(math.log(abs(a)) - math.log(abs(b)))
    return np.array(out)


def caratheodory_raw(domain, dual: DualSet, x, y, N: int | None = None, refine: int = 50) -> float:
    """C^(N): the sup over dual pairs of |log cross_ratio_rho| at power N."""
    m = domain.model
    N = m.repN if N is None else N
    if _same(m, x, y):
        return 0.0
    # log |[xi:x:y:eta]| = L(xi) - L(eta), so the sup over pairs is max L - min L
    L = _log_ratios(m, dual, x, y)
    best = float(L.max() - L.min()) if L.size else 0.0
    if refine and isinstance(domain, Diamond):
        best = max(best, _refined_spread(domain, x, y, refine))
    return N * best


def caratheodory(domain, dual: DualSet, x, y, N: int | None = None, refine: int = 50) -> float:
    """C^(N) / N, the value compared with k and K."""
    m = domain.model
    N = m.repN if N is None else N
    return caratheodory_raw(domain, dual, x, y, N, refine) / N


def _cone_param(m, c) -> np.ndarray:
    """Closed cone vector from free parameters."""
    if m.kind == "lag":
        M = np.asarray(c, dtype=float).reshape(m.r, m.r)
        return M @ M.T
    w, s = np.asarray(c[:-1]), float(c[-1])
    return np.r_[w, math.sqrt(float(w @ w) + s * s)]


def _refined_spread(D: Diamond, x, y, steps: int) -> float:
    """Local search over the dual families J^-(p) and J^+(q) in the normalized frame."""
    m = D.model
    g = m.normalizer(D.p, D.q, x, y)
    xs, ys = m.act_chart(g, x), m.act_chart(g, y)
    top = m.cone_unit()

    def L(S):
        a = m.chart_pairing(xs, S)
        b = m.chart_pairing(ys, S)
        if a == 0.0 or b == 0.0:
            return 0.0
        return math.log(abs(a)) - math.log(abs(b))

    size = m.r * m.r if m.kind == "lag" else m.n
    fams = [lambda c: -_cone_param(m, c), lambda c: top + _cone_param(m, c)]
    c0 = np.zeros(size)
    hi, lo = L(m.zero()), L(m.zero())
    for S in (top,):
        hi, lo = max(hi, L(S)), min(lo, L(S))
    for fam in fams:
        for sign in (1.0, -1.0):
            res = minimize(lambda c: -sign * L(fam(c)), c0 + 1e-3, method="Nelder-Mead", options={"maxiter": steps})
            val = L(fam(res.x))
            hi, lo = max(hi, val), min(lo, val)
    return hi - lo


def projection_identity_check(model, trials: int = 1000, seed=0, N: int = 1) -> dict:
    """Compare log|[xi:x:y:eta]| with N log of the projected cross ratio on random configurations.

    The projected cross ratio is taken in the order (b1 : a2 : a1 : b2), the
    reciprocal of (b1 : a1 : a2 : b2) under the normalization ([1:0]:[1:1]:[1:t]:[0:1]) = t.
    """
    rng = rng_from(seed)
    worst = 0.0
    done = 0
    attempts = 0
    while done < trials and attempts < 20 * trials:
        attempts += 1
        photon = Photon(model, model.random_chart(rng), model.random_photon_dir(rng))
        xi, eta = random_model_point(model, rng), random_model_point(model, rng)
        h1, h2 = intersect_Z(photon, xi), intersect_Z(photon, eta)
        if h1.kind != "At" or h2.kind != "At" or h1.t == h2.t:
            continue
        th1, th2 = _angle(h1.t), _angle(h2.t)
        span = (th2 - th1) % math.pi
        s = np.sort(rng.uniform(0.05, 0.95, 2)) * span
        if s[1] - s[0] < 1e-3 * span:
            continue
        a1, a2 = (_from_angle(th1 + v) for v in s)
        if a1.is_infinite or a2.is_infinite or abs(a1.t2) > 1e6 or abs(a2.t2) > 1e6:
            continue
        b1, b2 = h1.t, h2.t
        cr = cross_ratio(b1, a2, a1, b2)
        if not (cr > 0 and math.isfinite(cr)):
            continue
        x, y = param(photon, a1), param(photon, a2)
        try:
            lhs = math.log(abs(cross_ratio_rho(model, xi, x, y, eta, N)))
        except NonTransverseQuadruple:
            continue
        rhs = N * math.log(cr)
        worst = max(worst, abs(lhs - rhs))
        done += 1
    return {"trials": done, "N": N, "max_residual": worst, "failures": int(worst > 1e-7)}


def _angle(t: ProjPoint) -> float:
    return math.atan2(t.t2, t.t1) % math.pi


def _from_angle(th: float) -> ProjPoint:
    return ProjPoint(math.cos(th), math.sin(th))


# chains


def _steps_to_chain(start, steps, m) -> list:
    pts = [np.asarray(start, dtype=float)]
    for u, t in steps:
        pts.append(pts[-1] + t * m.dirmat(u))
    return pts


def _pull_back(m, ginv, pts, x, y) -> Chain:
    """Map frame waypoints back, snapping each link to an exact photon step."""
    out = [x]
    pts = [pts[0]] + [b for a, b in zip(pts, pts[1:]) if m.chart_norm(b - a) > 1e-9 * max(1.0, m.chart_norm(a))]
    if len(pts) < 2:
        return Chain([x, y])
    for a, b in zip(pts[:-2], pts[1:-1]):
        d = m.act_chart(ginv, b) - m.act_chart(ginv, a)
        split = m.photon_split(d, tol=1e-6)
        out.append(out[-1] + (d if split is None else split[1] * m.dirmat(split[0])))
    out.append(y)
    return Chain(out)


def build_chain(D: Diamond, x, y) -> Chain:
    """Chain with at most n(G) links through a point in the common past of x and y."""
    m = D.model
    x = m.chart(x)
    y = m.chart(y)
    if not (D.member(x) and D.member(y)):
        raise DomainError("points must lie in the diamond")
    if _same(m, x, y):
        return Chain([x, x.copy()])
    if are_conjugate(D, x, y):
        return Chain([x, y])
    g = m.normalizer(D.p, D.q, x, y)
    ginv = np.linalg.inv(g)
    xs, ys = m.act_chart(g, x), m.act_chart(g, y)
    eps = 0.5 * min(m.cone_margin(xs), m.cone_margin(ys))
    zs = eps * m.cone_unit()
    bottom = m.act_chart(ginv, zs)
    down = _exact_steps(m, ginv, _steps_to_chain(zs, m.cone_steps(xs - zs), m), bottom, x)
    up = _exact_steps(m, ginv, _steps_to_chain(zs, m.cone_steps(ys - zs), m), bottom, y)
    return Chain(down[::-1] + up[1:])


def _exact_steps(m, ginv, frame_pts, start, target) -> list:
    """Photon steps from start to target along the pulled-back frame directions.

    Step lengths are re-solved in the original chart so that the last step is
    exactly a photon step; every waypoint lies causally between start and target.
    """
    dirs = []
    for a, b in zip(frame_pts, frame_pts[1:]):
        split = m.photon_split(m.act_chart(ginv, b) - m.act_chart(ginv, a), tol=1e-6)
        if split is None:
            dirs = None
            break
        dirs.append(split[0])
    if dirs is None:
        pts = _steps_to_chain(start, m.cone_steps(target - start), m)
        pts[-1] = target
        return pts
    pts = [start]
    for u in dirs[:-1]:
        pts.append(pts[-1] + m.step_along(target - pts[-1], u) * m.dirmat(u))
    pts.append(target)
    return pts


def chain_length(domain, chain: Chain) -> float:
    total = 0.0
    for i, (a, b) in enumerate(zip(chain.points, chain.points[1:])):
        if _same(domain.model, a, b):
            continue
        try:
            total += k_one_chain(domain, a, b)
        except NotConjugate as exc:
            raise NotConjugate(f"link {i} is not a conjugate pair", link=i) from exc
    return total


def chain_is_valid(domain, chain: Chain, max_links: int | None = None) -> bool:
    m = domain.model
    if max_links is not None and chain.links > max_links:
        return False
    for a, b in zip(chain.points, chain.points[1:]):
        if not _same(m, a, b) and not are_conjugate(domain, a, b):
            return False
    return True


# Kobayashi bracket


@dataclass
class Budget:
    restarts: int = 3
    iters: int = 400

    @classmethod
    def from_dict(cls, d) -> Budget:
        if d is None:
            return cls()
        if isinstance(d, Budget):
            return d
        return cls(int(d.get("restarts", 3)), int(d.get("iters", 400)))


def _link_length(lo, hi, t) -> float:
    """Hilbert length of the step 0 -> t inside the affine interval (lo, hi)."""
    if not (lo < 0 < hi) or not (lo < t < hi):
        return math.inf
    # factors of (lo : 0 : t : hi); an infinite end contributes 1
    f1 = 1.0 if math.isinf(lo) else (t - lo) / (-lo)
    f2 = 1.0 if math.isinf(hi) else hi / (hi - t)
    return abs(math.log(f1 * f2))


class _ChainObjective:
    """Chain length in a fixed frame as a function of free parameters.

    Parameters: ``prefix`` free links (direction parameters and a step each),
    followed by rank reducing steps and an exact closing link to the target.
    """

    def __init__(self, domain, xs, ys, prefix: int):
        self.domain = domain
        self.m = domain.model
        self.xs = xs
        self.ys = ys
        self.prefix = prefix
        self.k = self.m.n_dir_params
        self.sizes = self.m.reduce_param_sizes()
        self.size = prefix * (self.k + 1) + sum(self.sizes)

    def waypoints(self, params):
        m = self.m
        params = np.asarray(params, dtype=float)
        steps = []
        w = self.xs
        pos = 0
        for _ in range(self.prefix):
            u = m.dir_from_params(params[pos : pos + self.k])
            t = float(params[pos + self.k])
            pos += self.k + 1
            steps.append((u, t))
            w = w + t * m.dirmat(u)
        R = self.ys - w
        for size in self.sizes:
            out = m.reduce_residual(R, params[pos : pos + size])
            pos += size
            if out is None:
                break
            u, t, R = out
            steps.append((u, t))
        split = m.photon_split(R, tol=1e-8)
        if split is None:
            return None, steps
        steps.append(split)
        return R, steps

    def __call__(self, params) -> float:
        R, steps = self.waypoints(params)
        if R is None:
            return PENALTY * 10
        return self.length(steps)

    def length(self, steps) -> float:
        m = self.m
        dom = self.domain
        w = self.xs
        total = 0.0
        bad = 0.0
        for u, t in steps:
            if abs(t) < 1e-14:
                continue
            nxt = w + t * m.dirmat(u)
            bad += self._violation(w, nxt)
            if bad == 0.0:
                lo, hi = dom.photon_interval(w, u)
                total += _link_length(lo, hi, t)
            w = nxt
        if bad > 0.0 or not math.isfinite(total):
            return PENALTY * (1.0 + bad)
        return total

    def _violation(self, a, b) -> float:
        dom = self.domain
        if isinstance(dom, Diamond):
            # diamonds are convex in the chart: both ends inside suffices
            return max(0.0, 1e-12 - dom.margin(b))
        if dom.has_margin:
            return sum(max(0.0, 1e-12 - dom.margin(a + s * (b - a))) for s in np.linspace(0, 1, 17)[1:])
        return float(sum(not dom.member(a + s * (b - a)) for s in np.linspace(0, 1, 17)[1:]))

    def chain(self, params):
        R, steps = self.waypoints(params)
        if R is None:
            return None
        return _steps_to_chain(self.xs, steps, self.m)


def _frame(domain, x, y):
    m = domain.model
    if isinstance(domain, Diamond):
        g = m.normalizer(domain.p, domain.q, x, y)
        return g, Diamond(m, m.act_chart(g, domain.p), m.act_chart(g, domain.q))
    return m.identity(), domain


def refine_chain(domain, x, y, budget: Budget | dict | None = None, seed=0, prefix_max: int = 1):
    """Derivative-free search for a short chain; returns (length, Chain) or (inf, None)."""
    m = domain.model
    budget = Budget.from_dict(budget)
    g, dom = _frame(domain, x, y)
    ginv = np.linalg.inv(g)
    xs, ys = m.act_chart(g, x), m.act_chart(g, y)
    if isinstance(seed, np.random.Generator):
        seed = int(seed.integers(2**63))
    # one independent stream per restart; a larger budget repeats the smaller one
    streams = np.random.SeedSequence(seed).spawn(budget.restarts)
    best = (math.inf, None)
    for restart in range(budget.restarts):
        rng = np.random.default_rng(streams[restart])
        prefix = restart % (prefix_max + 1)
        obj = _ChainObjective(dom, xs, ys, prefix)
        if restart == 0:
            c0 = np.ones(obj.size)
        else:
            c0 = rng.standard_normal(obj.size)
        if prefix:
            # start free links at small steps so the chain stays inside
            for j in range(prefix):
                c0[j * (obj.k + 1) + obj.k] = 0.05 * rng.standard_normal()
        res = minimize(obj, c0, method="Nelder-Mead", options={"maxiter": budget.iters, "xatol": 1e-10, "fatol": 1e-13})
        val = obj(res.x)
        if val < best[0]:
            pts = obj.chain(res.x)
            if pts is not None:
                best = (val, _pull_back(m, ginv, pts, x, y))
    return best


def kobayashi(domain, dual: DualSet, x, y, budget=None, seed=0, init_chains=None, refine_dual: int = 50) -> MetricBracket:
    """Certified bracket lower <= K(x, y) <= upper with a witness chain."""
    m = domain.model
    x = m.chart(x)
    y = m.chart(y)
    if not (domain.member(x) and domain.member(y)):
        raise DomainError("points must lie in the domain")
    if _same(m, x, y):
        return MetricBracket(0.0, 0.0, Chain([x, y]))
    lower = caratheodory(domain, dual, x, y, refine=refine_dual)
    candidates = []
    if are_conjugate(domain, x, y):
        candidates.append(Chain([x, y]))
    if isinstance(domain, Diamond):
        candidates.append(build_chain(domain, x, y))
    for c in init_chains or []:
        candidates.append(c)
    best_len, best_chain = math.inf, None
    for c in candidates:
        try:
            val = chain_length(domain, c)
        except NotConjugate:
            continue
        if val < best_len:
            best_len, best_chain = val, c
    if not (best_chain is not None and best_chain.links == 1):
        val, chain = refine_chain(domain, x, y, budget, seed)
        if chain is not None:
            try:
                val = chain_length(domain, chain)
            except NotConjugate:
                val = math.inf
            if val < best_len:
                best_len, best_chain = val, chain
    if best_chain is None:
        raise ShilovError("no valid chain found")
    if lower > best_len + 1e-9:
        raise ShilovError(f"internal error: lower bound {lower} exceeds upper bound {best_len}")
    return MetricBracket(lower, best_len, best_chain)
