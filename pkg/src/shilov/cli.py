"""Command-line front end.

Global flags (before or after the subcommand):
    --model lag:r | ein:n, --repN N, --seed S (default $SHILOV_SEED or 0),
    --config FILE (flat JSON mirroring Config), --tol KEY=VAL, --json / --csv.

Exit codes: 0 success, 1 a verification assertion failed, 2 usage or parse
error, 3 precondition violated by the input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .causal_core import (
    Diamond,
    OracleDomain,
    causal_relation,
    domain_from_json,
    model_from_spec,
    order_axioms_check,
)
from .errors import BudgetExceeded, DomainError, ShilovError
from .metrics import Budget, DualSet, k_one_chain, kobayashi, projection_identity_check
from .photons import (
    are_conjugate,
    interval_in_domain,
    mobius_uplus_check,
    photon_affine_check,
    photon_through,
    singleton_check,
    split_check,
)
from .rigidity_checks import (
    Side,
    count_components,
    is_R_extremal,
    is_strongly_extremal,
    levi_transitivity_check,
    recover_diamond,
    strongly_extremal,
    visual_probe,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_PRECONDITION = 0, 1, 2, 3

DEFAULT_TOLS = {
    "comparative": 1e-8,
    "root": 1e-10,
    "split": 1e-7,
    "affine": 1e-9,
    "projection": 1e-7,
    "metric": 1e-7,
    "extremal": 1e-5,
    "boundary": 1e-7,
    "slack": 1e-6,
    "mobius": 1e-8,
    "visual": 0.1,
}

SUITES = (
    "order",
    "photon-affine",
    "singleton",
    "split",
    "projection-identity",
    "components",
    "extremal",
    "recover",
    "levi",
    "mobius",
    "visual",
)


class UsageError(Exception):
    pass


@dataclass
class Config:
    model: str = "lag:2"
    repN: int = 1
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLS))
    seed: int = 0
    budget: dict = field(default_factory=lambda: {"restarts": 3, "iters": 400, "samples": None})
    fmt: str | None = None

    def __post_init__(self):
        for key, val in self.tolerances.items():
            if not val > 0:
                raise UsageError(f"tolerance {key} must be positive")
        if self.repN < 1:
            raise UsageError("repN must be >= 1")

    def make_model(self):
        try:
            return model_from_spec(self.model, self.repN)
        except ShilovError as exc:
            raise UsageError(str(exc)) from None

    def samples(self, default: int) -> int:
        s = self.budget.get("samples")
        return default if s is None else int(s)


def _model_string(value) -> str:
    if isinstance(value, dict):
        dim = value.get("r", value.get("n"))
        return f"{value.get('kind')}:{dim}"
    return str(value)


def load_config(args) -> Config:
    data = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
    tols = dict(DEFAULT_TOLS)
    for key, val in (data.get("tolerances") or {}).items():
        if key not in DEFAULT_TOLS:
            raise UsageError(f"unknown tolerance {key!r}")
        tols[key] = float(val)
    for item in getattr(args, "tol", None) or []:
        key, sep, val = item.partition("=")
        if not sep or key not in DEFAULT_TOLS:
            raise UsageError(f"--tol expects KEY=VAL with KEY in {sorted(DEFAULT_TOLS)}, got {item!r}")
        try:
            tols[key] = float(val)
        except ValueError:
            raise UsageError(f"bad tolerance value {val!r}") from None
    budget = {"restarts": 3, "iters": 400, "samples": None}
    budget.update(data.get("budget") or {})
    seed = data.get("seed")
    if getattr(args, "seed", None) is not None:
        seed = args.seed
    if seed is None:
        env = os.environ.get("SHILOV_SEED")
        try:
            seed = int(env) if env else 0
        except ValueError:
            raise UsageError(f"SHILOV_SEED must be an integer, got {env!r}") from None
    model = getattr(args, "model", None) or _model_string(data.get("model", "lag:2"))
    repN = getattr(args, "repN", None) or int(data.get("repN", 1))
    fmt = getattr(args, "fmt", None) or data.get("format")
    return Config(model, int(repN), tols, int(seed) % 2**64, budget, fmt)


# input and output helpers


def _parse_json(text: str, what: str):
    if text.startswith("@"):
        try:
            with open(text[1:]) as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {what}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"malformed JSON for {what}: {exc}") from None


def _chart(model, text: str, what: str):
    data = _parse_json(text, what)
    try:
        return model.chart_from_json(data)
    except (ValueError, TypeError, IndexError) as exc:
        raise UsageError(f"bad chart vector for {what}: {exc}") from None


def _point(model, text: str, what: str):
    data = _parse_json(text, what)
    try:
        return model.point(data)
    except (ValueError, TypeError, IndexError) as exc:
        raise UsageError(f"bad point for {what}: {exc}") from None


def _domain(model, text: str | None, cfg: Config):
    if text is None:
        # the standard bounded diamond of the model
        return Diamond(model, -model.cone_unit(), model.cone_unit())
    data = _parse_json(text, "domain")
    if not isinstance(data, dict):
        raise UsageError("domain must be a JSON object")
    try:
        return domain_from_json(model, data)
    except (KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, ShilovError):
            raise
        raise UsageError(f"bad domain descriptor: {exc}") from None


def _clean(obj):
    """JSON-safe copy: numpy to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def _emit(result, cfg: Config, out) -> None:
    if cfg.fmt == "csv":
        rows = result if isinstance(result, list) else [result]
        _write_csv(rows, out)
    else:
        out.write(json.dumps(_clean(result), indent=2) + "\n")


def _write_csv(rows, out, header=None) -> None:
    rows = [_clean(r) for r in rows]
    if header is None:
        header = [k for k in (rows[0] if rows else {}) if not isinstance(rows[0][k], (list, dict))]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([r.get(k, "") for k in header])
    out.write(buf.getvalue())


# subcommands


def cmd_pair(args, cfg: Config):
    m = cfg.make_model()
    x = _point(m, args.x, "x")
    y = _point(m, args.y, "y")
    out = {"transverse": bool(m.is_transverse(x, y)), "pairing": m.pairing(x, y), "relation": None}
    if m.in_chart(x) and m.in_chart(y):
        out["relation"] = causal_relation(m, m.point_to_chart(x), m.point_to_chart(y))
    return out, EXIT_OK


def cmd_dist(args, cfg: Config):
    m = cfg.make_model()
    dom = _domain(m, args.domain, cfg)
    x = _chart(m, args.x, "x")
    y = _chart(m, args.y, "y")
    if not (dom.member(x) and dom.member(y)):
        raise DomainError("x and y must lie in the domain")
    dual = DualSet.for_domain(dom, args.dual, cfg.seed)
    k = None
    if np.allclose(x, y, atol=0, rtol=0) or are_conjugate(dom, x, y):
        k = k_one_chain(dom, x, y)
    budget = Budget(int(cfg.budget["restarts"]), int(cfg.budget["iters"]))
    b = kobayashi(dom, dual, x, y, budget=budget, seed=cfg.seed)
    return {
        "k": k,
        "caratheodory": b.lower,
        "kobayashi": {"lower": b.lower, "upper": b.upper, "chain": b.chain.to_json(m) if b.chain else []},
    }, EXIT_OK


def cmd_photon(args, cfg: Config):
    m = cfg.make_model()
    x = _chart(m, args.x, "x")
    y = _chart(m, args.y, "y")
    ph = photon_through(m, x, y)
    out = {**ph.to_json(), "t_y": ph.locate(y), "infinity_point": ph.infinity_point.to_json()}
    if args.domain is not None:
        dom = _domain(m, args.domain, cfg)
        a, b, _ = interval_in_domain(dom, x, y)
        out["interval"] = [a.affine, b.affine]
        out["k"] = k_one_chain(dom, x, y)
    return out, EXIT_OK


def cmd_components(args, cfg: Config):
    m = cfg.make_model()
    p = _chart(m, args.p, "p") if args.p else m.zero()
    q = _chart(m, args.q, "q") if args.q else m.cone_unit()
    res = count_components(m, p, q, samples=cfg.samples(2000), seed=cfg.seed, cross_check=args.cross_check)
    count, uf = res if args.cross_check else (res, None)
    expected = m.nondegenerate_classes()
    out = {"model": m.spec, "count": count, "expected": expected, "pass": count == expected}
    if uf is not None:
        out["union_find_upper"] = uf
    return out, EXIT_OK if count == expected else EXIT_FAIL


def cmd_extremal(args, cfg: Config):
    m = cfg.make_model()
    dom = _domain(m, args.domain, cfg)
    rep = strongly_extremal(dom, Side(args.direction), cfg.seed)
    c = rep.candidates[0]
    return {
        "kind": rep.kind,
        "candidates": [m.chart_to_json(v) for v in rep.candidates],
        "residuals": rep.residuals,
        "iterations": rep.iterations,
        "strongly_extremal": is_strongly_extremal(dom, c, seed=cfg.seed),
        "R_extremal": is_R_extremal(dom, c, seed=cfg.seed),
    }, EXIT_OK


def cmd_recover(args, cfg: Config):
    m = cfg.make_model()
    dom = _domain(m, args.domain, cfg)
    p0, q0, verdict, info = recover_diamond(dom, cfg.seed, samples=cfg.samples(10_000), slack=cfg.tolerances["slack"])
    info = {k: v for k, v in info.items() if k not in ("p0", "q0")}
    return {"p0": m.chart_to_json(p0), "q0": m.chart_to_json(q0), "verdict": verdict, **info}, EXIT_OK


def cmd_verify(args, cfg: Config):
    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)}")
    m = cfg.make_model()
    trials = args.trials
    report = run_suite(args.suite, m, trials, cfg)
    report = {"suite": args.suite, "model": m.spec, "seed": cfg.seed, **report}
    report["pass"] = bool(report.get("pass", report["failures"] == 0))
    return report, EXIT_OK if report["pass"] else EXIT_FAIL


def run_suite(name: str, m, trials: int | None, cfg: Config) -> dict:
    tol = cfg.tolerances
    seed = cfg.seed
    rng = np.random.default_rng(seed)
    if name == "order":
        r = order_axioms_check(m, trials or 1000, seed)
        return {"trials": r["samples"], "max_residual": 0.0, **r}
    if name == "photon-affine":
        return photon_affine_check(m, trials or 1000, seed)
    if name == "singleton":
        return singleton_check(m, trials or 1000, seed)
    if name == "split":
        return split_check(m, trials or 1000, seed, tol=tol["split"])
    if name == "projection-identity":
        reports = [projection_identity_check(m, trials or 1000, seed, N) for N in (1, 2)]
        worst = max(r["max_residual"] for r in reports)
        fails = sum(r["max_residual"] > tol["projection"] for r in reports)
        return {"trials": sum(r["trials"] for r in reports), "failures": fails, "max_residual": worst}
    if name == "components":
        count = count_components(m, m.zero(), m.cone_unit(), samples=cfg.samples(2000), seed=seed)
        expected = m.nondegenerate_classes()
        return {"trials": 1, "count": count, "expected": expected, "failures": int(count != expected), "max_residual": 0.0}
    if name == "extremal":
        return _extremal_suite(m, trials or 10, rng, tol)
    if name == "recover":
        return _recover_suite(m, trials or 5, rng, tol, cfg)
    if name == "levi":
        return levi_transitivity_check(m, trials or 100, seed)
    if name == "mobius":
        worst, fails = 0.0, 0
        for _ in range(trials or 100):
            Y = m.random_chart(rng)
            r = mobius_uplus_check(m, Y, 50, rng)
            worst = max(worst, r["max_residual"], r["lambda_error"])
            fails += not r["pass"]
        return {"trials": trials or 100, "failures": fails, "max_residual": worst}
    if name == "visual":
        D = Diamond(m, -m.cone_unit(), m.cone_unit())
        r = visual_probe(D, D.p, M=1.0, trials=trials or 20, seed=seed)
        ok = r["final"] <= tol["visual"] * r["initial"]
        return {"trials": trials or 20, "failures": int(not ok), "max_residual": r["ratio"], **r}
    raise UsageError(f"unknown suite {name!r}")


def _random_diamond(m, rng) -> Diamond:
    p = m.random_chart(rng)
    return Diamond(m, p, p + m.random_cone(rng))


def _extremal_suite(m, trials: int, rng, tol) -> dict:
    worst, fails = 0.0, 0
    for _ in range(trials):
        D = _random_diamond(m, rng)
        seed = int(rng.integers(2**32))
        lo = strongly_extremal(D, Side.MINUS, seed).candidates[0]
        hi = strongly_extremal(D, Side.PLUS, seed).candidates[0]
        err = max(m.chart_norm(lo - D.p), m.chart_norm(hi - D.q))
        worst = max(worst, err)
        flags = [is_strongly_extremal(D, b, seed=seed) for b in [D.p, D.q] + D.boundary_points(rng, 18)]
        fails += (err > tol["extremal"]) + (flags[:2] != [True, True]) + sum(flags[2:])
    return {"trials": trials, "failures": int(fails), "max_residual": worst}


def _recover_suite(m, trials: int, rng, tol, cfg: Config) -> dict:
    worst, fails = 0.0, 0
    for _ in range(trials):
        D = _random_diamond(m, rng)
        g = m.random_group(rng)
        dom = OracleDomain.diamond_image(D, g)
        p0, q0, verdict, _ = recover_diamond(dom, rng, samples=cfg.samples(10_000), slack=tol["slack"])
        err = max(m.chart_norm(p0 - m.act_chart(g, D.p)), m.chart_norm(q0 - m.act_chart(g, D.q)))
        worst = max(worst, err)
        fails += (not verdict) or err > tol["extremal"]
    ball = OracleDomain.ball(m, m.random_chart(rng), 1.0)
    ball_verdict = recover_diamond(ball, rng, samples=cfg.samples(10_000), slack=tol["slack"])[2]
    fails += bool(ball_verdict)
    return {"trials": trials, "failures": int(fails), "max_residual": worst, "ball_verdict": ball_verdict}


def cmd_sweep(args, cfg: Config):
    m = cfg.make_model()
    dom = _domain(m, args.domain, cfg)
    x = _chart(m, args.x, "x")
    rows = []
    if args.family == "photon":
        if args.dir is None:
            raise UsageError("sweep photon needs --dir")
        u = np.asarray(_parse_json(args.dir, "dir"), dtype=float)
        D = m.dirmat(u)
        header = ["t", "k"]
        for t in np.linspace(args.t0, args.t1, args.steps) if args.steps > 0 else []:
            y = x + t * D
            rows.append({"t": float(t), "k": k_one_chain(dom, x, y) if dom.member(y) else math.nan})
    else:
        if args.y is None:
            raise UsageError("sweep budget needs --y")
        y = _chart(m, args.y, "y")
        dual = DualSet.for_domain(dom, args.dual, cfg.seed)
        header = ["restarts", "lower", "upper", "gap"]
        for r in _int_list(args.restarts):
            b = kobayashi(dom, dual, x, y, budget=Budget(r, int(cfg.budget["iters"])), seed=cfg.seed)
            rows.append({"restarts": r, "lower": b.lower, "upper": b.upper, "gap": b.upper - b.lower})
    return (header, rows), EXIT_OK


def _int_list(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma separated list of integers, got {text!r}") from None


# parser


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    parser.add_argument("--model", default=d, help="lag:r or ein:n")
    parser.add_argument("--repN", type=int, default=d, help="representation power N")
    parser.add_argument("--seed", type=int, default=d, help="RNG seed (default $SHILOV_SEED or 0)")
    parser.add_argument("--config", default=d, help="flat JSON config file")
    parser.add_argument("--tol", action="append", default=d, metavar="KEY=VAL", help="override a tolerance")
    fmt = parser.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json", default=d)
    fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv", default=d)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shilov", description="Causal geometry kernel: photons, diamonds, metrics and rigidity checks.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        _global_flags(p, suppress=True)
        return p

    p = add("pair", "transversality, pairing and causal relation of two points")
    p.add_argument("x", help="chart JSON, or {'frame': ...} / {'rep': ...}")
    p.add_argument("y")

    p = add("dist", "one-chain distance, Caratheodory estimate and Kobayashi bracket")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("--domain", help="JSON domain descriptor (default: diamond between -e and e)")
    p.add_argument("--dual", type=int, default=20, help="dual sample size")

    p = add("photon", "photon through two conjugate chart points")
    p.add_argument("x")
    p.add_argument("y")
    p.add_argument("--domain")

    p = add("verify", "run a named verification suite")
    p.add_argument("suite", help=", ".join(SUITES))
    p.add_argument("--trials", type=int, default=None)

    p = add("components", "count components of the complement of Z_p and Z_q")
    p.add_argument("--p")
    p.add_argument("--q")
    p.add_argument("--cross-check", action="store_true", help="also report the union-find upper estimate")

    p = add("extremal", "strongly extremal point of a domain")
    p.add_argument("--domain")
    p.add_argument("--direction", choices=[s.value for s in Side], default=Side.MINUS.value)

    p = add("recover", "recover a hidden diamond from its extremal points")
    p.add_argument("--domain")

    p = add("sweep", "CSV data along a parametrized family")
    p.add_argument("family", choices=["photon", "budget"])
    p.add_argument("--domain")
    p.add_argument("--x", required=True)
    p.add_argument("--y")
    p.add_argument("--dir", help="photon direction (Lag: vector u, Ein: lightlike d)")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--restarts", default="0,1,2,4,8", help="comma separated restart budgets")
    p.add_argument("--dual", type=int, default=20)
    return parser


COMMANDS = {
    "pair": cmd_pair,
    "dist": cmd_dist,
    "photon": cmd_photon,
    "verify": cmd_verify,
    "components": cmd_components,
    "extremal": cmd_extremal,
    "recover": cmd_recover,
    "sweep": cmd_sweep,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    err = sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required: " + ", ".join(COMMANDS))
        cfg = load_config(args)
        result, code = COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_USAGE
    except BudgetExceeded as exc:
        err.write(f"budget exceeded: {exc}\n")
        return EXIT_FAIL
    except ShilovError as exc:
        err.write(f"precondition violated: {exc}\n")
        return EXIT_PRECONDITION
    if args.command == "sweep":
        header, rows = result
        if cfg.fmt == "json":
            out.write(json.dumps(_clean(rows), indent=2) + "\n")
        else:
            _write_csv(rows, out, header)
    else:
        _emit(result, cfg, out)
    return code


if __name__ == "__main__":
    sys.exit(main())
