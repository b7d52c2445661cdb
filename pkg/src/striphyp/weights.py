"""Weight functions: catalog, growth conditions, comparisons, surgery, conjugates.

A weight is a non-decreasing function on [0, inf), extended evenly to the
real line.  Catalog entries carry symbolic facts (tags) used to issue
``Holds`` verdicts; everything else is graded numerically.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Iterable

import numpy as np
from scipy import optimize

from .config import GridConfig, QuadConfig
from .quad import Envelope, QuadratureError, gl_rule, integrate, integrate_decaying
from .verdict import ConditionVerdict, fails, holds, supported

CONDITIONS = ("gamma0", "delta", "epsilon", "epsilon0", "epsilon_inf",
              "alpha", "gamma", "NA", "zeta")
RELATIONS = ("subset", "prec", "equivalent", "star_equivalent")

_RANK = {"zero": 0, "bounded": 1, "log": 2, "polylog": 3, "power": 4,
         "subexp": 5, "exp": 6, "superexp": 7}


class WeightError(ValueError):
    """Bad parameters or a failed precondition for a weight operation."""


class ConjugateDiverges(WeightError):
    pass


@dataclass(frozen=True)
class Growth:
    """Coarse asymptotic class of a weight, used for symbolic comparisons.

    ``key`` orders weights inside a class (larger means faster growth).
    When ``exact`` is False, ties are left to numerics.
    """
    cls: str
    key: tuple = ()
    exact: bool = True

    @property
    def rank(self) -> int:
        return _RANK[self.cls]


@dataclass(frozen=True, eq=False)
class Weight:
    kind: str
    params: dict[str, float]
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    tags: frozenset = frozenset()
    false_tags: frozenset = frozenset()
    growth: Growth | None = None
    logfn: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    d1: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    d2: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    logderiv: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    logconcave_from: float | None = None
    kinks: tuple = ()
    spec: str = ""
    data: Any = field(default=None, repr=False)

    def __call__(self, t):
        arr = np.abs(np.asarray(t, dtype=float))
        with np.errstate(over="ignore", invalid="ignore"):
            out = self.fn(arr)
        out = np.asarray(out, dtype=float)
        if out.shape != arr.shape:
            out = np.broadcast_to(out, arr.shape).copy()
        return float(out) if arr.ndim == 0 else out

    def log(self, t):
        """log of the weight, computed without overflow where possible."""
        arr = np.abs(np.asarray(t, dtype=float))
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            if self.logfn is not None:
                out = np.asarray(self.logfn(arr), dtype=float)
            else:
                out = np.log(np.asarray(self.fn(arr), dtype=float))
        out = np.broadcast_to(out, arr.shape)
        return float(out) if arr.ndim == 0 else np.array(out)

    def deriv(self, t):
        if self.d1 is None:
            raise WeightError(f"{self.label} has no derivative")
        arr = np.abs(np.asarray(t, dtype=float))
        out = np.asarray(self.d1(arr), dtype=float)
        return float(out) if arr.ndim == 0 else out

    def deriv2(self, t):
        if self.d2 is None:
            raise WeightError(f"{self.label} has no second derivative")
        arr = np.abs(np.asarray(t, dtype=float))
        out = np.asarray(self.d2(arr), dtype=float)
        return float(out) if arr.ndim == 0 else out

    def has(self, tag: str) -> bool:
        return tag in self.tags

    @property
    def label(self) -> str:
        return self.spec or self.kind

    @property
    def is_zero(self) -> bool:
        return self.growth is not None and self.growth.cls == "zero"

    def tail_bound(self, mu: float, T: float) -> float:
        """Upper bound for the integral of w(t) exp(-mu t) over [T, inf).

        Uses eventual log-concavity: once w'/w is non-increasing and below mu
        the integrand is dominated by its value times exp(-(mu - w'/w)(t - T)).
        Returns inf when no bound is available at T.
        """
        if self.is_zero:
            return 0.0
        if isinstance(self.data, dict) and "tail" in self.data:
            return float(self.data["tail"](mu, T))
        if self.logderiv is None or self.logconcave_from is None:
            return math.inf
        if T < self.logconcave_from or T <= 0:
            return math.inf
        ld = float(self.logderiv(np.asarray(T, dtype=float)))
        if not (ld < mu):
            return math.inf
        logval = self.log(T) - mu * T
        return math.exp(logval) / (mu - ld) if logval < 700 else math.inf

    def dilate(self, lam: float) -> "Weight":
        """The dilate t -> w(lam t)."""
        return _dilate(self, lam)

    def scale(self, lam: float) -> "Weight":
        """The multiple t -> lam w(t)."""
        return _scale(self, lam)


# ---------------------------------------------------------------- catalog

def _logconcave_start(logderiv: Callable, lo: float = 1e-3, hi: float = 1e12) -> float:
    """First grid point after which logderiv is non-increasing on [lo, hi]."""
    t = np.geomspace(lo, hi, 4000)
    with np.errstate(all="ignore"):
        d = np.asarray(logderiv(t), dtype=float)
    up = np.nonzero(np.diff(d) > 1e-15 * np.abs(d[1:]))[0]
    return float(t[up[-1] + 1]) if up.size else lo


_CONDITION_TAGS_ALL = frozenset({"alpha", "delta", "eps0", "eps_inf", "gamma",
                                 "gamma0", "NA", "zeta"})


def _tags_from_growth(g: Growth) -> tuple[set, set]:
    """Condition facts that follow from the growth class alone."""
    pos, neg = set(), set()
    r = g.rank
    (pos if r < _RANK["exp"] else neg).add("eps0")
    (pos if r <= _RANK["exp"] else neg).add("eps_inf")
    (pos if r >= _RANK["log"] else neg).add("gamma")
    (pos if r >= _RANK["polylog"] else neg).add("gamma0")
    if r < _RANK["power"] or (g.cls == "power" and g.key[0] < 1):
        pos.add("NA")
    else:
        neg.add("NA")
    return pos, neg


def _make(kind, params, fn, growth, extra_pos=(), extra_neg=(), spec="", **kw) -> Weight:
    pos, neg = _tags_from_growth(growth)
    pos |= set(extra_pos)
    neg |= set(extra_neg)
    neg -= pos
    return Weight(kind, dict(params), fn, frozenset(pos), frozenset(neg), growth,
                  spec=spec, **kw)


def zero() -> Weight:
    return _make("zero", {}, lambda t: np.zeros_like(t), Growth("zero"),
                 extra_pos={"alpha", "delta", "concave"},
                 extra_neg={"zeta"}, spec="zero",
                 d1=lambda t: np.zeros_like(t), d2=lambda t: np.zeros_like(t),
                 logderiv=lambda t: np.zeros_like(t), logconcave_from=0.0)


def power(s: float) -> Weight:
    """t**s."""
    if not (s > 0 and math.isfinite(s)):
        raise WeightError("power weight needs s > 0")
    if s == 1:
        return linear()
    pos = {"delta", "zeta"}
    neg = set()
    if s < 1:
        pos |= {"alpha", "concave", "smooth_concave"}
    else:
        neg.add("alpha")
    return _make("power", {"s": s}, lambda t: t ** s, Growth("power", (s,)),
                 pos, neg, spec=f"power:s={s:g}",
                 logfn=lambda t: s * np.log(t),
                 d1=lambda t: s * t ** (s - 1),
                 d2=lambda t: s * (s - 1) * t ** (s - 2),
                 logderiv=lambda t: s / t, logconcave_from=0.0)


def linear() -> Weight:
    return _make("linear", {}, lambda t: t * 1.0, Growth("power", (1.0,)),
                 {"alpha", "delta", "zeta", "concave"}, spec="linear",
                 logfn=np.log, d1=lambda t: np.ones_like(t),
                 d2=lambda t: np.zeros_like(t),
                 logderiv=lambda t: 1.0 / t, logconcave_from=0.0)


def twosqrt() -> Weight:
    """2 sqrt(t)."""
    return _make("twosqrt", {}, lambda t: 2.0 * np.sqrt(t), Growth("power", (0.5,)),
                 {"alpha", "delta", "zeta", "concave", "smooth_concave"}, spec="twosqrt",
                 logfn=lambda t: math.log(2.0) + 0.5 * np.log(t),
                 d1=lambda t: 1.0 / np.sqrt(t),
                 d2=lambda t: -0.5 * t ** -1.5,
                 logderiv=lambda t: 0.5 / t, logconcave_from=0.0)


def log1p() -> Weight:
    """log(1 + t); below the fast-growth threshold, but subadditive and concave."""
    return _make("log1p", {}, np.log1p, Growth("log", (1.0,)),
                 {"alpha", "concave", "smooth_concave"}, {"delta", "zeta"}, spec="log1p",
                 logfn=lambda t: np.log(np.log1p(t)),
                 d1=lambda t: 1.0 / (1.0 + t),
                 d2=lambda t: -1.0 / (1.0 + t) ** 2,
                 logderiv=lambda t: 1.0 / ((1.0 + t) * np.log1p(t)), logconcave_from=0.0)


def exp_weight() -> Weight:
    return _make("exp", {}, np.exp, Growth("exp", (1.0,)),
                 {"delta", "zeta"}, {"alpha"}, spec="exp",
                 logfn=lambda t: t * 1.0, d1=np.exp, d2=np.exp,
                 logderiv=lambda t: np.ones_like(t), logconcave_from=0.0)


def explog(s: float, r: float) -> Weight:
    """exp(t**s * log(1+t)**r) with 0 <= s < 1, r >= 0, s*r > 0."""
    if not (0 <= s < 1 and r >= 0 and s * r > 0):
        raise WeightError("explog weight needs 0 <= s < 1, r >= 0 and s*r > 0")

    def lg(t):
        return t ** s * np.log1p(t) ** r

    def dlg(t):
        L = np.log1p(t)
        return s * t ** (s - 1) * L ** r + r * t ** s * L ** (r - 1) / (1 + t)

    return _make("explog", {"s": s, "r": r}, lambda t: np.exp(lg(t)),
                 Growth("subexp", (s, r)), {"delta", "zeta"}, {"alpha"},
                 spec=f"explog:s={s:g},r={r:g}", logfn=lg,
                 d1=lambda t: np.exp(lg(t)) * dlg(t), logderiv=dlg,
                 logconcave_from=_logconcave_start(dlg))


def expoverlog(s: float) -> Weight:
    """exp(t / log(e+t)**s) with s > 0."""
    if not s > 0:
        raise WeightError("expoverlog weight needs s > 0")

    def lg(t):
        return t / np.log(math.e + t) ** s

    def dlg(t):
        L = np.log(math.e + t)
        return 1.0 / L ** s - s * t / ((math.e + t) * L ** (s + 1))

    return _make("expoverlog", {"s": s}, lambda t: np.exp(lg(t)),
                 Growth("subexp", (1.0, -s)), {"delta", "zeta"}, {"alpha"},
                 spec=f"expoverlog:s={s:g}", logfn=lg,
                 d1=lambda t: np.exp(lg(t)) * dlg(t), logderiv=dlg,
                 logconcave_from=_logconcave_start(dlg))


def custom(fn: Callable[[np.ndarray], np.ndarray], name: str = "custom",
           d1: Callable | None = None) -> Weight:
    """A black-box weight: no symbolic facts, every verdict is numeric."""
    return Weight("custom", {}, fn, d1=d1, spec=name)


def _dilate(w: Weight, lam: float) -> Weight:
    if not lam > 0:
        raise WeightError("dilation factor must be positive")
    if lam == 1:
        return w
    g = w.growth
    return Weight(
        w.kind, {**w.params, "dilate": lam}, lambda t: w.fn(lam * t), w.tags, w.false_tags,
        g if g is None or g.cls != "exp" else Growth("exp", (g.key[0] * lam,), g.exact),
        logfn=None if w.logfn is None else (lambda t: w.logfn(lam * t)),
        d1=None if w.d1 is None else (lambda t: lam * w.d1(lam * t)),
        d2=None if w.d2 is None else (lambda t: lam ** 2 * w.d2(lam * t)),
        logderiv=None if w.logderiv is None else (lambda t: lam * w.logderiv(lam * t)),
        logconcave_from=None if w.logconcave_from is None else w.logconcave_from / lam,
        kinks=tuple(k / lam for k in w.kinks),
        spec=f"{w.label}@dilate={lam:g}", data=w.data)


def _scale(w: Weight, lam: float) -> Weight:
    if not lam > 0:
        raise WeightError("scale factor must be positive")
    if lam == 1:
        return w
    return Weight(
        w.kind, {**w.params, "scale": lam}, lambda t: lam * w.fn(t), w.tags, w.false_tags,
        w.growth if w.growth is None or w.growth.cls not in ("log", "polylog")
        else Growth(w.growth.cls, w.growth.key[:-1] + (w.growth.key[-1] * lam,), w.growth.exact),
        logfn=None if w.logfn is None else (lambda t: math.log(lam) + w.logfn(t)),
        d1=None if w.d1 is None else (lambda t: lam * w.d1(t)),
        d2=None if w.d2 is None else (lambda t: lam * w.d2(t)),
        logderiv=w.logderiv, logconcave_from=w.logconcave_from, kinks=w.kinks,
        spec=f"{w.label}@scale={lam:g}", data=w.data)


def eval_weight(w: Weight, t) -> float | np.ndarray:
    """w(|t|); rejects non-finite input."""
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise WeightError("weight evaluation needs a finite argument")
    return w(arr)


# ------------------------------------------------------------ numeric helpers

def _grid(cfg: GridConfig) -> np.ndarray:
    lo = max(cfg.t_min, 1e-3)
    t = np.concatenate([np.linspace(cfg.t_min, cfg.t_max, cfg.n),
                        np.geomspace(lo, cfg.t_max, cfg.n)])
    return np.unique(t)


def _tail_grid(cfg: GridConfig) -> np.ndarray:
    return np.geomspace(1.0, max(cfg.t_max, 10.0), cfg.n)


def _bounded_above(g: np.ndarray, rtol: float = 1e-9) -> tuple[bool, float]:
    """Heuristic: a sampled sequence is bounded if its tail does not set new highs."""
    g = g[np.isfinite(g)]
    if g.size < 8:
        return False, math.nan
    cut = int(0.8 * g.size)
    head, tail = g[:cut].max(), g[cut:].max()
    ok = tail <= head + rtol * (1.0 + abs(head))
    return bool(ok), float(max(head, tail))


def _increasing_tail(g: np.ndarray) -> bool:
    g = g[np.isfinite(g)]
    if g.size < 8:
        return False
    cut = int(0.8 * g.size)
    return bool(g[-1] > g[cut] + 1e-9 * (1 + abs(g[cut])) and np.all(np.diff(g[cut:]) >= -1e-12 * (1 + np.abs(g[cut + 1:]))))


# ----------------------------------------------------------- conditions

def _delta_search(w: Weight, cfg: GridConfig):
    t = _grid(cfg)
    wt = w(t)
    last = None
    for k in range(1, 11):
        H = 2.0 ** k
        with np.errstate(over="ignore", invalid="ignore"):
            gap = 2.0 * wt - w(H * t)
        mask = np.isfinite(gap)
        ok, top = _bounded_above(gap[mask])
        tmax = float(t[mask].max()) if mask.any() else 0.0
        if ok:
            return {"A": math.exp(max(top, 0.0)), "H": H}, tmax, None
        i = int(np.nanargmax(np.where(mask, gap, -np.inf)))
        last = {"H": H, "t": float(t[i]), "gap": float(gap[i])}
    return None, float(t.max()), last


def _epsilon_integral(w: Weight, mu: float, qcfg: QuadConfig | None = None):
    qcfg = qcfg or QuadConfig(abs_tol=1e-12, rel_tol=1e-12)
    env = Envelope.custom(lambda X, sides: w.tail_bound(mu, X))

    def f(t):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            lv = w.log(t) - mu * t
        return np.where(np.isfinite(lv), np.exp(lv), 0.0)

    return integrate_decaying(f, "ray", env, qcfg, start=0.0, breakpoints=w.kinks)


def _partial_integrals(w: Weight, mu: float, Ts=(8.0, 16.0, 32.0, 64.0)) -> list[float]:
    out = []
    x, wq = gl_rule(32)
    for T in Ts:
        edges = np.linspace(0.0, T, int(T) + 1)
        total = 0.0
        try:
            for a, b in zip(edges[:-1], edges[1:]):
                tt = 0.5 * (a + b) + 0.5 * (b - a) * x
                with np.errstate(all="ignore"):
                    total += 0.5 * (b - a) * float(np.sum(wq * np.exp(w.log(tt) - mu * tt)))
        except ValueError:
            break  # the weight cannot be evaluated this far out; keep the shorter witness
        out.append(total)
    return out


def _exp_rate(w: Weight) -> float | None:
    g = w.growth
    if g is None:
        return None
    if g.rank < _RANK["exp"]:
        return 0.0
    if g.cls == "exp":
        return float(g.key[0])
    return math.inf


def _check_epsilon_mu(w: Weight, mu: float, cfg: GridConfig) -> ConditionVerdict:
    if not mu > 0:
        raise WeightError("epsilon(mu) needs mu > 0")
    rate = _exp_rate(w)
    if rate is not None and rate < mu:
        try:
            res = _epsilon_integral(w, mu)
        except QuadratureError as exc:
            return holds(mu=mu, note=f"integral not evaluated: {exc}")
        return holds(mu=mu, integral=float(res.value), error=float(res.error),
                     truncation=res.radius)
    parts = _partial_integrals(w, mu)
    if rate is not None:
        return fails(evidence_range=64.0, mu=mu, partial_integrals=parts,
                     note="truncated integrals keep growing")
    lv = w.log(_tail_grid(cfg)) - mu * _tail_grid(cfg)
    if _increasing_tail(lv):
        return fails(evidence_range=cfg.t_max, mu=mu, partial_integrals=parts)
    try:
        res = _epsilon_integral(w, mu)
        return supported(cfg.t_max, mu=mu, integral=float(res.value))
    except QuadratureError:
        return supported(cfg.t_max, mu=mu, partial_integrals=parts,
                         note="no tail bound; integrand decreasing on the grid")


def check_condition(w: Weight, cond: str, cfg: GridConfig | None = None,
                    mu: float | None = None) -> ConditionVerdict:
    """Verdict for one growth condition.

    ``cond`` is one of gamma0, delta, epsilon (with ``mu``), epsilon0,
    epsilon_inf, alpha, gamma, NA, zeta.
    """
    cfg = cfg or GridConfig()
    if cond.startswith("epsilon(") and cond.endswith(")"):
        mu = float(cond[len("epsilon("):-1])
        cond = "epsilon"
    if cond not in CONDITIONS:
        raise WeightError(f"unknown condition {cond!r}")
    if cond == "epsilon":
        if mu is None:
            raise WeightError("epsilon needs a value of mu")
        return _check_epsilon_mu(w, float(mu), cfg)
    tag = {"epsilon0": "eps0", "epsilon_inf": "eps_inf"}.get(cond, cond)
    return _CHECKS[cond](w, cfg, tag in w.tags, tag in w.false_tags)


def _chk_delta(w, cfg, known, refuted):
    wit, tmax, last = _delta_search(w, cfg)
    if known:
        return holds(**(wit or {}))
    if wit is not None and not refuted:
        return supported(tmax, **wit)
    return fails(tmax, **(last or {}), note="2w(t) - w(Ht) unbounded for every tested H")


def _chk_eps0(w, cfg, known, refuted):
    if known:
        return holds()
    rate = _exp_rate(w)
    if rate is not None and rate > 0:
        mu = rate / 2 if math.isfinite(rate) else 0.5
        return fails(64.0, mu=mu, partial_integrals=_partial_integrals(w, mu))
    t = _tail_grid(cfg)
    for k in range(0, 7):
        mu = 2.0 ** -k
        if _increasing_tail(w.log(t) - mu * t):
            return fails(cfg.t_max, mu=mu, partial_integrals=_partial_integrals(w, mu))
    return supported(cfg.t_max, smallest_mu=2.0 ** -6)


def _chk_epsinf(w, cfg, known, refuted):
    rate = _exp_rate(w)
    if known:
        mu = rate + 1.0 if rate else 1.0
        v = _check_epsilon_mu(w, mu, cfg)
        return holds(**v.witness)
    t = _tail_grid(cfg)
    for k in range(0, 7):
        mu = 2.0 ** k
        if not _increasing_tail(w.log(t) - mu * t):
            if refuted:
                break
            return supported(cfg.t_max, mu=mu)
    mu = 2.0 ** 6
    return fails(64.0, mu=mu, partial_integrals=_partial_integrals(w, mu))


def _chk_alpha(w, cfg, known, refuted):
    if known:
        return holds()
    pairs = [(1.0, 1.0)]
    g = np.geomspace(1e-2, cfg.t_max / 2, 60)
    pairs += [(a, b) for a in g for b in g if a <= b]
    a = np.array([p[0] for p in pairs])
    b = np.array([p[1] for p in pairs])
    lhs, rhs = w(a + b), w(a) + w(b)
    bad = np.nonzero(lhs > rhs * (1 + 1e-12) + 1e-12)[0]
    if bad.size:
        i = int(bad[0])
        return fails(cfg.t_max, t1=float(a[i]), t2=float(b[i]),
                     lhs=float(lhs[i]), rhs=float(rhs[i]))
    return supported(cfg.t_max)


def _chk_gamma(w, cfg, known, refuted):
    t = _tail_grid(cfg)[1:]
    ratio = w(t) / np.log1p(t)
    if known:
        c = float(np.nanmin(ratio[t >= math.e])) if np.any(t >= math.e) else 1.0
        c = min(c, 1.0)
        a = float(np.nanmin(w(t) - c * np.log1p(t)))
        return holds(c=c, a=min(a, 0.0))
    if refuted or _increasing_tail(-ratio) and ratio[-1] < 1e-3:
        return fails(cfg.t_max, t=float(t[-1]), ratio=float(ratio[-1]))
    return supported(cfg.t_max, c=float(np.nanmin(ratio[-len(ratio) // 5:])))


def _chk_gamma0(w, cfg, known, refuted):
    if known:
        return holds()
    t = _tail_grid(cfg)[1:]
    ratio = w(t) / np.log(t)
    if not refuted and _increasing_tail(ratio):
        return supported(cfg.t_max, ratio_at_end=float(ratio[-1]))
    return fails(cfg.t_max, t=float(t[-1]), ratio=float(ratio[-1]),
                 note="w(t)/log t does not grow on the grid")


def _chk_na(w, cfg, known, refuted):
    if known:
        return holds()
    t = _tail_grid(cfg)
    ratio = w(t) / t
    if not refuted and _increasing_tail(-ratio):
        return supported(cfg.t_max, ratio_at_end=float(ratio[-1]))
    return fails(cfg.t_max, t=float(t[-1]), ratio=float(ratio[-1]),
                 note="w(t)/t does not tend to 0 on the grid")


def _chk_zeta(w, cfg, known, refuted):
    if known:
        return holds()
    t = _tail_grid(cfg)
    diff = w(2 * t) - w(t)
    if not refuted and _increasing_tail(diff):
        return supported(cfg.t_max, lam=2.0, diff_at_end=float(diff[-1]))
    return fails(cfg.t_max, lam=2.0, t=float(t[-1]), diff=float(diff[-1]))


_CHECKS = {"delta": _chk_delta, "epsilon0": _chk_eps0, "epsilon_inf": _chk_epsinf,
           "alpha": _chk_alpha, "gamma": _chk_gamma, "gamma0": _chk_gamma0,
           "NA": _chk_na, "zeta": _chk_zeta}


# ----------------------------------------------------------- comparisons

def _symbolic_subset(gw: Growth | None, gs: Growth | None):
    """(subset, prec) for the relation w < s, i.e. s(t) <= w(lam t) + C.

    Returns None entries when the growth descriptors do not decide.
    """
    if gw is None or gs is None:
        return None, None
    if gs.rank < gw.rank:
        return True, True
    if gs.rank > gw.rank:
        return False, False
    cls = gw.cls
    if cls in ("zero", "bounded"):
        return True, True
    if cls == "exp":
        return True, False
    if cls == "superexp":
        return None, None
    if cls == "log":
        if gs.key[0] < gw.key[0]:
            return True, True
        if gs.key[0] > gw.key[0]:
            return False, False
        return (True, True) if gw.exact and gs.exact else (None, None)
    # polylog, power, subexp: lexicographic key, dilation matters at ties
    if cls == "power":
        ks, kw = gs.key[:1], gw.key[:1]
    else:
        ks, kw = gs.key, gw.key
    if ks < kw:
        return True, True
    if ks > kw:
        return False, False
    if gw.exact and gs.exact:
        return True, False
    return None, None


def _symbolic_star(gw: Growth | None, gs: Growth | None, same: bool):
    if same:
        return True
    if gw is None or gs is None:
        return None
    if gw.rank != gs.rank:
        return False
    if gw.cls in ("zero", "bounded", "log"):
        return True
    if gw.cls in ("polylog", "power"):
        if gw.key[0] != gs.key[0]:
            return False
        return True if gw.exact and gs.exact else None
    return None


def _evaluable_cfg(cfg: GridConfig, *ws: Weight, probe: float = 1.0) -> GridConfig:
    """Shrink t_max until every weight can be evaluated at probe * t_max."""
    for _ in range(20):
        try:
            for w in ws:
                w(np.asarray([probe * cfg.t_max]))
            return cfg
        except ValueError:
            cfg = replace(cfg, t_max=max(cfg.t_max / 2, cfg.t_min + 1e-3, 10.0))
    return cfg


def _numeric_subset(w: Weight, s: Weight, cfg: GridConfig):
    cfg = _evaluable_cfg(cfg, s)
    cfg = _evaluable_cfg(cfg, w, probe=2.0 ** 20)
    t = _tail_grid(cfg)
    st = s(t)
    found = None
    for k in range(0, 21):
        lam = 2.0 ** k
        ok, _ = _bounded_above(st - w(lam * t))
        if ok:
            found = lam
            break
    if found is None:
        return False, False
    for k in range(1, 11):
        ok, _ = _bounded_above(st - w(2.0 ** -k * t))
        if not ok:
            return True, False
    return True, True


def _numeric_star(w: Weight, s: Weight, cfg: GridConfig) -> bool:
    cfg = _evaluable_cfg(cfg, w, s)
    t = _tail_grid(cfg)[cfg.n // 10:]
    a, b = w(t), s(t)
    with np.errstate(all="ignore"):
        r1, r2 = a / b, b / a
    return _bounded_above(r1)[0] and _bounded_above(r2)[0]


def compare_weights(w: Weight, s: Weight, cfg: GridConfig | None = None,
                    detail: bool = False):
    """Relations between two weights, in the reversed order of growth.

    ``subset`` means s(t) <= w(lam t) + C for some lam, ``prec`` for every
    lam, ``equivalent`` means subset both ways and ``star_equivalent`` means
    w = O(s) and s = O(w).  Returns ``{"none"}`` when nothing holds.
    With ``detail=True`` a dict relation -> "symbolic" | "numeric" is returned.
    """
    cfg = cfg or GridConfig()
    same = bool(w.spec) and w.spec == s.spec
    how: dict[str, str] = {}
    sub_ws, prec_ws = _symbolic_subset(w.growth, s.growth)
    if same and sub_ws is None:
        sub_ws = True
    if sub_ws is None or prec_ws is None:
        n_sub, n_prec = _numeric_subset(w, s, cfg)
        if sub_ws is None:
            sub_ws = n_sub
            how_sub = "numeric"
        else:
            how_sub = "symbolic"
        if prec_ws is None:
            prec_ws = n_prec
            how_prec = "numeric"
        else:
            how_prec = "symbolic"
    else:
        how_sub = how_prec = "symbolic"
    sub_sw, _ = _symbolic_subset(s.growth, w.growth)
    how_sw = "symbolic"
    if same and sub_sw is None:
        sub_sw = True
    if sub_sw is None:
        sub_sw, _ = _numeric_subset(s, w, cfg)
        how_sw = "numeric"
    star = _symbolic_star(w.growth, s.growth, same)
    how_star = "symbolic"
    if star is None:
        star = _numeric_star(w, s, cfg)
        how_star = "numeric"
    if sub_ws:
        how["subset"] = how_sub
    if prec_ws:
        how["prec"] = how_prec
    if sub_ws and sub_sw:
        how["equivalent"] = "numeric" if "numeric" in (how_sub, how_sw) else "symbolic"
    if star:
        how["star_equivalent"] = how_star
    if detail:
        return how or {"none": "symbolic"}
    return frozenset(how) if how else frozenset({"none"})


# ----------------------------------------------------------- constructions

class _CumulativeIntegral:
    """Lazily extended table of integrals of w over [0, k], k = 0, 1, 2, ...

    Guarded by a lock so concurrent readers never see a half-built table.
    """

    def __init__(self, w: Weight, qcfg: QuadConfig | None = None):
        self.w = w
        self.qcfg = qcfg or QuadConfig(abs_tol=1e-13, rel_tol=1e-13)
        self.table = [0.0]
        self.lock = threading.Lock()
        self.x, self.wq = gl_rule(30)

    def _panel(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        pts = mid[:, None] + half[:, None] * self.x[None, :]
        return half * (self.w(pts) * self.wq).sum(axis=1)

    def upto(self, k: int) -> np.ndarray:
        with self.lock:
            n = len(self.table)
            if k >= n:
                a = np.arange(n - 1, k, dtype=float)
                vals = []
                for lo in a:
                    if lo == 0.0 or any(lo <= c < lo + 1 for c in self.w.kinks):
                        r = integrate(self.w, lo, lo + 1, self.qcfg,
                                      breakpoints=self.w.kinks)
                        vals.append(float(r.value))
                    else:
                        vals.append(float(self._panel(np.array([lo]), np.array([lo + 1]))[0]))
                self.table.extend(np.cumsum(vals) + self.table[-1])
            return np.asarray(self.table[: k + 1])

    def __call__(self, t: np.ndarray) -> np.ndarray:
        u = np.asarray(t, dtype=float) + 1.0
        k = np.floor(u).astype(int)
        tab = self.upto(int(k.max()) if k.size else 1)
        base = tab[k]
        frac = self._panel(k.astype(float).ravel(), u.ravel()).reshape(u.shape)
        return base + frac


def majorize_with_delta(w: Weight) -> Weight:
    """s(t) = integral of w over [0, t+1]: convex, above w, satisfies (delta)."""
    if w.is_zero:
        out = zero()
        return replace(out, kind="piecewise", spec=f"majorize({w.label})",
                       data={"construction": "majorize", "base": w})
    cum = _CumulativeIntegral(w)
    g = w.growth
    growth = None
    if g is not None and g.cls == "power":
        growth = Growth("power", (g.key[0] + 1.0,))
    elif g is not None and g.cls == "exp":
        growth = g
    pos = {"delta", "convex"} | (w.tags & {"eps0", "eps_inf", "gamma", "gamma0", "zeta"})
    neg = w.false_tags & {"eps0", "eps_inf"}

    def logd(t):
        with np.errstate(all="ignore"):
            return w(t + 1.0) / cum(t)

    return Weight("piecewise", {}, cum, frozenset(pos), frozenset(neg), growth,
                  d1=lambda t: w(t + 1.0), logderiv=logd,
                  logconcave_from=None, kinks=tuple(max(k - 1, 0) for k in w.kinks),
                  spec=f"majorize({w.label})",
                  data={"construction": "majorize", "base": w})


def _last_crossing(f: Callable[[np.ndarray], np.ndarray], start: float,
                   t_cap: float) -> float | None:
    """Smallest t >= start with f >= 0 on [t, t_cap], by log grid + bisection."""
    if f(np.array([t_cap]))[0] < 0:
        return None
    grid = np.geomspace(max(start, 1e-12), t_cap, 2000)
    vals = f(grid)
    neg = np.nonzero(vals < 0)[0]
    if neg.size == 0:
        return float(start)
    i = int(neg[-1])
    lo, hi = float(grid[i]), float(grid[i + 1])
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if f(np.array([mid]))[0] >= 0:
            hi = mid
        else:
            lo = mid
        if hi / lo - 1 < 1e-12:
            break
    return hi


def add_zeta(w: Weight, cfg: GridConfig | None = None, t_cap: float = 1e8,
             n_max: int = 1000) -> Weight:
    """s = w + rho with rho(t) = n log t on [t_n, t_{n+1}).

    The thresholds t_n are the last crossings of w(t) = n log t (at least 1),
    made strictly increasing.  Only thresholds below ``t_cap`` are stored;
    past the last one rho keeps its final multiplier.
    """
    cfg = cfg or GridConfig()
    if "gamma0" in w.false_tags:
        raise WeightError("thresholds do not exist: w(t)/log t stays bounded")
    if "gamma0" not in w.tags:
        v = check_condition(w, "gamma0", cfg)
        if v.fails:
            raise WeightError("thresholds do not exist: w(t)/log t stays bounded")
    thresholds = [0.0]
    for n in range(1, n_max + 1):
        t_n = _last_crossing(lambda t: w(t) - n * np.log(t), 1.0, t_cap)
        if t_n is None:
            break
        t_n = max(t_n, 1.0, thresholds[-1] * (1 + 1e-9) if n > 1 else 1.0)
        if t_n > t_cap:
            break
        thresholds.append(t_n)
    ts = np.asarray(thresholds)

    def rho(t):
        n = np.searchsorted(ts, t, side="right") - 1
        with np.errstate(divide="ignore"):
            return np.where(n > 0, n * np.log(np.maximum(t, 1e-300)), 0.0)

    pos = set(w.tags & (_CONDITION_TAGS_ALL - {"alpha", "NA"})) | {"zeta"}
    if "NA" in w.tags:
        pos.add("NA")
    return Weight("piecewise", {}, lambda t: w(t) + rho(t), frozenset(pos),
                  w.false_tags & {"eps0", "eps_inf"}, w.growth if w.growth and
                  w.growth.rank >= _RANK["power"] else None,
                  logfn=None, logderiv=None, kinks=tuple(ts[1:]),
                  spec=f"zeta({w.label})",
                  data={"construction": "zeta", "base": w, "thresholds": ts,
                        "rho": rho})


def _dominate_threshold(w: Weight, n: int, lower: float) -> float:
    """Smallest a >= lower (up to bisection) with tail bound of w e^{-t/n^2} on [a, inf) <= 2^-n."""
    mu = 1.0 / (n * n)
    target = 2.0 ** -n
    a = max(lower, w.logconcave_from or 0.0, 1.0)
    if w.tail_bound(mu, lower) <= target:
        return lower
    hi = a
    for _ in range(200):
        if w.tail_bound(mu, hi) <= target:
            break
        hi *= 2.0
    else:
        raise WeightError(f"no threshold found for n={n}")
    lo = max(lower, hi / 2.0)
    if w.tail_bound(mu, lo) <= target:
        return lo
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if w.tail_bound(mu, mid) <= target:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-6 * hi:
            break
    return hi


def dominate_all_dilates(w: Weight, n_max: int = 400) -> Weight:
    """s(t) = n w(n t) on [t_n/n, t_{n+1}/(n+1)), dominating every dilate of w.

    Thresholds satisfy the tail condition with respect to exp(-t/n^2) and the
    spacing t_n/n >= t_{n-1}/(n-1) + 1.  The construction is truncated at
    ``n_max``; beyond the last breakpoint the multiplier stays n_max, so
    dilates are dominated for lam < n_max.
    """
    if "eps0" not in w.tags:
        raise WeightError(f"{w.label}: (epsilon)_0 is not certified")
    if w.is_zero:
        out = zero()
        return replace(out, kind="piecewise", spec=f"dominate({w.label})",
                       data={"construction": "dominate", "base": w, "degenerate": True})
    if w.logconcave_from is None:
        raise WeightError(f"{w.label}: no tail bound available for the thresholds")
    t = [0.0, 0.0]  # t_0 unused, t_1 = 0
    for n in range(2, n_max + 2):
        lower = n * (t[n - 1] / (n - 1) + 1.0)
        t.append(_dominate_threshold(w, n, lower))
    ns = np.arange(1, n_max + 2)
    starts = np.asarray([t[n] / n for n in ns])  # start of the n-th piece

    def fn(x):
        idx = np.searchsorted(starts, x, side="right") - 1
        idx = np.clip(idx, 0, n_max - 1)
        n = ns[idx]
        return n * w(n * x)

    N = float(n_max)

    def logfn(x):
        idx = np.clip(np.searchsorted(starts, x, side="right") - 1, 0, n_max - 1)
        n = ns[idx]
        return np.log(n) + w.log(n * x)

    majorant = w.dilate(N)

    def tail(mu, T):
        return N * majorant.tail_bound(mu, T)

    out = Weight("piecewise", {"n_max": n_max}, fn,
                 frozenset({"eps0", "eps_inf"} | (w.tags & {"gamma", "gamma0"})),
                 frozenset(), None, logfn=logfn, logderiv=None,
                 kinks=tuple(starts[1:n_max]), spec=f"dominate({w.label})",
                 data={"construction": "dominate", "base": w, "thresholds": np.asarray(t),
                       "starts": starts, "n_max": n_max, "tail": tail})
    return out


# ----------------------------------------------------------- conjugates

def young_conjugate(w: Weight, s: float) -> float:
    """sup over t >= 0 of w(t) - t s."""
    if not s > 0:
        raise WeightError("young_conjugate needs s > 0")
    k = w.kind
    if w.is_zero:
        return 0.0
    if k == "power" and "dilate" not in w.params and "scale" not in w.params:
        a = w.params["s"]
        if a > 1:
            raise ConjugateDiverges("conjugate diverges")
        return (1 - a) * (a / s) ** (a / (1 - a))
    if k == "linear" and len(w.params) == 0:
        if s < 1:
            raise ConjugateDiverges("conjugate diverges")
        return 0.0
    if k == "twosqrt" and len(w.params) == 0:
        return 1.0 / s
    if k == "log1p" and len(w.params) == 0:
        return 0.0 if s >= 1 else -math.log(s) - 1.0 + s
    if "NA" in w.false_tags and w.growth is not None and w.growth.rank > _RANK["power"]:
        raise ConjugateDiverges("conjugate diverges")
    return _numeric_conjugate(w, s)


def _numeric_conjugate(w: Weight, s: float) -> float:
    t = np.concatenate([[0.0], np.geomspace(1e-8, 1e8, 4001)])
    with np.errstate(all="ignore"):
        obj = w(t) - s * t
    obj = np.where(np.isfinite(obj), obj, -np.inf)
    i = int(np.argmax(obj))
    if i >= t.size - 2 or not np.isfinite(obj[i]):
        raise ConjugateDiverges("conjugate diverges")
    lo, hi = t[max(i - 1, 0)], t[min(i + 1, t.size - 1)]
    res = optimize.minimize_scalar(lambda x: -(w(x) - s * x), bounds=(lo, hi),
                                   method="bounded", options={"xatol": 1e-14 * max(hi, 1)})
    return float(max(obj[i], -res.fun))


def inverse_derivative(w: Weight, s: float) -> float:
    """H(s) with w'(H(s)) = s, for smooth strictly concave weights."""
    if "smooth_concave" not in w.tags or w.d1 is None:
        raise WeightError(f"{w.label}: derivative is not invertible (needs a smooth strictly concave weight)")
    if not s > 0:
        raise WeightError("inverse_derivative needs s > 0")
    k = w.kind
    if k == "twosqrt" and not w.params:
        return 1.0 / (s * s)
    if k == "power" and set(w.params) == {"s"}:
        a = w.params["s"]
        return (a / s) ** (1.0 / (1.0 - a))
    if k == "log1p" and not w.params:
        if s >= 1:
            raise WeightError("log1p: derivative only takes values in (0, 1)")
        return 1.0 / s - 1.0
    f = lambda t: w.deriv(t) - s
    lo, hi = 1e-12, 1.0
    while f(hi) > 0:
        hi *= 2
        if hi > 1e300:
            raise WeightError("derivative does not reach s")
    return float(optimize.brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps))


def inverse_derivative_prime(w: Weight, s: float) -> float:
    """H'(s) = 1 / w''(H(s))."""
    return 1.0 / w.deriv2(inverse_derivative(w, s))


def conjugate_derivative(w: Weight, s: float) -> float:
    """(w*)'(s) = -H(s)."""
    return -inverse_derivative(w, s)


def conjugate_second_derivative(w: Weight, s: float) -> float:
    """(w*)''(s) = -H'(s)."""
    return -inverse_derivative_prime(w, s)


CATALOG: dict[str, Callable[..., Weight]] = {
    "zero": zero, "power": power, "linear": linear, "twosqrt": twosqrt,
    "log1p": log1p, "exp": exp_weight, "explog": explog, "expoverlog": expoverlog,
}


def catalog_samples() -> list[Weight]:
    """A representative list of catalog weights (used by tests and reports)."""
    return [zero(), power(0.5), power(2.0), linear(), twosqrt(), log1p(),
            exp_weight(), explog(0.5, 1.0), expoverlog(1.0)]


def constant(c: float) -> Weight:
    """The constant function c >= 0 (used as a Poisson-transform input)."""
    if not c >= 0:
        raise WeightError("constant weight needs c >= 0")
    if c == 0:
        return zero()
    return _make("constant", {"c": c}, lambda t: np.full_like(t, c, dtype=float),
                 Growth("bounded", (c,)), {"alpha", "delta", "concave"}, {"zeta"},
                 spec=f"const:c={c:g}", logfn=lambda t: np.full_like(t, math.log(c), dtype=float),
                 d1=lambda t: np.zeros_like(t), d2=lambda t: np.zeros_like(t),
                 logderiv=lambda t: np.zeros_like(t), logconcave_from=0.0)


CATALOG["const"] = constant
