"""Weight sequences: quotients, associated and counting functions, conditions.

Sequences are stored through their logarithms so that terms like p! for
p ~ 10^4 never overflow.  Tails beyond the stored prefix come from a closed
set of generator rules, which also carry the symbolic facts used for
condition verdicts and the non-triviality classifier.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .quad import gl_rule
from .verdict import ConditionVerdict, fails, holds, supported
from .weights import Growth, Weight, WeightError, power

SEQ_CONDITIONS = ("logconvex", "M2", "M5", "M5_0", "M5_inf")
LABELS = ("BeurlingAndRoumieu", "RoumieuOnly", "Trivial")
H_GRID = np.geomspace(1e-3, 1e3, 24)


class SequenceError(ValueError):
    pass


@dataclass(frozen=True)
class Generator:
    """Closed-form tail rule.

    ``factorial`` gives M_p = p!^s, ``loglog`` gives
    M_p = log(p+e)^(s (p+e)^r).
    """
    kind: str
    s: float
    r: float = 1.0

    def __post_init__(self):
        if self.kind not in ("factorial", "loglog"):
            raise SequenceError(f"unknown generator {self.kind!r}")
        if not self.s > 0 or not self.r > 0:
            raise SequenceError("generator parameters must be positive")
        if self.kind == "loglog" and self.r < 1:
            raise SequenceError("loglog generator needs r >= 1 for log-convexity")

    def log_M(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.kind == "factorial":
            return self.s * gammaln(p + 1.0)
        u = p + math.e
        return self.s * u ** self.r * np.log(np.log(u))

    def log_m(self, p: np.ndarray) -> np.ndarray:
        """log of the quotient M_p / M_{p-1}, p >= 1, without cancellation."""
        p = np.asarray(p, dtype=float)
        if self.kind == "factorial":
            return self.s * np.log(p)
        # log m_p is the integral of f'(x + e) over [p-1, p] with
        # f(u) = s u^r log log u.
        x, w = gl_rule(20)
        u = (p[..., None] - 0.5 + 0.5 * x) + math.e
        s, r = self.s, self.r
        fp = s * r * u ** (r - 1) * np.log(np.log(u)) + s * u ** (r - 1) / np.log(u)
        return 0.5 * (fp * w).sum(axis=-1)

    @property
    def spec(self) -> str:
        if self.kind == "factorial":
            return f"factorial:s={self.s:g}"
        return f"loglog:s={self.s:g},r={self.r:g}"

    # symbolic asymptotics ------------------------------------------------
    def m5(self) -> tuple[str, float]:
        """('all', 0) for (M.5)_0, ('above', mu0) when the series converges
        exactly for mu > mu0, ('none', inf) when it never converges."""
        if self.kind == "factorial" or self.r > 1:
            return "all", 0.0
        if self.s > 1:
            return "all", 0.0
        if self.s == 1:
            return "above", 1.0
        return "none", math.inf

    def nontrivial_for(self, h: float) -> bool:
        """Whether sup_p (log p)^p / (h^p M_p) is finite (tail analysis)."""
        if self.kind == "factorial" or self.r > 1 or self.s > 1:
            return True
        if self.s == 1:
            return h >= 1.0
        return False

    def growth(self) -> Growth:
        """Growth class of the associated function."""
        if self.kind == "factorial":
            return Growth("power", (1.0 / self.s,))
        if self.r > 1:
            return Growth("polylog", (self.r / (self.r - 1),), exact=False)
        if self.s > 1:
            return Growth("subexp", (1.0 / self.s, 0.0), exact=False)
        if self.s == 1:
            return Growth("exp", (1.0,), exact=False)
        return Growth("superexp", (1.0 / self.s,), exact=False)

    def has_m2(self) -> bool:
        return self.kind == "factorial" or self.r == 1


@dataclass(frozen=True, eq=False)
class WeightSequence:
    """Log-convex positive sequence M_0..M_N with an optional generator tail."""
    log_values: np.ndarray = field(repr=False)
    generator: Generator | None = None
    spec: str = ""

    def __post_init__(self):
        lv = np.asarray(self.log_values, dtype=float)
        if lv.ndim != 1 or lv.size < 2:
            raise SequenceError("need at least M_0 and M_1")
        if not np.all(np.isfinite(lv)):
            raise SequenceError("sequence terms must be positive and finite")
        lv.setflags(write=False)
        object.__setattr__(self, "log_values", lv)
        if self._pure:
            lm = self.generator.log_m(np.arange(1, lv.size))
        else:
            lm = np.diff(lv)
        lm = np.asarray(lm, dtype=float)
        lm.setflags(write=False)
        object.__setattr__(self, "_log_m", lm)

    @property
    def _pure(self) -> bool:
        """True when every term comes from the generator formula."""
        g = self.generator
        return g is not None and self.spec.startswith(g.kind)

    @property
    def N(self) -> int:
        return self.log_values.size - 1

    @property
    def log_quotients(self) -> np.ndarray:
        """log m_p for p = 1..N."""
        return self._log_m

    def quotients(self) -> np.ndarray:
        return np.exp(self._log_m)

    def log_M(self, p) -> np.ndarray:
        p = np.asarray(p)
        out = np.empty(p.shape, dtype=float)
        inside = p <= self.N
        out[inside] = self.log_values[p[inside].astype(int)]
        if np.any(~inside):
            if self.generator is None:
                raise SequenceError("index beyond the stored prefix and no tail rule")
            out[~inside] = self._tail_log_M(p[~inside])
        return out

    def log_m(self, p) -> np.ndarray:
        p = np.asarray(p)
        out = np.empty(p.shape, dtype=float)
        inside = p <= self.N
        out[inside] = self._log_m[p[inside].astype(int) - 1]
        if np.any(~inside):
            if self.generator is None:
                raise SequenceError("index beyond the stored prefix and no tail rule")
            out[~inside] = self.generator.log_m(p[~inside])
        return out

    def _tail_log_M(self, p):
        g = self.generator
        if self._pure:
            return g.log_M(p)
        # explicit prefix continued by the generator's quotients
        base = self.log_values[-1]
        out = []
        for q in np.atleast_1d(p):
            ks = np.arange(self.N + 1, int(q) + 1)
            out.append(base + math.fsum(g.log_m(ks)))
        return np.asarray(out)

    # counting ----------------------------------------------------------
    def _count(self, logt: float, strict: bool = False) -> int:
        side = "left" if strict else "right"
        c = int(np.searchsorted(self._log_m, logt, side=side))
        if c < self.N or self.generator is None:
            return c
        # beyond the prefix: exponential then binary search on the tail rule
        lo, hi = self.N, self.N + 1
        cmp = (lambda v: v < logt) if strict else (lambda v: v <= logt)
        while cmp(float(self.generator.log_m(np.array([hi], float))[0])):
            lo, hi = hi, 2 * hi
            if hi > 1e15:
                raise SequenceError("counting function beyond representable range")
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if cmp(float(self.generator.log_m(np.array([mid], float))[0])):
                lo = mid
            else:
                hi = mid
        return lo


def factorial(s: float = 1.0, N: int = 4096) -> WeightSequence:
    g = Generator("factorial", s)
    return WeightSequence(g.log_M(np.arange(N + 1)), g, g.spec)


def loglog(s: float = 1.0, r: float = 1.0, N: int = 4096) -> WeightSequence:
    g = Generator("loglog", s, r)
    return WeightSequence(g.log_M(np.arange(N + 1)), g, g.spec)


def explicit(values: Sequence[float], tail: Generator | None = None) -> WeightSequence:
    v = np.asarray(values, dtype=float)
    if np.any(v <= 0):
        raise SequenceError("sequence terms must be positive")
    spec = "explicit:[" + ",".join(f"{x:g}" for x in v) + "]"
    if tail is not None:
        spec += f";tail={tail.spec}"
        lm_last = np.log(v[-1] / v[-2]) if v.size > 1 else -np.inf
        if tail.log_m(np.array([float(v.size)]))[0] < lm_last - 1e-12:
            raise SequenceError("tail rule would break log-convexity at the junction")
    return WeightSequence(np.log(v), tail, spec)


# ----------------------------------------------------------- functions

def counting_function(M: WeightSequence, t: float) -> int:
    """m(t) = number of quotients m_p <= t."""
    if t < 0:
        raise SequenceError("t must be non-negative")
    if t == 0:
        return 0
    return M._count(math.log(t))


def associated_function(M: WeightSequence, t, return_index: bool = False):
    """M(t) = sup_p log(t^p M_0 / M_p), evaluated at the maximiser p = m(t).

    With ``return_index`` the smallest maximising index is returned as well.
    """
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0):
        raise SequenceError("t must be non-negative")
    flat = arr.ravel()
    out = np.zeros(flat.shape)
    idx = np.zeros(flat.shape, dtype=int)
    pos = flat > 0
    if np.any(pos):
        logt = np.log(flat[pos])
        c = np.searchsorted(M._log_m, logt, side="right")
        big = c >= M.N
        if np.any(big):
            if M.generator is None:
                raise SequenceError("t beyond the last stored quotient and no tail rule")
            c = c.copy()
            c[big] = [M._count(float(v)) for v in logt[big]]
        best = c * logt - M.log_M(c) + M.log_values[0]
        # the sup sits at c; neighbours are checked against round-off
        for d in (-1, 1):
            cn = np.maximum(c + d, 0)
            best = np.maximum(best, cn * logt - M.log_M(cn) + M.log_values[0])
        out[pos] = np.maximum(best, 0.0)
        strict = np.searchsorted(M._log_m, logt, side="left")
        if np.any(big):
            strict = strict.copy()
            strict[big] = [M._count(float(v), strict=True) for v in logt[big]]
        idx[pos] = strict
    out = out.reshape(arr.shape)
    if arr.ndim == 0:
        out = float(out)
        idx = int(idx[0])
    else:
        idx = idx.reshape(arr.shape)
    return (out, idx) if return_index else out


def associated_via_counting(M: WeightSequence, t) -> float | np.ndarray:
    """The integral of m(lam)/lam over [0, t], as a sum of log(t/m_p)."""
    arr = np.asarray(t, dtype=float)
    flat = arr.ravel()
    out = np.zeros(flat.shape)
    for i, tv in enumerate(flat):
        if tv <= 0:
            continue
        c = counting_function(M, float(tv))
        if c == 0:
            continue
        logt = math.log(tv)
        lm = M.log_m(np.arange(1, c + 1))
        out[i] = math.fsum(logt - lm)
    out = out.reshape(arr.shape)
    return float(out) if arr.ndim == 0 else out


def assoc_weight(M: WeightSequence) -> Weight:
    """The associated function as a Weight with tags from the generator."""
    g = M.generator
    pos, neg = {"zeta", "gamma", "gamma0"}, {"alpha"}
    growth = None
    data: dict = {"sequence": M}
    if g is not None:
        growth = g.growth()
        (pos if g.has_m2() else neg).add("delta")
        kind, _ = g.m5()
        (pos if kind == "all" else neg).add("eps0")
        (pos if kind != "none" else neg).add("eps_inf")
        if growth.rank < 4:
            pos.add("NA")
        elif growth.cls == "power" and growth.key[0] < 1:
            pos.add("NA")
        else:
            neg.add("NA")
        if g.kind == "factorial":
            # p!^s >= (p/e)^(ps) gives M(t) <= s t^(1/s)
            maj = power(1.0 / g.s).scale(g.s) if g.s != 1 else power(1.0)
            data["tail"] = maj.tail_bound
            data["majorant"] = maj
    return Weight("assoc", {}, lambda t: associated_function(M, t), frozenset(pos),
                  frozenset(neg - pos), growth, spec=f"assoc:{M.spec}", data=data)


# ----------------------------------------------------------- conditions

def _m2_gap(M: WeightSequence, n_max: int) -> np.ndarray:
    """G(n) = max over p+q=n of log M_n - log M_p - log M_q."""
    L = M.log_M(np.arange(n_max + 1)) - M.log_values[0]
    G = np.empty(n_max + 1)
    for n in range(n_max + 1):
        p = np.arange(0, n // 2 + 1)
        G[n] = np.max(L[n] - L[p] - L[n - p])
    return G


def _tail_bounded(g: np.ndarray) -> tuple[bool, float]:
    cut = int(0.8 * g.size)
    head, tail = g[:cut].max(), g[cut:].max()
    return bool(tail <= head + 1e-9 * (1 + abs(head))), float(max(head, tail))


def check_seq_condition(M: WeightSequence, cond: str, mu: float | None = None) -> ConditionVerdict:
    """Verdict for logconvex, M2, M5 (with ``mu``), M5_0 or M5_inf."""
    if cond.startswith("M5(") and cond.endswith(")"):
        mu = float(cond[3:-1])
        cond = "M5"
    if cond not in SEQ_CONDITIONS:
        raise SequenceError(f"unknown sequence condition {cond!r}")
    if M.N < 8:
        raise SequenceError("need a prefix of at least 8 terms")
    g = M.generator
    if cond == "logconvex":
        d = np.diff(M.log_quotients)
        bad = np.nonzero(d < -1e-12 * (1 + np.abs(M.log_quotients[1:])))[0]
        if bad.size:
            p = int(bad[0]) + 1
            return fails(M.N, p=p, m_p=float(np.exp(M.log_quotients[p - 1])),
                         m_next=float(np.exp(M.log_quotients[p])))
        if g is not None and M.spec.startswith(g.kind):
            return holds(checked_upto=M.N)
        return supported(M.N)
    if cond == "M2":
        n_max = min(M.N, 2048)
        G = _m2_gap(M, n_max)
        n = np.arange(n_max + 1)
        found = last = None
        for k in range(1, 11):
            H = 2.0 ** k
            ok, top = _tail_bounded(G - n * math.log(H))
            if ok:
                found = {"A": math.exp(max(top, 0.0)), "H": H}
                break
            last = {"H": H, "n": int(n_max), "gap": float(G[-1] - n_max * math.log(H))}
        if g is not None and g.has_m2() and M.spec.startswith(g.kind):
            return holds(**(found or {}))
        if found is not None:
            return supported(n_max, **found)
        return fails(n_max, **last, note="log M_(p+q) - log M_p - log M_q outgrows (p+q) log H")
    # (M.5) family
    if cond == "M5":
        if mu is None or not mu > 0:
            raise SequenceError("M5 needs mu > 0")
        mus = [mu]
    elif cond == "M5_0":
        mus = None
    else:
        mus = None
    sums = _m5_partial_sums(M, cond, mu)
    if g is not None:
        kind, mu0 = g.m5()
        if cond == "M5":
            ok = kind == "all" or (kind == "above" and mu > mu0)
        elif cond == "M5_0":
            ok = kind == "all"
        else:
            ok = kind != "none"
        if ok:
            return holds(**sums)
        return fails(sums.pop("upto"), **sums, note="partial sums keep growing")
    # no tail rule: judge by the prefix
    terms_mu = sums["mu"]
    lm = M.log_quotients
    inc = np.exp(-terms_mu * np.exp(lm))
    if inc[-1] * M.N < 1e-3 * max(inc.sum(), 1e-300):
        return supported(M.N, **sums)
    return fails(M.N, **sums)


def _m5_partial_sums(M: WeightSequence, cond: str, mu: float | None) -> dict:
    if cond == "M5":
        mu_use = mu
    elif cond == "M5_0":
        mu_use = 0.25
    else:
        mu_use = 4.0
    Ns = [10 ** k for k in range(2, 7)] if M.generator is not None else [M.N]
    out = []
    for n in Ns:
        p = np.arange(1, n + 1)
        with np.errstate(over="ignore"):
            out.append(math.fsum(np.exp(-mu_use * np.exp(M.log_m(p)))))
    return {"mu": mu_use, "partial_sums": out, "upto": Ns[-1]}


# ----------------------------------------------------------- classifier

@dataclass(frozen=True, eq=False)
class Classification:
    label: str
    grade: str
    bounded_for: tuple
    prefix_max: tuple

    def __eq__(self, other):
        if isinstance(other, str):
            return self.label == other
        return NotImplemented

    def __hash__(self):
        return hash(self.label)

    def __str__(self):
        return self.label

    def to_dict(self) -> dict:
        return {"status": self.label, "grade": self.grade,
                "h_grid": [float(h) for h in H_GRID],
                "bounded_for": list(self.bounded_for),
                "prefix_max": [float(x) for x in self.prefix_max]}


def _ratio_log(M: WeightSequence, h: float, p: np.ndarray) -> np.ndarray:
    """log((log p)^p / (h^p M_p)) relative to M_0."""
    return p * np.log(np.log(p)) - p * math.log(h) - (M.log_M(p) - M.log_values[0])


def nontriviality_classify(M: WeightSequence, p_max: int = 10_000) -> Classification:
    """Beurling and Roumieu non-triviality from sup_{p>=2} (log p)^p / (h^p M_p).

    Bounded for every h of the grid -> BeurlingAndRoumieu, for some h ->
    RoumieuOnly, for none -> Trivial.  With a generator the tail decides and
    prefix maxima are evidence; without one the grade is numeric.
    """
    g = M.generator
    upto = p_max if g is not None else M.N
    p = np.arange(2, upto + 1, dtype=float)
    maxima, bounded = [], []
    for h in H_GRID:
        r = _ratio_log(M, float(h), p)
        maxima.append(float(r.max()))
        if g is not None:
            bounded.append(g.nontrivial_for(float(h)))
        else:
            bounded.append(_tail_bounded(r)[0])
    if all(bounded):
        label = "BeurlingAndRoumieu"
    elif any(bounded):
        label = "RoumieuOnly"
    else:
        label = "Trivial"
    return Classification(label, "symbolic" if g is not None else "NumericallySupported",
                          tuple(bool(b) for b in bounded), tuple(maxima))


# ----------------------------------------------------------- comparison

def compare_sequences(M: WeightSequence, N: WeightSequence) -> frozenset:
    """Relations M_p < N_p ('subset': M_p <= C h^p N_p for some h, 'prec':
    for all h) and 'equivalent'.  Returns {'none'} when nothing holds."""
    if M.N < 16 or N.N < 16:
        raise SequenceError("need at least 16 prefix terms")
    from .weights import _symbolic_subset

    same = bool(M.spec) and M.spec == N.spec
    gm = M.generator.growth() if M.generator is not None else None
    gn = N.generator.growth() if N.generator is not None else None
    # M_p < N_p  iff  N(t) <= M(lam t) + C for the associated functions
    sub_mn, prec_mn = _symbolic_subset(gm, gn)
    sub_nm, _ = _symbolic_subset(gn, gm)
    if same:
        sub_mn = sub_nm = True
        if prec_mn is None:
            prec_mn = _numeric_seq(M, N)[1]
    if sub_mn is None or prec_mn is None:
        a, b = _numeric_seq(M, N)
        sub_mn = a if sub_mn is None else sub_mn
        prec_mn = b if prec_mn is None else prec_mn
    if sub_nm is None:
        sub_nm = _numeric_seq(N, M)[0]
    rel = set()
    if sub_mn:
        rel.add("subset")
    if prec_mn:
        rel.add("prec")
    if sub_mn and sub_nm:
        rel.add("equivalent")
    return frozenset(rel) if rel else frozenset({"none"})


def _numeric_seq(M: WeightSequence, N: WeightSequence) -> tuple[bool, bool]:
    n = min(M.N, N.N)
    p = np.arange(n + 1)
    D = (M.log_values[: n + 1] - M.log_values[0]) - (N.log_values[: n + 1] - N.log_values[0])
    sub = any(_tail_bounded(D - p * math.log(2.0 ** k))[0] for k in range(0, 21))
    if not sub:
        return False, False
    prec = all(_tail_bounded(D + p * k * math.log(2.0))[0] for k in range(1, 11))
    return True, prec


def catalog_sequences() -> dict[str, WeightSequence]:
    return {
        "factorial:s=0.5": factorial(0.5),
        "factorial:s=1": factorial(1.0),
        "factorial:s=2": factorial(2.0),
        "loglog:s=1,r=2": loglog(1.0, 2.0),
        "loglog:s=1,r=1": loglog(1.0, 1.0),
        "loglog:s=0.5,r=1": loglog(0.5, 1.0),
    }
