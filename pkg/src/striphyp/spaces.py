"""Test functions, weighted strip norms and membership reports."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.polynomial import hermite as _herm
from scipy.optimize import minimize

from .config import GridConfig, QuadConfig
from .stripharmonic import AnalyticMinorant, StripError, build_minorant
from .verdict import ConditionVerdict, fails, holds, supported
from .weights import Weight, WeightError, check_condition, dominate_all_dilates

LATTICE = (0.25, 0.5, 1.0, 2.0, 4.0)
DIVERGENCE = 1e12
EDGE_SHRINK = 1e-6


class SpaceError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class TestFunction:
    """An analytic function on a horizontal strip |Im z| < h_max.

    ``log_env(x, k)`` bounds log sup_{|y| <= k} |phi(x + iy)| and is
    non-increasing in |x| once |x| >= ``env_radius``.
    """
    kind: str
    params: dict = field(default_factory=dict)
    parts: tuple = ()
    minorant: AnalyticMinorant | None = None
    degenerate: bool = False

    __test__ = False  # keep pytest from collecting this class

    # --- structure ---------------------------------------------------------
    @property
    def h_max(self) -> float:
        if self.kind == "recip":
            return self.minorant.h
        if self.kind in ("product", "scaled"):
            return min(p.h_max for p in self.parts)
        return math.inf

    @property
    def is_zero(self) -> bool:
        if self.kind == "zero":
            return True
        if self.kind == "scaled":
            return self.params["c"] == 0 or self.parts[0].is_zero
        if self.kind == "product":
            return any(p.is_zero for p in self.parts)
        return False

    @property
    def env_radius(self) -> float:
        if self.kind == "gaussian":
            return abs(self.params["shift"].real)
        if self.kind in ("product", "scaled"):
            return max(p.env_radius for p in self.parts)
        return 0.0

    @property
    def spec(self) -> str:
        k = self.kind
        if k == "zero":
            return "zero"
        if k == "const":
            return f"const:c={self.params['c']!r}"
        if k == "gaussian":
            s = self.params["shift"]
            return f"gaussian:a={self.params['a']:g},shift={s.real:g}{s.imag:+g}i"
        if k == "recip":
            src = self.params.get("source")
            return f"recip:{src or self.minorant.weight.spec}"
        if k == "product":
            return "product:" + ";".join(p.spec for p in self.parts)
        return f"scaled:c={self.params['c']!r};{self.parts[0].spec}"

    def _check(self, z):
        if self.kind == "recip" or self.kind in ("product", "scaled"):
            if np.any(np.abs(np.imag(z)) >= self.h_max):
                raise SpaceError(f"{self.spec} is not defined at Im z = {np.max(np.abs(np.imag(z)))}"
                                 f" (strip half-width {self.h_max})")

    # --- evaluation --------------------------------------------------------
    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        self._check(z)
        k = self.kind
        if k == "zero":
            out = np.zeros_like(z)
        elif k == "const":
            out = np.full_like(z, self.params["c"])
        elif k == "gaussian":
            u = z - self.params["shift"]
            out = np.exp(-self.params["a"] * u * u)
        elif k == "recip":
            F = self.minorant
            out = np.exp(-F.log_many(z))
        elif k == "product":
            out = np.asarray(self.parts[0](z)) * np.asarray(self.parts[1](z))
        else:
            out = self.params["c"] * np.asarray(self.parts[0](z))
        return complex(out) if out.ndim == 0 else out

    def log(self, z):
        """A holomorphic logarithm of phi (real part = log |phi|)."""
        z = np.asarray(z, dtype=complex)
        self._check(z)
        k = self.kind
        if k == "zero":
            out = np.full(z.shape, -np.inf, dtype=complex)
        elif k == "const":
            c = self.params["c"]
            out = np.full(z.shape, np.log(c) if c != 0 else -np.inf, dtype=complex)
        elif k == "gaussian":
            u = z - self.params["shift"]
            out = -self.params["a"] * u * u
        elif k == "recip":
            F = self.minorant
            out = -F.log_many(z)
        elif k == "product":
            out = self.parts[0].log(z) + self.parts[1].log(z)
        else:
            c = self.params["c"]
            out = (np.log(c) if c != 0 else -np.inf) + np.asarray(self.parts[0].log(z))
        return complex(out) if out.ndim == 0 else out

    def log_abs(self, z):
        """log |phi(z)|, computed without forming |phi| (no underflow)."""
        z = np.asarray(z, dtype=complex)
        self._check(z)
        k = self.kind
        if k == "zero":
            out = np.full(z.shape, -np.inf)
        elif k == "const":
            c = abs(self.params["c"])
            out = np.full(z.shape, math.log(c) if c > 0 else -np.inf)
        elif k == "gaussian":
            u = z - self.params["shift"]
            out = -np.real(self.params["a"] * u * u)
        elif k == "recip":
            F = self.minorant
            out = -F.log_many(z, real_only=True)
        elif k == "product":
            out = self.parts[0].log_abs(z) + self.parts[1].log_abs(z)
        else:
            c = abs(self.params["c"])
            out = (math.log(c) if c > 0 else -np.inf) + np.asarray(self.parts[0].log_abs(z))
        return float(out) if out.ndim == 0 else out

    def log_env(self, x, k: float):
        x = np.abs(np.asarray(x, dtype=float)) if self.kind == "recip" else np.asarray(x, dtype=float)
        kind = self.kind
        if kind == "zero":
            return np.full(x.shape, -np.inf)
        if kind == "const":
            c = abs(self.params["c"])
            return np.full(x.shape, math.log(c) if c else -np.inf)
        if kind == "gaussian":
            a, s = self.params["a"], self.params["shift"]
            return -a * (x - s.real) ** 2 + a * (k + abs(s.imag)) ** 2
        if kind == "recip":
            if k >= self.h_max:
                raise SpaceError("envelope requested outside the strip")
            return -self.minorant.log_lower(x)
        if kind == "product":
            return self.parts[0].log_env(x, k) + self.parts[1].log_env(x, k)
        c = abs(self.params["c"])
        return (math.log(c) if c else -np.inf) + self.parts[0].log_env(x, k)

    def deriv(self, z: complex, order: int) -> complex:
        """order-th complex derivative at z."""
        if order < 0:
            raise SpaceError("derivative order must be non-negative")
        if order == 0:
            return complex(self(z))
        z = complex(z)
        k = self.kind
        if k in ("zero", "const"):
            return 0j
        if k == "gaussian":
            a, s = self.params["a"], self.params["shift"]
            ra = math.sqrt(a)
            u = z - s
            coef = np.zeros(order + 1)
            coef[order] = 1.0
            return complex((-ra) ** order * _herm.hermval(ra * u, coef) * cmath.exp(-a * u * u))
        if k == "scaled":
            return self.params["c"] * self.parts[0].deriv(z, order)
        if k == "product":
            f, g = self.parts
            return sum(math.comb(order, j) * f.deriv(z, j) * g.deriv(z, order - j)
                       for j in range(order + 1))
        # recip: Cauchy integral on a small circle, trapezoid rule (spectral)
        r = min(0.5, 0.5 * (self.h_max - abs(z.imag)))
        n = 48
        th = 2 * np.pi * np.arange(n) / n
        vals = self(z + r * np.exp(1j * th))
        return complex(math.factorial(order) / r ** order * np.mean(vals * np.exp(-1j * order * th)))

    def scale(self, c: complex) -> "TestFunction":
        return TestFunction("scaled", {"c": complex(c)}, (self,))


# --- constructors --------------------------------------------------------------

def zero_function() -> TestFunction:
    return TestFunction("zero")


def const_function(c: complex = 1.0, degenerate: bool = False) -> TestFunction:
    return TestFunction("const", {"c": complex(c)}, degenerate=degenerate)


def gaussian(a: float = 1.0, shift: complex = 0j) -> TestFunction:
    if not (a > 0 and math.isfinite(a)):
        raise SpaceError("gaussian needs a > 0")
    return TestFunction("gaussian", {"a": float(a), "shift": complex(shift)})


def reciprocal(F: AnalyticMinorant, source: str | None = None) -> TestFunction:
    return TestFunction("recip", {"source": source} if source else {}, (), F)


def product(f: TestFunction, g: TestFunction) -> TestFunction:
    return TestFunction("product", {}, (f, g))


# --- norms ----------------------------------------------------------------------

@dataclass(frozen=True)
class SpaceParams:
    weight: Weight
    h: float
    lam: float = 1.0
    flavor: str = "Beurling"
    scaling_mode: str = "dilate"

    def __post_init__(self):
        if not (self.h > 0 and self.lam > 0):
            raise SpaceError("h and lambda must be positive")
        if self.flavor not in ("Beurling", "Roumieu"):
            raise SpaceError(f"unknown flavor {self.flavor!r}")
        if self.scaling_mode not in ("dilate", "subadditive"):
            raise SpaceError(f"unknown scaling mode {self.scaling_mode!r}")

    def log_weight(self, x):
        x = np.asarray(x, dtype=float)
        if self.scaling_mode == "dilate":
            return self.weight(self.lam * x)
        return self.lam * self.weight(x)


@dataclass(frozen=True)
class NormResult:
    value: float
    log_value: float
    argmax: complex | None
    boundary_limited: bool
    divergent: bool
    x_range: float

    def to_dict(self) -> dict[str, Any]:
        return {"value": self.value, "log_value": self.log_value,
                "argmax": None if self.argmax is None else [self.argmax.real, self.argmax.imag],
                "boundary_limited": self.boundary_limited, "divergent": self.divergent,
                "x_range": self.x_range}

    def __float__(self) -> float:
        return self.value


def _log_objective(phi: TestFunction, p: SpaceParams, x, y):
    with np.errstate(over="ignore", invalid="ignore"):
        return phi.log_abs(np.asarray(x) + 1j * np.asarray(y)) + p.log_weight(x)


def strip_norm(phi: TestFunction, p: SpaceParams, cfg: GridConfig | None = None,
               ny: int = 21) -> NormResult:
    """Grid sup of |phi(z)| e^{w(x)} over the closed sub-strip |y| <= h(1 - 1e-6).

    The x range starts at cfg.t_max and is doubled while the maximiser sits
    on its edge; a sup above 1e12 that keeps growing over two doublings is
    reported as divergent.
    """
    cfg = cfg or GridConfig()
    if phi.h_max < p.h:
        raise SpaceError(f"{phi.spec} is analytic only on |Im z| < {phi.h_max}, not on T^{p.h}")
    if phi.is_zero:
        return NormResult(0.0, -math.inf, None, False, False, 0.0)
    ycap = p.h * (1 - EDGE_SHRINK)
    ys = np.linspace(-ycap, ycap, ny)
    X = float(cfg.t_max)
    history: list[float] = []
    best = (-math.inf, 0.0, 0.0)
    for _ in range(cfg.max_doublings + 1):
        xs = np.linspace(-X, X, 2 * cfg.n + 1)
        XX, YY = np.meshgrid(xs, ys, indexing="ij")
        vals = _log_objective(phi, p, XX, YY)
        vals = np.where(np.isnan(vals), -np.inf, vals)
        if np.any(np.isposinf(vals)):
            k = int(np.argmax(np.isposinf(vals).ravel()))
            i, j = np.unravel_index(k, vals.shape)
            return NormResult(math.inf, math.inf, complex(xs[i], ys[j]), False, True, X)
        i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
        best = (float(vals[i, j]), float(xs[i]), float(ys[j]))
        history.append(best[0])
        at_edge = i in (0, len(xs) - 1)
        if not at_edge:
            break
        if len(history) >= 3 and best[0] > math.log(DIVERGENCE) and history[-1] > history[-2] > history[-3]:
            return NormResult(math.inf, math.inf, complex(best[1], best[2]), False, True, X)
        X *= 2
    else:
        return NormResult(math.inf, math.inf, complex(best[1], best[2]), False, True, X)

    # local refinement around the grid argmax
    dx = 2 * X / (2 * cfg.n)
    dy = 2 * ycap / (ny - 1)
    x0, y0 = best[1], best[2]

    def neg(v):
        return -float(_log_objective(phi, p, v[0], v[1]))

    bounds = [(x0 - dx, x0 + dx), (max(-ycap, y0 - dy), min(ycap, y0 + dy))]
    try:
        res = minimize(neg, np.array([x0, y0]), method="L-BFGS-B", bounds=bounds)
        if np.isfinite(res.fun) and -res.fun > best[0]:
            best = (float(-res.fun), float(res.x[0]), float(res.x[1]))
    except (ValueError, StripError):
        pass
    # scan kinks of the weight as well (the sup may sit on a corner)
    logv = best[0]
    boundary = abs(abs(best[2]) - ycap) < 1e-9 * max(1.0, p.h)
    value = math.exp(logv) if logv < 709 else math.inf
    if value > DIVERGENCE and len(history) > 2:
        return NormResult(math.inf, math.inf, complex(best[1], best[2]), boundary, True, X)
    return NormResult(value, logv, complex(best[1], best[2]), boundary, False, X)


@dataclass(frozen=True)
class MembershipReport:
    flavor: str
    scaling_mode: str
    member: bool
    verdict: ConditionVerdict
    norms: dict

    def to_dict(self) -> dict[str, Any]:
        return {"flavor": self.flavor, "scaling_mode": self.scaling_mode, "member": self.member,
                "verdict": self.verdict.to_dict(),
                "norms": {f"h={h:g},lambda={l:g}": v for (h, l), v in self.norms.items()}}


def membership_report(phi: TestFunction, w: Weight, flavor: str = "Beurling",
                      scaling_mode: str = "dilate", cfg: GridConfig | None = None,
                      lattice: tuple = LATTICE) -> MembershipReport:
    cfg = cfg or GridConfig(t_max=50.0, n=500)
    norms: dict[tuple[float, float], float] = {}
    for h in lattice:
        for lam in lattice:
            if phi.h_max < h:
                norms[(h, lam)] = math.inf
                continue
            res = strip_norm(phi, SpaceParams(w, h, lam, flavor, scaling_mode), cfg)
            norms[(h, lam)] = res.value
    finite = {k: v for k, v in norms.items() if math.isfinite(v)}
    divergent = [k for k, v in norms.items() if not math.isfinite(v)]
    rng = (min(lattice), max(lattice))
    if flavor == "Beurling":
        member = not divergent
    else:
        member = bool(finite)
    if member:
        v = supported(f"h, lambda in {list(lattice)}", tested=len(norms), finite=len(finite))
    else:
        pref = (1.0, 1.0) if (1.0, 1.0) in divergent else (divergent[0] if divergent else None)
        w_h, w_l = pref if pref else (None, None)
        v = fails(rng, "sup norm diverges" if pref else "no finite norm", h=w_h, **{"lambda": w_l})
    return MembershipReport(flavor, scaling_mode, member, v, norms)


def make_test_function(w_dom: Weight, h: float, cfg: QuadConfig | None = None,
                       n_max: int = 400) -> TestFunction:
    """1/F for the minorant F of the weight that dominates every dilate of w_dom."""
    if w_dom.is_zero:
        return const_function(1.0, degenerate=True)
    v = check_condition(w_dom, "epsilon0")
    if not v.positive:
        raise SpaceError(f"{w_dom.label} is not certified (epsilon)_0")
    sigma = dominate_all_dilates(w_dom, n_max=n_max)
    try:
        F = build_minorant(sigma, 1.0, h, "dilate", cfg)
    except StripError as exc:
        raise SpaceError(str(exc)) from exc
    return reciprocal(F, w_dom.spec)
