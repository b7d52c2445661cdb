"""Atomic functionals, Cauchy-transform representations and contour pairings.

Orientation convention: the boundary of the strip |Im z| < k is traversed
counterclockwise, so the bottom line Im z = -k runs left to right and the
top line runs right to left.  The boundary value of F acts by

    <bv F, phi> = - integral over that boundary of F(z) phi(z) dz.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .config import QuadConfig
from .quad import QuadResult, QuadratureError, gl_rule, graded_breaks, integrate
from .spaces import TestFunction
from .stripharmonic import AnalyticMinorant


class RepError(ValueError):
    pass


# ----------------------------------------------------------------- functionals

@dataclass(frozen=True)
class Atom:
    loc: complex
    order: int
    coef: complex

    def __post_init__(self):
        if self.order < 0 or int(self.order) != self.order:
            raise RepError("atom order must be a non-negative integer")


def _density_gauss(x):
    return np.exp(-np.asarray(x, dtype=float) ** 2)


@dataclass(frozen=True)
class Density:
    """A real-line density with |d(x)| <= scale * exp(-mu |x|)."""
    name: str
    mu: float = 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.name == "gauss_decay":
            return np.exp(-x * x)
        if self.name == "exp_decay":
            return np.exp(-self.mu * np.abs(x))
        raise RepError(f"unknown density {self.name!r}")

    @property
    def l1(self) -> float:
        return math.sqrt(math.pi) if self.name == "gauss_decay" else 2.0 / self.mu

    def radius(self, tol: float) -> float:
        """|x| beyond which the density mass is below tol."""
        if self.name == "gauss_decay":
            return math.sqrt(max(math.log(1.0 / tol), 1.0)) + 1.0
        return math.log(2.0 / (self.mu * tol)) / self.mu + 1.0

    @property
    def spec(self) -> str:
        return "density:gauss_decay" if self.name == "gauss_decay" else f"density:exp_decay({self.mu:g})"


def gauss_decay() -> Density:
    return Density("gauss_decay")


def exp_decay(mu: float) -> Density:
    if not mu > 0:
        raise RepError("exp_decay needs mu > 0")
    return Density("exp_decay", float(mu))


@dataclass(frozen=True)
class Functional:
    """f = sum of coef * (order-th derivative at loc) + density_coef * density."""
    atoms: tuple[Atom, ...] = ()
    density: Density | None = None
    density_coef: complex = 1.0

    @property
    def is_zero(self) -> bool:
        return all(a.coef == 0 for a in self.atoms) and (self.density is None or self.density_coef == 0)

    @property
    def max_abs_imag(self) -> float:
        return max((abs(a.loc.imag) for a in self.atoms), default=0.0)

    @property
    def max_order(self) -> int:
        return max((a.order for a in self.atoms), default=0)

    def real_extent(self) -> tuple[float, float] | None:
        """Smallest interval holding the real parts of the atoms (None if unbounded)."""
        if self.density is not None and self.density_coef != 0:
            return None
        if not self.atoms:
            return (0.0, 0.0)
        xs = [a.loc.real for a in self.atoms]
        return (min(xs), max(xs))

    def pair(self, phi: TestFunction, cfg: QuadConfig | None = None) -> complex:
        """Direct evaluation of <f, phi>."""
        total = [a.coef * phi.deriv(a.loc, a.order) for a in self.atoms]
        if self.density is not None and self.density_coef != 0:
            d = self.density
            R = d.radius(1e-16)
            res = integrate(lambda x: d(x) * phi(x.astype(complex)), -R, R, cfg or QuadConfig(),
                            breakpoints=[0.0], max_width=0.5)
            total.append(self.density_coef * complex(res.value))
        return complex(math.fsum(t.real for t in total) + 1j * math.fsum(t.imag for t in total))

    def scale(self, c: complex) -> "Functional":
        return Functional(tuple(Atom(a.loc, a.order, c * a.coef) for a in self.atoms),
                          self.density, c * self.density_coef)

    def __add__(self, other: "Functional") -> "Functional":
        if self.density is not None and other.density is not None and self.density != other.density:
            raise RepError("only one density per functional is supported")
        dens = self.density or other.density
        dc = (self.density_coef if self.density else 0) + (other.density_coef if other.density else 0)
        return Functional(self.atoms + other.atoms, dens, dc if dens else 1.0)

    def __neg__(self) -> "Functional":
        return self.scale(-1)

    def __sub__(self, other: "Functional") -> "Functional":
        return self + (-other)

    @property
    def spec(self) -> str:
        parts = []
        if self.atoms:
            body = ", ".join(f"({a.loc.real:g}{a.loc.imag:+g}i, {a.order}, {_cfmt(a.coef)})"
                             for a in self.atoms)
            parts.append(f"atoms:[{body}]")
        if self.density is not None:
            parts.append(self.density.spec)
        return " + ".join(parts) or "atoms:[]"


def _cfmt(c: complex) -> str:
    c = complex(c)
    return f"{c.real:g}" if c.imag == 0 else f"{c.real:g}{c.imag:+g}i"


def delta(c: complex = 0.0, order: int = 0, coef: complex = 1.0) -> Functional:
    return Functional((Atom(complex(c), int(order), complex(coef)),))


def split_point_masses(f: Functional, a: float, b: float) -> tuple[Functional, Functional]:
    """f = f_plus - f_minus with f_plus carried by Re >= a and f_minus by Re < b."""
    if a > b:
        raise RepError("split needs a <= b")
    plus = tuple(x for x in f.atoms if x.loc.real >= a)
    minus = tuple(Atom(x.loc, x.order, -x.coef) for x in f.atoms if x.loc.real < a)
    fp = Functional(plus)
    fm = Functional(minus)
    if f.density is not None and f.density_coef != 0:
        mid = 0.5 * (a + b)
        d, c = f.density, f.density_coef
        # densities are split by indicator at the midpoint
        fp = Functional(plus, _Cut(d, mid, True), c)
        fm = Functional(minus, _Cut(d, mid, False), -c)
    return fp, fm


@dataclass(frozen=True)
class _Cut(Density):
    """A density restricted to x >= cut (upper) or x < cut."""
    base: Density = field(default_factory=gauss_decay)
    cut: float = 0.0
    upper: bool = True

    def __init__(self, base: Density, cut: float, upper: bool):
        object.__setattr__(self, "name", base.name)
        object.__setattr__(self, "mu", base.mu)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "cut", cut)
        object.__setattr__(self, "upper", upper)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        keep = x >= self.cut if self.upper else x < self.cut
        return np.where(keep, self.base(x), 0.0)

    @property
    def spec(self) -> str:
        side = ">=" if self.upper else "<"
        return f"{self.base.spec}[x{side}{self.cut:g}]"


# ----------------------------------------------------------------- representations

_CIRCLE_N = 64


@dataclass(eq=False)
class AnalyticRep:
    """F analytic on b < |Im z| < R (atom-only F extends off the atoms)."""
    functional: Functional
    b: float
    R: float
    multiplier: AnalyticMinorant | None = None
    _circles: list = field(default_factory=list, repr=False)
    _dens_rule: tuple | None = field(default=None, repr=False)

    @property
    def atomic(self) -> bool:
        f = self.functional
        return f.density is None or f.density_coef == 0

    def _g_atoms(self, z: np.ndarray) -> np.ndarray:
        """(1/2 pi i) sum_j a_j d^k/dzeta^k [1/((zeta - z) P(zeta))] at c_j."""
        out = np.zeros(z.shape, dtype=complex)
        if self.multiplier is None:
            for a in self.functional.atoms:
                k = a.order
                out += a.coef * (-1) ** k * math.factorial(k) * (a.loc - z) ** (-k - 1)
        else:
            for a, (nodes, invP, r, phase) in zip(self.functional.atoms, self._circles):
                k = a.order
                # trapezoid rule for the Cauchy derivative formula on |zeta - c| = r
                vals = invP[None, :] * phase[None, :] / (nodes[None, :] - z.ravel()[:, None])
                out += (a.coef * math.factorial(k) / r ** k * vals.mean(axis=1)).reshape(z.shape)
        return out / (2j * math.pi)

    def _g_density(self, z: np.ndarray) -> np.ndarray:
        xs, ws = self._dens_rule
        zz = z.ravel()
        vals = (ws[None, :] / (xs[None, :] - zz[:, None])).sum(axis=1)
        return (self.functional.density_coef * vals / (2j * math.pi)).reshape(z.shape)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = self._g_atoms(z)
        if not self.atomic:
            out = out + self._g_density(z)
        if self.multiplier is not None:
            P = self.multiplier
            pz = np.exp(P.log_many(z))
            out = out * pz
        return complex(out) if out.ndim == 0 else out

    def log_bound(self, x, y: float) -> np.ndarray:
        """Upper bound of log |F(x + iy)| for |y| > b."""
        x = np.asarray(x, dtype=float)
        ay = abs(y)
        total = np.zeros(x.shape)
        for i, a in enumerate(self.functional.atoms):
            dist = np.maximum(np.abs(x - a.loc.real), ay - abs(a.loc.imag))
            if self.multiplier is None:
                total += abs(a.coef) * math.factorial(a.order) / dist ** (a.order + 1)
            else:
                r = self._circles[i][2]
                total += abs(a.coef) * math.factorial(a.order) / r ** a.order / np.maximum(dist - r, 1e-300)
        if not self.atomic:
            total += abs(self.functional.density_coef) * self.functional.density.l1 / ay
        with np.errstate(divide="ignore"):
            out = np.log(total / (2 * math.pi))
        if self.multiplier is not None:
            out = out + self.multiplier.log_upper(x)
        return out

    def log_bound_parts(self, y: float):
        """(non-decreasing part, non-increasing part) of log_bound in |x| beyond the atoms."""
        xr = max((abs(a.loc.real) for a in self.functional.atoms), default=0.0)
        P = self.multiplier

        def inc(x):
            return P.log_upper(x) if P is not None else np.zeros(np.shape(x))

        def dec(x):
            x = np.asarray(x, dtype=float)
            base = self.log_bound(x, y)
            return base - inc(x)
        return inc, dec, xr


def _density_rule(d: Density, b: float, tol: float = 1e-15):
    R = d.radius(tol)
    width = min(0.5, max(b, 1e-3))
    brk = np.unique(np.concatenate([np.arange(-R, R + width, width)[:-1], [R, 0.0]]))
    brk = brk[(brk >= -R) & (brk <= R)]
    x, w = gl_rule(24)
    a, c = brk[:-1], brk[1:]
    mid, half = 0.5 * (a + c), 0.5 * (c - a)
    xs = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    ws = (half[:, None] * w[None, :]).ravel()
    return xs, ws * d(xs)


def cauchy_represent(f: Functional, P: AnalyticMinorant | None = None, b: float = 0.25,
                     R: float = 2.0) -> AnalyticRep:
    """F(z) = (P(z) / 2 pi i) <f(zeta), 1 / ((zeta - z) P(zeta))> on b < |Im z| < R."""
    if not (0 < b < R):
        raise RepError("need 0 < b < R")
    for a in f.atoms:
        if not abs(a.loc.imag) < b:
            raise RepError(f"atom at {a.loc} lies on or outside the band |Im z| < {b}")
    rep = AnalyticRep(f, b, R, P)
    if P is not None:
        if R > P.h:
            raise RepError(f"the multiplier is only defined on |Im z| < {P.h}")
        for a in f.atoms:
            r = 0.5 * (b - abs(a.loc.imag))
            th = 2 * np.pi * np.arange(_CIRCLE_N) / _CIRCLE_N
            nodes = a.loc + r * np.exp(1j * th)
            invP = np.array([P.reciprocal(v) for v in nodes])
            phase = np.exp(-1j * a.order * th)
            rep._circles.append((nodes, invP, r, phase))
    if not rep.atomic:
        xs, ws = _density_rule(f.density, b)
        if P is not None:
            ws = ws * np.exp(-P.log_many(xs.astype(complex)))
        rep._dens_rule = (xs, ws.astype(complex))
    return rep


# ----------------------------------------------------------------- tails

def _dyadic(inc: Callable, dec: Callable, X: float, max_terms: int = 400) -> float:
    """Bound for the integral over [X, inf) of exp(inc + dec), inc non-decreasing and
    dec non-increasing there: sum over dyadic blocks [2^j X, 2^{j+1} X]."""
    if X <= 0:
        return math.inf
    total = 0.0
    prev = math.inf
    for j in range(max_terms):
        lo = X * 2.0 ** j
        with np.errstate(over="ignore", invalid="ignore"):
            e = float(inc(np.asarray(2 * lo))) + float(dec(np.asarray(lo)))
        if math.isnan(e) or e > 700:
            return math.inf
        term = lo * math.exp(e)
        total += term
        if j >= 3 and term <= 1e-18 * max(total, 1e-300) and term <= prev:
            return total
        if j > 40 and term >= prev > 0:
            return math.inf
        prev = term
    return math.inf


def _product_tail(rep_inc, rep_dec, phi_env: Callable, X: float) -> float:
    right = _dyadic(rep_inc, lambda u: rep_dec(u) + phi_env(u), X)
    left = _dyadic(rep_inc, lambda u: rep_dec(-u) + phi_env(-u), X)
    return right + left


@dataclass(frozen=True)
class PairResult:
    value: complex
    error: float
    radius: float

    def __complex__(self):
        return complex(self.value)

    def to_dict(self):
        return {"value": [self.value.real, self.value.imag], "error": self.error, "radius": self.radius}


def _pick_radius(tail: Callable[[float], float], cfg: QuadConfig, start: float) -> tuple[float, float]:
    X = max(cfg.initial_radius, start)
    budget = 0.1 * cfg.abs_tol
    for _ in range(cfg.max_doublings):
        t = tail(X)
        if t < budget:
            return X, t
        X *= 2.0
    raise RepError("decay budget violated: |F phi| does not decay fast enough to truncate")


def _line_pieces(x0: float, x1: float, extra: Sequence[float], width: float) -> list[float]:
    brk = list(graded_breaks(x0, x1, width, 0.0 if x0 < 0 < x1 else x0)) + list(extra)
    return sorted({v for v in brk if x0 <= v <= x1})


def boundary_pair(F: AnalyticRep, phi: TestFunction, k: float, cfg: QuadConfig | None = None) -> PairResult:
    """<bv F, phi> = -(integral of F phi over the boundary of |Im z| < k), counterclockwise."""
    cfg = cfg or QuadConfig()
    if not (F.b < k < F.R):
        raise RepError(f"contour height k={k} must satisfy b < k < R ({F.b}, {F.R})")
    if not k < phi.h_max:
        raise RepError(f"contour height k={k} leaves the strip of the test function")
    if F.functional.is_zero or phi.is_zero:
        return PairResult(0j, 0.0, 0.0)
    inc, dec, xr = F.log_bound_parts(k)

    def tail(X):
        return 2 * _product_tail(inc, dec, lambda u: phi.log_env(u, k), X)

    start = max(xr, phi.env_radius) + 1.0
    X, tb = _pick_radius(tail, cfg, start)
    width = min(1.0, max(k - F.b, 0.05))
    atoms_x = [a.loc.real for a in F.functional.atoms]
    brk = _line_pieces(-X, X, atoms_x, width)

    def g(z):
        return F(z) * phi(z)

    bottom = integrate(lambda x: g(x - 1j * k), -X, X, cfg, breakpoints=brk, max_width=width)
    top = integrate(lambda x: g(x + 1j * k), -X, X, cfg, breakpoints=brk, max_width=width)
    value = complex(top.value) - complex(bottom.value)
    err = bottom.error + top.error + tb
    if F.atomic:
        # vertical edges at the truncation radius, traversed counterclockwise
        right = integrate(lambda y: g(X + 1j * y) * 1j, -k, k, cfg, max_width=width)
        left = integrate(lambda y: g(-X + 1j * y) * 1j, -k, k, cfg, max_width=width)
        value -= complex(right.value) - complex(left.value)
        err += right.error + left.error
    else:
        bound = 2 * k * (math.exp(float(inc(X)) + max(float(dec(X)), float(dec(-X))))
                         * math.exp(max(float(phi.log_env(X, k)), float(phi.log_env(-X, k)))))
        err += 2 * bound
    return PairResult(value, err, X)


def direct_pair(f: Functional, phi: TestFunction, cfg: QuadConfig | None = None) -> complex:
    return f.pair(phi, cfg)


def support_pair(F: AnalyticRep, phi: TestFunction, intervals: Sequence[tuple[float, float]],
                 b: float | None = None, cfg: QuadConfig | None = None) -> PairResult:
    """-(sum over J of the counterclockwise integral of F phi around J x [-b, b])."""
    cfg = cfg or QuadConfig()
    b = F.b if b is None else b
    if not F.atomic:
        raise RepError("support pairing needs a representation that extends across the real line")
    for a in F.functional.atoms:
        if not abs(a.loc.imag) < b:
            raise RepError(f"atom at {a.loc} lies outside the band |Im z| < {b}")
    if b >= phi.h_max:
        raise RepError("contour leaves the strip of the test function")
    total, err, radius = 0j, 0.0, 0.0
    width = 0.5
    atoms_x = [a.loc.real for a in F.functional.atoms]
    for (lo, hi) in intervals:
        if not lo < hi:
            raise RepError(f"empty interval ({lo}, {hi})")
        for e in (lo, hi):
            if math.isfinite(e) and any(abs(x - e) < 1e-12 for x in atoms_x):
                raise RepError(f"interval endpoint {e} meets an atom")
        if F.functional.is_zero or phi.is_zero:
            continue
        x0, x1 = lo, hi
        tb = 0.0
        if not (math.isfinite(lo) and math.isfinite(hi)):
            inc, dec, xr = F.log_bound_parts(b)

            def tail(X):
                env = lambda u: phi.log_env(u, b)
                r = _dyadic(inc, lambda u: dec(u) + env(u), X) if not math.isfinite(hi) else 0.0
                l = _dyadic(inc, lambda u: dec(-u) + env(-u), X) if not math.isfinite(lo) else 0.0
                return 2 * (r + l)

            start = max(xr, phi.env_radius, abs(lo) if math.isfinite(lo) else 0,
                        abs(hi) if math.isfinite(hi) else 0) + 1.0
            X, tb = _pick_radius(tail, cfg, start)
            radius = max(radius, X)
            x0 = lo if math.isfinite(lo) else -X
            x1 = hi if math.isfinite(hi) else X

        def g(z):
            return F(z) * phi(z)

        brk = _line_pieces(x0, x1, atoms_x, width)
        bottom = integrate(lambda x: g(x - 1j * b), x0, x1, cfg, breakpoints=brk, max_width=width)
        top = integrate(lambda x: g(x + 1j * b), x0, x1, cfg, breakpoints=brk, max_width=width)
        right = integrate(lambda y: g(x1 + 1j * y) * 1j, -b, b, cfg, max_width=width)
        left = integrate(lambda y: g(x0 + 1j * y) * 1j, -b, b, cfg, max_width=width)
        ccw = complex(bottom.value) + complex(right.value) - complex(top.value) - complex(left.value)
        total -= ccw
        err += bottom.error + top.error + right.error + left.error + tb
    return PairResult(total, err, radius)


def edge_continuation_check(F, P: AnalyticMinorant | None, L: float, z: complex,
                            cfg: QuadConfig | None = None, log_env: Callable | None = None) -> float:
    """|F(z) - (P(z)/2 pi i) * integral over the boundary of |Im| < L of F/((zeta - z) P)|.

    F may be an AnalyticRep or a TestFunction; other callables need ``log_env(x, y)``,
    an upper bound for log |F| that is non-increasing in |x| far out.
    """
    cfg = cfg or QuadConfig()
    z = complex(z)
    if not abs(z.imag) < L:
        raise RepError("z must lie strictly inside the contour")
    if isinstance(F, TestFunction):
        if F.is_zero:
            return 0.0
        env = F.log_env
        radius = F.env_radius
        inc = lambda u: np.zeros(np.shape(u))
    elif isinstance(F, AnalyticRep):
        if F.functional.is_zero:
            return 0.0
        if not F.b < L < F.R:
            raise RepError("contour height must lie in the domain of F")
        inc0, dec0, radius = F.log_bound_parts(L)
        env = lambda u, y: dec0(u)
        inc = inc0
    elif log_env is not None:
        env, radius = log_env, 0.0
        inc = lambda u: np.zeros(np.shape(u))
    else:
        raise RepError("cannot bound the integrand without an envelope")
    if P is not None:
        base_inc = inc
        inc = lambda u: base_inc(u)  # |1/P| <= 1 on the strip
    xz = abs(z.real)

    def dec(u):
        u = np.asarray(u, dtype=float)
        return env(u, L) - np.log(np.maximum(np.abs(u) - xz, 1e-300))

    def tail(X):
        return 2 * (_dyadic(inc, dec, X) + _dyadic(inc, lambda u: dec(-u), X))

    X, tb = _pick_radius(tail, cfg, max(radius, xz) + 1.0)
    width = 0.5
    brk = _line_pieces(-X, X, [z.real], width)

    def kern(zeta):
        val = np.asarray(F(zeta), dtype=complex) / (zeta - z)
        if P is not None:
            val = val * np.array([P.reciprocal(v) for v in np.ravel(zeta)]).reshape(np.shape(zeta))
        return val

    # algebraic decay can push X far out; graded panels keep the count logarithmic
    bottom = integrate(lambda x: kern(x - 1j * L), -X, X, cfg, breakpoints=brk)
    top = integrate(lambda x: kern(x + 1j * L), -X, X, cfg, breakpoints=brk)
    integral = complex(bottom.value) - complex(top.value)
    pref = (P(z) if P is not None else 1.0) / (2j * math.pi)
    rhs = pref * integral
    return abs(complex(F(z)) - rhs)
