"""Poisson kernel of a strip, Poisson transforms, zero-free analytic minorants.

The kernel of the strip 0 < Im z < pi is P(x, y) = sin y / (cosh x - cos y).
Everything here evaluates it through q = exp(-|x|), which avoids overflow
of cosh for large |x|.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .config import QuadConfig
from .quad import Envelope, QuadratureError, gl_rule, integrate_decaying
from .weights import Weight, WeightError, _epsilon_integral, check_condition

_COSH1M1 = math.cosh(1.0) - 1.0
_KERNEL_C = math.e / _COSH1M1  # envelope constant of P for |x| >= 1
_DERIV_C = 50.0                # crude envelope constant for dP/dx, dP/dy, B, Q
_BATCH_MIN = 8                 # rows shorter than this use the scalar path
_BATCH_CHUNK = 64


class StripError(ValueError):
    pass


# ----------------------------------------------------------------- kernels

def _q_form(X, Y):
    """q = e^{-|X|}, m = 1 - q, s2 = sin^2(Y/2) and D = 1 - 2q cos Y + q^2 = m^2 + 4q s2.

    Writing D through m and s2 avoids the cancellation near X = Y = 0.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    q = np.exp(-np.abs(X))
    m = -np.expm1(-np.abs(X))
    s2 = np.sin(0.5 * Y) ** 2
    D = m * m + 4.0 * q * s2
    return X, Y, q, m, s2, D


def _P(X, Y):
    X, Y, q, m, s2, D = _q_form(X, Y)
    return 2.0 * np.sin(Y) * q / D


def _P_x(X, Y):
    X, Y, q, m, s2, D = _q_form(X, Y)
    return -2.0 * np.sign(X) * np.sin(Y) * q * m * (1.0 + q) / (D * D)


def _P_y(X, Y):
    X, Y, q, m, s2, D = _q_form(X, Y)
    # cos Y (1 + q^2) - 2q = m^2 - 2 (1 + q^2) s2
    return 2.0 * q * (m * m - 2.0 * (1.0 + q * q) * s2) / (D * D)


def _B(X, Y):
    """d/dY of the X-antiderivative 2 arctan((e^X - cos Y)/sin Y) of P."""
    X, Y, q, m, s2, D = _q_form(X, Y)
    pos = X > 0
    # X > 0: 2q(q - cos Y)/D ; X <= 0 (q = e^X): 2(1 - q cos Y)/D
    return np.where(pos, 2.0 * q * (2.0 * s2 - m) / D, 2.0 * (m + 2.0 * q * s2) / D)


def _Q(X, Y):
    """sinh X / (cosh X - cos Y), the harmonic conjugate partner of P."""
    X, Y, q, m, s2, D = _q_form(X, Y)
    return np.sign(X) * m * (1.0 + q) / D


def poisson_kernel(x, y, h: float):
    """P_h(x, y) = P(pi x / h, pi y / h); requires 0 < y < 2h."""
    if not h > 0:
        raise StripError("strip half-width must be positive")
    ya = np.asarray(y, dtype=float)
    if np.any(ya <= 0) or np.any(ya >= 2 * h):
        raise StripError("poisson_kernel needs 0 < y < 2h")
    out = _P(np.pi * np.asarray(x, dtype=float) / h, np.pi * ya / h)
    return float(out) if out.ndim == 0 else out


# ----------------------------------------------------------------- transforms

def _tail_fn(g: Weight, lo: float, hi: float, H: float, K: float) -> Callable[[float, int], float]:
    """Tail bound, beyond distance X from the centre of [lo, hi], of the integral of
    kernel * g when |kernel(t)| <= K exp(-pi dist(t, [lo, hi]) / H)."""
    mu = math.pi / H
    c = 0.5 * (lo + hi)
    r = 0.5 * (hi - lo)

    def tail(X, sides=2):
        if X - r < H / math.pi or X < abs(c):
            return math.inf
        right = g.tail_bound(mu, c + X)
        left = g.tail_bound(mu, X - c)
        if not (math.isfinite(right) and math.isfinite(left)):
            return math.inf
        total = 0.0
        for shift, tb in ((mu * hi, right), (-mu * lo, left)):
            if tb > 0:
                e = shift + math.log(tb)
                if e > 700:
                    return math.inf
                total += math.exp(e)
        return K * total

    return tail


def _line_integral(kernel: Callable[[np.ndarray], np.ndarray], g: Weight, lo: float,
                   hi: float, H: float, K: float, cfg: QuadConfig,
                   extra_breaks: Iterable[float] = ()) -> float:
    """Integral over the line of kernel(t) g(t), where |kernel(t)| is at most
    K exp(-pi dist(t, [lo, hi]) / H) once that distance exceeds H / pi."""
    env = Envelope.custom(_tail_fn(g, lo, hi, H, K), center=0.5 * (lo + hi))
    breaks = [0.0, lo, hi, *extra_breaks]
    breaks += [k for k in g.kinks] + [-k for k in g.kinks]

    def f(t):
        return kernel(t) * g(t)

    res = integrate_decaying(f, "line", env, cfg, breakpoints=breaks,
                             panel_width=max(min(H / 4.0, cfg.initial_radius / 8.0), 1e-3))
    return float(res.value)


def _spike_breaks(center: float, width: float) -> list[float]:
    """Geometric breakpoints around a kernel spike of the given width, out to distance 1."""
    out = []
    d = width
    for _ in range(64):
        out += [center - d, center + d]
        if d > max(1.0, 128 * width):
            break
        d *= 2.0
    return out


def _as_weight(f) -> Weight:
    if isinstance(f, Weight):
        return f
    raise StripError("poisson_transform needs a Weight (or a Weight majorant for "
                     "sampled data) so that truncation can be certified")


def poisson_transform(f, x: float, y: float, h: float, cfg: QuadConfig | None = None) -> float:
    """P_h{f; x, y} = (1/2h) * integral of P_h(t - x, y) f(t) dt, 0 < y < 2h."""
    cfg = cfg or QuadConfig()
    g = _as_weight(f)
    if not h > 0:
        raise StripError("strip half-width must be positive")
    if not 0 < y < 2 * h:
        raise StripError("poisson_transform needs 0 < y < 2h")
    if g.is_zero:
        return 0.0
    x = abs(float(x))  # the weight is even and the kernel is even in x
    Y = math.pi * y / h
    K = _KERNEL_C * abs(math.sin(Y))

    def kern(t):
        return _P(np.pi * (t - x) / h, Y)

    try:
        val = _line_integral(kern, g, x, x, h, K, cfg, _spike_breaks(x, y))
    except QuadratureError as exc:
        raise StripError(f"convergence not certifiable for {g.label}: {exc}") from exc
    return val / (2.0 * h)


def poisson_transform_grad(f, x: float, y: float, h: float,
                           cfg: QuadConfig | None = None) -> tuple[float, float]:
    """(d/dx, d/dy) of P_h{f; x, y} via the differentiated kernel."""
    cfg = cfg or QuadConfig()
    g = _as_weight(f)
    if g.is_zero:
        return 0.0, 0.0
    Y = math.pi * y / h
    s = np.pi / h

    def kx(t):
        return -s * _P_x(s * (t - x), Y)

    def ky(t):
        return s * _P_y(s * (t - x), Y)

    br = _spike_breaks(x, y)
    try:
        dx = _line_integral(kx, g, x, x, h, _DERIV_C * s, cfg, br)
        dy = _line_integral(ky, g, x, x, h, _DERIV_C * s, cfg, br)
    except QuadratureError as exc:
        raise StripError(f"convergence not certifiable for {g.label}: {exc}") from exc
    return dx / (2.0 * h), dy / (2.0 * h)


def lemma_constant(w: Weight, h: float, subadditive: bool = False) -> float:
    """Additive constant of the upper Poisson-transform bound.

    General case: e / (2h (cosh 1 - 1)) * integral of exp(-pi t / (2h)) w(t).
    Subadditive case: e / (h (cosh 1 - 1)) * integral of exp(-pi t / h) w(t).
    """
    if w.is_zero:
        return 0.0
    if subadditive:
        integral = float(_epsilon_integral(w, math.pi / h).value)
        return math.e / (h * _COSH1M1) * integral
    integral = float(_epsilon_integral(w, math.pi / (2 * h)).value)
    return math.e / (2 * h * _COSH1M1) * integral


def lemma_bounds(w: Weight, x, y, h: float, subadditive: bool = False,
                 C: float | None = None):
    """Lower and upper bounds for P_h{w; x, y} on the half-strip 0 < y < h."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    fac = 1.0 - y / h
    lower = 0.5 * w(x) * fac
    if C is None:
        C = lemma_constant(w, h, subadditive)
    if subadditive:
        upper = (w(x) + w(h / math.pi)) * fac + C
    else:
        upper = (w(2 * x) + w(2 * h / math.pi)) * fac + C
    return lower, upper, C


# ----------------------------------------------------------------- minorant

@dataclass(frozen=True, eq=False)
class AnalyticMinorant:
    """F = exp(U + iV) on the strip |Im z| < h.

    dilate mode:      U = 4 P_{4h}{w(lam .); x, y + h},  e^{w(lam x)} <= |F| <= C e^{4 w(2 lam x)}
    subadditive mode: U = 4 lam P_{4h}{w; x, y + h},     e^{lam w(x)} <= |F| <= C e^{4 lam w(x)}
    """
    weight: Weight
    lam: float
    h: float
    mode: str
    log_bound_constant: float
    base: complex = 0j
    cfg: QuadConfig = field(default_factory=QuadConfig)

    @property
    def bound_constant(self) -> float:
        return math.exp(self.log_bound_constant) if self.log_bound_constant < 709 else math.inf

    @property
    def _g(self) -> Weight:
        return self.weight.dilate(self.lam) if self.mode == "dilate" else self.weight

    @property
    def _amp(self) -> float:
        return 4.0 if self.mode == "dilate" else 4.0 * self.lam

    def _check(self, x: float, y: float):
        if not abs(y) < self.h:
            raise StripError(f"point {complex(x, y)} lies outside the strip |Im z| < {self.h}")

    def U(self, x: float, y: float) -> float:
        self._check(x, y)
        if self.weight.is_zero:
            return 0.0
        return self._amp * poisson_transform(self._g, x, y + self.h, 4 * self.h, self.cfg)

    def grad_U(self, x: float, y: float) -> tuple[float, float]:
        self._check(x, y)
        dx, dy = poisson_transform_grad(self._g, x, y + self.h, 4 * self.h, self.cfg)
        return self._amp * dx, self._amp * dy

    def log_lower(self, x):
        w = self.weight
        return w(self.lam * np.asarray(x, float)) if self.mode == "dilate" \
            else self.lam * w(np.asarray(x, float))

    def log_upper(self, x):
        w = self.weight
        x = np.asarray(x, float)
        core = 4.0 * w(2 * self.lam * x) if self.mode == "dilate" else 4.0 * self.lam * w(x)
        return self.log_bound_constant + core

    # --- harmonic conjugate -------------------------------------------------
    def _horizontal(self, y: float, x0: float, x1: float) -> float:
        """Integral of -U_y along the segment from x0 + iy to x1 + iy."""
        H = 4 * self.h
        s = math.pi / H
        Y = s * (y + self.h)

        def kern(t):
            return -(_B(s * (t - x0), Y) - _B(s * (t - x1), Y))

        lo, hi = min(x0, x1), max(x0, x1)
        br = _spike_breaks(x0, y + self.h) + _spike_breaks(x1, y + self.h)
        val = _line_integral(kern, self._g, lo, hi, H, _DERIV_C, self.cfg, br)
        return self._amp * val / (2 * H)

    def _vertical(self, x: float, y0: float, y1: float) -> float:
        """Integral of U_x along the segment from x + i y0 to x + i y1."""
        H = 4 * self.h
        s = math.pi / H
        Y0, Y1 = s * (y0 + self.h), s * (y1 + self.h)

        def kern(t):
            X = s * (t - x)
            return -(_Q(X, Y1) - _Q(X, Y0))

        br = _spike_breaks(x, min(y0, y1) + self.h)
        val = _line_integral(kern, self._g, x, x, H, _DERIV_C, self.cfg, br)
        return self._amp * val / (2 * H)

    def V(self, x: float, y: float, path: str = "hv") -> float:
        """Harmonic conjugate with V(base) = 0, integrated along an axis-parallel path.

        ``hv`` goes horizontally first, ``vh`` vertically first.
        """
        self._check(x, y)
        if self.weight.is_zero:
            return 0.0
        bx, by = self.base.real, self.base.imag
        if x == bx and y == by:
            return 0.0
        if path == "hv":
            total = 0.0
            if x != bx:
                total += self._horizontal(by, bx, x)
            if y != by:
                total += self._vertical(x, by, y)
            return total
        if path == "vh":
            total = 0.0
            if y != by:
                total += self._vertical(bx, by, y)
            if x != bx:
                total += self._horizontal(y, bx, x)
            return total
        raise StripError(f"unknown path {path!r}")

    def log(self, z: complex) -> complex:
        """U + iV, a holomorphic logarithm of F."""
        z = complex(z)
        return complex(self.U(z.real, z.imag), self.V(z.real, z.imag))

    def log_many(self, z, real_only: bool = False) -> np.ndarray:
        """U + iV at an array of points (just U when ``real_only``).

        Points sharing an imaginary part share one composite Gauss-Legendre
        rule in t, refined by halving until two successive rules agree; rows
        where that fails (or that are short) fall back to :meth:`log`.
        """
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        out = np.zeros(flat.shape, dtype=complex)
        if self.weight.is_zero:
            return out.reshape(z.shape)
        for y in np.unique(flat.imag):
            idx = np.nonzero(flat.imag == y)[0]
            vals = None
            if len(idx) >= _BATCH_MIN:
                self._check(0.0, float(y))
                vals = self._row(flat.real[idx], float(y))
            if vals is None and real_only:
                vals = [self.U(v.real, v.imag) for v in flat[idx]]
            elif vals is None:
                vals = [self.log(v) for v in flat[idx]]
            out[idx] = vals
        out = out.reshape(z.shape)
        return out.real if real_only else out

    def _row(self, xs: np.ndarray, y: float) -> np.ndarray | None:
        H = 4 * self.h
        s = math.pi / H
        Y, BY = s * (y + self.h), s * (self.base.imag + self.h)
        bx = self.base.real
        width = min(y + self.h, self.base.imag + self.h)
        if width < 0.05 * H:
            return None  # the kernel is a narrow spike; the adaptive path handles it
        g = self._g
        lo, hi = min(float(xs.min()), bx), max(float(xs.max()), bx)
        tail = _tail_fn(g, lo, hi, H, _DERIV_C)
        c = 0.5 * (lo + hi)
        X = 0.5 * (hi - lo) + H
        while tail(X) > 0.1 * self.cfg.abs_tol:
            X *= 2
            if X > 1e6:
                return None
        a, b = c - X, c + X
        # a breakpoint at each kink, plus geometric grading at 0 where w may be singular
        grade = [0.0, *g.kinks, *[-k for k in g.kinks]]
        grade += [sgn * 2.0 ** -j for sgn in (-1, 1) for j in range(0, 44)]
        prev = None
        step = min(width, H / 4) / 2
        for _ in range(4):
            brk = np.unique(np.concatenate([np.arange(a, b, step), [b],
                                            [v for v in grade if a < v < b]]))
            cur = self._row_rule(xs, Y, BY, bx, brk)
            if prev is not None:
                tol = np.maximum(self.cfg.abs_tol, self.cfg.rel_tol * np.abs(cur))
                if np.all(np.abs(cur - prev) <= 10 * tol):
                    return cur
            prev = cur
            step /= 2
        return None

    def _row_rule(self, xs, Y, BY, bx, brk) -> np.ndarray:
        H = 4 * self.h
        s = math.pi / H
        nodes, weights = gl_rule(self.cfg.order)
        left, right = brk[:-1], brk[1:]
        half = 0.5 * (right - left)
        t = ((left + right)[:, None] * 0.5 + half[:, None] * nodes[None, :]).ravel()
        wt = (half[:, None] * weights[None, :]).ravel() * self._g(t)
        q0 = _Q(s * (bx - t), BY)
        out = np.empty(len(xs), dtype=complex)
        for i in range(0, len(xs), _BATCH_CHUNK):
            xc = xs[i:i + _BATCH_CHUNK, None]
            _, _, q, m, s2, D = _q_form(s * (xc - t[None, :]), Y)
            Pk = 2.0 * math.sin(Y) * q / D
            Qk = np.sign(xc - t[None, :]) * m * (1.0 + q) / D
            out[i:i + _BATCH_CHUNK] = (Pk @ wt) + 1j * ((Qk - q0[None, :]) @ wt)
        return self._amp * out / (2 * H)

    def __call__(self, z: complex) -> complex:
        return complex(np.exp(self.log(z)))

    def reciprocal(self, z: complex) -> complex:
        """1/F(z) evaluated as exp(-(U + iV)), which stays finite where F overflows."""
        return complex(np.exp(-self.log(z)))


def build_minorant(w: Weight, lam: float, h: float, mode: str = "dilate",
                   cfg: QuadConfig | None = None) -> AnalyticMinorant:
    """Construct the zero-free minorant and its certified bound constant."""
    cfg = cfg or QuadConfig()
    if not (lam > 0 and h > 0):
        raise StripError("lam and h must be positive")
    if mode not in ("dilate", "subadditive"):
        raise StripError(f"unknown mode {mode!r}")
    if w.is_zero:
        return AnalyticMinorant(w, lam, h, mode, 0.0, cfg=cfg)
    if mode == "dilate":
        mu = math.pi / (8 * h * lam)
        v = check_condition(w, "epsilon", mu=mu)
        if v.fails:
            raise StripError(f"{w.label} does not satisfy (epsilon)_{mu:g}")
        g = w.dilate(lam)
        try:
            integral = float(_epsilon_integral(g, math.pi / (8 * h)).value)
        except QuadratureError as exc:
            raise StripError(f"convergence not certifiable for {w.label}: {exc}") from exc
        logC = 4.0 * w(8 * h * lam / math.pi) + 4.0 * math.e / (8 * h * _COSH1M1) * integral
    else:
        if not check_condition(w, "alpha").positive:
            raise StripError(f"{w.label} is not subadditive")
        if w(0.0) != 0.0:
            raise StripError("subadditive mode needs w(0) = 0")
        try:
            integral = float(_epsilon_integral(w, math.pi / (4 * h)).value)
        except QuadratureError as exc:
            raise StripError(f"convergence not certifiable for {w.label}: {exc}") from exc
        logC = 4.0 * lam * (w(4 * h / math.pi) + math.e / (4 * h * _COSH1M1) * integral)
    return AnalyticMinorant(w, lam, h, mode, logC, cfg=cfg)


def eval_minorant_modulus(F: AnalyticMinorant, z: complex) -> float:
    z = complex(z)
    return math.exp(F.U(z.real, z.imag))


def harmonic_conjugate_path(F: AnalyticMinorant, z: complex, cfg: QuadConfig | None = None,
                            path: str = "hv") -> float:
    z = complex(z)
    if cfg is not None and cfg != F.cfg:
        F = AnalyticMinorant(F.weight, F.lam, F.h, F.mode, F.log_bound_constant, F.base, cfg)
    return F.V(z.real, z.imag, path)


def cr_residual(F: AnalyticMinorant, z: complex, step: float = 1e-3) -> float:
    """max(|U_x - V_y|, |U_y + V_x|) with V differentiated by central differences."""
    z = complex(z)
    x, y = z.real, z.imag
    ux, uy = F.grad_U(x, y)
    vx = (F.V(x + step, y) - F.V(x - step, y)) / (2 * step)
    vy = (F.V(x, y + step) - F.V(x, y - step)) / (2 * step)
    return max(abs(ux - vy), abs(uy + vx))


# ----------------------------------------------------------------- three lines

def three_lines_bound(M: float, C: float, w: Weight, h: float, z: complex) -> float:
    """M^{y/h} C^{1-y/h} exp(-(w(x)/2)(1 - y/h)) on the closed half-strip."""
    z = complex(z)
    x, y = z.real, z.imag
    if not (0 <= y <= h):
        raise StripError("three_lines_bound needs 0 <= Im z <= h")
    if not (M > 0 and C > 0):
        raise StripError("M and C must be positive")
    r = y / h
    return M ** r * C ** (1 - r) * math.exp(-0.5 * w(x) * (1 - r))


def three_lines_check(phi: Callable[[complex], complex], M: float, C: float, w: Weight,
                      h: float, points: Iterable[complex], rtol: float = 1e-12):
    """Check |phi(z)| <= bound at every point; returns (ok, worst ratio, worst point)."""
    worst, where = 0.0, None
    for z in points:
        b = three_lines_bound(M, C, w, h, z)
        ratio = abs(phi(complex(z))) / b
        if ratio > worst:
            worst, where = ratio, complex(z)
    return worst <= 1.0 + rtol, worst, where
