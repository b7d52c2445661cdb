"""Almost-analytic extension of a Fourier transform and Stokes-formula pairings.

For zeta = xi + i eta the extension is

    Psi(zeta) = integral over |x| <= H(|eta|) of phi(x + i s k) exp(-i (x + i s k) zeta) dx,

with s = +1 for xi <= 0 and s = -1 for xi > 0, and H the inverse of w'.
Since the integrand is holomorphic in zeta, only the moving endpoints feed
d-bar Psi.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .config import GridConfig, QuadConfig
from .quad import Envelope, gl_rule, integrate, integrate_decaying
from .spaces import SpaceParams, TestFunction, strip_norm
from .transforms import fourier_strip
from .verdict import ConditionVerdict, fails, holds, supported
from .weights import (Weight, WeightError, _epsilon_integral, check_condition,
                      conjugate_second_derivative, inverse_derivative, inverse_derivative_prime,
                      linear, young_conjugate)


class ExtensionError(ValueError):
    pass


_GL_N = 24
_CLIP = 60.0  # drop the part of the line where the integrand is below e^-60 of its peak


@dataclass(frozen=True, eq=False)
class AlmostAnalyticExt:
    phi: TestFunction
    w: Weight
    k: float
    sigma: Weight
    cfg: QuadConfig = QuadConfig()

    def H(self, eta: float) -> float:
        a = abs(float(eta))
        return math.inf if a == 0 else inverse_derivative(self.w, a)

    def H_prime(self, eta: float) -> float:
        return inverse_derivative_prime(self.w, abs(float(eta)))

    def _clip(self, eta: float) -> float:
        """Radius beyond which |phi(x +- ik)| e^{|x eta|} is negligible."""
        phi, k = self.phi, self.k
        peak = max(float(np.max(phi.log_env(np.linspace(-4, 4, 81), k) + np.abs(np.linspace(-4, 4, 81)) * abs(eta))), 0.0)
        X = max(phi.env_radius + 1.0, 2.0)
        for _ in range(200):
            v = max(float(phi.log_env(X, k)), float(phi.log_env(-X, k))) + X * abs(eta)
            if v < peak - _CLIP:
                return X
            X *= 1.25
        raise ExtensionError("test function decay does not beat exp(|x eta|)")

    def _integrand(self, x: np.ndarray, zeta: complex) -> np.ndarray:
        s = self.k if zeta.real <= 0 else -self.k
        z = x + 1j * s
        with np.errstate(over="ignore", under="ignore"):
            return np.exp(self.phi.log(z) - 1j * z * zeta)

    def __call__(self, zeta: complex) -> complex:
        zeta = complex(zeta)
        if self.phi.is_zero:
            return 0j
        if zeta.imag == 0:
            return fourier_strip(self.phi, self.k, zeta.real, self.cfg)
        Hh = min(self.H(zeta.imag), self._clip(zeta.imag))
        width = min(0.5, math.pi / max(abs(zeta.real), 1e-300))
        res = integrate(lambda x: self._integrand(x, zeta), -Hh, Hh, self.cfg,
                        breakpoints=[0.0], max_width=max(width, 1e-3))
        return complex(res.value)

    def values(self, zetas) -> np.ndarray:
        return np.array([self(z) for z in np.ravel(zetas)]).reshape(np.shape(zetas))


def build_extension(phi: TestFunction, w: Weight, k: float, sigma: Weight | None = None,
                    cfg: QuadConfig | None = None) -> AlmostAnalyticExt:
    """Set up Psi for phi on the strip |Im z| < h(phi), shifting by k."""
    if "smooth_concave" not in w.tags:
        raise ExtensionError(f"{w.label} is not a smooth strictly concave catalog weight")
    if not check_condition(w, "NA").positive:
        raise ExtensionError(f"{w.label} does not satisfy (NA)")
    if not 0 < k < phi.h_max:
        raise ExtensionError(f"shift k={k} must satisfy 0 < k < {phi.h_max}")
    sigma = sigma or linear()
    if not phi.is_zero:
        try:
            _premise_integral(w, sigma, moment=1)
        except Exception as exc:  # non-convergence of the premise integral
            raise ExtensionError(f"integral of t e^(w - sigma) does not converge: {exc}") from exc
    return AlmostAnalyticExt(phi, w, k, sigma, cfg or QuadConfig())


def _premise_integral(w: Weight, sigma: Weight, moment: int = 0) -> float:
    """Integral over t > 0 of t^moment exp(w(t) - sigma(t))."""
    def f(t):
        with np.errstate(over="ignore"):
            return t ** moment * np.exp(w(t) - sigma(t))

    def tail(X, sides):
        # once w - sigma has slope <= -1/2 the integrand is below its value times e^{-(t-X)/4}
        d = 1e-6 * max(X, 1.0)
        slope = (w(X + d) - sigma(X + d) - w(X) + sigma(X)) / d + moment / X
        if slope > -0.25:
            return math.inf
        return float(f(np.asarray(X))) / 0.25 * 1.0001

    env = Envelope.custom(tail)
    res = integrate_decaying(f, "ray", env, QuadConfig(abs_tol=1e-12, rel_tol=1e-12),
                             breakpoints=[1.0])
    return float(res.value)


def dbar_extension(E: AlmostAnalyticExt, zeta: complex) -> complex:
    """(i/2) sgn(eta) H'(|eta|) [f(H) + f(-H)], the exact d-bar of Psi."""
    zeta = complex(zeta)
    if zeta.imag == 0 or E.phi.is_zero:
        return 0j
    Hh = E.H(zeta.imag)
    hp = E.H_prime(zeta.imag)
    ends = E._integrand(np.array([Hh, -Hh]), zeta)
    return complex(0.5j * math.copysign(1.0, zeta.imag) * hp * (ends[0] + ends[1]))


def _dbar_row(E: AlmostAnalyticExt, xis: np.ndarray, v: float) -> np.ndarray:
    """dbar_extension along the horizontal line Im zeta = v (v != 0), vectorized."""
    xis = np.asarray(xis, dtype=float)
    if E.phi.is_zero:
        return np.zeros(xis.shape, dtype=complex)
    Hh = E.H(v)
    hp = E.H_prime(v)
    zeta = xis + 1j * v
    s = np.where(xis <= 0, E.k, -E.k)
    with np.errstate(over="ignore", under="ignore"):
        out = np.zeros(xis.shape, dtype=complex)
        for x in (Hh, -Hh):
            z = x + 1j * s
            out += np.exp(E.phi.log(z) - 1j * z * zeta)
    return 0.5j * math.copysign(1.0, v) * hp * out


def dbar_fd(E: AlmostAnalyticExt, zeta: complex, step: float = 1e-4) -> complex:
    """Central-difference d-bar, the oracle for dbar_extension."""
    zeta = complex(zeta)
    dx = (E(zeta + step) - E(zeta - step)) / (2 * step)
    dy = (E(zeta + 1j * step) - E(zeta - 1j * step)) / (2 * step)
    return 0.5 * (dx + 1j * dy)


@dataclass(frozen=True)
class ExtensionBounds:
    norm_w: float
    norm_sigma: float
    C: float
    dbar: ConditionVerdict
    size: ConditionVerdict

    @property
    def verdict(self) -> ConditionVerdict:
        if self.dbar.fails:
            return self.dbar
        if self.size.fails:
            return self.size
        return self.dbar if self.dbar.holds and self.size.holds else supported(
            None, "both inequalities hold on the grid")

    def to_dict(self):
        return {"norm_w": self.norm_w, "norm_sigma": self.norm_sigma, "C": self.C,
                "dbar": self.dbar.to_dict(), "size": self.size.to_dict(),
                "verdict": self.verdict.to_dict()}


def extension_norms(E: AlmostAnalyticExt, grid: GridConfig | None = None) -> tuple[float, float]:
    """Weighted sups of phi over |Im z| <= k (the lines the extension integrates on)."""
    g = grid or GridConfig(t_max=20.0, n=400)
    nw = strip_norm(E.phi, SpaceParams(E.w, E.k), g).value
    ns = strip_norm(E.phi, SpaceParams(E.sigma, E.k), g).value
    return nw, ns


def check_extension_bounds(E: AlmostAnalyticExt, xis=None, etas=None,
                           grid: GridConfig | None = None) -> ExtensionBounds:
    """Pointwise check of the two extension inequalities with explicit constants.

    |dbar Psi| <= ||phi||_w e^{-k|xi|} |w*''(eta)| e^{-w*(eta)}
    |Psi|      <= C ||phi||_sigma e^{-k|xi|},  C = 2 * integral of e^{w - sigma}
    """
    xis = np.linspace(-20, 20, 40) if xis is None else np.asarray(xis, dtype=float)
    etas = np.linspace(5 / 20, 5, 20) if etas is None else np.asarray(etas, dtype=float)
    if E.phi.is_zero:
        return ExtensionBounds(0.0, 0.0, 0.0, holds(), holds())
    nw, ns = extension_norms(E, grid)
    C = 2.0 * _premise_integral(E.w, E.sigma)
    worst1, worst2 = 0.0, 0.0
    at1 = at2 = None
    for eta in etas:
        ws = young_conjugate(E.w, abs(eta))
        w2 = abs(conjugate_second_derivative(E.w, abs(eta)))
        for xi in xis:
            z = complex(xi, eta)
            damp = math.exp(-E.k * abs(xi))
            b1 = nw * damp * w2 * math.exp(-ws)
            b2 = C * ns * damp
            r1 = abs(dbar_extension(E, z)) / b1
            r2 = abs(E(z)) / b2
            if r1 > worst1:
                worst1, at1 = r1, z
            if r2 > worst2:
                worst2, at2 = r2, z
    ev = float(max(np.max(np.abs(xis)), np.max(np.abs(etas))))
    tol = 1 + 1e-9
    v1 = fails(ev, "d-bar bound exceeded", at=at1, ratio=worst1) if worst1 > tol \
        else supported(ev, "d-bar bound", max_ratio=worst1)
    v2 = fails(ev, "size bound exceeded", at=at2, ratio=worst2) if worst2 > tol \
        else supported(ev, "size bound", max_ratio=worst2, C=C)
    return ExtensionBounds(nw, ns, C, v1, v2)


# ----------------------------------------------------------------- Stokes pairing

def _line_integral(fn: Callable[[np.ndarray], np.ndarray], k: float, cfg: QuadConfig,
                   scale: float = 1.0) -> complex:
    """Integral over xi of fn(xi), where |fn| decays like exp(-k |xi|)."""
    def tail(X, sides):
        # probe the decay rate at X; the envelope is the value there times e^{-k(t-X)}
        v = max(abs(complex(fn(np.asarray([X]))[0])), abs(complex(fn(np.asarray([-X]))[0])))
        return sides * v / k * 1.5 if X > 4.0 / k else math.inf

    env = Envelope.custom(tail)
    res = integrate_decaying(fn, "line", env, cfg, breakpoints=[0.0], panel_width=0.5)
    return complex(res.value)


@dataclass(frozen=True)
class StokesResult:
    value: complex
    top: complex
    area: complex
    jump: complex

    def to_dict(self):
        c = lambda v: [v.real, v.imag]
        return {"value": c(self.value), "top": c(self.top), "area": c(self.area), "jump": c(self.jump)}


def stokes_boundary_pair(G: Callable, E: AlmostAnalyticExt, L: float, eta: float = 0.0,
                         cfg: QuadConfig | None = None, n_v: int = 48) -> StokesResult:
    """Integral of G(xi + i eta) Psi(xi + i eta) over xi, via Stokes on eta < v < L:

        top + 2i * double integral of G dbar Psi - i * integral over v of G(iv) [Psi_-(iv) - Psi_+(iv)]

    The last term accounts for the branch switch of Psi across xi = 0.
    """
    cfg = cfg or QuadConfig(abs_tol=1e-11, rel_tol=1e-11)
    if not 0 <= eta < L:
        raise ExtensionError("need 0 <= eta < L")
    if E.phi.is_zero:
        return StokesResult(0j, 0j, 0j, 0j)
    k = E.k

    def top_fn(xi):
        return np.array([G(complex(x, L)) * E(complex(x, L)) for x in np.ravel(xi)])

    top = _line_integral(top_fn, k, cfg)

    # area term: Gauss-Legendre in v, adaptive line integral in xi at each node
    xg, wg = gl_rule(n_v)
    # grade towards the real axis where H(v) blows up and d-bar Psi flattens out
    edges = [eta] + [eta + (L - eta) * 2.0 ** (-j) for j in range(6, 0, -1)] + [L]
    area = 0j
    for a, b in zip(edges[:-1], edges[1:]):
        vs = 0.5 * (a + b) + 0.5 * (b - a) * xg
        for v, wv in zip(vs, wg):
            fn = lambda xi, v=v: np.asarray(G(np.asarray(xi) + 1j * v)) * _dbar_row(E, xi, v)
            val = _line_integral(fn, k, cfg)
            area += 0.5 * (b - a) * wv * val

    # jump across xi = 0: Psi_- uses the +ik line, Psi_+ the -ik line
    def jump_at(v):
        Hh = min(E.H(v), E._clip(v))
        zeta = complex(0.0, v)
        f_minus = lambda x: np.exp(E.phi.log(x + 1j * k) - 1j * (x + 1j * k) * zeta)
        f_plus = lambda x: np.exp(E.phi.log(x - 1j * k) - 1j * (x - 1j * k) * zeta)
        d = integrate(lambda x: f_minus(x) - f_plus(x), -Hh, Hh, cfg, max_width=0.5)
        return G(zeta) * complex(d.value)

    jump = 0j
    for a, b in zip(edges[:-1], edges[1:]):
        vs = 0.5 * (a + b) + 0.5 * (b - a) * xg
        for v, wv in zip(vs, wg):
            jump += 0.5 * (b - a) * wv * jump_at(float(v))
    value = top + 2j * area - 1j * jump
    return StokesResult(value, top, 2j * area, -1j * jump)


def direct_pair(G: Callable, E: AlmostAnalyticExt, eta: float, cfg: QuadConfig | None = None) -> complex:
    """Integral over xi of G(xi + i eta) Psi(xi + i eta), by direct quadrature."""
    cfg = cfg or QuadConfig(abs_tol=1e-11, rel_tol=1e-11)
    fn = lambda xi: np.array([G(complex(x, eta)) * E(complex(x, eta)) for x in np.ravel(xi)])
    return _line_integral(fn, E.k, cfg)


def gaussian_source(shift: float = 0.0) -> TestFunction:
    """The test function whose Fourier transform is exp(-(xi - shift)^2).

    phi(z) = exp(-shift^2) / (2 sqrt(pi)) * exp(-(z - 2 i shift)^2 / 4).
    """
    from .spaces import gaussian
    c = math.exp(-shift * shift) / (2 * math.sqrt(math.pi))
    return gaussian(0.25, 2j * shift).scale(c)
