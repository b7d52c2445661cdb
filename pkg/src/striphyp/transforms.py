"""Fourier transforms by contour shift, K1 norms, Laplace transforms and
Paley-Wiener bound checks.

Convention: F phi(xi) = integral of phi(x) exp(-i x xi) dx, so the inverse
carries the factor 1/(2 pi) and L{delta_a; zeta} = exp(i a zeta) / (2 pi).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Any, Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .config import GridConfig, QuadConfig
from .quad import Envelope, QuadratureError, contour_integral_rect, integrate_decaying
from .reps import AnalyticRep, Functional, _dyadic
from .spaces import DIVERGENCE, TestFunction
from .verdict import ConditionVerdict, fails, holds, supported
from .weights import ConjugateDiverges, Weight, young_conjugate


class TransformError(ValueError):
    pass


def _tail_from_env(env: Callable, radius: float) -> Callable[[float, int], float]:
    """Envelope tail for exp(env(x)) with env non-increasing in |x| beyond radius."""
    zero = lambda u: np.zeros(np.shape(u))

    def tail(X, sides):
        if X <= radius:
            return math.inf
        right = _dyadic(zero, env, X)
        left = _dyadic(zero, lambda u: env(-u), X) if sides == 2 else 0.0
        return right + left
    return tail


# ----------------------------------------------------------------- Fourier

def fourier_strip(phi: TestFunction, k: float, xi: float, cfg: QuadConfig | None = None) -> complex:
    """phi-hat(xi) by integrating along Im z = k (xi <= 0) or Im z = -k (xi > 0)."""
    cfg = cfg or QuadConfig()
    if not 0 < k < phi.h_max:
        raise TransformError(f"shift k={k} must satisfy 0 < k < {phi.h_max}")
    if phi.is_zero:
        return 0j
    s = k if xi <= 0 else -k
    decay = -k * abs(xi)

    def f(x):
        z = x + 1j * s
        return phi(z) * np.exp(-1j * z * xi)

    env = Envelope.custom(_tail_from_env(lambda u: phi.log_env(u, k) + decay, phi.env_radius),
                          center=0.0)
    res = integrate_decaying(f, "line", env, cfg, breakpoints=[phi.env_radius, -phi.env_radius],
                             oscillation=xi, panel_width=0.5)
    return complex(res.value)


@dataclass(frozen=True)
class Spectrum:
    """A sampled function on the frequency line with |psi(xi)| <= exp(log_env(xi)).

    ``log_env`` must be non-increasing in |xi| beyond ``radius``.  ``inverse``,
    when known in closed form, is used for K1 norms in place of quadrature.
    """
    fn: Callable[[np.ndarray], np.ndarray]
    log_env: Callable[[np.ndarray], np.ndarray] | None
    radius: float = 0.0
    name: str = "psi"
    log_abs: Callable[[np.ndarray], np.ndarray] | None = None
    inverse: Callable[[np.ndarray], np.ndarray] | None = None
    zero: bool = False

    def __call__(self, xi):
        return self.fn(np.asarray(xi, dtype=float))


def zero_spectrum() -> Spectrum:
    return Spectrum(lambda xi: np.zeros(np.shape(xi), dtype=complex),
                    lambda xi: np.full(np.shape(xi), -np.inf), 0.0, "zero",
                    lambda xi: np.full(np.shape(xi), -np.inf),
                    lambda x: np.zeros(np.shape(x), dtype=complex), zero=True)


def gaussian_spectrum(a: float = 1.0, shift: float = 0.0) -> Spectrum:
    """Fourier transform of exp(-a (x - shift)^2): sqrt(pi/a) exp(-xi^2/(4a) - i shift xi)."""
    c = math.sqrt(math.pi / a)

    def fn(xi):
        return c * np.exp(-xi * xi / (4 * a) - 1j * shift * xi)

    def la(xi):
        return math.log(c) - np.asarray(xi, dtype=float) ** 2 / (4 * a)

    def inv(x):
        x = np.asarray(x, dtype=float)
        return np.exp(-a * (x - shift) ** 2).astype(complex)

    return Spectrum(fn, la, 0.0, f"gaussian_hat(a={a:g},shift={shift:g})", la, inv)


def spectrum_of(phi: TestFunction, k: float, cfg: QuadConfig | None = None) -> Spectrum:
    """Numerical phi-hat with the decay bound ||phi on Im z = +-k||_1 exp(-k |xi|)."""
    cfg = cfg or QuadConfig()
    if phi.is_zero:
        return zero_spectrum()
    env = Envelope.custom(_tail_from_env(lambda u: phi.log_env(u, k), phi.env_radius))
    l1 = 0.0
    for s in (k, -k):
        r = integrate_decaying(lambda x: np.abs(phi(x + 1j * s)), "line", env, cfg, panel_width=0.5)
        l1 = max(l1, float(r.value) + r.error)

    def fn(xi):
        xi = np.asarray(xi, dtype=float)
        out = np.array([fourier_strip(phi, k, float(v), cfg) for v in xi.ravel()])
        return out.reshape(xi.shape) if xi.ndim else complex(out[0])

    def la(xi):
        return math.log(l1) - k * np.abs(np.asarray(xi, dtype=float))

    return Spectrum(fn, la, 0.0, f"hat({phi.spec})")


def inverse_fourier_line(psi: Spectrum, x: float, cfg: QuadConfig | None = None) -> complex:
    """(1/2 pi) * integral of psi(xi) exp(i x xi) d xi."""
    cfg = cfg or QuadConfig()
    if psi.zero:
        return 0j
    if psi.log_env is None:
        raise TransformError("inverse Fourier transform needs a decay bound on psi")
    env = Envelope.custom(_tail_from_env(psi.log_env, psi.radius))
    res = integrate_decaying(lambda xi: psi(xi) * np.exp(1j * x * xi), "line", env, cfg,
                             oscillation=x, panel_width=0.5)
    return complex(res.value) / (2 * math.pi)


# ----------------------------------------------------------------- K1 norms

@dataclass(frozen=True)
class K1Norms:
    rho_omega: float
    rho_h: float

    @property
    def rho_combined(self) -> float:
        return max(self.rho_omega, self.rho_h)

    def to_dict(self) -> dict[str, Any]:
        return {"rho_omega": self.rho_omega, "rho_h": self.rho_h, "rho_combined": self.rho_combined}


def _grid_sup(logf: Callable[[np.ndarray], np.ndarray], X: float, n: int,
              max_doublings: int) -> float:
    """sup of logf over the line (as a log), doubling the range while the argmax is on the edge."""
    history = []
    for _ in range(max_doublings + 1):
        xs = np.linspace(-X, X, 2 * n + 1)
        with np.errstate(all="ignore"):
            v = np.asarray(logf(xs), dtype=float)
        v = np.where(np.isnan(v), -np.inf, v)
        if np.any(np.isposinf(v)):
            return math.inf
        i = int(np.argmax(v))
        history.append(float(v[i]))
        if i not in (0, xs.size - 1):
            dx = xs[1] - xs[0]
            res = minimize_scalar(lambda t: -float(logf(np.asarray([t]))[0]),
                                  bounds=(xs[i] - dx, xs[i] + dx), method="bounded",
                                  options={"xatol": 1e-12})
            return max(history[-1], -float(res.fun))
        if len(history) >= 3 and history[-1] > math.log(DIVERGENCE) and history[-1] > history[-2] > history[-3]:
            return math.inf
        X *= 2
    return math.inf


def k1_norms(psi: Spectrum, w: Weight, h: float, lam: float = 1.0,
             cfg: GridConfig | None = None, qcfg: QuadConfig | None = None) -> K1Norms:
    """rho^h = sup |psi| e^{h |xi|} and rho_w = sup |F^{-1} psi| e^{w(lam x)}."""
    cfg = cfg or GridConfig(t_max=20.0, n=400)
    if psi.zero:
        return K1Norms(0.0, 0.0)
    la = psi.log_abs or (lambda xi: np.log(np.abs(psi(xi))))
    log_rho_h = _grid_sup(lambda xi: la(xi) + h * np.abs(xi), cfg.t_max, cfg.n, cfg.max_doublings)
    if psi.inverse is not None:
        inv = psi.inverse
    else:
        inv = lambda xs: np.array([inverse_fourier_line(psi, float(v), qcfg) for v in np.ravel(xs)])
    log_rho_w = _grid_sup(lambda x: np.log(np.abs(inv(x))) + w(lam * np.asarray(x)),
                          cfg.t_max, cfg.n, cfg.max_doublings)
    ex = lambda v: math.exp(v) if v < 709 else math.inf
    return K1Norms(ex(log_rho_w), ex(log_rho_h))


# ----------------------------------------------------------------- Laplace

def laplace_atoms(f: Functional, zeta: complex) -> complex:
    """(1/2 pi) sum of a (i zeta)^k exp(i c zeta), the closed form for atoms."""
    if f.density is not None and f.density_coef != 0:
        raise TransformError("closed form only for atomic functionals")
    zeta = complex(zeta)
    terms = [a.coef * (1j * zeta) ** a.order * cmath.exp(1j * a.loc * zeta) for a in f.atoms]
    return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms)) / (2 * math.pi)


def laplace_transform(F: AnalyticRep, zeta: complex, interval: tuple[float, float] | None = None,
                      b: float | None = None, cfg: QuadConfig | None = None) -> complex:
    """-(1/2 pi) * counterclockwise integral of F(z) exp(i z zeta) around J x [-b, b].

    J defaults to the atom extent widened by one on each side; bounded support
    makes every zeta admissible.
    """
    cfg = cfg or QuadConfig()
    zeta = complex(zeta)
    f = F.functional
    if f.is_zero:
        return 0j
    ext = f.real_extent()
    if ext is None:
        raise TransformError("unbounded support: zeta must lie in a half-plane the contour "
                             "cannot certify for densities")
    if interval is None:
        interval = (ext[0] - 1.0, ext[1] + 1.0)
    lo, hi = interval
    if not (lo < ext[0] and ext[1] < hi):
        raise TransformError("interval must contain the support strictly")
    b = F.b if b is None else b
    if not f.max_abs_imag < b:
        raise TransformError("atoms must lie inside the contour")
    res = contour_integral_rect(lambda z: F(z) * np.exp(1j * z * zeta), lo, hi, -b, b, cfg,
                                breakpoints_x=[a.loc.real for a in f.atoms], max_width=0.5)
    return -complex(res.value) / (2 * math.pi)


def inverse_fourier_functional(f: Functional, xi: float) -> complex:
    """(F^{-1} f)(xi) = (1/2 pi) <f, exp(i x xi)> for atomic f."""
    return laplace_atoms(f, complex(xi, 0.0))


# ----------------------------------------------------------------- Paley-Wiener

REGIONS = ("entire", "upper", "lower", "above", "below")


@dataclass(frozen=True)
class LaplaceBoundSpec:
    a: float = 0.0
    h: float = 0.0
    lam: float = 0.0
    w: Weight | None = None
    region: str = "upper"
    flavor: str = "Roumieu"

    def __post_init__(self):
        if self.a < 0 or self.h < 0 or self.lam < 0:
            raise TransformError("a, h and lambda must be non-negative")
        if self.region not in REGIONS:
            raise TransformError(f"unknown region {self.region!r}")
        if self.region in ("above", "below") and not self.lam > 0:
            raise TransformError("region/flavor mismatch: half-planes beyond lambda need lambda > 0")
        if self.flavor == "Beurling" and self.region in ("upper", "lower") and self.lam > 0:
            raise TransformError("region/flavor mismatch: the Beurling bound is taken beyond lambda")
        if self.lam > 0 and self.w is None:
            raise TransformError("a conjugate term needs a weight")

    def log_allowance(self, xi, eta, eps: float):
        xi = np.asarray(xi, dtype=float)
        eta = np.asarray(eta, dtype=float)
        out = (self.a + eps) * np.abs(eta) + (self.h + eps) * np.abs(xi)
        if self.lam > 0:
            conj = np.vectorize(lambda e: self.lam * young_conjugate(self.w, abs(e) / self.lam)
                                if e != 0 else 0.0)
            out = out + conj(eta)
        return out

    def eta_grid(self, eta_max: float, n: int = 60) -> np.ndarray:
        pos = np.geomspace(1e-3, eta_max, n)
        if self.region == "entire":
            return np.concatenate([-pos[::-1], [0.0], pos])
        if self.region == "upper":
            return pos
        if self.region == "lower":
            return -pos
        if self.region == "above":
            return pos[pos > self.lam]
        return -pos[pos > self.lam]


@dataclass(frozen=True)
class ExpSeries:
    """G(zeta) = sum of coef * zeta^k * exp(i c zeta)."""
    terms: tuple[tuple[complex, int, complex], ...]  # (c, k, coef)

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        out = np.zeros(zeta.shape, dtype=complex)
        for c, k, coef in self.terms:
            out += coef * zeta ** k * np.exp(1j * c * zeta)
        return out

    @classmethod
    def from_functional(cls, f: Functional) -> "ExpSeries":
        return cls(tuple((a.loc, a.order, a.coef * 1j ** a.order / (2 * math.pi)) for a in f.atoms))

    def symbolic(self, spec: LaplaceBoundSpec) -> ConditionVerdict | None:
        """Exact verdict: |exp(i c zeta)| = exp(-Re c * eta - Im c * xi)."""
        live = [(c, k, coef) for c, k, coef in self.terms if coef != 0]
        if not live:
            return holds(sup=0.0)
        if spec.lam > 0:
            return None
        for c, k, coef in live:
            gx = abs(c.imag)
            if gx > spec.h:
                return fails(None, "growth in xi exceeds the budget", c=c, xi_rate=gx)
            up = -c.real   # exponent rate for eta -> +inf
            down = c.real  # rate for eta -> -inf
            if spec.region in ("entire", "upper", "above") and up > spec.a:
                return fails(None, "growth along the imaginary axis", c=c, eta_rate=up)
            if spec.region in ("entire", "lower", "below") and down > spec.a:
                return fails(None, "growth along the imaginary axis", c=c, eta_rate=down)
        return holds(a=spec.a, h=spec.h)


def paley_wiener_check(G: Callable | ExpSeries, spec: LaplaceBoundSpec, eps: float = 0.1,
                       eta_max: float = 1e3, xi_max: float = 50.0, n_xi: int = 201) -> ConditionVerdict:
    """Check sup |G| exp(-(a+eps)|eta| - (h+eps)|xi| - lam w*(eta/lam)) < inf on a grid."""
    etas = spec.eta_grid(eta_max)
    xis = np.linspace(-xi_max, xi_max, n_xi)
    XI, ETA = np.meshgrid(xis, etas, indexing="ij")
    with np.errstate(all="ignore"):
        vals = np.abs(np.asarray(G(XI + 1j * ETA), dtype=complex))
        logg = np.log(vals)
    allow = np.asarray(spec.log_allowance(XI, ETA, eps))
    ratio = np.where(np.isnan(logg), -np.inf, logg - allow)
    ratio = np.where(np.isinf(vals) & (vals > 0), np.inf, ratio)
    i, j = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
    worst = float(ratio[i, j])
    witness_pt = complex(xis[i], etas[j])
    sym = G.symbolic(spec) if isinstance(G, ExpSeries) else None
    grid_fail = worst > math.log(DIVERGENCE)
    if sym is not None:
        if sym.fails and not grid_fail:
            note = sym.note + " (outside the tested grid)"
            return fails(float(eta_max), note, **sym.witness)
        if sym.fails:
            return fails(float(eta_max), sym.note, zeta=witness_pt, log_ratio=worst, **sym.witness)
        return holds(log_sup=worst if np.isfinite(worst) else None, **sym.witness)
    if grid_fail:
        return fails(float(eta_max), "bound exceeded on the grid", zeta=witness_pt, log_ratio=worst)
    if not np.isfinite(worst):
        return holds(sup=0.0)
    return supported(float(eta_max), f"xi in [-{xi_max:g}, {xi_max:g}]", log_sup=worst, at=witness_pt)
