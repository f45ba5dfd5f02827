"""Scalar integral kernels and weight functions of the correlator formulas.

All kernels are expressed through the closed-form Gaussian-Fresnel
primitives of special_integrals; diagonals are analytic limits.
"""

import math
from dataclasses import dataclass

import numpy as np

from .special_integrals import (
    fresnel_kink_integral,
    gauss_panels,
    pv_fresnel_hilbert,
)


@dataclass(frozen=True)
class BoundaryKind:
    """Wall type selector: eps=+1 reflecting (Neumann), eps=-1 absorbing (Dirichlet)."""

    eps: int

    def __post_init__(self):
        if self.eps not in (1, -1):
            raise ValueError("eps must be +1 or -1")


NEUMANN = BoundaryKind(+1)
DIRICHLET = BoundaryKind(-1)


@dataclass(frozen=True)
class ThermalParams:
    """Chemical potential h > 0 and temperature T >= 0."""

    h: float
    T: float

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("chemical potential h must be positive")
        if self.T < 0:
            raise ValueError("temperature T must be nonnegative")


@dataclass(frozen=True)
class GeometryParams:
    """Positions x1, x2 >= 0 and time t."""

    x1: float
    x2: float
    t: float

    def __post_init__(self):
        if self.x1 < 0 or self.x2 < 0:
            raise ValueError("positions must be nonnegative")


def fermi_weight(lam, p):
    """Thermal occupation 1/(1 + exp((lam^2 - h)/T)).

    At T = 0: indicator of lam^2 < h (1/2 exactly on the Fermi surface).
    Broadcasts over lam.
    """
    lam = np.asarray(lam, dtype=float)
    if p.T == 0.0:
        out = np.where(lam * lam < p.h, 1.0, np.where(lam * lam > p.h, 0.0, 0.5))
    else:
        out = 1.0 / (1.0 + np.exp(np.clip((lam * lam - p.h) / p.T, -700.0, 700.0)))
    return out if np.ndim(out) else float(out)


def _sinc(x, u):
    """sin(x*u)/u with the removable u = 0 limit."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1e-9
    safe = np.where(small, 1.0, u)
    out = np.where(small, x * np.cos(x * u), np.sin(x * safe) / safe)
    return out if np.ndim(out) else float(out)


def kernel_L(lam, mu, g):
    """Dynamical two-position kernel L(lam, mu).

    For t != 0 the principal-value part is expanded (product-to-sum on the
    two sines) into four Gaussian Hilbert transforms.  At t = 0 the damped
    regularization collapses to [sin(xmax*d) - sin(xmin*d)]/d, d = lam - mu.
    The diagonal mu = lam is the analytic limit.
    """
    x1, x2, t = g.x1, g.x2, g.t
    d = lam - mu
    if abs(d) < 1e-12:
        return kernel_L_diag(lam, g)
    if t == 0.0:
        xm, xM = min(x1, x2), max(x1, x2)
        return complex((math.sin(xM * d) - math.sin(xm * d)) / d)
    brace = (np.exp(1j * t * lam * lam) * math.sin(x1 * d)
             + np.exp(1j * t * mu * mu) * math.sin(x2 * d))
    # PV int (1/(s-mu) - 1/(s-lam)) e^{its^2} sin((s-mu)x1) sin((s-lam)x2) ds,
    # via sinA sinB = (e^{i(A-B)} + e^{-i(A-B)} - e^{i(A+B)} - e^{-i(A+B)})/4
    pv = 0.0j
    for sgn, X, phi in ((+1.0, x1 - x2, -mu * x1 + lam * x2),
                        (+1.0, x2 - x1, mu * x1 - lam * x2),
                        (-1.0, x1 + x2, -mu * x1 - lam * x2),
                        (-1.0, -x1 - x2, mu * x1 + lam * x2)):
        pv += sgn * 0.25 * np.exp(1j * phi) * (pv_fresnel_hilbert(mu, -X, t)
                                               - pv_fresnel_hilbert(lam, -X, t))
    return complex(np.exp(-0.5j * t * (lam * lam + mu * mu)) * (brace + (2.0 / math.pi) * pv) / d)


def kernel_L_diag(lam, g):
    """Analytic limit of kernel_L on the diagonal.

    L(lam, lam) = x1 + x2 - (2/pi) e^{-i t lam^2} *
                  (J(x1+x2) - J(|x1-x2|))/2
    with J the Gaussian kink integral; at t = 0 this is |x1 - x2|.
    """
    x1, x2, t = g.x1, g.x2, g.t
    if t == 0.0:
        return complex(abs(x1 - x2))
    jplus = fresnel_kink_integral(x1 + x2, lam, t)
    jminus = fresnel_kink_integral(abs(x1 - x2), lam, t)
    return complex((x1 + x2) - (1.0 / math.pi) * np.exp(-1j * t * lam * lam) * (jplus - jminus))


def kernel_P(lam, x1, x2, t):
    """One-variable kernel P(lam | x1, x2) (two Gaussian Hilbert transforms).

    At t = 0 the regularized value is sign(x1 - x2) * exp(-i*x1*lam).
    Broadcasts over lam.
    """
    lam = np.asarray(lam, dtype=float)
    term = np.exp(1j * t * lam * lam - 1j * x1 * lam)
    pv = (1.0 / 2j) * (np.exp(-1j * x2 * lam) * pv_fresnel_hilbert(lam, x1 - x2, t)
                       - np.exp(1j * x2 * lam) * pv_fresnel_hilbert(lam, x1 + x2, t))
    out = np.exp(-0.5j * t * lam * lam) * (term - (2.0 / math.pi) * pv)
    return out if np.ndim(out) else complex(out)


def kernel_V(lam, mu, kind, g):
    """Boundary-summed kernel V_eps(lam, mu) = L(lam, mu) + eps*L(lam, -mu)."""
    return kernel_L(lam, mu, g) + kind.eps * kernel_L(lam, -mu, g)


def rank_one_factors(kind, g):
    """One-variable factors (f, g_fn) with A_eps(lam, mu) = eps*f(lam)*g_fn(mu).

    f(lam) = P(lam|x1,x2) + eps*P(-lam|x1,x2), g_fn from the swapped
    position pair.
    """
    eps = kind.eps
    x1, x2, t = g.x1, g.x2, g.t

    def f(lam):
        return kernel_P(lam, x1, x2, t) + eps * kernel_P(-np.asarray(lam, dtype=float), x1, x2, t)

    def g_fn(mu):
        return kernel_P(mu, x2, x1, t) + eps * kernel_P(-np.asarray(mu, dtype=float), x2, x1, t)

    return f, g_fn


def kernel_W(lam, mu, x):
    """Static symmetric sine kernel sin(x(l-m))/(l-m) + sin(x(l+m))/(l+m).

    Diagonals are the analytic limits: W(l, l) = x + sin(2xl)/(2l),
    W(0, 0) = 2x.  Broadcasts over arrays.
    """
    return _sinc(x, np.asarray(lam) - np.asarray(mu)) + _sinc(x, np.asarray(lam) + np.asarray(mu))


def kernel_theta(xi, eta, kind, p, n_panels=60):
    """Thermal position-space kernel: cosine transform of the Fermi weight.

    theta(xi, eta) = int_0^inf fermi(nu) [cos((xi-eta)nu) + eps cos((xi+eta)nu)] dnu.
    At T = 0 this closes to the static sine kernel with momentum sqrt(h).
    Broadcasts over xi/eta (they must broadcast together).
    """
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if p.T == 0.0:
        out = kernel_K_static(xi, eta, kind, math.sqrt(p.h))
        return out
    cut = math.sqrt(p.h + p.T * math.log(1e16)) + 1.0
    nu, w = gauss_panels(0.0, cut, n_panels)
    th = fermi_weight(nu, p) * w
    a = (xi - eta)[..., None]
    b = (xi + eta)[..., None]
    out = (np.cos(a * nu) + kind.eps * np.cos(b * nu)) @ th
    return out if np.ndim(out) else float(out)


def kernel_K_static(xi, eta, kind, momentum):
    """Ground-state sine kernel sin(q(xi-eta))/(xi-eta) + eps*(xi+eta term).

    `momentum` is the sine frequency q (the Fermi momentum pi*density).
    Diagonals by the analytic limits as in kernel_W.
    """
    out = (_sinc(momentum, np.asarray(xi) - np.asarray(eta))
           + kind.eps * _sinc(momentum, np.asarray(xi) + np.asarray(eta)))
    return out if np.ndim(out) else float(out)


def step_weight(y1, y2, xip):
    """E(y1 - xi') + E(y2 - xi') with the step E(0) = 1 convention."""
    xip = np.asarray(xip, dtype=float)
    out = (y1 - xip >= 0).astype(int) + (y2 - xip >= 0).astype(int)
    return out if np.ndim(out) else int(out)
