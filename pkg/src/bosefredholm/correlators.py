"""User-facing correlation evaluators assembled from the kernel layer.

correlation_ground / correlation_thermal implement the dynamical Fredholm
determinant representations; correlation_boundary_neumann the x1=0 route
through the integrable-system matrix b; correlation_static and
static_ground_K the equal-time first-minor representations.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidGrid
from .fredholm import (
    DiscretizedOperator,
    RankOnePerturbation,
    build_grid,
    det_with_rank_one_derivative,
    fredholm_det,
    fredholm_minor_first,
)
from .kernels import (
    BoundaryKind,
    GeometryParams,
    ThermalParams,
    fermi_weight,
    kernel_K_static,
    kernel_theta,
    kernel_V,
    kernel_W,
    rank_one_factors,
    step_weight,
)
from .special_integrals import gaussian_fresnel


@dataclass(frozen=True)
class PhysicalPoint:
    """Evaluation point of a dynamical correlator.

    The ensemble is the thermal one when thermal.T > 0; at T = 0 the density
    D > 0 must be given and the Fermi momentum is q = pi*D.  thermal.h only
    enters the T = 0 value through the phase exp(-i*h*t).
    """

    x1: float
    x2: float
    t: float
    kind: BoundaryKind
    thermal: ThermalParams
    D: float = 0.0

    def __post_init__(self):
        if self.x1 < 0 or self.x2 < 0:
            raise ValueError("positions must be nonnegative")
        if self.thermal.T == 0.0 and self.D <= 0.0:
            raise ValueError("T = 0 requires a positive density D")

    @property
    def q(self):
        return math.pi * self.D


@dataclass(frozen=True)
class CorrelationResult:
    """Correlator value with its determinant/derivative parts.

    value = exp(-i*h*t) * ((G(x1-x2) + eps*G(x1+x2)) * det_part
                           + derivative_part / (2*pi))
    error_estimate is the node-doubling delta |value(n) - value(n/2)|.
    """

    value: complex
    det_part: complex
    derivative_part: complex
    grid_size: int
    truncation: float
    error_estimate: float


def density_of_temperature(p, n=400):
    """D(T) = (1/pi) * integral of the Fermi weight over [0, inf)."""
    if p.T == 0.0:
        return math.sqrt(p.h) / math.pi
    quad = build_grid((0.0, math.inf), n, thermal=p)
    return float(np.sum(quad.weights * fermi_weight(quad.nodes, p)) / math.pi)


def _v_matrix(nodes, kind, geom):
    n = len(nodes)
    mat = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            mat[i, j] = kernel_V(nodes[i], nodes[j], kind, geom)
    return mat


def _assemble(pt, quad, weight_fn):
    geom = GeometryParams(pt.x1, pt.x2, pt.t)
    mat = _v_matrix(quad.nodes, pt.kind, geom)
    op = DiscretizedOperator(quadrature=quad, matrix=mat, scale=2.0 / math.pi,
                             weight_fn=weight_fn)
    f, g = rank_one_factors(pt.kind, geom)
    pert = RankOnePerturbation(f_values=np.asarray(f(quad.nodes), dtype=complex),
                               g_values=np.asarray(g(quad.nodes), dtype=complex),
                               sign=pt.kind.eps)
    det, deriv = det_with_rank_one_derivative(op, pert)
    eps = pt.kind.eps
    # DegenerateDelta propagates at coincident equal-time points
    gsum = gaussian_fresnel(pt.x1 - pt.x2, pt.t) + eps * gaussian_fresnel(pt.x1 + pt.x2, pt.t)
    phase = np.exp(-1j * pt.thermal.h * pt.t)
    value = phase * (gsum * det + deriv / (2.0 * math.pi))
    return complex(value), complex(det), complex(deriv)


def _correlation(pt, n, with_error, build):
    if with_error:
        half = build(max(8, n // 2))
        full = build(n)
        err = abs(full[0] - half[0])
    else:
        full = build(n)
        err = float("nan")
    value, det, deriv = full[:3]
    truncation = full[3]
    return CorrelationResult(value=value, det_part=det, derivative_part=deriv,
                             grid_size=n, truncation=truncation, error_estimate=err)


def correlation_ground(pt, n=64, with_error=True):
    """Ground-state dynamical correlator (T = 0, Fermi sphere [0, pi*D])."""
    if pt.thermal.T != 0.0:
        raise ValueError("correlation_ground requires T = 0")

    def build(m):
        quad = build_grid((0.0, pt.q), m)
        value, det, deriv = _assemble(pt, quad, None)
        return value, det, deriv, 0.0

    return _correlation(pt, n, with_error, build)


def correlation_thermal(pt, n=64, with_error=True, tol=1e-14):
    """Finite-temperature dynamical correlator on the truncated half line.

    The Fermi weight enters as the operator weight, i.e. the determinant of
    the sqrt(theta)-conjugated symmetric kernel.  A T = 0 request falls back
    to the indicator weight on [0, sqrt(h)].  `tol` sets the domain
    truncation through the Fermi-weight decay bound.
    """
    p = pt.thermal
    if p.T == 0.0:
        def build(m):
            quad = build_grid((0.0, math.sqrt(p.h)), m)
            value, det, deriv = _assemble(pt, quad, None)
            return value, det, deriv, math.sqrt(p.h)
    else:
        def build(m):
            quad = build_grid((0.0, math.inf), m, thermal=p, tol=tol)
            value, det, deriv = _assemble(pt, quad, lambda lam: fermi_weight(lam, p))
            return value, det, deriv, quad.truncation

    return _correlation(pt, n, with_error, build)


def boundary_w_det(x, t, pt, n=64):
    """det(1 - (2/pi) W-hat) for the x1 = 0 Neumann route.

    Ground state: W on [0, q]; thermal: Fermi-weighted W on the truncated
    half line.  Independent of t at fixed x.
    """
    p = pt.thermal
    if p.T == 0.0:
        quad = build_grid((0.0, pt.q), n)
        weight_fn = None
    else:
        quad = build_grid((0.0, math.inf), n, thermal=p)
        weight_fn = lambda lam: fermi_weight(lam, p)
    op = DiscretizedOperator.from_kernel(
        lambda a, b: kernel_W(a, b, x).astype(complex), quad, 2.0 / math.pi,
        weight_fn=weight_fn)
    return fredholm_det(op)


def correlation_boundary_neumann(x, t, pt, n=64, policy=None, n_spectral=None):
    """x1 = 0 Neumann correlator: 2 exp(-i h t) det(1 - (2/pi) W-hat) * b_14.

    b_14 is evaluated at the four-point configuration (0, 0, -x, x; 0, 0, t, t)
    by the integrable-system module, over [-q, q] (T = 0) or the weighted
    line (T > 0).
    """
    from .nls_system import FourPointConfig, build_b

    if pt.kind.eps != 1:
        raise ValueError("boundary route is Neumann-only")
    from .special_integrals import FINE_POLICY
    policy = policy or FINE_POLICY
    det = boundary_w_det(x, t, pt, n=n)
    cfg = FourPointConfig.correlation(0.0, x, t)
    mats = build_b(cfg, ensemble=pt, n=n_spectral or n, policy=policy)
    phase = np.exp(-1j * pt.thermal.h * t)
    return complex(2.0 * phase * det * mats.b[0, 3])


def _theta_op(x_lo, x_hi, kind, p, n):
    quad = build_grid((x_lo, x_hi), n)
    return DiscretizedOperator.from_kernel(
        lambda a, b: kernel_theta(a, b, kind, p).astype(complex),
        quad, 2.0 / math.pi)


def correlation_static(x1, x2, kind, p, n=64):
    """Equal-time correlator as a first Fredholm minor.

    Computed as -(1/2) * minor of (1 - (2/pi) theta-hat) over [min(x1,x2),
    max(x1,x2)], pinned at (row x2, column x1).  The sign and interval are
    fixed by matching the t -> 0 limit of the dynamical representation; see
    minor_symmetric_interval_form / minor_step_weight_form for the alternate
    printed normalizations kept for comparison.
    """
    lo, hi = min(x1, x2), max(x1, x2)
    if hi - lo < 1e-12:
        return complex(kernel_theta(x2, x1, kind, p) / math.pi)
    op = _theta_op(lo, hi, kind, p, n)
    return complex(-0.5 * fredholm_minor_first(op, x2, x1))


def minor_symmetric_interval_form(x1, x2, kind, p, n=64):
    """(1/2) * minor with the operator over [-x1, x2] (alternate path)."""
    op = _theta_op(-x1, x2, kind, p, n)
    return complex(0.5 * fredholm_minor_first(op, x2, x1))


def minor_step_weight_form(x1, x2, kind, p, n=64):
    """(1/2) * minor with the step-weighted half-line operator (alternate path).

    Kernel theta(xi, xi') * (E(x1 - xi') + E(x2 - xi')) on [0, max(x1, x2)];
    the weight is piecewise constant, so the grid is split at min(x1, x2).
    """
    lo, hi = min(x1, x2), max(x1, x2)
    if lo <= 0.0:
        quads = [build_grid((0.0, hi), n)]
    else:
        quads = [build_grid((0.0, lo), n), build_grid((lo, hi), n)]
    nodes = np.concatenate([q.nodes for q in quads])
    weights = np.concatenate([q.weights for q in quads])
    from .fredholm import Quadrature
    quad = Quadrature(nodes=nodes, weights=weights, a=0.0, b=hi)

    def wfn(z):
        return step_weight(x1, x2, z).astype(float)

    op = DiscretizedOperator.from_kernel(
        lambda a, b: kernel_theta(a, b, kind, p).astype(complex),
        quad, 2.0 / math.pi, weight_fn=wfn)
    return complex(0.5 * fredholm_minor_first(op, x2, x1))


def static_ground_K(x1, x2, kind, momentum, n=64):
    """Ground-state first-minor formula with the static sine kernel on [x1, x2].

    `momentum` is the sine frequency of the kernel.  This keeps the printed
    (1/2)*minor normalization; tests compare it against correlation_static,
    whose sign is pinned by the dynamical t -> 0 limit.
    """
    if not (0 <= x1 <= x2):
        raise InvalidGrid("need 0 <= x1 <= x2")
    if momentum <= 0:
        raise ValueError("momentum must be positive")
    if x2 - x1 < 1e-12:
        return complex(-(1.0 / math.pi) * kernel_K_static(x2, x1, kind, momentum))
    quad = build_grid((x1, x2), n)
    op = DiscretizedOperator.from_kernel(
        lambda a, b: kernel_K_static(a, b, kind, momentum).astype(complex),
        quad, 2.0 / math.pi)
    return complex(0.5 * fredholm_minor_first(op, x2, x1))
