import math

import numpy as np
import pytest

from bosefredholm.errors import DegenerateDelta, InvalidIntegrand
from bosefredholm.special_integrals import (
    DEFAULT_POLICY,
    RegularizationPolicy,
    damped_line_integral,
    gaussian_fresnel,
    pv_fresnel_hilbert,
    pv_quadrature,
    regularized_lattice_sum,
    richardson_sequence,
    tau,
)

ORACLE_POLICY = RegularizationPolicy(damping=1e-2, extrapolation_orders=5)


def test_tau_examples():
    assert tau(0.0, 5.0, 3.0) == 0.0
    assert tau(1.0, 0.0, 1.0) == 1j
    assert tau(2.0, 3.0, 0.5) == -4j


def test_gaussian_fresnel_t_zero():
    assert gaussian_fresnel(2.5, 0.0) == 0.0
    with pytest.raises(DegenerateDelta):
        gaussian_fresnel(0.0, 0.0)


def test_gaussian_fresnel_x0():
    # (1/2pi) sqrt(pi) e^{i pi/4} at x=0, t=1
    expected = math.sqrt(math.pi) / (2 * math.pi) * np.exp(1j * math.pi / 4)
    assert abs(gaussian_fresnel(0.0, 1.0) - expected) < 1e-15


def test_gaussian_fresnel_modulus_x_independent():
    vals = [abs(gaussian_fresnel(x, 1.0)) for x in (0.0, 0.7, 2.0, 5.0)]
    assert max(vals) - min(vals) < 1e-15


def test_gaussian_fresnel_vs_damped_quadrature_lattice():
    # |closed - damped| <= 1e-8 (1 + |G|) on a lattice of >= 100 points
    rng = np.random.default_rng(0)
    xs = rng.uniform(0.0, 3.0, size=10)
    ts = np.concatenate([rng.uniform(0.3, 1.5, size=5), -rng.uniform(0.3, 1.5, size=5)])
    checked = 0
    for x in xs:
        for t in ts:
            closed = gaussian_fresnel(x, t)
            damped = damped_line_integral(
                lambda s: np.exp(1j * t * s * s - 1j * x * s) / (2 * math.pi),
                ORACLE_POLICY, phase_scale=abs(t))
            assert abs(closed - damped) <= 1e-8 * (1 + abs(closed)), (x, t)
            checked += 1
    assert checked >= 100


def test_pv_hilbert_trivial_values():
    assert pv_fresnel_hilbert(0.7, 0.0, 0.0) == 0.0
    assert abs(pv_fresnel_hilbert(0.0, 0.0, 1.0)) == 0.0
    expected = -1j * math.pi * np.exp(-2j)
    assert abs(pv_fresnel_hilbert(1.0, 2.0, 0.0) - expected) < 1e-14


def test_pv_hilbert_conjugation():
    rng = np.random.default_rng(1)
    for _ in range(40):
        lam, y, t = rng.uniform(-2.5, 2.5, size=3)
        a = np.conj(pv_fresnel_hilbert(lam, y, t))
        b = pv_fresnel_hilbert(lam, -y, -t)
        assert abs(a - b) < 1e-10


def test_pv_hilbert_vs_quadrature_oracle():
    # damped PV quadrature with the window sized to the smallest damping,
    # panels resolving the quadratic phase, Richardson over three deltas
    for lam, y, t in ((0.7, 0.4, 1.0), (-1.2, 0.8, -0.5), (0.3, -2.2, 0.9)):
        deltas = (1e-2, 5e-3, 2.5e-3)
        window = math.sqrt(40.0 / deltas[-1]) + abs(lam)
        n_panels = int(window * (2 * abs(t) * window + abs(y) + 2) / 3.0)
        vals = [pv_quadrature(
            lambda s, dd=dd: np.exp(1j * t * s * s - 1j * y * s - dd * s * s),
            lam, window=window, n_panels=n_panels) for dd in deltas]
        orc, _ = richardson_sequence(vals)
        closed = pv_fresnel_hilbert(lam, y, t)
        assert abs(closed - orc) < 5e-6 * (1 + abs(closed)), (lam, y, t)


def test_pv_quadrature_trivial():
    # constant integrand: symmetric PV vanishes
    assert abs(pv_quadrature(lambda s: np.ones_like(s, dtype=complex), 0.4, window=10.0)) < 1e-12
    # even Gaussian at lam=0: odd integrand
    assert abs(pv_quadrature(lambda s: np.exp(-s * s), 0.0, window=12.0)) < 1e-12


def test_pv_quadrature_window_stability():
    val1 = pv_quadrature(lambda s: np.exp(-s * s), 1.0, window=12.0)
    val2 = pv_quadrature(lambda s: np.exp(-s * s), 1.0, window=24.0)
    assert abs(val1 - val2) < 1e-10


def test_pv_quadrature_erf_identity():
    # PV int e^{-s^2}/(s-1) ds = -pi * e^{-1} * erfi(1)
    from scipy.special import erfi
    val = pv_quadrature(lambda s: np.exp(-s * s), 1.0, window=14.0, n_panels=2000)
    expected = -math.pi * math.exp(-1.0) * erfi(1.0)
    assert abs(val - expected) < 1e-10


def test_pv_quadrature_invalid_integrand():
    with np.errstate(divide="ignore"):
        with pytest.raises(InvalidIntegrand):
            pv_quadrature(lambda s: 1.0 / (s - 1.0), 1.0)


def test_lattice_sum_zero_and_theta():
    assert regularized_lattice_sum(lambda s: np.zeros_like(s), math.pi) == 0.0
    # L=pi lattice is the integers: sum of exp(-n^2) = Jacobi theta3(e^{-1});
    # deep extrapolation removes the damping bias
    val = regularized_lattice_sum(lambda s: np.exp(-s * s), math.pi,
                                  policy=ORACLE_POLICY)
    expected = sum(math.exp(-n * n) for n in range(-40, 41))
    assert abs(val - expected) < 1e-10


def test_lattice_sum_matches_gaussian_fresnel():
    # (pi/L) sum over the lattice of e^{i s^2 - delta s^2} carries Poisson
    # images e^{-(2 L m)^2 delta/(4(delta^2+1))}; for the integral limit the
    # damping must stay above ~30/(2L)^2, so use a single coarse delta with
    # a small box and first-order extrapolation
    pol = RegularizationPolicy(damping=0.05, extrapolation_orders=3)
    val = regularized_lattice_sum(lambda s: np.exp(1j * s * s), 60.0,
                                  policy=pol, check=False)
    expected = 2 * math.pi * gaussian_fresnel(0.0, 1.0)
    assert abs(val - expected) < 1e-4 * abs(expected)
    # decaying oscillatory summands (entry-like sinc products, nonzero
    # frequencies): the regularized sum reproduces the direct convergent one
    def g(s):
        return (np.sin(0.9 * (s - 0.3)) / (s - 0.3)
                * np.sin(0.4 * (s - 1.1)) / (s - 1.1))
    n = np.arange(-200000, 200001)
    sn = n * math.pi / 8.0 + 1e-5
    direct = (math.pi / 8.0) * float(np.sum(g(sn)))
    # the 1/s^2 oscillatory tail leaves a small log-linear damping bias
    reg = regularized_lattice_sum(
        lambda s: g(s + 1e-5),
        8.0, policy=RegularizationPolicy(damping=1e-2, extrapolation_orders=3))
    assert abs(reg - direct) < 2e-5


def test_richardson_consistency_shrinks():
    # successive first-order extrapolants tighten at least 4x vs raw diffs,
    # for an oscillatory decaying summand of the kind the entries use
    policy = DEFAULT_POLICY

    def g(s):
        return (np.exp(1j * 0.5 * s * s) * np.sin(0.9 * (s - 0.4))
                * np.sin(0.3 * (s - 1.2)) / ((s - 0.4) * (s - 1.2)))

    h = math.pi / 25.0
    n_max = int(policy.tail_cut / h)
    s = h * np.arange(-n_max, n_max + 1) + 1e-4
    vals = np.asarray(g(s))
    estimates = [h * (vals @ np.exp(-d * s * s)) for d in policy.deltas]
    _, (raw, refined) = richardson_sequence(estimates)
    assert refined <= raw / 4.0


def test_policy_validation():
    with pytest.raises(ValueError):
        RegularizationPolicy(damping=-1.0)
    with pytest.raises(ValueError):
        RegularizationPolicy(extrapolation_orders=0)
    pol = RegularizationPolicy(damping=4e-3)
    assert pol.deltas == (4e-3, 2e-3, 1e-3)
    assert pol.tail_cut == pytest.approx(math.sqrt(40.0 / 1e-3))
