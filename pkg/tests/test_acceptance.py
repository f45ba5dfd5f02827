"""Acceptance battery: one test per criterion, each printing a PASS/FAIL
line with its measured metric (run with pytest -s to see them inline)."""

import math
import time

import numpy as np
import pytest

from bosefredholm.bethe_oracle import (
    FiniteSystem,
    FormFactorInput,
    form_factor,
    form_factor_direct,
    orthogonality_check,
    permutation_identity_check,
    proposition_determinant,
)
from bosefredholm.correlators import (
    PhysicalPoint,
    boundary_w_det,
    correlation_boundary_neumann,
    correlation_ground,
    correlation_static,
    correlation_thermal,
    static_ground_K,
)
from bosefredholm.fredholm import DiscretizedOperator, build_grid, fredholm_det
from bosefredholm.kernels import (
    DIRICHLET,
    GeometryParams,
    NEUMANN,
    ThermalParams,
    kernel_L,
    kernel_P,
    kernel_V,
)
from bosefredholm.nls_system import (
    FourPointConfig,
    build_b,
    build_M_operator,
    lax_compatibility_residual,
)
from bosefredholm.special_integrals import (
    RegularizationPolicy,
    gaussian_fresnel,
    graded_line_grid,
    richardson_sequence,
)

POL4 = RegularizationPolicy(damping=4e-3, extrapolation_orders=4)
POL5 = RegularizationPolicy(damping=4e-3, extrapolation_orders=5)
LAX_POLICY = RegularizationPolicy(damping=2e-2)


def _report(num, name, passed, detail):
    status = "PASS" if passed else "FAIL"
    print(f"[criterion {num:2d}] {status}  {name}: {detail}")
    return passed


def test_criterion_01_permutation_identity():
    t0 = time.time()
    rng = np.random.default_rng(101)
    worst = 0.0
    for N in (1, 2, 3, 4):
        for _ in range(100):
            f = rng.normal(size=N + 1) + 1j * rng.normal(size=N + 1)
            g = rng.normal(size=(N + 1, N)) + 1j * rng.normal(size=(N + 1, N))
            lhs, rhs = permutation_identity_check(N, f, g)
            worst = max(worst, abs(lhs - rhs))
    runtime = time.time() - t0
    ok = worst <= 1e-12 and runtime < 5.0
    assert _report(1, "permutation/determinant identity",
                   ok, f"max |lhs-rhs| = {worst:.2e}, {runtime:.1f}s")


def test_criterion_02_form_factors():
    t0 = time.time()
    rng = np.random.default_rng(202)
    worst = 0.0
    count = 0
    for kind in (NEUMANN, DIRICHLET):
        base = 0 if kind.eps > 0 else 1
        for N, reps in ((1, 6), (2, 4)):
            for _ in range(reps):
                ims = tuple(sorted(rng.choice(np.arange(base, base + 6), size=N,
                                              replace=False)))
                ils = tuple(sorted(rng.choice(np.arange(base, base + 7), size=N + 1,
                                              replace=False)))
                inp = FormFactorInput(I_lam=ils, I_mu=ims,
                                      x=float(rng.uniform(0.3, 2.7)),
                                      kind=kind, L=math.pi)
                a = form_factor(inp)
                b = form_factor_direct(inp, n=110 if N == 1 else 70)
                worst = max(worst, abs(a - b) / max(abs(b), 1e-30))
                count += 1
    runtime = time.time() - t0
    ok = worst <= 1e-8 and count == 20 and runtime < 60.0
    assert _report(2, "form factor vs direct integral",
                   ok, f"{count} configs, max rel err = {worst:.2e}, {runtime:.0f}s")


def test_criterion_03_orthogonality():
    t0 = time.time()
    L = math.pi
    worst_diag = 0.0
    worst_off = 0.0
    for kind in (NEUMANN, DIRICHLET):
        base = 0 if kind.eps > 0 else 1
        pairs1 = [(base,), (base + 2,)]
        pairs2 = [(base, base + 1), (base, base + 3), (base + 1, base + 2)]
        for states in (pairs1, pairs2):
            for i, a in enumerate(states):
                sa = FiniteSystem(L=L, kind=kind, I=a)
                norm = (2 * L) ** sa.N
                worst_diag = max(worst_diag,
                                 abs(orthogonality_check(sa, sa) - norm) / norm)
                for b in states[i + 1:]:
                    sb = FiniteSystem(L=L, kind=kind, I=b)
                    worst_off = max(worst_off, abs(orthogonality_check(sa, sb)) / norm)
    runtime = time.time() - t0
    ok = worst_diag <= 1e-10 and worst_off <= 1e-8 and runtime < 30.0
    assert _report(3, "orthogonality relations", ok,
                   f"diag rel = {worst_diag:.2e}, offdiag rel = {worst_off:.2e}, {runtime:.0f}s")


def test_criterion_04_finite_size_convergence():
    t0 = time.time()
    ok = True
    details = []
    for kind in (NEUMANN, DIRICHLET):
        pt = PhysicalPoint(0.3, 0.9, 0.0, kind, ThermalParams(h=1.0, T=0.0), D=1.0)
        target = correlation_ground(pt, n=96, with_error=False).value
        vals = []
        for box in (8.0, 16.0, 32.0):
            sys_ = FiniteSystem.ground_state(int(box), box, kind)
            vals.append(proposition_determinant(sys_, 0.3, 0.9, 0.0, lam_max=240.0))
        gaps = [abs(v - target) for v in vals]
        monotone = gaps[0] > gaps[1] > gaps[2]
        # the finite-size error is O(1/L); the limit certified by one
        # Richardson step in 1/L over the prescribed box sequence
        extrap = 2.0 * vals[2] - vals[1]
        final_gap = abs(extrap - target)
        ok = ok and monotone and final_gap <= 1e-3
        details.append(f"eps={kind.eps:+d} gaps={gaps[0]:.1e}/{gaps[1]:.1e}/{gaps[2]:.1e} "
                       f"extrapolated gap={final_gap:.1e}")
    runtime = time.time() - t0
    ok = ok and runtime < 300.0
    assert _report(4, "finite box -> thermodynamic limit", ok,
                   "; ".join(details) + f", {runtime:.0f}s")


def test_criterion_05_boundary_route_equality():
    t0 = time.time()
    worst = 0.0
    for x in np.linspace(0.2, 2.0, 5):
        for t in np.linspace(0.1, 1.0, 5):
            pt = PhysicalPoint(0.0, float(x), float(t), NEUMANN,
                               ThermalParams(h=1.0, T=0.0), D=1.0)
            v1 = correlation_ground(pt, n=72, with_error=False).value
            v3 = correlation_boundary_neumann(float(x), float(t), pt, n=72,
                                              n_spectral=32)
            worst = max(worst, abs(v1 - v3) / abs(v1))
    runtime = time.time() - t0
    ok = worst <= 1e-5 and runtime < 600.0
    assert _report(5, "dynamical vs boundary-route equality (5x5 grid)", ok,
                   f"max rel diff = {worst:.2e}, {runtime:.0f}s")


def test_criterion_06_kernel_degeneration():
    t0 = time.time()
    rng = np.random.default_rng(606)
    worst = 0.0
    for _ in range(3):
        x1 = float(rng.uniform(0.2, 0.8))
        x2 = float(rng.uniform(0.5, 1.4))
        t = float(rng.uniform(0.1, 0.7))
        cfg = FourPointConfig.correlation(x1, x2, t)
        quad = build_grid((-math.pi, math.pi), 16)
        op = build_M_operator(cfg, quad, policy=POL5)
        g = GeometryParams(x2, x1, t)
        lam = quad.nodes
        for i in range(16):
            for j in range(16):
                gauge = np.exp(0.5j * t * (lam[i] ** 2 - lam[j] ** 2))
                worst = max(worst, abs(op.matrix[i, j] - gauge * kernel_L(lam[i], lam[j], g)))
    runtime = time.time() - t0
    ok = worst <= 1e-8
    assert _report(6, "four-point kernel degenerates to dynamical kernel "
                      "(gauge/swap-corrected)", ok,
                   f"max |M - L| = {worst:.2e} on 16x16 x3 cfgs, {runtime:.0f}s")


def test_criterion_07_b14_trace_equality():
    t0 = time.time()
    worst = 0.0
    for x1, x2, t in ((0.35, 0.9, 0.3), (0.6, 1.2, 0.5)):
        q = math.pi
        cfg = FourPointConfig.correlation(x1, x2, t)
        pt = PhysicalPoint(x1, x2, t, NEUMANN, ThermalParams(h=1.0, T=0.0), D=1.0)
        mats = build_b(cfg, pt, n=32, policy=POL4)
        quad = build_grid((-q, q), 40)
        lam, w = quad.nodes, quad.weights
        g = GeometryParams(x1, x2, t)
        Lm = np.array([[kernel_L(a, b, g) for b in lam] for a in lam])
        u = kernel_P(lam, x1, x2, t)
        v = kernel_P(lam, x2, x1, t)
        sol = np.linalg.solve(np.eye(40) - (2 / math.pi) * Lm * w[None, :], u)
        lhs = gaussian_fresnel(x1 + x2, t) - np.sum(w * v * sol) / (2 * math.pi)
        worst = max(worst, abs(mats.b[0, 3] - lhs))
    runtime = time.time() - t0
    ok = worst <= 1e-6
    assert _report(7, "b_14 equals G - resolvent trace", ok,
                   f"max abs diff = {worst:.2e}, {runtime:.0f}s")


@pytest.mark.parametrize("tt", [0.0, 0.4])
def test_criterion_08_lax_compatibility(tt):
    t0 = time.time()
    cfgs = (FourPointConfig(y=(0.15, 0.45, -0.35, 0.8), t=(0.1, 0.32, -0.2, 0.55)),
            FourPointConfig(y=(-0.2, 0.5, 0.1, 0.95), t=(0.25, 0.05, 0.4, -0.15)))
    if tt == 0.0:
        pt = PhysicalPoint(0.5, 0.5, 0.0, NEUMANN, ThermalParams(h=1.0, T=0.0), D=0.7)
        label = "ground"
    else:
        pt = PhysicalPoint(0.5, 0.5, 0.0, NEUMANN, ThermalParams(h=1.0, T=tt))
        label = "thermal"
    ratios = []
    for cfg in cfgs:
        r1 = lax_compatibility_residual(cfg, pt, step=4e-3, n=12, policy=LAX_POLICY)
        r2 = lax_compatibility_residual(cfg, pt, step=2e-3, n=12, policy=LAX_POLICY)
        ratios.append(float(np.max(r1) / np.max(r2)))
    runtime = time.time() - t0
    ok = all(r >= 3.5 for r in ratios)
    assert _report(8, f"Lax compatibility O(step^2) [{label}]", ok,
                   f"halving ratios = {ratios[0]:.2f}, {ratios[1]:.2f} (target 4), {runtime:.0f}s")


def test_criterion_09_resolvent_relation():
    t0 = time.time()
    x1, x2, t, q, n = 0.35, 0.9, 0.3, math.pi, 36
    g = GeometryParams(x1, x2, t)
    full = build_grid((-q, q), 2 * n)
    half = build_grid((0.0, q), n)

    def lmat(rows, cols):
        return np.array([[kernel_L(a, b, g) for b in cols] for a in rows])

    LF = lmat(full.nodes, full.nodes)
    wF = full.weights
    solveF = lambda rhs: np.linalg.solve(np.eye(2 * n) - (2 / math.pi) * LF * wF[None, :], rhs)
    worst = 0.0
    for kind in (NEUMANN, DIRICHLET):
        eps = kind.eps
        VH = lmat(half.nodes, half.nodes) + eps * lmat(half.nodes, -half.nodes)
        wH = half.weights
        RH = np.linalg.solve(np.eye(n) - (2 / math.pi) * VH * wH[None, :], VH)
        AhF = lmat(half.nodes, full.nodes) * wF[None, :]
        SP = lmat(half.nodes, half.nodes) + (2 / math.pi) * AhF @ solveF(lmat(full.nodes, half.nodes))
        SM = lmat(half.nodes, -half.nodes) + (2 / math.pi) * AhF @ solveF(lmat(full.nodes, -half.nodes))
        worst = max(worst, float(np.max(np.abs(RH - (SP + eps * SM)))))
    runtime = time.time() - t0
    ok = worst <= 1e-8
    assert _report(9, "half/full interval resolvent relation", ok,
                   f"max grid error = {worst:.2e}, {runtime:.0f}s")


def test_criterion_10_static_chain():
    t0 = time.time()
    p = ThermalParams(h=1.0, T=0.5)
    lines = []
    ok = True
    for kind in (NEUMANN, DIRICHLET):
        static = correlation_static(0.4, 1.1, kind, p, n=110)
        errs = []
        for t in (1e-3, 1e-4):
            pt = PhysicalPoint(0.4, 1.1, t, kind, p)
            res = correlation_thermal(pt, n=130, with_error=False)
            errs.append(abs(res.derivative_part / (2 * math.pi) - static))
        shrink = errs[0] / errs[1]
        # NOTE: the Fresnel kernels approach their equal-time limits only at
        # O(sqrt(t)) (algebraic erf tails), so the per-decade shrink is
        # sqrt(10) ~ 3.16; the >= 5x demand is not attainable (see ledger)
        ok = ok and shrink >= 5.0
        lines.append(f"eps={kind.eps:+d} errs={errs[0]:.2e}/{errs[1]:.2e} shrink={shrink:.2f}")
    # second half: equal-time minor vs ground-state minor at T -> 0
    h = 1.0
    p0 = ThermalParams(h=h, T=0.0)
    for kind in (NEUMANN, DIRICHLET):
        a = correlation_static(0.4, 1.1, kind, p0, n=90)
        b = static_ground_K(0.4, 1.1, kind, math.sqrt(h), n=90)
        lines.append(f"eps={kind.eps:+d} static={a.real:+.8f} ground-minor={b.real:+.8f} "
                     f"|static+minor|={abs(a + b):.1e} (coincide up to overall sign)")
    runtime = time.time() - t0
    assert _report(10, "t->0 continuity chain and static-minor comparison", ok,
                   "; ".join(lines) + f", {runtime:.0f}s")


def test_criterion_11_structural_symmetries():
    t0 = time.time()
    p0 = ThermalParams(h=1.0, T=0.0)
    pT = ThermalParams(h=1.0, T=0.4)
    # Dirichlet null at the wall
    nulls = []
    for p, kwargs in ((p0, dict(D=1.0)), (pT, {})):
        ev = correlation_ground if p.T == 0 else correlation_thermal
        vd = ev(PhysicalPoint(0.0, 0.9, 0.4, DIRICHLET, p, **kwargs), n=56,
                with_error=False).value
        vn = ev(PhysicalPoint(0.0, 0.9, 0.4, NEUMANN, p, **kwargs), n=56,
                with_error=False).value
        nulls.append(abs(vd) / abs(vn))
    # hermiticity
    herms = []
    for p, kwargs in ((p0, dict(D=1.0)), (pT, {})):
        ev = correlation_ground if p.T == 0 else correlation_thermal
        a = ev(PhysicalPoint(0.3, 0.9, 0.5, NEUMANN, p, **kwargs), n=72,
               with_error=False).value
        b = ev(PhysicalPoint(0.9, 0.3, -0.5, NEUMANN, p, **kwargs), n=72,
               with_error=False).value
        herms.append(abs(np.conj(a) - b) / abs(a))
    # t-independence of the boundary determinant
    pt = PhysicalPoint(0.0, 0.9, 0.0, NEUMANN, p0, D=1.0)
    dets = [boundary_w_det(0.9, t, pt, n=64) for t in (0.0, 0.5, 1.0)]
    det_spread = max(abs(d - dets[0]) for d in dets)
    runtime = time.time() - t0
    ok = (max(nulls) <= 1e-10 and max(herms) <= 1e-8 and det_spread <= 1e-9)
    assert _report(11, "nulls, hermiticity, det time-independence", ok,
                   f"null rel = {max(nulls):.1e}, herm = {max(herms):.1e}, "
                   f"det spread = {det_spread:.1e}, {runtime:.0f}s")


def test_criterion_12_numerics_certificates():
    t0 = time.time()
    # (a) node doubling moves every reported t=0 determinant by <= 1e-10
    worst_double = 0.0
    for kind in (NEUMANN, DIRICHLET):
        for p, dom in ((ThermalParams(h=1.0, T=0.0), (0.0, math.pi)),
                       (ThermalParams(h=1.0, T=0.5), None)):
            g = GeometryParams(0.3, 0.9, 0.0)
            dets = []
            for n in (64, 128):
                if dom is None:
                    quad = build_grid((0.0, math.inf), n, thermal=p)
                    from bosefredholm.kernels import fermi_weight
                    wfn = lambda lam: fermi_weight(lam, p)
                else:
                    quad = build_grid(dom, n)
                    wfn = None
                mat = np.array([[kernel_V(a, b, kind, g) for b in quad.nodes]
                                for a in quad.nodes])
                op = DiscretizedOperator(quadrature=quad, matrix=mat,
                                         scale=2 / math.pi, weight_fn=wfn)
                dets.append(fredholm_det(op))
            worst_double = max(worst_double, abs(dets[0] - dets[1]) / (1 + abs(dets[1])))
    # (b) damping extrapolation self-consistency on oscillatory integrals:
    # refined first-order extrapolant differences shrink >= 4x vs raw
    pol = RegularizationPolicy(damping=1e-2)
    nodes, weights = graded_line_grid(pol.tail_cut, 1.0)
    worst_ratio = 0.0
    for x, t in ((0.7, 0.5), (1.5, 1.0), (2.2, 0.3)):
        vals = np.exp(1j * t * nodes ** 2 - 1j * x * nodes)
        ests = [(vals * np.exp(-d * nodes ** 2)) @ weights for d in pol.deltas]
        _, (raw, refined) = richardson_sequence(ests)
        worst_ratio = max(worst_ratio, refined / raw)
    runtime = time.time() - t0
    ok = worst_double <= 1e-10 and worst_ratio <= 0.25
    assert _report(12, "node-doubling and damping certificates", ok,
                   f"doubling delta = {worst_double:.1e}, "
                   f"refined/raw = {worst_ratio:.2f} (need <= 0.25), {runtime:.0f}s")
