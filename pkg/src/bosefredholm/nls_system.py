"""Four-point auxiliary fields, the M-hat operator, the matrix b = B + Q,
and the Lax compatibility check of the associated differential system."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDelta
from .fredholm import DiscretizedOperator, build_grid
from .kernels import fermi_weight
from .special_integrals import (
    FINE_POLICY,
    RegularizationPolicy,
    gaussian_fresnel,
    graded_line_grid,
    pv_fresnel_hilbert,
    pv_fresnel_hilbert_dlam,
    richardson_sequence,
)

SIGMA_PLUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)

# (P_j)_{l,m} = i * delta_{l,j} * delta_{m,j}
P_MATRICES = tuple(1j * np.outer(np.eye(4)[j], np.eye(4)[j]) for j in range(4))


@dataclass(frozen=True)
class FourPointConfig:
    """Positions y1..y4 and times t1..t4 of the two field pairs.

    coincident_sign fixes the value of sign(y_{2p} - y_{2p-1}) when a pair
    is exactly coincident (dy = dt = 0): 0 is the symmetric principal value
    (G_p = 0); +1 is the one-sided limit dy -> 0+ used by the x1 = 0
    boundary formula, where G_p = -i/2.
    """

    y: tuple
    t: tuple
    coincident_sign: int = 0

    def __post_init__(self):
        if len(self.y) != 4 or len(self.t) != 4:
            raise ValueError("need four positions and four times")

    @classmethod
    def correlation(cls, x1, x2, t):
        """Specialization describing <psi(x1,0) psi^dag(x2,t)>."""
        return cls(y=(-x1, x1, -x2, x2), t=(0.0, 0.0, t, t), coincident_sign=1)

    def shifted(self, dy=None, dt=None):
        y = tuple(a + b for a, b in zip(self.y, dy or (0.0,) * 4))
        t = tuple(a + b for a, b in zip(self.t, dt or (0.0,) * 4))
        return FourPointConfig(y=y, t=t, coincident_sign=self.coincident_sign)

    @property
    def phase_scale(self):
        return sum(abs(v) for v in self.t)


class AuxField:
    """Auxiliary data of one field pair (odd slot a, even slot b).

    Carries the closed forms of the pair's Hilbert transform G_p, its
    derivative, and the row/column phase factors of e_p^L, e_p^R.
    """

    def __init__(self, ya, ta, yb, tb, coincident_sign=0):
        self.ya, self.ta, self.yb, self.tb = ya, ta, yb, tb
        self.dy = yb - ya
        self.dt = tb - ta
        self.coincident_sign = coincident_sign

    def row_phase(self, lam):
        return np.exp(1j * self.ta * lam ** 2 - 1j * self.ya * lam)

    def col_phase(self, mu):
        return np.exp(-1j * self.tb * mu ** 2 + 1j * self.yb * mu)

    def hilbert(self, lam):
        if self.dy == 0.0 and self.dt == 0.0:
            return np.full(np.shape(lam), -0.5j * self.coincident_sign)
        return pv_fresnel_hilbert(lam, self.dy, self.dt) / (2.0 * math.pi)

    def hilbert_deriv(self, lam):
        if self.dy == 0.0 and self.dt == 0.0:
            return np.zeros(np.shape(lam), dtype=complex)
        return pv_fresnel_hilbert_dlam(lam, self.dy, self.dt) / (2.0 * math.pi)

    def hilbert_diffquot(self, lam, s):
        """(G(lam) - G(s))/(lam - s), diagonal-safe.

        G is evaluated on the broadcast inputs once per axis (cheap outer
        difference); only near-diagonal entries fall back to G'.
        """
        lam = np.asarray(lam, dtype=float)
        s = np.asarray(s, dtype=float)
        den = np.asarray(lam - s)
        num = np.asarray(self.hilbert(lam) - self.hilbert(s))
        small = np.abs(den) < 1e-7
        out = np.asarray(num / np.where(small, 1.0, den), dtype=complex)
        if np.any(small):
            mid = np.broadcast_to(0.5 * (lam + s), out.shape)[small]
            if out.ndim == 0:
                return complex(np.asarray(self.hilbert_deriv(mid)).ravel()[0])
            out[small] = np.asarray(self.hilbert_deriv(mid))
        return out

    def e_left(self, lam):
        """Row 2-vector e_p^L sampled at lam: shape (..., 2)."""
        a = self.row_phase(lam)
        return np.stack([-a, a * self.hilbert(lam)], axis=-1)

    def e_right(self, mu):
        """Column 2-vector e_p^R sampled at mu: shape (2, ...)."""
        b = (2.0 / math.pi) * self.col_phase(mu)
        return np.stack([b * self.hilbert(mu), b], axis=0)


def build_aux_fields(cfg):
    """The two AuxField objects of a configuration."""
    y, t = cfg.y, cfg.t
    cs = cfg.coincident_sign
    return (AuxField(y[0], t[0], y[1], t[1], coincident_sign=cs),
            AuxField(y[2], t[2], y[3], t[3], coincident_sign=cs))


def build_K_p(p_index, cfg, quadrature):
    """Integral operator K_p on a grid; kernel (pi/2) e_p^L(lam) e_p^R(mu)/(lam-mu).

    The scalar numerator vanishes on the diagonal; the analytic limit is
    row_phase * col_phase * G_p'.
    """
    aux = build_aux_fields(cfg)[p_index - 1]

    def kern(lam, mu):
        return aux.row_phase(lam) * aux.col_phase(mu) * aux.hilbert_diffquot(lam, mu)

    return DiscretizedOperator.from_kernel(kern, quadrature, 2.0 / math.pi)


def adapt_policy(cfg, policy):
    """Lower the damping when a Fresnel wavefront sits inside the damped
    region.

    The pair Hilbert transforms switch branches near s* = dy/(2 dt); when
    delta_min * s*^2 is not small the damping distorts the wavefront faster
    than the extrapolation can undo.  Keeps the extrapolation depth, floors
    delta_min at 5e-5 to bound the grid size.
    """
    s_star = 0.0
    for a in range(4):
        for b in range(a + 1, 4):
            dt = cfg.t[b] - cfg.t[a]
            if dt != 0.0:
                s_star = max(s_star, abs((cfg.y[b] - cfg.y[a]) / (2.0 * dt)))
    if s_star == 0.0:
        return policy
    target = max(0.01 / s_star ** 2, 5e-5)
    if policy.deltas[-1] <= target:
        return policy
    return RegularizationPolicy(damping=target * 2.0 ** (policy.extrapolation_orders - 1),
                                extrapolation_orders=policy.extrapolation_orders)


def _line_grid(cfg, policy):
    return graded_line_grid(policy.tail_cut, cfg.phase_scale)


def _damped(vals, nodes, weights, deltas):
    """Richardson-extrapolated damped contraction along the last axis."""
    estimates = []
    for d in deltas:
        estimates.append(vals @ (weights * np.exp(-d * nodes * nodes)))
    return richardson_sequence(estimates)[0]


def build_E_vectors(cfg, lam_grid, policy=FINE_POLICY, line_grid=None):
    """E^L (n x 4) and E^R (4 x n) sampled on lam_grid.

    Components 3,4 of E^L are (1 + (2/pi) K1-hat) e_2^L; components 1,2 of
    E^R are e_1^R (1 + (2/pi) K2-hat) (right action).  The whole-line
    applications use the damping policy on an oscillation-graded grid.
    """
    a1, a2 = build_aux_fields(cfg)
    if line_grid is None:
        policy = adapt_policy(cfg, policy)
        line_grid = _line_grid(cfg, policy)
    S, W = line_grid
    lam = np.asarray(lam_grid, dtype=float)
    n = len(lam)

    EL = np.zeros((n, 4), dtype=complex)
    ER = np.zeros((4, n), dtype=complex)
    EL[:, :2] = a1.e_left(lam)
    ER[2:, :] = a2.e_right(lam)

    e2Ls = a2.e_left(S)                       # (ns, 2)
    e1Rs = a1.e_right(S)                      # (2, ns)
    colS1 = a1.col_phase(S)
    rowS2 = a2.row_phase(S)
    compL = np.empty((n, 2), dtype=complex)
    compR = np.empty((2, n), dtype=complex)
    chunk = max(1, 4_000_000 // max(len(S), 1))
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        block = lam[lo:hi]
        K1 = a1.row_phase(block)[:, None] * colS1[None, :] \
            * a1.hilbert_diffquot(block[:, None], S[None, :])
        for c in range(2):
            compL[lo:hi, c] = _damped(K1 * e2Ls[:, c][None, :], S, W, policy.deltas)
        # right action: integrate over the row variable of K2
        K2 = rowS2[:, None] * a2.col_phase(block)[None, :] \
            * a2.hilbert_diffquot(S[:, None], block[None, :])
        for c in range(2):
            compR[c, lo:hi] = _damped((e1Rs[c][:, None] * K2).T, S, W, policy.deltas)
    EL[:, 2:] = a2.e_left(lam) + (2.0 / math.pi) * compL
    ER[:2, :] = a1.e_right(lam) + (2.0 / math.pi) * compR
    return EL, ER


def build_Q(cfg, policy=FINE_POLICY, strict=True, line_grid=None):
    """4x4 matrix Q: Gaussian sigma_+ blocks and the -(integral of e1R e2L) block.

    Coincident pairs (dy = dt = 0) make the sigma_+ block a delta
    distribution: DegenerateDelta when strict, entry 0 with a flag otherwise.
    """
    a1, a2 = build_aux_fields(cfg)
    if line_grid is None:
        policy = adapt_policy(cfg, policy)
    Q = np.zeros((4, 4), dtype=complex)
    degenerate = []
    for block, aux in ((0, a1), (2, a2)):
        try:
            g = gaussian_fresnel(aux.dy, aux.dt)
        except DegenerateDelta:
            if strict:
                raise
            g = 0.0
            degenerate.append((block, block + 1))
        Q[block:block + 2, block:block + 2] = -g * SIGMA_PLUS
    if line_grid is None:
        line_grid = _line_grid(cfg, policy)
    S, W = line_grid
    e1Rs = build_aux_fields(cfg)[0].e_right(S)   # (2, ns)
    e2Ls = build_aux_fields(cfg)[1].e_left(S)    # (ns, 2)
    for r in range(2):
        for c in range(2):
            Q[r, 2 + c] = -_damped((e1Rs[r] * e2Ls[:, c])[None, :], S, W, policy.deltas)[0]
    return Q, degenerate


@dataclass
class NlsMatrices:
    """Q, B and b = B + Q, with bookkeeping of degenerate Q entries."""

    Q: np.ndarray
    B: np.ndarray
    degenerate_entries: list = field(default_factory=list)

    @property
    def b(self):
        return self.B + self.Q


def _spectral_grid(ensemble, n):
    """Symmetric spectral grid and pointwise weight for the ensemble.

    T = 0: [-q, q] with unit weight; T > 0: truncated line with the Fermi
    weight.
    """
    p = ensemble.thermal
    if p.T == 0.0:
        quad = build_grid((-ensemble.q, ensemble.q), n)
        return quad, None
    cut = math.sqrt(p.h + p.T * math.log(1e14))
    quad = build_grid((-cut, cut), n)
    return quad, lambda lam: fermi_weight(lam, p)


def build_M_operator(cfg, quadrature, weight_fn=None, policy=FINE_POLICY, line_grid=None,
                     e_vectors=None):
    """M-hat on the grid: kernel -(pi/2) E^L(lam).E^R(mu)/(lam - mu).

    Off-diagonal entries contract the sampled E vectors; the diagonal is the
    analytic limit, whose integral term is evaluated with the damping policy.
    """
    a1, a2 = build_aux_fields(cfg)
    lam = quadrature.nodes
    n = len(lam)
    if line_grid is None:
        policy = adapt_policy(cfg, policy)
        line_grid = _line_grid(cfg, policy)
    S, W = line_grid
    if e_vectors is None:
        EL, ER = build_E_vectors(cfg, lam, policy=policy, line_grid=line_grid)
    else:
        EL, ER = e_vectors
    num = EL @ ER
    diff = lam[:, None] - lam[None, :]
    mat = np.zeros((n, n), dtype=complex)
    off = ~np.eye(n, dtype=bool)
    mat[off] = -(math.pi / 2.0) * num[off] / diff[off]
    # diagonal: -A1 B1 G1' - A2 B2 G2' - (2/pi) * cross integral
    cross = np.empty(n, dtype=complex)
    mids = a1.col_phase(S) * a2.row_phase(S)
    chunk = max(1, 4_000_000 // max(len(S), 1))
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        block = lam[lo:hi]
        integ = (a1.row_phase(block)[:, None] * a2.col_phase(block)[:, None]
                 * mids[None, :]
                 * a1.hilbert_diffquot(block[:, None], S[None, :])
                 * a2.hilbert_diffquot(S[None, :], block[:, None]))
        cross[lo:hi] = _damped(integ, S, W, policy.deltas)
    diag = (-a1.row_phase(lam) * a1.col_phase(lam) * a1.hilbert_deriv(lam)
            - a2.row_phase(lam) * a2.col_phase(lam) * a2.hilbert_deriv(lam)
            - (2.0 / math.pi) * cross)
    mat[np.arange(n), np.arange(n)] = diag
    return DiscretizedOperator(quadrature=quadrature, matrix=mat, scale=2.0 / math.pi,
                               weight_fn=weight_fn)


def build_b(cfg, ensemble, n=32, policy=FINE_POLICY, line_grid=None):
    """b = B + Q with B_{jk} = integral of F_j^R E_k^L over the spectral domain.

    F^R solves the transposed resolvent system F^R (1 - (2/pi) M-hat) = E^R.
    """
    quad, weight_fn = _spectral_grid(ensemble, n)
    if line_grid is None:
        policy = adapt_policy(cfg, policy)
        line_grid = _line_grid(cfg, policy)
    EL, ER = build_E_vectors(cfg, quad.nodes, policy=policy, line_grid=line_grid)
    op = build_M_operator(cfg, quad, weight_fn=weight_fn, policy=policy,
                          line_grid=line_grid, e_vectors=(EL, ER))
    w = op.effective_weights()
    amat = np.eye(n) - op.scale * (op.matrix.T * w[None, :])
    FR = np.linalg.solve(amat, ER.T).T          # (4, n)
    B = np.einsum('i,ji,ik->jk', w, FR, EL)
    Q, degenerate = build_Q(cfg, policy=policy, strict=False, line_grid=line_grid)
    return NlsMatrices(Q=Q, B=B, degenerate_entries=degenerate)


@dataclass
class LaxPair:
    """L_j(mu) = mu P_j + [b, P_j] and M_j(mu) = -mu L_j(mu) + db/dy_j."""

    b: np.ndarray
    db_dy: np.ndarray   # (4, 4, 4): derivative index first

    def L(self, j, mu):
        return mu * P_MATRICES[j] + _comm(self.b, P_MATRICES[j])

    def M(self, j, mu):
        return -mu * self.L(j, mu) + self.db_dy[j]


def _comm(a, b):
    return a @ b - b @ a


def lax_compatibility_residual(cfg, ensemble, step, n=24, policy=None,
                               mus=(0.37, 1.1), line_grid=None):
    """Max-norm residuals of d_{t_j} L_k - d_{y_k} M_j + [L_k, M_j] = 0.

    Derivatives of b are three-point central differences with the given
    step; all stencil evaluations share one line grid so the quadrature
    bias differentiates smoothly.  Returns a (4, 4) array of per-(j,k)
    residual norms, maximized over mu values.
    """
    policy = policy or FINE_POLICY
    if line_grid is None:
        line_grid = _line_grid(cfg, policy)

    def bb(dy=None, dt=None):
        c = cfg.shifted(dy=dy, dt=dt)
        return build_b(c, ensemble, n=n, policy=policy, line_grid=line_grid).b

    b0 = bb()
    bp, bm = {}, {}
    db_dy = np.zeros((4, 4, 4), dtype=complex)
    db_dt = np.zeros((4, 4, 4), dtype=complex)
    for j in range(4):
        ey = [0.0] * 4
        ey[j] = step
        bp[j] = bb(dy=tuple(ey))
        bm[j] = bb(dy=tuple(-v for v in ey))
        db_dy[j] = (bp[j] - bm[j]) / (2.0 * step)
        et = [0.0] * 4
        et[j] = step
        db_dt[j] = (bb(dt=tuple(et)) - bb(dt=tuple(-v for v in et))) / (2.0 * step)
    d2b = np.zeros((4, 4, 4, 4), dtype=complex)
    for j in range(4):
        for k in range(j, 4):
            if j == k:
                d2b[j][j] = (bp[j] - 2.0 * b0 + bm[j]) / step ** 2
            else:
                ej = np.zeros(4)
                ej[j] = step
                ek = np.zeros(4)
                ek[k] = step
                val = (bb(dy=tuple(ej + ek)) - bb(dy=tuple(ej - ek))
                       - bb(dy=tuple(ek - ej)) + bb(dy=tuple(-ej - ek))) / (4.0 * step ** 2)
                d2b[j][k] = val
                d2b[k][j] = val
    pair = LaxPair(b=b0, db_dy=db_dy)
    res = np.zeros((4, 4))
    for j in range(4):
        for k in range(4):
            for mu in mus:
                r = (_comm(db_dt[j], P_MATRICES[k]) + mu * _comm(db_dy[k], P_MATRICES[j])
                     - d2b[j][k] + _comm(pair.L(k, mu), pair.M(j, mu)))
                res[j, k] = max(res[j, k], float(np.max(np.abs(r))))
    return res
