"""Brute-force checks of the closed forms in :mod:`compop.engine`.

Compression norms on the invariant truncations ``V_N`` only ever bound the
true norm from below, so each estimate records its bound direction.  The
shift and diagonal sequence models stand in for infinite-dimensional
symbols; the shift is used only inside the window where the truncation
behaves exactly like the infinite shift.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .engine import AffineSymbol, _defect, _defect_range, aluthge_symbol, polar_of_compop
from .errors import (
    MCVarianceTooHighError,
    NotPSDError,
    NotWellDefinedError,
    PhiZeroAtOriginError,
    TruncationTooSmallError,
)
from .fock import compose_matrix, kernel_gram, monomial_images, rkhs_lower_bound, sym_power_matrix
from .phi import make_phi

LOWER, UPPER, TWO_SIDED = "LOWER", "UPPER", "TWO_SIDED"
CONVERGENCE_RTOL = 1e-4


@dataclass(frozen=True)
class OracleEstimate:
    values: list
    bound_kind: str
    converged: bool
    final: float
    meta: dict = field(default_factory=dict)

    def rows(self):
        """``(N, value, bound_kind, converged)`` rows for CSV export."""
        return [(n, v, self.bound_kind, self.converged) for n, v in enumerate(self.values)]


def _converged(values, rtol=CONVERGENCE_RTOL):
    if len(values) < 3:
        return False
    last = values[-1]
    scale = max(abs(last), 1e-300)
    return abs(values[-1] - values[-2]) < rtol * scale and abs(values[-2] - values[-3]) < rtol * scale


def compression_norm_curve(phi, A, b=None, N_max=10):
    """Spectral norms of ``C_{A+b}`` restricted to ``V_N`` for ``N = 0..N_max``."""
    comp = compose_matrix(phi, A, b, N_max)
    values = []
    for N in range(N_max + 1):
        block = comp.leading(N).matrix
        values.append(la.opnorm(block) if block.size else 0.0)
    return OracleEstimate(values, LOWER, _converged(values), values[-1])


def compression_spectral_radius(phi, A, N):
    """Largest eigenvalue modulus of ``C_A`` on ``V_N`` (``b = 0``)."""
    M = compose_matrix(phi, A, None, N).matrix
    return float(np.max(np.abs(np.linalg.eigvals(M)))) if M.size else 0.0


def symmetric_tensor_power(A, n):
    """``A^{(x) n}`` restricted to symmetric tensors, in an orthonormal basis.

    Built from Kronecker powers and the averaging projector over all
    permutations of the tensor factors; independent of the polynomial model.
    """
    A = la.as_matrix(A)
    d = A.shape[0]
    if n == 0:
        return np.eye(1, dtype=complex)
    big = A
    for _ in range(n - 1):
        big = np.kron(big, A)
    dim = d**n
    sym = np.zeros((dim, dim))
    grid = np.array(list(itertools.product(range(d), repeat=n)))
    weights = d ** np.arange(n - 1, -1, -1)
    perms = list(itertools.permutations(range(n)))
    src = grid @ weights
    for perm in perms:
        sym[grid[:, perm] @ weights, src] += 1.0
    sym /= len(perms)
    w, Q = np.linalg.eigh(sym)
    basis = Q[:, w > 0.5]
    return basis.conj().T @ big @ basis


def _sv(M):
    return np.linalg.svd(M, compute_uv=False)


def block_identity_check(kind, phi, A, params=None, N=6):
    """Largest residual of an operator identity across degree blocks of ``V_N``.

    ``kind`` is one of ``adjoint`` (``C_A* = C_{A*}``), ``polar``
    (``|C_A| = C_{|A*|}`` and ``C_A = C_U C_{|A*|}``), ``power``
    (``C_A^t = C_{A^t}``, ``A >= 0``), ``aluthge``
    (``Delta_{s,t}(C_A) = C_{Delta_{s,t}(A*)}*``) or ``fock_equiv`` (singular
    values of the degree-``n`` block against ``A^{(sym) n}``).
    """
    params = params or {}
    A = la.as_matrix(A)
    Ah = A.conj().T
    MA = compose_matrix(phi, A, None, N)
    degrees = MA.basis.degrees
    worst = 0.0
    if kind == "adjoint":
        MH = compose_matrix(phi, Ah, None, N)
        for n in degrees:
            worst = max(worst, la.opnorm(MA.block(n).conj().T - MH.block(n)))
    elif kind == "polar":
        U, P = polar_of_compop(phi, A)
        MU = compose_matrix(phi, U, None, N)
        MP = compose_matrix(phi, P, None, N)
        for n in degrees:
            B = MA.block(n)
            worst = max(worst, la.opnorm(la.modulus(B) - MP.block(n)))
            worst = max(worst, la.opnorm(B - MU.block(n) @ MP.block(n)))
    elif kind == "power":
        t = params.get("t", 0.5)
        if not la.is_psd(A):
            raise NotPSDError("power identity needs A >= 0")
        Mt = compose_matrix(phi, la.psd_power(A, t), None, N)
        for n in degrees:
            worst = max(worst, la.opnorm(la.psd_power(MA.block(n), t) - Mt.block(n)))
    elif kind == "aluthge":
        s, t = params.get("s", 0.5), params.get("t", 0.5)
        symbol, _ = aluthge_symbol(phi, A, s, t)
        MD = compose_matrix(phi, symbol, None, N)
        for n in degrees:
            worst = max(worst, la.opnorm(la.aluthge(MA.block(n), s, t) - MD.block(n).conj().T))
    elif kind == "fock_equiv":
        d = A.shape[0]
        for n in degrees:
            if n == 0:
                continue
            lhs = _sv(MA.block(n))
            worst = max(worst, float(np.max(np.abs(lhs - _sv(sym_power_matrix(A, n))))))
            if d**n <= 4096:
                worst = max(worst, float(np.max(np.abs(lhs - _sv(symmetric_tensor_power(A, n))))))
    else:
        raise ValueError(f"unknown identity {kind!r}")
    return worst


def _monomial_values(points, indices):
    expo = np.array(indices, dtype=int)
    return np.prod(np.power(points[:, None, :], expo[None, :, :]), axis=2)


def _max_generalized_eig(H, G, rtol=1e-12):
    """Largest ``<H c, c> / <G c, c>`` over the numerically nonsingular part of ``G``."""
    s = 1.0 / np.sqrt(np.real(np.diag(G)))
    Gs = la.hermitian_part(G * s[:, None] * s[None, :])
    Hs = la.hermitian_part(H * s[:, None] * s[None, :])
    w, Q = np.linalg.eigh(Gs)
    keep = w > rtol * w[-1]
    W = Q[:, keep] / np.sqrt(w[keep])
    K = la.hermitian_part(W.conj().T @ Hs @ W)
    return float(np.linalg.eigvalsh(K)[-1])


def l2_gram_norm(A, b=None, N=4, mode="analytic", samples=100_000, seed=0, batches=10, max_rel_sigma=0.1):
    """Compression of ``f -> f o (A x + b)`` on ``L^2`` of the Gaussian measure.

    The truncation is the span of ``z^p conj(z)^q`` with ``|p|, |q| <= N``,
    which the substitution maps into itself.  Inner products come either from
    the moment identity ``int z^p conj(z)^q dmu_1 = delta_pq p!`` applied
    coordinatewise (``analytic``) or from seeded complex-Gaussian samples
    (``montecarlo``, with a batch-means standard error in ``meta["sigma"]``).
    Values are norms for ``N' = 0..N``, each a lower bound.
    """
    sym = AffineSymbol(A, b)
    s = np.linalg.svd(sym.A, compute_uv=False)
    if s[-1] <= la.rank_cutoff(float(s[0])):
        raise NotWellDefinedError("symbol matrix is singular")
    d = sym.d
    indices, _, P = monomial_images(sym.A, sym.b, N)
    D = len(indices)
    deg = np.array([sum(a) for a in indices])
    T = np.kron(P, P.conj())
    pairs_p = np.repeat(np.arange(D), D)
    pairs_q = np.tile(np.arange(D), D)
    expo = np.array(indices, dtype=int)

    if mode == "analytic":
        left = expo[pairs_p][:, None, :] + expo[pairs_q][None, :, :]
        right = expo[pairs_q][:, None, :] + expo[pairs_p][None, :, :]
        match = np.all(left == right, axis=2)
        fact = np.vectorize(math.factorial, otypes=[float])(np.where(match[..., None], left, 0))
        G = np.where(match, np.prod(fact, axis=2), 0.0).astype(complex)
        H = T.conj().T @ G @ T
        values = []
        for Np in range(N + 1):
            sel = np.flatnonzero((deg[pairs_p] <= Np) & (deg[pairs_q] <= Np))
            Gs = G[np.ix_(sel, sel)]
            Hs = H[np.ix_(sel, sel)]
            values.append(math.sqrt(max(_max_generalized_eig(Hs, Gs), 0.0)))
        return OracleEstimate(values, LOWER, _converged(values), values[-1], {"mode": mode})

    if mode != "montecarlo":
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((samples, d)) + 1j * rng.standard_normal((samples, d))) / math.sqrt(2)
    fz = sym.A @ z.T
    phiz = (fz + sym.b[:, None]).T

    def features(pts):
        mono = _monomial_values(pts, indices)
        return mono[:, pairs_p] * np.conj(mono[:, pairs_q])

    F = features(z)
    Fp = features(phiz)
    estimates = []
    for chunk in np.array_split(np.arange(samples), batches):
        Gb = F[chunk].conj().T @ F[chunk] / len(chunk)
        Hb = Fp[chunk].conj().T @ Fp[chunk] / len(chunk)
        estimates.append(math.sqrt(max(_max_generalized_eig(Hb, Gb), 0.0)))
    G = F.conj().T @ F / samples
    H = Fp.conj().T @ Fp / samples
    value = math.sqrt(max(_max_generalized_eig(H, G), 0.0))
    sigma = float(np.std(estimates, ddof=1)) / math.sqrt(batches)
    if sigma > max_rel_sigma * value:
        raise MCVarianceTooHighError(f"relative standard error {sigma / value:.3g} too large")
    return OracleEstimate([value], LOWER, False, value, {"mode": mode, "sigma": sigma, "samples": samples})


@dataclass(frozen=True)
class ShiftModel:
    """Truncated unilateral shift on ``C^T`` with ``b`` in ``ker V*`` (first coordinate only)."""

    T: int
    b0: complex = 1.0

    @property
    def V(self):
        return np.eye(self.T, k=-1, dtype=complex)

    @property
    def b(self):
        b = np.zeros(self.T, dtype=complex)
        b[0] = self.b0
        return b


@dataclass(frozen=True)
class ShiftRun:
    rows: list
    exact: bool
    gram_residual: float
    norm_estimate: float
    target: float


def shift_model_run(model, n_max, points=10, seed=0):
    """Iterates of ``x -> V x + b`` on the truncated shift.

    For ``n < T`` the truncation agrees with the infinite shift on everything
    ``C^n`` touches, so ``b_n`` and ``(I - V^n V*^n)^{-1/2} b_n`` are exact.
    Rows are ``(n, ||b_n||^2, ||w_n||^2, exp(||w_n||^2 / (2n)))``.  The kernel
    identity ``C C* = e^{||b||^2} I`` is checked on points whose last coordinate
    vanishes (the window on which ``V*V`` acts as the identity), and the norm of
    ``C*`` on the span of those kernels estimates ``||C||``.
    """
    T = model.T
    if T <= n_max:
        raise TruncationTooSmallError(f"need T > n_max, got T={T}, n_max={n_max}")
    V, b = model.V, model.b
    b0 = complex(model.b0)
    integral = b0.real == int(b0.real) and b0.imag == int(b0.imag)
    rows, exact = [], True
    Vn = np.eye(T, dtype=complex)
    bn = np.zeros(T, dtype=complex)
    b_int = np.zeros(T, dtype=np.int64)
    for n in range(1, n_max + 1):
        bn = bn + Vn @ b
        Vn = Vn @ V
        if integral:
            # b_n = b0 (e_0 + ... + e_{n-1}) exactly, squared norm in integers
            b_int[n - 1] = 1
            bn_sq = int(np.dot(b_int, b_int)) * (int(b0.real) ** 2 + int(b0.imag) ** 2)
            b_sq = int(b0.real) ** 2 + int(b0.imag) ** 2
            exact &= bn_sq == n * b_sq
        else:
            bn_sq = float(np.vdot(bn, bn).real)
            exact &= math.isclose(bn_sq, n * abs(b0) ** 2, rel_tol=1e-12)
        res = _defect_range(_defect(Vn), bn)
        w_sq = float(np.vdot(res.preimage, res.preimage).real) if res.member else math.inf
        rows.append((n, bn_sq, w_sq, math.exp(w_sq / (2 * n))))

    rng = np.random.default_rng(seed)
    X = (rng.standard_normal((points, T)) + 1j * rng.standard_normal((points, T))) / math.sqrt(2 * T)
    X[:, -1] = 0.0
    b_sq = abs(b0) ** 2
    phiX = X @ V.T + b
    resid = 0.0
    for xi in X:
        img = V @ xi + b
        back = V.conj().T @ img
        for eta in X:
            lhs = np.exp(np.vdot(img, b)) * np.exp(np.vdot(back, eta))
            rhs = math.exp(b_sq) * np.exp(np.vdot(xi, eta))
            resid = max(resid, abs(lhs - rhs) / abs(rhs))
    exp_phi = make_phi("exp")
    G = kernel_gram(exp_phi, X)
    H = kernel_gram(exp_phi, phiX)
    estimate = math.sqrt(_max_generalized_eig(H, G))
    return ShiftRun(rows, exact, resid, estimate, math.exp(b_sq / 2))


@dataclass(frozen=True)
class DiagonalModel:
    """Diagonal contraction ``A e_n = alpha_n e_n`` with ``|<b, e_n>|^2`` given.

    ``DiagonalModel.power_law(x, y, T)`` uses ``alpha_n = 1 - (n+1)^{-y}`` and
    ``|<b, e_n>|^2 = (n+1)^{-x}``.
    """

    alpha: np.ndarray
    b_sq: np.ndarray
    x: float | None = None
    y: float | None = None

    @classmethod
    def power_law(cls, x, y, T=4000):
        n1 = np.arange(1, T + 1, dtype=float)
        return cls(1.0 - n1 ** (-y), n1 ** (-x), x, y)

    def __post_init__(self):
        if np.any(self.alpha < 0) or np.any(self.alpha > 1):
            raise ValueError("alpha_n must lie in [0, 1]")


def decay_exponent(terms, fraction=0.5):
    """``p`` in ``terms ~ n^{-p}``, fitted by least squares on the tail of the sequence."""
    terms = np.asarray(terms, dtype=float)
    n = np.arange(1, len(terms) + 1, dtype=float)
    start = int(len(terms) * (1 - fraction))
    slope = np.polyfit(np.log(n[start:]), np.log(terms[start:]), 1)[0]
    return -float(slope)


@dataclass(frozen=True)
class DiagonalRun:
    iterates: list
    monotone: bool
    psi_partial: float
    range_partial: float
    range_exponent: float
    psi_exponent: float
    in_range: bool
    psi_finite: bool
    analytic_in_range: bool | None
    analytic_psi_finite: bool | None

    @property
    def region(self):
        if not self.in_range:
            return "not_in_range"
        return "in_range_psi_finite" if self.psi_finite else "in_range_psi_divergent"

    @property
    def agrees(self):
        if self.analytic_in_range is None:
            return True
        return self.in_range == self.analytic_in_range and self.psi_finite == self.analytic_psi_finite


def diagonal_model_run(model, k_max=50, margin=0.05):
    """Partial sums ``||(I - A^{2k})^{-1/2} b_k||^2`` for ``k = 1..k_max`` and a series classifier.

    A series of positive terms is classified convergent when its fitted decay
    exponent exceeds ``1 + margin``; the boundary ``p = 1`` counts as divergent.
    """
    a = model.alpha
    bs = model.b_sq
    iterates = []
    for k in range(1, k_max + 1):
        ak = a**k
        term = bs * (1 - ak) / ((1 - a) ** 2 * (1 + ak))
        iterates.append(float(np.sum(term)))
    monotone = all(x <= y * (1 + 1e-12) for x, y in zip(iterates, iterates[1:]))
    psi_terms = bs / (1 - a) ** 2
    range_terms = bs / (1 - a**2)
    p_range = decay_exponent(range_terms)
    p_psi = decay_exponent(psi_terms)
    analytic_range = analytic_psi = None
    if model.x is not None:
        analytic_range = model.x - model.y > 1
        analytic_psi = model.x - 2 * model.y > 1
    return DiagonalRun(
        iterates,
        monotone,
        float(np.sum(psi_terms)),
        float(np.sum(range_terms)),
        p_range,
        p_psi,
        p_range > 1 + margin,
        p_psi > 1 + margin,
        analytic_range,
        analytic_psi,
    )


def rkhs_constant_norm_probe(phi, point_budget=48, d=1, seed=0):
    """Lower estimates of ``||1||`` from interpolation bounds over random point sets.

    Point sets shrink toward the origin as the budget is spent, so the running
    maximum increases toward ``1/sqrt(Phi(0))``.
    """
    if phi.coefficient(0) <= 0:
        raise PhiZeroAtOriginError("the constant function is not in the space")
    rng = np.random.default_rng(seed)
    best, values = 0.0, []
    for trial in range(point_budget):
        size = 1 + trial % 3
        radius = 2.0 ** (-trial / 4)
        pts = radius * (rng.standard_normal((size, d)) + 1j * rng.standard_normal((size, d))) / math.sqrt(2 * d)
        bound = rkhs_lower_bound(phi, pts, np.ones(size))
        if math.isfinite(bound):
            best = max(best, bound)
        values.append(math.sqrt(best))
    return OracleEstimate(values, LOWER, _converged(values, 1e-6), values[-1])


def gram_dominance(phi, A, B, points, tol=1e-8):
    """``||C_A f|| <= ||C_B f||`` on the span of kernels at ``points``.

    Compares the Gram matrices of the kernels at ``A* x_i`` and ``B* x_i``.
    """
    X = np.atleast_2d(np.asarray(points, dtype=complex))
    GA = kernel_gram(phi, X @ la.as_matrix(A).conj())
    GB = kernel_gram(phi, X @ la.as_matrix(B).conj())
    scale = max(1.0, float(np.max(np.abs(GB))))
    return bool(np.linalg.eigvalsh(GB - GA)[0] >= -tol * scale)


def form_matrix(phi, A, points):
    """``Q[i, j] = <C_A K_{x_j}, K_{x_i}> = Phi(<x_i, A* x_j>)``."""
    X = np.atleast_2d(np.asarray(points, dtype=complex))
    Y = X @ la.as_matrix(A).conj()
    return phi.series(X @ Y.conj().T)


def form_dominance(phi, A, B, points, tol=1e-8):
    """``<C_A f, f> <= <C_B f, f>`` on the span of kernels at ``points``."""
    Q = la.hermitian_part(form_matrix(phi, B, points) - form_matrix(phi, A, points))
    scale = max(1.0, float(np.max(np.abs(form_matrix(phi, B, points)))))
    return bool(np.linalg.eigvalsh(Q)[0] >= -tol * scale)


def form_witness(A, B, scale=1.0):
    """Eigenvector of ``B - A`` for its smallest eigenvalue, scaled: a single kernel point."""
    w, Q = np.linalg.eigh(la.hermitian_part(la.as_matrix(B) - la.as_matrix(A)))
    return scale * Q[:, 0]


def translation_range_conditions(A, b, tol=1e-9):
    """Three conditions on a contraction ``A`` and vector ``b``, each tested on its own.

    (i) ``<A x, b> = 0`` whenever ``||A x|| = ||x||`` (that set is ``ker(I - A*A)``);
    (ii) ``A* b in ran(I - A*A)``; (iii) ``b in ran(I - A A*)``.
    """
    A = la.as_matrix(A)
    b = la.as_vector(b)
    eye = np.eye(A.shape[0])
    E = la.hermitian_part(eye - A.conj().T @ A)
    w, Q = np.linalg.eigh(E)
    K = Q[:, w <= 1e-10]
    scale = max(1.0, float(np.linalg.norm(b)))
    first = float(np.linalg.norm((A @ K).conj().T @ b)) <= tol * scale if K.size else True

    def member(M, v):
        wm, Qm = np.linalg.eigh(la.hermitian_part(M))
        Qr = Qm[:, wm > 1e-10]
        resid = float(np.linalg.norm(v - Qr @ (Qr.conj().T @ v)))
        return resid <= tol * max(1.0, float(np.linalg.norm(v)))

    second = member(E, A.conj().T @ b)
    third = member(eye - A @ A.conj().T, b)
    return first, second, third
