"""Monomial bases of polynomial truncations and matrices of composition operators.

For ``Phi(z) = sum a_n z^n`` the kernel ``Phi(<x, y>)`` expands as
``sum_n a_n sum_{|alpha|=n} (n!/alpha!) x^alpha conj(y)^alpha``, so the
monomials ``e_alpha(x) = x^alpha * sqrt(a_n n!/alpha!)`` with ``n = |alpha|`` in
the support form an orthonormal basis.  The span ``V_N`` of those with
``|alpha| <= N`` is invariant under ``f -> f o (A x + b)``, and the matrix of the
restriction is assembled by expanding ``(A x + b)^alpha`` one linear factor at
a time.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import AffineUnsupportedError, CombinatorialOverflowError, SizeMismatchError
from .linalg import as_matrix, as_vector, rank_cutoff
from .phi import make_phi

MAX_DIM = 8000


def compositions(n, d):
    """Multi-indices of degree ``n`` in ``d`` variables, lexicographically descending."""
    if d == 1:
        return [(n,)]
    out = []
    for first in range(n, -1, -1):
        out.extend((first,) + rest for rest in compositions(n - first, d - 1))
    return out


def count_degree(n, d):
    return math.comb(n + d - 1, d - 1)


def multinomial(alpha):
    """``|alpha|! / alpha!`` exactly, checked against the floating-point log value."""
    n = sum(alpha)
    value = math.factorial(n)
    for a in alpha:
        value //= math.factorial(a)
    log_value = math.lgamma(n + 1) - sum(math.lgamma(a + 1) for a in alpha)
    if value < 2**63 and not math.isclose(math.log(value), log_value, rel_tol=1e-9, abs_tol=1e-9):
        raise ArithmeticError(f"multinomial mismatch for {alpha}")
    return value


def _log_multinomial(alpha):
    value = multinomial(alpha)
    if value < 2**63:
        return math.log(value)
    return math.lgamma(sum(alpha) + 1) - sum(math.lgamma(a + 1) for a in alpha)


@dataclass(frozen=True)
class BasisSlice:
    """Ordered orthonormal monomial basis of ``V_N``.

    ``log_weights[i]`` is ``log w_alpha`` where ``e_alpha = x^alpha / w_alpha``.
    """

    d: int
    N: int
    degrees: tuple
    indices: tuple
    log_weights: np.ndarray

    def __len__(self):
        return len(self.indices)

    @property
    def weights(self):
        return np.exp(self.log_weights)

    def degree_slice(self, n):
        start = 0
        for k in self.degrees:
            size = count_degree(k, self.d)
            if k == n:
                return slice(start, start + size)
            start += size
        raise KeyError(f"degree {n} not in basis")

    def leading(self, N):
        """Basis of ``V_N`` for ``N <= self.N`` (a leading segment)."""
        degrees = tuple(k for k in self.degrees if k <= N)
        size = sum(count_degree(k, self.d) for k in degrees)
        return BasisSlice(self.d, N, degrees, self.indices[:size], self.log_weights[:size])

    def evaluate(self, x):
        """``e_alpha(x)`` for every basis element."""
        x = as_vector(x)
        expo = np.array(self.indices, dtype=int).reshape(len(self.indices), self.d)
        mono = np.prod(np.power(x[None, :], expo), axis=1)
        return mono * np.exp(-self.log_weights)


def enumerate_basis(phi, d, N):
    if d < 1 or N < 0:
        raise ValueError("need d >= 1 and N >= 0")
    degrees = tuple(phi.support_upto(N))
    dim = sum(count_degree(k, d) for k in degrees)
    if dim > MAX_DIM:
        raise CombinatorialOverflowError(f"basis dimension {dim} exceeds {MAX_DIM}")
    indices = []
    logw = []
    for k in degrees:
        log_a = math.log(phi.coefficient(k))
        for alpha in compositions(k, d):
            indices.append(alpha)
            logw.append(-0.5 * (log_a + _log_multinomial(alpha)))
    return BasisSlice(d, N, degrees, tuple(indices), np.array(logw))


@lru_cache(maxsize=64)
def _universe(d, N):
    indices = [alpha for n in range(N + 1) for alpha in compositions(n, d)]
    position = {alpha: i for i, alpha in enumerate(indices)}
    shifts = np.full((d, len(indices)), -1, dtype=int)
    for i, alpha in enumerate(indices):
        if sum(alpha) < N:
            for j in range(d):
                beta = alpha[:j] + (alpha[j] + 1,) + alpha[j + 1 :]
                shifts[j, i] = position[beta]
    return tuple(indices), position, shifts


def monomial_images(A, b, N):
    """Coefficients of ``(A x + b)^alpha`` on all monomials of degree ``<= N``.

    Returns ``(indices, position, P)`` where column ``j`` of ``P`` expands the
    image of monomial ``indices[j]``.  Each column reuses a parent column
    ``alpha - e_i`` and multiplies by the single linear form ``(A x + b)_i``.
    """
    A = as_matrix(A)
    d = A.shape[0]
    b = np.zeros(d, dtype=complex) if b is None else as_vector(b)
    indices, position, shifts = _universe(d, N)
    D = len(indices)
    if D > MAX_DIM:
        raise CombinatorialOverflowError(f"monomial space dimension {D} exceeds {MAX_DIM}")
    P = np.zeros((D, D), dtype=complex)
    P[0, 0] = 1.0
    for col in range(1, D):
        alpha = indices[col]
        i = next(k for k, a in enumerate(alpha) if a)
        parent = position[alpha[:i] + (alpha[i] - 1,) + alpha[i + 1 :]]
        p = P[:, parent]
        q = b[i] * p
        for j in range(d):
            ok = shifts[j] >= 0
            q[shifts[j][ok]] += A[i, j] * p[ok]
        P[:, col] = q
    return indices, position, P


@dataclass(frozen=True)
class CompOpMatrix:
    """Matrix of ``f -> f o (A x + b)`` on ``V_N`` in the orthonormal monomial basis."""

    basis: BasisSlice
    matrix: np.ndarray

    def block(self, n):
        s = self.basis.degree_slice(n)
        return self.matrix[s, s]

    def leading(self, N):
        sub = self.basis.leading(N)
        k = len(sub)
        return CompOpMatrix(sub, self.matrix[:k, :k])

    def to_json(self):
        return json.dumps(
            {
                "basis": [list(a) for a in self.basis.indices],
                "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix],
            }
        )

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["row", "col", "re", "im"])
        for (i, j), z in np.ndenumerate(self.matrix):
            writer.writerow([i, j, repr(float(z.real)), repr(float(z.imag))])
        return buf.getvalue()


def compose_matrix(phi, A, b=None, N=4):
    """Matrix of ``C_{A+b}`` restricted to ``V_N``.

    Entries are ``M[beta, alpha] = <e_alpha o (A x + b), e_beta>``.  A nonzero
    translation is accepted only for ``Phi = exp``, the one space on which
    affine symbols have a worked-out theory here.
    """
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise SizeMismatchError("symbol matrix must be square")
    d = A.shape[0]
    if b is not None:
        b = as_vector(b)
        if b.shape[0] != d:
            raise SizeMismatchError("translation vector has the wrong dimension")
        if np.any(b != 0) and not phi.is_exp:
            raise AffineUnsupportedError("nonzero translation requires Phi = exp")
    basis = enumerate_basis(phi, d, N)
    _, position, P = monomial_images(A, b, N)
    rows = np.array([position[a] for a in basis.indices], dtype=int)
    M = P[np.ix_(rows, rows)]
    lw = basis.log_weights
    M = M * np.exp(lw[:, None] - lw[None, :])
    return CompOpMatrix(basis, M)


def sym_power_matrix(A, n):
    """Degree-``n`` block of ``C_{A^T}`` on homogeneous polynomials, unitarily equivalent to ``A^{(sym) n}``."""
    A = as_matrix(A)
    if n == 0:
        return np.eye(1, dtype=complex)
    return compose_matrix(make_phi("monomial", n), A.T, None, n).matrix


def kernel_gram(phi, points):
    """``G[i, j] = Phi(<x_i, x_j>)`` by power-series summation."""
    X = np.atleast_2d(np.asarray(points, dtype=complex))
    G = phi.series(X @ X.conj().T)
    return 0.5 * (G + G.conj().T)


def rkhs_lower_bound(phi, points, values, rtol=1e-6):
    """``v* G^- v``: the least squared norm of an interpolant of ``values`` on ``points``.

    Returns ``inf`` when the values are not in the range of the Gram matrix
    (relative residual above ``rtol``), meaning no function in the space
    interpolates them.
    """
    v = as_vector(values)
    if not np.any(v):
        return 0.0
    G = kernel_gram(phi, points)
    if G.shape[0] != v.shape[0]:
        raise SizeMismatchError("points and values differ in length")
    w, Q = np.linalg.eigh(G)
    keep = w > rank_cutoff(float(np.max(np.abs(w))))
    coef = Q.conj().T @ v
    residual = float(np.linalg.norm(coef[~keep])) / float(np.linalg.norm(v))
    if residual > rtol:
        return math.inf
    return float(np.sum(np.abs(coef[keep]) ** 2 / w[keep]))


def kernel_vector(basis, x):
    """Coefficients of the kernel function ``K_x`` on the basis, ``conj(e_alpha(x))``."""
    return np.conj(basis.evaluate(x))


def kernel_image_check(phi, A, b, points, N):
    """Largest coefficient mismatch between ``C K_x`` and ``exp(<b, x>) K_{A* x}`` on ``V_N``."""
    A = as_matrix(A)
    d = A.shape[0]
    b = np.zeros(d, dtype=complex) if b is None else as_vector(b)
    comp = compose_matrix(phi, A, b, N)
    worst = 0.0
    for x in np.atleast_2d(np.asarray(points, dtype=complex)):
        lhs = comp.matrix @ kernel_vector(comp.basis, x)
        rhs = np.exp(np.vdot(x, b)) * kernel_vector(comp.basis, A.conj().T @ x)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst

