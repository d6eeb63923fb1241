"""Dense complex linear algebra.

SVD and eigen-decompositions come from LAPACK through :mod:`numpy.linalg`;
everything above them (generalized inverses, range tests, the Loewner order,
polar and Aluthge transforms, operator-class predicates) is built here.

Rank decisions use a relative cutoff ``RANK_RTOL * sigma_max`` that may be
floored by an absolute ``atol`` when the operator has a natural unit scale,
as ``I - A A*`` does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoConvergenceError, NotPSDError, NotSelfadjointError, SizeMismatchError

RANK_RTOL = 1e-10
TOL = 1e-9


def as_matrix(A):
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    if A.ndim != 2:
        raise SizeMismatchError("expected a 2-d array")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    return A


def as_vector(v):
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    if v.ndim != 1:
        raise SizeMismatchError("expected a 1-d array")
    return v


def _square(A):
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise SizeMismatchError(f"expected a square matrix, got {A.shape}")
    return A


def adjoint(A):
    return as_matrix(A).conj().T


def hermitian_part(A):
    return 0.5 * (A + A.conj().T)


def opnorm(A):
    A = as_matrix(A)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def svd(A):
    """Return ``(U, s, V)`` with ``A = U diag(s) V*`` and ``s`` descending."""
    A = as_matrix(A)
    try:
        U, s, Vh = np.linalg.svd(A)
    except np.linalg.LinAlgError as exc:
        raise NoConvergenceError(str(exc)) from exc
    return U, s, Vh.conj().T


def rank_cutoff(sigma_max, rtol=RANK_RTOL, atol=0.0):
    return max(rtol * sigma_max, atol)


def _eigh_selfadjoint(A, tol=TOL):
    A = _square(A)
    scale = max(1.0, opnorm(A))
    if opnorm(A - A.conj().T) > tol * scale:
        raise NotSelfadjointError("matrix is not selfadjoint within tolerance")
    try:
        w, Q = np.linalg.eigh(hermitian_part(A))
    except np.linalg.LinAlgError as exc:
        raise NoConvergenceError(str(exc)) from exc
    return w, Q


def _eigh_psd(A, tol=TOL):
    try:
        w, Q = _eigh_selfadjoint(A, tol)
    except NotSelfadjointError as exc:
        raise NotPSDError(str(exc)) from exc
    scale = max(1.0, float(np.max(np.abs(w), initial=0.0)))
    if w.size and w[0] < -tol * scale:
        raise NotPSDError(f"smallest eigenvalue {w[0]:.3g} is negative")
    return np.clip(w, 0.0, None), Q


def psd_power(A, t, tol=TOL):
    """``A**t`` for positive semidefinite ``A`` by spectral calculus."""
    if t <= 0:
        raise ValueError("exponent must be positive")
    w, Q = _eigh_psd(A, tol)
    cut = rank_cutoff(float(np.max(w, initial=0.0)))
    wt = np.where(w > cut, w, 0.0) ** t
    return (Q * wt) @ Q.conj().T


def modulus(A):
    """``|A| = (A* A)^{1/2}``."""
    A = as_matrix(A)
    return psd_power(A.conj().T @ A, 0.5)


def pseudo_inverse(A, rtol=RANK_RTOL, atol=0.0, tol=TOL):
    """Generalized inverse of a selfadjoint matrix: inverse on ``ran A``, zero on ``ker A``."""
    w, Q = _eigh_selfadjoint(A, tol)
    cut = rank_cutoff(float(np.max(np.abs(w), initial=0.0)), rtol, atol)
    inv = np.zeros_like(w)
    keep = np.abs(w) > cut
    inv[keep] = 1.0 / w[keep]
    return (Q * inv) @ Q.conj().T


def pinv_power(A, t, rtol=RANK_RTOL, atol=0.0, tol=TOL):
    """``(A^t)^-`` for positive semidefinite ``A``."""
    w, Q = _eigh_psd(A, tol)
    cut = rank_cutoff(float(np.max(w, initial=0.0)), rtol, atol)
    inv = np.zeros_like(w)
    keep = w > cut
    inv[keep] = w[keep] ** (-t)
    return (Q * inv) @ Q.conj().T


def range_projector(B, rtol=RANK_RTOL, atol=0.0, tol=TOL):
    """Orthogonal projector onto ``ran B`` for positive semidefinite ``B``.

    In finite dimensions ``ran B`` and ``ran B^{1/2}`` coincide, so one
    projector serves both exponents.
    """
    w, Q = _eigh_psd(B, tol)
    cut = rank_cutoff(float(np.max(w, initial=0.0)), rtol, atol)
    Qr = Q[:, w > cut]
    return Qr @ Qr.conj().T


@dataclass(frozen=True)
class RangeResult:
    member: bool
    preimage: np.ndarray | None
    residual: float
    borderline: bool


def range_membership(B, e, exponent=1.0, rtol=RANK_RTOL, atol=0.0, tol=TOL):
    """Decide ``e in ran(B**exponent)`` for PSD ``B`` and ``exponent`` in {1, 1/2}.

    The relative residual ``||(I - P) e|| / ||e||`` is compared with ``tol``;
    values within a factor 10 of it are reported as ``borderline``.
    """
    if exponent not in (1, 1.0, 0.5):
        raise ValueError("exponent must be 1 or 1/2")
    B = _square(B)
    e = as_vector(e)
    if B.shape[0] != e.shape[0]:
        raise SizeMismatchError("dimension mismatch between B and e")
    P = range_projector(B, rtol, atol, tol)
    norm_e = float(np.linalg.norm(e))
    residual = float(np.linalg.norm(e - P @ e)) / norm_e if norm_e > 0 else 0.0
    member = residual <= tol
    borderline = tol / 10 < residual <= 10 * tol
    preimage = pinv_power(B, exponent, rtol, atol, tol) @ e if member else None
    return RangeResult(member, preimage, residual, borderline)


def least_c(B, e, rtol=RANK_RTOL, atol=0.0, tol=TOL):
    """Least ``c`` with ``<B x, x> - 2 Re <x, e> + c >= 0`` for all ``x``; ``inf`` if none."""
    B = _square(B)
    e = as_vector(e)
    try:
        res = range_membership(B, e, 0.5, rtol, atol, tol)
    except (NotPSDError, NotSelfadjointError):
        return math.inf
    if not res.member:
        return math.inf
    return float(np.vdot(res.preimage, res.preimage).real)


def quad_form_bound(B, e, c, tol=TOL):
    return least_c(B, e, tol=tol) <= c + tol * max(1.0, abs(c))


def loewner_leq(A, B, tol=TOL):
    """``A <= B`` in the Loewner order: ``min eig(B - A) >= -tol``."""
    A = _square(A)
    B = _square(B)
    if A.shape != B.shape:
        raise SizeMismatchError(f"shapes {A.shape} and {B.shape} differ")
    w, _ = _eigh_selfadjoint(B - A, tol)
    return bool(w[0] >= -tol)


def geninv_order_check(A, B, tol=TOL):
    """Both sides of ``A <= B  <=>  B^{-1} (range-extended) <= A^{-1}``.

    The right side asks for ``ran A^{1/2}`` inside ``ran B^{1/2}`` and
    ``||B^{-1/2} f|| <= ||A^{-1/2} f||`` on all of ``ran A^{1/2}``; the latter
    is the compressed Loewner inequality ``W*(A^- - B^-)W >= 0`` for an
    orthonormal basis ``W`` of that range.
    """
    A = _square(A)
    B = _square(B)
    _eigh_psd(A, tol)
    _eigh_psd(B, tol)
    lhs = loewner_leq(A, B, tol)
    w, Q = _eigh_psd(A, tol)
    W = Q[:, w > rank_cutoff(float(np.max(w, initial=0.0)))]
    PB = range_projector(B)
    inside = opnorm(W - PB @ W) <= tol * 1e3 if W.size else True
    if not inside:
        return lhs, False
    if W.size == 0:
        return lhs, True
    D = W.conj().T @ (pseudo_inverse(A) - pseudo_inverse(B)) @ W
    D = hermitian_part(D)
    scale = max(1.0, opnorm(W.conj().T @ pseudo_inverse(A) @ W))
    rhs = bool(np.linalg.eigvalsh(D)[0] >= -tol * scale)
    return lhs, rhs


def polar_decompose(A):
    """``A = U P`` with ``P = |A|`` and ``U`` a partial isometry, ``ker U = ker A``."""
    A = _square(A)
    W, s, V = svd(A)
    keep = s > rank_cutoff(float(np.max(s, initial=0.0)))
    U = W[:, keep] @ V[:, keep].conj().T
    P = (V * s) @ V.conj().T
    return U, hermitian_part(P)


def aluthge(A, s=0.5, t=0.5):
    """``|A|^s U |A|^t``."""
    U, P = polar_decompose(A)
    return psd_power(P, s) @ U @ psd_power(P, t)


def conjugate_reflect(A):
    """Entrywise conjugation, the action of the standard-basis conjugation on operators."""
    return as_matrix(A).conj()


def eigenvalues(A):
    A = _square(A)
    try:
        w = np.linalg.eigvals(A)
    except np.linalg.LinAlgError as exc:
        raise NoConvergenceError(str(exc)) from exc
    # deterministic order: descending modulus, then argument
    order = np.lexsort((np.angle(w), -np.abs(w)))
    return w[order]


def spectral_radius(A):
    A = _square(A)
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(eigenvalues(A))))


def gelfand_estimate(A, k):
    """``||A^k||^{1/k}``, an upper bound for the spectral radius tending to it."""
    A = _square(A)
    Ak = np.linalg.matrix_power(A, k)
    return opnorm(Ak) ** (1.0 / k)


def is_psd(A, tol=TOL):
    A = _square(A)
    scale = max(1.0, opnorm(A))
    if opnorm(A - A.conj().T) > tol * scale:
        return False
    return bool(np.linalg.eigvalsh(hermitian_part(A))[0] >= -tol * scale)


def paranormal_margin(A, grid=64):
    """Minimum over ``lam > 0`` of ``min eig(A*^2 A^2 - 2 lam A*A + lam^2)`` scaled by ``||A||^4``.

    ``A`` is paranormal iff this is nonnegative.  For a unit vector ``f`` the
    quadratic in ``lam`` is minimal at ``lam = ||A f||^2``, so ``lam`` only needs to
    range over ``[sigma_min^2, sigma_max^2]``; a log grid locates the minimum and
    golden-section search refines it.
    """
    A = _square(A)
    s = np.linalg.svd(A, compute_uv=False)
    smax = float(s[0]) if s.size else 0.0
    if smax == 0.0:
        return 0.0
    A2 = A @ A
    H2 = A2.conj().T @ A2
    H1 = A.conj().T @ A
    eye = np.eye(A.shape[0])

    def f(lam):
        return float(np.linalg.eigvalsh(hermitian_part(H2 - 2 * lam * H1 + lam**2 * eye))[0])

    lo = max(float(s[-1]) ** 2, 1e-8 * smax**2)
    hi = smax**2
    lams = np.geomspace(lo, hi, grid) if hi > lo else np.array([hi])
    vals = [f(l) for l in lams]
    i = int(np.argmin(vals))
    a = math.log(lams[max(i - 1, 0)])
    b = math.log(lams[min(i + 1, len(lams) - 1)])
    g = (math.sqrt(5) - 1) / 2
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(math.exp(c)), f(math.exp(d))
    for _ in range(60):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(math.exp(d))
    best = min(min(vals), fc, fd)
    return best / smax**4


@dataclass(frozen=True)
class ClassFlags:
    """Operator-class flags of a matrix; ``margins`` holds the violation residuals."""

    positive: bool
    selfadjoint: bool
    normal: bool
    hyponormal: bool
    cohyponormal: bool
    isometry: bool
    coisometry: bool
    unitary: bool
    partial_isometry: bool
    orthogonal_projection: bool
    normaloid: bool
    paranormal: bool
    margins: dict = field(default_factory=dict, compare=False)

    def as_dict(self):
        out = {k: getattr(self, k) for k in FLAG_NAMES}
        out["margins"] = dict(self.margins)
        return out


FLAG_NAMES = (
    "positive",
    "selfadjoint",
    "normal",
    "hyponormal",
    "cohyponormal",
    "isometry",
    "coisometry",
    "unitary",
    "partial_isometry",
    "orthogonal_projection",
    "normaloid",
    "paranormal",
)


def _min_eig(H):
    return float(np.linalg.eigvalsh(hermitian_part(H))[0])


def classify_matrix(A, tol=TOL):
    A = _square(A)
    d = A.shape[0]
    eye = np.eye(d)
    Ah = A.conj().T
    norm = opnorm(A)
    scale = max(1.0, norm)
    rel = tol * scale
    rel2 = tol * scale**2

    commutator = Ah @ A - A @ Ah
    margins = {
        "selfadjoint": opnorm(A - Ah),
        "positive": -_min_eig(A) if opnorm(A - Ah) <= rel else math.inf,
        "hyponormal": -_min_eig(commutator),
        "cohyponormal": -_min_eig(-commutator),
        "isometry": opnorm(Ah @ A - eye),
        "coisometry": opnorm(A @ Ah - eye),
        "partial_isometry": opnorm(A @ Ah @ A - A),
        "orthogonal_projection": max(opnorm(A - Ah), opnorm(A @ A - A)),
        "normaloid": abs(norm - spectral_radius(A)),
        "paranormal": -paranormal_margin(A),
    }
    selfadjoint = margins["selfadjoint"] <= rel
    positive = selfadjoint and margins["positive"] <= rel
    hypo = margins["hyponormal"] <= rel2
    cohypo = margins["cohyponormal"] <= rel2
    iso = margins["isometry"] <= tol
    coiso = margins["coisometry"] <= tol
    return ClassFlags(
        positive=positive,
        selfadjoint=selfadjoint,
        normal=hypo and cohypo,
        hyponormal=hypo,
        cohyponormal=cohypo,
        isometry=iso,
        coisometry=coiso,
        unitary=iso and coiso,
        partial_isometry=margins["partial_isometry"] <= tol * scale**3,
        orthogonal_projection=margins["orthogonal_projection"] <= tol * scale**2,
        normaloid=margins["normaloid"] <= rel,
        paranormal=margins["paranormal"] <= tol,
        margins=margins,
    )
