"""Closed-form answers about composition operators ``C_{A+b}`` on ``Phi(C^d)``.

Everything here is a formula evaluated on the symbol ``(A, b)``.  The
brute-force counterparts that check these formulas on truncations live in
:mod:`compop.oracle`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .errors import (
    ContractionViolatedError,
    NotPSDError,
    NotWellDefinedError,
    SizeMismatchError,
    UnboundedOperatorError,
)
from .phi import q_value

TOL = la.TOL
# natural unit scale of I - A A*: its rank is decided against an absolute floor
DEFECT_ATOL = 1e-10


@dataclass(frozen=True)
class AffineSymbol:
    """The symbol ``x -> A x + b``."""

    A: np.ndarray
    b: np.ndarray

    def __init__(self, A, b=None):
        A = la.as_matrix(A)
        if A.shape[0] != A.shape[1]:
            raise SizeMismatchError("symbol matrix must be square")
        b = np.zeros(A.shape[0], dtype=complex) if b is None else la.as_vector(b)
        if b.shape[0] != A.shape[0]:
            raise SizeMismatchError("translation has the wrong dimension")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def d(self):
        return self.A.shape[0]

    def __call__(self, x):
        return self.A @ la.as_vector(x) + self.b


@dataclass(frozen=True)
class Verdict:
    """Boundedness, norm and spectral radius; ``spectral_radius=None`` means unknown."""

    bounded: bool
    norm: float
    spectral_radius: float | None
    witness: np.ndarray | None = None
    S: float | None = None
    borderline: bool = False
    formulas: dict = field(default_factory=dict)

    def as_dict(self):
        out = {
            "bounded": self.bounded,
            "norm": self.norm,
            "spectral_radius": self.spectral_radius,
            "borderline": self.borderline,
            "formulas": dict(self.formulas),
        }
        if self.S is not None:
            out["S"] = self.S
        if self.witness is not None:
            out["witness"] = [[float(z.real), float(z.imag)] for z in self.witness]
        return out


@dataclass(frozen=True)
class ClassReport:
    """Flags for ``C_phi``; ``None`` marks a class that does not apply.

    ``alpha`` maps a class name to the root of unity that witnesses it and
    ``kind`` records whether a flag is an exact criterion or only a
    necessary condition.
    """

    flags: dict
    alpha: dict = field(default_factory=dict)
    kind: dict = field(default_factory=dict)
    bounded: bool = True

    def __getattr__(self, name):
        flags = self.__dict__.get("flags", {})
        if name in flags:
            return flags[name]
        raise AttributeError(name)

    def as_dict(self):
        return {
            "bounded": self.bounded,
            "flags": dict(self.flags),
            "alpha": {k: [v.real, v.imag] for k, v in self.alpha.items()},
            "kind": dict(self.kind),
        }


def _snap_one(x, tol=TOL):
    return 1.0 if abs(x - 1.0) <= tol else x


def roots_of_unity(g):
    """``exp(2 pi i k / g)`` for ``k = 0..g-1`` with exact real and imaginary parts snapped."""
    out = []
    for k in range(g):
        z = cmath.exp(2j * math.pi * k / g)
        re = round(z.real) if abs(z.real - round(z.real)) < 1e-15 else z.real
        im = round(z.imag) if abs(z.imag - round(z.imag)) < 1e-15 else z.imag
        out.append(complex(re, im))
    return out


def verdict_linear(phi, A, tol=TOL):
    """Norm ``q_{m,n}(||A||)`` and spectral radius ``q_{m,n}(r(A))`` of ``C_A``.

    With finitely many nonzero coefficients ``C_A`` is always bounded; with
    infinitely many it is bounded exactly when ``||A|| <= 1``.
    """
    A = la.as_matrix(A)
    norm_a = _snap_one(la.opnorm(A), tol)
    r_a = _snap_one(la.spectral_radius(A), tol)
    m, n = phi.m, phi.n_sup
    bounded = not math.isinf(n) or norm_a <= 1.0
    formulas = {"norm": "q_{m,n}(||A||)", "spectral_radius": "q_{m,n}(r(A))", "m": m, "n": n}
    if not bounded:
        return Verdict(False, math.inf, None, formulas=formulas)
    return Verdict(True, q_value(m, n, norm_a), q_value(m, n, r_a), formulas=formulas)


def _defect(A):
    """``I - A A*`` made exactly Hermitian."""
    A = la.as_matrix(A)
    return la.hermitian_part(np.eye(A.shape[0]) - A @ A.conj().T)


def _defect_range(D, b, tol=TOL):
    w, Q = np.linalg.eigh(D)
    w = np.where(w < 0, 0.0, w)
    Dc = (Q * w) @ Q.conj().T
    return la.range_membership(Dc, b, 0.5, atol=DEFECT_ATOL, tol=tol)


def verdict_affine_exp(A, b, model="finite", tol=TOL):
    """Verdict for ``C_{A+b}`` on the Segal-Bargmann space ``exp(C^d)``.

    Bounded iff ``||A|| <= 1`` and ``b`` lies in ``ran (I - A A*)^{1/2}``; then
    ``||C||^2 = exp(||w||^2)`` with ``w = (I - A A*)^{-1/2} b``.

    ``model`` selects the spectral-radius rule: ``"finite"`` (always 1),
    ``"shift"`` (``exp(||b||^2 / 2)``) or ``"infinite"`` (1 when ``||A|| < 1``
    or ``b = 0``, otherwise unknown).
    """
    sym = AffineSymbol(A, b)
    A, b = sym.A, sym.b
    norm_a = _snap_one(la.opnorm(A), tol)
    formulas = {"bounded": "||A|| <= 1 and b in ran(I - AA*)^{1/2}", "norm": "exp(||(I - AA*)^{-1/2} b||^2 / 2)"}
    if norm_a > 1.0:
        return Verdict(False, math.inf, None, formulas=formulas)
    res = _defect_range(_defect(A), b, tol)
    if not res.member:
        return Verdict(False, math.inf, None, borderline=res.borderline, formulas=formulas)
    w = res.preimage
    S = float(np.vdot(w, w).real)
    b_zero = float(np.linalg.norm(b)) <= tol
    if model == "finite":
        r = 1.0
        formulas["spectral_radius"] = "1 (finite dimension)"
    elif model == "shift":
        r = math.exp(float(np.vdot(b, b).real) / 2)
        formulas["spectral_radius"] = "exp(||b||^2 / 2) (shift model)"
    elif model == "infinite":
        r = 1.0 if (norm_a < 1.0 or b_zero) else None
        formulas["spectral_radius"] = "1 if ||A|| < 1 or b = 0, else unknown"
    else:
        raise ValueError(f"unknown model {model!r}")
    return Verdict(True, math.exp(S / 2), r, witness=w, S=S, borderline=res.borderline, formulas=formulas)


def reduce_to_positive(symbol):
    """``(|A*|, b)``: same boundedness and norm as ``(A, b)`` on ``exp``."""
    A, b = symbol.A, symbol.b
    return AffineSymbol(la.psd_power(A @ A.conj().T, 0.5), b)


def _first_root(g, predicate):
    for alpha in roots_of_unity(g):
        if predicate(alpha):
            return alpha
    return None


def classify_compop(phi, A, classes=None, tol=TOL):
    """Operator classes of ``C_A`` on ``Phi(C^d)`` read off from ``A``.

    Roots of unity of order ``gcd(support)`` are scanned in the order
    ``k = 0..g-1`` and the first one that works is reported.  Normaloidity is
    defined only for bounded operators: it is ``None`` when ``C_A`` is
    unbounded, and requesting it explicitly then raises.
    """
    A = la.as_matrix(A)
    verdict = verdict_linear(phi, A, tol)
    if classes is not None and "normaloid" in classes and not verdict.bounded:
        raise UnboundedOperatorError("normaloid requires a bounded operator")
    g = phi.gcd_order
    fm = la.classify_matrix(A, tol)
    scale = max(1.0, la.opnorm(A))
    flags, alpha = {}, {}

    a = _first_root(g, lambda z: la.opnorm(A.conj().T - z * A) <= tol * scale)
    flags["selfadjoint"] = a is not None
    if a is not None:
        alpha["selfadjoint"] = a
    a = _first_root(g, lambda z: la.is_psd(z * A, tol))
    flags["positive"] = a is not None
    if a is not None:
        alpha["positive"] = a
    a = _first_root(g, lambda z: la.classify_matrix(z * A, tol).orthogonal_projection)
    flags["orthogonal_projection"] = a is not None
    if a is not None:
        alpha["orthogonal_projection"] = a

    flags["isometry"] = fm.coisometry
    flags["coisometry"] = fm.isometry
    flags["unitary"] = fm.unitary
    flags["partial_isometry"] = fm.partial_isometry
    flags["hyponormal"] = fm.cohyponormal
    flags["cohyponormal"] = fm.hyponormal
    flags["normal"] = fm.normal

    if not verdict.bounded:
        flags["normaloid"] = None
    elif phi.coefficient(0) > 0 and _snap_one(la.opnorm(A), tol) <= 1.0:
        flags["normaloid"] = True
    else:
        flags["normaloid"] = fm.normaloid
    if classes is not None:
        flags = {k: flags[k] for k in classes}
        alpha = {k: v for k, v in alpha.items() if k in classes}
    return ClassReport(flags, alpha, {k: "exact" for k in flags}, verdict.bounded)


def cohyponormal_necessary(A, b, tol=TOL):
    """Necessary condition for cohyponormality of ``C_{A+b}`` on ``exp``.

    ``A`` hyponormal, ``(I - A*) b`` in ``ran [A*, A]^{1/2}`` and
    ``||[A*, A]^{-1/2} (I - A*) b|| <= ||b||`` with ``[A*, A] = A*A - AA*``.
    """
    A = la.as_matrix(A)
    b = la.as_vector(b)
    fm = la.classify_matrix(A, tol)
    if not fm.hyponormal:
        return False
    comm = la.hermitian_part(A.conj().T @ A - A @ A.conj().T)
    w, Q = np.linalg.eigh(comm)
    comm = (Q * np.clip(w, 0.0, None)) @ Q.conj().T
    c = (np.eye(A.shape[0]) - A.conj().T) @ b
    if not np.any(np.abs(c) > 0):
        return True
    res = la.range_membership(comm, c, 0.5, atol=DEFECT_ATOL, tol=tol)
    if not res.member:
        return False
    return float(np.linalg.norm(res.preimage)) <= float(np.linalg.norm(b)) + tol


def classify_affine_exp(A, b, tol=TOL):
    """Classes of a bounded ``C_{A+b}`` on ``exp(C^d)``.

    With ``b = 0`` the linear rules apply; any nonzero ``b`` rules out
    hyponormality, normality, (co)isometry and normaloidity.  In finite
    dimension a seminormal ``C_{A+b}`` is normal, which gives the exact
    ``cohyponormal`` flag; ``cohyponormal_necessary`` reports the weaker
    necessary condition that holds in any dimension.
    """
    sym = AffineSymbol(A, b)
    A, b = sym.A, sym.b
    verdict = verdict_affine_exp(A, b, tol=tol)
    if not verdict.bounded:
        raise UnboundedOperatorError("C_{A+b} is not bounded on exp(C^d)")
    fm = la.classify_matrix(A, tol)
    b_zero = float(np.linalg.norm(b)) <= tol
    flags = {
        "hyponormal": b_zero and fm.cohyponormal,
        "cohyponormal": b_zero and fm.normal,
        "normal": b_zero and fm.normal,
        "unitary": b_zero and fm.unitary,
        "isometry": b_zero and fm.coisometry,
        "coisometry": b_zero and fm.isometry,
        "normaloid": b_zero,
        "cohyponormal_necessary": cohyponormal_necessary(A, b, tol),
    }
    kind = {k: "exact" for k in flags}
    kind["cohyponormal_necessary"] = "necessary_only"
    return ClassReport(flags, {}, kind, True)


def polar_of_compop(phi, A):
    """``(U, |A*|)`` where ``A = U |A|``; then ``C_A = C_U C_{|A*|}`` is the polar decomposition."""
    A = la.as_matrix(A)
    U, _ = la.polar_decompose(A)
    return U, la.psd_power(A @ A.conj().T, 0.5)


def power_symbol(A, t):
    """``A^t`` for PSD ``A``; ``C_A^t = C_{A^t}``."""
    return la.psd_power(A, t)


def aluthge_symbol(phi, A, s=0.5, t=0.5):
    """Symbol ``Delta_{s,t}(A*)`` whose composition operator's adjoint is ``Delta_{s,t}(C_A)``.

    Returns ``(symbol, True)``; the flag records that the adjoint is taken.
    """
    A = la.as_matrix(A)
    if not verdict_linear(phi, A).bounded:
        raise UnboundedOperatorError("Aluthge transform needs a bounded C_A")
    return la.aluthge(A.conj().T, s, t), True


def symbols_equal(phi, s1, s2, tol=TOL):
    """Whether ``C_{s1} = C_{s2}``: ``s1 = alpha s2`` for a root of unity of order ``gcd(support)``."""
    if s1.d != s2.d:
        raise SizeMismatchError("symbols act on different dimensions")
    for alpha in roots_of_unity(phi.gcd_order):
        if (
            la.opnorm(s1.A - alpha * s2.A) <= tol * max(1.0, la.opnorm(s1.A))
            and np.linalg.norm(s1.b - alpha * s2.b) <= tol * max(1.0, np.linalg.norm(s1.b))
        ):
            return True, alpha
    return False, None


@dataclass(frozen=True)
class ProjectionChain:
    """Nested orthogonal projections ``P_1 <= P_2 <= ...``."""

    projections: tuple

    def __init__(self, projections, tol=1e-9):
        mats = tuple(la.as_matrix(P) for P in projections)
        for P in mats:
            if la.opnorm(P - P.conj().T) > tol or la.opnorm(P @ P - P) > tol:
                raise ValueError("chain members must be orthogonal projections")
        for P, Q in zip(mats, mats[1:]):
            if la.opnorm(Q @ P - P) > tol:
                raise ValueError("chain must be increasing")
        object.__setattr__(self, "projections", mats)

    @classmethod
    def coordinate(cls, d, sizes=None):
        """Projections onto the first ``k`` coordinates for ``k`` in ``sizes`` (default ``1..d``)."""
        sizes = range(1, d + 1) if sizes is None else sizes
        return cls([np.diag([1.0] * k + [0.0] * (d - k)) for k in sizes])


@dataclass(frozen=True)
class SabResult:
    values: list
    monotone: bool
    limit: float
    sup: float
    agrees: bool


def sab_chain(A, b, chain, variant="general", tol=TOL):
    """``s_k = <(I - T P_k T)^- b, b>`` along a projection chain.

    ``T = |A*|`` in general (``variant="general"``) or ``T = A`` for PSD ``A``
    (``variant="psd"``); the two agree when ``A >= 0``.  ``limit`` is
    ``||(I - A A*)^{-1/2} b||^2`` (``inf`` outside the range), the value the
    supremum must reach once the chain exhausts the space.
    """
    sym = AffineSymbol(A, b)
    A, b = sym.A, sym.b
    if la.opnorm(A) > 1.0 + tol:
        raise ContractionViolatedError("need ||A|| <= 1")
    if variant == "general":
        T = la.psd_power(A @ A.conj().T, 0.5)
    elif variant == "psd":
        if not la.is_psd(A, tol):
            raise NotPSDError("variant 'psd' needs A >= 0")
        T = la.hermitian_part(A)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    eye = np.eye(sym.d)
    values = []
    for P in chain.projections:
        D = la.hermitian_part(eye - T @ P @ T)
        res = _defect_range(D, b, tol)
        values.append(float(np.vdot(res.preimage, res.preimage).real) if res.member else math.inf)
    finite = [v for v in values if math.isfinite(v)]
    monotone = all(x <= y + tol * max(1.0, abs(y)) for x, y in zip(values, values[1:]))
    res = _defect_range(_defect(A), b, tol)
    limit = float(np.vdot(res.preimage, res.preimage).real) if res.member else math.inf
    sup = max(values) if values else 0.0
    if math.isinf(limit):
        agrees = math.isinf(sup) or (bool(finite) and sup > 1 / tol)
    else:
        agrees = abs(sup - limit) <= 1e-8 * max(1.0, limit)
    return SabResult(values, monotone, limit, sup, agrees)


def verdict_l2_gaussian(A, b, tol=TOL):
    """Verdict for ``f -> f o (A x + b)`` on ``L^2`` of the Gaussian measure on ``C^d``.

    Well defined iff ``A`` is nonsingular; bounded iff also ``||A|| <= 1`` and
    ``b in ran(I - A A*)``.  Then ``||C||^2 = exp(<(I - AA*)^- b, b>) / |det A|^2``
    and ``r = 1/|det A|``.
    """
    sym = AffineSymbol(A, b)
    A, b = sym.A, sym.b
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] <= la.rank_cutoff(float(s[0])):
        raise NotWellDefinedError("symbol matrix is singular")
    det = float(np.prod(s))
    formulas = {"norm": "exp(<(I - AA*)^- b, b> / 2) / |det A|", "spectral_radius": "1 / |det A|"}
    if _snap_one(float(s[0]), tol) > 1.0:
        return Verdict(False, math.inf, None, formulas=formulas)
    res = _defect_range(_defect(A), b, tol)
    if not res.member:
        return Verdict(False, math.inf, None, borderline=res.borderline, formulas=formulas)
    S = float(np.vdot(res.preimage, res.preimage).real)
    return Verdict(True, math.exp(S / 2) / det, 1.0 / det, witness=res.preimage, S=S, borderline=res.borderline, formulas=formulas)


@dataclass(frozen=True)
class IterateCurve:
    """``values[n-1] = ||C^n||^{1/n}``; ``w_sq[n-1] = ||w_n||^2``; ``in_range[n-1]`` per step."""

    values: list
    w_sq: list
    in_range: list


def iterate_norm_curve(A, b, n_max, tol=TOL):
    """``||C_{A+b}^n||^{1/n} = exp(||w_n||^2 / (2n))`` for ``n = 1..n_max``.

    ``C^n`` has symbol ``A^n x + b_n`` with ``b_n = (I + A + ... + A^{n-1}) b``
    and ``w_n = (I - A^n A*^n)^{-1/2} b_n``.
    """
    sym = AffineSymbol(A, b)
    A, b = sym.A, sym.b
    if not verdict_affine_exp(A, b, tol=tol).bounded:
        raise UnboundedOperatorError("C_{A+b} is not bounded on exp(C^d)")
    values, w_sq, in_range = [], [], []
    An = np.eye(sym.d, dtype=complex)
    bn = np.zeros(sym.d, dtype=complex)
    for n in range(1, n_max + 1):
        bn = bn + An @ b
        An = An @ A
        res = _defect_range(_defect(An), bn, tol)
        in_range.append(res.member)
        if res.member:
            s = float(np.vdot(res.preimage, res.preimage).real)
            w_sq.append(s)
            values.append(math.exp(s / (2 * n)))
        else:
            w_sq.append(math.inf)
            values.append(math.inf)
    return IterateCurve(values, w_sq, in_range)
