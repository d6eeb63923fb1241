"""Admissible entire functions with nonnegative Taylor coefficients.

A :class:`PhiSeries` stores an explicit head ``a_0..a_M`` and an optional
tail descriptor for the indices ``k > M``:

* ``None``: a polynomial, every tail coefficient is zero.
* :class:`ExpTail`: ``a_k = 1/(k - shift)!`` on an arithmetic progression of
  indices.  ``exp``, ``z e^z``, ``cosh`` and ``sinh`` are all of this form.
* :class:`GeometricTail`: the tail is only known through ``a_k <= C rho^k``;
  such a series can be evaluated with a certified error bound but its
  coefficients past ``M`` are unavailable.

The derived data (support, its minimum ``m`` and supremum ``n_sup``, and the
order of the group of common roots of unity) are what the composition
operator formulas consume.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property, reduce

import numpy as np

from .errors import (
    MGreaterThanNError,
    NonpositiveMomentError,
    NotInFError,
    TailNotBoundedError,
)

_FACTORIAL_EXACT_LIMIT = 170


def _inv_factorial(j):
    if j <= _FACTORIAL_EXACT_LIMIT:
        return 1.0 / math.factorial(j)
    return math.exp(-math.lgamma(j + 1))


@dataclass(frozen=True)
class ExpTail:
    """Tail ``a_k = 1/(k - shift)!`` for ``k >= shift`` with ``k = residue (mod period)``."""

    shift: int = 0
    period: int = 1
    residue: int = 0

    def __post_init__(self):
        if self.shift < 0 or self.period < 1:
            raise ValueError("shift must be >= 0 and period >= 1")
        object.__setattr__(self, "residue", self.residue % self.period)

    def in_family(self, k):
        return k >= self.shift and (k - self.residue) % self.period == 0

    def coefficient(self, k):
        return _inv_factorial(k - self.shift) if self.in_family(k) else 0.0

    def first_after(self, M):
        k = max(M + 1, self.shift)
        while not self.in_family(k):
            k += 1
        return k

    def closed_form(self, x):
        """Sum of the whole progression (all ``k``, not only ``k > M``) at real ``x``."""
        p = self.period
        c = (self.residue - self.shift) % p
        total = sum(
            cmath.exp(-2j * math.pi * l * c / p) * cmath.exp(cmath.exp(2j * math.pi * l / p) * x)
            for l in range(p)
        )
        return (x**self.shift) * (total / p).real


@dataclass(frozen=True)
class GeometricTail:
    """Tail known only through the bound ``a_k <= bound * ratio**k`` for ``k > M``."""

    bound: float
    ratio: float

    def __post_init__(self):
        if self.bound < 0 or self.ratio < 0:
            raise ValueError("geometric tail parameters must be nonnegative")


@dataclass(frozen=True)
class PhiSeries:
    """Entire function ``sum a_k z^k`` with ``a_k >= 0`` and some ``a_k > 0``, ``k >= 1``."""

    coeffs: tuple
    tail: ExpTail | GeometricTail | None = None
    name: str = ""

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coeffs)
        if not coeffs:
            raise NotInFError("empty coefficient list")
        if any(not math.isfinite(c) or c < 0 for c in coeffs):
            raise NotInFError("coefficients must be finite and nonnegative")
        object.__setattr__(self, "coeffs", coeffs)
        positive_high = any(c > 0 for c in coeffs[1:]) or isinstance(self.tail, ExpTail)
        if not positive_high:
            raise NotInFError("some coefficient at index >= 1 must be positive")

    @property
    def M(self):
        return len(self.coeffs) - 1

    def coefficient(self, k):
        if k < 0:
            return 0.0
        if k <= self.M:
            return self.coeffs[k]
        if self.tail is None:
            return 0.0
        if isinstance(self.tail, ExpTail):
            return self.tail.coefficient(k)
        raise TailNotBoundedError(f"coefficient {k} lies in a bound-only tail")

    def support_upto(self, N):
        """Support indices ``k <= N``; raises if that requires unknown coefficients."""
        return [k for k in range(N + 1) if self.coefficient(k) > 0]

    @cached_property
    def head_support(self):
        return tuple(k for k, c in enumerate(self.coeffs) if c > 0)

    @property
    def m(self):
        if self.head_support:
            return self.head_support[0]
        return self.tail.first_after(self.M)

    @property
    def n_sup(self):
        if self.tail is None:
            return self.head_support[-1]
        return math.inf

    @cached_property
    def gcd_order(self):
        indices = [k for k in self.head_support if k > 0]
        if isinstance(self.tail, ExpTail):
            # two consecutive progression indices fix the gcd of the whole tail
            k0 = self.tail.first_after(self.M)
            indices += [k0, k0 + self.tail.period]
        return reduce(math.gcd, indices)

    @property
    def is_exp(self):
        return (
            self.tail == ExpTail()
            and all(math.isclose(c, _inv_factorial(k), rel_tol=1e-15) for k, c in enumerate(self.coeffs))
        )

    def value(self, x, tol=1e-12):
        """``Phi(x)`` for real ``x >= 0``; see :func:`phi_eval`."""
        head = float(np.polynomial.polynomial.polyval(x, self.coeffs))
        if self.tail is None:
            return head
        if isinstance(self.tail, ExpTail):
            listed = sum(self.tail.coefficient(k) * x**k for k in range(self.M + 1))
            return head + (self.tail.closed_form(x) - listed)
        rho_x = self.tail.ratio * x
        if rho_x >= 1:
            raise TailNotBoundedError(f"geometric tail diverges at x={x}")
        err = self.tail.bound * rho_x ** (self.M + 1) / (1 - rho_x)
        if err > tol:
            raise TailNotBoundedError(f"tail bound {err:.3g} exceeds tolerance {tol:.3g}")
        return head

    def series(self, z):
        """``Phi`` on a complex array by direct power-series summation.

        The tail is summed until the remaining terms are certified negligible:
        once ``k - shift + 1 >= 2|z|`` successive progression terms shrink by
        at least one half, so the remainder is below twice the last term.
        """
        z = np.asarray(z, dtype=complex)
        out = np.polynomial.polynomial.polyval(z, np.asarray(self.coeffs, dtype=complex))
        if self.tail is None:
            return out
        if isinstance(self.tail, GeometricTail):
            rho = self.tail.ratio * np.max(np.abs(z), initial=0.0)
            if rho >= 1 or self.tail.bound * rho ** (self.M + 1) / (1 - rho) > 1e-12:
                raise TailNotBoundedError("geometric tail not certified on these arguments")
            return out
        tail = self.tail
        radius = float(np.max(np.abs(z), initial=0.0))
        k = tail.first_after(self.M)
        term = z**k * _inv_factorial(k - tail.shift)
        acc = np.zeros_like(out)
        while True:
            acc = acc + term
            scale = max(1.0, float(np.max(np.abs(out + acc), initial=0.0)))
            j = k - tail.shift
            if j + 1 >= 2 * radius and 2 * float(np.max(np.abs(term), initial=0.0)) <= 1e-17 * scale:
                break
            step = tail.period
            denom = float(np.prod(np.arange(j + 1, j + step + 1, dtype=float)))
            term = term * z**step / denom
            k += step
        return out + acc


def make_phi(kind, param=None):
    """Build a built-in or user-supplied series.

    Parameters
    ----------
    kind : str
        One of ``exp``, ``z_exp``, ``cosh``, ``sinh``, ``monomial`` (``param``
        is the degree), ``taylor`` (``param`` is the coefficient list) or
        ``moments`` (``param`` lists the moments; ``a_n = 1/moment_n``).
    """
    if kind == "exp":
        return PhiSeries((1.0,), ExpTail(), name="exp")
    if kind == "z_exp":
        return PhiSeries((0.0,), ExpTail(shift=1), name="z_exp")
    if kind == "cosh":
        return PhiSeries((1.0,), ExpTail(period=2, residue=0), name="cosh")
    if kind == "sinh":
        return PhiSeries((0.0,), ExpTail(period=2, residue=1), name="sinh")
    if kind == "monomial":
        n = int(param)
        if n < 1:
            raise NotInFError("monomial degree must be >= 1")
        return PhiSeries((0.0,) * n + (1.0,), name=f"z^{n}")
    if kind == "taylor":
        return PhiSeries(tuple(param), name="taylor")
    if kind == "moments":
        moments = [float(t) for t in param]
        if any(not t > 0 for t in moments):
            raise NonpositiveMomentError("moments must be strictly positive")
        return PhiSeries(tuple(1.0 / t for t in moments), name="moments")
    raise ValueError(f"unknown kind {kind!r}")


def phi_from_json(obj):
    kind = obj["kind"]
    if kind == "monomial":
        return make_phi(kind, obj["degree"])
    if kind == "taylor":
        return make_phi(kind, obj["coeffs"])
    if kind == "moments":
        return make_phi(kind, obj["moments"])
    return make_phi(kind)


def phi_to_json(phi):
    if phi.name in ("exp", "z_exp", "cosh", "sinh"):
        return {"kind": phi.name}
    if phi.tail is None and phi.head_support == (phi.M,) and phi.coeffs[-1] == 1.0:
        return {"kind": "monomial", "degree": phi.M}
    if phi.tail is None:
        return {"kind": "taylor", "coeffs": list(phi.coeffs)}
    raise ValueError("series with a tail descriptor has no JSON fragment")


def gcd_group_order(phi):
    return phi.gcd_order


def q_value(m, n, theta):
    """``theta**m * max(1, theta**(n - m))`` with the extended-real conventions.

    ``n`` may be ``math.inf``; then ``theta**inf`` is ``inf`` above 1, ``0``
    below 1 and ``1`` at 1.
    """
    if m > n:
        raise MGreaterThanNError(f"m={m} exceeds n={n}")
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    base = theta**m
    if math.isinf(n):
        return math.inf if theta > 1 else base
    return base * max(1.0, theta ** (n - m))


def phi_eval(phi, x, tol=1e-12):
    if x < 0:
        raise ValueError("phi_eval is defined on [0, inf)")
    return phi.value(x, tol=tol)
