import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from compop.errors import MGreaterThanNError, NonpositiveMomentError, NotInFError, TailNotBoundedError
from compop.phi import (
    ExpTail,
    GeometricTail,
    PhiSeries,
    gcd_group_order,
    make_phi,
    phi_eval,
    phi_from_json,
    phi_to_json,
    q_value,
)

BUILTINS = ["exp", "z_exp", "cosh", "sinh"]


def test_exp_data():
    phi = make_phi("exp")
    assert [phi.coefficient(k) for k in range(6)] == pytest.approx([1 / math.factorial(k) for k in range(6)])
    assert phi.m == 0
    assert phi.n_sup == math.inf
    assert phi.gcd_order == 1
    assert phi.is_exp


def test_monomial_data():
    phi = make_phi("monomial", 2)
    assert phi.support_upto(10) == [2]
    assert (phi.m, phi.n_sup, phi.gcd_order) == (2, 2, 2)
    assert not phi.is_exp


def test_moments_of_factorials_give_exp_coefficients():
    phi = make_phi("moments", [math.factorial(n) for n in range(8)])
    assert phi.coeffs == pytest.approx([1 / math.factorial(n) for n in range(8)])


@pytest.mark.parametrize(
    "phi, order",
    [
        (make_phi("exp"), 1),
        (make_phi("cosh"), 2),
        (make_phi("sinh"), 1),
        (make_phi("z_exp"), 1),
        (make_phi("taylor", [0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 2]), 2),
        (make_phi("taylor", [1, 0, 0, 3, 0, 0, 1]), 3),
        (make_phi("monomial", 5), 5),
        (PhiSeries((0.0, 0.0, 0.0, 1.0), ExpTail(period=3)), 3),
    ],
)
def test_gcd_group_order(phi, order):
    assert gcd_group_order(phi) == order


@pytest.mark.parametrize(
    "coeffs, exc",
    [
        ([1, 0, 0], NotInFError),
        ([0, -1, 2], NotInFError),
        ([5], NotInFError),
        ([0, float("nan")], NotInFError),
    ],
)
def test_rejects_outside_family(coeffs, exc):
    with pytest.raises(exc):
        make_phi("taylor", coeffs)


def test_rejects_nonpositive_moment():
    with pytest.raises(NonpositiveMomentError):
        make_phi("moments", [1, 0, 2])


@pytest.mark.parametrize(
    "m, n, theta, expected",
    [
        (0, math.inf, 0.5, 1.0),
        (2, 2, 3.0, 9.0),
        (1, math.inf, 2.0, math.inf),
        (0, math.inf, 1.0, 1.0),
        (1, 3, 0.5, 0.5),
        (1, 3, 2.0, 8.0),
        (3, math.inf, 0.0, 0.0),
    ],
)
def test_q_value(m, n, theta, expected):
    assert q_value(m, n, theta) == expected


def test_q_value_rejects_m_above_n():
    with pytest.raises(MGreaterThanNError):
        q_value(3, 2, 1.0)


@pytest.mark.parametrize(
    "phi, x, expected",
    [
        (make_phi("exp"), 1.0, math.e),
        (make_phi("monomial", 2), 3.0, 9.0),
        (make_phi("z_exp"), 1.0, math.e),
        (make_phi("cosh"), 2.0, math.cosh(2.0)),
        (make_phi("sinh"), 0.7, math.sinh(0.7)),
        (make_phi("exp"), 30.0, math.exp(30.0)),
    ],
)
def test_phi_eval(phi, x, expected):
    assert phi_eval(phi, x) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("name", BUILTINS)
def test_series_agrees_with_closed_form(name):
    phi = make_phi(name)
    for x in (0.0, 0.3, 1.0, 4.5, 12.0):
        assert phi.series(x).real == pytest.approx(phi_eval(phi, x), rel=1e-12, abs=1e-300)


def test_series_complex_argument():
    phi = make_phi("exp")
    z = 1.3 - 2.1j
    assert complex(phi.series(z)) == pytest.approx(complex(math.e**1.3 * complex(math.cos(-2.1), math.sin(-2.1))), rel=1e-12)


def test_geometric_tail_certified_or_refused():
    phi = PhiSeries((1.0, 1.0, 0.5), GeometricTail(1.0, 0.5))
    assert phi.value(1e-4, tol=1e-9) == pytest.approx(1.0001, rel=1e-6)
    with pytest.raises(TailNotBoundedError):
        phi.value(1.0)
    with pytest.raises(TailNotBoundedError):
        phi.value(3.0)


@pytest.mark.parametrize("name", BUILTINS + ["monomial", "taylor"])
def test_json_round_trip(name):
    obj = {"kind": name}
    if name == "monomial":
        obj["degree"] = 3
    if name == "taylor":
        obj["coeffs"] = [1.0, 0.0, 2.0]
    phi = phi_from_json(obj)
    assert phi_from_json(phi_to_json(phi)) == phi


@given(
    name=st.sampled_from(BUILTINS + ["poly"]),
    x=st.floats(0, 20),
    dx=st.floats(1e-6, 5),
)
def test_phi_strictly_increasing(name, x, dx):
    phi = make_phi("taylor", [0.5, 1, 0, 2]) if name == "poly" else make_phi(name)
    assert phi_eval(phi, x) < phi_eval(phi, x + dx)


@given(
    m=st.integers(0, 4),
    extra=st.one_of(st.integers(0, 4), st.just(math.inf)),
    a=st.floats(0, 1),
    b=st.floats(0, 1),
    above=st.booleans(),
)
def test_q_monotone_on_each_side_of_one(m, extra, a, b, above):
    n = m + extra
    lo, hi = sorted((a, b))
    if above:
        lo, hi = 1 + 3 * lo + 1e-9, 1 + 3 * hi + 1e-9
    assert q_value(m, n, lo) <= q_value(m, n, hi)


@given(support=st.lists(st.integers(1, 40), min_size=1, max_size=5, unique=True))
def test_gcd_is_one_iff_support_coprime(support):
    coeffs = [0.0] * (max(support) + 1)
    for k in support:
        coeffs[k] = 1.0
    phi = make_phi("taylor", coeffs)
    assert (phi.gcd_order == 1) == (math.gcd(*support) == 1)
    assert all(k % phi.gcd_order == 0 for k in support)
