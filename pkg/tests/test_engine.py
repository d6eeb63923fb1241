import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from compop import engine as en
from compop import linalg as la
from compop import oracle as orc
from compop import randmat as rm
from compop.errors import (
    ContractionViolatedError,
    NotPSDError,
    NotWellDefinedError,
    SizeMismatchError,
    UnboundedOperatorError,
)
from compop.fock import compose_matrix
from compop.phi import make_phi, q_value

seeds = st.integers(0, 2**32 - 1)
EXP = make_phi("exp")
Z2 = make_phi("monomial", 2)
J = np.array([[0.0, 1.0], [0.0, 0.0]])


def test_affine_symbol_checks_dimensions():
    with pytest.raises(SizeMismatchError):
        en.AffineSymbol(np.eye(2), [1.0, 2.0, 3.0])
    with pytest.raises(SizeMismatchError):
        en.AffineSymbol(np.ones((2, 3)))
    assert en.AffineSymbol([[2.0]], [1.0])([3.0]) == pytest.approx([7.0])


def test_roots_of_unity_exact():
    assert en.roots_of_unity(4) == [1, 1j, -1, -1j]
    assert en.roots_of_unity(1) == [1]


# linear symbols


def test_linear_monomial_square(rng):
    A = rm.matrix(rng, 3, 1.7)
    v = en.verdict_linear(Z2, A)
    assert v.bounded
    assert v.norm == pytest.approx(la.opnorm(A) ** 2)
    assert v.spectral_radius == pytest.approx(la.spectral_radius(A) ** 2)


def test_linear_exp_unbounded():
    v = en.verdict_linear(EXP, np.diag([1.5, 0.2]))
    assert not v.bounded and v.norm == math.inf and v.spectral_radius is None


def test_linear_exp_unitary(rng):
    v = en.verdict_linear(EXP, rm.unitary(rng, 3))
    assert v.bounded and v.norm == 1.0 and v.spectral_radius == 1.0


@given(seed=seeds, d=st.integers(1, 3), scale=st.floats(0.05, 2.0), which=st.integers(0, 3))
@settings(max_examples=25)
def test_linear_norm_against_compression(seed, d, scale, which):
    phi = [Z2, make_phi("monomial", 3), make_phi("taylor", [0, 1, 0, 1]), make_phi("taylor", [2, 0, 1])][which]
    A = rm.matrix(np.random.default_rng(seed), d, scale)
    v = en.verdict_linear(phi, A)
    curve = orc.compression_norm_curve(phi, A, None, phi.n_sup)
    assert curve.final == pytest.approx(v.norm, rel=1e-9)
    assert v.norm == q_value(phi.m, phi.n_sup, la.opnorm(A))


@given(seed=seeds, d=st.integers(1, 3), scale=st.floats(0.05, 1.0))
@settings(max_examples=20)
def test_exp_spectral_radius_from_eigenvalue_products(seed, d, scale):
    A = rm.matrix(np.random.default_rng(seed), d, scale)
    v = en.verdict_linear(EXP, A)
    assert orc.compression_spectral_radius(EXP, A, 5) == pytest.approx(v.spectral_radius)


# affine symbols on exp


def test_affine_scalar_example():
    v = en.verdict_affine_exp([[0.5]], [0.5])
    assert v.bounded
    assert v.norm**2 == pytest.approx(math.exp(1 / 3))
    assert v.spectral_radius == 1.0
    assert v.S == pytest.approx(1 / 3)


def test_affine_zero_matrix(rng):
    a = rm.vector(rng, 3, 0.9)
    v = en.verdict_affine_exp(np.zeros((3, 3)), a)
    assert v.norm == pytest.approx(math.exp(0.9**2 / 2))


def test_affine_translation_in_kernel_of_adjoint():
    A = np.diag([1.0, 0.0])
    assert en.verdict_affine_exp(A, [0.0, 2.0]).bounded
    assert not en.verdict_affine_exp(A, [0.1, 0.0]).bounded
    assert not en.verdict_affine_exp(np.diag([1.01, 0.0]), [0.0, 0.0]).bounded


def test_affine_spectral_radius_models():
    A, b = np.diag([1.0, 0.0]), [0.0, 1.0]
    assert en.verdict_affine_exp(A, b, model="infinite").spectral_radius is None
    assert en.verdict_affine_exp(A, b, model="shift").spectral_radius == pytest.approx(math.exp(0.5))
    assert en.verdict_affine_exp([[0.5]], [0.5], model="infinite").spectral_radius == 1.0
    with pytest.raises(ValueError):
        en.verdict_affine_exp(A, b, model="other")


def test_affine_borderline_is_flagged():
    v = en.verdict_affine_exp(np.diag([1.0, 0.0]), [3e-9, 1.0])
    assert v.borderline


@given(seed=seeds, d=st.integers(1, 3), a=st.floats(0, 0.9), bn=st.floats(0, 0.6))
@settings(max_examples=15)
def test_affine_norm_against_compression(seed, d, a, bn):
    rng = np.random.default_rng(seed)
    A, b = rm.matrix(rng, d, a), rm.vector(rng, d, bn)
    v = en.verdict_affine_exp(A, b)
    curve = orc.compression_norm_curve(EXP, A, b, 12 if d < 3 else 9)
    assert all(x <= y * (1 + 1e-12) for x, y in zip(curve.values, curve.values[1:]))
    assert curve.final <= v.norm * (1 + 1e-9)
    assert v.norm >= 1.0


@given(seed=seeds, d=st.integers(1, 3), b_zero=st.booleans())
@settings(max_examples=25)
def test_normaloid_iff_translation_vanishes(seed, d, b_zero):
    rng = np.random.default_rng(seed)
    A = rm.matrix(rng, d, rng.uniform(0, 0.95))
    b = np.zeros(d) if b_zero else rm.vector(rng, d, rng.uniform(0.05, 1))
    v = en.verdict_affine_exp(A, b)
    rep = en.classify_affine_exp(A, b)
    if b_zero:
        assert v.norm == v.spectral_radius == 1.0
    else:
        assert v.norm > 1.0 == v.spectral_radius
    assert rep.normaloid == b_zero


def test_reduce_to_positive_examples(rng):
    P = rm.psd(rng, 3)
    R = en.reduce_to_positive(en.AffineSymbol(P))
    assert la.opnorm(R.A - P) <= 1e-10
    U, V = rm.unitary(rng, 3), rm.unitary(rng, 3)
    s = np.array([0.9, 0.5, 0.1])
    R = en.reduce_to_positive(en.AffineSymbol((U * s) @ V.conj().T))
    assert la.opnorm(R.A - (U * s) @ U.conj().T) <= 1e-10


@pytest.mark.parametrize("seed", range(20))
def test_reduce_to_positive_keeps_compression_norm(seed):
    rng = np.random.default_rng(seed)
    A, b = rm.matrix(rng, 2, rng.uniform(0, 0.9)), rm.vector(rng, 2, rng.uniform(0, 0.5))
    R = en.reduce_to_positive(en.AffineSymbol(A, b))
    n1 = orc.compression_norm_curve(EXP, A, b, 12).final
    n2 = orc.compression_norm_curve(EXP, R.A, R.b, 12).final
    assert abs(n1 - n2) <= 1e-3 * n1
    assert en.verdict_affine_exp(A, b).norm == pytest.approx(en.verdict_affine_exp(R.A, R.b).norm)


# classes


def test_classify_minus_identity_square():
    rep = en.classify_compop(Z2, -np.eye(2))
    assert rep.positive and rep.alpha["positive"] == -1


def test_classify_minus_identity_exp():
    rep = en.classify_compop(EXP, -np.eye(2))
    # -I is Hermitian, so the single candidate alpha = 1 already makes it selfadjoint
    assert rep.selfadjoint and rep.alpha["selfadjoint"] == 1
    assert not rep.positive


def test_classify_skew_needs_root():
    A = 1j * np.diag([1.0, 2.0])
    assert not en.classify_compop(EXP, A).selfadjoint
    rep = en.classify_compop(Z2, A)
    assert rep.selfadjoint and rep.alpha["selfadjoint"] == -1


def test_classify_jordan_neither():
    rep = en.classify_compop(EXP, 0.8 * J)
    assert not rep.hyponormal and not rep.cohyponormal


def test_classify_unbounded_normaloid():
    assert en.classify_compop(EXP, 2 * np.eye(2)).normaloid is None
    with pytest.raises(UnboundedOperatorError):
        en.classify_compop(EXP, 2 * np.eye(2), ["normaloid"])


def test_classify_reversals(rng):
    # square matrices: isometries are unitary, so the swap is seen on unitaries and truncated shifts
    shift = np.eye(3, k=-1)
    for A in (rm.unitary(rng, 3), shift, 0.5 * shift):
        f = la.classify_matrix(A)
        rep = en.classify_compop(Z2, A)
        assert (rep.isometry, rep.coisometry) == (f.coisometry, f.isometry)
        assert rep.partial_isometry == f.partial_isometry
        assert (rep.hyponormal, rep.cohyponormal) == (f.cohyponormal, f.hyponormal)


@given(seed=seeds, d=st.integers(1, 3), normal=st.booleans())
@settings(max_examples=20)
def test_hyponormal_flag_against_blocks(seed, d, normal):
    rng = np.random.default_rng(seed)
    A = rm.normal(rng, d, 0.9) if normal else rm.matrix(rng, d, 0.9)
    rep = en.classify_compop(EXP, A)
    comp = compose_matrix(EXP, A, None, 3)
    blocks = all(la.classify_matrix(comp.block(n)).hyponormal for n in comp.basis.degrees)
    assert rep.hyponormal == blocks


def test_classify_affine_examples(rng):
    U = rm.unitary(rng, 2)
    assert en.classify_affine_exp(U, None).unitary
    A = rm.normal(rng, 2, 0.7)
    rep = en.classify_affine_exp(A, rm.vector(rng, 2, 0.3))
    assert not rep.hyponormal and not rep.normal
    assert not rep.cohyponormal_necessary
    assert rep.kind["cohyponormal_necessary"] == "necessary_only"


def test_classify_affine_unbounded():
    with pytest.raises(UnboundedOperatorError):
        en.classify_affine_exp(np.eye(1), [1.0])


# symbol calculus


def test_polar_examples(rng):
    U = rm.unitary(rng, 3)
    V, P = en.polar_of_compop(EXP, U)
    assert la.opnorm(V - U) <= 1e-10 and la.opnorm(P - np.eye(3)) <= 1e-10
    Q = rm.psd(rng, 3, rank=2)
    V, P = en.polar_of_compop(EXP, Q)
    assert la.opnorm(P - Q) <= 1e-10
    assert la.opnorm(V - la.range_projector(Q)) <= 1e-9
    V, P = en.polar_of_compop(Z2, J)
    assert la.opnorm(V - J) <= 1e-12 and la.opnorm(P - np.diag([1.0, 0.0])) <= 1e-12


def test_power_examples(rng):
    A = rm.psd(rng, 2)
    assert la.opnorm(en.power_symbol(A, 1) - A) <= 1e-10
    assert compose_matrix(make_phi("monomial", 1), en.power_symbol(np.diag([4.0]), 0.5), None, 1).block(1)[0, 0] == pytest.approx(2)
    M = compose_matrix(EXP, A, None, 4)
    M2 = compose_matrix(EXP, en.power_symbol(A, 2), None, 4)
    for n in M.basis.degrees:
        assert la.opnorm(M.block(n) @ M.block(n) - M2.block(n)) <= 1e-10


def test_power_rejects_non_psd():
    with pytest.raises(NotPSDError):
        en.power_symbol(np.diag([1.0, -1.0]), 0.5)


def test_aluthge_examples(rng):
    N = rm.normal(rng, 3, 1.0) + 0.5 * np.eye(3)
    sym, adjoint = en.aluthge_symbol(Z2, N, 0.3, 0.7)
    assert adjoint and la.opnorm(sym - N.conj().T) <= 1e-9
    assert la.opnorm(en.aluthge_symbol(EXP, np.zeros((2, 2)))[0]) == 0.0
    assert orc.block_identity_check("aluthge", Z2, J, N=4) <= 1e-9


def test_aluthge_requires_bounded():
    with pytest.raises(UnboundedOperatorError):
        en.aluthge_symbol(EXP, 2 * np.eye(2))


@given(seed=seeds, d=st.integers(1, 3), kind=st.sampled_from(["polar", "aluthge", "power"]), which=st.integers(0, 2))
@settings(max_examples=30)
def test_blockwise_identities(seed, d, kind, which):
    rng = np.random.default_rng(seed)
    phi = [EXP, Z2, make_phi("taylor", [1, 1, 1])][which]
    A = rm.psd(rng, d, rank=int(rng.integers(1, d + 1)), high=1.0) if kind == "power" else rm.matrix(rng, d, rng.uniform(0.1, 1.0))
    assert orc.block_identity_check(kind, phi, A, {"s": 0.4, "t": 0.6} if kind == "aluthge" else {"t": 0.7}, N=4) <= 1e-8


@pytest.mark.parametrize(
    "phi, s1, s2, expected",
    [
        (EXP, ([[0.3, 1.0], [0.0, 0.5]], [1.0, 0.0]), ([[0.3, 1.0], [0.0, 0.5]], [1.0, 0.0]), (True, 1)),
        (Z2, ([[-0.3, -1.0], [0.0, -0.5]], [-1.0, 0.0]), ([[0.3, 1.0], [0.0, 0.5]], [1.0, 0.0]), (True, -1)),
        (EXP, ([[-0.3, -1.0], [0.0, -0.5]], None), ([[0.3, 1.0], [0.0, 0.5]], None), (False, None)),
    ],
)
def test_symbols_equal(phi, s1, s2, expected):
    assert en.symbols_equal(phi, en.AffineSymbol(*s1), en.AffineSymbol(*s2)) == expected


def test_symbols_equal_dimension_mismatch():
    with pytest.raises(SizeMismatchError):
        en.symbols_equal(EXP, en.AffineSymbol(np.eye(2)), en.AffineSymbol([[1.0]]))


def test_symbols_equal_fourth_root():
    A = np.array([[0.2, 0.5], [0.1, 0.3]])
    assert en.symbols_equal(make_phi("monomial", 4), en.AffineSymbol(1j * A), en.AffineSymbol(A)) == (True, 1j)


# projection chains


def test_chain_validation():
    with pytest.raises(ValueError):
        en.ProjectionChain([np.diag([1.0, 1.0]), np.diag([1.0, 0.0])])
    with pytest.raises(ValueError):
        en.ProjectionChain([np.array([[1.0, 1.0], [0.0, 0.0]])])


def test_sab_finite_chain_reaches_limit(rng):
    A, b = rm.matrix(rng, 3, 0.8), rm.vector(rng, 3, 0.7)
    res = en.sab_chain(A, b, en.ProjectionChain.coordinate(3))
    w = en.verdict_affine_exp(A, b).witness
    assert res.monotone and res.agrees
    assert res.values[-1] == pytest.approx(float(np.vdot(w, w).real))


def test_sab_psd_variant_agrees(rng):
    A, b = rm.psd(rng, 3, high=0.9), rm.vector(rng, 3, 0.5)
    chain = en.ProjectionChain.coordinate(3)
    assert en.sab_chain(A, b, chain, "psd").values == pytest.approx(en.sab_chain(A, b, chain).values)
    with pytest.raises(NotPSDError):
        en.sab_chain(rm.matrix(rng, 3, 0.5), b, chain, "psd")


def test_sab_requires_contraction():
    with pytest.raises(ContractionViolatedError):
        en.sab_chain(2 * np.eye(2), [1.0, 0.0], en.ProjectionChain.coordinate(2))


@pytest.mark.parametrize("x, grows", [(3.0, False), (2.5, False), (1.5, True)])
def test_sab_diagonal_model(x, grows):
    T = 400
    model = orc.DiagonalModel.power_law(x, 1.0, T)
    chain = en.ProjectionChain.coordinate(T, [50, 100, 200, 400])
    res = en.sab_chain(np.diag(model.alpha), np.sqrt(model.b_sq), chain, "psd")
    assert res.monotone
    ratio = res.values[-1] / res.values[1]
    assert (ratio > 1.3) == grows


# Gaussian L2


def test_l2_examples(rng):
    v = en.verdict_l2_gaussian([[0.5]], None)
    assert v.norm**2 == pytest.approx(4) and v.spectral_radius == pytest.approx(2)
    v = en.verdict_l2_gaussian(rm.unitary(rng, 2), None)
    assert v.norm == pytest.approx(1) and v.spectral_radius == pytest.approx(1)
    with pytest.raises(NotWellDefinedError):
        en.verdict_l2_gaussian(J, None)


def test_l2_translation_needs_range():
    assert not en.verdict_l2_gaussian(np.diag([1.0, 0.5]), [1.0, 0.0]).bounded
    v = en.verdict_l2_gaussian(np.diag([1.0, 0.5]), [0.0, 0.5])
    assert v.norm == pytest.approx(math.exp(0.25 / 0.75 / 2) / 0.5)


# iterates


def test_iterates_without_translation(rng):
    curve = en.iterate_norm_curve(rm.matrix(rng, 2, 0.9), None, 10)
    assert curve.values == [1.0] * 10


def test_iterates_scalar_closed_form():
    curve = en.iterate_norm_curve([[0.5]], [0.5], 20)
    for n, value in enumerate(curve.values, start=1):
        bn = (1 - 0.5**n) / (1 - 0.5) * 0.5
        assert value == pytest.approx(math.exp(bn**2 / (1 - 0.25**n) / (2 * n)), rel=1e-12)
    assert curve.values[-1] == pytest.approx(math.exp(1 / 40), rel=1e-5)


@given(seed=seeds, d=st.integers(1, 3))
@settings(max_examples=20)
def test_iterates_tend_to_one(seed, d):
    rng = np.random.default_rng(seed)
    curve = en.iterate_norm_curve(rm.matrix(rng, d, rng.uniform(0, 0.9)), rm.vector(rng, d, rng.uniform(0, 1)), 400)
    assert all(curve.in_range)
    assert abs(curve.values[-1] - 1) < abs(curve.values[0] - 1) or curve.values[0] == 1.0
    M_sq = max(w / n for n, w in enumerate(curve.w_sq[:10], start=1))
    assert all(w <= M_sq * n * (1 + 1e-9) for n, w in enumerate(curve.w_sq, start=1))


def test_iterates_refuse_unbounded():
    with pytest.raises(UnboundedOperatorError):
        en.iterate_norm_curve(np.eye(1), [1.0], 3)


# dominance and range conditions


@given(seed=seeds, d=st.integers(1, 3), dominated=st.booleans())
@settings(max_examples=25)
def test_kernel_gram_dominance(seed, d, dominated):
    rng = np.random.default_rng(seed)
    B = rm.matrix(rng, d, rng.uniform(0.3, 1.0))
    A = B @ rm.matrix(rng, d, rng.uniform(0, 1) if dominated else rng.uniform(1.2, 2.5))
    truth = la.loewner_leq(A @ A.conj().T, B @ B.conj().T, 1e-8)
    pts = np.vstack([rm.complex_gaussian(rng, (10, d)), orc.form_witness(A @ A.conj().T, B @ B.conj().T)])
    assert orc.gram_dominance(EXP, A, B, pts) == truth


@given(seed=seeds, d=st.integers(1, 3), dominated=st.booleans())
@settings(max_examples=25)
def test_form_dominance(seed, d, dominated):
    rng = np.random.default_rng(seed)
    P = rm.psd(rng, d, low=0, high=1)
    Q = P + rm.psd(rng, d, low=0.05, high=0.5) if dominated else P - 0.3 * np.eye(d) + rm.psd(rng, d, rank=1, high=0.1)
    Q = la.hermitian_part(Q + max(0.0, -np.linalg.eigvalsh(la.hermitian_part(Q))[0]) * np.eye(d))
    truth = la.loewner_leq(P, Q, 1e-8)
    pts = np.vstack([rm.complex_gaussian(rng, (6, d)), orc.form_witness(P, Q)])
    assert orc.form_dominance(EXP, P, Q, pts) == truth


@given(seed=seeds, d=st.integers(1, 4), case=st.sampled_from(["strict", "edge_range", "edge_random", "edge_kernel"]))
def test_range_conditions_agree(seed, d, case):
    rng = np.random.default_rng(seed)
    s = rng.uniform(0, 0.95, d)
    if case != "strict":
        s[0] = 1.0
    A = rm.with_singular_values(rng, s)
    if case == "edge_range":
        b = (np.eye(d) - A @ A.conj().T) @ rm.vector(rng, d)
    elif case == "edge_kernel":
        b = np.linalg.svd(A)[0][:, 0]  # top left singular vector: outside the range
    else:
        b = rm.vector(rng, d)
    first, second, third = orc.translation_range_conditions(A, b)
    assert first == second == third
