"""Built-in acceptance suite: fourteen seeded end-to-end checks.

Each row compares a closed form from :mod:`compop.engine` or
:mod:`compop.linalg` with an independent route (truncation, Kronecker
products, kernel Gram matrices, bisection, sequence models).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import engine as en
from . import linalg as la
from . import oracle as orc
from . import randmat as rm
from .fock import compose_matrix, sym_power_matrix
from .phi import make_phi


@dataclass(frozen=True)
class Row:
    number: int
    name: str
    tags: tuple
    passed: bool
    detail: dict = field(default_factory=dict)


def _rng(seed, number):
    return np.random.default_rng([seed, number])


def _rel(x, y):
    return abs(x - y) / max(abs(y), 1e-300)


def norm_formula(seed):
    """Compression norms against ``exp(||(I - AA*)^{-1/2} b||^2 / 2)``."""
    exp_phi = make_phi("exp")
    start = time.perf_counter()
    single = orc.compression_norm_curve(exp_phi, [[0.5]], [0.5], 25).final
    single_rel = _rel(single, math.exp(1 / 6))
    rng = _rng(seed, 1)
    worst = 0.0
    for _ in range(20):
        d = int(rng.integers(1, 4))
        A = rm.matrix(rng, d, rng.uniform(0.0, 0.9))
        b = rm.vector(rng, d, rng.uniform(0.0, 0.5))
        v = en.verdict_affine_exp(A, b)
        est = orc.compression_norm_curve(exp_phi, A, b, 14).final
        worst = max(worst, _rel(est, v.norm))
    seconds = time.perf_counter() - start
    passed = single_rel <= 1e-3 and worst <= 5e-3 and seconds < 30
    return passed, {"single_value": single, "single_rel": single_rel, "random_worst_rel": worst, "cases": 20}


def norm_profile(seed):
    """``||C_A|| = q_{m,n}(||A||)`` and compression spectral radius ``= q_{m,n}(r(A))``."""
    rng = _rng(seed, 2)
    phis = [make_phi("monomial", 2), make_phi("monomial", 3), make_phi("taylor", [0, 1, 0, 1]), make_phi("exp")]
    worst_norm = worst_r = 0.0
    for i in range(50):
        phi = phis[i % 4]
        d = int(rng.integers(1, 5))
        if phi.is_exp:
            A = rm.matrix(rng, d, rng.uniform(0.1, 1.0))
            N = 4 if d <= 3 else 3
        else:
            A = rm.matrix(rng, d, rng.uniform(0.2, 2.0))
            N = phi.n_sup
        v = en.verdict_linear(phi, A)
        comp = orc.compression_norm_curve(phi, A, None, N).final
        r = orc.compression_spectral_radius(phi, A, N)
        worst_norm = max(worst_norm, _rel(comp, v.norm))
        worst_r = max(worst_r, abs(r - v.spectral_radius) / max(1.0, v.spectral_radius))
    return worst_norm <= 1e-6 and worst_r <= 1e-6, {"norm_worst_rel": worst_norm, "radius_worst_rel": worst_r, "cases": 50}


def adjoint_identity(seed):
    """Degree blocks of ``C_A*`` against those of ``C_{A*}``."""
    rng = _rng(seed, 3)
    phis = [make_phi("exp"), make_phi("cosh"), make_phi("monomial", 3), make_phi("taylor", [1, 2, 0, 0.5])]
    worst = 0.0
    for i in range(50):
        d = int(rng.integers(1, 4))
        N = int(rng.integers(1, 9 if d < 3 else 7))
        A = rm.matrix(rng, d, rng.uniform(0.1, 1.2))
        worst = max(worst, orc.block_identity_check("adjoint", phis[i % 4], A, N=N))
    return worst <= 1e-10, {"worst_residual": worst, "cases": 50}


def fock_model(seed):
    """Degree blocks against polynomial and Kronecker symmetric powers; ``||A^{(sym) n}|| = ||A||^n``."""
    rng = _rng(seed, 4)
    worst_sv = worst_norm = 0.0
    cases = 0
    for d in (1, 2, 3):
        for n in range(1, 6):
            A = rm.matrix(rng, d, rng.uniform(0.3, 1.5))
            block = compose_matrix(make_phi("monomial", n), A, None, n).block(n)
            s_block = np.linalg.svd(block, compute_uv=False)
            for other in (sym_power_matrix(A, n), orc.symmetric_tensor_power(A, n)):
                s_other = np.linalg.svd(other, compute_uv=False)
                worst_sv = max(worst_sv, float(np.max(np.abs(s_block - s_other))))
            tensor_norm = la.opnorm(orc.symmetric_tensor_power(A, n))
            worst_norm = max(worst_norm, _rel(tensor_norm, la.opnorm(A) ** n))
            cases += 1
    return worst_sv <= 1e-8 and worst_norm <= 1e-8, {"sv_worst": worst_sv, "norm_worst_rel": worst_norm, "cases": cases}


def _phase_hermitian(rng, d):
    kind = rng.integers(0, 3)
    if kind == 0:
        H = rm.psd(rng, d)
    elif kind == 1:
        H = rm.hermitian(rng, d)
    else:
        H = rm.psd(rng, d, rank=max(1, d - 1))
    order = int(rng.choice([1, 2, 4, 8]))
    phase = np.exp(2j * np.pi * rng.integers(0, order) / order) if rng.uniform() < 0.8 else np.exp(2j * np.pi * rng.uniform())
    return phase * H * rng.uniform(0.3, 1.0)


def positivity(seed):
    """Engine positivity flag against a PSD scan of the degree blocks."""
    rng = _rng(seed, 5)
    phis = [make_phi("monomial", 2), make_phi("monomial", 4), make_phi("cosh")]
    disagreements = positives = 0
    for i in range(100):
        phi = phis[i % 3]
        A = _phase_hermitian(rng, int(rng.integers(1, 4)))
        flag = en.classify_compop(phi, A, ["positive"]).positive
        comp = compose_matrix(phi, A, None, 4)
        scan = all(la.is_psd(comp.block(n)) for n in comp.basis.degrees)
        disagreements += flag != scan
        positives += scan
    rep = en.classify_compop(make_phi("monomial", 2), -np.eye(2), ["positive"])
    alpha = rep.alpha.get("positive")
    example_ok = rep.positive and alpha == -1
    return disagreements == 0 and example_ok, {
        "disagreements": disagreements,
        "positive_cases": positives,
        "cases": 100,
        "minus_identity_alpha": None if alpha is None else [alpha.real, alpha.imag],
    }


def _blocks_hyponormal(phi, A, N):
    comp = compose_matrix(phi, A, None, N)
    for n in comp.basis.degrees:
        B = comp.block(n)
        comm = la.hermitian_part(B.conj().T @ B - B @ B.conj().T)
        scale = max(1.0, la.opnorm(B)) ** 2
        if np.linalg.eigvalsh(comm)[0] < -1e-9 * scale:
            return False
    return True


def seminormality(seed):
    """Hyponormality of ``C_A`` from ``A`` against a commutator check on the degree blocks."""
    rng = _rng(seed, 6)
    phi = make_phi("taylor", [1, 1, 0.5, 0.25])
    disagreements = hypo_count = 0
    for i in range(100):
        d = int(rng.integers(1, 4))
        A = rm.normal(rng, d, 1.2) if i % 2 == 0 else rm.matrix(rng, d, rng.uniform(0.3, 1.2))
        flag = en.classify_compop(phi, A, ["hyponormal"]).hyponormal
        block = _blocks_hyponormal(phi, A, 3)
        disagreements += flag != block
        hypo_count += block
    J = np.array([[0.0, 1.0], [0.0, 0.0]])
    rep = en.classify_compop(phi, J, ["hyponormal", "cohyponormal"])
    jordan_ok = not rep.hyponormal and not rep.cohyponormal and not _blocks_hyponormal(phi, J, 3)
    return disagreements == 0 and jordan_ok, {"disagreements": disagreements, "hyponormal_cases": hypo_count, "cases": 100, "jordan_neither": jordan_ok}


def _points(rng, d, count, radius):
    return radius * rm.complex_gaussian(rng, (count, d))


def loewner_bridge(seed):
    """Kernel-Gram dominance against ``AA* <= BB*``; quadratic-form dominance against ``A <= B``."""
    rng = _rng(seed, 7)
    phi = make_phi("exp")
    gram_bad = form_bad = 0
    gram_true = form_true = 0
    for i in range(200):
        d = int(rng.integers(1, 4))
        B = rm.matrix(rng, d, rng.uniform(0.5, 1.0))
        if i % 2 == 0:
            A = B @ rm.matrix(rng, d, rng.uniform(0.0, 1.0))
        else:
            A = B @ rm.matrix(rng, d, rng.uniform(1.5, 2.5))
        truth = la.loewner_leq(A @ A.conj().T, B @ B.conj().T, 1e-8)
        # random points miss small violations; the extremal eigenvector of BB* - AA* is appended as one more kernel point
        pts = np.vstack([_points(rng, d, 12, 1.5), orc.form_witness(A @ A.conj().T, B @ B.conj().T, 1.0)[None, :]])
        gram_bad += truth != orc.gram_dominance(phi, A, B, pts, 1e-8)
        gram_true += truth

        P = rm.psd(rng, d, low=0.0, high=1.0)
        if i % 2 == 0:
            Q = P + rm.psd(rng, d, rank=int(rng.integers(0, d + 1)), low=0.05, high=0.5)
        else:
            v = rm.vector(rng, d, 1.0)
            Q = P - rng.uniform(0.1, 0.5) * np.outer(v, v.conj())
            Q = la.hermitian_part(Q + max(0.0, -float(np.linalg.eigvalsh(la.hermitian_part(Q))[0])) * np.eye(d))
        truth = la.loewner_leq(P, Q, 1e-8)
        pts = np.vstack([_points(rng, d, 8, 1.0), orc.form_witness(P, Q, 1.0)[None, :]])
        form_bad += truth != orc.form_dominance(phi, P, Q, pts, 1e-8)
        form_true += truth
    return gram_bad == 0 and form_bad == 0, {
        "gram_disagreements": gram_bad,
        "gram_true_cases": gram_true,
        "form_disagreements": form_bad,
        "form_true_cases": form_true,
        "pairs": 200,
    }


BISECT_CAP = 1e5


def _bisect_least_c(B, e, iters=200):
    """Smallest ``c`` with ``[[B, -e], [-e*, c]] >= 0``, by bisection on the bordered matrix.

    Rounding lets any large enough ``c`` pass when the form is unbounded
    below, so values beyond ``BISECT_CAP`` are reported as ``inf``.
    """
    d = B.shape[0]

    def ok(c):
        M = np.zeros((d + 1, d + 1), dtype=complex)
        M[:d, :d] = B
        M[:d, d] = -e
        M[d, :d] = -e.conj()
        M[d, d] = c
        return np.linalg.eigvalsh(la.hermitian_part(M))[0] >= -1e-14 * max(1.0, abs(c))

    lo, hi = 0.0, 1.0
    while not ok(hi):
        hi *= 2
        if hi > BISECT_CAP:
            return math.inf
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if ok(mid) else (mid, hi)
        if hi - lo <= 1e-13 * hi:
            break
    return hi


def generalized_inverses(seed):
    """Penrose identities, range-extended order reversal and the least constant of a quadratic form."""
    rng = _rng(seed, 8)
    penrose = 0.0
    for _ in range(200):
        d = int(rng.integers(2, 7))
        rank = int(rng.integers(0, d + 1))
        w = np.zeros(d)
        w[:rank] = rng.uniform(0.2, 2.0, rank) * rng.choice([-1, 1], rank)
        H = rm.hermitian(rng, d, w)
        G = la.pseudo_inverse(H)
        penrose = max(penrose, la.opnorm(H @ G @ H - H), la.opnorm(G @ H @ G - G))
        penrose = max(penrose, la.opnorm(H @ G - (H @ G).conj().T), la.opnorm(G @ H - (G @ H).conj().T))

    mismatches = agree_true = 0
    for i in range(500):
        d = int(rng.integers(2, 7))
        B = rm.psd(rng, d, rank=int(rng.integers(1, d + 1)))
        if i % 2 == 0:
            root = la.psd_power(B, 0.5)
            K = rm.psd(rng, d, rank=int(rng.integers(0, d + 1)), low=0.0, high=1.0)
            A = la.hermitian_part(root @ K @ root)
        else:
            A = rm.psd(rng, d, rank=int(rng.integers(1, d + 1)))
        lhs, rhs = la.geninv_order_check(A, B)
        mismatches += lhs != rhs
        agree_true += lhs and rhs

    worst_c = 0.0
    finite = 0
    for i in range(100):
        d = int(rng.integers(1, 5))
        B = rm.psd(rng, d, rank=int(rng.integers(1, d + 1)), low=0.3, high=2.0)
        e = B @ rm.vector(rng, d, 1.0) if i % 2 == 0 else rm.vector(rng, d, 1.0)
        c = la.least_c(B, e)
        ref = _bisect_least_c(B, e)
        if math.isinf(c) or math.isinf(ref):
            worst_c = max(worst_c, 0.0 if math.isinf(c) == math.isinf(ref) else math.inf)
            continue
        finite += 1
        worst_c = max(worst_c, abs(c - ref) / max(1.0, ref))
    passed = penrose <= 1e-9 and mismatches == 0 and worst_c <= 1e-6
    return passed, {
        "penrose_worst": penrose,
        "order_mismatches": mismatches,
        "order_true_pairs": agree_true,
        "least_c_worst": worst_c,
        "least_c_finite_cases": finite,
    }


def iterates(seed):
    """``||C^n||^{1/n}`` at ``n = 20`` near 1 and ``||w_n||^2 <= M^2 n`` with ``M`` fitted on ``n <= 10``."""
    rng = _rng(seed, 9)
    worst_gap = 0.0
    bound_ok = True
    for _ in range(20):
        d = int(rng.integers(1, 4))
        A = rm.matrix(rng, d, rng.uniform(0.0, 0.5))
        b = rm.vector(rng, d, rng.uniform(0.0, 0.4))
        curve = en.iterate_norm_curve(A, b, 20)
        worst_gap = max(worst_gap, abs(curve.values[-1] - 1.0))
        M_sq = max(w / n for n, w in enumerate(curve.w_sq[:10], start=1))
        bound_ok &= all(w <= M_sq * n * (1 + 1e-12) for n, w in enumerate(curve.w_sq, start=1))
    return worst_gap <= 0.02 and bound_ok, {"worst_gap_n20": worst_gap, "linear_bound": bound_ok, "cases": 20}


def gaussian_l2(seed):
    """``L^2`` Gram oracle: single-variable norm 2 and ratios to ``1/|det A|``."""
    single = orc.l2_gram_norm([[0.5]], None, 8)
    single_rel = _rel(single.final, 2.0)
    rng = _rng(seed, 10)
    exp_phi = make_phi("exp")
    worst = 0.0
    for i in range(10):
        d = 1 if i < 5 else 2
        A = rm.with_singular_values(rng, rng.uniform(0.9, 1.0, d))
        target = en.verdict_l2_gaussian(A, None).norm
        l2 = orc.l2_gram_norm(A, None, 8 if d == 1 else 4).final
        comp = orc.compression_norm_curve(exp_phi, A, None, 8).final
        worst = max(worst, _rel(l2 / comp, target))
    return single_rel <= 0.02 and worst <= 0.05, {"single_value": single.final, "single_rel": single_rel, "ratio_worst_rel": worst, "cases": 10}


def shift_model(seed):
    """Truncated shift: exact ``||b_n||^2``, kernel identity and the norm target."""
    run = orc.shift_model_run(orc.ShiftModel(12, 1), 10, points=10, seed=seed)
    rel = _rel(run.norm_estimate, run.target)
    passed = run.exact and run.gram_residual <= 1e-9 and rel <= 0.02
    return passed, {"exact": run.exact, "gram_residual": run.gram_residual, "norm_estimate": run.norm_estimate, "target": run.target}


def diagonal_model(seed):
    """Region classification of three power-law diagonal contractions."""
    expected = {
        (1.5, 1): "not_in_range",
        (2.5, 1): "in_range_psi_divergent",
        (4, 1): "in_range_psi_finite",
    }
    regions = {}
    ok = True
    for (x, y), region in expected.items():
        run = orc.diagonal_model_run(orc.DiagonalModel.power_law(x, y))
        regions[f"{x},{y}"] = run.region
        ok &= run.region == region and run.agrees and run.monotone
    return ok, {"regions": regions}


def _nearly_normal(rng, d):
    A = rm.normal(rng, d, 1.0)
    if rng.uniform() < 0.5:
        A = A + rng.uniform(0.0, 0.3) * rm.matrix(rng, d, 1.0)
    return A


def paranormal_products(seed):
    """Paranormal Kronecker products and symmetric powers force paranormal factors."""
    rng = _rng(seed, 13)
    counter = kron_premise = sym_premise = 0
    for _ in range(100):
        A1 = _nearly_normal(rng, int(rng.integers(1, 4)))
        A2 = _nearly_normal(rng, int(rng.integers(1, 4)))
        K = np.kron(A1, A2)
        if la.opnorm(K) > 0 and la.classify_matrix(K).paranormal:
            kron_premise += 1
            counter += not (la.classify_matrix(A1).paranormal and la.classify_matrix(A2).paranormal)
        A = _nearly_normal(rng, int(rng.integers(1, 4)))
        S = sym_power_matrix(A, int(rng.integers(2, 4)))
        if la.opnorm(S) > 0 and la.classify_matrix(S).paranormal:
            sym_premise += 1
            counter += not la.classify_matrix(A).paranormal
    return counter == 0, {"counterexamples": counter, "kron_premise_cases": kron_premise, "sym_premise_cases": sym_premise, "trials": 100}


def conjugation(seed):
    """Entrywise conjugation conjugates the spectrum and commutes with the modulus."""
    rng = _rng(seed, 14)
    spec_worst = mod_worst = 0.0
    for _ in range(100):
        A = rm.matrix(rng, int(rng.integers(1, 6)), rng.uniform(0.1, 2.0))
        X = la.conjugate_reflect(A)
        w1 = la.eigenvalues(X)
        w2 = np.conj(la.eigenvalues(A))
        D = np.abs(w1[:, None] - w2[None, :])
        spec_worst = max(spec_worst, float(max(D.min(axis=0).max(), D.min(axis=1).max())))
        mod_worst = max(mod_worst, la.opnorm(la.modulus(X) - la.conjugate_reflect(la.modulus(A))))
    return spec_worst <= 1e-9 and mod_worst <= 1e-9, {"spectrum_hausdorff_worst": spec_worst, "modulus_worst": mod_worst, "cases": 100}


CRITERIA = (
    (1, "norm_formula", ("norm", "affine", "exp"), norm_formula),
    (2, "norm_profile", ("norm", "linear"), norm_profile),
    (3, "adjoint_identity", ("fock", "adjoint"), adjoint_identity),
    (4, "fock_model", ("fock", "symmetric_power"), fock_model),
    (5, "positivity", ("classes", "positive"), positivity),
    (6, "seminormality", ("classes", "hyponormal"), seminormality),
    (7, "loewner_bridge", ("loewner", "kernel"), loewner_bridge),
    (8, "generalized_inverses", ("linalg", "loewner"), generalized_inverses),
    (9, "iterates", ("affine", "exp", "iterate"), iterates),
    (10, "gaussian_l2", ("l2",), gaussian_l2),
    (11, "shift_model", ("affine", "sequence", "shift"), shift_model),
    (12, "diagonal_model", ("affine", "sequence", "diagonal"), diagonal_model),
    (13, "paranormal_products", ("linalg", "paranormal"), paranormal_products),
    (14, "conjugation", ("linalg", "conjugation"), conjugation),
)


def select(filter_name=None):
    """Criteria whose number, name or a tag matches ``filter_name`` (all when ``None``)."""
    if not filter_name:
        return list(CRITERIA)
    return [c for c in CRITERIA if filter_name in (str(c[0]), c[1]) or filter_name in c[2]]


def run_criterion(entry, seed=0):
    number, name, tags, fn = entry
    passed, detail = fn(seed)
    return Row(number, name, tags, bool(passed), detail)


def run_suite(seed=0, filter_name=None):
    return [run_criterion(c, seed) for c in select(filter_name)]
