"""Seeded random test matrices."""

import numpy as np


def complex_gaussian(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def matrix(rng, d, norm=None):
    A = complex_gaussian(rng, (d, d))
    if norm is not None:
        A *= norm / np.linalg.norm(A, 2)
    return A


def vector(rng, d, norm=None):
    v = complex_gaussian(rng, d)
    if norm is not None:
        v *= norm / np.linalg.norm(v)
    return v


def unitary(rng, d):
    Q, R = np.linalg.qr(complex_gaussian(rng, (d, d)))
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def hermitian(rng, d, eigenvalues=None):
    U = unitary(rng, d)
    w = rng.uniform(-1, 1, d) if eigenvalues is None else np.asarray(eigenvalues, dtype=float)
    return (U * w) @ U.conj().T


def psd(rng, d, rank=None, low=0.1, high=2.0):
    rank = d if rank is None else rank
    w = np.zeros(d)
    w[:rank] = rng.uniform(low, high, rank)
    return hermitian(rng, d, w)


def normal(rng, d, radius=1.0):
    U = unitary(rng, d)
    lam = radius * np.sqrt(rng.uniform(0, 1, d)) * np.exp(2j * np.pi * rng.uniform(0, 1, d))
    return (U * lam) @ U.conj().T


def with_singular_values(rng, s):
    d = len(s)
    return (unitary(rng, d) * np.asarray(s, dtype=float)) @ unitary(rng, d).conj().T
