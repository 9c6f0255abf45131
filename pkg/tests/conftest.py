"""Shared fixtures and independent brute-force oracles.

Oracle code here deliberately avoids the library's enumeration and DP paths:
counts and value sets come from full-box grids evaluated with a plain einsum.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from qflab.forms import build_form, diagonal_form
from qflab.scalars import ExactScalar


def brute_points(radius: int, dim: int) -> np.ndarray:
    axes = [np.arange(-radius, radius + 1)] * dim
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def brute_count(mat: np.ndarray, a, s: float) -> int:
    """Exact count of x in Z^d with Q[x-a] <= s by full-box enumeration."""
    a = np.asarray(a, dtype=float)
    d = mat.shape[0]
    evals = np.linalg.eigvalsh(mat)
    radius = int(math.floor(math.sqrt(s / evals.min()) + np.max(np.abs(a)))) + 1
    X = brute_points(radius, d)
    Y = X.astype(float) - a
    vals = np.einsum("ij,jk,ik->i", Y, mat, Y)
    return int(np.count_nonzero(vals <= s))


def brute_values(mat: np.ndarray, a, radius: int, window) -> np.ndarray:
    """Sorted distinct values of Q[x-a] over the box, inside (alpha, beta]."""
    alpha, beta = window
    a = np.asarray(a, dtype=float)
    X = brute_points(radius, mat.shape[0])
    Y = X.astype(float) - a
    vals = np.einsum("ij,jk,ik->i", Y, mat, Y)
    vals = vals[(vals > alpha) & (vals <= beta)]
    out = np.sort(np.unique(vals))
    merged = []
    for v in out:
        if merged and v - merged[-1] <= 1e-9 * max(1.0, abs(alpha), abs(beta)):
            continue
        merged.append(v)
    return np.array(merged)


@pytest.fixture(scope="session")
def identity2():
    return build_form([[1, 0], [0, 1]])


@pytest.fixture(scope="session")
def identity9():
    return build_form([[1 if i == j else 0 for j in range(9)] for i in range(9)])


@pytest.fixture(scope="session")
def surd9():
    """The d = 9 irrational diagonal test form diag(1 + sqrt(2) k / 4)."""
    return diagonal_form([ExactScalar(1) + ExactScalar.sqrt(2) * Fraction(k, 4)
                          for k in range(9)])


@pytest.fixture(scope="session")
def hyperbolic2():
    return build_form([[1, 0], [0, -1]], normalize=False)
