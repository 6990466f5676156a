"""Legendre-Gauss-Lobatto nodal basis on the reference element [-1, 1].

Provides LGL quadrature nodes/weights and the Lagrange differentiation
matrix for elements of order N. Quadrature and interpolation points are
collocated (inexact integration), which makes element mass matrices
diagonal.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg

_NEWTON_TOL = 1e-14
_NEWTON_MAXIT = 100


@dataclass(frozen=True)
class BasisSet:
    """Order-N nodal basis: LGL nodes, weights, and differentiation matrix.

    Attributes:
        order: polynomial order N >= 1 (N+1 nodes per direction).
        nodes: strictly increasing LGL nodes in [-1, 1], endpoints included.
        weights: positive quadrature weights summing to 2.
        diff_matrix: D[i, j] = dl_j/dx at node i for the Lagrange cardinal
            polynomials l_j.
    """

    order: int
    nodes: np.ndarray
    weights: np.ndarray
    diff_matrix: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.order + 1


def lgl_nodes(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Compute the N+1 LGL nodes and quadrature weights for order N.

    Nodes are the roots of (1 - x^2) P'_N(x), found by Newton iteration
    from Chebyshev-Gauss-Lobatto initial guesses; weights are
    2 / (N (N+1) P_N(x_i)^2). Exact for polynomials up to degree 2N-1.
    """
    if N < 1:
        raise ValueError(f"basis order must be >= 1, got {N}")
    n = N + 1
    # coefficient vector of P_N in the Legendre basis
    cN = np.zeros(n)
    cN[-1] = 1.0
    dcN = npleg.legder(cN)
    d2cN = npleg.legder(cN, 2)

    x = -np.cos(np.pi * np.arange(n) / N)
    for _ in range(_NEWTON_MAXIT):
        # f = (1 - x^2) P'_N, solved by Newton on the interior nodes
        p1 = npleg.legval(x, dcN)
        p2 = npleg.legval(x, d2cN)
        f = (1.0 - x * x) * p1
        df = -2.0 * x * p1 + (1.0 - x * x) * p2
        dx = np.zeros_like(x)
        interior = slice(1, N)
        dx[interior] = f[interior] / df[interior]
        x[interior] -= dx[interior]
        if np.max(np.abs(dx)) < _NEWTON_TOL:
            break
    x[0], x[-1] = -1.0, 1.0
    # enforce symmetry so nodes are reproducible to round-off
    x = 0.5 * (x - x[::-1])

    w = 2.0 / (N * n * npleg.legval(x, cN) ** 2)
    return x, w


def diff_matrix(nodes: np.ndarray) -> np.ndarray:
    """Lagrange differentiation matrix for arbitrary distinct nodes.

    Uses the barycentric form; row sums vanish by construction since the
    diagonal is set to minus the sum of the off-diagonal entries.
    """
    x = np.asarray(nodes, dtype=float)
    n = x.size
    diffs = x[:, None] - x[None, :]
    if np.any(np.abs(diffs[~np.eye(n, dtype=bool)]) == 0.0):
        raise ValueError("duplicate nodes in differentiation matrix")
    np.fill_diagonal(diffs, 1.0)
    # barycentric weights
    bw = 1.0 / np.prod(diffs, axis=1)
    D = (bw[None, :] / bw[:, None]) / diffs
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def make_basis(N: int) -> BasisSet:
    """Build the order-N LGL basis set."""
    x, w = lgl_nodes(N)
    return BasisSet(order=N, nodes=x, weights=w, diff_matrix=diff_matrix(x))


def lagrange_interp_matrix(nodes: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Matrix P with P[i, j] = l_j(targets[i]) for Lagrange cardinals on nodes.

    Used to resample LGL nodal data onto auxiliary (e.g. equispaced) grids.
    """
    x = np.asarray(nodes, dtype=float)
    t = np.asarray(targets, dtype=float)
    n = x.size
    diffs = x[:, None] - x[None, :]
    np.fill_diagonal(diffs, 1.0)
    bw = 1.0 / np.prod(diffs, axis=1)
    P = np.empty((t.size, n))
    for i, ti in enumerate(t):
        d = ti - x
        hit = np.isclose(d, 0.0, atol=1e-14)
        if np.any(hit):
            row = np.zeros(n)
            row[np.argmax(hit)] = 1.0
        else:
            c = bw / d
            row = c / c.sum()
        P[i] = row
    return P
