"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is picked once at import time from the SWSOLVER_BACKEND
environment variable: "numba", "numpy", or "auto" (default; numba if
importable). Both paths compute identical sequential reductions so runs
are deterministic regardless of backend.
"""
from __future__ import annotations

import os

import numpy as np

_choice = os.environ.get("SWSOLVER_BACKEND", "auto").lower()
if _choice not in ("auto", "numba", "numpy"):
    raise ValueError(f"SWSOLVER_BACKEND must be auto|numba|numpy, got {_choice!r}")

_use_numba = False
if _choice in ("auto", "numba"):
    try:
        import numba  # noqa: F401

        _use_numba = True
    except ImportError:
        if _choice == "numba":
            raise


def backend_name() -> str:
    return "numba" if _use_numba else "numpy"


# ---------------------------------------------------------------- numpy path

def _deriv_1d_np(f, D):
    # f: (nelem, n) nodal values; returns D f per element (reference deriv)
    return f @ D.T


def _deriv_x_np(f, D):
    # f: (nelem, nx, ny); derivative along axis 1
    return np.einsum("im,emj->eij", D, f)


def _deriv_y_np(f, D):
    # f: (nelem, nx, ny); derivative along axis 2
    return np.einsum("jm,eim->eij", D, f)


def _scatter_add_np(out, idx, vals):
    np.add.at(out, idx.ravel(), vals.ravel())
    return out


# ---------------------------------------------------------------- numba path

if _use_numba:
    from numba import njit

    @njit(cache=True)
    def _deriv_1d_nb(f, D):
        nelem, n = f.shape
        out = np.zeros((nelem, n))
        for e in range(nelem):
            for i in range(n):
                acc = 0.0
                for m in range(n):
                    acc += D[i, m] * f[e, m]
                out[e, i] = acc
        return out

    @njit(cache=True)
    def _deriv_x_nb(f, D):
        nelem, nx, ny = f.shape
        out = np.zeros((nelem, nx, ny))
        for e in range(nelem):
            for j in range(ny):
                for i in range(nx):
                    acc = 0.0
                    for m in range(nx):
                        acc += D[i, m] * f[e, m, j]
                    out[e, i, j] = acc
        return out

    @njit(cache=True)
    def _deriv_y_nb(f, D):
        nelem, nx, ny = f.shape
        out = np.zeros((nelem, nx, ny))
        for e in range(nelem):
            for i in range(nx):
                for j in range(ny):
                    acc = 0.0
                    for m in range(ny):
                        acc += D[j, m] * f[e, i, m]
                    out[e, i, j] = acc
        return out

    @njit(cache=True)
    def _scatter_add_nb(out, idx, vals):
        flat_idx = idx.ravel()
        flat_vals = vals.ravel()
        for k in range(flat_idx.size):
            out[flat_idx[k]] += flat_vals[k]
        return out


if _use_numba:
    deriv_1d = _deriv_1d_nb
    deriv_x = _deriv_x_nb
    deriv_y = _deriv_y_nb
    _scatter_add = _scatter_add_nb
else:
    deriv_1d = _deriv_1d_np
    deriv_x = _deriv_x_np
    deriv_y = _deriv_y_np
    _scatter_add = _scatter_add_np


def scatter_add(out: np.ndarray, idx: np.ndarray, vals: np.ndarray) -> np.ndarray:
    """Sequential scatter-add of vals into out at idx (duplicates accumulate)."""
    return _scatter_add(out, np.ascontiguousarray(idx), np.ascontiguousarray(vals))
