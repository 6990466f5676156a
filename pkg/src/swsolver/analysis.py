"""Diagnostics: quadrature error norms, convergence rates, 1D energy
spectra on an equispaced resampling, shoreline tracking, total variation,
and mass accounting.
"""
from __future__ import annotations

import csv
import logging

import numpy as np

from .basis import lagrange_interp_matrix
from .swe import State

log = logging.getLogger(__name__)


def l2_error(numeric: np.ndarray, reference: np.ndarray,
             quad_weights: np.ndarray, mask: np.ndarray | None = None) -> float:
    """Normalized L2 error sqrt(int (a-b)^2) / sqrt(int b^2) by LGL quadrature.

    An optional boolean mask restricts both integrals to a sub-region
    (e.g. the analytically wet part of a moving-shoreline solution).
    Falls back to the absolute norm when the reference is zero.
    """
    w = quad_weights
    if mask is not None:
        w = np.where(mask, w, 0.0)
    err = float(np.sqrt(np.sum(w * (numeric - reference) ** 2)))
    ref = float(np.sqrt(np.sum(w * reference**2)))
    return err / ref if ref > 0 else err


def convergence_rate(h: np.ndarray, errors: np.ndarray) -> float:
    """Least-squares slope of log(error) vs log(h) over a refinement sweep."""
    h = np.asarray(h, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if h.size != errors.size or h.size < 2:
        raise ValueError("need matching h/error sequences of length >= 2")
    if np.any(errors <= 0):
        raise ValueError("errors must be positive for a log-log fit")
    order = np.argsort(h)[::-1]  # coarse to fine
    e_sorted = errors[order]
    if np.any(np.diff(e_sorted) > 0):
        log.warning("non-monotone error sequence in convergence fit: %s", e_sorted)
    slope = np.polyfit(np.log(h), np.log(errors), 1)[0]
    return float(slope)


def resample_equispaced(field: np.ndarray, mesh,
                        points_per_element: int = 4) -> tuple[np.ndarray, float]:
    """Interpolate a 1D element field onto a uniform grid.

    Uses cell-centred sample points so the global spacing is exactly
    uniform across element boundaries. Returns (samples, spacing).
    """
    if mesh.dim != 1:
        raise ValueError("equispaced resampling is defined for 1D meshes")
    m = points_per_element
    xi = -1.0 + (2.0 * np.arange(m) + 1.0) / m
    P = lagrange_interp_matrix(mesh.basis.nodes, xi)
    samples = (field @ P.T).reshape(-1)
    return samples, mesh.dx / m


def energy_spectrum_1d(samples: np.ndarray, spacing: float
                       ) -> tuple[np.ndarray, np.ndarray]:
    """One-sided energy spectrum E(k) = 1/2 |u_hat|^2 of a uniform signal.

    The transform is normalized so that 2 sum_k E(k) equals the mean
    square of the signal (discrete Parseval identity).
    """
    n = samples.size
    c = np.fft.rfft(samples) / n
    E = 0.5 * np.abs(c) ** 2
    E[1:] *= 2.0
    if n % 2 == 0 and n > 1:
        E[-1] *= 0.5  # the Nyquist bin is not doubled
    k = 2.0 * np.pi * np.fft.rfftfreq(n, d=spacing)
    return k, E


def top_decade_energy(k: np.ndarray, E: np.ndarray) -> float:
    """Energy summed over the top decade of resolved wavenumbers."""
    kmax = k[-1]
    sel = k >= kmax / 10.0
    return float(np.sum(E[sel]))


def shoreline_position(H: np.ndarray, x: np.ndarray, threshold: float) -> float:
    """Largest coordinate still wet, with wetness taken as H > 2 threshold.

    The doubled threshold keeps the thin dry layer (which sits exactly at
    the threshold) from registering as wet. Returns -inf when nothing is.
    """
    wet = H > 2.0 * threshold
    if not np.any(wet):
        return float("-inf")
    return float(np.max(x[wet]))


def total_variation(samples: np.ndarray) -> float:
    """Discrete total variation sum |f_{i+1} - f_i| of a 1D sample line."""
    return float(np.sum(np.abs(np.diff(np.asarray(samples, dtype=float)))))


def total_mass(state: State, mesh) -> float:
    """Quadrature integral of the water column over the domain."""
    return float(np.sum(mesh.quad_weights() * state.H))


def centerline(field: np.ndarray, mesh, j_node: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Extract (x, values) along a horizontal node line of a 2D mesh.

    Picks the element row whose y-range contains the domain mid-height
    and a fixed local node index within it (middle node by default).
    """
    if mesh.dim != 2:
        raise ValueError("centerline extraction is defined for 2D meshes")
    y_mid = 0.5 * (mesh.extents[1, 0] + mesh.extents[1, 1])
    ey = min(int((y_mid - mesh.extents[1, 0]) / mesh.dy), mesh.nely - 1)
    j = mesh.basis.n_nodes // 2 if j_node is None else j_node
    rows = [mesh.elem_index(i, ey) for i in range(mesh.nelx)]
    xs = np.concatenate([mesh.x[e, :, j] for e in rows])
    vals = np.concatenate([field[e, :, j] for e in rows])
    order = np.argsort(xs)
    return xs[order], vals[order]


def write_csv(path, header_comment: str, columns: dict) -> None:
    """Write named columns to CSV with a leading '#' provenance comment."""
    names = list(columns)
    arrays = [np.atleast_1d(np.asarray(columns[n])) for n in names]
    n_rows = max(a.size for a in arrays)
    with open(path, "w", newline="") as fh:
        fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(names)
        for i in range(n_rows):
            writer.writerow([repr(float(a[i])) if i < a.size else ""
                             for a in arrays])
