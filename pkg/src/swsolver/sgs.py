"""Residual-based dynamic sub-grid eddy viscosity.

The element-wise coefficient is the residual-scaled value
    mu_res|_e = W^2 max( |R_H|_{inf,e} / |H - mean(H)|_{inf,domain},
                         |R_HU|_{inf,e} / |HU - mean(HU)|_{inf,domain} )
clamped between 0 and the first-order upwind bound
    mu_max|_e = 0.5 W |wave speed|_{inf,e},
with W the per-element filter width min(dx, dy)/(N+1). It vanishes on
exactly steady states because the strong PDE residual does.
"""
from __future__ import annotations

import numpy as np

from .swe import State, _wave_speed_clamped

# relative floor below which an inf-norm denominator is treated as zero
DENOMINATOR_GUARD = 1e-14
# residuals smaller than this fraction of the magnitude of the terms that
# cancel to produce them are indistinguishable from round-off and count
# as zero (a discrete steady state never cancels exactly in floats)
CANCELLATION_GUARD = 1e-12


def residuals(op, state: State, state_prev: State | None, dt: float) -> np.ndarray:
    """Strong-form residual of the inviscid equations, stacked (nvar, ...).

    The time derivative is a first-order backward difference of the two
    stored states; with no history (first step) it is taken as zero.
    """
    if dt <= 0:
        raise ValueError("dt must be positive in residual evaluation")
    r = op.strong_divergence(state)
    if state_prev is not None:
        q = np.concatenate([state.H[None], state.HU])
        qp = np.concatenate([state_prev.H[None], state_prev.HU])
        r += (q - qp) / dt
    return r


def _elem_max(field: np.ndarray) -> np.ndarray:
    return np.max(np.abs(field), axis=tuple(range(1, field.ndim)))


def residual_roundoff_scale(op, state: State, state_prev: State | None,
                            dt: float) -> np.ndarray:
    """Per-variable, per-element magnitude of the residual's ingredients.

    Bounds the round-off left after the divergence/source/time-difference
    cancellation: sum over directions of |D|-scaled flux magnitudes, plus
    the source and q/dt magnitudes. Shape (nvar, nelem).
    """
    mesh = op.mesh
    D = mesh.basis.diff_matrix
    d_norm = float(np.max(np.sum(np.abs(D), axis=1)))
    fluxes = op._fluxes(state)
    src = op._source(state)
    nvar = 1 + state.dim
    scale = np.zeros((nvar, mesh.nelem))
    for a in range(mesh.dim):
        h = mesh.dx if a == 0 else mesh.dy
        for v in range(nvar):
            scale[v] += (2.0 / h) * d_norm * _elem_max(fluxes[a][v])
    for v in range(nvar):
        scale[v] += _elem_max(src[v])
    if state_prev is not None:
        q = np.concatenate([state.H[None], state.HU])
        qp = np.concatenate([state_prev.H[None], state_prev.HU])
        for v in range(nvar):
            scale[v] += (_elem_max(q[v]) + _elem_max(qp[v])) / dt
    return scale


def _guarded_ratio(num_elem: np.ndarray, field: np.ndarray,
                   mean: float) -> np.ndarray:
    """Element ratio |R|_e / |f - mean|_domain, zero when the denominator
    is negligible relative to the field scale."""
    den = np.max(np.abs(field - mean))
    scale = max(1.0, float(np.max(np.abs(field))))
    if den < DENOMINATOR_GUARD * scale:
        return np.zeros_like(num_elem)
    return num_elem / den


def mu_res(resid: np.ndarray, state: State, quad_w: np.ndarray,
           filter_width: np.ndarray,
           num_floor: np.ndarray | None = None) -> np.ndarray:
    """Residual-based per-element coefficient (before clamping).

    num_floor (nvar, nelem), if given, zeroes element residual norms that
    fall below it — see residual_roundoff_scale.
    """
    wtot = np.sum(quad_w)

    def num(v):
        n = _elem_max(resid[v])
        if num_floor is not None:
            n = np.where(n < CANCELLATION_GUARD * num_floor[v], 0.0, n)
        return n

    mean_H = float(np.sum(quad_w * state.H) / wtot)
    ratio = _guarded_ratio(num(0), state.H, mean_H)
    for c in range(state.dim):
        mean_c = float(np.sum(quad_w * state.HU[c]) / wtot)
        rc = _guarded_ratio(num(1 + c), state.HU[c], mean_c)
        ratio = np.maximum(ratio, rc)
    return filter_width**2 * ratio


def mu_max(state: State, filter_width: np.ndarray,
           threshold: float = 0.0) -> np.ndarray:
    """Upwind-scale clamp 0.5 W max over element nodes of |u| + sqrt(gH)."""
    lam = _wave_speed_clamped(state, threshold)
    return 0.5 * filter_width * _elem_max(lam)


def mu_sgs(mu_res_e: np.ndarray, mu_max_e: np.ndarray) -> np.ndarray:
    """Element-wise clamp max(0, min(mu_max, mu_res))."""
    return np.maximum(0.0, np.minimum(mu_max_e, mu_res_e))


def dynamic_viscosity(op, state: State, state_prev: State | None,
                      dt: float) -> np.ndarray:
    """Per-element mu_SGS for the current step (frozen during stage solves)."""
    r = residuals(op, state, state_prev, dt)
    fw = op.mesh.filter_width()
    floor = residual_roundoff_scale(op, state, state_prev, dt)
    m_res = mu_res(r, state, op.mesh.quad_weights(), fw, num_floor=floor)
    m_max = mu_max(state, fw, op.threshold)
    return mu_sgs(m_res, m_max)
