"""Thin-layer drying treatment and the positivity-preserving limiter.

Dry regions always carry a thin water layer of `epsilon` metres. Elements
whose minimum nodal H drops below the threshold are rescaled about their
quadrature mean (which is preserved exactly), momentum is rebuilt from
the pre-limit velocity with the dry-node clamp, and the thin layer is
re-applied. For CG runs a multiplicity-weighted average restores
continuity at shared nodes afterwards.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .swe import State, velocity


class LimiterPreconditionError(RuntimeError):
    """Raised when an element mean water height is non-positive."""


@dataclass(frozen=True)
class WetDryConfig:
    epsilon: float = 1e-3       # wet threshold (m)
    skirt_factor: float = 2.0   # momentum is zeroed where H <= factor * epsilon
    u_cap: float = np.inf       # speed bound, e.g. twice the initial max
    #                             wave speed (a Riemann-invariant estimate)

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("wet threshold must be positive")
        if self.skirt_factor < 1.0:
            raise ValueError("skirt factor must be >= 1")
        if not self.u_cap > 0:
            raise ValueError("velocity cap must be positive")


@dataclass
class LimiterStats:
    nodes_clamped: int = 0
    elements_limited: int = 0
    mean_fallbacks: int = 0      # elements reset to the thin layer (mean <= 0)
    mass_correction: float = 0.0  # water removed again by the global repair
    nodes_speed_capped: int = 0


def apply_thin_layer(state: State, config: WetDryConfig,
                     quad_weights: np.ndarray | None = None) -> tuple[State, int]:
    """Clamp H up to the thin-layer threshold, zeroing momentum where clamped.

    With quadrature weights supplied the clamp is mass-compensating per
    element: the water added on the dry nodes is withdrawn from the wet
    nodes of the same element (scaling their excess above the threshold),
    so the element mass is unchanged whenever the element holds enough
    water. Only elements clamped in their entirety gain the thin layer.
    """
    # inclusive comparison: a node sitting exactly at the threshold is dry,
    # so previously clamped nodes cannot accumulate momentum step by step
    dryn = state.H <= config.epsilon
    n_clamped = int(np.count_nonzero(dryn))
    H = np.where(dryn, config.epsilon, state.H)
    HU = np.where(dryn[None], 0.0, state.HU)
    if quad_weights is not None and n_clamped:
        axes = tuple(range(1, H.ndim))
        eps = config.epsilon
        excess = np.where(dryn, 0.0, state.H - eps)  # > 0 on wet nodes
        budget = np.sum(quad_weights * excess, axis=axes)
        added = np.sum(quad_weights * np.where(dryn, eps - state.H, 0.0), axis=axes)
        scale = np.where(budget > added,
                         1.0 - added / np.maximum(budget, 1e-300), 0.0)
        shape = (-1,) + (1,) * (H.ndim - 1)
        H = np.where(dryn, eps, eps + scale.reshape(shape) * excess)
        HU = np.where(H[None] <= eps, 0.0, HU)
    return State(H, HU), n_clamped


def element_means(H: np.ndarray, quad_weights: np.ndarray) -> np.ndarray:
    """LGL-quadrature average of H per element."""
    axes = tuple(range(1, H.ndim))
    return np.sum(quad_weights * H, axis=axes) / np.sum(quad_weights, axis=axes)


def positivity_limiter(state: State, quad_weights: np.ndarray,
                       config: WetDryConfig,
                       trigger: float | None = None) -> tuple[State, int]:
    """Mean-preserving rescale of depth and velocity on flagged elements.

    trigger is the flagging threshold (defaults to the wet threshold;
    limit_all passes 0 so that the rescale only fires on genuinely
    negative nodal values and the thin-layer clamp absorbs the band
    between 0 and the threshold, which avoids rescaling the front
    element at every single stage).

    Elements whose minimum nodal H falls below the trigger are rescaled
    about their quadrature mean with theta = min(1, mean / (mean - min)),
    which maps the minimum node to zero while keeping the element mean
    unchanged. The velocity is rescaled about its element mean with the
    same theta (the limiter acts on water depth and velocity), and the
    momentum is rebuilt as (limited H) * (limited velocity) with the
    dry-node velocity clamp. Elements that need no limiting are returned
    bit-identically.
    """
    if trigger is None:
        trigger = config.epsilon
    axes = tuple(range(1, state.H.ndim))
    means = element_means(state.H, quad_weights)
    mins = np.min(state.H, axis=axes)
    needs = mins < trigger
    if not np.any(needs):
        return state, 0
    if np.any(means[needs] <= 0.0):
        bad = int(np.argmax(needs & (means <= 0.0)))
        raise LimiterPreconditionError(
            f"element {bad}: mean water height {means[bad]:.3e} <= 0; "
            "positivity rescale is not applicable")

    theta = np.where(needs, np.minimum(1.0, means / np.maximum(means - mins, 1e-300)), 1.0)
    shape = (-1,) + (1,) * (state.H.ndim - 1)
    th = theta.reshape(shape)
    mb = means.reshape(shape)
    sel = needs.reshape(shape)
    u_pre = velocity(state, config.epsilon)

    H = np.where(sel, th * (state.H - mb) + mb, state.H)
    wtot = np.sum(quad_weights, axis=axes).reshape(shape)
    u_lim = np.empty_like(u_pre)
    for c in range(state.dim):
        u_mean = (np.sum(quad_weights * u_pre[c], axis=axes).reshape(shape)
                  / wtot)
        u_lim[c] = np.where(sel, u_mean + th * (u_pre[c] - u_mean), u_pre[c])
    HU = np.where(sel[None], H[None] * u_lim, state.HU)
    return State(H, HU), int(np.count_nonzero(needs))


def limit_all(state: State, mesh, config: WetDryConfig,
              method: str = "DG") -> tuple[State, LimiterStats]:
    """Full limiting pass: positivity rescale, thin layer, CG re-averaging.

    Elements whose quadrature mean is non-positive (possible in unlimited
    intermediate stage states at a steep front) cannot be rescaled; they
    are reset to the dry thin layer, and the event is counted.
    """
    qw = mesh.quad_weights()
    H_in = state.H
    axes = tuple(range(1, state.H.ndim))
    bad = (element_means(state.H, qw) <= 0.0) & \
        (np.min(state.H, axis=axes) < config.epsilon)
    n_bad = int(np.count_nonzero(bad))
    if n_bad:
        shape = (-1,) + (1,) * (state.H.ndim - 1)
        sel = bad.reshape(shape)
        state = State(np.where(sel, config.epsilon, state.H),
                      np.where(sel[None], 0.0, state.HU))
    limited, n_elems = positivity_limiter(state, qw, config, trigger=0.0)
    limited, n_nodes = apply_thin_layer(limited, config, quad_weights=qw)
    # momentum skirt: the thin film bordering dry areas carries no momentum,
    # which stops step-by-step accumulation of spurious velocity there
    skirt = limited.H <= config.skirt_factor * config.epsilon
    if np.any(skirt):
        limited = State(limited.H, np.where(skirt[None], 0.0, limited.HU))
    # velocity cap: momentum on nearly dry nodes can imply speeds far above
    # anything the wave dynamics admits; rescale it so |u| <= u_cap
    n_capped = 0
    if np.isfinite(config.u_cap):
        u = velocity(limited, config.epsilon)
        speed = np.sqrt(np.sum(u * u, axis=0))
        over = speed > config.u_cap
        n_capped = int(np.count_nonzero(over))
        if n_capped:
            factor = np.where(over, config.u_cap / np.maximum(speed, 1e-300), 1.0)
            limited = State(limited.H, limited.HU * factor[None])
    if method.upper() == "CG" and (n_elems > 0 or n_nodes > 0 or n_bad > 0
                                   or n_capped > 0):
        H = mesh.cg_average(limited.H)
        HU = np.stack([mesh.cg_average(limited.HU[c]) for c in range(limited.dim)])
        limited = State(H, HU)
    # global mass repair: flooring water-deficient elements creates spurious
    # mass; withdraw exactly that much from comfortably wet nodes, scaling
    # their excess above the skirt level uniformly
    surplus = float(np.sum(qw * (limited.H - H_in)))
    floor_h = config.skirt_factor * config.epsilon
    if surplus > 0.0:
        excess = np.maximum(limited.H - floor_h, 0.0)
        capacity = float(np.sum(qw * excess))
        if capacity > surplus:
            scale = 1.0 - surplus / capacity
            limited = State(np.where(excess > 0.0,
                                     floor_h + scale * (limited.H - floor_h),
                                     limited.H), limited.HU)
        else:
            surplus = 0.0  # nothing sensible to take it from; leave as is
    return limited, LimiterStats(nodes_clamped=n_nodes, elements_limited=n_elems,
                                 mean_fallbacks=n_bad, mass_correction=surplus,
                                 nodes_speed_capped=n_capped)
