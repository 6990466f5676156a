"""Pointwise shallow water physics: state, fluxes, sources, wave speed.

Conventions used throughout the solver:
  * H is the water column height (depth), the first conserved variable.
  * The bathymetry field b is the depth of the bed below the datum
    (positive where the bed sits below the reference level), so the free
    surface elevation is eta = H - b. A lake at rest has eta constant.
  * The momentum flux carries the pressure term (g/2)(H^2 - b^2) and the
    bed source is g * eta * grad(b); the two cancel exactly on a lake at
    rest, which is the well-balanced property the tests assert.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GRAVITY = 9.81  # m/s^2


@dataclass
class State:
    """Conserved nodal state: H and momentum HU (component axis first)."""

    H: np.ndarray
    HU: np.ndarray  # shape (dim,) + H.shape

    @property
    def dim(self) -> int:
        return self.HU.shape[0]

    def copy(self) -> "State":
        return State(self.H.copy(), self.HU.copy())

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.H.ravel(), self.HU.ravel()])

    @classmethod
    def from_vector(cls, vec: np.ndarray, like: "State") -> "State":
        n = like.H.size
        H = vec[:n].reshape(like.H.shape)
        HU = vec[n:].reshape(like.HU.shape)
        return cls(H, HU)

    def __add__(self, other: "State") -> "State":
        return State(self.H + other.H, self.HU + other.HU)

    def __sub__(self, other: "State") -> "State":
        return State(self.H - other.H, self.HU - other.HU)

    def scaled(self, a: float) -> "State":
        return State(a * self.H, a * self.HU)


@dataclass(frozen=True)
class Bathymetry:
    """Static bed-depth field b and its nodal gradient."""

    b: np.ndarray
    grad: np.ndarray  # shape (dim,) + b.shape

    @classmethod
    def from_mesh(cls, mesh, values: np.ndarray) -> "Bathymetry":
        values = np.asarray(values, dtype=float)
        grad = np.stack([mesh.deriv(values, axis=a) for a in range(mesh.dim)])
        return cls(values, grad)


# velocity recovery is exact above REGULARIZATION_FACTOR * threshold and
# smoothly bounded below it, which keeps nearly-dry nodes from acquiring
# huge velocities out of round-off-scale momentum
REGULARIZATION_FACTOR = 10.0


def velocity(state: State, threshold: float = 0.0) -> np.ndarray:
    """Primitive velocity HU/H; nodes with H below the wet threshold get u = 0.

    Between the threshold and REGULARIZATION_FACTOR times it, the division
    is desingularized: u = sqrt(2) H HU / sqrt(H^4 + Hc^4), which equals
    HU/H exactly once H >= Hc and decays to zero with H. A threshold of
    zero recovers plain division on every H > 0 node.
    """
    wet = state.H > threshold
    if threshold <= 0.0:
        H_safe = np.where(wet, state.H, 1.0)
        return np.where(wet[None], state.HU / H_safe[None], 0.0)
    Hc = REGULARIZATION_FACTOR * threshold
    H = np.maximum(state.H, 0.0)
    denom = np.sqrt(0.5 * (H**4 + np.maximum(H, Hc) ** 4))
    u = state.HU * (H / np.maximum(denom, 1e-300))[None]
    return np.where(wet[None], u, 0.0)


def flux(state: State, bathy: Bathymetry, threshold: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Inviscid flux tensor F(q) at every node.

    Returns (mass_flux, momentum_flux) with shapes (dim,)+s and
    (dim, dim)+s; momentum_flux[a, c] is the a-direction flux of the
    c-momentum, including the (g/2)(H^2 - b^2) pressure on the diagonal.
    """
    u = velocity(state, threshold)
    dim = state.dim
    mom = np.empty((dim, dim) + state.H.shape)
    pressure = 0.5 * GRAVITY * (state.H**2 - bathy.b**2)
    for a in range(dim):
        for c in range(dim):
            mom[a, c] = state.HU[c] * u[a]
            if a == c:
                mom[a, c] += pressure
    return state.HU.copy(), mom


def source(state: State, bathy: Bathymetry) -> np.ndarray:
    """Momentum source g * (H - b) * grad(b); the mass source is zero."""
    eta = state.H - bathy.b
    return GRAVITY * eta[None] * bathy.grad


def wave_speed(state: State, threshold: float = 0.0) -> np.ndarray:
    """Maximum wave speed |u| + sqrt(g H) per node; H is the water height."""
    if np.any(state.H < 0):
        raise ValueError("negative water height in wave_speed")
    return _wave_speed_clamped(state, threshold)


def _wave_speed_clamped(state: State, threshold: float = 0.0) -> np.ndarray:
    """Wave speed tolerant of slightly negative H (used on Newton iterates)."""
    u = velocity(state, threshold)
    speed = np.sqrt(np.sum(u * u, axis=0))
    return speed + np.sqrt(GRAVITY * np.maximum(state.H, 0.0))
