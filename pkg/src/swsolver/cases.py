"""Benchmark definitions: bathymetries, initial states, analytic oracles.

The bathymetry formula functions below return the literature values
verbatim. The published formulas do not share one sign convention (the
1D bowl and the mounds/island are bed elevations, the 2D paraboloid is a
depth), so each setup function converts explicitly to the solver's
bed-depth-below-datum field; the conversion used is noted per case.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .basis import make_basis
from .mesh import Mesh, OUTFLOW, WALL
from .swe import Bathymetry, GRAVITY, State

log = logging.getLogger(__name__)

CASE_NAMES = ("carrier_runup", "bowl_1d", "paraboloid_2d", "three_mounds",
              "cone_island", "lake_at_rest")


@dataclass(frozen=True)
class CaseConfig:
    """Resolved benchmark configuration (standard defaults, overridable)."""

    case: str
    extents: tuple
    n_elements: tuple
    order: int = 4
    cfl: float = 0.2
    t_end: float = 10.0
    method: str = "CG"
    viscous: bool = True
    mass_diffusion: bool = False
    wet_threshold: float = 1e-3
    integrator: str = "rk4"  # rk4 | esdirk
    # for explicit integrators, additionally cap dt by the explicit-diffusion
    # stability limit; turning this off runs at the nominal advective CFL only
    diffusion_dt_guard: bool = True


@dataclass
class CaseSetup:
    config: CaseConfig
    mesh: Mesh
    bathymetry: Bathymetry
    state0: State
    analytic: object | None = None  # callable (x[, y], t) -> surface, if any


# --------------------------------------------------------------- 1D runup

CARRIER_CONSTANTS = (0.006, 0.018, 0.4444, 4.0, 4.1209, 1.6384)
CARRIER_DOMAIN = (-500.0, 50000.0)
CARRIER_BEACH_SLOPE = 0.1  # workshop benchmark: uniformly sloping 1:10 beach


def carrier_initial(x, scaled: bool = True) -> np.ndarray:
    """N-wave surface displacement of the offshore-landslide benchmark.

    With scaled=True the wave is stretched to the 50 km domain: positions
    scale by L/8, Gaussian widths by (L/8)^-2, and the amplitudes become
    (3.0, -8.8), keeping the crest/trough character of the original
    (0.006, 0.018) wave. Both exponentials decay away from their centres.
    """
    x = np.asarray(x, dtype=float)
    a1, a2, k1, k2, x1, x2 = CARRIER_CONSTANTS
    if scaled:
        ds = (CARRIER_DOMAIN[1] - 0.0) / 8.0
        x1, x2 = x1 * ds, x2 * ds
        k1, k2 = k1 / ds**2, k2 / ds**2
        a1, a2 = 3.0, -8.8
        return a1 * np.exp(-k1 * (x - x1) ** 2) + a2 * np.exp(-k2 * (x - x2) ** 2)
    return a1 * np.exp(-k1 * (x - x1) ** 2) - a2 * np.exp(-k2 * (x - x2) ** 2)


# --------------------------------------------------------------- 1D bowl

BOWL_H0 = 2.0
BOWL_A = 1.0
BOWL_TILT = 0.5  # initial planar surface slope


def bowl_bathymetry(x) -> np.ndarray:
    """Parabolic bed h0 x^2 / a^2 - 0.5 (bed elevation)."""
    x = np.asarray(x, dtype=float)
    return BOWL_H0 * (x / BOWL_A) ** 2 - 0.5


def bowl_analytic(x, t: float, tilt: float = BOWL_TILT) -> tuple[np.ndarray, float]:
    """Planar-oscillation closed form in the frictionless parabolic bowl.

    The free surface stays planar, eta(x, t) = A(t) + B(t) x, with
    B = tilt cos(w t), u spatially uniform, and w = sqrt(2 g h0) / a.
    Returns (surface elevation on the oscillation datum, velocity).
    """
    w = math.sqrt(2.0 * GRAVITY * BOWL_H0) / BOWL_A
    B = tilt * math.cos(w * t)
    A = GRAVITY * tilt**2 / (4.0 * w**2) * (1.0 - math.cos(2.0 * w * t))
    u = -(GRAVITY * tilt / w) * math.sin(w * t)
    return A + B * np.asarray(x, dtype=float), u


# --------------------------------------------------------------- 2D paraboloid

PARABOLOID_H0 = 0.2
PARABOLOID_A = 1.0


def paraboloid_bathymetry(x, y) -> np.ndarray:
    """Axisymmetric bowl h0 (1 - sqrt(x^2+y^2)/a^2) - 0.1 (bed depth)."""
    r = np.sqrt(np.asarray(x, dtype=float) ** 2 + np.asarray(y, dtype=float) ** 2)
    return PARABOLOID_H0 * (1.0 - r / PARABOLOID_A**2) - 0.1


def paraboloid_initial_surface(x, y, height: float = 0.05,
                               radius: float = 0.8) -> np.ndarray:
    """Reversed-paraboloid initial free surface bump, zero outside radius."""
    r2 = np.asarray(x, dtype=float) ** 2 + np.asarray(y, dtype=float) ** 2
    return np.maximum(0.0, height * (1.0 - r2 / radius**2))


# --------------------------------------------------------------- three mounds

MOUNDS_DOMAIN = ((0.0, 75.0), (0.0, 30.0))
DAM_POSITION = 16.0   # calibrated so the front reaches the back wall near t=15 s
DAM_DEPTH = 1.875


def three_mounds_bathymetry(x, y) -> np.ndarray:
    """Mound field max(0, m1, m2, m3) in the 75 x 30 m channel (elevation)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    m1 = 1.0 - 0.10 * np.sqrt((x - 30.0) ** 2 + (y - 22.5) ** 2)
    m2 = 1.0 - 0.10 * np.sqrt((x - 30.0) ** 2 + (y - 7.5) ** 2)
    m3 = 2.8 - 0.28 * np.sqrt((x - 47.5) ** 2 + (y - 15.0) ** 2)
    return np.maximum(0.0, np.maximum(m1, np.maximum(m2, m3)))


# --------------------------------------------------------------- cone island

ISLAND_DOMAIN = ((0.0, 25.0), (0.0, 30.0))
ISLAND_CENTER = (12.5, 15.0)
ISLAND_RADIUS = 3.6
ISLAND_HEIGHT_SLOPE = 0.93
ISLAND_H0 = 0.32
WAVE_AMPLITUDE = 0.064
WAVE_CENTER = 2.5


def cone_island_bathymetry(x, y) -> np.ndarray:
    """Conical island 0.93 (1 - r/r_c) inside r_c, zero outside (elevation)."""
    r = np.sqrt((np.asarray(x, dtype=float) - ISLAND_CENTER[0]) ** 2
                + (np.asarray(y, dtype=float) - ISLAND_CENTER[1]) ** 2)
    return np.where(r <= ISLAND_RADIUS,
                    ISLAND_HEIGHT_SLOPE * (1.0 - r / ISLAND_RADIUS), 0.0)


def solitary_wave(x, dimensional: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Solitary-wave surface and velocity.

    Default is the literal normalized form (A/h0) sech^2(gamma (x - x_c));
    dimensional=True uses amplitude A instead. The velocity follows the
    first-order solitary-wave relation u = eta sqrt(g / h0).
    """
    gamma = math.sqrt(3.0 * WAVE_AMPLITUDE / (4.0 * ISLAND_H0))
    amp = WAVE_AMPLITUDE if dimensional else WAVE_AMPLITUDE / ISLAND_H0
    eta = amp / np.cosh(gamma * (np.asarray(x, dtype=float) - WAVE_CENTER)) ** 2
    return eta, eta * math.sqrt(GRAVITY / ISLAND_H0)


# --------------------------------------------------------------- configuration

_DEFAULTS = {
    "carrier_runup": CaseConfig(
        "carrier_runup", (CARRIER_DOMAIN,), (1250,), t_end=220.0,
        method="CG", viscous=True),
    "bowl_1d": CaseConfig(
        "bowl_1d", ((-1.0, 1.0),), (32,), t_end=10.0),
    "paraboloid_2d": CaseConfig(
        "paraboloid_2d", ((-2.0, 2.0), (-2.0, 2.0)), (20, 20), t_end=10.0),
    "three_mounds": CaseConfig(
        "three_mounds", MOUNDS_DOMAIN, (15, 6), t_end=40.0),
    "cone_island": CaseConfig(
        "cone_island", ISLAND_DOMAIN, (16, 19), t_end=50.0),
    "lake_at_rest": CaseConfig(
        "lake_at_rest", ((-1.0, 1.0),), (16,), t_end=1.0),
}


def default_config(case: str, **overrides) -> CaseConfig:
    if case not in _DEFAULTS:
        raise ValueError(f"unknown case {case!r}; choose from {CASE_NAMES}")
    return replace(_DEFAULTS[case], **overrides)


def setup_case(config: CaseConfig) -> CaseSetup:
    """Mesh, solver bathymetry, and limited initial state for a benchmark."""
    basis = make_basis(config.order)
    eps = config.wet_threshold
    name = config.case

    if name == "carrier_runup":
        # offshore boundary kept open; the shore side is a dry wall
        mesh = Mesh(basis, config.extents, config.n_elements,
                    bc={"left": WALL, "right": OUTFLOW})
        b = mesh.x * CARRIER_BEACH_SLOPE  # bed depth below the still surface
        eta0 = carrier_initial(mesh.x)
        analytic = None
    elif name == "bowl_1d":
        mesh = Mesh(basis, config.extents, config.n_elements)
        b = -bowl_bathymetry(mesh.x)  # convert bed elevation to depth below datum
        eta0, _ = bowl_analytic(mesh.x, 0.0)
        analytic = lambda x, t: bowl_analytic(x, t)[0]
    elif name == "lake_at_rest":
        mesh = Mesh(basis, config.extents, config.n_elements)
        b = -bowl_bathymetry(mesh.x)
        eta0 = np.full_like(mesh.x, 2.0)  # above the rim: fully wet
        analytic = lambda x, t: np.full_like(np.asarray(x, float), 2.0)
    elif name == "paraboloid_2d":
        mesh = Mesh(basis, config.extents, config.n_elements)
        b = paraboloid_bathymetry(mesh.x, mesh.y)  # formula is already a depth
        eta0 = paraboloid_initial_surface(mesh.x, mesh.y)
        analytic = None
    elif name == "three_mounds":
        mesh = Mesh(basis, config.extents, config.n_elements)
        b = -three_mounds_bathymetry(mesh.x, mesh.y)  # mound elevations
        eta0 = np.where(mesh.x <= DAM_POSITION, DAM_DEPTH, -np.inf)
        analytic = None
    elif name == "cone_island":
        mesh = Mesh(basis, config.extents, config.n_elements)
        b = ISLAND_H0 - cone_island_bathymetry(mesh.x, mesh.y)
        eta0, u0 = solitary_wave(mesh.x)
        analytic = None
    else:
        raise ValueError(f"unknown case {name!r}")

    bathy = Bathymetry.from_mesh(mesh, b)
    H = np.maximum(eps, eta0 + b)
    wet = H > eps
    HU = np.zeros((mesh.dim,) + H.shape)
    if name == "cone_island":
        HU[0] = np.where(wet, H * u0, 0.0)
    state0 = State(H, HU)
    return CaseSetup(config, mesh, bathy, state0, analytic)


# --------------------------------------------------------------- oracle files

def load_tabulated_oracle(path) -> np.ndarray | None:
    """Two-column reference profile CSV with a header line.

    Returns an (n, 2) float array, or None (with a warning) when the file
    is missing, empty, or malformed; callers then skip the comparison.
    """
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        log.warning("reference profile %s not readable (%s); skipping", path, exc)
        return None
    data = []
    for row in rows[1:]:
        if not row:
            continue
        try:
            data.append((float(row[0]), float(row[1])))
        except (ValueError, IndexError):
            log.warning("reference profile %s malformed; skipping", path)
            return None
    if not data:
        log.warning("reference profile %s empty; skipping", path)
        return None
    return np.asarray(data)
