"""Time integration: 3-stage L-stable ESDIRK with Jacobian-free
Newton-Krylov stage solves, a classical RK4 reference integrator, and
CFL-based step selection.

The integrators are generic: they advance flat numpy vectors with a user
right-hand side and an optional post-stage hook (used for limiting and
boundary enforcement by the solver driver).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres as _scipy_gmres

from .swe import State, _wave_speed_clamped


class NonconvergenceError(RuntimeError):
    """Newton or GMRES failed to reach its tolerance."""


@dataclass(frozen=True)
class ButcherTableau:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray


def esdirk_tableau() -> ButcherTableau:
    """Three-stage, second-order, stiffly accurate, L-stable ESDIRK tableau.

    Diagonal entry 1 - 1/sqrt(2) on the two implicit stages; the weights
    equal the last row of A.
    """
    gamma = 1.0 - 1.0 / np.sqrt(2.0)
    half = 1.0 / (2.0 * np.sqrt(2.0))
    A = np.array([
        [0.0, 0.0, 0.0],
        [gamma, gamma, 0.0],
        [half, half, gamma],
    ])
    b = A[2].copy()
    c = np.array([0.0, 2.0 - np.sqrt(2.0), 1.0])
    return ButcherTableau(A, b, c)


@dataclass(frozen=True)
class SolverConfig:
    """JFNK and step-control settings (conventional defaults)."""

    newton_tol: float = 1e-8
    newton_max_iters: int = 20
    gmres_tol: float = 1e-6
    gmres_restart: int = 30
    gmres_max_cycles: int = 20
    fd_epsilon: float = 1e-7
    cfl: float = 0.2
    step_retries: int = 5

    def __post_init__(self):
        for name in ("newton_tol", "gmres_tol", "fd_epsilon"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if self.newton_max_iters < 1 or self.gmres_restart < 1:
            raise ValueError("iteration caps must be >= 1")


@dataclass
class StepStats:
    dt_used: float = 0.0
    retries: int = 0
    newton_iters: list = field(default_factory=list)
    gmres_iters: int = 0


def jacobian_vector(G, Q: np.ndarray, v: np.ndarray, fd_epsilon: float,
                    G_Q: np.ndarray | None = None) -> np.ndarray:
    """Directional finite-difference J v = (G(Q + eps v) - G(Q)) / eps."""
    nv = np.linalg.norm(v)
    if nv == 0.0:
        raise ValueError("zero direction in Jacobian-vector product")
    eps = fd_epsilon * (1.0 + np.linalg.norm(Q)) / nv
    if G_Q is None:
        G_Q = G(Q)
    return (G(Q + eps * v) - G_Q) / eps


def gmres_solve(apply_operator, rhs: np.ndarray, tol: float,
                restart: int, max_cycles: int = 20) -> tuple[np.ndarray, int]:
    """Restarted, unpreconditioned GMRES with relative-residual stopping.

    Returns (solution, matvec count). Raises NonconvergenceError on
    stagnation at the cycle cap.
    """
    nrhs = np.linalg.norm(rhs)
    if nrhs == 0.0:
        return np.zeros_like(rhs), 0
    count = [0]

    def matvec(v):
        count[0] += 1
        out = apply_operator(v)
        # scipy's gmres overwrites its work buffers; an operator that
        # returns its input unchanged (e.g. the identity) must not alias it
        return out.copy() if out is v else out

    op = LinearOperator((rhs.size, rhs.size), matvec=matvec, dtype=float)
    x, info = _scipy_gmres(op, rhs, rtol=tol, atol=0.0,
                           restart=restart, maxiter=max_cycles)
    if info > 0:
        raise NonconvergenceError(f"GMRES stagnated after {info} iterations")
    return x, count[0]


def newton_solve(G, guess: np.ndarray, config: SolverConfig) -> tuple[np.ndarray, int, int]:
    """Inexact Newton with matrix-free GMRES linear solves.

    Stops when ||G(Q_k)|| / ||G(Q_0)|| < newton_tol (or the residual is
    negligibly small in absolute terms). Returns (Q, newton iterations,
    total GMRES matvecs).
    """
    Q = guess.copy()
    g = G(Q)
    norm0 = np.linalg.norm(g)
    abs_floor = 1e-14 * (1.0 + np.linalg.norm(Q))
    if norm0 < abs_floor:
        return Q, 0, 0
    total_mv = 0
    for k in range(1, config.newton_max_iters + 1):
        apply_j = lambda v: jacobian_vector(G, Q, v, config.fd_epsilon, G_Q=g)
        dq, mv = gmres_solve(apply_j, -g, config.gmres_tol,
                             config.gmres_restart, config.gmres_max_cycles)
        total_mv += mv
        Q = Q + dq
        g = G(Q)
        gn = np.linalg.norm(g)
        if not np.isfinite(gn):
            raise NonconvergenceError("non-finite Newton residual")
        if gn / norm0 < config.newton_tol or gn < abs_floor:
            return Q, k, total_mv
    raise NonconvergenceError(
        f"Newton did not reach tol {config.newton_tol} in "
        f"{config.newton_max_iters} iterations")


def _esdirk_attempt(q: np.ndarray, dt: float, rhs, config: SolverConfig,
                    post_stage, k1: np.ndarray | None,
                    stats: StepStats) -> tuple[np.ndarray, np.ndarray]:
    tab = esdirk_tableau()
    A = tab.A
    if k1 is None:
        k1 = rhs(q)
    ks = [k1]
    Q = q
    for i in (1, 2):
        known = q + dt * sum(A[i, j] * ks[j] for j in range(i))
        aii = A[i, i]

        def G(x):
            return x - known - dt * aii * rhs(x)

        Q, n_it, mv = newton_solve(G, Q.copy(), config)
        stats.newton_iters.append(n_it)
        stats.gmres_iters += mv
        if post_stage is not None:
            Q = post_stage(Q)
        ks.append(rhs(Q))
    # stiffly accurate: the step value is the last stage value
    return Q, ks[-1]


def esdirk_step(q: np.ndarray, dt: float, rhs, config: SolverConfig,
                post_stage=None, k1: np.ndarray | None = None
                ) -> tuple[np.ndarray, np.ndarray, StepStats]:
    """One ESDIRK step with step rejection on Newton failure.

    rhs maps flat vectors to flat vectors; post_stage (limiter/BC hook) is
    applied to every implicit stage value and to the step result. k1 may
    carry the cached RHS of the previous step's last stage (the explicit
    first stage reuses it). Returns (q_next, rhs(q_next) for reuse, stats).
    On Newton failure the step restarts from q with dt halved, up to
    config.step_retries times.
    """
    stats = StepStats()
    dt_try = dt
    for attempt in range(config.step_retries + 1):
        try:
            q_new, k_last = _esdirk_attempt(q, dt_try, rhs, config,
                                            post_stage, k1, stats)
            stats.dt_used = dt_try
            stats.retries = attempt
            if post_stage is not None:
                q_new = post_stage(q_new)
                k_last = rhs(q_new)
            return q_new, k_last, stats
        except NonconvergenceError:
            stats.newton_iters.clear()
            stats.gmres_iters = 0
            dt_try *= 0.5
    raise NonconvergenceError(
        f"ESDIRK step failed after {config.step_retries} halvings "
        f"(last dt {dt_try * 2:.3e})")


def rk4_step(q: np.ndarray, dt: float, rhs, post_stage=None) -> np.ndarray:
    """Classical explicit four-stage Runge-Kutta step with stage limiting."""
    post = post_stage if post_stage is not None else (lambda x: x)
    k1 = rhs(q)
    k2 = rhs(post(q + 0.5 * dt * k1))
    k3 = rhs(post(q + 0.5 * dt * k2))
    k4 = rhs(post(q + dt * k3))
    out = post(q + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite state after RK4 step")
    return out


VISCOUS_DT_SAFETY = 0.25


def compute_dt(state: State, mesh, cfl: float, threshold: float = 0.0,
               mu_elem: np.ndarray | None = None) -> float:
    """Advective step dt = CFL min over wet nodes of (filter width / wave speed).

    With per-element viscosities supplied, the explicit diffusion limit
    dt <= safety * (smallest node gap)^2 / mu is enforced as well.
    """
    if cfl <= 0:
        raise ValueError("CFL must be positive")
    lam = _wave_speed_clamped(state, threshold)
    wet = state.H > threshold
    if not np.any(wet):
        raise ValueError("all-dry domain: no admissible time step")
    fw = mesh.filter_width()
    shape = (-1,) + (1,) * (state.H.ndim - 1)
    ratio = np.where(wet, fw.reshape(shape) / np.maximum(lam, 1e-300), np.inf)
    dt = cfl * float(np.min(ratio))
    if mu_elem is not None:
        mu_peak = float(np.max(mu_elem))
        if mu_peak > 0.0:
            gap = float(np.min(np.diff(mesh.basis.nodes)))
            h = mesh.dx if mesh.dim == 1 else min(mesh.dx, mesh.dy)
            dt = min(dt, VISCOUS_DT_SAFETY * (0.5 * h * gap) ** 2 / mu_peak)
    return dt
