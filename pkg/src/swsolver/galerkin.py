"""Semi-discrete CG and DG right-hand sides for the shallow water system.

CG uses strong-form differentiation with mass-weighted direct stiffness
summation and strongly enforced no-penetration at wall boundaries. DG
uses the weak form with a Rusanov interface flux and ghost-state
boundary closures. Viscous terms are integrated by parts (CG) or
discretized with the symmetric interior penalty method (DG). All
integrals use collocated LGL quadrature, so mass matrices are diagonal.
"""
from __future__ import annotations

import numpy as np

from .mesh import Mesh, OUTFLOW, WALL
from .swe import Bathymetry, GRAVITY, State, _wave_speed_clamped, velocity


def rusanov(q_l: np.ndarray, q_r: np.ndarray, normal, b_face: np.ndarray,
            threshold: float = 0.0) -> np.ndarray:
    """Rusanov numerical flux for stacked traces q = [H, HU...].

    q_l, q_r: arrays (nvar, ...) of left/right traces; normal: unit face
    normal (length dim). Returns 0.5 (F_l + F_r) . n - 0.5 lambda (q_r - q_l)
    with lambda the pointwise max wave speed of the two traces.
    """
    normal = np.asarray(normal, dtype=float)
    dim = normal.size
    sl = State(q_l[0], q_l[1:])
    sr = State(q_r[0], q_r[1:])
    lam = np.maximum(_wave_speed_clamped(sl, threshold),
                     _wave_speed_clamped(sr, threshold))
    fl = _normal_flux(sl, b_face, normal, threshold)
    fr = _normal_flux(sr, b_face, normal, threshold)
    return 0.5 * (fl + fr) - 0.5 * lam[None] * (q_r - q_l)


def _normal_flux(s: State, b: np.ndarray, normal: np.ndarray,
                 threshold: float) -> np.ndarray:
    """F(q) . n for stacked variables at face traces."""
    u = velocity(s, threshold)
    un = np.tensordot(normal, u, axes=(0, 0))
    out = np.empty((1 + s.dim,) + s.H.shape)
    out[0] = s.H * un
    pressure = 0.5 * GRAVITY * (s.H**2 - b**2)
    for c in range(s.dim):
        out[1 + c] = s.HU[c] * un + pressure * normal[c]
    return out


def apply_bc(kind: str, q_trace: np.ndarray, normal) -> np.ndarray:
    """Ghost trace for a flagged boundary face (wall mirror or outflow copy)."""
    if kind == OUTFLOW:
        return q_trace.copy()
    if kind == WALL:
        normal = np.asarray(normal, dtype=float)
        ghost = q_trace.copy()
        hun = np.tensordot(normal, q_trace[1:], axes=(0, 0))
        for c in range(normal.size):
            ghost[1 + c] = q_trace[1 + c] - 2.0 * hun * normal[c]
        return ghost
    raise ValueError(f"boundary face without a known flag: {kind!r}")


class SemiDiscreteOp:
    """Spatial operator dq/dt = L(q) for one mesh/method/bathymetry triple.

    Parameters:
        mesh: Mesh with boundary flags.
        bathy: Bathymetry on the mesh nodes.
        method: "CG" or "DG".
        wet_threshold: dry-node velocity clamp (wetdry epsilon).
        mass_diffusion: the continuity-equation viscosity switch.
        sip_constant: C in the SIP penalty sigma = C (N+1)^2 / h_face.
    """

    def __init__(self, mesh: Mesh, bathy: Bathymetry, method: str = "CG",
                 wet_threshold: float = 1e-3, mass_diffusion: bool = False,
                 sip_constant: float = 2.0):
        method = method.upper()
        if method not in ("CG", "DG"):
            raise ValueError(f"method must be CG or DG, got {method}")
        if sip_constant < 1.0:
            raise ValueError("SIP penalty constant below stability floor (>= 1)")
        self.mesh = mesh
        self.bathy = bathy
        self.method = method
        self.threshold = wet_threshold
        self.mass_diffusion = mass_diffusion
        self.nvar = 1 + mesh.dim

        self.quad_w = mesh.quad_weights()
        if method == "CG":
            self.mass_global = mesh.dss(self.quad_w)
            self.inv_mass = 1.0 / mesh.gather(self.mass_global)
        else:
            self.inv_mass = 1.0 / self.quad_w

        n1 = mesh.basis.order + 1
        self.sigma_x = sip_constant * n1 * n1 / mesh.dx
        self.sigma_y = sip_constant * n1 * n1 / mesh.dy

    # ------------------------------------------------------------- helpers

    def _stack(self, state: State) -> np.ndarray:
        return np.concatenate([state.H[None], state.HU], axis=0)

    def _unstack(self, q: np.ndarray) -> State:
        return State(q[0], q[1:])

    def _fluxes(self, state: State) -> list[np.ndarray]:
        """Directional stacked fluxes F_a, a over space dimensions."""
        u = velocity(state, self.threshold)
        pressure = 0.5 * GRAVITY * (state.H**2 - self.bathy.b**2)
        out = []
        for a in range(self.mesh.dim):
            Fa = np.empty((self.nvar,) + state.H.shape)
            Fa[0] = state.HU[a]
            for c in range(self.mesh.dim):
                Fa[1 + c] = state.HU[c] * u[a]
                if a == c:
                    Fa[1 + c] += pressure
            out.append(Fa)
        return out

    def _source(self, state: State) -> np.ndarray:
        S = np.zeros((self.nvar,) + state.H.shape)
        eta = state.H - self.bathy.b
        for c in range(self.mesh.dim):
            S[1 + c] = GRAVITY * eta * self.bathy.grad[c]
        return S

    def strong_divergence(self, state: State) -> np.ndarray:
        """Nodal strong-form div F(q) - S(q) (stacked); the PDE residual's
        spatial part, also the CG volume term."""
        fluxes = self._fluxes(state)
        div = np.zeros_like(fluxes[0])
        for a in range(self.mesh.dim):
            for v in range(self.nvar):
                div[v] += self.mesh.deriv(fluxes[a][v], axis=a)
        return div - self._source(state)

    # ------------------------------------------------------------- CG path

    def _rhs_cg(self, state: State, mu_elem) -> np.ndarray:
        r = -self.strong_divergence(state)
        weighted = r * self.quad_w[None]
        if mu_elem is not None:
            self._add_viscous_weak(state, mu_elem, weighted)
        out = np.empty_like(weighted)
        for v in range(self.nvar):
            out[v] = self.mesh.gather(self.mesh.dss(weighted[v])) * self.inv_mass
        self._zero_wall_normal_momentum(out)
        return out

    def _zero_wall_normal_momentum(self, rhs: np.ndarray):
        mesh = self.mesh
        if mesh.dim == 1:
            if mesh.bc["left"] == WALL:
                rhs[1, 0, 0] = 0.0
            if mesh.bc["right"] == WALL:
                rhs[1, -1, -1] = 0.0
            return
        sides = {"west": (1, np.s_[:, 0, :]), "east": (1, np.s_[:, -1, :]),
                 "south": (2, np.s_[:, :, 0]), "north": (2, np.s_[:, :, -1])}
        for side, (var, sl) in sides.items():
            if mesh.bc[side] == WALL:
                elems = mesh.boundary_elems[side]
                comp = rhs[var]
                if side in ("west", "east"):
                    comp[elems, 0 if side == "west" else -1, :] = 0.0
                else:
                    comp[elems, :, 0 if side == "south" else -1] = 0.0

    def enforce_bc(self, state: State) -> State:
        """Strong no-penetration at CG walls: zero the normal momentum there."""
        if self.method != "CG":
            return state
        q = self._stack(state)
        self._zero_wall_normal_momentum_state(q)
        return self._unstack(q)

    def _zero_wall_normal_momentum_state(self, q: np.ndarray):
        self._zero_wall_normal_momentum(q)

    def _add_viscous_weak(self, state: State, mu_elem, weighted: np.ndarray):
        """CG viscous terms: -int grad(phi) . kappa grad(v) added to the
        mass-weighted residual before assembly."""
        mesh = self.mesh
        w = mesh.basis.weights
        D = mesh.basis.diff_matrix
        mu = self._broadcast_mu(mu_elem)
        fields = self._diffused_fields(state, mu)
        for var, v_field, kappa in fields:
            if mesh.dim == 1:
                g = mesh.deriv(v_field, axis=0)
                weighted[var] -= np.einsum("j,ji,ej->ei", w, D, kappa * g)
            else:
                gx = mesh.deriv(v_field, axis=0)
                gy = mesh.deriv(v_field, axis=1)
                weighted[var] -= 0.5 * mesh.dy * np.einsum(
                    "m,ma,emb,b->eab", w, D, kappa * gx, w)
                weighted[var] -= 0.5 * mesh.dx * np.einsum(
                    "m,mb,eam,a->eab", w, D, kappa * gy, w)

    def _broadcast_mu(self, mu_elem: np.ndarray) -> np.ndarray:
        shape = (-1,) + (1,) * (self.mesh.dim)
        return np.asarray(mu_elem).reshape(shape)

    def _diffused_fields(self, state: State, mu) -> list:
        """(variable index, diffused field, nodal coefficient) triples.

        Mass diffuses H with coefficient mu (if enabled). Momentum diffuses
        the velocity with coefficient mu * max(H, eta): equal to mu H in
        deep water but bounded below by the bank height above the datum,
        so the stabilization does not switch off at a runup front.
        """
        out = []
        if self.mass_diffusion:
            out.append((0, state.H, mu * np.ones_like(state.H)))
        u = velocity(state, self.threshold)
        kappa_m = mu * np.maximum(state.H, state.H - self.bathy.b)
        for c in range(self.mesh.dim):
            out.append((1 + c, u[c], kappa_m))
        return out

    # ------------------------------------------------------------- DG path

    def _rhs_dg(self, state: State, mu_elem) -> np.ndarray:
        mesh = self.mesh
        w = mesh.basis.weights
        D = mesh.basis.diff_matrix
        q = self._stack(state)
        fluxes = self._fluxes(state)
        rhs = np.zeros_like(q)

        # weak volume terms: int grad(phi) . F
        if mesh.dim == 1:
            for v in range(self.nvar):
                rhs[v] += np.einsum("j,ji,ej->ei", w, D, fluxes[0][v])
        else:
            for v in range(self.nvar):
                rhs[v] += 0.5 * mesh.dy * np.einsum(
                    "m,ma,emb,b->eab", w, D, fluxes[0][v], w)
                rhs[v] += 0.5 * mesh.dx * np.einsum(
                    "m,mb,eam,a->eab", w, D, fluxes[1][v], w)

        self._add_inviscid_face_terms(q, rhs)
        if mu_elem is not None:
            self._add_sip_terms(state, mu_elem, rhs)

        rhs *= self.inv_mass[None]
        rhs += self._source(state)
        return rhs

    def _face_weights(self, axis: int) -> np.ndarray:
        """Face quadrature weights (including the face Jacobian)."""
        mesh = self.mesh
        if mesh.dim == 1:
            return np.array(1.0)
        w = mesh.basis.weights
        return w * (0.5 * (mesh.dy if axis == 0 else mesh.dx))

    def _add_inviscid_face_terms(self, q: np.ndarray, rhs: np.ndarray):
        """Subtract the lifted Rusanov surface integrals, faces then walls."""
        mesh = self.mesh
        b = self.bathy.b
        for axis in (0, 1)[:mesh.dim]:
            e_l, e_r = mesh.faces_x if axis == 0 else mesh.faces_y
            if e_l.size:
                ql, qr, bf = self._face_traces(q, b, e_l, e_r, axis)
                normal = self._axis_normal(axis)
                fstar = rusanov(ql, qr, normal, bf, self.threshold)
                fw = self._face_weights(axis)
                self._lift(rhs, e_l, axis, hi=True, vals=-fw * fstar)
                self._lift(rhs, e_r, axis, hi=False, vals=fw * fstar)
        for side, elems in mesh.boundary_elems.items():
            kind = mesh.bc[side]
            axis, hi, normal = self._side_geometry(side)
            qb = self._boundary_trace(q, elems, axis, hi)
            bb = self._boundary_trace(b[None], elems, axis, hi)[0]
            ghost = apply_bc(kind, qb, normal)
            fstar = rusanov(qb, ghost, normal, bb, self.threshold)
            fw = self._face_weights(axis)
            self._lift(rhs, elems, axis, hi=hi, vals=-fw * fstar)

    def _axis_normal(self, axis: int) -> np.ndarray:
        n = np.zeros(self.mesh.dim)
        n[axis] = 1.0
        return n

    def _side_geometry(self, side: str):
        if self.mesh.dim == 1:
            return (0, side == "right",
                    np.array([1.0]) if side == "right" else np.array([-1.0]))
        table = {"west": (0, False), "east": (0, True),
                 "south": (1, False), "north": (1, True)}
        axis, hi = table[side]
        normal = np.zeros(2)
        normal[axis] = 1.0 if hi else -1.0
        return axis, hi, normal

    def _face_traces(self, q, b, e_l, e_r, axis):
        if self.mesh.dim == 1:
            return q[:, e_l, -1], q[:, e_r, 0], b[e_l, -1]
        if axis == 0:
            return q[:, e_l, -1, :], q[:, e_r, 0, :], b[e_l, -1, :]
        # select the element subset first: chaining keeps the variable axis
        # in front (a combined fancy+integer index would move it behind the
        # face axis)
        return q[:, e_l][..., -1], q[:, e_r][..., 0], b[e_l][..., -1]

    def _boundary_trace(self, q, elems, axis, hi):
        idx = -1 if hi else 0
        if self.mesh.dim == 1:
            return q[:, elems, idx]
        if axis == 0:
            return q[:, elems, idx, :]
        return q[:, elems][..., idx]

    def _lift(self, rhs, elems, axis, hi, vals):
        """Accumulate face values into the boundary nodes of `elems`."""
        idx = -1 if hi else 0
        if self.mesh.dim == 1:
            rhs[:, elems, idx] += vals
        elif axis == 0:
            rhs[:, elems, idx, :] += vals
        else:
            # the fancy+integer view is laid out (face, var, node); permute
            # the addend to match
            rhs[:, elems, :, idx] += np.swapaxes(vals, 0, 1)

    # ------------------------------------------------------------- SIP terms

    def _add_sip_terms(self, state: State, mu_elem, rhs: np.ndarray):
        """Symmetric interior penalty viscous coupling for the DG path.

        Adds, per diffused field: weak volume term, average-flux and
        symmetrizing face terms, and the sigma-scaled jump penalty. Face
        coefficient values take the max of the two neighbour elements.
        Domain boundaries carry no viscous flux (natural condition).
        """
        mesh = self.mesh
        w = mesh.basis.weights
        D = mesh.basis.diff_matrix
        mu = self._broadcast_mu(mu_elem)
        for var, v_field, kappa in self._diffused_fields(state, mu):
            grads = [mesh.deriv(v_field, axis=a) for a in range(mesh.dim)]
            # volume: -int kappa grad v . grad phi
            if mesh.dim == 1:
                rhs[var] -= np.einsum("j,ji,ej->ei", w, D, kappa * grads[0])
            else:
                rhs[var] -= 0.5 * mesh.dy * np.einsum(
                    "m,ma,emb,b->eab", w, D, kappa * grads[0], w)
                rhs[var] -= 0.5 * mesh.dx * np.einsum(
                    "m,mb,eam,a->eab", w, D, kappa * grads[1], w)
            for axis in (0, 1)[:mesh.dim]:
                self._sip_face_axis(rhs, var, v_field, kappa, grads[axis], axis)

    def _sip_face_axis(self, rhs, var, v_field, kappa, g_n, axis):
        mesh = self.mesh
        e_l, e_r = mesh.faces_x if axis == 0 else mesh.faces_y
        if not e_l.size:
            return
        D = mesh.basis.diff_matrix
        n = mesh.basis.n_nodes
        tr = lambda f, e, hi: self._boundary_trace(f[None], e, axis, hi)[0]
        v_l, v_r = tr(v_field, e_l, True), tr(v_field, e_r, False)
        g_l, g_r = tr(g_n, e_l, True), tr(g_n, e_r, False)
        k_l, k_r = tr(kappa * np.ones_like(v_field), e_l, True), \
            tr(kappa * np.ones_like(v_field), e_r, False)
        jump = v_l - v_r
        avg_flux = 0.5 * (k_l * g_l + k_r * g_r)
        k_face = np.maximum(k_l, k_r)
        sigma = self.sigma_x if axis == 0 else self.sigma_y
        fw = self._face_weights(axis)

        # consistency term {kappa grad v . n}[phi] and penalty -sigma k [v][phi]
        flux = fw * (avg_flux - sigma * k_face * jump)
        self._lift(rhs[var:var + 1], e_l, axis, True, flux[None])
        self._lift(rhs[var:var + 1], e_r, axis, False, -flux[None])

        # symmetrizing term {kappa grad phi . n}[v], spread along the normal line
        h = mesh.dx if axis == 0 else mesh.dy
        dline = D * (2.0 / h)  # physical derivative of cardinals
        sym_l = 0.5 * np.einsum("ef,a->eaf" if mesh.dim == 2 else "e,a->ea",
                                fw * k_l * jump, dline[-1, :])
        sym_r = 0.5 * np.einsum("ef,a->eaf" if mesh.dim == 2 else "e,a->ea",
                                fw * k_r * jump, dline[0, :])
        if mesh.dim == 1:
            rhs[var][e_l] += sym_l
            rhs[var][e_r] += sym_r
        elif axis == 0:
            rhs[var][e_l] += sym_l
            rhs[var][e_r] += sym_r
        else:
            rhs[var][e_l] += np.swapaxes(sym_l, 1, 2)
            rhs[var][e_r] += np.swapaxes(sym_r, 1, 2)

    # ------------------------------------------------------------- public

    def effective_diffusivity(self, state: State,
                              mu_elem: np.ndarray) -> np.ndarray:
        """Per-element diffusivity bound for explicit step-size control.

        The momentum term diffuses u with coefficient kappa = mu max(H, eta),
        and the sensitivity of u to the conserved momentum is at most
        1 / max(H, Hc) with Hc the velocity-desingularization height, so the
        diffusion acts on the conserved variables at rate kappa / max(H, Hc).
        """
        from .swe import REGULARIZATION_FACTOR
        hc = REGULARIZATION_FACTOR * self.threshold
        kappa = np.maximum(state.H, state.H - self.bathy.b)
        ratio = kappa / np.maximum(state.H, max(hc, 1e-300))
        if self.mass_diffusion:
            ratio = np.maximum(ratio, 1.0)
        axes = tuple(range(1, state.H.ndim))
        return np.asarray(mu_elem) * np.max(ratio, axis=axes)

    def rhs(self, state: State, mu_elem: np.ndarray | None = None) -> State:
        """Semi-discrete right-hand side dq/dt; viscous terms if mu is given."""
        if self.method == "CG":
            out = self._rhs_cg(state, mu_elem)
        else:
            out = self._rhs_dg(state, mu_elem)
        if not np.all(np.isfinite(out)):
            raise FloatingPointError("non-finite values in semi-discrete RHS")
        return self._unstack(out)
