"""Structured interval (1D) and quadrilateral (2D) meshes with LGL nodes.

Stores element-local node coordinates, the CG global numbering used for
direct stiffness summation, DG face connectivity, boundary-condition
flags per domain side, and the sub-grid filter width
min(dx, dy) / (N + 1).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import BasisSet
from .kernels import deriv_1d, deriv_x, deriv_y, scatter_add

WALL = "wall"
OUTFLOW = "outflow"

# local face ids: 1D (0=left, 1=right); 2D (0=west, 1=east, 2=south, 3=north)
_OPPOSITE = {0: 1, 1: 0, 2: 3, 3: 2}


@dataclass(frozen=True)
class Face:
    """One mesh face; interior faces pair (elem_l, face_l) with (elem_r, face_r)."""

    elem_l: int
    face_l: int
    elem_r: int  # -1 on boundary faces
    face_r: int
    normal: tuple[float, ...]  # outward from the left element
    boundary: str | None = None  # WALL/OUTFLOW flag, None for interior


class Mesh:
    """Uniform tensor-product mesh of order-N elements.

    1D element arrays have shape (nelem, N+1); 2D arrays have shape
    (nelem, N+1, N+1) indexed [e, i, j] with i along x and j along y.
    Elements are numbered e = ex * nely + ey. Immutable after build.
    """

    def __init__(self, basis: BasisSet, extents, n_elements, bc=None):
        if isinstance(n_elements, int):
            n_elements = (n_elements,)
        extents = np.atleast_2d(np.asarray(extents, dtype=float))
        self.dim = len(n_elements)
        if self.dim not in (1, 2):
            raise ValueError("mesh dimension must be 1 or 2")
        if extents.shape != (self.dim, 2):
            raise ValueError(f"extents must be {self.dim} (lo, hi) pairs")
        if any(n < 1 for n in n_elements):
            raise ValueError("element counts must be >= 1")
        if np.any(~np.isfinite(extents)) or np.any(extents[:, 1] <= extents[:, 0]):
            raise ValueError("degenerate or non-finite domain extents")

        self.basis = basis
        self.extents = extents
        n = basis.n_nodes
        xi = basis.nodes

        if self.dim == 1:
            self.nelx, self.nely = n_elements[0], 1
            self.dx = (extents[0, 1] - extents[0, 0]) / self.nelx
            self.dy = self.dx
            x_lo = extents[0, 0] + self.dx * np.arange(self.nelx)
            self.x = x_lo[:, None] + 0.5 * self.dx * (xi[None, :] + 1.0)
            # CG numbering: shared endpoints collapse
            N = basis.order
            self.cg_id = (N * np.arange(self.nelx))[:, None] + np.arange(n)[None, :]
            self.n_global = N * self.nelx + 1
            default_bc = {"left": WALL, "right": WALL}
        else:
            self.nelx, self.nely = n_elements
            self.dx = (extents[0, 1] - extents[0, 0]) / self.nelx
            self.dy = (extents[1, 1] - extents[1, 0]) / self.nely
            ex, ey = np.divmod(np.arange(self.nelx * self.nely), self.nely)
            x_lo = extents[0, 0] + self.dx * ex
            y_lo = extents[1, 0] + self.dy * ey
            xloc = 0.5 * self.dx * (xi + 1.0)
            yloc = 0.5 * self.dy * (xi + 1.0)
            self.x = x_lo[:, None, None] + xloc[None, :, None] + 0.0 * yloc[None, None, :]
            self.y = y_lo[:, None, None] + 0.0 * xloc[None, :, None] + yloc[None, None, :]
            N = basis.order
            ngx = N * self.nelx + 1
            ngy = N * self.nely + 1
            gx = (N * ex)[:, None, None] + np.arange(n)[None, :, None]
            gy = (N * ey)[:, None, None] + np.arange(n)[None, None, :]
            self.cg_id = gx * ngy + gy
            self.n_global = ngx * ngy
            default_bc = {s: WALL for s in ("west", "east", "south", "north")}

        self.nelem = self.nelx * self.nely
        self.jac = (0.5 * self.dx) if self.dim == 1 else (0.25 * self.dx * self.dy)
        self.bc = dict(default_bc)
        if bc:
            unknown = set(bc) - set(default_bc)
            if unknown:
                raise ValueError(f"unknown boundary side(s): {sorted(unknown)}")
            for side, kind in bc.items():
                if kind not in (WALL, OUTFLOW):
                    raise ValueError(f"unknown boundary condition {kind!r}")
                self.bc[side] = kind

        self._build_connectivity()
        self.multiplicity = self.dss(np.ones(self.elem_shape))

    # ------------------------------------------------------------------ layout

    @property
    def elem_shape(self) -> tuple[int, ...]:
        n = self.basis.n_nodes
        return (self.nelem, n) if self.dim == 1 else (self.nelem, n, n)

    def elem_index(self, ex: int, ey: int = 0) -> int:
        return ex * self.nely + ey

    def _build_connectivity(self):
        """Vectorized interior face pairs and per-side boundary element lists."""
        if self.dim == 1:
            e = np.arange(self.nelx)
            self.faces_x = (e[:-1], e[1:])  # (left elem, right elem) per face
            self.faces_y = (np.empty(0, int), np.empty(0, int))
            self.boundary_elems = {"left": np.array([0]),
                                   "right": np.array([self.nelx - 1])}
        else:
            ex, ey = np.divmod(np.arange(self.nelem), self.nely)
            left = np.arange(self.nelem)[ex < self.nelx - 1]
            self.faces_x = (left, left + self.nely)
            bottom = np.arange(self.nelem)[ey < self.nely - 1]
            self.faces_y = (bottom, bottom + 1)
            self.boundary_elems = {
                "west": np.array([self.elem_index(0, j) for j in range(self.nely)]),
                "east": np.array([self.elem_index(self.nelx - 1, j) for j in range(self.nely)]),
                "south": np.array([self.elem_index(i, 0) for i in range(self.nelx)]),
                "north": np.array([self.elem_index(i, self.nely - 1) for i in range(self.nelx)]),
            }

    @property
    def faces(self) -> list[Face]:
        """Explicit face list (interior faces once, boundaries flagged)."""
        out = []
        if self.dim == 1:
            for el, er in zip(*self.faces_x):
                out.append(Face(int(el), 1, int(er), 0, (1.0,)))
            out.append(Face(0, 0, -1, -1, (-1.0,), self.bc["left"]))
            out.append(Face(self.nelx - 1, 1, -1, -1, (1.0,), self.bc["right"]))
            return out
        for el, er in zip(*self.faces_x):
            out.append(Face(int(el), 1, int(er), 0, (1.0, 0.0)))
        for el, er in zip(*self.faces_y):
            out.append(Face(int(el), 3, int(er), 2, (0.0, 1.0)))
        normals = {"west": (-1.0, 0.0), "east": (1.0, 0.0),
                   "south": (0.0, -1.0), "north": (0.0, 1.0)}
        sides = {"west": 0, "east": 1, "south": 2, "north": 3}
        for side, elems in self.boundary_elems.items():
            for e in elems:
                out.append(Face(int(e), sides[side], -1, -1, normals[side], self.bc[side]))
        return out

    # --------------------------------------------------------------- operators

    def dss(self, elem_field: np.ndarray) -> np.ndarray:
        """Direct stiffness summation of element-local values into global DOFs."""
        elem_field = np.asarray(elem_field)
        if elem_field.shape != self.elem_shape:
            raise ValueError(
                f"dss expects shape {self.elem_shape}, got {elem_field.shape}")
        out = np.zeros(self.n_global)
        return scatter_add(out, self.cg_id, elem_field)

    def gather(self, global_field: np.ndarray) -> np.ndarray:
        """Scatter a global CG vector back to element-local storage."""
        return global_field[self.cg_id]

    def filter_width(self) -> np.ndarray:
        """Per-element sub-grid characteristic length min(dx, dy)/(N+1)."""
        if self.dim == 1:
            w = self.dx / (self.basis.order + 1)
        else:
            w = min(self.dx, self.dy) / (self.basis.order + 1)
        return np.full(self.nelem, w)

    def quad_weights(self) -> np.ndarray:
        """Element-local quadrature weights including the affine Jacobian."""
        w = self.basis.weights
        if self.dim == 1:
            return np.broadcast_to(w[None, :] * self.jac, self.elem_shape)
        w2 = w[:, None] * w[None, :] * self.jac
        return np.broadcast_to(w2[None, :, :], self.elem_shape)

    def deriv(self, elem_field: np.ndarray, axis: int = 0) -> np.ndarray:
        """Nodal derivative along a physical axis, element by element."""
        D = self.basis.diff_matrix
        f = np.ascontiguousarray(elem_field)
        if self.dim == 1:
            return deriv_1d(f, D) * (2.0 / self.dx)
        if axis == 0:
            return deriv_x(f, D) * (2.0 / self.dx)
        return deriv_y(f, D) * (2.0 / self.dy)

    def cg_average(self, elem_field: np.ndarray) -> np.ndarray:
        """Multiplicity-weighted average of shared nodes, scattered back."""
        return self.gather(self.dss(elem_field) / self.multiplicity)


def build_mesh(basis: BasisSet, extents, n_elements, bc=None) -> Mesh:
    """Build a uniform structured mesh (thin constructor wrapper)."""
    return Mesh(basis, extents, n_elements, bc=bc)
