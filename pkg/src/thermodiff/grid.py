"""Uniform grid on [0, 1] and the discrete calculus used by the currents.

Nodes sit at x_i = i*h with h = 1/(n-1), so both endpoints are nodes.
Fluxes live on the n+1 faces: the two endpoints plus the staggered
half-nodes in between. Gradient maps nodes -> faces, divergence maps
faces -> nodes; divergence of a constant face array is exactly zero, and
summing the divergence against the trapezoid weights telescopes to the
difference of the boundary fluxes, which is what makes conservation exact
in flux form.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels

MIN_NODES = 8  # smallest grid the cubic face stencils support comfortably


@dataclass(frozen=True)
class Grid1D:
    """Uniform node set on [0, 1]."""

    n: int
    h: float = field(init=False)
    nodes: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.n < MIN_NODES:
            raise ValueError(f"grid needs at least {MIN_NODES} nodes, got {self.n}")
        object.__setattr__(self, "h", 1.0 / (self.n - 1))
        nodes = np.linspace(0.0, 1.0, self.n)
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def faces(self):
        """Positions of the n+1 flux faces: 0, h/2, 3h/2, ..., 1-h/2, 1."""
        x = self.nodes
        return np.concatenate(([0.0], 0.5 * (x[:-1] + x[1:]), [1.0]))

    @property
    def weights(self):
        """Trapezoid quadrature weights (half cells at the boundary)."""
        w = np.full(self.n, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    def integrate(self, values):
        """Trapezoid quadrature of nodal values over [0, 1]."""
        values = np.asarray(values, dtype=float)
        if values.shape != (self.n,):
            raise ValueError("nodal array has wrong length")
        return float(self.weights @ values)

    def integrate_faces(self, values):
        """Trapezoid quadrature of face values (non-uniform end panels)."""
        values = np.asarray(values, dtype=float)
        if values.shape != (self.n + 1,):
            raise ValueError("face array has wrong length")
        dx = np.diff(self.faces)
        return float(np.sum(0.5 * dx * (values[:-1] + values[1:])))


def face_values(u, grid: Grid1D):
    """Interpolate nodal data to the faces (cubic stencils)."""
    u = np.ascontiguousarray(u, dtype=float)
    if u.shape != (grid.n,):
        raise ValueError("nodal array has wrong length")
    vals = np.empty(grid.n + 1)
    grads = np.empty(grid.n + 1)
    _kernels.face_fields(u, grid.h, vals, grads)
    return vals


def gradient(u, grid: Grid1D):
    """First derivative of nodal data on the faces.

    Exact for cubic nodal data; O(h^4) at centred faces and O(h^3) at the
    four faces nearest the boundary.
    """
    u = np.ascontiguousarray(u, dtype=float)
    if u.shape != (grid.n,):
        raise ValueError("nodal array has wrong length")
    vals = np.empty(grid.n + 1)
    grads = np.empty(grid.n + 1)
    _kernels.face_fields(u, grid.h, vals, grads)
    return grads


def divergence(flux, grid: Grid1D):
    """Flux-form divergence of a face array back onto the nodes.

    Boundary nodes own half cells, so the weighted nodal sum telescopes to
    flux[-1] - flux[0] exactly.
    """
    flux = np.ascontiguousarray(flux, dtype=float)
    if flux.shape != (grid.n + 1,):
        raise ValueError("face array has wrong length")
    out = np.empty(grid.n)
    _kernels.divergence(flux, grid.h, out)
    return out
