"""Polynomial bases on triangles and edges, quadrature, the global dof
layout of the weak finite element space, and the local L2 projections.

Element bases are scaled monomials centered at the triangle centroid;
edge bases are monomials in the arclength coordinate centered at the edge
midpoint and scaled by the edge length.  Modal bases match the weak
Galerkin degrees of freedom and keep local Gram matrices uniformly
conditioned under refinement.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "SUPPORTED_DEGREES",
    "dim_pk",
    "tri_exponents",
    "ElementBasis",
    "EdgeBasis",
    "element_basis",
    "edge_basis",
    "gradient_coefficient_maps",
    "QuadratureRule",
    "quadrature_for_degree",
    "tri_quad",
    "edge_quad",
    "tri_mass",
    "edge_mass",
    "DofMap",
    "WeakFunction",
    "l2_project_element",
    "l2_project_edge",
    "l2_project_weak",
    "l2_project_vector",
]

SUPPORTED_DEGREES = (1, 2, 3)


def dim_pk(k):
    """Dimension of P_k on a triangle."""
    return (k + 1) * (k + 2) // 2


@lru_cache(maxsize=None)
def tri_exponents(k):
    """Monomial exponent pairs (p, q) with p+q <= k, graded by degree."""
    return tuple((d - q, q) for d in range(k + 1) for q in range(d + 1))


class ElementBasis:
    """Monomials ((x-xc)/s)^p ((y-yc)/s)^q, p+q <= k, centered at the
    triangle centroid xc and scaled by the diameter s."""

    def __init__(self, degree):
        if degree < 0:
            raise ValueError("degree must be nonnegative")
        self.degree = degree
        self.exponents = np.array(tri_exponents(degree))
        self.dim = len(self.exponents)

    def eval(self, pts, center, scale):
        """Basis values at pts, shape (npts, dim)."""
        pts = np.atleast_2d(pts)
        X = (pts[:, 0] - center[0]) / scale
        Y = (pts[:, 1] - center[1]) / scale
        P = self.exponents[:, 0]
        Q = self.exponents[:, 1]
        return X[:, None] ** P[None, :] * Y[:, None] ** Q[None, :]

    def grad(self, pts, center, scale):
        """Basis gradients at pts, shape (npts, dim, 2)."""
        pts = np.atleast_2d(pts)
        X = (pts[:, 0] - center[0]) / scale
        Y = (pts[:, 1] - center[1]) / scale
        out = np.zeros((len(pts), self.dim, 2))
        for m, (p, q) in enumerate(self.exponents):
            if p:
                out[:, m, 0] = (p / scale) * X ** (p - 1) * Y**q
            if q:
                out[:, m, 1] = (q / scale) * X**p * Y ** (q - 1)
        return out


class EdgeBasis:
    """Monomials t^m in the arclength coordinate t = (p - mid) . tau / len,
    which runs over [-1/2, 1/2] along the edge."""

    def __init__(self, degree):
        if degree < 0:
            raise ValueError("degree must be nonnegative")
        self.degree = degree
        self.dim = degree + 1

    def eval(self, tcoords):
        t = np.atleast_1d(np.asarray(tcoords, dtype=float))
        return t[:, None] ** np.arange(self.dim)[None, :]


@lru_cache(maxsize=None)
def element_basis(k):
    return ElementBasis(k)


@lru_cache(maxsize=None)
def edge_basis(k):
    return EdgeBasis(k)


@lru_cache(maxsize=None)
def _grad_map_pattern(k):
    index = {exp: m for m, exp in enumerate(tri_exponents(k - 1))}
    dx = np.zeros((dim_pk(k - 1), dim_pk(k)))
    dy = np.zeros_like(dx)
    for col, (p, q) in enumerate(tri_exponents(k)):
        if p:
            dx[index[(p - 1, q)], col] = p
        if q:
            dy[index[(p, q - 1)], col] = q
    dx.setflags(write=False)
    dy.setflags(write=False)
    return dx, dy


def gradient_coefficient_maps(k, scale):
    """Matrices (Dx, Dy) sending P_k coefficients to the P_{k-1}
    coefficients of the partial derivatives, for one basis scale."""
    dx, dy = _grad_map_pattern(k)
    return dx / scale, dy / scale


@dataclass(frozen=True)
class QuadratureRule:
    """Reference rules: a collapsed Gauss product on the unit triangle
    (positive weights summing to 1/2) and Gauss on [-1/2, 1/2]
    (weights summing to 1)."""

    tri_points: np.ndarray     # (nq, 2) reference coordinates
    tri_weights: np.ndarray    # (nq,)
    tri_degree: int            # exact for total degree <= tri_degree
    edge_points: np.ndarray    # (mq,) in [-1/2, 1/2]
    edge_weights: np.ndarray   # (mq,)
    edge_degree: int


def _gauss01(m):
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def quadrature_for_degree(k):
    """Rule pair for degree-k spaces: triangle exact to 2k+6, edge exact
    to 2k+7, covering every polynomial integrand of the local forms with
    headroom for smooth data terms."""
    tri_degree = 2 * k + 6
    edge_degree = 2 * k + 7
    # collapsed coordinates absorb one extra degree from the Jacobian
    m = (tri_degree + 3) // 2
    u, wu = _gauss01(m)
    v, wv = _gauss01(m)
    xi = np.outer(u, 1.0 - v).ravel()
    eta = np.tile(v, m)
    wts = (np.outer(wu, wv * (1.0 - v))).ravel()
    me = (edge_degree + 2) // 2
    xe, we = np.polynomial.legendre.leggauss(me)
    rule = QuadratureRule(
        tri_points=np.column_stack([xi, eta]),
        tri_weights=wts,
        tri_degree=tri_degree,
        edge_points=0.5 * xe,
        edge_weights=0.5 * we,
        edge_degree=edge_degree,
    )
    for arr in (rule.tri_points, rule.tri_weights, rule.edge_points, rule.edge_weights):
        arr.setflags(write=False)
    return rule


def tri_quad(mesh, t, rule):
    """Physical quadrature points and weights on triangle t."""
    a, b, c = mesh.tri_vertices(t)
    ref = rule.tri_points
    pts = a + np.outer(ref[:, 0], b - a) + np.outer(ref[:, 1], c - a)
    wts = rule.tri_weights * (2.0 * mesh.tri_areas[t])
    return pts, wts


def edge_quad(mesh, e, rule):
    """Physical points, ds-weights and edge-basis coordinates on edge e."""
    lo, hi = mesh.edges[e]
    direction = mesh.vertices[hi] - mesh.vertices[lo]
    pts = mesh.edge_midpoints[e] + np.outer(rule.edge_points, direction)
    wts = rule.edge_weights * mesh.edge_lengths[e]
    return pts, wts, rule.edge_points


def tri_mass(mesh, t, k, rule=None):
    """Local mass matrix of P_k on triangle t."""
    rule = rule or quadrature_for_degree(k)
    basis = element_basis(k)
    pts, wts = tri_quad(mesh, t, rule)
    vals = basis.eval(pts, mesh.tri_centroids[t], mesh.h_tri[t])
    return vals.T @ (wts[:, None] * vals)


def edge_mass(mesh, e, k, rule=None):
    """Local mass matrix of P_k on edge e."""
    rule = rule or quadrature_for_degree(k)
    basis = edge_basis(k)
    _, wts, tc = edge_quad(mesh, e, rule)
    vals = basis.eval(tc)
    return vals.T @ (wts[:, None] * vals)


class DofMap:
    """Global dof layout: per-triangle interior blocks first, then
    per-edge blocks.  The same layout serves the primal field and the
    multiplier field; only the fixed edge dofs differ:
    primal edge dofs are fixed on Gamma_d, multiplier edge dofs on the
    complement of Gamma_n.  Interior dofs are never fixed."""

    def __init__(self, mesh, k, config=None):
        if k not in SUPPORTED_DEGREES:
            raise ValueError(f"degree k={k} not supported; expected one of {SUPPORTED_DEGREES}")
        self.mesh = mesh
        self.k = k
        self.interior_dim = dim_pk(k)
        self.edge_dim = k + 1
        self.n_interior = mesh.n_triangles * self.interior_dim
        self.n_dofs = self.n_interior + mesh.n_edges * self.edge_dim

        nloc = self.interior_dim + 3 * self.edge_dim
        cell = np.zeros((mesh.n_triangles, nloc), dtype=int)
        for t in range(mesh.n_triangles):
            cell[t, : self.interior_dim] = self.interior_block(t)
            for loc in range(3):
                lo = self.interior_dim + loc * self.edge_dim
                cell[t, lo : lo + self.edge_dim] = self.edge_block(mesh.tri_edges[t, loc])
        cell.setflags(write=False)
        self.cell_dof_array = cell

        u_fixed = np.zeros(self.n_dofs, dtype=bool)
        lam_fixed = np.zeros(self.n_dofs, dtype=bool)
        if config is not None:
            for e in config.gamma_d_edges:
                u_fixed[self.edge_block(e)] = True
            for e in config.gamma_n_complement_edges:
                lam_fixed[self.edge_block(e)] = True
        u_fixed.setflags(write=False)
        lam_fixed.setflags(write=False)
        self.u_fixed = u_fixed
        self.lam_fixed = lam_fixed

    def interior_block(self, t):
        return np.arange(t * self.interior_dim, (t + 1) * self.interior_dim)

    def edge_block(self, e):
        start = self.n_interior + e * self.edge_dim
        return np.arange(start, start + self.edge_dim)

    def cell_dofs(self, t):
        return self.cell_dof_array[t]

    @property
    def u_free(self):
        return np.nonzero(~self.u_fixed)[0]

    @property
    def lam_free(self):
        return np.nonzero(~self.lam_fixed)[0]


class WeakFunction:
    """Coefficient vector of one weak field v = {v_0, v_b}: an interior
    polynomial per triangle plus an independent polynomial per edge."""

    def __init__(self, mesh, k, coeffs=None, dofmap=None):
        self.mesh = mesh
        self.k = k
        self.dofmap = dofmap if dofmap is not None else DofMap(mesh, k)
        if coeffs is None:
            coeffs = np.zeros(self.dofmap.n_dofs)
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.dofmap.n_dofs,):
            raise ValueError(
                f"coefficient vector has length {coeffs.shape}, expected ({self.dofmap.n_dofs},)"
            )
        self.coeffs = coeffs

    def interior_coeffs(self, t):
        return self.coeffs[self.dofmap.interior_block(t)]

    def edge_coeffs(self, e):
        return self.coeffs[self.dofmap.edge_block(e)]

    def local_coeffs(self, t):
        """Local dof vector [interior | edge0 | edge1 | edge2] of triangle t."""
        return self.coeffs[self.dofmap.cell_dof_array[t]]

    def interior_value(self, t, pts):
        vals = element_basis(self.k).eval(pts, self.mesh.tri_centroids[t], self.mesh.h_tri[t])
        return vals @ self.interior_coeffs(t)

    def edge_value(self, e, tcoords):
        return edge_basis(self.k).eval(tcoords) @ self.edge_coeffs(e)

    def copy(self):
        return WeakFunction(self.mesh, self.k, self.coeffs.copy(), dofmap=self.dofmap)

    def _compatible(self, other):
        if self.mesh is not other.mesh or self.k != other.k:
            raise ValueError("incompatible weak function layouts")

    def __add__(self, other):
        self._compatible(other)
        return WeakFunction(self.mesh, self.k, self.coeffs + other.coeffs, dofmap=self.dofmap)

    def __sub__(self, other):
        self._compatible(other)
        return WeakFunction(self.mesh, self.k, self.coeffs - other.coeffs, dofmap=self.dofmap)

    def __mul__(self, scalar):
        return WeakFunction(self.mesh, self.k, self.coeffs * float(scalar), dofmap=self.dofmap)

    __rmul__ = __mul__


def _scalar_values(f, x, y):
    vals = np.asarray(f(x, y), dtype=float)
    if vals.ndim == 0:
        vals = np.full(np.shape(x), float(vals))
    return vals


def l2_project_element(f, mesh, t, k, rule=None):
    """Coefficients of the L2 projection of f onto P_k of triangle t."""
    rule = rule or quadrature_for_degree(k)
    basis = element_basis(k)
    pts, wts = tri_quad(mesh, t, rule)
    vals = basis.eval(pts, mesh.tri_centroids[t], mesh.h_tri[t])
    mass = vals.T @ (wts[:, None] * vals)
    rhs = vals.T @ (wts * _scalar_values(f, pts[:, 0], pts[:, 1]))
    return np.linalg.solve(mass, rhs)


def l2_project_edge(f, mesh, e, k, rule=None):
    """Coefficients of the L2 projection of f onto P_k of edge e."""
    rule = rule or quadrature_for_degree(k)
    basis = edge_basis(k)
    pts, wts, tc = edge_quad(mesh, e, rule)
    vals = basis.eval(tc)
    mass = vals.T @ (wts[:, None] * vals)
    rhs = vals.T @ (wts * _scalar_values(f, pts[:, 0], pts[:, 1]))
    return np.linalg.solve(mass, rhs)


def l2_project_weak(u, mesh, k, rule=None):
    """Projection of u into the weak space: elementwise L2 projection in
    the interior blocks and edgewise L2 projection in the edge blocks."""
    rule = rule or quadrature_for_degree(k)
    wf = WeakFunction(mesh, k)
    for t in range(mesh.n_triangles):
        wf.coeffs[wf.dofmap.interior_block(t)] = l2_project_element(u, mesh, t, k, rule)
    for e in range(mesh.n_edges):
        wf.coeffs[wf.dofmap.edge_block(e)] = l2_project_edge(u, mesh, e, k, rule)
    return wf


def l2_project_vector(q, mesh, k, rule=None):
    """Componentwise L2 projection of a vector field onto piecewise
    [P_{k-1}]^2; q(x, y) returns the component pair.  Shape (T, 2, dim)."""
    rule = rule or quadrature_for_degree(k)
    basis = element_basis(k - 1)
    out = np.zeros((mesh.n_triangles, 2, basis.dim))
    for t in range(mesh.n_triangles):
        pts, wts = tri_quad(mesh, t, rule)
        vals = basis.eval(pts, mesh.tri_centroids[t], mesh.h_tri[t])
        mass = vals.T @ (wts[:, None] * vals)
        qx, qy = q(pts[:, 0], pts[:, 1])
        qx = np.broadcast_to(np.asarray(qx, dtype=float), pts[:, 0].shape)
        qy = np.broadcast_to(np.asarray(qy, dtype=float), pts[:, 0].shape)
        out[t, 0] = np.linalg.solve(mass, vals.T @ (wts * qx))
        out[t, 1] = np.linalg.solve(mass, vals.T @ (wts * qy))
    return out
