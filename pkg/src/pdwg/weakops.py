"""Discrete weak gradient operator and the local bilinear forms.

The weak gradient of a local weak function {v_0, v_b} on a triangle T is
the unique vector polynomial G in [P_{k-1}(T)]^2 with

    (G, psi)_T = -(v_0, div psi)_T + <v_b, psi . n>_{dT}

for every vector test polynomial psi.  The stabilizer penalizes the gap
between the interior trace and the edge unknowns,
s_T(v, v) = h_T^{-1} sum_e int_e (v_0 - v_b)^2, and the diffusion form is
b_T(u, v) = (a grad_w u, grad_w v)_T.
"""

from __future__ import annotations

import numpy as np

from .fespace import (
    DofMap,
    dim_pk,
    edge_basis,
    edge_quad,
    element_basis,
    quadrature_for_degree,
    tri_quad,
)

__all__ = [
    "Diffusion",
    "IDENTITY",
    "weak_gradient_map",
    "weak_gradient",
    "local_stabilizer",
    "local_diffusion_form",
    "LocalOperators",
]


class Diffusion:
    """Diffusion coefficient a(x, y): a positive scalar or a symmetric
    positive definite 2x2 matrix, constant or callable.

    For callables, pass matrix=True when the callable returns (npts, 2, 2)
    matrices.  grad is an optional callable returning the gradient
    (npts, 2) of a scalar coefficient; residual norms need it whenever the
    scalar coefficient is not constant.
    """

    def __init__(self, value=1.0, grad=None, matrix=None):
        self.grad = grad
        if callable(value):
            self.fn = value
            self.const = None
            self.is_matrix = bool(matrix)
            self.is_constant = False
        else:
            arr = np.asarray(value, dtype=float)
            if arr.ndim == 0:
                if arr <= 0:
                    raise ValueError("scalar diffusion coefficient must be positive")
                self.const = float(arr)
                self.is_matrix = False
            elif arr.shape == (2, 2):
                if not np.allclose(arr, arr.T, rtol=1e-12, atol=0.0):
                    raise ValueError("matrix diffusion coefficient must be symmetric")
                if np.any(np.linalg.eigvalsh(arr) <= 0):
                    raise ValueError("matrix diffusion coefficient must be positive definite")
                self.const = arr
                self.is_matrix = True
            else:
                raise ValueError("diffusion value must be a scalar or a 2x2 matrix")
            self.fn = None
            self.is_constant = True

    def scalar_values(self, x, y):
        if self.is_matrix:
            raise ValueError("matrix coefficient queried as a scalar")
        if self.is_constant:
            return np.full(np.shape(x), self.const)
        vals = np.asarray(self.fn(x, y), dtype=float)
        if vals.ndim == 0:
            vals = np.full(np.shape(x), float(vals))
        return vals

    def matrix_values(self, x, y):
        n = np.size(x)
        if self.is_constant:
            if self.is_matrix:
                return np.broadcast_to(self.const, (n, 2, 2))
            return self.const * np.broadcast_to(np.eye(2), (n, 2, 2))
        if self.is_matrix:
            return np.asarray(self.fn(x, y), dtype=float).reshape(n, 2, 2)
        return self.scalar_values(x, y)[:, None, None] * np.eye(2)[None, :, :]

    def grad_values(self, x, y):
        """Gradient of a scalar coefficient; zero for constants."""
        if self.is_matrix:
            raise ValueError("gradient helper is defined for scalar coefficients only")
        if self.is_constant:
            return np.zeros((np.size(x), 2))
        if self.grad is None:
            raise ValueError(
                "nonconstant scalar coefficient needs an analytic gradient helper"
            )
        return np.asarray(self.grad(x, y), dtype=float).reshape(np.size(x), 2)

    def flux(self, x, y, vec):
        """a times a vector field sampled at points; vec has shape (npts, 2)."""
        vec = np.asarray(vec, dtype=float)
        if not self.is_matrix:
            return self.scalar_values(x, y)[:, None] * vec
        mats = self.matrix_values(x, y)
        return np.einsum("nij,nj->ni", mats, vec)


IDENTITY = Diffusion(1.0)


def _edge_data(mesh, t, loc, rule):
    e = mesh.tri_edges[t, loc]
    sign = mesh.tri_edge_signs[t, loc]
    pts, wts, tc = edge_quad(mesh, e, rule)
    return e, sign * mesh.edge_normals[e], pts, wts, tc


def weak_gradient_map(mesh, t, k, rule=None):
    """Matrix (2*dim P_{k-1}, nloc) sending the local dof vector
    [interior | edge0 | edge1 | edge2] to the stacked (x-part, y-part)
    coefficients of the discrete weak gradient."""
    rule = rule or quadrature_for_degree(k)
    center = mesh.tri_centroids[t]
    scale = mesh.h_tri[t]
    kbasis = element_basis(k)
    rbasis = element_basis(k - 1)
    ebasis = edge_basis(k)
    dimr = rbasis.dim
    nloc = kbasis.dim + 3 * ebasis.dim

    pts, wts = tri_quad(mesh, t, rule)
    vk = kbasis.eval(pts, center, scale)
    vr = rbasis.eval(pts, center, scale)
    gr = rbasis.grad(pts, center, scale)
    mass_r = vr.T @ (wts[:, None] * vr)

    rhs = np.zeros((2 * dimr, nloc))
    # interior columns: -(v_0, div psi)_T
    rhs[:dimr, : kbasis.dim] = -np.einsum("n,nj,ni->ji", wts, gr[:, :, 0], vk)
    rhs[dimr:, : kbasis.dim] = -np.einsum("n,nj,ni->ji", wts, gr[:, :, 1], vk)
    # edge columns: <v_b, psi . n>_{dT} with the outward normal
    for loc in range(3):
        _, n_out, epts, ewts, tc = _edge_data(mesh, t, loc, rule)
        beta = ebasis.eval(tc)
        chi = rbasis.eval(epts, center, scale)
        block = np.einsum("n,nj,nm->jm", ewts, chi, beta)
        cols = slice(kbasis.dim + loc * ebasis.dim, kbasis.dim + (loc + 1) * ebasis.dim)
        rhs[:dimr, cols] = n_out[0] * block
        rhs[dimr:, cols] = n_out[1] * block

    gmap = np.empty_like(rhs)
    gmap[:dimr] = np.linalg.solve(mass_r, rhs[:dimr])
    gmap[dimr:] = np.linalg.solve(mass_r, rhs[dimr:])
    return gmap


def weak_gradient(mesh, t, k, local_dofs, rule=None, gmap=None):
    """Coefficients (2, dim P_{k-1}) of the weak gradient of the local
    weak function with dof vector local_dofs on triangle t."""
    if gmap is None:
        gmap = weak_gradient_map(mesh, t, k, rule)
    local_dofs = np.asarray(local_dofs, dtype=float)
    if local_dofs.shape != (gmap.shape[1],):
        raise ValueError(f"local dof vector must have length {gmap.shape[1]}")
    return (gmap @ local_dofs).reshape(2, -1)


def local_stabilizer(mesh, t, k, rule=None):
    """Matrix of the quadratic form h_T^{-1} sum_e int_e (v_0 - v_b)^2 on
    the local dofs; symmetric positive semidefinite, vanishing exactly
    when v_b matches the trace of v_0 on every edge."""
    rule = rule or quadrature_for_degree(k)
    center = mesh.tri_centroids[t]
    scale = mesh.h_tri[t]
    kbasis = element_basis(k)
    ebasis = edge_basis(k)
    nloc = kbasis.dim + 3 * ebasis.dim

    mat = np.zeros((nloc, nloc))
    for loc in range(3):
        _, _, epts, ewts, tc = _edge_data(mesh, t, loc, rule)
        z = np.zeros((len(ewts), nloc))
        z[:, : kbasis.dim] = kbasis.eval(epts, center, scale)
        cols = slice(kbasis.dim + loc * ebasis.dim, kbasis.dim + (loc + 1) * ebasis.dim)
        z[:, cols] = -ebasis.eval(tc)
        mat += z.T @ (ewts[:, None] * z)
    mat /= mesh.h_tri[t]
    return 0.5 * (mat + mat.T)


def local_diffusion_form(mesh, t, k, a=IDENTITY, rule=None, gmap=None):
    """Matrix of b_T(u, v) = (a grad_w u, grad_w v)_T on the local dofs."""
    rule = rule or quadrature_for_degree(k)
    if gmap is None:
        gmap = weak_gradient_map(mesh, t, k, rule)
    rbasis = element_basis(k - 1)
    dimr = rbasis.dim
    pts, wts = tri_quad(mesh, t, rule)
    vr = rbasis.eval(pts, mesh.tri_centroids[t], mesh.h_tri[t])

    mass2 = np.zeros((2 * dimr, 2 * dimr))
    if a.is_matrix:
        mats = a.matrix_values(pts[:, 0], pts[:, 1])
        if np.any(np.linalg.eigvalsh(mats) <= 0):
            raise ValueError("diffusion coefficient not positive definite at a quadrature point")
        for i in range(2):
            for j in range(2):
                mass2[i * dimr : (i + 1) * dimr, j * dimr : (j + 1) * dimr] = vr.T @ (
                    (wts * mats[:, i, j])[:, None] * vr
                )
    else:
        avals = a.scalar_values(pts[:, 0], pts[:, 1])
        if np.any(avals <= 0):
            raise ValueError("diffusion coefficient not positive at a quadrature point")
        mass_a = vr.T @ ((wts * avals)[:, None] * vr)
        mass2[:dimr, :dimr] = mass_a
        mass2[dimr:, dimr:] = mass_a

    form = gmap.T @ mass2 @ gmap
    return 0.5 * (form + form.T)


class LocalOperators:
    """Per-triangle weak-gradient maps and local form matrices, stacked
    into arrays for reuse across assembly and norm evaluation."""

    def __init__(self, mesh, k, a=IDENTITY, rule=None):
        self.mesh = mesh
        self.k = k
        self.a = a
        self.rule = rule or quadrature_for_degree(k)
        self.dofmap = DofMap(mesh, k)
        self.cell_dofs = self.dofmap.cell_dof_array

        nt = mesh.n_triangles
        dimr = dim_pk(k - 1)
        nloc = self.cell_dofs.shape[1]
        self.grad_maps = np.empty((nt, 2 * dimr, nloc))
        self.stabilizers = np.empty((nt, nloc, nloc))
        self.diffusion_forms = np.empty((nt, nloc, nloc))
        for t in range(nt):
            gmap = weak_gradient_map(mesh, t, k, self.rule)
            self.grad_maps[t] = gmap
            self.stabilizers[t] = local_stabilizer(mesh, t, k, self.rule)
            self.diffusion_forms[t] = local_diffusion_form(mesh, t, k, a, self.rule, gmap=gmap)

    def gradient_coefficients(self, v):
        """Weak-gradient coefficients of every triangle, shape (T, 2, dimr)."""
        local = v.coeffs[self.cell_dofs]
        flat = np.einsum("tij,tj->ti", self.grad_maps, local)
        return flat.reshape(self.mesh.n_triangles, 2, -1)

    def stabilizer_value(self, u, v=None):
        """Global stabilizer form s(u, v) (s(u, u) when v is omitted)."""
        xu = u.coeffs[self.cell_dofs]
        xv = xu if v is None else v.coeffs[self.cell_dofs]
        return float(np.einsum("ti,tij,tj->", xu, self.stabilizers, xv))
