"""Error functionals: L2 and broken-H1 norms of the interior error and
the mesh-weighted residual norms.

A residual norm squares three pieces: elementwise divergence of the flux,
h_T^2 * ||div(a G)||_T^2; flux jumps across a designated edge set,
w_e * ||[a G . n]||_e^2 with w_e the max diameter of the adjacent
triangles; and the stabilizer s(v, v).  The primal variant sums jumps
over interior edges plus Gamma_n, the multiplier variant over interior
edges plus the boundary minus Gamma_d.  G is the weak gradient; the
strong variants use the interior gradient instead.  On boundary edges
the "jump" is the one-sided trace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fespace import (
    edge_quad,
    element_basis,
    gradient_coefficient_maps,
    l2_project_weak,
    quadrature_for_degree,
    tri_quad,
)
from .mesh import edge_weight
from .weakops import IDENTITY, LocalOperators

__all__ = [
    "ErrorReport",
    "InteriorField",
    "error_fields",
    "broken_h1",
    "stabilizer_seminorm",
    "residual_norm_primal",
    "residual_terms_primal",
    "residual_norm_multiplier",
    "residual_terms_multiplier",
    "strong_residual_norms",
    "error_report",
]


@dataclass
class ErrorReport:
    """Error functionals of one solve against a manufactured solution."""

    l2_e0: float
    h1_e0: float
    resid_u: float
    resid_lambda: float
    stab_u: float
    strong_u: float | None = None
    strong_lambda: float | None = None


class InteriorField:
    """Evaluation view of the interior component of a weak function."""

    def __init__(self, wf):
        self.wf = wf
        self.mesh = wf.mesh
        self.k = wf.k

    def coeffs(self, t):
        return self.wf.interior_coeffs(t)

    def value(self, t, pts):
        return self.wf.interior_value(t, pts)

    def l2_norm(self, rule=None):
        rule = rule or quadrature_for_degree(self.k)
        basis = element_basis(self.k)
        total = 0.0
        for t in range(self.mesh.n_triangles):
            pts, wts = tri_quad(self.mesh, t, rule)
            vals = basis.eval(pts, self.mesh.tri_centroids[t], self.mesh.h_tri[t])
            mass = vals.T @ (wts[:, None] * vals)
            c = self.coeffs(t)
            total += c @ mass @ c
        return float(np.sqrt(max(total, 0.0)))


def error_fields(u_h, u_exact, mesh, k=None, rule=None):
    """Difference to the projected exact solution: e_h = u_h - Q_h u,
    returned with the evaluator of its interior part e_0."""
    k = u_h.k if k is None else k
    if k != u_h.k:
        raise ValueError("degree does not match the weak function")
    e_h = u_h - l2_project_weak(u_exact, mesh, k, rule)
    return e_h, InteriorField(e_h)


def broken_h1(e0, mesh, rule=None):
    """Elementwise L2 norm of the interior gradient, summed over the mesh."""
    k = e0.k
    rule = rule or quadrature_for_degree(k)
    rbasis = element_basis(k - 1)
    total = 0.0
    for t in range(mesh.n_triangles):
        dx, dy = gradient_coefficient_maps(k, mesh.h_tri[t])
        gx = dx @ e0.coeffs(t)
        gy = dy @ e0.coeffs(t)
        pts, wts = tri_quad(mesh, t, rule)
        vals = rbasis.eval(pts, mesh.tri_centroids[t], mesh.h_tri[t])
        mass = vals.T @ (wts[:, None] * vals)
        total += gx @ mass @ gx + gy @ mass @ gy
    return float(np.sqrt(max(total, 0.0)))


def stabilizer_seminorm(v, mesh, k=None, rule=None, ops=None):
    """sqrt(s(v, v))."""
    k = v.k if k is None else k
    if ops is None:
        ops = LocalOperators(mesh, k, rule=rule)
    return float(np.sqrt(max(ops.stabilizer_value(v), 0.0)))


def _weak_gradient_coefficients(v, mesh, k, rule, ops):
    if ops is not None:
        return ops.gradient_coefficients(v)
    from .weakops import weak_gradient_map

    out = np.empty((mesh.n_triangles, 2, element_basis(k - 1).dim))
    for t in range(mesh.n_triangles):
        gmap = weak_gradient_map(mesh, t, k, rule)
        out[t] = (gmap @ v.local_coeffs(t)).reshape(2, -1)
    return out


def _interior_gradient_coefficients(v, mesh, k):
    out = np.empty((mesh.n_triangles, 2, element_basis(k - 1).dim))
    for t in range(mesh.n_triangles):
        dx, dy = gradient_coefficient_maps(k, mesh.h_tri[t])
        c = v.interior_coeffs(t)
        out[t, 0] = dx @ c
        out[t, 1] = dy @ c
    return out


def _divergence_term(gamma, mesh, k, a, rule):
    """sum_T h_T^2 ||div(a G)||_T^2 for the per-triangle coefficient
    array gamma of G, using the product rule grad(a).G + a div(G)."""
    rbasis = element_basis(k - 1)
    total = 0.0
    for t in range(mesh.n_triangles):
        pts, wts = tri_quad(mesh, t, rule)
        vals = rbasis.eval(pts, mesh.tri_centroids[t], mesh.h_tri[t])
        grads = rbasis.grad(pts, mesh.tri_centroids[t], mesh.h_tri[t])
        # field values (n, 2) and derivatives d_i G_j as (n, i, j)
        gvals = vals @ gamma[t].T
        gder = np.einsum("jm,nmi->nij", gamma[t], grads)
        if a.is_matrix:
            if not a.is_constant:
                raise NotImplementedError(
                    "divergence term for a variable matrix coefficient is not supported"
                )
            div = np.einsum("ij,nij->n", a.const, gder)
        else:
            avals = a.scalar_values(pts[:, 0], pts[:, 1])
            div = avals * (gder[:, 0, 0] + gder[:, 1, 1])
            if not a.is_constant:
                div += np.einsum("ni,ni->n", a.grad_values(pts[:, 0], pts[:, 1]), gvals)
        total += mesh.h_tri[t] ** 2 * float(wts @ div**2)
    return total


def _jump_term(gamma, mesh, k, a, rule, include_boundary):
    """sum over interior edges and flagged boundary edges of
    w_e ||[a G . n]||_e^2 against the fixed global edge normal."""
    rbasis = element_basis(k - 1)
    total = 0.0
    for e in range(mesh.n_edges):
        adj = mesh.edge_tris[e]
        if len(adj) == 1 and not include_boundary[e]:
            continue
        pts, wts, _ = edge_quad(mesh, e, rule)
        normal = mesh.edge_normals[e]
        traces = []
        for t in adj:
            vals = rbasis.eval(pts, mesh.tri_centroids[t], mesh.h_tri[t])
            gvals = vals @ gamma[t].T
            flux = a.flux(pts[:, 0], pts[:, 1], gvals)
            traces.append(flux @ normal)
        jump = traces[0] if len(traces) == 1 else traces[0] - traces[1]
        total += edge_weight(mesh, e) * float(wts @ jump**2)
    return total


def _residual_terms(v, mesh, config, a, k, rule, ops, grad_mode, include_boundary):
    rule = rule or quadrature_for_degree(k)
    if grad_mode == "weak":
        gamma = _weak_gradient_coefficients(v, mesh, k, rule, ops)
    else:
        gamma = _interior_gradient_coefficients(v, mesh, k)
    if ops is None:
        ops = LocalOperators(mesh, k, a, rule)
    div = _divergence_term(gamma, mesh, k, a, rule)
    jump = _jump_term(gamma, mesh, k, a, rule, include_boundary)
    stab = ops.stabilizer_value(v)
    return div, jump, stab


def _check_degree(v, k):
    k = v.k if k is None else k
    if k != v.k:
        raise ValueError("degree does not match the weak function")
    return k


def residual_terms_primal(v, mesh, config, a=IDENTITY, k=None, rule=None, ops=None):
    """Squared pieces (divergence, jump, stabilizer) of the primal
    residual norm; the jump set is interior edges plus Gamma_n."""
    k = _check_degree(v, k)
    return _residual_terms(v, mesh, config, a, k, rule, ops, "weak", config.in_gamma_n)


def residual_norm_primal(v, mesh, config, a=IDENTITY, k=None, rule=None, ops=None):
    """Scaled residual norm of a primal-field weak function."""
    terms = residual_terms_primal(v, mesh, config, a, k, rule, ops)
    return float(np.sqrt(max(sum(terms), 0.0)))


def residual_terms_multiplier(v, mesh, config, a=IDENTITY, k=None, rule=None, ops=None):
    """Squared pieces of the multiplier residual norm; the jump set is
    interior edges plus the boundary minus Gamma_d."""
    k = _check_degree(v, k)
    include = mesh.is_boundary_edge & ~config.in_gamma_d
    return _residual_terms(v, mesh, config, a, k, rule, ops, "weak", include)


def residual_norm_multiplier(v, mesh, config, a=IDENTITY, k=None, rule=None, ops=None):
    """Scaled residual norm of a multiplier-field weak function."""
    terms = residual_terms_multiplier(v, mesh, config, a, k, rule, ops)
    return float(np.sqrt(max(sum(terms), 0.0)))


def strong_residual_norms(v, mesh, config, a=IDENTITY, k=None, rule=None, ops=None):
    """The pair of residual norms built from the interior gradient of v
    instead of the weak gradient: (primal edge set, multiplier edge set)."""
    k = _check_degree(v, k)
    primal = _residual_terms(v, mesh, config, a, k, rule, ops, "strong", config.in_gamma_n)
    include = mesh.is_boundary_edge & ~config.in_gamma_d
    multiplier = _residual_terms(v, mesh, config, a, k, rule, ops, "strong", include)
    return (
        float(np.sqrt(max(sum(primal), 0.0))),
        float(np.sqrt(max(sum(multiplier), 0.0))),
    )


def error_report(u_h, lam_h, u_exact, mesh, config, a=IDENTITY, k=None, rule=None,
                 ops=None, with_strong=False):
    """Collect every error functional of one solve.  The multiplier error
    is lam_h itself (its exact counterpart vanishes)."""
    k = _check_degree(u_h, k)
    rule = rule or quadrature_for_degree(k)
    if ops is None:
        ops = LocalOperators(mesh, k, a, rule)
    e_h, e0 = error_fields(u_h, u_exact, mesh, k, rule)
    stab = stabilizer_seminorm(e_h, mesh, k, rule, ops)
    report = ErrorReport(
        l2_e0=e0.l2_norm(rule),
        h1_e0=broken_h1(e0, mesh, rule),
        resid_u=residual_norm_primal(e_h, mesh, config, a, k, rule, ops),
        resid_lambda=residual_norm_multiplier(lam_h, mesh, config, a, k, rule, ops),
        stab_u=stab,
    )
    if with_strong:
        report.strong_u, _ = strong_residual_norms(e_h, mesh, config, a, k, rule, ops)
        _, report.strong_lambda = strong_residual_norms(lam_h, mesh, config, a, k, rule, ops)
    return report
