"""Assembly and direct solution of the coupled primal-dual system.

The discrete problem couples the primal field u_h (edge dofs fixed to the
projected Dirichlet data on Gamma_d) with a multiplier field lam_h (edge
dofs fixed to zero on the complement of Gamma_n):

    s(u_h, v) - b(v, lam_h) = 0                          for all test v,
    s(lam_h, w) + b(u_h, w) = (f, w_0) + <g2, w_b>_Gamma_n  for all test w.

After eliminating the fixed dofs and negating the first block row, the
free-dof matrix [[-S_ff, K_fg], [K_fg^T, S_gg]] is symmetric indefinite
and is factorized directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fespace import (
    DofMap,
    WeakFunction,
    edge_basis,
    edge_quad,
    element_basis,
    l2_project_edge,
    quadrature_for_degree,
    tri_quad,
)
from .weakops import LocalOperators

__all__ = [
    "SingularSystemError",
    "SaddleSystem",
    "assemble",
    "solve",
    "condition_estimate",
    "matrix_to_coordinate_text",
]

# relative residual bound accepted from the direct solver
_RESIDUAL_TOL = 1e-9
# pivot ratio below which the factorization is treated as singular;
# the experiment configurations stay above 1e-3, gauge-singular systems
# land at roundoff level
_PIVOT_TOL = 1e-12
# largest system factorized densely by condition_estimate
_DENSE_COND_LIMIT = 800


class SingularSystemError(RuntimeError):
    """The discrete system is singular: the ill-posedness diagnostic
    raised when the factorization hits a zero pivot or the solution is
    not a valid one."""


@dataclass
class SaddleSystem:
    """Assembled free-dof system, ordered primal block then multiplier
    block, plus the lift data needed to reconstruct full fields."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    mesh: object
    config: object
    k: int
    dofmap: DofMap
    u_free: np.ndarray
    lam_free: np.ndarray
    u_fixed_values: np.ndarray       # full-length vector, zero on free dofs
    primal_rows_negated: bool = field(default=True)

    @property
    def n_free(self):
        return self.matrix.shape[0]


def _accumulate(coo_rows, coo_cols, coo_data, dofs, local):
    n = len(dofs)
    coo_rows.append(np.repeat(dofs, n))
    coo_cols.append(np.tile(dofs, n))
    coo_data.append(local.ravel())


def assemble(mesh, config, case, k=1, rule=None, ops=None):
    """Assemble the saddle-point system for one manufactured case.

    The right-hand side collects (f, w_0) over elements and <g2, w_b> over
    the Gamma_n edges; the projected Dirichlet data Q_b g1 is eliminated
    into the right-hand side.
    """
    if config.mesh is not mesh:
        raise ValueError("boundary configuration belongs to a different mesh")
    rule = rule or quadrature_for_degree(k)
    if ops is None:
        ops = LocalOperators(mesh, k, case.a, rule)
    if config.gamma_n_edges.size and case.grad_u is None:
        raise ValueError("case provides no flux data g2 but Gamma_n is nonempty")

    dofmap = DofMap(mesh, k, config)
    n_dofs = dofmap.n_dofs

    s_rows, s_cols, s_data = [], [], []
    k_rows, k_cols, k_data = [], [], []
    rhs_full = np.zeros(n_dofs)
    kbasis = element_basis(k)
    for t in range(mesh.n_triangles):
        dofs = dofmap.cell_dofs(t)
        _accumulate(s_rows, s_cols, s_data, dofs, ops.stabilizers[t])
        _accumulate(k_rows, k_cols, k_data, dofs, ops.diffusion_forms[t])
        pts, wts = tri_quad(mesh, t, rule)
        fvals = np.asarray(case.f(pts[:, 0], pts[:, 1]), dtype=float)
        if fvals.ndim == 0:
            fvals = np.full(len(wts), float(fvals))
        vals = kbasis.eval(pts, mesh.tri_centroids[t], mesh.h_tri[t])
        rhs_full[dofmap.interior_block(t)] += vals.T @ (wts * fvals)

    ebasis = edge_basis(k)
    for e in config.gamma_n_edges:
        t0 = mesh.edge_tris[e][0]
        n_out = mesh.outward_normal(t0, e)
        pts, wts, tc = edge_quad(mesh, e, rule)
        g2vals = np.asarray(case.g2(pts[:, 0], pts[:, 1], n_out), dtype=float)
        rhs_full[dofmap.edge_block(e)] += ebasis.eval(tc).T @ (wts * g2vals)

    stab = sp.coo_matrix(
        (np.concatenate(s_data), (np.concatenate(s_rows), np.concatenate(s_cols))),
        shape=(n_dofs, n_dofs),
    ).tocsr()
    diff = sp.coo_matrix(
        (np.concatenate(k_data), (np.concatenate(k_rows), np.concatenate(k_cols))),
        shape=(n_dofs, n_dofs),
    ).tocsr()

    u_fixed_values = np.zeros(n_dofs)
    for e in config.gamma_d_edges:
        u_fixed_values[dofmap.edge_block(e)] = l2_project_edge(case.g1, mesh, e, k, rule)

    uf = dofmap.u_free
    lf = dofmap.lam_free
    up = np.nonzero(dofmap.u_fixed)[0]

    s_ff = stab[uf][:, uf]
    k_fg = diff[uf][:, lf]
    s_gg = stab[lf][:, lf]
    matrix = sp.bmat([[-s_ff, k_fg], [k_fg.T, s_gg]], format="csr")

    lift = u_fixed_values[up]
    rhs = np.concatenate([
        stab[uf][:, up] @ lift,
        rhs_full[lf] - diff[lf][:, up] @ lift,
    ])
    return SaddleSystem(
        matrix=matrix,
        rhs=rhs,
        mesh=mesh,
        config=config,
        k=k,
        dofmap=dofmap,
        u_free=uf,
        lam_free=lf,
        u_fixed_values=u_fixed_values,
    )


def solve(system):
    """Factorize and solve; returns the primal and multiplier fields with
    the fixed boundary values merged back in."""
    matrix = system.matrix.tocsc()
    try:
        lu = spla.splu(matrix)
    except RuntimeError as exc:
        raise SingularSystemError(f"direct factorization failed: {exc}") from exc
    nf = len(system.u_free)
    null_dir = None
    pivots = np.abs(lu.U.diagonal())
    if pivots.min() <= _PIVOT_TOL * pivots.max():
        # a roundoff-size pivot flags an exact kernel; one inverse-iteration
        # step isolates it.  A kernel confined to the multiplier block is a
        # pure gauge (the primal field stays unique); configurations whose
        # Dirichlet and Neumann sets cover the whole boundary produce one.
        n = matrix.shape[0]
        probe = lu.solve(np.full(n, 1.0 / np.sqrt(n)))
        norm = np.linalg.norm(probe)
        if not np.isfinite(norm) or norm == 0.0:
            raise SingularSystemError("singular system: factorization is unusable")
        null_dir = probe / norm
        if np.linalg.norm(null_dir[:nf]) > 1e-6:
            raise SingularSystemError(
                "singular system: the primal field is not unique "
                f"(pivot ratio {pivots.min() / pivots.max():.2e})"
            )
    if null_dir is None:
        x = lu.solve(system.rhs)
    else:
        # bordered system: pin the kernel component to zero, which both
        # regularizes the factorization and returns the minimal
        # representative across the multiplier gauge
        n = matrix.shape[0]
        col = sp.csc_matrix(null_dir.reshape(n, 1))
        bordered = sp.bmat([[matrix, col], [col.T, None]], format="csc")
        try:
            x = spla.splu(bordered).solve(np.append(system.rhs, 0.0))[:n]
        except RuntimeError as exc:
            raise SingularSystemError(f"singular system: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("direct solver produced a non-finite solution")

    residual_vec = matrix @ x - system.rhs
    if null_dir is not None:
        # the component along the kernel image is a data-compatibility
        # defect (quadrature-level), not a solver error
        residual_vec = residual_vec - (residual_vec @ null_dir) * null_dir
    residual = np.linalg.norm(residual_vec)
    scale = np.linalg.norm(system.rhs) + spla.norm(matrix, np.inf) * np.linalg.norm(x)
    if residual > _RESIDUAL_TOL * max(scale, 1e-300):
        raise SingularSystemError(
            f"solver residual {residual:.2e} exceeds {_RESIDUAL_TOL:.0e} * {scale:.2e}"
        )

    u_coeffs = system.u_fixed_values.copy()
    u_coeffs[system.u_free] = x[:nf]
    lam_coeffs = np.zeros(system.dofmap.n_dofs)
    lam_coeffs[system.lam_free] = x[nf:]
    return (
        WeakFunction(system.mesh, system.k, u_coeffs),
        WeakFunction(system.mesh, system.k, lam_coeffs),
    )


def condition_estimate(system):
    """Estimate of the 1-norm condition number of the free-dof matrix;
    +inf for a singular system.  Small systems are handled densely, the
    rest through the Hager-style 1-norm estimator."""
    matrix = system.matrix.tocsc()
    n = matrix.shape[0]
    if n == 0:
        return 0.0
    try:
        if n <= _DENSE_COND_LIMIT:
            dense = matrix.toarray()
            inv = np.linalg.inv(dense)
            return float(np.linalg.norm(dense, 1) * np.linalg.norm(inv, 1))
        lu = spla.splu(matrix)
        inv_op = spla.LinearOperator(
            (n, n),
            matvec=lu.solve,
            rmatvec=lambda b: lu.solve(b, trans="T"),
        )
        return float(spla.onenormest(matrix) * spla.onenormest(inv_op))
    except (RuntimeError, np.linalg.LinAlgError):
        return math.inf


def matrix_to_coordinate_text(matrix):
    """Coordinate text export: 'row col value' per entry, 0-based, sorted
    by row then column."""
    coo = sp.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    lines = [
        f"{coo.row[i]} {coo.col[i]} {coo.data[i]:.17g}"
        for i in order
    ]
    return "\n".join(lines) + ("\n" if lines else "")
