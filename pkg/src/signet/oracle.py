"""Finite-difference discretisation of the network operators, used as ground truth.

Each edge gets a uniform mesh with ceil(L/h) cells.  Interior nodes use the
three-point second difference; a vertex node collects half a cell from every
incident edge end, which is the ghost-node reflection at Neumann ends and the
second-order flux balance at Kirchhoff junctions.  Dirichlet nodes are
eliminated.  Vertex values are shared unknowns, so continuity holds exactly.

Standard operator: K u = λ M u with K the k-weighted stiffness and M the lumped
mass.  Pseudo operator: the same K with the k-weighted lumped mass, which is
indefinite.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph
import scipy.sparse.linalg as spla

from .errors import ConvergenceFailure, MeshTooCoarse, SingularSystem
from .graph import Kind, Network

STANDARD = "standard"
PSEUDO = "pseudo"

COMPLEX_TOL = 1e-8
# LU pivots this small relative to the largest mean the discrete system is singular
PIVOT_FLOOR = 1e-13


@dataclass(frozen=True)
class FdDiscretization:
    h: float
    operator: str
    network: Network
    node_counts: dict[int, int]
    stiffness: sp.csr_matrix
    mass: np.ndarray
    plain_mass: np.ndarray
    edge_dofs: dict[int, np.ndarray]  # dof index per mesh node, -1 for Dirichlet nodes

    @property
    def size(self) -> int:
        return self.mass.size

    def edge_grid(self, edge_id: int) -> np.ndarray:
        e = self.network.edge(edge_id)
        return np.linspace(0.0, e.length, self.node_counts[edge_id] + 1)


def fd_assemble(network: Network, h: float, operator: str = STANDARD) -> FdDiscretization:
    if operator not in (STANDARD, PSEUDO):
        raise ValueError(f"unknown operator {operator!r}")
    shortest = min(e.length for e in network.edges)
    if not (0 < h <= shortest / 8 * (1 + 1e-12)):
        raise MeshTooCoarse(f"h = {h} exceeds the shortest edge / 8 = {shortest / 8}")
    vertex_dof: dict[str, int] = {}
    count = 0
    for v in network.vertices():
        if network.condition(v) is not Kind.DIRICHLET:
            vertex_dof[v] = count
            count += 1
    edge_dofs: dict[int, np.ndarray] = {}
    node_counts: dict[int, int] = {}
    for e in network.edges:
        cells = int(math.ceil(e.length / h - 1e-9))
        node_counts[e.id] = cells
        dofs = np.empty(cells + 1, dtype=np.int64)
        dofs[0] = vertex_dof.get(e.from_vertex, -1)
        dofs[-1] = vertex_dof.get(e.to_vertex, -1)
        dofs[1:-1] = np.arange(count, count + cells - 1)
        count += cells - 1
        edge_dofs[e.id] = dofs
    rows, cols, vals = [], [], []
    mass = np.zeros(count)
    plain = np.zeros(count)
    for e in network.edges:
        dofs = edge_dofs[e.id]
        dx = e.length / node_counts[e.id]
        a, b = dofs[:-1], dofs[1:]
        c = e.conductivity / dx
        for r, s_, v in ((a, a, c), (b, b, c), (a, b, -c), (b, a, -c)):
            keep = (r >= 0) & (s_ >= 0)
            rows.append(r[keep])
            cols.append(s_[keep])
            vals.append(np.full(keep.sum(), v))
        weight = e.conductivity if operator == PSEUDO else 1.0
        for ends in (a, b):
            keep = ends >= 0
            np.add.at(mass, ends[keep], weight * dx / 2)
            np.add.at(plain, ends[keep], dx / 2)
    K = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(count, count)
    )
    K.sum_duplicates()
    return FdDiscretization(h, operator, network, node_counts, K, mass, plain, edge_dofs)


def _threads() -> int | None:
    value = os.environ.get("SIGNET_THREADS")
    return int(value) if value else None


def _limit_threads():
    limit = _threads()
    if limit is None:
        return _NullContext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=limit)


class _NullContext:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False


def fd_eigenvalues(
    disc: FdDiscretization, count: int, window: tuple[float, float] | None = None
) -> np.ndarray:
    """The ``count`` eigenvalues of smallest modulus inside ``window``, sorted ascending."""
    if count < 1:
        raise ValueError("count must be >= 1")
    lo, hi = window if window is not None else (-np.inf, np.inf)
    with _limit_threads():
        if disc.operator == STANDARD:
            lam = _standard_eigenvalues(disc, lo, hi)
        else:
            lam = _real_part_checked(fd_pseudo_spectrum(disc), lo, hi)
    lam = lam[(lam >= lo) & (lam <= hi)]
    lam = lam[np.argsort(np.abs(lam), kind="stable")][:count]
    return np.sort(lam)


def _standard_eigenvalues(disc: FdDiscretization, lo: float, hi: float) -> np.ndarray:
    d = 1.0 / np.sqrt(disc.mass)
    B = sp.diags(d) @ disc.stiffness @ sp.diags(d)
    perm = csgraph.reverse_cuthill_mckee(sp.csr_matrix(B), symmetric_mode=True)
    B = sp.csr_matrix(B)[perm][:, perm].tocoo()
    bw = int(np.max(np.abs(B.row - B.col))) if B.nnz else 0
    n = B.shape[0]
    band = np.zeros((bw + 1, n))
    lower = B.row >= B.col
    band[B.row[lower] - B.col[lower], B.col[lower]] = B.data[lower]
    try:
        if np.isfinite(lo) or np.isfinite(hi):
            bound = float(np.max(np.abs(B.data)) * (2 * bw + 1))
            rng = (max(lo, -bound) - 1e-12, min(hi, bound))
            return sla.eig_banded(band, lower=True, eigvals_only=True, select="v", select_range=rng)
        return sla.eig_banded(band, lower=True, eigvals_only=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(str(exc)) from exc


def fd_pseudo_spectrum(disc: FdDiscretization) -> np.ndarray:
    """All finite eigenvalues of the indefinite pencil (complex dtype), by modulus."""
    K = disc.stiffness.toarray()
    try:
        if np.all(disc.mass != 0):
            lam = sla.eigvals(K / disc.mass[:, None], overwrite_a=True, check_finite=False)
        else:
            # a vanishing vertex weight turns that row into a constraint
            lam = sla.eigvals(K, np.diag(disc.mass), check_finite=False)
            lam = lam[np.isfinite(lam)]
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return lam[np.argsort(np.abs(lam), kind="stable")]


def _real_part_checked(lam: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Real eigenvalues; warns about non-real ones whose real part falls in the window."""
    big = np.abs(lam.imag) > COMPLEX_TOL * np.maximum(1.0, np.abs(lam.real))
    inside = big & (lam.real >= lo) & (lam.real <= hi)
    if np.any(inside):
        warnings.warn(
            f"{int(inside.sum())} discrete eigenvalues in the window are not real", RuntimeWarning
        )
    return np.sort(lam[~big].real)


@dataclass(frozen=True)
class FdSolution:
    grids: dict[int, np.ndarray]
    values: dict[int, np.ndarray]


def fd_solve(disc: FdDiscretization, source) -> FdSolution:
    """Solve K u = M f with f given per edge as a callable of the local coordinate."""
    b = np.zeros(disc.size)
    for e in disc.network.edges:
        x = disc.edge_grid(e.id)
        fx = np.asarray(source(e.id, x), float) * np.ones_like(x)
        dofs = disc.edge_dofs[e.id]
        dx = e.length / disc.node_counts[e.id]
        w = np.full(x.size, dx)
        w[0] = w[-1] = dx / 2
        keep = dofs >= 0
        np.add.at(b, dofs[keep], (w * fx)[keep])
    try:
        lu = spla.splu(disc.stiffness.tocsc())
    except RuntimeError as exc:
        raise SingularSystem(str(exc)) from exc
    pivots = np.abs(lu.U.diagonal())
    if pivots.min() <= PIVOT_FLOOR * pivots.max():
        raise SingularSystem(f"pivot ratio {pivots.min() / pivots.max():.2e} is at round-off level")
    u = lu.solve(b)
    if not np.all(np.isfinite(u)):
        raise SingularSystem("discrete system is singular")
    grids, values = {}, {}
    for e in disc.network.edges:
        dofs = disc.edge_dofs[e.id]
        vals = np.where(dofs >= 0, u[np.maximum(dofs, 0)], 0.0)
        grids[e.id] = disc.edge_grid(e.id)
        values[e.id] = vals
    return FdSolution(grids, values)


def fd_condition_estimate(disc: FdDiscretization) -> float:
    """2-norm condition number of the stiffness matrix (dense; small meshes only)."""
    return float(np.linalg.cond(disc.stiffness.toarray()))
