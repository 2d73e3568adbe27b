"""Small shared checks used across test modules."""

import numpy as np

from signet.graph import Kind, Network


def vertex_residuals(network: Network, fn) -> tuple[float, float]:
    """(max continuity/Dirichlet violation, max flux violation) of a piecewise function."""
    values: dict[str, list[float]] = {}
    flux: dict[str, float] = {}
    for e in network.edges:
        for v, x, sign in ((e.from_vertex, 0.0, -1.0), (e.to_vertex, e.length, 1.0)):
            values.setdefault(v, []).append(float(np.real(fn(e.id, np.array([x]))[0])))
            d = float(np.real(fn.derivative(e.id, np.array([x]))[0]))
            flux[v] = flux.get(v, 0.0) + sign * e.conductivity * d
    cont, fl = 0.0, 0.0
    for c in network.conditions:
        vals = values[c.vertex]
        if c.kind is Kind.DIRICHLET:
            cont = max(cont, abs(vals[0]))
        elif c.kind is Kind.NEUMANN:
            fl = max(fl, abs(flux[c.vertex]))
        else:
            cont = max(cont, max(vals) - min(vals))
            fl = max(fl, abs(flux[c.vertex]))
    return cont, fl


def pseudo_vertex_residuals(network: Network, fn) -> tuple[float, float]:
    """Same as ``vertex_residuals``; the pseudo operator shares the vertex conditions."""
    return vertex_residuals(network, fn)


def leading_by_modulus(values, count: int) -> np.ndarray:
    """The ``count`` entries of smallest |λ| (positive first on ties), sorted ascending."""
    values = np.asarray(values, float)
    order = np.lexsort((values < 0, np.abs(values)))
    return np.sort(values[order][:count])


def fd_reference(network: Network, operator: str, h: float, count: int) -> np.ndarray:
    """Finite-difference eigenvalues of smallest modulus, sorted ascending."""
    from signet.oracle import fd_assemble, fd_eigenvalues

    return fd_eigenvalues(fd_assemble(network, h, operator), count)
