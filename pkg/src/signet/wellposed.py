"""Resonance and well-posedness tests: forbidden ratios, coercivity inequalities,
and the determinant of the vertex transmission system."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import BadPartition, DegeneratePartition, UnsupportedTopology
from .graph import STAR_TOPOLOGIES, Kind, Network, Topology

RESONANCE_TOL = 1e-10


@dataclass(frozen=True)
class EdgeMoments:
    """Integrals of the source along one edge: first = ∫₀ᴸ f, second = ∫₀ᴸ∫₀ᵗ f."""

    first: float = 0.0
    second: float = 0.0


@dataclass(frozen=True)
class EdgeBound:
    """Envelope I <= k(x) <= S of |conductivity| on an edge of given length and sign."""

    lower: float
    upper: float
    length: float
    sign: int


@dataclass(frozen=True)
class ResonanceVerdict:
    well_posed: bool
    criterion: str
    critical_value: float | None
    margin: float
    determinant: float
    detail: str = ""


@dataclass(frozen=True)
class CoercivityCertificate:
    case_used: int
    lhs: float
    rhs: float
    holds: bool
    bounds: tuple[EdgeBound, ...]


@dataclass(frozen=True)
class TransmissionSystem:
    matrix: np.ndarray
    rhs: np.ndarray
    unknown_labels: tuple[str, ...]
    unknown_keys: tuple[tuple[int, str], ...]


def star_dirichlet_forbidden_ratio(D: int, N: int) -> float:
    if not (1 <= D < N):
        raise BadPartition(f"need 1 <= D < N, got D={D}, N={N}")
    return D / (N - D)


def star_dirichlet_forbidden_ratio_lengths(D: int, N: int, L_plus: float, L_minus: float) -> float:
    if not (1 <= D < N):
        raise BadPartition(f"need 1 <= D < N, got D={D}, N={N}")
    if L_plus <= 0 or L_minus <= 0:
        raise ValueError("lengths must be positive")
    return (D / L_plus) * (L_minus / (N - D))


def coercivity_certificate(bounds: Sequence[EdgeBound]) -> CoercivityCertificate:
    """Evaluate both sufficient inequalities; case 1 is preferred when both hold.

    When neither holds, the case closer to holding (smaller lhs/rhs) is reported.
    """
    bounds = tuple(bounds)
    for b in bounds:
        if not (0 < b.lower <= b.upper) or b.length <= 0 or b.sign not in (1, -1):
            raise ValueError(f"invalid edge bound {b}")
    pos = [b for b in bounds if b.sign > 0]
    neg = [b for b in bounds if b.sign < 0]
    if not pos or not neg:
        raise DegeneratePartition("both conductivity signs must be present")
    D, N = len(pos), len(bounds)
    lhs1 = max(b.upper / b.length for b in neg) * sum(b.length / b.lower for b in pos)
    rhs1 = D**2 / (N - D)
    lhs2 = max(b.upper / b.length for b in pos) * sum(b.length / b.lower for b in neg)
    rhs2 = (N - D) ** 2 / D
    if lhs1 < rhs1:
        return CoercivityCertificate(1, lhs1, rhs1, True, bounds)
    if lhs2 < rhs2:
        return CoercivityCertificate(2, lhs2, rhs2, True, bounds)
    if lhs1 / rhs1 <= lhs2 / rhs2:
        return CoercivityCertificate(1, lhs1, rhs1, False, bounds)
    return CoercivityCertificate(2, lhs2, rhs2, False, bounds)


def bounds_from_network(network: Network) -> tuple[EdgeBound, ...]:
    """Constant-conductivity envelopes I = S = |k| for every edge."""
    return tuple(
        EdgeBound(abs(e.conductivity), abs(e.conductivity), e.length, 1 if e.conductivity > 0 else -1)
        for e in network.edges
    )


def _moments(source_moments, edge_id) -> EdgeMoments:
    if source_moments is None:
        return EdgeMoments()
    return source_moments.get(edge_id, EdgeMoments())


def assemble_transmission(
    network: Network, source_moments: Mapping[int, EdgeMoments] | None = None
) -> TransmissionSystem:
    """Small dense system M v = F for the unknown vertex-side values.

    Stars: unknowns are the junction-side values of each edge.  Tadpole3:
    (ψ₁(L₁), ψ₂(L₂), ψ₃(L₃), ψ₁(0), ψ₂(0)).  Tadpole2: (ψ₁(L₁), ψ₂(L₂), ψ₁(0)).
    """
    topo = network.topology
    edges = network.edges
    if topo in STAR_TOPOLOGIES:
        n = len(edges)
        M = np.zeros((n, n))
        F = np.zeros(n)
        for i in range(n - 1):
            M[i, i], M[i, i + 1] = 1.0, -1.0
        for j, e in enumerate(edges):
            m = _moments(source_moments, e.id)
            if network.external_kind(e) is Kind.DIRICHLET:
                M[n - 1, j] = e.conductivity / e.length
                F[n - 1] += m.first - m.second / e.length
            else:
                F[n - 1] += m.first
        keys = tuple((e.id, "L") for e in edges)
    elif topo is Topology.TADPOLE2:
        head, tail = edges
        mh, mt = _moments(source_moments, head.id), _moments(source_moments, tail.id)
        M = np.zeros((3, 3))
        F = np.zeros(3)
        M[0, :2] = 1.0, -1.0
        M[1, 0], M[1, 2] = 1.0, -1.0
        F[2] = mh.first + mt.first
        if network.external_kind(tail) is Kind.DIRICHLET:
            M[2, 1] = tail.conductivity / tail.length
            F[2] -= mt.second / tail.length
        keys = ((head.id, "L"), (tail.id, "L"), (head.id, "0"))
    elif topo is Topology.TADPOLE3:
        e1, e2, e3 = edges
        m = [_moments(source_moments, e.id) for e in edges]
        r = [e.conductivity / e.length for e in edges]
        M = np.array(
            [
                [1.0, -1.0, 0.0, 0.0, 0.0],
                [0.0, 1.0, -1.0, 0.0, 0.0],
                [0.0, 0.0, 0.0, 1.0, -1.0],
                [r[0], r[1], 0.0, -r[0], -r[1]],
                [r[0], r[1], r[2], -r[0], -r[1]],
            ]
        )
        F = np.zeros(5)
        F[3] = -(m[0].second / e1.length + m[1].second / e2.length)
        F[4] = sum(mi.first - mi.second / e.length for mi, e in zip(m, edges))
        keys = ((e1.id, "L"), (e2.id, "L"), (e3.id, "L"), (e1.id, "0"), (e2.id, "0"))
    else:
        raise UnsupportedTopology(f"no transmission system for topology {topo.value}")
    labels = tuple(f"psi_{eid}({'L' if end == 'L' else '0'})" for eid, end in keys)
    return TransmissionSystem(M, F, labels, keys)


def _normalized_margin(M: np.ndarray) -> tuple[float, float]:
    det = float(np.linalg.det(M))
    norms = np.linalg.norm(M, axis=1)
    if np.any(norms == 0):
        return det, 0.0
    return det, abs(det) / float(np.prod(norms))


def _two_phase_ratio(network: Network) -> tuple[float, float] | None:
    """(|k⁻|/k⁺, forbidden ratio) when a Dirichlet star has constant k and L per phase."""
    pos = [e for e in network.edges if e.conductivity > 0]
    neg = [e for e in network.edges if e.conductivity < 0]
    if not pos or not neg:
        return None
    if len({e.conductivity for e in pos}) != 1 or len({e.conductivity for e in neg}) != 1:
        return None
    if len({e.length for e in pos}) != 1 or len({e.length for e in neg}) != 1:
        return None
    ratio = abs(neg[0].conductivity) / pos[0].conductivity
    crit = star_dirichlet_forbidden_ratio_lengths(len(pos), len(network.edges), pos[0].length, neg[0].length)
    return ratio, crit


def resonance_verdict(network: Network, tol: float = RESONANCE_TOL) -> ResonanceVerdict:
    """Determinant test on the homogeneous transmission matrix, normalised by row norms."""
    topo = network.topology
    if topo in STAR_TOPOLOGIES and all(network.external_kind(e) is Kind.NEUMANN for e in network.edges):
        return ResonanceVerdict(
            True, "neumann-only", None, 1.0, 0.0,
            "unique up to a constant; solvable iff the source has zero mean",
        )
    system = assemble_transmission(network)
    det, margin = _normalized_margin(system.matrix)
    well_posed = margin > tol
    if topo is Topology.STAR_DIRICHLET:
        dirichlet_sum = sum(e.conductivity / e.length for e in network.edges)
        two_phase = _two_phase_ratio(network)
        if two_phase is None:
            return ResonanceVerdict(well_posed, "dirichlet-sum", dirichlet_sum, margin, det)
        ratio, crit = two_phase
        rel = abs(ratio - crit) / crit
        # the closed form and the determinant must agree away from the tolerance band
        if (margin <= tol and rel > 1e-6) or (rel <= tol and margin > 1e-6):
            raise AssertionError(
                f"determinant test (margin {margin:.3e}) disagrees with forbidden ratio {crit} (|k-|/k+ = {ratio})"
            )
        return ResonanceVerdict(
            well_posed, "forbidden-ratio", crit, margin, det,
            f"|k-|/k+ must differ from D/L+ * L-/(N-D) = {crit:.12g}",
        )
    if topo is Topology.STAR_MIXED:
        dirichlet_sum = sum(
            e.conductivity / e.length for e in network.edges if network.external_kind(e) is Kind.DIRICHLET
        )
        return ResonanceVerdict(
            well_posed, "dirichlet-sum", dirichlet_sum, margin, det,
            "sum of k/L over Dirichlet edges must be nonzero",
        )
    if topo is Topology.TADPOLE2:
        tail = network.edges[1]
        return ResonanceVerdict(
            well_posed, "tadpole-tail", tail.conductivity / tail.length, margin, det,
            "resonance-free for every sign pattern with a Dirichlet tail",
        )
    e1, e2, _ = network.edges
    head_sum = e1.conductivity / e1.length + e2.conductivity / e2.length
    return ResonanceVerdict(
        well_posed, "tadpole3-head-sum", head_sum, margin, det,
        "-k1/k2 must differ from L1/L2",
    )

