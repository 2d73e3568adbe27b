"""Pick the spectrum routine for an arbitrary parsed network.

The closed-form routines assume the canonical normalisation (k = 1 on positive
star edges and on the tadpole loop) and the canonical edge numbering.  Here a
network is rescaled by its reference conductivity, matched edge by edge against
the canonical builder, and the result is mapped back onto the caller's edge ids.
Scaling every conductivity by c leaves the pseudo spectrum unchanged and
multiplies the standard one by c.
"""

from __future__ import annotations

from dataclasses import replace
from fractions import Fraction

from ..errors import UnsupportedTopology
from ..functions import PiecewiseFunction
from ..graph import Kind, Network, PartitionSummary, Topology
from .common import PSEUDO, STANDARD, EigenPair, Spectrum
from .star import (
    mixed_star,
    spectrum_star_equilateral_pseudo,
    spectrum_star_equilateral_standard,
    spectrum_star_irrational_pseudo,
    spectrum_star_irrational_standard,
    spectrum_star_mixed_pseudo,
    spectrum_star_mixed_standard,
    two_phase_star,
)
from .tadpole import spectrum_tadpole_pseudo, spectrum_tadpole_standard

_REL = 1e-12


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= _REL * max(abs(a), abs(b), 1.0)


def _two_values(network: Network) -> tuple[float, float]:
    ks = network.conductivities
    plus = {k for k in ks if k > 0}
    minus = {k for k in ks if k < 0}
    if len(plus) != 1 or len(minus) != 1:
        raise UnsupportedTopology(
            "closed-form star spectra need exactly one positive and one negative conductivity value"
        )
    return plus.pop(), minus.pop()


def _edge_map(canonical: Network, actual: Network, scale: float) -> dict[int, int]:
    """Canonical edge id -> caller edge id, matching length, scaled conductivity and end kind."""
    free = list(actual.edges)
    mapping = {}
    for e in canonical.edges:
        for f in free:
            if (
                _close(e.length, f.length)
                and _close(e.conductivity, f.conductivity / scale)
                and canonical.external_kind(e) is actual.external_kind(f)
            ):
                mapping[e.id] = f.id
                free.remove(f)
                break
        else:
            raise UnsupportedTopology(f"cannot match canonical edge {e.id} to the network")
    return mapping


def _relabel(fn: PiecewiseFunction, mapping: dict[int, int]) -> PiecewiseFunction:
    pieces = [replace(p, edge_id=mapping[p.edge_id]) for p in fn.pieces]
    return PiecewiseFunction(tuple(sorted(pieces, key=lambda p: p.edge_id)))


def _rebase(spectrum: Spectrum, network: Network, mapping: dict[int, int], scale: float) -> Spectrum:
    lam_scale = scale if spectrum.operator == STANDARD else 1.0

    def move(p: EigenPair) -> EigenPair:
        return replace(
            p, lam=p.lam * lam_scale, functions=tuple(_relabel(f, mapping) for f in p.functions)
        )

    pairs = [move(p) for p in spectrum.pairs + spectrum.negative_pairs]
    pos = tuple(sorted((p for p in pairs if p.lam >= 0), key=lambda p: (p.lam, p.family)))
    neg = tuple(sorted((p for p in pairs if p.lam < 0), key=lambda p: (-p.lam, p.family)))
    meta = dict(spectrum.metadata)
    meta["reference_conductivity"] = scale
    if lam_scale < 0:
        # the sign flip swaps which side each truncated family lives on
        meta["truncated"] = tuple((fam, -side) for fam, side in meta.get("truncated", ()))
    return Spectrum(pos, neg, spectrum.operator, spectrum.truncation, network, meta)


def spectrum_for_network(
    network: Network,
    operator: str,
    n_max: int,
    ratio: Fraction | None = None,
    allow_resonant: bool = False,
) -> Spectrum:
    if operator not in (STANDARD, PSEUDO):
        raise ValueError(f"unknown operator {operator!r}")
    topo = network.topology
    if topo in (Topology.STAR_DIRICHLET, Topology.STAR_MIXED):
        k_plus, k_neg = _two_values(network)
        k_minus = k_neg / k_plus
        lengths = network.lengths
        equilateral = all(_close(L, lengths[0]) for L in lengths)
        part = network.partition()
        if topo is Topology.STAR_DIRICHLET:
            D, N = part.D, part.N
            if equilateral:
                L = lengths[0]
                canonical = two_phase_star(D, N, k_minus, L)
                if operator == STANDARD:
                    sp = spectrum_star_equilateral_standard(D, N, k_minus, n_max, allow_resonant, L)
                else:
                    sp = spectrum_star_equilateral_pseudo(D, N, k_minus, n_max, L)
            else:
                ordered = [e.length for e in network.edges if e.conductivity > 0] + [
                    e.length for e in network.edges if e.conductivity < 0
                ]
                canonical = two_phase_star(D, N, k_minus, ordered)
                fn = spectrum_star_irrational_standard if operator == STANDARD else spectrum_star_irrational_pseudo
                sp = fn(ordered, D, k_minus, n_max)
        else:
            counts = PartitionSummary.from_counts(part.Nd_plus, part.Nn_plus, part.Nd_minus, part.Nn_minus)
            classes = {(1, Kind.DIRICHLET): [], (1, Kind.NEUMANN): [], (-1, Kind.DIRICHLET): [], (-1, Kind.NEUMANN): []}
            for e in network.edges:
                classes[(1 if e.conductivity > 0 else -1, network.external_kind(e))].append(e.length)
            ordered = (
                classes[(1, Kind.DIRICHLET)] + classes[(1, Kind.NEUMANN)]
                + classes[(-1, Kind.DIRICHLET)] + classes[(-1, Kind.NEUMANN)]
            )
            canonical = mixed_star(counts, k_minus, ordered)
            if operator == STANDARD:
                sp = spectrum_star_mixed_standard(counts, k_minus, ordered, n_max, allow_resonant)
            else:
                sp = spectrum_star_mixed_pseudo(counts, k_minus, ordered, n_max)
        scale = k_plus
    elif topo is Topology.TADPOLE2:
        loop = next(e for e in network.edges if e.is_loop)
        tail = next(e for e in network.edges if not e.is_loop)
        k_minus = tail.conductivity / loop.conductivity
        if not k_minus < 0:
            raise UnsupportedTopology("tadpole spectra need loop and tail conductivities of opposite sign")
        if operator == STANDARD:
            sp = spectrum_tadpole_standard(loop.length, tail.length, k_minus, n_max)
        else:
            sp = spectrum_tadpole_pseudo(loop.length, tail.length, k_minus, n_max, ratio)
        return _rebase(sp, network, {1: loop.id, 2: tail.id}, loop.conductivity)
    else:
        raise UnsupportedTopology(f"no closed-form spectrum for topology {topo.value}")
    mapping = _edge_map(canonical, network, scale)
    return _rebase(sp, network, mapping, scale)
