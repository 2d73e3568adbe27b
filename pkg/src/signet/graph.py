"""Metric-graph data model, canonical builders and the plain-text network format.

Edges carry a local coordinate running from 0 at ``from_vertex`` to ``length``
at ``to_vertex``.  A Kirchhoff vertex imposes value continuity and a vanishing
signed flux sum, with sign +1 at an edge's to-end and -1 at its from-end.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .errors import (
    EmptyGraph,
    NonpositiveLength,
    ParseError,
    ValidationError,
    ZeroConductivity,
)


class Kind(str, Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    KIRCHHOFF = "kirchhoff"


class Topology(str, Enum):
    STAR_DIRICHLET = "StarDirichlet"
    STAR_MIXED = "StarMixed"
    TADPOLE2 = "Tadpole2"
    TADPOLE3 = "Tadpole3"
    GENERAL = "General"


STAR_TOPOLOGIES = (Topology.STAR_DIRICHLET, Topology.STAR_MIXED)

_KIND_ALIASES = {
    "d": Kind.DIRICHLET,
    "dirichlet": Kind.DIRICHLET,
    "n": Kind.NEUMANN,
    "neumann": Kind.NEUMANN,
    "k": Kind.KIRCHHOFF,
    "kirchhoff": Kind.KIRCHHOFF,
}


def as_kind(value) -> Kind:
    if isinstance(value, Kind):
        return value
    try:
        return _KIND_ALIASES[str(value).strip().lower()]
    except KeyError:
        raise ValidationError(f"unknown vertex condition {value!r}") from None


@dataclass(frozen=True)
class Edge:
    id: int
    length: float
    conductivity: float
    from_vertex: str
    to_vertex: str

    @property
    def is_loop(self) -> bool:
        return self.from_vertex == self.to_vertex


@dataclass(frozen=True)
class VertexCondition:
    vertex: str
    kind: Kind


@dataclass(frozen=True)
class PartitionSummary:
    D: int
    N: int
    Nd_plus: int
    Nn_plus: int
    Nd_minus: int
    Nn_minus: int

    @classmethod
    def from_counts(cls, nd_plus: int, nn_plus: int, nd_minus: int, nn_minus: int) -> "PartitionSummary":
        counts = (nd_plus, nn_plus, nd_minus, nn_minus)
        if any(c < 0 for c in counts):
            raise ValidationError("class counts must be nonnegative")
        return cls(nd_plus + nn_plus, sum(counts), *counts)


@dataclass(frozen=True)
class Network:
    edges: tuple[Edge, ...]
    conditions: tuple[VertexCondition, ...]
    topology: Topology = Topology.GENERAL

    def edge(self, edge_id: int) -> Edge:
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise KeyError(edge_id)

    @property
    def edge_ids(self) -> tuple[int, ...]:
        return tuple(e.id for e in self.edges)

    def vertices(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for e in self.edges:
            seen.setdefault(e.from_vertex)
            seen.setdefault(e.to_vertex)
        return tuple(seen)

    def degree(self, vertex: str) -> int:
        return sum((e.from_vertex == vertex) + (e.to_vertex == vertex) for e in self.edges)

    def condition(self, vertex: str) -> Kind:
        for c in self.conditions:
            if c.vertex == vertex:
                return c.kind
        raise KeyError(vertex)

    def external_kind(self, edge: Edge) -> Kind | None:
        """Condition at the degree-one end of an edge, if it has one."""
        for v in (edge.from_vertex, edge.to_vertex):
            if self.degree(v) == 1:
                return self.condition(v)
        return None

    def partition(self) -> PartitionSummary:
        counts = Counter()
        for e in self.edges:
            kind = self.external_kind(e)
            sign = "+" if e.conductivity > 0 else "-"
            if kind is Kind.NEUMANN:
                counts["n" + sign] += 1
            else:
                counts["d" + sign] += 1
        return PartitionSummary.from_counts(counts["d+"], counts["n+"], counts["d-"], counts["n-"])

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(e.length for e in self.edges)

    @property
    def conductivities(self) -> tuple[float, ...]:
        return tuple(e.conductivity for e in self.edges)


def _check_edge_values(lengths: Iterable[float], conductivities: Iterable[float]) -> None:
    for L in lengths:
        if not (math.isfinite(L) and L > 0):
            raise NonpositiveLength(f"edge length must be positive and finite, got {L!r}")
    for k in conductivities:
        if k == 0:
            raise ZeroConductivity("edge conductivity must be nonzero")
        if not math.isfinite(k):
            raise ValidationError(f"conductivity must be finite, got {k!r}")


def build_star(
    lengths: Sequence[float], conductivities: Sequence[float], boundary: Sequence
) -> Network:
    """Star with external vertices x1..xN joined at the Kirchhoff center c.

    Edges are reordered so positive conductivities come first (stable by input
    position) and then renumbered 1..N.
    """
    if not (len(lengths) == len(conductivities) == len(boundary)):
        raise ValidationError("lengths, conductivities and boundary must have equal size")
    if len(lengths) < 2:
        raise EmptyGraph("a star needs at least two edges")
    lengths = [float(L) for L in lengths]
    conductivities = [float(k) for k in conductivities]
    _check_edge_values(lengths, conductivities)
    kinds = [as_kind(b) for b in boundary]
    if any(k is Kind.KIRCHHOFF for k in kinds):
        raise ValidationError("external star vertices must be Dirichlet or Neumann")
    order = sorted(range(len(lengths)), key=lambda i: (conductivities[i] < 0, i))
    edges = []
    conditions = []
    for new_id, i in enumerate(order, start=1):
        edges.append(Edge(new_id, lengths[i], conductivities[i], f"x{new_id}", "c"))
        conditions.append(VertexCondition(f"x{new_id}", kinds[i]))
    conditions.append(VertexCondition("c", Kind.KIRCHHOFF))
    topo = Topology.STAR_DIRICHLET if all(k is Kind.DIRICHLET for k in kinds) else Topology.STAR_MIXED
    net = Network(tuple(edges), tuple(conditions), topo)
    validate(net)
    return net


def build_tadpole2(L1: float, L2: float, k1: float, k2: float) -> Network:
    """Loop (edge 1, from v to v) plus tail (edge 2, from the Dirichlet end o to v)."""
    L1, L2, k1, k2 = map(float, (L1, L2, k1, k2))
    _check_edge_values((L1, L2), (k1, k2))
    net = Network(
        (Edge(1, L1, k1, "v", "v"), Edge(2, L2, k2, "o", "v")),
        (VertexCondition("o", Kind.DIRICHLET), VertexCondition("v", Kind.KIRCHHOFF)),
        Topology.TADPOLE2,
    )
    validate(net)
    return net


def build_tadpole3(lengths: Sequence[float], conductivities: Sequence[float]) -> Network:
    """Tadpole whose head is split into two parallel edges between w and v."""
    if len(lengths) != 3 or len(conductivities) != 3:
        raise ValidationError("a three-edge tadpole needs exactly three lengths and conductivities")
    lengths = [float(L) for L in lengths]
    conductivities = [float(k) for k in conductivities]
    _check_edge_values(lengths, conductivities)
    edges = (
        Edge(1, lengths[0], conductivities[0], "w", "v"),
        Edge(2, lengths[1], conductivities[1], "w", "v"),
        Edge(3, lengths[2], conductivities[2], "o", "v"),
    )
    conds = (
        VertexCondition("o", Kind.DIRICHLET),
        VertexCondition("w", Kind.KIRCHHOFF),
        VertexCondition("v", Kind.KIRCHHOFF),
    )
    net = Network(edges, conds, Topology.TADPOLE3)
    validate(net)
    return net


def _is_connected(edges: Sequence[Edge]) -> bool:
    adjacency: dict[str, set[str]] = {}
    for e in edges:
        adjacency.setdefault(e.from_vertex, set()).add(e.to_vertex)
        adjacency.setdefault(e.to_vertex, set()).add(e.from_vertex)
    if not adjacency:
        return False
    start = next(iter(adjacency))
    stack, seen = [start], {start}
    while stack:
        for nxt in adjacency[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return len(seen) == len(adjacency)


def infer_topology(edges: Sequence[Edge], conditions: Sequence[VertexCondition]) -> Topology:
    kinds = {c.vertex: c.kind for c in conditions}
    kirchhoff = [v for v, k in kinds.items() if k is Kind.KIRCHHOFF]
    n = len(edges)
    if n >= 2 and len(kirchhoff) == 1:
        center = kirchhoff[0]
        if all(e.to_vertex == center and e.from_vertex != center for e in edges):
            externals = [kinds[e.from_vertex] for e in edges]
            if len({e.from_vertex for e in edges}) == n:
                if all(k is Kind.DIRICHLET for k in externals):
                    return Topology.STAR_DIRICHLET
                return Topology.STAR_MIXED
        if n == 2:
            head, tail = edges
            if (
                head.is_loop
                and head.from_vertex == center
                and tail.to_vertex == center
                and tail.from_vertex != center
            ):
                return Topology.TADPOLE2
    if n == 3 and len(kirchhoff) == 2:
        e1, e2, e3 = edges
        w, v = e1.from_vertex, e1.to_vertex
        if (
            w != v
            and (e2.from_vertex, e2.to_vertex) == (w, v)
            and e3.to_vertex == v
            and e3.from_vertex not in (w, v)
            and kinds.get(w) is Kind.KIRCHHOFF
            and kinds.get(v) is Kind.KIRCHHOFF
        ):
            return Topology.TADPOLE3
    return Topology.GENERAL


def validate(network: Network) -> None:
    """Raise ValidationError if any structural invariant is violated."""
    edges = network.edges
    if not edges:
        raise EmptyGraph("network has no edges")
    ids = [e.id for e in edges]
    if len(set(ids)) != len(ids):
        raise ValidationError("edge ids must be unique")
    _check_edge_values((e.length for e in edges), (e.conductivity for e in edges))
    if not _is_connected(edges):
        raise ValidationError("network is not connected")
    cond_vertices = [c.vertex for c in network.conditions]
    if len(set(cond_vertices)) != len(cond_vertices):
        raise ValidationError("a vertex carries more than one condition")
    vertices = set(network.vertices())
    missing = vertices - set(cond_vertices)
    if missing:
        raise ValidationError(f"vertices without a condition: {sorted(missing)}")
    extra = set(cond_vertices) - vertices
    if extra:
        raise ValidationError(f"conditions on unknown vertices: {sorted(extra)}")
    for c in network.conditions:
        deg = network.degree(c.vertex)
        if c.kind is Kind.KIRCHHOFF and deg < 2:
            raise ValidationError(f"Kirchhoff condition on degree-{deg} vertex {c.vertex!r}")
        if c.kind is not Kind.KIRCHHOFF and deg != 1:
            raise ValidationError(f"{c.kind.value} condition on degree-{deg} vertex {c.vertex!r}")
    inferred = infer_topology(edges, network.conditions)
    if network.topology is not Topology.GENERAL and network.topology is not inferred:
        raise ValidationError(f"topology tag {network.topology.value} does not match structure")


def _format_float(x: float) -> str:
    return repr(float(x))


def render_network(network: Network) -> str:
    lines = []
    for e in network.edges:
        lines.append(
            f"edge {e.id} length={_format_float(e.length)} conductivity={_format_float(e.conductivity)}"
            f" from={e.from_vertex} to={e.to_vertex}"
        )
    for c in network.conditions:
        lines.append(f"bc {c.vertex} {c.kind.value}")
    return "\n".join(lines) + "\n"


_EDGE_KEYS = ("length", "conductivity", "from", "to")


def _parse_float(token: str, line: int, key: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(line, f"{key} is not a number: {token!r}") from None
    if not math.isfinite(value):
        raise ParseError(line, f"{key} must be finite")
    return value


def parse_network(text: str) -> Network:
    """Parse the line-oriented network format; see ``render_network``."""
    edges: list[Edge] = []
    conditions: list[VertexCondition] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        head = tokens[0]
        if head == "edge":
            if len(tokens) < 2:
                raise ParseError(lineno, "edge needs an id")
            try:
                edge_id = int(tokens[1])
            except ValueError:
                raise ParseError(lineno, f"edge id is not an integer: {tokens[1]!r}") from None
            fields: dict[str, str] = {}
            for tok in tokens[2:]:
                key, sep, value = tok.partition("=")
                if not sep or not value:
                    raise ParseError(lineno, f"expected key=value, got {tok!r}")
                if key not in _EDGE_KEYS:
                    raise ParseError(lineno, f"unknown key {key!r}")
                if key in fields:
                    raise ParseError(lineno, f"duplicate key {key!r}")
                fields[key] = value
            missing = [k for k in _EDGE_KEYS if k not in fields]
            if missing:
                raise ParseError(lineno, f"missing keys {missing}")
            length = _parse_float(fields["length"], lineno, "length")
            conductivity = _parse_float(fields["conductivity"], lineno, "conductivity")
            if length <= 0:
                raise NonpositiveLength(f"line {lineno}: length must be positive")
            if conductivity == 0:
                raise ZeroConductivity(f"line {lineno}: conductivity must be nonzero")
            edges.append(Edge(edge_id, length, conductivity, fields["from"], fields["to"]))
        elif head == "bc":
            if len(tokens) != 3:
                raise ParseError(lineno, "expected 'bc <vertex> dirichlet|neumann|kirchhoff'")
            kind = _KIND_ALIASES.get(tokens[2].lower()) if len(tokens[2]) > 1 else None
            if kind is None:
                raise ParseError(lineno, f"unknown condition {tokens[2]!r}")
            conditions.append(VertexCondition(tokens[1], kind))
        else:
            raise ParseError(lineno, f"unknown directive {head!r}")
    if not edges:
        raise EmptyGraph("document declares no edges")
    network = Network(tuple(edges), tuple(conditions), infer_topology(edges, conditions))
    validate(network)
    return network
