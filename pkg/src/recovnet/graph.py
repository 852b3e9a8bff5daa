"""Spatial contiguity networks over polygonal units.

Units become graph nodes; two units are neighbors when their boundaries
share coordinates (queen), a whole edge segment (rook), or a vertex only
(bishop). Coordinates are matched exactly by default, or after snapping
to a tolerance grid.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import sparse

from .errors import ConfigError, DataError

Coordinate = tuple[float, float]
Ring = tuple[Coordinate, ...]

CONTIGUITY_KINDS = ("queen", "rook", "bishop")


@dataclass(frozen=True)
class SpatialUnit:
    """One spatial unit: an opaque id plus optional polygon geometry.

    Geometry is a sequence of rings (outer ring first, holes after it),
    each ring an ordered sequence of (x, y) pairs. Rings must be closed
    (first coordinate equals last) and carry at least 4 entries.
    """

    id: str
    geometry: Optional[tuple[Ring, ...]] = None

    def __post_init__(self) -> None:
        if self.geometry is None:
            return
        rings = tuple(
            tuple((float(x), float(y)) for x, y in ring) for ring in self.geometry
        )
        for k, ring in enumerate(rings):
            if len(ring) < 4:
                raise DataError(
                    f"unit {self.id!r}: ring {k} has {len(ring)} coordinates, need >= 4"
                )
            if ring[0] != ring[-1]:
                raise DataError(f"unit {self.id!r}: ring {k} is not closed")
        object.__setattr__(self, "geometry", rings)


@dataclass(frozen=True)
class ContiguityRule:
    """Which boundary-sharing relation defines adjacency, plus vertex snapping.

    snap_tolerance > 0 matches coordinates after rounding them to a grid of
    that spacing; 0 requires exact coordinate equality.
    """

    kind: str = "queen"
    snap_tolerance: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in CONTIGUITY_KINDS:
            raise ConfigError(
                f"unknown contiguity kind {self.kind!r}, expected one of {CONTIGUITY_KINDS}"
            )
        if self.snap_tolerance < 0:
            raise ConfigError(f"snap_tolerance must be >= 0, got {self.snap_tolerance}")


class SpatialGraph:
    """Undirected graph over unit ids with symmetric adjacency.

    Node order is preserved from construction and defines the index used by
    every array-valued quantity downstream (states, thresholds). Edges are
    stored as lexicographically sorted id pairs.
    """

    def __init__(self, nodes: Sequence[str], edges: Iterable[tuple[str, str]]):
        node_list = [str(n) for n in nodes]
        seen: set[str] = set()
        for node in node_list:
            if node in seen:
                raise DataError(f"duplicate node id {node!r}")
            seen.add(node)
        self.nodes: tuple[str, ...] = tuple(node_list)
        self.index: dict[str, int] = {n: i for i, n in enumerate(self.nodes)}

        pair_set: set[tuple[str, str]] = set()
        adjacency: dict[str, set[str]] = {n: set() for n in self.nodes}
        for u, v in edges:
            u, v = str(u), str(v)
            if u not in self.index:
                raise DataError(f"edge ({u!r}, {v!r}): unknown endpoint {u!r}")
            if v not in self.index:
                raise DataError(f"edge ({u!r}, {v!r}): unknown endpoint {v!r}")
            if u == v:
                raise DataError(f"self-loop on node {u!r}")
            pair = (u, v) if u < v else (v, u)
            if pair in pair_set:
                raise DataError(f"duplicate edge ({pair[0]!r}, {pair[1]!r})")
            pair_set.add(pair)
            adjacency[u].add(v)
            adjacency[v].add(u)

        self.edges: tuple[tuple[str, str], ...] = tuple(sorted(pair_set))
        self._adjacency = {n: frozenset(nbrs) for n, nbrs in adjacency.items()}
        self.degrees: np.ndarray = np.array(
            [len(self._adjacency[n]) for n in self.nodes], dtype=np.int64
        )
        self.adjacency_matrix: sparse.csr_matrix = self._build_matrix()

    def _build_matrix(self) -> sparse.csr_matrix:
        n = len(self.nodes)
        rows, cols = [], []
        for u, v in self.edges:
            i, j = self.index[u], self.index[v]
            rows.extend((i, j))
            cols.extend((j, i))
        data = np.ones(len(rows), dtype=np.int64)
        return sparse.csr_matrix((data, (rows, cols)), shape=(n, n))

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbors(self, node_id: str) -> frozenset[str]:
        try:
            return self._adjacency[node_id]
        except KeyError:
            raise DataError(f"unknown node id {node_id!r}") from None

    def __repr__(self) -> str:
        return f"SpatialGraph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class GraphMetrics:
    """Size, average degree, density, and the degree histogram of a graph."""

    n: int
    m: int
    avg_degree: float
    density: float
    degree_histogram: dict[int, int]


def load_edge_list(node_ids: Sequence[str], edges: Iterable[tuple[str, str]]) -> SpatialGraph:
    """Build a graph from explicit nodes and undirected edge pairs.

    Rejects unknown endpoints, self-loops, and duplicate pairs (in either
    orientation), naming the offender.
    """
    return SpatialGraph(node_ids, edges)


def _snap_key(coord: Coordinate, tolerance: float) -> tuple:
    if tolerance == 0:
        return coord
    return (round(coord[0] / tolerance), round(coord[1] / tolerance))


def _boundary_keys(unit: SpatialUnit, tolerance: float) -> tuple[set, set]:
    """Snapped vertex keys and snapped edge-segment keys of a unit's boundary."""
    vertices: set = set()
    segments: set = set()
    for ring in unit.geometry or ():
        keys = [_snap_key(c, tolerance) for c in ring]
        vertices.update(keys)
        for a, b in zip(keys, keys[1:]):
            if a == b:  # segment collapsed by snapping
                continue
            segments.add((a, b) if a <= b else (b, a))
    return vertices, segments


def build_contiguity_graph(
    units: Iterable[SpatialUnit], rule: ContiguityRule = ContiguityRule()
) -> SpatialGraph:
    """Construct the contiguity graph of a unit collection under a rule.

    Two units are queen-adjacent iff they share at least one boundary
    coordinate (after snapping), rook-adjacent iff they share a whole edge
    segment, and bishop-adjacent iff queen- but not rook-adjacent.
    """
    unit_list = list(units)
    seen: set[str] = set()
    for unit in unit_list:
        if unit.id in seen:
            raise DataError(f"duplicate unit id {unit.id!r}")
        seen.add(unit.id)
        if unit.geometry is None:
            raise DataError(f"unit {unit.id!r} has no geometry")

    vertex_owners: dict[tuple, list[int]] = {}
    segment_owners: dict[tuple, list[int]] = {}
    for i, unit in enumerate(unit_list):
        vertices, segments = _boundary_keys(unit, rule.snap_tolerance)
        for key in vertices:
            vertex_owners.setdefault(key, []).append(i)
        for key in segments:
            segment_owners.setdefault(key, []).append(i)

    def shared_pairs(owners: dict[tuple, list[int]]) -> set[tuple[int, int]]:
        pairs: set[tuple[int, int]] = set()
        for members in owners.values():
            if len(members) > 1:
                pairs.update(itertools.combinations(sorted(members), 2))
        return pairs

    queen = shared_pairs(vertex_owners)
    rook = shared_pairs(segment_owners)
    if rule.kind == "queen":
        chosen = queen
    elif rule.kind == "rook":
        chosen = rook
    else:
        chosen = queen - rook

    ids = [u.id for u in unit_list]
    return SpatialGraph(ids, ((ids[i], ids[j]) for i, j in sorted(chosen)))


def graph_metrics(g: SpatialGraph) -> GraphMetrics:
    """Average degree k = 2m/n, density d = 2m/(n(n-1)), and degree counts."""
    if g.n < 1:
        raise DataError("graph has no nodes")
    avg_degree = 2.0 * g.m / g.n
    density = 0.0 if g.n == 1 else 2.0 * g.m / (g.n * (g.n - 1))
    histogram = dict(sorted(Counter(int(d) for d in g.degrees).items()))
    return GraphMetrics(
        n=g.n, m=g.m, avg_degree=avg_degree, density=density, degree_histogram=histogram
    )
